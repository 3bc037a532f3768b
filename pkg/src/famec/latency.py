"""Per-user latency model for partial offloading of a training workload.

A user splits its dataset: a fraction is offloaded to the edge server, the
rest is processed locally. Local work and the model upload happen for the
retained fraction; the offloaded fraction pays dataset transfer plus server
execution. All latencies are in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroFrequency, ZeroRate


@dataclass
class UserProfile:
    """Compute task of one user.

    data_size: dataset size in bits.
    cycles_per_bit: CPU cycles needed per bit.
    minibatch_ratio: fraction of the data touched per training iteration.
    local_iterations: training iterations executed per round.
    local_cpu_frequency: device CPU speed in Hz.
    model_size_factor: model bits uploaded per dataset bit.
    """

    data_size: float
    cycles_per_bit: float
    minibatch_ratio: float
    local_iterations: float
    local_cpu_frequency: float
    model_size_factor: float

    def __post_init__(self) -> None:
        for name in (
            "data_size",
            "cycles_per_bit",
            "minibatch_ratio",
            "local_iterations",
            "local_cpu_frequency",
            "model_size_factor",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ServerProfile:
    """Edge server compute characteristics (same conventions as UserProfile)."""

    cycles_per_bit: float
    minibatch_ratio: float
    server_iterations: float
    max_total_frequency: float

    def __post_init__(self) -> None:
        for name in ("cycles_per_bit", "minibatch_ratio", "server_iterations", "max_total_frequency"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class AllocationState:
    """Offloading decision: per-user offload ratios and server CPU shares (Hz)."""

    offload_ratios: np.ndarray
    server_frequencies: np.ndarray

    def __post_init__(self) -> None:
        self.offload_ratios = np.asarray(self.offload_ratios, dtype=float)
        self.server_frequencies = np.asarray(self.server_frequencies, dtype=float)
        if self.offload_ratios.shape != self.server_frequencies.shape:
            raise ValueError("ratio and frequency arrays must have the same shape")

    @classmethod
    def local_only(cls, user_count: int) -> "AllocationState":
        return cls(np.zeros(user_count), np.zeros(user_count))

    def validate(self, max_total_frequency: float, tol: float = 1e-9) -> None:
        beta = self.offload_ratios
        f = self.server_frequencies
        if np.any(beta < -tol) or np.any(beta > 1 + tol):
            raise ValueError("offload ratios must lie in [0, 1]")
        if np.any(f < -tol):
            raise ValueError("server frequencies must be nonnegative")
        if np.any((beta > tol) & (f <= 0)):
            raise ValueError("offloading users need a positive server frequency")
        if f.sum() > max_total_frequency * (1 + tol):
            raise ValueError("server frequency budget exceeded")


def local_latency(user: UserProfile) -> float:
    """Time to process the full dataset on the device."""
    cycles = user.cycles_per_bit * user.data_size * user.minibatch_ratio * user.local_iterations
    return cycles / user.local_cpu_frequency


def upload_latency(user: UserProfile, rate: float) -> float:
    """Time to upload the locally trained model."""
    if rate <= 0:
        raise ZeroRate("upload latency undefined for a nonpositive rate")
    return user.model_size_factor * user.data_size / rate


def offload_transfer_latency(user: UserProfile, rate: float) -> float:
    """Time to ship the full dataset to the server."""
    if rate <= 0:
        raise ZeroRate("transfer latency undefined for a nonpositive rate")
    return user.data_size / rate


def server_cycles(user: UserProfile, server: ServerProfile) -> float:
    """CPU cycles the server spends on one user's full dataset."""
    return server.cycles_per_bit * user.data_size * server.minibatch_ratio * server.server_iterations


def server_exec_latency(user: UserProfile, server: ServerProfile, frequency: float) -> float:
    """Time for the server to process the full dataset at a CPU share."""
    if frequency <= 0:
        raise ZeroFrequency("execution latency undefined for a nonpositive frequency")
    return server_cycles(user, server) / frequency


def user_total_latency(
    user: UserProfile,
    server: ServerProfile,
    offload_ratio: float,
    server_frequency: float,
    rate: float,
) -> float:
    """Round latency of one user at an offload split.

    (1 - beta) * (local + upload) + beta * (transfer + execution); a zero
    ratio short-circuits the server terms so no frequency is needed.
    """
    retained = (1.0 - offload_ratio) * (local_latency(user) + upload_latency(user, rate))
    if offload_ratio == 0.0:
        return retained
    offloaded = offload_ratio * (
        offload_transfer_latency(user, rate) + server_exec_latency(user, server, server_frequency)
    )
    return retained + offloaded


def system_total_latency(
    users: list[UserProfile],
    server: ServerProfile,
    allocation: AllocationState,
    rates: np.ndarray,
) -> float:
    """Sum of per-user round latencies."""
    return float(
        sum(
            user_total_latency(
                users[n],
                server,
                float(allocation.offload_ratios[n]),
                float(allocation.server_frequencies[n]),
                float(rates[n]),
            )
            for n in range(len(users))
        )
    )
