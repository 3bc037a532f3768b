"""Uplink channel model for a base station with movable receive antennas.

Each receive antenna can be repositioned inside a square region. Under the
far-field assumption the angles of arrival and per-path complex gains of every
user are fixed; moving an antenna only changes the phase each path accumulates.
The channel vector of a user is therefore a deterministic function of the
antenna coordinates, and the receiver applies zero-forcing combining across
users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficientChannel

# Reciprocal condition number of the channel matrix below which zero-forcing
# is refused.
RCOND_THRESHOLD = 1e-10


@dataclass(frozen=True)
class PlanarPosition:
    """Antenna coordinates (meters) inside the movable region."""

    x: float
    y: float


@dataclass
class UserChannelSpec:
    """Static propagation description of one uplink user.

    elevation_aoas / azimuth_aoas: per-path angles of arrival (radians).
    path_gains: per-path complex gains.
    transmit_power: uplink power in watts.
    distance_to_bs: user-to-base-station distance in meters.
    """

    elevation_aoas: np.ndarray
    azimuth_aoas: np.ndarray
    path_gains: np.ndarray
    transmit_power: float
    distance_to_bs: float

    def __post_init__(self) -> None:
        self.elevation_aoas = np.asarray(self.elevation_aoas, dtype=float)
        self.azimuth_aoas = np.asarray(self.azimuth_aoas, dtype=float)
        self.path_gains = np.asarray(self.path_gains, dtype=complex)
        lengths = {
            self.elevation_aoas.shape,
            self.azimuth_aoas.shape,
            self.path_gains.shape,
        }
        if len(lengths) != 1 or self.elevation_aoas.ndim != 1:
            raise ValueError("per-path arrays must share one 1-D shape")
        if self.elevation_aoas.size < 1:
            raise ValueError("at least one propagation path is required")
        if not self.transmit_power > 0:
            raise ValueError("transmit power must be positive")
        if not self.distance_to_bs > 0:
            raise ValueError("distance must be positive")

    @property
    def path_count(self) -> int:
        return int(self.path_gains.size)


@dataclass
class ChannelMatrix:
    """Stacked per-user channel vectors (antennas x users) with the positions used."""

    entries: np.ndarray
    antenna_positions: list[PlanarPosition]


@dataclass
class CombiningMatrix:
    """Receive combining vectors, one column per user."""

    entries: np.ndarray


def phase_difference(position: PlanarPosition, elevation_aoa: float, azimuth_aoa: float) -> float:
    """Path-length difference (meters) of one path at an antenna position.

    Measured against the region origin: x * sin(elevation) * cos(azimuth)
    + y * cos(elevation).
    """
    return position.x * math.sin(elevation_aoa) * math.cos(azimuth_aoa) + position.y * math.cos(
        elevation_aoa
    )


def field_response_vector(
    position: PlanarPosition, spec: UserChannelSpec, wavelength: float
) -> np.ndarray:
    """Per-path unit-modulus phase factors seen by one antenna position."""
    rho = position.x * np.sin(spec.elevation_aoas) * np.cos(spec.azimuth_aoas) + (
        position.y * np.cos(spec.elevation_aoas)
    )
    return np.exp(1j * (2.0 * np.pi / wavelength) * rho)


def channel_vector(
    positions: list[PlanarPosition], spec: UserChannelSpec, wavelength: float
) -> np.ndarray:
    """Channel vector of one user across all antenna positions.

    Entry m is the conjugated field response at antenna m multiplied into the
    path gains and summed over paths.
    """
    out = np.empty(len(positions), dtype=complex)
    for m, pos in enumerate(positions):
        out[m] = np.conj(field_response_vector(pos, spec, wavelength)) @ spec.path_gains
    return out


def build_channel_matrix(
    positions: list[PlanarPosition], specs: list[UserChannelSpec], wavelength: float
) -> ChannelMatrix:
    """Assemble the antennas-by-users channel matrix for a set of users."""
    entries = np.column_stack([channel_vector(positions, s, wavelength) for s in specs])
    return ChannelMatrix(entries=entries, antenna_positions=list(positions))


def channel_rcond(entries: np.ndarray) -> float:
    """Reciprocal condition number of a channel matrix.

    Computed from the spectrum of the Gram matrix: sqrt(lambda_min/lambda_max).
    """
    gram = entries.conj().T @ entries
    eigvals = np.linalg.eigvalsh(gram)
    lmax = float(eigvals[-1])
    lmin = float(eigvals[0])
    if not lmax > 0 or not np.isfinite(lmax):
        return 0.0
    return math.sqrt(max(lmin, 0.0) / lmax)


def zf_combining_matrix(
    channel: ChannelMatrix, rcond_threshold: float = RCOND_THRESHOLD
) -> CombiningMatrix:
    """Zero-forcing combiner W = H (H^H H)^{-1}.

    W^H H = I, so each user's combined output carries no residual
    inter-user interference. Raises RankDeficientChannel when the matrix has
    fewer antennas than users or its reciprocal condition number falls below
    the threshold.
    """
    h = channel.entries
    m, n = h.shape
    if m < n:
        raise RankDeficientChannel(f"{n} users need at least {n} antennas, got {m}")
    rcond = channel_rcond(h)
    if rcond < rcond_threshold:
        raise RankDeficientChannel(
            f"reciprocal condition number {rcond:.3e} below threshold {rcond_threshold:.1e}"
        )
    gram = h.conj().T @ h
    # W^H = gram^{-1} H^H, solved instead of inverting explicitly.
    w_h = np.linalg.solve(gram, h.conj().T)
    return CombiningMatrix(entries=w_h.conj().T)


def per_user_rate(
    channel: ChannelMatrix,
    combiner: CombiningMatrix,
    user_index: int,
    transmit_power: float,
    noise_power: float,
    bandwidth: float,
) -> float:
    """Achievable uplink rate (bit/s) of one user under zero-forcing.

    With interference nulled the post-combining SNR is
    transmit_power / (||w||^2 * noise_power).
    """
    w = combiner.entries[:, user_index]
    norm_sq = float(np.real(w.conj() @ w))
    snr = transmit_power / (norm_sq * noise_power)
    return bandwidth * math.log2(1.0 + snr)


def rates_for_positions(
    positions: list[PlanarPosition],
    specs: list[UserChannelSpec],
    wavelength: float,
    noise_power: float,
    bandwidth: float,
) -> np.ndarray:
    """All users' zero-forcing rates at a given antenna placement."""
    channel = build_channel_matrix(positions, specs, wavelength)
    combiner = zf_combining_matrix(channel)
    return np.array(
        [
            per_user_rate(channel, combiner, n, specs[n].transmit_power, noise_power, bandwidth)
            for n in range(len(specs))
        ]
    )


def reference_grid(count: int, spacing: float) -> list[PlanarPosition]:
    """Fixed benchmark placement: a uniform grid centered on the origin.

    Rows and columns are the tightest near-square arrangement at the given
    spacing; for count=4 this is the four points (+-spacing/2, +-spacing/2).
    """
    if count < 1:
        raise ValueError("count must be positive")
    cols = math.ceil(math.sqrt(count))
    rows = math.ceil(count / cols)
    positions = []
    for idx in range(count):
        r, c = divmod(idx, cols)
        x = (c - (cols - 1) / 2.0) * spacing
        y = (r - (rows - 1) / 2.0) * spacing
        positions.append(PlanarPosition(x, y))
    return positions


def positions_to_vector(positions: list[PlanarPosition]) -> np.ndarray:
    """Flatten positions to the (x1, y1, ..., xM, yM) layout used by the optimizer."""
    out = np.empty(2 * len(positions))
    for m, pos in enumerate(positions):
        out[2 * m] = pos.x
        out[2 * m + 1] = pos.y
    return out


def vector_to_positions(vector: np.ndarray) -> list[PlanarPosition]:
    """Inverse of positions_to_vector."""
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.size % 2 != 0:
        raise ValueError("position vector must be 1-D with an even length")
    return [
        PlanarPosition(float(vector[2 * m]), float(vector[2 * m + 1]))
        for m in range(vector.size // 2)
    ]
