"""Joint optimization of offload ratios and server CPU shares at fixed rates.

The system latency is affine in each offload ratio once frequencies are fixed,
and convex in the frequencies once ratios are fixed. For fixed ratios the
frequency split has a closed-form water-filling solution (shares proportional
to the square root of the offloaded server cycles), extended here with
per-user lower bounds induced by the latency caps. For fixed frequencies the
optimal ratio of each user sits at an endpoint of its cap-feasible interval.
The solver alternates these two exact block steps from every on/off support
pattern (or a seeded subset when there are many users) and keeps the best
feasible point found.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import latency
from .latency import AllocationState, ServerProfile, UserProfile

# Relative slack applied when checking the latency caps and the budget.
FEASIBILITY_RTOL = 1e-9

_MAX_ENUMERATED_USERS = 12
_MAX_ALTERNATION_ROUNDS = 60


@dataclass
class AllocationProblem:
    """Allocation subproblem at fixed antenna positions.

    rates: per-user uplink rates (bit/s) at the current placement.
    latency_caps: per-user round latency upper bounds (seconds).
    """

    users: list[UserProfile]
    server: ServerProfile
    rates: np.ndarray
    latency_caps: np.ndarray

    def __post_init__(self) -> None:
        self.rates = np.asarray(self.rates, dtype=float)
        self.latency_caps = np.asarray(self.latency_caps, dtype=float)
        n = len(self.users)
        if self.rates.shape != (n,) or self.latency_caps.shape != (n,):
            raise ValueError("rates and latency_caps must have one entry per user")
        if np.any(self.rates <= 0):
            raise ValueError("rates must be positive")
        if np.any(self.latency_caps <= 0):
            raise ValueError("latency caps must be positive")

    @property
    def user_count(self) -> int:
        return len(self.users)

    def local_branch_latencies(self) -> np.ndarray:
        """Latency of keeping everything on the device: local work plus model upload."""
        return np.array(
            [
                latency.local_latency(u) + latency.upload_latency(u, float(r))
                for u, r in zip(self.users, self.rates)
            ]
        )

    def transfer_latencies(self) -> np.ndarray:
        """Full-dataset transfer latency per user."""
        return np.array(
            [latency.offload_transfer_latency(u, float(r)) for u, r in zip(self.users, self.rates)]
        )

    def server_cycle_counts(self) -> np.ndarray:
        return np.array([latency.server_cycles(u, self.server) for u in self.users])

    def local_point_c5_feasible(self) -> bool:
        """Whether the all-local point already satisfies every latency cap."""
        local = self.local_branch_latencies()
        return bool(np.all(local <= self.latency_caps * (1 + FEASIBILITY_RTOL)))


@dataclass
class AllocationSolution:
    allocation: AllocationState
    objective: float
    kkt_residual: float
    feasible: bool


def objective(problem: AllocationProblem, allocation: AllocationState) -> float:
    """Total latency at an allocation; +inf if someone offloads with no CPU share."""
    return float(np.sum(per_user_latencies(problem, allocation)))


def per_user_latencies(problem: AllocationProblem, allocation: AllocationState) -> np.ndarray:
    beta = allocation.offload_ratios
    f = allocation.server_frequencies
    local = problem.local_branch_latencies()
    transfer = problem.transfer_latencies()
    cycles = problem.server_cycle_counts()
    out = (1.0 - beta) * local
    server_part = np.zeros_like(out)
    powered = (beta > 0) & (f > 0)
    server_part[powered] = beta[powered] * (transfer[powered] + cycles[powered] / f[powered])
    server_part[(beta > 0) & ~(f > 0)] = np.inf
    return out + server_part


def objective_gradients(
    problem: AllocationProblem, allocation: AllocationState
) -> tuple[np.ndarray, np.ndarray]:
    """(d/d beta, d/d f) of the total latency.

    Where a user is fully local with no share (beta = 0, f = 0) the server term
    is absent: the f component is defined as 0 and the beta component is +inf,
    reflecting that offloading without CPU is unboundedly bad.
    """
    beta = allocation.offload_ratios
    f = allocation.server_frequencies
    local = problem.local_branch_latencies()
    transfer = problem.transfer_latencies()
    cycles = problem.server_cycle_counts()
    grad_beta = np.where(
        f > 0,
        transfer + np.where(f > 0, cycles / np.where(f > 0, f, 1.0), 0.0) - local,
        np.inf,
    )
    grad_f = np.where((beta > 0) & (f > 0), -beta * cycles / np.where(f > 0, f, 1.0) ** 2, 0.0)
    return grad_beta, grad_f


def hessian_f_diagonal(problem: AllocationProblem, allocation: AllocationState, n: int) -> float:
    """Second derivative of the total latency in one server frequency.

    2 * cycles_n * beta_n / f_n^3 for an offloading user, 0 otherwise.
    """
    beta = float(allocation.offload_ratios[n])
    if beta == 0.0:
        return 0.0
    f = float(allocation.server_frequencies[n])
    cycles = float(problem.server_cycle_counts()[n])
    return 2.0 * cycles * beta / f**3


def is_feasible(
    problem: AllocationProblem, allocation: AllocationState, rtol: float = FEASIBILITY_RTOL
) -> bool:
    beta = allocation.offload_ratios
    f = allocation.server_frequencies
    if np.any(beta < -rtol) or np.any(beta > 1 + rtol):
        return False
    if np.any(f < 0) or np.any((beta > 0) & (f <= 0)):
        return False
    if f.sum() > problem.server.max_total_frequency * (1 + rtol):
        return False
    lat = per_user_latencies(problem, allocation)
    return bool(np.all(lat <= problem.latency_caps * (1 + rtol)))


def _solve_frequencies(
    problem: AllocationProblem, beta: np.ndarray
) -> np.ndarray | None:
    """Optimal CPU shares for fixed ratios, respecting caps and the budget.

    Within the offloading support the split minimizes the summed execution
    latencies: shares proportional to sqrt(beta * cycles), lifted to cap-induced
    lower bounds by pinning. Returns None when the caps cannot be met.
    """
    local = problem.local_branch_latencies()
    transfer = problem.transfer_latencies()
    cycles = problem.server_cycle_counts()
    caps = problem.latency_caps
    fbar = problem.server.max_total_frequency

    f = np.zeros_like(beta)
    active = np.flatnonzero(beta > 0)
    if active.size == 0:
        return f

    slack = caps[active] - (1.0 - beta[active]) * local[active] - beta[active] * transfer[active]
    if np.any(slack <= 0):
        return None
    bounds = beta[active] * cycles[active] / slack
    if bounds.sum() > fbar * (1 + FEASIBILITY_RTOL):
        return None

    weights = np.sqrt(beta[active] * cycles[active])
    pinned = np.zeros(active.size, dtype=bool)
    shares = np.zeros(active.size)
    for _ in range(active.size + 1):
        budget = fbar - bounds[pinned].sum()
        denom = weights[~pinned].sum()
        if denom <= 0:
            break
        shares[~pinned] = budget * weights[~pinned] / denom
        shares[pinned] = bounds[pinned]
        newly = (~pinned) & (shares < bounds)
        if not newly.any():
            break
        pinned |= newly
    shares = np.maximum(shares, bounds)
    f[active] = shares
    return f


def _best_ratios_given_frequencies(
    problem: AllocationProblem, beta: np.ndarray, f: np.ndarray
) -> np.ndarray | None:
    """Per-user optimal ratio for fixed shares: an endpoint of the cap-feasible interval."""
    local = problem.local_branch_latencies()
    transfer = problem.transfer_latencies()
    cycles = problem.server_cycle_counts()
    caps = problem.latency_caps
    out = np.zeros_like(beta)
    for n in range(beta.size):
        if f[n] <= 0:
            if local[n] > caps[n] * (1 + FEASIBILITY_RTOL):
                return None
            out[n] = 0.0
            continue
        slope = transfer[n] + cycles[n] / f[n] - local[n]
        if slope > 0:
            if local[n] > caps[n] * (1 + FEASIBILITY_RTOL):
                return None
            out[n] = 0.0
        elif slope < 0:
            if local[n] + slope > caps[n] * (1 + FEASIBILITY_RTOL):
                return None
            out[n] = 1.0
        else:
            if local[n] > caps[n] * (1 + FEASIBILITY_RTOL):
                return None
            out[n] = beta[n]
    return out


def _alternate(
    problem: AllocationProblem, beta0: np.ndarray, tolerance: float
) -> tuple[np.ndarray, np.ndarray] | None:
    beta = beta0.astype(float).copy()
    best: tuple[np.ndarray, np.ndarray] | None = None
    best_value = math.inf
    for _ in range(_MAX_ALTERNATION_ROUNDS):
        f = _solve_frequencies(problem, beta)
        if f is None:
            return best
        value = objective(problem, AllocationState(beta, f))
        if value < best_value:
            best_value = value
            best = (beta.copy(), f.copy())
        new_beta = _best_ratios_given_frequencies(problem, beta, f)
        if new_beta is None:
            return best
        if np.max(np.abs(new_beta - beta)) <= tolerance:
            beta = new_beta
            f = _solve_frequencies(problem, beta)
            if f is not None:
                value = objective(problem, AllocationState(beta, f))
                if value < best_value:
                    best = (beta.copy(), f.copy())
            return best
        beta = new_beta
    return best


def _support_starts(problem: AllocationProblem, rng_seed: int = 0) -> list[np.ndarray]:
    n = problem.user_count
    if n <= _MAX_ENUMERATED_USERS:
        return [np.array(bits, dtype=float) for bits in itertools.product((0.0, 1.0), repeat=n)]
    rng = np.random.default_rng(rng_seed)
    starts = [np.zeros(n), np.ones(n)]
    for _ in range(256):
        starts.append(rng.integers(0, 2, size=n).astype(float))
    return starts


def _least_violating(problem: AllocationProblem) -> AllocationState:
    """Fallback point when the caps cannot all be met: minimize squared overrun."""
    local = problem.local_branch_latencies()
    transfer = problem.transfer_latencies()
    cycles = problem.server_cycle_counts()
    caps = problem.latency_caps
    fbar = problem.server.max_total_frequency

    needy = local > caps
    candidates = [AllocationState.local_only(problem.user_count)]
    if needy.any():
        beta = needy.astype(float)
        slack = np.maximum(caps[needy] - transfer[needy], 0.0)
        with np.errstate(divide="ignore"):
            req = np.where(slack > 0, cycles[needy] / np.where(slack > 0, slack, 1.0), np.inf)
        f = np.zeros(problem.user_count)
        finite = np.isfinite(req)
        if finite.any() and req[finite].sum() > 0:
            scale = min(1.0, fbar / req[finite].sum())
            vals = np.zeros(needy.sum())
            vals[finite] = req[finite] * scale
            vals[~finite] = 0.0
            leftover = fbar - vals.sum()
            if (~finite).any() and leftover > 0:
                vals[~finite] = leftover / (~finite).sum()
            f[needy] = vals
        else:
            f[needy] = fbar / needy.sum()
        drop = needy & (f <= 0)
        if drop.any():
            beta[drop] = 0.0
            f[drop] = 0.0
        candidates.append(AllocationState(beta, f))

    def violation(state: AllocationState) -> float:
        lat = per_user_latencies(problem, state)
        over = np.maximum(lat - caps, 0.0)
        over = np.where(np.isfinite(over), over, 1e30)
        return float(np.sum(over**2))

    return min(candidates, key=violation)


def solve_allocation(
    problem: AllocationProblem,
    tolerance: float = 1e-6,
    initial: AllocationState | None = None,
) -> AllocationSolution:
    """Minimize total latency over ratios and shares under box, budget and caps.

    Exact for the enumerated-support regime: the reduced objective is concave
    in the ratios, so the optimum sits at an on/off support with water-filled
    shares. `initial`, when given and feasible, is kept as a candidate so the
    returned objective never exceeds it.
    """
    candidates: list[tuple[float, AllocationState]] = []
    if initial is not None and is_feasible(problem, initial):
        candidates.append((objective(problem, initial), initial))

    for beta0 in _support_starts(problem):
        result = _alternate(problem, beta0, tolerance)
        if result is None:
            continue
        beta, f = result
        state = AllocationState(beta, f)
        if is_feasible(problem, state):
            candidates.append((objective(problem, state), state))

    if not candidates:
        state = _least_violating(problem)
        state = _project_bounds(problem, state)
        return AllocationSolution(
            allocation=state,
            objective=objective(problem, state),
            kkt_residual=kkt_residual(problem, state),
            feasible=False,
        )

    value, state = min(candidates, key=lambda item: item[0])
    state = _project_bounds(problem, state)
    return AllocationSolution(
        allocation=state,
        objective=objective(problem, state),
        kkt_residual=kkt_residual(problem, state),
        feasible=True,
    )


def _project_bounds(problem: AllocationProblem, state: AllocationState) -> AllocationState:
    """Final exact projection onto the box and the budget."""
    beta = np.clip(state.offload_ratios, 0.0, 1.0)
    f = np.maximum(state.server_frequencies, 0.0)
    total = f.sum()
    fbar = problem.server.max_total_frequency
    if total > fbar:
        f = f * (fbar / total)
    f = np.where(beta > 0, f, 0.0)
    return AllocationState(beta, f)


def threshold_round(
    problem: AllocationProblem, allocation: AllocationState, threshold: float = 0.5
) -> AllocationState:
    """Map ratios to 0/1 (values at the threshold round up) and re-split shares.

    With ratios binary the share split minimizing the summed execution
    latencies under the budget alone is proportional to sqrt(cycles), using
    the whole budget.
    """
    beta = np.where(allocation.offload_ratios >= threshold, 1.0, 0.0)
    cycles = problem.server_cycle_counts()
    f = np.zeros_like(beta)
    active = beta > 0
    if active.any():
        weights = np.sqrt(cycles[active])
        f[active] = problem.server.max_total_frequency * weights / weights.sum()
    return AllocationState(beta, f)


def _project_capped_simplex(y: np.ndarray, cap: float) -> np.ndarray:
    """Euclidean projection onto {u >= 0, sum(u) <= cap}."""
    clipped = np.maximum(y, 0.0)
    if clipped.sum() <= cap:
        return clipped
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - cap
    idx = np.arange(1, y.size + 1)
    valid = u - css / idx > 0
    rho = idx[valid][-1]
    tau = css[rho - 1] / rho
    return np.maximum(y - tau, 0.0)


def kkt_residual(problem: AllocationProblem, allocation: AllocationState) -> float:
    """Stationarity measure: displacement of a unit projected-gradient step.

    Variables are scaled (ratios as-is, shares relative to the budget) and the
    gradient is normalized by the objective magnitude, so the residual is
    dimensionless and 0 at an exact constrained optimum. Active latency caps
    remove the gradient component that would increase the capped latency.
    """
    beta = allocation.offload_ratios.astype(float)
    fbar = problem.server.max_total_frequency
    f_scaled = allocation.server_frequencies / fbar

    value = objective(problem, allocation)
    scale = max(abs(value), 1e-30)
    grad_beta, grad_f = objective_gradients(problem, allocation)
    g_beta = grad_beta / scale
    g_f = grad_f * fbar / scale

    lat = per_user_latencies(problem, allocation)
    caps = problem.latency_caps
    active = lat >= caps * (1 - 1e-9)
    d_beta = -g_beta
    d_f = -g_f
    for n in np.flatnonzero(active):
        c_vec = np.array([grad_beta[n] / scale, grad_f[n] * fbar / scale])
        if not np.all(np.isfinite(c_vec)):
            continue
        norm_sq = float(c_vec @ c_vec)
        if norm_sq <= 0:
            continue
        d_vec = np.array([d_beta[n], d_f[n]])
        along = float(c_vec @ d_vec)
        if along > 0:
            d_vec = d_vec - (along / norm_sq) * c_vec
            d_beta[n], d_f[n] = d_vec

    new_beta = np.clip(beta + d_beta, 0.0, 1.0)
    new_f = _project_capped_simplex(f_scaled + d_f, 1.0)
    return float(max(np.max(np.abs(new_beta - beta)), np.max(np.abs(new_f - f_scaled))))
