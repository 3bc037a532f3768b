"""Pure-numpy fitness kernel: the fallback when the compiled core is absent.

Evaluates candidate antenna placements in one vectorized batch. Semantics are
shared with famec._core; famec.kernels picks whichever is available.
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def fitness_batch(
    positions: np.ndarray,
    coeff_x: np.ndarray,
    coeff_y: np.ndarray,
    path_gains: np.ndarray,
    wave_number: float,
    power_over_noise: np.ndarray,
    bandwidth: float,
    latency_const: np.ndarray,
    latency_bits: np.ndarray,
    latency_caps: np.ndarray,
    tau_latency: float,
    tau_distance: float,
    min_spacing_sq: float,
    rcond_sq_min: float,
    sentinel: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Penalized objective of a batch of placements.

    positions: (P, 2M) rows of (x1, y1, ..., xM, yM).
    coeff_x / coeff_y: (N, L) direction cosines multiplying x and y in the
        per-path propagation delay.
    path_gains: (N, L) complex gains.
    power_over_noise: per-user transmit power divided by noise power.
    latency_const / latency_bits: per-user latency written as
        const + bits / rate at the current allocation.
    Returns (fitness, total_latency); placements whose channel matrix fails
    the conditioning threshold get the sentinel fitness and a NaN latency.
    """
    positions = np.asarray(positions, dtype=float)
    batch = positions.shape[0]
    m_count = positions.shape[1] // 2
    xy = positions.reshape(batch, m_count, 2)

    # Channel matrices for the whole batch: H[p, m, n].
    phase = wave_number * (
        xy[:, :, None, None, 0] * coeff_x[None, None, :, :]
        + xy[:, :, None, None, 1] * coeff_y[None, None, :, :]
    )
    h = np.einsum("pmnl,nl->pmn", np.exp(-1j * phase), path_gains)

    gram = np.einsum("pmi,pmj->pij", h.conj(), h)
    eigvals, eigvecs = np.linalg.eigh(gram)
    lam_min = eigvals[:, 0]
    lam_max = eigvals[:, -1]
    bad = ~np.isfinite(lam_max) | (lam_max <= 0) | (lam_min < rcond_sq_min * lam_max)

    safe = np.where(eigvals > 0, eigvals, 1.0)
    # Diagonal of the inverse Gram matrix: combining-vector norms under zero forcing.
    diag_inv = np.einsum("pnk,pk->pn", np.abs(eigvecs) ** 2, 1.0 / safe)
    snr = power_over_noise[None, :] / diag_inv
    rates = bandwidth * np.log2(1.0 + snr)

    per_user = latency_const[None, :] + latency_bits[None, :] / rates
    total = per_user.sum(axis=1)

    overrun = np.maximum(per_user - latency_caps[None, :], 0.0)
    penalty = tau_latency * np.sum(overrun**2, axis=1)

    if m_count > 1:
        ii, jj = np.triu_indices(m_count, k=1)
        diff = xy[:, ii, :] - xy[:, jj, :]
        dist_sq = np.sum(diff**2, axis=2)
        penalty = penalty + tau_distance * np.sum(dist_sq < min_spacing_sq, axis=1)

    fitness = total + penalty
    fitness = np.where(bad, sentinel, fitness)
    total = np.where(bad, np.nan, total)
    return fitness, total
