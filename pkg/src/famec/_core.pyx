# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fitness kernel.

Same contract as famec._core_py.fitness_batch; see that module for parameter
documentation. Complex values are handled as interleaved (re, im) doubles so
the hot loop stays in plain C arithmetic, and the LAPACK Hermitian
eigendecomposition supplies the combining-vector norms and the conditioning
check in one call.
"""

import numpy as np

from libc.math cimport NAN, cos, log2, sin
from scipy.linalg.cython_lapack cimport zheevd

COMPILED = True


def fitness_batch(positions, coeff_x, coeff_y, path_gains, double wave_number,
                  power_over_noise, double bandwidth, latency_const, latency_bits,
                  latency_caps, double tau_latency, double tau_distance,
                  double min_spacing_sq, double rcond_sq_min, double sentinel):
    pos_arr = np.ascontiguousarray(positions, dtype=np.float64)
    cx_arr = np.ascontiguousarray(coeff_x, dtype=np.float64)
    cy_arr = np.ascontiguousarray(coeff_y, dtype=np.float64)
    gains_c = np.ascontiguousarray(path_gains, dtype=np.complex128)
    # Interleaved (re, im) view: column 2l is Re(g[n, l]), column 2l+1 is Im.
    gains_f = gains_c.view(np.float64)
    pon_arr = np.ascontiguousarray(power_over_noise, dtype=np.float64)
    lc_arr = np.ascontiguousarray(latency_const, dtype=np.float64)
    lb_arr = np.ascontiguousarray(latency_bits, dtype=np.float64)
    caps_arr = np.ascontiguousarray(latency_caps, dtype=np.float64)

    cdef double[:, ::1] pos = pos_arr
    cdef double[:, ::1] cx = cx_arr
    cdef double[:, ::1] cy = cy_arr
    cdef double[:, ::1] gains = gains_f
    cdef double[::1] pon = pon_arr
    cdef double[::1] lconst = lc_arr
    cdef double[::1] lbits = lb_arr
    cdef double[::1] caps = caps_arr

    cdef int batch = pos.shape[0]
    cdef int m_count = pos.shape[1] // 2
    cdef int n_count = cx.shape[0]
    cdef int l_count = cx.shape[1]

    fitness_arr = np.empty(batch, dtype=np.float64)
    latency_arr = np.empty(batch, dtype=np.float64)
    cdef double[::1] fitness = fitness_arr
    cdef double[::1] latency = latency_arr

    # Channel matrix as interleaved doubles: h[m, 2n] + i*h[m, 2n+1].
    h_arr = np.empty((m_count, 2 * n_count), dtype=np.float64)
    cdef double[:, ::1] h = h_arr
    # Gram matrix buffer handed to LAPACK, with a float view for element access.
    gram_c = np.empty(n_count * n_count, dtype=np.complex128)
    gram_f = gram_c.view(np.float64)
    cdef double complex[::1] gram = gram_c
    cdef double[::1] gd = gram_f
    w_arr = np.empty(n_count, dtype=np.float64)
    cdef double[::1] w = w_arr

    cdef int lwork = n_count * n_count + 2 * n_count + 16
    cdef int lrwork = 2 * n_count * n_count + 5 * n_count + 16
    cdef int liwork = 5 * n_count + 16
    work_arr = np.empty(lwork, dtype=np.complex128)
    rwork_arr = np.empty(lrwork, dtype=np.float64)
    iwork_arr = np.empty(liwork, dtype=np.intc)
    cdef double complex[::1] work = work_arr
    cdef double[::1] rwork = rwork_arr
    cdef int[::1] iwork = iwork_arr

    cdef int p, m, n, l, i, j, k, info, violations, idx
    cdef double x, y, ph, cph, sph, gre, gim
    cdef double acc_re, acc_im, s_re, s_im
    cdef double are, aim, bre, bim
    cdef double diag, rate, total, pen, dx, dy, over, vre, vim
    cdef char jobz = b'V'
    cdef char uplo = b'L'

    with nogil:
        for p in range(batch):
            for m in range(m_count):
                x = pos[p, 2 * m]
                y = pos[p, 2 * m + 1]
                for n in range(n_count):
                    acc_re = 0.0
                    acc_im = 0.0
                    for l in range(l_count):
                        ph = wave_number * (x * cx[n, l] + y * cy[n, l])
                        cph = cos(ph)
                        sph = -sin(ph)
                        gre = gains[n, 2 * l]
                        gim = gains[n, 2 * l + 1]
                        acc_re += gre * cph - gim * sph
                        acc_im += gre * sph + gim * cph
                    h[m, 2 * n] = acc_re
                    h[m, 2 * n + 1] = acc_im
            # Gram = H^H H, Hermitian; fill both triangles of the flat buffer.
            for i in range(n_count):
                for j in range(i, n_count):
                    s_re = 0.0
                    s_im = 0.0
                    for m in range(m_count):
                        are = h[m, 2 * i]
                        aim = -h[m, 2 * i + 1]
                        bre = h[m, 2 * j]
                        bim = h[m, 2 * j + 1]
                        s_re += are * bre - aim * bim
                        s_im += are * bim + aim * bre
                    idx = i * n_count + j
                    gd[2 * idx] = s_re
                    gd[2 * idx + 1] = s_im
                    if j != i:
                        idx = j * n_count + i
                        gd[2 * idx] = s_re
                        gd[2 * idx + 1] = -s_im
            info = 0
            zheevd(&jobz, &uplo, &n_count, &gram[0], &n_count, &w[0], &work[0],
                   &lwork, &rwork[0], &lrwork, &iwork[0], &liwork, &info)
            if info != 0 or not (w[n_count - 1] > 0.0) or w[0] < rcond_sq_min * w[n_count - 1]:
                fitness[p] = sentinel
                latency[p] = NAN
                continue
            total = 0.0
            pen = 0.0
            for n in range(n_count):
                # Diagonal of the inverse Gram from its eigendecomposition.
                diag = 0.0
                for k in range(n_count):
                    idx = n + k * n_count
                    vre = gd[2 * idx]
                    vim = gd[2 * idx + 1]
                    diag += (vre * vre + vim * vim) / w[k]
                rate = bandwidth * log2(1.0 + pon[n] / diag)
                over = lconst[n] + lbits[n] / rate
                total += over
                over = over - caps[n]
                if over > 0.0:
                    pen += tau_latency * over * over
            violations = 0
            for i in range(m_count):
                for j in range(i + 1, m_count):
                    dx = pos[p, 2 * i] - pos[p, 2 * j]
                    dy = pos[p, 2 * i + 1] - pos[p, 2 * j + 1]
                    if dx * dx + dy * dy < min_spacing_sq:
                        violations += 1
            pen += tau_distance * violations
            fitness[p] = total + pen
            latency[p] = total
    return fitness_arr, latency_arr
