# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled texture-matrix kernels.

Same contract as ``frd._texture_py``: 3D int32 level arrays, 0 = out-of-ROI,
in-ROI levels 1..num_levels. 2D grids arrive as (1, H, W).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

NAME = "compiled"


def glcm_pairs(const int[:, :, ::1] levels, int num_levels, offset):
    cdef Py_ssize_t o0 = offset[0], o1 = offset[1], o2 = offset[2]
    cdef Py_ssize_t n0 = levels.shape[0], n1 = levels.shape[1], n2 = levels.shape[2]
    out = np.zeros((num_levels, num_levels), dtype=np.float64)
    cdef double[:, ::1] counts = out
    cdef Py_ssize_t i, j, k, i2, j2, k2
    cdef int a, b
    for i in range(n0):
        i2 = i + o0
        if i2 < 0 or i2 >= n0:
            continue
        for j in range(n1):
            j2 = j + o1
            if j2 < 0 or j2 >= n1:
                continue
            for k in range(n2):
                k2 = k + o2
                if k2 < 0 or k2 >= n2:
                    continue
                a = levels[i, j, k]
                if a <= 0:
                    continue
                b = levels[i2, j2, k2]
                if b > 0:
                    counts[a - 1, b - 1] += 1.0
    return out


def glrlm_counts(const int[:, :, ::1] levels, int num_levels, offset):
    cdef Py_ssize_t o0 = offset[0], o1 = offset[1], o2 = offset[2]
    cdef Py_ssize_t n0 = levels.shape[0], n1 = levels.shape[1], n2 = levels.shape[2]
    cdef Py_ssize_t max_run = n0
    if n1 > max_run:
        max_run = n1
    if n2 > max_run:
        max_run = n2
    out = np.zeros((num_levels, max_run), dtype=np.float64)
    cdef double[:, ::1] counts = out
    cdef Py_ssize_t i, j, k, pi, pj, pk, qi, qj, qk, run
    cdef int lv
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                lv = levels[i, j, k]
                if lv <= 0:
                    continue
                # run starts where the predecessor is outside the grid,
                # outside the ROI, or a different level
                pi = i - o0; pj = j - o1; pk = k - o2
                if 0 <= pi < n0 and 0 <= pj < n1 and 0 <= pk < n2:
                    if levels[pi, pj, pk] == lv:
                        continue
                run = 1
                qi = i + o0; qj = j + o1; qk = k + o2
                while 0 <= qi < n0 and 0 <= qj < n1 and 0 <= qk < n2:
                    if levels[qi, qj, qk] != lv:
                        break
                    run += 1
                    qi += o0; qj += o1; qk += o2
                counts[lv - 1, run - 1] += 1.0
    return out


def glszm_zones(const int[:, :, ::1] levels, int num_levels):
    cdef Py_ssize_t n0 = levels.shape[0], n1 = levels.shape[1], n2 = levels.shape[2]
    cdef Py_ssize_t total = n0 * n1 * n2
    visited_arr = np.zeros((n0, n1, n2), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] visited = visited_arr
    stack_arr = np.empty((total, 3), dtype=np.int64)
    cdef long long[:, ::1] stack = stack_arr
    zl_arr = np.empty(total, dtype=np.int64)
    zs_arr = np.empty(total, dtype=np.int64)
    cdef long long[::1] zone_levels = zl_arr
    cdef long long[::1] zone_sizes = zs_arr
    cdef Py_ssize_t nz = 0, top, size
    cdef Py_ssize_t i, j, k, ci, cj, ck, xi, xj, xk
    cdef int lv, d0, d1, d2
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                lv = levels[i, j, k]
                if lv <= 0 or visited[i, j, k]:
                    continue
                # flood fill the zone under 26-connectivity
                visited[i, j, k] = 1
                stack[0, 0] = i; stack[0, 1] = j; stack[0, 2] = k
                top = 1
                size = 0
                while top > 0:
                    top -= 1
                    ci = stack[top, 0]; cj = stack[top, 1]; ck = stack[top, 2]
                    size += 1
                    for d0 in range(-1, 2):
                        xi = ci + d0
                        if xi < 0 or xi >= n0:
                            continue
                        for d1 in range(-1, 2):
                            xj = cj + d1
                            if xj < 0 or xj >= n1:
                                continue
                            for d2 in range(-1, 2):
                                if d0 == 0 and d1 == 0 and d2 == 0:
                                    continue
                                xk = ck + d2
                                if xk < 0 or xk >= n2:
                                    continue
                                if visited[xi, xj, xk] or levels[xi, xj, xk] != lv:
                                    continue
                                visited[xi, xj, xk] = 1
                                stack[top, 0] = xi; stack[top, 1] = xj; stack[top, 2] = xk
                                top += 1
                zone_levels[nz] = lv
                zone_sizes[nz] = size
                nz += 1
    return zl_arr[:nz].copy(), zs_arr[:nz].copy()


def ngtdm_stats(const int[:, :, ::1] levels, int num_levels):
    cdef Py_ssize_t n0 = levels.shape[0], n1 = levels.shape[1], n2 = levels.shape[2]
    s_arr = np.zeros(num_levels, dtype=np.float64)
    n_arr = np.zeros(num_levels, dtype=np.int64)
    cdef double[::1] s = s_arr
    cdef long long[::1] n = n_arr
    cdef Py_ssize_t i, j, k, xi, xj, xk
    cdef int lv, d0, d1, d2, cnt, nb
    cdef double acc
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                lv = levels[i, j, k]
                if lv <= 0:
                    continue
                acc = 0.0
                cnt = 0
                for d0 in range(-1, 2):
                    xi = i + d0
                    if xi < 0 or xi >= n0:
                        continue
                    for d1 in range(-1, 2):
                        xj = j + d1
                        if xj < 0 or xj >= n1:
                            continue
                        for d2 in range(-1, 2):
                            if d0 == 0 and d1 == 0 and d2 == 0:
                                continue
                            xk = k + d2
                            if xk < 0 or xk >= n2:
                                continue
                            nb = levels[xi, xj, xk]
                            if nb > 0:
                                acc += nb
                                cnt += 1
                if cnt > 0:
                    s[lv - 1] += fabs(lv - acc / cnt)
                    n[lv - 1] += 1
    return s_arr, n_arr


def gldm_counts(const int[:, :, ::1] levels, int num_levels, int alpha):
    cdef Py_ssize_t n0 = levels.shape[0], n1 = levels.shape[1], n2 = levels.shape[2]
    out = np.zeros((num_levels, 27), dtype=np.float64)
    cdef double[:, ::1] counts = out
    cdef Py_ssize_t i, j, k, xi, xj, xk
    cdef int lv, d0, d1, d2, dep, nb
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                lv = levels[i, j, k]
                if lv <= 0:
                    continue
                dep = 0
                for d0 in range(-1, 2):
                    xi = i + d0
                    if xi < 0 or xi >= n0:
                        continue
                    for d1 in range(-1, 2):
                        xj = j + d1
                        if xj < 0 or xj >= n1:
                            continue
                        for d2 in range(-1, 2):
                            if d0 == 0 and d1 == 0 and d2 == 0:
                                continue
                            xk = k + d2
                            if xk < 0 or xk >= n2:
                                continue
                            nb = levels[xi, xj, xk]
                            if nb > 0 and (nb - lv if nb > lv else lv - nb) <= alpha:
                                dep += 1
                counts[lv - 1, dep] += 1.0
    return out
