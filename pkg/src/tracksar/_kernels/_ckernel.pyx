# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled conversion kernel. Semantics must match ``_pykernel.py`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _transition(const double[::1] levels, const double[::1] code_cap,
                             double vref, long a, long b, double v,
                             double *drawn, double *net) noexcept nogil:
    cdef double dq = vref * code_cap[b & ~a] - code_cap[b] * (levels[b] - levels[a])
    if dq > 0.0:
        drawn[0] += vref * dq
    net[0] += vref * (code_cap[b] * (vref - levels[b] + v) - code_cap[a] * (vref - levels[a] + v))


def convert_block(const double[::1] vin, const double[:, ::1] noise,
                  const double[::1] levels, const double[::1] code_cap,
                  double vref, double offset, double lsb, int bits,
                  long track_step, bint tracking, long start_code, bint acquired):
    cdef Py_ssize_t n = vin.shape[0]
    cdef long top = (1 << bits) - 1
    cdef long reg_step = 1 << (bits - 1)
    cdef bint has_noise = noise.shape[1] > 0
    cdef double tol = lsb * 1e-9

    codes_arr = np.empty(n, dtype=np.int64)
    cycles_arr = np.empty(n, dtype=np.int32)
    overload_arr = np.zeros(n, dtype=np.uint8)
    drawn_arr = np.zeros(n, dtype=np.float64)
    net_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.int64_t[::1] codes = codes_arr
    cdef cnp.int32_t[::1] cycles = cycles_arr
    cdef cnp.uint8_t[::1] overload = overload_arr
    cdef double[::1] e_drawn = drawn_arr
    cdef double[::1] e_net = net_arr

    cdef Py_ssize_t i
    cdef long b = start_code, nb, s
    cdef int j
    cdef double v, nz, drawn, net, hi, lo

    with nogil:
        for i in range(n):
            v = vin[i]
            drawn = 0.0
            net = 0.0
            if tracking and acquired:
                s = track_step
            else:
                s = reg_step
                if b != 0:
                    _transition(levels, code_cap, vref, b, 0, v, &drawn, &net)
                    b = 0
            j = 0
            while s >= 1:
                nz = noise[i, j] if has_noise else 0.0
                if v + nz > levels[b] + offset:
                    nb = b + s
                else:
                    nb = b - s
                if nb < 0:
                    nb = 0
                elif nb > top:
                    nb = top
                if nb != b:
                    _transition(levels, code_cap, vref, b, nb, v, &drawn, &net)
                    b = nb
                s >>= 1
                j += 1
            nz = noise[i, j] if has_noise else 0.0
            if not (v + nz > levels[b] + offset) and b > 0:
                _transition(levels, code_cap, vref, b, b - 1, v, &drawn, &net)
                b -= 1
            j += 1

            codes[i] = b
            cycles[i] = j
            hi = levels[b + 1] if b < top else vref
            lo = levels[b - 1] if b > 0 else 0.0
            overload[i] = v > hi + tol or v < lo - tol
            e_drawn[i] = drawn
            e_net[i] = net
            if tracking:
                acquired = True
    return codes_arr, cycles_arr, overload_arr, drawn_arr, net_arr, b, acquired
