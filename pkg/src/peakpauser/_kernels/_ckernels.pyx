# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``pure``. Same contracts, same rounding."""

import numpy as np


def ewma(const double[::1] values, double alpha):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i
    cdef double keep = 1.0 - alpha
    cdef double acc
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    acc = values[0]
    out[0] = acc
    for i in range(1, n):
        acc = alpha * values[i] + keep * acc
        out[i] = acc
    return out_arr


def two_level_gauss(const unsigned char[::1] paused, const double[::1] z,
                    double high, double low, double sigma):
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t i
    cdef double v
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        v = (low if paused[i] else high) + sigma * z[i]
        out[i] = v if v > 0.0 else 0.0
    return out_arr


def integrate_hourly_prices(const double[::1] power, const double[::1] price_by_hour,
                            double offset_seconds, double interval_seconds):
    cdef Py_ssize_t n = power.shape[0]
    cdef Py_ssize_t i, idx
    cdef double energy = 0.0
    cdef double cost = 0.0
    cdef double pos
    cdef double delta_hours = interval_seconds / 3600.0
    for i in range(n):
        # truncation == floor: positions are never negative
        pos = offset_seconds + interval_seconds * i
        idx = <Py_ssize_t>(pos / 3600.0)
        energy += power[i]
        cost += power[i] * price_by_hour[idx]
    return energy * delta_hours / 1000.0, cost * delta_hours / 1000.0
