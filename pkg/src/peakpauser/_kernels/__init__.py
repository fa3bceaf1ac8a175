"""Hot numeric kernels with backend selection.

The compiled extension wins when it is importable and the
PEAKPAUSER_PURE environment variable is unset; otherwise the
NumPy/Python implementations take over. ``backend()`` reports which
one is active. Input normalisation happens here so both backends see
identical dtypes.
"""

from __future__ import annotations

import os

import numpy as np

from . import pure as _pure

if os.environ.get("PEAKPAUSER_PURE"):
    _impl = _pure
    _BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl

        _BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        _BACKEND = "pure"


def backend() -> str:
    """Name of the active kernel backend: ``compiled`` or ``pure``."""
    return _BACKEND


def ewma(values, alpha: float) -> np.ndarray:
    values = np.ascontiguousarray(values, dtype=np.float64)
    return _impl.ewma(values, float(alpha))


def two_level_gauss(paused, z, high: float, low: float, sigma: float) -> np.ndarray:
    paused = np.ascontiguousarray(paused, dtype=np.uint8)
    z = np.ascontiguousarray(z, dtype=np.float64)
    return _impl.two_level_gauss(paused, z, float(high), float(low), float(sigma))


def integrate_hourly_prices(power, price_by_hour, offset_seconds: float,
                            interval_seconds: float) -> tuple[float, float]:
    power = np.ascontiguousarray(power, dtype=np.float64)
    price_by_hour = np.ascontiguousarray(price_by_hour, dtype=np.float64)
    return _impl.integrate_hourly_prices(
        power, price_by_hour, float(offset_seconds), float(interval_seconds))
