"""NumPy/Python reference implementations of the hot kernels.

Always importable. The compiled twin in ``_ckernels`` is preferred at
import time when present; both backends perform the same per-element
IEEE operations, so ``two_level_gauss`` agrees bit for bit and the
accumulating kernels agree to summation-order rounding.
"""

from __future__ import annotations

import numpy as np


def ewma(values: np.ndarray, alpha: float) -> np.ndarray:
    """out[0] = in[0]; out[i] = alpha*in[i] + (1-alpha)*out[i-1]."""
    data = values.tolist()
    keep = 1.0 - alpha
    acc = data[0]
    out = [acc]
    for v in data[1:]:
        acc = alpha * v + keep * acc
        out.append(acc)
    return np.asarray(out)


def two_level_gauss(paused: np.ndarray, z: np.ndarray, high: float,
                    low: float, sigma: float) -> np.ndarray:
    """Pick ``low`` where paused else ``high``, add sigma*z, clamp at 0."""
    means = np.where(paused, low, high)
    out = means + sigma * z
    np.maximum(out, 0.0, out=out)
    return out


def integrate_hourly_prices(power: np.ndarray, price_by_hour: np.ndarray,
                            offset_seconds: float, interval_seconds: float):
    """Left-rectangle energy (kWh) and cost ($) of a uniform power trace.

    ``price_by_hour[k]`` is the $/kWh price of the k-th hour after the
    hour containing the first sample; ``offset_seconds`` positions that
    first sample inside its hour. The caller guarantees coverage.
    """
    n = power.shape[0]
    positions = offset_seconds + interval_seconds * np.arange(n)
    idx = (positions // 3600.0).astype(np.intp)
    delta_hours = interval_seconds / 3600.0
    energy_kwh = float(power.sum()) * delta_hours / 1000.0
    cost_usd = float(power @ price_by_hour[idx]) * delta_hours / 1000.0
    return energy_kwh, cost_usd
