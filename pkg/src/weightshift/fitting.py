"""Least-squares slope fits and compensated summation."""

from __future__ import annotations

import math

import numpy as np


def slope_estimator(samples, min_decades: float = 2.0, min_samples: int = 8):
    """OLS slope and its standard error for (log x, log y) samples.

    Abscissae are natural logs; the span requirement is in decades of x.
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} samples")
    x, y = pts[:, 0], pts[:, 1]
    if (x.max() - x.min()) / math.log(10) < min_decades - 1e-9:
        raise ValueError(f"samples span fewer than {min_decades} decades")
    xm = x - x.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xm
    dof = len(x) - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else math.inf
    return slope, stderr


def loglog_slope(x, y, min_decades: float = 2.0):
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y))
    return slope_estimator(np.column_stack([np.log(x), np.log(y)]), min_decades=min_decades)


def _neumaier(x):
    s = np.zeros(x.shape[1:])
    c = np.zeros(x.shape[1:])
    for xi in x:
        t = s + xi
        c += np.where(np.abs(s) >= np.abs(xi), (s - t) + xi, (xi - t) + s)
        s = t
    return s + c


def csum(x, axis: int = 0):
    """Compensated (Neumaier) sum along ``axis``; deterministic order."""
    x = np.moveaxis(np.asarray(x), axis, 0)
    if x.shape[0] == 0:
        return np.zeros(x.shape[1:], dtype=x.dtype)
    if np.iscomplexobj(x):
        return _neumaier(x.real) + 1j * _neumaier(x.imag)
    return _neumaier(x)
