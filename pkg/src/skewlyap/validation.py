"""Argument checking shared by the public functions.

Modelled loosely on scikit-learn's ``check_scalar``/``check_array``: each
helper returns the (possibly converted) value or raises ``ValueError`` /
``TypeError`` with the parameter name in the message.
"""

from __future__ import annotations

from numbers import Integral, Real

import numpy as np


def check_scalar(x, name, target_type=Real, min_val=None, max_val=None,
                 include_boundaries="both"):
    if isinstance(x, bool) or not isinstance(x, target_type):
        raise TypeError(f"{name} must be {target_type}, got {type(x).__name__}")
    if isinstance(x, Real) and not np.isfinite(float(x)):
        raise ValueError(f"{name} must be finite, got {x}")
    lo_closed = include_boundaries in ("left", "both")
    hi_closed = include_boundaries in ("right", "both")
    if min_val is not None:
        if x < min_val or (x == min_val and not lo_closed):
            op = ">=" if lo_closed else ">"
            raise ValueError(f"{name} == {x}, must be {op} {min_val}")
    if max_val is not None:
        if x > max_val or (x == max_val and not hi_closed):
            op = "<=" if hi_closed else "<"
            raise ValueError(f"{name} == {x}, must be {op} {max_val}")
    return x


def check_int(x, name, min_val=None, max_val=None):
    if isinstance(x, np.integer):
        x = int(x)
    return check_scalar(x, name, Integral, min_val, max_val)


def check_matrix(a, name="matrix", square=True):
    """Return ``a`` as a finite float64 array of shape (d, d) or (k, d, d)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim not in (2, 3):
        raise ValueError(f"{name} must be 2-D or a stack of 2-D arrays, got shape {a.shape}")
    if square and a.shape[-1] != a.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_vector(x, name="vector", nonzero=True):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    if nonzero and not np.any(x):
        raise ValueError(f"{name} must be nonzero")
    return x


def check_power_of_two(m, name="grid size", min_val=2):
    m = check_int(m, name, min_val=min_val)
    if m & (m - 1):
        raise ValueError(f"{name} must be a power of two, got {m}")
    return m


def check_lambda(lam, name="lambda"):
    """Coupling constant in the band the theorems cover."""
    return check_scalar(lam, name, Real, 0.5, 1.0)
