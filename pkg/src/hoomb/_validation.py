"""Input validation helpers used by the estimators and the CLI."""

import math
import numbers

import numpy as np

from .exceptions import ConfigurationError


def check_int(value, name, *, min_value=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if min_value is not None and value < min_value:
        raise ConfigurationError(f"{name} must be >= {min_value}, got {value}")
    return int(value)


def check_real(value, name, *, low=None, high=None, low_open=False, high_open=False):
    """Validate a finite real and its bounds; ``*_open`` makes a bound strict."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigurationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (low_open and value == low)):
        op = ">" if low_open else ">="
        raise ConfigurationError(f"{name} must be {op} {low}, got {value}")
    if high is not None and (value > high or (high_open and value == high)):
        op = "<" if high_open else "<="
        raise ConfigurationError(f"{name} must be {op} {high}, got {value}")
    return value


def check_seed(value, name="random_state"):
    if value is None:
        return 0
    if isinstance(value, np.random.Generator):
        return value
    return check_int(value, name, min_value=0)


def check_point(point, dim=None, name="point"):
    arr = np.asarray(point, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr
