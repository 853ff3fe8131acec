"""Input validation helpers and the package's error types."""

from __future__ import annotations

import numbers

import numpy as np

PROB_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class InsufficientDataError(ValidationError):
    """Raised when a dataset is too small for the requested procedure."""


class MalformedDatasetError(ValidationError):
    """Raised when dataset indices fall outside the declared shape."""


def check_count(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ValidationError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_discount(gamma) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma < 1.0:
        raise ValidationError(f"discount must lie in [0, 1), got {gamma}")
    return gamma


def check_delta(delta) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    return delta


def check_probability_table(p, name: str, axis: int = -1, tol: float = PROB_TOL) -> np.ndarray:
    """Return ``p`` as a float array after checking it is a distribution along ``axis``."""
    arr = np.asarray(p, dtype=float)
    if arr.size == 0:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.any(arr < 0):
        raise ValidationError(f"{name} has negative entries")
    sums = arr.sum(axis=axis)
    if np.any(np.abs(sums - 1.0) > tol):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise ValidationError(f"{name} does not sum to 1 (max deviation {worst:.3g})")
    return arr


def check_policy(policy, num_states: int, num_actions: int) -> np.ndarray:
    pi = np.asarray(policy)
    if pi.shape != (num_states,):
        raise ValidationError(f"policy must have shape ({num_states},), got {pi.shape}")
    if not np.issubdtype(pi.dtype, np.integer):
        if np.any(pi != np.round(pi)):
            raise ValidationError("policy entries must be integers")
        pi = pi.astype(np.int64)
    if np.any(pi < 0) or np.any(pi >= num_actions):
        raise ValidationError(f"policy actions must lie in [0, {num_actions})")
    return pi.astype(np.int64, copy=False)


def frozen(arr: np.ndarray) -> np.ndarray:
    """Read-only view, used to keep environment arrays immutable."""
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out
