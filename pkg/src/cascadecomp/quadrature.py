"""Composite quadrature weights shared by the transport and heat modules."""

import numpy as np

from .errors import InputError

__all__ = ["simpson_weights"]


def simpson_weights(num_intervals, h):
    """Composite Simpson weights for num_intervals (even) steps of size h."""
    if num_intervals < 2 or num_intervals % 2:
        raise InputError(
            f"composite Simpson needs an even interval count >= 2, got {num_intervals}"
        )
    w = np.ones(num_intervals + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)
