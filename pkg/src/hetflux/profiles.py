"""Smooth compactly-supported profile functions used by the built-in flux families.

Two building blocks:

* ``bump(s)``: C-infinity bump, equal to 1 at s = 0, identically 0 for |s| >= 1.
  Used for localized coefficient variation (a perturbation inside [-X, X] that
  vanishes to all orders at the boundary).
* ``smoothstep(s)``: septic polynomial step, 0 for s <= 0, 1 for s >= 1, with
  three vanishing derivatives at both ends, so piecing it with constants stays C3.
  Used for left-state -> right-state coefficient transitions.

All functions broadcast over numpy arrays and return arrays of the input shape.
"""

from __future__ import annotations

import numpy as np


def bump(s):
    """exp(1 - 1/(1-s^2)) for |s| < 1, else 0. Max value 1 at s = 0."""
    s = np.asarray(s, dtype=float)
    s2 = s * s
    inside = s2 < 1.0
    # Guard the excluded region before dividing; values there are masked out.
    denom = np.where(inside, 1.0 - s2, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        val = np.where(inside, np.exp(1.0 - 1.0 / denom), 0.0)
    return val


def bump_prime(s):
    """Derivative of bump: bump(s) * (-2 s) / (1 - s^2)^2, 0 outside (-1, 1)."""
    s = np.asarray(s, dtype=float)
    s2 = s * s
    inside = s2 < 1.0
    denom = np.where(inside, (1.0 - s2) ** 2, 1.0)
    # bump decays faster than any power at |s| -> 1, so the product stays finite.
    with np.errstate(over="ignore", under="ignore"):
        val = np.where(inside, bump(s) * (-2.0 * s) / denom, 0.0)
    return val


def smoothstep(s):
    """Septic smoothstep: 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7 on [0,1], clamped outside.

    First three derivatives vanish at s = 0 and s = 1.
    """
    s = np.asarray(s, dtype=float)
    t = np.clip(s, 0.0, 1.0)
    return t**4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))


def smoothstep_prime(s):
    """Derivative of smoothstep: 140 s^3 (1-s)^3 on [0,1], 0 outside."""
    s = np.asarray(s, dtype=float)
    t = np.clip(s, 0.0, 1.0)
    val = 140.0 * t**3 * (1.0 - t) ** 3
    return np.where((s > 0.0) & (s < 1.0), val, 0.0)
