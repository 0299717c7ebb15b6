"""The existence-test function F(mu, x) = (1 + mu/x^2) / (1 + mu x).

Whether an aligned one-contact equilibrium keeps or loses its contact as
the third body moves reduces to comparing two values of F.  F is strictly
decreasing and strictly convex in x on (0, inf) for every mu > 0, and it
satisfies the reflection identity x^3 F(mu, x) = F(1/mu, 1/x), which is
what collapses the two contact-release inequalities into a single
comparison.  The derivatives are implemented analytically so that the
level-set extraction downstream works with smooth data.
"""

from __future__ import annotations

import numpy as np

__all__ = ["F", "F_prime", "F_second"]


def _check_domain(mu, x):
    mu = np.asarray(mu, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(mu <= 0.0) or np.any(x <= 0.0):
        raise ValueError("F(mu, x) requires mu > 0 and x > 0")
    return mu, x


def F(mu, x):
    """(1 + mu/x^2) / (1 + mu*x); scalar or elementwise on arrays."""
    mu, x = _check_domain(mu, x)
    out = (1.0 + mu / (x * x)) / (1.0 + mu * x)
    return float(out) if out.ndim == 0 else out


def F_prime(mu, x):
    """dF/dx, strictly negative on the domain."""
    mu, x = _check_domain(mu, x)
    denom = 1.0 + mu * x
    out = -2.0 * mu / x**3 / denom - mu * (1.0 + mu / x**2) / denom**2
    return float(out) if out.ndim == 0 else out


def F_second(mu, x):
    """d^2F/dx^2, strictly positive on the domain."""
    mu, x = _check_domain(mu, x)
    denom = 1.0 + mu * x
    out = (6.0 * mu / x**4 / denom
           + 4.0 * mu**2 / x**3 / denom**2
           + 2.0 * mu**2 * (1.0 + mu / x**2) / denom**3)
    return float(out) if out.ndim == 0 else out
