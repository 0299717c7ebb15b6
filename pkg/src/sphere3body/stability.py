"""Energetic stability tests for constrained critical points.

A configuration with active contacts is a relative equilibrium when the
first variation of the amended potential vanishes on the free degrees of
freedom and is nonnegative along every allowed contact-release direction.
It is energetically stable when the release variations are strictly
positive and the Hessian restricted to the free block is positive
definite, which is checked through the leading principal minors
(Sylvester's criterion).  The free blocks here are at most 3x3, so the
minors are evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .model import DEF_TOL, EQ_TOL, SystemParams

__all__ = [
    "NotAnEquilibriumError",
    "InsufficientDataError",
    "StabilityCertificate",
    "certify_chart",
    "leading_minors",
    "eigenvalues_symmetric",
    "family_sign_test",
]

RESIDUAL_TOL = 1e-8

# Process-wide overrides for the certificate tolerances (set by the CLI).
_default_tols = {"eq": RESIDUAL_TOL, "def": DEF_TOL}


def set_default_tolerances(eq_tol: float | None = None,
                           def_tol: float | None = None) -> None:
    """Override the default equilibrium / definiteness tolerances."""
    if eq_tol is not None:
        _default_tols["eq"] = float(eq_tol)
    if def_tol is not None:
        _default_tols["def"] = float(def_tol)


class NotAnEquilibriumError(ValueError):
    """Equilibrium residuals too large for a stability verdict."""


class InsufficientDataError(ValueError):
    """Family has too few samples for a finite-difference sign test."""


@dataclass(frozen=True)
class StabilityCertificate:
    """Evidence backing a stability verdict.

    ``constrained_signs`` holds one (constraint name, first-variation
    value) pair per active contact; ``free_block`` is the raw Hessian on
    the unconstrained directions, while ``minors`` are the leading
    principal minors of its Jacobi-scaled congruence (same signs, but
    comparable against one tolerance across charts and scales).
    """

    constrained_signs: tuple[tuple[str, float], ...]
    free_names: tuple[str, ...]
    free_block: tuple[tuple[float, ...], ...]
    minors: tuple[float, ...]
    verdict: str

    def free_matrix(self) -> np.ndarray:
        return np.array(self.free_block, dtype=float).reshape(
            len(self.free_names), len(self.free_names))


def leading_minors(m: np.ndarray) -> tuple[float, ...]:
    """Leading principal minors of a symmetric matrix up to 3x3, closed form."""
    n = m.shape[0]
    if n == 0:
        return ()
    if n == 1:
        return (m[0, 0],)
    det2 = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if n == 2:
        return (m[0, 0], det2)
    det3 = (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))
    return (m[0, 0], det2, det3)


def eigenvalues_symmetric(m: np.ndarray) -> tuple[float, ...]:
    """Closed-form eigenvalues of a symmetric matrix up to 3x3, ascending."""
    n = m.shape[0]
    if n == 0:
        return ()
    if n == 1:
        return (m[0, 0],)
    if n == 2:
        tr = m[0, 0] + m[1, 1]
        disc = math.sqrt(max((m[0, 0] - m[1, 1]) ** 2 + 4.0 * m[0, 1] ** 2, 0.0))
        return tuple(sorted(((tr - disc) / 2.0, (tr + disc) / 2.0)))
    # 3x3: trigonometric solution of the characteristic cubic.
    q = np.trace(m) / 3.0
    a = m - q * np.eye(3)
    p2 = float(np.sum(a * a)) / 6.0
    p = math.sqrt(max(p2, 0.0))
    if p < 1e-300:
        return (q, q, q)
    b = a / p
    detb = (b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
            - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
            + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0]))
    r = min(1.0, max(-1.0, detb / 2.0))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return tuple(sorted((e1, e2, e3)))


def jacobi_scaled(free: np.ndarray) -> np.ndarray:
    """Congruence-scaled copy of a symmetric block with unit-size diagonal.

    Chart coordinates mix lengths and angles, so raw curvatures can span
    many orders of magnitude; dividing row and column i by sqrt(|B_ii|)
    preserves the inertia (Sylvester's law) while making the minors
    comparable against a single tolerance.
    """
    if free.size == 0:
        return free
    overall = float(np.max(np.abs(free)))
    if overall <= 0.0:
        return free
    d = np.sqrt(np.maximum(np.abs(np.diag(free)), 1e-12 * overall))
    return free / np.outer(d, d)


def _verdict(constrained: list[float], free: np.ndarray,
             minors: tuple[float, ...], tol: float) -> str:
    values = list(constrained) + list(minors)
    if len(minors) and float(np.max(np.abs(free))) <= 0.0:
        return "marginal"
    if any(v < -tol for v in values):
        return "unstable"
    if all(v > tol for v in values):
        return "stable"
    return "marginal"


def certify_chart(params: SystemParams, order, a: float, b: float, t: float,
                  H: float, constrained_axes, constraint_names=None, *,
                  eq_tol: float | None = None,
                  def_tol: float | None = None) -> StabilityCertificate:
    """Certify a critical point given in angle-chart coordinates.

    ``order`` is the chart ordering (i, j, k); ``constrained_axes`` lists
    the chart axes ("a", "b", "t") pinned by active contacts, with the
    remainder free.  The angle axis counts as constrained only in the
    fully resting case, where opening the pivot angle releases the third
    contact.  Raises NotAnEquilibriumError when the free-axis gradient
    exceeds ``eq_tol`` or a constrained variation is below ``-eq_tol``.
    """
    if eq_tol is None:
        eq_tol = _default_tols["eq"]
    if def_tol is None:
        def_tol = _default_tols["def"]
    axis_index = {"a": 0, "b": 1, "t": 2}
    constrained_axes = list(constrained_axes)
    free_axes = [ax for ax in ("a", "b", "t") if ax not in constrained_axes]
    grads = model.first_variations_angle_form(params, a, b, t, H, order=order)

    i, j, k = order
    default_names = {"a": model.pair_key(i, j), "b": model.pair_key(j, k),
                     "t": model.pair_key(k, i)}
    names = dict(default_names)
    if constraint_names:
        names.update(constraint_names)

    for ax in free_axes:
        g = grads[axis_index[ax]]
        if abs(g) > eq_tol:
            raise NotAnEquilibriumError(
                f"free-axis gradient {ax}={g!r} exceeds {eq_tol!r}")

    if not free_axes:
        # Fully resting corner: with no free direction left, the chart
        # partials mix the contact releases.  The per-contact multipliers
        # are the distance-chart partials, well defined off collinearity.
        cfg = model.configuration_from_angle(order, a, b, t)
        d12, d23, d31 = model.first_variations_distance_form(params, cfg, H)
        release = {"d12": d12, "d23": d23, "d31": d31}
        constrained_signs = []
        for ax in constrained_axes:
            name = names[ax]
            g = release[default_names[ax]]
            if g < -eq_tol:
                raise NotAnEquilibriumError(
                    f"constrained variation {name}={g!r} is negative")
            constrained_signs.append((name, float(g)))
    else:
        constrained_signs = []
        for ax in constrained_axes:
            g = grads[axis_index[ax]]
            if g < -eq_tol:
                raise NotAnEquilibriumError(
                    f"constrained variation {names[ax]}={g!r} is negative")
            constrained_signs.append((names[ax], float(g)))

    hess = model.second_variation_matrix(params, a, b, t, H, order=order)
    idx = [axis_index[ax] for ax in free_axes]
    free = hess[np.ix_(idx, idx)]
    minors = leading_minors(jacobi_scaled(free))
    verdict = _verdict([v for _, v in constrained_signs], free, minors, def_tol)
    return StabilityCertificate(
        constrained_signs=tuple(constrained_signs),
        free_names=tuple({"a": default_names["a"], "b": default_names["b"],
                          "t": f"theta_{k}{i}"}[ax] for ax in free_axes),
        free_block=tuple(tuple(float(x) for x in row) for row in free),
        minors=tuple(float(x) for x in minors),
        verdict=verdict,
    )


def family_sign_test(params: SystemParams, samples, path, *,
                     fd_step: float = 1e-5, noise_tol: float = 1e-9):
    """Check sign(d2E/dq2) == sign(dH/dq) along a one-parameter family.

    ``samples`` is a sequence of (H, q, verdict) tuples ordered along the
    family; ``path`` maps the family parameter q to a Configuration.  The
    angular-momentum slope comes from centered differences of the sampled
    (q, H) pairs, while the second variation along the family direction is
    measured directly on the amended potential, independent of the
    assembled Hessian.  Samples flagged marginal, and points where either
    quantity sits inside ``noise_tol``, are skipped.

    Returns (checked, mismatches) where mismatches is a list of
    (index, H, dH_dq, e_qq) entries.
    """
    samples = list(samples)
    if len(samples) < 3:
        raise InsufficientDataError("need at least 3 samples along the family")
    checked = 0
    mismatches = []
    for n in range(1, len(samples) - 1):
        h_prev, q_prev, _ = samples[n - 1]
        h_cur, q_cur, verdict = samples[n]
        h_next, q_next, _ = samples[n + 1]
        if verdict == "marginal":
            continue
        dq = q_next - q_prev
        if abs(dq) < 1e-14:
            continue
        dh_dq = (h_next - h_prev) / dq
        h = fd_step * max(1.0, abs(q_cur))
        e = [model.amended_potential(params, path(q_cur + s * h), h_cur)
             for s in (-1.0, 0.0, 1.0)]
        e_qq = (e[0] - 2.0 * e[1] + e[2]) / (h * h)
        if abs(dh_dq) < noise_tol or abs(e_qq) < noise_tol:
            continue
        checked += 1
        if (e_qq > 0) != (dh_dq > 0):
            mismatches.append((n, h_cur, dh_dq, e_qq))
    return checked, mismatches
