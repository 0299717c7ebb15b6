"""Geometry, mass model, and effective potential for three gravitating spheres.

Everything is dimensionless.  Lengths are scaled by the sum of the three
radii and masses by the total mass, so

    r1 + r2 + r3 = 1,    m1 + m2 + m3 = 1,

and for equal densities the mass fractions follow from the radii alone,
``m_i = r_i**3 / (r1**3 + r2**3 + r3**3)``.  A configuration is the triple
of center-to-center distances ``(d12, d23, d31)`` subject to the
finite-density bounds ``d_ij >= r_i + r_j`` and the triangle inequalities.

The central object is the amended potential at total angular momentum H,

    E = H**2 / (2 * I_H) + U,

whose constrained critical points are the relative equilibria.  ``I_H`` is
the moment of inertia about the rotation axis (the maximum principal axis,
normal to the plane of the centers) and ``U`` the gravitational potential.

Two coordinate charts are provided.  The distance chart uses the raw triple
``(d12, d23, d31)`` and is valid only strictly inside the triangle
inequalities.  The angle chart picks an ordering ``(i, j, k)`` and uses the
two distances ``d_ij, d_jk`` together with the angle ``theta_ki`` at the
pivot body j; it stays regular through collinear configurations, where the
distance chart degenerates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TRIANGLE_TOL",
    "CONTACT_TOL",
    "EQ_TOL",
    "DEF_TOL",
    "R_MIN",
    "InvalidConfigurationError",
    "UnsupportedChartError",
    "RadiiTriple",
    "MassTriple",
    "SystemParams",
    "Configuration",
    "masses_from_radii",
    "radii_from_masses",
    "pair_key",
    "chart_masses",
    "chart_coordinates",
    "configuration_from_angle",
    "angle_at_pivot",
    "validate_configuration",
    "contact_set",
    "moment_of_inertia",
    "potential",
    "amended_potential",
    "amended_potential_chart",
    "first_variations_angle_form",
    "first_variations_distance_form",
    "second_variation_matrix",
]

# Default tolerances; every entry point that uses one accepts an override.
TRIANGLE_TOL = 1e-12
CONTACT_TOL = 1e-9
EQ_TOL = 1e-10
DEF_TOL = 1e-9
R_MIN = 1e-4

_ORDERS = {(1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1)}


class InvalidConfigurationError(ValueError):
    """Configuration violates contact bounds or triangle inequalities."""


class UnsupportedChartError(ValueError):
    """The requested coordinate chart is singular at this configuration."""


@dataclass(frozen=True)
class RadiiTriple:
    """Dimensionless sphere radii in canonical (descending) order.

    The constructor classmethod :meth:`create` accepts the radii in any
    order, normalizes the sum to one, sorts them so ``r1 >= r2 >= r3``, and
    records the permutation.  ``permutation[slot]`` is the 1-based input
    position of the body now occupying canonical slot ``slot`` (0-based).
    """

    r1: float
    r2: float
    r3: float
    permutation: tuple[int, int, int] = (1, 2, 3)

    @classmethod
    def create(cls, values, r_min: float = R_MIN) -> "RadiiTriple":
        vals = [float(v) for v in values]
        if len(vals) != 3:
            raise ValueError("expected exactly three radii")
        total = sum(vals)
        if not math.isfinite(total) or abs(total - 1.0) > 1e-6:
            raise ValueError(f"radii must sum to 1, got {total!r}")
        vals = [v / total for v in vals]
        order = sorted(range(3), key=lambda n: -vals[n])
        r1, r2, r3 = (vals[n] for n in order)
        if r3 < r_min:
            raise ValueError(
                f"smallest radius {r3!r} below r_min={r_min!r}; the binary "
                "limit is outside the modeled domain"
            )
        if r1 >= 1.0:
            raise ValueError("largest radius must be < 1")
        return cls(r1, r2, r3, tuple(n + 1 for n in order))

    def __iter__(self):
        return iter((self.r1, self.r2, self.r3))

    def radius(self, body: int) -> float:
        return (self.r1, self.r2, self.r3)[body - 1]


@dataclass(frozen=True)
class MassTriple:
    """Dimensionless mass fractions paired with a canonical RadiiTriple."""

    m1: float
    m2: float
    m3: float

    def __iter__(self):
        return iter((self.m1, self.m2, self.m3))

    def mass(self, body: int) -> float:
        return (self.m1, self.m2, self.m3)[body - 1]


def masses_from_radii(radii: RadiiTriple) -> MassTriple:
    """Mass fractions of equal-density spheres: m_i = r_i^3 / sum(r^3)."""
    cubes = [r**3 for r in radii]
    s = sum(cubes)
    return MassTriple(*(c / s for c in cubes))


def radii_from_masses(masses, r_min: float = R_MIN) -> RadiiTriple:
    """Invert the constant-density relation: r_i proportional to m_i^(1/3)."""
    vals = [float(m) for m in masses]
    if len(vals) != 3:
        raise ValueError("expected exactly three masses")
    total = sum(vals)
    if not math.isfinite(total) or abs(total - 1.0) > 1e-6:
        raise ValueError(f"masses must sum to 1, got {total!r}")
    roots = [(v / total) ** (1.0 / 3.0) for v in vals]
    s = sum(roots)
    return RadiiTriple.create([x / s for x in roots], r_min=r_min)


@dataclass(frozen=True)
class SystemParams:
    """Radii, masses, and spin inertia of one system instance.

    ``I_S = (2/5) * (m1 r1^2 + m2 r2^2 + m3 r3^2)`` is the configuration
    independent part of the moment of inertia contributed by the spheres'
    own spin.
    """

    radii: RadiiTriple
    masses: MassTriple
    I_S: float

    @classmethod
    def from_radii(cls, values, r_min: float = R_MIN) -> "SystemParams":
        radii = values if isinstance(values, RadiiTriple) else RadiiTriple.create(values, r_min=r_min)
        masses = masses_from_radii(radii)
        i_s = 0.4 * sum(m * r * r for m, r in zip(masses, radii))
        return cls(radii, masses, i_s)

    @classmethod
    def from_masses(cls, values, r_min: float = R_MIN) -> "SystemParams":
        return cls.from_radii(radii_from_masses(values, r_min=r_min))

    def mass(self, body: int) -> float:
        return self.masses.mass(body)

    def radius(self, body: int) -> float:
        return self.radii.radius(body)

    def contact_distance(self, i: int, j: int) -> float:
        """Touching distance of bodies i and j, r_i + r_j = 1 - r_k."""
        k = 6 - i - j
        return 1.0 - self.radii.radius(k)


@dataclass(frozen=True)
class Configuration:
    """The three mutual distances between sphere centers."""

    d12: float
    d23: float
    d31: float

    def __iter__(self):
        return iter((self.d12, self.d23, self.d31))

    def distance(self, i: int, j: int) -> float:
        return {frozenset((1, 2)): self.d12,
                frozenset((2, 3)): self.d23,
                frozenset((3, 1)): self.d31}[frozenset((i, j))]


def pair_key(i: int, j: int) -> str:
    """Canonical name of the (i, j) distance, one of d12/d23/d31."""
    return {frozenset((1, 2)): "d12",
            frozenset((2, 3)): "d23",
            frozenset((3, 1)): "d31"}[frozenset((i, j))]


def chart_masses(params: SystemParams, order) -> tuple[float, float, float]:
    """Masses (m_i, m_j, m_k) for a chart ordering (i, j, k)."""
    i, j, k = order
    if (i, j, k) not in _ORDERS:
        raise ValueError(f"invalid chart ordering {order!r}")
    return params.mass(i), params.mass(j), params.mass(k)


def chart_coordinates(cfg: Configuration, order) -> tuple[float, float, float]:
    """Angle-chart coordinates (d_ij, d_jk, theta_ki) of a configuration."""
    i, j, k = order
    a = cfg.distance(i, j)
    b = cfg.distance(j, k)
    c = cfg.distance(k, i)
    cos_t = (a * a + b * b - c * c) / (2.0 * a * b)
    cos_t = min(1.0, max(-1.0, cos_t))
    return a, b, math.acos(cos_t)


def configuration_from_angle(order, d_ij: float, d_jk: float, theta_ki: float) -> Configuration:
    """Build a labeled Configuration from angle-chart coordinates."""
    i, j, k = order
    c2 = d_ij * d_ij + d_jk * d_jk - 2.0 * d_ij * d_jk * math.cos(theta_ki)
    c = math.sqrt(max(c2, 0.0))
    dists = {pair_key(i, j): d_ij, pair_key(j, k): d_jk, pair_key(k, i): c}
    return Configuration(dists["d12"], dists["d23"], dists["d31"])


def angle_at_pivot(cfg: Configuration, pivot: int) -> float:
    """Opening angle at the given body between the other two centers."""
    others = [n for n in (1, 2, 3) if n != pivot]
    i, k = others
    return chart_coordinates(cfg, (i, pivot, k))[2]


def validate_configuration(params: SystemParams, cfg: Configuration,
                           contact_tol: float = CONTACT_TOL,
                           triangle_tol: float = TRIANGLE_TOL) -> None:
    """Raise InvalidConfigurationError on contact or triangle violations."""
    for (i, j) in ((1, 2), (2, 3), (3, 1)):
        d = cfg.distance(i, j)
        lim = params.contact_distance(i, j)
        if d < lim - contact_tol:
            raise InvalidConfigurationError(
                f"{pair_key(i, j)}={d!r} below contact distance {lim!r}")
    d12, d23, d31 = cfg
    # Relative tolerance: wide orbits carry roundoff proportional to scale.
    tol = triangle_tol * max(1.0, d12, d23, d31)
    for a, b, c in ((d12, d23, d31), (d23, d31, d12), (d31, d12, d23)):
        if c > a + b + tol or c < abs(a - b) - tol:
            raise InvalidConfigurationError(
                f"triangle inequality violated for ({d12!r}, {d23!r}, {d31!r})")


def contact_set(params: SystemParams, cfg: Configuration,
                tol: float = CONTACT_TOL) -> frozenset[tuple[int, int]]:
    """Active contacts: pairs whose distance sits at the touching bound."""
    active = []
    for (i, j) in ((1, 2), (2, 3), (3, 1)):
        if abs(cfg.distance(i, j) - params.contact_distance(i, j)) < tol:
            active.append((i, j))
    return frozenset(active)


# --------------------------------------------------------------------------
# Energies.  The *_chart helpers are vectorized over numpy arrays and do not
# validate their inputs; the scalar public functions take a Configuration.
# --------------------------------------------------------------------------

def _chart_third_distance(a, b, t):
    c2 = a * a + b * b - 2.0 * a * b * np.cos(t)
    return np.sqrt(np.maximum(c2, 0.0))


def moment_of_inertia_chart(params: SystemParams, order, a, b, t):
    mi, mj, mk = chart_masses(params, order)
    c = _chart_third_distance(a, b, t)
    return mi * mj * a * a + mj * mk * b * b + mk * mi * c * c + params.I_S


def potential_chart(params: SystemParams, order, a, b, t):
    mi, mj, mk = chart_masses(params, order)
    c = _chart_third_distance(a, b, t)
    return -(mi * mj / a + mj * mk / b + mk * mi / c)


def amended_potential_chart(params: SystemParams, order, a, b, t, H):
    """Amended potential on angle-chart coordinates; numpy-vectorized."""
    ih = moment_of_inertia_chart(params, order, a, b, t)
    return H * H / (2.0 * ih) + potential_chart(params, order, a, b, t)


def first_variations_chart(params: SystemParams, order, a, b, t, H):
    """Vectorized angle-chart gradient (dE/da, dE/db, dE/dt); no validation."""
    mi, mj, mk = chart_masses(params, order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    cos_t = np.cos(t)
    sin_t = np.sin(t)
    c2 = a * a + b * b - 2.0 * a * b * cos_t
    c = np.sqrt(np.maximum(c2, 1e-300))
    i_h = mi * mj * a * a + mj * mk * b * b + mk * mi * c2 + params.I_S
    sig = H * H / (i_h * i_h)
    e_a = mi * (mj * (-sig + a**-3) * a + mk * (-sig + c**-3) * (a - b * cos_t))
    e_b = mk * (mj * (-sig + b**-3) * b + mi * (-sig + c**-3) * (b - a * cos_t))
    e_t = mk * mi * (-sig + c**-3) * a * b * sin_t
    return e_a, e_b, e_t


def moment_of_inertia(params: SystemParams, cfg: Configuration) -> float:
    """I_H = m1 m2 d12^2 + m2 m3 d23^2 + m3 m1 d31^2 + I_S."""
    m1, m2, m3 = params.masses
    return (m1 * m2 * cfg.d12**2 + m2 * m3 * cfg.d23**2
            + m3 * m1 * cfg.d31**2 + params.I_S)


def potential(params: SystemParams, cfg: Configuration) -> float:
    """Gravitational potential, always negative."""
    m1, m2, m3 = params.masses
    return -(m1 * m2 / cfg.d12 + m2 * m3 / cfg.d23 + m3 * m1 / cfg.d31)


def amended_potential(params: SystemParams, cfg: Configuration, H: float) -> float:
    """E = H^2 / (2 I_H) + U."""
    return H * H / (2.0 * moment_of_inertia(params, cfg)) + potential(params, cfg)


def spin_rate(params: SystemParams, cfg: Configuration, H: float) -> float:
    """Rigid rotation rate H / I_H of the configuration."""
    return H / moment_of_inertia(params, cfg)


def first_variations_angle_form(params: SystemParams, d_ij, d_jk, theta_ki, H,
                                order=(1, 2, 3)):
    """Partial derivatives (dE/dd_ij, dE/dd_jk, dE/dtheta_ki).

    These are the coefficients multiplying the variations of the two chart
    distances and the pivot angle.  The chart stays valid at theta = pi
    (collinear), where the angle derivative vanishes identically.
    """
    mi, mj, mk = chart_masses(params, order)
    a, b, t = float(d_ij), float(d_jk), float(theta_ki)
    if not (0.0 < t <= math.pi + 1e-12):
        raise InvalidConfigurationError(f"pivot angle {t!r} outside (0, pi]")
    c = _chart_third_distance(a, b, t)
    i, j, k = order
    if c < params.contact_distance(k, i) - 1e-9:
        raise InvalidConfigurationError(
            f"derived distance {pair_key(k, i)}={c!r} violates contact bound")
    sig = H * H / moment_of_inertia_chart(params, order, a, b, t) ** 2
    cos_t, sin_t = math.cos(t), math.sin(t)
    e_a = mi * (mj * (-sig + 1.0 / a**3) * a
                + mk * (-sig + 1.0 / c**3) * (a - b * cos_t))
    e_b = mk * (mj * (-sig + 1.0 / b**3) * b
                + mi * (-sig + 1.0 / c**3) * (b - a * cos_t))
    e_t = mk * mi * (-sig + 1.0 / c**3) * a * b * sin_t
    return e_a, e_b, e_t


def collinearity_margin(cfg: Configuration) -> float:
    """Smallest triangle-inequality slack; zero means collinear."""
    d12, d23, d31 = cfg
    return min(d12 + d23 - d31, d23 + d31 - d12, d31 + d12 - d23)


def first_variations_distance_form(params: SystemParams, cfg: Configuration, H,
                                   collinear_tol: float = 1e-9):
    """Partials (dE/dd12, dE/dd23, dE/dd31) in the distance chart.

    Each component is m_i m_j (-H^2/I_H^2 + 1/d_ij^3) d_ij.  The chart is
    singular on collinear configurations, where the three distances are no
    longer independent; callers must switch to the angle form there.
    """
    if collinearity_margin(cfg) < collinear_tol:
        raise UnsupportedChartError(
            "distance chart is singular at collinear configurations; "
            "use the angle form")
    m1, m2, m3 = params.masses
    sig = H * H / moment_of_inertia(params, cfg) ** 2
    return (m1 * m2 * (-sig + cfg.d12**-3) * cfg.d12,
            m2 * m3 * (-sig + cfg.d23**-3) * cfg.d23,
            m3 * m1 * (-sig + cfg.d31**-3) * cfg.d31)


def second_variation_matrix(params: SystemParams, d_ij, d_jk, theta_ki, H,
                            order=(1, 2, 3)) -> np.ndarray:
    """Symmetric 3x3 Hessian of E in the angle chart (d_ij, d_jk, theta_ki)."""
    mi, mj, mk = chart_masses(params, order)
    a, b, t = float(d_ij), float(d_jk), float(theta_ki)
    if not (0.0 < t <= math.pi + 1e-12):
        raise InvalidConfigurationError(f"pivot angle {t!r} outside (0, pi]")
    cos_t, sin_t = math.cos(t), math.sin(t)
    c2 = a * a + b * b - 2.0 * a * b * cos_t
    c = math.sqrt(c2)
    if c < params.contact_distance(order[2], order[0]) - 1e-9:
        raise InvalidConfigurationError("derived distance violates contact bound")
    I_H = mi * mj * a * a + mj * mk * b * b + mk * mi * c2 + params.I_S
    H2 = H * H

    # I_H is polynomial in (a, b, cos t); U needs c and its derivatives.
    ih_a = 2.0 * mi * mj * a + 2.0 * mk * mi * (a - b * cos_t)
    ih_b = 2.0 * mj * mk * b + 2.0 * mk * mi * (b - a * cos_t)
    ih_t = 2.0 * mk * mi * a * b * sin_t
    ih_aa = 2.0 * mi * mj + 2.0 * mk * mi
    ih_bb = 2.0 * mj * mk + 2.0 * mk * mi
    ih_tt = 2.0 * mk * mi * a * b * cos_t
    ih_ab = -2.0 * mk * mi * cos_t
    ih_at = 2.0 * mk * mi * b * sin_t
    ih_bt = 2.0 * mk * mi * a * sin_t

    c_a = (a - b * cos_t) / c
    c_b = (b - a * cos_t) / c
    c_t = a * b * sin_t / c
    c3 = c2 * c
    c_aa = b * b * sin_t**2 / c3
    c_bb = a * a * sin_t**2 / c3
    c_ab = -a * b * sin_t**2 / c3
    c_at = b * b * sin_t * (b - a * cos_t) / c3
    c_bt = a * a * sin_t * (a - b * cos_t) / c3
    c_tt = a * b * cos_t / c - (a * b * sin_t) ** 2 / c3

    def u_second(c_xy, c_x, c_y):
        return mk * mi * (c_xy / c2 - 2.0 * c_x * c_y / c3)

    u_aa = -2.0 * mi * mj / a**3 + u_second(c_aa, c_a, c_a)
    u_bb = -2.0 * mj * mk / b**3 + u_second(c_bb, c_b, c_b)
    u_tt = u_second(c_tt, c_t, c_t)
    u_ab = u_second(c_ab, c_a, c_b)
    u_at = u_second(c_at, c_a, c_t)
    u_bt = u_second(c_bt, c_b, c_t)

    def e_second(ih_x, ih_y, ih_xy, u_xy):
        return H2 / I_H**3 * ih_x * ih_y - H2 / (2.0 * I_H**2) * ih_xy + u_xy

    m = np.empty((3, 3))
    m[0, 0] = e_second(ih_a, ih_a, ih_aa, u_aa)
    m[1, 1] = e_second(ih_b, ih_b, ih_bb, u_bb)
    m[2, 2] = e_second(ih_t, ih_t, ih_tt, u_tt)
    m[0, 1] = m[1, 0] = e_second(ih_a, ih_b, ih_ab, u_ab)
    m[0, 2] = m[2, 0] = e_second(ih_a, ih_t, ih_at, u_at)
    m[1, 2] = m[2, 1] = e_second(ih_b, ih_t, ih_bt, u_bt)
    return m
