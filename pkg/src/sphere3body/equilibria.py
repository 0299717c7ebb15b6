"""Construction of every relative-equilibrium class of three spheres.

Seven classes exist, grouped by how many contacts are active:

    LR  all three spheres mutually resting (2 mirror orientations)
    ER  three spheres resting on a line (3 orderings)
    TR  two contacts, bent about the shared sphere (3 orderings x 2 mirrors)
    EA  one contact, third sphere aligned with the pair (6 ordered labels)
    IS  one contact, third sphere on the perpendicular bisector (3 pairs x 2)
    LO  equilateral orbit, no contact (2 mirrors)
    EO  collinear orbit, no contact (3 orderings)

for 28 distinct (class, ordering, mirror) labels in total.  Mirror flags
apply only to the non-collinear classes; a collinear configuration is its
own reflection.

Each class away from LR/ER reduces to a one-parameter family d -> H(d)
along which the equilibrium condition holds, with contact activations and
existence inequalities truncating the parameter window.  Solvers invert
H(d) on the monotone segments on either side of the curve's interior
minimum, which is where pairs of equilibria are born as the angular
momentum rises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.optimize import brentq

from . import model, stability
from .ffunc import F
from .model import Configuration, SystemParams, configuration_from_angle, pair_key

__all__ = [
    "EquilibriumClass",
    "EquilibriumRecord",
    "ALL_LABELS",
    "ER_ORDERINGS",
    "EA_LABELS",
    "IS_PAIRS",
    "FamilyCurve",
    "solve_LR",
    "solve_ER",
    "solve_TR",
    "solve_IS",
    "solve_EA",
    "solve_LO",
    "solve_EO",
    "enumerate_all",
    "lr_configuration",
    "er_configuration",
    "lr_termination_H",
    "er_stabilization_H",
    "er_termination",
    "tr_curve",
    "is_curve",
    "ea_curve",
    "lo_curve",
    "eo_curve",
    "lo_critical_distance",
    "lo_diagonal_bracket",
    "eo_diagonal_conditions",
    "euler_collinear_ratio",
    "ea_contact_margin",
]

ER_ORDERINGS = ("123", "132", "213")
TR_ORDERINGS = ER_ORDERINGS
EO_ORDERINGS = ER_ORDERINGS
EA_LABELS = ("12-3", "21-3", "13-2", "31-2", "23-1", "32-1")
IS_PAIRS = ("12-3", "13-2", "23-1")

# Collinear classes are their own mrror image; the rest come in pairs.
_MIRRORED_TAGS = {"LR", "TR", "IS", "LO"}

ALL_LABELS: tuple[tuple[str, str, bool], ...] = tuple(
    [("LR", "", m) for m in (False, True)]
    + [("ER", o, False) for o in ER_ORDERINGS]
    + [("TR", o, m) for o in TR_ORDERINGS for m in (False, True)]
    + [("EA", o, False) for o in EA_LABELS]
    + [("IS", p, m) for p in IS_PAIRS for m in (False, True)]
    + [("LO", "", m) for m in (False, True)]
    + [("EO", o, False) for o in EO_ORDERINGS]
)

_WINDOW_EPS = 1e-10


def _normalize_line_ordering(ordering: str) -> str:
    """Canonical representative of a collinear ordering (ijk == kji)."""
    s = str(ordering)
    if sorted(s) != ["1", "2", "3"]:
        raise ValueError(f"invalid ordering label {ordering!r}")
    return min(s, s[::-1])


def _normalize_pair_label(label: str) -> str:
    s = str(label)
    if len(s) == 4 and s[2] == "-":
        pair, sep = s[:2], s[3]
        if sorted(pair + sep) == ["1", "2", "3"]:
            return "".join(sorted(pair)) + "-" + sep
    raise ValueError(f"invalid contact-pair label {label!r}")


@dataclass(frozen=True)
class EquilibriumClass:
    """Class tag with ordering label and mirror orientation."""

    tag: str
    ordering: str = ""
    mirror: bool = False

    def __post_init__(self):
        valid = {
            "LR": ("",), "ER": ER_ORDERINGS, "TR": TR_ORDERINGS,
            "EA": EA_LABELS, "IS": IS_PAIRS, "LO": ("",), "EO": EO_ORDERINGS,
        }
        if self.tag not in valid:
            raise ValueError(f"unknown class tag {self.tag!r}")
        if self.ordering not in valid[self.tag]:
            raise ValueError(f"invalid ordering {self.ordering!r} for {self.tag}")
        if self.mirror and self.tag not in _MIRRORED_TAGS:
            raise ValueError(f"{self.tag} configurations have no mirror pair")

    @property
    def label(self) -> str:
        return self.tag + self.ordering

    def key(self) -> tuple[str, str, bool]:
        return (self.tag, self.ordering, self.mirror)


@dataclass(frozen=True)
class EquilibriumRecord:
    """One solved relative equilibrium at a given angular momentum."""

    clazz: EquilibriumClass
    cfg: Configuration
    contacts: frozenset
    H: float
    spin_rate: float
    energy: float
    stability: str
    certificate: stability.StabilityCertificate
    branch: str
    chart_order: tuple[int, int, int]
    q: float

    @property
    def theta(self) -> float:
        """Pivot angle of the record's chart."""
        return model.chart_coordinates(self.cfg, self.chart_order)[2]


def _order_tuple(ordering: str) -> tuple[int, int, int]:
    return tuple(int(ch) for ch in ordering)


def _ea_indices(label: str) -> tuple[int, int, int]:
    """(i, j, k) of an aligned label 'ij-k': i-j in contact, k beyond j."""
    if label not in EA_LABELS:
        raise ValueError(f"invalid aligned-pair label {label!r}")
    return int(label[0]), int(label[1]), int(label[3])


def _is_indices(params: SystemParams, pair_label: str) -> tuple[int, int, int]:
    """(i, j, k) for an isosceles label with m_j >= m_i.

    The chart with the heavier contact sphere second makes the angle block
    of the Hessian manifestly negative, which is the instability witness.
    """
    pair_label = _normalize_pair_label(pair_label)
    if pair_label not in IS_PAIRS:
        raise ValueError(f"invalid isosceles label {pair_label!r}")
    p, q, k = int(pair_label[0]), int(pair_label[1]), int(pair_label[3])
    if params.mass(q) >= params.mass(p):
        return p, q, k
    return q, p, k


# --------------------------------------------------------------------------
# Fixed-geometry classes: LR and ER
# --------------------------------------------------------------------------

def lr_configuration(params: SystemParams) -> Configuration:
    """All three contacts active: d_ij = 1 - r_k for every pair."""
    return Configuration(params.contact_distance(1, 2),
                         params.contact_distance(2, 3),
                         params.contact_distance(3, 1))


def er_configuration(params: SystemParams, ordering: str) -> Configuration:
    """Line i-j-k with both contacts active: d_ki = (1-r_k) + (1-r_i)."""
    i, j, k = _order_tuple(_normalize_line_ordering(ordering))
    a = params.contact_distance(i, j)
    b = params.contact_distance(j, k)
    return configuration_from_angle((i, j, k), a, b, math.pi)


def lr_termination_H(params: SystemParams) -> float:
    """Angular momentum at which the fully resting state loses a contact.

    The binding release direction opens the angle at the smallest sphere,
    separating the two largest; the threshold is H = I_H (1-r_3)^{-3/2}.
    """
    i_h = model.moment_of_inertia(params, lr_configuration(params))
    return i_h * (1.0 - params.radius(3)) ** -1.5


def er_stabilization_H(params: SystemParams, ordering: str) -> float:
    """H above which the resting line stops behaving like an inverted pendulum."""
    ordering = _normalize_line_ordering(ordering)
    j = _order_tuple(ordering)[1]
    i_h = model.moment_of_inertia(params, er_configuration(params, ordering))
    return i_h * (1.0 + params.radius(j)) ** -1.5


def _er_release_threshold(params, j, inner, outer):
    """Squared rate limit for keeping the (inner, j) contact of a line.

    ``inner`` is the end sphere touching j on the tested side, ``outer``
    the far end at distance 1 + r_j.  Moving ``inner`` outward couples it
    to the middle sphere across the contact gap and to ``outer`` across
    the whole line, so the middle mass m_j weights the contact term.
    """
    m_j, m_out = params.mass(j), params.mass(outer)
    d_in = params.contact_distance(inner, j)
    d_out = 1.0 + params.radius(j)
    return ((m_j / d_in**2 + m_out / d_out**2)
            / (m_j * d_in + m_out * d_out))


def er_termination(params: SystemParams, ordering: str):
    """Fission data for a resting line: (H_end, released pair, EA label, tie).

    Whichever contact variation first loses positivity releases; the
    survivor contact plus the separated sphere is an aligned (EA) label.
    A tie (equal thresholds) means the line sits exactly on a fission
    chart boundary and is itself a central configuration.
    """
    ordering = _normalize_line_ordering(ordering)
    i, j, k = _order_tuple(ordering)
    t_ij = _er_release_threshold(params, j, inner=i, outer=k)
    t_jk = _er_release_threshold(params, j, inner=k, outer=i)
    i_h = model.moment_of_inertia(params, er_configuration(params, ordering))
    h_ij = i_h * math.sqrt(t_ij)   # contact (i, j) releases -> EA kj-i
    h_jk = i_h * math.sqrt(t_jk)   # contact (j, k) releases -> EA ij-k
    tie = abs(h_ij - h_jk) <= 1e-12 * max(h_ij, h_jk)
    if h_jk <= h_ij:
        return h_jk, (j, k), f"{i}{j}-{k}", tie
    return h_ij, (i, j), f"{k}{j}-{i}", tie


def solve_LR(params: SystemParams, H: float):
    """Both mirror orientations of the fully resting state, if they exist."""
    if H < 0:
        raise ValueError("H must be nonnegative")
    if H > lr_termination_H(params) + _WINDOW_EPS:
        return []
    cfg = lr_configuration(params)
    recs = []
    for mirror in (False, True):
        recs.append(_record(params, EquilibriumClass("LR", "", mirror), cfg, H,
                            branch="resting", order=(1, 2, 3),
                            constrained=("a", "b", "t"), q=cfg.d31))
    return recs


def solve_ER(params: SystemParams, ordering: str, H: float):
    """The resting line with the given ordering, while its contacts hold."""
    if H < 0:
        raise ValueError("H must be nonnegative")
    ordering = _normalize_line_ordering(ordering)
    h_end, _, _, _ = er_termination(params, ordering)
    if H > h_end + _WINDOW_EPS:
        return []
    cfg = er_configuration(params, ordering)
    order = _order_tuple(ordering)
    return [_record(params, EquilibriumClass("ER", ordering), cfg, H,
                    branch="resting", order=order, constrained=("a", "b"),
                    q=cfg.distance(order[2], order[0]))]


# --------------------------------------------------------------------------
# One-parameter families
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyCurve:
    """A family of equilibria parameterized by one distance q.

    ``H_of_q`` is convex on the window with an interior minimum at
    ``q_split`` when that lies inside; the decreasing side is the branch
    that runs back toward contact, the increasing side escapes to large
    separations.  ``q_hi`` is None for unbounded families.
    """

    key: str
    order: tuple[int, int, int]
    q_lo: float
    q_hi: float | None
    q_split: float | None
    meta: dict

    def H_of_q(self, q: float) -> float:
        raise NotImplementedError

    def cfg_of_q(self, q: float) -> Configuration:
        raise NotImplementedError

    def H_lo(self) -> float:
        return self.H_of_q(self.q_lo)

    def H_min(self) -> float:
        return self.H_of_q(self.q_split) if self.q_split is not None else self.H_lo()

    def branches(self):
        """(name, q_window, increasing) pairs for the monotone segments."""
        dec_name, inc_name = self.meta["branch_names"]
        out = []
        if self.q_split is not None:
            out.append((dec_name, (self.q_lo, self.q_split), False))
            out.append((inc_name, (self.q_split, self.q_hi), True))
        elif self.meta.get("monotone", "dec") == "dec":
            out.append((dec_name, (self.q_lo, self.q_hi), False))
        else:
            out.append((inc_name, (self.q_lo, self.q_hi), True))
        return out

    def solve(self, H: float, branch: str):
        for name, (qa, qb), increasing in self.branches():
            if name == branch:
                return _invert_monotone(self.H_of_q, H, qa, qb, increasing)
        return None


@dataclass(frozen=True)
class _PowerCurve(FamilyCurve):
    """H(q) = (A + B q^2) / q^(3/2), the common resting-family profile."""

    A: float = 0.0
    B: float = 0.0
    scale: float = 1.0

    def H_of_q(self, q: float) -> float:
        return self.scale * (self.A + self.B * q * q) / q**1.5

    def cfg_of_q(self, q: float) -> Configuration:
        return self.meta["cfg_of_q"](q)


def _critical_q(A: float, B: float) -> float:
    """Interior minimum of (A + B q^2)/q^(3/2), at q = sqrt(3A/B)."""
    return math.sqrt(3.0 * A / B)


def _interior_split(A, B, q_lo, q_hi) -> float | None:
    q_c = _critical_q(A, B)
    if q_c <= q_lo * (1.0 + 1e-14):
        return None
    if q_hi is not None and q_c >= q_hi * (1.0 - 1e-14):
        return None
    return q_c


def _invert_monotone(H_of_q, H, qa, qb, increasing) -> float | None:
    """Root of H_of_q(q) = H on a monotone segment; None when outside."""
    if qb is None:
        # Unbounded increasing segment: expand until the curve passes H.
        qb = max(2.0 * qa, qa + 1.0)
        for _ in range(200):
            if H_of_q(qb) > H:
                break
            qb *= 2.0
        else:
            return None
    fa = H_of_q(qa) - H
    fb = H_of_q(qb) - H
    tol = 1e-12 * max(1.0, abs(H))
    if abs(fa) <= tol:
        return qa
    if abs(fb) <= tol:
        return qb
    if fa * fb > 0.0:
        return None
    return brentq(lambda q: H_of_q(q) - H, qa, qb, xtol=1e-14, rtol=8.9e-16,
                  maxiter=200)


def tr_curve(params: SystemParams, ordering: str) -> _PowerCurve:
    """Bent two-contact family pivoting about the middle sphere.

    q is the distance between the outer spheres.  The window is cut below
    by whichever is largest of the third contact and the two distance
    variations losing positivity (q must dominate both contact gaps), and
    above by the straight line, where the family meets the resting line.
    """
    ordering = _normalize_line_ordering(ordering)
    i, j, k = _order_tuple(ordering)
    mi, mj, mk = params.mass(i), params.mass(j), params.mass(k)
    a0 = params.contact_distance(i, j)
    b0 = params.contact_distance(j, k)
    A = mi * mj * a0 * a0 + mj * mk * b0 * b0 + params.I_S
    B = mk * mi
    q_lo = max(1.0 - params.radius(j), a0, b0)
    q_hi = (1.0 - params.radius(k)) + (1.0 - params.radius(i))
    split = _interior_split(A, B, q_lo, q_hi)

    def cfg_of_q(q, _order=(i, j, k), _a0=a0, _b0=b0):
        cos_t = (_a0 * _a0 + _b0 * _b0 - q * q) / (2.0 * _a0 * _b0)
        return configuration_from_angle(_order, _a0, _b0,
                                        math.acos(min(1.0, max(-1.0, cos_t))))

    lr_meet = q_lo <= (1.0 - params.radius(j)) * (1.0 + 1e-14)
    return _PowerCurve(
        key=f"TR{ordering}", order=(i, j, k), q_lo=q_lo, q_hi=q_hi,
        q_split=split, A=A, B=B,
        meta={"cfg_of_q": cfg_of_q, "branch_names": ("toward-LR", "toward-ER"),
              "monotone": "dec", "lr_meet": lr_meet,
              "stability_distance": _critical_q(A, B)})


def is_curve(params: SystemParams, pair_label: str) -> _PowerCurve:
    """Perpendicular-bisector family: equal legs q from the touching pair."""
    i, j, k = _is_indices(params, pair_label)
    mi, mj, mk = params.mass(i), params.mass(j), params.mass(k)
    base = params.contact_distance(i, j)
    A = mi * mj * base * base + params.I_S
    B = mk * (mi + mj)
    q_lo = max(base, params.contact_distance(j, k), params.contact_distance(k, i))
    split = _interior_split(A, B, q_lo, None)

    def cfg_of_q(q, _order=(i, j, k), _base=base):
        cos_t = 0.5 * _base / q
        return configuration_from_angle(_order, _base, q, math.acos(cos_t))

    return _PowerCurve(
        key=f"IS{_normalize_pair_label(pair_label)}", order=(i, j, k),
        q_lo=q_lo, q_hi=None, q_split=split, A=A, B=B,
        meta={"cfg_of_q": cfg_of_q, "branch_names": ("inner", "outer"),
              "monotone": "inc"})


def lo_curve(params: SystemParams) -> _PowerCurve:
    """Equilateral orbital family over the side length q."""
    m1, m2, m3 = params.masses
    B = m1 * m2 + m2 * m3 + m3 * m1
    q_lo = 1.0 - params.radius(3)
    split = _interior_split(params.I_S, B, q_lo, None)

    def cfg_of_q(q):
        return Configuration(q, q, q)

    return _PowerCurve(
        key="LO", order=(1, 2, 3), q_lo=q_lo, q_hi=None, q_split=split,
        A=params.I_S, B=B,
        meta={"cfg_of_q": cfg_of_q, "branch_names": ("inner", "outer"),
              "monotone": "inc"})


def lo_critical_distance(params: SystemParams) -> float:
    """Side length of the angular-momentum minimum of the equilateral family."""
    m1, m2, m3 = params.masses
    return math.sqrt(3.0 * params.I_S / (m1 * m2 + m2 * m3 + m3 * m1))


def lo_diagonal_bracket(masses) -> float:
    """Mass factor of the binding diagonal entry, m2 m3 - 3 m1 (m2 + m3).

    Always negative on the canonical triangle, which is why the
    equilateral orbit is never energetically stable.
    """
    m1, m2, m3 = masses
    return m2 * m3 - 3.0 * m1 * (m2 + m3)


# ---- aligned one-contact family -------------------------------------------

def ea_contact_margin(params: SystemParams, label: str, d_ki: float | None = None) -> float:
    """Existence margin of an aligned configuration at separation d_ki.

    Positive means the contact variation stays nonnegative there.  With
    r = d_ki / (1 - r_k), the margin is F(m_j/m_k, 1/r) - F(m_j/m_i, 1-1/r);
    at the minimum separation (third sphere touching) its sign decides
    which of the two conjugate aligned labels survives down to contact.
    """
    i, j, k = _ea_indices(label)
    base = params.contact_distance(i, j)
    if d_ki is None:
        d_ki = 1.0 + params.radius(j)
    r = d_ki / base
    return (F(params.mass(j) / params.mass(k), 1.0 / r)
            - F(params.mass(j) / params.mass(i), 1.0 - 1.0 / r))


@dataclass(frozen=True)
class _AlignedCurve(FamilyCurve):
    def H_of_q(self, q: float) -> float:
        mi, mj, mk = self.meta["masses"]
        base = self.meta["base"]
        d_jk = q - base
        i_h = (mi * mj * base * base + mj * mk * d_jk * d_jk
               + mk * mi * q * q + self.meta["I_S"])
        sig = (mi / q**2 + mj / d_jk**2) / (mi * q + mj * d_jk)
        return i_h * math.sqrt(sig)

    def cfg_of_q(self, q: float) -> Configuration:
        base = self.meta["base"]
        return configuration_from_angle(self.order, base, q - base, math.pi)


def _ea_slope_sign(curve: _AlignedCurve, q: float) -> float:
    """d(log H)/dq of the aligned family, analytic."""
    mi, mj, mk = curve.meta["masses"]
    base = curve.meta["base"]
    v = q - base
    i_h = (mi * mj * base * base + mj * mk * v * v + mk * mi * q * q
           + curve.meta["I_S"])
    ih_p = 2.0 * mj * mk * v + 2.0 * mk * mi * q
    n = mi / q**2 + mj / v**2
    n_p = -2.0 * mi / q**3 - 2.0 * mj / v**3
    d = mi * q + mj * v
    d_p = mi + mj
    return ih_p / i_h + 0.5 * (n_p / n - d_p / d)


def ea_curve(params: SystemParams, label: str) -> _AlignedCurve:
    """Aligned one-contact family over the outer separation q = d_ki.

    The lower window end is the third-sphere contact when the existence
    margin allows it, otherwise the separation at which the margin
    crosses zero; there the configuration is a central configuration and
    the family hands over to the collinear orbital one.
    """
    i, j, k = _ea_indices(label)
    masses = (params.mass(i), params.mass(j), params.mass(k))
    base = params.contact_distance(i, j)
    q_contact = 1.0 + params.radius(j)
    reaches_contact = ea_contact_margin(params, label, q_contact) >= 0.0
    if reaches_contact:
        q_lo = q_contact
    else:
        hi = q_contact * 2.0
        for _ in range(200):
            if ea_contact_margin(params, label, hi) > 0.0:
                break
            hi *= 2.0
        q_lo = brentq(lambda d: ea_contact_margin(params, label, d),
                      q_contact, hi, xtol=1e-14, rtol=8.9e-16)

    meta = {"masses": masses, "base": base, "I_S": params.I_S,
            "branch_names": ("inner", "outer"), "monotone": "inc",
            "reaches_contact": reaches_contact, "q_contact": q_contact}
    probe = _AlignedCurve(key=f"EA{label}", order=(i, j, k), q_lo=q_lo,
                          q_hi=None, q_split=None, meta=meta)

    # Locate the interior minimum of H(q), if any, from the analytic slope.
    split = None
    g_lo = _ea_slope_sign(probe, q_lo * (1.0 + 1e-12))
    if g_lo < 0.0:
        hi = max(2.0 * q_lo, q_lo + 1.0)
        for _ in range(200):
            if _ea_slope_sign(probe, hi) > 0.0:
                break
            hi *= 2.0
        split = brentq(lambda q: _ea_slope_sign(probe, q), q_lo, hi,
                       xtol=1e-14, rtol=8.9e-16)
    return replace(probe, q_split=split)


# ---- collinear orbital family ---------------------------------------------

def euler_collinear_ratio(params: SystemParams, ordering: str) -> float:
    """Spacing ratio d_jk / d_ij of the collinear central configuration.

    Root of the balance between the two rate conditions; unique positive
    solution for any mass triple.
    """
    i, j, k = _order_tuple(_normalize_line_ordering(ordering))
    mi, mj, mk = params.mass(i), params.mass(j), params.mass(k)

    def balance(rho):
        w = 1.0 + rho
        lhs = (mj * w * w + mk) * (mj * rho + mi * w) * rho * rho
        rhs = (mj * w * w + mi * rho * rho) * (mj + mk * w)
        return lhs - rhs

    hi = 1.0
    for _ in range(200):
        if balance(hi) > 0.0:
            break
        hi *= 2.0
    lo = hi / 2.0
    for _ in range(200):
        if balance(lo) < 0.0:
            break
        lo /= 2.0
    return brentq(balance, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


def eo_diagonal_conditions(masses, ordering: str) -> tuple[float, float]:
    """Mass-only positivity conditions a stable collinear orbit would need.

    Returns (m_i m_j - 3 (m_i + m_j) m_k, m_j m_k - 3 (m_j + m_k) m_i);
    at least one is negative for every mass triple and ordering, so the
    collinear orbits are always unstable.
    """
    order = _order_tuple(_normalize_line_ordering(ordering))
    m = {n + 1: masses[n] for n in range(3)}
    mi, mj, mk = (m[x] for x in order)
    return (mi * mj - 3.0 * (mi + mj) * mk,
            mj * mk - 3.0 * (mj + mk) * mi)


@dataclass(frozen=True)
class _CollinearOrbitCurve(FamilyCurve):
    A: float = 0.0
    B: float = 0.0

    def H_of_q(self, q: float) -> float:
        return (self.A + self.B * q * q) / q**1.5

    def cfg_of_q(self, q: float) -> Configuration:
        rho = self.meta["rho"]
        return configuration_from_angle(self.order, q, rho * q, math.pi)


def eo_curve(params: SystemParams, ordering: str) -> _CollinearOrbitCurve:
    """Scaled family of collinear central configurations.

    The spacing ratio is fixed by the masses; the free parameter q is the
    inner distance d_ij.  Uniform scaling keeps the shape a central
    configuration while H follows (A + B q^2)/q^(3/2), the same profile
    as the other orbital families.
    """
    ordering = _normalize_line_ordering(ordering)
    i, j, k = _order_tuple(ordering)
    mi, mj, mk = params.mass(i), params.mass(j), params.mass(k)
    rho = euler_collinear_ratio(params, ordering)
    w = 1.0 + rho
    sig1 = (mj + mk / w**2) / (mj + mk * w)
    c1 = mi * mj + mj * mk * rho * rho + mk * mi * w * w
    root = math.sqrt(sig1)
    lo_ij = params.contact_distance(i, j)
    lo_jk = params.contact_distance(j, k) / rho
    q_lo = max(lo_ij, lo_jk)
    split = _interior_split(root * params.I_S, root * c1, q_lo, None)
    meta = {"rho": rho, "branch_names": ("inner", "outer"), "monotone": "inc",
            "contact_pair": (i, j) if lo_ij >= lo_jk else (j, k)}
    return _CollinearOrbitCurve(key=f"EO{ordering}", order=(i, j, k),
                                q_lo=q_lo, q_hi=None, q_split=split,
                                A=root * params.I_S, B=root * c1, meta=meta)


# --------------------------------------------------------------------------
# Solvers on the families
# --------------------------------------------------------------------------

def _record(params, clazz, cfg, H, branch, order, constrained, q):
    a, b, t = model.chart_coordinates(cfg, order)
    cert = stability.certify_chart(params, order, a, b, t, H, constrained)
    i_h = model.moment_of_inertia(params, cfg)
    return EquilibriumRecord(
        clazz=clazz, cfg=cfg, contacts=model.contact_set(params, cfg),
        H=H, spin_rate=H / i_h, energy=model.amended_potential(params, cfg, H),
        stability=cert.verdict, certificate=cert, branch=branch,
        chart_order=tuple(order), q=q)


def _solve_curve(params, curve, H, clazz_of, constrained, branch=None,
                 open_lo=False):
    if H < 0:
        raise ValueError("H must be nonnegative")
    recs = []
    for name, (qa, qb), increasing in curve.branches():
        if branch is not None and name != branch:
            continue
        q = _invert_monotone(curve.H_of_q, H, qa, qb, increasing)
        if q is None:
            continue
        if open_lo and q <= curve.q_lo * (1.0 + _WINDOW_EPS):
            continue
        if curve.q_hi is not None and q >= curve.q_hi * (1.0 - _WINDOW_EPS):
            continue
        cfg = curve.cfg_of_q(q)
        for clazz in clazz_of:
            recs.append(_record(params, clazz, cfg, H, branch=name,
                                order=curve.order, constrained=constrained,
                                q=q))
    return recs


def solve_TR(params: SystemParams, ordering: str, branch: str, H: float):
    """Bent two-contact equilibria on the requested branch (both mirrors).

    ``branch`` is "toward-LR" (the side that compactifies as H grows) or
    "toward-ER" (the stable side that exists only when the stability
    threshold falls inside the window).
    """
    ordering = _normalize_line_ordering(ordering)
    if branch not in ("toward-LR", "toward-ER"):
        raise ValueError(f"invalid branch {branch!r}")
    curve = tr_curve(params, ordering)
    classes = [EquilibriumClass("TR", ordering, m) for m in (False, True)]
    return _solve_curve(params, curve, H, classes, constrained=("a", "b"),
                        branch=branch, open_lo=curve.meta["lr_meet"])


def solve_IS(params: SystemParams, pair_label: str, H: float):
    """Isosceles one-contact equilibria, all branches, both mirrors."""
    pair_label = _normalize_pair_label(pair_label)
    curve = is_curve(params, pair_label)
    classes = [EquilibriumClass("IS", pair_label, m) for m in (False, True)]
    return _solve_curve(params, curve, H, classes, constrained=("a",))


def solve_EA(params: SystemParams, label: str, branch: str, H: float):
    """Aligned one-contact equilibrium on the requested branch.

    The inner branch runs from the curve minimum down to the third-sphere
    contact (or to the central-configuration handover when the contact is
    unreachable); the outer branch escapes to large separations.
    """
    if branch not in ("inner", "outer"):
        raise ValueError(f"invalid branch {branch!r}")
    curve = ea_curve(params, label)
    clazz = EquilibriumClass("EA", label)
    return _solve_curve(params, curve, H, [clazz], constrained=("a",),
                        branch=branch,
                        open_lo=curve.meta["reaches_contact"])


def solve_LO(params: SystemParams, H: float):
    """Equilateral orbits at this H: zero, one, or two side lengths."""
    curve = lo_curve(params)
    classes = [EquilibriumClass("LO", "", m) for m in (False, True)]
    return _solve_curve(params, curve, H, classes, constrained=(),
                        open_lo=True)


def solve_EO(params: SystemParams, ordering: str, H: float):
    """Collinear orbits with the given ordering, polished by Newton.

    The scaled central-configuration family provides the seed; a damped
    Newton iteration on the two in-line gradient components removes the
    residual scaling error.  Non-convergence returns no record.
    """
    ordering = _normalize_line_ordering(ordering)
    curve = eo_curve(params, ordering)
    clazz = EquilibriumClass("EO", ordering)
    recs = _solve_curve(params, curve, H, [clazz], constrained=(),
                        open_lo=True)
    out = []
    for rec in recs:
        polished = _eo_polish(params, curve.order, rec.cfg, H)
        if polished is None:
            continue
        cfg = polished
        out.append(_record(params, clazz, cfg, H, branch=rec.branch,
                           order=curve.order, constrained=(),
                           q=cfg.distance(curve.order[0], curve.order[1])))
    # Post-solve sanity: 1/d_ki^3 <= (H/I_H)^2 <= 1/max(d_ij, d_jk)^3.
    for rec in out:
        i, j, k = curve.order
        sig = (rec.spin_rate) ** 2
        d_ki = rec.cfg.distance(k, i)
        d_mx = max(rec.cfg.distance(i, j), rec.cfg.distance(j, k))
        if not (d_ki**-3 <= sig * (1 + 1e-9) and sig <= d_mx**-3 * (1 + 1e-9)):
            raise AssertionError("collinear orbit failed its rate bracket")
    return out


def _eo_polish(params, order, cfg, H, tol=1e-13, max_iter=60):
    import numpy as np

    a, b, t = model.chart_coordinates(cfg, order)
    t = math.pi
    for _ in range(max_iter):
        e_a, e_b, _ = model.first_variations_angle_form(params, a, b, t, H,
                                                        order=order)
        res = math.hypot(e_a, e_b)
        if res <= tol:
            return configuration_from_angle(order, a, b, t)
        hess = model.second_variation_matrix(params, a, b, t, H, order=order)
        jac = hess[:2, :2]
        try:
            step = np.linalg.solve(jac, [-e_a, -e_b])
        except np.linalg.LinAlgError:
            return None
        scale = 1.0
        for _ in range(30):
            na, nb = a + scale * step[0], b + scale * step[1]
            if na > 0 and nb > 0:
                ea2, eb2, _ = model.first_variations_angle_form(
                    params, na, nb, t, H, order=order)
                if math.hypot(ea2, eb2) < res:
                    a, b = na, nb
                    break
            scale *= 0.5
        else:
            return None
    e_a, e_b, _ = model.first_variations_angle_form(params, a, b, t, H, order=order)
    if math.hypot(e_a, e_b) <= 1e-10:
        return configuration_from_angle(order, a, b, t)
    return None


def enumerate_all(params: SystemParams, H: float):
    """All relative equilibria at angular momentum H, deduplicated.

    Records are unique up to (class, ordering, mirror, configuration
    within 1e-8) and each one carries its own stability certificate.
    """
    if H < 0:
        raise ValueError("H must be nonnegative")
    recs = []
    recs += solve_LR(params, H)
    for o in ER_ORDERINGS:
        recs += solve_ER(params, o, H)
    for o in TR_ORDERINGS:
        for br in ("toward-LR", "toward-ER"):
            recs += solve_TR(params, o, br, H)
    for label in EA_LABELS:
        for br in ("inner", "outer"):
            recs += solve_EA(params, label, br, H)
    for p in IS_PAIRS:
        recs += solve_IS(params, p, H)
    recs += solve_LO(params, H)
    for o in EO_ORDERINGS:
        recs += solve_EO(params, o, H)

    seen = {}
    for rec in recs:
        key = (rec.clazz.key(),
               round(rec.cfg.d12, 8), round(rec.cfg.d23, 8), round(rec.cfg.d31, 8))
        seen.setdefault(key, rec)
    order_rank = {tag: n for n, tag in enumerate(("LR", "ER", "TR", "EA", "IS", "LO", "EO"))}
    return sorted(seen.values(),
                  key=lambda r: (order_rank[r.clazz.tag], r.clazz.ordering,
                                 r.clazz.mirror, r.branch, r.q))
