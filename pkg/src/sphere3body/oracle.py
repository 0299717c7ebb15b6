"""Brute-force verification of the equilibrium catalog.

The feasible configuration set decomposes into strata by active contact
set: the full three-dimensional interior, the three contact faces, the
collinear mirror faces, the one-dimensional edges where two contacts (or
a contact and collinearity) hold, and the fully resting vertex.  Every
stratum is scanned on its own grid of amended-potential values; cells
where the finite-difference gradient changes sign in every free
direction seed a Newton refinement, and refined points are kept only if
the contact-release variations allow an equilibrium there.

Classification (minimum against saddle) is done from the energy values
alone, by finite-difference curvature over the free directions plus the
one-sided contact probes, deliberately independent of the closed-form
solvers and the assembled analytic Hessian used elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import model
from .model import Configuration, SystemParams

__all__ = [
    "CriticalPoint",
    "ScanReport",
    "MatchResult",
    "scan",
    "refine",
    "compare_with_records",
    "verify_equilibria",
    "default_H_samples",
]

_RELEASE_TOL = 1e-8
_CLASS_TOL = 1e-5   # on the scale-normalized FD spectrum
_MATCH_TOL = 1e-5


@dataclass(frozen=True)
class CriticalPoint:
    cfg: Configuration
    contacts: frozenset
    stratum: str
    classification: str  # "minimum" | "saddle" | "marginal"
    energy: float
    grad_norm: float
    releases: tuple[float, ...]


@dataclass
class ScanReport:
    H: float
    resolution: int
    d_max: float
    points: list[CriticalPoint]
    global_min_cfg: Configuration
    global_min_energy: float
    strata_nodes: dict[str, int]


@dataclass
class MatchResult:
    matched: list[tuple[CriticalPoint, list]]
    unmatched_points: list[CriticalPoint]
    unmatched_records: list
    verdict_mismatches: list[tuple[CriticalPoint, list]]

    @property
    def bijective(self) -> bool:
        return not self.unmatched_points and not self.unmatched_records

    @property
    def verdicts_agree(self) -> bool:
        return not self.verdict_mismatches


def default_H_samples(count: int = 24, lo: float = 1e-3, hi: float = 10.0):
    """Log-spaced angular momentum sample set used by the verification runs."""
    return np.geomspace(lo, hi, count)


def _scan_extent(params: SystemParams, H: float) -> float:
    """Upper bound on any equilibrium distance at this H.

    Every unbounded family follows H ~ B sqrt(d) for large d with B no
    smaller than half the weakest pairing coefficient, so (2H/B)^2 covers
    all outer branches with margin.
    """
    m1, m2, m3 = params.masses
    b_min = min(m1 * (1 - m1), m2 * (1 - m2), m3 * (1 - m3),
                m1 * m2 + m2 * m3 + m3 * m1)
    return 1.3 * (2.0 * H / b_min) ** 2 + 8.0


class _Stratum:
    """A grid over one contact stratum in a fixed angle chart."""

    def __init__(self, name, order, fixed, axes, contact_axes, min_free=None):
        self.name = name
        self.order = order
        self.fixed = fixed            # dict axis -> value
        self.axes = axes              # list of (axis, grid array)
        self.contact_axes = contact_axes  # pinned axes that are contacts
        self.min_free = min_free or {}

    def coordinate_arrays(self):
        grids = [g for _, g in self.axes]
        mesh = np.meshgrid(*grids, indexing="ij") if grids else []
        coords = {}
        for (axis, _), mm in zip(self.axes, mesh):
            coords[axis] = mm
        shape = mesh[0].shape if mesh else ()
        for axis in ("a", "b", "t"):
            if axis not in coords:
                coords[axis] = np.full(shape, self.fixed[axis]) if shape \
                    else np.array(self.fixed[axis])
        return coords


def _build_strata(params: SystemParams, H: float, resolution: int):
    c12 = params.contact_distance(1, 2)
    c23 = params.contact_distance(2, 3)
    c31 = params.contact_distance(3, 1)
    d_max = _scan_extent(params, H)
    R = resolution
    edge_n = 4 * R

    def dgrid(lo, n=R):
        return np.geomspace(lo * (1.0 + 1e-9), d_max, n)

    t_open = np.linspace(0.0, math.pi, R + 2)[1:-1]
    strata = []
    # Interior: no contact, strictly non-collinear.
    strata.append(_Stratum("interior", (1, 2, 3), {},
                           [("a", dgrid(c12)), ("b", dgrid(c23)),
                            ("t", t_open)], contact_axes=[]))
    # Collinear mirror faces, one per middle sphere.
    strata.append(_Stratum("line-mid2", (1, 2, 3), {"t": math.pi},
                           [("a", dgrid(c12)), ("b", dgrid(c23))],
                           contact_axes=[]))
    strata.append(_Stratum("line-mid1", (3, 1, 2), {"t": math.pi},
                           [("a", dgrid(c31)), ("b", dgrid(c12))],
                           contact_axes=[]))
    strata.append(_Stratum("line-mid3", (2, 3, 1), {"t": math.pi},
                           [("a", dgrid(c23)), ("b", dgrid(c31))],
                           contact_axes=[]))
    # One-contact faces.
    strata.append(_Stratum("face-12", (1, 2, 3), {"a": c12},
                           [("b", dgrid(c23)), ("t", t_open)],
                           contact_axes=["a"]))
    strata.append(_Stratum("face-23", (2, 3, 1), {"a": c23},
                           [("b", dgrid(c31)), ("t", t_open)],
                           contact_axes=["a"]))
    strata.append(_Stratum("face-31", (3, 1, 2), {"a": c31},
                           [("b", dgrid(c12)), ("t", t_open)],
                           contact_axes=["a"]))
    # Aligned edges: one contact plus collinearity.
    for label, order, a0, b_lo in (
            ("edge-EA12-3", (1, 2, 3), c12, c23),
            ("edge-EA21-3", (2, 1, 3), c12, c31),
            ("edge-EA13-2", (1, 3, 2), c31, c23),
            ("edge-EA31-2", (3, 1, 2), c31, c12),
            ("edge-EA23-1", (2, 3, 1), c23, c31),
            ("edge-EA32-1", (3, 2, 1), c23, c12)):
        strata.append(_Stratum(label, order, {"a": a0, "t": math.pi},
                               [("b", dgrid(b_lo, edge_n))],
                               contact_axes=["a"]))
    # Two-contact edges: the pivot angle is the only free coordinate.  The
    # corner node (all three contacts) stays in the grid so that roots
    # hugging the fully resting state just before its termination still
    # produce a bracketing cell.
    for label, order, a0, b0, c0 in (
            ("edge-TR123", (1, 2, 3), c12, c23, c31),
            ("edge-TR132", (2, 3, 1), c23, c31, c12),
            ("edge-TR213", (3, 1, 2), c31, c12, c23)):
        cos_lo = (a0 * a0 + b0 * b0 - c0 * c0) / (2.0 * a0 * b0)
        t_lo = math.acos(min(1.0, max(-1.0, cos_lo)))
        tg = np.linspace(t_lo, math.pi, edge_n + 1)
        strata.append(_Stratum(label, order, {"a": a0, "b": b0},
                               [("t", tg)], contact_axes=["a", "b"]))
    return strata, d_max


def _feasible_mask(params, stratum, coords):
    i, j, k = stratum.order
    c = np.sqrt(np.maximum(
        coords["a"] ** 2 + coords["b"] ** 2
        - 2.0 * coords["a"] * coords["b"] * np.cos(coords["t"]), 0.0))
    lim = params.contact_distance(k, i)
    return c >= lim * (1.0 - 1e-12)


def _critical_cells(components, dims):
    """Indices of cells where every gradient component changes sign.

    ``components`` holds one array per free axis with the analytic
    gradient evaluated at the grid nodes (NaN where infeasible); a cell
    qualifies when each component takes both signs among its corners.
    """
    flag = None
    for g in components:
        # Per-cell corner extrema of this gradient component; NaN corners
        # propagate and disqualify the cell.
        mins, maxs = g, g
        for axis in range(dims):
            sl_lo = [slice(None)] * dims
            sl_hi = [slice(None)] * dims
            sl_lo[axis] = slice(0, -1)
            sl_hi[axis] = slice(1, None)
            mins = np.minimum(mins[tuple(sl_lo)], mins[tuple(sl_hi)])
            maxs = np.maximum(maxs[tuple(sl_lo)], maxs[tuple(sl_hi)])
        ok = (mins <= 0.0) & (maxs >= 0.0)
        flag = ok if flag is None else (flag & ok)
    return np.argwhere(flag)


def _gradient_scales(params, order, a, b, t, H):
    """Magnitude of the additive terms in each gradient component.

    On wide orbits the gradient components are tiny differences of tiny
    terms; residual tolerances must be read against these scales, not
    absolutely, or every far-field cell looks converged.
    """
    mi, mj, mk = model.chart_masses(params, order)
    cos_t, sin_t = math.cos(t), math.sin(t)
    c = math.sqrt(max(a * a + b * b - 2.0 * a * b * cos_t, 1e-300))
    i_h = mi * mj * a * a + mj * mk * b * b + mk * mi * c * c + params.I_S
    sig = H * H / (i_h * i_h)
    cross = abs(a - b * cos_t)
    s_a = mi * (mj * (sig * a + 1.0 / (a * a))
                + mk * (sig + 1.0 / c**3) * max(cross, 0.1 * c))
    cross_b = abs(b - a * cos_t)
    s_b = mk * (mj * (sig * b + 1.0 / (b * b))
                + mi * (sig + 1.0 / c**3) * max(cross_b, 0.1 * c))
    s_t = mk * mi * (sig + 1.0 / c**3) * a * b * max(abs(sin_t), 0.1)
    return np.array([s_a, s_b, s_t])


def _newton_in_stratum(params, stratum, x0, H, max_iter=80):
    """Newton on the free-axis gradient components, fixed axes pinned.

    Convergence is judged per component against the local term scale, so
    nearly flat far-field regions are resolved to relative precision.
    """
    axis_index = {"a": 0, "b": 1, "t": 2}
    free = [axis for axis, _ in stratum.axes]
    idx = [axis_index[ax] for ax in free]
    coords = dict(stratum.fixed)
    for (axis, _), v in zip(stratum.axes, x0):
        coords[axis] = float(v)
    if not free:
        return coords

    def residual(cs):
        g = model.first_variations_angle_form(
            params, cs["a"], cs["b"], cs["t"], H, order=stratum.order)
        return np.array([g[n] for n in idx])

    def scales(cs):
        s = _gradient_scales(params, stratum.order, cs["a"], cs["b"],
                             cs["t"], H)
        return s[idx]

    for _ in range(max_iter):
        try:
            r = residual(coords)
        except model.InvalidConfigurationError:
            return None
        sc = scales(coords)
        if np.all(np.abs(r) <= 1e-13 * sc):
            break
        hess = model.second_variation_matrix(
            params, coords["a"], coords["b"], coords["t"], H,
            order=stratum.order)
        jac = hess[np.ix_(idx, idx)]
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            return None
        rn = float(np.linalg.norm(r / sc))
        scale = 1.0
        improved = False
        for _ in range(30):
            trial = dict(coords)
            for ax, s in zip(free, step):
                trial[ax] = coords[ax] + scale * s
            if trial["t"] > math.pi:
                trial["t"] = 2.0 * math.pi - trial["t"]
            if trial["a"] > 0 and trial["b"] > 0 and 0 < trial["t"] <= math.pi:
                try:
                    rt = residual(trial)
                except model.InvalidConfigurationError:
                    scale *= 0.5
                    continue
                if float(np.linalg.norm(rt / scales(trial))) < rn:
                    coords = trial
                    improved = True
                    break
            scale *= 0.5
        if not improved:
            break
    try:
        r = residual(coords)
    except model.InvalidConfigurationError:
        return None
    if np.any(np.abs(r) > 1e-9 * scales(coords)):
        return None
    return coords


def _release_values(params, stratum, coords, H):
    """First variations along the release directions of pinned contacts."""
    if len(stratum.contact_axes) == 3:
        cfg = model.configuration_from_angle(
            stratum.order, coords["a"], coords["b"], coords["t"])
        return model.first_variations_distance_form(params, cfg, H)
    g = model.first_variations_angle_form(
        params, coords["a"], coords["b"], coords["t"], H, order=stratum.order)
    axis_index = {"a": 0, "b": 1, "t": 2}
    return tuple(g[axis_index[ax]] for ax in stratum.contact_axes)


def _fd_classify(params, stratum, coords, H, releases):
    """Minimum/saddle verdict from differenced first variations.

    The curvature matrix over the free directions is built by central
    differences of the gradient components.  (Raw energy differences lose
    the wide-orbit curvatures, which sit many orders below the constant
    contact-pair terms of E, under double-precision rounding.)  This path
    shares nothing with the closed-form solvers or with the assembled
    analytic second-variation matrix used by the certificates.
    """
    axis_index = {"a": 0, "b": 1, "t": 2}
    free = [ax for ax in ("a", "b", "t") if ax not in stratum.contact_axes]
    if stratum.name == "vertex-LR":
        free = []
    x0 = np.array([coords["a"], coords["b"], coords["t"]])

    def gradient(x):
        a, b, t = x
        flip = 1.0
        if t > math.pi:
            # Mirror symmetry through collinear: distance components are
            # even in (t - pi), the angle component is odd.
            t = 2.0 * math.pi - t
            flip = -1.0
        g = np.array(model.first_variations_angle_form(
            params, a, b, t, H, order=stratum.order))
        g[2] *= flip
        return g

    verdict = None
    if free:
        n = len(free)
        idx = [axis_index[ax] for ax in free]
        geom = max(1.0, abs(coords["a"]), abs(coords["b"]))
        steps = [1e-6 * geom if ax in ("a", "b") else 1e-6 for ax in free]
        hess = np.empty((n, n))
        for p in range(n):
            ep = np.zeros(3)
            ep[idx[p]] = steps[p]
            try:
                row = (gradient(x0 + ep) - gradient(x0 - ep)) / (2.0 * steps[p])
            except model.InvalidConfigurationError:
                row = (gradient(x0 + ep) - gradient(x0)) / steps[p]
            hess[p, :] = row[idx]
        hess = 0.5 * (hess + hess.T)
        if np.abs(hess).max() <= 0.0:
            return "marginal"
        from .stability import jacobi_scaled
        eigs = np.linalg.eigvalsh(jacobi_scaled(hess))
        if eigs[0] < -_CLASS_TOL:
            verdict = "saddle"
        elif eigs[0] > _CLASS_TOL:
            verdict = "minimum"
        else:
            return "marginal"
    else:
        verdict = "minimum"
    if releases:
        r_scale = max(1.0, max(abs(r) for r in releases))
        worst = min(releases)
        if worst < -_RELEASE_TOL * r_scale:
            return "saddle"
        if worst <= _RELEASE_TOL * r_scale and verdict == "minimum":
            return "marginal"
    return verdict


def _make_point(params, stratum, coords, H, grad_norm=0.0):
    """Candidate critical point from chart coordinates, or None if rejected."""
    releases = _release_values(params, stratum, coords, H)
    if releases and min(releases) < -_RELEASE_TOL * max(
            1.0, max(abs(r) for r in releases)):
        return None
    cfg = model.configuration_from_angle(
        stratum.order, coords["a"], coords["b"], coords["t"])
    try:
        model.validate_configuration(params, cfg, contact_tol=1e-6)
    except model.InvalidConfigurationError:
        return None
    cls = _fd_classify(params, stratum, coords, H, releases)
    return CriticalPoint(
        cfg=cfg, contacts=model.contact_set(params, cfg, tol=1e-6),
        stratum=stratum.name, classification=cls,
        energy=model.amended_potential(params, cfg, H),
        grad_norm=grad_norm, releases=tuple(float(r) for r in releases))


def scan(params: SystemParams, H: float, resolution: int = 64) -> ScanReport:
    """Dense scan of the amended potential over all contact strata.

    Returns the refined critical points with their independent
    minimum/saddle classifications and the global minimum over the grid.
    """
    if resolution < 16:
        raise ValueError("resolution too small to bracket critical cells")
    strata, d_max = _build_strata(params, H, resolution)
    points: list[CriticalPoint] = []
    strata_nodes = {}
    best_e = math.inf
    best_cfg = None

    for stratum in strata:
        coords = stratum.coordinate_arrays()
        feas = _feasible_mask(params, stratum, coords)
        energies = model.amended_potential_chart(
            params, stratum.order, coords["a"], coords["b"], coords["t"], H)
        energies = np.where(feas, energies, np.nan)
        strata_nodes[stratum.name] = int(np.isfinite(energies).sum())
        if np.isfinite(energies).any():
            arg = np.nanargmin(energies)
            if energies.flat[arg] < best_e:
                best_e = float(energies.flat[arg])
                multi = np.unravel_index(arg, energies.shape) if energies.ndim else ()
                best_cfg = model.configuration_from_angle(
                    stratum.order,
                    float(coords["a"][multi]) if energies.ndim else float(coords["a"]),
                    float(coords["b"][multi]) if energies.ndim else float(coords["b"]),
                    float(coords["t"][multi]) if energies.ndim else float(coords["t"]))
        grids = [g for _, g in stratum.axes]
        axis_index = {"a": 0, "b": 1, "t": 2}
        grad = model.first_variations_chart(
            params, stratum.order, coords["a"], coords["b"], coords["t"], H)
        free_idx = [axis_index[ax] for ax, _ in stratum.axes]
        components = [np.where(feas, grad[n], np.nan) for n in free_idx]
        cells = _critical_cells(components, energies.ndim)
        seeds = []
        for cell in cells:
            seed = [0.5 * (g[c] + g[c + 1]) for g, c in zip(grids, cell)]
            seeds.append(seed)
        for seed in seeds:
            sol = _newton_in_stratum(params, stratum, seed, H)
            if sol is None:
                continue
            # Stay inside the stratum: free distances above their contact
            # floor and below the scan extent (beyond it the potential is
            # flat and absolute residuals stop being meaningful), free
            # angle interior unless the stratum pins it.
            ok = True
            for (axis, g) in stratum.axes:
                lo = g[0]
                if axis in ("a", "b") and not (
                        lo * (1.0 - 1e-7) <= sol[axis] <= d_max * (1.0 + 1e-7)):
                    ok = False
                if axis == "t" and not (0.0 < sol[axis] <= math.pi + 1e-12):
                    ok = False
            if not ok:
                continue
            g = model.first_variations_angle_form(
                params, sol["a"], sol["b"], sol["t"], H, order=stratum.order)
            pt = _make_point(params, stratum, sol, H,
                             grad_norm=float(np.linalg.norm([g[n] for n in free_idx])))
            if pt is not None:
                points.append(pt)

    # Corner strata carry no interior sign change and are probed directly:
    # the fully resting vertex and the three resting-line points, where the
    # pivot angle sits on the mirror plane and its gradient vanishes by
    # symmetry.
    lr_cfg = Configuration(params.contact_distance(1, 2),
                           params.contact_distance(2, 3),
                           params.contact_distance(3, 1))
    lr_stratum = _Stratum("vertex-LR", (1, 2, 3), {}, [], ["a", "b", "t"])
    a, b, t = model.chart_coordinates(lr_cfg, (1, 2, 3))
    pt = _make_point(params, lr_stratum, {"a": a, "b": b, "t": t}, H)
    if pt is not None:
        points.append(pt)
    lr_e = model.amended_potential(params, lr_cfg, H)
    if lr_e < best_e:
        best_e, best_cfg = lr_e, lr_cfg

    for name, order in (("vertex-ER123", (1, 2, 3)),
                        ("vertex-ER132", (2, 3, 1)),
                        ("vertex-ER213", (3, 1, 2))):
        i, j, k = order
        a0 = params.contact_distance(i, j)
        b0 = params.contact_distance(j, k)
        er_stratum = _Stratum(name, order, {"a": a0, "b": b0},
                              [("t", None)], ["a", "b"])
        pt = _make_point(params, er_stratum,
                         {"a": a0, "b": b0, "t": math.pi}, H)
        if pt is not None:
            points.append(pt)

    points = _dedupe_points(points)
    return ScanReport(H=H, resolution=resolution, d_max=d_max, points=points,
                      global_min_cfg=best_cfg, global_min_energy=best_e,
                      strata_nodes=strata_nodes)


def _dedupe_points(points, tol: float = 1e-5):
    out: list[CriticalPoint] = []
    for pt in sorted(points,
                     key=lambda p: (-len(p.contacts), p.grad_norm, p.energy)):
        dup = None
        for other in out:
            if _cfg_close(pt.cfg, other.cfg, tol):
                dup = other
                break
        if dup is None:
            out.append(pt)
    return sorted(out, key=lambda p: (p.energy, p.cfg.d12, p.cfg.d23))


def refine(params: SystemParams, H: float, seed: Configuration,
           max_iter: int = 200):
    """Polish a seed configuration to a nearby critical point.

    Contacts within a activation band of the seed are pinned and a Newton
    iteration runs on the remaining directions; if no stationary point is
    reachable that way, a projected descent walks downhill activating
    contacts as it hits them.  Either way the result satisfies the
    stationarity conditions: free gradient below 1e-10 and nonnegative
    release variations.
    """
    band = 5e-3
    active = []
    for (i, j) in ((1, 2), (2, 3), (3, 1)):
        lim = params.contact_distance(i, j)
        if seed.distance(i, j) < lim * (1.0 + band):
            active.append((i, j))
    result = _refine_with_active(params, H, seed, active)
    if result is not None:
        return result
    return _projected_descent(params, H, seed, max_iter)


def _stratum_for_active(params, seed, active):
    cs = {frozenset(p) for p in active}
    collinear = model.collinearity_margin(seed) < 1e-3
    orders_by_pivot = {2: (1, 2, 3), 1: (3, 1, 2), 3: (2, 3, 1)}
    if len(cs) == 3:
        lr_cfg = Configuration(params.contact_distance(1, 2),
                               params.contact_distance(2, 3),
                               params.contact_distance(3, 1))
        a, b, t = model.chart_coordinates(lr_cfg, (1, 2, 3))
        return _Stratum("vertex-LR", (1, 2, 3), {"a": a, "b": b, "t": t},
                        [], ["a", "b", "t"])
    if len(cs) == 2:
        pivot = next(n for n in (1, 2, 3)
                     if sum(n in p for p in cs) == 2)
        order = orders_by_pivot[pivot]
        a0 = params.contact_distance(order[0], order[1])
        b0 = params.contact_distance(order[1], order[2])
        return _Stratum(f"edge-pivot{pivot}", order, {"a": a0, "b": b0},
                        [("t", None)], ["a", "b"])
    if len(cs) == 1:
        (pair,) = cs
        if collinear:
            order = _line_chart(seed, pair)
            a0 = params.contact_distance(order[0], order[1])
            return _Stratum("refine-1c-line", order,
                            {"a": a0, "t": math.pi}, [("b", None)], ["a"])
        i, j = sorted(pair)
        k = 6 - i - j
        a0 = params.contact_distance(i, j)
        return _Stratum("refine-1c", (i, j, k), {"a": a0},
                        [("b", None), ("t", None)], ["a"])
    if collinear:
        return _Stratum("refine-line", _line_chart(seed, None),
                        {"t": math.pi}, [("a", None), ("b", None)], [])
    return _Stratum("refine-interior", (1, 2, 3), {},
                    [("a", None), ("b", None), ("t", None)], [])


def _line_chart(cfg: Configuration, contact_pair):
    """Chart order whose pivot is the middle sphere of a near-line cfg."""
    best = None
    for pivot, order in ((2, (1, 2, 3)), (1, (3, 1, 2)), (3, (2, 3, 1))):
        i, j, k = order
        gap = cfg.distance(i, j) + cfg.distance(j, k) - cfg.distance(k, i)
        if best is None or gap < best[0]:
            best = (gap, order)
    order = best[1]
    if contact_pair is not None and frozenset(order[:2]) != frozenset(contact_pair):
        i, j, k = order
        if frozenset((j, k)) == frozenset(contact_pair):
            order = (k, j, i)
    return order


def _refine_with_active(params, H, seed, active):
    stratum = _stratum_for_active(params, seed, active)
    a, b, t = model.chart_coordinates(seed, stratum.order)
    x0 = []
    for axis, _ in stratum.axes:
        x0.append({"a": a, "b": b, "t": t}[axis])
    sol = _newton_in_stratum(params, stratum, x0, H)
    if sol is None:
        return None
    releases = _release_values(params, stratum, sol, H)
    if releases and min(releases) < -_RELEASE_TOL * max(
            1.0, max(abs(r) for r in releases)):
        return None
    cfg = model.configuration_from_angle(stratum.order, sol["a"], sol["b"],
                                         sol["t"])
    try:
        model.validate_configuration(params, cfg, contact_tol=1e-6)
    except model.InvalidConfigurationError:
        return None
    cls = _fd_classify(params, stratum, sol, H, releases)
    return CriticalPoint(
        cfg=cfg, contacts=model.contact_set(params, cfg, tol=1e-6),
        stratum=stratum.name, classification=cls,
        energy=model.amended_potential(params, cfg, H),
        grad_norm=0.0, releases=tuple(float(r) for r in releases))


def _projected_descent(params, H, seed, max_iter):
    """Gradient descent with contact clamping; converges to local minima."""
    c_lo = {"a": params.contact_distance(1, 2),
            "b": params.contact_distance(2, 3)}
    c31 = params.contact_distance(3, 1)
    a, b, t = model.chart_coordinates(seed, (1, 2, 3))

    def clamp(x):
        aa = max(x[0], c_lo["a"])
        bb = max(x[1], c_lo["b"])
        tt = min(max(x[2], 1e-9), math.pi)
        c = math.sqrt(max(aa * aa + bb * bb - 2 * aa * bb * math.cos(tt), 0.0))
        if c < c31:
            # push the angle open until the third gap closes exactly
            cos_t = (aa * aa + bb * bb - c31 * c31) / (2 * aa * bb)
            tt = math.acos(min(1.0, max(-1.0, cos_t)))
        return aa, bb, tt

    x = clamp((a, b, t))
    step = 0.1
    e = float(model.amended_potential_chart(params, (1, 2, 3), *x, H))
    for _ in range(max_iter):
        g = np.array(model.first_variations_angle_form(params, *x, H))
        # zero the gradient into active bounds
        if x[0] <= c_lo["a"] * (1 + 1e-12) and g[0] > 0:
            g[0] = 0.0
        if x[1] <= c_lo["b"] * (1 + 1e-12) and g[1] > 0:
            g[1] = 0.0
        gn = np.linalg.norm(g)
        cfg = model.configuration_from_angle((1, 2, 3), *x)
        on31 = cfg.d31 <= c31 * (1 + 1e-9)
        if gn < 1e-10 or (on31 and gn < 1e-6):
            break
        improved = False
        s = step
        for _ in range(40):
            trial = clamp((x[0] - s * g[0], x[1] - s * g[1], x[2] - s * g[2]))
            et = float(model.amended_potential_chart(params, (1, 2, 3), *trial, H))
            if et < e - 1e-15:
                x, e = trial, et
                step = min(s * 2.0, 0.5)
                improved = True
                break
            s *= 0.5
        if not improved:
            break
    cfg = model.configuration_from_angle((1, 2, 3), *x)
    contacts = model.contact_set(params, cfg, tol=1e-6)
    active = sorted(tuple(sorted(p)) for p in contacts)
    polished = _refine_with_active(params, H, cfg, active)
    if polished is not None:
        return polished
    return CriticalPoint(
        cfg=cfg, contacts=contacts, stratum="descent",
        classification="minimum",
        energy=model.amended_potential(params, cfg, H),
        grad_norm=float(np.linalg.norm(
            model.first_variations_angle_form(params, *x, H))),
        releases=())


def compare_with_records(points, records, tol: float = _MATCH_TOL) -> MatchResult:
    """Bijectively match scan points against solver records by geometry.

    Mirror-paired records share their distance triple, so records are
    grouped by configuration first; a scan finds each geometry once.
    Marginal entries on either side are excluded from the strict match.
    """
    groups: list[tuple[Configuration, list]] = []
    for rec in records:
        placed = False
        for cfg, members in groups:
            if _cfg_close(cfg, rec.cfg, tol):
                members.append(rec)
                placed = True
                break
        if not placed:
            groups.append((rec.cfg, [rec]))

    strict_groups = [(cfg, members) for cfg, members in groups
                     if all(m.stability != "marginal" for m in members)]
    strict_points = [p for p in points if p.classification != "marginal"]

    matched = []
    unmatched_points = []
    used = [False] * len(strict_groups)
    for pt in strict_points:
        found = None
        for n, (cfg, members) in enumerate(strict_groups):
            if not used[n] and _cfg_close(cfg, pt.cfg, tol):
                found = n
                break
        if found is None:
            unmatched_points.append(pt)
        else:
            used[found] = True
            matched.append((pt, strict_groups[found][1]))
    unmatched_records = [members for n, (_, members) in enumerate(strict_groups)
                         if not used[n]]
    # Knife-edge leniency: directly at a bifurcation one side may flag a
    # point marginal while the other still resolves a verdict.  Such
    # entries are absorbed rather than reported as disagreements.
    marginal_groups = [cfg for cfg, members in groups
                       if any(m.stability == "marginal" for m in members)]
    marginal_points = [p.cfg for p in points if p.classification == "marginal"]
    unmatched_points = [
        pt for pt in unmatched_points
        if not any(_cfg_close(cfg, pt.cfg, tol) for cfg in marginal_groups)]
    unmatched_records = [
        members for members in unmatched_records
        if not any(_cfg_close(members[0].cfg, cfg, tol)
                   for cfg in marginal_points)]
    mism = []
    for pt, members in matched:
        want = "minimum" if members[0].stability == "stable" else "saddle"
        if pt.classification != want:
            mism.append((pt, members))
    return MatchResult(matched=matched, unmatched_points=unmatched_points,
                       unmatched_records=unmatched_records,
                       verdict_mismatches=mism)


def _cfg_close(c1: Configuration, c2: Configuration, tol: float) -> bool:
    # Normalize by the smallest distance: families sharing a contact pair
    # differ by O(contact gap) absolutely even when all far distances
    # agree to many relative digits, so the largest scale cannot be the
    # yardstick.
    den = max(1.0, min(c1.d12, c1.d23, c1.d31, c2.d12, c2.d23, c2.d31))
    return (max(abs(c1.d12 - c2.d12), abs(c1.d23 - c2.d23),
                abs(c1.d31 - c2.d31)) / den) < tol


def verify_equilibria(params: SystemParams, H: float, resolution: int = 64,
                      tol: float = _MATCH_TOL):
    """Scan at one H and match against the closed-form catalog."""
    from . import equilibria as eqs

    report = scan(params, H, resolution)
    records = eqs.enumerate_all(params, H)
    match = compare_with_records(report.points, records, tol)
    return report, match
