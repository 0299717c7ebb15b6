"""Angular-momentum sweeps, bifurcation events, and parameter charts.

A sweep traces every equilibrium family over a range of total angular
momentum.  Each family is born and dies at computable thresholds: contact
releases (fissions), pair creations at the minimum of a family's H(d)
curve (H-bifurcations), and the symmetric stabilization of the resting
lines.  Events shared between families are merged into single nodes so
the branches assemble into the connectivity diagram.

Region charts evaluate, over the canonical mass triangle, the scalar
conditions that decide between qualitative regimes: which sphere a
resting line sheds, whether the bent two-contact family has a stable
window, and whether the orbital families appear as two-branch pairs or
as direct continuations of a resting family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import equilibria as eqs
from . import model
from .model import SystemParams

__all__ = [
    "BranchSample",
    "FamilyBranch",
    "BifurcationEvent",
    "SweepResult",
    "RegionChart",
    "DiagramGraph",
    "sweep",
    "region_chart",
    "diagram_assembly",
    "CHART_IDS",
    "chart_field",
    "canonical_triangle_grid",
]

_EVENT_MERGE_TOL = 1e-8


@dataclass(frozen=True)
class BranchSample:
    H: float
    q: float
    cfg: model.Configuration
    verdict: str
    energy: float


@dataclass
class FamilyBranch:
    """One monotone piece of a family, traced over its H window."""

    clazz: eqs.EquilibriumClass
    branch: str
    H_birth: float | None
    H_death: float | None
    start_event: str | None
    end_event: str | None
    samples: list[BranchSample] = field(default_factory=list)
    tail: bool = False

    @property
    def family_id(self) -> str:
        suffix = ""
        if self.clazz.tag in ("LR", "TR", "IS", "LO"):
            suffix = "-" if self.clazz.mirror else "+"
        return self.clazz.label + suffix

    @property
    def branch_id(self) -> str:
        return f"{self.family_id}:{self.branch}"


@dataclass(frozen=True)
class BifurcationEvent:
    key: str
    kind: str
    H: float
    families: tuple[str, ...]
    contact: str | None = None
    note: str = ""


@dataclass
class SweepResult:
    params: SystemParams
    H_range: tuple[float, float]
    H_grid: np.ndarray
    branches: list[FamilyBranch]
    events: dict[str, BifurcationEvent]
    stable_counts: np.ndarray

    def labels_seen(self) -> set[tuple[str, str, bool]]:
        return {br.clazz.key() for br in self.branches if br.samples}

    def event_list(self) -> list[BifurcationEvent]:
        return sorted(self.events.values(), key=lambda e: (e.H, e.key))


def _family_id(tag, ordering, mirror) -> str:
    suffix = ""
    if tag in ("LR", "TR", "IS", "LO"):
        suffix = "-" if mirror else "+"
    return tag + ordering + suffix


def _mirror_ids(tag, ordering) -> list[str]:
    if tag in ("LR", "TR", "IS", "LO"):
        return [_family_id(tag, ordering, False), _family_id(tag, ordering, True)]
    return [tag + ordering]


def _tr_is_partner(ordering: str) -> tuple[str, tuple[int, int]]:
    """Isosceles label met by a bent family that ends by shedding a contact.

    Returns (pair label, released contact).  The released contact is the
    wider of the two (it involves the smallest sphere); the surviving
    contact pair plus the freed sphere names the isosceles family.
    """
    i, j, k = (int(c) for c in ordering)
    # contacts (i, j) with gap 1-r_k and (j, k) with gap 1-r_i
    if k < i:
        i, k = k, i  # orient so (i, j) is the wider contact, r_k smaller
    released = (i, j)
    surviving = tuple(sorted((j, k)))
    sep = 6 - surviving[0] - surviving[1]
    return f"{surviving[0]}{surviving[1]}-{sep}", released


def _ea_line_ordering(label: str) -> str:
    i, j, k = label[0], label[1], label[3]
    s = i + j + k
    return min(s, s[::-1])


class _Catalog:
    """All family curves, events, and branch windows for one parameter set."""

    def __init__(self, params: SystemParams):
        self.params = params
        self.events: dict[str, BifurcationEvent] = {}
        self.branch_specs: list[dict] = []
        self._build()

    def _add_event(self, key, kind, H, families, contact=None, note=""):
        if key in self.events:
            old = self.events[key]
            fams = tuple(sorted(set(old.families) | set(families)))
            if abs(old.H - H) > _EVENT_MERGE_TOL * max(1.0, abs(H)):
                note = (note + " " if note else "") + "H mismatch on merge"
            self.events[key] = BifurcationEvent(key, old.kind, old.H, fams,
                                                old.contact, old.note or note)
        else:
            self.events[key] = BifurcationEvent(key, kind, H,
                                                tuple(sorted(families)),
                                                contact, note)
        return key

    def _build(self):
        p = self.params
        # Fully resting state and its termination against the bent family.
        h_lr = eqs.lr_termination_H(p)
        ev_lr = self._add_event(
            "LR-end", "termination-fission", h_lr,
            _mirror_ids("LR", "") + _mirror_ids("TR", "132"),
            contact="d12", note="largest pair separates, pivot on smallest")
        for mirror in (False, True):
            self.branch_specs.append(dict(
                clazz=eqs.EquilibriumClass("LR", "", mirror), branch="resting",
                window=(0.0, h_lr), start=None, end=ev_lr,
                sampler=lambda H, m=mirror: [r for r in eqs.solve_LR(p, H)
                                             if r.clazz.mirror == m]))

        er_end_events = {}
        for o in eqs.ER_ORDERINGS:
            h_stab = eqs.er_stabilization_H(p, o)
            h_end, released, partner, tie = eqs.er_termination(p, o)
            ev_stab = self._add_event(
                f"ER{o}-stab", "symmetric-bifurcation", h_stab,
                [f"ER{o}"] + _mirror_ids("TR", o))
            ea = eqs.ea_curve(p, partner)
            kind = ("termination-fission" if ea.q_split is not None
                    else "transition-fission")
            note = "tie: central configuration; both aligned continuations" if tie else ""
            ev_end = self._add_event(
                f"ER{o}-end", kind, h_end, [f"ER{o}", f"EA{partner}"],
                contact=model.pair_key(*released), note=note)
            er_end_events[partner] = ev_end
            self.branch_specs.append(dict(
                clazz=eqs.EquilibriumClass("ER", o), branch="resting",
                window=(0.0, h_end), start=None, end=ev_end,
                interior_events=[ev_stab],
                sampler=lambda H, o=o: eqs.solve_ER(p, o, H)))

        for o in eqs.TR_ORDERINGS:
            curve = eqs.tr_curve(p, o)
            h_stab = eqs.er_stabilization_H(p, o)
            h_term = curve.H_of_q(curve.q_lo)
            if curve.meta["lr_meet"]:
                ev_lo_end = ev_lr
            else:
                pair, released = _tr_is_partner(o)
                ev_lo_end = self._add_event(
                    f"TR{o}-end", "termination-fission", h_term,
                    _mirror_ids("TR", o) + _mirror_ids("IS", pair),
                    contact=model.pair_key(*released))
            ev_stab = f"ER{o}-stab"
            if curve.q_split is not None:
                ev_bif = self._add_event(
                    f"TR{o}-bif", "H-bifurcation", curve.H_min(),
                    _mirror_ids("TR", o))
                windows = {"toward-ER": (curve.H_min(), h_stab, ev_bif, ev_stab),
                           "toward-LR": (curve.H_min(), h_term, ev_bif, ev_lo_end)}
            else:
                windows = {"toward-LR": (h_stab, h_term, ev_stab, ev_lo_end)}
            for br, (h0, h1, e0, e1) in windows.items():
                for mirror in (False, True):
                    self.branch_specs.append(dict(
                        clazz=eqs.EquilibriumClass("TR", o, mirror), branch=br,
                        window=(h0, h1), start=e0, end=e1,
                        sampler=lambda H, o=o, br=br, m=mirror: [
                            r for r in eqs.solve_TR(p, o, br, H)
                            if r.clazz.mirror == m]))

        lo = eqs.lo_curve(p)
        is_lo_key = "IS12-3-LO"
        for pair in eqs.IS_PAIRS:
            curve = eqs.is_curve(p, pair)
            h_bif = curve.H_min()
            h_term = curve.H_of_q(curve.q_lo)
            ev_bif = self._add_event(f"IS{pair}-bif", "H-bifurcation", h_bif,
                                     _mirror_ids("IS", pair))
            if pair == "12-3":
                kind = ("termination-fission" if lo.q_split is not None
                        else "transition-fission")
                ev_end = self._add_event(
                    is_lo_key, kind, h_term,
                    _mirror_ids("IS", pair) + _mirror_ids("LO", ""),
                    contact="d12", note="equilateral handover")
            else:
                partner_tr = {"23-1": "123", "13-2": "213"}[pair]
                ev_end = f"TR{partner_tr}-end"
            for br, (h0, h1, e0, e1) in {
                    "inner": (h_bif, h_term, ev_bif, ev_end),
                    "outer": (h_bif, None, ev_bif, None)}.items():
                for mirror in (False, True):
                    self.branch_specs.append(dict(
                        clazz=eqs.EquilibriumClass("IS", pair, mirror), branch=br,
                        window=(h0, h1), start=e0, end=e1,
                        sampler=lambda H, pr=pair, br=br, m=mirror: [
                            r for r in eqs.solve_IS(p, pr, H)
                            if r.clazz.mirror == m and r.branch == br]))

        eo_curves = {o: eqs.eo_curve(p, o) for o in eqs.EO_ORDERINGS}
        for label in eqs.EA_LABELS:
            curve = eqs.ea_curve(p, label)
            h_low = curve.H_of_q(curve.q_lo)
            if curve.meta["reaches_contact"]:
                ev_low = er_end_events.get(label)
                if ev_low is None:
                    # Conjugate side of a fission tie; attach to the same node.
                    o = _ea_line_ordering(label)
                    ev_low = f"ER{o}-end"
            else:
                o = _ea_line_ordering(label)
                eo = eo_curves[o]
                ea_falls = curve.q_split is not None
                eo_falls = eo.q_split is not None
                if ea_falls and eo_falls:
                    kind = "termination-fission"
                elif ea_falls or eo_falls:
                    kind = "transition-fission"
                else:
                    kind = "H-bifurcation"
                i, j = label[0], label[1]
                ev_low = self._add_event(
                    f"EA{label}-EO", kind, h_low, [f"EA{label}", f"EO{o}"],
                    contact=model.pair_key(int(i), int(j)),
                    note="central configuration at contact")
            if curve.q_split is not None:
                ev_bif = self._add_event(f"EA{label}-bif", "H-bifurcation",
                                         curve.H_min(), [f"EA{label}"])
                windows = {"inner": (curve.H_min(), h_low, ev_bif, ev_low),
                           "outer": (curve.H_min(), None, ev_bif, None)}
            else:
                windows = {"outer": (h_low, None, ev_low, None)}
            for br, (h0, h1, e0, e1) in windows.items():
                self.branch_specs.append(dict(
                    clazz=eqs.EquilibriumClass("EA", label), branch=br,
                    window=(h0, h1), start=e0, end=e1,
                    sampler=lambda H, lb=label, br=br: eqs.solve_EA(p, lb, br, H)))

        h_low = lo.H_of_q(lo.q_lo)
        if lo.q_split is not None:
            ev_bif = self._add_event("LO-bif", "H-bifurcation", lo.H_min(),
                                     _mirror_ids("LO", ""))
            windows = {"inner": (lo.H_min(), h_low, ev_bif, is_lo_key),
                       "outer": (lo.H_min(), None, ev_bif, None)}
        else:
            windows = {"outer": (h_low, None, is_lo_key, None)}
        for br, (h0, h1, e0, e1) in windows.items():
            for mirror in (False, True):
                self.branch_specs.append(dict(
                    clazz=eqs.EquilibriumClass("LO", "", mirror), branch=br,
                    window=(h0, h1), start=e0, end=e1,
                    sampler=lambda H, br=br, m=mirror: [
                        r for r in eqs.solve_LO(p, H)
                        if r.clazz.mirror == m and r.branch == br]))

        for o in eqs.EO_ORDERINGS:
            curve = eo_curves[o]
            h_low = curve.H_of_q(curve.q_lo)
            i, j, k = curve.order
            # Whichever contact activates first keeps the line orientation:
            # the aligned label reads from the surviving far sphere inward.
            if curve.meta["contact_pair"] == (i, j):
                meet_label = f"{i}{j}-{k}"
            else:
                meet_label = f"{k}{j}-{i}"
            ci, cj = curve.meta["contact_pair"]
            ev_low = f"EA{meet_label}-EO"
            if ev_low not in self.events:
                ev_low = self._add_event(
                    f"EO{o}-low", "transition-fission", h_low,
                    [f"EO{o}", f"EA{meet_label}"],
                    contact=model.pair_key(ci, cj),
                    note="central configuration at contact")
            if curve.q_split is not None:
                ev_bif = self._add_event(f"EO{o}-bif", "H-bifurcation",
                                         curve.H_min(), [f"EO{o}"])
                windows = {"inner": (curve.H_min(), h_low, ev_bif, ev_low),
                           "outer": (curve.H_min(), None, ev_bif, None)}
            else:
                windows = {"outer": (h_low, None, ev_low, None)}
            for br, (h0, h1, e0, e1) in windows.items():
                self.branch_specs.append(dict(
                    clazz=eqs.EquilibriumClass("EO", o), branch=br,
                    window=(h0, h1), start=e0, end=e1,
                    sampler=lambda H, o=o, br=br: [
                        r for r in eqs.solve_EO(p, o, H) if r.branch == br]))


def sweep(params: SystemParams, H_range=(1e-3, 10.0), steps: int = 160):
    """Trace all families over [H_lo, H_hi] and collect bifurcation events.

    Returns a SweepResult whose branches carry (H, q, cfg, verdict)
    samples on a shared log-spaced grid plus their exact window
    endpoints.  Events outside the range are still cataloged (the
    connectivity does not depend on the window) but branches are only
    sampled inside it.
    """
    h_lo, h_hi = H_range
    if not (0.0 <= h_lo < h_hi) or not math.isfinite(h_hi):
        raise ValueError("H range must be finite with 0 <= lo < hi")
    cat = _Catalog(params)
    grid = np.geomspace(max(h_lo, 1e-12), h_hi, steps) if h_lo > 0 else \
        np.linspace(h_lo, h_hi, steps)

    branches = []
    for spec in cat.branch_specs:
        h0, h1 = spec["window"]
        lo = max(h0, h_lo)
        hi = min(h1, h_hi) if h1 is not None else h_hi
        br = FamilyBranch(clazz=spec["clazz"], branch=spec["branch"],
                          H_birth=h0, H_death=h1,
                          start_event=spec["start"], end_event=spec["end"],
                          tail=(h1 is None))
        if lo <= hi:
            hs = [h for h in grid if lo < h < hi]
            eps = 1e-9
            hs = sorted({lo * (1.0 + eps) + (0.0 if lo else eps)} | set(hs)
                        | {hi * (1.0 - eps)})
            for h in hs:
                for rec in spec["sampler"](h):
                    br.samples.append(BranchSample(
                        H=h, q=rec.q, cfg=rec.cfg, verdict=rec.stability,
                        energy=rec.energy))
        branches.append(br)

    stable = np.zeros(len(grid), dtype=int)
    for n, h in enumerate(grid):
        count = 0
        for spec in cat.branch_specs:
            h0, h1 = spec["window"]
            if h0 <= h <= (h1 if h1 is not None else math.inf):
                count += sum(r.stability == "stable" for r in spec["sampler"](h))
        stable[n] = count
    return SweepResult(params=params, H_range=(h_lo, h_hi), H_grid=grid,
                       branches=branches, events=cat.events,
                       stable_counts=stable)


# --------------------------------------------------------------------------
# Diagram assembly and template classification
# --------------------------------------------------------------------------

@dataclass
class DiagramGraph:
    nodes: list[BifurcationEvent]
    edges: list[dict]
    pathways: dict[str, dict]
    warnings: list[str]


_PATHWAY_OF_TAG = {
    "LR": "bif2", "LO": "bif4",
}
_PATHWAY_OF_LABEL = {
    "ER123": "bif1", "TR123": "bif1", "IS23-1": "bif1", "EA12-3": "bif1",
    "EA32-1": "bif1", "EO123": "bif1",
    "ER132": "bif2", "TR132": "bif2", "EA13-2": "bif2", "EA23-1": "bif2",
    "EO132": "bif2",
    "ER213": "bif3", "TR213": "bif3", "IS13-2": "bif3", "EA21-3": "bif3",
    "EA31-2": "bif3", "EO213": "bif3",
    "IS12-3": "bif4", "LO": "bif4",
}


def _pathway_of(clazz: eqs.EquilibriumClass) -> str:
    return _PATHWAY_OF_LABEL.get(clazz.label) or _PATHWAY_OF_TAG[clazz.tag]


def diagram_assembly(branches, events) -> DiagramGraph:
    """Assemble branch segments and events into the connectivity graph.

    Edges carry the verdict observed on the segment; each of the four
    pathway groups is classified against its qualitative template, and a
    template id with the distinguishing variant is reported per pathway.
    """
    warnings = []
    edges = []
    for br in branches:
        segments = [(br.start_event, br.end_event)]
        interior = []
        if br.clazz.tag == "ER":
            interior = [f"ER{br.clazz.ordering}-stab"]
        if interior and interior[0] in events:
            ev = events[interior[0]]
            segments = [(br.start_event, ev.key), (ev.key, br.end_event)]
            bounds = [(br.H_birth or 0.0, ev.H),
                      (ev.H, br.H_death if br.H_death is not None else math.inf)]
        else:
            bounds = [(br.H_birth or 0.0,
                       br.H_death if br.H_death is not None else math.inf)]
        for (e0, e1), (h0, h1) in zip(segments, bounds):
            seg = [s for s in br.samples if h0 - 1e-12 <= s.H <= h1 + 1e-12]
            verdicts = {s.verdict for s in seg if s.verdict != "marginal"}
            if len(verdicts) > 1:
                warnings.append(
                    f"mixed verdicts on {br.branch_id} in [{h0:.6g}, {h1:.6g}]")
            verdict = (sorted(verdicts)[0] if verdicts else "unsampled")
            edges.append(dict(family=br.family_id, branch=br.branch,
                              branch_id=br.branch_id, start=e0, end=e1,
                              H_window=(h0, None if math.isinf(h1) else h1),
                              verdict=verdict, tail=br.tail,
                              pathway=_pathway_of(br.clazz)))
        if br.end_event is None and not br.tail:
            warnings.append(f"orphan branch end: {br.branch_id}")

    pathways: dict[str, dict] = {}
    for name in ("bif1", "bif2", "bif3", "bif4"):
        group_edges = [e for e in edges if e["pathway"] == name]
        ev_keys = {e["start"] for e in group_edges} | {e["end"] for e in group_edges}
        ev_keys.discard(None)
        kinds = sorted(
            (events[k].kind, tuple(sorted({f.rstrip("+-")[:2] for f in events[k].families})))
            for k in ev_keys if k in events)
        pathways[name] = {
            "families": sorted({e["family"] for e in group_edges}),
            "events": sorted(k for k in ev_keys if k in events),
            "signature": kinds,
            "template": _classify_pathway(name, ev_keys, events),
        }
    return DiagramGraph(nodes=sorted(events.values(), key=lambda e: (e.H, e.key)),
                        edges=edges, pathways=pathways, warnings=warnings)


def _classify_pathway(name, ev_keys, events) -> str:
    kinds = {events[k].kind for k in ev_keys if k in events}
    keyset = {k for k in ev_keys if k in events}

    def has(prefix, kind=None):
        for k in keyset:
            if k.startswith(prefix) and (kind is None or events[k].kind == kind):
                return True
        return False

    if name == "bif4":
        if has("IS12-3-LO", "transition-fission"):
            return "bif4/single-branch"
        if has("IS12-3-LO", "termination-fission"):
            return "bif4/double-branch"
        return "bif4/unrecognized"
    o = {"bif1": "123", "bif2": "132", "bif3": "213"}[name]
    if not (has(f"ER{o}-stab", "symmetric-bifurcation") and has(f"ER{o}-end")):
        return f"{name}/unrecognized"
    fission = next(k for k in keyset if k.startswith(f"ER{o}-end"))
    partner = sorted(f for f in events[fission].families if f.startswith("EA"))
    variant = events[fission].kind.split("-")[0] + "->" + ",".join(partner)
    if has(f"TR{o}-bif"):
        variant += "+stable-TR"
    return f"{name}/{variant}"


# --------------------------------------------------------------------------
# Region charts over the canonical mass triangle
# --------------------------------------------------------------------------

CHART_IDS = ("TR132-stable", "EA123-fission", "EA132-fission",
             "EA312-fission", "LO-mode", "EO-mode")

_CHART_ALIASES = {"EA123": "EA123-fission", "EA132": "EA132-fission",
                  "EA312": "EA312-fission", "TR132": "TR132-stable"}


@dataclass
class RegionChart:
    chart_id: str
    m1: np.ndarray
    m3: np.ndarray
    field: np.ndarray  # NaN outside the canonical triangle
    polylines: list[np.ndarray]
    meta: dict


def canonical_triangle_grid(resolution: int, margin: float = 1e-3):
    """Uniform (m1, m3) grid over the study triangle m3 <= m2 <= m1.

    Points within ``margin`` of any triangle edge are masked out.
    Returns (m1 axis, m3 axis, mask) with mask shaped (len(m3), len(m1)).
    """
    if resolution < 32:
        raise ValueError("resolution must be at least 32 per axis")
    m1 = np.linspace(1.0 / 3.0, 1.0, resolution)
    m3 = np.linspace(0.0, 1.0 / 3.0, resolution)
    mm1, mm3 = np.meshgrid(m1, m3)
    mm2 = 1.0 - mm1 - mm3
    mask = (mm3 > margin) & (mm2 - mm3 > margin) & (mm1 - mm2 > margin)
    return m1, m3, mask


def _radii_from_mass_grid(mm1, mm2, mm3):
    c1, c2, c3 = np.cbrt(mm1), np.cbrt(mm2), np.cbrt(mm3)
    s = c1 + c2 + c3
    return c1 / s, c2 / s, c3 / s


def _collinear_ratio_grid(mi, mj, mk, iters: int = 80):
    """Vectorized positive root of the collinear balance polynomial."""

    def balance(rho):
        w = 1.0 + rho
        lhs = (mj * w * w + mk) * (mj * rho + mi * w) * rho * rho
        rhs = (mj * w * w + mi * rho * rho) * (mj + mk * w)
        return lhs - rhs

    lo = np.full_like(mi, 1e-6)
    hi = np.full_like(mi, 1.0)
    for _ in range(60):
        need = balance(hi) <= 0.0
        if not np.any(need):
            break
        hi = np.where(need, hi * 2.0, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        neg = balance(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return 0.5 * (lo + hi)


def chart_field(chart_id: str, mm1, mm3, ordering: str = "123"):
    """Scalar chart field at mass coordinates (vectorized).

    Positive values mean: the first-listed aligned configuration survives
    to contact (EA charts); a stable bent-family window exists
    (TR132-stable); the orbital family appears as a detached two-branch
    pair (LO-mode); the scaled collinear family expands with H at its
    contact point (EO-mode).
    """
    from .ffunc import F

    chart_id = _CHART_ALIASES.get(chart_id, chart_id)
    if chart_id not in CHART_IDS:
        raise ValueError(f"unknown chart id {chart_id!r}")
    mm1 = np.asarray(mm1, dtype=float)
    mm3 = np.asarray(mm3, dtype=float)
    mm2 = 1.0 - mm1 - mm3
    r1, r2, r3 = _radii_from_mass_grid(mm1, mm2, mm3)
    i_s = 0.4 * (mm1 * r1**2 + mm2 * r2**2 + mm3 * r3**2)
    m = {1: mm1, 2: mm2, 3: mm3}
    r = {1: r1, 2: r2, 3: r3}

    if chart_id.startswith("EA"):
        i, j, k = (int(c) for c in chart_id[2:5])
        return (F(m[j] / m[k], (1.0 - r[k]) / (1.0 + r[j]))
                - F(m[j] / m[i], (1.0 - r[i]) / (1.0 + r[j])))
    if chart_id == "TR132-stable":
        a = mm1 * mm3 * (1.0 - r2) ** 2 + mm3 * mm2 * (1.0 - r1) ** 2 + i_s
        b = mm1 * mm2
        return (1.0 + r3) ** 2 - 3.0 * a / b
    if chart_id == "LO-mode":
        pair_sum = mm1 * mm2 + mm2 * mm3 + mm3 * mm1
        return 3.0 * i_s / pair_sum - (1.0 - r3) ** 2
    # EO-mode: growth rate of H along the scaled collinear family at the
    # scale where the inner pair touches.
    i, j, k = (int(c) for c in ordering)
    rho = _collinear_ratio_grid(m[i], m[j], m[k])
    w = 1.0 + rho
    c1 = m[i] * m[j] + m[j] * m[k] * rho**2 + m[k] * m[i] * w**2
    return c1 * (1.0 - r[k]) ** 2 - 3.0 * i_s


def region_chart(chart_id: str, resolution: int = 256,
                 ordering: str = "123", margin: float = 1e-3) -> RegionChart:
    """Evaluate a chart over the canonical triangle and extract its zero line."""
    chart_id = _CHART_ALIASES.get(chart_id, chart_id)
    m1, m3, mask = canonical_triangle_grid(resolution, margin)
    mm1, mm3 = np.meshgrid(m1, m3)
    field = np.full(mm1.shape, np.nan)
    if np.any(mask):
        field[mask] = chart_field(chart_id, mm1[mask], mm3[mask], ordering)
    polylines = _zero_contours(m1, m3, field)
    return RegionChart(chart_id=chart_id, m1=m1, m3=m3, field=field,
                       polylines=polylines,
                       meta={"resolution": resolution, "margin": margin,
                             "ordering": ordering if chart_id == "EO-mode" else ""})


def _zero_contours(x, y, field) -> list[np.ndarray]:
    """Marching-squares zero level set with linear edge interpolation."""
    segments = []
    ny, nx = field.shape
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            vals = (field[iy, ix], field[iy, ix + 1],
                    field[iy + 1, ix + 1], field[iy + 1, ix])
            if any(math.isnan(v) for v in vals):
                continue
            corners = ((x[ix], y[iy]), (x[ix + 1], y[iy]),
                       (x[ix + 1], y[iy + 1]), (x[ix], y[iy + 1]))
            pts = []
            for n in range(4):
                v0, v1 = vals[n], vals[(n + 1) % 4]
                if (v0 > 0.0) != (v1 > 0.0):
                    f = v0 / (v0 - v1)
                    p0, p1 = corners[n], corners[(n + 1) % 4]
                    pts.append((p0[0] + f * (p1[0] - p0[0]),
                                p0[1] + f * (p1[1] - p0[1])))
            if len(pts) == 2:
                segments.append((pts[0], pts[1]))
            elif len(pts) == 4:
                # Saddle cell: split by the sign of the center value.
                center = sum(vals) / 4.0
                if (center > 0.0) == (vals[0] > 0.0):
                    segments.append((pts[0], pts[1]))
                    segments.append((pts[2], pts[3]))
                else:
                    segments.append((pts[3], pts[0]))
                    segments.append((pts[1], pts[2]))
    return _chain_segments(segments)


def _chain_segments(segments) -> list[np.ndarray]:
    """Join segments that share endpoints into ordered polylines."""
    if not segments:
        return []

    def key(p):
        return (round(p[0], 12), round(p[1], 12))

    adjacency: dict[tuple, list[int]] = {}
    for n, (p, q) in enumerate(segments):
        adjacency.setdefault(key(p), []).append(n)
        adjacency.setdefault(key(q), []).append(n)

    used = [False] * len(segments)
    polylines = []
    # Open chains start at degree-one endpoints, walked in sorted order so
    # the output is deterministic; remaining segments form closed loops.
    starts = sorted(k for k, segs in adjacency.items() if len(segs) == 1)
    all_starts = starts + sorted(adjacency.keys())
    for start in all_starts:
        for seg_idx in adjacency[start]:
            if used[seg_idx]:
                continue
            chain = [start]
            cur = start
            idx = seg_idx
            while idx is not None and not used[idx]:
                used[idx] = True
                p, q = segments[idx]
                nxt = key(q) if key(p) == cur else key(p)
                chain.append(nxt)
                cur = nxt
                idx = next((m for m in adjacency.get(cur, ())
                            if not used[m]), None)
            if len(chain) > 1:
                polylines.append(np.array(chain, dtype=float))
    return polylines
