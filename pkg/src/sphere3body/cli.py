"""Command-line interface: equilibria, sweep, region, verify.

All numeric output is serialized with 17 significant digits through a
single formatting path, so identical invocations produce byte-identical
data files.  Structured results (record lists, sweep graphs, verification
reports) are JSON; gridded fields and branch samples are CSV.  The report
commands (sweep, region) also render a figure next to the data unless
--no-plot is given.

Exit codes: 0 success, 1 invariant failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bifurcation, equilibria, model, oracle, stability

SCHEMA_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _dump_json(obj, out, indent=0) -> None:
    """Minimal deterministic JSON writer (floats at 17 significant digits)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for n, (key, val) in enumerate(obj.items()):
            out.write(f'{pad}  "{key}": ')
            _dump_json(val, out, indent + 1)
            out.write(",\n" if n < len(obj) - 1 else "\n")
        out.write(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.write("[]")
            return
        simple = all(isinstance(v, (int, float, str, bool)) or v is None
                     for v in obj)
        if simple:
            out.write("[" + ", ".join(_json_scalar(v) for v in obj) + "]")
        else:
            out.write("[\n")
            for n, val in enumerate(obj):
                out.write(pad + "  ")
                _dump_json(val, out, indent + 1)
                out.write(",\n" if n < len(obj) - 1 else "\n")
            out.write(pad + "]")
    else:
        out.write(_json_scalar(obj))


def _json_scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _parse_number(text: str) -> float:
    """Accept plain floats and exact fractions like 1/3."""
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _parse_triple(text: str):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated values, got {text!r}")
    return [_parse_number(p) for p in parts]


class UsageError(Exception):
    pass


def _params_from_args(args) -> tuple[model.SystemParams, dict]:
    if (args.radii is None) == (args.masses is None):
        raise UsageError("provide exactly one of --radii or --masses")
    try:
        if args.radii is not None:
            values = _parse_triple(args.radii)
            params = model.SystemParams.from_radii(values)
            given = {"radii": values}
        else:
            values = _parse_triple(args.masses)
            params = model.SystemParams.from_masses(values)
            given = {"masses": values}
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    meta = {
        "input": given,
        "permutation": list(params.radii.permutation),
        "radii": list(params.radii),
        "masses": list(params.masses),
        "I_S": params.I_S,
    }
    return params, meta


def _parse_h_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (_parse_number(p) for p in text.split(":"))
    except Exception as exc:
        raise UsageError(f"invalid H range {text!r}, expected lo:hi") from exc
    if not (0.0 <= lo < hi):
        raise UsageError("H range must satisfy 0 <= lo < hi")
    return lo, hi


def _record_doc(rec: equilibria.EquilibriumRecord) -> dict:
    cert = rec.certificate
    return {
        "class": rec.clazz.tag,
        "label": rec.clazz.label,
        "mirror": rec.clazz.mirror,
        "branch": rec.branch,
        "d12": rec.cfg.d12,
        "d23": rec.cfg.d23,
        "d31": rec.cfg.d31,
        "theta": rec.theta,
        "contacts": sorted(model.pair_key(*p) for p in rec.contacts),
        "H": rec.H,
        "spin_rate": rec.spin_rate,
        "energy": rec.energy,
        "verdict": rec.stability,
        "certificate": {
            "constrained": [[name, val] for name, val in cert.constrained_signs],
            "free_axes": list(cert.free_names),
            "free_block": [list(row) for row in cert.free_block],
            "minors": list(cert.minors),
        },
    }


_RECORD_COLUMNS = ("class", "label", "mirror", "branch", "d12", "d23", "d31",
                   "theta", "contacts", "H", "spin_rate", "energy", "verdict")


def _records_csv(records, out) -> None:
    out.write(",".join(_RECORD_COLUMNS) + "\n")
    for rec in records:
        doc = _record_doc(rec)
        row = []
        for col in _RECORD_COLUMNS:
            val = doc[col]
            if col == "contacts":
                row.append("|".join(val))
            elif isinstance(val, float):
                row.append(_fmt(val))
            else:
                row.append(str(val))
        out.write(",".join(row) + "\n")


def _write_text(path, writer) -> None:
    if path is None:
        writer(sys.stdout)
    else:
        with open(path, "w") as fp:
            writer(fp)


def cmd_equilibria(args) -> int:
    params, meta = _params_from_args(args)
    if args.H is None:
        raise UsageError("equilibria requires --H")
    if args.H < 0:
        raise UsageError("H must be nonnegative")
    records = equilibria.enumerate_all(params, args.H)
    if args.format == "csv":
        _write_text(args.out, lambda fp: _records_csv(records, fp))
    else:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "equilibria",
            "params": meta,
            "H": args.H,
            "count": len(records),
            "records": [_record_doc(r) for r in records],
        }
        _write_text(args.out, lambda fp: (_dump_json(doc, fp), fp.write("\n")))
    return 0


def cmd_sweep(args) -> int:
    params, meta = _params_from_args(args)
    if args.H_range is None:
        raise UsageError("sweep requires --H-range lo:hi")
    h_lo, h_hi = _parse_h_range(args.H_range)
    result = bifurcation.sweep(params, (h_lo, h_hi), steps=args.steps)
    graph = bifurcation.diagram_assembly(result.branches, result.events)
    if args.out is None:
        raise UsageError("sweep requires --out (writes graph, samples, figure)")
    base = Path(args.out)
    base.parent.mkdir(parents=True, exist_ok=True)

    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "sweep",
        "params": meta,
        "H_range": [h_lo, h_hi],
        "steps": args.steps,
        "events": [
            {"key": ev.key, "kind": ev.kind, "H": ev.H,
             "families": list(ev.families), "contact": ev.contact,
             "note": ev.note}
            for ev in result.event_list()
        ],
        "edges": [
            {k: (list(v) if isinstance(v, tuple) else v)
             for k, v in edge.items()}
            for edge in graph.edges
        ],
        "pathways": {
            name: {"template": pw["template"], "families": pw["families"],
                   "events": pw["events"]}
            for name, pw in graph.pathways.items()
        },
        "stable_count": [[float(h), int(c)] for h, c in
                         zip(result.H_grid, result.stable_counts)],
        "warnings": graph.warnings,
    }
    with open(base.with_suffix(".json"), "w") as fp:
        _dump_json(doc, fp)
        fp.write("\n")
    with open(base.with_suffix(".csv"), "w") as fp:
        fp.write("class,label,mirror,branch,H,q,d12,d23,d31,verdict\n")
        for br in result.branches:
            for s in br.samples:
                fp.write(",".join([
                    br.clazz.tag, br.clazz.label, str(br.clazz.mirror),
                    br.branch, _fmt(s.H), _fmt(s.q), _fmt(s.cfg.d12),
                    _fmt(s.cfg.d23), _fmt(s.cfg.d31), s.verdict]) + "\n")
    with open(base.parent / (base.stem + "_stable.csv"), "w") as fp:
        fp.write("H,stable_count\n")
        for h, c in zip(result.H_grid, result.stable_counts):
            fp.write(f"{_fmt(float(h))},{int(c)}\n")
    if not args.no_plot:
        from . import plots
        plots.plot_sweep(result, base.with_suffix(".png"))
    return 0


def cmd_region(args) -> int:
    if args.chart is None:
        raise UsageError("region requires --chart")
    try:
        chart = bifurcation.region_chart(args.chart, resolution=args.res,
                                         ordering=args.ordering)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.out is None:
        raise UsageError("region requires --out (writes field, boundary, figure)")
    base = Path(args.out)
    base.parent.mkdir(parents=True, exist_ok=True)
    with open(base.with_suffix(".csv"), "w") as fp:
        fp.write("m1,m3,value\n")
        for iy, m3 in enumerate(chart.m3):
            for ix, m1 in enumerate(chart.m1):
                val = chart.field[iy, ix]
                if np.isfinite(val):
                    fp.write(f"{_fmt(float(m1))},{_fmt(float(m3))},{_fmt(float(val))}\n")
    with open(base.parent / (base.stem + "_boundary.csv"), "w") as fp:
        fp.write("polyline,m1,m3\n")
        for n, line in enumerate(chart.polylines):
            for x, y in line:
                fp.write(f"{n},{_fmt(float(x))},{_fmt(float(y))}\n")
    if not args.no_plot:
        from . import plots
        plots.plot_region(chart, base.with_suffix(".png"))
    return 0


def cmd_verify(args) -> int:
    params, meta = _params_from_args(args)
    h_lo, h_hi = _parse_h_range(args.H_range) if args.H_range else (1e-3, 10.0)
    rng = np.random.default_rng(args.seed)
    checks = []

    result = bifurcation.sweep(params, (h_lo, h_hi), steps=args.steps)

    # Count law: the full sweep must instantiate exactly the 28 labels.
    labels = result.labels_seen()
    checks.append({
        "name": "count-law",
        "pass": labels == set(lbl for lbl in equilibria.ALL_LABELS),
        "detail": f"{len(labels)} of 28 labels instantiated",
    })

    # Stable-count law: at least one stable state at every sampled H.
    min_stable = int(result.stable_counts.min())
    checks.append({
        "name": "stable-count-law",
        "pass": min_stable >= 1,
        "detail": f"minimum stable count over sweep grid: {min_stable}",
    })

    # Sign law along every traced family with enough samples.
    mismatch_total = 0
    checked_total = 0
    for br in result.branches:
        if len(br.samples) < 3 or br.clazz.mirror:
            continue
        curve = _branch_path(params, br)
        if curve is None:
            continue
        samples = [(s.H, s.q, s.verdict) for s in br.samples]
        checked, mismatches = stability.family_sign_test(params, samples, curve)
        checked_total += checked
        mismatch_total += len(mismatches)
    checks.append({
        "name": "sign-law",
        "pass": mismatch_total == 0,
        "detail": f"{checked_total} interior samples checked, "
                  f"{mismatch_total} mismatches",
    })

    # Oracle agreement at log-spaced H plus the detected event values.
    h_samples = list(oracle.default_H_samples(args.H_samples, max(h_lo, 1e-3),
                                              h_hi))
    h_samples += [ev.H for ev in result.event_list() if h_lo < ev.H < h_hi]
    failures = []
    for h in sorted(h_samples):
        records = equilibria.enumerate_all(params, h)
        if args.inject_perturbation and records:
            n = int(rng.integers(len(records)))
            rec = records[n]
            bad = model.Configuration(rec.cfg.d12 * 1.01, rec.cfg.d23 * 1.01,
                                      rec.cfg.d31 * 1.01)
            records[n] = equilibria.EquilibriumRecord(
                clazz=rec.clazz, cfg=bad, contacts=rec.contacts, H=rec.H,
                spin_rate=rec.spin_rate, energy=rec.energy,
                stability=rec.stability, certificate=rec.certificate,
                branch=rec.branch, chart_order=rec.chart_order, q=rec.q)
        report = oracle.scan(params, h, args.res)
        match = oracle.compare_with_records(report.points, records)
        if not (match.bijective and match.verdicts_agree):
            failures.append({
                "H": h,
                "unmatched_points": len(match.unmatched_points),
                "unmatched_records": len(match.unmatched_records),
                "verdict_mismatches": len(match.verdict_mismatches),
            })
    checks.append({
        "name": "oracle-agreement",
        "pass": not failures,
        "detail": (f"{len(h_samples)} H values scanned at resolution "
                   f"{args.res}; discrepancies: "
                   + (_fmt(len(failures)) if failures else "none")),
        "failures": failures,
    })

    ok = all(c["pass"] for c in checks)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "verify",
        "params": meta,
        "seed": args.seed,
        "checks": checks,
        "pass": ok,
    }
    for c in checks:
        print(("PASS" if c["pass"] else "FAIL") + f" {c['name']}: {c['detail']}")
    if args.out:
        with open(args.out, "w") as fp:
            _dump_json(doc, fp)
            fp.write("\n")
    return 0 if ok else 1


def _branch_path(params, br):
    """Configuration path q -> cfg for a traced branch, if one exists."""
    clazz = br.clazz
    try:
        if clazz.tag == "TR":
            return equilibria.tr_curve(params, clazz.ordering).cfg_of_q
        if clazz.tag == "IS":
            return equilibria.is_curve(params, clazz.ordering).cfg_of_q
        if clazz.tag == "EA":
            return equilibria.ea_curve(params, clazz.ordering).cfg_of_q
        if clazz.tag == "LO":
            return equilibria.lo_curve(params).cfg_of_q
        if clazz.tag == "EO":
            return equilibria.eo_curve(params, clazz.ordering).cfg_of_q
    except Exception:
        return None
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphere3body",
        description="Relative equilibria of three gravitating spheres: "
                    "enumeration, stability, bifurcation sweeps, region "
                    "charts, and brute-force verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--radii", help="three radii a,b,c (fractions allowed)")
        p.add_argument("--masses", help="three masses a,b,c (fractions allowed)")
        p.add_argument("--H", type=_parse_number, default=None,
                       help="total angular momentum")
        p.add_argument("--H-range", dest="H_range", default=None,
                       help="angular momentum window lo:hi")
        p.add_argument("--res", type=int, default=64,
                       help="grid resolution per axis")
        p.add_argument("--steps", type=int, default=160,
                       help="sweep steps over the H range")
        p.add_argument("--out", default=None, help="output path (or basename)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol-eq", dest="tol_eq", type=float, default=None,
                       help="equilibrium residual tolerance override")
        p.add_argument("--tol-def", dest="tol_def", type=float, default=None,
                       help="definiteness tolerance override")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized checks")
        p.add_argument("--no-plot", action="store_true",
                       help="skip figure rendering on report commands")

    p_eq = sub.add_parser("equilibria", help="enumerate all equilibria at one H")
    common(p_eq)

    p_sw = sub.add_parser("sweep", help="trace families over an H range")
    common(p_sw)

    p_rg = sub.add_parser("region", help="parameter-triangle chart")
    common(p_rg)
    p_rg.add_argument("--chart", default=None,
                      help="one of " + ", ".join(bifurcation.CHART_IDS)
                           + " (EA aliases accepted)")
    p_rg.add_argument("--ordering", default="123",
                      help="line ordering for the EO-mode chart")

    p_vf = sub.add_parser("verify", help="cross-check solvers against the scan")
    common(p_vf)
    p_vf.add_argument("--H-samples", dest="H_samples", type=int, default=24,
                      help="log-spaced H values for the oracle scan")
    p_vf.add_argument("--inject-perturbation", action="store_true",
                      help="negative control: corrupt one record per scan")
    return parser


_COMMANDS = {
    "equilibria": cmd_equilibria,
    "sweep": cmd_sweep,
    "region": cmd_region,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code or 0)
    if args.tol_eq is not None or args.tol_def is not None:
        stability.set_default_tolerances(args.tol_eq, args.tol_def)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
