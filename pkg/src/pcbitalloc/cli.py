"""Command-line front end. Thin adapters only; numeric work lives in the library.

Exit codes: 0 success, 2 validation error, 3 infeasible problem, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import allocator, cloud, evaluate, metrics, models, pipeline
from .errors import PcBitAllocError, ValidationError

_EXIT_CODES = {"validation": 2, "infeasible": 3, "io": 4}


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_metric(args) -> None:
    ref = cloud.load_ply(args.reference)
    rec = cloud.load_ply(args.reconstruction)
    pair = metrics.symmetric_distortion(ref, rec, luma_weights=args.luma_weights)
    geometry_peak = args.geometry_peak
    if geometry_peak is None:
        geometry_peak = float((1 << ref.bit_depth) - 1)
    payload = {
        "d_g": pair.d_g,
        "d_c": pair.d_c,
        "omega": args.omega,
        "combined": metrics.combined_distortion(pair, args.omega),
        "psnr_db": metrics.psnr(pair.d_g, pair.d_c, args.omega,
                                geometry_peak, args.color_peak),
        "geometry_peak": geometry_peak,
        "color_peak": args.color_peak,
        "points": {"reference": len(ref), "reconstruction": len(rec)},
    }
    _emit(payload, args.output)


def _model_payload(dm, rm) -> dict:
    return {
        "distortion": {"a": dm.a, "b": dm.b, "c": dm.c, "omega": dm.omega,
                       "sanity": list(dm.sanity)},
        "rate": {"gamma_g": rm.gamma_g, "theta_g": rm.theta_g,
                 "gamma_c": rm.gamma_c, "theta_c": rm.theta_c},
    }


def _cmd_fit(args) -> None:
    records = models.read_probe_log(args.probes)
    probes = models.probes_from_records(records, args.omega)
    if len(probes) < 3:
        raise ValidationError("probe log must contain at least three rows")
    if len(probes) == 3:
        dm = models.fit_distortion_model(probes[0], probes[1], probes[2], args.omega)
        rm = models.fit_rate_model(probes[0], probes[1])
    else:
        dm = models.fit_distortion_model_lstsq(probes, args.omega)
        rm = models.fit_rate_model_lstsq(probes)
    _emit(_model_payload(dm, rm), args.output)


def _load_models(path) -> tuple[models.DistortionModel, models.RateModel]:
    try:
        doc = json.loads(Path(path).read_text())
        d = doc["distortion"]
        r = doc["rate"]
        dm = models.DistortionModel(d["a"], d["b"], d["c"], d.get("omega", 0.5),
                                    tuple(d.get("sanity", ())))
        rm = models.RateModel(r["gamma_g"], r["theta_g"], r["gamma_c"], r["theta_c"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"bad model file {path}: {exc}") from exc
    return dm, rm


def _cmd_allocate(args) -> None:
    dm, rm = _load_models(args.model)
    problem = allocator.AllocationProblem(dm, rm, args.target)
    cfg = allocator.SolverConfig(mu0=args.mu0, eta=args.eta, eps=args.eps)
    alloc = allocator.solve_interior_point(problem, cfg)
    payload = {
        "target": args.target,
        "continuous": {"q_g": alloc.continuous.q_g, "q_c": alloc.continuous.q_c},
        "qp_g": alloc.qp.qp_g,
        "qp_c": alloc.qp.qp_c,
        "predicted_rate": alloc.predicted_rate,
        "predicted_distortion": alloc.predicted_distortion,
        "rounding_violation": alloc.rounding_violation,
    }
    _emit(payload, args.output)


def _cmd_simulate(args) -> None:
    try:
        config = json.loads(Path(args.spec).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad config file {args.spec}: {exc}") from exc
    report = pipeline.run_pipeline(config)
    if args.output:
        pipeline.write_report(report, args.output)
        if args.csv:
            pipeline.report_allocations_csv(
                report, Path(args.output).with_suffix(".allocations.csv")
            )
    else:
        _emit(report, None)


def _read_rows(path) -> list[dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad report file {path}: {exc}") from exc
    rows = doc.get("allocations") if isinstance(doc, dict) else doc
    if not isinstance(rows, list) or not rows:
        raise ValidationError(f"{path} holds no allocation rows")
    return rows


def _cmd_evaluate(args) -> None:
    pba_rows = _read_rows(args.pba)
    esa_rows = _read_rows(args.esa)
    by_key = lambda rows: {(r["omega"], r["target"]): r for r in rows}
    pba_map, esa_map = by_key(pba_rows), by_key(esa_rows)
    shared = sorted(set(pba_map) & set(esa_map))
    if not shared:
        raise ValidationError("the two reports share no (omega, target) rows")
    per_target = []
    curves = {}
    for key in shared:
        p, e = pba_map[key], esa_map[key]
        qpe = evaluate.compute_qpe(
            models.QpPair(p["qp_g"], p["qp_c"]),
            models.QpPair(e["qp_g"], e["qp_c"]),
        )
        row = {"omega": key[0], "target": key[1], "qpe": qpe}
        for label, r in (("pba", p), ("esa", e)):
            if "be_pct" in r:
                row[f"be_pct_{label}"] = r["be_pct"]
        per_target.append(row)
        for label, r in (("pba", p), ("esa", e)):
            actual = r.get("actual")
            if actual and "psnr_db" in actual:
                curves.setdefault((key[0], label), []).append(
                    (actual["rate"], actual["psnr_db"])
                )
    qpes = [r["qpe"] for r in per_target]
    payload = {
        "per_target": per_target,
        "average": {"qpe": sum(qpes) / len(qpes)},
    }
    bd = {}
    for omega in sorted({k[0] for k in curves}):
        a = pipeline._curve(curves.get((omega, "esa"), []))
        b = pipeline._curve(curves.get((omega, "pba"), []))
        if a and b:
            try:
                bd[str(omega)] = evaluate.bd_psnr(a, b)
            except ValidationError:
                bd[str(omega)] = None
    if bd:
        payload["bd_psnr_db"] = bd
    _emit(payload, args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcbitalloc",
        description="Model-based joint geometry/color bit allocation tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="point-to-point metrics between two PLY files")
    p.add_argument("reference")
    p.add_argument("reconstruction")
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--geometry-peak", type=float, default=None,
                   help="default: 2^bit_depth - 1 of the reference")
    p.add_argument("--color-peak", type=float, default=255.0)
    p.add_argument("--luma-weights", choices=("bt709", "bt601"), default="bt709")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=_cmd_metric)

    p = sub.add_parser("fit", help="fit rate and distortion models from a probe log")
    p.add_argument("--probes", required=True)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("allocate", help="solve the bit allocation for a budget")
    p.add_argument("--model", required=True, help="model JSON from 'fit'")
    p.add_argument("--target", type=float, required=True, help="budget in kbpmp")
    p.add_argument("--mu0", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=1e-6)
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=_cmd_allocate)

    p = sub.add_parser("simulate", help="run a full study from a config file")
    p.add_argument("--spec", required=True, help="JSON config (see pipeline docs)")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--csv", action="store_true",
                   help="also write the allocations table as CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("evaluate", help="compare two allocation reports")
    p.add_argument("--pba", required=True)
    p.add_argument("--esa", required=True)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=_cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except PcBitAllocError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return _EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
