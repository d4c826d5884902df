"""Command-line front end.

Subcommands: ``validate``, ``entropy``, ``distances``, ``merge``,
``regress``, ``vif``, ``synth`` and ``report``. Global flags may appear
before or after the subcommand. Exit codes: 0 success, 1 data error,
2 configuration error, 3 numerical failure.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, detections, ingest, pipeline, report, synth
from .data import builtin_weights
from .entropy import province_entropies
from .errors import DataError, InvalidConfig, PolarProxyError
from .provinces import REGIONS
from .regress import OUTCOMES, DEFAULT_REGRESSORS, ModelSpec, auxiliary_ovb, build_design, ols_fit, vif

log = logging.getLogger("polarproxy")


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # Subparsers get SUPPRESS defaults so a flag given before the subcommand
    # is not reset by the subparser.
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--config", type=Path, default=d(None),
                   help="pipeline configuration file (INI)")
    g.add_argument("--seed", type=int, default=d(None),
                   help="64-bit seed for synthetic generation")
    g.add_argument("--format", choices=pipeline.FORMATS, default=d(None),
                   help="output format")
    g.add_argument("--baseline-region", choices=REGIONS, default=d(None),
                   help="omitted region level for fixed effects")
    g.add_argument("--log-base", choices=("e",), default=d("e"),
                   help="entropy logarithm base (only natural log)")
    g.add_argument("--delimiter", default=d(","),
                   help="field delimiter for input and output tables ('tab' for TAB)")
    g.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return p


def _existing(path, what="input file") -> Path:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"{what} not found: {p}")
    return p


def _delim(args) -> str:
    return "\t" if args.delimiter.lower() in ("tab", "\\t") else args.delimiter


def _emit(args, text: str):
    out = getattr(args, "output", None)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _weights(path, year, delim):
    if path:
        return ingest.read_table(_existing(path), "weights", delimiter=delim)
    if year is None:
        raise InvalidConfig("--weights is required unless --year selects a bundled table")
    try:
        return builtin_weights(year)
    except KeyError:
        raise InvalidConfig(f"no bundled weights for {year}; pass --weights") from None


# -- subcommands -------------------------------------------------------------

def cmd_validate(args):
    delim = _delim(args)
    checks = []
    if args.config:
        cfg = pipeline.load_config(args.config).validate()
        checks += [(cfg.distances, "distance"), (cfg.controls, "controls")]
        for y in sorted(cfg.elections):
            votes, w = cfg.elections[y]
            checks.append((votes, "election"))
            if w is not None:
                checks.append((w, "weights"))
        delim = cfg.delimiter
    for f in args.files:
        if not args.schema:
            raise InvalidConfig("--schema is required when files are given")
        checks.append((Path(f), args.schema))
    if not checks:
        raise InvalidConfig("nothing to validate: give files with --schema, or --config")
    summary, bad = [], 0
    for path, schema in checks:
        _existing(path)
        if schema == "detections":
            det = detections.parse_detections(path, delimiter=delim)
            summary.append({"file": str(path), "schema": schema,
                            "frames": len(det.frames),
                            "detections": sum(map(len, det.frames.values())),
                            "rejected": [], "warnings": []})
            continue
        t = ingest.read_table(path, schema, delimiter=delim, strict=not args.lenient)
        n = len(getattr(t, "rows", None) or getattr(t, "records", ()))
        bad += len(t.rejected)
        summary.append({
            "file": str(path), "schema": schema, "rows": n,
            "rejected": [vars(i) for i in t.rejected],
            "warnings": [vars(i) for i in t.warnings],
        })
    if (args.format or "json") == "json":
        _emit(args, report.to_json({"files": summary, "ok": bad == 0}))
    else:
        lines = [f"{s['file']}: {s['schema']} ok, {s.get('rows', s.get('detections'))} rows, "
                 f"{len(s['rejected'])} rejected, {len(s['warnings'])} warnings"
                 for s in summary]
        _emit(args, "\n".join(lines) + "\n")
    return 1 if bad else 0


def cmd_entropy(args):
    delim = _delim(args)
    elec = ingest.read_table(_existing(args.votes), "election", delimiter=delim)
    wts = _weights(args.weights, args.year, delim)
    ent = province_entropies(elec, wts)
    fmt = args.format or "csv"
    if fmt == "json":
        _emit(args, report.to_json({
            "units": "nats", "weighted_entropy_renormalized": False,
            "provinces": {p: {**m.as_dict(), "enp": m.enp, "n_parties": m.n_parties}
                          for p, m in ent.items()}}))
    elif fmt == "csv":
        _emit(args, pipeline._entropy_csv(ent, delim))
    else:
        rows = [("province", "h_unweighted", "h_religiosity", "h_political")]
        rows += [(p, f"{m.h_unweighted:.4f}", f"{m.h_religiosity:.4f}",
                  f"{m.h_political:.4f}") for p, m in ent.items()]
        w = [max(len(r[i]) for r in rows) for i in range(4)]
        _emit(args, "".join("  ".join(c.ljust(x) for c, x in zip(r, w)).rstrip() + "\n"
                            for r in rows))
    return 0


def cmd_distances(args):
    delim = _delim(args)
    det = detections.parse_detections(_existing(args.detections), delimiter=delim)
    meta = None
    if args.meta:
        meta = detections.parse_frame_meta(_existing(args.meta), delimiter=delim)
    if args.depth_dir and not Path(args.depth_dir).is_dir():
        raise DataError(f"depth directory not found: {args.depth_dir}")
    run = detections.distance_table(det, meta, depth_dir=args.depth_dir,
                                    aspect=args.aspect,
                                    ground_contact=args.ground_contact)
    for fid, why in run.skipped.items():
        log.info("skipped frame %s: %s", fid, why)
    if run.skipped:
        print(f"skipped {len(run.skipped)} frame(s) without pairs", file=sys.stderr)
    if (args.format or "csv") == "json":
        _emit(args, report.to_json({
            "records": [vars(r) for r in run.table.records],
            "skipped": run.skipped, "flags": run.table.flags}))
    else:
        _emit(args, ingest.serialize(run.table, delim))
    return 0


def cmd_merge(args):
    delim = _delim(args)
    elec = ingest.read_table(_existing(args.votes), "election", delimiter=delim)
    wts = _weights(args.weights, args.year, delim)
    dist = ingest.read_table(_existing(args.distances), "distance", delimiter=delim)
    ctl = ingest.read_table(_existing(args.controls), "controls", delimiter=delim)
    table = ingest.join_province(province_entropies(elec, wts), dist, ctl,
                                 args.year, level=args.level)
    if args.report:
        Path(args.report).write_text(table.report.to_json(), encoding="utf-8")
    else:
        sys.stderr.write(table.report.to_json())
    if (args.format or "csv") == "json":
        _emit(args, table.frame.to_json(orient="records", indent=2) + "\n")
    else:
        _emit(args, table.to_csv(delim))
    return 0


def _specs(args):
    """(table, [ModelSpec]) for regress and vif."""
    if args.table:
        table = ingest.AnalysisTable.from_csv(_existing(args.table), delimiter=_delim(args))
        outcomes = args.outcome or list(OUTCOMES)
        regs = tuple(args.regressors.split(",")) if args.regressors else DEFAULT_REGRESSORS
        base = args.baseline_region or "central"
        cat = None if args.no_fixed_effects else "region"
        return [(table, ModelSpec(outcome=o, regressors=regs, categorical=cat,
                                  baseline=base, name=o)) for o in outcomes]
    if not args.config:
        raise InvalidConfig("give --table or --config")
    cfg = pipeline.load_config(args.config, baseline_region=args.baseline_region).validate()
    out, cache = [], {}
    d = cfg.delimiter
    dist = ingest.read_table(cfg.distances, "distance", delimiter=d)
    ctl = ingest.read_table(cfg.controls, "controls", delimiter=d)
    for run in cfg.models:
        if run.year not in cache:
            votes, w = cfg.elections[run.year]
            elec = ingest.read_table(votes, "election", delimiter=d)
            wts = builtin_weights(run.year) if w is None else ingest.read_table(
                w, "weights", delimiter=d)
            cache[run.year] = ingest.join_province(
                province_entropies(elec, wts), dist, ctl, run.year)
        out.append((cache[run.year], run.spec))
    return out


def cmd_regress(args):
    fits, aux = [], []
    for table, spec in _specs(args):
        fits.append(ols_fit(build_design(table, spec), label=spec.label))
        if args.auxiliary:
            aux.append(auxiliary_ovb(table, spec, args.auxiliary))
    fmt = args.format or "table"
    if fmt == "table":
        text = report.coefficient_table(fits, notes=(report.baseline_note(fits),))
        if aux:
            res = [a.auxiliary for a in aux]
            text += "\n" + report.coefficient_table(
                res, title=f"With {report.row_label(args.auxiliary)}",
                notes=(report.baseline_note(res),))
        _emit(args, text)
    elif fmt == "csv":
        _emit(args, report.coefficients_csv(fits + [a.auxiliary for a in aux], _delim(args)))
    else:
        _emit(args, report.to_json({"models": [r.summary_dict() for r in fits],
                                    "auxiliary": [a.as_dict() for a in aux]}))
    return 0


def cmd_vif(args):
    reps = {}
    for table, spec in _specs(args):
        reps[spec.label] = vif(build_design(table, spec))
    fmt = args.format or "table"
    if fmt == "table":
        _emit(args, "\n".join(report.vif_table(v, title=f"VIF: {k}") for k, v in reps.items()))
    elif fmt == "csv":
        _emit(args, report.vif_csv(reps, _delim(args)))
    else:
        _emit(args, report.to_json({k: {"vif": v.as_dict(), "groups": v.groups}
                                    for k, v in reps.items()}))
    return 0


def cmd_synth(args):
    cfg = synth.SynthConfig(
        n_provinces=args.n_provinces, frames_per_province=args.frames,
        noise_sd=args.noise_sd, rng_seed=args.seed if args.seed is not None else 0,
        years=tuple(args.years), baseline=args.baseline_region or "central",
    )
    if args.check:
        rep = synth.recovery_check(replace(cfg, years=cfg.years[:1]), mode=args.check)
        _emit(args, rep.to_json())
        return 0 if rep.passed else 3
    if not args.output:
        raise InvalidConfig("synth needs -o/--output DIR")
    out = Path(args.output)
    bundle = synth.generate_inputs(cfg)
    delim = _delim(args)
    paths = bundle.write(out, delimiter=delim)
    pcfg = pipeline.PipelineConfig(
        elections={y: (paths[f"election_{y}.csv"], paths[f"weights_{y}.csv"])
                   for y in cfg.years},
        distances=paths["distances.csv"], controls=paths["controls.csv"],
        models=pipeline.default_models(cfg.years, cfg.baseline),
        output_dir=out / "report", baseline_region=cfg.baseline, delimiter=delim,
    )
    pipeline.write_config(pcfg, out / "pipeline.ini")
    print(f"wrote {len(paths) + 1} files to {out}", file=sys.stderr)
    return 0


def cmd_report(args):
    if not args.config:
        raise InvalidConfig("report needs --config")
    cfg = pipeline.load_config(args.config, baseline_region=args.baseline_region)
    overrides = {}
    if args.output:
        overrides["output_dir"] = Path(args.output)
    if args.format:
        overrides["formats"] = (args.format,)
    if overrides:
        cfg = replace(cfg, **overrides)
    bundle = pipeline.run_pipeline(cfg)
    for name in sorted(bundle.files):
        print(bundle.files[name])
    for name, msg in sorted(bundle.failures.items()):
        print(f"model {name} failed: {msg}", file=sys.stderr)
    return 3 if bundle.failures and not bundle.results else 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    sub_common = _global_flags(defaults=False)
    parser = argparse.ArgumentParser(
        prog="polarproxy", parents=[_global_flags(defaults=True)],
        description="Electoral entropy, pedestrian distances and OLS diagnostics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help):
        p = subs.add_parser(name, parents=[sub_common], help=help, description=help)
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check input files against their schema")
    p.add_argument("files", nargs="*")
    p.add_argument("--schema", choices=(*ingest.SCHEMAS, "detections"))
    p.add_argument("--lenient", action="store_true",
                   help="collect bad rows instead of stopping at the first")
    p.add_argument("-o", "--output")

    p = add("entropy", cmd_entropy, "per-province entropy measures")
    p.add_argument("--votes", required=True)
    p.add_argument("--weights")
    p.add_argument("--year", type=int, help="selects the bundled weight table")
    p.add_argument("-o", "--output")

    p = add("distances", cmd_distances, "frame distance records from detections")
    p.add_argument("--detections", required=True)
    p.add_argument("--meta", help="per-frame province/daynight/is_summer file")
    p.add_argument("--depth-dir", help="directory of <frame_id>.txt depth grids")
    p.add_argument("--aspect", type=float,
                   help="width/height ratio (default: depth grid, else 16:9)")
    p.add_argument("--ground-contact", action="store_true",
                   help="anchor at the box bottom edge instead of its centre")
    p.add_argument("-o", "--output")

    p = add("merge", cmd_merge, "join inputs into an analysis table")
    for flag in ("--votes", "--distances", "--controls"):
        p.add_argument(flag, required=True)
    p.add_argument("--weights")
    p.add_argument("--year", type=int, required=True)
    p.add_argument("--level", choices=("frame", "province"), default="frame")
    p.add_argument("--report", help="write the join report here (default stderr)")
    p.add_argument("-o", "--output")

    for name, func, help in (("regress", cmd_regress, "fit OLS models"),
                             ("vif", cmd_vif, "variance inflation factors")):
        p = add(name, func, help)
        p.add_argument("--table", help="analysis table from 'merge'")
        p.add_argument("--outcome", action="append", choices=OUTCOMES)
        p.add_argument("--regressors", help="comma-separated column list")
        p.add_argument("--no-fixed-effects", action="store_true")
        if name == "regress":
            p.add_argument("--auxiliary", nargs="?", const="poverty_rate", default=None,
                           help="also fit with this column appended")
        p.add_argument("-o", "--output")

    p = add("synth", cmd_synth, "write a synthetic input bundle")
    p.add_argument("-o", "--output", help="output directory")
    p.add_argument("--years", type=int, nargs="+", default=[2018, 2019])
    p.add_argument("--n-provinces", type=int, default=81)
    p.add_argument("--frames", type=int, default=20, help="frames per province")
    p.add_argument("--noise-sd", type=float, default=0.02)
    p.add_argument("--check", choices=("direct", "files"),
                   help="run a recovery check instead of writing files")

    p = add("report", cmd_report, "run the configured pipeline and write reports")
    p.add_argument("-o", "--output", help="override the output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except PolarProxyError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
