"""Command-line interface: ``waverobe {estimate,simulate,scan,experiment}``."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from importlib import resources
from pathlib import Path

from . import document
from .arfima import ArfimaConfig, OutlierSpec, generate, inject_outliers
from .asympvar import DEFAULT_MC_REPS, attach_ci, rate_condition_warning
from .errors import ExperimentError, InputError, NumericError, RangeError, WaverobeError
from .estimator import estimate_d, j0_scan, joint_recommendation
from .harness import (density_experiment, load_plan, run_plan, write_are_csv, write_density_csv,
                      write_samples_csv, write_summary_csv)
from .robust import ALL_KINDS, CR_VARIANTS, DEFAULT_CR_VARIANT, EstimatorKind
from .series import aggregate, read_series
from .wavelet import check_memory_range, daubechies_spec, decompose

EXIT_OK = 0


def _kinds(value: str) -> tuple:
    if value.lower() == "all":
        return ALL_KINDS
    return (EstimatorKind.parse(value),)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _level(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return v


def _emit(doc: dict, out: str | None) -> None:
    text = document.dumps(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args):
    series = read_series(args.file)
    if getattr(args, "aggregate", None):
        series = aggregate(series, args.aggregate)
    return series


def _options(args) -> dict:
    skip = {"func", "file"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _with_ci(est, pyr, args, warnings: list):
    if args.ci == "none":
        return est
    try:
        return attach_ci(est, pyr, level=args.level, method=args.ci, reps=args.mc_reps,
                         seed=args.seed, threads=args.threads, cr_variant=args.cr_variant)
    except WaverobeError as exc:
        warnings.append(f"{est.kind.value}: CI unavailable ({exc}); point estimate only")
        return est


# --- estimate -------------------------------------------------------------------

def _scale_rows(pyr, kinds, j0, ell, cr_variant) -> list:
    from .robust import min_coeffs, scale

    rows = []
    for kind in kinds:
        for j in pyr.scales():
            w = pyr[j]
            if w.size < min_coeffs(kind):
                continue
            s2 = scale(w, kind, cr_variant)
            rows.append({"estimator": kind.value, "j": j, "n_j": w.size,
                         "log2_sigma2": math.log2(s2) if s2 > 0 else float("nan"),
                         "in_regression": int(j0 <= j <= j0 + ell)})
    return rows


def _write_csv(rows: list, path: Path, fields: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v))
                        for k, v in r.items()})


def cmd_estimate(args, argv) -> int:
    series = _load(args)
    spec = daubechies_spec(args.wavelet_m)
    pyr = decompose(series, spec)
    warnings = []
    msg = rate_condition_warning(len(series), args.j0, args.beta)
    if msg:
        warnings.append(msg)
    kinds = _kinds(args.estimator)
    estimates = []
    for kind in kinds:
        est = estimate_d(pyr, args.j0, args.ell, kind, cr_variant=args.cr_variant)
        warnings.extend(f"{kind.value}: {m}" for m in check_memory_range(est.d_hat, spec, args.beta))
        estimates.append(_with_ci(est, pyr, args, warnings))
    doc = document.make_document(
        "estimate", argv, _options(args), series.digest() | {"source": str(args.file)}, warnings,
        wavelet=spec.name, scales=[{"j": j, "n_j": int(pyr[j].size)} for j in pyr.scales()],
        estimates=[e.to_dict() for e in estimates],
    )
    if args.plot:
        prefix = Path(args.plot)
        rows = _scale_rows(pyr, kinds, args.j0, args.ell, args.cr_variant)
        _write_csv(rows, prefix.with_suffix(".csv"), ["estimator", "j", "n_j", "log2_sigma2", "in_regression"])
        from . import plots

        plots.scale_diagram(prefix.with_suffix(".csv"), prefix.with_suffix(".svg"))
    _emit(doc, args.out)
    return EXIT_OK


# --- simulate -------------------------------------------------------------------

def _format_series(values) -> str:
    return "".join(f"{float(v)!r}\n" for v in values)


def cmd_simulate(args, argv) -> int:
    cfg = ArfimaConfig(args.d, args.n, args.seed)
    x = generate(cfg)
    idx = None
    if args.outliers_frac > 0:
        x, idx = inject_outliers(x, OutlierSpec(args.outliers_frac, args.outlier_mult, args.seed))
    text = _format_series(x.values)
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        if idx is not None:
            Path(str(out) + ".outliers").write_text("".join(f"{int(i)}\n" for i in idx), encoding="utf-8")
    else:
        if idx is not None:
            raise InputError("--outliers-frac needs --out so the index sidecar can be written")
        sys.stdout.write(text)
    return EXIT_OK


# --- scan -----------------------------------------------------------------------

def cmd_scan(args, argv) -> int:
    series = _load(args)
    spec = daubechies_spec(args.wavelet_m)
    pyr = decompose(series, spec)
    warnings = []
    scans = []
    for kind in _kinds(args.estimator):
        options = {}
        if args.ci != "none":
            options = {"reps": args.mc_reps, "seed": args.seed, "threads": args.threads}
        try:
            res = j0_scan(pyr, args.coarse, kind, level=args.level, ci=args.ci,
                          cr_variant=args.cr_variant, **options)
        except RangeError:
            raise
        except WaverobeError as exc:
            if args.ci == "none":
                raise
            warnings.append(f"{kind.value}: CI unavailable ({exc}); point estimates only")
            res = j0_scan(pyr, args.coarse, kind, ci="none", cr_variant=args.cr_variant)
        if res.recommended_j0 is not None:
            msg = rate_condition_warning(len(series), res.recommended_j0, args.beta)
            if msg:
                warnings.append(f"{kind.value}: {msg}")
        scans.append(res)
    doc = document.make_document(
        "scan", argv, _options(args), series.digest() | {"source": str(args.file)}, warnings,
        wavelet=spec.name, scales=[{"j": j, "n_j": int(pyr[j].size)} for j in pyr.scales()],
        scans=[s.to_dict() for s in scans],
        recommended_j0=joint_recommendation(scans),
    )
    if args.plot:
        prefix = Path(args.plot)
        rows = []
        for s in scans:
            for e in s.estimates:
                rows.append({"estimator": s.kind.value, "j0": e.j0, "d_hat": e.d_hat,
                             "lo": e.ci[0] if e.ci else None, "hi": e.ci[1] if e.ci else None})
        _write_csv(rows, prefix.with_suffix(".csv"), ["estimator", "j0", "d_hat", "lo", "hi"])
        from . import plots

        plots.ci_ladder(prefix.with_suffix(".csv"), prefix.with_suffix(".svg"))
    _emit(doc, args.out)
    return EXIT_OK


# --- experiment -----------------------------------------------------------------

def bundled_plan(name: str):
    ref = resources.files("waverobe").joinpath("data/plans").joinpath(name)
    return ref if ref.is_file() else None


def cmd_experiment(args, argv) -> int:
    path = Path(args.plan)
    if not path.exists():
        ref = bundled_plan(args.plan)
        if ref is None:
            raise InputError(f"plan {args.plan!r} is neither a file nor a bundled plan")
        with resources.as_file(ref) as p:
            plan = load_plan(p)
    else:
        plan = load_plan(path)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_plan(plan, threads=args.threads)
    write_are_csv(result, out_dir / "are.csv")
    write_summary_csv(result, out_dir / "summary.csv")
    sample_dir = out_dir / "samples"
    sample_dir.mkdir(exist_ok=True)
    for cell in result.cells.values():
        write_samples_csv(cell, sample_dir / f"d{cell.d:g}_{cell.kind.value}.csv")
    payload = {"experiment": result.to_dict(include_samples=True)}
    if plan.density:
        bundle = density_experiment(plan, threads=args.threads)
        dens_dir = out_dir / "density"
        dens_dir.mkdir(exist_ok=True)
        files = {}
        for c in bundle.curves:
            f = dens_dir / f"{c.condition}_d{c.d:g}_{c.kind.value}.csv"
            write_density_csv(c, f)
            files.setdefault((c.condition, c.d), {})[f"{c.kind.value} {c.condition}"] = f
        _write_csv(bundle.summary_rows(), dens_dir / "summary.csv",
                   ["condition", "d", "estimator", "mean", "median", "sd", "count"])
        payload["density"] = bundle.summary_rows()
        if args.plot:
            from . import plots

            for (cond, d), paths in files.items():
                plots.density_plot(paths, dens_dir / f"{cond}_d{d:g}.svg", title=f"{cond}, d={d:g}")
    doc = document.make_document("experiment", argv, _options(args), None,
                                 [f"runtime {result.runtime['seconds']:.1f} s"], **payload)
    (out_dir / "result.json").write_text(document.dumps(doc), encoding="utf-8")
    if args.out:
        _emit(doc, args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------

def _add_common(p, ci: bool = True):
    p.add_argument("--wavelet-m", type=int, default=2, help="Daubechies vanishing moments (default 2)")
    p.add_argument("--cr-variant", choices=CR_VARIANTS, default=DEFAULT_CR_VARIANT,
                   help="rank convention of the CR estimator")
    p.add_argument("--beta", type=float, default=1.0, help="assumed smoothness of f* for diagnostics")
    p.add_argument("--aggregate", type=_positive_int, help="sum over non-overlapping windows of k samples")
    p.add_argument("--out", help="write the JSON document here instead of stdout")
    p.add_argument("--plot", help="write PLOT.svg and PLOT.csv")
    p.add_argument("--threads", type=_positive_int, help="worker threads (WAVEROBE_THREADS overrides)")
    if ci:
        p.add_argument("--ci", choices=("mc", "analytic", "none"), default="mc")
        p.add_argument("--level", type=_level, default=0.95)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mc-reps", type=_positive_int, default=DEFAULT_MC_REPS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="waverobe",
                                     description="Robust wavelet estimation of the memory parameter d.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate d from a series file")
    p.add_argument("file")
    p.add_argument("--estimator", default="all", help="cl, mad, cr or all")
    p.add_argument("--j0", type=_positive_int, default=3)
    p.add_argument("--ell", type=_positive_int, default=5)
    _add_common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="simulate ARFIMA(0,d,0), optionally with outliers")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outliers-frac", type=float, default=0.0)
    p.add_argument("--outlier-mult", type=float, default=5.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="estimate d for J0 = 1..coarse-1 with CIs")
    p.add_argument("file")
    p.add_argument("--coarse", type=_positive_int, required=True)
    p.add_argument("--estimator", default="all", help="cl, mad, cr or all")
    _add_common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("experiment", help="run a Monte-Carlo plan (JSON or TOML)")
    p.add_argument("plan", help="plan file, or the name of a bundled plan such as table1-desk.json")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--out", help="also write the JSON document here")
    p.add_argument("--plot", action="store_true", help="write SVG density plots")
    p.add_argument("--threads", type=_positive_int)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "estimator", None) is not None:
            _kinds(args.estimator)
        return args.func(args, argv)
    except ExperimentError as exc:
        print(f"waverobe: experiment error: {exc}", file=sys.stderr)
        return exc.exit_code
    except NumericError as exc:
        print(f"waverobe: numeric error: {exc}", file=sys.stderr)
        return exc.exit_code
    except InputError as exc:
        print(f"waverobe: input error: {exc}", file=sys.stderr)
        return exc.exit_code
    except WaverobeError as exc:
        print(f"waverobe: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
