"""Command-line driver: ``oscbound {verify,oracle,profile,measure,bound}``.

Exit codes: 0 every verdict holds, 1 some verdict fails, 2 input error,
3 numeric stage failure (a partial report is still written with --out).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report as R
from .coarea import level_profile, monotone_split, oscillatory_from_profile
from .errors import ChainTooLarge, OscBoundError, StageError
from .oracle import oscillatory_integral
from .sampling import stratified_sample
from .search import box_extremum

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_STAGE = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="infile", help="problem document (default: bundled sample)")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="directory for plot-data CSV files")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--grid", type=int, help="level-profile grid points")
    common.add_argument("--resolution", type=int, help="isocontour grid cells per axis")
    common.add_argument("--tol", type=float, help="oracle target absolute error")
    common.add_argument("--workers", type=int, default=1, help="sampling threads (results do not depend on it)")

    p = argparse.ArgumentParser(prog="oscbound", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="full pipeline and verdicts")
    sub.add_parser("oracle", parents=[common], help="reference value of the integral")
    sub.add_parser("profile", parents=[common], help="level profile and monotone pieces")
    sub.add_parser("measure", parents=[common], help="sublevel volumes and surface measures")
    sub.add_parser("bound", parents=[common], help="spectral extrema and bound values")
    return p


def _document(args) -> R.ProblemDocument:
    doc = R.load_document(args.infile) if args.infile else R.sample_document()
    return R.with_sampling(doc, seed=args.seed, samples=args.samples, grid_points=args.grid,
                           resolution=args.resolution, target_error=args.tol)


def _write(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(report: dict, directory: str | None, kinds) -> None:
    if not directory:
        return
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for kind in kinds:
        try:
            (out / f"{kind}.csv").write_text(R.emit_plot_data(report, kind))
        except R.MissingSectionError:
            pass


def _oracle(doc):
    s = doc.sampling
    res = oscillatory_integral(doc.phase, doc.domain, float(s["target_error"]), seed=int(s["seed"]))
    return {"schema": R.REPORT_SCHEMA, "inputs": R.echo_document(doc),
            "oracle": {"I": res.value, "abs_I": abs(res.value), "error": res.abs_error_estimate,
                       "rule_error": res.rule_error, "qmc": res.qmc_value, "qmc_error": res.qmc_error,
                       "evaluations": res.evaluations, "converged": res.converged}}


def _profile(doc, workers):
    s = doc.sampling
    prof = level_profile(doc.phase, doc.domain, int(s["grid_points"]), int(s["samples"]),
                         int(s["seed"]), workers, s["extrema_resolution"])
    pieces = monotone_split(prof)
    return {"schema": R.REPORT_SCHEMA, "inputs": R.echo_document(doc),
            "computed": {"m": prof.m, "M": prof.M, "vol_omega": prof.volume, "K0": pieces.count},
            "coarea": {"I_profile": oscillatory_from_profile(prof), "normalization": prof.normalization(),
                       "noise_scale": prof.noise_scale, "step": prof.step,
                       "pieces": {"breakpoints": list(pieces.breakpoints),
                                  "directions": list(pieces.directions)},
                       "profile": {"u": prof.u_grid, "V": prof.V, "phi": prof.phi,
                                   "piece": pieces.piece_index(prof.grid_points)}}}


def _measure(doc, workers):
    s = doc.sampling
    spec = R.spectral_stage(doc)
    sample = stratified_sample(doc.domain, int(s["samples"]), int(s["seed"]), workers)
    prof = level_profile(doc.phase, doc.domain, int(s["grid_points"]), sample=sample,
                         extrema_resolution=s["extrema_resolution"])
    meas = R.measure_stage(doc, spec, prof, sample)
    rep = {"schema": R.REPORT_SCHEMA, "inputs": R.echo_document(doc),
           "measure": {k: v for k, v in meas.items() if k != "verdicts"}, "verdicts": meas["verdicts"]}
    return rep


def _bound(doc):
    spec = R.spectral_stage(doc)
    ext = spec["thm4"]
    cfg = doc.constants
    out = {"schema": R.REPORT_SCHEMA, "inputs": R.echo_document(doc),
           "computed": {"G_levels": list(ext.g_min), "r_levels": list(ext.r_levels), "L": spec["L"],
                        "H_tilde": spec["H_tilde"], "H_1": spec["H_1"]},
           "theorem4": []}
    if doc.k >= 2:
        res = doc.sampling["extrema_resolution"]
        m = box_extremum(doc.phase.evaluate_many, doc.domain, res).value
        M = box_extremum(doc.phase.evaluate_many, doc.domain, res, maximize=True).value
        Pi = R.level_area(doc, m, M)
        out["computed"]["Pi_area"] = Pi
        inp = R.theorem4_inputs(doc, spec, Pi, doc.domain.box_volume)
        for case in doc.theorem4_cases or R.B.theorem4_cases(doc.k, doc.n):
            why = R.theorem4_admissible(case, inp)
            out["theorem4"].append({"case": case, "reason": why, "inputs": inp.to_dict(),
                                    "bound_cfgK": None if why else R.B.theorem4_bound(case, inp, cfg)})
    elif doc.theorem4_cases:
        raise R.B.BoundInputError("k-1 division undefined: theorem4_bound needs k >= 2")
    return out


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        doc = _document(args)
    except (OSError, OscBoundError, ValueError) as exc:
        print(f"oscbound: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "verify":
            rep = R.run_verify(doc, workers=args.workers)
        elif args.command == "oracle":
            rep = _oracle(doc)
        elif args.command == "profile":
            rep = _profile(doc, args.workers)
        elif args.command == "measure":
            rep = _measure(doc, args.workers)
        else:
            rep = _bound(doc)
    except StageError as exc:
        print(f"oscbound: stage {exc.stage} failed: {exc.cause}", file=sys.stderr)
        if exc.partial is not None:
            _write(R.dumps_report(exc.partial), args.out)
        return EXIT_STAGE
    except (OscBoundError, ChainTooLarge, ValueError, ArithmeticError) as exc:
        print(f"oscbound: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    _write(R.dumps_report(rep), args.out)
    _write_csv(rep, args.csv, R.CSV_COLUMNS)
    return EXIT_OK if R.all_hold(rep) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
