"""Command line entry point: ``splinedict``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .analysis import cumulative_coherence, verify_span
from .dictionary import DictionarySpec, build_dictionary, dict_scaling, dict_wavelet
from .experiment import CHIRP, SignalSpec, cached_dictionary, make_signal, run_experiment, sweep_tolerance
from .mra import SpaceParams
from .pursuit import PursuitConfig


def _add_spec_flags(p: argparse.ArgumentParser, many_refine: bool = False) -> None:
    p.add_argument("--order", type=int, default=4, help="spline order m (default 4)")
    p.add_argument("--interval", type=int, nargs=2, default=[0, 8], metavar=("C", "D"))
    p.add_argument("--scale", type=int, default=6, help="scale j of the spanned space V_j")
    if many_refine:
        p.add_argument("--refine", type=int, nargs="+", default=[0, 2], help="translation refinements to compare")
    else:
        p.add_argument("--refine", type=int, default=0, help="translation refinement l (0 = basis)")


def _add_pursuit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--signal", default=CHIRP, help="'chirp' or a path to a text/CSV file of samples")
    p.add_argument("--resolution", type=int, default=None, help="grid step 2^-R (default scale + 1)")
    p.add_argument("--raw-signal", action="store_true", help="skip projecting the samples onto V_j")
    p.add_argument("--absolute", action="store_true", help="treat tolerances as absolute residual norms")
    p.add_argument("--no-swap", action="store_true")
    p.add_argument("--no-backward", action="store_true")
    p.add_argument("--max-atoms", type=int, default=None)


def _spec(args, refine=None) -> DictionarySpec:
    c, d = args.interval
    return DictionarySpec(args.order, c, d, args.scale, args.refine if refine is None else refine)


def _signal_spec(args) -> SignalSpec:
    c, d = args.interval
    r = args.resolution if args.resolution is not None else args.scale + 1
    return SignalSpec(args.signal, c, d, r, not args.raw_signal)


def _config(args, tol: float) -> PursuitConfig:
    return PursuitConfig(
        tolerance=tol,
        relative=not args.absolute,
        max_atoms=args.max_atoms,
        swap_enabled=not args.no_swap,
        backward_enabled=not args.no_backward,
    )


def cmd_dict_build(args) -> int:
    d = build_dictionary(_spec(args))
    if args.out:
        d.write_manifest(args.out)
    else:
        json.dump(d.manifest(), sys.stdout, indent=2)
        print()
    print(f"{d.spec.name}: {len(d)} atoms spanning a space of dimension {d.spec.dim}", file=sys.stderr)
    return 0


def cmd_dict_coherence(args) -> int:
    d = build_dictionary(_spec(args))
    curve = cumulative_coherence(d.gram, args.max_p)
    if args.out:
        curve.to_csv(args.out)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["p", "mu"])
        w.writerows(zip(curve.p.tolist(), curve.mu.tolist()))
    return 0


def cmd_verify_span(args) -> int:
    c, d = args.interval
    if args.family == "dictionary":
        atoms = build_dictionary(_spec(args)).atoms
        target = SpaceParams(args.order, c, d, args.scale)
    else:
        params = SpaceParams(args.order, c, d, args.scale)
        atoms = dict_wavelet(params, args.refine) if args.family == "wavelet" else dict_scaling(params, args.refine)
        target = params.at_scale(args.scale + args.refine)
    report = verify_span(atoms, target, exact=args.exact)
    print(json.dumps(report.as_dict(), indent=2))
    return 0 if report.passed else 1


def cmd_approx(args) -> int:
    report = run_experiment(
        _signal_spec(args), _spec(args), _config(args, args.tol), coherence_p=args.coherence_p, out_dir=args.out_dir
    )
    if args.out:
        report.write(args.out)
    dec = report.decomposition
    print(
        f"N={dec['n_atoms']} stages={dec['stage_counts']} relative residual={dec['relative_residual']:.3e} "
        f"converged={dec['converged']}",
        file=sys.stderr,
    )
    return 0


def cmd_sweep_tol(args) -> int:
    specs = {f"N_refine{r}": _spec(args, r) for r in args.refine}
    sig = _signal_spec(args)
    f, _ = make_signal(sig, next(iter(specs.values())))
    matrices = {name: cached_dictionary(s).sample(sig.resolution) for name, s in specs.items()}
    taus = np.geomspace(args.tol_from, args.tol_to, args.steps)
    rows = sweep_tolerance(f, matrices, taus, _config(args, float(taus[0])))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splinedict", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dict = sub.add_parser("dict", help="dictionary construction and coherence")
    dsub = p_dict.add_subparsers(dest="dict_command", required=True)
    p = dsub.add_parser("build", help="write a JSON manifest of D(j, l)")
    _add_spec_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dict_build)
    p = dsub.add_parser("coherence", help="cumulative coherence curve as CSV (p,mu)")
    _add_spec_flags(p)
    p.add_argument("--max-p", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dict_coherence)

    p = sub.add_parser("verify-span", help="check that a family spans its spline space (exit 0 on pass)")
    _add_spec_flags(p)
    p.add_argument(
        "--family",
        choices=["dictionary", "wavelet", "scaling"],
        default="dictionary",
        help="D(j, l) spanning V_j, or the single family W/V(j, l) spanning V_{j+l}",
    )
    p.add_argument("--exact", action="store_true", help="also certify the rank in exact arithmetic")
    p.set_defaults(func=cmd_verify_span)

    p = sub.add_parser("approx", help="sparse approximation of a signal")
    _add_spec_flags(p)
    _add_pursuit_flags(p)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--coherence-p", type=int, default=None)
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--out-dir", help="directory for report, residual curve and coherence CSV")
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("sweep-tol", help="atom counts over a geometric tolerance sweep")
    _add_spec_flags(p, many_refine=True)
    _add_pursuit_flags(p)
    p.add_argument("--from", dest="tol_from", type=float, default=1e-3)
    p.add_argument("--to", dest="tol_to", type=float, default=1e-1)
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_tol)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
