"""Command-line entry point.

Exit status: 0 on success, 2 when an input violates an invariant, 3 when
the requested problem is too large for exact computation.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .core import (Cut, Distribution, InvariantError, Partition, SizeError, additive_mixture,
                   gibbs_kernel, read_matrix_csv, validate_kernel)
from .curie_weiss import ModelParams, glauber_kernel, magnetisation_cut
from .frobenius import (FrobeniusBreakdown, frobenius_distance_direct,
                        frobenius_mixture_formula)
from .harness import (CUT_COLUMNS, CURVE_COLUMNS, PROFILE_COLUMNS, ExperimentConfig,
                      config_from_mapping, magnetisation_profile, optimal_cuts,
                      parse_config_file, profile_rows, run_alpha_sweep,
                      run_fixed_cut_comparison, run_optimal_cut_comparison, write_csv)
from .kl import KLReport, kl_report, optimal_entropy_partition
from .partition_opt import (CutSearchResult, MMTrace, Objective, brute_force_cut,
                            mm_optimize)
from .spectral import cheeger_constants, reversible_spectrum
from .subsets import MAX_ENUM_STATES

log = logging.getLogger("gibbsmix")

EXIT_INVARIANT = 2
EXIT_SIZE = 3


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, help="number of spins (default 4)")
    common.add_argument("--T", type=str, help="temperature(s), comma separated")
    common.add_argument("--h", type=str, help="external field(s), comma separated")
    common.add_argument("--alpha", type=float, help="mixture weight on P (default 0.5)")
    common.add_argument("--alpha-grid", type=str, help="comma-separated alphas")
    common.add_argument("--horizons", type=str, help="time horizons, e.g. 1-30 or 3,5,10")
    common.add_argument("--cut", type=str, help="mag | opt | bitmask:<int>")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--config", type=Path, help="key = value experiment config file")
    common.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    common.add_argument("--seed", type=int, help="reserved; every computation is deterministic")
    common.add_argument("-v", "--verbose", action="store_true")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--kernel", type=Path, help="kernel CSV (default: Curie-Weiss Glauber)")
    source.add_argument("--pi", type=Path, help="stationary distribution CSV for --kernel")
    source.add_argument("--partition", type=Path,
                        help="CSV with one row of 0-based block labels")

    parser = argparse.ArgumentParser(prog="gibbsmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common, source], help="check kernel, partition and cut")
    sub.add_parser("frobenius", parents=[common, source], help="Frobenius formulas and cut search")
    p = sub.add_parser("mm", parents=[common, source], help="majorise-minimise cut optimiser")
    p.add_argument("--max-iters", type=int, default=50)
    p = sub.add_parser("kl", parents=[common, source], help="KL divergence report")
    p.add_argument("--k", type=int, help="use the entropy-optimal k-partition")
    sub.add_parser("cw-compare", parents=[common], help="samplers under the fixed cut")
    sub.add_parser("cw-optcuts", parents=[common], help="samplers under their optimal cuts")
    sub.add_parser("cw-alpha", parents=[common], help="alpha sweep of A_alpha")
    sub.add_parser("profile", parents=[common], help="magnetisation profiles of cuts")
    return parser


def _emit(columns, rows, path: Path | None = None):
    rows = list(rows)
    if path is not None:
        write_csv(path, columns, rows)
    writer = csv.DictWriter(sys.stdout, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def _single(text, default) -> float:
    if text is None:
        return default
    values = _floats(text)
    if len(values) != 1:
        raise ValueError("this command takes a single --T and --h")
    return values[0]


def _load_kernel(args):
    if args.kernel is not None:
        if args.pi is None:
            raise ValueError("--kernel needs --pi")
        pi = Distribution(read_matrix_csv(args.pi).ravel())
        return validate_kernel(read_matrix_csv(args.kernel), pi), None
    params = ModelParams(args.d or 4, _single(args.T, 2.0), _single(args.h, 0.0))
    return glauber_kernel(params), params


def _resolve_cut(args, P, params, default="mag") -> Cut:
    choice = args.cut or default
    if choice == "mag":
        if params is None:
            raise ValueError("--cut mag needs a Curie-Weiss kernel")
        return magnetisation_cut(params.d)
    if choice == "opt":
        return brute_force_cut(P, args.alpha if args.alpha is not None else 0.5,
                               Objective.FROBENIUS_A).best_cut
    if choice.startswith("bitmask:"):
        return Cut(int(choice.split(":", 1)[1], 0), P.n)
    raise ValueError(f"--cut must be mag, opt or bitmask:<int>, got {choice!r}")


def _load_partition(args, P, params) -> Partition:
    if args.partition is not None:
        labels = read_matrix_csv(args.partition).ravel()
        if not np.all(labels == np.round(labels)):
            raise InvariantError("partition labels must be integers")
        part = Partition(labels.astype(np.int64))
        if part.n != P.n:
            raise InvariantError(f"partition covers {part.n} states, kernel has {P.n}")
        return part
    return _resolve_cut(args, P, params).partition()


def cmd_validate(args):
    P, params = _load_kernel(args)
    rows = [("n", P.n), ("reversible", int(P.reversible))]
    if args.partition is not None:
        part = _load_partition(args, P, params)
        rows.append(("partition_blocks", part.k))
    if args.cut is not None or params is not None:
        S = _resolve_cut(args, P, params)
        rows += [("cut_bitmask", S.mask), ("pi_S", repr(S.mass(P.pi)))]
    if P.reversible:
        rep = reversible_spectrum(P)
        rows += [("slem", repr(rep.slem)), ("gap", repr(rep.gap)),
                 ("abs_gap", repr(rep.abs_gap))]
        if rep.abs_gap_vanishes:
            log.warning("absolute spectral gap is zero: kernel is reducible or periodic")
    if P.n <= MAX_ENUM_STATES:
        ch = cheeger_constants(P)
        rows += [(k, v) for k, v in ch.to_row().items()]
    _emit(("quantity", "value"), [{"quantity": k, "value": v} for k, v in rows],
          args.out / "validate.csv")


def _alphas(args, default):
    if args.alpha_grid:
        return _floats(args.alpha_grid)
    if args.alpha is not None:
        return [args.alpha]
    return default


def cmd_frobenius(args):
    P, params = _load_kernel(args)
    part = _load_partition(args, P, params)
    alphas = _alphas(args, [round(0.05 * i, 2) for i in range(21)])
    G = gibbs_kernel(P.pi, part)
    rows = []
    for a in alphas:
        br = frobenius_mixture_formula(P, part, a)
        direct = frobenius_distance_direct(additive_mixture(P, G, a))
        if abs(direct - br.value) > 1e-10:
            raise InvariantError(f"closed form and direct value disagree at alpha={a}")
        rows.append(br.to_row())
    _emit(FrobeniusBreakdown.CSV_COLUMNS, rows, args.out / "frobenius.csv")
    if P.n <= MAX_ENUM_STATES:
        a = args.alpha if args.alpha is not None else 0.5
        results = [brute_force_cut(P, a, kind) for kind in Objective]
        write_csv(args.out / "cut_search.csv", CutSearchResult.CSV_COLUMNS,
                  [r.to_row() for r in results])


def cmd_mm(args):
    P, params = _load_kernel(args)
    alpha = args.alpha if args.alpha is not None else 0.5
    start = _resolve_cut(args, P, params)
    trace: MMTrace = mm_optimize(P, alpha, start, max_iters=args.max_iters)
    _emit(MMTrace.CSV_COLUMNS, trace.to_rows(), args.out / "mm_trace.csv")
    optimum = None
    if P.n <= MAX_ENUM_STATES:
        optimum = brute_force_cut(P, alpha, Objective.FROBENIUS_A).objective_value
        log.info("MM final %.12g, brute-force optimum %.12g, gap %.3g",
                 trace.final.true_objective, optimum, trace.final.true_objective - optimum)
    if not args.no_plots:
        from .plotting import plot_mm_trace
        plot_mm_trace(trace, args.out / "mm_trace.png", optimum)


def cmd_kl(args):
    P, params = _load_kernel(args)
    if args.k is not None:
        part = optimal_entropy_partition(P.pi, args.k)
    else:
        part = _load_partition(args, P, params)
    reports = [kl_report(P, part, a) for a in _alphas(args, [round(0.1 * i, 1) for i in range(11)])]
    _emit(KLReport.CSV_COLUMNS, [r.to_row() for r in reports], args.out / "kl.csv")


def _experiment_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config is not None:
        cfg = config_from_mapping(parse_config_file(args.config), cfg)
    entries = {}
    if args.d is not None:
        entries["d"] = str(args.d)
    if args.T is not None or args.h is not None:
        Ts = _floats(args.T) if args.T else sorted({T for T, _ in cfg.regimes})
        hs = _floats(args.h) if args.h else sorted({h for _, h in cfg.regimes})
        entries["regimes"] = ",".join(f"{T}:{h}" for T in Ts for h in hs)
    if args.alpha is not None:
        entries["alpha"] = str(args.alpha)
    if args.alpha_grid:
        entries["alpha_grid"] = args.alpha_grid
    if args.horizons:
        entries["horizons"] = args.horizons
    if args.cut:
        entries["cut"] = args.cut
    cfg = config_from_mapping(entries, cfg)
    cfg.output_dir = args.out
    cfg.plots = cfg.plots and not args.no_plots
    return cfg


def _curve_stdout(curves):
    _emit(CURVE_COLUMNS, [r for c in curves for r in c.to_rows()])


def cmd_cw_compare(args):
    cfg = _experiment_config(args)
    _curve_stdout(run_fixed_cut_comparison(cfg))


def cmd_cw_optcuts(args):
    cfg = _experiment_config(args)
    curves, records = run_optimal_cut_comparison(cfg)
    _emit(CUT_COLUMNS, [r.to_row() for r in records])


def cmd_cw_alpha(args):
    cfg = _experiment_config(args)
    curves, slices = run_alpha_sweep(cfg)
    _emit(CURVE_COLUMNS, [r for s in slices for r in s.to_rows()])


def cmd_profile(args):
    cfg = _experiment_config(args)
    profiles, rows = {}, []
    for T, h in cfg.regimes:
        P = glauber_kernel(ModelParams(cfg.d, T, h))
        if cfg.cut_mode == "frobenius_optimal":
            cuts = {s: r.cut for s, r in optimal_cuts(P, T, h, alpha=cfg.alpha).items()}
        elif cfg.cut_mode == "bitmask":
            cuts = {"explicit": Cut(cfg.cut_bitmask, P.n)}
        else:
            cuts = {"magnetisation": magnetisation_cut(cfg.d)}
        for label, S in cuts.items():
            prof = magnetisation_profile(S, cfg.d, P.pi)
            profiles[(T, h, label)] = prof
            rows.extend(profile_rows(T, h, label, prof))
    _emit(PROFILE_COLUMNS, rows, cfg.output_dir / "profile.csv")
    if cfg.plots:
        from .plotting import plot_profiles
        plot_profiles(profiles, cfg.output_dir / "profile.png")


COMMANDS = {
    "validate": cmd_validate,
    "frobenius": cmd_frobenius,
    "mm": cmd_mm,
    "kl": cmd_kl,
    "cw-compare": cmd_cw_compare,
    "cw-optcuts": cmd_cw_optcuts,
    "cw-alpha": cmd_cw_alpha,
    "profile": cmd_profile,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except SizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (InvariantError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return 0


if __name__ == "__main__":
    sys.exit(main())
