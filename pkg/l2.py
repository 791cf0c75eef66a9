# l2.py

"""
Command-line entry point: `python l2.py SUBCOMMAND [options]`.

Reports go to stdout (or --out) as CSV, or JSON with --json; logs go to
stderr. Exit codes: 0 success, 2 usage or input error, 3 computation error
or failed check.
"""

import argparse
import logging
import math
import sys
from pathlib import Path

from sympy import isprime

from config.numerics import DEFAULT_FIELD, DEFAULT_MAX_QUOTIENT_SIZE, DEFAULT_TOWER
from core.density_toolkit import DensityToolkitError
from core.exactalg import ExactAlgebraError, IntMatrix
from core.experiment_runner import (
    TORUS_REFERENCE_GRID,
    ExperimentError,
    analysis_report,
    density_report,
    log_bound_report,
    run_betti_approx,
    run_det_approx,
    run_identity_checks,
    run_mapping_torus,
    run_section9_checks,
    run_torsion_growth,
    run_trace_approx,
)
from core.groupring import GroupRingError, GroupRingMatrix, PolynomialSyntaxError, parse_poly
from core.input_loader import (
    InputLoaderError,
    load_complex,
    load_group_ring_matrix,
    load_int_matrix,
    load_simplicial,
)
from core.report_engine import ReportEngineError, generate_pdf_report, write_report
from core.spectral import SpectralError, fk_det_torus_sequence, mahler
from core.torsion_lab import (
    ChainComplexError,
    GRChainComplex,
    fundamental_cycle,
    from_simplicial,
    mapping_torus_complex,
    remark_complex,
    section9_complex,
)
from core.towers import TowerSpecError, parse_tower


logger = logging.getLogger("l2")

EXIT_OK, EXIT_USAGE, EXIT_COMPUTATION = 0, 2, 3

USAGE_ERRORS = (InputLoaderError, TowerSpecError, PolynomialSyntaxError)
COMPUTATION_ERRORS = (
    ExactAlgebraError,
    GroupRingError,
    SpectralError,
    DensityToolkitError,
    ChainComplexError,
    ExperimentError,
    ReportEngineError,
)


class UsageError(Exception):
    pass


# ---- argument helpers ----
def parse_field(text: str):
    """"Q" or "Fp:P" → "Q" or the prime P."""
    if text in ("Q", "q"):
        return "Q"
    prefix, _, prime = text.partition(":")
    if prefix != "Fp" or not prime.isdigit():
        raise UsageError(f"Field must be Q or Fp:P, got {text!r}")
    if not isprime(int(prime)):
        raise UsageError(f"Field modulus {prime} is not prime")
    return int(prime)


def parse_matrix_text(text: str) -> IntMatrix:
    """"2,1;1,1" → [[2,1],[1,1]]."""
    try:
        return IntMatrix.from_rows(
            [[int(x) for x in row.split(",")] for row in text.split(";")]
        )
    except (ValueError, ExactAlgebraError) as e:
        raise UsageError(f"Bad matrix {text!r}: {e}")


def parse_range(text: str) -> list[int]:
    """"2..20" or "2,5,9"."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"Bad range {text!r}")


def parse_parameters(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"Bad parameter list {text!r}")
    if len(values) != 5:
        raise UsageError("Expected five parameters a,b,k,l,g")
    return values


def _group_ring_input(args) -> GroupRingMatrix:
    if args.matrix:
        return load_group_ring_matrix(args.matrix)
    if args.poly:
        return GroupRingMatrix.from_rows(args.rank, [[parse_poly(args.poly, args.rank)]])
    raise UsageError("Give --matrix FILE or --poly TEXT")


def _int_matrix_input(args) -> IntMatrix:
    if args.matrix_file:
        return load_int_matrix(args.matrix_file)
    if args.torus_matrix:
        return parse_matrix_text(args.torus_matrix)
    raise UsageError("Give --torus-matrix TEXT or --matrix-file FILE")


# ---- subcommands ----
def cmd_det_approx(args):
    A = _group_ring_input(args)
    return run_det_approx(A, parse_tower(args.tower), args.max_size, args.jobs)


def cmd_betti_approx(args):
    A = _group_ring_input(args)
    return run_betti_approx(
        A, parse_tower(args.tower), parse_field(args.field), args.max_size, args.jobs
    )


def cmd_torsion_growth(args):
    if args.complex:
        C = load_complex(args.complex)
        if not isinstance(C, GRChainComplex):
            raise UsageError("torsion-growth needs a complex over a Laurent ring")
    elif args.torus_matrix:
        C = mapping_torus_complex(parse_matrix_text(args.torus_matrix))
    elif args.remark:
        C = remark_complex(*parse_parameters(args.remark))
    else:
        raise UsageError("Give --complex FILE, --torus-matrix TEXT or --remark a,b,k,l,g")
    return run_torsion_growth(C, parse_tower(args.tower), args.max_size, args.jobs)


def cmd_trace_approx(args):
    A = _group_ring_input(args)
    return run_trace_approx(A, parse_tower(args.tower), args.degree, args.max_size, args.jobs)


def cmd_mapping_torus(args):
    return run_mapping_torus(_int_matrix_input(args), args.d_max, parse_field(args.field))


def cmd_mahler(args):
    p = parse_poly(args.poly, args.rank)
    if args.rank == 1:
        value = mahler(p)
    else:
        value = fk_det_torus_sequence(p, args.grid or TORUS_REFERENCE_GRID)[-1][1]
    print(float(f"{value:.12g}"))
    if args.grid and args.rank == 1:
        for n, v in fk_det_torus_sequence(p, args.grid):
            logger.info("torus quadrature N=%d: %.12g", n, v)
    return None


def cmd_section9(args):
    C = section9_complex(args.a, args.b, args.k, args.l, args.g)
    return analysis_report(
        "section9", C, {"parameters": [args.a, args.b, args.k, args.l, args.g]}
    )


def cmd_simplicial(args):
    S = load_simplicial(args.input)
    metadata = {"simplex_counts": list(S.simplex_counts())}
    if args.fundamental_cycle:
        metadata["fundamental_cycle"] = list(fundamental_cycle(S))
    return analysis_report("simplicial", from_simplicial(S), metadata)


def cmd_density(args):
    if args.check == "addendum":
        return density_report(parse_range(args.n))
    grid = [
        (C, delta, math.exp(-t))
        for C in (0.5, 1.0, 3.0)
        for delta in (0.25, 1.0, 2.0)
        for t in (1.0, 2.0, 5.0)
    ]
    return log_bound_report(grid)


def cmd_check_identities(args):
    if args.family == "section9":
        return run_section9_checks(args.count, args.seed)
    return run_identity_checks(args.count, args.seed)


# ---- parser ----
def _add_common(p, tower=True, field=False):
    if tower:
        p.add_argument("--tower", default=DEFAULT_TOWER,
                       help="pow:BASE:IMAX or list:n1,n2,... (default %(default)s)")
        p.add_argument("--max-size", type=int, default=DEFAULT_MAX_QUOTIENT_SIZE,
                       help="drop tower indices with larger quotients")
        p.add_argument("--jobs", type=int, default=1, help="evaluate indices concurrently")
    if field:
        p.add_argument("--field", default=DEFAULT_FIELD, help="Q or Fp:P")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--json", action="store_true", help="JSON instead of CSV")
    p.add_argument("--pdf", type=Path, help="also render the report as a PDF")


def _add_group_ring_input(p):
    p.add_argument("--matrix", type=Path, help="group ring matrix JSON file")
    p.add_argument("--poly", help="1x1 matrix given as a Laurent polynomial")
    p.add_argument("--rank", type=int, default=1, help="ambient rank n of Z^n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l2", description="L²-invariants of Z^n-towers: experiments and checks."
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("det-approx", help="columns: normalized_logdet, exact_nullity")
    _add_group_ring_input(p)
    _add_common(p)
    p.set_defaults(func=cmd_det_approx)

    p = sub.add_parser("betti-approx",
                       help="columns: kernel_dim, kernel_dim_exact[, kernel_dim_Fp]")
    _add_group_ring_input(p)
    _add_common(p, field=True)
    p.set_defaults(func=cmd_betti_approx)

    p = sub.add_parser("torsion-growth", help="columns: rho_z, rho_l2, difference")
    p.add_argument("--complex", type=Path, help="complex JSON over a Laurent ring")
    p.add_argument("--torus-matrix", help="mapping torus of M, e.g. 2,1;1,1")
    p.add_argument("--remark", help="non-L²-acyclic example with parameters a,b,k,l,g")
    _add_common(p)
    p.set_defaults(func=cmd_torsion_growth)

    p = sub.add_parser("trace-approx", help="columns: trace_vn_j, trace_pushed_j")
    _add_group_ring_input(p)
    p.add_argument("--degree", type=int, default=2, help="largest power j of A*A")
    _add_common(p)
    p.set_defaults(func=cmd_trace_approx)

    p = sub.add_parser("mapping-torus",
                       help="columns: b0..b3 (divided by d), log_torsion, eigenvalue_oracle")
    p.add_argument("--torus-matrix", help="H_1 action M, e.g. 2,1;1,1")
    p.add_argument("--matrix-file", type=Path, help="integer matrix JSON file")
    p.add_argument("--d-max", type=int, default=40)
    _add_common(p, tower=False, field=True)
    p.set_defaults(func=cmd_mapping_torus)

    p = sub.add_parser("mahler", help="print the Mahler measure (torus quadrature for n ≥ 2)")
    p.add_argument("--poly", required=True)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--grid", type=int,
                   help="torus quadrature grid N (rank 1: also log the N, 2N, 4N sequence)")
    p.set_defaults(func=cmd_mahler)

    p = sub.add_parser("section9", help="the complex with H_1 = Z/g: per-degree invariants")
    for name, default in (("a", 2), ("b", 1), ("k", 3), ("l", 2), ("g", 5)):
        p.add_argument(f"--{name}", type=int, default=default)
    _add_common(p, tower=False)
    p.set_defaults(func=cmd_section9)

    p = sub.add_parser("density", help="property checks of the f_n family")
    p.add_argument("--check", choices=["addendum", "log-bound"], default="addendum")
    p.add_argument("--n", default="2..20", help="range such as 2..20 or list 2,5,9")
    _add_common(p, tower=False)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simplicial", help="per-degree invariants of a simplicial complex")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--fundamental-cycle", action="store_true")
    _add_common(p, tower=False)
    p.set_defaults(func=cmd_simplicial)

    p = sub.add_parser("check-identities",
                       help="torsion identities on random complexes or golden parameters")
    p.add_argument("--family", choices=["random", "section9"], default="random")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, tower=False)
    p.set_defaults(func=cmd_check_identities)

    return parser


def configure_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.verbose)

    try:
        report = args.func(args)
        if report is None:
            return EXIT_OK
        text = write_report(report, getattr(args, "out", None), args.json)
        if getattr(args, "out", None) is None:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
        if getattr(args, "pdf", None):
            generate_pdf_report(report, args.pdf)
    except (UsageError, *USAGE_ERRORS) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except COMPUTATION_ERRORS as e:
        logger.error("%s", e)
        return EXIT_COMPUTATION

    if report.metadata.get("passed") is False:
        logger.error("%s check failed", report.experiment)
        return EXIT_COMPUTATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(cli_main())
