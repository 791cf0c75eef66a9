# core/experiment_runner.py

"""
Experiments over towers of finite quotients.

Each run_* function evaluates every tower index independently (optionally
on a thread pool) and returns an ExperimentReport whose rows are sorted by
index, so serial and parallel sweeps give identical reports.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import pandas as pd

from config.numerics import (
    DEFAULT_MAX_QUOTIENT_SIZE,
    LEHMER_COEFFICIENTS,
    LEHMER_MAHLER_MEASURE,
    REPORT_FLOAT_FORMAT,
)
from core.density_toolkit import (
    addendum_check,
    log_bound_integral,
    log_bound_integral_quadrature,
)
from core.exactalg import IntMatrix, elementary_divisors
from core.groupring import (
    GroupRingMatrix,
    LaurentPoly,
    Quotient,
    determinant_poly,
    involute,
    matmul,
    push,
    trace_pushed,
    trace_vn,
)
from core.spectral import (
    SpectralError,
    int_spectrum,
    kernel_dim_over_field,
    log_detprime,
    log_fk_det_torus,
    log_mahler,
    normalized_logdet,
    spectrum_of,
    vn_kernel_dim,
)
from core.torsion_lab import (
    GRChainComplex,
    IntChainComplex,
    analyze,
    integral_torsion,
    laplacian_torsion,
    mapping_torus_eigenvalue_oracle,
    mapping_torus_polynomial,
    push_complex,
    rho2_finite,
    rho2_pushed,
    section9_complex,
    wang_betti,
)
from core.towers import TowerSpec, resolve
from utils.random_complexes import random_complexes


logger = logging.getLogger(__name__)

TORUS_REFERENCE_GRID = 64


class ExperimentError(Exception):
    pass


# -------------------------------------------------
# Reports
# -------------------------------------------------
@dataclass
class ExperimentReport:
    experiment: str
    columns: list[str]
    rows: list[tuple[int, int, dict]] = field(default_factory=list)
    limit_reference: float | None = None
    limit_provenance: str = "none"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda row: row[0])

    def to_frame(self) -> pd.DataFrame:
        records = [
            {"experiment": self.experiment, "index": index, "quotient_size": size,
             **{c: values.get(c) for c in self.columns}}
            for index, size, values in self.rows
        ]
        df = pd.DataFrame.from_records(
            records, columns=["experiment", "index", "quotient_size", *self.columns]
        )
        df["limit_reference"] = self.limit_reference
        df["limit_provenance"] = self.limit_provenance
        return df

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, float_format=REPORT_FLOAT_FORMAT)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "limit_reference": {
                "value": self.limit_reference,
                "provenance": self.limit_provenance,
            },
            "metadata": self.metadata,
            "rows": [
                {"index": index, "quotient_size": size,
                 **{c: values.get(c) for c in self.columns}}
                for index, size, values in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def column(self, name: str) -> list:
        return [values[name] for _, _, values in self.rows]


def _sweep(
    quotients: list[tuple[int, Quotient]],
    evaluate: Callable[[Quotient], dict],
    jobs: int,
) -> list[tuple[int, int, dict]]:
    def task(item):
        index, quotient = item
        logger.debug("Evaluating index %d (quotient %s, size %d)", index, quotient, quotient.size)
        return index, quotient.size, evaluate(quotient)

    if jobs <= 1:
        return [task(item) for item in quotients]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task, quotients))


def _fraction_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# -------------------------------------------------
# Limit references
# -------------------------------------------------
def _is_lehmer(p: LaurentPoly) -> bool:
    if p.ambient_rank != 1 or not p.has_integer_coefficients():
        return False
    _, coeffs = p.univariate_coefficients()
    target = [Fraction(c) for c in LEHMER_COEFFICIENTS]
    return coeffs in (target, [-c for c in target])


def determinant_reference(A: GroupRingMatrix) -> tuple[float | None, str]:
    """ln det_FK(A) from the determinant polynomial, with its provenance."""
    if A.rows != A.cols or A.rows == 0:
        return None, "none"
    p = determinant_poly(A)
    if p.is_zero():
        return None, "none"
    if _is_lehmer(p):
        return math.log(LEHMER_MAHLER_MEASURE), "paper:lehmer"
    if A.ambient_rank == 1:
        return log_mahler(p), "mahler"
    try:
        return log_fk_det_torus(p, TORUS_REFERENCE_GRID), "torus-quadrature"
    except SpectralError as e:
        logger.warning("No torus reference: %s", e)
        return None, "none"


# -------------------------------------------------
# Experiments
# -------------------------------------------------
def run_det_approx(
    A: GroupRingMatrix,
    tower: TowerSpec,
    max_size: int = DEFAULT_MAX_QUOTIENT_SIZE,
    jobs: int = 1,
) -> ExperimentReport:
    """Per index: ln det′(r_{A[i]})/[G:G_i]."""
    logger.info("det-approx on %dx%d matrix, tower %s", A.rows, A.cols, tower)

    def evaluate(Q):
        S = spectrum_of(A, Q)
        return {"normalized_logdet": normalized_logdet(S), "exact_nullity": S.exact_nullity}

    rows = _sweep(resolve(tower, A.ambient_rank, max_size), evaluate, jobs)
    reference, provenance = determinant_reference(A)
    return ExperimentReport(
        "det-approx", ["normalized_logdet", "exact_nullity"], rows,
        reference, provenance, {"matrix": A.to_json(), "tower": str(tower)},
    )


def run_betti_approx(
    A: GroupRingMatrix,
    tower: TowerSpec,
    field="Q",
    max_size: int = DEFAULT_MAX_QUOTIENT_SIZE,
    jobs: int = 1,
) -> ExperimentReport:
    """Per index: dim ker(r_{A[i]})/[G:G_i] over ℚ, and over F_p when asked."""
    logger.info("betti-approx on %dx%d matrix, tower %s, field %s",
                A.rows, A.cols, tower, field)
    columns = ["kernel_dim", "kernel_dim_exact"]
    over_prime = field not in ("Q", "q", "QQ")
    if over_prime:
        columns += [f"kernel_dim_F{field}"]

    def evaluate(Q):
        exact = vn_kernel_dim(A, Q)
        values = {"kernel_dim": float(exact), "kernel_dim_exact": _fraction_text(exact)}
        if over_prime:
            values[f"kernel_dim_F{field}"] = float(kernel_dim_over_field(A, Q, field))
        return values

    rows = _sweep(resolve(tower, A.ambient_rank, max_size), evaluate, jobs)
    return ExperimentReport(
        "betti-approx", columns, rows,
        metadata={"matrix": A.to_json(), "tower": str(tower), "field": str(field)},
    )


def run_torsion_growth(
    C: GRChainComplex,
    tower: TowerSpec,
    max_size: int = DEFAULT_MAX_QUOTIENT_SIZE,
    jobs: int = 1,
) -> ExperimentReport:
    """Per index: ρ^ℤ/n, ρ^(2)/n and (ρ^ℤ − ρ^(2))/n for the pushed complex."""
    if C.ambient_rank != 1:
        raise ExperimentError(
            f"Torsion growth supports complexes over Z[Z] only, got rank {C.ambient_rank}"
        )
    logger.info("torsion-growth on complex with ranks %s, tower %s", C.ranks, tower)

    def evaluate(Q):
        rho_z = integral_torsion(push_complex(C, Q)).value
        rho_l2 = rho2_pushed(C, Q)
        n = Q.size
        return {
            "rho_z": rho_z / n,
            "rho_l2": rho_l2 / n,
            "difference": (rho_z - rho_l2) / n,
        }

    rows = _sweep(resolve(tower, C.ambient_rank, max_size), evaluate, jobs)
    reference, provenance = None, "none"
    if len(C.differentials) == 1:
        reference, provenance = determinant_reference(C.differentials[0])
    return ExperimentReport(
        "torsion-growth", ["rho_z", "rho_l2", "difference"], rows,
        reference, provenance, {"ranks": list(C.ranks), "tower": str(tower)},
    )


def run_trace_approx(
    A: GroupRingMatrix,
    tower: TowerSpec,
    poly_degree: int,
    max_size: int = DEFAULT_MAX_QUOTIENT_SIZE,
    jobs: int = 1,
) -> ExperimentReport:
    """Per index and j ≤ poly_degree: tr_vn(Bʲ) against tr(push(Bʲ)), B = A*A."""
    if poly_degree < 0:
        raise ExperimentError(f"Polynomial degree must be ≥ 0, got {poly_degree}")
    B = matmul(involute(A), A)
    powers = [GroupRingMatrix.identity(A.ambient_rank, B.rows)]
    for _ in range(poly_degree):
        powers.append(matmul(powers[-1], B))
    exact = [trace_vn(P) for P in powers]

    columns = []
    for j in range(poly_degree + 1):
        columns += [f"trace_vn_{j}", f"trace_pushed_{j}"]

    def evaluate(Q):
        values = {}
        for j, P in enumerate(powers):
            values[f"trace_vn_{j}"] = float(exact[j])
            values[f"trace_pushed_{j}"] = float(trace_pushed(push(P, Q)))
        return values

    rows = _sweep(resolve(tower, A.ambient_rank, max_size), evaluate, jobs)
    return ExperimentReport(
        "trace-approx", columns, rows,
        metadata={"matrix": A.to_json(), "tower": str(tower), "poly_degree": poly_degree},
    )


def run_mapping_torus(M: IntMatrix, d_max: int, field="Q") -> ExperimentReport:
    """Per d ≤ d_max: Betti numbers of T_{f^d} over the field, divided by d,
    and ln|tors coker(I − Mᵈ)|/d next to the eigenvalue oracle.
    """
    if M.rows != M.cols:
        raise ExperimentError(f"Mapping torus needs a square matrix, got {M.rows}x{M.cols}")
    if d_max < 1:
        raise ExperimentError(f"d_max must be ≥ 1, got {d_max}")

    rows = []
    identity = IntMatrix.identity(M.rows)
    for d in range(1, d_max + 1):
        values = {f"b{k}": wang_betti(M, d, field, k) / d for k in range(4)}
        divisors = elementary_divisors(identity - M.power(d))
        torsion = math.prod(x for x in divisors if x > 1)
        values["log_torsion"] = math.log(torsion) / d
        values["eigenvalue_oracle"] = (
            mapping_torus_eigenvalue_oracle(M, d) if all(divisors) else None
        )
        rows.append((d, d, values))

    reference = log_mahler(mapping_torus_polynomial(M))
    return ExperimentReport(
        "mapping-torus",
        ["b0", "b1", "b2", "b3", "log_torsion", "eigenvalue_oracle"],
        rows, reference, "mahler",
        {"matrix": M.to_json(), "field": str(field)},
    )


# -------------------------------------------------
# Analyses and identity checks
# -------------------------------------------------
IDENTITY_TOLERANCE = 1e-8
SECTION9_TOLERANCE = 1e-9


def analysis_report(name: str, C: IntChainComplex, metadata: dict | None = None) -> ExperimentReport:
    """One row per degree n of an integer complex (index = n, quotient_size = 1)."""
    report = analyze(C)
    rows = []
    for n in C.degrees():
        rows.append((n, 1, {
            "rank": C.rank(n),
            "homology": str(report.homology[n]),
            "torsion_order": report.torsion_orders[n],
            "log_detprime": log_detprime(int_spectrum(C.differential(n))) if n else 0.0,
            "regulator": report.regulators[n],
            "laplacian_det": report.laplacian_dets[n],
        }))
    return ExperimentReport(
        name,
        ["rank", "homology", "torsion_order", "log_detprime", "regulator", "laplacian_det"],
        rows,
        metadata={**(metadata or {}), "analysis": report.to_dict()},
    )


def run_identity_checks(count: int, seed: int = 0) -> ExperimentReport:
    """ρ^ℤ − ρ^(2) − Σ(−1)ⁿRₙ and the Laplacian formula on random complexes."""
    rows = []
    for i, C in enumerate(random_complexes(count, seed=seed)):
        report = analyze(C)
        rows.append((i, 1, {
            "ranks": "/".join(map(str, C.ranks)),
            "rho_z": report.rho_z,
            "rho_l2": report.rho_l2,
            "identity_defect": report.identity_defect,
            "laplacian_defect": report.laplacian_rho - report.rho_l2,
        }))
    worst = max(
        (max(abs(v["identity_defect"]), abs(v["laplacian_defect"])) for _, _, v in rows),
        default=0.0,
    )
    return ExperimentReport(
        "check-identities",
        ["ranks", "rho_z", "rho_l2", "identity_defect", "laplacian_defect"],
        rows,
        metadata={"count": count, "seed": seed, "worst_defect": worst,
                  "passed": worst <= IDENTITY_TOLERANCE},
    )


def _random_coprime_pair(rng) -> tuple[int, int]:
    while True:
        x, y = (int(v) for v in rng.integers(-9, 10, size=2))
        if math.gcd(x, y) == 1:
            return x, y


def run_section9_checks(count: int, seed: int = 0) -> ExperimentReport:
    """Determinant and Laplacian identities of the golden complex on random parameters."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(count):
        a, b = _random_coprime_pair(rng)
        k, l = _random_coprime_pair(rng)
        g = int(rng.integers(1, 10))
        C = section9_complex(a, b, k, l, g)
        ab, kl = math.log(a * a + b * b), math.log(k * k + l * l)
        expected = (ab / 2, math.log(g) + (ab + kl) / 2, kl / 2)
        observed = [log_detprime(int_spectrum(C.differential(n))) for n in (1, 2, 3)]
        rho = rho2_finite(C)
        rows.append((i, 1, {
            "parameters": f"{a},{b},{k},{l},{g}",
            "detprime_error": max(abs(o - e) for o, e in zip(observed, expected)),
            "laplacian_error": abs(laplacian_torsion(C) - rho),
            "torsion_error": abs(integral_torsion(C).value - rho),
        }))
    worst = max(
        (max(v["detprime_error"], v["laplacian_error"], v["torsion_error"])
         for _, _, v in rows),
        default=0.0,
    )
    return ExperimentReport(
        "check-section9",
        ["parameters", "detprime_error", "laplacian_error", "torsion_error"],
        rows,
        metadata={"count": count, "seed": seed, "worst_error": worst,
                  "passed": worst <= SECTION9_TOLERANCE},
    )


def density_report(ns) -> ExperimentReport:
    """Property table of the f_n family (index = n)."""
    df = addendum_check(ns)
    columns = [c for c in df.columns if c != "n"]
    rows = [
        (int(record["n"]), 1, {c: _plain(record[c]) for c in columns})
        for record in df.to_dict(orient="records")
    ]
    return ExperimentReport(
        "density-addendum", columns, rows,
        metadata={"passed": bool(df["passed"].all()) if len(df) else True},
    )


def log_bound_report(grid) -> ExperimentReport:
    """Closed form against quadrature for ∫ C/(λ(−ln λ)^{1+δ}) over a (C, δ, ε) grid."""
    rows = []
    for i, (C, delta, eps) in enumerate(grid):
        closed = log_bound_integral(C, delta, eps)
        oracle = log_bound_integral_quadrature(C, delta, eps)
        rows.append((i, 1, {"C": C, "delta": delta, "epsilon": eps,
                            "closed_form": closed, "quadrature": oracle,
                            "error": abs(closed - oracle)}))
    worst = max((v["error"] for _, _, v in rows), default=0.0)
    return ExperimentReport(
        "density-log-bound",
        ["C", "delta", "epsilon", "closed_form", "quadrature", "error"],
        rows,
        metadata={"worst_error": worst, "passed": worst <= 1e-8},
    )


def _plain(value):
    # numpy scalars from pandas records
    return value.item() if hasattr(value, "item") else value
