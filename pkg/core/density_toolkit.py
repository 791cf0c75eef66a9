# core/density_toolkit.py

"""
The counterexample family f_n of spectral density functions, its envelope,
and the integrals that separate "C/(−ln λ)^{1+δ}" bounds (finite) from the
plain "C/(−ln λ)" bound (divergent).

Every integral has a closed form (primary) and a scipy quadrature twin
(oracle). Quadratures run in t = −ln λ, where all integrands are bounded.
"""

import logging
import math

import numpy as np
import pandas as pd
from scipy.integrate import quad

from config.numerics import (
    QUADRATURE_ABS_TOLERANCE,
    QUADRATURE_REL_TOLERANCE,
    QUADRATURE_SUBDIVISIONS,
)


logger = logging.getLogger(__name__)

INV_E = math.exp(-1.0)


class DensityToolkitError(Exception):
    pass


# -------------------------------------------------
# The family f_n
# -------------------------------------------------
class PiecewiseDensity:
    """f_n on [0,1] with breakpoints e^{−3n} < e^{−2n} < e^{−n} < 1/n + e^{−n}."""

    def __init__(self, n: int):
        if int(n) != n or n < 2:
            raise DensityToolkitError(f"f_n needs an integer n ≥ 2, got {n}")
        self.n = int(n)
        a, b, e = math.exp(-3 * n), math.exp(-2 * n), math.exp(-n)
        c = 1.0 / n + e
        self.breakpoints = (a, b, e, c)
        # linear piece on [a, b]: α + βλ, joining (a, a) to (b, 1/(2n) + b)
        self.beta = 1.0 + 1.0 / (2 * n * (b - a))
        self.alpha = -a / (2 * n * (b - a))

    @property
    def plateau(self) -> float:
        return self.breakpoints[3]

    def branches(self):
        c = self.plateau
        return (
            lambda lam: lam,
            lambda lam: self.alpha + self.beta * lam,
            lambda lam: 1.0 / (-math.log(lam)) + lam,
            lambda lam: c,
            lambda lam: lam,
        )

    def branch_index(self, lam: float) -> int:
        for k, point in enumerate(self.breakpoints):
            if lam <= point:
                return k
        return 4

    def __call__(self, lam: float) -> float:
        if not 0.0 <= lam <= 1.0:
            raise DensityToolkitError(f"λ={lam} outside [0, 1]")
        if lam == 0.0:
            return 0.0
        return self.branches()[self.branch_index(lam)](lam)

    def evaluate_array(self, lams: np.ndarray) -> np.ndarray:
        lams = np.asarray(lams, dtype=float)
        if np.any((lams < 0) | (lams > 1)):
            raise DensityToolkitError("λ values outside [0, 1]")
        a, b, e, c = self.breakpoints
        safe = np.clip(lams, 1e-300, 1.0 - 1e-16)
        return np.select(
            [lams <= a, lams <= b, lams <= e, lams <= c],
            [lams, self.alpha + self.beta * lams, 1.0 / (-np.log(safe)) + lams, c],
            default=lams,
        )

    def continuity_error(self) -> float:
        branches = self.branches()
        return max(
            abs(branches[k](point) - branches[k + 1](point))
            for k, point in enumerate(self.breakpoints)
        )


def f_eval(n: int, lam: float) -> float:
    return PiecewiseDensity(n)(lam)


# ---- Integrals of f_n ----
def _excess_piece(f: PiecewiseDensity, k: int, lo: float, hi: float) -> float:
    # ∫_lo^hi (f_n(λ) − λ)/λ dλ inside branch k
    if hi <= lo or k in (0, 4):
        return 0.0
    if k == 1:
        return f.alpha * math.log(hi / lo) + (f.beta - 1.0) * (hi - lo)
    if k == 2:
        return math.log(-math.log(lo)) - math.log(-math.log(hi))
    return f.plateau * math.log(hi / lo) - (hi - lo)


def f_excess_integral(n: int, lo: float, hi: float) -> float:
    """∫_lo^hi (f_n(λ) − λ)/λ dλ for 0 ≤ lo ≤ hi ≤ 1, closed form."""
    if not 0.0 <= lo <= hi <= 1.0:
        raise DensityToolkitError(f"Bad interval [{lo}, {hi}]")
    f = PiecewiseDensity(n)
    edges = (0.0,) + f.breakpoints + (1.0,)
    total = []
    for k in range(5):
        left, right = max(lo, edges[k]), min(hi, edges[k + 1])
        total.append(_excess_piece(f, k, left, right))
    return math.fsum(total)


def f_integral(n: int) -> float:
    """∫₀₊¹ f_n(λ)/λ dλ = 1 + ∫₀₊¹ (f_n(λ) − λ)/λ dλ."""
    return 1.0 + f_excess_integral(n, 0.0, 1.0)


def f_integral_closed_form(n: int) -> float:
    """The same integral summed into one expression."""
    if n < 2:
        raise DensityToolkitError(f"f_n needs n ≥ 2, got {n}")
    c = 1.0 / n + math.exp(-n)
    return (
        1.0 - 1.0 / (2 * n) - 1.0 / (2 * math.expm1(n))
        + math.log(2.0) + c * math.log(math.exp(n) / n + 1.0)
    )


def _quad(func, lo, hi) -> float:
    value, _ = quad(
        func, lo, hi,
        epsabs=QUADRATURE_ABS_TOLERANCE,
        epsrel=QUADRATURE_REL_TOLERANCE,
        limit=QUADRATURE_SUBDIVISIONS,
    )
    return value


def f_integral_quadrature(n: int) -> float:
    """Adaptive quadrature of ∫₀^∞ f_n(e^{−t}) dt, split at the breakpoints."""
    f = PiecewiseDensity(n)
    cuts = [0.0] + sorted(-math.log(p) for p in f.breakpoints) + [math.inf]
    integrand = lambda t: f(math.exp(-t))
    return math.fsum(_quad(integrand, lo, hi) for lo, hi in zip(cuts, cuts[1:]))


def f_excess_integral_quadrature(n: int, lo: float, hi: float) -> float:
    f = PiecewiseDensity(n)
    t_hi = math.inf if lo == 0.0 else -math.log(lo)
    t_lo = -math.log(hi)
    cuts = sorted({t_lo, t_hi} | {-math.log(p) for p in f.breakpoints
                                   if t_lo < -math.log(p) < t_hi})
    integrand = lambda t: f(math.exp(-t)) - math.exp(-t)
    return math.fsum(_quad(integrand, x, y) for x, y in zip(cuts, cuts[1:]))


# -------------------------------------------------
# Envelope and logarithmic bounds
# -------------------------------------------------
def sup_envelope(lam: float) -> float:
    """sup_n f_n(λ) = 1/(−ln λ) + λ on (0, e^{−1}]."""
    if not 0.0 < lam <= INV_E:
        raise DensityToolkitError(f"λ={lam} outside (0, e^-1]")
    return 1.0 / (-math.log(lam)) + lam


def envelope_max_over_family(lam: float, n_max: int) -> float:
    return max(f_eval(n, lam) for n in range(2, n_max + 1))


def _check_epsilon(eps: float, upper: float):
    if not 0.0 < eps < upper:
        raise DensityToolkitError(f"ε={eps} outside (0, {upper})")


def envelope_divergence(epsilons) -> list[float]:
    """∫_ε^{e^{−1}} sup_n f_n(λ)/λ dλ = e^{−1} − ε + ln(−ln ε), per ε."""
    out = []
    for eps in epsilons:
        _check_epsilon(eps, INV_E)
        out.append(INV_E - eps + math.log(-math.log(eps)))
    return out


def envelope_integral_quadrature(eps: float) -> float:
    _check_epsilon(eps, INV_E)
    return _quad(lambda t: 1.0 / t + math.exp(-t), 1.0, -math.log(eps))


def log_bound_integral(C: float, delta: float, eps: float) -> float:
    """∫₀₊^ε C/(λ(−ln λ)^{1+δ}) dλ = (C/δ)(−ln ε)^{−δ}."""
    if delta <= 0:
        raise DensityToolkitError(
            f"δ must be positive, got {delta} (δ = 0 diverges)"
        )
    if C <= 0:
        raise DensityToolkitError(f"C must be positive, got {C}")
    _check_epsilon(eps, 1.0)
    return (C / delta) * (-math.log(eps)) ** (-delta)


def log_bound_integral_quadrature(C: float, delta: float, eps: float) -> float:
    _check_epsilon(eps, 1.0)
    return _quad(lambda t: C * t ** (-1.0 - delta), -math.log(eps), math.inf)


def divergence_of_inverse_log(C: float, eps: float, xs) -> list[float]:
    """∫_x^ε C/(λ(−ln λ)) dλ = C(ln(−ln x) − ln(−ln ε)), per x."""
    if C <= 0:
        raise DensityToolkitError(f"C must be positive, got {C}")
    _check_epsilon(eps, 1.0)
    out = []
    for x in xs:
        if not 0.0 < x < eps:
            raise DensityToolkitError(f"x={x} outside (0, ε={eps})")
        out.append(C * (math.log(-math.log(x)) - math.log(-math.log(eps))))
    return out


def divergence_of_inverse_log_quadrature(C: float, eps: float, x: float) -> float:
    return _quad(lambda t: C / t, -math.log(eps), -math.log(x))


# -------------------------------------------------
# Property table
# -------------------------------------------------
LOWER_BOUND = math.log(2.0) + 1.0
UPPER_BOUND = 4.0


def _lambda_grid(f: PiecewiseDensity, points: int = 4000) -> np.ndarray:
    a = f.breakpoints[0]
    grid = np.geomspace(a * 1e-3, 1.0, points)
    extra = [p * s for p in f.breakpoints for s in (1 - 1e-9, 1.0, 1 + 1e-9)]
    return np.unique(np.clip(np.concatenate([[0.0], grid, extra, [1.0]]), 0.0, 1.0))


def addendum_check(ns) -> pd.DataFrame:
    """One row per n with every property of the family and whether it holds."""
    records = []
    for n in ns:
        f = PiecewiseDensity(n)
        lams = _lambda_grid(f)
        values = f.evaluate_array(lams)
        interior = (lams > 0) & (lams < 1)
        inner = lams[interior]
        bound = 2.0 / (-np.log(inner))

        a, b, e, c = f.breakpoints
        middle = lams[(lams >= b) & (lams <= e)]
        tail = lams[lams > c]
        integral = f_integral(n)
        quadrature = f_integral_quadrature(n)
        envelope = envelope_divergence([math.exp(-math.e), math.exp(-math.e ** 2)])

        record = {
            "n": n,
            "continuity_error": f.continuity_error(),
            "monotone": bool(np.all(np.diff(values) >= -1e-15)),
            "endpoints": f(0.0) == 0.0 and f(1.0) == 1.0,
            "identity_beyond_plateau": bool(np.all(f.evaluate_array(tail) == tail)),
            "sandwich": bool(
                np.all(values[interior] >= inner - 1e-15)
                and np.all(values[interior] <= bound + 1e-12)
            ),
            "envelope_attained": bool(np.allclose(
                f.evaluate_array(middle),
                1.0 / (-np.log(middle)) + middle,
                rtol=0, atol=1e-12,
            )),
            "envelope_diverges": envelope[1] > envelope[0],
            "integral": integral,
            "quadrature_error": abs(integral - quadrature),
            "closed_form_error": abs(integral - f_integral_closed_form(n)),
            "excess_middle": f_excess_integral(n, b, e),
        }
        record["lower_bound"] = integral >= LOWER_BOUND
        record["exceeds_limit_integral"] = integral > 1.0
        record["upper_bound"] = integral <= UPPER_BOUND
        record["passed"] = (
            record["continuity_error"] <= 1e-12
            and record["monotone"]
            and record["endpoints"]
            and record["identity_beyond_plateau"]
            and record["sandwich"]
            and record["envelope_attained"]
            and record["envelope_diverges"]
            and record["lower_bound"]
            and record["exceeds_limit_integral"]
            and record["upper_bound"]
            and record["quadrature_error"] <= 1e-8
            and record["closed_form_error"] <= 1e-12
            and abs(record["excess_middle"] - math.log(2.0)) <= 1e-12
        )
        logger.debug("f_%d: integral %.12g, passed=%s", n, integral, record["passed"])
        records.append(record)
    return pd.DataFrame.from_records(records)
