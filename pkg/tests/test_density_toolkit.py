import math

import numpy as np
import pytest

from core.density_toolkit import (
    INV_E,
    LOWER_BOUND,
    UPPER_BOUND,
    DensityToolkitError,
    PiecewiseDensity,
    addendum_check,
    divergence_of_inverse_log,
    divergence_of_inverse_log_quadrature,
    envelope_divergence,
    envelope_integral_quadrature,
    envelope_max_over_family,
    f_eval,
    f_excess_integral,
    f_excess_integral_quadrature,
    f_integral,
    f_integral_closed_form,
    f_integral_quadrature,
    log_bound_integral,
    log_bound_integral_quadrature,
    sup_envelope,
)


ALL_N = range(2, 61)
SAMPLE_N = [2, 3, 5, 10, 20, 40, 60]


@pytest.mark.parametrize("n", ALL_N)
def test_branches_join_continuously(n):
    assert PiecewiseDensity(n).continuity_error() <= 1e-12


@pytest.mark.parametrize("n", ALL_N)
def test_integral_within_bounds(n):
    value = f_integral(n)
    assert LOWER_BOUND <= value <= UPPER_BOUND
    assert value > 1.0


@pytest.mark.parametrize("n", SAMPLE_N)
def test_closed_form_and_quadrature_agree(n):
    assert f_integral(n) == pytest.approx(f_integral_closed_form(n), abs=1e-12)
    assert f_integral(n) == pytest.approx(f_integral_quadrature(n), abs=1e-8)


@pytest.mark.parametrize("n", SAMPLE_N)
def test_middle_branch_carries_log_two(n):
    f = PiecewiseDensity(n)
    _, b, e, _ = f.breakpoints
    assert f_excess_integral(n, b, e) == pytest.approx(math.log(2.0), abs=1e-12)


def test_excess_integral_on_partial_intervals():
    n = 4
    a, b, e, c = PiecewiseDensity(n).breakpoints
    for lo, hi in [(a / 2, b), (b * 3, c * 1.5), (0.0, e), (e, 1.0)]:
        assert f_excess_integral(n, lo, hi) == pytest.approx(
            f_excess_integral_quadrature(n, lo, hi), abs=1e-9
        )


def test_shape_of_f():
    f = PiecewiseDensity(3)
    a, b, e, c = f.breakpoints
    assert f(0.0) == 0.0
    assert f(1.0) == 1.0
    assert f(a / 2) == a / 2
    assert f((c + 1) / 2) == (c + 1) / 2
    assert f((e + c) / 2) == c
    lams = np.geomspace(a / 10, 1.0, 2000)
    assert np.all(np.diff(f.evaluate_array(lams)) >= -1e-15)


def test_evaluate_array_matches_scalar():
    f = PiecewiseDensity(5)
    lams = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 300)])
    assert np.allclose(f.evaluate_array(lams), [f(x) for x in lams], rtol=0, atol=1e-15)


@pytest.mark.parametrize("bad", [1, 0, 2.5, -3])
def test_family_starts_at_two(bad):
    with pytest.raises(DensityToolkitError):
        PiecewiseDensity(bad)


def test_domain_is_unit_interval():
    with pytest.raises(DensityToolkitError):
        f_eval(3, 1.5)
    with pytest.raises(DensityToolkitError):
        f_excess_integral(3, 0.5, 0.2)


# ---------------- Envelope ----------------
def test_envelope_is_attained_in_family():
    for lam in [1e-3, 1e-5, 1e-8]:
        assert envelope_max_over_family(lam, 30) == pytest.approx(sup_envelope(lam), rel=1e-12)


def test_envelope_partial_integrals_grow_without_bound():
    values = envelope_divergence([math.exp(-math.e), math.exp(-math.e ** 3), math.exp(-math.exp(5))])
    assert values[0] < values[1] < values[2]
    assert values[2] > 5.0


def test_envelope_closed_form_matches_quadrature():
    eps = math.exp(-20.0)
    assert envelope_divergence([eps])[0] == pytest.approx(
        envelope_integral_quadrature(eps), abs=1e-10
    )


def test_envelope_rejects_bad_epsilon():
    with pytest.raises(DensityToolkitError):
        envelope_divergence([0.5])
    with pytest.raises(DensityToolkitError):
        sup_envelope(INV_E * 2)


# ---------------- Logarithmic bounds ----------------
@pytest.mark.parametrize("C", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("eps", [math.exp(-1.0), math.exp(-2.0), math.exp(-5.0)])
def test_log_bound_integral_matches_quadrature(C, delta, eps):
    assert log_bound_integral(C, delta, eps) == pytest.approx(
        log_bound_integral_quadrature(C, delta, eps), abs=1e-8
    )


def test_log_bound_needs_positive_delta():
    with pytest.raises(DensityToolkitError):
        log_bound_integral(1.0, 0.0, 0.1)
    with pytest.raises(DensityToolkitError):
        log_bound_integral(-1.0, 1.0, 0.1)


def test_inverse_log_bound_diverges():
    xs = [1e-5, 1e-50, 1e-300]
    values = divergence_of_inverse_log(1.0, 0.1, xs)
    assert values == sorted(values)
    assert values[0] == pytest.approx(divergence_of_inverse_log_quadrature(1.0, 0.1, xs[0]), abs=1e-10)


# ---------------- Property table ----------------
def test_addendum_check_passes():
    df = addendum_check(range(2, 21))
    assert list(df["n"]) == list(range(2, 21))
    assert df["passed"].all()
    assert (df["continuity_error"] <= 1e-12).all()
