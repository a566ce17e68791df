import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from manifold_ipm.besov import CoefficientField, analyze_measure, ipm_dual
from manifold_ipm.errors import DegenerateDataError, InvalidParameterError
from manifold_ipm.interpolation import (
    DensityPairFamily,
    ExperimentSpec,
    FamilyRow,
    check_classical,
    check_coeff_interpolation,
    family_pair,
    fit_exponent,
    predicted_exponent,
    run_family,
)
from manifold_ipm.wavelets import TensorIndex, level_types


def admissible_field(seed, beta, p=1, J=6, count=60):
    """Random field with |a(j,l,w)| <= 2^{-j(beta+p/2)} (1+j)^{-2}."""
    rng = np.random.default_rng(seed)
    entries = {}
    for _ in range(count):
        j = int(rng.integers(0, J + 1))
        l = int(rng.choice(level_types(j, p)))
        w = tuple(int(v) for v in rng.integers(-8, 8, p))
        bound = 2.0 ** (-j * (beta + p / 2)) * (1.0 + j) ** -2
        entries[TensorIndex(j, l, w)] = float(rng.uniform(-bound, bound))
    return CoefficientField.from_entries(p, J, entries)


def test_predicted_exponent_cases():
    assert predicted_exponent(1, 1, 2) == pytest.approx(2 / 3)
    assert predicted_exponent(1, 0.5, 2) == pytest.approx(1 / 3)
    assert predicted_exponent(1, 0.5, 1) == pytest.approx(0.5)
    assert predicted_exponent(0, 1, 2) == 0.5
    with pytest.raises(InvalidParameterError):
        predicted_exponent(0, 2, 1)
    with pytest.raises(InvalidParameterError):
        predicted_exponent(0, 0, 1)


@settings(max_examples=100)
@given(st.floats(0, 5), st.floats(0.01, 1), st.floats(1, 6))
def test_predicted_exponent_continuous_at_branch_boundaries(beta, gamma, eta):
    # gamma = 1 boundary: first and second cases agree
    assert predicted_exponent(beta, 1.0, eta) == pytest.approx((beta + 1) / (beta + eta))
    # eta = 1 boundary: second and third cases agree
    assert predicted_exponent(beta, gamma, 1.0) == pytest.approx(gamma)
    below = predicted_exponent(beta, 1.0 - 1e-9, eta)
    assert below == pytest.approx(predicted_exponent(beta, 1.0, eta), abs=1e-8)


def test_spec_validation():
    ok = dict(family="perturbed_circle", indices=(4, 8, 16), pairs=((1, 2),))
    ExperimentSpec(**ok)
    bad = [
        dict(ok, indices=(4, 8)),
        dict(ok, indices=(8, 4, 16)),
        dict(ok, indices=(4, 4, 8)),
        dict(ok, pairs=((2, 1),)),
        dict(ok, pairs=((0, 1),)),
        dict(ok, J=13),
        dict(ok, indices=(16, 32, 128)),
        dict(ok, family="torus"),
        dict(ok, family="circle_radius", indices=(-1.5, 0.1, 0.2)),
    ]
    for kw in bad:
        with pytest.raises(InvalidParameterError):
            ExperimentSpec(**kw)


def test_spec_defaults():
    s = ExperimentSpec("perturbed_circle", (4, 8, 16, 32), ((1, 2),))
    assert s.level == 8 and s.wavelet_order == 5
    r = ExperimentSpec("circle_radius", (0.05, 0.1, 0.2), ((0.5, 1),))
    assert r.level == 12 and r.wavelet_order == 4


def test_fit_on_exact_power_law():
    rows = [(i, 1.0, 2.0, d**0.5, d) for i, d in enumerate([0.1, 0.02, 0.003, 4e-4])]
    fit = fit_exponent(rows)
    assert fit.slope == pytest.approx(0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)


def test_fit_degenerate():
    with pytest.raises(DegenerateDataError):
        fit_exponent([(0, 1, 2, 0.1, 0.01), (1, 1, 2, 0.0, 0.001), (2, 1, 2, 0.2, 0.3)])
    with pytest.raises(DegenerateDataError):
        fit_exponent([(0, 1, 2, 0.1, 0.01), (1, 1, 2, 0.05, 0.001)])
    with pytest.raises(DegenerateDataError):
        fit_exponent([(0, 1, 2, 0.1, 0.01)] * 3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-6, 1.0), st.floats(1e-6, 1.0)), min_size=3, max_size=8,
                unique_by=lambda t: t[1]),
       st.floats(1e-3, 1e3))
def test_fit_slope_invariant_under_rescaling(pairs, scale):
    rows = [(i, 1.0, 2.0, a, b) for i, (a, b) in enumerate(pairs)]
    if np.ptp(np.log([b for _, b in pairs])) < 1e-6:
        return
    base = fit_exponent(rows)
    scaled = fit_exponent([(i, g, e, a * scale, b * scale) for i, g, e, a, b in rows])
    assert scaled.slope == pytest.approx(base.slope, rel=1e-6, abs=1e-6)
    assert 0.0 <= base.r_squared <= 1.0


def test_coeff_interpolation_zero_field():
    rep = check_coeff_interpolation(CoefficientField(1, 4, {}), 1.0, 1.0, 2.0)
    assert rep == (0.0, 0.0, True)


@pytest.mark.parametrize("beta,gamma,alpha", [(1, 1, 2), (0.5, 0.5, 3), (2, 1.5, 2.5)])
def test_coeff_interpolation_single_entry(beta, gamma, alpha):
    f = CoefficientField.from_entries(2, 6, {TensorIndex(5, 2, (3, -1)): 0.37})
    lhs, rhs, holds = check_coeff_interpolation(f, beta, gamma, alpha)
    assert holds
    assert rhs / lhs == pytest.approx(6.0 ** (2 * (alpha - gamma) / (beta + alpha)), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 2), st.floats(0.1, 2), st.floats(0.05, 2))
def test_coeff_interpolation_holds_for_random_fields(seed, beta, gamma, gap):
    f = admissible_field(seed, beta, p=2)
    assert check_coeff_interpolation(f, beta, gamma, gamma + gap).holds


def test_coeff_interpolation_ordering():
    with pytest.raises(InvalidParameterError):
        check_coeff_interpolation(CoefficientField(1, 2, {}), 1.0, 2.0, 1.0)


def test_circle_against_itself_is_zero(db4):
    a, b = family_pair("circle_radius", 0.0, nodes=128)
    A, B = analyze_measure(a, db4, 6), analyze_measure(b, db4, 6)
    assert ipm_dual(A, B, 0.5) == 0.0 and ipm_dual(A, B, 1.0) == 0.0


@pytest.fixture(scope="module")
def oscillating_rows():
    spec = ExperimentSpec("perturbed_circle", (4, 8, 16, 32), ((1.0, 2.0), (0.5, 2.0)), J=10)
    return run_family(spec)


def test_rows_ordered_and_monotone(oscillating_rows):
    assert [r.index for r in oscillating_rows[::2]] == [4, 8, 16, 32]
    for r in oscillating_rows:
        assert isinstance(r, FamilyRow) and r.d_gamma >= r.d_eta > 0


def test_lipschitz_distance_halves_per_doubling(oscillating_rows):
    d1 = [r.d_gamma for r in oscillating_rows if r.gamma == 1.0]
    for a, b in zip(d1, d1[1:]):
        assert a / b == pytest.approx(2.0, rel=0.2)


def test_half_smoothness_slope(oscillating_rows):
    # sub-Lipschitz distance decays like n^{-gamma (beta+1)}
    d = [r.d_gamma for r in oscillating_rows if r.gamma == 0.5]
    slope = np.polyfit(np.log([4, 8, 16, 32]), np.log(d), 1)[0]
    assert abs(slope + 0.5) <= 0.1


def test_run_family_worker_invariance():
    spec = ExperimentSpec("perturbed_circle", (2, 3, 4), ((1.0, 2.0),), J=5, nodes=64)
    assert run_family(spec, workers=1) == run_family(spec, workers=3)


def test_radius_ratio_at_unit_smoothness():
    spec = ExperimentSpec("circle_radius", (0.1, 0.15, 0.2), ((1.0, 1.0),), J=10)
    rows = run_family(spec)
    ratio = rows[2].d_eta / rows[0].d_eta
    # eps log(1/eps) behaviour of the integer-smoothness surrogate
    assert ratio == pytest.approx(2 * math.log(5) / math.log(10), rel=0.1)
    assert 1.3 < ratio < 2.0


def test_classical_identical_densities():
    rep = check_classical(DensityPairFamily(amplitude=0.0, nodes=512), 1, 1, 2, J=6)
    assert all(r.d_gamma == 0 and r.d_eta == 0 for r in rep.rows)
    assert rep.fit is None


def test_classical_single_scale():
    with pytest.raises(DegenerateDataError):
        check_classical(DensityPairFamily(scales=(0.1,)), 1, 1, 2)


def test_classical_slope():
    rep = check_classical(DensityPairFamily(), 1, 1, 2, J=10)
    assert rep.predicted == pytest.approx(2 / 3)
    assert abs(rep.fit.slope - 2 / 3) <= 0.1
