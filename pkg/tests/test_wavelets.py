import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from manifold_ipm.errors import InvalidParameterError
from manifold_ipm.wavelets import (
    TensorIndex,
    active_indices,
    build_family,
    daubechies_filter,
    default_order,
    eval_tensor,
    filter_residuals,
    gram_errors,
    level_types,
    partition_of_unity_error,
    two_scale_error,
)

SQ3 = math.sqrt(3.0)
# closed-form db2 taps
DB2 = np.array([1 + SQ3, 3 + SQ3, 3 - SQ3, 1 - SQ3]) / (4 * math.sqrt(2.0))


def test_db2_filter_matches_closed_form():
    assert np.allclose(daubechies_filter(2), DB2, atol=1e-14)


def test_haar_filter():
    assert np.allclose(daubechies_filter(1), [2**-0.5, 2**-0.5], atol=1e-15)


@pytest.mark.parametrize("order", range(1, 9))
def test_filter_identities(order):
    res = filter_residuals(daubechies_filter(order))
    assert max(res.values()) < 1e-12
    assert len(daubechies_filter(order)) == 2 * order


def test_db2_scaling_values_at_dyadics(db2):
    # phi(1) = (1+sqrt3)/2, phi(2) = (1-sqrt3)/2, phi(1/2) = (2+sqrt3)/4
    assert db2.phi(1.0) == pytest.approx((1 + SQ3) / 2, abs=1e-12)
    assert db2.phi(2.0) == pytest.approx((1 - SQ3) / 2, abs=1e-12)
    assert db2.phi(0.5) == pytest.approx((2 + SQ3) / 4, abs=1e-12)


def test_haar_functions(haar):
    x = np.array([0.0, 0.25, 0.5, 0.75, 0.999, 1.0, -0.1])
    assert np.allclose(haar.phi(x), [1, 1, 1, 1, 1, 0, 0], atol=1e-14, rtol=0)
    assert np.allclose(haar.psi(x), [1, 1, -1, -1, -1, 0, 0], atol=1e-14, rtol=0)


@pytest.mark.parametrize("order", [1, 2, 4, 6])
def test_partition_and_two_scale(order):
    fam = build_family(order)
    assert partition_of_unity_error(fam) <= 4 * 2.0**-fam.cascade_depth
    assert two_scale_error(fam) < 1e-10


def test_gram_db4(db4):
    assert gram_errors(db4, 50, seed=3).max() < 1e-4


def test_support_vanishing(db4):
    x = np.array([-1e-9, 7.0, 7.5, -3.0])
    assert np.all(db4.phi(x) == 0) and np.all(db4.psi(x) == 0)
    assert db4.support == 7


def test_wavelet_has_zero_mean(db4):
    x = np.arange(len(db4.wavelet_table)) * 2.0**-db4.cascade_depth
    assert abs(np.trapezoid(db4.psi(x), x)) < 1e-10


def test_tables_are_read_only(db4):
    with pytest.raises(ValueError):
        db4.scaling_table[0] = 1.0


def test_invalid_orders():
    with pytest.raises(InvalidParameterError):
        build_family(0)
    with pytest.raises(InvalidParameterError):
        build_family(4, cascade_depth=3)


def test_default_order():
    assert default_order(2) == 5
    assert default_order(1.5) == 5
    assert default_order(1) == 4


def test_level_types_and_index_validity():
    assert level_types(0, 2) == [1, 2, 3, 4]
    assert level_types(3, 2) == [1, 2, 3]
    assert TensorIndex(0, 4, (0, 0)).is_valid()
    assert not TensorIndex(1, 4, (0, 0)).is_valid()
    assert not TensorIndex(1, 0, (0, 0)).is_valid()


def test_eval_tensor_is_product(db4):
    idx = TensorIndex(2, 1, (3, -1))  # wavelet on axis 0, scaling on axis 1
    x = np.array([1.1, 0.2])
    expected = 2.0**2 * db4.psi(4 * 1.1 - 3) * db4.phi(4 * 0.2 + 1)
    assert eval_tensor(db4, idx, x) == pytest.approx(float(expected), rel=1e-14)
    batch = eval_tensor(db4, idx, np.array([x, x]))
    assert batch.shape == (2,)


def test_active_indices_empty_box(db4):
    assert active_indices(db4, 0, (np.array([1.0]), np.array([0.0]))) == []


def test_active_indices_order(db4):
    out = active_indices(db4, 1, (np.array([0.0, 0.0]), np.array([0.0, 0.0])))
    keys = [(i.l, i.w) for i in out]
    assert keys == sorted(keys)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-3, 3, allow_nan=False),
    st.floats(-3, 3, allow_nan=False),
    st.integers(0, 3),
)
def test_active_indices_cover_nonzero_functions(x0, x1, j):
    fam = build_family(2, 8)
    x = np.array([x0, x1])
    active = set(active_indices(fam, j, (x, x)))
    S = fam.support
    base = np.floor(x * 2**j).astype(int)
    for l in level_types(j, 2):
        for a in range(base[0] - S - 1, base[0] + 2):
            for b in range(base[1] - S - 1, base[1] + 2):
                idx = TensorIndex(j, l, (a, b))
                if eval_tensor(fam, idx, x) != 0.0:
                    assert idx in active
