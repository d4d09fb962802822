import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from waverobe.arfima import OutlierSpec, inject_outliers, split_memory
from waverobe.document import _clean, dumps
from waverobe.estimator import default_weights, regress
from waverobe.robust import (_qn_order_stat_fast, _qn_order_stat_naive, EstimatorKind,
                             ScaleSpectrum, scale, scale_cr, scale_mad)
from waverobe.wavelet import daubechies_spec, decompose, num_coeffs

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
vectors = st.integers(5, 120).flatmap(lambda n: arrays(np.float64, n, elements=finite))


@settings(max_examples=300, deadline=None)
@given(vectors, st.sampled_from(["standard", "all-pairs"]))
def test_cr_fast_matches_naive(w, variant):
    a = _qn_order_stat_fast(w, variant)
    b = _qn_order_stat_naive(w, variant)
    assert a == b or abs(a - b) <= 1e-12 * abs(b)


@settings(max_examples=200, deadline=None)
@given(vectors, st.integers(-2 ** 20, 2 ** 20))
def test_cr_translation_by_integers(w, t):
    # integer-valued data and shifts keep every difference exact
    w = np.round(w)
    assert scale_cr(w + t) == scale_cr(w)


@settings(max_examples=200, deadline=None)
@given(vectors, st.sampled_from(["CL", "MAD", "CR"]), st.integers(-20, 20))
def test_scale_equivariance_powers_of_two(w, kind, e):
    # multiplying by 2^e is exact in binary floating point
    c = 2.0 ** e
    assert scale(c * w, kind) == c * c * scale(w, kind)


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_mad_bounded_by_max(w):
    m = scale_mad(w)
    assert 0 <= m <= (1.4827 * np.max(np.abs(w))) ** 2


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.floats(-3, 3), st.floats(1e-3, 1e3), st.integers(1, 6))
def test_regression_exact_on_power_law(ell, d, C, j0):
    j = np.arange(j0, j0 + ell + 1)
    spec = ScaleSpectrum(j0, C * 2.0 ** (2 * d * j), np.ones(ell + 1, int), EstimatorKind.CL)
    assert regress(spec, default_weights(ell)) == pytest.approx(d, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 40))
def test_weight_constraints(ell):
    s, t = default_weights(ell).constraint_residuals()
    assert abs(s) < 1e-12 and abs(t) < 1e-12


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10 ** 6), st.integers(1, 25), st.sampled_from([1, 3, 5, 7, 19]))
def test_num_coeffs_formula(n, j, T):
    expected = max(math.floor(2.0 ** -j * (n - T + 1) - T + 1), 0)
    assert num_coeffs(n, j, T) == expected


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 32), st.integers(300, 3000))
def test_polynomial_annihilation(M, seed, n):
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float) / n
    coeffs = rng.uniform(-1, 1, M)
    x = np.polynomial.polynomial.polyval(t, coeffs)
    pyr = decompose(x, daubechies_spec(M))
    for j in pyr.scales():
        assert np.max(np.abs(pyr[j])) < 1e-8


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20, allow_nan=False))
def test_split_memory_round_trip(d):
    try:
        d0, m = split_memory(d)
    except ValueError:
        assert abs(abs(d - math.floor(d)) - 0.5) < 1e-5
        return
    assert -0.5 < d0 <= 0.5 and d0 + m == pytest.approx(d, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 2000), st.floats(0, 1), st.integers(0, 2 ** 32))
def test_outlier_count_and_distinctness(n, frac, seed):
    x = np.arange(n, dtype=float)
    y, idx = inject_outliers(x, OutlierSpec(frac, 5.0, seed))
    assert idx.size == math.floor(frac * n + 1e-9)
    assert np.unique(idx).size == idx.size
    changed = np.nonzero(y.values != x)[0]
    assert set(changed) <= set(idx.tolist())


@settings(max_examples=100, deadline=None)
@given(st.recursive(st.floats() | st.integers() | st.text(max_size=5) | st.none(),
                    lambda c: st.lists(c, max_size=4) | st.dictionaries(st.text(max_size=4), c, max_size=4),
                    max_leaves=20))
def test_document_cleaning_is_strict_json(obj):
    import json

    text = dumps({"payload": _clean(obj)})
    json.loads(text)
