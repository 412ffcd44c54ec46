import math

import numpy as np
import pytest

from conftest import random_trig_poly
from mgale import transfer as tr
from mgale.dilated import gaposhkin_coefficients, gaposhkin_example
from mgale.tails import TailModel
from mgale.torus import FourierFunction, sine_series


def test_transfer_kills_odd_sine():
    assert tr.transfer_apply(sine_series({1: 1.0})).coeffs == {}


def test_transfer_halves_even_frequency():
    out = tr.transfer_apply(sine_series({2: 1.0}))
    assert out.coeffs == sine_series({1: 1.0}).coeffs


def test_transfer_preserves_mean_and_one():
    one = FourierFunction({0: 1.0})
    assert tr.transfer_apply(one).coeffs == {0: 1.0}
    f = FourierFunction({0: 0.3, 2: 1.0, 3: -1.0})
    assert tr.transfer_apply(f).coeffs[0] == 0.3


def test_two_forms_cross_check(rng):
    for _ in range(10):
        f = random_trig_poly(rng, degree=32)
        assert tr.transfer_pointwise_check(f, 10).passed


def test_duality_random_pairs(rng):
    for _ in range(30):
        f = random_trig_poly(rng, degree=40, real=True)
        g = random_trig_poly(rng, degree=40, real=True)
        assert tr.duality_audit(f, g, 12).passed


def test_decay_closed_form():
    f = sine_series({2**k: 2.0**-k for k in range(1, 20)})
    dec = tr.transfer_decay(f, 22)
    expected = [math.sqrt(sum(4.0**-k / 2 for k in range(max(n, 1), 20))) for n in range(23)]
    np.testing.assert_allclose(dec.norms[1:], expected[1:], rtol=1e-12)
    # the infinite-series closed form, up to the k <= 19 truncation
    assert dec.norms[3] == pytest.approx(2.0**-3 / math.sqrt(1.5), rel=1e-9)


def test_decay_nonincreasing(rng):
    for _ in range(10):
        f = random_trig_poly(rng, degree=64)
        dec = tr.transfer_decay(f, 8)
        assert np.all(np.diff(dec.norms) <= 1e-14)


def test_decay_single_sine_truncates():
    dec = tr.transfer_decay(sine_series({1: 1.0}), 4)
    assert dec.norms[0] == pytest.approx(1 / math.sqrt(2))
    assert np.all(dec.norms[1:] == 0.0)
    assert math.isfinite(dec.criterion_value)


def test_decay_requires_tail_or_vanishing():
    f = sine_series({2**k: 1.0 / 2**k for k in range(1, 12)})
    with pytest.raises(ValueError):
        tr.transfer_decay(f, 3)  # norms alive at N = 3, no model
    dec = tr.transfer_decay(f, 3, TailModel("geometric", 1.0, 0.5))
    assert math.isfinite(dec.criterion_value)


def test_decay_divergent_tail_gives_inf():
    f = sine_series({2**k: 1.0 / k for k in range(1, 12)})
    dec = tr.transfer_decay(f, 3, TailModel("power", 1.0, 0.5))
    assert dec.criterion_value == math.inf


def test_decay_csv():
    dec = tr.transfer_decay(sine_series({1: 1.0}), 3)
    lines = dec.to_csv().splitlines()
    assert lines[0] == "n,norm,criterion_partial"
    assert len(lines) == 5


def test_gaposhkin_dynamical_decay_fit():
    norms, model, slope, resid = tr.gaposhkin_decay_fit(1, range(1, 6))
    assert resid < 0.1
    assert np.all(np.diff(norms) < 0)


def test_lnorm_vs_modulus_ratios(rng):
    f = sine_series({2**k: 2.0 ** -(k / 2) for k in range(3, 9)})
    ratios = tr.lnorm_vs_modulus(f, 6, 12)
    assert np.all((ratios >= 0.25) & (ratios <= 4.0))


def test_lnorm_vs_modulus_rejects_constant():
    with pytest.raises(ValueError):
        tr.lnorm_vs_modulus(FourierFunction({0: 1.0}), 2, 8)


def test_ergodic_series_run_converging():
    f = sine_series({1: 1.0})
    coeffs = [1.0 / (k + 1) for k in range(256)]
    diag, dec = tr.ergodic_series_run(f, coeffs, [8, 16, 32, 64, 128], 150, seed=4)
    assert diag.verdict == "converging"
    assert dec.criterion_value == 0.0  # L f = 0 for the pure sine


def test_ergodic_series_zero_coeffs():
    f = sine_series({1: 1.0})
    diag, _ = tr.ergodic_series_run(f, [0.0] * 64, [8, 16, 32], 128, seed=4)
    assert np.all(diag.median == 0)


def test_decreasing_criteria_sine_single_term():
    Z = [sine_series({1: 0.5}) for _ in range(4)]
    s1, s2 = tr.decreasing_criteria(Z, 2)
    assert s1 == 0.0
    assert s2 == pytest.approx(math.sqrt(4 * (0.5 / math.sqrt(2)) ** 2), rel=1e-12)


def test_decreasing_criteria_identity_with_weights():
    # || E_{n + 2^l - 1} (a_n f o T^n) ||_2 = |a_n| ||L^(2^l - 1) f||_2
    f = sine_series({2**k: 2.0**-k for k in range(1, 8)})
    a = [0.7, -0.3, 0.2]
    Z = [FourierFunction({m: an * c for m, c in f.coeffs.items()}) for an in a]
    s1, s2 = tr.decreasing_criteria(Z, 2)
    expected = 0.0
    ell = 0
    while True:
        g = f
        for _ in range(2**ell - 1):
            g = tr.transfer_apply(g)
        norm = tr.l2_norm_exact(g)
        if norm == 0.0:
            break
        expected += 2.0 ** (ell / 2) * norm * math.sqrt(sum(abs(x) ** 2 for x in a))
        ell += 1
    assert s2 == pytest.approx(expected, rel=1e-12)


def test_decreasing_criteria_gaposhkin_tail_infinite():
    # fitted tail of sup_n ||L^n Z||_2 for the near-critical example:
    # power 1/2 with a single log, divergent under weight 1/2
    Z = [sine_series({2: 1.0})]
    s1, s2 = tr.decreasing_criteria(Z, 2, tail=TailModel("power_log", 1.0, 0.5, 1.0))
    assert s2 == math.inf


def test_decreasing_criteria_rejects_nonzero_mean():
    with pytest.raises(ValueError):
        tr.decreasing_criteria([FourierFunction({0: 1.0})], 2)


def test_ergodic_series_run_gaposhkin_dynamical():
    # the doubling-map realization of the near-critical exhibit: the
    # oscillation trend is diverging while the weighted decay criterion
    # is infinite under the construction's fitted tail shape
    base = gaposhkin_example(1, 2**13)
    cps = [2**j for j in range(4, 13)]
    diag, dec = tr.ergodic_series_run(
        base.generator, base.coeffs, cps, 200, seed=20240817,
        tail=TailModel("power_log", 1.0, 0.5, 1.0),
    )
    assert diag.verdict == "diverging"
    assert dec.criterion_value == math.inf
