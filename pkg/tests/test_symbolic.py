import math

import numpy as np
import pytest

from mgale import symbolic as sy
from mgale.riesz import RieszProductSpec


def riesz_setup(depth=8, c=0.8, levels=None):
    levels = depth if levels is None else levels
    lambdas = tuple(3**k for k in range(levels))
    spec = RieszProductSpec(lambdas, tuple([c] * levels))
    space, pots = sy.riesz_potentials(spec, depth)
    return spec, space, pots


def osc_fn(space, n, lam_ladder, mult=1, depth=None):
    depth = depth or space.depth
    lam = mult * lam_ladder[n]
    shape = space.sizes[n:depth]
    vals = np.empty(shape)
    for idx in np.ndindex(*shape):
        x = 0.5 / lam_ladder[depth] + sum(idx[i] / lam_ladder[n + 1 + i] for i in range(len(idx)))
        vals[idx] = math.cos(2 * math.pi * lam * x)
    return sy.CylinderFunction(n + 1, vals)


# ----------------------------------------------------------------- spaces

def test_space_validation():
    with pytest.raises(ValueError):
        sy.SymbolicSpace((1, 3))  # alphabet too small
    a_bad = [np.zeros((2, 2), dtype=int)]
    with pytest.raises(ValueError):
        sy.SymbolicSpace((2, 2), tuple(a_bad))  # all-zero row
    a = [np.array([[1, 1], [1, 0]])]
    sp = sy.SymbolicSpace((2, 2), tuple(a), window=1)
    assert not sp.is_full_shift
    assert sp.mask().sum() == 3


def test_transitivity_rejects_reducible():
    a = np.array([[1, 0], [0, 1]])  # two disconnected letters
    with pytest.raises(ValueError):
        sy.SymbolicSpace((2, 2, 2), (a, a), window=1)


def test_full_shift_mask():
    sp = sy.SymbolicSpace.full_shift((2, 3, 2))
    assert sp.mask().all() and sp.mask().shape == (2, 3, 2)


# -------------------------------------------------------------- potentials

def test_riesz_potentials_normalized_and_positive():
    _, space, pots = riesz_setup(6, 0.8, 6)
    assert pots.check_normalized(space) < 1e-12
    # floor (1 - |c|) / alphabet size
    assert pots.positivity_floor() >= (1 - 0.8) / 3 - 1e-12


def test_potentials_require_matching_start():
    g = sy.CylinderFunction(2, np.full((3,), 1 / 3))
    with pytest.raises(ValueError):
        sy.PotentialSeq((g,))


def test_riesz_potentials_require_unit_lambda0():
    spec = RieszProductSpec((3, 9), (0.5, 0.5))
    with pytest.raises(ValueError):
        sy.riesz_potentials(spec, 4)


# ------------------------------------------------------------------ var_m

def test_var_depends_only_on_prefix():
    sp = sy.SymbolicSpace.full_shift((2, 2, 2))
    f = sy.CylinderFunction(1, np.array([0.0, 1.0]))
    assert sy.var_m(sp, f, 1) == 0.0
    assert sy.var_m(sp, f, 0) == 1.0


def test_var_indicator_of_deep_cylinder():
    sp = sy.SymbolicSpace.full_shift((2, 2, 2))
    vals = np.zeros((2, 2, 2))
    vals[1, 0, 1] = 1.0
    f = sy.CylinderFunction(1, vals)
    assert sy.var_m(sp, f, 2) == 1.0
    assert sy.var_m(sp, f, 3) == 0.0


def test_var_metric_lipschitz_bound():
    # f(x) = x interpreted through the digit metric d = 1/(l_1 ... l_n)
    sp = sy.SymbolicSpace.full_shift((3, 3, 3, 3))
    lad = [3**k for k in range(5)]
    vals = np.empty((3, 3, 3, 3))
    for idx in np.ndindex(*vals.shape):
        vals[idx] = sum(idx[i] / lad[i + 1] for i in range(4))
    f = sy.CylinderFunction(1, vals)
    for m in range(0, 4):
        assert sy.var_m(sp, f, m) <= 1.0 / lad[m] + 1e-12


# --------------------------------------------------------------- pn_apply

def test_pn_one_is_one():
    _, space, pots = riesz_setup(7, 0.7, 7)
    one = sy.CylinderFunction(3, np.ones(space.sizes[2:3]))
    out = sy.pn_apply(space, pots, sy.CylinderFunction(3, np.ones(space.sizes[2:3]) * 0 + 1.0), 2)
    np.testing.assert_allclose(out.values, 1.0, atol=1e-13)


def test_p1_uniform_average():
    sp = sy.SymbolicSpace.full_shift((4, 4))
    g1 = sy.CylinderFunction(1, np.full((4,), 0.25))
    g2 = sy.CylinderFunction(2, np.full((4,), 0.25))
    pots = sy.PotentialSeq((g1, g2))
    f = sy.CylinderFunction(1, np.arange(4.0))
    out = sy.pn_apply(sp, pots, f, 1)
    np.testing.assert_allclose(out.values, 1.5)


def test_pn_positivity_and_projection(rng):
    _, space, pots = riesz_setup(6, 0.6, 6)
    vals = np.abs(rng.standard_normal(space.sizes[4:6]))
    f = sy.CylinderFunction(5, vals)
    p4 = sy.pn_apply(space, pots, f, 4)
    assert np.nanmin(p4.values) >= 0
    again = sy.pn_apply(space, pots, p4, 2)
    np.testing.assert_allclose(again.to_box(space), p4.to_box(space), atol=1e-14)


def test_pn_apply_incidence_masks():
    a = np.array([[1, 1], [1, 0]])
    sp = sy.SymbolicSpace((2, 2, 2), (a, a), window=1)
    g1 = sy.CylinderFunction(1, np.array([[0.5, 1.0], [0.5, 0.0]]))  # normalized per column reachable
    g2 = sy.CylinderFunction(2, np.array([[0.5, 1.0], [0.5, 0.0]]))
    g3 = sy.CylinderFunction(3, np.array([0.5, 0.5]))
    pots = sy.PotentialSeq((g1, g2, g3))
    assert pots.check_normalized(sp) < 1e-12
    f = sy.CylinderFunction(3, np.array([1.0, 2.0]))
    out = sy.pn_apply(sp, pots, f, 2)
    assert out.values.shape == (2,)
    np.testing.assert_allclose(out.values, [1.0, 2.0])


# ------------------------------------------------------------- equilibrium

def test_equilibrium_is_product_weights():
    _, space, pots = riesz_setup(6, 0.7, 6)
    w = sy.equilibrium_weights(space, pots)
    expected = sy._g_box(space, pots, 6)
    np.testing.assert_allclose(w, expected, atol=1e-14)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_equilibrium_torus_crosscheck():
    spec = RieszProductSpec((1, 3, 9), (0.6, 0.4, 0.0))
    space, pots = sy.riesz_potentials(spec, 10)
    w = sy.equilibrium_weights(space, pots)
    ints = sy.riesz_cylinder_integrals(spec, 1, 6)
    mu6 = w.sum(axis=tuple(range(6, 10)))
    assert np.abs(ints - mu6).max() < 1e-6


def test_cylinder_sandwich_positive():
    _, space, pots = riesz_setup(7, 0.8, 7)
    w = sy.equilibrium_weights(space, pots)
    d1, d2 = sy.cylinder_sandwich(space, pots, w, 4)
    assert 0 < d1 <= 1 <= d2 < math.inf


# ------------------------------------------------------------------ audits

def test_cond_gn_depends_on_own_coordinate_only():
    sp = sy.SymbolicSpace.full_shift((3,) * 6)
    pots = sy.PotentialSeq(tuple(sy.CylinderFunction(j, np.full((3,), 1 / 3)) for j in range(1, 7)))
    rep = sy.potential_variation_check(sp, pots, 1.0, 1e-9)
    assert rep.passed and rep.lhs == 0.0


def test_cond_gn_riesz_geometric():
    _, space, pots = riesz_setup(8, 0.8, 8)
    rep = sy.potential_variation_check(space, pots, 1.0, 8.0)
    assert rep.passed
    assert rep.lhs < 2.0


def test_cond_gn_violation_witness():
    sp = sy.SymbolicSpace.full_shift((2,) * 5)
    pots = []
    for j in range(1, 6):
        if j == 2:
            # g_2(y_2 | x_5): the conditional split over y_2 swings with
            # coordinate 5, three steps past j, keeping normalization
            vals = np.full((2, 2, 2, 2), 0.5)
            vals[0, :, :, 0] = 0.55
            vals[1, :, :, 0] = 0.45
            vals[0, :, :, 1] = 0.25
            vals[1, :, :, 1] = 0.75
            pots.append(sy.CylinderFunction(2, vals))
        else:
            shape = (2,) * (5 - j + 1)
            pots.append(sy.CylinderFunction(j, np.full(shape, 0.5)))
    pots = sy.PotentialSeq(tuple(pots))
    assert pots.check_normalized(sp) < 1e-12
    rep = sy.potential_variation_check(sp, pots, 2.0, 1e-6)
    assert not rep.passed
    # var_3 = var_4 but the (m - n)^alpha weight singles out m = 4
    assert "witness=(2, 4)" in rep.context


def test_cond_gn_rejects_zero_potentials():
    sp = sy.SymbolicSpace.full_shift((2, 2, 2))
    g = sy.CylinderFunction(1, np.array([1.0, 0.0]))
    pots = sy.PotentialSeq((g, sy.CylinderFunction(2, np.array([0.5, 0.5])), sy.CylinderFunction(3, np.array([0.5, 0.5]))))
    with pytest.raises(ValueError):
        sy.potential_variation_check(sp, pots, 1.0, 1.0)


def test_est_pn_uniform_potentials_exact_averaging():
    sp = sy.SymbolicSpace.full_shift((3,) * 6)
    pots = sy.PotentialSeq(tuple(sy.CylinderFunction(j, np.full((3,), 1 / 3)) for j in range(1, 7)))
    w = sy.equilibrium_weights(sp, pots)
    # f_1 depends on coordinate 2 only and is centered
    f1 = sy.CylinderFunction(2, np.array([-1.0, 0.0, 1.0]))
    rep, decay = sy.averaging_decay_audit(sp, pots, [f1], 1.0, 2.0, weights=w)
    assert rep.passed
    assert all(v < 1e-13 for (n, m), v in decay.items() if m >= 2)


def test_est_pn_resonant_riesz_collapses():
    spec, space, pots = riesz_setup(8, 0.8, 8)
    w = sy.equilibrium_weights(space, pots)
    lad = [3**k for k in range(9)]
    fns = [osc_fn(space, n, lad) for n in range(1, 5)]
    rep, decay = sy.averaging_decay_audit(space, pots, fns, 1.0, 8.0, weights=w)
    assert rep.passed and rep.lhs == -math.inf
    assert all(v < 1e-12 for (n, m), v in decay.items() if m - n >= 1)


def test_est_pn_polynomial_family_genuine_fit():
    # potentials with polynomially decaying dependence: a real slope fit
    D = 8
    sp = sy.SymbolicSpace.full_shift((2,) * D)
    alpha = 1.5
    pots = []
    for j in range(1, D + 1):
        d = D - j + 1
        shape = (2,) * d
        eps = np.zeros(shape)
        for i in range(1, d):
            axis_vals = (np.arange(2) - 0.5) / (i + 1) ** (alpha + 1)
            eps += axis_vals.reshape((1,) * i + (2,) + (1,) * (d - i - 1)) * 0.5
        sign = np.array([-1.0, 1.0]).reshape((2,) + (1,) * (d - 1))
        vals = (1.0 + sign * eps) / 2.0
        pots.append(sy.CylinderFunction(j, vals))
    pots = sy.PotentialSeq(tuple(pots))
    assert pots.check_normalized(sp) < 1e-12
    w = sy.equilibrium_weights(sp, pots)
    fns = []
    for n in range(1, 4):
        d = D - n
        vals = np.zeros((2,) * d)
        for i in range(d):
            axis_vals = (np.arange(2) - 0.5) / (i + 1) ** alpha
            vals += axis_vals.reshape((1,) * i + (2,) + (1,) * (d - i - 1))
        fns.append(sy.CylinderFunction(n + 1, vals))
    rep, decay = sy.averaging_decay_audit(sp, pots, fns, alpha, 4.0, weights=w)
    assert math.isfinite(rep.lhs)
    assert rep.passed, (rep.lhs, rep.rhs)


def test_est_pn_hypothesis_violation_raises():
    _, space, pots = riesz_setup(6, 0.5, 6)
    lad = [3**k for k in range(7)]
    big = sy.CylinderFunction(2, 10.0 * osc_fn(space, 1, lad).values)
    with pytest.raises(ValueError):
        sy.averaging_decay_audit(space, pots, [big], 1.0, 1.0)


def test_decreasing_criterion_values():
    assert math.isfinite(sy.decreasing_criterion_symbolic([1, 0.5], 1.0))
    assert sy.decreasing_criterion_symbolic([1, 0.5], 0.4) == math.inf
    assert sy.decreasing_criterion_symbolic([0, 0], 1.0) == 0.0
    with pytest.raises(ValueError):
        sy.decreasing_criterion_symbolic([1.0], -1.0)


def test_mu_integral_matches_manual():
    _, space, pots = riesz_setup(5, 0.6, 5)
    w = sy.equilibrium_weights(space, pots)
    f = sy.CylinderFunction(2, np.arange(3.0))
    manual = float((w * f.to_box(space)).sum())
    assert sy.mu_integral(space, w, f) == pytest.approx(manual)


def test_space_and_potentials_json_roundtrip():
    a = np.array([[1, 1], [1, 0]])
    sp = sy.SymbolicSpace((2, 2, 2), (a, a), window=1)
    back = sy.SymbolicSpace.from_json(sp.to_json())
    assert back.sizes == sp.sizes and back.window == sp.window
    np.testing.assert_array_equal(back.mask(), sp.mask())
    _, space, pots = riesz_setup(4, 0.5, 4)
    back_pots = sy.PotentialSeq.from_json(pots.to_json())
    for g, h in zip(pots.potentials, back_pots.potentials):
        assert g.start == h.start
        np.testing.assert_allclose(g.values, h.values)


from hypothesis import given, settings
from hypothesis import strategies as st


@given(st.integers(0, 10**6), st.floats(0.1, 0.9))
@settings(max_examples=20, deadline=None)
def test_equilibrium_product_identity_property(seed, c):
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(3, 6))
    spec = RieszProductSpec(tuple(3**k for k in range(depth)), tuple([c] * depth))
    space, pots = sy.riesz_potentials(spec, depth)
    w = sy.equilibrium_weights(space, pots)
    np.testing.assert_allclose(w, sy._g_box(space, pots, depth), atol=1e-13)
