"""Numeric oracle: evaluation, finite differences, proportionality checks."""

import math
import random

import pytest

from jetcalc.diffalg import Cofactor, proportional
from jetcalc.exprio import parse
from jetcalc.hierarchies import ch_space, gen_cbs_family, gen_ch, q_space, r_space
from jetcalc.numoracle import (FD_TOL, JetPoint, MissingJetError,
                               SmallDenominatorError, TestFunction,
                               confirm_zero, eval_expr, fd_check,
                               numeric_proportionality, relative_residual)
from jetcalc.transform import build_map, transport

R2 = r_space(2)


def _point(space, mapping):
    return JetPoint(dict(mapping), "explicit")


def test_eval_square():
    e = parse("X_{T0}^2", R2)
    p = _point(R2, {R2.jet("X", T0=1): 2.0})
    assert eval_expr(e, p) == 4.0


def test_eval_power_rule_example():
    e = parse("2*X_{T0}*X_{T0,T0}", R2)
    p = _point(R2, {R2.jet("X", T0=1): 2.0, R2.jet("X", T0=2): 3.0})
    assert eval_expr(e, p) == 12.0


def test_eval_missing_jet():
    e = parse("X_{T0}", R2)
    with pytest.raises(MissingJetError):
        eval_expr(e, _point(R2, {}))


def test_eval_small_denominator():
    e = parse("1/X_{T0}", R2)
    with pytest.raises(SmallDenominatorError):
        eval_expr(e, _point(R2, {R2.jet("X", T0=1): 1e-15}))


def test_testfunction_jets_solve_their_own_derivatives():
    tf = TestFunction(R2, seed=9)
    rng = random.Random(0)
    coords = tf.sample_coords(rng)
    x1 = tf.jet_value(R2.jet("X", T0=1), coords)
    h = 1e-5
    up = dict(coords)
    up["T0"] = coords["T0"] + h
    down = dict(coords)
    down["T0"] = coords["T0"] - h
    fd = (tf.jet_value(R2.jet("X"), up) - tf.jet_value(R2.jet("X"), down)) / (2 * h)
    assert abs(x1 - fd) <= 1e-8 * max(1.0, abs(x1))


def test_fd_check_on_200_random_triples():
    rng = random.Random(41)
    spaces = (ch_space(2), q_space(2), r_space(2))
    from jetcalc.diffalg import random_expr
    worst = 0.0
    for k in range(200):
        space = spaces[k % len(spaces)]
        tf = TestFunction(space, seed=k)
        e = random_expr(space, rng, rational=(k % 4 == 0))
        var = space.vars[k % len(space.vars)]
        worst = max(worst, fd_check(e, var, tf, sample=k))
    assert worst <= FD_TOL


def test_fd_check_constant_is_exact():
    tf = TestFunction(ch_space(1), seed=1)
    from jetcalc.diffalg import RatExpr
    assert fd_check(RatExpr.const(3), "T", tf) <= 1e-12


def test_fd_check_detects_wrong_derivative():
    # doubling a derivative's coefficient must blow past the tolerance
    tf = TestFunction(R2, seed=2)
    e = parse("X_{T0}^2", R2)
    wrong = parse("4*X_{T0}*X_{T0,T0}", R2)  # true derivative along T0 is half
    rng = random.Random(3)
    coords = tf.sample_coords(rng)
    jets = set(e.jets()) | set(wrong.jets())
    sym = eval_expr(wrong, tf.point(jets, coords))
    h = 1e-3

    def at(offset):
        shifted = dict(coords)
        shifted["T0"] = coords["T0"] + offset
        return eval_expr(e, tf.point(jets, shifted))

    fd = (4 * (at(h / 2) - at(-h / 2)) / h - (at(h) - at(-h)) / (2 * h)) / 3
    rel = abs(sym - fd) / max(1.0, abs(sym), abs(fd))
    assert rel >= 1e-2


def test_numeric_proportionality_identity():
    e = parse("X_{T0,T0} + X_{T1}", R2)
    cof = Cofactor(1, ())
    assert numeric_proportionality(e, e, cof, trials=50, seed=4)


def test_numeric_proportionality_c2_pair():
    m = build_map("R_CH", 2)
    img = transport(m, gen_ch(2)[1].residual)
    target = gen_cbs_family(2).bcbs[0].residual
    cof = proportional(img, target)
    assert cof is not None
    assert numeric_proportionality(img, target, cof, trials=100, seed=0)


def test_numeric_proportionality_detects_perturbed_cofactor():
    m = build_map("R_CH", 2)
    img = transport(m, gen_ch(2)[1].residual)
    target = gen_cbs_family(2).bcbs[0].residual
    cof = proportional(img, target)
    from fractions import Fraction
    bad = Cofactor(cof.coeff * (1 + Fraction(1, 1000)), cof.powers)
    assert not numeric_proportionality(img, target, bad, trials=50, seed=0)


def test_confirm_zero_on_transported_conservative_equation():
    m = build_map("R_CH", 3)
    img = transport(m, gen_ch(3)[0].residual)
    assert confirm_zero(img, r_space(3), seed=0, points=100) == 0.0


def test_relative_residual_scales_by_term_magnitude():
    e = parse("X_{T0} - X_{T0}", R2) + parse("X_{T1}", R2) - parse("X_{T1}", R2)
    assert e.is_zero()
    big = parse("1000000*X_{T0} + 1", R2)
    p = _point(R2, {R2.jet("X", T0=1): 1.0})
    assert relative_residual(big, p) == pytest.approx(
        (1000000 + 1) / (1000000 + 1), rel=1e-12)