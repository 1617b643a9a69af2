"""Derivation maps: images, transport homomorphism, commutation checks."""

import random

import pytest

from _helpers import random_poly_from, transportable_jets
from jetcalc.diffalg import RatExpr, is_zero, substitute_jet
from jetcalc.exprio import parse, print_text
from jetcalc.hierarchies import ch_space, gen_ch, gen_qiao, q_space, r_space
from jetcalc.reduction import JetRanking, RewriteSystem, orient, standard_systems
from jetcalc.transform import (BelowDesignatedJetError, DerivationMap,
                               UndefinedDerivationError, back_mix_map,
                               build_map, check_commutation, miura_mix_map,
                               transport)


def test_r_ch_field_images():
    m = build_map("R_CH", 2)
    chs, rsp = ch_space(2), r_space(2)
    assert is_zero(m.jet_image(chs.jet("P")) - parse("1/X_{T0}", rsp))
    assert is_zero(m.jet_image(chs.jet("Omega", 2)) - parse("2*X_{T2}", rsp))


def test_transported_p_t_matches_hand_expansion():
    m = build_map("R_CH", 2)
    got = transport(m, ch_space(2).expr("P", T=1))
    expected = parse("-X_{T0,T1}/X_{T0}^2 + X_{T1}*X_{T0,T0}/X_{T0}^3", r_space(2))
    assert is_zero(got - expected)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_conservative_equation_identically_satisfied(n):
    m = build_map("R_CH", n)
    assert transport(m, gen_ch(n)[0].residual).is_zero()


def test_bare_v_rejected_below_designated_jet():
    m = build_map("R_Q", 2)
    with pytest.raises(BelowDesignatedJetError):
        transport(m, q_space(2).expr("v", 1))


def test_bare_x_field_rejected_under_back_maps():
    m = build_map("B_CH", 2)
    with pytest.raises(BelowDesignatedJetError):
        transport(m, r_space(2).expr("X"))


def test_undefined_direction_under_back_maps():
    m = build_map("B_CH", 2)
    with pytest.raises(UndefinedDerivationError):
        transport(m, r_space(2).expr("X", T2=2))


def test_unknown_selector():
    with pytest.raises(ValueError):
        build_map("R_XY", 2)


def test_c_mr_u_image_reduces_to_p_when_p_x_vanishes():
    m = build_map("C_MR", 1)
    chs = ch_space(1)
    u_img = m.jet_image(q_space(1).jet("u"))
    flat = substitute_jet(u_img, chs.jet("P", X=1), RatExpr.const(0))
    assert is_zero(flat - chs.expr("P"))


def test_c_mr_w_image_halves_constant_omega():
    m = build_map("C_MR", 1)
    chs = ch_space(1)
    w_img = m.jet_image(q_space(1).jet("w", 1))
    flat = substitute_jet(w_img, chs.jet("Omega", 1, X=1), RatExpr.const(0))
    assert is_zero(flat - chs.expr("Omega", 1) / 2)


def test_c_mr_heights_identity_by_construction():
    for n in (1, 2):
        m = build_map("C_MR", n)
        chs = ch_space(n)
        u_img = m.jet_image(q_space(n).jet("u"))
        gap = chs.expr("P") - chs.expr("P", X=1)
        assert is_zero(chs.expr("P") ** 2 - u_img * gap)


MAPS = ["R_CH", "R_Q", "B_CH", "B_Q", "C_MR"]


def _derivative_law_modulus(name, n):
    """The partial inverses satisfy the derivative law only on-shell: reaching
    a mixed jet through different designated bases composes the derivation
    images in different orders, and those commute modulo the conservative-form
    equation (exactly the d^2 T0 = 0 content)."""
    if name == "B_CH":
        return standard_systems("CH", n)
    if name == "B_Q":
        qspace = q_space(n)
        rule = orient(gen_qiao(n)[0], qspace.jet("u", t=1))
        return RewriteSystem([rule], JetRanking(qspace))
    return None


@pytest.mark.parametrize("name", MAPS)
def test_transport_homomorphism_laws(name):
    # jet exponents stay at one: no hierarchy equation ever multiplies squares
    # of second-time-derivative images, and those dominate the cost otherwise
    n = 2
    m = build_map(name, n)
    modulus = _derivative_law_modulus(name, n)
    jets = transportable_jets(m, depth=2)
    rng = random.Random(sum(ord(c) for c in name))
    weight = dict(max_terms=2, max_factors=1) if name == "C_MR" else dict(max_exp=1)
    for _ in range(200):
        f = random_poly_from(jets, rng, **weight)
        g = random_poly_from(jets, rng, **weight)
        tf_, tg = transport(m, f), transport(m, g)
        assert is_zero(transport(m, f + g) - tf_ - tg)
        assert is_zero(transport(m, f * g) - tf_ * tg)
        var = rng.choice(sorted(m.op_images))
        gap = transport(m, f.total_derivative(var)) - m.derive(tf_, var)
        if modulus is not None:
            gap = modulus.reduce(gap)
        assert is_zero(gap)


def test_round_trip_through_x_derivatives_only():
    n = 2
    fwd = build_map("R_CH", n)
    back = build_map("B_CH", n)
    chs = ch_space(n)
    rng = random.Random(5)
    x_jets = [f.jet(X=k) for f in chs.fields for k in range(0, 3)]
    for _ in range(100):
        e = random_poly_from(x_jets, rng)
        assert is_zero(transport(back, transport(fwd, e)) - e)


def test_forward_maps_commute_identically():
    for name in ("R_CH", "R_Q", "C_MR"):
        m = build_map(name, 2)
        assert check_commutation(m, 25, seed=1)
    # the extended composite map commutes identically pairwise on each
    # field's dependency pair; the fused back map is on-shell only, like B_CH
    assert check_commutation(miura_mix_map(2), 10, seed=1)
    assert not check_commutation(back_mix_map(2), 5, seed=1)


def test_back_maps_commute_only_modulo_their_hierarchy():
    n = 2
    b_ch = build_map("B_CH", n)
    assert not check_commutation(b_ch, 10, seed=3)
    assert check_commutation(b_ch, 10, seed=3, modulo=standard_systems("CH", n))
    b_q = build_map("B_Q", n)
    assert not check_commutation(b_q, 10, seed=3)
    qspace = q_space(n)
    rule = orient(gen_qiao(n)[0], qspace.jet("u", t=1))
    qiao_sys = RewriteSystem([rule], JetRanking(qspace))
    assert check_commutation(b_q, 10, seed=3, modulo=qiao_sys)


def test_corrupted_map_detected():
    n = 2
    good = build_map("R_CH", n)
    broken_ops = dict(good.op_images)
    coeff, var = broken_ops["X"][0]
    broken_ops["X"] = ((coeff + 1, var),)
    bad = DerivationMap("R_CH_corrupt", good.source, good.target,
                        good.field_images, broken_ops)
    assert not check_commutation(bad, 10, seed=2)


def test_transport_rejects_wrong_space():
    m = build_map("R_CH", 2)
    from jetcalc.transform import TransportError
    with pytest.raises(TransportError):
        transport(m, r_space(2).expr("X", T0=1))


def test_memoization_is_consistent():
    m = build_map("R_CH", 2)
    e = ch_space(2).expr("P", X=2, T=1)
    first = transport(m, e)
    second = transport(m, e)
    assert first == second
    assert print_text(first) == print_text(second)
