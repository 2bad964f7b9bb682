import itertools

import numpy as np
import pytest

from groupoidal.algebra import convolve, delta, product, unit
from groupoidal.core import GroupoidError, pair_groupoid, restriction
from groupoidal.examples import build_eprb, eprb_witness, free_factorizable_example
from groupoidal.independence import (
    Subalgebra,
    SubalgebraFamily,
    center,
    check_free_independence,
    check_generalized_independence,
    check_usual_independence,
    member_restriction,
    reconstruct_moment,
    witness_violation,
)
from groupoidal.products import direct_product
from groupoidal.states import random_state, separable_state, uniform_unit_state

from conftest import random_element


def direct_expectation(rho, word):
    return complex(np.dot(product([a for _, a in word]).vec, rho.phi))


def assert_witness_reproduces(report, states, tol=1e-8):
    w = report.witness
    assert w is not None
    rho = states[w.state_index]
    cent = [center(rho, e) for e in w.elements]
    for c, d in zip(cent, w.centered):
        assert c.close(d)
        assert abs(rho(c)) < 1e-9
    value, norms = witness_violation(rho, cent)
    assert abs(value) > tol * norms / 2
    assert value == pytest.approx(w.value, abs=1e-9)


@pytest.fixture(scope="module")
def a2a3():
    return direct_product([pair_groupoid(2), pair_groupoid(3)])


# -- usual independence ------------------------------------------------------

def test_eprb_padded_do_not_commute():
    sys = build_eprb()
    rep = check_usual_independence(sys.family, [sys.rho0])
    assert not rep.passed and "commute" in rep.message
    a, b = rep.witness.elements
    assert not convolve(a, b).close(convolve(b, a))


def test_tensor_factors_usually_independent(a2a3, rng):
    fam = SubalgebraFamily.tensor(a2a3)
    states = [separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors]) for _ in range(3)]
    rep = check_usual_independence(fam, states, trials=100)
    assert rep.passed and rep.trials > 100


def test_usual_fails_on_entangled_state(rng):
    a2 = pair_groupoid(2)
    dp = direct_product([a2, a2])
    rho = random_state(dp.product, rng)
    rep = check_usual_independence(SubalgebraFamily.tensor(dp), [rho], trials=50)
    assert not rep.passed and "multiplicative" in rep.message
    w = rep.witness
    lhs = direct_expectation(rho, list(zip(w.members, w.elements)))
    rhs = np.prod([rho(e) for e in w.elements])
    assert abs(lhs - rhs) > w.bound


def test_commutation_verdict_matches_brute_force(rng):
    dp = direct_product([pair_groupoid(2), pair_groupoid(2)])
    families = [build_eprb().family, SubalgebraFamily.tensor(dp), SubalgebraFamily.padded(dp)]
    for fam in families:
        verdict = check_usual_independence(fam, [], trials=0).passed
        m1, m2 = fam.members
        commute = True
        for _ in range(100):
            a = m1.element(rng.normal(size=m1.dim) + 1j * rng.normal(size=m1.dim))
            b = m2.element(rng.normal(size=m2.dim) + 1j * rng.normal(size=m2.dim))
            commute &= convolve(a, b).close(convolve(b, a), tol=1e-8)
        assert verdict == commute


def test_single_member_vacuous():
    g = pair_groupoid(2)
    fam = SubalgebraFamily.from_subgroupoids(g, [g])
    rho = uniform_unit_state(g)
    assert check_usual_independence(fam, [rho]).passed
    assert check_generalized_independence(fam, [rho]).passed
    assert check_free_independence(fam, rho).passed


def test_empty_inputs():
    g = pair_groupoid(2)
    with pytest.raises(GroupoidError):
        check_usual_independence(SubalgebraFamily(g, []), [])
    fam = SubalgebraFamily.from_subgroupoids(g, [restriction(g, [0]), restriction(g, [1])])
    with pytest.raises(GroupoidError):
        check_generalized_independence(fam, [])
    with pytest.raises(GroupoidError):
        check_generalized_independence(fam, [uniform_unit_state(g)], max_word=1)


# -- generalized / free independence -----------------------------------------

def test_eprb_seeded_witness():
    sys = build_eprb()
    rep = check_generalized_independence(sys.family, [sys.rho0], witnesses=eprb_witness(sys), trials=0)
    assert not rep.passed and rep.verdict == "fail"
    assert_witness_reproduces(rep, [sys.rho0])
    # the composable order δ_β ⋆ δ_α⁻¹ = δ_ν carries the violation
    assert rep.witness.value == pytest.approx(-0.5)
    assert rep.witness.elements[0] == sys.d("β")


@pytest.mark.parametrize("seed", range(20))
def test_eprb_found_by_random_search(seed):
    sys = build_eprb()
    rep = check_generalized_independence(
        sys.family, [sys.rho0], trials=100_000, seed=seed, basis_seeds=False
    )
    assert not rep.passed and rep.trials <= 100_000
    assert_witness_reproduces(rep, [sys.rho0])


def test_search_is_deterministic():
    sys = build_eprb()
    kw = dict(trials=500, seed=11, basis_seeds=False)
    r1 = check_generalized_independence(sys.family, [sys.rho0], **kw)
    r2 = check_generalized_independence(sys.family, [sys.rho0], **kw)
    assert r1.witness.value == r2.witness.value and r1.trials == r2.trials


def test_free_factorizable_fails():
    ex = free_factorizable_example(0.0)
    rho = ex.state
    assert rho(ex.a1) == pytest.approx(0, abs=1e-12)
    assert rho(ex.a2) == pytest.approx(0, abs=1e-12)
    assert abs(rho(convolve(ex.a1, ex.a2))) == pytest.approx(1.0)
    rep = check_generalized_independence(ex.family, [rho], witnesses=[[(0, ex.a1), (1, ex.a2)]], trials=0)
    assert not rep.passed
    assert_witness_reproduces(rep, [rho])


def test_tensor_factors_not_free(a2a3, rng):
    rho = separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors])
    rep = check_free_independence(SubalgebraFamily.tensor(a2a3), rho, trials=20_000, seed=3)
    assert not rep.passed
    assert_witness_reproduces(rep, [rho])


def test_tensor_factors_free_up_to_length_three(a2a3, rng):
    # commuting factors with a product state satisfy the length 2 and 3 conditions
    fam = SubalgebraFamily.tensor(a2a3)
    rho = separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors])
    rep = check_free_independence(fam, rho, trials=5000, max_word=3, seed=1)
    assert rep.passed and "no violation found" in rep.message


def test_disjoint_objects_unit_state_centering():
    g = pair_groupoid(4)
    fam = SubalgebraFamily.from_subgroupoids(g, [restriction(g, [0, 1]), restriction(g, [2, 3])])
    rho = uniform_unit_state(g)
    a, b = delta(g, g.unit(0)), delta(g, g.unit(2))
    assert convolve(a, b).norm() == 0
    # centring with the parent unit leaves ρ(ā b̄) = −ρ(a)ρ(b)
    value, _ = witness_violation(rho, [center(rho, a), center(rho, b)])
    assert value == pytest.approx(-rho(a) * rho(b))
    rep = check_free_independence(fam, rho, trials=100)
    assert not rep.passed
    assert_witness_reproduces(rep, [rho])


def test_jobs_parallel_matches_serial(a2a3, rng):
    fam = SubalgebraFamily.padded(a2a3)
    states = [separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors]) for _ in range(4)]
    kw = dict(trials=300, seed=5, basis_seeds=False)
    serial = check_generalized_independence(fam, states, **kw)
    par = check_generalized_independence(fam, states, jobs=4, **kw)
    assert serial.passed == par.passed
    assert serial.witness.value == par.witness.value


# -- reconstruction ----------------------------------------------------------

def test_reconstruct_single_factor(a2a3, rng):
    fam = SubalgebraFamily.tensor(a2a3)
    rho = separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors])
    res = [member_restriction(rho, m) for m in fam.members]
    for m, member in enumerate(fam.members):
        a = member.element(rng.normal(size=member.dim))
        assert reconstruct_moment(fam, res, [(m, a)]) == pytest.approx(rho(a))


def test_reconstruct_all_distinct(rng):
    dp = direct_product([pair_groupoid(2), pair_groupoid(2), pair_groupoid(3)])
    fam = SubalgebraFamily.tensor(dp)
    rho = separable_state(dp, [random_state(f, rng) for f in dp.factors])
    res = [member_restriction(rho, m) for m in fam.members]
    for order in itertools.permutations(range(3)):
        word = [(m, fam.members[m].element(rng.normal(size=fam.members[m].dim))) for m in order]
        expected = np.prod([rho(a) for _, a in word])
        assert reconstruct_moment(fam, res, word) == pytest.approx(expected, abs=1e-9)
        assert direct_expectation(rho, word) == pytest.approx(expected, abs=1e-9)


def test_reconstruct_tensor_short_words(a2a3, rng):
    fam = SubalgebraFamily.tensor(a2a3)
    rho = separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors])
    res = [member_restriction(rho, m) for m in fam.members]
    for r in (2, 3):
        for start in (0, 1):
            word = []
            for k in range(r):
                m = (start + k) % 2
                word.append((m, fam.members[m].element(rng.normal(size=fam.members[m].dim))))
            assert reconstruct_moment(fam, res, word) == pytest.approx(direct_expectation(rho, word), abs=1e-9)


def test_reconstruct_tensor_length_four_differs(a2a3, rng):
    # ρ(a b a′ b′) = ρ(a a′)ρ(b b′) for commuting factors, which is not what the recursion yields
    fam = SubalgebraFamily.tensor(a2a3)
    rho = separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors])
    res = [member_restriction(rho, m) for m in fam.members]
    word = [(k % 2, fam.members[k % 2].element(rng.normal(size=fam.members[k % 2].dim))) for k in range(4)]
    direct = direct_expectation(rho, word)
    a, b, a2, b2 = (e for _, e in word)
    assert direct == pytest.approx(rho(convolve(a, a2)) * rho(convolve(b, b2)), abs=1e-9)
    assert abs(reconstruct_moment(fam, res, word) - direct) > 1e-6


def test_reconstruct_eprb_word_differs():
    # the EPRB family is not independent, so reconstruction cannot match ρ₀
    sys = build_eprb()
    fam, rho = sys.family, sys.rho0
    res = [member_restriction(rho, m) for m in fam.members]
    word = [(0, sys.d("β")), (1, sys.d("α⁻¹"))]
    assert reconstruct_moment(fam, res, word) == pytest.approx(0, abs=1e-12)
    assert direct_expectation(rho, word) == pytest.approx(-0.5)


def test_reconstruct_errors(a2a3, rng):
    fam = SubalgebraFamily.tensor(a2a3)
    rho = separable_state(a2a3, [random_state(f, rng) for f in a2a3.factors])
    res = [member_restriction(rho, m) for m in fam.members]
    a = fam.members[0].unit
    with pytest.raises(GroupoidError):
        reconstruct_moment(fam, res, [(0, a), (0, a)])
    with pytest.raises(GroupoidError):
        reconstruct_moment(fam, res, [])
    with pytest.raises(GroupoidError):
        reconstruct_moment(fam, res[:1], [(0, a)])
    outside = random_element(a2a3.product, rng, density=1.0)
    with pytest.raises(GroupoidError):
        reconstruct_moment(fam, res, [(0, outside)])


def test_subalgebra_membership(a2a3, rng):
    m = Subalgebra.tensor_factor(a2a3, 1)
    x = m.element(rng.normal(size=m.dim))
    assert m.contains(x) and m.coordinates(x) @ m.basis == pytest.approx(x.vec)
    assert m.contains(unit(a2a3.product))
    assert not m.contains(random_element(a2a3.product, rng, density=1.0))
    with pytest.raises(GroupoidError):
        Subalgebra(a2a3.product, np.ones((1, 3)), np.ones(3))
    with pytest.raises(GroupoidError):
        SubalgebraFamily(a2a3.product, [Subalgebra.tensor_factor(direct_product([pair_groupoid(2)]), 0)])
