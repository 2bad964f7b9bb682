import numpy as np
import pytest
from hypothesis import given, strategies as st

from groupoidal.algebra import AlgebraElement, adjoint, convolve, delta, fundamental_representation, unit
from groupoidal.core import GroupoidError, cyclic_group, pair_groupoid, restriction
from groupoidal.products import direct_product
from groupoidal.states import (
    ConditioningError,
    State,
    check_factorizable,
    check_positivity,
    check_unitarity,
    density_state,
    gram_matrix,
    is_hermitian,
    mix,
    pullback,
    random_state,
    restrict,
    separable_state,
    uniform_unit_state,
    vector_state,
)

from conftest import CORPUS, random_element

seeds = st.integers(0, 2**32 - 1)
corpus_index = st.integers(0, len(CORPUS) - 1)


def test_random_states_are_positive(groupoid, rng):
    for rank in (None, 1):
        rep = check_positivity(random_state(groupoid, rng, rank=rank))
        assert rep.passed and rep.normalized and rep.hermitian


@given(corpus_index, seeds)
def test_gram_quadratic_form(k, seed):
    g, rng = CORPUS[k], np.random.default_rng(seed)
    rho = random_state(g, rng)
    f = random_element(g, rng)
    m = gram_matrix(rho)
    assert np.vdot(f.vec, m @ f.vec) == pytest.approx(rho(convolve(adjoint(f), f)), abs=1e-8)
    assert rho(convolve(adjoint(f), f)).real >= -1e-9


def test_negative_unit_weight_fails_with_counterexample():
    g = pair_groupoid(2)
    rho = State.from_amplitudes(g, {g.unit(0): 1.2, g.unit(1): -0.2})
    rep = check_positivity(rho)
    assert not rep.passed and rep.min_eigenvalue < 0
    f = rep.counterexample
    assert rho(convolve(adjoint(f), f)).real < -1e-9


def test_large_coherence_fails():
    g = pair_groupoid(2)
    amps = {g.unit(0): 0.5, g.unit(1): 0.5}
    for t in g.transitions:
        if t.source != t.target:
            amps[t.id] = 0.9
    rep = check_positivity(State.from_amplitudes(g, amps))
    assert not rep.passed
    assert rep.min_eigenvalue == pytest.approx(-0.4)


def test_non_hermitian_rejected():
    g = pair_groupoid(2)
    a = [t.id for t in g.transitions if t.source != t.target][0]
    rho = State.from_amplitudes(g, {g.unit(0): 0.5, g.unit(1): 0.5, a: 0.1j})
    assert not is_hermitian(rho)
    assert not check_positivity(rho).passed


def test_unnormalized_reported():
    rep = check_positivity(State(pair_groupoid(2), [2, 0, 0, 0]))
    assert rep.passed and not rep.normalized and rep.normalization == 2


def test_vector_and_density_agree(groupoid, rng):
    g = groupoid
    n = len(g.outcomes)
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    psi /= np.linalg.norm(psi)
    a = vector_state(g, psi)
    b = density_state(g, np.outer(psi, psi.conj()))
    assert np.allclose(a.phi, b.phi)
    pi = fundamental_representation(g)
    f = random_element(g, rng)
    assert a(f) == pytest.approx(np.vdot(psi, pi(f) @ psi))


def test_restrict_tower(rng):
    g = pair_groupoid(4)
    rho = random_state(g, rng)
    h = restriction(g, [0, 1, 2])
    k = restriction(g, [0, 1])
    direct = restrict(rho, k)
    via = restrict(restrict(rho, h), k)
    assert np.allclose(direct.phi, via.phi)
    assert restrict(rho, k).total == pytest.approx(1)
    plain = restrict(rho, k, normalize=False)
    assert plain.total == pytest.approx(sum(rho.amplitude(g.unit(x)) for x in (0, 1)))


def test_restrict_is_conditional_expectation(rng):
    g = pair_groupoid(3)
    rho = random_state(g, rng)
    h = restriction(g, [1, 2])
    cond = restrict(rho, h)
    f = random_element(h, rng)
    weight = sum(rho.amplitude(g.unit(x)) for x in (1, 2))
    assert cond(f) * weight == pytest.approx(sum(c * rho.amplitude(a) for a, c in f.coeffs.items()))


def test_conditioning_on_null_subsystem():
    g = pair_groupoid(2)
    rho = State.from_amplitudes(g, {g.unit(0): 1.0})
    with pytest.raises(ConditioningError):
        restrict(rho, restriction(g, [1]))
    with pytest.raises(GroupoidError):
        restrict(rho, pair_groupoid(3))


def test_mix_convex(rng):
    g = pair_groupoid(3)
    s1, s2 = random_state(g, rng), random_state(g, rng)
    m = mix([s1, s2], [0.25, 0.75])
    assert check_positivity(m).passed
    assert np.allclose(m.phi, 0.25 * s1.phi + 0.75 * s2.phi)
    with pytest.raises(GroupoidError):
        mix([s1, s2], [0.5, 0.6])
    with pytest.raises(GroupoidError):
        mix([s1, random_state(pair_groupoid(3), rng)], [0.5, 0.5])


def test_separable_state_factorizes(rng):
    a2, a3 = pair_groupoid(2), pair_groupoid(3)
    dp = direct_product([a2, a3])
    r1, r2 = random_state(a2, rng), random_state(a3, rng)
    rho = separable_state(dp, [r1, r2])
    assert check_positivity(rho).passed and rho.total == pytest.approx(1)
    for t in dp.product.transition_ids:
        x, y = dp.components[t]
        assert rho.amplitude(t) == pytest.approx(r1.amplitude(x) * r2.amplitude(y))
    with pytest.raises(GroupoidError):
        separable_state(dp, [r2, r1])
    with pytest.raises(GroupoidError):
        separable_state(dp, [r1])


def test_pullback_marginal(rng):
    a2, a3 = pair_groupoid(2), pair_groupoid(3)
    dp = direct_product([a2, a3])
    r = random_state(a3, rng)
    rho = pullback(dp, 1, r)
    # marginal of the pulled-back state on slot 1 is r itself
    for t in a3.transition_ids:
        total = sum(rho.amplitude(dp.index[u, t]) for u in (a2.unit(0), a2.unit(1)))
        assert total == pytest.approx(r.amplitude(t))


def test_factorizable_and_unitary():
    z = cyclic_group(4)
    chars = [State(z, [np.exp(2j * np.pi * k * j / 4) for j in range(4)]) for k in range(4)]
    for c in chars:
        assert check_factorizable(c)[0]
        assert check_unitarity(c)
    assert check_factorizable(State(pair_groupoid(2), np.ones(4)))[0]
    assert not check_factorizable(uniform_unit_state(pair_groupoid(2)))[0]
    rho = State(pair_groupoid(2), [0.5, 0.5, 0.5, 0.5])
    ok, pair = check_factorizable(rho)
    assert not ok and pair is not None
    assert not check_unitarity(rho)


def test_from_amplitudes_and_shape():
    g = pair_groupoid(2)
    rho = State.from_amplitudes(g, {0: 1})
    assert rho.amplitudes[0] == 1 and rho.amplitudes[1] == 0
    with pytest.raises(GroupoidError):
        State(g, [1, 0])
    with pytest.raises(GroupoidError):
        rho(delta(pair_groupoid(2), 0))
    assert rho(unit(g)) == rho.total
    assert rho(AlgebraElement(g, np.ones(4))) == 1
