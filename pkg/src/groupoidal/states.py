"""States on groupoid algebras, stored by their amplitude φ(α) = ρ(δ_α)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .algebra import AlgebraElement
from .core import Groupoid, GroupoidError, is_subgroupoid

TOL = 1e-9


class ConditioningError(GroupoidError):
    """Conditioning on a subsystem whose unit has (numerically) zero weight."""


class State:
    """Linear functional on C[G] given by its amplitude on transitions.

    Construction does not enforce normalization or positivity; use
    :func:`check_positivity` (which also reports ρ(1)) to validate.
    """

    __slots__ = ("parent", "phi", "name")

    def __init__(self, parent: Groupoid, phi, name: str = ""):
        self.parent = parent
        self.phi = np.array(phi, dtype=np.complex128)
        if self.phi.shape != (len(parent),):
            raise GroupoidError("amplitude vector does not match the groupoid")
        self.name = name

    @classmethod
    def from_amplitudes(cls, g: Groupoid, amps: Mapping[int, complex], name: str = "") -> "State":
        phi = np.zeros(len(g), dtype=np.complex128)
        for a, v in amps.items():
            phi[g.pos[g.transition(a).id]] = v
        return cls(g, phi, name)

    def amplitude(self, a: int) -> complex:
        return complex(self.phi[self.parent.pos[a]])

    @property
    def amplitudes(self) -> dict[int, complex]:
        return {t.id: complex(self.phi[i]) for i, t in enumerate(self.parent.transitions)}

    def __call__(self, f: AlgebraElement) -> complex:
        return expectation(self, f)

    @property
    def total(self) -> complex:
        """ρ(1) = Σ_x φ(1_x)."""
        return complex(self.phi[self.parent.unit_positions].sum())

    def __repr__(self):
        return f"<State {self.name or ''} on {self.parent!r}>"


def expectation(rho: State, f: AlgebraElement) -> complex:
    """⟨f⟩_ρ = Σ_α f(α) φ(α)."""
    if f.parent is not rho.parent:
        raise GroupoidError("element and state live on different groupoids")
    return complex(np.dot(f.vec, rho.phi))


def gram_matrix(rho: State) -> np.ndarray:
    g = rho.parent
    return kernels.gram(rho.phi, g.inv_positions, g.comp_matrix)


@dataclass
class PositivityReport:
    passed: bool
    min_eigenvalue: float
    normalization: complex
    hermitian: bool
    counterexample: AlgebraElement | None = None

    @property
    def normalized(self) -> bool:
        return abs(self.normalization - 1) < TOL


def check_positivity(rho: State, tol: float = TOL) -> PositivityReport:
    """Eigenvalue test of the Gram matrix φ(α⁻¹∘β) (zero where not composable)."""
    g = rho.parent
    if len(g) == 0:
        return PositivityReport(True, 0.0, 0j, True)
    m = gram_matrix(rho)
    hermitian = bool(np.allclose(m, m.conj().T, atol=tol))
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    lo = float(w[0])
    passed = hermitian and lo > -tol
    witness = None if passed else AlgebraElement(g, v[:, 0])
    return PositivityReport(passed, lo, rho.total, hermitian, witness)


def is_hermitian(rho: State, tol: float = TOL) -> bool:
    g = rho.parent
    return bool(np.allclose(rho.phi[g.inv_positions], np.conj(rho.phi), atol=tol))


def check_unitarity(rho: State, tol: float = TOL) -> bool:
    """φ(α⁻¹) φ(α) = 1 wherever φ(α) ≠ 0."""
    phi, inv = rho.phi, rho.parent.inv_positions
    nz = np.abs(phi) > tol
    return bool(np.all(np.abs(phi[inv][nz] * phi[nz] - 1) < tol))


def check_factorizable(rho: State, tol: float = TOL) -> tuple[bool, tuple[int, int] | None]:
    """φ(α∘β) = φ(α)φ(β) on every composable pair; returns the first violating pair."""
    g = rho.parent
    ii, jj, kk = g.composable_pairs
    bad = np.flatnonzero(np.abs(rho.phi[kk] - rho.phi[ii] * rho.phi[jj]) > tol)
    if len(bad) == 0:
        return True, None
    p = bad[0]
    return False, (g.transitions[ii[p]].id, g.transitions[jj[p]].id)


def restrict(
    rho: State,
    h: Groupoid,
    embedding: Mapping[int, int] | None = None,
    normalize: bool = True,
) -> State:
    """Conditional state ρ_H(a) = ρ(a) / ρ(1_H) on the subgroupoid ``h``.

    With ``normalize=False`` the plain restriction ρ|_{C[H]} is returned.
    """
    emb = dict(embedding) if embedding is not None else {a: a for a in h.transition_ids}
    if not is_subgroupoid(h, rho.parent, emb):
        raise GroupoidError("not a subgroupoid of the state's groupoid")
    g = rho.parent
    phi = np.array([rho.phi[g.pos[emb[t.id]]] for t in h.transitions], dtype=np.complex128)
    if normalize:
        weight = phi[h.unit_positions].sum() if len(h.outcomes) else 0
        if abs(weight) <= 1e-12:
            raise ConditioningError("ρ(1_H) vanishes; cannot condition on this subsystem")
        phi = phi / weight
    return State(h, phi, name=f"{rho.name}|{h.name}")


def mix(states: Sequence[State], weights: Sequence[float]) -> State:
    if not states or len(states) != len(weights):
        raise GroupoidError("need one weight per state")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > TOL:
        raise GroupoidError("weights must be nonnegative and sum to 1")
    g = states[0].parent
    if any(s.parent is not g for s in states):
        raise GroupoidError("states live on different groupoids")
    return State(g, sum(wi * s.phi for wi, s in zip(w, states)))


def separable_state(dp, states: Sequence[State]) -> State:
    """Homogeneous separable state φ((α₁,…,α_n)) = Π φ_a(α_a) on a direct product."""
    if len(states) != len(dp.factors):
        raise GroupoidError("need exactly one state per factor")
    for s, f in zip(states, dp.factors):
        if s.parent is not f:
            raise GroupoidError("state does not live on the matching factor")
    g = dp.product
    phi = np.ones(len(g), dtype=np.complex128)
    for i, t in enumerate(g.transitions):
        for s, a in zip(states, dp.components[t.id]):
            phi[i] *= s.amplitude(a)
    return State(g, phi, name="⊗".join(s.name or "ρ" for s in states))


def pullback(dp, index: int, state: State) -> State:
    """Separable state with ``state`` in slot ``index`` and uniform unit states elsewhere."""
    states = [
        state if k == index else uniform_unit_state(f) for k, f in enumerate(dp.factors)
    ]
    return separable_state(dp, states)


def vector_state(g: Groupoid, psi) -> State:
    """φ(α) = ⟨ψ|π₀(α)|ψ⟩ in the fundamental representation."""
    psi = np.asarray(psi, dtype=np.complex128)
    phi = [np.conj(psi[g.outcome_pos[t.target]]) * psi[g.outcome_pos[t.source]] for t in g.transitions]
    return State(g, phi)


def density_state(g: Groupoid, dm) -> State:
    """φ(α) = Tr(D π₀(α)) for a density matrix D on the fundamental space."""
    dm = np.asarray(dm, dtype=np.complex128)
    phi = [dm[g.outcome_pos[t.source], g.outcome_pos[t.target]] for t in g.transitions]
    return State(g, phi)


def uniform_unit_state(g: Groupoid) -> State:
    phi = np.zeros(len(g), dtype=np.complex128)
    phi[g.unit_positions] = 1 / len(g.outcomes)
    return State(g, phi, name="uniform")


def random_state(g: Groupoid, rng: np.random.Generator, rank: int | None = None) -> State:
    """Random density-matrix state on the fundamental space (Ginibre ensemble)."""
    n = len(g.outcomes)
    k = rank or n
    x = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    dm = x @ x.conj().T
    return density_state(g, dm / np.trace(dm).real)

