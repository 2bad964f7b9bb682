"""Decoherence functionals and quantum measures built from a state's amplitude."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .algebra import AlgebraElement, adjoint, convolve
from .core import Groupoid, GroupoidError


@dataclass(frozen=True)
class Event:
    """A set of transitions of ``parent``."""

    parent: Groupoid
    members: frozenset[int]

    def __init__(self, parent: Groupoid, members: Iterable[int] = ()):
        members = frozenset(members)
        for a in members:
            parent.transition(a)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "members", members)

    @classmethod
    def from_labels(cls, parent: Groupoid, labels: Iterable[str]) -> "Event":
        return cls(parent, [parent.by_label(lbl) for lbl in labels])

    def __len__(self):
        return len(self.members)

    def __or__(self, other: "Event") -> "Event":
        _same(self, other)
        return Event(self.parent, self.members | other.members)

    def indicator(self) -> AlgebraElement:
        """Σ_{σ∈A} δ_σ."""
        return AlgebraElement.from_coeffs(self.parent, {a: 1 for a in self.members})

    def positions(self) -> np.ndarray:
        return np.array(sorted(self.parent.pos[a] for a in self.members), dtype=np.intp)


def _same(*events):
    if any(e.parent is not events[0].parent for e in events):
        raise GroupoidError("events live on different groupoids")


def _check(rho, *events):
    _same(*events)
    if events[0].parent is not rho.parent:
        raise GroupoidError("events and state live on different groupoids")


def decoherence(rho, A: Event, B: Event) -> complex:
    """D(A,B) = Σ_{σ∈A, σ′∈B} φ(σ⁻¹∘σ′); non-composable pairs contribute nothing."""
    _check(rho, A, B)
    g = rho.parent
    return kernels.decoherence_sum(rho.phi, g.inv_positions, g.comp_matrix, A.positions(), B.positions())


def quantum_measure(rho, A: Event) -> float:
    return decoherence(rho, A, A).real


def quantum_measure_via_algebra(rho, A: Event) -> float:
    """μ(A) as ρ(χ_A* ⋆ χ_A); an independent route through convolution."""
    _check(rho, A)
    chi = A.indicator()
    return float(np.real(np.dot(convolve(adjoint(chi), chi).vec, rho.phi)))


def arrival_event(g: Groupoid, x: int) -> Event:
    """All transitions ending at outcome ``x``."""
    g.outcome(x)
    return Event(g, [t.id for t in g.transitions if t.target == x])


def interference(rho, A: Event, B: Event) -> float:
    """I(A,B) = μ(A⊔B) − μ(A) − μ(B) = 2 Re D(A,B) for disjoint A, B."""
    _check(rho, A, B)
    if A.members & B.members:
        raise GroupoidError("interference is defined for disjoint events only")
    return 2 * decoherence(rho, A, B).real
