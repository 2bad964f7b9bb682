"""The groupoid *-algebra C[G] and its matrix representations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .core import Groupoid, GroupoidError, is_subgroupoid

PRUNE = 1e-14


class AlgebraElement:
    """A finitely supported function on the transitions of ``parent``.

    Coefficients are held densely in transition order; ``coeffs`` gives the
    sparse view keyed by transition id.
    """

    __slots__ = ("parent", "vec")
    __array_priority__ = 100

    def __init__(self, parent: Groupoid, vec):
        self.parent = parent
        v = np.array(vec, dtype=np.complex128)
        if v.shape != (len(parent),):
            raise GroupoidError("coefficient vector does not match the groupoid")
        v[np.abs(v) < PRUNE] = 0
        self.vec = v

    @classmethod
    def from_coeffs(cls, parent: Groupoid, coeffs: Mapping[int, complex]) -> "AlgebraElement":
        v = np.zeros(len(parent), dtype=np.complex128)
        for a, c in coeffs.items():
            v[parent.pos[parent.transition(a).id]] += c
        return cls(parent, v)

    @property
    def coeffs(self) -> dict[int, complex]:
        return {
            self.parent.transitions[i].id: complex(self.vec[i]) for i in np.flatnonzero(self.vec)
        }

    def __getitem__(self, a: int) -> complex:
        return complex(self.vec[self.parent.pos[a]])

    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.parent is not self.parent:
            raise GroupoidError("elements belong to different groupoids")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.parent, self.vec + other.vec)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.parent, self.vec - other.vec)

    def __neg__(self):
        return AlgebraElement(self.parent, -self.vec)

    def __mul__(self, c):
        if isinstance(c, AlgebraElement):
            return NotImplemented
        return AlgebraElement(self.parent, self.vec * complex(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return AlgebraElement(self.parent, self.vec / complex(c))

    def __matmul__(self, other):
        return convolve(self, other)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement) or other.parent is not self.parent:
            return NotImplemented
        return bool(np.array_equal(self.vec, other.vec))

    __hash__ = None  # type: ignore[assignment]

    def close(self, other: "AlgebraElement", tol: float = 1e-9) -> bool:
        return other.parent is self.parent and float(np.max(np.abs(self.vec - other.vec), initial=0)) <= tol

    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def star(self) -> "AlgebraElement":
        return adjoint(self)

    def __repr__(self):
        g = self.parent
        terms = [f"({c:.6g})*{g.transition(a).label}" for a, c in self.coeffs.items()]
        return " + ".join(terms) if terms else "0"


def delta(g: Groupoid, a: int) -> AlgebraElement:
    v = np.zeros(len(g), dtype=np.complex128)
    v[g.pos[g.transition(a).id]] = 1
    return AlgebraElement(g, v)


def zero(g: Groupoid) -> AlgebraElement:
    return AlgebraElement(g, np.zeros(len(g)))


def unit(g: Groupoid) -> AlgebraElement:
    """Σ_x δ_{1_x}, the two-sided unit of convolution."""
    v = np.zeros(len(g), dtype=np.complex128)
    v[g.unit_positions] = 1
    return AlgebraElement(g, v)


def convolve(f: AlgebraElement, g: AlgebraElement) -> AlgebraElement:
    """(f ⋆ g) = Σ_{s(α)=t(β)} f(α) g(β) δ_{α∘β}."""
    if f.parent is not g.parent:
        raise GroupoidError("convolution of elements from different groupoids")
    G = f.parent
    ii, jj, kk = G.composable_pairs
    return AlgebraElement(G, kernels.convolve(f.vec, g.vec, ii, jj, kk, len(G)))


def product(elements) -> AlgebraElement:
    """Left-to-right convolution product ``e1 ⋆ e2 ⋆ ... ⋆ en``."""
    it = iter(elements)
    out = next(it)
    for e in it:
        out = convolve(out, e)
    return out


def adjoint(f: AlgebraElement) -> AlgebraElement:
    """f* = Σ conj(f(α)) δ_{α⁻¹}."""
    G = f.parent
    v = np.zeros(len(G), dtype=np.complex128)
    v[G.inv_positions] = np.conj(f.vec)
    return AlgebraElement(G, v)


def embed(h: Groupoid, g: Groupoid, embedding: Mapping[int, int] | None = None):
    """The algebra inclusion C[h] -> C[g] induced by a subgroupoid embedding.

    The unit of ``h`` goes to the sum of the units of ``h`` only, which is not
    the unit of ``g`` unless ``h`` is full.
    """
    emb = dict(embedding) if embedding is not None else {a: a for a in h.transition_ids}
    if not is_subgroupoid(h, g, emb):
        raise GroupoidError("embedding is not a subgroupoid morphism")
    idx = np.array([g.pos[emb[t.id]] for t in h.transitions], dtype=np.intp)

    def push(f: AlgebraElement) -> AlgebraElement:
        if f.parent is not h:
            raise GroupoidError("element does not belong to the subgroupoid")
        v = np.zeros(len(g), dtype=np.complex128)
        v[idx] = f.vec
        return AlgebraElement(g, v)

    return push


@dataclass
class MatrixRepresentation:
    dimension: int
    images: dict[int, np.ndarray] = field(repr=False)

    def __call__(self, f: AlgebraElement) -> np.ndarray:
        out = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        for a, c in f.coeffs.items():
            out += c * self.images[a]
        return out


def fundamental_representation(g: Groupoid) -> MatrixRepresentation:
    """π₀(α) sends the basis vector of s(α) to that of t(α)."""
    n = len(g.outcomes)
    images = {}
    for t in g.transitions:
        m = np.zeros((n, n), dtype=np.complex128)
        m[g.outcome_pos[t.target], g.outcome_pos[t.source]] = 1
        images[t.id] = m
    return MatrixRepresentation(n, images)


def left_regular_representation(g: Groupoid) -> MatrixRepresentation:
    """λ(δ_α) δ_β = δ_{α∘β} on the orthonormal basis {δ_β}."""
    n = len(g)
    comp = g.comp_matrix
    images = {}
    for i, t in enumerate(g.transitions):
        m = np.zeros((n, n), dtype=np.complex128)
        cols = np.flatnonzero(comp[i] >= 0)
        m[comp[i, cols], cols] = 1
        images[t.id] = m
    return MatrixRepresentation(n, images)


@dataclass
class GNSRepresentation:
    representation: MatrixRepresentation
    cyclic_vector: np.ndarray
    gram: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.representation.dimension


def gns_representation(state, null_tol: float = 1e-10) -> GNSRepresentation:
    """GNS construction from the Gram matrix ``ρ(δ_α* ⋆ δ_β)``.

    Directions with Gram eigenvalue below ``null_tol`` are quotiented out.
    """
    from .states import check_positivity

    report = check_positivity(state)
    if not report.passed:
        raise GroupoidError(f"state is not positive (min eigenvalue {report.min_eigenvalue:.3g})")
    g = state.parent
    gram = kernels.gram(state.phi, g.inv_positions, g.comp_matrix)
    herm = (gram + gram.conj().T) / 2
    w, v = np.linalg.eigh(herm)
    keep = w > null_tol
    w, v = w[keep], v[:, keep]
    to_gns = np.sqrt(w)[:, None] * v.conj().T
    from_gns = v / np.sqrt(w)[None, :]
    lam = left_regular_representation(g)
    images = {a: to_gns @ m @ from_gns for a, m in lam.images.items()}
    cyclic = to_gns @ unit(g).vec
    return GNSRepresentation(MatrixRepresentation(int(keep.sum()), images), cyclic, gram)
