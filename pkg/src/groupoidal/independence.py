"""Independence of subalgebras with respect to states: usual, free and generalized.

Generalized (and free) independence quantify over all centred alternating
products, so the checkers here are falsifiers: seeded witnesses first, then a
bounded random search.  A passing report means no violation was found.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .algebra import AlgebraElement, convolve, embed, product
from .algebra import unit as algebra_unit
from .core import Groupoid, GroupoidError

DEFAULT_TOL = 1e-8
_DEGENERATE = 1e-12


class Subalgebra:
    """A unital subalgebra of C[parent], spanned by ``basis`` (rows are coefficient vectors)."""

    def __init__(self, parent: Groupoid, basis, unit_vec, name: str = ""):
        self.parent = parent
        self.basis = np.atleast_2d(np.asarray(basis, dtype=np.complex128))
        if self.basis.shape[1] != len(parent):
            raise GroupoidError("basis vectors do not match the parent groupoid")
        self.unit_vec = np.asarray(unit_vec, dtype=np.complex128)
        self.name = name
        self._pinv = np.linalg.pinv(self.basis)

    @classmethod
    def from_subgroupoid(
        cls, parent: Groupoid, h: Groupoid, embedding: Mapping[int, int] | None = None, name: str = ""
    ) -> "Subalgebra":
        """C[h] pushed into C[parent]; its unit is Σ_{x∈h} δ_{1_x}."""
        push = embed(h, parent, embedding)
        eye = np.eye(len(h), dtype=np.complex128)
        basis = [push(AlgebraElement(h, row)).vec for row in eye]
        return cls(parent, basis, push(algebra_unit(h)).vec, name or h.name)

    @classmethod
    def tensor_factor(cls, dp, a: int) -> "Subalgebra":
        """1 ⊗ … ⊗ C[G_a] ⊗ … ⊗ 1 inside the algebra of a direct product."""
        fa = dp.factors[a]
        push = dp.tensor_embedding(a)
        eye = np.eye(len(fa), dtype=np.complex128)
        basis = [push(AlgebraElement(fa, row)).vec for row in eye]
        return cls(dp.product, basis, algebra_unit(dp.product).vec, f"C[{fa.name or a}]")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def unit(self) -> AlgebraElement:
        return AlgebraElement(self.parent, self.unit_vec)

    def basis_elements(self) -> list[AlgebraElement]:
        return [AlgebraElement(self.parent, row) for row in self.basis]

    def element(self, coeffs) -> AlgebraElement:
        return AlgebraElement(self.parent, np.asarray(coeffs, dtype=np.complex128) @ self.basis)

    def coordinates(self, f: AlgebraElement, tol: float = 1e-9) -> np.ndarray:
        c = f.vec @ self._pinv
        if np.max(np.abs(c @ self.basis - f.vec), initial=0) > tol:
            raise GroupoidError(f"element is not in subalgebra {self.name!r}")
        return c

    def contains(self, f: AlgebraElement, tol: float = 1e-9) -> bool:
        try:
            self.coordinates(f, tol)
        except GroupoidError:
            return False
        return True

    def __repr__(self):
        return f"<Subalgebra {self.name} dim={self.dim}>"


@dataclass
class SubalgebraFamily:
    parent: Groupoid
    members: list[Subalgebra]

    def __post_init__(self):
        self.members = list(self.members)
        if any(m.parent is not self.parent for m in self.members):
            raise GroupoidError("family members live on different groupoids")

    def __len__(self):
        return len(self.members)

    @classmethod
    def from_subgroupoids(cls, parent: Groupoid, pairs) -> "SubalgebraFamily":
        """``pairs`` holds subgroupoids or ``(subgroupoid, embedding)`` tuples."""
        members = []
        for p in pairs:
            h, emb = p if isinstance(p, tuple) else (p, None)
            members.append(Subalgebra.from_subgroupoid(parent, h, emb))
        return cls(parent, members)

    @classmethod
    def padded(cls, dp) -> "SubalgebraFamily":
        """Members C[G_a × Ω′] built from the padded factor subgroupoids."""
        return cls.from_subgroupoids(dp.product, [dp.padded(a) for a in range(len(dp.factors))])

    @classmethod
    def tensor(cls, dp) -> "SubalgebraFamily":
        return cls(dp.product, [Subalgebra.tensor_factor(dp, a) for a in range(len(dp.factors))])


@dataclass
class Witness:
    state_index: int
    members: tuple[int, ...]
    elements: tuple[AlgebraElement, ...]
    centered: tuple[AlgebraElement, ...]
    value: complex
    bound: float


@dataclass
class IndependenceReport:
    passed: bool
    notion: str
    trials: int
    max_violation: float
    witness: Witness | None = None
    message: str = ""

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def center(rho, a: AlgebraElement) -> AlgebraElement:
    """ā = a − (ρ(a)/ρ(1))·1, so that ρ(ā) = 0 also for unnormalized ρ."""
    return a - (np.dot(a.vec, rho.phi) / rho.total) * algebra_unit(a.parent)


def witness_violation(rho, centered: Sequence[AlgebraElement]) -> tuple[complex, float]:
    """(ρ(ā₁⋆…⋆ā_r), Π‖ā_k‖) recomputed from scratch."""
    value = complex(np.dot(product(centered).vec, rho.phi))
    return value, float(np.prod([c.norm() for c in centered]))


def _need_family(fam: SubalgebraFamily):
    if len(fam) == 0:
        raise GroupoidError("empty subalgebra family")


def check_usual_independence(
    fam: SubalgebraFamily,
    states: Sequence,
    trials: int = 200,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> IndependenceReport:
    """Pairwise commutation on basis elements, then multiplicativity of ρ on tuples from distinct members."""
    _need_family(fam)
    if len(fam) == 1:
        return IndependenceReport(True, "usual", 0, 0.0, message="single member: vacuous")
    worst, checked = 0.0, 0
    for (i, m1), (j, m2) in itertools.combinations(enumerate(fam.members), 2):
        for a in m1.basis_elements():
            for b in m2.basis_elements():
                checked += 1
                comm = convolve(a, b) - convolve(b, a)
                if comm.norm() > tol:
                    w = Witness(-1, (i, j), (a, b), (a, b), complex(comm.norm()), tol)
                    return IndependenceReport(
                        False, "usual", checked, comm.norm(), w, "members do not commute"
                    )
    rng = np.random.default_rng(seed)
    for si, rho in enumerate(states):
        for _ in range(trials):
            checked += 1
            k = int(rng.integers(2, len(fam) + 1))
            idx = tuple(int(x) for x in rng.permutation(len(fam))[:k])
            elems = tuple(_random_element(fam.members[m], rng) for m in idx)
            lhs = complex(np.dot(product(elems).vec, rho.phi))
            rhs = complex(np.prod([np.dot(e.vec, rho.phi) for e in elems]))
            bound = tol * float(np.prod([e.norm() for e in elems]))
            gap = abs(lhs - rhs)
            worst = max(worst, gap)
            if gap > bound:
                w = Witness(si, idx, elems, elems, lhs - rhs, bound)
                return IndependenceReport(False, "usual", checked, gap, w, "expectation not multiplicative")
    return IndependenceReport(True, "usual", checked, worst, message=f"no violation found ({checked} checks)")


def _random_coeffs(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform on the complex unit disc, each row normalized to unit length."""
    r = np.sqrt(rng.random(shape))
    c = r * np.exp(2j * np.pi * rng.random(shape))
    return c / np.linalg.norm(c, axis=-1, keepdims=True)


def _random_element(m: Subalgebra, rng) -> AlgebraElement:
    return m.element(_random_coeffs(rng, (m.dim,)))


def _alternating(rng, n_members: int, rows: int, r: int) -> np.ndarray:
    """Member indices with consecutive entries distinct."""
    seq = np.empty((rows, r), dtype=np.intp)
    seq[:, 0] = rng.integers(0, n_members, rows)
    for k in range(1, r):
        step = rng.integers(1, n_members, rows)
        seq[:, k] = (seq[:, k - 1] + step) % n_members
    return seq


class _Search:
    def __init__(self, fam: SubalgebraFamily, max_word: int, tol: float, batch: int):
        g = fam.parent
        self.fam, self.max_word, self.tol, self.batch = fam, max_word, tol, batch
        self.pairs = g.composable_pairs
        self.n = len(g)
        d = max(m.dim for m in fam.members)
        self.dims = np.array([m.dim for m in fam.members])
        self.stack = np.zeros((len(fam), d, self.n), dtype=np.complex128)
        for i, m in enumerate(fam.members):
            self.stack[i, : m.dim] = m.basis
        self.unit = algebra_unit(g).vec

    def seeded(self, rho, si, witnesses) -> Witness | None:
        for word in witnesses:
            idx = tuple(m for m, _ in word)
            elems = tuple(e for _, e in word)
            cent = tuple(center(rho, e) for e in elems)
            value, norms = witness_violation(rho, cent)
            if norms > _DEGENERATE and abs(value) > self.tol * norms:
                return Witness(si, idx, elems, cent, value, self.tol * norms)
        return None

    def random(self, rho, si, trials, rng) -> tuple[Witness | None, int, float]:
        done, worst = 0, 0.0
        ii, jj, kk = self.pairs
        while done < trials:
            rows = min(self.batch, trials - done)
            r = int(rng.integers(2, self.max_word + 1))
            seq = _alternating(rng, len(self.fam), rows, r)
            coeffs = _random_coeffs(rng, (rows, r, self.stack.shape[1]))
            # zero out padding beyond each member's dimension, then renormalize
            mask = np.arange(self.stack.shape[1])[None, None, :] < self.dims[seq][:, :, None]
            coeffs = np.where(mask, coeffs, 0)
            coeffs /= np.linalg.norm(coeffs, axis=-1, keepdims=True)
            elems = np.einsum("tkd,tkdn->tkn", coeffs, self.stack[seq])
            ev = elems @ rho.phi
            cent = elems - (ev / rho.total)[:, :, None] * self.unit[None, None, :]
            norms = np.prod(np.linalg.norm(cent, axis=-1), axis=1)
            acc = cent[:, -1]
            for k in range(r - 2, -1, -1):
                acc = kernels.convolve_many(cent[:, k], acc, ii, jj, kk, self.n)
            vals = acc @ rho.phi
            ok = norms > _DEGENERATE
            ratio = np.where(ok, np.abs(vals) / np.where(ok, norms, 1), 0)
            worst = max(worst, float(ratio.max(initial=0)))
            bad = np.flatnonzero(ok & (np.abs(vals) > self.tol * norms))
            if len(bad):
                t = bad[0]
                g = self.fam.parent
                w = Witness(
                    si,
                    tuple(int(m) for m in seq[t]),
                    tuple(AlgebraElement(g, e) for e in elems[t]),
                    tuple(AlgebraElement(g, e) for e in cent[t]),
                    complex(vals[t]),
                    float(self.tol * norms[t]),
                )
                return w, done + int(t) + 1, worst
            done += rows
        return None, done, worst


def _basis_pair_witnesses(fam: SubalgebraFamily):
    for i, j in itertools.permutations(range(len(fam)), 2):
        for a in fam.members[i].basis_elements():
            for b in fam.members[j].basis_elements():
                yield ((i, a), (j, b))


def check_generalized_independence(
    fam: SubalgebraFamily,
    states: Sequence,
    max_word: int = 6,
    trials: int = 10_000,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    witnesses: Sequence[Sequence[tuple[int, AlgebraElement]]] = (),
    jobs: int = 1,
    batch: int = 2000,
    notion: str = "generalized",
    basis_seeds: bool = True,
) -> IndependenceReport:
    """Search for a centred alternating product with non-vanishing expectation.

    ``witnesses`` are tried first, then (with ``basis_seeds``) every
    length-2 product of basis elements from two different members, then ``trials`` random words of
    length 2..``max_word`` per state.  Relative tolerance: a violation is
    |ρ(ā₁⋆…⋆ā_r)| > tol·Π‖ā_k‖.
    """
    _need_family(fam)
    if not states:
        raise GroupoidError("need at least one state")
    if max_word < 2:
        raise GroupoidError("max_word must be at least 2")
    if len(fam) == 1:
        return IndependenceReport(True, notion, 0, 0.0, message="single member: vacuous")
    search = _Search(fam, max_word, tol, batch)
    seeds = list(witnesses)
    streams = np.random.SeedSequence(seed).spawn(len(states))

    def run(si):
        rho = states[si]
        w = search.seeded(rho, si, seeds)
        if w is None and basis_seeds:
            w = search.seeded(rho, si, _basis_pair_witnesses(fam))
        if w is not None:
            return w, 0, abs(w.value) / (w.bound / tol)
        return search.random(rho, si, trials, np.random.default_rng(streams[si]))

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(run, range(len(states))))
    else:
        results = []
        for si in range(len(states)):
            results.append(run(si))
            if results[-1][0] is not None:
                break
    total = sum(n for _, n, _ in results)
    worst = max(v for _, _, v in results)
    for w, _, _ in results:
        if w is not None:
            return IndependenceReport(
                False, notion, total, worst, w,
                f"centred alternating product of length {len(w.members)} has expectation {w.value:.6g}",
            )
    return IndependenceReport(
        True, notion, total, worst,
        message=f"no violation found ({total} trials, r <= {max_word})",
    )


def check_free_independence(fam: SubalgebraFamily, rho, **params) -> IndependenceReport:
    return check_generalized_independence(fam, [rho], notion="free", **params)


class MemberFunctional:
    """A state restricted to one member, evaluated through member coordinates."""

    def __init__(self, member: Subalgebra, values):
        self.member = member
        self.values = np.asarray(values, dtype=np.complex128)

    def __call__(self, f: AlgebraElement) -> complex:
        return complex(self.member.coordinates(f) @ self.values)


def member_restriction(rho, member: Subalgebra) -> MemberFunctional:
    return MemberFunctional(member, member.basis @ rho.phi)


def _merge(word):
    out = []
    for m, a in word:
        if out and out[-1][0] == m:
            out[-1] = (m, convolve(out[-1][1], a))
        else:
            out.append((m, a))
    return out


def reconstruct_moment(
    fam: SubalgebraFamily,
    restrictions: Sequence[MemberFunctional],
    word: Sequence[tuple[int, AlgebraElement]],
) -> complex:
    """ρ(a₁⋆…⋆a_n) from the member restrictions alone, assuming generalized independence.

    Uses ρ(ā₁…ā_n) = 0 expanded over subsets:
    ρ(a₁…a_n) = −Σ_{S⊊[n]} Π_{k∉S}(−c_k) ρ(a_S), with c_k = ρ(a_k)/ρ(1).
    """
    if len(restrictions) != len(fam):
        raise GroupoidError("need one restriction per member")
    word = list(word)
    if not word:
        raise GroupoidError("empty word")
    for (m1, _), (m2, _) in zip(word, word[1:]):
        if m1 == m2:
            raise GroupoidError("word does not alternate between members")
    for m, a in word:
        if not fam.members[m].contains(a):
            raise GroupoidError(f"element is not in member {m}")
    total = restrictions[0](fam.members[0].unit)

    def moment(w):
        w = _merge(w)
        if len(w) == 1:
            m, a = w[0]
            return restrictions[m](a)
        c = [moment([x]) / total for x in w]
        n = len(w)
        acc = 0j
        for size in range(n):
            for sub in itertools.combinations(range(n), size):
                coef = np.prod([-c[k] for k in range(n) if k not in sub])
                acc += coef * (moment([w[k] for k in sub]) if sub else total)
        return -acc

    return complex(moment(word))
