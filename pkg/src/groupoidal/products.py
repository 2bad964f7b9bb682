"""Direct products and free products of groupoids.

Free-product words are tuples of letters ``(factor_index, transition_id)``
written like compositions: the leftmost letter is the *last* step, so the
word ``(b, a)`` means "first a, then b".
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import AlgebraElement
from .core import Groupoid, GroupoidError, Outcome, Transition, _sub, is_morphism

Letter = tuple[int, int]
Word = tuple[Letter, ...]


class InconsistentWord(GroupoidError):
    """Consecutive letters whose endpoints disagree in the ambient object set."""


# -- direct products ---------------------------------------------------------

@dataclass
class DirectProduct:
    factors: tuple[Groupoid, ...]
    product: Groupoid
    components: dict[int, tuple[int, ...]] = field(repr=False)
    index: dict[tuple[int, ...], int] = field(repr=False)
    outcome_components: dict[int, tuple[int, ...]] = field(repr=False)
    outcome_index: dict[tuple[int, ...], int] = field(repr=False)

    def projection(self, a: int) -> dict[int, int]:
        """π_a as a transition map product -> factor ``a``."""
        return {t: comps[a] for t, comps in self.components.items()}

    def padded(self, a: int) -> Groupoid:
        """The subgroupoid G_a × Ω′: transitions that are units in every other slot."""
        keep = {
            t for t, comps in self.components.items()
            if all(self.factors[b].is_unit(c) for b, c in enumerate(comps) if b != a)
        }
        name = f"{self.factors[a].name or a}x Omega'"
        return _sub(self.product, keep, set(self.product.outcome_ids), name)

    def slice(self, a: int, others: Sequence[int]) -> dict[int, int]:
        """Embedding of factor ``a`` as G_a × {others}: α ↦ (1_{x_1},…,α,…,1_{x_n}).

        ``others`` lists one outcome id per remaining factor, in order.
        """
        out = {}
        for t in self.factors[a].transition_ids:
            rest = iter(others)
            comps = tuple(t if b == a else f.unit(next(rest)) for b, f in enumerate(self.factors))
            out[t] = self.index[comps]
        return out

    def tensor_embedding(self, a: int):
        """f ↦ 1 ⊗ … ⊗ f ⊗ … ⊗ 1 from C[G_a] into C[G_1 × … × G_n]."""
        g = self.product
        fa = self.factors[a]

        def push(f: AlgebraElement) -> AlgebraElement:
            if f.parent is not fa:
                raise GroupoidError("element does not belong to this factor")
            v = np.zeros(len(g), dtype=np.complex128)
            for i, t in enumerate(g.transitions):
                comps = self.components[t.id]
                if all(self.factors[b].is_unit(c) for b, c in enumerate(comps) if b != a):
                    v[i] = f[comps[a]]
            return AlgebraElement(g, v)

        return push


def direct_product(gs: Sequence[Groupoid], name: str = "") -> DirectProduct:
    """Transitions are tuples with componentwise composition."""
    gs = tuple(gs)
    if not gs:
        raise GroupoidError("direct product of an empty family")
    o_tuples = list(itertools.product(*[g.outcome_ids for g in gs]))
    outcome_index = {ot: i for i, ot in enumerate(o_tuples)}
    outcomes = [
        Outcome(i, "(" + ",".join(g.outcome(x).label for g, x in zip(gs, ot)) + ")")
        for ot, i in outcome_index.items()
    ]
    t_tuples = list(itertools.product(*[g.transition_ids for g in gs]))
    index = {tt: i for i, tt in enumerate(t_tuples)}
    transitions = []
    for tt, i in index.items():
        src = outcome_index[tuple(g.source(a) for g, a in zip(gs, tt))]
        tgt = outcome_index[tuple(g.target(a) for g, a in zip(gs, tt))]
        lbl = "(" + ",".join(g.transition(a).label for g, a in zip(gs, tt)) + ")"
        transitions.append(Transition(i, lbl, src, tgt))
    unit_of = {outcome_index[ot]: index[tuple(g.unit(x) for g, x in zip(gs, ot))] for ot in o_tuples}
    inverse_of = {index[tt]: index[tuple(g.inverse(a) for g, a in zip(gs, tt))] for tt in t_tuples}
    # componentwise table: iterate over composable tuples factor by factor
    per_factor = [list(g.table.items()) for g in gs]
    compose = {}
    for combo in itertools.product(*per_factor):
        left = tuple(ab[0] for ab, _ in combo)
        right = tuple(ab[1] for ab, _ in combo)
        res = tuple(c for _, c in combo)
        compose[index[left], index[right]] = index[res]
    name = name or " x ".join(g.name or "G" for g in gs)
    product = Groupoid(outcomes, transitions, unit_of, inverse_of, compose, name=name)
    components = {i: tt for tt, i in index.items()}
    outcome_components = {i: ot for ot, i in outcome_index.items()}
    return DirectProduct(gs, product, components, index, outcome_components, outcome_index)


def is_epimorphism(g: Groupoid, h: Groupoid, eta: Mapping[int, int]) -> bool:
    return (
        set(eta) == set(g.transition_ids)
        and set(eta.values()) == set(h.transition_ids)
        and is_morphism(g, h, eta)
        and all(eta[g.inverse(a)] == h.inverse(eta[a]) for a in g.transition_ids)
    )


@dataclass
class UniversalCheck:
    ok: bool
    induced: dict
    failures: list[str] = field(default_factory=list)


def check_product_property(
    dp: DirectProduct, source: Groupoid, etas: Sequence[Mapping[int, int]]
) -> UniversalCheck:
    """Build Φ(γ) = (η_1(γ), …, η_n(γ)) and verify π_a ∘ Φ = η_a and functoriality."""
    if len(etas) != len(dp.factors):
        raise GroupoidError("need one epimorphism per factor")
    for a, (eta, f) in enumerate(zip(etas, dp.factors)):
        if not is_epimorphism(source, f, eta):
            raise GroupoidError(f"map {a} is not a groupoid epimorphism")
    phi = {g: dp.index[tuple(eta[g] for eta in etas)] for g in source.transition_ids}
    failures = []
    for a, eta in enumerate(etas):
        proj = dp.projection(a)
        bad = [g for g in source.transition_ids if proj[phi[g]] != eta[g]]
        if bad:
            failures.append(f"projection {a} disagrees on {bad}")
    if not is_morphism(source, dp.product, phi):
        failures.append("induced map does not preserve composition")
    return UniversalCheck(not failures, phi, failures)


# -- free products -----------------------------------------------------------

@dataclass
class FreeProductSpec:
    """Factors glued along injective object maps ``sigma[a]: factor ids -> ambient ids``."""

    factors: tuple[Groupoid, ...]
    objects: dict[int, str]
    sigma: tuple[dict[int, int], ...]

    def __post_init__(self):
        self.factors = tuple(self.factors)
        self.sigma = tuple(dict(s) for s in self.sigma)
        self.objects = dict(self.objects)
        if len(self.sigma) != len(self.factors):
            raise GroupoidError("need one object map per factor")
        image = set()
        for a, (g, s) in enumerate(zip(self.factors, self.sigma)):
            if set(s) != set(g.outcome_ids):
                raise GroupoidError(f"object map {a} is not defined on every outcome")
            if len(set(s.values())) != len(s):
                raise GroupoidError(f"object map {a} is not injective")
            image |= set(s.values())
        if image != set(self.objects):
            raise GroupoidError("object maps must cover the ambient object set exactly")

    @property
    def common_objects(self) -> set[int]:
        return set(self.objects)


class FreeProduct:
    """The free product of the factors of ``spec``, with reduced words as elements."""

    def __init__(self, spec: FreeProductSpec):
        self.spec = spec
        self._canonical_unit: dict[int, Letter] = {}
        for a, s in enumerate(spec.sigma):
            for x, y in s.items():
                self._canonical_unit.setdefault(y, (a, spec.factors[a].unit(x)))

    # endpoints in the ambient object set
    def letter_source(self, letter: Letter) -> int:
        a, t = letter
        return self.spec.sigma[a][self.spec.factors[a].source(t)]

    def letter_target(self, letter: Letter) -> int:
        a, t = letter
        return self.spec.sigma[a][self.spec.factors[a].target(t)]

    def source(self, w: Word) -> int:
        return self.letter_source(w[-1])

    def target(self, w: Word) -> int:
        return self.letter_target(w[0])

    def is_letter_unit(self, letter: Letter) -> bool:
        a, t = letter
        return self.spec.factors[a].is_unit(t)

    def unit(self, x: int) -> Word:
        return (self._canonical_unit[x],)

    def is_unit(self, w: Word) -> bool:
        return len(w) == 1 and self.is_letter_unit(w[0])

    def check_consistent(self, w: Word) -> None:
        if not w:
            raise InconsistentWord("empty word")
        for a, t in w:
            if not 0 <= a < len(self.spec.factors):
                raise InconsistentWord(f"unknown factor index {a}")
            self.spec.factors[a].transition(t)
        for later, earlier in zip(w, w[1:]):
            if self.letter_target(earlier) != self.letter_source(later):
                raise InconsistentWord(f"letters {earlier} then {later} do not chain")

    def reduce(self, w: Word) -> Word:
        """Normal form: merge adjacent same-factor letters and drop interior units."""
        w = tuple(w)
        self.check_consistent(w)
        stack: list[Letter] = []
        for letter in reversed(w):
            a, t = letter
            g = self.spec.factors[a]
            if g.is_unit(t):
                continue
            if stack and stack[-1][0] == a:
                c = g.compose(t, stack.pop()[1])
                if not g.is_unit(c):
                    stack.append((a, c))
            else:
                stack.append(letter)
        if not stack:
            return self.unit(self.letter_source(w[-1]))
        return tuple(reversed(stack))

    def compose(self, w2: Word, w1: Word) -> Word | None:
        """w2 ∘ w1 = (w2 w1)_red, or None when t(w1) != s(w2)."""
        if self.target(w1) != self.source(w2):
            return None
        return self.reduce(tuple(w2) + tuple(w1))

    def compose_strict(self, w2: Word, w1: Word) -> Word:
        r = self.compose(w2, w1)
        if r is None:
            raise GroupoidError("words are not composable")
        return r

    def inverse(self, w: Word) -> Word:
        return tuple((a, self.spec.factors[a].inverse(t)) for a, t in reversed(w))

    def is_reduced(self, w: Word) -> bool:
        try:
            self.check_consistent(w)
        except InconsistentWord:
            return False
        if len(w) == 1:
            return not self.is_letter_unit(w[0]) or w[0] == self._canonical_unit[self.source(w)]
        if any(self.is_letter_unit(x) for x in w):
            return False
        return all(x[0] != y[0] for x, y in zip(w, w[1:]))

    def enumerate(self, max_length: int = 8) -> list[Word]:
        """All reduced words of length <= ``max_length``, shortest first."""
        if max_length < 1:
            raise GroupoidError("max_length must be >= 1")
        spec = self.spec
        letters = [
            (a, t) for a, g in enumerate(spec.factors) for t in g.transition_ids if not g.is_unit(t)
        ]
        words: list[Word] = [self.unit(x) for x in sorted(spec.objects)]
        layer = [(x,) for x in letters]
        for _ in range(max_length):
            words.extend(layer)
            nxt = []
            for w in layer:
                tgt, last = self.target(w), w[0][0]
                for x in letters:
                    if x[0] != last and self.letter_source(x) == tgt:
                        nxt.append((x,) + w)
            layer = nxt
            if not layer:
                break
        return words

    def canonical_embedding(self, a: int) -> dict[int, Word]:
        """i_a: each transition of factor ``a`` as a one-letter word."""
        g = self.spec.factors[a]
        return {t: self.reduce(((a, t),)) for t in g.transition_ids}

    def label(self, w: Word) -> str:
        if self.is_unit(w):
            return f"1_{self.spec.objects[self.source(w)]}"
        return " ".join(
            f"{self.spec.factors[a].transition(t).label}@{self.spec.factors[a].name or a}"
            for a, t in w
        )

    def to_groupoid(self, words: Sequence[Word], name: str = "") -> tuple[Groupoid, dict[Word, int]]:
        """Materialize a composition-closed finite set of words as an explicit groupoid."""
        ids = {w: i for i, w in enumerate(words)}
        outcomes = [Outcome(x, lbl) for x, lbl in sorted(self.spec.objects.items())]
        transitions = [Transition(i, self.label(w), self.source(w), self.target(w)) for w, i in ids.items()]
        compose = {}
        for w2, w1 in itertools.product(words, repeat=2):
            c = self.compose(w2, w1)
            if c is None:
                continue
            if c not in ids:
                raise GroupoidError("word set is not closed under composition")
            compose[ids[w2], ids[w1]] = ids[c]
        unit_of = {x: ids[self.unit(x)] for x in self.spec.objects}
        inverse_of = {}
        for w, i in ids.items():
            inv = self.inverse(w)
            if inv not in ids:
                raise GroupoidError("word set is not closed under inverses")
            inverse_of[i] = ids[inv]
        g = Groupoid(outcomes, transitions, unit_of, inverse_of, compose, name=name)
        return g, ids


class ZTimesPairs:
    """The infinite groupoid ℤ × A_n with elements ``(k, (i, j))``: j -> i with winding k."""

    def __init__(self, objects: Sequence[int]):
        self.objects = tuple(objects)

    def source(self, e):
        return e[1][1]

    def target(self, e):
        return e[1][0]

    def compose(self, e2, e1):
        if e2[1][1] != e1[1][0]:
            return None
        return (e2[0] + e1[0], (e2[1][0], e1[1][1]))

    def unit(self, x):
        return (0, (x, x))


def check_coproduct_property(
    fp: FreeProduct,
    target,
    phis: Sequence[Mapping[int, object]],
    max_length: int = 8,
) -> UniversalCheck:
    """Induce Φ(α_r…α_1) = φ(α_r)∘…∘φ(α_1) and verify Φ∘i_a = φ_a and multiplicativity.

    ``target`` needs ``compose``, ``source`` and ``target``; it may be an
    explicit :class:`Groupoid` or an infinite model such as :class:`ZTimesPairs`.
    Multiplicativity is checked on every composable pair of enumerated words.
    """
    spec = fp.spec
    if len(phis) != len(spec.factors):
        raise GroupoidError("need one morphism per factor")
    obj: dict[int, object] = {}
    for a, (g, phi) in enumerate(zip(spec.factors, phis)):
        if not is_morphism(g, target, phi):
            raise GroupoidError(f"map {a} is not a groupoid morphism")
        for x in g.outcome_ids:
            y = spec.sigma[a][x]
            img = target.source(phi[g.unit(x)])
            if obj.setdefault(y, img) != img:
                raise GroupoidError(f"maps disagree on shared object {spec.objects[y]}")

    def induced(w: Word):
        acc = None
        for a, t in reversed(w):
            e = phis[a][t]
            acc = e if acc is None else target.compose(e, acc)
            if acc is None:
                raise GroupoidError("induced map hit a non-composable pair")
        return acc

    words = fp.enumerate(max_length)
    big = {w: induced(w) for w in words}
    failures = []
    for a in range(len(spec.factors)):
        for t, w in fp.canonical_embedding(a).items():
            if big[w] != phis[a][t]:
                failures.append(f"Φ∘i_{a} != φ_{a} at transition {t}")
    for w2, w1 in itertools.product(words, repeat=2):
        c = fp.compose(w2, w1)
        if c is None or c not in big:
            continue
        if big[c] != target.compose(big[w2], big[w1]):
            failures.append(f"Φ not multiplicative on {w2} ∘ {w1}")
    return UniversalCheck(not failures, big, failures)
