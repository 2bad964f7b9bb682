"""Finite groupoids with explicit composition tables and their subgroupoids.

Composition follows the right-to-left convention: ``compose(a, b)`` is
``a ∘ b`` and is defined iff ``source(a) == target(b)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np


class GroupoidError(ValueError):
    """Raised for malformed groupoid input (unknown ids, bad arguments)."""


@dataclass(frozen=True)
class Outcome:
    id: int
    label: str


@dataclass(frozen=True)
class Transition:
    id: int
    label: str
    source: int
    target: int


class Groupoid:
    """A finite groupoid given by outcomes, transitions and a partial composition table.

    Ids are arbitrary distinct integers; subgroupoids keep the ids of their
    parent so that the inclusion is the identity map on ids.  Instances are
    treated as immutable.
    """

    def __init__(
        self,
        outcomes: Iterable[Outcome],
        transitions: Iterable[Transition],
        unit_of: Mapping[int, int],
        inverse_of: Mapping[int, int],
        compose: Mapping[tuple[int, int], int],
        name: str = "",
    ):
        self.outcomes: tuple[Outcome, ...] = tuple(outcomes)
        self.transitions: tuple[Transition, ...] = tuple(transitions)
        self.unit_of: dict[int, int] = dict(unit_of)
        self.inverse_of: dict[int, int] = dict(inverse_of)
        self.table: dict[tuple[int, int], int] = dict(compose)
        self.name = name

        self._outcome = {o.id: o for o in self.outcomes}
        self._transition = {t.id: t for t in self.transitions}
        if len(self._outcome) != len(self.outcomes):
            raise GroupoidError("duplicate outcome id")
        if len(self._transition) != len(self.transitions):
            raise GroupoidError("duplicate transition id")
        for t in self.transitions:
            if t.source not in self._outcome or t.target not in self._outcome:
                raise GroupoidError(f"transition {t.label!r} has an unknown endpoint")
        self.pos = {t.id: i for i, t in enumerate(self.transitions)}
        self.outcome_pos = {o.id: i for i, o in enumerate(self.outcomes)}

    # -- basic accessors -------------------------------------------------
    def __len__(self) -> int:
        return len(self.transitions)

    def __repr__(self) -> str:
        name = f" {self.name!r}" if self.name else ""
        return f"<Groupoid{name}: {len(self.outcomes)} outcomes, {len(self)} transitions>"

    @property
    def outcome_ids(self) -> list[int]:
        return [o.id for o in self.outcomes]

    @property
    def transition_ids(self) -> list[int]:
        return [t.id for t in self.transitions]

    def outcome(self, x: int) -> Outcome:
        try:
            return self._outcome[x]
        except KeyError:
            raise GroupoidError(f"unknown outcome id {x}") from None

    def transition(self, a: int) -> Transition:
        try:
            return self._transition[a]
        except KeyError:
            raise GroupoidError(f"unknown transition id {a}") from None

    def source(self, a: int) -> int:
        return self.transition(a).source

    def target(self, a: int) -> int:
        return self.transition(a).target

    def inverse(self, a: int) -> int:
        return self.inverse_of[a]

    def unit(self, x: int) -> int:
        return self.unit_of[x]

    def is_unit(self, a: int) -> bool:
        t = self.transition(a)
        return t.source == t.target and self.unit_of.get(t.source) == a

    def composable(self, a: int, b: int) -> bool:
        return self.source(a) == self.target(b)

    def compose(self, a: int, b: int) -> int | None:
        """``a ∘ b`` or None when the pair is not composable."""
        return self.table.get((a, b))

    def by_label(self, label: str) -> int:
        for t in self.transitions:
            if t.label == label:
                return t.id
        raise GroupoidError(f"no transition labelled {label!r}")

    def outcome_by_label(self, label: str) -> int:
        for o in self.outcomes:
            if o.label == label:
                return o.id
        raise GroupoidError(f"no outcome labelled {label!r}")

    def hom(self, x: int, y: int) -> list[int]:
        return [t.id for t in self.transitions if t.source == x and t.target == y]

    # -- dense views used by the numeric kernels ---------------------------
    @cached_property
    def comp_matrix(self) -> np.ndarray:
        """``comp_matrix[i, j]`` is the position of ``t_i ∘ t_j`` or -1."""
        n = len(self)
        m = np.full((n, n), -1, dtype=np.intp)
        for (a, b), c in self.table.items():
            m[self.pos[a], self.pos[b]] = self.pos[c]
        return m

    @cached_property
    def composable_pairs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flat (i, j, k) arrays over all composable position pairs."""
        i, j = np.nonzero(self.comp_matrix >= 0)
        k = self.comp_matrix[i, j]
        return (i.astype(np.intp), j.astype(np.intp), k.astype(np.intp))

    @cached_property
    def inv_positions(self) -> np.ndarray:
        return np.array([self.pos[self.inverse_of[t.id]] for t in self.transitions], dtype=np.intp)

    @cached_property
    def unit_positions(self) -> np.ndarray:
        return np.array([self.pos[self.unit_of[o.id]] for o in self.outcomes], dtype=np.intp)


def make_groupoid(outcomes, transitions, compose, name: str = "") -> Groupoid:
    """Build a groupoid from raw tables, deriving units and inverses from composition.

    ``outcomes`` is a list of ``(id, label)``; ``transitions`` a list of
    ``(id, label, source, target)``; ``compose`` maps ``(a, b)`` to ``a ∘ b``.
    """
    outs = [Outcome(i, lbl) for i, lbl in outcomes]
    trans = [Transition(i, lbl, s, t) for i, lbl, s, t in transitions]
    unit_of = {}
    for t in trans:
        if t.source == t.target and compose.get((t.id, t.id)) == t.id:
            unit_of.setdefault(t.source, t.id)
    inverse_of = {}
    for t in trans:
        u = unit_of.get(t.source)
        for r in trans:
            if r.source == t.target and r.target == t.source and compose.get((r.id, t.id)) == u:
                inverse_of[t.id] = r.id
                break
    return Groupoid(outs, trans, unit_of, inverse_of, compose, name=name)


def pair_groupoid(n: int, labels: list[str] | None = None, name: str = "") -> Groupoid:
    """The groupoid of pairs A_n: one transition ``(i, j): j -> i`` per ordered pair."""
    if n < 1:
        raise GroupoidError("pair_groupoid needs n >= 1")
    labels = labels or [str(i) for i in range(n)]
    if len(labels) != n:
        raise GroupoidError("need one label per outcome")
    outcomes = [Outcome(i, labels[i]) for i in range(n)]
    tid = {(i, j): i * n + j for i in range(n) for j in range(n)}
    transitions = []
    for (i, j), k in tid.items():
        lbl = f"1_{labels[i]}" if i == j else f"{labels[j]}->{labels[i]}"
        transitions.append(Transition(k, lbl, j, i))
    compose = {
        (tid[i, j], tid[j, k]): tid[i, k]
        for i in range(n) for j in range(n) for k in range(n)
    }
    unit_of = {i: tid[i, i] for i in range(n)}
    inverse_of = {tid[i, j]: tid[j, i] for i in range(n) for j in range(n)}
    return Groupoid(outcomes, transitions, unit_of, inverse_of, compose, name=name or f"A{n}")


def unit_groupoid(n: int, labels: list[str] | None = None, name: str = "") -> Groupoid:
    """Totally disconnected groupoid of ``n`` units."""
    labels = labels or [str(i) for i in range(n)]
    outcomes = [Outcome(i, labels[i]) for i in range(n)]
    transitions = [Transition(i, f"1_{labels[i]}", i, i) for i in range(n)]
    ident = {i: i for i in range(n)}
    return Groupoid(outcomes, transitions, ident, ident, {(i, i): i for i in range(n)}, name=name or f"U{n}")


def cyclic_group(n: int, name: str = "") -> Groupoid:
    """The cyclic group Z_n as a one-object groupoid; transition k is the k-th power."""
    outcomes = [Outcome(0, "*")]
    transitions = [Transition(k, "e" if k == 0 else f"g^{k}", 0, 0) for k in range(n)]
    compose = {(a, b): (a + b) % n for a in range(n) for b in range(n)}
    inverse_of = {k: (-k) % n for k in range(n)}
    return Groupoid(outcomes, transitions, {0: 0}, inverse_of, compose, name=name or f"Z{n}")


def validate(g: Groupoid) -> list[str]:
    """List every violated groupoid axiom; an empty list means ``g`` is a groupoid.

    Checks that fail because a needed composition is missing are skipped, the
    missing entry itself being the reported violation.
    """
    out: list[str] = []
    ids = g.transition_ids
    for a in ids:
        for b in ids:
            c = g.table.get((a, b))
            if g.composable(a, b):
                if c is None:
                    out.append(f"missing composition: {a} o {b}")
                elif c not in g._transition:
                    out.append(f"composition result unknown: {a} o {b} = {c}")
                elif g.source(c) != g.source(b) or g.target(c) != g.target(a):
                    out.append(f"composition endpoints: {a} o {b} = {c}")
            elif c is not None:
                out.append(f"spurious composition: {a} o {b} defined but s({a}) != t({b})")

    def comp(a, b):
        c = g.table.get((a, b))
        return c if c in g._transition else None

    for a, b, c in itertools.product(ids, repeat=3):
        if not (g.composable(a, b) and g.composable(b, c)):
            continue
        ab, bc = comp(a, b), comp(b, c)
        if ab is None or bc is None:
            continue
        left, right = comp(ab, c), comp(a, bc)
        if left is None or right is None:
            continue
        if left != right:
            out.append(f"associativity: ({a} o {b}) o {c} = {left} != {right} = {a} o ({b} o {c})")

    for x in g.outcome_ids:
        if x not in g.unit_of:
            out.append(f"unit missing at outcome {x}")
            continue
        u = g.unit_of[x]
        if u not in g._transition or g.source(u) != x or g.target(u) != x:
            out.append(f"unit at outcome {x} is not a loop at {x}: {u}")
    for a in ids:
        s, t = g.source(a), g.target(a)
        us, ut = g.unit_of.get(s), g.unit_of.get(t)
        if us is not None:
            r = comp(a, us)
            if r is not None and r != a:
                out.append(f"right unit: {a} o 1_{s} = {r}")
        if ut is not None:
            r = comp(ut, a)
            if r is not None and r != a:
                out.append(f"left unit: 1_{t} o {a} = {r}")
        inv = g.inverse_of.get(a)
        if inv is None or inv not in g._transition:
            out.append(f"inverse missing for {a}")
            continue
        if g.source(inv) != t or g.target(inv) != s:
            out.append(f"inverse endpoints: {inv} is not {t} -> {s} for {a}")
            continue
        if g.inverse_of.get(inv) != a:
            out.append(f"inverse not involutive at {a}")
        r = comp(inv, a)
        if r is not None and us is not None and r != us:
            out.append(f"left inverse: {inv} o {a} = {r} != 1_{s}")
        r = comp(a, inv)
        if r is not None and ut is not None and r != ut:
            out.append(f"right inverse: {a} o {inv} = {r} != 1_{t}")
    units = list(g.unit_of.values())
    if len(set(units)) != len(units):
        out.append("unit_of is not injective")
    return out


def subgroupoid(g: Groupoid, ids: Iterable[int], name: str = "") -> Groupoid:
    """The subgroupoid carried by ``ids`` (must be closed); its objects are the endpoints used."""
    keep = set(ids)
    for a in keep:
        g.transition(a)
    objs = {g.source(a) for a in keep} | {g.target(a) for a in keep}
    return _sub(g, keep, objs, name)


def _sub(g: Groupoid, keep: set[int], objs: set[int], name: str) -> Groupoid:
    outcomes = [o for o in g.outcomes if o.id in objs]
    transitions = [t for t in g.transitions if t.id in keep]
    unit_of = {x: u for x, u in g.unit_of.items() if x in objs and u in keep}
    inverse_of = {a: b for a, b in g.inverse_of.items() if a in keep and b in keep}
    compose = {
        (a, b): c for (a, b), c in g.table.items() if a in keep and b in keep and c in keep
    }
    return Groupoid(outcomes, transitions, unit_of, inverse_of, compose, name=name)


def restriction(g: Groupoid, objects: Iterable[int], name: str = "") -> Groupoid:
    """G_Λ: every transition with both endpoints in ``objects``."""
    lam = set(objects)
    for x in lam:
        g.outcome(x)
    keep = {t.id for t in g.transitions if t.source in lam and t.target in lam}
    return _sub(g, keep, lam, name)


def isotropy_group(g: Groupoid, x: int) -> Groupoid:
    return restriction(g, [x], name=f"{g.name}_{g.outcome(x).label}")


def fundamental_subgroupoid(g: Groupoid) -> Groupoid:
    keep = {t.id for t in g.transitions if t.source == t.target}
    return _sub(g, keep, set(g.outcome_ids), f"{g.name}_0")


def unit_subgroupoid(g: Groupoid) -> Groupoid:
    return _sub(g, set(g.unit_of.values()), set(g.outcome_ids), f"{g.name}_units")


def is_subgroupoid(h: Groupoid, g: Groupoid, embedding: Mapping[int, int] | None = None) -> bool:
    """True iff ``embedding`` is an injective functor from ``h`` into ``g``."""
    emb = dict(embedding) if embedding is not None else {a: a for a in h.transition_ids}
    if set(emb) != set(h.transition_ids):
        return False
    if len(set(emb.values())) != len(emb):
        return False
    if any(b not in g._transition for b in emb.values()):
        return False
    obj = {}
    for x in h.outcome_ids:
        u = emb[h.unit(x)]
        if not g.is_unit(u):
            return False
        obj[x] = g.source(u)
    for a in h.transition_ids:
        b = emb[a]
        if g.source(b) != obj[h.source(a)] or g.target(b) != obj[h.target(a)]:
            return False
        if emb[h.inverse(a)] != g.inverse(b):
            return False
    for (a, b), c in h.table.items():
        if g.compose(emb[a], emb[b]) != emb[c]:
            return False
    return True


def connected_components(g: Groupoid) -> list[set[int]]:
    parent = {x: x for x in g.outcome_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in g.transitions:
        a, b = find(t.source), find(t.target)
        if a != b:
            parent[a] = b
    blocks: dict[int, set[int]] = {}
    for x in g.outcome_ids:
        blocks.setdefault(find(x), set()).add(x)
    return sorted(blocks.values(), key=min)


def is_morphism(g: Groupoid, h, phi: Mapping[int, object]) -> bool:
    """Check that ``phi`` (transitions of ``g`` -> elements of ``h``) preserves composition.

    ``h`` only needs ``compose``; it may be an infinite groupoid model.
    """
    for (a, b), c in g.table.items():
        if h.compose(phi[a], phi[b]) != phi[c]:
            return False
    return True


def find_isomorphism(g: Groupoid, h: Groupoid) -> dict[int, int] | None:
    """Search for a groupoid isomorphism ``g -> h`` (transition id map) by backtracking."""
    if len(g) != len(h) or len(g.outcomes) != len(h.outcomes):
        return None
    gx, hx = g.outcome_ids, h.outcome_ids
    order = sorted(g.transition_ids, key=lambda a: (not g.is_unit(a), a))
    for perm in itertools.permutations(hx):
        omap = dict(zip(gx, perm))
        if any(len(g.hom(x, y)) != len(h.hom(omap[x], omap[y])) for x in gx for y in gx):
            continue
        found = _extend({}, set(), order, g, h, omap)
        if found is not None:
            return found
    return None


def _extend(m, used, order, g, h, omap):
    if len(m) == len(order):
        return dict(m)
    a = order[len(m)]
    for b in h.hom(omap[g.source(a)], omap[g.target(a)]):
        if b in used or g.is_unit(a) != h.is_unit(b):
            continue
        m[a] = b
        ok = all(
            h.compose(m[x], m[y]) == m[xy]
            for x in m for y in m
            if a in (x, y) or g.compose(x, y) == a
            for xy in [g.compose(x, y)]
            if xy is not None and xy in m
        )
        if ok:
            used.add(b)
            r = _extend(m, used, order, g, h, omap)
            if r is not None:
                return r
            used.discard(b)
        del m[a]
    return None


def is_isomorphism(g: Groupoid, h: Groupoid, phi: Mapping[int, int]) -> bool:
    return (
        len(g) == len(h)
        and sorted(phi.values()) == sorted(h.transition_ids)
        and is_subgroupoid(g, h, phi)
    )
