"""Worked examples: the EPRB groupoid A₂×A₂ with its singlet state, and A₂⋆A₂ in three gluings.

Every computed number is paired with an independently computed expected
value (``expected``) and, where one is known, a published reference value
(``published``).  ``ok`` compares against ``expected``; ``matches_published``
records whether the reference value is reproduced.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, convolve, delta, fundamental_representation
from .core import Groupoid, GroupoidError, Outcome, Transition, find_isomorphism, is_isomorphism, pair_groupoid, subgroupoid
from .independence import SubalgebraFamily, check_generalized_independence
from .products import (
    FreeProduct,
    FreeProductSpec,
    ZTimesPairs,
    check_coproduct_property,
    direct_product,
)
from .qmeasure import Event, arrival_event, interference, quantum_measure
from .states import State, check_positivity, restrict, vector_state

TOL = 1e-9
INV = "⁻¹"

# outcome order (s₁ s₂): ++, +−, −+, −−
EPRB_OUTCOMES = ["++", "+-", "-+", "--"]
# name: (source, target) in EPRB_OUTCOMES positions
EPRB_ARROWS = {
    "α": (0, 1),
    "β": (0, 2),
    "γ": (2, 3),
    "δ": (1, 3),
    "η": (0, 3),
    "ν": (1, 2),
}


def from_endpoints(outcome_labels, arrows, name="") -> Groupoid:
    """A groupoid with at most one transition per ordered pair of outcomes.

    ``arrows`` maps labels to (source, target) indices; units and inverses are
    added, and composition is forced by the endpoints.  Every pair must be
    covered (the result is a groupoid of pairs with named transitions).
    """
    n = len(outcome_labels)
    named = {}
    for x in range(n):
        named[x, x] = f"1{outcome_labels[x]}"
    for lbl, (s, t) in arrows.items():
        named[s, t] = lbl
        named[t, s] = lbl + INV
    if len(named) != n * n:
        raise GroupoidError("arrows must cover every ordered pair of outcomes")
    ids = {st: k for k, st in enumerate(sorted(named))}
    outcomes = [Outcome(x, lbl) for x, lbl in enumerate(outcome_labels)]
    transitions = [Transition(k, named[s, t], s, t) for (s, t), k in ids.items()]
    compose = {(ids[y, z], ids[x, y]): ids[x, z] for x in range(n) for y in range(n) for z in range(n)}
    unit_of = {x: ids[x, x] for x in range(n)}
    inverse_of = {k: ids[t, s] for (s, t), k in ids.items()}
    return Groupoid(outcomes, transitions, unit_of, inverse_of, compose, name=name)


@dataclass
class Entry:
    name: str
    value: complex
    expected: complex
    published: complex | None = None
    tol: float = TOL

    @property
    def ok(self) -> bool:
        return abs(self.value - self.expected) <= self.tol

    @property
    def matches_published(self) -> bool | None:
        if self.published is None:
            return None
        return abs(self.value - self.published) <= self.tol

    def to_dict(self) -> dict:
        def cx(z):
            return None if z is None else {"re": float(np.real(z)), "im": float(np.imag(z))}

        return {
            "name": self.name,
            "value": cx(self.value),
            "expected": cx(self.expected),
            "published": cx(self.published),
            "ok": self.ok,
            "matches_published": self.matches_published,
        }


@dataclass
class Report:
    title: str
    entries: list[Entry] = field(default_factory=list)
    tables: dict = field(default_factory=dict)

    def add(self, name, value, expected, published=None, tol=TOL) -> Entry:
        e = Entry(name, complex(value), complex(expected), None if published is None else complex(published), tol)
        self.entries.append(e)
        return e

    def check(self, name, condition: bool, published: bool | None = None) -> Entry:
        """A yes/no fact recorded as 1/0 against an expected 1."""
        return self.add(name, float(condition), 1.0, None if published is None else float(published))

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def entry(self, name: str) -> Entry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "report": self.title,
            "ok": self.ok,
            "entries": [e.to_dict() for e in self.entries],
            "tables": self.tables,
        }

    def to_text(self) -> str:
        lines = [f"== {self.title} =="]
        for e in self.entries:
            mark = "ok " if e.ok else "BAD"
            line = f"[{mark}] {e.name} = {_fmt(e.value)}  (expected {_fmt(e.expected)}"
            if e.published is not None:
                line += f"; published {_fmt(e.published)}{'' if e.matches_published else ' [differs]'}"
            lines.append(line + ")")
        return "\n".join(lines)


def _fmt(z: complex) -> str:
    z = complex(z)
    re = 0.0 if abs(z.real) < 1e-15 else z.real
    if abs(z.imag) < 1e-15:
        return f"{re:.6g}"
    return f"{re:.6g}{z.imag:+.6g}j"


# -- EPRB --------------------------------------------------------------------

@dataclass
class EPRBSystem:
    groupoid: Groupoid
    rho0: State
    psi: np.ndarray
    g1: Groupoid  # changes of the first spin only
    g2: Groupoid  # changes of the second spin only

    def t(self, label: str) -> int:
        return self.groupoid.by_label(label)

    def d(self, label: str) -> AlgebraElement:
        return delta(self.groupoid, self.t(label))

    def event(self, *labels: str) -> Event:
        return Event.from_labels(self.groupoid, labels)

    @property
    def family(self) -> SubalgebraFamily:
        return SubalgebraFamily.from_subgroupoids(self.groupoid, [self.g1, self.g2])


def build_eprb() -> EPRBSystem:
    g = from_endpoints(EPRB_OUTCOMES, EPRB_ARROWS, name="EPRB")
    psi = np.array([0, 1, -1, 0], dtype=np.complex128) / np.sqrt(2)
    amps = {g.by_label("1+-"): 0.5, g.by_label("1-+"): 0.5, g.by_label("ν"): -0.5, g.by_label("ν" + INV): -0.5}
    rho0 = State.from_amplitudes(g, amps, name="rho0")

    def flips(t: Transition, k: int) -> bool:
        s, e = EPRB_OUTCOMES[t.source], EPRB_OUTCOMES[t.target]
        return s[1 - k] == e[1 - k]

    g1 = subgroupoid(g, [t.id for t in g.transitions if flips(t, 0)], name="G1~")
    g2 = subgroupoid(g, [t.id for t in g.transitions if flips(t, 1)], name="G2~")
    return EPRBSystem(g, rho0, psi, g1, g2)


def eprb_events(sys: EPRBSystem) -> dict[str, Event]:
    return {
        "A": sys.event("1++", "α" + INV, "β" + INV, "η" + INV),
        "B": sys.event("1-+", "β", "ν", "γ" + INV),
        "C": sys.event("1+-", "α", "ν" + INV, "δ" + INV),
    }


def _vector_decoherence(sys: EPRBSystem, A: Event, B: Event) -> complex:
    """⟨π₀(χ_A)ψ, π₀(χ_B)ψ⟩ computed with matrices only."""
    pi0 = fundamental_representation(sys.groupoid)
    u = pi0(A.indicator()) @ sys.psi
    v = pi0(B.indicator()) @ sys.psi
    return complex(np.vdot(u, v))


def _vector_expectation(sys: EPRBSystem, f: AlgebraElement) -> complex:
    pi0 = fundamental_representation(sys.groupoid)
    return complex(np.vdot(sys.psi, pi0(f) @ sys.psi))


def eprb_witness(sys: EPRBSystem):
    """Seeded witnesses: the published order (α⁻¹ then β) and the composable order."""
    a_inv, b = sys.d("α" + INV), sys.d("β")
    return [[(1, a_inv), (0, b)], [(0, b), (1, a_inv)]]


def run_eprb_report(sys: EPRBSystem | None = None) -> Report:
    sys = sys or build_eprb()
    g, rho = sys.groupoid, sys.rho0
    rep = Report("EPRB")
    pos = check_positivity(rho)
    rep.check("rho0 positive", pos.passed)
    rep.add("rho0(1)", rho.total, 1.0)

    ev = eprb_events(sys)
    for name, x in (("A", "++"), ("B", "-+"), ("C", "+-")):
        rep.check(f"{name} = arrivals at {x}", ev[name] == arrival_event(g, g.outcome_by_label(x)), published=True)
    for name, published in (("A", 0.0), ("B", 0.5), ("C", 0.5)):
        e = ev[name]
        rep.add(f"mu({name})", quantum_measure(rho, e), _vector_decoherence(sys, e, e).real, published)
    muB = quantum_measure(rho, ev["B"])
    muC = quantum_measure(rho, ev["C"])
    rep.add(
        "mu(B)+mu(C)",
        muB + muC,
        (_vector_decoherence(sys, ev["B"], ev["B"]) + _vector_decoherence(sys, ev["C"], ev["C"])).real,
        1.0,
    )
    a1 = sys.event("1++", "α" + INV)
    a2 = sys.event("β" + INV, "η" + INV)
    rep.add("mu({1++, α⁻¹})", quantum_measure(rho, a1), _vector_decoherence(sys, a1, a1).real)
    rep.add("mu({β⁻¹, η⁻¹})", quantum_measure(rho, a2), _vector_decoherence(sys, a2, a2).real)
    rep.add("I({1++, α⁻¹}, {β⁻¹, η⁻¹})", interference(rho, a1, a2), 2 * _vector_decoherence(sys, a1, a2).real)

    rep.add("rho0(δ_1+-)", rho(sys.d("1+-")), _vector_expectation(sys, sys.d("1+-")), 0.5, tol=1e-12)
    nn = sys.d("ν") + sys.d("ν" + INV)
    rep.add("rho0(δ_ν + δ_ν⁻¹)", rho(nn), _vector_expectation(sys, nn), -1.0, tol=1e-12)

    # independence witness
    a_inv, b = sys.d("α" + INV), sys.d("β")
    for left, right, lname, rname, published in (
        (a_inv, b, "α⁻¹", "β", 0.5),
        (b, a_inv, "β", "α⁻¹", None),
    ):
        prod = convolve(left, right)
        rep.add(f"rho0(δ_{lname} ⋆ δ_{rname})", rho(prod), _vector_expectation(sys, prod), published, tol=1e-12)
    rep.add("rho0(δ_α⁻¹)", rho(a_inv), _vector_expectation(sys, a_inv), 0.0, tol=1e-12)
    rep.add("rho0(δ_β)", rho(b), _vector_expectation(sys, b), 0.0, tol=1e-12)
    report = check_generalized_independence(sys.family, [rho], witnesses=eprb_witness(sys), trials=1000)
    rep.check("generalized independence fails", not report.passed, published=True)
    if report.witness is not None:
        w = report.witness
        rep.tables["witness"] = {
            "members": list(w.members),
            "elements": [repr(e) for e in w.elements],
            "value": {"re": w.value.real, "im": w.value.imag},
        }

    # conditioned states on the padded subgroupoids
    classical = np.abs(sys.psi) ** 2
    for h in (sys.g1, sys.g2):
        r = restrict(rho, h)
        for x, o in enumerate(g.outcomes):
            rep.add(f"rho0|{h.name}(1{o.label})", r.amplitude(h.unit(o.id)), classical[x], [0, 0.5, 0.5, 0][x], tol=1e-12)
        off = max((abs(r.amplitude(t.id)) for t in h.transitions if not h.is_unit(t.id)), default=0.0)
        rep.add(f"rho0|{h.name} off-diagonal max", off, 0.0, 0.0, tol=1e-12)

    # vector-state cross-check
    vs = vector_state(g, sys.psi)
    table = []
    worst = 0.0
    for t in g.transitions:
        a, b2 = rho.amplitude(t.id), vs.amplitude(t.id)
        worst = max(worst, abs(a - b2))
        table.append({"transition": t.label, "phi": {"re": a.real, "im": a.imag}, "vector": {"re": b2.real, "im": b2.imag}})
    rep.tables["vector_state"] = table
    rep.add("max |rho0(σ) - <ψ|π₀(σ)|ψ>|", worst, 0.0, 0.0, tol=1e-12)

    # hand-built table against the direct product
    dp = direct_product([pair_groupoid(2, ["+", "-"]), pair_groupoid(2, ["+", "-"])])
    iso = find_isomorphism(g, dp.product)
    rep.check("EPRB ≅ A2 × A2", iso is not None and is_isomorphism(g, dp.product, iso), published=True)
    return rep


# -- A₂ ⋆ A₂ -----------------------------------------------------------------

def a2_factor(tag: str) -> Groupoid:
    """A₂ with outcomes +, − and α: + → −, labelled with ``tag``."""
    return from_endpoints(["+", "-"], {f"α_{tag}": (0, 1)}, name=f"A2{tag}")


def a2_star_a2(shared: int) -> FreeProduct:
    """The gluings with 0, 1 or 2 shared objects."""
    ga, gb = a2_factor("a"), a2_factor("b")
    if shared == 0:
        objects = {0: "+a", 1: "-a", 2: "+b", 3: "-b"}
        sigma = ({0: 0, 1: 1}, {0: 2, 1: 3})
    elif shared == 1:
        objects = {0: "+", 1: "0", 2: "-"}
        sigma = ({0: 0, 1: 1}, {0: 1, 1: 2})
    elif shared == 2:
        objects = {0: "+", 1: "-"}
        sigma = ({0: 0, 1: 1}, {0: 0, 1: 1})
    else:
        raise GroupoidError("two copies of A2 share 0, 1 or 2 objects")
    return FreeProduct(FreeProductSpec((ga, gb), objects, sigma))


def letter(fp: FreeProduct, a: int, label: str):
    return (a, fp.spec.factors[a].by_label(label))


def winding_maps(fp: FreeProduct):
    """φ_a, φ_b into ℤ × A₂: α_a ↦ (0, −←+), α_b ↦ (−1, −←+)."""
    phis = []
    for a, weight in ((0, 0), (1, -1)):
        g = fp.spec.factors[a]
        phi = {}
        for t in g.transitions:
            w = 0 if t.source == t.target else (weight if t.source == 0 else -weight)
            phi[t.id] = (w, (t.target, t.source))
        phis.append(phi)
    return phis


def run_a2_star_a2_gallery(L: int = 8) -> Report:
    if L < 4:
        raise GroupoidError("the gallery needs L >= 4")
    rep = Report(f"A2 * A2 (L={L})")

    # case 1: disjoint images
    fp = a2_star_a2(0)
    words = fp.enumerate(L)
    rep.add("case1 element count", len(words), 8, 8)
    g, _ = fp.to_groupoid(words, name="A2a ⊔ A2b")
    pi0 = fundamental_representation(g)
    blocks = [[0, 1], [2, 3]]
    off_block = all(
        np.all(pi0.images[t.id][np.ix_(blocks[0], blocks[1])] == 0)
        and np.all(pi0.images[t.id][np.ix_(blocks[1], blocks[0])] == 0)
        for t in g.transitions
    )
    rank = np.linalg.matrix_rank(np.array([m.ravel() for m in pi0.images.values()]))
    rep.check("case1 block-diagonal fundamental representation", off_block, published=True)
    rep.add("case1 algebra dimension (M2 ⊕ M2)", rank, 8, 8)

    # case 2: one shared object
    fp = a2_star_a2(1)
    words = fp.enumerate(L)
    rep.add("case2 element count", len(words), 9, 9)
    rep.check("case2 count stable for L' < L", len(fp.enumerate(max(2, L // 2))) == 9)
    g, ids = fp.to_groupoid(words, name="A2a * A2b")
    a3 = pair_groupoid(3, ["+", "0", "-"])
    iso = find_isomorphism(g, a3)
    rep.check("case2 ≅ A3 (isomorphism search)", iso is not None and is_isomorphism(g, a3, iso), published=True)
    if iso is not None:
        pairs_ok = sum(
            (g.compose(x, y) is None) == (a3.compose(iso[x], iso[y]) is None)
            and (g.compose(x, y) is None or iso[g.compose(x, y)] == a3.compose(iso[x], iso[y]))
            for x in g.transition_ids for y in g.transition_ids
        )
        rep.add("case2 composition pairs preserved", pairs_ok, 81, 81)
    # coproduct-induced map onto A₃ agrees with the searched isomorphism's existence
    phis = [
        {t: a3.by_label({"1+": "1_+", "1-": "1_0", "α_a": "+->0", "α_a⁻¹": "0->+"}[lbl])
         for t, lbl in ((t.id, t.label) for t in fp.spec.factors[0].transitions)},
        {t: a3.by_label({"1+": "1_0", "1-": "1_-", "α_b": "0->-", "α_b⁻¹": "-->0"}[lbl])
         for t, lbl in ((t.id, t.label) for t in fp.spec.factors[1].transitions)},
    ]
    cp = check_coproduct_property(fp, a3, phis, max_length=L)
    bij = cp.ok and len(set(cp.induced.values())) == len(words) == len(a3)
    rep.check("case2 coproduct map Φ is a bijection onto A3", bij, published=True)
    rep.tables["case2_words"] = [fp.label(w) for w in words]

    # amalgamation: which products of α_a with B₂'s non-unit generators survive
    aa = delta(g, ids[(letter(fp, 0, "α_a"),)])
    gens_b = {lbl: delta(g, ids[(letter(fp, 1, lbl),)]) for lbl in ("α_b", "α_b⁻¹")}
    surviving = []
    for lbl, x in gens_b.items():
        if convolve(x, aa).norm() > 0:
            surviving.append(f"δ_{lbl} ⋆ δ_α_a")
        if convolve(aa, x).norm() > 0:
            surviving.append(f"δ_α_a ⋆ δ_{lbl}")
    rep.tables["case2_alpha_a_products"] = surviving
    rep.check("case2 only α_b∘α_a survives", surviving == ["δ_α_b ⋆ δ_α_a"], published=True)
    target = ids[(letter(fp, 1, "α_b"), letter(fp, 0, "α_a"))]
    rep.check(
        "case2 δ_α_b ⋆ δ_α_a = δ_(α_b α_a)",
        convolve(gens_b["α_b"], aa) == delta(g, target),
    )
    # associativity through the common subalgebra, words of length 3 over generators
    gens = [delta(g, ids[w]) for w in words if len(w) == 1]
    common = [delta(g, ids[fp.unit(x)]) for x in fp.spec.objects]
    assoc = all(
        convolve(convolve(b1, b), b2).close(convolve(b1, convolve(b, b2)))
        for b1, b, b2 in itertools.product(gens, common, gens)
    )
    rep.check("case2 relations through the common subalgebra", assoc, published=True)

    # case 3: two shared objects
    fp = a2_star_a2(2)
    words = fp.enumerate(L)
    plus = 0
    gword = (letter(fp, 1, "α_b⁻¹"), letter(fp, 0, "α_a"))
    powers = {0: fp.unit(plus)}
    for n in range(1, L // 2 + 1):
        powers[n] = fp.compose_strict(gword, powers[n - 1])
        powers[-n] = fp.inverse(powers[n])
    loops = [w for w in words if fp.source(w) == plus and fp.target(w) == plus]
    rep.add("case3 loop words at +", len(loops), 2 * (L // 2) + 1, tol=0)
    rep.check("case3 loops are exactly the powers of α_b⁻¹α_a", set(loops) == set(powers.values()), published=True)
    rep.check("case3 powers pairwise distinct", len(set(powers.values())) == len(powers), published=True)
    rep.tables["case3_loops"] = {str(n): fp.label(w) for n, w in sorted(powers.items())}

    z = ZTimesPairs(list(fp.spec.objects))
    cp = check_coproduct_property(fp, z, winding_maps(fp), max_length=L)
    injective = len(set(cp.induced.values())) == len(words)
    # surjectivity: each (k, y <- x) is hit by g_y^k ∘ i_a(x -> y) whenever that word fits in L
    minus = 1
    loops_at = {plus: gword, minus: (letter(fp, 0, "α_a"), letter(fp, 1, "α_b⁻¹"))}
    hit = True
    for y, gy in loops_at.items():
        pw = {0: fp.unit(y)}
        for n in range(1, L + 1):
            pw[n] = fp.compose_strict(gy, pw[n - 1])
            pw[-n] = fp.inverse(pw[n])
        for x in fp.spec.objects:
            base = next(w for w in fp.canonical_embedding(0).values()
                        if fp.source(w) == x and fp.target(w) == y)
            for k, loop in pw.items():
                w = fp.compose_strict(loop, base)
                if len(w) <= L:
                    hit = hit and cp.induced.get(w) == (k, (y, x))
    rep.check("case3 winding map is a morphism on words", cp.ok, published=True)
    rep.check("case3 winding map bijective on enumerated words", injective and hit, published=True)
    rep.add("case3 word count", len(words), _case3_count(L), tol=0)
    return rep


def _case3_count(L: int) -> int:
    """Reduced words over A₂ ⋆ A₂ glued on both objects: 2 units + 4 per length."""
    return 2 + 4 * L


# -- factorizable state on a free product ------------------------------------

@dataclass
class FreeFactorizable:
    fp: FreeProduct
    groupoid: Groupoid
    ids: dict
    state: State
    family: SubalgebraFamily
    a1: AlgebraElement
    a2: AlgebraElement


def free_factorizable_example(s: float = 0.0) -> FreeFactorizable:
    """G₁ over {−, 0} with α₁: − → 0 glued at 0 to G₂ over {0, +} with α₂: 0 → +.

    The state has φ(α_k) = e^{is} and is factorizable; it is not normalized
    (ρ(1) = 3).  a₁ = −2·1₋ + α₁ + α₁⁻¹ and a₂ = −2·1₊ + α₂ + α₂⁻¹.
    """
    g1 = from_endpoints(["-", "0"], {"α₁": (0, 1)}, name="G1")
    g2 = from_endpoints(["0", "+"], {"α₂": (0, 1)}, name="G2")
    spec = FreeProductSpec((g1, g2), {0: "-", 1: "0", 2: "+"}, ({0: 0, 1: 1}, {0: 1, 1: 2}))
    fp = FreeProduct(spec)
    words = fp.enumerate(4)
    g, ids = fp.to_groupoid(words, name="G1 * G2")

    def winding(w):
        n = 0
        for a, t in w:
            f = spec.factors[a]
            if not f.is_unit(t):
                n += 1 if f.source(t) == 0 else -1
        return n

    phi = np.array([np.exp(1j * s * winding(w)) for w in words])
    state = State(g, phi, name=f"factorizable(s={s:g})")
    members = []
    for a in range(2):
        emb = fp.canonical_embedding(a)
        members.append(subgroupoid(g, [ids[w] for w in emb.values()], name=spec.factors[a].name))
    family = SubalgebraFamily.from_subgroupoids(g, members)

    def el(coeffs):
        return AlgebraElement.from_coeffs(g, {ids[fp.reduce(((a, spec.factors[a].by_label(lbl)),))]: c
                                             for (a, lbl), c in coeffs.items()})

    a1 = el({(0, "1-"): -2, (0, "α₁"): 1, (0, "α₁⁻¹"): 1})
    a2 = el({(1, "1+"): -2, (1, "α₂"): 1, (1, "α₂⁻¹"): 1})
    return FreeFactorizable(fp, g, ids, state, family, a1, a2)
