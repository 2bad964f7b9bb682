"""Command-line front end and the JSON document format.

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import Groupoid, GroupoidError, Outcome, Transition, pair_groupoid, subgroupoid, validate
from .independence import (
    SubalgebraFamily,
    check_free_independence,
    check_generalized_independence,
    check_usual_independence,
)
from .products import FreeProduct, FreeProductSpec, direct_product
from .qmeasure import Event, decoherence, interference, quantum_measure
from .states import State, check_positivity

SCHEMA = 1
KINDS = ("groupoid", "state", "free-product-spec", "event", "family")


class InputError(Exception):
    """Malformed or inconsistent input; maps to exit code 2."""


@dataclass
class Document:
    kind: str
    name: str = ""
    body: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "kind": self.kind, "name": self.name, **self.body}


def load(path) -> Document:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    return parse(raw, str(path))


def parse(raw, where: str = "<document>") -> Document:
    if not isinstance(raw, dict):
        raise InputError(f"{where}: top level must be an object")
    if raw.get("schema", SCHEMA) != SCHEMA:
        raise InputError(f"{where}: unsupported schema {raw.get('schema')!r}")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise InputError(f"{where}: field 'kind' must be one of {', '.join(KINDS)}")
    body = {k: v for k, v in raw.items() if k not in ("schema", "kind", "name")}
    doc = Document(kind, str(raw.get("name", "")), body)
    # fail early on structural problems
    if kind == "groupoid":
        groupoid_from_doc(doc, where)
    elif kind == "free-product-spec":
        spec_from_doc(doc, where)
    return doc


def save(doc: Document, path) -> None:
    Path(path).write_text(dumps(doc.to_json()) + "\n", encoding="utf-8")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _get(body, key, where, typ=None):
    if key not in body:
        raise InputError(f"{where}: missing field '{key}'")
    v = body[key]
    if typ is not None and not isinstance(v, typ):
        raise InputError(f"{where}: field '{key}' has the wrong type")
    return v


# -- groupoids ---------------------------------------------------------------

def groupoid_to_doc(g: Groupoid) -> Document:
    olabel = {o.id: o.label for o in g.outcomes}
    tlabel = {t.id: t.label for t in g.transitions}
    body = {
        "outcomes": [{"id": o.id, "label": o.label} for o in g.outcomes],
        "transitions": [
            {
                "id": t.id,
                "label": t.label,
                "source": olabel[t.source],
                "target": olabel[t.target],
                "inverse": tlabel[g.inverse(t.id)],
            }
            for t in g.transitions
        ],
        "compose": [[a, b, c] for (a, b), c in sorted(g.table.items())],
    }
    return Document("groupoid", g.name, body)


def groupoid_from_doc(doc: Document, where: str = "<groupoid>") -> Groupoid:
    body = doc.body
    if "pairs_of" in body:
        n = body["pairs_of"]
        if not isinstance(n, int) or n < 1:
            raise InputError(f"{where}: 'pairs_of' must be a positive integer")
        labels = None
        if "outcomes" in body:
            labels = [o["label"] for o in body["outcomes"]]
        try:
            return pair_groupoid(n, labels, name=doc.name)
        except GroupoidError as e:
            raise InputError(f"{where}: {e}") from None
    outs = _get(body, "outcomes", where, list)
    trans = _get(body, "transitions", where, list)
    outcomes, by_olabel = [], {}
    for k, o in enumerate(outs):
        w = f"{where}: outcomes[{k}]"
        if not isinstance(o, dict):
            raise InputError(f"{w}: must be an object")
        oid, lbl = _get(o, "id", w, int), str(_get(o, "label", w))
        if lbl in by_olabel:
            raise InputError(f"{w}: duplicate outcome label {lbl!r}")
        by_olabel[lbl] = oid
        outcomes.append(Outcome(oid, lbl))
    transitions, by_tlabel, inv_label = [], {}, {}
    for k, t in enumerate(trans):
        w = f"{where}: transitions[{k}]"
        if not isinstance(t, dict):
            raise InputError(f"{w}: must be an object")
        tid, lbl = _get(t, "id", w, int), str(_get(t, "label", w))
        ends = []
        for key in ("source", "target"):
            ref = _get(t, key, w)
            if ref not in by_olabel:
                raise InputError(f"{w}.{key}: undeclared outcome {ref!r}")
            ends.append(by_olabel[ref])
        if lbl in by_tlabel:
            raise InputError(f"{w}: duplicate transition label {lbl!r}")
        by_tlabel[lbl] = tid
        inv_label[tid] = _get(t, "inverse", w)
        transitions.append(Transition(tid, lbl, ends[0], ends[1]))
    inverse_of = {}
    for tid, ref in inv_label.items():
        if ref not in by_tlabel:
            raise InputError(f"{where}: inverse {ref!r} is not a declared transition")
        inverse_of[tid] = by_tlabel[ref]
    compose = {}
    ids = {t.id for t in transitions}
    for k, entry in enumerate(_get(body, "compose", where, list)):
        w = f"{where}: compose[{k}]"
        if not (isinstance(entry, list) and len(entry) == 3):
            raise InputError(f"{w}: expected [a, b, a∘b]")
        a, b, c = (by_tlabel.get(x, x) if isinstance(x, str) else x for x in entry)
        if not {a, b, c} <= ids:
            raise InputError(f"{w}: unknown transition in {entry}")
        compose[a, b] = c
    unit_of = {}
    for t in transitions:
        if t.source == t.target and compose.get((t.id, t.id)) == t.id:
            unit_of.setdefault(t.source, t.id)
    try:
        return Groupoid(outcomes, transitions, unit_of, inverse_of, compose, name=doc.name)
    except GroupoidError as e:
        raise InputError(f"{where}: {e}") from None


# -- states, events, families --------------------------------------------------

def state_to_doc(rho: State, name: str = "") -> Document:
    g = rho.parent
    phi = [
        {"transition": t.label, "re": float(rho.phi[i].real), "im": float(rho.phi[i].imag)}
        for i, t in enumerate(g.transitions)
        if rho.phi[i] != 0
    ]
    return Document("state", name or rho.name, {"groupoid": g.name, "phi": phi})


def _check_ref(doc: Document, g: Groupoid, where: str):
    ref = doc.body.get("groupoid")
    if ref is not None and ref != g.name:
        raise InputError(f"{where}: refers to groupoid {ref!r}, got {g.name!r}")


def _label(g: Groupoid, lbl, where) -> int:
    try:
        return g.by_label(lbl)
    except GroupoidError:
        raise InputError(f"{where}: unknown transition label {lbl!r}") from None


def state_from_doc(doc: Document, g: Groupoid, where: str = "<state>") -> State:
    if doc.kind != "state":
        raise InputError(f"{where}: expected a state document, got {doc.kind!r}")
    _check_ref(doc, g, where)
    amps = {}
    for k, e in enumerate(_get(doc.body, "phi", where, list)):
        w = f"{where}: phi[{k}]"
        t = _label(g, _get(e, "transition", w), w)
        re, im = _get(e, "re", w, (int, float)), e.get("im", 0.0)
        if not isinstance(im, (int, float)):
            raise InputError(f"{w}: field 'im' must be a number")
        amps[t] = complex(re, im)
    return State.from_amplitudes(g, amps, name=doc.name)


def event_from_doc(doc: Document, g: Groupoid, where: str = "<event>") -> Event:
    _check_ref(doc, g, where)
    return Event(g, [_label(g, x, where) for x in _get(doc.body, "members", where, list)])


def family_from_doc(doc: Document, g: Groupoid, where: str = "<family>") -> SubalgebraFamily:
    if doc.kind != "family":
        raise InputError(f"{where}: expected a family document, got {doc.kind!r}")
    _check_ref(doc, g, where)
    subs = []
    for k, m in enumerate(_get(doc.body, "members", where, list)):
        w = f"{where}: members[{k}]"
        ids = [_label(g, x, w) for x in _get(m, "transitions", w, list)]
        try:
            subs.append(subgroupoid(g, ids, name=m.get("name", f"member{k}")))
        except GroupoidError as e:
            raise InputError(f"{w}: {e}") from None
    return SubalgebraFamily.from_subgroupoids(g, subs)


def spec_to_doc(spec: FreeProductSpec, name: str = "") -> Document:
    factors = []
    for g in spec.factors:
        d = groupoid_to_doc(g)
        factors.append({"name": d.name, **d.body})
    sigma = [
        {g.outcome(x).label: spec.objects[y] for x, y in s.items()}
        for g, s in zip(spec.factors, spec.sigma)
    ]
    body = {
        "factors": factors,
        "objects": [{"id": i, "label": lbl} for i, lbl in sorted(spec.objects.items())],
        "sigma": sigma,
    }
    return Document("free-product-spec", name, body)


def spec_from_doc(doc: Document, where: str = "<spec>") -> FreeProductSpec:
    body = doc.body
    factors = []
    for k, f in enumerate(_get(body, "factors", where, list)):
        inner = {x: v for x, v in f.items() if x != "name"}
        factors.append(groupoid_from_doc(Document("groupoid", f.get("name", ""), inner), f"{where}: factors[{k}]"))
    objects = {}
    for k, o in enumerate(_get(body, "objects", where, list)):
        w = f"{where}: objects[{k}]"
        objects[_get(o, "id", w, int)] = str(_get(o, "label", w))
    by_label = {lbl: i for i, lbl in objects.items()}
    sigma = []
    raw = _get(body, "sigma", where, list)
    if len(raw) != len(factors):
        raise InputError(f"{where}: need one sigma map per factor")
    for k, (g, s) in enumerate(zip(factors, raw)):
        w = f"{where}: sigma[{k}]"
        m = {}
        for src, dst in s.items():
            try:
                x = g.outcome_by_label(src)
            except GroupoidError:
                raise InputError(f"{w}: unknown factor outcome {src!r}") from None
            if dst not in by_label:
                raise InputError(f"{w}: unknown ambient object {dst!r}")
            m[x] = by_label[dst]
        sigma.append(m)
    try:
        return FreeProductSpec(tuple(factors), objects, tuple(sigma))
    except GroupoidError as e:
        raise InputError(f"{where}: {e}") from None


def _cx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# -- subcommands ---------------------------------------------------------------

def _load_groupoid(path) -> Groupoid:
    doc = load(path)
    if doc.kind != "groupoid":
        raise InputError(f"{path}: expected a groupoid document, got {doc.kind!r}")
    return groupoid_from_doc(doc, str(path))


def _emit(args, payload: dict, text: str):
    if getattr(args, "json", False):
        print(dumps({"schema": SCHEMA, **payload}))
    else:
        print(text)


def cmd_validate(args) -> int:
    doc = load(args.file)
    if doc.kind == "groupoid":
        g = groupoid_from_doc(doc, args.file)
        problems = validate(g)
        _emit(
            args,
            {"kind": "validation", "target": "groupoid", "ok": not problems, "violations": problems},
            "\n".join([f"groupoid {g.name!r}: {len(g.outcomes)} outcomes, {len(g)} transitions"]
                      + [f"  violation: {p}" for p in problems]
                      + ["ok" if not problems else f"{len(problems)} violation(s)"]),
        )
        return 0 if not problems else 1
    if doc.kind == "state":
        if not args.groupoid:
            raise InputError("validating a state needs --groupoid")
        g = _load_groupoid(args.groupoid)
        rho = state_from_doc(doc, g, args.file)
        rep = check_positivity(rho)
        warnings = []
        if not rep.normalized:
            warnings.append(f"normalization: rho(1) = {rep.normalization.real:.12g}, not 1")
        lines = [
            f"state {rho.name!r} on {g.name!r}",
            f"  min Gram eigenvalue: {rep.min_eigenvalue:.6g}",
            f"  hermitian: {rep.hermitian}",
            *[f"  warning: {w}" for w in warnings],
            "positive" if rep.passed else "NOT positive",
        ]
        if rep.counterexample is not None:
            lines.insert(-1, f"  witness: {rep.counterexample!r}")
        _emit(
            args,
            {
                "kind": "validation",
                "target": "state",
                "ok": rep.passed,
                "min_eigenvalue": rep.min_eigenvalue,
                "hermitian": rep.hermitian,
                "normalization": _cx(rep.normalization),
                "warnings": warnings,
            },
            "\n".join(lines),
        )
        return 0 if rep.passed else 1
    if doc.kind == "free-product-spec":
        spec = spec_from_doc(doc, args.file)
        problems = [f"factor {g.name or k}: {p}" for k, g in enumerate(spec.factors) for p in validate(g)]
        _emit(args, {"kind": "validation", "target": "free-product-spec", "ok": not problems, "violations": problems},
              "\n".join(problems + ["ok" if not problems else "invalid factor(s)"]))
        return 0 if not problems else 1
    raise InputError(f"cannot validate a {doc.kind!r} document on its own")


def cmd_product(args) -> int:
    g1, g2 = _load_groupoid(args.g1), _load_groupoid(args.g2)
    dp = direct_product([g1, g2])
    doc = groupoid_to_doc(dp.product)
    if args.output:
        save(doc, args.output)
    _emit(args, {"kind": "product", "outcomes": len(dp.product.outcomes), "transitions": len(dp.product)},
          f"{dp.product.name}: {len(dp.product.outcomes)} outcomes, {len(dp.product)} transitions"
          + (f" -> {args.output}" if args.output else ""))
    return 0


def cmd_free_product(args) -> int:
    doc = load(args.spec)
    if doc.kind != "free-product-spec":
        raise InputError(f"{args.spec}: expected a free-product-spec document")
    fp = FreeProduct(spec_from_doc(doc, args.spec))
    words = fp.enumerate(args.max_word)
    out = {
        "kind": "word-list",
        "spec": doc.name,
        "max_word": args.max_word,
        "order": "leftmost letter is the last step",
        "count": len(words),
        "words": [
            {
                "letters": [[a, fp.spec.factors[a].transition(t).label] for a, t in w],
                "label": fp.label(w),
                "source": fp.spec.objects[fp.source(w)],
                "target": fp.spec.objects[fp.target(w)],
            }
            for w in words
        ],
    }
    if args.output:
        Path(args.output).write_text(dumps({"schema": SCHEMA, **out}) + "\n", encoding="utf-8")
    text = "\n".join([f"{len(words)} reduced words of length <= {args.max_word}"]
                     + [f"  {x['label']}: {x['source']} -> {x['target']}" for x in out["words"]])
    _emit(args, out, text)
    return 0


def cmd_measure(args) -> int:
    g = _load_groupoid(args.groupoid)
    rho = state_from_doc(load(args.state), g, args.state)
    events = []
    for labels in args.event or [[]]:
        events.append(Event(g, [_label(g, x, "--event") for x in labels]))
    names = ["{" + ", ".join(sorted(g.transition(a).label for a in e.members)) + "}" for e in events]
    d = [[decoherence(rho, a, b) for b in events] for a in events]
    mu = [quantum_measure(rho, e) for e in events]
    inter = []
    for i in range(len(events)):
        for j in range(i + 1, len(events)):
            if not events[i].members & events[j].members:
                inter.append({"a": i, "b": j, "value": interference(rho, events[i], events[j])})
    lines = [f"event {k}: {n}  mu = {m:.12g}" for k, (n, m) in enumerate(zip(names, mu))]
    if len(events) > 1:
        lines.append("decoherence D(i, j):")
        for i, row in enumerate(d):
            lines.append("  " + "  ".join(f"{complex(z).real:+.6g}{complex(z).imag:+.6g}j" for z in row))
    lines += [f"interference I({x['a']}, {x['b']}) = {x['value']:.12g}" for x in inter]
    _emit(
        args,
        {
            "kind": "measure",
            "events": names,
            "mu": mu,
            "decoherence": [[_cx(z) for z in row] for row in d],
            "interference": inter,
        },
        "\n".join(lines),
    )
    return 0


def _seed(args) -> int:
    env = os.environ.get("GROUPOIDAL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"GROUPOIDAL_SEED must be an integer, got {env!r}") from None
    return args.seed


def cmd_independence(args) -> int:
    g = _load_groupoid(args.groupoid)
    fam = family_from_doc(load(args.family), g, args.family)
    states = [state_from_doc(load(p), g, p) for p in args.states]
    seed = _seed(args)
    if args.notion == "usual":
        rep = check_usual_independence(fam, states, trials=args.trials, tol=args.tol, seed=seed)
    elif args.notion == "free":
        if len(states) != 1:
            raise InputError("--notion free takes exactly one state")
        rep = check_free_independence(fam, states[0], max_word=args.max_word, trials=args.trials,
                                      tol=args.tol, seed=seed, jobs=args.jobs)
    else:
        rep = check_generalized_independence(fam, states, max_word=args.max_word, trials=args.trials,
                                             tol=args.tol, seed=seed, jobs=args.jobs)
    payload = {
        "kind": "independence",
        "notion": rep.notion,
        "verdict": rep.verdict,
        "trials": rep.trials,
        "max_violation": rep.max_violation,
        "seed": seed,
        "message": rep.message,
        "witness": None,
    }
    lines = [f"{rep.notion} independence: {rep.verdict.upper()}", f"  {rep.message}",
             f"  trials: {rep.trials}, max violation: {rep.max_violation:.6g}"]
    if rep.witness is not None:
        w = rep.witness
        payload["witness"] = {
            "state": w.state_index,
            "members": list(w.members),
            "elements": [repr(e) for e in w.elements],
            "value": _cx(w.value),
            "bound": w.bound,
        }
        lines.append(f"  witness (state {w.state_index}, members {list(w.members)}):")
        lines += [f"    {e!r}" for e in w.elements]
        lines.append(f"  value {complex(w.value):.6g} exceeds bound {w.bound:.3g}")
    _emit(args, payload, "\n".join(lines))
    return 0 if rep.passed else 1


def cmd_gallery(args) -> int:
    from .examples import run_a2_star_a2_gallery, run_eprb_report

    reports = []
    if args.case in ("eprb", "all"):
        reports.append(run_eprb_report())
    if args.case in ("a2star", "all"):
        reports.append(run_a2_star_a2_gallery(args.max_word))
    ok = all(r.ok for r in reports)
    _emit(args, {"kind": "gallery", "ok": ok, "reports": [r.to_dict() for r in reports]},
          "\n\n".join(r.to_text() for r in reports))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="groupoidal", description="Finite groupoids, states and independence checks.")
    p.add_argument("--json", action="store_true", help="print the structured report instead of text")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check groupoid axioms or state positivity")
    s.add_argument("file")
    s.add_argument("--groupoid", help="groupoid file a state refers to")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("product", help="direct product of two groupoids")
    s.add_argument("g1")
    s.add_argument("g2")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("free-product", help="enumerate reduced words of a free product")
    s.add_argument("spec")
    s.add_argument("--max-word", type=int, default=8)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_free_product)

    s = sub.add_parser("measure", help="decoherence functional and quantum measure of events")
    s.add_argument("groupoid")
    s.add_argument("state")
    s.add_argument("--event", nargs="*", action="append", metavar="LABEL",
                   help="transition labels of one event; repeat for several events")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("independence", help="falsification search for (in)dependence")
    s.add_argument("groupoid")
    s.add_argument("family")
    s.add_argument("--states", nargs="+", required=True)
    s.add_argument("--notion", choices=("usual", "free", "generalized"), default="generalized")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--max-word", type=int, default=6)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_independence)

    s = sub.add_parser("gallery", help="run the worked examples")
    s.add_argument("--case", choices=("eprb", "a2star", "all"), default="all")
    s.add_argument("--max-word", type=int, default=8)
    s.set_defaults(func=cmd_gallery)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_word", 2) < 1 or getattr(args, "trials", 0) < 0 or getattr(args, "jobs", 1) < 1:
        print("error: numeric options out of range", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (InputError, GroupoidError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
