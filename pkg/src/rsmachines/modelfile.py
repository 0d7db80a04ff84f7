"""JSON model files.

One document describes a composition::

    {
      "doctrine": "ode",
      "parameters": {"beta": 1.0, "gamma": null},
      "interfaces": {"growth": {"inputs": [], "outputs": ["out"], "exposed": ["pop"]}},
      "boxes": {"rg": {"interface": "growth", "vars": ["r"],
                       "field": {"r": "beta*r"}, "readout": {"out": "r"},
                       "ports": {"pop": "r"}}},
      "morphisms": {"m": {"domain": [{"label": "rg", "interface": "growth"}],
                          "codomain": "growth",
                          "phi_in": {}, "phi_out": {"out": "rg.out"},
                          "apex": ["R"], "inner": {"rg.pop": "R"},
                          "outer": {"pop": "R"}}},
      "compose": {"morphism": "m", "args": ["rg"]}
    }

ODE ports are listed by name (they all carry reals). Automata documents add
``"alphabets": {"bit": ["0", "1"]}`` and type every port and apex element by
alphabet, ``{"x": "bit"}``. Automata boxes give ``states``, ``update`` as a
list of ``{"state", "input", "next"}`` rows, and ``readout``/``obs`` as
``state -> [letters]``. ``compose`` is a box name or a morphism applied to
nested expressions.

Problems are reported with JSON-pointer locations into the document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .automata import Automaton, AutomatonError
from .expr import ParseError, Polynomial, parse
from .finset import FinSetError, TypedFinSet
from .ode import OdeError, OdeSystem
from .rsm import ActError, FilledBox, act
from .wiring import REAL, Interface, PortCospan, Prism, RsmMorphism, WiringError, validate

DOCTRINES = ("ode", "automata")


def pointer(*parts: Any) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


@dataclass(frozen=True)
class Problem:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where or '/'}: {self.message}"


class ModelError(Exception):
    """``kind`` is ``"parse"`` (malformed document) or ``"validation"``
    (well-formed but inconsistent)."""

    def __init__(self, kind: str, problems: list[Problem]):
        self.kind = kind
        self.problems = problems
        super().__init__("; ".join(str(p) for p in problems))


@dataclass(frozen=True)
class MorphismDecl:
    morphism: RsmMorphism
    domain: tuple[str, ...]
    codomain: str


@dataclass
class Model:
    doctrine: str
    parameters: dict[str, float | None] = field(default_factory=dict)
    alphabets: dict[str, tuple[str, ...]] = field(default_factory=dict)
    interfaces: dict[str, Interface] = field(default_factory=dict)
    boxes: dict[str, FilledBox] = field(default_factory=dict)
    box_interfaces: dict[str, str] = field(default_factory=dict)
    morphisms: dict[str, MorphismDecl] = field(default_factory=dict)
    compose: Any = None

    def evaluate(self, expr: Any = None, where: tuple = ("compose",)) -> FilledBox:
        """Build the composite named by ``expr`` (default: the root)."""
        expr = self.compose if expr is None else expr
        if isinstance(expr, str):
            return self.boxes[expr]
        decl = self.morphisms[expr["morphism"]]
        args = [self.evaluate(a, where + ("args", k)) for k, a in enumerate(expr["args"])]
        return act(decl.morphism, args, self.doctrine, self.alphabets)

    def default_params(self) -> dict[str, float]:
        return {k: v for k, v in self.parameters.items() if v is not None}


# -- reading -----------------------------------------------------------------


class _Reader:
    def __init__(self, doc: Any):
        self.doc = doc
        self.parse_problems: list[Problem] = []
        self.problems: list[Problem] = []

    def bad(self, where: tuple, message: str, parse_level: bool = False):
        (self.parse_problems if parse_level else self.problems).append(Problem(pointer(*where), message))

    def expect(self, value, kind, where: tuple, what: str) -> bool:
        if not isinstance(value, kind):
            self.bad(where, f"{what} must be {_kind_name(kind)}", parse_level=True)
            return False
        return True

    def names(self, value, where: tuple) -> list[str] | None:
        if not self.expect(value, list, where, "value"):
            return None
        for k, x in enumerate(value):
            if not isinstance(x, str):
                self.bad(where + (k,), "names must be strings", parse_level=True)
                return None
        return value

    def str_map(self, value, where: tuple) -> dict[str, str] | None:
        if not self.expect(value, dict, where, "value"):
            return None
        for k, x in value.items():
            if not isinstance(x, str):
                self.bad(where + (k,), "value must be a string", parse_level=True)
                return None
        return value


def _kind_name(kind) -> str:
    return {dict: "an object", list: "an array", str: "a string"}.get(kind, str(kind))


def loads(text: str) -> Model:
    if not text.strip():
        raise ModelError("parse", [Problem("/", "file is empty")])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError("parse", [Problem("/", f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})")])
    return from_document(doc)


def load(path: str) -> Model:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelError("parse", [Problem("/", f"cannot read {path}: {exc.strerror}")]) from None
    return loads(text)


def from_document(doc: Any) -> Model:
    r = _Reader(doc)
    if not isinstance(doc, dict):
        raise ModelError("parse", [Problem("/", "document must be a JSON object")])
    known = {"doctrine", "parameters", "alphabets", "interfaces", "boxes", "morphisms", "compose"}
    for k in doc:
        if k not in known:
            r.bad((k,), "unknown section", parse_level=True)
    doctrine = doc.get("doctrine")
    if doctrine not in DOCTRINES:
        raise ModelError("parse", [Problem("/doctrine", f"doctrine must be one of {list(DOCTRINES)}")])
    model = Model(doctrine)

    params = doc.get("parameters", {})
    if isinstance(params, list):
        if r.names(params, ("parameters",)) is not None:
            model.parameters = {p: None for p in params}
    elif r.expect(params, dict, ("parameters",), "parameters"):
        for p, v in params.items():
            if v is not None and (isinstance(v, bool) or not isinstance(v, (int, float))):
                r.bad(("parameters", p), "parameter value must be a number or null", True)
            else:
                model.parameters[p] = None if v is None else float(v)

    alph = doc.get("alphabets", {})
    if r.expect(alph, dict, ("alphabets",), "alphabets"):
        if doctrine == "ode" and alph:
            r.bad(("alphabets",), "ODE models do not declare alphabets")
        for name, letters in alph.items():
            if r.names(letters, ("alphabets", name)) is not None:
                model.alphabets[name] = tuple(letters)

    ifaces = doc.get("interfaces", {})
    if r.expect(ifaces, dict, ("interfaces",), "interfaces"):
        for name, entry in ifaces.items():
            x = _read_interface(r, model, entry, ("interfaces", name))
            if x is not None:
                model.interfaces[name] = x

    boxes = doc.get("boxes", {})
    if r.expect(boxes, dict, ("boxes",), "boxes"):
        for name, entry in boxes.items():
            _read_box(r, model, name, entry)

    morphs = doc.get("morphisms", {})
    if r.expect(morphs, dict, ("morphisms",), "morphisms"):
        for name, entry in morphs.items():
            _read_morphism(r, model, name, entry)

    if "compose" not in doc:
        r.bad(("compose",), "missing root composition", True)
    else:
        model.compose = doc["compose"]
        _check_expr(r, model, doc["compose"], ("compose",))

    if r.parse_problems:
        raise ModelError("parse", r.parse_problems)
    if r.problems:
        raise ModelError("validation", r.problems)
    return model


def _typed(r: _Reader, model: Model, entry, where: tuple) -> TypedFinSet | None:
    if model.doctrine == "ode":
        if isinstance(entry, dict):
            bad = [k for k, t in entry.items() if t != REAL]
            if bad:
                r.bad(where + (bad[0],), f"ODE ports carry type {REAL!r}")
                return None
            entry = list(entry)
        names = r.names(entry, where)
        if names is None:
            return None
        if len(set(names)) != len(names):
            r.bad(where, "names repeat")
            return None
        return TypedFinSet.uniform(names, REAL)
    m = r.str_map(entry, where)
    if m is None:
        return None
    for k, t in m.items():
        if t not in model.alphabets:
            r.bad(where + (k,), f"unknown alphabet {t!r}")
            return None
    return TypedFinSet(m)


def _read_interface(r: _Reader, model: Model, entry, where: tuple) -> Interface | None:
    if not r.expect(entry, dict, where, "interface"):
        return None
    for k in entry:
        if k not in ("inputs", "outputs", "exposed"):
            r.bad(where + (k,), "unknown interface field", True)
    parts = [_typed(r, model, entry.get(k, {} if model.doctrine == "automata" else []), where + (k,))
             for k in ("inputs", "outputs", "exposed")]
    if any(p is None for p in parts):
        return None
    try:
        return Interface(*parts)
    except FinSetError as exc:
        r.bad(where, str(exc))
        return None


def _poly(r: _Reader, text, where: tuple) -> Polynomial | None:
    try:
        return parse(text)
    except ParseError as exc:
        r.bad(where, str(exc), True)
        return None


def _read_box(r: _Reader, model: Model, name: str, entry):
    where = ("boxes", name)
    if not r.expect(entry, dict, where, "box"):
        return
    iname = entry.get("interface")
    if not isinstance(iname, str):
        r.bad(where + ("interface",), "box needs an interface name", True)
        return
    if iname not in model.interfaces:
        r.bad(where + ("interface",), f"unknown interface {iname!r}")
        return
    x = model.interfaces[iname]
    try:
        if model.doctrine == "ode":
            box = _read_ode_box(r, model, x, entry, where)
        else:
            box = _read_automaton(r, model, x, entry, where)
    except (OdeError, AutomatonError, FinSetError, ValueError) as exc:
        r.bad(where, str(exc))
        return
    if box is not None:
        model.boxes[name] = box
        model.box_interfaces[name] = iname


def _read_ode_box(r, model, x, entry, where):
    allowed = {"interface", "vars", "field", "readout", "ports"}
    for k in entry:
        if k not in allowed:
            r.bad(where + (k,), "unknown box field", True)
    vars_ = r.names(entry.get("vars"), where + ("vars",))
    fieldspec = r.str_map(entry.get("field", {}), where + ("field",))
    readspec = r.str_map(entry.get("readout", {}), where + ("readout",))
    ports = r.str_map(entry.get("ports", {}), where + ("ports",))
    if None in (vars_, fieldspec, readspec, ports):
        return None
    field_ = {v: _poly(r, t, where + ("field", v)) for v, t in fieldspec.items()}
    readout = {o: _poly(r, t, where + ("readout", o)) for o, t in readspec.items()}
    if any(p is None for p in list(field_.values()) + list(readout.values())):
        return None
    for v in vars_:
        if v not in field_:
            r.bad(where + ("field",), f"no velocity for variable {v!r}")
            return None
    for o in x.outputs:
        if o not in readout:
            r.bad(where + ("readout",), f"no readout for output {o!r}")
            return None
    used = set().union(*(p.names() for p in list(field_.values()) + list(readout.values())))
    params = [p for p in model.parameters if p in used]
    return OdeSystem.build(x, vars_, field_, readout, ports, params)


def _read_automaton(r, model, x, entry, where):
    allowed = {"interface", "states", "update", "readout", "obs"}
    for k in entry:
        if k not in allowed:
            r.bad(where + (k,), "unknown box field", True)
    states = r.names(entry.get("states"), where + ("states",))
    rows = entry.get("update")
    if states is None or not r.expect(rows, list, where + ("update",), "update"):
        return None
    update = {}
    for k, row in enumerate(rows):
        w = where + ("update", k)
        if not r.expect(row, dict, w, "update row"):
            return None
        s, inp, nxt = row.get("state"), row.get("input", []), row.get("next")
        if not isinstance(s, str):
            r.bad(w + ("state",), "state must be a string", True)
            return None
        if r.names(inp, w + ("input",)) is None or r.names(nxt, w + ("next",)) is None:
            return None
        key = (s, tuple(inp))
        if key in update:
            r.bad(w, f"duplicate row for state {s!r} and input {list(inp)}")
            return None
        update[key] = nxt
    tables = {}
    for part, ports in (("readout", x.outputs), ("obs", x.exposed)):
        t = entry.get(part, {s: [] for s in states} if not ports else None)
        if not r.expect(t, dict, where + (part,), part):
            return None
        for s, letters in t.items():
            if r.names(letters, where + (part, s)) is None:
                return None
        tables[part] = t
    return Automaton.build(x, model.alphabets, states, update, tables["readout"], tables["obs"])


def _read_morphism(r: _Reader, model: Model, name: str, entry):
    where = ("morphisms", name)
    if not r.expect(entry, dict, where, "morphism"):
        return
    allowed = {"domain", "codomain", "phi_in", "phi_out", "apex", "inner", "outer"}
    for k in entry:
        if k not in allowed:
            r.bad(where + (k,), "unknown morphism field", True)
    dom = entry.get("domain")
    if not r.expect(dom, list, where + ("domain",), "domain"):
        return
    labels, dnames = [], []
    for k, slot in enumerate(dom):
        w = where + ("domain", k)
        if not r.expect(slot, dict, w, "slot") or not isinstance(slot.get("label"), str) \
                or not isinstance(slot.get("interface"), str):
            r.bad(w, "slot needs a label and an interface name", True)
            return
        if slot["interface"] not in model.interfaces:
            r.bad(w + ("interface",), f"unknown interface {slot['interface']!r}")
            return
        labels.append(slot["label"])
        dnames.append(slot["interface"])
    cod = entry.get("codomain")
    if not isinstance(cod, str):
        r.bad(where + ("codomain",), "codomain must be an interface name", True)
        return
    if cod not in model.interfaces:
        r.bad(where + ("codomain",), f"unknown interface {cod!r}")
        return
    phi_in = r.str_map(entry.get("phi_in", {}), where + ("phi_in",))
    phi_out = r.str_map(entry.get("phi_out", {}), where + ("phi_out",))
    inner = r.str_map(entry.get("inner", {}), where + ("inner",))
    outer = r.str_map(entry.get("outer", {}), where + ("outer",))
    apex = _typed(r, model, entry.get("apex", {} if model.doctrine == "automata" else []), where + ("apex",))
    if None in (phi_in, phi_out, inner, outer, apex):
        return
    m = RsmMorphism(
        tuple(model.interfaces[d] for d in dnames),
        model.interfaces[cod],
        Prism(dict(phi_in), dict(phi_out)),
        PortCospan(apex, dict(inner), dict(outer)),
        tuple(labels),
    )
    diags = validate(m)
    for d in diags:
        r.bad(where + d.path, d.message)
    if not diags:
        model.morphisms[name] = MorphismDecl(m, tuple(dnames), cod)


def _check_expr(r: _Reader, model: Model, expr, where: tuple) -> Interface | None:
    """Check names and interfaces of a composition expression; returns the
    interface it produces."""
    if isinstance(expr, str):
        if expr not in model.boxes:
            if not any(p.where.startswith(pointer("boxes", expr)) for p in r.problems):
                r.bad(where, f"unknown box {expr!r}")
            return None
        return model.boxes[expr].interface
    if not isinstance(expr, dict) or not isinstance(expr.get("morphism"), str) \
            or not isinstance(expr.get("args"), list):
        r.bad(where, "expression must be a box name or {\"morphism\": name, \"args\": [...]}", True)
        return None
    name = expr["morphism"]
    got = [_check_expr(r, model, a, where + ("args", k)) for k, a in enumerate(expr["args"])]
    if name not in model.morphisms:
        if not any(p.where.startswith(pointer("morphisms", name)) for p in r.problems):
            r.bad(where + ("morphism",), f"unknown morphism {name!r}")
        return None
    decl = model.morphisms[name]
    if len(got) != len(decl.domain):
        r.bad(where + ("args",), f"{len(got)} arguments for {len(decl.domain)} slots")
        return None
    for k, (x, want) in enumerate(zip(got, decl.domain)):
        if x is not None and x != model.interfaces[want]:
            r.bad(where + ("args", k), f"argument does not fit slot {decl.morphism.labels[k]!r} (interface {want!r})")
    return decl.morphism.codomain


# -- writing -----------------------------------------------------------------


def _ports(model: Model, s: TypedFinSet):
    if model.doctrine == "ode":
        return list(s)
    return dict(s.typing)


def _interface_doc(model: Model, x: Interface) -> dict:
    return {k: _ports(model, getattr(x, k)) for k in ("inputs", "outputs", "exposed")}


def _poly_text(p: Polynomial, params) -> str:
    return p.to_text(first=params)


def box_document(model: Model, box: FilledBox, interface_name: str) -> dict:
    if isinstance(box, OdeSystem):
        params = list(model.parameters)
        return {
            "interface": interface_name,
            "vars": list(box.vars),
            "field": {v: _poly_text(box.field[v], params) for v in box.vars},
            "readout": {o: _poly_text(box.readout[o], params) for o in box.interface.outputs},
            "ports": dict(box.ports.assignment),
        }
    rows = [
        {"state": s, "input": list(i), "next": [t for t in box.states if t in box.update[(s, i)]]}
        for s in box.states
        for i in box.input_tuples()
    ]
    return {
        "interface": interface_name,
        "states": list(box.states),
        "update": rows,
        "readout": {s: list(box.readout[s]) for s in box.states},
        "obs": {s: list(box.obs[s]) for s in box.states},
    }


def to_document(model: Model) -> dict:
    doc: dict[str, Any] = {"doctrine": model.doctrine}
    if any(v is not None for v in model.parameters.values()):
        doc["parameters"] = dict(model.parameters)
    else:
        doc["parameters"] = list(model.parameters)
    if model.doctrine == "automata":
        doc["alphabets"] = {k: list(v) for k, v in model.alphabets.items()}
    doc["interfaces"] = {k: _interface_doc(model, x) for k, x in model.interfaces.items()}
    doc["boxes"] = {
        k: box_document(model, b, model.box_interfaces[k]) for k, b in model.boxes.items()
    }
    doc["morphisms"] = {}
    for k, d in model.morphisms.items():
        m = d.morphism
        doc["morphisms"][k] = {
            "domain": [{"label": lab, "interface": x} for lab, x in zip(m.labels, d.domain)],
            "codomain": d.codomain,
            "phi_in": dict(m.prism.phi_in),
            "phi_out": dict(m.prism.phi_out),
            "apex": _ports(model, m.ports.apex),
            "inner": dict(m.ports.inner),
            "outer": dict(m.ports.outer),
        }
    doc["compose"] = model.compose
    return doc


def dumps(model: Model) -> str:
    return json.dumps(to_document(model), indent=2) + "\n"


def composite_model(model: Model, box: FilledBox, name: str = "composite") -> Model:
    """A model holding just ``box`` as its root."""
    used_alph = box.interface.types() if model.doctrine == "automata" else set()
    params = model.parameters
    if isinstance(box, OdeSystem):
        params = {p: v for p, v in model.parameters.items() if p in set(box.params)}
    return Model(
        doctrine=model.doctrine,
        parameters=dict(params),
        alphabets={k: v for k, v in model.alphabets.items() if k in used_alph},
        interfaces={name: box.interface},
        boxes={name: box},
        box_interfaces={name: name},
        morphisms={},
        compose=name,
    )


__all__ = [
    "Model",
    "ModelError",
    "MorphismDecl",
    "Problem",
    "composite_model",
    "dumps",
    "from_document",
    "load",
    "loads",
    "pointer",
    "to_document",
]

# ActError/WiringError surface from Model.evaluate; callers catch them.
RUNTIME_ERRORS = (ActError, WiringError, OdeError, AutomatonError, FinSetError)
