"""Syntax for composing boxes.

A box has typed input, output and exposed ports (:class:`Interface`). A
morphism from inner boxes to an outer box pairs

* a :class:`Prism`, which feeds every inner input from an inner output or an
  outer input (``phi_in``) and every outer output from an inner output
  (``phi_out``); and
* a :class:`PortCospan`, which sends inner exposed ports and outer exposed
  ports into a shared apex of junctions.

Inner ports are addressed through the slot label of their box:
port ``e`` of the box in slot ``fg`` is ``"fg.e"``.

Prisms and cospans keep plain name assignments so that a malformed wiring can
still be built and then reported on by :func:`validate`. Checked
:class:`~rsmachines.finset.FinMap` views are produced on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .finset import (
    Cospan,
    FinMap,
    FinSetError,
    TypedFinSet,
    compose_cospans_with_legs,
)


class WiringError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    path: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        return "/".join(self.path) + ": " + self.message


@dataclass(frozen=True)
class Interface:
    inputs: TypedFinSet = field(default_factory=TypedFinSet)
    outputs: TypedFinSet = field(default_factory=TypedFinSet)
    exposed: TypedFinSet = field(default_factory=TypedFinSet)

    def __post_init__(self):
        seen: set[str] = set()
        for group in (self.inputs, self.outputs, self.exposed):
            clash = seen & set(group)
            if clash:
                raise FinSetError(f"port names used twice in one interface: {sorted(clash)}")
            seen |= set(group)

    @classmethod
    def real(cls, inputs=(), outputs=(), exposed=()) -> Interface:
        """An interface whose ports all carry real numbers."""
        return cls(
            TypedFinSet.uniform(inputs, REAL),
            TypedFinSet.uniform(outputs, REAL),
            TypedFinSet.uniform(exposed, REAL),
        )

    def prefixed(self, label: str) -> Interface:
        return Interface(
            self.inputs.prefixed(label),
            self.outputs.prefixed(label),
            self.exposed.prefixed(label),
        )

    def types(self) -> set[str]:
        return set(self.inputs.types) | set(self.outputs.types) | set(self.exposed.types)

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.inputs), len(self.outputs), len(self.exposed)


REAL = "R"
UNIT = Interface()


def _concat(sets: Sequence[TypedFinSet]) -> TypedFinSet:
    pairs = []
    for s in sets:
        pairs.extend(zip(s.elements, s.types))
    return TypedFinSet(pairs)


def tensor_all(interfaces: Sequence[Interface], labels: Sequence[str]) -> Interface:
    """Disjoint union of interfaces, each port prefixed with its slot label."""
    if len(interfaces) != len(labels):
        raise ValueError("one label per interface is required")
    if len(set(labels)) != len(labels):
        raise ValueError(f"slot labels must be distinct: {list(labels)}")
    pre = [x.prefixed(lab) for x, lab in zip(interfaces, labels)]
    return Interface(
        _concat([x.inputs for x in pre]),
        _concat([x.outputs for x in pre]),
        _concat([x.exposed for x in pre]),
    )


def tensor_interfaces(a: Interface, b: Interface) -> Interface:
    return tensor_all([a, b], ("left", "right"))


def default_labels(n: int) -> tuple[str, ...]:
    return tuple(f"b{k}" for k in range(n))


@dataclass(frozen=True)
class Prism:
    phi_in: Mapping[str, str]
    phi_out: Mapping[str, str]

    def maps(self, inner: Interface, outer: Interface) -> tuple[FinMap, FinMap]:
        """Checked maps ``inner.inputs -> inner.outputs + outer.inputs`` and
        ``outer.outputs -> inner.outputs``."""
        diags = prism_problems(self, inner, outer)
        if diags:
            raise WiringError(diags)
        target = _concat([inner.outputs, outer.inputs])
        return (
            FinMap(inner.inputs, target, self.phi_in),
            FinMap(outer.outputs, inner.outputs, self.phi_out),
        )

    @classmethod
    def identity(cls, x: Interface) -> Prism:
        return cls({i: i for i in x.inputs}, {o: o for o in x.outputs})


@dataclass(frozen=True)
class PortCospan:
    apex: TypedFinSet
    inner: Mapping[str, str]
    outer: Mapping[str, str]

    def cospan(self, inner_ports: TypedFinSet, outer_ports: TypedFinSet) -> Cospan:
        diags = cospan_problems(self, inner_ports, outer_ports)
        if diags:
            raise WiringError(diags)
        return Cospan(
            FinMap(inner_ports, self.apex, self.inner),
            FinMap(outer_ports, self.apex, self.outer),
        )

    @classmethod
    def identity(cls, ports: TypedFinSet) -> PortCospan:
        return cls(ports, {m: m for m in ports}, {m: m for m in ports})

    @classmethod
    def from_cospan(cls, c: Cospan) -> PortCospan:
        return cls(c.apex, dict(c.left.assignment), dict(c.right.assignment))


def prism_problems(prism: Prism, inner: Interface, outer: Interface) -> list[Diagnostic]:
    diags = []
    clash = set(inner.outputs) & set(outer.inputs)
    if clash:
        diags.append(Diagnostic(
            ("phi_in",), f"inner outputs and outer inputs share names {sorted(clash)}"
        ))
        return diags
    target = _concat([inner.outputs, outer.inputs])
    diags += _map_diagnostics("phi_in", inner.inputs, target, prism.phi_in)
    diags += _map_diagnostics("phi_out", outer.outputs, inner.outputs, prism.phi_out)
    return diags


def cospan_problems(ports: PortCospan, inner: TypedFinSet, outer: TypedFinSet) -> list[Diagnostic]:
    return _map_diagnostics("inner", inner, ports.apex, ports.inner) + _map_diagnostics(
        "outer", outer, ports.apex, ports.outer
    )


def _map_diagnostics(where: str, dom: TypedFinSet, cod: TypedFinSet, assignment) -> list[Diagnostic]:
    diags = []
    for x in dom:
        if x not in assignment:
            diags.append(Diagnostic((where, x), "port is not assigned"))
            continue
        y = assignment[x]
        if y not in cod:
            diags.append(Diagnostic((where, x), f"wired to unknown port {y!r}"))
        elif dom.type_of(x) != cod.type_of(y):
            diags.append(Diagnostic(
                (where, x),
                f"type mismatch: {x!r} is {dom.type_of(x)} but {y!r} is {cod.type_of(y)}",
            ))
    for x in assignment:
        if x not in dom:
            diags.append(Diagnostic((where, x), "no such port"))
    return diags


@dataclass(frozen=True)
class RsmMorphism:
    """A wiring of ``len(domain)`` inner boxes into one outer box."""

    domain: tuple[Interface, ...]
    codomain: Interface
    prism: Prism
    ports: PortCospan
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        if not self.labels:
            object.__setattr__(self, "labels", default_labels(len(self.domain)))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def inner(self) -> Interface:
        return tensor_all(self.domain, self.labels)

    def prism_maps(self) -> tuple[FinMap, FinMap]:
        return self.prism.maps(self.inner, self.codomain)

    def port_cospan(self) -> Cospan:
        return self.ports.cospan(self.inner.exposed, self.codomain.exposed)


def validate(m: RsmMorphism) -> list[Diagnostic]:
    """All boundary and typing problems of ``m``; empty when ``m`` is sound."""
    if len(m.labels) != len(m.domain):
        return [Diagnostic(("labels",), f"{len(m.labels)} labels for {len(m.domain)} slots")]
    if len(set(m.labels)) != len(m.labels):
        return [Diagnostic(("labels",), f"slot labels are not distinct: {list(m.labels)}")]
    try:
        inner = m.inner
    except FinSetError as exc:
        return [Diagnostic(("domain",), str(exc))]
    return prism_problems(m.prism, inner, m.codomain) + cospan_problems(
        m.ports, inner.exposed, m.codomain.exposed
    )


def check(m: RsmMorphism) -> RsmMorphism:
    diags = validate(m)
    if diags:
        raise WiringError(diags)
    return m


def identity(x: Interface, label: str = "b0") -> RsmMorphism:
    return RsmMorphism(
        domain=(x,),
        codomain=x,
        prism=Prism(
            {f"{label}.{i}": i for i in x.inputs},
            {o: f"{label}.{o}" for o in x.outputs},
        ),
        ports=PortCospan(
            x.exposed, {f"{label}.{p}": p for p in x.exposed}, {p: p for p in x.exposed}
        ),
        labels=(label,),
    )


def machine_part(m: RsmMorphism) -> RsmMorphism:
    """The morphism's prism alone: every inner exposed port stays exposed."""
    inner = m.inner
    return RsmMorphism(
        domain=m.domain,
        codomain=Interface(m.codomain.inputs, m.codomain.outputs, inner.exposed),
        prism=m.prism,
        ports=PortCospan.identity(inner.exposed),
        labels=m.labels,
    )


def sharing_part(m: RsmMorphism) -> RsmMorphism:
    """The morphism's cospan alone: inner inputs and outputs pass through."""
    inner = m.inner
    return RsmMorphism(
        domain=m.domain,
        codomain=Interface(inner.inputs, inner.outputs, m.codomain.exposed),
        prism=Prism.identity(inner),
        ports=m.ports,
        labels=m.labels,
    )


@dataclass(frozen=True)
class Substitution:
    """A substituted morphism together with the apex injections of the
    (slot-prefixed) inner cospans and of the outer cospan."""

    morphism: RsmMorphism
    inner_apex: FinMap
    outer_apex: FinMap


def substitute(outer: RsmMorphism, inner: Sequence[RsmMorphism]) -> RsmMorphism:
    return substitute_with_legs(outer, inner).morphism


def _composite_labels(outer: RsmMorphism, inner: Sequence[RsmMorphism]) -> list[tuple[str, ...]]:
    out = []
    for k, m in zip(outer.labels, inner):
        if len(outer.labels) == 1:
            out.append(m.labels)
        elif len(m.labels) == 1:
            out.append((k,))
        else:
            out.append(tuple(f"{k}.{lab}" for lab in m.labels))
    return out


def substitute_with_legs(outer: RsmMorphism, inner: Sequence[RsmMorphism]) -> Substitution:
    """Plug ``inner[j]`` into slot ``j`` of ``outer``.

    Inner inputs are chased through the intermediate boxes: an inner input
    wired to an intermediate input follows the outer prism, and lands either
    on an outer input or, through an intermediate output, on an innermost
    output.
    """
    inner = list(inner)
    check(outer)
    for m in inner:
        check(m)
    if len(inner) != len(outer.domain):
        raise WiringError([Diagnostic(("inner",), f"{len(inner)} morphisms for {len(outer.domain)} slots")])
    diags = []
    for j, (m, x) in enumerate(zip(inner, outer.domain)):
        if m.codomain != x:
            diags.append(Diagnostic(("inner", str(j)), "codomain does not match the outer slot"))
    if diags:
        raise WiringError(diags)

    new_labels = _composite_labels(outer, inner)
    if len({lab for labs in new_labels for lab in labs}) != sum(len(labs) for labs in new_labels):
        raise WiringError([Diagnostic(("labels",), "composite slot labels collide")])

    # rename[j]: inner port name of morphism j -> composite inner port name
    rename: list[dict[str, str]] = []
    for m, labs in zip(inner, new_labels):
        r = {}
        for x, old, new in zip(m.domain, m.labels, labs):
            for group in (x.inputs, x.outputs, x.exposed):
                for p in group:
                    r[f"{old}.{p}"] = f"{new}.{p}"
        rename.append(r)

    slot_of = {lab: j for j, lab in enumerate(outer.labels)}

    def split(name: str) -> tuple[int, str]:
        lab, port = _split_label(name, outer.labels)
        return slot_of[lab], port

    phi_out = {}
    for y in outer.codomain.outputs:
        j, q = split(outer.prism.phi_out[y])
        phi_out[y] = rename[j][inner[j].prism.phi_out[q]]

    phi_in = {}
    for j, m in enumerate(inner):
        inner_outputs = set(m.inner.outputs)
        for x, t in m.prism.phi_in.items():
            if t in inner_outputs:
                phi_in[rename[j][x]] = rename[j][t]
                continue
            t2 = outer.prism.phi_in[f"{outer.labels[j]}.{t}"]
            if t2 in outer.codomain.inputs:
                phi_in[rename[j][x]] = t2
            else:
                j2, q = split(t2)
                phi_in[rename[j][x]] = rename[j2][inner[j2].prism.phi_out[q]]

    # tensor the inner cospans, prefixing apexes by the outer slot label
    apex_pairs, left, right = [], {}, {}
    for j, m in enumerate(inner):
        k = outer.labels[j]
        for q, t in zip(m.ports.apex.elements, m.ports.apex.types):
            apex_pairs.append((f"{k}.{q}", t))
        for p, q in m.ports.inner.items():
            left[rename[j][p]] = f"{k}.{q}"
        for p, q in m.ports.outer.items():
            right[f"{k}.{p}"] = f"{k}.{q}"
    domain = tuple(x for m in inner for x in m.domain)
    labels = tuple(lab for labs in new_labels for lab in labs)
    composite_inner = tensor_all(domain, labels)
    tensored = Cospan(
        FinMap(composite_inner.exposed, TypedFinSet(apex_pairs), left),
        FinMap(outer.inner.exposed, TypedFinSet(apex_pairs), right),
    )
    composed, j1, j2 = compose_cospans_with_legs(tensored, outer.port_cospan())

    result = RsmMorphism(
        domain=domain,
        codomain=outer.codomain,
        prism=Prism(phi_in, phi_out),
        ports=PortCospan.from_cospan(composed),
        labels=labels,
    )
    check(result)
    return Substitution(result, j1, j2)


def _split_label(name: str, labels: Sequence[str]) -> tuple[str, str]:
    # labels may themselves contain dots; take the longest matching one
    best = None
    for lab in labels:
        if name.startswith(lab + ".") and (best is None or len(lab) > len(best)):
            best = lab
    if best is None:
        raise WiringError([Diagnostic((name,), "port does not belong to any slot")])
    return best, name[len(best) + 1:]


def same_morphism(a: RsmMorphism, b: RsmMorphism, apex: FinMap | None = None) -> bool:
    """Literal equality of two morphisms, after renaming ``a``'s apex by the
    bijection ``apex`` when given."""
    ports = a.ports
    if apex is not None:
        if not apex.is_bijective() or apex.dom != ports.apex:
            return False
        ports = PortCospan(
            apex.cod,
            {p: apex(q) for p, q in ports.inner.items()},
            {p: apex(q) for p, q in ports.outer.items()},
        )
    return (
        a.domain == b.domain
        and a.labels == b.labels
        and a.codomain == b.codomain
        and dict(a.prism.phi_in) == dict(b.prism.phi_in)
        and dict(a.prism.phi_out) == dict(b.prism.phi_out)
        and ports.apex == b.ports.apex
        and dict(ports.inner) == dict(b.ports.inner)
        and dict(ports.outer) == dict(b.ports.outer)
    )
