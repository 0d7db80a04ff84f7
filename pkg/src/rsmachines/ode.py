"""Continuous dynamical systems with polynomial vector fields.

A system has state variables ``vars`` (coordinates of R^vars), a vector field
with one component per variable that may read the system's input ports, a
readout with one component per output port, and a map sending every exposed
port to the variable it shares.

Resource sharing adds velocities along identified coordinates; machine wiring
substitutes readouts (or renamed outer inputs) for inner inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .expr import Polynomial, PolyMap, parse
from .finset import Cospan, FinMap, FinSet, FinSetError, TypedFinSet, pushout
from .wiring import REAL, Interface, PortCospan, Prism, default_labels, tensor_all


class OdeError(ValueError):
    pass


PolyLike = Union[Polynomial, str]


def _poly(x: PolyLike) -> Polynomial:
    return parse(x) if isinstance(x, str) else x


@dataclass(frozen=True)
class OdeSystem:
    vars: FinSet
    params: FinSet
    field: PolyMap
    readout: PolyMap
    ports: FinMap
    interface: Interface

    doctrine = "ode"

    def __post_init__(self):
        x = self.interface
        bad_types = x.types() - {REAL}
        if bad_types:
            raise OdeError(f"ports must carry type {REAL!r}, got {sorted(bad_types)}")
        names = {
            "variables": set(self.vars),
            "parameters": set(self.params),
            "inputs": set(x.inputs),
        }
        kinds = list(names)
        for a in range(len(kinds)):
            for b in range(a + 1, len(kinds)):
                clash = names[kinds[a]] & names[kinds[b]]
                if clash:
                    raise OdeError(f"{kinds[a]} and {kinds[b]} share names {sorted(clash)}")
        if self.field.cod_vars != self.vars:
            raise OdeError("vector field needs exactly one component per variable")
        if not set(self.field.dom_vars) <= set(self.vars) | set(x.inputs):
            raise OdeError("vector field may read only variables and inputs")
        if self.readout.cod_vars != x.outputs.base:
            raise OdeError("readout needs exactly one component per output port")
        if not set(self.readout.dom_vars) <= set(self.vars):
            raise OdeError("readout may read only variables")
        if self.ports.dom != x.exposed or self.ports.cod.base != self.vars.base:
            raise OdeError("port map must send every exposed port to a variable")

    @classmethod
    def build(
        cls,
        interface: Interface,
        vars: Sequence[str],
        field: Mapping[str, PolyLike],
        readout: Mapping[str, PolyLike] | None = None,
        ports: Mapping[str, str] | None = None,
        params: Sequence[str] = (),
    ) -> OdeSystem:
        """Construct from plain names; polynomials may be given as text."""
        vs = FinSet(vars)
        ps = FinSet(params)
        readout = readout or {}
        ports = ports or {}
        clash = set(vars) & set(interface.inputs)
        if clash:
            raise OdeError(f"variables and inputs share names {sorted(clash)}")
        try:
            fmap = PolyMap(
                FinSet(list(vars) + list(interface.inputs)),
                vs,
                {v: _poly(field[v]) for v in vars if v in field},
                frozenset(ps),
            )
            rmap = PolyMap(
                vs,
                interface.outputs.base,
                {o: _poly(readout[o]) for o in interface.outputs if o in readout},
                frozenset(ps),
            )
            pmap = FinMap(interface.exposed, vs, ports)
        except (FinSetError, ValueError) as exc:
            raise OdeError(str(exc)) from exc
        return cls(vs, ps, fmap, rmap, pmap, interface)

    def rhs(self, v: str) -> Polynomial:
        return self.field[v]

    def renamed(self, mapping: FinMap | Mapping[str, str]) -> OdeSystem:
        """Rename variables by a bijection."""
        m = mapping.assignment if isinstance(mapping, FinMap) else dict(mapping)
        if set(m) != set(self.vars) or len(set(m.values())) != len(m):
            raise OdeError("variable renaming must be a bijection on the variables")
        return OdeSystem.build(
            self.interface,
            [m[v] for v in self.vars],
            {m[v]: self.field[v].rename(m) for v in self.vars},
            {o: self.readout[o].rename(m) for o in self.interface.outputs},
            {p: m[self.ports(p)] for p in self.interface.exposed},
            self.params.elements,
        )

    def same_as(self, other: OdeSystem) -> bool:
        """Structural equality, insensitive to declaration order."""
        return (
            isinstance(other, OdeSystem)
            and self.vars == other.vars
            and self.params == other.params
            and self.interface == other.interface
            and dict(self.field.components) == dict(other.field.components)
            and dict(self.readout.components) == dict(other.readout.components)
            and dict(self.ports.assignment) == dict(other.ports.assignment)
        )

    def free_inputs(self) -> list[str]:
        return list(self.interface.inputs)


def unit_system() -> OdeSystem:
    return OdeSystem.build(Interface(), [], {})


def tensor_with_legs(
    systems: Sequence[OdeSystem], labels: Sequence[str] | None = None
) -> tuple[OdeSystem, list[FinMap]]:
    """Side-by-side system; variables and ports get their slot label as a
    prefix. Parameters are shared by name across factors. Also returns, per
    factor, the injection of its variables."""
    labels = tuple(labels) if labels is not None else default_labels(len(systems))
    interface = tensor_all([s.interface for s in systems], labels)
    vars_: list[str] = []
    params: list[str] = []
    fieldc: dict[str, Polynomial] = {}
    readout: dict[str, Polynomial] = {}
    ports: dict[str, str] = {}
    legs = []
    for s, lab in zip(systems, labels):
        ren = {v: f"{lab}.{v}" for v in s.vars}
        ren.update({i: f"{lab}.{i}" for i in s.interface.inputs})
        for v in s.vars:
            vars_.append(ren[v])
            fieldc[ren[v]] = s.field[v].rename(ren)
        for o in s.interface.outputs:
            readout[f"{lab}.{o}"] = s.readout[o].rename(ren)
        for p in s.interface.exposed:
            ports[f"{lab}.{p}"] = ren[s.ports(p)]
        for p in s.params:
            if p not in params:
                params.append(p)
        legs.append((s.vars, {v: ren[v] for v in s.vars}))
    out = OdeSystem.build(interface, vars_, fieldc, readout, ports, params)
    return out, [FinMap(dom, out.vars, m) for dom, m in legs]


def tensor_all_systems(systems: Sequence[OdeSystem], labels: Sequence[str] | None = None) -> OdeSystem:
    return tensor_with_legs(systems, labels)[0]


def tensor(a: OdeSystem, b: OdeSystem) -> OdeSystem:
    return tensor_with_legs([a, b], ("left", "right"))[0]


def _as_cospan(sys: OdeSystem, ports: Cospan | PortCospan) -> Cospan:
    if isinstance(ports, Cospan):
        return ports
    outer = TypedFinSet((p, ports.apex.type_of(q)) for p, q in ports.outer.items())
    return ports.cospan(sys.interface.exposed, outer)


def share_with_legs(
    sys: OdeSystem, ports: Cospan | PortCospan
) -> tuple[OdeSystem, FinMap, FinMap]:
    """Identify variables through a cospan of exposed ports.

    New variables are the pushout of the apex and the old variables over the
    inner exposed ports (apex names win). The velocity of a new variable is
    the sum of the velocities of the old variables it glues. Returns the
    system, the quotient of old variables, and the apex injection.
    """
    c = _as_cospan(sys, ports)
    if c.left.dom != sys.interface.exposed:
        raise OdeError(
            f"cospan expects exposed ports {list(c.left.dom)}, "
            f"system has {list(sys.interface.exposed)}"
        )
    if set(c.apex.types if isinstance(c.apex, TypedFinSet) else ()) - {REAL}:
        raise OdeError("shared wires must carry type 'R'")
    new_vars, apex_inj, quotient = pushout(c.left, sys.ports)
    clash = set(new_vars) & (set(sys.params) | set(sys.interface.inputs))
    if clash:
        raise OdeError(f"shared variables collide with parameters or inputs: {sorted(clash)}")

    ren = quotient.assignment
    sums: dict[str, Polynomial] = {c_: Polynomial() for c_ in new_vars}
    for v in sys.vars:
        sums[ren[v]] = sums[ren[v]] + sys.field[v].rename(ren)
    interface = Interface(sys.interface.inputs, sys.interface.outputs, c.right.dom)
    out = OdeSystem.build(
        interface,
        new_vars.elements,
        sums,
        {o: sys.readout[o].rename(ren) for o in sys.interface.outputs},
        {p: apex_inj(c.right(p)) for p in c.right.dom},
        sys.params.elements,
    )
    return out, FinMap(sys.vars, out.vars, ren), FinMap(c.apex, out.vars, apex_inj.assignment)


def share(sys: OdeSystem, ports: Cospan | PortCospan) -> OdeSystem:
    return share_with_legs(sys, ports)[0]


def wire(sys: OdeSystem, prism: Prism, outer: Interface) -> OdeSystem:
    """Feed inner inputs from readouts or outer inputs, and outer outputs
    from inner outputs. Exposed ports are untouched."""
    if outer.exposed != sys.interface.exposed:
        raise OdeError("wiring cannot change exposed ports")
    phi_in, phi_out = prism.maps(sys.interface, outer)
    inner_outputs = set(sys.interface.outputs)
    subst = {}
    for x in sys.interface.inputs:
        t = phi_in(x)
        subst[x] = sys.readout[t] if t in inner_outputs else Polynomial.var(t)
    return OdeSystem.build(
        outer,
        sys.vars.elements,
        {v: sys.field[v].substitute(subst) for v in sys.vars},
        {o: sys.readout[phi_out(o)] for o in outer.outputs},
        dict(sys.ports.assignment),
        sys.params.elements,
    )
