"""Non-deterministic automata with typed ports.

Ports are typed by alphabet names. An automaton steps from a state and a
tuple of input letters (one per input port, in interface order) to a set of
next states, which may be empty. It reads out one letter per output port and
shows one observation letter per exposed port.

Sharing pulls states back along an observation span: composite states are
pairs ``(s, q)`` whose observations agree, and a step must land on a pair
that agrees again. Wiring resolves inner inputs from the current readout or
from outer inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

from .finset import Cospan, FinMap, FinSet, Span, TypedFinSet, pullback
from .wiring import Interface, PortCospan, Prism, default_labels, tensor_all

Letters = tuple[str, ...]


class AutomatonError(ValueError):
    pass


def tuple_name(parts: Sequence[str]) -> str:
    if len(parts) == 1:
        return parts[0]
    return "(" + ",".join(parts) + ")"


def labelings(ports: TypedFinSet, alphabets: Mapping[str, Sequence[str]]):
    """All assignments of a letter to each port, as a named finite set.

    Returns ``(names, decode, encode)`` where ``decode`` maps a name to its
    letter tuple (in port order) and ``encode`` is the inverse.
    """
    try:
        choices = [alphabets[t] for t in ports.types]
    except KeyError as exc:
        raise AutomatonError(f"unknown alphabet {exc.args[0]!r}") from None
    decode: dict[str, Letters] = {}
    for letters in product(*choices):
        decode[tuple_name(letters)] = tuple(letters)
    encode = {v: k for k, v in decode.items()}
    return FinSet(decode), decode, encode


@dataclass(frozen=True)
class Automaton:
    states: FinSet
    interface: Interface
    alphabets: Mapping[str, Letters]
    update: Mapping[tuple[str, Letters], frozenset]
    readout: Mapping[str, Letters]
    obs: Mapping[str, Letters]

    doctrine = "automata"

    def __post_init__(self):
        alph = {k: tuple(v) for k, v in self.alphabets.items()}
        object.__setattr__(self, "alphabets", alph)
        for name, letters in alph.items():
            if not letters:
                raise AutomatonError(f"alphabet {name!r} is empty")
            if len(set(letters)) != len(letters):
                raise AutomatonError(f"alphabet {name!r} repeats a letter")
            for ch in letters:
                if not ch or any(c in ch for c in "(),"):
                    raise AutomatonError(f"letter {ch!r} of {name!r} must be plain text")
        missing = self.interface.types() - set(alph)
        if missing:
            raise AutomatonError(f"ports use undeclared alphabets {sorted(missing)}")

        upd = {k: frozenset(v) for k, v in self.update.items()}
        object.__setattr__(self, "update", upd)
        inputs = self.input_tuples()
        expected = {(s, i) for s in self.states for i in inputs}
        if set(upd) != expected:
            lacking = sorted(expected - set(upd))
            extra = sorted(set(upd) - expected)
            raise AutomatonError(
                f"update must be defined exactly on states x inputs "
                f"(missing {lacking[:3]}, unexpected {extra[:3]})"
            )
        for key, nxt in upd.items():
            stray = nxt - set(self.states)
            if stray:
                raise AutomatonError(f"update{key} reaches unknown states {sorted(stray)}")
        self._check_letters("readout", self.readout, self.interface.outputs)
        self._check_letters("obs", self.obs, self.interface.exposed)

    def _check_letters(self, what, table, ports: TypedFinSet):
        table = {s: tuple(v) for s, v in table.items()}
        object.__setattr__(self, what, table)
        if set(table) != set(self.states):
            raise AutomatonError(f"{what} must be defined on every state")
        for s, letters in table.items():
            if len(letters) != len(ports):
                raise AutomatonError(f"{what}({s}) has {len(letters)} letters, expected {len(ports)}")
            for port, t, ch in zip(ports.elements, ports.types, letters):
                if ch not in self.alphabets[t]:
                    raise AutomatonError(f"{what}({s}) puts {ch!r} on {port!r}, not a letter of {t}")

    @classmethod
    def build(
        cls,
        interface: Interface,
        alphabets: Mapping[str, Sequence[str]],
        states: Sequence[str],
        update: Mapping[tuple[str, Sequence[str]], Iterable[str]],
        readout: Mapping[str, Sequence[str]] | None = None,
        obs: Mapping[str, Sequence[str]] | None = None,
    ) -> Automaton:
        """Construct from plain data; missing readout/obs default to empty
        tuples (valid only when there are no such ports)."""
        used = interface.types()
        return cls(
            FinSet(states),
            interface,
            {k: tuple(v) for k, v in alphabets.items() if k in used},
            {(s, tuple(i)): frozenset(n) for (s, i), n in update.items()},
            readout if readout is not None else {s: () for s in states},
            obs if obs is not None else {s: () for s in states},
        )

    def input_tuples(self) -> list[Letters]:
        return [tuple(t) for t in product(*(self.alphabets[t] for t in self.interface.inputs.types))]

    def successors(self, s: str, inputs: Sequence[str] = ()) -> frozenset:
        return self.update[(s, tuple(inputs))]

    def observation_space(self):
        return labelings(self.interface.exposed, self.alphabets)

    def observation_map(self) -> FinMap:
        space, _, encode = self.observation_space()
        return FinMap(self.states, space, {s: encode[self.obs[s]] for s in self.states})

    def relabel(self, mapping: FinMap | Mapping[str, str]) -> Automaton:
        m = mapping.assignment if isinstance(mapping, FinMap) else dict(mapping)
        if set(m) != set(self.states) or len(set(m.values())) != len(m):
            raise AutomatonError("state relabelling must be a bijection")
        return Automaton(
            FinSet(m[s] for s in self.states),
            self.interface,
            self.alphabets,
            {(m[s], i): frozenset(m[t] for t in nxt) for (s, i), nxt in self.update.items()},
            {m[s]: v for s, v in self.readout.items()},
            {m[s]: v for s, v in self.obs.items()},
        )

    def same_as(self, other: Automaton) -> bool:
        return (
            isinstance(other, Automaton)
            and self.states == other.states
            and self.interface == other.interface
            and self.update == other.update
            and self.readout == other.readout
            and self.obs == other.obs
        )


def unit_automaton() -> Automaton:
    return Automaton.build(Interface(), {}, ["*"], {("*", ()): ["*"]})


def _merge_alphabets(automata: Sequence[Automaton]) -> dict[str, Letters]:
    out: dict[str, Letters] = {}
    for a in automata:
        for k, v in a.alphabets.items():
            if k in out and out[k] != v:
                raise AutomatonError(f"alphabet {k!r} is declared with different letters")
            out[k] = v
    return out


def tensor_with_legs(
    automata: Sequence[Automaton], labels: Sequence[str] | None = None
) -> tuple[Automaton, dict[tuple[str, ...], str]]:
    """Synchronous product. States are tuples of factor states, named
    ``"(s1,s2,...)"`` (a single factor keeps its names, no factor gives the
    unit). Returns the product and the map from factor-state tuples to
    product state names."""
    labels = tuple(labels) if labels is not None else default_labels(len(automata))
    if not automata:
        return unit_automaton(), {(): "*"}
    interface = tensor_all([a.interface for a in automata], labels)
    index = {combo: tuple_name(combo) for combo in product(*(a.states for a in automata))}
    per_factor_inputs = [a.input_tuples() for a in automata]
    update = {}
    for combo, name in index.items():
        for ins in product(*per_factor_inputs):
            nexts = product(*(a.update[(s, i)] for a, s, i in zip(automata, combo, ins)))
            update[(name, sum(ins, ()))] = frozenset(index[n] for n in nexts)
    out = Automaton(
        FinSet(index.values()),
        interface,
        _merge_alphabets(automata),
        update,
        {name: sum((a.readout[s] for a, s in zip(automata, combo)), ()) for combo, name in index.items()},
        {name: sum((a.obs[s] for a, s in zip(automata, combo)), ()) for combo, name in index.items()},
    )
    return out, index


def tensor(a: Automaton, b: Automaton) -> Automaton:
    return tensor_with_legs([a, b], ("left", "right"))[0]


def observation_span(c: Cospan, alphabets: Mapping[str, Sequence[str]]) -> Span:
    """Turn a cospan of typed port sets into the span of their labelling sets
    (each leg pulls a labelling of the apex back along the port map)."""
    q_names, q_dec, _ = labelings(c.apex, alphabets)
    _, _, m_enc = labelings(c.left.dom, alphabets)
    _, _, n_enc = labelings(c.right.dom, alphabets)
    m_space = FinSet(m_enc.values())
    n_space = FinSet(n_enc.values())
    apex_ports = c.apex.elements
    left, right = {}, {}
    for q in q_names:
        sigma = dict(zip(apex_ports, q_dec[q]))
        left[q] = m_enc[tuple(sigma[c.left(p)] for p in c.left.dom)]
        right[q] = n_enc[tuple(sigma[c.right(p)] for p in c.right.dom)]
    return Span(FinMap(q_names, m_space, left), FinMap(q_names, n_space, right))


def share_with_legs(
    a: Automaton, span: Span, exposed: TypedFinSet
) -> tuple[Automaton, FinMap, FinMap]:
    """Restrict to states whose observation matches the span's left leg.

    ``span.left`` must land in the labellings of ``a``'s exposed ports and
    ``span.right`` in the labellings of ``exposed`` (the new exposed ports).
    A composite step ``(s, q) -> (s', q')`` needs ``s' in update(s)`` and
    ``span.left(q') == obs(s')``. Returns the automaton and both pullback
    projections.

    States are named ``"(s,q)"``, except that an injective ``span.left``
    leaves at most one ``q`` per ``s`` and the state keeps the name ``s``.
    """
    p = a.observation_map()
    if span.left.cod != p.cod:
        raise AutomatonError("span does not land in the observation labellings")
    n_space, n_dec, _ = labelings(exposed, a.alphabets)
    if span.right.cod != n_space:
        raise AutomatonError("span does not land in the labellings of the new exposed ports")
    apex, proj1, proj2 = pullback(p, span.left)
    if span.left.is_injective():
        # each state meets at most one q: keep the state's own name
        names = {x: proj1(x) for x in apex}
        apex = FinSet(names[x] for x in apex)
        proj1 = FinMap(apex, proj1.cod, {names[x]: proj1(x) for x in names})
        proj2 = FinMap(apex, proj2.cod, {names[x]: proj2(x) for x in names})
    index = {(proj1(x), proj2(x)): x for x in apex}
    fibre: dict[str, list[str]] = {}
    for q in span.left.dom:
        fibre.setdefault(span.left(q), []).append(q)
    update = {}
    for x in apex:
        s = proj1(x)
        for inp in a.input_tuples():
            update[(x, inp)] = frozenset(
                index[(t, q)] for t in a.update[(s, inp)] for q in fibre.get(p(t), ())
            )
    out = Automaton(
        apex,
        Interface(a.interface.inputs, a.interface.outputs, exposed),
        a.alphabets,
        update,
        {x: a.readout[proj1(x)] for x in apex},
        {x: n_dec[span.right(proj2(x))] for x in apex},
    )
    return out, proj1, proj2


def share(a: Automaton, span: Span, exposed: TypedFinSet) -> Automaton:
    return share_with_legs(a, span, exposed)[0]


def share_ports(a: Automaton, ports: PortCospan | Cospan) -> Automaton:
    """Share through a cospan of port sets rather than an explicit span."""
    if isinstance(ports, PortCospan):
        outer = TypedFinSet((p, ports.apex.type_of(q)) for p, q in ports.outer.items())
        ports = ports.cospan(a.interface.exposed, outer)
    alph = dict(a.alphabets)
    return share(a, observation_span(ports, alph), ports.right.dom)


def wire(a: Automaton, prism: Prism, outer: Interface) -> Automaton:
    """Cascade through a prism.

    Every inner input reads either the current (pre-step) readout of an inner
    output or the supplied outer input letter; then the whole automaton steps.
    """
    if outer.exposed != a.interface.exposed:
        raise AutomatonError("wiring cannot change exposed ports")
    missing = outer.types() - set(a.alphabets)
    if missing:
        raise AutomatonError(f"outer ports use undeclared alphabets {sorted(missing)}")
    phi_in, phi_out = prism.maps(a.interface, outer)
    out_pos = {o: k for k, o in enumerate(a.interface.outputs)}
    in_pos = {y: k for k, y in enumerate(outer.inputs)}
    outer_inputs = [tuple(t) for t in product(*(a.alphabets[t] for t in outer.inputs.types))]
    update = {}
    for s in a.states:
        r = a.readout[s]
        for y in outer_inputs:
            x = tuple(
                r[out_pos[t]] if t in out_pos else y[in_pos[t]]
                for t in (phi_in(i) for i in a.interface.inputs)
            )
            update[(s, y)] = a.update[(s, x)]
    return Automaton(
        a.states,
        outer,
        a.alphabets,
        update,
        {s: tuple(a.readout[s][out_pos[phi_out(o)]] for o in outer.outputs) for s in a.states},
        a.obs,
    )


def as_letters(x: Iterable[str]) -> Letters:
    return tuple(x)
