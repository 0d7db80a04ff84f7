"""The action of wiring morphisms on filled boxes.

A morphism acts on a tuple of filled boxes (ODE systems or automata, one per
slot) in three steps: tensor the boxes under the morphism's slot labels,
share along its port cospan, then wire through its prism.

:func:`act_traced` keeps the intermediate systems and the renaming legs of
each step, which is what lets the identity and composition laws below be
checked by applying an explicit bijection rather than searching for one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence, Union

from . import automata as am
from . import ode
from .automata import Automaton, labelings, observation_span
from .finset import Cospan, FinMap
from .ode import OdeSystem
from .wiring import RsmMorphism, WiringError, check, identity, substitute_with_legs

FilledBox = Union[OdeSystem, Automaton]


class ActError(ValueError):
    pass


def doctrine_of(boxes: Sequence[FilledBox], default: str | None = None) -> str:
    kinds = {getattr(b, "doctrine", None) for b in boxes}
    if None in kinds:
        raise ActError("every filling must be an OdeSystem or an Automaton")
    if len(kinds) > 1:
        raise ActError(f"fillings mix doctrines: {sorted(kinds)}")
    if not kinds:
        if default is None:
            raise ActError("no fillings: pass the doctrine explicitly")
        return default
    return kinds.pop()


@dataclass(frozen=True)
class ActTrace:
    """Intermediate results of one action.

    ``tensor_legs`` is a list of variable injections (ODE) or the map from
    factor-state tuples to product states (automata). ``share_left`` is the
    variable quotient (ODE) or the state projection (automata);
    ``share_right`` is the apex injection (ODE) or the labelling projection
    (automata).
    """

    result: FilledBox
    tensored: FilledBox
    tensor_legs: Any
    shared: FilledBox
    share_left: FinMap
    share_right: FinMap
    cospan: Cospan


def act_traced(
    m: RsmMorphism,
    fillings: Sequence[FilledBox],
    doctrine: str | None = None,
    alphabets: Mapping[str, Sequence[str]] | None = None,
) -> ActTrace:
    check(m)
    fillings = list(fillings)
    kind = doctrine_of(fillings, doctrine)
    if doctrine is not None and kind != doctrine:
        raise ActError(f"fillings are {kind}, expected {doctrine}")
    if len(fillings) != len(m.domain):
        raise ActError(f"{len(fillings)} fillings for {len(m.domain)} slots")
    for lab, box, x in zip(m.labels, fillings, m.domain):
        if box.interface != x:
            raise ActError(f"filling of slot {lab!r} does not match its interface")
    c = m.port_cospan()

    if kind == "ode":
        tensored, legs = ode.tensor_with_legs(fillings, m.labels)
        shared, left, right = ode.share_with_legs(tensored, c)
        result = ode.wire(shared, m.prism, m.codomain)
    elif kind == "automata":
        tensored, legs = am.tensor_with_legs(fillings, m.labels)
        alph = dict(tensored.alphabets)
        for k, v in (alphabets or {}).items():
            alph.setdefault(k, tuple(v))
        if alph != tensored.alphabets:
            tensored = Automaton(
                tensored.states, tensored.interface, alph, tensored.update,
                tensored.readout, tensored.obs,
            )
        span = observation_span(c, alph)
        shared, left, right = am.share_with_legs(tensored, span, m.codomain.exposed)
        result = am.wire(shared, m.prism, m.codomain)
    else:
        raise ActError(f"unknown doctrine {kind!r}")
    return ActTrace(result, tensored, legs, shared, left, right, c)


def act(m: RsmMorphism, fillings: Sequence[FilledBox], doctrine: str | None = None, alphabets=None) -> FilledBox:
    return act_traced(m, fillings, doctrine, alphabets).result


def same_box(a: FilledBox, b: FilledBox) -> bool:
    return a.doctrine == b.doctrine and a.same_as(b)


def rename_box(box: FilledBox, bijection: Mapping[str, str] | FinMap) -> FilledBox:
    if isinstance(box, OdeSystem):
        return box.renamed(bijection)
    return box.relabel(bijection)


def identity_renaming(box: FilledBox, label: str = "b0") -> tuple[FilledBox, dict[str, str]]:
    """Act by the identity morphism and return the result with the bijection
    from ``box``'s variables or states onto the result's."""
    t = act_traced(identity(box.interface, label), [box], box.doctrine)
    if isinstance(box, OdeSystem):
        leg = t.tensor_legs[0]
        return t.result, {v: t.share_left(leg(v)) for v in box.vars}
    back = {t.share_left(x): x for x in t.result.states}
    if len(back) != len(t.result.states):
        return t.result, {}
    return t.result, {s: back.get(t.tensor_legs[(s,)], s) for s in box.states}


def act_identity_check(box: FilledBox, label: str = "b0") -> bool:
    """``act(id, [box])`` equals ``box`` after the constructed renaming."""
    result, bij = identity_renaming(box, label)
    try:
        return same_box(rename_box(box, bij), result)
    except ValueError:
        return False


def composite_renaming(
    m1: RsmMorphism, m2: RsmMorphism, fillings: Sequence[FilledBox], alphabets=None
) -> tuple[FilledBox, FilledBox, dict[str, str] | None]:
    """Compute both sides of the composition law.

    Returns ``(stepwise, oneshot, bijection)`` where ``stepwise`` is
    ``act(m2, [act(m1, fillings)])``, ``oneshot`` is
    ``act(substitute(m2, [m1]), fillings)`` and ``bijection`` sends the
    one-shot's variables or states to the stepwise ones (``None`` when the
    canonical map is not a bijection).
    """
    if len(m2.domain) != 1:
        raise ActError("the outer morphism must have exactly one slot")
    fillings = list(fillings)
    kind = doctrine_of(fillings, "automata")
    t1 = act_traced(m1, fillings, kind, alphabets)
    t2 = act_traced(m2, [t1.result], kind, alphabets)
    sub = substitute_with_legs(m2, [m1])
    t3 = act_traced(sub.morphism, fillings, kind, alphabets)
    k = m2.labels[0]
    if kind == "ode":
        bij = _ode_bijection(t1, t2, t3, sub, k, fillings)
    else:
        bij = _automata_bijection(t1, t2, t3, sub, k)
    return t2.result, t3.result, bij


def _record(bij: dict, x: str, y: str) -> bool:
    if bij.setdefault(x, y) != y:
        return False
    return True


def _ode_bijection(t1, t2, t3, sub, k, fillings):
    bij: dict[str, str] = {}
    (lift2,) = t2.tensor_legs
    for j, box in enumerate(fillings):
        for v in box.vars:
            x = t3.share_left(t3.tensor_legs[j](v))
            y = t2.share_left(lift2(t1.share_left(t1.tensor_legs[j](v))))
            if not _record(bij, x, y):
                return None
    for q in sub.outer_apex.dom:
        if not _record(bij, t3.share_right(sub.outer_apex(q)), t2.share_right(q)):
            return None
    for q in t1.cospan.apex:
        x = t3.share_right(sub.inner_apex(f"{k}.{q}"))
        if not _record(bij, x, t2.share_left(lift2(t1.share_right(q)))):
            return None
    if set(bij) != set(t3.result.vars) or len(set(bij.values())) != len(bij):
        return None
    return bij


def _automata_bijection(t1, t2, t3, sub, k):
    alph = t3.result.alphabets
    _, dec3, _ = labelings(t3.cospan.apex, alph)
    _, _, enc1 = labelings(t1.cospan.apex, alph)
    _, _, enc2 = labelings(t2.cospan.apex, alph)
    s1 = {(t1.share_left(a), t1.share_right(a)): a for a in t1.result.states}
    s2 = {(t2.share_left(b), t2.share_right(b)): b for b in t2.result.states}
    apex3 = list(t3.cospan.apex)
    bij = {}
    for x in t3.result.states:
        sigma = dict(zip(apex3, dec3[t3.share_right(x)]))
        sigma1 = tuple(sigma[sub.inner_apex(f"{k}.{q}")] for q in t1.cospan.apex)
        sigma2 = tuple(sigma[sub.outer_apex(q)] for q in t2.cospan.apex)
        a = s1.get((t3.share_left(x), enc1[sigma1]))
        b = s2.get((a, enc2[sigma2])) if a is not None else None
        if b is None:
            return None
        bij[x] = b
    if len(set(bij.values())) != len(bij) or set(bij.values()) != set(t2.result.states):
        return None
    return bij


def act_compose_check(m1: RsmMorphism, m2: RsmMorphism, fillings: Sequence[FilledBox], alphabets=None) -> bool:
    """``act(m2, [act(m1, fs)])`` equals ``act(substitute(m2, [m1]), fs)``
    after applying the canonical bijection of iterated limits/colimits."""
    try:
        stepwise, oneshot, bij = composite_renaming(m1, m2, fillings, alphabets)
    except WiringError:
        return False
    if bij is None:
        return False
    return same_box(rename_box(oneshot, bij), stepwise)


__all__ = [
    "ActError",
    "ActTrace",
    "FilledBox",
    "act",
    "act_traced",
    "act_identity_check",
    "act_compose_check",
    "composite_renaming",
    "doctrine_of",
    "identity_renaming",
    "rename_box",
    "same_box",
]
