import random
from itertools import product

import pytest

import gen
from oracles import share_oracle
from rsmachines.automata import (
    Automaton,
    AutomatonError,
    labelings,
    observation_span,
    share,
    share_ports,
    share_with_legs,
    tensor,
    tensor_with_legs,
    unit_automaton,
    wire,
)
from rsmachines.finset import FinMap, FinSet, Span, TypedFinSet, compose_spans, pullback
from rsmachines.wiring import Interface, PortCospan, Prism

PARITY = {"parity": ("even", "odd")}
BIT = {"bit": ("0", "1")}


def cycle(n, observed=True):
    x = Interface(exposed=TypedFinSet({"par": "parity"})) if observed else Interface(outputs=TypedFinSet({"out": "bit"}))
    states = [str(k) for k in range(n)]
    return Automaton.build(
        x,
        {**PARITY, **BIT},
        states,
        {(s, ()): [str((int(s) + 1) % n)] for s in states},
        readout=None if observed else {s: [str(int(s) % 2)] for s in states},
        obs={s: ["even" if int(s) % 2 == 0 else "odd"] for s in states} if observed else None,
    )


def adder():
    states = ["0", "1"]
    return Automaton.build(
        Interface(inputs=TypedFinSet({"in": "bit"})),
        BIT,
        states,
        {(s, (i,)): [str((int(s) + int(i)) % 2)] for s in states for i in "01"},
    )


def parity_share(m, n):
    t = tensor_with_legs([cycle(m), cycle(n)], ("a", "b"))[0]
    ports = PortCospan(TypedFinSet({"p": "parity"}), {"a.par": "p", "b.par": "p"}, {})
    return t, ports


def edges(a):
    return {(s, t) for s in a.states for i in a.input_tuples() for t in a.update[(s, i)]}


# -- construction ------------------------------------------------------------


def test_build_rejects_partial_update_and_bad_letters():
    x = Interface(inputs=TypedFinSet({"in": "bit"}))
    with pytest.raises(AutomatonError, match="exactly"):
        Automaton.build(x, BIT, ["0"], {("0", ("0",)): ["0"]})
    with pytest.raises(AutomatonError, match="unknown states"):
        Automaton.build(Interface(), {}, ["0"], {("0", ()): ["9"]})
    y = Interface(outputs=TypedFinSet({"o": "bit"}))
    with pytest.raises(AutomatonError, match="not a letter"):
        Automaton.build(y, BIT, ["0"], {("0", ()): []}, readout={"0": ["2"]})
    with pytest.raises(AutomatonError, match="undeclared"):
        Automaton.build(y, {}, ["0"], {("0", ()): []}, readout={"0": ["0"]})


def test_empty_successor_sets_are_legal():
    a = Automaton.build(Interface(), {}, ["s"], {("s", ()): []})
    assert a.successors("s") == frozenset()


def test_labelings_name_tuples():
    names, dec, enc = labelings(TypedFinSet({"x": "bit", "y": "parity"}), {**BIT, **PARITY})
    assert list(names) == ["(0,even)", "(0,odd)", "(1,even)", "(1,odd)"]
    single, _, _ = labelings(TypedFinSet({"x": "bit"}), BIT)
    assert list(single) == ["0", "1"]
    none, dec0, _ = labelings(TypedFinSet(), {})
    assert list(none) == ["()"] and dec0["()"] == ()


# -- tensor ------------------------------------------------------------------


def test_tensor_multiplies_states():
    t, index = tensor_with_legs([cycle(4), cycle(4)], ("a", "b"))
    assert len(t.states) == 16
    assert index[("2", "3")] == "(2,3)"
    assert t.successors("(2,3)") == {"(3,0)"}
    assert t.obs["(2,3)"] == ("even", "odd")


def test_tensor_with_unit():
    a = cycle(3)
    t, index = tensor_with_legs([unit_automaton(), a], ("u", "a"))
    renamed = t.relabel({index[("*", s)]: s for s in a.states})
    assert renamed.update == a.update and renamed.obs == a.obs
    assert renamed.interface == a.interface.prefixed("a")
    assert tensor(a, unit_automaton()).states.elements == tuple(f"({s},*)" for s in a.states)


def test_unit_automaton():
    u = unit_automaton()
    assert list(u.states) == ["*"] and u.successors("*") == {"*"}
    assert u.interface == Interface()


def test_tensor_graph_is_product_of_graphs():
    rng = random.Random(51)
    for _ in range(20):
        a = gen.automaton(rng, Interface())
        b = gen.automaton(rng, Interface())
        t, index = tensor_with_legs([a, b], ("a", "b"))
        expected = {
            (index[(s1, s2)], index[(t1, t2)])
            for (s1, t1) in edges(a) for (s2, t2) in edges(b)
        }
        assert edges(t) == expected


# -- share -------------------------------------------------------------------


def test_parity_sharing_of_two_four_cycles():
    t, ports = parity_share(4, 4)
    s = share_ports(t, ports)
    assert len(s.states) == 8
    for x in s.states:
        a, b = (int(c) for c in x.strip("()").split(","))
        assert s.successors(x) == {f"({(a + 1) % 4},{(b + 1) % 4})"}


def test_parity_sharing_four_by_three_has_dead_state():
    t, ports = parity_share(4, 3)
    s = share_ports(t, ports)
    assert len(s.states) == 6
    assert s.successors("(2,2)") == frozenset()


def test_share_matches_brute_force_oracle_on_fixtures():
    for m, n in [(4, 4), (4, 3), (2, 3), (3, 3)]:
        t, ports = parity_share(m, n)
        c = ports.cospan(t.interface.exposed, TypedFinSet())
        span = observation_span(c, t.alphabets)
        s, p1, p2 = share_with_legs(t, span, TypedFinSet())
        _, dec, _ = labelings(t.interface.exposed, t.alphabets)
        states, steps = share_oracle(t, {q: dec[span.left(q)] for q in span.left.dom})
        assert len(s.states) <= 12
        assert sorted((p1(x), p2(x)) for x in s.states) == sorted(states)
        got = {((p1(x), p2(x)), i, (p1(y), p2(y))) for x in s.states for i in s.input_tuples() for y in s.update[(x, i)]}
        assert got == steps


def test_share_updates_are_subsets_of_tensor_updates():
    rng = random.Random(52)
    for _ in range(30):
        x = Interface(exposed=TypedFinSet({"x0": "bit"}))
        t = tensor_with_legs([gen.automaton(rng, x), gen.automaton(rng, x)], ("a", "b"))[0]
        ports = PortCospan(TypedFinSet({"j": "bit"}), {"a.x0": "j", "b.x0": "j"}, {})
        s, p1, _ = share_with_legs(t, observation_span(ports.cospan(t.interface.exposed, TypedFinSet()), gen.ALPHABETS), TypedFinSet())
        for st in s.states:
            assert {p1(y) for y in s.successors(st)} <= t.successors(p1(st))


def test_identity_span_keeps_the_automaton():
    a = cycle(4)
    space, _, _ = a.observation_space()
    s, p1, _ = share_with_legs(a, Span.identity(space), a.interface.exposed)
    assert p1.is_bijective()
    assert a.relabel(p1.inverse()).same_as(s)


def test_non_injective_span_adds_choice_of_apex_point():
    # two apex points over the same observation: q' may jump between them
    a = cycle(2)
    space, _, _ = a.observation_space()
    q = FinSet(["u", "v", "w"])
    i = FinMap(q, space, {"u": "even", "v": "even", "w": "odd"})
    s, p1, p2 = share_with_legs(a, Span(i, i), a.interface.exposed)
    assert list(s.states) == ["(0,u)", "(0,v)", "(1,w)"]
    assert s.successors("(1,w)") == {"(0,u)", "(0,v)"}


def test_share_rejects_wrong_observation_space():
    a = cycle(4)
    wrong = FinSet(["x"])
    with pytest.raises(AutomatonError):
        share(a, Span.identity(wrong), a.interface.exposed)


def test_sequential_spans_equal_composed_span():
    rng = random.Random(53)
    x = Interface(exposed=TypedFinSet({"x0": "bit", "x1": "bit"}))
    mid = TypedFinSet({"m": "bit"})
    for _ in range(20):
        a = gen.automaton(rng, x)
        space, _, _ = a.observation_space()
        mspace, _, _ = labelings(mid, gen.ALPHABETS)
        q1 = FinSet(f"q{k}" for k in range(rng.randint(1, 3)))
        q2 = FinSet(f"r{k}" for k in range(rng.randint(1, 3)))
        s1 = Span(gen_map(rng, q1, space), gen_map(rng, q1, mspace))
        s2 = Span(gen_map(rng, q2, mspace), FinMap(q2, FinSet(["()"]), {q: "()" for q in q2}))
        step, a1, a2 = share_with_legs(a, s1, mid)
        twice, b1, b2 = share_with_legs(step, s2, TypedFinSet())
        comp = compose_spans(s1, s2)
        once, c1, c2 = share_with_legs(a, comp, TypedFinSet())
        # comp's apex is pairs (q1, q2); rebuild each state's coordinates
        _, k1, k2 = pullback(s1.right, s2.left)
        lhs = {(a1(b1(z)), a2(b1(z)), b2(z)): z for z in twice.states}
        rhs = {(c1(z), k1(c2(z)), k2(c2(z))): z for z in once.states}
        assert set(lhs) == set(rhs)
        bij = {rhs[key]: lhs[key] for key in rhs}
        assert once.relabel(bij).update == twice.update


def gen_map(rng, dom, cod):
    return FinMap(dom, cod, {x: rng.choice(cod.elements) for x in dom})


# -- wire --------------------------------------------------------------------


def test_cascade_is_a_four_cycle():
    t = tensor_with_legs([adder(), cycle(2, observed=False)], ("r", "s"))[0]
    w = wire(t, Prism({"r.in": "s.out"}, {}), Interface())
    assert edges(w) == {("(0,0)", "(0,1)"), ("(0,1)", "(1,0)"), ("(1,0)", "(1,1)"), ("(1,1)", "(0,0)")}


def test_wire_identity_prism_is_identity():
    a = adder()
    assert wire(a, Prism.identity(a.interface), a.interface).same_as(a)


def test_constant_sender_equals_fixed_input():
    rng = random.Random(54)
    rx = Interface(inputs=TypedFinSet({"i0": "bit"}))
    for letter in "01":
        const = Automaton.build(
            Interface(outputs=TypedFinSet({"o": "bit"})), BIT, ["c"], {("c", ()): ["c"]}, readout={"c": [letter]}
        )
        for _ in range(10):
            receiver = gen.automaton(rng, rx, max_states=3)
            t, index = tensor_with_legs([receiver, const], ("r", "k"))
            w = wire(t, Prism({"r.i0": "k.o"}, {}), Interface())
            for s in receiver.states:
                expected = {index[(n, "c")] for n in receiver.update[(s, (letter,))]}
                assert w.successors(index[(s, "c")]) == expected


def test_wire_resolves_outer_inputs_and_outputs():
    a = adder()
    w = wire(a, Prism({"in": "x"}, {}), Interface(inputs=TypedFinSet({"x": "bit"})))
    assert w.successors("1", ("1",)) == {"0"}
    c = cycle(2, observed=False)
    w2 = wire(c, Prism({}, {"y": "out", "z": "out"}), Interface(outputs=TypedFinSet({"y": "bit", "z": "bit"})))
    assert w2.readout["1"] == ("1", "1")


def test_simultaneous_update_uses_pre_step_readouts():
    # two 2-cycles feeding each other's adders: everything reads old values
    sender = cycle(2, observed=False)
    t, index = tensor_with_legs([adder(), sender, adder()], ("x", "s", "y"))
    w = wire(t, Prism({"x.in": "s.out", "y.in": "s.out"}, {}), Interface())
    for r1, s, r2 in product("01", repeat=3):
        nxt = {index[(str((int(r1) + int(s)) % 2), str(1 - int(s)), str((int(r2) + int(s)) % 2))]}
        assert w.successors(index[(r1, s, r2)]) == nxt
