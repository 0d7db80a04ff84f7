import random

import pytest

import gen
from oracles import (
    direct_cascade,
    direct_ode_machine,
    direct_ode_sharing,
    direct_sharing,
    fixture,
)
from rsmachines.automata import Automaton, tensor_with_legs, unit_automaton
from rsmachines.expr import parse
from rsmachines.finset import TypedFinSet
from rsmachines.modelfile import load
from rsmachines.ode import OdeSystem, unit_system
from rsmachines.rsm import (
    ActError,
    act,
    act_compose_check,
    act_identity_check,
    act_traced,
    composite_renaming,
    identity_renaming,
)
from rsmachines.wiring import (
    Interface,
    PortCospan,
    Prism,
    RsmMorphism,
    identity,
    machine_part,
    sharing_part,
)

FIXTURES = [
    "lotka_volterra",
    "growth_cascade",
    "decline_cascade",
    "automata_cascade",
    "parity_4x4",
    "parity_4x3",
    "automata_unit",
]


def top_level(name):
    model = load(fixture(name))
    decl = model.morphisms[model.compose["morphism"]]
    boxes = [model.evaluate(a) for a in model.compose["args"]]
    return model, decl.morphism, boxes


def lv_expected():
    return {"R": parse("beta*R - gamma*F*R"), "F": parse("alpha*R*F - delta*F")}


def test_lotka_volterra_composite_is_exact():
    model = load(fixture("lotka_volterra"))
    lv = model.evaluate()
    assert list(lv.vars) == ["R", "F"]
    assert {v: lv.field[v] for v in lv.vars} == lv_expected()
    assert lv.interface == Interface()


def test_act_checks_slot_interfaces_and_doctrine():
    _, m, boxes = top_level("lotka_volterra")
    with pytest.raises(ActError, match="does not match"):
        act(m, list(reversed(boxes)))
    with pytest.raises(ActError, match="slots"):
        act(m, boxes[:3])
    with pytest.raises(ActError, match="mix"):
        act(m, boxes[:3] + [unit_automaton()])
    with pytest.raises(ActError, match="expected"):
        act(m, boxes, doctrine="automata")


def test_empty_morphism_yields_the_unit():
    empty = RsmMorphism((), Interface(), Prism({}, {}), PortCospan(TypedFinSet(), {}, {}), ())
    assert act(empty, [], "ode").same_as(unit_system())
    assert act(empty, [], "automata").same_as(unit_automaton())
    with pytest.raises(ActError):
        act(empty, [])


# -- identity law ------------------------------------------------------------


@pytest.mark.parametrize("name", FIXTURES)
def test_identity_morphism_on_fixture_boxes(name):
    model = load(fixture(name))
    for box in list(model.boxes.values()) + [model.evaluate()]:
        assert act_identity_check(box)


def test_identity_on_units():
    assert act_identity_check(unit_system())
    assert act_identity_check(unit_automaton())


def test_identity_on_random_automata():
    rng = random.Random(61)
    for _ in range(40):
        a = gen.automaton(rng, gen.interface(rng))
        assert act_identity_check(a, "q")
        result, bij = identity_renaming(a, "q")
        assert len(bij) == len(a.states) == len(result.states)


# -- composition law ---------------------------------------------------------


def test_compose_law_on_random_automata():
    rng = random.Random(62)
    checked = 0
    for trial in range(60):
        k = rng.randint(1, 3)
        dom = [gen.interface(rng) for _ in range(k)]
        m1 = gen.morphism(rng, dom, [f"b{j}" for j in range(k)])
        m2 = gen.morphism(rng, [m1.codomain], ["top"])
        cap = 4 if k < 3 else 3
        fillings = [gen.automaton(rng, x, max_states=cap) for x in dom]
        assert act_compose_check(m1, m2, fillings, gen.ALPHABETS), f"trial {trial}"
        checked += 1
    assert checked == 60


def test_compose_law_with_identities():
    rng = random.Random(63)
    for _ in range(15):
        x = gen.interface(rng)
        a = gen.automaton(rng, x)
        m = gen.morphism(rng, [x], ["b0"])
        assert act_compose_check(identity(x, "b0"), m, [a], gen.ALPHABETS)
        assert act_compose_check(m, identity(m.codomain, "top"), [a], gen.ALPHABETS)


def lv_two_stage():
    model, m, boxes = top_level("lotka_volterra")
    mid = Interface.real(exposed=["p1", "p2", "p3", "p4"])
    apex = TypedFinSet.uniform(["a", "b", "c", "d"], "R")
    m1 = RsmMorphism(
        m.domain, mid, m.prism,
        PortCospan(apex, {"rg.pop": "a", "fg.pop": "b", "rd.pop": "c", "fd.pop": "d"},
                   {"p1": "a", "p2": "b", "p3": "c", "p4": "d"}),
        m.labels,
    )
    m2 = RsmMorphism(
        (mid,), Interface(), Prism({}, {}),
        PortCospan(TypedFinSet.uniform(["R", "F"], "R"),
                   {"w.p1": "R", "w.p2": "F", "w.p3": "R", "w.p4": "F"}, {}),
        ("w",),
    )
    return model, m1, m2, boxes


def test_compose_law_on_lotka_volterra_in_two_stages():
    _, m1, m2, boxes = lv_two_stage()
    assert act_compose_check(m1, m2, boxes)
    stepwise, oneshot, bij = composite_renaming(m1, m2, boxes)
    assert {v: stepwise.field[v] for v in stepwise.vars} == lv_expected()
    assert bij == {"R": "R", "F": "F"}


def test_compose_law_rejects_wrong_outer_arity():
    _, m, boxes = top_level("lotka_volterra")
    with pytest.raises(ActError):
        composite_renaming(identity(Interface()), m, boxes)


# -- degenerate cases --------------------------------------------------------


@pytest.mark.parametrize("name", FIXTURES)
def test_identity_cospan_recovers_machine_composition(name):
    model, m, boxes = top_level(name)
    mp = machine_part(m)
    out = act(mp, boxes, model.doctrine, model.alphabets)
    if model.doctrine == "ode":
        direct = direct_ode_machine(boxes, m.labels, dict(m.prism.phi_in))
        # the identity cospan names each junction after its port
        t = act_traced(mp, boxes, "ode")
        ren = {f"{lab}.{v}": t.share_left(leg(v)) for lab, leg, b in zip(m.labels, t.tensor_legs, boxes) for v in b.vars}
        assert {ren[k]: p.rename(ren) for k, p in direct.items()} == {v: out.field[v] for v in out.vars}
    else:
        direct = direct_cascade(boxes, m.labels, dict(m.prism.phi_in))
        _, index = tensor_with_legs(boxes, m.labels)
        assert set(out.states) == {index[c] for c in direct}
        for combo, nexts in direct.items():
            assert out.successors(index[combo]) == {index[n] for n in nexts}


@pytest.mark.parametrize("name", FIXTURES)
def test_identity_prism_recovers_resource_sharing(name):
    model, m, boxes = top_level(name)
    sp = sharing_part(m)
    out = act(sp, boxes, model.doctrine, model.alphabets)
    apex_of_port = dict(m.ports.inner)
    if model.doctrine == "ode":
        direct = direct_ode_sharing(boxes, m.labels, apex_of_port, list(m.ports.apex))
        assert direct == {v: out.field[v] for v in out.vars}
    else:
        direct = direct_sharing(boxes, m.labels, apex_of_port)
        t = act_traced(sp, boxes, "automata", model.alphabets)
        _, index = tensor_with_legs(boxes, m.labels)
        # each composite state projects to a factor tuple; that projection is a bijection
        proj = {x: t.share_left(x) for x in out.states}
        assert sorted(proj.values()) == sorted({index[c] for c, _ in direct})
        back = {v: k for k, v in proj.items()}
        for (combo, inp), nexts in direct.items():
            assert {proj[y] for y in out.update[(back[index[combo]], inp)]} == {index[n] for n in nexts}


def test_mixed_doctrines_are_rejected():
    x = Interface()
    ode_box = OdeSystem.build(x, ["v"], {"v": "0"})
    aut = Automaton.build(x, {}, ["s"], {("s", ()): ["s"]})
    m = RsmMorphism((x, x), x, Prism({}, {}), PortCospan(TypedFinSet(), {}, {}), ("a", "b"))
    with pytest.raises(ActError, match="mix"):
        act(m, [ode_box, aut])
