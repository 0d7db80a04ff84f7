import random

import pytest

import gen
from oracles import glue_classes
from rsmachines.finset import FinMap, FinSetError, TypedFinSet
from rsmachines.wiring import (
    UNIT,
    Interface,
    PortCospan,
    Prism,
    RsmMorphism,
    WiringError,
    check,
    identity,
    same_morphism,
    substitute,
    substitute_with_legs,
    tensor_all,
    tensor_interfaces,
    validate,
)

EMITTER = Interface.real(outputs=["out"], exposed=["pop"])
FOX_GROWTH = Interface.real(inputs=["e"], exposed=["pop"])
RABBIT_DECLINE = Interface.real(inputs=["h"], exposed=["pop"])
CLOSED = Interface()


def lv_morphism():
    return RsmMorphism(
        (EMITTER, FOX_GROWTH, RABBIT_DECLINE, EMITTER),
        CLOSED,
        Prism({"fg.e": "rg.out", "rd.h": "fd.out"}, {}),
        PortCospan(
            TypedFinSet.uniform(["R", "F"], "R"),
            {"rg.pop": "R", "fg.pop": "F", "rd.pop": "R", "fd.pop": "F"},
            {},
        ),
        ("rg", "fg", "rd", "fd"),
    )


def test_interface_port_names_must_be_disjoint():
    with pytest.raises(FinSetError):
        Interface.real(outputs=["r"], exposed=["r"])


def test_tensor_adds_shapes():
    a = Interface.real(inputs=["x"], exposed=["m"])
    b = Interface.real(outputs=["y"], exposed=["m"])
    assert tensor_interfaces(a, b).shape == (1, 1, 2)
    assert list(tensor_interfaces(a, b).exposed) == ["left.m", "right.m"]


def test_tensor_with_unit_is_a_renaming():
    a = Interface.real(inputs=["x"], outputs=["y"], exposed=["m"])
    t = tensor_interfaces(a, UNIT)
    assert t.shape == a.shape
    assert t == a.prefixed("left")


def test_four_lv_boxes_tensor_shape():
    assert lv_morphism().inner.shape == (2, 2, 4)


def test_slot_labels_must_be_distinct():
    with pytest.raises(ValueError):
        tensor_all([EMITTER, EMITTER], ["a", "a"])


def test_lv_wiring_is_valid():
    assert validate(lv_morphism()) == []


def test_type_mismatch_is_one_diagnostic():
    bit_out = Interface(outputs=TypedFinSet({"out": "parity"}))
    real_in = Interface.real(inputs=["e"])
    m = RsmMorphism((bit_out, real_in), CLOSED, Prism({"b1.e": "b0.out"}, {}), PortCospan(TypedFinSet(), {}, {}))
    diags = validate(m)
    assert len(diags) == 1
    assert diags[0].path == ("phi_in", "b1.e") and "type mismatch" in diags[0].message


def test_missing_assignment_is_one_diagnostic():
    m = lv_morphism()
    bad = RsmMorphism(m.domain, m.codomain, Prism({"fg.e": "rg.out"}, {}), m.ports, m.labels)
    diags = validate(bad)
    assert [str(d) for d in diags] == ["phi_in/rd.h: port is not assigned"]


def test_unknown_ports_are_reported():
    m = lv_morphism()
    ports = PortCospan(m.ports.apex, dict(m.ports.inner, **{"zz.pop": "R"}), {"nope": "Q"})
    diags = validate(RsmMorphism(m.domain, m.codomain, m.prism, ports, m.labels))
    messages = sorted(str(d) for d in diags)
    assert messages == ["inner/zz.pop: no such port", "outer/nope: no such port"]
    with pytest.raises(WiringError):
        check(RsmMorphism(m.domain, m.codomain, m.prism, ports, m.labels))


def test_validate_agrees_with_map_construction():
    # every valid random morphism builds its FinMaps; every corrupted one is flagged
    rng = random.Random(31)
    for _ in range(100):
        dom = [gen.interface(rng) for _ in range(rng.randint(0, 3))]
        m = gen.morphism(rng, dom, [f"b{k}" for k in range(len(dom))])
        assert validate(m) == []
        m.prism_maps()
        m.port_cospan()
        if m.inner.inputs:
            x = next(iter(m.inner.inputs))
            broken = Prism(dict(m.prism.phi_in, **{x: "nowhere"}), m.prism.phi_out)
            bad = RsmMorphism(m.domain, m.codomain, broken, m.ports, m.labels)
            assert len(validate(bad)) == 1
            with pytest.raises(WiringError):
                bad.prism_maps()


# -- substitution ------------------------------------------------------------


def test_substitute_into_identity_is_neutral():
    m = lv_morphism()
    sub = substitute_with_legs(identity(m.codomain, "top"), [m])
    # the apex of m, seen through the inner-apex leg, is the composite's apex
    bij = FinMap(
        m.ports.apex,
        sub.morphism.ports.apex,
        {q: sub.inner_apex(f"top.{q}") for q in m.ports.apex},
    )
    assert same_morphism(m, sub.morphism, bij)


def test_substitute_identities_is_neutral():
    m = lv_morphism()
    out = substitute(m, [identity(x, "id") for x in m.domain])
    assert same_morphism(m, out)


def test_two_layer_fold_equals_one_shot():
    r = Interface.real(exposed=["pop"])
    mid = Interface.real(exposed=["a", "b"])
    four = [r] * 4
    fold42 = RsmMorphism(
        tuple(four), mid, Prism({}, {}),
        PortCospan(TypedFinSet.uniform(["A", "B"], "R"),
                   {"p.pop": "A", "q.pop": "B", "s.pop": "A", "t.pop": "B"}, {"a": "A", "b": "B"}),
        ("p", "q", "s", "t"),
    )
    top = Interface.real(exposed=["all"])
    fold21 = RsmMorphism(
        (mid,), top, Prism({}, {}),
        PortCospan(TypedFinSet.uniform(["J"], "R"), {"w.a": "J", "w.b": "J"}, {"all": "J"}),
        ("w",),
    )
    two = substitute(fold21, [fold42])
    # one-shot: glue every inner port and the outer port together
    classes = glue_classes(
        [list(fold42.inner.exposed), ["all"]],
        [("p.pop", "s.pop"), ("q.pop", "t.pop"), ("p.pop", "q.pop"), ("p.pop", "all")],
    )
    assert len(classes) == 1 == len(two.ports.apex)
    assert set(two.ports.inner.values()) == {two.ports.outer["all"]}
    assert two.labels == ("p", "q", "s", "t")


def test_prism_chases_through_intermediate_inputs():
    # inner box b reads the intermediate input, which the outer layer feeds
    # from the other intermediate box's output
    src = Interface.real(outputs=["o"])
    sink = Interface.real(inputs=["i"])
    mid_a = Interface.real(inputs=["u"])
    first = RsmMorphism((sink,), mid_a, Prism({"b.i": "u"}, {}), PortCospan(TypedFinSet(), {}, {}), ("b",))
    top = RsmMorphism(
        (mid_a, src), CLOSED, Prism({"x.u": "y.o"}, {}), PortCospan(TypedFinSet(), {}, {}), ("x", "y")
    )
    out = substitute(top, [first, identity(src, "z")])
    assert out.labels == ("x", "y")
    assert dict(out.prism.phi_in) == {"x.i": "y.o"}


def test_substitute_rejects_boundary_mismatch():
    m = lv_morphism()
    with pytest.raises(WiringError):
        substitute(identity(EMITTER), [m])


def _apex_bijection_for_associativity(m1, m2, m3):
    """Constructed bijection between the two bracketings' apexes."""
    k2, k3 = m2.labels[0], m3.labels[0]
    s12 = substitute_with_legs(m2, [m1])
    left = substitute_with_legs(m3, [s12.morphism])
    s23 = substitute_with_legs(m3, [m2])
    right = substitute_with_legs(s23.morphism, [m1])
    pairs = []
    for q in m1.ports.apex:
        pairs.append((right.inner_apex(f"{k2}.{q}"), left.inner_apex(f"{k3}." + s12.inner_apex(f"{k2}.{q}"))))
    for q in m2.ports.apex:
        pairs.append((right.outer_apex(s23.inner_apex(f"{k3}.{q}")), left.inner_apex(f"{k3}." + s12.outer_apex(q))))
    for q in m3.ports.apex:
        pairs.append((right.outer_apex(s23.outer_apex(q)), left.outer_apex(q)))
    mapping = {}
    for a, b in pairs:
        assert mapping.setdefault(a, b) == b
    return left.morphism, right.morphism, FinMap(right.morphism.ports.apex, left.morphism.ports.apex, mapping)


def test_substitution_is_associative_up_to_constructed_bijection():
    rng = random.Random(32)
    for _ in range(80):
        dom = [gen.interface(rng) for _ in range(rng.randint(1, 3))]
        m1 = gen.morphism(rng, dom, [f"b{k}" for k in range(len(dom))])
        m2 = gen.morphism(rng, [m1.codomain], ["mid"])
        m3 = gen.morphism(rng, [m2.codomain], ["top"])
        left, right, bij = _apex_bijection_for_associativity(m1, m2, m3)
        assert bij.is_bijective()
        assert same_morphism(right, left, bij)


def test_identity_laws_on_random_morphisms():
    rng = random.Random(33)
    for _ in range(60):
        dom = [gen.interface(rng) for _ in range(rng.randint(1, 3))]
        m = gen.morphism(rng, dom, [f"b{k}" for k in range(len(dom))])
        # identities keep the slot's label, so the composite keeps m's labels
        assert same_morphism(m, substitute(m, [identity(x, lab) for x, lab in zip(dom, m.labels)]))
        sub = substitute_with_legs(identity(m.codomain, "top"), [m])
        bij = FinMap(m.ports.apex, sub.morphism.ports.apex,
                     {q: sub.inner_apex(f"top.{q}") for q in m.ports.apex})
        assert bij.is_bijective()
        assert same_morphism(m, sub.morphism, bij)
