"""Resource sharing machines: compose open dynamical systems by wiring and
sharing, for polynomial ODEs and non-deterministic automata."""

from .automata import Automaton, unit_automaton
from .expr import Polynomial, PolyMap, parse
from .finset import Cospan, FinMap, FinSet, Span, TypedFinSet, pullback, pushout
from .ode import OdeSystem, unit_system
from .rsm import act, act_compose_check, act_identity_check
from .sim import Trajectory, TransitionGraph, components, dead_states, graph, integrate
from .wiring import Interface, PortCospan, Prism, RsmMorphism, identity, substitute, validate

__version__ = "0.1.0"

__all__ = [
    "Automaton",
    "Cospan",
    "FinMap",
    "FinSet",
    "Interface",
    "OdeSystem",
    "PolyMap",
    "Polynomial",
    "PortCospan",
    "Prism",
    "RsmMorphism",
    "Span",
    "Trajectory",
    "TransitionGraph",
    "TypedFinSet",
    "act",
    "act_compose_check",
    "act_identity_check",
    "components",
    "dead_states",
    "graph",
    "identity",
    "integrate",
    "parse",
    "pullback",
    "pushout",
    "substitute",
    "unit_automaton",
    "unit_system",
    "validate",
]
