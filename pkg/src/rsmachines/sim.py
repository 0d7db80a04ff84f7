"""Running composites: fixed-step ODE integration and transition graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .automata import Automaton
from .expr import UnboundName
from .finset import FinSet, UnionFind
from .ode import OdeSystem

METHODS = ("euler", "rk4")


class SimulationError(RuntimeError):
    pass


class FreeInputs(SimulationError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__(f"system still has free inputs: {', '.join(self.names)}")


class NonFinite(SimulationError):
    def __init__(self, step: int, var: str):
        self.step = step
        self.var = var
        super().__init__(f"non-finite value of {var!r} at step {step}")


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    values: Mapping[str, tuple[float, ...]]

    def __post_init__(self):
        n = len(self.times)
        for v, col in self.values.items():
            if len(col) != n:
                raise ValueError(f"column {v!r} has {len(col)} values for {n} times")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def final(self) -> dict[str, float]:
        return {v: col[-1] for v, col in self.values.items()}

    def to_csv(self) -> str:
        names = list(self.values)
        lines = [",".join(["t"] + names)]
        for k, t in enumerate(self.times):
            lines.append(",".join(repr(float(x)) for x in [t] + [self.values[v][k] for v in names]))
        return "\n".join(lines) + "\n"


def integrate(
    sys: OdeSystem,
    x0: Mapping[str, float],
    params: Mapping[str, float] | None = None,
    t_end: float = 1.0,
    dt: float = 1e-2,
    method: str = "rk4",
) -> Trajectory:
    """Integrate with fixed steps from ``t = 0``.

    The grid has ``floor(t_end / dt) + 1`` points ``k * dt``; the last point
    may fall short of ``t_end`` when ``dt`` does not divide it.
    """
    if sys.interface.inputs:
        raise FreeInputs(sys.interface.inputs)
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end >= 0:
        raise ValueError("t_end must be non-negative")
    params = dict(params or {})
    missing = [p for p in sys.params if p not in params]
    if missing:
        raise SimulationError(f"parameters without values: {', '.join(missing)}")
    names = list(sys.vars)
    absent = [v for v in names if v not in x0]
    if absent:
        raise SimulationError(f"initial values missing for: {', '.join(absent)}")
    stray = set(x0) - set(names)
    if stray:
        raise SimulationError(f"initial values for unknown variables: {', '.join(sorted(stray))}")

    comps = [sys.field[v] for v in names]

    def f(x: list[float]) -> list[float]:
        point = dict(zip(names, x))
        try:
            return [p.evaluate(point, params) for p in comps]
        except UnboundName as exc:
            raise SimulationError(f"unbound name {exc.args[0]!r}") from None

    def step(x: list[float]) -> list[float]:
        if method == "euler":
            return [a + dt * b for a, b in zip(x, f(x))]
        k1 = f(x)
        k2 = f([a + dt / 2 * b for a, b in zip(x, k1)])
        k3 = f([a + dt / 2 * b for a, b in zip(x, k2)])
        k4 = f([a + dt * b for a, b in zip(x, k3)])
        return [a + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(x, k1, k2, k3, k4)]

    n = math.floor(t_end / dt + 1e-9) + 1
    x = [float(x0[v]) for v in names]
    rows = [x]
    for k in range(1, n):
        try:
            x = step(x)
        except OverflowError:
            # float power overflows instead of returning inf; blame the largest
            raise NonFinite(k, max(zip(names, x), key=lambda p: abs(p[1]))[0]) from None
        for v, val in zip(names, x):
            if not math.isfinite(val):
                raise NonFinite(k, v)
        rows.append(x)
    times = tuple(k * dt for k in range(n))
    return Trajectory(times, {v: tuple(r[j] for r in rows) for j, v in enumerate(names)})


@dataclass(frozen=True)
class TransitionGraph:
    nodes: FinSet
    edges: frozenset

    def __post_init__(self):
        for a, b in self.edges:
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge ({a}, {b}) leaves the node set")

    def successors(self, s: str) -> list[str]:
        return [b for b in self.nodes if (s, b) in self.edges]

    def sorted_edges(self) -> list[tuple[str, str]]:
        pos = {s: k for k, s in enumerate(self.nodes)}
        return sorted(self.edges, key=lambda e: (pos[e[0]], pos[e[1]]))

    def to_dot(self, name: str = "composite") -> str:
        lines = [f"digraph {_dot_id(name)} {{"]
        lines += [f"  {_dot_id(s)};" for s in self.nodes]
        lines += [f"  {_dot_id(a)} -> {_dot_id(b)};" for a, b in self.sorted_edges()]
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph(a: Automaton) -> TransitionGraph:
    """Transition graph of a closed automaton (no input ports)."""
    if a.interface.inputs:
        raise SimulationError("transition graphs need an automaton without inputs")
    return TransitionGraph(
        a.states, frozenset((s, t) for s in a.states for t in a.update[(s, ())])
    )


def dead_states(a: Automaton) -> set[str]:
    """States with no successor under any input."""
    return {s for s in a.states if all(not a.update[(s, i)] for i in a.input_tuples())}


def dead_list(a: Automaton) -> list[str]:
    dead = dead_states(a)
    return [s for s in a.states if s in dead]


def components(g: TransitionGraph) -> list[list[str]]:
    """Weakly connected components, each in node order, ordered by first node."""
    nodes = list(g.nodes)
    pos = {s: k for k, s in enumerate(nodes)}
    uf = UnionFind(len(nodes))
    for a, b in g.edges:
        uf.union(pos[a], pos[b])
    return [[nodes[k] for k in cls] for cls in uf.classes()]


def summary(a: Automaton) -> str:
    g = graph(a)
    return (
        f"states={len(g.nodes)} edges={len(g.edges)} "
        f"dead=[{','.join(dead_list(a))}] components={len(components(g))}"
    )
