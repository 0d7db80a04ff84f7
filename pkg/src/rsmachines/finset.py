"""Finite sets of named atoms, maps between them, spans, cospans and their
(co)limits.

Every element is a text atom. Canonical constructions name their results
deterministically:

* a pullback element pairing ``s`` and ``q`` is named ``"(s,q)"``;
* a pushout class is named after its least member, taking all of the first
  map's codomain before the second's.

Typed finite sets attach a type label (an alphabet name, or ``"R"``) to each
element, and maps between two typed sets must preserve the labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Mapping


class FinSetError(ValueError):
    """A finite-set construction received inconsistent data."""


class CodomainMismatch(FinSetError):
    def __init__(self, left: FinSet, right: FinSet, what: str = "codomain"):
        self.left = left
        self.right = right
        super().__init__(
            f"{what} mismatch: {list(left.elements)} vs {list(right.elements)}"
        )


class UnionFind:
    """Disjoint sets over ``0..n-1`` whose root is always the least index."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> int:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return rx
        lo, hi = (rx, ry) if rx < ry else (ry, rx)
        self.parent[hi] = lo
        return lo

    def classes(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return [groups[r] for r in sorted(groups)]


@dataclass(frozen=True, eq=False)
class FinSet:
    """An ordered collection of distinct names.

    Equality is set equality; iteration follows construction order.
    """

    elements: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, elements: Iterable[str] = ()):
        elements = tuple(elements)
        index: dict[str, int] = {}
        for pos, x in enumerate(elements):
            if not isinstance(x, str):
                raise FinSetError(f"element {x!r} is not a name")
            if x in index:
                raise FinSetError(f"duplicate element {x!r}")
            index[x] = pos
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "_index", index)

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinSet):
            return NotImplemented
        return self._index.keys() == other._index.keys()

    def __hash__(self) -> int:
        return hash(frozenset(self.elements))

    def __repr__(self) -> str:
        return f"FinSet({list(self.elements)!r})"

    def index(self, x: str) -> int:
        return self._index[x]

    @property
    def base(self) -> FinSet:
        return self


@dataclass(frozen=True, eq=False, repr=False)
class TypedFinSet(FinSet):
    """A finite set whose elements each carry a type label."""

    types: tuple[str, ...] = ()

    def __init__(self, typing: Mapping[str, str] | Iterable[tuple[str, str]] = ()):
        pairs = list(typing.items() if isinstance(typing, Mapping) else typing)
        super().__init__(name for name, _ in pairs)
        object.__setattr__(self, "types", tuple(t for _, t in pairs))

    @classmethod
    def uniform(cls, elements: Iterable[str], label: str) -> TypedFinSet:
        return cls((x, label) for x in elements)

    def type_of(self, x: str) -> str:
        return self.types[self.index(x)]

    @property
    def typing(self) -> dict[str, str]:
        return dict(zip(self.elements, self.types))

    @property
    def base(self) -> FinSet:
        return FinSet(self.elements)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinSet):
            return NotImplemented
        if not isinstance(other, TypedFinSet):
            return False
        return self.typing == other.typing

    def __hash__(self) -> int:
        return hash(frozenset(zip(self.elements, self.types)))

    def __repr__(self) -> str:
        return f"TypedFinSet({self.typing!r})"

    def prefixed(self, label: str) -> TypedFinSet:
        return TypedFinSet((f"{label}.{x}", t) for x, t in zip(self.elements, self.types))


def is_typed(s: FinSet) -> bool:
    return isinstance(s, TypedFinSet)


@dataclass(frozen=True, eq=False)
class FinMap:
    """A total function between finite sets, validated at construction.

    When both ends are typed the map must preserve type labels.
    """

    dom: FinSet
    cod: FinSet
    assignment: Mapping[str, str]

    def __init__(self, dom: FinSet, cod: FinSet, assignment: Mapping[str, str]):
        problems = map_problems(dom, cod, assignment)
        if problems:
            raise FinSetError("; ".join(problems))
        object.__setattr__(self, "dom", dom)
        object.__setattr__(self, "cod", cod)
        object.__setattr__(self, "assignment", {x: assignment[x] for x in dom})

    def __call__(self, x: str) -> str:
        return self.assignment[x]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinMap):
            return NotImplemented
        return (
            self.dom == other.dom
            and self.cod == other.cod
            and self.assignment == other.assignment
        )

    def __hash__(self) -> int:
        return hash((self.dom, self.cod, frozenset(self.assignment.items())))

    def __repr__(self) -> str:
        return f"FinMap({self.assignment!r} -> {list(self.cod.elements)!r})"

    @classmethod
    def identity(cls, s: FinSet) -> FinMap:
        return cls(s, s, {x: x for x in s})

    def then(self, other: FinMap) -> FinMap:
        """Diagrammatic composite: first ``self``, then ``other``."""
        if self.cod != other.dom:
            raise CodomainMismatch(self.cod, other.dom, "composition boundary")
        return FinMap(self.dom, other.cod, {x: other(self(x)) for x in self.dom})

    def preimage(self, y: str) -> list[str]:
        return [x for x in self.dom if self.assignment[x] == y]

    def image(self) -> set[str]:
        return set(self.assignment.values())

    def is_injective(self) -> bool:
        return len(self.image()) == len(self.dom)

    def is_bijective(self) -> bool:
        return self.is_injective() and len(self.dom) == len(self.cod)

    def inverse(self) -> FinMap:
        if not self.is_bijective():
            raise FinSetError("map is not a bijection")
        return FinMap(self.cod, self.dom, {y: x for x, y in self.assignment.items()})


def map_problems(dom: FinSet, cod: FinSet, assignment: Mapping[str, str]) -> list[str]:
    """Everything preventing ``assignment`` from being a (typed) map dom -> cod."""
    problems = []
    typed = is_typed(dom) and is_typed(cod)
    for x in dom:
        if x not in assignment:
            problems.append(f"{x!r} is not assigned")
            continue
        y = assignment[x]
        if y not in cod:
            problems.append(f"{x!r} maps to {y!r}, which is not in the codomain")
        elif typed and dom.type_of(x) != cod.type_of(y):
            problems.append(
                f"{x!r} ({dom.type_of(x)}) maps to {y!r} ({cod.type_of(y)})"
            )
    for x in assignment:
        if x not in dom:
            problems.append(f"{x!r} is not in the domain")
    return problems


@dataclass(frozen=True)
class Span:
    left: FinMap
    right: FinMap

    def __post_init__(self):
        if self.left.dom != self.right.dom:
            raise CodomainMismatch(self.left.dom, self.right.dom, "span apex")

    @property
    def apex(self) -> FinSet:
        return self.left.dom

    @classmethod
    def identity(cls, s: FinSet) -> Span:
        return cls(FinMap.identity(s), FinMap.identity(s))


@dataclass(frozen=True)
class Cospan:
    left: FinMap
    right: FinMap

    def __post_init__(self):
        if self.left.cod != self.right.cod:
            raise CodomainMismatch(self.left.cod, self.right.cod, "cospan apex")

    @property
    def apex(self) -> FinSet:
        return self.left.cod

    @classmethod
    def identity(cls, s: FinSet) -> Cospan:
        return cls(FinMap.identity(s), FinMap.identity(s))


def pair_name(s: str, q: str) -> str:
    return f"({s},{q})"


def pullback(p: FinMap, i: FinMap) -> tuple[FinSet, FinMap, FinMap]:
    """Pairs ``(s, q)`` with ``p(s) == i(q)``, in lexicographic domain order."""
    if p.cod != i.cod:
        raise CodomainMismatch(p.cod, i.cod)
    by_value: dict[str, list[str]] = {}
    for q in i.dom:
        by_value.setdefault(i(q), []).append(q)
    names, left, right = [], {}, {}
    for s in p.dom:
        for q in by_value.get(p(s), ()):
            n = pair_name(s, q)
            names.append(n)
            left[n], right[n] = s, q
    apex = FinSet(names)
    return apex, FinMap(apex, p.dom, left), FinMap(apex, i.dom, right)


def pushout(pi: FinMap, a: FinMap) -> tuple[FinSet, FinMap, FinMap]:
    """Glue ``pi.cod`` and ``a.cod`` along the shared foot.

    The apex is typed when both codomains are typed. Should two classes elect
    the same name (possible only when the codomains share names) the later one
    gets a ``_1``, ``_2``, ... suffix.
    """
    if pi.dom != a.dom:
        raise CodomainMismatch(pi.dom, a.dom, "pushout foot")
    atoms = [(0, y) for y in pi.cod] + [(1, y) for y in a.cod]
    offset = len(pi.cod)
    uf = UnionFind(len(atoms))
    for m in pi.dom:
        uf.union(pi.cod.index(pi(m)), offset + a.cod.index(a(m)))

    typed = is_typed(pi.cod) and is_typed(a.cod)
    rep_name: dict[int, str] = {}
    taken: set[str] = set()
    for root in sorted({uf.find(k) for k in range(len(atoms))}):
        name = atoms[root][1]
        if name in taken:
            n = 1
            while f"{name}_{n}" in taken:
                n += 1
            name = f"{name}_{n}"
        taken.add(name)
        rep_name[root] = name

    roots = sorted(rep_name)
    if typed:
        def type_at(k):
            side, y = atoms[k]
            return (pi.cod if side == 0 else a.cod).type_of(y)

        apex: FinSet = TypedFinSet((rep_name[r], type_at(r)) for r in roots)
    else:
        apex = FinSet(rep_name[r] for r in roots)
    inj1 = FinMap(pi.cod, apex, {y: rep_name[uf.find(k)] for k, y in enumerate(pi.cod)})
    inj2 = FinMap(
        a.cod, apex, {y: rep_name[uf.find(offset + k)] for k, y in enumerate(a.cod)}
    )
    return apex, inj1, inj2


def compose_spans(s1: Span, s2: Span) -> Span:
    if s1.right.cod != s2.left.cod:
        raise CodomainMismatch(s1.right.cod, s2.left.cod, "span boundary")
    _, proj1, proj2 = pullback(s1.right, s2.left)
    return Span(proj1.then(s1.left), proj2.then(s2.right))


def compose_cospans(c1: Cospan, c2: Cospan) -> Cospan:
    """Compose by pushout over the middle boundary.

    Apex classes prefer the names of ``c2``'s apex, so composing with an
    identity on the left returns ``c2`` unchanged.
    """
    return compose_cospans_with_legs(c1, c2)[0]


def compose_cospans_with_legs(c1: Cospan, c2: Cospan) -> tuple[Cospan, FinMap, FinMap]:
    """As :func:`compose_cospans`, also returning the apex injections of
    ``c1`` and ``c2`` into the composite apex."""
    if c1.right.dom != c2.left.dom:
        raise CodomainMismatch(c1.right.dom, c2.left.dom, "cospan boundary")
    _, j2, j1 = pushout(c2.left, c1.right)
    return Cospan(c1.left.then(j1), c2.right.then(j2)), j1, j2


def label_pull(f: FinMap, sigma: Mapping[str, str]) -> dict[str, str]:
    """Pull a labelling of ``f.cod`` back to ``f.dom``: ``m -> sigma(f(m))``."""
    missing = [y for y in f.cod if y not in sigma]
    if missing:
        raise FinSetError(f"labelling is not total: missing {missing}")
    return {m: sigma[f(m)] for m in f.dom}


def all_maps(dom: FinSet, cod: FinSet) -> Iterator[FinMap]:
    """Every map dom -> cod; used by brute-force checks."""
    for values in product(cod.elements, repeat=len(dom)):
        yield FinMap(dom, cod, dict(zip(dom.elements, values)))
