"""
Subgroup lattices with their conjugation action.

Subgroups are stored as Python-int bitsets over element indices and sorted
canonically by (order, sorted member tuple); index 0 is the trivial subgroup and
the last index is the whole group.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from sympy import divisor_count, factorint

from src.engine.groups import (
    DEFAULT_MAX_ORDER,
    FiniteGroup,
    agl_translations,
    closure_of,
)
from src.errors import CapacityError, DomainError
from src.schemas.groups import Family, GroupSpec


logger = logging.getLogger(__name__)

DEFAULT_MAX_SUBGROUPS = 20_000


def _bits(elements: Iterable[int]) -> int:
    out = 0
    for x in elements:
        out |= 1 << x
    return out


def _members(bits: int) -> Tuple[int, ...]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return tuple(out)


@dataclass(frozen=True)
class Subgroup:
    index: int
    bits: int
    members: Tuple[int, ...]
    generators: Tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.members)

    def __contains__(self, g: int) -> bool:
        return bool(self.bits >> g & 1)


@dataclass(frozen=True)
class MeetIrreducibleReport:
    classes: Tuple[int, ...]
    unique_cover: Dict[int, int]
    width: int


class SubgroupLattice:
    """
    All subgroups of a finite group with inclusion, meet, join and conjugation.

    Build it with enumerate_subgroups; the instance is immutable afterwards.
    """

    def __init__(self, group: FiniteGroup, subgroups: Sequence[Subgroup]):
        self.group = group
        self.subgroups = tuple(subgroups)
        self._index_of = {H.bits: H.index for H in self.subgroups}

        membership = np.zeros((len(self.subgroups), group.order), dtype=np.float32)
        for H in self.subgroups:
            membership[H.index, list(H.members)] = 1.0
        self.orders = np.array([H.order for H in self.subgroups], dtype=np.int64)
        overlap = membership @ membership.T
        self.leq = overlap == self.orders[:, None]
        self.leq.setflags(write=False)

        self.conj_generators = self._generator_permutations()
        self.class_of, self.classes = self._orbits()

    def __len__(self) -> int:
        return len(self.subgroups)

    def __repr__(self) -> str:
        return f"SubgroupLattice({self.group.spec}, subgroups={len(self)}, classes={len(self.classes)})"

    @property
    def bottom(self) -> int:
        return 0

    @property
    def top(self) -> int:
        return len(self.subgroups) - 1

    def index_of(self, elements: Iterable[int]) -> int:
        bits = _bits(elements)
        try:
            return self._index_of[bits]
        except KeyError:
            raise DomainError(f"{sorted(_members(bits))} is not a subgroup of {self.group.spec}")

    def order(self, i: int) -> int:
        return int(self.orders[i])

    def meet(self, i: int, j: int) -> int:
        return self._index_of[self.subgroups[i].bits & self.subgroups[j].bits]

    def join(self, i: int, j: int) -> int:
        # first common upper bound in canonical order has the least order
        return int(np.flatnonzero(self.leq[i] & self.leq[j])[0])

    @cached_property
    def meet_table(self) -> np.ndarray:
        n = len(self)
        table = np.empty((n, n), dtype=np.int32)
        for i in range(n):
            for j in range(i, n):
                table[i, j] = table[j, i] = self.meet(i, j)
        return table

    @cached_property
    def join_table(self) -> np.ndarray:
        n = len(self)
        table = np.empty((n, n), dtype=np.int32)
        for i in range(n):
            for j in range(i, n):
                table[i, j] = table[j, i] = self.join(i, j)
        return table

    @cached_property
    def covers(self) -> np.ndarray:
        """covers[i, j] is True when j is a minimal overgroup of i."""
        strict = self.leq & ~np.eye(len(self), dtype=bool)
        s = strict.astype(np.float32)
        return strict & ~((s @ s) > 0)

    def minimal_overgroups(self, i: int) -> List[int]:
        return [int(j) for j in np.flatnonzero(self.covers[i])]

    def _generator_permutations(self) -> List[np.ndarray]:
        G = self.group
        perms = []
        for g in G.generators:
            image = [_bits(G.conjugate(g, x) for x in H.members) for H in self.subgroups]
            perms.append(np.array([self._index_of[b] for b in image], dtype=np.int32))
        return perms

    def _orbits(self) -> Tuple[np.ndarray, Tuple[Tuple[int, ...], ...]]:
        n = len(self)
        class_of = np.full(n, -1, dtype=np.int32)
        classes = []
        for start in range(n):
            if class_of[start] >= 0:
                continue
            orbit, frontier = {start}, [start]
            while frontier:
                nxt = []
                for i in frontier:
                    for perm in self.conj_generators:
                        j = int(perm[i])
                        if j not in orbit:
                            orbit.add(j)
                            nxt.append(j)
                frontier = nxt
            class_of[list(orbit)] = len(classes)
            classes.append(tuple(sorted(orbit)))
        class_of.setflags(write=False)
        return class_of, tuple(classes)

    @cached_property
    def conj_action(self) -> np.ndarray:
        """conj_action[g] is the permutation of subgroup indices induced by H -> gHg^-1."""
        G = self.group
        out = np.empty((G.order, len(self)), dtype=np.int32)
        out[0] = np.arange(len(self))
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for g, perm in zip(G.generators, self.conj_generators):
                    y = int(G.mul[g, x])
                    if y not in seen:
                        out[y] = perm[out[x]]
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        out.setflags(write=False)
        return out

    def representative(self, c: int) -> int:
        return self.classes[c][0]

    def class_size(self, c: int) -> int:
        return len(self.classes[c])

    def is_normal(self, i: int) -> bool:
        return len(self.classes[self.class_of[i]]) == 1


def subgroup_generated_by(G: FiniteGroup, seed: Iterable[int]) -> Subgroup:
    seed = [g for g in seed if g != 0]
    members = tuple(closure_of(G, seed))
    return Subgroup(index=-1, bits=_bits(members), members=members, generators=tuple(seed))


def enumerate_subgroups(
    G: FiniteGroup,
    max_subgroups: int = DEFAULT_MAX_SUBGROUPS,
    max_order: int = DEFAULT_MAX_ORDER,
) -> SubgroupLattice:
    """
    Enumerate Sub(G) by closing the cyclic subgroups under joins with cyclic subgroups.

    Parameters:
    G (FiniteGroup): The group.
    max_subgroups (int): Subgroup-count cap.
    max_order (int): Order cap.

    Returns:
    SubgroupLattice: All subgroups in canonical order with inclusion and conjugacy classes.
    """
    if G.order > max_order:
        raise CapacityError("max_order", max_order, G.order)

    found: Dict[int, Tuple[int, ...]] = {}
    cyclic: List[Tuple[int, int]] = []
    for g in range(G.order):
        bits = _bits(closure_of(G, [g]))
        if bits not in found:
            found[bits] = (g,) if g else ()
            cyclic.append((bits, g))

    frontier = list(found)
    while frontier:
        nxt = []
        for bits in frontier:
            gens = found[bits]
            for cbits, g in cyclic:
                if cbits & ~bits == 0:
                    continue
                joined = _bits(closure_of(G, gens + (g,)))
                if joined not in found:
                    found[joined] = gens + (g,)
                    nxt.append(joined)
                    if len(found) > max_subgroups:
                        raise CapacityError("max_subgroups", max_subgroups, len(found))
        frontier = nxt

    ordered = sorted(found, key=lambda b: (bin(b).count("1"), _members(b)))
    subgroups = [
        Subgroup(index=i, bits=b, members=_members(b), generators=found[b])
        for i, b in enumerate(ordered)
    ]
    L = SubgroupLattice(G, subgroups)
    logger.info(
        "%s: %d subgroups in %d conjugacy classes", G.spec, len(L), len(L.classes)
    )
    return L


def conjugacy_classes(L: SubgroupLattice) -> Tuple[Tuple[int, ...], ...]:
    return L.classes


def _is_meet_irreducible_by_intersection(L: SubgroupLattice, i: int) -> bool:
    """True when H is not the intersection of its strict overgroups."""
    if i == L.top:
        return False
    acc = L.subgroups[L.top].bits
    for j in np.flatnonzero(L.leq[i]):
        if j != i:
            acc &= L.subgroups[j].bits
    return acc != L.subgroups[i].bits


def meet_irreducibles(L: SubgroupLattice) -> MeetIrreducibleReport:
    flagged, unique_cover = [], {}
    for c, members in enumerate(L.classes):
        rep = members[0]
        if rep == L.top:
            continue
        ups = L.minimal_overgroups(rep)
        if len(ups) == 1:
            flagged.append(rep)
            unique_cover[rep] = ups[0]
    return MeetIrreducibleReport(
        classes=tuple(flagged), unique_cover=unique_cover, width=len(flagged)
    )


def width(L: SubgroupLattice) -> int:
    return meet_irreducibles(L).width


def maximal_subgroups(L: SubgroupLattice) -> List[int]:
    if L.top == L.bottom:
        return []
    return [int(i) for i in np.flatnonzero(L.covers[:, L.top])]


def normal_subgroups(L: SubgroupLattice) -> List[int]:
    return [members[0] for members in L.classes if len(members) == 1]


def frattini_subgroup(L: SubgroupLattice) -> int:
    bits = L.subgroups[L.top].bits
    for i in maximal_subgroups(L):
        bits &= L.subgroups[i].bits
    return L._index_of[bits]


def hasse_graph(L: SubgroupLattice) -> nx.DiGraph:
    graph = nx.DiGraph()
    for H in L.subgroups:
        graph.add_node(H.index, order=H.order, cls=int(L.class_of[H.index]))
    src, tgt = np.nonzero(L.covers)
    graph.add_edges_from(zip(src.tolist(), tgt.tolist()))
    return graph


def class_hasse_graph(L: SubgroupLattice) -> nx.DiGraph:
    """Quotient of the Hasse diagram by conjugacy, one node per class."""
    flagged = set(meet_irreducibles(L).classes)
    quotient = nx.quotient_graph(
        hasse_graph(L), [set(c) for c in L.classes], create_using=nx.DiGraph
    )
    graph = nx.DiGraph()
    for c, members in enumerate(L.classes):
        graph.add_node(
            c,
            rep=members[0],
            order=L.order(members[0]),
            size=len(members),
            meet_irreducible=members[0] in flagged,
        )
    rep_class = {frozenset(members): c for c, members in enumerate(L.classes)}
    for u, v in quotient.edges:
        graph.add_edge(rep_class[frozenset(u)], rep_class[frozenset(v)])
    return graph


def class_hasse_dot(
    L: SubgroupLattice, overlay: Optional[Sequence[Tuple[int, int]]] = None
) -> str:
    """
    DOT text of the class-level Hasse diagram.

    overlay is a list of (source subgroup, target subgroup) arrows drawn in red
    between their classes.
    """
    graph = class_hasse_graph(L)
    lines = [f'digraph "{L.group.spec}" {{', "\trankdir=BT;", "\tnode [shape=circle];"]
    for c, data in graph.nodes(data=True):
        shape = ", shape=doublecircle" if data["meet_irreducible"] else ""
        lines.append(f'\t"{c}" [label="order={data["order"]}, size={data["size"]}"{shape}];')
    for u, v in sorted(graph.edges):
        lines.append(f'\t"{u}" -> "{v}" [color=grey, arrowhead=none];')
    for s, t in overlay or ():
        lines.append(
            f'\t"{L.class_of[s]}" -> "{L.class_of[t]}" [color=red, constraint=false];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def big_omega(m: int) -> int:
    return sum(factorint(m).values())


def width_closed_form(spec: GroupSpec) -> Optional[int]:
    f, ps = spec.family, spec.params
    if f is Family.CYCLIC:
        return big_omega(ps[0])
    if f is Family.SEMIDIHEDRAL:
        return 2 * ps[0] - 2
    if f is Family.MODMAXCYC:
        return 2 * (ps[0] - 1)
    if f is Family.AGL1:
        p, n = ps
        return big_omega(p**n - 1) + int(divisor_count(n))
    if f is Family.DIHEDRAL and ps[0] & (ps[0] - 1) == 0:
        n = (2 * ps[0]).bit_length() - 1
        return 2 * n - 1
    if f is Family.GENQUAT:
        return 2 * ps[0] - 2
    return None


def affine_profile(L: SubgroupLattice, i: int) -> Tuple[int, int]:
    """Orders of H ∩ V and of the image of H in F^x, for AGL(1, q) lattices."""
    V = _bits(agl_translations(L.group))
    H = L.subgroups[i]
    kernel = bin(H.bits & V).count("1")
    return kernel, H.order // kernel


def lattice_report_data(L: SubgroupLattice) -> dict:
    report = meet_irreducibles(L)
    rows = []
    for rep in report.classes:
        row = {
            "order": L.order(rep),
            "class_size": L.class_size(int(L.class_of[rep])),
            "unique_cover_order": L.order(report.unique_cover[rep]),
        }
        if L.group.family is Family.AGL1:
            row["affine_profile"] = list(affine_profile(L, rep))
        rows.append(row)
    return {
        "group_spec": str(L.group.spec),
        "order": L.group.order,
        "subgroup_count": len(L),
        "class_count": len(L.classes),
        "width": report.width,
        "meet_irreducible_classes": rows,
    }
