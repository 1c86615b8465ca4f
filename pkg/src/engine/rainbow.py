"""
Rank functions, arc censuses and partial rainbows for D_{p^n} and SD_{2^n}.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from sympy import factorint

from src.engine.lattice import SubgroupLattice
from src.engine.transfer import (
    DEFAULT_BUDGET,
    DEFAULT_EXHAUSTIVE_LIMIT,
    Arrow,
    ArrowUniverse,
    TransferSystem,
    certify_all,
    closure,
    enumerate_transfer_systems,
    minimal_generating_size,
)
from src.errors import BudgetExhausted, DomainError
from src.schemas.groups import Family, GroupSpec


logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Arc:
    j: int
    k: int

    def __post_init__(self):
        if not 0 <= self.j < self.k:
            raise DomainError(f"invalid arc ({self.j}, {self.k})")

    def nests(self, other: "Arc") -> bool:
        """True when the two arcs are strictly nested one inside the other."""
        return (self.j < other.j and other.k < self.k) or (other.j < self.j and self.k < other.k)


@dataclass(frozen=True)
class RankFunction:
    lattice: SubgroupLattice = field(repr=False)
    class_ranks: Tuple[int, ...]

    @property
    def values(self) -> Dict[int, int]:
        """Rank per conjugacy-class representative."""
        return {members[0]: r for members, r in zip(self.lattice.classes, self.class_ranks)}

    @property
    def max_rank(self) -> int:
        return max(self.class_ranks)

    def __call__(self, i: int) -> int:
        return self.class_ranks[self.lattice.class_of[i]]

    def arc(self, arrow: Arrow) -> Arc:
        return Arc(self(arrow.src), self(arrow.tgt))

    def is_strict(self) -> bool:
        L = self.lattice
        ranks = np.array([self(i) for i in range(len(L))])
        strict = L.leq & ~np.eye(len(L), dtype=bool)
        return bool(np.all(~strict | (ranks[:, None] < ranks[None, :])))


@dataclass(frozen=True)
class RainbowPlan:
    family: Family
    n: int
    arcs: Tuple[Arc, ...]
    size: int


@dataclass(frozen=True)
class ArcCensus:
    alpha: Dict[Tuple[int, int], int]
    max_rank: int

    def __call__(self, j: int, k: int) -> int:
        return self.alpha.get((j, k), 0)


@dataclass(frozen=True)
class ArrowTypeTally:
    C: int = 0
    D: int = 0
    X: int = 0

    @property
    def total(self) -> int:
        return self.C + self.D + self.X


class StrandTag(str, Enum):
    CYC = "CYC"
    DIH = "DIH"
    QUA = "QUA"


@dataclass(frozen=True)
class RainbowCheck:
    ok: bool
    condition: Optional[str] = None
    reason: str = ""
    m_of_closure: Optional[int] = None


def _prime_power(m: int) -> Tuple[int, int]:
    factors = factorint(m)
    if len(factors) != 1:
        raise DomainError(f"{m} is not a prime power")
    (p, n), = factors.items()
    return p, n


def odd_dihedral_parameters(spec: GroupSpec) -> Tuple[int, int]:
    """(p, n) for the spec of D_{p^n}, p an odd prime, n >= 1."""
    if spec.family is Family.DIHEDRAL:
        factors = factorint(spec.params[0])
        if len(factors) == 1 and 2 not in factors:
            (p, n), = factors.items()
            return p, n
    raise DomainError(f"{spec} is not a dihedral group of order 2p^n with p odd")


def dihedral_parameters(L: SubgroupLattice) -> Tuple[int, int]:
    return odd_dihedral_parameters(L.group.spec)


def semidihedral_parameter(L: SubgroupLattice) -> int:
    spec = L.group.spec
    if spec.family is not Family.SEMIDIHEDRAL:
        raise DomainError(f"{spec} is not semidihedral")
    return spec.params[0]


def dihedral_class_names(L: SubgroupLattice) -> List[Tuple[str, int]]:
    """("c", k) for the class of C_{p^k} and ("d", k) for the class of D_{p^k}, per class index."""
    dihedral_parameters(L)
    rotations = L.group.spec.params[0]
    names = []
    for members in L.classes:
        H = L.subgroups[members[0]]
        if max(H.members) < rotations:
            names.append(("c", _prime_power(H.order)[1] if H.order > 1 else 0))
        else:
            half = H.order // 2
            names.append(("d", _prime_power(half)[1] if half > 1 else 0))
    return names


def rank_dihedral(L: SubgroupLattice) -> RankFunction:
    names = dihedral_class_names(L)
    ranks = tuple(k if kind == "c" else k + 1 for kind, k in names)
    return RankFunction(L, ranks)


def rank_semidihedral(L: SubgroupLattice) -> RankFunction:
    semidihedral_parameter(L)
    ranks = []
    for members in L.classes:
        order = L.order(members[0])
        if order & (order - 1):
            raise DomainError(f"subgroup order {order} is not a power of two")
        ranks.append(order.bit_length() - 1)
    return RankFunction(L, tuple(ranks))


def alpha_census(U: ArrowUniverse, P: RankFunction) -> ArcCensus:
    alpha: Dict[Tuple[int, int], int] = {}
    for cls in U.classes:
        arc = P.arc(cls.representative)
        alpha[(arc.j, arc.k)] = alpha.get((arc.j, arc.k), 0) + 1
    return ArcCensus(alpha=alpha, max_rank=P.max_rank)


def closed_form_alpha_dihedral(n: int, j: int, k: int) -> int:
    if not 0 <= j < k <= n + 1:
        raise DomainError(f"arc ({j}, {k}) out of range for D_(p^{n})")
    if j == 0:
        return 1 if k == n + 1 else 2
    return 2 if k == n + 1 else 3


def closed_form_alpha_semidihedral(n: int, j: int, k: int) -> int:
    if n < 4:
        raise DomainError(f"SD_(2^n) requires n >= 4, got n={n}")
    if not 0 <= j < k <= n:
        raise DomainError(f"arc ({j}, {k}) out of range for SD_(2^{n})")
    if j == 0:
        return 1 if k == n else (2 if k == 1 else 3)
    if j == 1:
        return 2 if k == n else 4
    return 3 if k == n else 5


def census_rows(census: ArcCensus, closed_form: Callable[[int, int], int]) -> List[dict]:
    rows = []
    for j in range(census.max_rank + 1):
        for k in range(j + 1, census.max_rank + 1):
            rows.append(
                {"j": j, "k": k, "alpha_observed": census(j, k), "alpha_closed_form": closed_form(j, k)}
            )
    return rows


def rainbow_plan_dihedral(n: int) -> RainbowPlan:
    if n < 1:
        raise DomainError(f"D_(p^n) rainbow requires n >= 1, got n={n}")
    m = n // 2
    arcs = tuple(Arc(i, 2 * m + 1 - i) for i in range(m + 1))
    size = sum(closed_form_alpha_dihedral(n, a.j, a.k) for a in arcs)
    return RainbowPlan(Family.DIHEDRAL, n, arcs, size)


def rainbow_plan_semidihedral(n: int) -> RainbowPlan:
    if n < 4:
        raise DomainError(f"SD_(2^n) requires n >= 4, got n={n}")
    if n % 2:
        arcs = tuple(Arc(i, n - i) for i in range((n - 1) // 2 + 1))
    else:
        arcs = tuple(Arc(i, n + 1 - i) for i in range(1, n // 2 + 1))
    size = sum(closed_form_alpha_semidihedral(n, a.j, a.k) for a in arcs)
    return RainbowPlan(Family.SEMIDIHEDRAL, n, arcs, size)


def semidihedral_lower_bound(n: int) -> int:
    return 5 * (n - 1) // 2


def _arrows_on_arcs(U: ArrowUniverse, P: RankFunction, arcs: Iterable[Arc]) -> List[Arrow]:
    wanted = set(arcs)
    return [cls.representative for cls in U.classes if P.arc(cls.representative) in wanted]


def build_partial_rainbow_dihedral(U: ArrowUniverse, P: Optional[RankFunction] = None) -> List[Arrow]:
    """One least arrow from every arrow class whose arc lies on the dihedral rainbow."""
    P = P or rank_dihedral(U.lattice)
    _, n = dihedral_parameters(U.lattice)
    return _arrows_on_arcs(U, P, rainbow_plan_dihedral(n).arcs)


def build_partial_rainbow_semidihedral(U: ArrowUniverse, P: Optional[RankFunction] = None) -> List[Arrow]:
    P = P or rank_semidihedral(U.lattice)
    n = semidihedral_parameter(U.lattice)
    return _arrows_on_arcs(U, P, rainbow_plan_semidihedral(n).arcs)


def verify_partial_rainbow(
    U: ArrowUniverse,
    P: RankFunction,
    S: Sequence[Arrow],
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
) -> RainbowCheck:
    """
    Check that S is a partial rainbow: (a) its distinct arcs are pairwise nested,
    (b) no two arrows share a conjugacy class, (c) S minimally generates its closure.
    """
    if not S:
        raise DomainError("a partial rainbow needs at least one arrow")
    arcs = sorted({P.arc(a) for a in S})
    for x, y in combinations(arcs, 2):
        if not x.nests(y):
            return RainbowCheck(False, "a", f"arcs ({x.j},{x.k}) and ({y.j},{y.k}) are not nested")

    seen: Dict[int, Arrow] = {}
    for a in S:
        c = U.arrow_class(a)
        if c in seen:
            return RainbowCheck(False, "b", f"arrows {tuple(seen[c])} and {tuple(a)} are conjugate")
        seen[c] = a

    T = closure(U, S)
    m = minimal_generating_size(U, T, exhaustive_limit).size
    if m != len(S):
        return RainbowCheck(False, "c", f"m(closure) = {m} but |S| = {len(S)}", m)
    return RainbowCheck(True, m_of_closure=m)


def arrow_type_tally(L: SubgroupLattice, S: Iterable[Arrow]) -> ArrowTypeTally:
    names = dihedral_class_names(L)
    counts = {"C": 0, "D": 0, "X": 0}
    for a in S:
        src = names[L.class_of[a.src]][0]
        tgt = names[L.class_of[a.tgt]][0]
        if src == "d" and tgt == "c":
            raise DomainError(f"impossible inclusion of a dihedral subgroup in a cyclic one: {tuple(a)}")
        counts["C" if src == tgt == "c" else "D" if src == tgt == "d" else "X"] += 1
    return ArrowTypeTally(**counts)


def _named_class(names: List[Tuple[str, int]], kind: str, k: int) -> int:
    return names.index((kind, k))


def _certified_systems(U, budget, workers, exhaustive_limit):
    """List of (system, certificate) pairs and whether the enumeration finished."""
    pairs = []
    try:
        for pair in certify_all(U, enumerate_transfer_systems(U, budget), workers, exhaustive_limit):
            pairs.append(pair)
    except BudgetExhausted:
        logger.warning("%s: audit budget exhausted after %d systems", U.lattice.group.spec, len(pairs))
        return pairs, False
    return pairs, True


@dataclass
class BridgeAudit:
    n: int
    systems: int = 0
    complete: bool = True
    max_cd: int = 0
    max_cx: int = 0
    max_dx: int = 0
    max_total: int = 0
    violations: List[str] = field(default_factory=list)
    equality_cases: int = 0
    equality_violations: List[str] = field(default_factory=list)

    @property
    def total_bound(self) -> int:
        return 3 * self.n // 2 + 1

    @property
    def ok(self) -> bool:
        """The four inequalities; equality clauses are recorded, not enforced."""
        return not self.violations


def bridge_bounds_audit(
    U: ArrowUniverse,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
) -> BridgeAudit:
    """
    Tally the canonical certificate of every transfer system on D_{p^n} and check
    C+D <= n, C+X <= n+1, D+X <= n+1 and C+D+X <= floor(3n/2)+1, including the
    equality clauses whenever a bound is attained.
    """
    L = U.lattice
    _, n = dihedral_parameters(L)
    names = dihedral_class_names(L)
    c0, cn = _named_class(names, "c", 0), _named_class(names, "c", n)
    d0, dn = _named_class(names, "d", 0), _named_class(names, "d", n)
    rep = lambda c: L.classes[c][0]

    def holds(T: TransferSystem, src: int, tgt: int) -> bool:
        return bool(T.class_vector >> U.arrow_class((rep(src), rep(tgt))) & 1)

    audit = BridgeAudit(n=n)
    pairs, audit.complete = _certified_systems(U, budget, workers, exhaustive_limit)
    for T, cert in pairs:
        t = arrow_type_tally(L, cert.arrows)
        audit.systems += 1
        audit.max_cd = max(audit.max_cd, t.C + t.D)
        audit.max_cx = max(audit.max_cx, t.C + t.X)
        audit.max_dx = max(audit.max_dx, t.D + t.X)
        audit.max_total = max(audit.max_total, t.total)
        for label, value, bound in (
            ("C+D", t.C + t.D, n),
            ("C+X", t.C + t.X, n + 1),
            ("D+X", t.D + t.X, n + 1),
            ("C+D+X", t.total, audit.total_bound),
        ):
            if value > bound:
                audit.violations.append(f"{T.hex}: {label}={value} > {bound}")

        if t.C + t.D == n:
            audit.equality_cases += 1
            if not (holds(T, c0, cn) and holds(T, d0, dn)):
                audit.equality_violations.append(f"{T.hex}: C+D=n without (c_0,c_n),(d_0,d_n)")
        if t.C + t.X == n + 1:
            audit.equality_cases += 1
            if not holds(T, c0, dn):
                audit.equality_violations.append(f"{T.hex}: C+X=n+1 without (c_0,d_n)")
        if t.D + t.X == n + 1:
            audit.equality_cases += 1
            if not holds(T, d0, dn):
                audit.equality_violations.append(f"{T.hex}: D+X=n+1 without (d_0,d_n)")
    return audit


@dataclass
class AnchoringAudit:
    systems: int = 0
    generating_sets: int = 0
    complete: bool = True
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _anchoring_violation(U: ArrowUniverse, names, classes: Iterable[int]) -> Optional[str]:
    L = U.lattice
    per_type: Dict[str, int] = {}
    cross_bound = -1
    c0_targets = []
    for c in classes:
        a = U.classes[c].representative
        src, tgt = names[L.class_of[a.src]], names[L.class_of[a.tgt]]
        if src[1] != 0:
            continue
        kind = "C" if src[0] == tgt[0] == "c" else "D" if src[0] == tgt[0] == "d" else "X"
        per_type[kind] = per_type.get(kind, 0) + 1
        if tgt[0] == "d":
            cross_bound = max(cross_bound, tgt[1])
        else:
            c0_targets.append(tgt[1])
    for kind, count in per_type.items():
        if count > 1:
            return f"{count} left-anchored {kind}-arrows"
    bad = [j for j in c0_targets if j <= cross_bound]
    if bad:
        return f"(c_0,c_{bad[0]}) together with an anchored arrow into d_{cross_bound}"
    return None


def anchoring_audit(
    U: ArrowUniverse,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
) -> AnchoringAudit:
    """
    Left-anchoring constraints on D_{p^n}: at most one left-anchored arrow per type,
    and no (c_0, c_j) next to (d_0, d_k) or (c_0, d_k) with j <= k. For n = 1 every
    minimal generating set is checked, otherwise the canonical certificate.
    """
    L = U.lattice
    _, n = dihedral_parameters(L)
    names = dihedral_class_names(L)
    audit = AnchoringAudit()
    pairs, audit.complete = _certified_systems(U, budget, workers, exhaustive_limit)
    for T, cert in pairs:
        audit.systems += 1
        if n == 1:
            candidates = [
                combo
                for combo in combinations(T.classes(), cert.size)
                if U.close_classes(sum(1 << c for c in combo)) == T.class_vector
            ]
        else:
            candidates = [cert.classes]
        for classes in candidates:
            audit.generating_sets += 1
            problem = _anchoring_violation(U, names, classes)
            if problem:
                audit.violations.append(f"{T.hex}: {problem}")
    return audit


def strand_tags(L: SubgroupLattice) -> Dict[int, StrandTag]:
    """Strand of every proper nontrivial class of SD_{2^n}, keyed by class index."""
    n = semidihedral_parameter(L)
    G = L.group
    N = 2 ** (n - 1)
    cyclic = (1 << N) - 1
    dihedral = 0
    for i in range(0, N, 2):
        dihedral |= 1 << i | 1 << (N + i)

    tags = {}
    for c, members in enumerate(L.classes):
        H = L.subgroups[members[0]]
        if H.order in (1, G.order):
            continue
        if H.bits & ~cyclic == 0:
            tags[c] = StrandTag.CYC
        elif H.bits & ~dihedral == 0:
            tags[c] = StrandTag.DIH
        else:
            tags[c] = StrandTag.QUA
    return tags


@dataclass
class ForbiddenInclusionAudit:
    clauses: Dict[str, bool]
    observed: Set[Tuple[str, str]]
    expected: Set[Tuple[str, str]]
    witnesses: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.clauses.values()) and self.observed == self.expected


_FORBIDDEN = {
    "i": (StrandTag.DIH, StrandTag.CYC),
    "ii": (StrandTag.QUA, StrandTag.CYC),
    "iii": (StrandTag.QUA, StrandTag.DIH),
    "iv": (StrandTag.DIH, StrandTag.QUA),
}

_ALLOWED = {("CYC", "CYC"), ("CYC", "DIH"), ("CYC", "QUA"), ("DIH", "DIH"), ("QUA", "QUA")}


def forbidden_inclusion_audit(L: SubgroupLattice) -> ForbiddenInclusionAudit:
    tags = strand_tags(L)
    observed = set()
    witnesses: Dict[str, Tuple[int, int]] = {}
    for i, j in zip(*np.nonzero(L.leq & ~np.eye(len(L), dtype=bool))):
        ci, cj = int(L.class_of[i]), int(L.class_of[j])
        if ci not in tags or cj not in tags:
            continue
        kind = (tags[ci], tags[cj])
        observed.add((kind[0].value, kind[1].value))
        for clause, forbidden in _FORBIDDEN.items():
            if kind == forbidden and clause not in witnesses:
                witnesses[clause] = (int(i), int(j))
    clauses = {clause: clause not in witnesses for clause in _FORBIDDEN}
    return ForbiddenInclusionAudit(clauses, observed, set(_ALLOWED), witnesses)


@dataclass
class ShiftEmbeddingCheck:
    ok: bool
    mapping: Dict[int, int]
    failures: List[str] = field(default_factory=list)


def _class_leq(L: SubgroupLattice, x: int, y: int) -> bool:
    target = L.classes[y][0]
    return any(L.leq[i, target] for i in L.classes[x])


def dihedral_shift_embedding_check(L_n: SubgroupLattice, L_prev: SubgroupLattice) -> ShiftEmbeddingCheck:
    """
    Check that c_k -> c_{k+1}, d_k -> d_{k+1} embeds the class poset of D_{p^(n-1)}
    into that of D_{p^n}, keeping class sizes and avoiding rank 0.
    """
    p, n = dihedral_parameters(L_n)
    q, n_prev = dihedral_parameters(L_prev)
    if p != q or n_prev != n - 1:
        raise DomainError(f"{L_prev.group.spec} is not the predecessor of {L_n.group.spec}")

    names_n = dihedral_class_names(L_n)
    names_prev = dihedral_class_names(L_prev)
    mapping = {x: names_n.index((kind, k + 1)) for x, (kind, k) in enumerate(names_prev)}
    failures = []
    for x, y in mapping.items():
        if names_n[y][1] == 0:
            failures.append(f"class {x} maps to rank 0")
        if len(L_prev.classes[x]) != len(L_n.classes[y]):
            failures.append(f"class {x} size {len(L_prev.classes[x])} -> {len(L_n.classes[y])}")
    for x in mapping:
        for y in mapping:
            if _class_leq(L_prev, x, y) != _class_leq(L_n, mapping[x], mapping[y]):
                failures.append(f"comparability of classes {x}, {y} not preserved")
    return ShiftEmbeddingCheck(not failures, mapping, failures)
