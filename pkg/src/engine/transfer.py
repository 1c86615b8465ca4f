"""
Transfer systems on a subgroup lattice.

Systems are conjugation invariant, so they are stored as bitsets over arrow
conjugacy classes (class_vector) together with the dense bitset over the arrow
universe (rel). The closure of a class set is the union of the restriction
closures of its classes followed by one transitive pass; composites of
restrictions are restrictions of composites, so nothing else is needed.
"""
import hashlib
import logging
import random
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from multiprocessing import Pool
from typing import Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from sympy import factorint

from src.engine.groups import build_group
from src.engine.lattice import SubgroupLattice, enumerate_subgroups
from src.errors import BudgetExhausted, DomainError
from src.schemas.groups import Family, GroupSpec


logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10_000_000
DEFAULT_EXHAUSTIVE_LIMIT = 16
PROGRESS_EVERY = 10_000


def iter_bits(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def popcount(bits: int) -> int:
    return bin(bits).count("1")


@dataclass(frozen=True, order=True)
class Arrow:
    src: int
    tgt: int

    def __iter__(self):
        return iter((self.src, self.tgt))


@dataclass(frozen=True)
class ArrowClass:
    index: int
    representative: Arrow
    members: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class TransferSystem:
    class_vector: int
    rel: int

    def classes(self) -> List[int]:
        return list(iter_bits(self.class_vector))

    @property
    def size(self) -> int:
        """Number of nontrivial arrows."""
        return popcount(self.rel)

    @property
    def hex(self) -> str:
        return format(self.class_vector, "x")


@dataclass(frozen=True)
class GenSetCertificate:
    arrows: Tuple[Arrow, ...]
    classes: Tuple[int, ...]
    target: str
    method: str

    @property
    def size(self) -> int:
        return len(self.arrows)


class AxiomCheck(NamedTuple):
    ok: bool
    axiom: Optional[str] = None
    witness: Optional[Tuple] = None


class ArrowUniverse:
    """
    Every nontrivial comparable pair of a lattice, in lexicographic (src, tgt) order,
    partitioned into conjugacy classes ordered by their least arrow.
    """

    def __init__(self, lattice: SubgroupLattice):
        self.lattice = lattice
        L = lattice
        strict = L.leq & ~np.eye(len(L), dtype=bool)
        src, tgt = np.nonzero(strict)
        self.arrows = tuple(Arrow(int(i), int(j)) for i, j in zip(src, tgt))
        self.index: Dict[Tuple[int, int], int] = {
            (a.src, a.tgt): k for k, a in enumerate(self.arrows)
        }

        perms = []
        for perm in L.conj_generators:
            perms.append([self.index[(int(perm[a.src]), int(perm[a.tgt]))] for a in self.arrows])

        class_of = [-1] * len(self.arrows)
        classes = []
        for start in range(len(self.arrows)):
            if class_of[start] >= 0:
                continue
            orbit, frontier = {start}, [start]
            while frontier:
                nxt = []
                for k in frontier:
                    for perm in perms:
                        if perm[k] not in orbit:
                            orbit.add(perm[k])
                            nxt.append(perm[k])
                frontier = nxt
            for k in orbit:
                class_of[k] = len(classes)
            members = tuple(sorted(orbit))
            classes.append(ArrowClass(len(classes), self.arrows[start], members))
        self.class_of = tuple(class_of)
        self.classes = tuple(classes)

        self._rows = []
        self._arrow_bits = []
        for cls in self.classes:
            rows: Dict[int, int] = {}
            bits = 0
            for k in cls.members:
                a = self.arrows[k]
                rows[a.src] = rows.get(a.src, 0) | 1 << a.tgt
                bits |= 1 << k
            self._rows.append(tuple(rows.items()))
            self._arrow_bits.append(bits)

        self.restrictions = tuple(self._restriction_closure(c) for c in self.classes)
        restricted_by = [0] * len(self.classes)
        for d, bits in enumerate(self.restrictions):
            for c in iter_bits(bits):
                if c != d:
                    restricted_by[c] |= 1 << d
        self.restricted_by = tuple(restricted_by)
        logger.info(
            "%s: %d nontrivial arrows in %d conjugacy classes",
            L.group.spec,
            len(self.arrows),
            len(self.classes),
        )

    def __len__(self) -> int:
        return len(self.classes)

    def _restriction_closure(self, cls: ArrowClass) -> int:
        """Classes of the restrictions (K ∩ L, L) for L ≤ H, L not inside K."""
        L = self.lattice
        K, H = cls.representative
        bits = 0
        for sub in np.flatnonzero(L.leq[:, H]):
            sub = int(sub)
            if L.leq[sub, K]:
                continue
            bits |= 1 << self.class_of[self.index[(L.meet(K, sub), sub)]]
        return bits

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256(str(self.lattice.group.spec).encode())
        for H in self.lattice.subgroups:
            h.update(format(H.bits, "x").encode() + b";")
        for a in self.arrows:
            h.update(f"{a.src},{a.tgt};".encode())
        return h.hexdigest()

    @property
    def full(self) -> int:
        return (1 << len(self.classes)) - 1

    def system(self, class_vector: int) -> TransferSystem:
        rel = 0
        for c in iter_bits(class_vector):
            rel |= self._arrow_bits[c]
        return TransferSystem(class_vector, rel)

    def arrow_class(self, arrow: Union[Arrow, Tuple[int, int]]) -> int:
        src, tgt = arrow
        if not self.lattice.leq[src, tgt]:
            raise DomainError(f"invalid arrow {src}->{tgt}: source is not a subgroup of target")
        if src == tgt:
            raise DomainError(f"arrow {src}->{tgt} is reflexive")
        return self.class_of[self.index[(src, tgt)]]

    def close_classes(self, seed: int) -> int:
        gen = 0
        for c in iter_bits(seed):
            gen |= self.restrictions[c]

        rows = [0] * len(self.lattice)
        for c in iter_bits(gen):
            for src, tgts in self._rows[c]:
                rows[src] |= tgts
        for i in range(len(rows) - 1, -1, -1):
            r = rows[i]
            if r:
                acc = r
                for j in iter_bits(r):
                    acc |= rows[j]
                rows[i] = acc

        out = gen
        for cls in self.classes:
            if not out >> cls.index & 1:
                K, H = cls.representative
                if rows[K] >> H & 1:
                    out |= 1 << cls.index
        return out


def closure(U: ArrowUniverse, seed: Iterable[Union[Arrow, Tuple[int, int]]]) -> TransferSystem:
    """
    Least transfer system containing the seed arrows.

    Reflexive arrows in the seed are ignored; a seed arrow whose source is not a
    subgroup of its target raises DomainError.
    """
    bits = 0
    for src, tgt in seed:
        if src == tgt and U.lattice.leq[src, tgt]:
            continue
        bits |= 1 << U.arrow_class((src, tgt))
    return U.system(U.close_classes(bits))


def complete_system(U: ArrowUniverse) -> TransferSystem:
    return U.system(U.full)


def transfer_system_from_classes(U: ArrowUniverse, class_vector: int) -> TransferSystem:
    if class_vector >> len(U.classes):
        raise DomainError(f"class vector {class_vector:x} has bits beyond {len(U.classes)} classes")
    if U.close_classes(class_vector) != class_vector:
        raise DomainError(f"class vector {class_vector:x} is not a transfer system")
    return U.system(class_vector)


def random_transfer_system(U: ArrowUniverse, rng: random.Random, seed_size: int) -> TransferSystem:
    picks = rng.sample(range(len(U.classes)), min(seed_size, len(U.classes)))
    bits = 0
    for c in picks:
        bits |= 1 << c
    return U.system(U.close_classes(bits))


def closure_law_violations(U: ArrowUniverse, rng: random.Random, trials: int = 200) -> List[str]:
    """Extensivity, monotonicity and idempotence of the class closure on random seeds."""
    problems = []
    n = len(U.classes)
    for _ in range(trials):
        seed = rng.getrandbits(n) if n else 0
        larger = seed | (rng.getrandbits(n) if n else 0)
        closed = U.close_classes(seed)
        if seed & ~closed:
            problems.append(f"seed {seed:x} not inside its closure")
        if closed & ~U.close_classes(larger):
            problems.append(f"closure of {seed:x} not inside closure of {larger:x}")
        if U.close_classes(closed) != closed:
            problems.append(f"closure of {seed:x} is not closed")
    return problems


def is_transfer_system(U: ArrowUniverse, rel: Iterable[Union[Arrow, Tuple[int, int]]]) -> AxiomCheck:
    """
    Check the transfer-system axioms on a relation given as nontrivial arrows.

    Reflexive pairs are implicit. The first failing axiom is reported as
    "i" (inclusion), "iii" (transitivity), "iv" (restriction) or "v" (conjugation)
    with a witness tuple.
    """
    L = U.lattice
    pairs = set()
    for src, tgt in rel:
        if not L.leq[src, tgt]:
            return AxiomCheck(False, "i", (src, tgt))
        if src != tgt:
            pairs.add((int(src), int(tgt)))

    by_src: Dict[int, List[int]] = {}
    for s, t in pairs:
        by_src.setdefault(s, []).append(t)
    for s, t in sorted(pairs):
        for u in by_src.get(t, ()):
            if (s, u) not in pairs:
                return AxiomCheck(False, "iii", ((s, t), (t, u)))

    for s, t in sorted(pairs):
        for sub in np.flatnonzero(L.leq[:, t]):
            sub = int(sub)
            m = L.meet(s, sub)
            if m != sub and (m, sub) not in pairs:
                return AxiomCheck(False, "iv", ((s, t), sub))

    for s, t in sorted(pairs):
        for perm in L.conj_generators:
            image = (int(perm[s]), int(perm[t]))
            if image not in pairs:
                return AxiomCheck(False, "v", ((s, t), image))
    return AxiomCheck(True)


def indispensable_classes(U: ArrowUniverse, T: TransferSystem) -> int:
    """Classes of T outside the closure of the rest of T."""
    n = len(U.lattice)
    rows, cols = [0] * n, [0] * n
    for k in iter_bits(T.rel):
        a = U.arrows[k]
        rows[a.src] |= 1 << a.tgt
        cols[a.tgt] |= 1 << a.src

    out = 0
    for c in iter_bits(T.class_vector):
        K, H = U.classes[c].representative
        if rows[K] & cols[H]:
            continue
        if U.restricted_by[c] & T.class_vector:
            continue
        out |= 1 << c
    return out


def _certificate(U: ArrowUniverse, T: TransferSystem, classes: Iterable[int], method: str) -> GenSetCertificate:
    classes = tuple(sorted(classes))
    arrows = tuple(U.classes[c].representative for c in classes)
    return GenSetCertificate(arrows=arrows, classes=classes, target=T.hex, method=method)


def _bits_of(classes: Iterable[int]) -> int:
    out = 0
    for c in classes:
        out |= 1 << c
    return out


def exhaustive_generating_size(U: ArrowUniverse, T: TransferSystem) -> GenSetCertificate:
    """Smallest generating class set, searched by increasing size over the optional classes."""
    forced = indispensable_classes(U, T)
    optional = [c for c in iter_bits(T.class_vector) if not forced >> c & 1]
    for k in range(len(optional) + 1):
        for combo in combinations(optional, k):
            bits = forced | _bits_of(combo)
            if U.close_classes(bits) == T.class_vector:
                return _certificate(U, T, iter_bits(bits), "exhaustive")
    raise DomainError(f"{T.hex} is not closed")


def minimal_generating_size(
    U: ArrowUniverse, T: TransferSystem, exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT
) -> GenSetCertificate:
    """
    Minimal generating set of T with a method tag.

    The indispensable classes are tried first. When they do not generate T the
    optional classes are searched exhaustively if there are at most
    exhaustive_limit of them, otherwise they are removed greedily in descending
    order while the closure stays T. Every inclusion-minimal generating set has
    the same size, so each route yields m(T).

    The indispensable and exhaustive certificates are the lexicographically
    least minimal generating sets. A "reduction" certificate is minimal but
    need not be the least one.
    """
    forced = indispensable_classes(U, T)
    if U.close_classes(forced) == T.class_vector:
        return _certificate(U, T, iter_bits(forced), "indispensable")

    optional = [c for c in iter_bits(T.class_vector) if not forced >> c & 1]
    logger.debug(
        "%s: indispensable classes do not generate, %d optional", T.hex, len(optional)
    )
    if len(optional) <= exhaustive_limit:
        return exhaustive_generating_size(U, T)

    current = T.class_vector
    for c in reversed(optional):
        trial = current & ~(1 << c)
        if U.close_classes(trial) == T.class_vector:
            current = trial
    return _certificate(U, T, iter_bits(current), "reduction")


def verify_certificate(U: ArrowUniverse, cert: GenSetCertificate) -> bool:
    target = int(cert.target, 16)
    bits = _bits_of(cert.classes)
    if U.close_classes(bits) != target:
        return False
    return all(U.close_classes(bits & ~(1 << c)) != target for c in cert.classes)


def enumerate_transfer_systems(U: ArrowUniverse, budget: int = DEFAULT_BUDGET) -> Iterator[TransferSystem]:
    """
    Yield every transfer system once, in lectic order of the class vector.

    Raises:
    BudgetExhausted: after `budget` systems when more remain.
    """
    n = len(U.classes)
    current = U.close_classes(0)
    visited = 1
    yield U.system(current)
    while True:
        candidate = current
        for i in range(n - 1, -1, -1):
            bit = 1 << i
            if candidate & bit:
                candidate &= ~bit
                continue
            closed = U.close_classes(candidate | bit)
            if (closed & ~candidate) & (bit - 1) == 0:
                current = closed
                break
        else:
            logger.info("%s: %d transfer systems", U.lattice.group.spec, visited)
            return
        if visited >= budget:
            raise BudgetExhausted(visited, budget)
        visited += 1
        if visited % PROGRESS_EVERY == 0:
            logger.info("%s: %d transfer systems so far", U.lattice.group.spec, visited)
        yield U.system(current)


def collect_transfer_systems(U: ArrowUniverse, budget: int = DEFAULT_BUDGET) -> List[TransferSystem]:
    systems: List[TransferSystem] = []
    try:
        for T in enumerate_transfer_systems(U, budget):
            systems.append(T)
    except BudgetExhausted as e:
        raise BudgetExhausted(e.visited, e.budget, systems)
    return systems


_WORKER: Dict[str, object] = {}


def _init_worker(spec: GroupSpec, max_order: int, max_subgroups: int, exhaustive_limit: int) -> None:
    G = build_group(spec, max_order)
    _WORKER["universe"] = ArrowUniverse(enumerate_subgroups(G, max_subgroups, max_order))
    _WORKER["limit"] = exhaustive_limit


def _certify_in_worker(class_vector: int) -> GenSetCertificate:
    U = _WORKER["universe"]
    return minimal_generating_size(U, U.system(class_vector), _WORKER["limit"])


def certify_all(
    U: ArrowUniverse,
    systems: Iterable[TransferSystem],
    workers: int = 1,
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
    batch_size: int = 2048,
) -> Iterator[Tuple[TransferSystem, GenSetCertificate]]:
    """
    Pair each system with its minimal generating certificate, preserving input order.

    With workers > 1 certificates are computed in a process pool; each worker
    rebuilds the universe from the group spec, which yields the same canonical
    indices.
    """
    if workers <= 1:
        for T in systems:
            yield T, minimal_generating_size(U, T, exhaustive_limit)
        return

    G, L = U.lattice.group, U.lattice
    initargs = (G.spec, G.order, len(L), exhaustive_limit)
    with Pool(workers, initializer=_init_worker, initargs=initargs) as pool:
        batch: List[TransferSystem] = []

        def flush():
            certs = pool.imap(_certify_in_worker, [T.class_vector for T in batch], chunksize=64)
            return list(zip(batch, certs))

        try:
            for T in systems:
                batch.append(T)
                if len(batch) == batch_size:
                    yield from flush()
                    batch = []
        except BudgetExhausted:
            yield from flush()
            raise
        yield from flush()


@dataclass(frozen=True)
class ComplexityResult:
    value: int
    witness: TransferSystem
    certificate: GenSetCertificate
    systems_visited: int
    complete: bool


def complexity(
    U: ArrowUniverse,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
    certified: Optional[Iterable[Tuple[TransferSystem, GenSetCertificate]]] = None,
    on_certified: Optional[Callable[[TransferSystem, GenSetCertificate], None]] = None,
) -> ComplexityResult:
    """
    Maximum of m(T) over all transfer systems, with the lectically least witness.

    When the budget runs out the maximum seen so far is returned with
    complete=False; it is then only a lower bound.

    Parameters:
    certified: Pairs certified earlier, in lectic order (a warm cache). A fresh
        enumeration is certified when omitted.
    on_certified: Called with every pair as it arrives.
    """
    best: Optional[Tuple[TransferSystem, GenSetCertificate]] = None
    visited = 0
    complete = True
    if certified is None:
        certified = certify_all(U, enumerate_transfer_systems(U, budget), workers, exhaustive_limit)
    try:
        for T, cert in certified:
            visited += 1
            if on_certified is not None:
                on_certified(T, cert)
            if best is None or cert.size > best[1].size:
                best = (T, cert)
    except BudgetExhausted:
        complete = False
        logger.warning(
            "%s: budget of %d systems exhausted, complexity is a lower bound",
            U.lattice.group.spec,
            budget,
        )
    if best is None:
        raise DomainError(f"{U.lattice.group.spec}: no certified transfer systems")
    return ComplexityResult(
        value=best[1].size,
        witness=best[0],
        certificate=best[1],
        systems_visited=visited,
        complete=complete,
    )


def complexity_closed_form(spec: GroupSpec) -> Optional[int]:
    f, ps = spec.family, spec.params
    if f is Family.DIHEDRAL and ps[0] > 1:
        factors = factorint(ps[0])
        if len(factors) == 1 and 2 not in factors:
            n = next(iter(factors.values()))
            return 3 * n // 2 + 1
    if f is Family.CYCLIC:
        exps = sorted(factorint(ps[0]).values())
        if len(exps) == 2 and exps[0] == 1:
            return 3 * exps[1] // 2 + 1
    return None
