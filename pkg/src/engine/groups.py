"""
Finite groups of the studied families as precomputed multiplication tables.

Every family uses a normal-form enumeration with index 0 the identity:
  - cyclic C_m: r^i at index i;
  - metacyclic families (dihedral, semidihedral, modular maximal-cyclic,
    generalized quaternion): a^i b^j at index j*N + i, 0 <= i < N, j in {0, 1};
  - AGL(1, q): the affine map x -> w^e x + beta at index e*q + beta, where w is
    the primitive element of the field and beta is a field code.
"""
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Tuple

import numpy as np

from src.engine.fields import FiniteField
from src.errors import CapacityError, DomainError
from src.schemas.groups import Family, GroupSpec


logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 512


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    spec: GroupSpec
    mul: np.ndarray
    inv: np.ndarray
    labels: Tuple[str, ...]
    generators: Tuple[int, ...]
    names: Dict[str, int] = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.labels)

    @property
    def family(self) -> Family:
        return self.spec.family

    @cached_property
    def label_index(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def product(self, *elements: int) -> int:
        acc = 0
        for g in elements:
            acc = int(self.mul[acc, g])
        return acc

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g, k = int(self.inv[g]), -k
        acc = 0
        for _ in range(k):
            acc = int(self.mul[acc, g])
        return acc

    def conjugate(self, g: int, x: int) -> int:
        """g x g^-1."""
        return int(self.mul[self.mul[g, x], self.inv[g]])

    def __repr__(self) -> str:
        return f"FiniteGroup({self.spec}, order={self.order})"


def _freeze(spec, mul, labels, generators, names) -> FiniteGroup:
    mul = np.ascontiguousarray(mul, dtype=np.int32)
    inv = np.argmax(mul == 0, axis=1).astype(np.int32)
    mul.setflags(write=False)
    inv.setflags(write=False)
    gens = tuple(g for g in generators if g != 0)
    return FiniteGroup(spec, mul, inv, tuple(labels), gens, dict(names))


def _check_cap(spec: GroupSpec, max_order: int) -> None:
    if spec.order > max_order:
        raise CapacityError("max_order", max_order, spec.order)


def _power_word(letter: str, k: int) -> str:
    if k == 0:
        return ""
    return letter if k == 1 else f"{letter}^{k}"


def make_cyclic(m: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    spec = GroupSpec(family=Family.CYCLIC, params=(m,))
    _check_cap(spec, max_order)
    idx = np.arange(m)
    mul = np.add.outer(idx, idx) % m
    labels = [_power_word("r", i) or "e" for i in range(m)]
    return _freeze(spec, mul, labels, [1 % m], {"r": 1 % m})


def _metacyclic(
    spec: GroupSpec, N: int, t: int, c: int, letters: Tuple[str, str], max_order: int
) -> FiniteGroup:
    """
    Group of words a^i b^j with a^N = 1, b a b^-1 = a^t and b^2 = a^c.

    (a^i b^j)(a^k b^l) = a^{i + k t^j} b^{j+l}, with b^2 folded into a^c.
    """
    _check_cap(spec, max_order)
    order = 2 * N
    idx = np.arange(order)
    i, j = idx % N, idx // N
    twist = np.where(j == 1, t, 1)
    a_exp = i[:, None] + i[None, :] * twist[:, None]
    b_exp = j[:, None] + j[None, :]
    a_exp = (a_exp + np.where(b_exp == 2, c, 0)) % N
    mul = (b_exp % 2) * N + a_exp

    a, b = letters
    labels = []
    for k in range(order):
        word = " ".join(w for w in (_power_word(a, k % N), _power_word(b, k // N)) if w)
        labels.append(word or "e")
    names = {a: 1 % N, b: N}
    return _freeze(spec, mul, labels, [1 % N, N], names)


def make_dihedral(m: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """Dihedral group of order 2m: r of order m, s of order 2, s r s^-1 = r^-1."""
    spec = GroupSpec(family=Family.DIHEDRAL, params=(m,))
    return _metacyclic(spec, m, -1, 0, ("r", "s"), max_order)


def make_semidihedral(n: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """SD_{2^n}: a^{2^{n-1}} = b^2 = 1, b a b = a^{2^{n-2}-1}."""
    if n < 4:
        raise DomainError(f"SD_(2^n) requires n >= 4, got n={n}")
    spec = GroupSpec(family=Family.SEMIDIHEDRAL, params=(n,))
    N = 2 ** (n - 1)
    G = _metacyclic(spec, N, N // 2 - 1, 0, ("a", "b"), max_order)
    G.names["z"] = N // 2
    return G


def make_modular_maximal_cyclic(n: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """M_n(2): a^{2^{n-1}} = b^2 = 1, b a b^-1 = a^{1+2^{n-2}}."""
    if n < 4:
        raise DomainError(f"M_n(2) requires n >= 4, got n={n}")
    spec = GroupSpec(family=Family.MODMAXCYC, params=(n,))
    N = 2 ** (n - 1)
    return _metacyclic(spec, N, 1 + N // 2, 0, ("a", "b"), max_order)


def make_generalized_quaternion(n: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """Q_{2^n}: a of order 2^{n-1}, b^2 = a^{2^{n-2}}, b a b^-1 = a^-1."""
    if n < 3:
        raise DomainError(f"Q_(2^n) requires n >= 3, got n={n}")
    spec = GroupSpec(family=Family.GENQUAT, params=(n,))
    N = 2 ** (n - 1)
    G = _metacyclic(spec, N, -1, N // 2, ("a", "b"), max_order)
    G.names["z"] = N // 2
    return G


def make_agl1(p: int, n: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """
    The affine group x -> alpha x + beta over F_{p^n}, composed as maps: (f g)(x) = f(g(x)).

    Parameters:
    p (int): Prime characteristic.
    n (int): Degree of the field over F_p.

    Returns:
    FiniteGroup: Order p^n (p^n - 1) group with the translations at indices [0, p^n).
    """
    if n < 1:
        raise DomainError(f"AGL(1, p^n) requires n >= 1, got n={n}")
    field_ = FiniteField(p, n)
    spec = GroupSpec(family=Family.AGL1, params=(p, n))
    _check_cap(spec, max_order)

    q = field_.q
    order = q * (q - 1)
    idx = np.arange(order)
    e, beta = idx // q, idx % q
    alpha = np.array(field_.powers, dtype=np.int64)[e]
    new_e = (e[:, None] + e[None, :]) % (q - 1)
    new_beta = field_.add_table[field_.mul_table[alpha[:, None], beta[None, :]], beta[:, None]]
    mul = new_e * q + new_beta

    labels = []
    for k in range(order):
        ek, bk = divmod(k, q)
        head = "x" if ek == 0 else ("w*x" if ek == 1 else f"w^{ek}*x")
        labels.append(head + (f"+{bk}" if bk else ""))

    generators = [1] + ([q] if q > 2 else [])
    names = {"t": 1}
    if q > 2:
        names["w"] = q
    G = _freeze(spec, mul, labels, generators, names)
    logger.debug("AGL(1,%d^%d) uses modulus %s", p, n, field_.modulus)
    return G


def agl_translations(G: FiniteGroup) -> List[int]:
    """Elements of the translation kernel V of an AGL(1, q) table."""
    if G.family is not Family.AGL1:
        raise DomainError(f"{G.spec} is not an affine group")
    p, n = G.spec.params
    return list(range(p**n))


def agl_point_stabilizer(G: FiniteGroup) -> List[int]:
    """Elements of the complement H fixing 0, i.e. the maps x -> alpha x."""
    V = agl_translations(G)
    q = len(V)
    return [e * q for e in range(q - 1)]


def build_group(spec: GroupSpec, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    _check_cap(spec, max_order)
    f, ps = spec.family, spec.params
    if f is Family.CYCLIC:
        return make_cyclic(ps[0], max_order)
    if f is Family.DIHEDRAL:
        return make_dihedral(ps[0], max_order)
    if f is Family.SEMIDIHEDRAL:
        return make_semidihedral(ps[0], max_order)
    if f is Family.MODMAXCYC:
        return make_modular_maximal_cyclic(ps[0], max_order)
    if f is Family.GENQUAT:
        return make_generalized_quaternion(ps[0], max_order)
    return make_agl1(ps[0], ps[1], max_order)


def element_order(G: FiniteGroup, g: int) -> int:
    k, y = 1, g
    while y != 0:
        y = int(G.mul[y, g])
        k += 1
    return k


def element_order_statistics(G: FiniteGroup) -> Dict[int, int]:
    counts = Counter(element_order(G, g) for g in range(G.order))
    return dict(sorted(counts.items()))


def center(G: FiniteGroup) -> List[int]:
    mask = np.ones(G.order, dtype=bool)
    for g in G.generators:
        mask &= G.mul[:, g] == G.mul[g, :]
    return [int(x) for x in np.flatnonzero(mask)]


_WORD = re.compile(r"\s+")


def parse_element_label(G: FiniteGroup, text: str) -> int:
    label = _WORD.sub(" ", text.strip())
    try:
        return G.label_index[label]
    except KeyError:
        raise DomainError(f"{text!r} is not an element label of {G.spec}")


def closure_of(G: FiniteGroup, seed: Iterable[int]) -> List[int]:
    """Elements of the subgroup generated by seed, by breadth-first right multiplication."""
    gens = np.array([g for g in seed if g != 0], dtype=np.int64)
    seen = np.zeros(G.order, dtype=bool)
    seen[0] = True
    frontier = np.zeros(1, dtype=np.int64)
    while frontier.size and gens.size:
        products = np.unique(G.mul[np.ix_(frontier, gens)])
        products = products[~seen[products]]
        seen[products] = True
        frontier = products
    return [int(x) for x in np.flatnonzero(seen)]
