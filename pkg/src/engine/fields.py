"""
Arithmetic in F_{p^n}, the ground field of the affine groups AGL(1, p^n).

Elements are encoded as integers in [0, p^n): the base-p digits of the code are
the coordinates over F_p in the polynomial basis {1, x, ..., x^{n-1}}.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Tuple

import numpy as np
from sympy import Poly, isprime
from sympy.abc import x

from src.errors import DomainError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FieldElement:
    coeffs: Tuple[int, ...]

    def __str__(self) -> str:
        terms = []
        for power, c in enumerate(self.coeffs):
            if c == 0:
                continue
            monomial = "1" if power == 0 else ("x" if power == 1 else f"x^{power}")
            terms.append(monomial if c == 1 else f"{c}*{monomial}" if power else str(c))
        return " + ".join(terms) or "0"


def smallest_irreducible(p: int, n: int) -> Tuple[int, ...]:
    """
    Find the lexicographically smallest monic irreducible polynomial of degree n over F_p.

    Candidates are scanned in increasing order of their lower coefficients read
    from x^{n-1} down to the constant term.

    Returns:
    Tuple[int, ...]: Coefficients from the constant term up to the leading 1.
    """
    for code in range(p**n):
        low = [(code // p**i) % p for i in range(n)]
        if Poly([1] + low[::-1], x, modulus=p).is_irreducible:
            return tuple(low) + (1,)
    raise DomainError(f"no irreducible polynomial of degree {n} over F_{p}")


class FiniteField:
    def __init__(self, p: int, n: int):
        if not isprime(p):
            raise DomainError(f"p={p} is not prime")
        if n < 1:
            raise DomainError(f"field degree must be >= 1, got {n}")

        self.p = p
        self.n = n
        self.q = p**n
        self.modulus = smallest_irreducible(p, n)
        self._digits = np.array(
            [[(c // p**i) % p for i in range(n)] for c in range(self.q)], dtype=np.int64
        )
        self._weights = np.array([p**i for i in range(n)], dtype=np.int64)
        self.add_table = self._build_add_table()
        self.mul_table = self._build_mul_table()
        logger.debug("built F_%d^%d with modulus %s", p, n, self.modulus)

    def _encode(self, digits: np.ndarray) -> np.ndarray:
        return (digits % self.p) @ self._weights

    def _build_add_table(self) -> np.ndarray:
        d = self._digits
        return self._encode(d[:, None, :] + d[None, :, :])

    def _build_mul_table(self) -> np.ndarray:
        n, p, d = self.n, self.p, self._digits
        prod = np.zeros((self.q, self.q, 2 * n - 1), dtype=np.int64)
        for i in range(n):
            prod[:, :, i : i + n] += d[:, None, i, None] * d[None, :, :]

        modulus = np.array(self.modulus, dtype=np.int64)
        for degree in range(2 * n - 2, n - 1, -1):
            lead = prod[:, :, degree] % p
            prod[:, :, degree - n : degree + 1] -= lead[:, :, None] * modulus
        return self._encode(prod[:, :, :n])

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self._encode(-self._digits[a]))

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return int(np.flatnonzero(self.mul_table[a] == 1)[0])

    def element(self, code: int) -> FieldElement:
        return FieldElement(tuple(int(c) for c in self._digits[code]))

    def code(self, element: FieldElement) -> int:
        return int(self._encode(np.array(element.coeffs, dtype=np.int64)))

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise DomainError("zero has no multiplicative order")
        k, y = 1, a
        while y != 1:
            y = int(self.mul_table[y, a])
            k += 1
        return k

    @cached_property
    def primitive_element(self) -> int:
        """Smallest code generating the cyclic group F^x of order q - 1."""
        for a in range(1, self.q):
            if self.multiplicative_order(a) == self.q - 1:
                return a
        raise DomainError(f"F_{self.q} has no primitive element")

    @cached_property
    def powers(self) -> List[int]:
        """powers[e] is the code of w^e for the primitive element w."""
        w = self.primitive_element
        out = [1]
        for _ in range(self.q - 2):
            out.append(int(self.mul_table[out[-1], w]))
        return out

    @cached_property
    def log(self) -> dict:
        return {code: e for e, code in enumerate(self.powers)}

    def __repr__(self) -> str:
        return f"FiniteField(p={self.p}, n={self.n}, modulus={self.modulus})"
