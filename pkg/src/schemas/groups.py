import re
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, model_validator
from sympy import isprime

from src.errors import SpecSyntaxError


class Family(str, Enum):
    CYCLIC = "C"
    DIHEDRAL = "D"
    SEMIDIHEDRAL = "SD"
    MODMAXCYC = "M"
    GENQUAT = "Q"
    AGL1 = "AGL"


ARITY = {
    Family.CYCLIC: 1,
    Family.DIHEDRAL: 1,
    Family.SEMIDIHEDRAL: 1,
    Family.MODMAXCYC: 1,
    Family.GENQUAT: 1,
    Family.AGL1: 2,
}

_TOKEN = re.compile(r"[A-Za-z]+")
_PARAM = re.compile(r"[0-9]+")


def _check_params(family: Family, params: Tuple[int, ...]) -> Optional[Tuple[int, str]]:
    """Return (parameter index, message) for the first out-of-range parameter."""
    if family in (Family.CYCLIC, Family.DIHEDRAL) and params[0] < 1:
        return 0, f"{family.value}:m requires m >= 1"
    if family in (Family.SEMIDIHEDRAL, Family.MODMAXCYC) and params[0] < 4:
        return 0, f"{family.value}:n requires n >= 4"
    if family is Family.GENQUAT and params[0] < 3:
        return 0, "Q:n requires n >= 3"
    if family is Family.AGL1:
        if not isprime(params[0]):
            return 0, f"AGL:p:n requires p prime, got {params[0]}"
        if params[1] < 1:
            return 1, "AGL:p:n requires n >= 1"
    return None


class GroupSpec(BaseModel):
    """Family tag plus integer parameters, e.g. SD:4 or AGL:2:3."""

    model_config = ConfigDict(frozen=True)

    family: Family
    params: Tuple[int, ...]

    @model_validator(mode="after")
    def _validate(self):
        if len(self.params) != ARITY[self.family]:
            raise ValueError(
                f"{self.family.value} takes {ARITY[self.family]} parameter(s), got {len(self.params)}"
            )
        problem = _check_params(self.family, self.params)
        if problem:
            raise ValueError(problem[1])
        return self

    @property
    def order(self) -> int:
        f, ps = self.family, self.params
        if f is Family.CYCLIC:
            return ps[0]
        if f is Family.DIHEDRAL:
            return 2 * ps[0]
        if f is Family.AGL1:
            q = ps[0] ** ps[1]
            return q * (q - 1)
        return 2 ** ps[0]

    def __str__(self) -> str:
        return ":".join([self.family.value] + [str(p) for p in self.params])


def parse_group_spec(text: str) -> GroupSpec:
    """
    Parse the textual group grammar: a family token followed by colon-separated
    decimal parameters, no whitespace (C:m, D:m, SD:n, M:n, Q:n, AGL:p:n).

    Parameters:
    text (str): The spec as typed on the command line.

    Returns:
    GroupSpec: The validated spec.
    """
    token = _TOKEN.match(text)
    if not token:
        raise SpecSyntaxError(f"expected a family token in {text!r}", 0)
    try:
        family = Family(token.group(0))
    except ValueError:
        known = ", ".join(f.value for f in Family)
        raise SpecSyntaxError(f"unknown family {token.group(0)!r} (known: {known})", 0)

    params, starts = [], []
    pos = token.end()
    while pos < len(text):
        if text[pos] != ":":
            raise SpecSyntaxError(f"expected ':' in {text!r}", pos)
        number = _PARAM.match(text, pos + 1)
        if not number:
            raise SpecSyntaxError(f"expected a decimal parameter in {text!r}", pos + 1)
        params.append(int(number.group(0)))
        starts.append(number.start())
        pos = number.end()

    if len(params) != ARITY[family]:
        raise SpecSyntaxError(
            f"{family.value} takes {ARITY[family]} parameter(s), got {len(params)}",
            len(text),
        )
    problem = _check_params(family, tuple(params))
    if problem:
        index, message = problem
        raise SpecSyntaxError(message, starts[index])
    return GroupSpec(family=family, params=tuple(params))
