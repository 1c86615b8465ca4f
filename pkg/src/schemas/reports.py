from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field


class GroupInfo(BaseModel):
    spec: str
    family: str
    order: int
    generators: List[str]


class MeetIrreducibleClass(BaseModel):
    order: int
    class_size: int
    unique_cover_order: int
    affine_profile: Optional[Tuple[int, int]] = None


class ArrowOut(BaseModel):
    src: str
    tgt: str
    src_order: int
    tgt_order: int


class CertificateOut(BaseModel):
    target: str
    size: int
    method: str
    arrows: List[ArrowOut]


class RainbowOut(BaseModel):
    arcs: List[Tuple[int, int]]
    chosen_arrows: List[ArrowOut]
    size: int
    m_of_closure: Optional[int] = None
    verified_by: Literal["closure", "construction"]


class CensusRow(BaseModel):
    j: int
    k: int
    alpha_observed: int
    alpha_closed_form: int


class InfoOut(BaseModel):
    kind: Literal["info"] = "info"
    center_order: int
    element_orders: Dict[int, int]
    subgroup_count: int
    class_count: int


class WidthOut(BaseModel):
    """Lattice width report; group_spec and order repeat the envelope so the payload stands alone."""

    kind: Literal["width"] = "width"
    group_spec: str
    order: int
    subgroup_count: int
    class_count: int
    width: int
    closed_form: Optional[int] = None
    complete_system_m: Optional[int] = None
    meet_irreducible_classes: List[MeetIrreducibleClass]


class ComplexityOut(BaseModel):
    kind: Literal["complexity"] = "complexity"
    mode: Literal["exact", "rainbow"]
    value: int
    closed_form: Optional[int] = None
    systems_visited: Optional[int] = None
    witness: Optional[str] = None
    certificate: Optional[CertificateOut] = None
    rainbow: Optional[RainbowOut] = None


class EnumerateOut(BaseModel):
    kind: Literal["enumerate"] = "enumerate"
    count: int
    max_m: int
    output: Optional[str] = None


class AuditCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class AuditOut(BaseModel):
    kind: Literal["audit"] = "audit"
    checks: List[AuditCheck]
    census: List[CensusRow] = []


Result = Annotated[
    Union[InfoOut, WidthOut, ComplexityOut, EnumerateOut, AuditOut],
    Field(discriminator="kind"),
]


class Report(BaseModel):
    """
    Outcome of one command. The command payload sits under result, next to the
    group it was computed for. A report whose status is lower-bound-only never
    carries an exact value; budget_exhausted marks reports cut short by the budget.
    """

    group: GroupInfo
    command: str
    status: Literal["complete", "lower-bound-only"] = "complete"
    budget_exhausted: bool = False
    result: Result
    timing_seconds: float = 0.0


class CacheRecord(BaseModel):
    """One JSONL line of the transfer-system cache."""

    model_config = ConfigDict(frozen=True)

    class_vector: str
    m: int
    arrows: List[Tuple[int, int]]
    method: str = "indispensable"
