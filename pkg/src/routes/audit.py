import logging
import random
import time
from typing import List, Tuple

from src.config import RunConfig
from src.engine.lattice import width, width_closed_form
from src.engine.rainbow import (
    alpha_census,
    anchoring_audit,
    bridge_bounds_audit,
    build_partial_rainbow_dihedral,
    build_partial_rainbow_semidihedral,
    census_rows,
    closed_form_alpha_dihedral,
    closed_form_alpha_semidihedral,
    dihedral_shift_embedding_check,
    forbidden_inclusion_audit,
    odd_dihedral_parameters,
    rainbow_plan_dihedral,
    rainbow_plan_semidihedral,
    rank_dihedral,
    rank_semidihedral,
    semidihedral_lower_bound,
    strand_tags,
    verify_partial_rainbow,
)
from src.engine.transfer import (
    ArrowUniverse,
    closure_law_violations,
    complete_system,
    complexity_closed_form,
    minimal_generating_size,
)
from src.router import CommandRouter, arg
from src.routes.common import (
    CROSS_CHECK_ORDER,
    as_spec,
    elapsed,
    group_info,
    load_lattice,
    load_universe,
    run_stage,
)
from src.schemas.groups import Family, GroupSpec
from src.schemas.reports import AuditCheck, AuditOut, CensusRow, Report

logger = logging.getLogger(__name__)

router = CommandRouter()

CLOSURE_TRIALS = 200
CLOSURE_SEED = 20240601


def _census_check(U: ArrowUniverse, P, closed_form) -> Tuple[AuditCheck, List[CensusRow]]:
    rows = [CensusRow(**row) for row in census_rows(alpha_census(U, P), closed_form)]
    bad = [f"({r.j},{r.k}): {r.alpha_observed} != {r.alpha_closed_form}" for r in rows if r.alpha_observed != r.alpha_closed_form]
    return AuditCheck(name="alpha-census", passed=not bad, detail="; ".join(bad) or f"{len(rows)} arcs match"), rows


def _rainbow_check(U: ArrowUniverse, P, S, planned: int, expected: int, limit: int) -> AuditCheck:
    check = verify_partial_rainbow(U, P, S, limit)
    if not check.ok:
        return AuditCheck(name="rainbow", passed=False, detail=f"condition ({check.condition}): {check.reason}")
    passed = len(S) == planned == expected
    return AuditCheck(
        name="rainbow",
        passed=passed,
        detail=f"size {len(S)}, planned {planned}, expected {expected}, m(closure) {check.m_of_closure}",
    )


def generic_checks(U: ArrowUniverse, spec: GroupSpec, config: RunConfig) -> List[AuditCheck]:
    L = U.lattice
    checks = []
    w = width(L)
    closed = width_closed_form(spec)
    if closed is not None:
        checks.append(AuditCheck(name="width-closed-form", passed=w == closed, detail=f"width {w}, closed form {closed}"))
    if L.group.order <= CROSS_CHECK_ORDER:
        m = minimal_generating_size(U, complete_system(U), config.exhaustive_limit).size
        checks.append(AuditCheck(name="width-complete-system", passed=m == w, detail=f"width {w}, m(complete) {m}"))
    problems = closure_law_violations(U, random.Random(CLOSURE_SEED), CLOSURE_TRIALS)
    checks.append(
        AuditCheck(
            name="closure-laws",
            passed=not problems,
            detail="; ".join(problems[:3]) or f"{CLOSURE_TRIALS} random seeds",
        )
    )
    return checks


def dihedral_checks(U: ArrowUniverse, spec: GroupSpec, config: RunConfig) -> Tuple[List[AuditCheck], List[CensusRow], bool]:
    L = U.lattice
    p, n = odd_dihedral_parameters(spec)
    P = rank_dihedral(L)
    checks = [AuditCheck(name="rank-strict", passed=P.is_strict())]
    census_check, rows = _census_check(U, P, lambda j, k: closed_form_alpha_dihedral(n, j, k))
    checks.append(census_check)

    S = build_partial_rainbow_dihedral(U, P)
    expected = complexity_closed_form(spec)
    checks.append(_rainbow_check(U, P, S, rainbow_plan_dihedral(n).size, expected, config.exhaustive_limit))

    bridge = bridge_bounds_audit(U, config.budget, config.workers, config.exhaustive_limit)
    detail = (
        f"{bridge.systems} systems; max C+D={bridge.max_cd} (<= {n}), "
        f"C+X={bridge.max_cx} (<= {n + 1}; <= {n}: {bridge.max_cx <= n}), "
        f"D+X={bridge.max_dx} (<= {n + 1}), total={bridge.max_total} (<= {bridge.total_bound})"
    )
    if bridge.violations:
        detail += "; " + "; ".join(bridge.violations[:3])
    detail += f"; equality cases {bridge.equality_cases}, without the stated arrows {len(bridge.equality_violations)}"
    checks.append(AuditCheck(name="bridge-bounds", passed=bridge.ok, detail=detail))
    if bridge.complete:
        checks.append(
            AuditCheck(
                name="complexity",
                passed=bridge.max_total == expected,
                detail=f"max m {bridge.max_total}, closed form {expected}",
            )
        )

    anchoring = anchoring_audit(U, config.budget, config.workers, config.exhaustive_limit)
    checks.append(
        AuditCheck(
            name="left-anchoring",
            passed=anchoring.ok,
            detail="; ".join(anchoring.violations[:3])
            or f"{anchoring.generating_sets} generating sets over {anchoring.systems} systems",
        )
    )

    if n >= 2:
        _, L_prev = load_lattice(GroupSpec(family=Family.DIHEDRAL, params=(p ** (n - 1),)), config)
        shift = dihedral_shift_embedding_check(L, L_prev)
        checks.append(AuditCheck(name="shift-embedding", passed=shift.ok, detail="; ".join(shift.failures[:3])))
    return checks, rows, bridge.complete and anchoring.complete


def semidihedral_checks(U: ArrowUniverse, spec: GroupSpec, config: RunConfig) -> Tuple[List[AuditCheck], List[CensusRow]]:
    L = U.lattice
    n = spec.params[0]
    P = rank_semidihedral(L)
    checks = [AuditCheck(name="rank-strict", passed=P.is_strict())]
    census_check, rows = _census_check(U, P, lambda j, k: closed_form_alpha_semidihedral(n, j, k))
    checks.append(census_check)

    tags = strand_tags(L)
    untagged = len(L.classes) - len(tags)
    checks.append(
        AuditCheck(
            name="strand-tags",
            passed=untagged == 2,
            detail=", ".join(f"{t.value}={sum(v is t for v in tags.values())}" for t in sorted(set(tags.values()))),
        )
    )

    forbidden = forbidden_inclusion_audit(L)
    failed = [clause for clause, ok in forbidden.clauses.items() if not ok]
    checks.append(
        AuditCheck(
            name="forbidden-inclusions",
            passed=forbidden.ok,
            detail=f"failed clauses {failed}" if failed else "clauses i-iv hold",
        )
    )

    S = build_partial_rainbow_semidihedral(U, P)
    planned = rainbow_plan_semidihedral(n).size
    checks.append(_rainbow_check(U, P, S, planned, planned, config.exhaustive_limit))
    bound = semidihedral_lower_bound(n)
    checks.append(AuditCheck(name="rainbow-bound", passed=len(S) >= bound, detail=f"size {len(S)}, bound {bound}"))
    return checks, rows


@router.command("audit", arg("spec", help="group spec, e.g. D:9 or SD:4"))
def cmd_audit(spec, config: RunConfig) -> Report:
    """Run the structural audits that apply to the group's family."""
    start = time.perf_counter()
    spec = as_spec(spec)
    G, L = load_lattice(spec, config)
    U = load_universe(L)
    checks = run_stage("generic audit", generic_checks, U, spec, config)
    census: List[CensusRow] = []
    complete = True

    if spec.family is Family.DIHEDRAL and complexity_closed_form(spec) is not None:
        family_checks, census, complete = run_stage("dihedral audit", dihedral_checks, U, spec, config)
        checks += family_checks
    elif spec.family is Family.SEMIDIHEDRAL:
        family_checks, census = run_stage("semidihedral audit", semidihedral_checks, U, spec, config)
        checks += family_checks
    else:
        logger.info("%s: only generic audits apply", spec)

    for check in checks:
        if not check.passed:
            logger.warning("%s: audit %s failed: %s", spec, check.name, check.detail)
    return Report(
        group=group_info(G),
        command="audit",
        status="complete" if complete else "lower-bound-only",
        budget_exhausted=not complete,
        result=AuditOut(checks=checks, census=census),
        timing_seconds=elapsed(start),
    )
