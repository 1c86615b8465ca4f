import time

from src.config import RunConfig
from src.engine.rainbow import (
    RainbowPlan,
    build_partial_rainbow_dihedral,
    build_partial_rainbow_semidihedral,
    odd_dihedral_parameters,
    rainbow_plan_dihedral,
    rainbow_plan_semidihedral,
    rank_dihedral,
    rank_semidihedral,
    verify_partial_rainbow,
)
from src.engine.transfer import complexity_closed_form
from src.errors import DomainError, ToolkitError
from src.router import CommandRouter, arg
from src.routes.common import (
    arrow_out,
    as_spec,
    certificate_out,
    certified_run,
    elapsed,
    group_info,
    load_lattice,
    load_universe,
    run_stage,
)
from src.schemas.groups import Family, GroupSpec
from src.schemas.reports import ComplexityOut, GroupInfo, RainbowOut, Report

router = CommandRouter()


def rainbow_plan(spec: GroupSpec) -> RainbowPlan:
    if spec.family is Family.DIHEDRAL:
        _, n = odd_dihedral_parameters(spec)
        return rainbow_plan_dihedral(n)
    if spec.family is Family.SEMIDIHEDRAL:
        return rainbow_plan_semidihedral(spec.params[0])
    raise DomainError(f"rainbow mode supports D:p^n (p odd) and SD:n only, got {spec}")


def _symbolic_group(spec: GroupSpec) -> GroupInfo:
    letters = ["r", "s"] if spec.family is Family.DIHEDRAL else ["a", "b"]
    return GroupInfo(spec=str(spec), family=spec.family.name, order=spec.order, generators=letters)


def _exact(spec: GroupSpec, config: RunConfig, start: float) -> Report:
    G, L = load_lattice(spec, config)
    run = certified_run(load_universe(L), config)
    result = ComplexityOut(
        mode="exact",
        value=run.value,
        closed_form=complexity_closed_form(spec),
        systems_visited=run.systems_visited,
        witness=run.witness.hex,
        certificate=certificate_out(L, run.certificate),
    )
    return Report(
        group=group_info(G),
        command="complexity",
        status="complete" if run.complete else "lower-bound-only",
        budget_exhausted=not run.complete,
        result=result,
        timing_seconds=elapsed(start),
    )


def _rainbow(spec: GroupSpec, config: RunConfig, start: float) -> Report:
    plan = rainbow_plan(spec)
    arcs = [(a.j, a.k) for a in plan.arcs]
    if spec.order > config.max_order:
        group = _symbolic_group(spec)
        rainbow = RainbowOut(arcs=arcs, chosen_arrows=[], size=plan.size, verified_by="construction")
    else:
        G, L = load_lattice(spec, config)
        group = group_info(G)
        U = load_universe(L)
        if spec.family is Family.DIHEDRAL:
            P = rank_dihedral(L)
            S = run_stage("rainbow construction", build_partial_rainbow_dihedral, U, P)
        else:
            P = rank_semidihedral(L)
            S = run_stage("rainbow construction", build_partial_rainbow_semidihedral, U, P)
        check = run_stage("rainbow verification", verify_partial_rainbow, U, P, S, config.exhaustive_limit)
        if not check.ok:
            raise ToolkitError(f"rainbow on {spec} failed condition ({check.condition}): {check.reason}")
        rainbow = RainbowOut(
            arcs=arcs,
            chosen_arrows=[arrow_out(L, a.src, a.tgt) for a in S],
            size=len(S),
            m_of_closure=check.m_of_closure,
            verified_by="closure",
        )
    result = ComplexityOut(
        mode="rainbow",
        value=rainbow.size,
        closed_form=complexity_closed_form(spec),
        rainbow=rainbow,
    )
    return Report(
        group=group,
        command="complexity",
        status="lower-bound-only",
        result=result,
        timing_seconds=elapsed(start),
    )


@router.command(
    "complexity",
    arg("spec", help="group spec, e.g. D:9"),
    arg("--mode", choices=["exact", "rainbow"], default="exact", help="exact enumeration or rainbow lower bound"),
)
def cmd_complexity(spec, config: RunConfig, mode: str = "exact") -> Report:
    """Complexity c(G): exact by enumeration or a certified rainbow lower bound."""
    start = time.perf_counter()
    spec = as_spec(spec)
    if mode == "rainbow":
        return _rainbow(spec, config, start)
    return _exact(spec, config, start)
