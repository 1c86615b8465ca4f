import logging
import time

from src.config import RunConfig
from src.engine.lattice import lattice_report_data, width_closed_form
from src.engine.transfer import complete_system, minimal_generating_size
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
from src.schemas.reports import MeetIrreducibleClass, Report, WidthOut

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command("width", arg("spec", help="group spec, e.g. SD:5"))
def cmd_width(spec, config: RunConfig) -> Report:
    """Width of the complete transfer system via meet-irreducible classes."""
    start = time.perf_counter()
    spec = as_spec(spec)
    G, L = load_lattice(spec, config)
    data = run_stage("meet-irreducible search", lattice_report_data, L)

    complete_m = None
    if G.order <= CROSS_CHECK_ORDER:
        U = load_universe(L)
        cert = run_stage(
            "generating set search",
            minimal_generating_size,
            U,
            complete_system(U),
            config.exhaustive_limit,
        )
        complete_m = cert.size
        if complete_m != data["width"]:
            logger.error("%s: width %d but m(complete) = %d", spec, data["width"], complete_m)

    result = WidthOut(
        group_spec=data["group_spec"],
        order=data["order"],
        subgroup_count=data["subgroup_count"],
        class_count=data["class_count"],
        width=data["width"],
        closed_form=width_closed_form(spec),
        complete_system_m=complete_m,
        meet_irreducible_classes=[MeetIrreducibleClass(**row) for row in data["meet_irreducible_classes"]],
    )
    return Report(group=group_info(G), command="width", result=result, timing_seconds=elapsed(start))
