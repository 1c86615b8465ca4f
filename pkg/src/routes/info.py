import time

from src.config import RunConfig
from src.engine.groups import center, element_order_statistics
from src.router import CommandRouter, arg
from src.routes.common import as_spec, elapsed, group_info, load_lattice, run_stage
from src.schemas.reports import InfoOut, Report

router = CommandRouter()


@router.command("info", arg("spec", help="group spec, e.g. SD:4 or AGL:2:3"))
def cmd_info(spec, config: RunConfig) -> Report:
    """Order, generators, center, element orders and subgroup counts of a group."""
    start = time.perf_counter()
    spec = as_spec(spec)
    G, L = load_lattice(spec, config)
    result = InfoOut(
        center_order=len(run_stage("center", center, G)),
        element_orders=run_stage("element orders", element_order_statistics, G),
        subgroup_count=len(L),
        class_count=len(L.classes),
    )
    return Report(group=group_info(G), command="info", result=result, timing_seconds=elapsed(start))
