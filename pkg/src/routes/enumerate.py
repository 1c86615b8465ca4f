import time
from pathlib import Path
from typing import Optional

from src.config import RunConfig
from src.engine.cache import TransferCache
from src.router import CommandRouter, arg
from src.routes.common import as_spec, certified_run, elapsed, group_info, load_lattice, load_universe
from src.schemas.reports import EnumerateOut, Report

router = CommandRouter()


@router.command(
    "enumerate",
    arg("spec", help="group spec, e.g. C:27"),
    arg("--out", type=Path, default=None, help="write the JSONL stream of certified systems here"),
)
def cmd_enumerate(spec, config: RunConfig, out: Optional[Path] = None) -> Report:
    """Enumerate every transfer system with its minimal generating set."""
    start = time.perf_counter()
    spec = as_spec(spec)
    G, L = load_lattice(spec, config)
    U = load_universe(L)
    run = certified_run(U, config, out)

    output = None
    if out is not None:
        output = str(out)
    elif config.cache_dir and run.complete:
        output = str(TransferCache(config.cache_dir, U).path)

    result = EnumerateOut(count=run.systems_visited, max_m=run.value, output=output)
    return Report(
        group=group_info(G),
        command="enumerate",
        status="complete" if run.complete else "lower-bound-only",
        budget_exhausted=not run.complete,
        result=result,
        timing_seconds=elapsed(start),
    )
