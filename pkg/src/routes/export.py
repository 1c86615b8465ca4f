from typing import List, Tuple

from src.config import RunConfig
from src.engine.lattice import class_hasse_dot
from src.engine.rainbow import build_partial_rainbow_dihedral, build_partial_rainbow_semidihedral
from src.errors import DomainError
from src.router import CommandRouter, arg
from src.routes.common import as_spec, load_lattice, load_universe, run_stage
from src.schemas.groups import Family

router = CommandRouter()


@router.command(
    "export-dot",
    arg("spec", help="group spec, e.g. D:9"),
    arg("--rainbow", action="store_true", help="overlay the rainbow certificate arrows"),
)
def cmd_export_dot(spec, config: RunConfig, rainbow: bool = False) -> str:
    """DOT text of the class-level Hasse diagram."""
    spec = as_spec(spec)
    _, L = load_lattice(spec, config)
    overlay: List[Tuple[int, int]] = []
    if rainbow:
        U = load_universe(L)
        if spec.family is Family.DIHEDRAL:
            arrows = run_stage("rainbow construction", build_partial_rainbow_dihedral, U)
        elif spec.family is Family.SEMIDIHEDRAL:
            arrows = run_stage("rainbow construction", build_partial_rainbow_semidihedral, U)
        else:
            raise DomainError(f"no rainbow construction for {spec}")
        overlay = [(a.src, a.tgt) for a in arrows]
    return run_stage("dot export", class_hasse_dot, L, overlay)
