import logging
import time
from contextlib import ExitStack
from pathlib import Path
from typing import Callable, Optional, Tuple, TypeVar, Union

from src.config import RunConfig
from src.engine.cache import JsonlWriter, TransferCache, certified_pair, record_for
from src.engine.groups import FiniteGroup, build_group
from src.engine.lattice import SubgroupLattice, enumerate_subgroups
from src.engine.transfer import ArrowUniverse, ComplexityResult, GenSetCertificate, TransferSystem, complexity
from src.errors import ToolkitError
from src.schemas.groups import GroupSpec, parse_group_spec
from src.schemas.reports import ArrowOut, CertificateOut, GroupInfo


logger = logging.getLogger(__name__)

T = TypeVar("T")

# m(complete) is cross-checked against the width up to this group order
CROSS_CHECK_ORDER = 64


def run_stage(stage: str, fn: Callable[..., T], *args, **kwargs) -> T:
    """Run one pipeline stage, re-raising foreign failures as ToolkitError."""
    try:
        return fn(*args, **kwargs)
    except ToolkitError:
        raise
    except Exception as e:
        raise ToolkitError(detail=f"{stage} failed: {str(e)}")


def as_spec(spec: Union[str, GroupSpec]) -> GroupSpec:
    return spec if isinstance(spec, GroupSpec) else parse_group_spec(spec)


def load_lattice(spec: GroupSpec, config: RunConfig) -> Tuple[FiniteGroup, SubgroupLattice]:
    G = run_stage("group construction", build_group, spec, config.max_order)
    L = run_stage(
        "subgroup enumeration", enumerate_subgroups, G, config.max_subgroups, config.max_order
    )
    return G, L


def load_universe(L: SubgroupLattice) -> ArrowUniverse:
    return run_stage("arrow universe", ArrowUniverse, L)


def group_info(G: FiniteGroup) -> GroupInfo:
    return GroupInfo(
        spec=str(G.spec),
        family=G.family.name,
        order=G.order,
        generators=[G.labels[g] for g in G.generators],
    )


def subgroup_label(L: SubgroupLattice, i: int) -> str:
    H = L.subgroups[i]
    if not H.generators:
        return "<e>"
    return "<" + ", ".join(L.group.labels[g] for g in H.generators) + ">"


def arrow_out(L: SubgroupLattice, src: int, tgt: int) -> ArrowOut:
    return ArrowOut(
        src=subgroup_label(L, src),
        tgt=subgroup_label(L, tgt),
        src_order=L.order(src),
        tgt_order=L.order(tgt),
    )


def certificate_out(L: SubgroupLattice, cert: GenSetCertificate) -> CertificateOut:
    return CertificateOut(
        target=cert.target,
        size=cert.size,
        method=cert.method,
        arrows=[arrow_out(L, a.src, a.tgt) for a in cert.arrows],
    )


def certified_run(U: ArrowUniverse, config: RunConfig, out: Optional[Path] = None) -> ComplexityResult:
    """
    Certify every transfer system in lectic order, reading a warm cache when there is one.

    Records stream to `out` as they arrive. On a cache miss they also stream
    to the cache, which is kept only when the enumeration finishes.
    """
    cache = TransferCache(config.cache_dir, U) if config.cache_dir else None
    cached = run_stage("cache load", cache.load) if cache else None
    certified = (certified_pair(U, record) for record in cached) if cached is not None else None

    with ExitStack() as stack:
        export = stack.enter_context(JsonlWriter(out)) if out is not None else None
        store = stack.enter_context(cache.writer()) if cache and cached is None else None
        sinks = [sink for sink in (export, store) if sink is not None]

        def emit(T: TransferSystem, cert: GenSetCertificate) -> None:
            record = record_for(T, cert)
            for sink in sinks:
                sink.write(record)

        result = run_stage(
            "enumeration",
            complexity,
            U,
            config.budget,
            config.workers,
            config.exhaustive_limit,
            certified=certified,
            on_certified=emit if sinks else None,
        )
        if export is not None:
            run_stage("jsonl export", export.commit)
        if store is not None and result.complete:
            count = run_stage("cache store", store.commit)
            logger.info("cached %d records in %s", count, store.path)
    return result


def elapsed(start: float) -> float:
    return round(time.perf_counter() - start, 6)
