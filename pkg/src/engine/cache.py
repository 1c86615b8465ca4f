"""
JSON-lines cache of certified transfer systems, one file per (group spec, arrow universe).
"""
import logging
import os
from pathlib import Path
from typing import Iterator, Optional, Tuple

from pydantic import ValidationError

from src.engine.transfer import (
    Arrow,
    ArrowUniverse,
    GenSetCertificate,
    TransferSystem,
    transfer_system_from_classes,
)
from src.errors import DomainError
from src.schemas.reports import CacheRecord


logger = logging.getLogger(__name__)

CACHE_VERSION = 1


def record_for(T: TransferSystem, cert: GenSetCertificate) -> CacheRecord:
    return CacheRecord(
        class_vector=T.hex,
        m=cert.size,
        arrows=[(a.src, a.tgt) for a in cert.arrows],
        method=cert.method,
    )


def certified_pair(U: ArrowUniverse, record: CacheRecord) -> Tuple[TransferSystem, GenSetCertificate]:
    """Rebuild the system and certificate a cache record was written from."""
    T = transfer_system_from_classes(U, int(record.class_vector, 16))
    arrows = tuple(Arrow(s, t) for s, t in record.arrows)
    cert = GenSetCertificate(
        arrows=arrows,
        classes=tuple(U.arrow_class(a) for a in arrows),
        target=record.class_vector,
        method=record.method,
    )
    return T, cert


class JsonlWriter:
    """
    Writes records one per line into a sibling .tmp file.

    commit() moves the file over path; leaving the context without a commit
    discards it, so path only ever holds a finished stream.
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self.tmp = self.path.with_name(self.path.name + ".tmp")
        self.count = 0
        self._out = None

    def __enter__(self) -> "JsonlWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._out = self.tmp.open("w", encoding="utf-8")
        return self

    def write(self, record: CacheRecord) -> None:
        self._out.write(record.model_dump_json() + "\n")
        self.count += 1

    def commit(self) -> int:
        self._out.close()
        os.replace(self.tmp, self.path)
        return self.count

    def __exit__(self, *exc) -> bool:
        if not self._out.closed:
            self._out.close()
            self.tmp.unlink(missing_ok=True)
        return False


def read_jsonl(path: Path) -> Iterator[CacheRecord]:
    with Path(path).open(encoding="utf-8") as lines:
        for number, line in enumerate(lines, 1):
            try:
                yield CacheRecord.model_validate_json(line)
            except ValidationError as e:
                raise DomainError(f"{path}:{number}: malformed cache record: {e}")


class TransferCache:
    def __init__(self, cache_dir: Path, U: ArrowUniverse):
        spec = str(U.lattice.group.spec).replace(":", "_")
        self.path = Path(cache_dir) / f"{spec}-{U.digest[:16]}-v{CACHE_VERSION}.jsonl"

    def load(self) -> Optional[Iterator[CacheRecord]]:
        """Lazy record stream of a warm cache, None on a miss."""
        if not self.path.exists():
            logger.info("cache miss: %s", self.path)
            return None
        logger.info("cache hit: %s", self.path)
        return read_jsonl(self.path)

    def writer(self) -> JsonlWriter:
        return JsonlWriter(self.path)
