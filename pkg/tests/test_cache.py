from itertools import islice

import pytest

from src.config import load_config
from src.engine.cache import JsonlWriter, TransferCache, certified_pair, read_jsonl, record_for
from src.engine.transfer import certify_all, enumerate_transfer_systems, transfer_system_from_classes
from src.errors import DomainError
from src.routes.common import certified_run
from src.routes.complexity import cmd_complexity
from src.schemas.reports import CacheRecord


def records_of(U):
    return [record_for(T, cert) for T, cert in certify_all(U, enumerate_transfer_systems(U))]


def test_records_reload_as_transfer_systems(universe, tmp_path):
    U = universe("D:3")
    records = records_of(U)
    path = tmp_path / "d3.jsonl"
    with JsonlWriter(path) as out:
        for record in records:
            out.write(record)
        assert out.commit() == 9
    loaded = list(read_jsonl(path))
    assert loaded == records
    for record in loaded:
        T = transfer_system_from_classes(U, int(record.class_vector, 16))
        assert T.hex == record.class_vector
    assert not (tmp_path / "d3.jsonl.tmp").exists()


def test_certified_pair_restores_certificates(universe):
    U = universe("SD:4")
    for T, cert in islice(certify_all(U, enumerate_transfer_systems(U)), 300):
        assert certified_pair(U, record_for(T, cert)) == (T, cert)


def test_uncommitted_writer_leaves_nothing(tmp_path):
    path = tmp_path / "partial.jsonl"
    with JsonlWriter(path) as out:
        out.write(CacheRecord(class_vector="0", m=0, arrows=[]))
    assert not path.exists()
    assert not (tmp_path / "partial.jsonl.tmp").exists()


def test_malformed_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(CacheRecord(class_vector="1", m=1, arrows=[(0, 1)]).model_dump_json() + "\n{oops\n")
    with pytest.raises(DomainError) as info:
        list(read_jsonl(path))
    assert ":2:" in info.value.detail


def test_cache_path_and_miss(universe, tmp_path):
    U = universe("SD:4")
    cache = TransferCache(tmp_path, U)
    assert cache.path.name == f"SD_4-{U.digest[:16]}-v1.jsonl"
    assert cache.load() is None


def test_certified_run_fills_the_cache(universe, tmp_path):
    U = universe("C:27")
    config = load_config({"cache_dir": tmp_path}, environ={})
    cold = certified_run(U, config)
    assert cold.complete and cold.systems_visited == 14
    path = TransferCache(tmp_path, U).path
    assert len(path.read_text().splitlines()) == 14
    warm = certified_run(U, config)
    assert warm.complete and warm.systems_visited == 14
    assert (warm.value, warm.witness, warm.certificate) == (cold.value, cold.witness, cold.certificate)


def test_certified_run_streams_the_export(universe, tmp_path):
    U = universe("D:3")
    out = tmp_path / "nested" / "d3.jsonl"
    run = certified_run(U, load_config(environ={}), out)
    records = list(read_jsonl(out))
    assert len(records) == run.systems_visited == 9
    assert records[0].class_vector == "0"
    assert max(r.m for r in records) == run.value == 2
    assert records == records_of(U)


def test_incomplete_runs_are_not_cached(universe, tmp_path):
    U = universe("C:32")
    config = load_config({"cache_dir": tmp_path, "budget": 10}, environ={})
    run = certified_run(U, config)
    assert not run.complete and run.systems_visited == 10
    assert not TransferCache(tmp_path, U).path.exists()
    assert list(tmp_path.iterdir()) == []


def test_warm_cache_reproduces_report(tmp_path):
    config = load_config({"cache_dir": tmp_path}, environ={})
    cold = cmd_complexity("D:9", config=config)
    warm = cmd_complexity("D:9", config=config)
    assert cold.model_dump(exclude={"timing_seconds"}) == warm.model_dump(exclude={"timing_seconds"})
    assert warm.result.value == 4
