import json

import pytest

from src.config import load_config
from src.main import main
from src.render import render_csv, render_text
from src.routes.info import cmd_info


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for key in ("TSK_MAX_ORDER", "TSK_MAX_SUBGROUPS", "TSK_BUDGET", "TSK_CACHE_DIR", "TSK_FORMAT", "TSK_WORKERS"):
        monkeypatch.delenv(key, raising=False)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    return code, json.loads(out), err


def test_info(capsys):
    code, report, _ = run_json(capsys, "info", "SD:4")
    assert code == 0
    assert report["group"] == {"spec": "SD:4", "family": "SEMIDIHEDRAL", "order": 16, "generators": ["a", "b"]}
    assert report["result"]["center_order"] == 2
    assert report["result"]["element_orders"] == {"1": 1, "2": 5, "4": 6, "8": 4}
    assert report["result"]["subgroup_count"] == 15


@pytest.mark.parametrize("spec, expected", [("SD:5", 8), ("M:5", 8), ("C:8", 3), ("AGL:2:3", 3)])
def test_width(capsys, spec, expected):
    code, report, _ = run_json(capsys, "width", spec)
    assert code == 0
    result = report["result"]
    assert result["width"] == expected
    assert result["closed_form"] == expected
    assert result["complete_system_m"] == expected
    assert len(result["meet_irreducible_classes"]) == expected


def test_width_payload_is_self_contained(capsys):
    _, report, _ = run_json(capsys, "width", "SD:4")
    result = report["result"]
    assert {"group_spec", "order", "subgroup_count", "class_count", "width", "meet_irreducible_classes"} <= set(result)
    assert result["group_spec"] == report["group"]["spec"] == "SD:4"
    assert result["order"] == report["group"]["order"] == 16
    assert result["subgroup_count"] == 15
    row = result["meet_irreducible_classes"][0]
    assert {"order", "class_size", "unique_cover_order"} <= set(row)


def test_width_skips_cross_check_above_64(capsys):
    _, report, _ = run_json(capsys, "width", "SD:7")
    assert report["result"]["width"] == 12
    assert report["result"]["complete_system_m"] is None


def test_text_and_json_agree(capsys):
    code, text, _ = run(capsys, "width", "SD:5")
    assert code == 0
    _, report, _ = run_json(capsys, "width", "SD:5")
    assert "width" in text
    assert f" {report['result']['width']}" in text
    assert "meet_irreducible_classes" in text


def test_complexity_exact(capsys):
    code, report, _ = run_json(capsys, "complexity", "D:9")
    assert code == 0
    assert report["status"] == "complete"
    assert report["result"]["value"] == 4
    assert report["result"]["closed_form"] == 4
    assert report["result"]["certificate"]["size"] == 4
    assert len(report["result"]["certificate"]["arrows"]) == 4


def test_complexity_budget_exhausted(capsys):
    code, report, err = run_json(capsys, "--budget", "5", "complexity", "D:9")
    assert code == 3
    assert report["status"] == "lower-bound-only"
    assert report["budget_exhausted"] is True
    assert report["result"]["systems_visited"] == 5
    assert "budget" in err


def test_complexity_rainbow_by_closure(capsys):
    code, report, _ = run_json(capsys, "complexity", "SD:6", "--mode", "rainbow")
    assert code == 0
    assert report["status"] == "lower-bound-only"
    rainbow = report["result"]["rainbow"]
    assert report["result"]["value"] == rainbow["size"] == 12
    assert rainbow["verified_by"] == "closure"
    assert rainbow["m_of_closure"] == 12
    assert len(rainbow["chosen_arrows"]) == 12


@pytest.mark.parametrize(
    "spec, value",
    [("D:59049", 16), ("D:19683", 14), ("SD:7", 15), ("SD:12", 27)],
)
def test_complexity_rainbow_beyond_order_cap(capsys, spec, value):
    code, report, _ = run_json(capsys, "--max-order", "64", "complexity", spec, "--mode", "rainbow")
    assert code == 0
    assert report["result"]["value"] == value
    assert report["result"]["rainbow"]["verified_by"] == "construction"
    assert report["status"] == "lower-bound-only"


def test_complexity_rainbow_unsupported(capsys):
    code, out, err = run(capsys, "complexity", "C:8", "--mode", "rainbow")
    assert code == 2
    assert out == ""
    assert err.startswith("error:")


def test_enumerate_catalan(capsys, tmp_path):
    out_path = tmp_path / "c27.jsonl"
    code, report, _ = run_json(capsys, "enumerate", "C:27", "--out", str(out_path))
    assert code == 0
    assert report["result"]["count"] == 14
    assert report["result"]["output"] == str(out_path)
    assert len(out_path.read_text().splitlines()) == 14


def test_enumerate_budget_keeps_partial_stream(capsys, tmp_path):
    out_path = tmp_path / "c32.jsonl"
    code, report, _ = run_json(capsys, "--budget", "10", "enumerate", "C:32", "--out", str(out_path))
    assert code == 3
    assert report["result"]["count"] == 10
    assert len(out_path.read_text().splitlines()) == 10
    assert not (tmp_path / "c32.jsonl.tmp").exists()


def test_enumerate_is_deterministic_across_workers(capsys, tmp_path):
    one, two = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    assert run(capsys, "--workers", "1", "enumerate", "C:81", "--out", str(one))[0] == 0
    assert run(capsys, "--workers", "2", "enumerate", "C:81", "--out", str(two))[0] == 0
    assert one.read_bytes() == two.read_bytes()


def test_enumerate_into_cache(capsys, tmp_path):
    code, report, _ = run_json(capsys, "--cache", str(tmp_path), "enumerate", "D:3")
    assert code == 0
    assert report["result"]["count"] == 9
    assert report["result"]["output"].startswith(str(tmp_path))
    assert len(list(tmp_path.glob("D_3-*.jsonl"))) == 1


def test_audit_dihedral(capsys):
    code, report, _ = run_json(capsys, "audit", "D:9")
    checks = {c["name"]: c for c in report["result"]["checks"]}
    assert code == 0
    assert all(c["passed"] for c in checks.values())
    assert {"alpha-census", "rainbow", "bridge-bounds", "left-anchoring", "shift-embedding"} <= set(checks)
    assert "total=4" in checks["bridge-bounds"]["detail"]
    assert len(report["result"]["census"]) == 6


def test_audit_semidihedral(capsys):
    code, report, _ = run_json(capsys, "audit", "SD:4")
    checks = {c["name"]: c for c in report["result"]["checks"]}
    assert code == 0
    assert checks["forbidden-inclusions"]["passed"]
    assert checks["alpha-census"]["passed"]
    assert checks["strand-tags"]["passed"]
    assert checks["width-closed-form"]["passed"]


def test_audit_generic_family(capsys):
    code, report, _ = run_json(capsys, "audit", "Q:4")
    names = [c["name"] for c in report["result"]["checks"]]
    assert code == 0
    assert names == ["width-closed-form", "width-complete-system", "closure-laws"]
    assert report["result"]["census"] == []


def test_audit_census_csv(capsys):
    code, out, _ = run(capsys, "--format", "csv", "audit", "SD:4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "j,k,alpha_observed,alpha_closed_form"
    assert len(lines) == 1 + 10


def test_export_dot(capsys):
    code, out, _ = run(capsys, "export-dot", "D:9")
    assert code == 0
    assert out.startswith('digraph "D:9"')
    assert out.count("label=") == 6
    assert "color=red" not in out
    code, out, _ = run(capsys, "export-dot", "D:9", "--rainbow")
    assert code == 0
    assert out.count("color=red") == 4


def test_export_dot_without_rainbow_family(capsys):
    code, _, err = run(capsys, "export-dot", "C:4", "--rainbow")
    assert code == 2
    assert "rainbow" in err


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["width", "SD:3"], "column 3"),
        (["width", "XY:3"], "unknown family"),
        (["--max-order", "8", "width", "SD:4"], "max_order=8"),
        (["--max-subgroups", "3", "width", "D:9"], "max_subgroups=3"),
        (["--format", "dot", "width", "C:4"], "export-dot"),
        (["--budget", "0", "width", "C:4"], "invalid configuration"),
    ],
)
def test_errors_exit_with_code_two(capsys, argv, fragment):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert fragment in err


def test_cache_flag_reproduces_reports(capsys, tmp_path):
    _, cold, _ = run_json(capsys, "--cache", str(tmp_path), "complexity", "D:9")
    _, warm, _ = run_json(capsys, "--cache", str(tmp_path), "complexity", "D:9")
    cold.pop("timing_seconds")
    warm.pop("timing_seconds")
    assert cold == warm


def test_renderers_share_numbers():
    report = cmd_info("Q:3", config=load_config(environ={}))
    text = render_text(report)
    assert "center_order" in text
    assert "1:1, 2:1, 4:6" in text
    assert render_csv(report).startswith("field,value")
