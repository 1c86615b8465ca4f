"""
Text and CSV rendering of reports. Both read the same pydantic model as the
JSON output, so every mode reports identical numbers.
"""
from typing import Any, Dict, List, Tuple

import pandas as pd

from src.schemas.reports import Report


def _flatten(prefix: str, value: Any, scalars: List[Tuple[str, Any]], tables: Dict[str, list]) -> None:
    if isinstance(value, dict):
        if value and all(isinstance(k, int) for k in value):
            scalars.append((prefix, ", ".join(f"{k}:{v}" for k, v in value.items())))
            return
        for key, item in value.items():
            _flatten(f"{prefix}.{key}" if prefix else key, item, scalars, tables)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        tables[prefix] = value
    elif isinstance(value, (list, tuple)):
        scalars.append((prefix, " ".join(str(v) for v in value)))
    else:
        scalars.append((prefix, value))


def _split(report: Report) -> Tuple[List[Tuple[str, Any]], Dict[str, list]]:
    scalars: List[Tuple[str, Any]] = []
    tables: Dict[str, list] = {}
    _flatten("", report.model_dump(exclude={"result": {"kind"}}), scalars, tables)
    return scalars, tables


def render_text(report: Report) -> str:
    scalars, tables = _split(report)
    frame = pd.DataFrame(scalars, columns=["field", "value"])
    parts = [frame.to_string(index=False, header=False)]
    for name, rows in tables.items():
        parts.append(f"\n{name}:")
        parts.append(pd.json_normalize(rows).to_string(index=False))
    return "\n".join(parts) + "\n"


def render_csv(report: Report) -> str:
    """CSV of the report's main table (census, checks, classes), else of its fields."""
    scalars, tables = _split(report)
    for name in ("result.census", "result.checks", "result.meet_irreducible_classes"):
        if tables.get(name):
            return pd.json_normalize(tables[name]).to_csv(index=False)
    return pd.DataFrame(scalars, columns=["field", "value"]).to_csv(index=False)


def render(report: Report, output_format: str) -> str:
    if output_format == "json":
        return report.model_dump_json(indent=2) + "\n"
    if output_format == "csv":
        return render_csv(report)
    return render_text(report)
