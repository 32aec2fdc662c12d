"""Toolkit configuration: truncation tables, QP ladder, and baselines.

Defaults ship as JSON under featcodec/data/; a user config given via
--config or the FEATCODEC_CONFIG environment variable overrides them,
and CLI flags override the config.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .containers import TaskKind
from .errors import ValidationError
from .metrics import AccuracyKind
from .preprocess import TruncationTable

ENV_VAR = "FEATCODEC_CONFIG"

QP_LADDER = (22, 27, 32, 37, 42)


@dataclass
class Baseline:
    accuracy: float
    kind: AccuracyKind


@dataclass
class ToolkitConfig:
    qp_ladder: tuple[int, ...] = QP_LADDER
    default_table: str = "vtm"
    tables: dict[str, TruncationTable] = field(default_factory=dict)
    baselines: dict[TaskKind, Baseline] = field(default_factory=dict)

    def table(self, name_or_path: str | None = None) -> TruncationTable:
        """Resolve a named table from the config or load one from a file."""
        name = name_or_path or self.default_table
        if name in self.tables:
            return self.tables[name]
        path = Path(name)
        if path.exists():
            return load_truncation_table(path)
        raise ValidationError(
            f"unknown truncation table {name!r} (names: {sorted(self.tables)})"
        )


def _data_text(name: str) -> str:
    return resources.files("featcodec").joinpath(f"data/{name}").read_text()


def load_truncation_table(path: str | Path) -> TruncationTable:
    try:
        entries = json.loads(Path(path).read_text())
    except ValueError as exc:
        raise ValidationError(f"{path}: bad truncation table: {exc}") from None
    return TruncationTable.from_dict(entries)


def default_truncation_table(name: str = "vtm") -> TruncationTable:
    return TruncationTable.from_dict(json.loads(_data_text(f"truncation_{name}.json")))


def _config_from_dict(d: dict) -> ToolkitConfig:
    tables = {
        name: TruncationTable.from_dict(entries)
        for name, entries in d.get("tables", {}).items()
    }
    baselines = {}
    for task_name, b in d.get("baselines", {}).items():
        baselines[TaskKind.parse(task_name)] = Baseline(
            accuracy=float(b["accuracy"]), kind=AccuracyKind(b["kind"])
        )
    return ToolkitConfig(
        qp_ladder=tuple(int(q) for q in d.get("qp_ladder", QP_LADDER)),
        default_table=d.get("default_table", "vtm"),
        tables=tables,
        baselines=baselines,
    )


def load_config(path: str | Path | None = None) -> ToolkitConfig:
    """Load configuration from path, $FEATCODEC_CONFIG, or the defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        text = _data_text("default_config.json")
    else:
        text = Path(path).read_text()
    try:
        return _config_from_dict(json.loads(text))
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"bad config: {exc}") from None
