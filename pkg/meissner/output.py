"""
Result artifacts: CSV tables (17 significant digits, LF line endings,
UTF-8) or one JSON document {config, scalars, columns, history, tables}.
"""

import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .exceptions import ConfigError

LOG = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


@dataclass
class RunResult:
    """Everything one mode produces: a main column table plus side information"""
    columns: Dict[str, Any] = field(default_factory=dict)
    scalars: Dict[str, Any] = field(default_factory=dict)
    history: List[Tuple[int, float]] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({name: np.asarray(values) for name, values in self.columns.items()})


def _plain(value: Any) -> Any:
    """JSON-safe python value; NaN and inf become null"""
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def to_document(result: RunResult, config: Dict[str, Any]) -> Dict[str, Any]:
    """The JSON document written for output_format=json"""
    document = {
        "config": _plain(config),
        "scalars": _plain(result.scalars),
        "columns": {name: _plain(np.asarray(values)) for name, values in result.columns.items()},
        "history": [[int(i), _plain(change)] for i, change in result.history],
    }
    if result.tables:
        document["tables"] = {
            name: {col: _plain(table[col].to_numpy()) for col in table.columns}
            for name, table in result.tables.items()
        }
    return document


def _csv_text(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def write_result(result: RunResult, config: Dict[str, Any], output_path: Optional[str],
                 output_format: str = "csv") -> List[str]:
    """
    Write a result; returns the paths written.

    CSV writes the main table to output_path and each side block next to it
    as <stem>.<block>.csv (scalars, history and any named tables). Without an
    output path the main artifact goes to stdout.

    Raises:
        OSError: when the destination cannot be written
    """
    if output_format == "json":
        text = json.dumps(to_document(result, config), indent=2, allow_nan=False) + "\n"
        if output_path is None:
            sys.stdout.write(text)
            return []
        path = Path(output_path)
        _write_text(path, text)
        LOG.info(f"💾 wrote {path}")
        return [str(path)]

    main = _csv_text(result.frame())
    if output_path is None:
        sys.stdout.write(main)
        return []
    path = Path(output_path)
    _write_text(path, main)
    written = [str(path)]

    blocks: Dict[str, pd.DataFrame] = {}
    if result.scalars:
        blocks["scalars"] = pd.DataFrame(
            {"name": list(result.scalars), "value": [_plain(v) for v in result.scalars.values()]}
        )
    if result.history:
        blocks["history"] = pd.DataFrame(result.history, columns=["iteration", "change"])
    blocks.update(result.tables)
    for name, table in blocks.items():
        side = path.with_name(f"{path.stem}.{name}.csv")
        _write_text(side, _csv_text(table))
        written.append(str(side))
    LOG.info(f"💾 wrote {', '.join(written)}")
    return written


def read_density_csv(path: str) -> pd.DataFrame:
    """Density table with columns rho, g"""
    try:
        table = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as exc:
        raise ConfigError(f"cannot read density file {path}: {exc}", key="density_path") from exc
    missing = {"rho", "g"} - set(table.columns)
    if missing:
        raise ConfigError(f"{path} lacks column(s) {sorted(missing)}", key="density_path")
    return table
