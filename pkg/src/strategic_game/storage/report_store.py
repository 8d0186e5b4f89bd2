import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..models import Provenance

logger = logging.getLogger(__name__)


def provenance_label(provenance: Provenance, se: Optional[float] = None) -> str:
    """Cell-level provenance tag: analytic, quadrature or monte-carlo(se=...)"""
    if provenance == Provenance.MONTE_CARLO:
        return f"monte-carlo(se={se!r})" if se is not None else "monte-carlo"
    return provenance.value


class CsvTable(BaseModel):
    """A table whose numeric columns each carry a ``<column>_provenance`` column"""
    columns: List[str]
    rows: List[Dict[str, Any]] = Field(default_factory=list)

    @classmethod
    def with_provenance(cls, leading: List[str], numeric: List[str], trailing: Sequence[str] = ()) -> "CsvTable":
        columns = list(leading)
        for name in numeric:
            columns += [name, f"{name}_provenance"]
        return cls(columns=columns + list(trailing))

    def add(self, row: Dict[str, Any]) -> None:
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise ValueError(f"Row is missing columns {missing}")
        self.rows.append(row)


class ReportBundle(BaseModel):
    """Everything one command writes: a JSON document, CSV tables and a text summary"""
    name: str
    data: Dict[str, Any]
    tables: Dict[str, CsvTable] = Field(default_factory=dict)
    summary: str = ""
    attachments: Dict[str, Dict[str, Any]] = Field(default_factory=dict, description="Extra JSON documents by file stem")


class ReportStore:
    """Writes report bundles under one output directory.

    Output is deterministic: JSON keys keep insertion order, floats are
    written with repr, nothing time-dependent is recorded.
    """

    def __init__(self, output_dir: str | Path):
        """
        Initialize the report store.

        Args:
            output_dir: Directory receiving report files (created if missing)
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"Report store initialized at: {self.output_dir}")

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.output_dir / f"{name}.json"
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(payload, f, indent=2, ensure_ascii=False)
                f.write("\n")
            logger.info(f"Saved JSON report: {path}")
        except Exception as e:
            logger.error(f"Error saving JSON report {path}: {e}")
            raise
        return path

    def write_csv(self, name: str, table: CsvTable) -> Path:
        """Write an RFC 4180 CSV (CRLF line ends, minimal quoting)"""
        path = self.output_dir / f"{name}.csv"
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.DictWriter(f, fieldnames=table.columns, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
                writer.writeheader()
                for row in table.rows:
                    writer.writerow({c: _cell(row[c]) for c in table.columns})
            logger.info(f"Saved CSV table with {len(table.rows)} rows: {path}")
        except Exception as e:
            logger.error(f"Error saving CSV table {path}: {e}")
            raise
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.output_dir / f"{name}.txt"
        try:
            path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        except Exception as e:
            logger.error(f"Error saving summary {path}: {e}")
            raise
        return path

    def write_bundle(self, bundle: ReportBundle) -> List[Path]:
        """Write a bundle as <name>.json, <name>_<table>.csv, <name>.txt and one JSON file per attachment"""
        paths = [self.write_json(bundle.name, bundle.data)]
        for table_name, table in bundle.tables.items():
            paths.append(self.write_csv(f"{bundle.name}_{table_name}", table))
        if bundle.summary:
            paths.append(self.write_text(bundle.name, bundle.summary))
        for stem, payload in bundle.attachments.items():
            paths.append(self.write_json(stem, payload))
        return paths

    def load_json(self, name: str) -> Optional[Dict[str, Any]]:
        path = self.output_dir / f"{name}.json"
        if not path.exists():
            logger.warning(f"Report not found: {path}")
            return None
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def load_csv(self, name: str) -> List[Dict[str, str]]:
        """Rows of a written table as strings; numeric cells parse back with float()"""
        path = self.output_dir / f"{name}.csv"
        with open(path, "r", encoding="utf-8", newline="") as f:
            return list(csv.DictReader(f))


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def render_table(columns: List[str], rows: List[List[Any]]) -> str:
    """Fixed-width plain-text table for summaries"""
    cells = [[_cell(v) if not isinstance(v, float) else f"{v:.6g}" for v in row] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    out = io.StringIO()
    out.write("  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip() + "\n")
    out.write("  ".join("-" * w for w in widths) + "\n")
    for r in cells:
        out.write("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() + "\n")
    return out.getvalue()
