"""
CSV datasets and the JSON run ledger.

CSV files are UTF-8 with "\n" line endings, a mandatory header and every
real printed with 12 significant digits ("%.12g", never locale-formatted).
Rows are sorted before writing so worker scheduling never shows in the
output. The ledger (see sweep_ledger.example.json) records per-row status
and is written atomically next to the CSV.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

SCHEMA_VERSION = 1

SWEEP_COLUMNS = ("scheme", "alpha", "beta", "sigma2", "rate_bits", "avg_power", "ebn0_db")
BER_COLUMNS = (
    "mode",
    "ratio",
    "alpha",
    "beta",
    "sigma2",
    "n_blocks",
    "ber_x",
    "ber_z",
    "ber_x_genie",
    "ber_z_theory",
)


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    alpha: Optional[float]
    beta: Optional[float]
    sigma2: float
    rate_bits: float
    avg_power: float
    ebn0_db: Optional[float]

    def sort_key(self) -> Tuple[Any, ...]:
        return (self.scheme, -1.0 if self.alpha is None else self.alpha, self.sigma2)

    def cells(self) -> List[str]:
        return [
            self.scheme,
            fmt(self.alpha),
            fmt(self.beta),
            fmt(self.sigma2),
            fmt(self.rate_bits),
            fmt(self.avg_power),
            fmt(self.ebn0_db),
        ]


@dataclass(frozen=True)
class BerRow:
    mode: str
    ratio: float
    alpha: float
    beta: float
    sigma2: float
    n_blocks: int
    ber_x: float
    ber_z: float
    ber_x_genie: float
    ber_z_theory: float

    def sort_key(self) -> Tuple[Any, ...]:
        return (self.mode, self.ratio, self.sigma2)

    def cells(self) -> List[str]:
        return [
            self.mode,
            fmt(self.ratio),
            fmt(self.alpha),
            fmt(self.beta),
            fmt(self.sigma2),
            str(self.n_blocks),
            fmt(self.ber_x),
            fmt(self.ber_z),
            fmt(self.ber_x_genie),
            fmt(self.ber_z_theory),
        ]


def fmt(value: Optional[float]) -> str:
    """12 significant digits; None becomes an empty cell."""
    if value is None:
        return ""
    return "%.12g" % value


def render_csv(header: Iterable[str], rows: Iterable[Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in sorted(rows, key=lambda r: r.sort_key()):
        writer.writerow(row.cells())
    return buf.getvalue()


def _write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_sweep_csv(path: Path, rows: Iterable[SweepRow]) -> None:
    _write_text(path, render_csv(SWEEP_COLUMNS, rows))


def write_ber_csv(path: Path, rows: Iterable[BerRow]) -> None:
    _write_text(path, render_csv(BER_COLUMNS, rows))


def ledger_path_for(csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + ".ledger.json")


def write_ledger(path: Path, payload: Dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, default=str), encoding="utf-8")
    tmp.replace(path)


def build_ledger(command: str, config: Dict[str, Any], csv_path: Optional[Path], runs: List[Dict[str, Any]]) -> Dict[str, Any]:
    ok = sum(1 for r in runs if r.get("status") == "ok")
    return {
        "schema_version": SCHEMA_VERSION,
        "generated_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "command": command,
        "csv_path": str(csv_path) if csv_path else None,
        "config": config,
        "runs": runs,
        "summary": {"ok": ok, "error": len(runs) - ok},
    }
