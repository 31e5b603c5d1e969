"""Sweep reports: a fixed-column CSV plus a JSON sidecar that can rebuild it.

Code map:
    COLUMNS              CSV column order
    emit_report()        Write ``<path>`` and ``<path>.json``
    load_sidecar()       Rebuild a SweepResult from a sidecar
    measure_rows()       Per-row measure diagnostics in long format
    emit_measures()      Write them beside the report as ``<stem>_measures.csv``
"""

import csv
import json
import math
from dataclasses import asdict, fields
from pathlib import Path

from ..errors import ConfigError
from ..measures.diagnostics import MeasureRow, write_measures_csv
from .sweep import RateFit, SweepConfig, SweepResult, SweepRow

COLUMNS = ["k", "eps", "lambda", "ref_lambda", "rel_gap", "slope_running", "delta_measure", "weakstar_err"]
_ROW_ATTRS = ["k", "eps", "lam", "ref_lambda", "rel_gap", "slope_running", "delta_measure", "weakstar_err"]
MEASURE_DIAGNOSTICS = ["delta_measure", "weakstar_err", "small_mass", "arc_error", "eig_distance", "bound", "c_hat"]


def _cell(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def emit_report(result: SweepResult, path: Path) -> Path:
    """Write the sweep CSV and its sidecar; floats are written with repr so reruns are byte-identical."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in result.rows:
            writer.writerow([_cell(getattr(row, attr)) for attr in _ROW_ATTRS])

    sidecar = {
        "config": result.config.to_dict(),
        "reference": result.reference,
        "reference_kind": result.reference_kind,
        "fit": asdict(result.fit) if result.fit else None,
        "rows": [asdict(row) for row in result.rows],
    }
    with open(path.with_suffix(".json"), "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=2)
    return path


def load_sidecar(path: Path) -> SweepResult:
    """Read ``<path>.json`` (or ``path`` itself if it is the sidecar).

    Raises:
        ConfigError: If the file is missing or not a sweep sidecar.
    """
    path = Path(path)
    sidecar = path if path.suffix == ".json" else path.with_suffix(".json")
    if not sidecar.exists():
        raise ConfigError("output", f"sidecar {sidecar} not found")
    with open(sidecar, "r", encoding="utf-8") as f:
        data = json.load(f)
    try:
        config = SweepConfig(**data["config"])
        row_fields = {f.name for f in fields(SweepRow)}
        rows = [SweepRow(**{key: value for key, value in row.items() if key in row_fields}) for row in data["rows"]]
    except (KeyError, TypeError) as e:
        raise ConfigError("output", f"{sidecar} is not a sweep sidecar: {e}") from e

    fit = RateFit(**data["fit"]) if data.get("fit") else None
    reference = data.get("reference")
    return SweepResult(
        config=config,
        rows=rows,
        reference=None if reference is None or math.isnan(reference) else reference,
        reference_kind=data.get("reference_kind"),
        fit=fit,
    )


def measure_rows(result: SweepResult) -> list[MeasureRow]:
    """Long-format diagnostics of every row; NaN entries are left out."""
    out = []
    for row in result.rows:
        values = {name: getattr(row, name) for name in MEASURE_DIAGNOSTICS}
        values.update({f"weak_{name}": value for name, value in row.weak_terms.items()})
        out.extend(
            MeasureRow(row.k, row.eps, name, float(value)) for name, value in values.items() if not math.isnan(value)
        )
    return out


def emit_measures(result: SweepResult, path: Path) -> Path:
    """Write the per-row diagnostics to ``<stem>_measures.csv`` beside the report ``path``."""
    path = Path(path)
    return write_measures_csv(measure_rows(result), path.with_name(path.stem + "_measures.csv"))
