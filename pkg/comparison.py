#!/usr/bin/env python3
"""
Literature comparison of lateral force at a common outer diameter.

Reported forces are moved to the target diameter with the d^2 law. Forces
that are not active lateral forces (a segment locked by granular jamming,
or an extension force measured on top of a vertical robot) stay in the
table but are flagged.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import pandas as pd

from scaling import scale_force_diameter
from utils import (
    RECORDS_PATH,
    DataFormatError,
    EmptyInputError,
    InsufficientRowsError,
    csv_float,
    read_csv_rows,
    render_frame,
    write_frame_csv,
)

RECORDS_HEADER = ("name", "source", "od_mm", "force_n", "kind", "dofs", "bending_deg", "notes")
TABLE_COLUMNS = ("name", "force_at_target_n", "kind", "flagged")


class ForceKind(Enum):
    LATERAL_ACTIVE = "lateral_active"
    LATERAL_JAMMED = "lateral_jammed"
    EXTENSION = "extension"

    @classmethod
    def parse(cls, text):
        """Accepts ``lateral_active``, ``LateralActive`` or ``lateral-active``"""
        key = text.strip().replace("-", "").replace("_", "").lower()
        for kind in cls:
            if kind.value.replace("_", "") == key:
                return kind
        raise ValueError(
            f"unknown force kind '{text}' (expected one of: "
            f"{', '.join(kind.value for kind in cls)})"
        )


@dataclass(frozen=True)
class DesignRecord:
    name: str
    source: str
    reported_od: float  # mm
    reported_force: float  # N
    force_kind: ForceKind
    dofs: int
    bending_deg: Optional[float] = None
    notes: str = ""

    def __post_init__(self):
        if not self.reported_od > 0:
            raise ValueError(f"{self.name}: reported OD must be positive")
        if self.reported_force < 0:
            raise ValueError(f"{self.name}: reported force must be non-negative")


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    force_at_target: float  # N
    force_kind: ForceKind
    flagged: bool

    def __post_init__(self):
        if self.force_at_target < 0:
            raise ValueError(f"{self.name}: force must be non-negative")


@dataclass(frozen=True)
class ImprovementReport:
    percent: float
    best: ComparisonRow
    baseline: ComparisonRow
    included: tuple  # names of the rows the statistic was taken over
    candidates: tuple  # (label, baseline name, baseline force, percent)

    def describe(self):
        lines = [
            f"{self.best.name} {self.best.force_at_target:.4g} N is {self.percent:.4g}% "
            f"above {self.baseline.name} {self.baseline.force_at_target:.4g} N",
            f"rows considered: {', '.join(self.included)}",
        ]
        for label, name, force, percent in self.candidates:
            lines.append(f"baseline {label}: {name} {force:.4g} N -> {percent:.4g}%")
        return lines


def normalize_record(rec, target_od):
    if not target_od > 0:
        raise ValueError(f"target OD must be positive, got {target_od}")
    return ComparisonRow(
        name=rec.name,
        force_at_target=scale_force_diameter(rec.reported_force, rec.reported_od, target_od),
        force_kind=rec.force_kind,
        flagged=rec.force_kind is not ForceKind.LATERAL_ACTIVE,
    )


def comparison_table(records, target_od):
    """Rows at ``target_od``, strongest first (ties by name)"""
    records = list(records)
    if not records:
        raise EmptyInputError("no design records to compare")
    rows = [normalize_record(rec, target_od) for rec in records]
    return sorted(rows, key=lambda row: (-row.force_at_target, row.name))


def _ranked(rows):
    return sorted(rows, key=lambda row: (-row.force_at_target, row.name))


def _percent_above(best, baseline):
    if baseline.force_at_target <= 0:
        raise InsufficientRowsError(f"baseline {baseline.name} has zero force")
    return (best.force_at_target - baseline.force_at_target) / baseline.force_at_target * 100.0


def improvement_report(table):
    """
    Improvement of the strongest design over the existing highest force.

    Unflagged rows take part, and so does the granular jamming value, since
    it is the existing highest lateral force in the literature set. Extension
    forces never do. The active-only baseline is reported alongside.
    """
    eligible = _ranked(
        row
        for row in table
        if not row.flagged or row.force_kind is ForceKind.LATERAL_JAMMED
    )
    if len(eligible) < 2:
        raise InsufficientRowsError(
            f"need at least 2 comparable rows, got {len(eligible)}"
        )
    best, baseline = eligible[0], eligible[1]
    percent = _percent_above(best, baseline)

    candidates = [("existing highest lateral", baseline.name, baseline.force_at_target, percent)]
    active = [row for row in eligible[1:] if not row.flagged]
    if active and active[0] is not baseline:
        candidates.append(
            (
                "active lateral only",
                active[0].name,
                active[0].force_at_target,
                _percent_above(best, active[0]),
            )
        )
    return ImprovementReport(
        percent=percent,
        best=best,
        baseline=baseline,
        included=tuple(row.name for row in eligible),
        candidates=tuple(candidates),
    )


def relative_improvement(table):
    """Percent by which the best comparable row exceeds the second best"""
    return improvement_report(table).percent


def load_records(path=RECORDS_PATH):
    rows, _ = read_csv_rows(path, RECORDS_HEADER)
    records = []
    for line, row in rows:
        if not row["name"]:
            raise DataFormatError("record name is empty", path, line)
        try:
            dofs_text = row["dofs"]
            dofs = int(dofs_text) if dofs_text else 0
            records.append(
                DesignRecord(
                    name=row["name"],
                    source=row["source"],
                    reported_od=csv_float(row, "od_mm", path, line),
                    reported_force=csv_float(row, "force_n", path, line),
                    force_kind=ForceKind.parse(row["kind"]),
                    dofs=dofs,
                    bending_deg=csv_float(row, "bending_deg", path, line, optional=True),
                    notes=row["notes"],
                )
            )
        except ValueError as e:
            if isinstance(e, DataFormatError):
                raise
            raise DataFormatError(str(e), path, line) from None
    return records


def write_records(records, stream):
    frame = pd.DataFrame(
        {
            "name": [r.name for r in records],
            "source": [r.source for r in records],
            "od_mm": [r.reported_od for r in records],
            "force_n": [r.reported_force for r in records],
            "kind": [r.force_kind.value for r in records],
            "dofs": [r.dofs for r in records],
            "bending_deg": [r.bending_deg for r in records],
            "notes": [r.notes for r in records],
        },
        columns=list(RECORDS_HEADER),
    )
    write_frame_csv(frame, stream)


def table_frame(rows):
    return pd.DataFrame(
        {
            "name": [row.name for row in rows],
            "force_at_target_n": [row.force_at_target for row in rows],
            "kind": [row.force_kind.value for row in rows],
            "flagged": [row.flagged for row in rows],
        },
        columns=list(TABLE_COLUMNS),
    )


def render_table(rows):
    """Aligned plain-text table, forces at 4 significant digits"""
    return render_frame(table_frame(rows))


def rows_to_csv(rows, stream):
    """Plot-data CSV of the table at full precision"""
    write_frame_csv(table_frame(rows), stream)
