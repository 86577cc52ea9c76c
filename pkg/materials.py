#!/usr/bin/env python3
"""
Hyperelastic rubber properties and material ranking.

The stiffness scalar used for E_r everywhere is the Neo-Hookean c10
coefficient in kPa. Materials without a tabulated c10 stay in the catalogue
but are excluded from every scaling or ranking computation.

Elastosil M4601 is stored with c10 = 131.2 +/- 24.3 kPa (mean of a set of
tests). A Yeoh-law characterisation gives c10 = 110 kPa with c20 = 20 kPa;
that value is not used anywhere here.
"""

from dataclasses import dataclass
from typing import Optional

import pandas as pd

from utils import (
    MATERIALS_PATH,
    DataFormatError,
    csv_float,
    read_csv_rows,
    write_frame_csv,
)

MATERIALS_HEADER = (
    "name",
    "c10_kpa",
    "ultimate_stress_mpa",
    "ultimate_strain_pct",
    "shore",
    "poisson",
)


@dataclass(frozen=True)
class Material:
    """A hyperelastic rubber. Strain is a fraction (7.00 means 700 %)."""

    name: str
    c10: Optional[float]  # kPa
    ultimate_stress: float  # MPa
    ultimate_strain: float
    shore_hardness: str
    poisson_ratio: Optional[float] = None
    c10_uncertainty: Optional[float] = None  # kPa

    def __post_init__(self):
        if self.c10 is not None and not self.c10 > 0:
            raise ValueError(f"{self.name}: c10 must be positive, got {self.c10}")
        if not self.ultimate_stress > 0:
            raise ValueError(
                f"{self.name}: ultimate stress must be positive, got {self.ultimate_stress}"
            )
        if not self.ultimate_strain > 0:
            raise ValueError(
                f"{self.name}: ultimate strain must be positive, got {self.ultimate_strain}"
            )
        if self.c10_uncertainty is not None and self.c10_uncertainty < 0:
            raise ValueError(f"{self.name}: c10 uncertainty must be non-negative")

    @property
    def has_stiffness(self):
        return self.c10 is not None


_SILICONES = (
    Material("DragonSkin 10", 42.5, 2.75, 6.63, "10A"),
    Material("DragonSkin 20", None, 3.8, 6.20, "20A"),
    Material("DragonSkin 30", None, 3.45, 3.84, "30A"),
    Material("Elastosil M4601", 131.2, 6.5, 7.00, "28A", c10_uncertainty=24.3),
    Material("Ecoflex OO-30", 12.7, 1.38, 9.00, "OO30"),
    Material("Ecoflex OO-50", 25.0, 2.17, 9.80, "OO50"),
)


def builtin_materials():
    """The six catalogued rubbers, in table order"""
    return list(_SILICONES)


def rank_materials(candidates, required_strain):
    """
    Rank materials for supporting the highest wrenches.

    At equal non-dimensional groups the supportable wrench scales with the
    rubber stiffness, so materials that reach ``required_strain`` are sorted
    by descending c10, then descending ultimate strain, then name. Materials
    without c10 are dropped. An empty list is a valid answer.
    """
    if required_strain < 0:
        raise ValueError(f"required strain must be non-negative, got {required_strain}")

    eligible = {}
    for material in candidates:
        if not material.has_stiffness:
            continue
        if material.ultimate_strain < required_strain:
            continue
        eligible.setdefault(material.name, material)

    return sorted(
        eligible.values(),
        key=lambda m: (-m.c10, -m.ultimate_strain, m.name),
    )


def find_material(materials, name):
    """Case-insensitive lookup by name"""
    wanted = name.strip().lower()
    for material in materials:
        if material.name.lower() == wanted:
            return material
    available = ", ".join(m.name for m in materials)
    raise ValueError(f"Unknown material '{name}'. Available: {available}")


def c10_range(material):
    """(low, high) c10 band in kPa from the characterisation uncertainty"""
    if not material.has_stiffness:
        raise ValueError(f"{material.name} has no tabulated c10")
    spread = material.c10_uncertainty or 0.0
    return material.c10 - spread, material.c10 + spread


def load_materials(path=MATERIALS_PATH):
    """Load materials from CSV; strain is given in percent in the file"""
    rows, _ = read_csv_rows(path, MATERIALS_HEADER)
    materials = []
    for line, row in rows:
        if not row["name"]:
            raise DataFormatError("material name is empty", path, line)
        strain_pct = csv_float(row, "ultimate_strain_pct", path, line)
        try:
            materials.append(
                Material(
                    name=row["name"],
                    c10=csv_float(row, "c10_kpa", path, line, optional=True),
                    ultimate_stress=csv_float(row, "ultimate_stress_mpa", path, line),
                    ultimate_strain=strain_pct / 100.0,
                    shore_hardness=row["shore"],
                    poisson_ratio=csv_float(row, "poisson", path, line, optional=True),
                )
            )
        except ValueError as e:
            if isinstance(e, DataFormatError):
                raise
            raise DataFormatError(str(e), path, line) from None
    return materials


def materials_frame(materials):
    return pd.DataFrame(
        {
            "name": [m.name for m in materials],
            "c10_kpa": [m.c10 for m in materials],
            "ultimate_stress_mpa": [m.ultimate_stress for m in materials],
            "ultimate_strain_pct": [round(m.ultimate_strain * 100.0, 9) for m in materials],
            "shore": [m.shore_hardness for m in materials],
            "poisson": [m.poisson_ratio for m in materials],
        },
        columns=list(MATERIALS_HEADER),
    )


def write_materials(materials, stream):
    write_frame_csv(materials_frame(materials), stream)
