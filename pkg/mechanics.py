#!/usr/bin/env python3
"""
Bending moment and lateral tip force of a pressurised segment.

The model is quasi-static and load-free: the pressure acting on the
pressurised chamber area, at the lever arm from the central tube, gives the
base moment; the blocked lateral force at the tip of a cantilevered segment
is that moment over the segment length. No elastic restoring term is
subtracted, so predictions sit above measurements.

Units are kPa, mm, N and N·mm. 1 kPa·mm^3 = 1e-3 N·mm.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from geometry import CrossSectionSpec, MorphState, section_geometry, validate_spec
from materials import Material
from utils import (
    KPA_TO_N_PER_MM2,
    DataFormatError,
    PressureLimitError,
    csv_float,
    read_csv_rows,
    write_frame_csv,
)

CURVE_HEADER = ("pressure_kpa", "force_n")

# The segment length is not reported; 30 mm (aspect ratio 2.5 at 12 mm OD)
# is an assumption.
DEFAULT_SEGMENT_LENGTH_MM = 30.0

DOFS_PER_SEGMENT = 2


class Provenance(Enum):
    MEASURED = "measured"
    PREDICTED = "predicted"
    SCALED = "scaled"


@dataclass(frozen=True)
class ComponentStiffnesses:
    """
    Stiffness (kPa) and Poisson ratio of the non-rubber components.

    Recorded for completeness; the fibre and Poisson groups have negligible
    effect and the built design has an inextensible tube and rubber partitions.
    """

    fiber: Optional[float] = None
    central_tube: Optional[float] = None
    partition: Optional[float] = None
    fiber_poisson: Optional[float] = None
    central_tube_poisson: Optional[float] = None
    partition_poisson: Optional[float] = None


@dataclass(frozen=True)
class SegmentDesign:
    section: CrossSectionSpec
    length: float  # mm
    material: Material
    max_pressure: float  # kPa
    component_stiffnesses: Optional[ComponentStiffnesses] = None

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"segment length must be positive, got {self.length}")
        if not self.max_pressure > 0:
            raise ValueError(f"max pressure must be positive, got {self.max_pressure}")


def validate_design(design, profile=None):
    """Section violations plus the profile pressure limit"""
    violations = validate_spec(design.section, profile)
    if profile is not None and design.max_pressure > profile.max_pressure:
        violations.append(
            f"max pressure {design.max_pressure} kPa exceeds the "
            f"{profile.max_pressure} kPa limit"
        )
    return violations


@dataclass(frozen=True)
class ForcePressureCurve:
    samples: tuple  # ((pressure kPa, force N), ...)
    provenance: Provenance = Provenance.MEASURED

    def __post_init__(self):
        samples = tuple((float(p), float(f)) for p, f in self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 2:
            raise ValueError(f"a curve needs at least 2 samples, got {len(samples)}")
        pressures = np.array([p for p, _ in samples])
        forces = np.array([f for _, f in samples])
        if not np.all(np.isfinite(pressures)) or not np.all(np.isfinite(forces)):
            raise ValueError("curve samples must be finite")
        if np.any(pressures < 0):
            raise ValueError("curve pressures must be non-negative")
        if np.any(forces < 0):
            raise ValueError("curve forces must be non-negative")
        if np.any(np.diff(pressures) <= 0):
            raise ValueError("curve pressures must be strictly increasing")

    @property
    def pressures(self):
        return np.array([p for p, _ in self.samples])

    @property
    def forces(self):
        return np.array([f for _, f in self.samples])

    def __len__(self):
        return len(self.samples)


def curve_endpoint(curve):
    """Last (pressure, force) sample"""
    return curve.samples[-1]


def bending_moment(pressure, geom):
    """Pressure × pressurised area × lever arm, in N·mm"""
    if pressure < 0:
        raise ValueError(f"pressure must be non-negative, got {pressure}")
    return pressure * KPA_TO_N_PER_MM2 * geom.pressurized_area * geom.lever_arm


def lateral_tip_force(moment, length):
    """Blocked tip force (N) of a cantilever of ``length`` mm under a base moment"""
    if not length > 0:
        raise ValueError(f"segment length must be positive, got {length}")
    return moment / length


def stacked_force(single_segment_force, n_segments):
    """
    Tip force of ``n_segments`` identical segments in series.

    The stack is n times longer, so the same base moment supports 1/n of the
    single-segment force.
    """
    if int(n_segments) != n_segments or n_segments < 1:
        raise ValueError(f"need at least one segment, got {n_segments}")
    return single_segment_force / n_segments


def stacked_dofs(n_segments):
    if int(n_segments) != n_segments or n_segments < 1:
        raise ValueError(f"need at least one segment, got {n_segments}")
    return DOFS_PER_SEGMENT * int(n_segments)


def predicted_curve(design, pressures, pressurized, morph=None):
    """Model force at each pressure; linear in pressure by construction"""
    morph = morph or MorphState.undeformed()
    over = [p for p in pressures if p > design.max_pressure]
    if over:
        raise PressureLimitError(
            f"pressure {max(over):g} kPa exceeds the {design.max_pressure:g} kPa limit "
            f"of the design"
        )
    geom = section_geometry(design.section, pressurized, morph)
    samples = [
        (p, lateral_tip_force(bending_moment(p, geom), design.length)) for p in pressures
    ]
    return ForcePressureCurve(tuple(samples), Provenance.PREDICTED)


def read_curve(path):
    """Read a force-pressure CSV; ``# provenance=`` sets the provenance"""
    rows, metadata = read_csv_rows(path, CURVE_HEADER)
    try:
        provenance = Provenance(metadata.get("provenance", Provenance.MEASURED.value))
    except ValueError:
        raise DataFormatError(
            f"unknown provenance '{metadata['provenance']}'", path, 1
        ) from None

    samples = []
    previous = None
    for line, row in rows:
        pressure = csv_float(row, "pressure_kpa", path, line)
        force = csv_float(row, "force_n", path, line)
        if pressure < 0 or force < 0:
            raise DataFormatError("pressure and force must be non-negative", path, line)
        if previous is not None and pressure <= previous:
            raise DataFormatError(
                f"pressure {pressure:g} kPa is not above the previous {previous:g} kPa",
                path,
                line,
            )
        previous = pressure
        samples.append((pressure, force))

    if len(samples) < 2:
        raise DataFormatError(f"a curve needs at least 2 samples, got {len(samples)}", path)
    return ForcePressureCurve(tuple(samples), provenance)


def curve_frame(curve):
    return pd.DataFrame(list(curve.samples), columns=list(CURVE_HEADER), dtype=float)


def write_curve(curve, stream):
    stream.write(f"# provenance={curve.provenance.value}\n")
    write_frame_csv(curve_frame(curve), stream)
