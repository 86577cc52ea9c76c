#!/usr/bin/env python3
"""
Parametric cross-section of a fluid-actuated segment.

The section is a tube: an outer wall, ``n_chambers`` equal chambers separated
by radial partition walls, and an inextensible central tube that carries the
axial tension. Chambers are annular sectors between the central tube and the
inner wall, minus a half-partition rectangle along each boundary ray.

Morphing under pressure is reduced to two gains (chamber area and lever arm),
each capped by what the section can physically reach: the whole chamber area,
and the central tube pressed against the inner wall.
"""

import itertools
import math
from dataclasses import dataclass, fields
from enum import Enum

import numpy as np
from tqdm import tqdm

from utils import (
    InfeasibleBoundsError,
    DataFormatError,
    key_value_float,
    read_key_values,
    write_key_values,
)

SPEC_FIELDS = (
    "outer_diameter",
    "outer_wall_thickness",
    "partition_thickness",
    "n_chambers",
    "central_tube_od",
    "central_tube_id",
)
CONTINUOUS_FIELDS = tuple(name for name in SPEC_FIELDS if name != "n_chambers")

MIN_CHAMBERS = 2
MAX_CHAMBERS = 8

# Lever arms below this fraction of the outer radius are round-off
_ZERO_LEVER = 1e-12


class MorphKind(Enum):
    UNDEFORMED = "none"
    MORPHED_IDEAL = "ideal"


@dataclass(frozen=True)
class MorphState:
    kind: MorphKind = MorphKind.UNDEFORMED
    area_gain: float = 1.0
    lever_gain: float = 1.0

    def __post_init__(self):
        if self.kind is MorphKind.UNDEFORMED:
            if self.area_gain != 1.0 or self.lever_gain != 1.0:
                raise ValueError("an undeformed section has unit gains")
        elif self.area_gain < 1.0 or self.lever_gain < 1.0:
            raise ValueError(
                f"morphing gains must be >= 1, got ({self.area_gain}, {self.lever_gain})"
            )

    @classmethod
    def undeformed(cls):
        return cls(MorphKind.UNDEFORMED)

    @classmethod
    def ideal(cls, area_gain=2.0, lever_gain=2.0):
        return cls(MorphKind.MORPHED_IDEAL, area_gain, lever_gain)

    @classmethod
    def from_flag(cls, flag, area_gain=2.0, lever_gain=2.0):
        """Map a ``--morph ideal|none`` flag to a state"""
        if flag == MorphKind.UNDEFORMED.value:
            return cls.undeformed()
        if flag == MorphKind.MORPHED_IDEAL.value:
            return cls.ideal(area_gain, lever_gain)
        raise ValueError(f"unknown morph state '{flag}' (expected 'ideal' or 'none')")


@dataclass(frozen=True)
class RequirementsProfile:
    """Application constraints for one segment"""

    max_od: float = 12.0  # mm
    dofs: int = 2
    bending_deg: float = 90.0
    max_pressure: float = 300.0  # kPa
    channel_id: float = 2.0  # mm


DESIGN_PROFILE = RequirementsProfile()


@dataclass(frozen=True)
class CrossSectionSpec:
    outer_diameter: float  # mm
    outer_wall_thickness: float  # mm
    partition_thickness: float  # mm
    n_chambers: int
    central_tube_od: float  # mm
    central_tube_id: float  # mm

    @property
    def inner_wall_radius(self):
        return self.outer_diameter / 2.0 - self.outer_wall_thickness

    @property
    def tube_radius(self):
        return self.central_tube_od / 2.0

    @property
    def max_tube_offset(self):
        """Tube centre displacement when it is pressed against the inner wall"""
        return self.inner_wall_radius - self.tube_radius


# Segment as built: 12 mm OD, 0.8 mm partitions, three chambers, 2 mm working
# channel. Outer wall and tube OD are not reported; 1.0 mm and 3.0 mm are
# assumptions.
REFERENCE_SPEC = CrossSectionSpec(
    outer_diameter=12.0,
    outer_wall_thickness=1.0,
    partition_thickness=0.8,
    n_chambers=3,
    central_tube_od=3.0,
    central_tube_id=2.0,
)


@dataclass(frozen=True)
class SectionGeometry:
    chamber_areas: tuple  # mm^2, one per chamber
    pressurized_area: float  # mm^2
    pressure_centroid: tuple  # (x, y) mm
    tension_center: tuple  # (x, y) mm
    lever_arm: float  # mm

    @property
    def total_chamber_area(self):
        return math.fsum(self.chamber_areas)


def validate_spec(spec, profile=None):
    """
    Check a cross-section against its geometric invariants and, when a
    requirements profile is given, against the application constraints.

    Returns a list of human-readable violations; an empty list means valid.
    """
    violations = []

    if not isinstance(spec.n_chambers, int) or isinstance(spec.n_chambers, bool):
        violations.append(f"n_chambers must be an integer, got {spec.n_chambers!r}")
    elif not MIN_CHAMBERS <= spec.n_chambers <= MAX_CHAMBERS:
        violations.append(
            f"n_chambers must be in [{MIN_CHAMBERS}, {MAX_CHAMBERS}], got {spec.n_chambers}"
        )

    if spec.outer_diameter <= 0:
        violations.append(f"outer diameter must be positive, got {spec.outer_diameter}")
    if spec.outer_wall_thickness <= 0:
        violations.append(
            f"outer wall thickness must be positive, got {spec.outer_wall_thickness}"
        )
    if spec.partition_thickness <= 0:
        violations.append(
            f"partition thickness must be positive, got {spec.partition_thickness}"
        )
    if spec.central_tube_id < 0:
        violations.append(f"central tube ID must be non-negative, got {spec.central_tube_id}")
    if spec.central_tube_od <= spec.central_tube_id:
        violations.append(
            f"central tube OD {spec.central_tube_od} mm must exceed its ID {spec.central_tube_id} mm"
        )

    bore = spec.outer_diameter - 2.0 * spec.outer_wall_thickness
    if bore <= 0:
        violations.append(
            f"inner bore nonpositive: OD {spec.outer_diameter} mm minus two walls of "
            f"{spec.outer_wall_thickness} mm leaves {bore:g} mm"
        )
    elif bore <= spec.central_tube_od:
        violations.append(
            f"central tube OD {spec.central_tube_od} mm does not fit the {bore:g} mm inner bore"
        )

    if not violations:
        violations.extend(_partition_violations(spec))

    if profile is not None:
        if spec.outer_diameter > profile.max_od:
            violations.append(
                f"max OD exceeded: {spec.outer_diameter} mm > {profile.max_od} mm"
            )
        if spec.central_tube_id < profile.channel_id:
            violations.append(
                f"working channel too small: tube ID {spec.central_tube_id} mm < "
                f"{profile.channel_id} mm"
            )
        if (
            profile.dofs >= 2
            and isinstance(spec.n_chambers, int)
            and spec.n_chambers < 3
        ):
            violations.append(
                f"{profile.dofs} DOF need at least 3 chambers, got {spec.n_chambers}"
            )

    return violations


def _partition_violations(spec):
    r_in = spec.tube_radius
    r_out = spec.inner_wall_radius
    n = spec.n_chambers
    t = spec.partition_thickness
    problems = []

    annulus = math.pi * (r_out**2 - r_in**2)
    partitions = n * t * (r_out - r_in)
    if partitions >= annulus:
        problems.append(
            f"partition walls ({partitions:.4g} mm^2) fill the {annulus:.4g} mm^2 annulus"
        )

    # Neighbouring partitions must not overlap where they meet the tube
    if n > 2 and t / 2.0 >= r_in * math.tan(math.pi / n):
        problems.append(
            f"partitions of {t} mm overlap at the central tube (OD {spec.central_tube_od} mm)"
        )
    return problems


def _require_valid(spec):
    violations = validate_spec(spec)
    if violations:
        raise ValueError("invalid cross-section: " + "; ".join(violations))


def annular_sector_properties(r_inner, r_outer, half_angle):
    """
    Area and centroid radius of an annular sector.

    The sector spans ``[-half_angle, half_angle]`` around its bisector, so the
    centroid lies on the bisector.
    """
    if not 0 <= r_inner < r_outer:
        raise ValueError(f"need 0 <= r_inner < r_outer, got ({r_inner}, {r_outer})")
    if not 0 < half_angle <= math.pi:
        raise ValueError(f"need 0 < half_angle <= pi, got {half_angle}")

    area = half_angle * (r_outer**2 - r_inner**2)
    if half_angle == math.pi:
        return area, 0.0
    centroid = (
        2.0 * math.sin(half_angle) / (3.0 * half_angle)
        * (r_outer**3 - r_inner**3) / (r_outer**2 - r_inner**2)
    )
    return area, centroid


def chamber_properties(spec):
    """
    Area (mm^2) and centroid radius (mm) of one chamber.

    The sector between the tube and the inner wall loses a rectangle of
    half the partition thickness along each of its two boundary rays.
    """
    half_angle = math.pi / spec.n_chambers
    r_in = spec.tube_radius
    r_out = spec.inner_wall_radius
    half_t = spec.partition_thickness / 2.0

    sector_area, sector_centroid = annular_sector_properties(r_in, r_out, half_angle)

    strip_area = half_t * (r_out - r_in)
    # strip centroid projected on the chamber bisector
    strip_offset = (r_in + r_out) / 2.0 * math.cos(half_angle) + half_t / 2.0 * math.sin(
        half_angle
    )

    area = sector_area - 2.0 * strip_area
    moment = sector_area * sector_centroid - 2.0 * strip_area * strip_offset
    return area, moment / area


def chamber_bisector(spec, index):
    """Bisector angle of chamber ``index`` in radians; chamber 0 lies on +x"""
    return 2.0 * math.pi * index / spec.n_chambers


def _check_pressurized(spec, pressurized):
    chambers = set(pressurized)
    if not chambers:
        raise ValueError("at least one chamber must be pressurized")
    for index in chambers:
        if not isinstance(index, (int, np.integer)) or not 0 <= index < spec.n_chambers:
            raise ValueError(
                f"chamber index {index!r} out of range for {spec.n_chambers} chambers"
            )
    return sorted(int(i) for i in chambers)


def section_geometry(spec, pressurized, morph=None):
    """
    Pressurized area, pressure centroid, tension centre and lever arm.

    Undeformed: the central tube is concentric and the pressure centroid is
    the area-weighted centroid of the pressurized chambers.

    MorphedIdeal: the pressurized area and lever arm are the undeformed values
    times the morph gains, capped at the total chamber area and at the tube
    pressed against the inner wall. The tube (tension centre) sits against the
    wall opposite the pressure centroid.
    """
    morph = morph or MorphState.undeformed()
    _require_valid(spec)
    chambers = _check_pressurized(spec, pressurized)

    area, radius = chamber_properties(spec)
    areas = (area,) * spec.n_chambers
    total = area * spec.n_chambers

    pressurized_area = math.fsum(areas[i] for i in chambers)
    angles = np.array([chamber_bisector(spec, i) for i in chambers])
    weights = np.array([areas[i] for i in chambers])
    directions = np.column_stack((np.cos(angles), np.sin(angles)))
    centroid = radius * (weights @ directions) / weights.sum()

    lever = float(np.hypot(*centroid))
    if lever < _ZERO_LEVER * spec.outer_diameter:
        lever = 0.0
        centroid = np.zeros(2)
    origin = (0.0, 0.0)

    if morph.kind is MorphKind.UNDEFORMED:
        return SectionGeometry(
            chamber_areas=areas,
            pressurized_area=pressurized_area,
            pressure_centroid=(float(centroid[0]), float(centroid[1])),
            tension_center=origin,
            lever_arm=lever,
        )

    cap = spec.max_tube_offset
    morphed_area = min(pressurized_area * morph.area_gain, total)
    morphed_lever = min(lever * morph.lever_gain, cap)
    if lever == 0.0:
        # symmetric pressurization: nothing pushes the tube sideways
        return SectionGeometry(areas, morphed_area, origin, origin, 0.0)

    unit = centroid / lever
    tension = -cap * unit
    pressure_centroid = tension + morphed_lever * unit
    return SectionGeometry(
        chamber_areas=areas,
        pressurized_area=morphed_area,
        pressure_centroid=(float(pressure_centroid[0]), float(pressure_centroid[1])),
        tension_center=(float(tension[0]), float(tension[1])),
        lever_arm=morphed_lever,
    )


# Single chamber and two adjacent chambers: the two ways to bend toward a side
ACTUATION_PATTERNS = ({0}, {0, 1})


def worst_case_moment_index(spec, morph=None):
    """
    Pressurized area times lever arm (mm^3) in the weakest bending direction.

    The minimum is taken over ACTUATION_PATTERNS. Undeformed three-chamber
    sections give the same value for both patterns; under ideal morphing the
    single chamber is the weaker one, since the pair already fills the area
    cap. With two chambers the adjacent pair is the whole section, which
    cannot bend perpendicular to the partition plane, so the index is zero.
    """
    morph = morph or MorphState.undeformed()
    indices = []
    for chambers in ACTUATION_PATTERNS:
        geom = section_geometry(spec, chambers, morph)
        indices.append(geom.pressurized_area * geom.lever_arm)
    return min(indices)


def geometry_row(geom):
    """Flat mapping of a SectionGeometry for CSV reporting"""
    return {
        "n_chambers": len(geom.chamber_areas),
        "chamber_area_mm2": geom.chamber_areas[0],
        "pressurized_area_mm2": geom.pressurized_area,
        "pressure_centroid_x_mm": geom.pressure_centroid[0],
        "pressure_centroid_y_mm": geom.pressure_centroid[1],
        "tension_center_x_mm": geom.tension_center[0],
        "tension_center_y_mm": geom.tension_center[1],
        "lever_arm_mm": geom.lever_arm,
    }


def _parse_chambers(values, path):
    text = values["n_chambers"]
    try:
        number = float(text)
    except ValueError:
        number = math.nan
    if not number.is_integer():
        raise DataFormatError(f"n_chambers must be an integer, got '{text}'", path)
    return int(number)


def read_spec(path):
    """Read a cross-section from flat key-value text (values in mm)"""
    values = read_key_values(path, allowed=SPEC_FIELDS, required=SPEC_FIELDS)
    kwargs = {
        name: key_value_float(values, name, path) for name in CONTINUOUS_FIELDS
    }
    return CrossSectionSpec(n_chambers=_parse_chambers(values, path), **kwargs)


def write_spec(spec, stream):
    write_key_values(
        [(name, getattr(spec, name)) for name in SPEC_FIELDS], stream
    )


@dataclass(frozen=True)
class SpecBounds:
    """Inclusive (low, high) search range for each cross-section field"""

    outer_diameter: tuple
    outer_wall_thickness: tuple
    partition_thickness: tuple
    n_chambers: tuple
    central_tube_od: tuple
    central_tube_id: tuple

    def __post_init__(self):
        for item in fields(self):
            low, high = getattr(self, item.name)
            if low > high:
                raise ValueError(f"{item.name}: lower bound {low} exceeds upper bound {high}")
        low, high = self.n_chambers
        if int(low) != low or int(high) != high:
            raise ValueError(f"n_chambers bounds must be integers, got {self.n_chambers}")

    @classmethod
    def fixed(cls, spec, **overrides):
        """A box holding ``spec`` only, with optional ranges for some fields"""
        ranges = {name: (getattr(spec, name), getattr(spec, name)) for name in SPEC_FIELDS}
        ranges.update(overrides)
        return cls(**ranges)

    def chamber_counts(self):
        low, high = self.n_chambers
        return range(int(low), int(high) + 1)


def read_bounds(path):
    """Bounds file: ``<field>_min`` / ``<field>_max`` keys for every spec field"""
    keys = [f"{name}_{end}" for name in SPEC_FIELDS for end in ("min", "max")]
    values = read_key_values(path, allowed=keys, required=keys)
    ranges = {
        name: (
            key_value_float(values, f"{name}_min", path),
            key_value_float(values, f"{name}_max", path),
        )
        for name in SPEC_FIELDS
    }
    try:
        return SpecBounds(**ranges)
    except ValueError as e:
        raise DataFormatError(str(e), path) from None


def _is_better(candidate, incumbent):
    """Higher objective wins; near-ties go to the thinner partition"""
    if incumbent is None:
        return True
    value, spec = candidate
    best_value, best_spec = incumbent
    tolerance = 1e-12 * max(1.0, abs(best_value))
    if value > best_value + tolerance:
        return True
    if value >= best_value - tolerance:
        return spec.partition_thickness < best_spec.partition_thickness
    return False


def optimize_section(bounds, profile=None, morph=None, max_iterations=200, progress=False):
    """
    Maximise the worst-case moment index over a box of cross-sections.

    Each chamber count in range is searched separately: a {low, mid, high}
    lattice over the free continuous fields picks the start (midpoint first),
    then a compass search with bound clipping and step halving refines it for
    a fixed iteration budget. The result is deterministic for fixed inputs.
    """
    morph = morph or MorphState.undeformed()
    ranges = {name: getattr(bounds, name) for name in CONTINUOUS_FIELDS}
    free = [name for name in CONTINUOUS_FIELDS if ranges[name][0] < ranges[name][1]]

    def evaluate(values, n):
        spec = CrossSectionSpec(n_chambers=n, **values)
        if validate_spec(spec, profile):
            return None
        return worst_case_moment_index(spec, morph), spec

    def midpoint(name):
        low, high = ranges[name]
        return low if low == high else (low + high) / 2.0

    best = None
    counts = bounds.chamber_counts()
    for n in tqdm(counts, desc="Searching chamber counts", disable=not progress, leave=False):
        start = {name: midpoint(name) for name in CONTINUOUS_FIELDS}
        incumbent = evaluate(start, n)
        levels = [(ranges[name][0], midpoint(name), ranges[name][1]) for name in free]
        for combo in itertools.product(*levels):
            candidate = evaluate({**start, **dict(zip(free, combo))}, n)
            if candidate is not None and _is_better(candidate, incumbent):
                incumbent = candidate
        if incumbent is None:
            continue

        incumbent = _compass_search(incumbent, free, ranges, n, evaluate, max_iterations)
        if _is_better(incumbent, best):
            best = incumbent

    if best is None:
        raise InfeasibleBoundsError(
            "no cross-section within the bounds satisfies the geometric and "
            "requirements constraints"
        )
    return best[1]


def _compass_search(incumbent, free, ranges, n, evaluate, max_iterations):
    steps = {name: (ranges[name][1] - ranges[name][0]) / 4.0 for name in free}
    for _ in range(max_iterations):
        if not free or all(steps[name] <= 1e-9 * (1.0 + abs(ranges[name][1])) for name in free):
            break
        improved = False
        for name in free:
            for sign in (-1.0, 1.0):
                current = getattr(incumbent[1], name)
                low, high = ranges[name]
                trial_value = min(max(current + sign * steps[name], low), high)
                if trial_value == current:
                    continue
                values = {key: getattr(incumbent[1], key) for key in CONTINUOUS_FIELDS}
                values[name] = trial_value
                candidate = evaluate(values, n)
                if candidate is not None and _is_better(candidate, incumbent):
                    incumbent = candidate
                    improved = True
        if not improved:
            steps = {name: step / 2.0 for name, step in steps.items()}
    return incumbent
