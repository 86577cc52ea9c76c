#!/usr/bin/env python3
"""
Non-dimensional groups and similarity transforms.

Geometrically equivalent segments behave alike when p/E_r and F/(E_r d^2)
(plus E_c/E_r and E_p/E_r where those components differ from the rubber)
are equal. So at fixed material the supportable force grows with d^2 while
the operating pressure does not change, and across materials both pressure
and force scale with the stiffness ratio. Gravity is not part of F, and the
fibre stiffness and Poisson ratio groups are neglected.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from mechanics import ForcePressureCurve, Provenance
from utils import (
    KPA_TO_N_PER_MM2,
    DataFormatError,
    DegenerateCurveError,
    NoOverlapError,
    key_value_float,
    read_key_values,
    write_key_values,
)

FIT_RATIO_RANGE = (1e-2, 1e2)
FIT_MIN_SAMPLES = 3
_SCAN_POINTS = 1601
_GOLDEN_TOL = 1e-12

PARAM_KEYS = ("pressure_kpa", "force_n", "diameter_mm", "er_kpa", "ec_kpa", "ep_kpa")
TRANSFORM_KEYS = ("diameter_ratio", "stiffness_ratio")


@dataclass(frozen=True)
class PiGroups:
    p_over_er: float
    f_over_er_d2: float
    ec_over_er: Optional[float] = None
    ep_over_er: Optional[float] = None

    def __post_init__(self):
        for value in (self.p_over_er, self.f_over_er_d2, self.ec_over_er, self.ep_over_er):
            if value is not None and not math.isfinite(value):
                raise ValueError("non-dimensional groups must be finite")
        if self.f_over_er_d2 < 0:
            raise ValueError(f"F/(E_r d^2) must be non-negative, got {self.f_over_er_d2}")


@dataclass(frozen=True)
class ScalingTransform:
    diameter_ratio: float
    stiffness_ratio: float

    def __post_init__(self):
        if not self.diameter_ratio > 0 or not self.stiffness_ratio > 0:
            raise ValueError(
                f"scaling ratios must be positive, got ({self.diameter_ratio}, "
                f"{self.stiffness_ratio})"
            )

    @property
    def pressure_scale(self):
        return self.stiffness_ratio

    @property
    def force_scale(self):
        return self.stiffness_ratio * self.diameter_ratio**2


@dataclass(frozen=True)
class DesignParameters:
    pressure: float  # kPa
    force: float  # N
    diameter: float  # mm
    er: float  # kPa
    ec: Optional[float] = None  # kPa
    ep: Optional[float] = None  # kPa


def pi_groups(pressure, force, diameter, er, ec=None, ep=None):
    if not er > 0:
        raise ValueError(f"rubber stiffness must be positive, got {er}")
    if not diameter > 0:
        raise ValueError(f"diameter must be positive, got {diameter}")
    return PiGroups(
        p_over_er=pressure / er,
        f_over_er_d2=force / (er * KPA_TO_N_PER_MM2 * diameter**2),
        ec_over_er=None if ec is None else ec / er,
        ep_over_er=None if ep is None else ep / er,
    )


def params_pi_groups(params):
    return pi_groups(
        params.pressure, params.force, params.diameter, params.er, params.ec, params.ep
    )


def apply_transform(params, transform):
    """Map a design to its similar counterpart; the Pi groups are unchanged"""
    s = transform.stiffness_ratio
    return DesignParameters(
        pressure=params.pressure * s,
        force=params.force * s * transform.diameter_ratio**2,
        diameter=params.diameter * transform.diameter_ratio,
        er=params.er * s,
        ec=None if params.ec is None else params.ec * s,
        ep=None if params.ep is None else params.ep * s,
    )


def scale_force_diameter(force, d_from, d_to):
    """Force at another diameter, same material and deformation: F × (d_to/d_from)^2"""
    if not d_from > 0 or not d_to > 0:
        raise ValueError(f"diameters must be positive, got ({d_from}, {d_to})")
    return force * (d_to / d_from) ** 2


def scale_curve_diameter(curve, d_from, d_to):
    """Pressures are scale-invariant; forces follow the d^2 law"""
    if not d_from > 0 or not d_to > 0:
        raise ValueError(f"diameters must be positive, got ({d_from}, {d_to})")
    factor = (d_to / d_from) ** 2
    return ForcePressureCurve(
        tuple((p, f * factor) for p, f in curve.samples), Provenance.SCALED
    )


def scale_curve_material(curve, c10_from, c10_to):
    """Both pressure and force scale with the stiffness ratio c10_to/c10_from"""
    if not c10_from > 0 or not c10_to > 0:
        raise ValueError(f"stiffnesses must be positive, got ({c10_from}, {c10_to})")
    ratio = c10_to / c10_from
    return ForcePressureCurve(
        tuple((p * ratio, f * ratio) for p, f in curve.samples), Provenance.SCALED
    )


@dataclass(frozen=True)
class FitReport:
    ratio: float
    residual_n: float
    overlap_min_kpa: float
    overlap_max_kpa: float
    n_points: int


class _ScaledResidual:
    """
    RMS force gap between curve_a scaled by r and curve_b.

    ``at_samples`` compares at curve_b's own samples and needs
    FIT_MIN_SAMPLES of them inside the scaled range. ``on_overlap`` compares
    at the ends of the shared pressure range and every sample of either
    curve strictly inside it; it only needs the range to be nonempty.
    Both return ``(rms, counts)`` with ``inf`` where a ratio does not qualify.
    """

    def __init__(self, curve_a, curve_b):
        self.a_p = curve_a.pressures
        self.a_f = curve_a.forces
        self.b_p = curve_b.pressures
        self.b_f = curve_b.forces

    def _scaled_a(self, ratios, pressures):
        # curve_a scaled by r, read at p: r * a(p / r)
        return ratios[:, None] * np.interp(pressures / ratios[:, None], self.a_p, self.a_f)

    @staticmethod
    def _rms(squared, mask):
        counts = mask.sum(axis=1)
        rms = np.sqrt(np.where(mask, squared, 0.0).sum(axis=1) / np.maximum(counts, 1))
        return rms, counts

    def at_samples(self, ratios):
        ratios = np.atleast_1d(np.asarray(ratios, dtype=float))
        pressures = np.broadcast_to(self.b_p, (len(ratios), len(self.b_p)))
        unscaled = pressures / ratios[:, None]
        inside = (unscaled >= self.a_p[0]) & (unscaled <= self.a_p[-1])
        squared = (self._scaled_a(ratios, pressures) - self.b_f[None, :]) ** 2
        rms, counts = self._rms(squared, inside)
        return np.where(counts >= FIT_MIN_SAMPLES, rms, np.inf), counts

    def on_overlap(self, ratios):
        ratios = np.atleast_1d(np.asarray(ratios, dtype=float))
        low, high = self.bounds(ratios)
        shared = high > low
        knots = np.concatenate(
            (
                ratios[:, None] * self.a_p[None, :],
                np.broadcast_to(self.b_p, (len(ratios), len(self.b_p))),
            ),
            axis=1,
        )
        pressures = np.concatenate((low[:, None], high[:, None], knots), axis=1)
        mask = np.concatenate(
            (
                shared[:, None],
                shared[:, None],
                (knots > low[:, None]) & (knots < high[:, None]),
            ),
            axis=1,
        )
        target = np.interp(pressures, self.b_p, self.b_f)
        squared = (self._scaled_a(ratios, pressures) - target) ** 2
        rms, counts = self._rms(squared, mask)
        return np.where(shared, rms, np.inf), counts

    def bounds(self, ratios):
        ratios = np.asarray(ratios, dtype=float)
        low = np.maximum(self.a_p[0] * ratios, self.b_p[0])
        high = np.minimum(self.a_p[-1] * ratios, self.b_p[-1])
        return low, high


def fit_report(curve_a, curve_b):
    """
    Stiffness ratio r that best maps curve_a onto curve_b.

    curve_a is scaled by r in pressure and force and interpolated linearly at
    the pressures of curve_b; only samples of curve_b inside the scaled range
    count, and at least FIT_MIN_SAMPLES of them must. When no ratio keeps
    that many inside (short curves that do not start at zero), both curves
    are compared over their shared pressure range instead. The search runs on
    u = ln(r / r_min): a scan over the whole range brackets the minimum, then
    golden-section search refines it.
    """
    for label, curve in (("first", curve_a), ("second", curve_b)):
        if len(curve) < FIT_MIN_SAMPLES:
            raise DegenerateCurveError(
                f"{label} curve has {len(curve)} samples, at least {FIT_MIN_SAMPLES} needed"
            )

    residual = _ScaledResidual(curve_a, curve_b)
    r_min, r_max = FIT_RATIO_RANGE
    grid = np.linspace(0.0, math.log(r_max / r_min), _SCAN_POINTS)
    measure = residual.at_samples
    values, _ = measure(r_min * np.exp(grid))
    if not np.isfinite(values).any():
        measure = residual.on_overlap
        values, _ = measure(r_min * np.exp(grid))
    if not np.isfinite(values).any():
        raise NoOverlapError(
            "the curves share no pressure range for any stiffness ratio in "
            f"[{r_min:g}, {r_max:g}]"
        )

    k = int(np.argmin(values))
    best_u, best_value = grid[k], values[k]
    if 0 < k < len(grid) - 1 and values[k] < values[k - 1] and values[k] < values[k + 1]:

        def objective(u):
            return float(measure(r_min * math.exp(u))[0][0])

        result = minimize_scalar(
            objective,
            bracket=(grid[k - 1], grid[k], grid[k + 1]),
            method="golden",
            tol=_GOLDEN_TOL,
        )
        if result.fun <= best_value:
            best_u, best_value = float(result.x), float(result.fun)

    ratio = r_min * math.exp(best_u)
    low, high = residual.bounds(ratio)
    count = int(measure(ratio)[1][0])
    return FitReport(
        ratio=ratio,
        residual_n=float(best_value),
        overlap_min_kpa=float(low),
        overlap_max_kpa=float(high),
        n_points=count,
    )


def fit_stiffness_ratio(curve_a, curve_b):
    """(ratio, RMS residual in N) of the best stiffness scaling from a to b"""
    report = fit_report(curve_a, curve_b)
    return report.ratio, report.residual_n


def geometric_equivalence_warnings(d_a, length_a, d_b, length_b, tolerance=0.05):
    """
    Warn when two designs do not share their length/diameter aspect ratio.

    Scaling between them is then only approximate; shorter designs carry
    comparatively higher lateral force.
    """
    for value in (d_a, length_a, d_b, length_b):
        if not value > 0:
            raise ValueError(f"diameters and lengths must be positive, got {value}")
    aspect_a = length_a / d_a
    aspect_b = length_b / d_b
    mismatch = abs(aspect_a - aspect_b) / max(aspect_a, aspect_b)
    if mismatch <= tolerance:
        return []
    return [
        f"designs are not geometrically equivalent: aspect ratio {aspect_a:.4g} vs "
        f"{aspect_b:.4g} ({mismatch:.1%} apart); scaled forces are approximate"
    ]


def read_params(path):
    values = read_key_values(path, allowed=PARAM_KEYS, required=PARAM_KEYS[:4])
    return DesignParameters(
        pressure=key_value_float(values, "pressure_kpa", path),
        force=key_value_float(values, "force_n", path),
        diameter=key_value_float(values, "diameter_mm", path),
        er=key_value_float(values, "er_kpa", path),
        ec=key_value_float(values, "ec_kpa", path) if "ec_kpa" in values else None,
        ep=key_value_float(values, "ep_kpa", path) if "ep_kpa" in values else None,
    )


def write_params(params, stream):
    pairs = [
        ("pressure_kpa", params.pressure),
        ("force_n", params.force),
        ("diameter_mm", params.diameter),
        ("er_kpa", params.er),
    ]
    if params.ec is not None:
        pairs.append(("ec_kpa", params.ec))
    if params.ep is not None:
        pairs.append(("ep_kpa", params.ep))
    write_key_values(pairs, stream)


def read_transform(path):
    values = read_key_values(path, allowed=TRANSFORM_KEYS, required=TRANSFORM_KEYS)
    try:
        return ScalingTransform(
            diameter_ratio=key_value_float(values, "diameter_ratio", path),
            stiffness_ratio=key_value_float(values, "stiffness_ratio", path),
        )
    except ValueError as e:
        if isinstance(e, DataFormatError):
            raise
        raise DataFormatError(str(e), path) from None


def write_transform(transform, stream):
    write_key_values(
        [
            ("diameter_ratio", transform.diameter_ratio),
            ("stiffness_ratio", transform.stiffness_ratio),
        ],
        stream,
    )


def fit_frame_row(report):
    return {
        "ratio": report.ratio,
        "residual_n": report.residual_n,
        "overlap_min_kpa": report.overlap_min_kpa,
        "overlap_max_kpa": report.overlap_max_kpa,
        "n_points": report.n_points,
    }
