#!/usr/bin/env python3
"""
Soft Segment Force Toolkit - Main Entry Point

Predicts, scales and compares the lateral force of fluid-actuated soft
manipulator segments.

Modules:
- utils.py: Paths, exceptions, status output and file plumbing
- materials.py: Hyperelastic rubber catalogue and material ranking
- geometry.py: Parametric cross-section, lever arm and section optimizer
- mechanics.py: Bending moment, lateral tip force and force-pressure curves
- scaling.py: Non-dimensional groups, similarity transforms, stiffness fits
- comparison.py: Literature comparison at a common outer diameter
"""

import argparse
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import pandas as pd

import utils
from comparison import comparison_table, improvement_report, load_records, render_table, rows_to_csv
from geometry import (
    DESIGN_PROFILE,
    MorphState,
    RequirementsProfile,
    optimize_section,
    read_bounds,
    read_spec,
    validate_spec,
    write_spec,
)
from materials import (
    builtin_materials,
    find_material,
    load_materials,
    materials_frame,
    rank_materials,
    write_materials,
)
from mechanics import (
    DEFAULT_SEGMENT_LENGTH_MM,
    SegmentDesign,
    curve_endpoint,
    predicted_curve,
    read_curve,
    validate_design,
    write_curve,
)
from scaling import (
    fit_frame_row,
    fit_report,
    geometric_equivalence_warnings,
    scale_curve_diameter,
    scale_curve_material,
)
from utils import (
    REFERENCE_SPEC_PATH,
    RECORDS_PATH,
    ConfigError,
    InfeasibleBoundsError,
    InsufficientRowsError,
    NoOverlapError,
    read_key_values,
    render_frame,
    status,
    warn,
    write_frame_csv,
)

CONFIG_KEYS = (
    "max_od_mm",
    "dofs",
    "bending_deg",
    "max_pressure_kpa",
    "channel_id_mm",
    "materials_path",
    "records_path",
    "curve_path",
    "target_od_mm",
    "area_gain",
    "lever_gain",
)

DEFAULT_MATERIAL = "Elastosil M4601"

# Errors that end a command with a message and exit code 1
KNOWN_ERRORS = (FileNotFoundError, ValueError, NoOverlapError, InfeasibleBoundsError)


@dataclass(frozen=True)
class RunConfig:
    profile: RequirementsProfile = DESIGN_PROFILE
    materials_path: Optional[Path] = None  # None: built-in catalogue
    records_path: Path = RECORDS_PATH
    curve_path: Optional[Path] = None
    target_od: float = 12.0  # mm
    area_gain: float = 2.0
    lever_gain: float = 2.0


def _config_float(values, key, default, path):
    if key not in values:
        return default
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"{path}: '{key}' must be a number, got '{values[key]}'") from None


def load_config(path=None):
    """
    Load a run config from flat ``key=value`` text.

    Missing keys take the default requirements profile; relative paths are
    resolved against the directory of the config file.
    """
    if path is None:
        return RunConfig()

    path = Path(path)
    values = read_key_values(path)
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(
            f"{path}: unknown config key '{unknown[0]}' "
            f"(expected one of: {', '.join(CONFIG_KEYS)})"
        )

    dofs = _config_float(values, "dofs", DESIGN_PROFILE.dofs, path)
    if not float(dofs).is_integer() or dofs < 1:
        raise ConfigError(f"{path}: 'dofs' must be a positive integer, got '{values['dofs']}'")

    profile = RequirementsProfile(
        max_od=_config_float(values, "max_od_mm", DESIGN_PROFILE.max_od, path),
        dofs=int(dofs),
        bending_deg=_config_float(values, "bending_deg", DESIGN_PROFILE.bending_deg, path),
        max_pressure=_config_float(values, "max_pressure_kpa", DESIGN_PROFILE.max_pressure, path),
        channel_id=_config_float(values, "channel_id_mm", DESIGN_PROFILE.channel_id, path),
    )

    def resolve(key, default):
        if key not in values:
            return default
        candidate = Path(values[key])
        return candidate if candidate.is_absolute() else path.parent / candidate

    config = RunConfig(
        profile=profile,
        materials_path=resolve("materials_path", None),
        records_path=resolve("records_path", RECORDS_PATH),
        curve_path=resolve("curve_path", None),
        target_od=_config_float(values, "target_od_mm", 12.0, path),
        area_gain=_config_float(values, "area_gain", 2.0, path),
        lever_gain=_config_float(values, "lever_gain", 2.0, path),
    )
    if not config.target_od > 0:
        raise ConfigError(f"{path}: 'target_od_mm' must be positive, got {config.target_od}")
    if config.area_gain < 1.0 or config.lever_gain < 1.0:
        raise ConfigError(f"{path}: morph gains must be >= 1")
    if profile.max_pressure <= 0 or profile.max_od <= 0:
        raise ConfigError(f"{path}: profile limits must be positive")
    return config


@contextmanager
def output_stream(path):
    """Yield stdout, or a UTF-8 file with LF line endings when a path is given"""
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        yield handle


def parse_number_list(text, cast=float):
    """Parse ``"0,50,100"`` into a list of numbers"""
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError(f"expected a comma-separated list, got '{text}'")
    try:
        return [cast(item) for item in items]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of numbers, got '{text}'") from None


def catalogue(args, config):
    path = getattr(args, "file", None) or config.materials_path
    if path is None:
        return builtin_materials()
    status(f"🔍 Loading materials from {path}")
    return load_materials(path)


def cmd_materials(args, config):
    materials = catalogue(args, config)
    if args.rank:
        if args.strain is None:
            raise ValueError("--rank needs --strain <percent>")
        materials = rank_materials(materials, args.strain / 100.0)
        status(f"✅ {len(materials)} material(s) reach {args.strain:g}% strain")
    elif args.strain is not None:
        raise ValueError("--strain only applies together with --rank")

    with output_stream(args.out) as stream:
        if args.out is None:
            stream.write(render_frame(materials_frame(materials)))
        else:
            write_materials(materials, stream)
    return 0


def cmd_predict(args, config):
    section = read_spec(args.spec)
    material = find_material(catalogue(args, config), args.material)
    pressures = parse_number_list(args.pressures)
    chambers = parse_number_list(args.chambers, int)
    morph = MorphState.from_flag(args.morph, config.area_gain, config.lever_gain)

    design = SegmentDesign(
        section=section,
        length=args.length,
        material=material,
        max_pressure=config.profile.max_pressure,
    )
    for problem in validate_design(design, config.profile):
        warn(problem)

    status(f"🔍 Predicting {len(pressures)} pressure(s), chambers {chambers}, morph {args.morph}")
    curve = predicted_curve(design, pressures, set(chambers), morph)
    with output_stream(args.out) as stream:
        write_curve(curve, stream)

    pressure, force = curve_endpoint(curve)
    status(f"✅ {force:.4g} N at {pressure:.4g} kPa ({material.name})")
    return 0


def cmd_scale(args, config):
    path = args.curve or config.curve_path
    if path is None:
        raise ValueError("no curve given (pass a CSV path or set curve_path in the config)")

    by_material = args.c10_from is not None or args.c10_to is not None
    by_diameter = args.d_from is not None or args.d_to is not None
    if by_material == by_diameter:
        raise ValueError("give exactly one of --c10-from/--c10-to or --d-from/--d-to")
    if by_material and (args.c10_from is None or args.c10_to is None):
        raise ValueError("--c10-from and --c10-to go together")
    if by_diameter and (args.d_from is None or args.d_to is None):
        raise ValueError("--d-from and --d-to go together")

    curve = read_curve(path)
    if by_material:
        scaled = scale_curve_material(curve, args.c10_from, args.c10_to)
        status(f"🔍 Scaling by stiffness ratio {args.c10_to / args.c10_from:.4g}")
    else:
        scaled = scale_curve_diameter(curve, args.d_from, args.d_to)
        status(f"🔍 Scaling forces by (d ratio)^2 = {(args.d_to / args.d_from) ** 2:.4g}")

    if args.length_from is not None and args.length_to is not None:
        d_from = args.d_from if by_diameter else 1.0
        d_to = args.d_to if by_diameter else 1.0
        for message in geometric_equivalence_warnings(d_from, args.length_from, d_to, args.length_to):
            warn(message)

    with output_stream(args.out) as stream:
        write_curve(scaled, stream)
    pressure, force = curve_endpoint(scaled)
    status(f"✅ Scaled endpoint: {force:.4g} N at {pressure:.4g} kPa")
    return 0


def cmd_fit(args, config):
    curve_a = read_curve(args.curve_a)
    curve_b = read_curve(args.curve_b)
    status("🔍 Fitting stiffness ratio")
    report = fit_report(curve_a, curve_b)
    with output_stream(args.out) as stream:
        write_frame_csv(pd.DataFrame([fit_frame_row(report)]), stream)
    status(f"✅ Stiffness ratio {report.ratio:.4g}, RMS residual {report.residual_n:.4g} N")
    return 0


def cmd_compare(args, config):
    target_od = args.target_od if args.target_od is not None else config.target_od
    path = args.records or config.records_path
    records = load_records(path)
    status(f"🔍 Comparing {len(records)} design(s) at {target_od:g} mm OD")
    table = comparison_table(records, target_od)

    with output_stream(args.out) as stream:
        stream.write(render_table(table))
    if args.plot_data:
        with output_stream(args.plot_data) as stream:
            rows_to_csv(table, stream)
        status(f"✅ Plot data written to {args.plot_data}")

    try:
        report = improvement_report(table)
    except InsufficientRowsError as e:
        warn(f"No improvement statistic: {e}")
        return 0
    for line in report.describe():
        status(f"📊 {line}")
    return 0


def cmd_validate(args, config):
    section = read_spec(args.spec)
    profile = None
    if not args.geometry_only:
        profile = load_config(args.profile).profile if args.profile else config.profile
    violations = validate_spec(section, profile)

    with output_stream(args.out) as stream:
        if violations:
            for problem in violations:
                stream.write(f"invalid: {problem}\n")
        else:
            stream.write("valid\n")

    if violations:
        status(f"❌ {len(violations)} violation(s) in {args.spec}", force=True)
        return 1
    status(f"✅ {args.spec} is valid")
    return 0


def cmd_optimize(args, config):
    bounds = read_bounds(args.bounds)
    morph = MorphState.from_flag(args.morph, config.area_gain, config.lever_gain)
    profile = None if args.geometry_only else config.profile
    status(f"🔍 Optimizing over {len(bounds.chamber_counts())} chamber count(s)")
    best = optimize_section(
        bounds,
        profile=profile,
        morph=morph,
        max_iterations=args.iterations,
        progress=not utils.QUIET,
    )
    with output_stream(args.out) as stream:
        write_spec(best, stream)
    status(
        f"✅ {best.n_chambers} chambers, {best.partition_thickness:.4g} mm partitions"
    )
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run config (key=value text)")
    common.add_argument("--out", type=Path, help="write data here instead of stdout")
    common.add_argument("--quiet", action="store_true", help="suppress status lines")

    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Lateral force analysis for soft manipulator segments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("materials", parents=[common], help="list or rank rubbers")
    p.add_argument("--file", type=Path, help="materials CSV (default: built-in table)")
    p.add_argument("--rank", action="store_true", help="rank by supportable wrench")
    p.add_argument("--strain", type=float, help="required strain in percent")
    p.set_defaults(handler=cmd_materials)

    p = sub.add_parser("predict", parents=[common], help="model force-pressure curve")
    p.add_argument("--spec", type=Path, default=REFERENCE_SPEC_PATH, help="cross-section file")
    p.add_argument("--file", type=Path, help="materials CSV (default: built-in table)")
    p.add_argument("--material", default=DEFAULT_MATERIAL)
    p.add_argument("--pressures", required=True, help="comma-separated pressures in kPa")
    p.add_argument("--morph", choices=("ideal", "none"), default="ideal")
    p.add_argument("--length", type=float, default=DEFAULT_SEGMENT_LENGTH_MM, help="mm")
    p.add_argument("--chambers", default="0,1", help="pressurized chamber indices")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("scale", parents=[common], help="scale a curve to another design")
    p.add_argument("curve", nargs="?", type=Path, help="force-pressure CSV")
    p.add_argument("--c10-from", type=float, help="source c10 in kPa")
    p.add_argument("--c10-to", type=float, help="target c10 in kPa")
    p.add_argument("--d-from", type=float, help="source OD in mm")
    p.add_argument("--d-to", type=float, help="target OD in mm")
    p.add_argument("--length-from", type=float, help="source length in mm")
    p.add_argument("--length-to", type=float, help="target length in mm")
    p.set_defaults(handler=cmd_scale)

    p = sub.add_parser("fit", parents=[common], help="fit the stiffness ratio a -> b")
    p.add_argument("curve_a", type=Path)
    p.add_argument("curve_b", type=Path)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("compare", parents=[common], help="compare literature designs")
    p.add_argument("records", nargs="?", type=Path, help="design records CSV")
    p.add_argument("--target-od", type=float, help="common OD in mm")
    p.add_argument("--plot-data", type=Path, help="write the table as CSV here")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("validate", parents=[common], help="check a cross-section")
    p.add_argument("spec", type=Path)
    p.add_argument("--profile", type=Path, help="run config holding the profile")
    p.add_argument("--geometry-only", action="store_true", help="skip profile checks")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("optimize", parents=[common], help="search a box of cross-sections")
    p.add_argument("bounds", type=Path, help="bounds file with <field>_min/_max keys")
    p.add_argument("--morph", choices=("ideal", "none"), default="none")
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--geometry-only", action="store_true", help="skip profile checks")
    p.set_defaults(handler=cmd_optimize)

    return parser


def main(argv=None):
    """Parse arguments, run one command and return its exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    utils.QUIET = args.quiet

    try:
        config = load_config(args.config)
        return args.handler(args, config)
    except KNOWN_ERRORS as e:
        status(f"❌ {e}", force=True)
        return 1


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n❌ Process interrupted by user", file=sys.stderr)
        sys.exit(1)
    except Exception as e:
        print(f"\n❌ Unexpected error: {e}", file=sys.stderr)
        import traceback

        traceback.print_exc()
        sys.exit(1)
