import pytest

import main
import utils
from mechanics import curve_endpoint, read_curve
from utils import DATA_DIR, REFERENCE_SPEC_PATH

ECOFLEX_CSV = DATA_DIR / "curve_ecoflex_0050.csv"
ELASTOSIL_CSV = DATA_DIR / "curve_elastosil_m4601.csv"


def run(capsys, *argv):
    code = main.main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def data_lines(text):
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def write_spec_file(tmp_path, **changes):
    lines = []
    for line in REFERENCE_SPEC_PATH.read_text(encoding="utf-8").splitlines():
        key = line.split("=", 1)[0]
        if key in changes:
            line = f"{key}={changes[key]}"
        lines.append(line)
    path = tmp_path / "spec.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_materials_lists_six_rows(capsys):
    code, out, _ = run(capsys, "materials")
    assert code == 0
    assert len(out.strip().splitlines()) == 7


def test_materials_rank_puts_elastosil_first(capsys):
    code, out, _ = run(capsys, "materials", "--rank", "--strain", 600)
    assert code == 0
    assert "Elastosil M4601" in out.splitlines()[1]


def test_materials_rank_above_every_strain_is_empty(capsys):
    code, out, _ = run(capsys, "materials", "--rank", "--strain", 1000)
    assert code == 0
    assert len(out.strip().splitlines()) == 1


def test_materials_csv_out(capsys, tmp_path):
    out_path = tmp_path / "m.csv"
    code, out, _ = run(capsys, "materials", "--file", DATA_DIR / "materials.csv", "--out", out_path)
    assert code == 0
    assert out == ""
    assert out_path.read_text(encoding="utf-8").startswith("name,c10_kpa,")


def test_materials_strain_needs_rank(capsys):
    code, _, err = run(capsys, "materials", "--strain", 600)
    assert code == 1
    assert "❌" in err


def test_predict_above_profile_pressure_fails(capsys):
    code, out, err = run(capsys, "predict", "--pressures", "0,100,400")
    assert code == 1
    assert out == ""
    assert "400" in err


def test_predict_ideal_not_below_none(capsys, tmp_path):
    paths = {}
    for morph in ("none", "ideal"):
        paths[morph] = tmp_path / f"{morph}.csv"
        code, _, _ = run(
            capsys, "predict", "--pressures", "0,100,200,300", "--morph", morph, "--out", paths[morph]
        )
        assert code == 0
    plain = read_curve(paths["none"])
    ideal = read_curve(paths["ideal"])
    assert all(i >= p for i, p in zip(ideal.forces, plain.forces))
    assert plain.forces[0] == 0.0


def test_predict_unknown_material(capsys):
    code, _, err = run(capsys, "predict", "--pressures", "0,100", "--material", "Unobtainium")
    assert code == 1
    assert "Unknown material" in err


def test_predict_is_byte_stable(capsys):
    first = run(capsys, "predict", "--pressures", "0,150,300")[1]
    second = run(capsys, "predict", "--pressures", "0,150,300")[1]
    assert first == second
    assert first.startswith("# provenance=predicted\npressure_kpa,force_n\n")


def test_scale_ecoflex_to_elastosil(capsys, tmp_path):
    out_path = tmp_path / "scaled.csv"
    code, _, _ = run(
        capsys, "scale", ECOFLEX_CSV, "--c10-from", 25, "--c10-to", 131.2, "--out", out_path
    )
    assert code == 0
    pressure, force = curve_endpoint(read_curve(out_path))
    assert pressure == pytest.approx(314.9, abs=0.05)
    assert force == pytest.approx(2.729, abs=5e-4)


def test_scale_identity_keeps_data_rows(capsys):
    code, out, _ = run(capsys, "scale", ECOFLEX_CSV, "--c10-from", 25, "--c10-to", 25)
    assert code == 0
    assert data_lines(out) == data_lines(ECOFLEX_CSV.read_text(encoding="utf-8"))
    assert out.startswith("# provenance=scaled\n")


def test_scale_extension_force_to_12_mm(capsys, tmp_path):
    curve_path = tmp_path / "extension.csv"
    curve_path.write_text("pressure_kpa,force_n\n0.0,47.1\n100.0,47.1\n", encoding="utf-8")
    out_path = tmp_path / "scaled.csv"
    code, _, err = run(
        capsys,
        "scale", curve_path, "--d-from", 33, "--d-to", 12,
        "--length-from", 30, "--length-to", 30,
        "--out", out_path,
    )
    assert code == 0
    assert read_curve(out_path).forces[-1] == pytest.approx(6.23, abs=5e-3)
    assert "not geometrically equivalent" in err


@pytest.mark.parametrize(
    "flags",
    [
        [],
        ["--c10-from", "25", "--c10-to", "131.2", "--d-from", "33", "--d-to", "12"],
        ["--c10-from", "25"],
    ],
)
def test_scale_needs_exactly_one_pair(capsys, flags):
    code, _, err = run(capsys, "scale", ECOFLEX_CSV, *flags)
    assert code == 1
    assert "❌" in err


def test_fit_reports_ratio(capsys):
    code, out, err = run(capsys, "fit", ECOFLEX_CSV, ECOFLEX_CSV)
    assert code == 0
    header, values = out.splitlines()
    assert header == "ratio,residual_n,overlap_min_kpa,overlap_max_kpa,n_points"
    assert float(values.split(",")[0]) == pytest.approx(1.0, rel=1e-6)
    assert "✅" in err


def test_fit_measured_curves(capsys):
    code, out, _ = run(capsys, "fit", ECOFLEX_CSV, ELASTOSIL_CSV)
    assert code == 0
    ratio = float(out.splitlines()[1].split(",")[0])
    assert 4.5 <= ratio <= 5.5


def test_compare_published_records(capsys, tmp_path):
    plot_path = tmp_path / "plot.csv"
    code, out, err = run(capsys, "compare", "--target-od", 12, "--plot-data", plot_path)
    assert code == 0
    lines = out.splitlines()
    assert "Our design" in lines[1]
    assert "Stiff-flop jamming" in lines[2] and "yes" in lines[2]
    assert "245.2%" in err
    assert "253.7%" in err
    plot = plot_path.read_text(encoding="utf-8").splitlines()
    assert plot[0] == "name,force_at_target_n,kind,flagged"
    assert plot[1].startswith("Our design,2.9,lateral_active,")


def test_compare_at_24_mm(capsys):
    code, out, _ = run(capsys, "compare", "--target-od", 24)
    assert code == 0
    assert "11.6" in out.splitlines()[1]


def test_compare_single_record_still_prints(capsys, tmp_path):
    path = tmp_path / "one.csv"
    path.write_text(
        "name,source,od_mm,force_n,kind,dofs,bending_deg,notes\n"
        "Only,x,12,1.0,lateral_active,2,,\n",
        encoding="utf-8",
    )
    code, out, err = run(capsys, "compare", path)
    assert code == 0
    assert len(out.splitlines()) == 2
    assert "No improvement statistic" in err


def test_validate_reference_spec(capsys):
    code, out, _ = run(capsys, "validate", REFERENCE_SPEC_PATH)
    assert code == 0
    assert out == "valid\n"


def test_validate_oversized_spec(capsys, tmp_path):
    path = write_spec_file(tmp_path, outer_diameter=14.0)
    code, out, _ = run(capsys, "validate", path, "--profile", DATA_DIR / "design_profile.txt")
    assert code == 1
    assert "max OD exceeded" in out
    assert run(capsys, "validate", path, "--geometry-only")[0] == 0


def test_validate_impossible_geometry(capsys, tmp_path):
    path = write_spec_file(tmp_path, outer_wall_thickness=7.0)
    code, out, _ = run(capsys, "validate", path, "--geometry-only")
    assert code == 1
    assert "inner bore nonpositive" in out


def test_optimize_shipped_bounds(capsys):
    code, out, _ = run(capsys, "optimize", DATA_DIR / "bounds_example.txt", "--quiet")
    assert code == 0
    values = dict(line.split("=", 1) for line in out.splitlines())
    assert values["n_chambers"] == "3"
    assert values["partition_thickness"] == "0.8"


def test_optimize_infeasible(capsys, tmp_path):
    text = (DATA_DIR / "bounds_example.txt").read_text(encoding="utf-8")
    text = text.replace("outer_diameter_min=12.0", "outer_diameter_min=14.0")
    text = text.replace("outer_diameter_max=12.0", "outer_diameter_max=16.0")
    path = tmp_path / "bounds.txt"
    path.write_text(text, encoding="utf-8")
    code, out, err = run(capsys, "optimize", path)
    assert code == 1
    assert out == ""
    assert "no cross-section" in err


def test_config_paths_resolve_against_config_dir(capsys, tmp_path):
    (tmp_path / "records.csv").write_text(
        "name,source,od_mm,force_n,kind,dofs,bending_deg,notes\n"
        "A,x,6,1.0,lateral_active,2,,\n"
        "B,x,12,1.0,lateral_active,2,,\n",
        encoding="utf-8",
    )
    config = tmp_path / "run.txt"
    config.write_text("records_path=records.csv\ntarget_od_mm=12\n", encoding="utf-8")
    code, out, err = run(capsys, "compare", "--config", config)
    assert code == 0
    assert out.splitlines()[1].split()[0] == "A"
    assert "300%" in err


def test_config_profile_limits_predict(capsys, tmp_path):
    config = tmp_path / "run.txt"
    config.write_text("max_pressure_kpa=100\n", encoding="utf-8")
    code, _, err = run(capsys, "predict", "--pressures", "0,150", "--config", config)
    assert code == 1
    assert "150" in err


def test_unknown_config_key(capsys, tmp_path):
    config = tmp_path / "run.txt"
    config.write_text("max_od_mm=12\nwheels=4\n", encoding="utf-8")
    code, _, err = run(capsys, "materials", "--config", config)
    assert code == 1
    assert "unknown config key 'wheels'" in err


def test_bad_config_number(capsys, tmp_path):
    config = tmp_path / "run.txt"
    config.write_text("target_od_mm=twelve\n", encoding="utf-8")
    code, _, err = run(capsys, "compare", "--config", config)
    assert code == 1
    assert "target_od_mm" in err


def test_shipped_profile_config_loads():
    config = main.load_config(DATA_DIR / "design_profile.txt")
    assert config.profile == main.DESIGN_PROFILE
    assert config.records_path == DATA_DIR / "published_records.csv"
    assert config.curve_path == DATA_DIR / "curve_ecoflex_0050.csv"


def test_scale_uses_config_curve(capsys):
    code, out, _ = run(
        capsys, "scale", "--config", DATA_DIR / "design_profile.txt", "--d-from", 12, "--d-to", 12
    )
    assert code == 0
    assert data_lines(out) == data_lines(ECOFLEX_CSV.read_text(encoding="utf-8"))


def test_missing_input_file(capsys, tmp_path):
    code, _, err = run(capsys, "fit", tmp_path / "nope.csv", ECOFLEX_CSV)
    assert code == 1
    assert "File not found" in err


def test_quiet_silences_status(capsys):
    code, _, err = run(capsys, "materials", "--rank", "--strain", 600, "--quiet")
    assert code == 0
    assert err == ""
    assert utils.QUIET


def test_argument_errors_exit_with_two(capsys):
    with pytest.raises(SystemExit) as info:
        main.main(["predict", "--morph", "sideways", "--pressures", "0"])
    assert info.value.code == 2
