import csv
import io

import pytest

from scmqkd.config import ConfigError, build_config, read_config_file
from scmqkd.experiments import Table, gain_table, keyrate_table, noise_profile_table


def parse(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_noise_profile_high_plan(run_cli, tmp_path):
    out = tmp_path / "fig2.csv"
    code, _, _ = run_cli("noise-profile", "--plan", "high", "--mbar", "0.01", "--out", out)
    assert code == 0
    text = out.read_text()
    assert text.startswith("# noise-profile per channel\n# config: command=noise-profile")
    rows = parse(text)
    assert len(rows) == 40
    assert (rows[0]["k"], rows[0]["M2"]) == ("1", "78")
    assert float(rows[0]["epsilon_ratio"]) == pytest.approx(1.241e-3, abs=1e-6)


def test_noise_profile_single_channel(run_cli):
    code, out, _ = run_cli("noise-profile", "--plan", "custom:1")
    assert code == 0
    rows = parse(out)
    assert len(rows) == 1 and float(rows[0]["epsilon_ratio"]) == 0


def test_noise_profile_vs_mbar_ordering(run_cli):
    code, out, _ = run_cli("noise-profile", "--plan", "low,medium,high", "--sweep", "mbar")
    assert code == 0
    rows = parse(out)
    by = {}
    for r in rows:
        by.setdefault(float(r["m_bar"]), {})[int(r["N"])] = (float(r["ratio_first"]), float(r["ratio_last"]))
    assert len(by) == 39
    for vals in by.values():
        curve = [vals[40][0], vals[40][1], vals[15][0], vals[15][1], vals[5][0], vals[5][1]]
        assert all(a > b for a, b in zip(curve, curve[1:]))


def test_keyrate_columns_and_zero_distance(run_cli):
    code, out, _ = run_cli("keyrate", "--plan", "low", "--sweep", "distance", "--to", "2")
    assert code == 0
    rows = parse(out)
    assert [float(r["distance_km"]) for r in rows] == [0, 1, 2]
    first = rows[0]
    for k in range(1, 6):
        assert float(first[f"N5_k{k}_bits_per_pulse"]) > 0
    assert float(first["N5_total_bits_per_s"]) == pytest.approx(
        sum(float(first[f"N5_k{k}_bits_per_s"]) for k in range(1, 6)), rel=1e-10)
    assert "single_bits_per_s" in first


def test_gain_mbar_mode(run_cli):
    code, out, _ = run_cli("gain", "--sweep", "mbar", "--to", "0.005", "--distance", "50")
    assert code == 0
    for row in parse(out):
        for n in (5, 15, 40):
            assert float(row[f"G_M_N{n}"]) == pytest.approx(n, rel=0.02)


def test_gain_distance_mode_marks_undefined(run_cli):
    code, out, _ = run_cli("gain", "--sweep", "distance", "--from", "100", "--to", "120", "--step", "10")
    assert code == 0
    rows = parse(out)
    assert rows[-1]["G_M_N40"] == "nan"


def test_svg_written(run_cli, tmp_path):
    out = tmp_path / "gain.csv"
    code, _, _ = run_cli("gain", "--sweep", "distance", "--step", "20", "--out", out, "--svg")
    assert code == 0
    svg = (tmp_path / "gain.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg
    for cmd, extra in (("keyrate", ["--sweep", "distance", "--step", "30"]),
                       ("noise-profile", []),
                       ("noise-profile", ["--plan", "low,high", "--sweep", "mbar", "--step", "0.005"])):
        code, _, _ = run_cli(cmd, *extra, "--out", tmp_path / f"{cmd}.csv", "--svg")
        assert code == 0
        assert (tmp_path / f"{cmd}.svg").stat().st_size > 1000


def test_svg_needs_out(run_cli):
    code, _, err = run_cli("gain", "--sweep", "mbar", "--svg")
    assert code == 1 and "--svg" in err


@pytest.mark.parametrize("argv", [
    ["keyrate", "--mbar", "0.5", "--sweep", "distance"],
    ["keyrate", "--eta", "1.5", "--sweep", "distance"],
    ["keyrate", "--beta", "-0.1", "--sweep", "distance"],
    ["keyrate", "--sweep", "distance", "--step", "0"],
    ["keyrate", "--sweep", "distance", "--from", "-5"],
    ["keyrate"],
    ["gain", "--sweep", "mbar", "--to", "0.05"],
    ["noise-profile", "--plan", "low,high"],
    ["noise-profile", "--plan", "bogus"],
    ["noise-profile", "--from", "0.001"],
    ["verify", "--trials", "10"],
])
def test_validation_errors_exit_1_before_writing(run_cli, tmp_path, argv):
    out = tmp_path / "x.csv"
    code, _, err = run_cli(*argv, "--out", out)
    assert code == 1
    assert "invalid configuration" in err
    assert not out.exists()


def test_unwritable_path_exit_2(run_cli, tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    code, _, err = run_cli("noise-profile", "--out", bad)
    assert code == 2
    assert str(bad) in err


def test_config_file_with_overrides(run_cli, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# Fig. 4 style sweep\nplan = low\nsweep = distance\nfrom = 0\nto = 4\nstep = 2\neps = 0.03\n")
    code, out, _ = run_cli("keyrate", "--config", conf, "--eps", "0.01")
    assert code == 0
    assert "eps=0.01" in out.splitlines()[1]
    assert len(parse(out)) == 3


def test_config_file_errors(tmp_path):
    conf = tmp_path / "bad.conf"
    conf.write_text("plan low\n")
    with pytest.raises(ConfigError):
        read_config_file(conf)
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "nope.conf")
    with pytest.raises(ConfigError, match="unknown config keys"):
        build_config({"colour": "blue"})
    with pytest.raises(ConfigError):
        build_config({"mbar": "abc"})


def test_resolved_config_in_provenance():
    cfg = build_config(overrides={"plans": "medium", "sweep": "distance", "step": 10, "beta": 0.9})
    prov = cfg.resolved()
    assert prov["beta"] == 0.9 and prov["eta"] == 0.552 and prov["to"] == 120.0
    table = keyrate_table(cfg)
    assert "beta=0.9" in table.to_csv().splitlines()[1]


def test_workers_do_not_change_output():
    base = dict(plans="low,high", sweep="distance", step=5)
    one = keyrate_table(build_config(overrides=base)).to_csv()
    many = keyrate_table(build_config(overrides={**base, "workers": 3})).to_csv()
    assert one.replace("workers", "") == many.replace("workers", "")
    g1 = gain_table(build_config(overrides={**base, "sweep": "mbar", "step": 0.005})).to_csv()
    g3 = gain_table(build_config(overrides={**base, "sweep": "mbar", "step": 0.005, "workers": 2})).to_csv()
    assert g1 == g3


def test_csv_format_details():
    t = Table("t", ["a", "b", "c"], [[1, 0.1, float("nan")], [2, 1e-20, None]], {"x": 1})
    text = t.to_csv()
    assert "\r" not in text
    assert text.splitlines()[2:] == ["a,b,c", "1,0.1,nan", "2,1e-20,"]


def test_noise_table_rejects_distance_sweep():
    with pytest.raises(ValueError):
        noise_profile_table(build_config(overrides={"plans": "low", "sweep": "distance"}))


def test_verify_fault_injection(run_cli):
    code, out, _ = run_cli("verify", "--trials", "20000", "--inject-fault", "m2")
    assert code == 3
    assert "FAIL m2 closed form == enumeration" in out


def test_verify_passes_small(run_cli, tmp_path):
    out = tmp_path / "verify.txt"
    code, stdout, _ = run_cli("verify", "--trials", "50000", "--seed", "7", "--out", out)
    assert code == 0, stdout
    assert out.read_text() == stdout
    assert stdout.strip().endswith("checks passed")
