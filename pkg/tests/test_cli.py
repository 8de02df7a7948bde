import numpy as np
import pytest

from fracspde.cli import (
    ConfigParseError,
    main,
    parse_config,
    run,
    serialize_config,
)
from fracspde.noise import ConfigurationError

MINIMAL = """
[model]
alpha = 0.3
s = 0.7
h1 = 0.3
h2 = 0.4

[experiment]
mode = temporal
"""


def test_defaults_follow_reference_parameters():
    cfg = parse_config(MINIMAL)
    assert cfg.mu == pytest.approx(7.0)
    assert cfg.nu == pytest.approx(0.1 * np.pi)
    assert cfg.q == pytest.approx(0.05 * np.pi)
    assert cfg.L == 200
    assert cfg.samples == 100
    assert cfg.T == pytest.approx(0.1)
    assert cfg.f_name == "sin"
    assert cfg.resolutions == (8, 16, 32, 64, 128)
    assert cfg.N == 256  # temporal default


def test_empty_contour_section_keeps_defaults():
    cfg = parse_config(MINIMAL + "\n[contour]\n")
    assert (cfg.mu, cfg.L) == (7.0, 200)
    assert cfg.nu == pytest.approx(0.1 * np.pi)
    assert cfg.q == pytest.approx(0.05 * np.pi)


def test_pi_literals():
    cfg = parse_config(MINIMAL + "\n[contour]\nnu = 0.2pi\nq = 0.01 pi\nmu = 5\n")
    assert cfg.nu == pytest.approx(0.2 * np.pi)
    assert cfg.q == pytest.approx(0.01 * np.pi)
    assert cfg.mu == pytest.approx(5.0)


def test_missing_required_key_names_it():
    with pytest.raises(ConfigParseError, match="alpha"):
        parse_config("[model]\ns = 0.5\nh1 = 0.4\nh2 = 0.4\n[experiment]\nmode = single\n")
    with pytest.raises(ConfigParseError, match="mode"):
        parse_config("[model]\nalpha = 0.5\ns = 0.5\nh1 = 0.4\nh2 = 0.4\n")


def test_out_of_range_values_rejected():
    with pytest.raises(ConfigurationError, match="alpha"):
        parse_config(MINIMAL.replace("alpha = 0.3", "alpha = 1.5"))
    with pytest.raises(ConfigurationError, match="h1"):
        parse_config(MINIMAL.replace("h1 = 0.3", "h1 = 0.6"))
    with pytest.raises(ConfigurationError, match="s"):
        parse_config(MINIMAL.replace("s = 0.7", "s = 0"))


def test_bad_contour_rejected():
    from fracspde.contour import InvalidContourError

    with pytest.raises(InvalidContourError):
        parse_config(MINIMAL + "\n[contour]\nnu = 0.4pi\nq = 0.2pi\n")


def test_round_trip_identity():
    cfg = parse_config(MINIMAL + "\n[contour]\nL = 64\n\n[output]\ndir = somewhere\n")
    assert parse_config(serialize_config(cfg)) == cfg


def test_seed_precedence(monkeypatch):
    monkeypatch.setenv("FRACSPDE_SEED", "111")
    cfg = parse_config(MINIMAL)
    assert cfg.seed == 111  # env is the fallback
    # a seed in the file beats the environment
    cfg2 = parse_config(MINIMAL.replace("mode = temporal", "mode = temporal\nseed = 222"))
    assert cfg2.seed == 222


def single_text(outdir, n=4, m=8, seed=5):
    return f"""
[model]
alpha = 0.3
s = 0.7
h1 = 0.3
h2 = 0.4
N = {n}
M = {m}

[experiment]
mode = single
seed = {seed}

[output]
dir = {outdir}
"""


def test_single_mode_writes_trajectory(tmp_path):
    out = tmp_path / "run1"
    cfg = parse_config(single_text(out))
    assert run(cfg) == 0
    traj = out / "trajectory.csv"
    manifest = out / "manifest.txt"
    assert traj.exists() and manifest.exists()
    lines = traj.read_text().strip().splitlines()
    assert lines[0] == "n,t_n,coeff_1,coeff_2,coeff_3,coeff_4"
    assert len(lines) == 10  # header + M + 1 states
    text = manifest.read_text()
    assert "seed 5" in text and "[checksums]" in text and "trajectory.csv" in text


def test_unwritable_output_dir_exits_2(tmp_path):
    # a regular file in the parent position makes the output dir impossible
    # to create for any user (permission bits don't stop root)
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    target = blocker / "sub"
    cfg = parse_config(single_text(target))
    assert run(cfg) == 2
    assert not target.exists()


def temporal_text(outdir, seed=7):
    return f"""
[model]
alpha = 0.3
s = 0.7
h1 = 0.2
h2 = 0.2
N = 8

[experiment]
mode = temporal
samples = 2
resolutions = 8,16,32,64,128
seed = {seed}

[output]
dir = {outdir}
"""


def test_temporal_mode_errors_table_structure(tmp_path):
    # the reference temporal ladder produces one errors.csv row per level
    out = tmp_path / "t"
    assert run(parse_config(temporal_text(out))) == 0
    lines = (out / "errors.csv").read_text().strip().splitlines()
    assert len(lines) == 6  # header + 5 ladder levels
    assert lines[0] == "resolution,error,stderr,rate"
    assert [row.split(",")[0] for row in lines[1:]] == ["8", "16", "32", "64", "128"]
    assert (out / "rates.csv").exists()
    plot = (out / "plot_errors.dat").read_text().strip().splitlines()
    assert len(plot) == 5 and all(len(row.split()) == 2 for row in plot)


def test_identical_seed_reproduces_byte_identical_csvs(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(parse_config(temporal_text(out1))) == 0
    assert run(parse_config(temporal_text(out2))) == 0
    assert (out1 / "errors.csv").read_bytes() == (out2 / "errors.csv").read_bytes()
    assert (out1 / "rates.csv").read_bytes() == (out2 / "rates.csv").read_bytes()


def test_main_flag_overrides(tmp_path):
    cfg_path = tmp_path / "c.ini"
    cfg_path.write_text(single_text(tmp_path / "ignored"))
    out = tmp_path / "flagged"
    code = main(["--config", str(cfg_path), "--out", str(out), "--seed", "99"])
    assert code == 0
    assert (out / "trajectory.csv").exists()
    assert "seed 99" in (out / "manifest.txt").read_text()


def test_main_missing_config_is_io_error(tmp_path):
    assert main(["--config", str(tmp_path / "absent.ini")]) == 2


def test_main_invalid_value_is_validation_error(tmp_path):
    cfg_path = tmp_path / "bad.ini"
    cfg_path.write_text(single_text(tmp_path / "o").replace("alpha = 0.3", "alpha = 2.0"))
    assert main(["--config", str(cfg_path)]) == 1


def test_main_mode_override_changes_ladder(tmp_path):
    cfg_path = tmp_path / "c.ini"
    cfg_path.write_text(temporal_text(tmp_path / "t2"))
    out = tmp_path / "single_out"
    code = main(["--config", str(cfg_path), "--mode", "single", "--out", str(out)])
    assert code == 0
    assert (out / "trajectory.csv").exists()
