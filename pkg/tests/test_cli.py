import subprocess
import sys

import numpy as np
import pytest

from nlpm import ConfigError, InvalidArgumentError
from nlpm.cli import main
from nlpm.experiments import (
    PRESETS,
    parse_config,
    parse_overrides,
    run_custom,
    run_preset,
)
from nlpm.imageio import GrayImage, make_cartoon, read_csv, read_pgm, write_pgm


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


# -- presets -----------------------------------------------------------------------------

def test_preset_parameters():
    for pid in ("fig-eps", "fig-kink"):
        p = PRESETS[pid]
        assert (p.n, p.config.h_t, p.config.steps, p.epsilons) == (256, 0.06, 100, (0.0, 0.1, 0.2, 0.3))
    osc = PRESETS["fig-kink-osc"]
    assert osc.config.h_t * osc.config.steps == pytest.approx(2.0)
    teaser = PRESETS["teaser-2d"]
    assert teaser.epsilons == (0.6,) and teaser.config.bc.value == "neumann"
    assert PRESETS["fig-regev"].snapshots == (0, 25, 50, 100, 200, 400)


def test_fig_kink_files_and_deviation(tmp_path):
    out = run_preset("fig-kink", tmp_path, {"epsilon": (0.1,)})
    assert [p.rsplit("/", 1)[-1] for p in out.files] == ["kink_eps0.1.csv", "kink_eps0.1_diagnostics.csv"]
    cols, manifest = read_csv(tmp_path / "kink_eps0.1.csv")
    u0, uf = np.array(cols["u0"]), np.array(cols["u_final"])
    dev = np.abs(uf - u0).max() / np.abs(u0).max()
    assert dev == pytest.approx(0.002, abs=0.001)
    assert "preset=fig-kink" in manifest and "epsilon=0.1" in manifest and "ht=0.06" in manifest
    diag, _ = read_csv(tmp_path / "kink_eps0.1_diagnostics.csv")
    assert diag["step"] == list(map(float, range(101)))


def test_fig_eps_zero_steps_gives_initial_derivative(tmp_path):
    run_preset("fig-eps", tmp_path, {"steps": 0})
    for eps in ("0", "0.1", "0.2", "0.3"):
        cols, _ = read_csv(tmp_path / f"eps_eps{eps}.csv")
        assert cols["du_final"] == cols["du0"]
        assert cols["u_final"] == cols["u0"]


def test_symmetric_ic_switch(tmp_path):
    out = run_preset("fig-eps", tmp_path, {"steps": 0, "epsilon": (0.0,), "symmetric_ic": True})
    cols, manifest = read_csv(out.files[0])
    x = np.array(cols["x"])
    np.testing.assert_allclose(cols["u0"], 100 * x**2 * (1 - x) ** 2)
    assert "ic=eps-symmetric" in manifest


def test_regev_snapshots(tmp_path):
    out = run_preset("fig-regev", tmp_path, {"steps": 50})
    cols, _ = read_csv(out.files[0])
    assert {"u_step0", "u_step25", "u_step50"} <= set(cols) and "u_step100" not in cols


def test_teaser_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    out_a = run_preset("teaser-2d", a, {"seed": 7})
    run_preset("teaser-2d", b, {"seed": 7})
    for path in out_a.files:
        name = path.rsplit("/", 1)[-1]
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert "gain_db=" in out_a.summary
    assert read_pgm(a / "teaser_clean.pgm").width == 128


def test_teaser_seed_changes_noise(tmp_path):
    run_preset("teaser-2d", tmp_path / "a", {"seed": 7, "steps": 0})
    run_preset("teaser-2d", tmp_path / "b", {"seed": 8, "steps": 0})
    assert (tmp_path / "a" / "teaser_noisy.pgm").read_bytes() != (tmp_path / "b" / "teaser_noisy.pgm").read_bytes()


def test_unknown_preset_api(tmp_path):
    with pytest.raises(ConfigError):
        run_preset("fig-nope", tmp_path)


# -- overrides and config files ---------------------------------------------------------

def test_parse_overrides():
    ov = parse_overrides(["steps=3", "epsilon=0.1,0.2", "gamma=none", "bc=Neumann"])
    assert ov["steps"] == 3 and ov["epsilon"] == (0.1, 0.2) and ov["gamma"] is None
    assert ov["bc"].value == "neumann"
    for bad in (["steps"], ["colour=red"], ["steps=three"], ["symmetric_ic=maybe"]):
        with pytest.raises(ConfigError):
            parse_overrides(bad)


def test_parse_config_lines():
    values, lines = parse_config("# header\nn = 64\n\nepsilon=0.2  # note\nht=0.01\nsteps=2\nic=hat\n")
    assert values["n"] == 64 and values["epsilon"] == (0.2,) and lines["epsilon"] == 4


@pytest.mark.parametrize("text, line", [
    ("n=64\ncolour=red\n", 2),
    ("n=64\nepsilon=abc\n", 2),
    ("n=64\nn=32\n", 2),
    ("n=64\njunk\n", 2),
    ("n=64\nepsilon=0.1,0.2\nht=0.1\nsteps=1\nic=hat\n", 2),
])
def test_config_errors_cite_line(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}: ")


def test_config_missing_key():
    with pytest.raises(ConfigError, match="ic"):
        parse_config("n=64\nepsilon=0.1\nht=0.1\nsteps=1\n")


def test_custom_constant_fixed_point(tmp_path):
    cfg = write_config(tmp_path, "n=64\nepsilon=0.2\nht=0.06\nsteps=5\nic=const\n")
    out = run_custom(cfg, tmp_path / "o")
    cols, _ = read_csv(out.files[0])
    np.testing.assert_allclose(cols["u_final"], cols["u0"], atol=1e-10)


def test_custom_invalid_size_cites_line(tmp_path):
    cfg = write_config(tmp_path, "epsilon=0.2\nht=0.06\nn=255\nsteps=5\nic=const\n")
    with pytest.raises(ConfigError) as info:
        run_custom(cfg, tmp_path)
    assert info.value.line == 3


def test_custom_gamma_override_in_manifest(tmp_path):
    cfg = write_config(tmp_path, "formulation=divergence\nbc=neumann\nn=64\nepsilon=0.3\ngamma=0.35\n"
                                 "ht=1e-4\nsteps=2\nic=sin2pi\n")
    out = run_custom(cfg, tmp_path)
    assert out.results[0.3].records  # ran
    _, manifest = read_csv(out.files[0])
    assert "gamma=0.35" in manifest and "epsilon=0.3" in manifest and "formulation=divergence" in manifest


def test_custom_gamma_governs(tmp_path):
    base = "formulation=divergence\nbc=neumann\nn=64\nepsilon=0.3\nht=1e-3\nsteps=3\nic=regev\n"
    # the default (1 - 0.3) / 2 would be 0.35
    a = run_custom(write_config(tmp_path, base + "gamma=0.5\n", "a.cfg"), tmp_path / "a")
    b = run_custom(write_config(tmp_path, base, "b.cfg"), tmp_path / "b")
    c = run_custom(write_config(tmp_path, base.replace("0.3", "0.1") + "gamma=0.5\n", "c.cfg"), tmp_path / "c")
    sa, sb = a.results[0.3].state.values, b.results[0.3].state.values
    assert not np.array_equal(sa, sb)
    np.testing.assert_array_equal(sa, c.results[0.1].state.values)


def test_custom_2d_pgm_input(tmp_path):
    write_pgm(make_cartoon(32), tmp_path / "in.pgm")
    cfg = write_config(tmp_path, f"formulation=divergence\nbc=neumann\nn=32\nepsilon=0.6\nht=1e-5\nsteps=2\n"
                                 f"ic={tmp_path / 'in.pgm'}\nout={tmp_path / 'o'}\n")
    out = run_custom(cfg)
    names = sorted(p.rsplit("/", 1)[-1] for p in out.files)
    assert names == ["flow_eps0.6_diagnostics.csv", "flow_final.csv", "flow_final.pgm"]


def test_custom_unknown_ic(tmp_path):
    cfg = write_config(tmp_path, "n=64\nepsilon=0.2\nht=0.06\nsteps=5\nic=nonsense\n")
    with pytest.raises(ConfigError) as info:
        run_custom(cfg, tmp_path)
    assert info.value.line == 5


# -- command line ---------------------------------------------------------------------

def test_cli_spectrum(capsys):
    assert main(["spectrum", "--n", "4", "--bc", "neumann"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "index,mode,eigenvalue"
    assert [float(r.split(",")[2]) for r in lines[1:]] == pytest.approx([0, np.pi**2, 4 * np.pi**2, 9 * np.pi**2])


def test_cli_spectrum_bad_size(capsys):
    assert main(["spectrum", "--n", "6"]) == 2
    assert "power of two" in capsys.readouterr().err


def test_cli_unknown_preset_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["preset", "fig-nope"])
    assert info.value.code == 2


def test_cli_config_error_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path, "n=64\nfoo=1\n")
    assert main(["flow", str(cfg)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_solver_failure_exit_1(tmp_path, capsys):
    code = main(["preset", "fig-kink", "--out", str(tmp_path), "--override", "solver=krylov",
                 "--override", "max_iter=1", "--override", "tol=1e-15", "--override", "epsilon=0.3"])
    assert code == 1
    assert "solver failure at step 1" in capsys.readouterr().err


def test_cli_preset_and_flow(tmp_path, capsys):
    assert main(["preset", "fig-kink", "--out", str(tmp_path), "--override", "steps=2",
                 "--override", "epsilon=0.1"]) == 0
    assert (tmp_path / "kink_eps0.1.csv").exists()
    cfg = write_config(tmp_path, "n=32\nepsilon=0.1\nht=0.01\nsteps=1\nic=hat\n")
    assert main(["flow", str(cfg), "--out", str(tmp_path / "f")]) == 0
    assert (tmp_path / "f" / "flow_eps0.1.csv").exists()


def test_cli_denoise(tmp_path, capsys):
    from nlpm.imageio import salt_pepper

    write_pgm(salt_pepper(make_cartoon(64), 0.15, 1), tmp_path / "noisy.pgm")
    assert main(["denoise", str(tmp_path / "noisy.pgm"), str(tmp_path / "clean.pgm")]) == 0
    out = read_pgm(tmp_path / "clean.pgm")
    assert out.width == 64


def test_cli_denoise_bad_input(tmp_path, capsys):
    (tmp_path / "bad.pgm").write_bytes(b"P3\n1 1\n255\n0 0 0\n")
    assert main(["denoise", str(tmp_path / "bad.pgm"), str(tmp_path / "o.pgm")]) == 2
    write_pgm(GrayImage(np.zeros((4, 8))), tmp_path / "rect.pgm")
    assert main(["denoise", str(tmp_path / "rect.pgm"), str(tmp_path / "o.pgm")]) == 2
    assert main(["denoise", str(tmp_path / "missing.pgm"), str(tmp_path / "o.pgm")]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nlpm", "spectrum", "--n", "4"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("index,mode,eigenvalue")


def test_epsilon_override_list_validated(tmp_path):
    with pytest.raises(InvalidArgumentError):
        run_preset("fig-kink", tmp_path, {"epsilon": (1.5,), "steps": 1})
