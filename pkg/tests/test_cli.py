import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levitherm import cli
from levitherm.config import RunConfig, Temperatures, TimeGrid, load_config
from levitherm.output import csv_text, format_number, gnuplot_script
from levitherm.phys_core import DomainError, NumericalError


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_match_gold(capsys):
    assert cli.run(["match", "--material", "gold", "--radius-nm", "50"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["Omega_Hz"] == pytest.approx(1.57e15, rel=0.01)
    assert out["g_max_over_Omega"] == pytest.approx(3.2e-5, rel=0.1)
    assert out["odf_overdamped"] is True


def test_cv_columns_agree(capsys):
    assert cli.run(["cv", "--material", "gold", "--radius-nm", "50", "--g", "1e-9", "--points", "6"]) == 0
    r = rows(capsys.readouterr().out)
    assert r[0] == ["T_K", "C_over_3kB", "C_einstein_over_3kB"]
    c = np.array([[float(x) for x in row] for row in r[1:]])
    assert np.max(np.abs(c[:, 1] / c[:, 2] - 1)) < 0.02


def test_evolve_at_equilibrium_is_flat(capsys):
    assert cli.run(["evolve", "--T-particle", "300", "--T-em", "300", "--points", "5"]) == 0
    c = np.array([[float(x) for x in row] for row in rows(capsys.readouterr().out)[1:]])
    assert np.max(np.abs(c[:, 1] / c[0, 1] - 1)) < 1e-3


def test_evolve_json(capsys):
    assert cli.run(["evolve", "--points", "3", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) == {"t_s", "u_J", "T_eff_K"} and len(out["u_J"]) == 3


def test_uinf_and_shorttime(capsys):
    assert cli.run(["uinf", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert 300 < out["T_eff_K"] < 1000
    assert cli.run(["shorttime", "--points", "4"]) == 0
    r = rows(capsys.readouterr().out)
    short, full = float(r[1][1]), float(r[1][2])
    assert short == pytest.approx(full, rel=0.02)


def test_poles_and_radiation_reaction(capsys):
    assert cli.run(["poles", "--kernel", "G_theta"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["terms"]) == 4 and out["runaway"] is False
    assert cli.run(["poles", "--kernel", "radiation_reaction", "--radius-nm", "10"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["runaway"] is True
    assert sum(z["re"] > 0 for z in out["poles"]) == 1


def test_polarizability_and_fed(capsys):
    assert cli.run(["polarizability", "--points", "11"]) == 0
    r = rows(capsys.readouterr().out)
    assert max(float(row[-1]) for row in r[1:]) < 0.05
    assert cli.run(["fed", "--points", "5"]) == 0
    T = [float(row[1]) for row in rows(capsys.readouterr().out)[1:]]
    assert T[0] == 1000.0 and all(a > b for a, b in zip(T, T[1:]))


def test_output_file_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["evolve", "--points", "4", "--g", "1e-8"]
    assert cli.run(argv + ["-o", str(a)]) == 0
    assert cli.run(argv + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"material": "silica", "radius_nm": 25, "format": "json"}))
    assert cli.run(["match", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["material"] == "silica"


@pytest.mark.parametrize("payload, key", [
    ({"radius": 50}, "radius"),
    ({"temperatures": {"T_em": 300}}, "T_em"),
    ({"t_grid": {"step": 1}}, "step"),
])
def test_unknown_keys_named(tmp_path, caplog, payload, key):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(payload))
    assert cli.run(["evolve", "--config", str(cfg)]) == 1
    assert key in caplog.text


@pytest.mark.parametrize("argv", [
    ["evolve", "--config", "/nonexistent/run.json"],
    ["evolve", "--radius-nm", "-5"],
    ["evolve", "--material", "unobtainium"],
    ["evolve", "--material", "silica", "--params", "table", "--g", "0"],
    ["cv", "--T-min", "10", "--T-max", "5"],
    ["bogus"],
    ["evolve", "--points", "1"],
])
def test_invalid_input_exits_one(argv):
    assert cli.run(argv) == 1


def test_invalid_json_exits_one(tmp_path):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    assert cli.run(["match", "--config", str(cfg)]) == 1


def test_numerical_failure_exits_two(monkeypatch, caplog):
    def fail(cfg, args):
        raise NumericalError("did not converge", estimate=1.5, error=0.1)

    monkeypatch.setitem(cli.COMMANDS, "uinf", fail)
    assert cli.run(["uinf"]) == 2
    assert "best estimate" in caplog.text


def test_failed_curve_points_exit_two(monkeypatch, capsys):
    from levitherm import energy
    from levitherm.phys_core import QuadratureError

    def boom(*a, **k):
        raise QuadratureError("forced", estimate=0.0, error=1.0)

    monkeypatch.setenv("LEVITHERM_THREADS", "1")
    monkeypatch.setattr(energy, "energy_change", boom)
    assert cli.run(["evolve", "--points", "2"]) == 2
    assert "nan" in capsys.readouterr().out


def test_bad_thread_setting_exits_one(monkeypatch):
    monkeypatch.setenv("LEVITHERM_THREADS", "lots")
    assert cli.run(["evolve", "--points", "2"]) == 1


def test_figure_writes_table_script_and_png(tmp_path):
    assert cli.run(["figure", "fig1", "--outdir", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["fig1.csv", "fig1.gp", "fig1.png"]
    assert (tmp_path / "fig1.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    header = (tmp_path / "fig1.csv").read_text().splitlines()[0].split(",")
    assert header == ["t_s", "T_R10nm_K", "T_R50nm_K", "T_R100nm_K", "T_R200nm_K"]
    assert "fig1.csv" in (tmp_path / "fig1.gp").read_text()


def test_entry_point_streams():
    proc = subprocess.run([sys.executable, "-m", "levitherm.cli", "match"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["material"] == "gold"
    bad = subprocess.run([sys.executable, "-m", "levitherm.cli", "match", "--radius-nm", "x"],
                         capture_output=True, text=True)
    assert bad.returncode == 1 and bad.stdout == "" and "levitherm:" in bad.stderr


@given(
    st.sampled_from(["gold", "silica"]),
    st.floats(5, 250),
    st.floats(1e-9, 1e-6),
    st.sampled_from(["table", "matched"]),
    st.floats(10, 3000),
    st.integers(2, 500),
    st.sampled_from(["csv", "json"]),
)
@settings(max_examples=40, deadline=None)
def test_config_json_round_trip(material, R, g, params, T, n, fmt):
    cfg = RunConfig(material=material, radius_nm=R, g_over_Omega=g, params=params,
                    temperatures=Temperatures(T_EM=T), t_grid=TimeGrid(min=1e-18, max=1.0, points=n),
                    format=fmt)
    again = RunConfig.from_dict(json.loads(cfg.to_json()))
    assert again == cfg


def test_inline_material_round_trip(tmp_path):
    from levitherm.materials import get_material

    mat = {**get_material("gold").to_dict(), "name": "my-gold"}
    cfg = RunConfig(material=mat, params="matched")
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert load_config(path) == cfg
    assert cfg.model().Omega > 0
    with pytest.raises(DomainError, match="table row"):
        RunConfig(material=mat, params="table")


def test_csv_formatting():
    assert format_number(1.0) == "1.00000000000e+00"
    assert format_number(float("nan")) == "nan"
    text = csv_text(["a", "b"], [[1.5, 2.0], [3.0, -4.25e-20]])
    assert text.splitlines() == ["a,b", "1.50000000000e+00,3.00000000000e+00", "2.00000000000e+00,-4.25000000000e-20"]
    with pytest.raises(ValueError):
        csv_text(["a"], [[1.0], [2.0]])


def test_gnuplot_script_lists_columns():
    s = gnuplot_script("d.csv", ["t", "x", "y"], "demo", logx=True)
    assert "set logscale x" in s and "using 1:2" in s and "using 1:3" in s
