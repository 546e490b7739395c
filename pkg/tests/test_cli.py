import csv
import json
from pathlib import Path

import pytest

from phototherm import cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

# stationary neutral point of the G_c=0.68 half-layer family at a=2.5
STAT_A = 2.5
STAT_RA = 137.893279214150
STAT_FLAGS = ["--chi", "0.1285", "--a", str(STAT_A), "--Ra", repr(STAT_RA)]

# oscillatory critical point of the deep stabilized layer
DEEP_FLAGS = ["--R_T", "-500", "--hbar", "1.0", "--chi", "-0.485",
              "--a", "1.95067773646", "--Ra", "80.0643635991",
              "--gamma_im", "13.2067536515"]


def read_table(path):
    header, rows = [], []
    with open(path) as f:
        for line in f:
            if line.startswith("#"):
                header.append(line.rstrip("\n"))
            else:
                rows.append(line)
    body = list(csv.reader(rows))
    return header, body[0], body[1:]


def test_version_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0


def test_taxis_curve(tmp_path, capsys):
    rc = cli.main(["taxis", "--chi", "0", "--n_G", "21",
                   "--outdir", str(tmp_path)])
    assert rc == 0
    header, cols, rows = read_table(tmp_path / "taxis_curve.csv")
    assert header[0] == "# schema: taxis-curve v1"
    assert cols == ["G", "T_of_G", "dT_dG"]
    assert len(rows) == 21
    assert "G_c=0.644135998735" in capsys.readouterr().out


def test_flag_beats_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"chi": 0.5, "n_G": 11}))
    rc = cli.main(["taxis", "--config", str(cfg), "--chi", "0",
                   "--outdir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "chi=0 " in out
    assert "G_c=0.644135998735" in out


def test_unknown_config_key_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"swim": 1.0}))
    rc = cli.main(["taxis", "--config", str(cfg)])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["exit_code"] == 2
    assert "swim" in err["error"]["message"]


def test_point_keys_required(tmp_path, capsys):
    rc = cli.main(["dispersion", "--chi", "0", "--outdir", str(tmp_path)])
    assert rc == 2
    assert "a" in json.loads(capsys.readouterr().err)["error"]["message"]


def test_format_must_be_known(capsys):
    rc = cli.main(["taxis", "--chi", "0", "--format", "yaml"])
    assert rc == 2


def test_window_must_be_ordered(capsys):
    rc = cli.main(["critical", "--chi", "0", "--a_lo", "5", "--a_hi", "2"])
    assert rc == 2


def test_basic_state_reruns_byte_identical(tmp_path, capsys):
    argv = ["basic-state", "--chi", "0", "--M", "500",
            "--outdir", str(tmp_path)]
    assert cli.main(argv) == 0
    first = (tmp_path / "basic_state.csv").read_bytes()
    assert cli.main(argv) == 0
    assert (tmp_path / "basic_state.csv").read_bytes() == first
    header, cols, rows = read_table(tmp_path / "basic_state.csv")
    assert header[0] == "# schema: basic-state v1"
    assert cols == ["x3", "n_b", "tau", "G_b", "T_b", "temp_b"]
    assert len(rows) == 501
    assert "n_b max" in capsys.readouterr().out


def test_basic_state_without_swimming_is_uniform(tmp_path, capsys):
    rc = cli.main(["basic-state", "--chi", "0", "--U_s", "0", "--M", "300",
                   "--outdir", str(tmp_path)])
    assert rc == 0
    _, cols, rows = read_table(tmp_path / "basic_state.csv")
    nb = [float(r[cols.index("n_b")]) for r in rows]
    assert all(v == 1.0 for v in nb)


def test_critical_deep_layer_reference_point(tmp_path, capsys):
    rc = cli.main(["critical", "--config", str(CONFIGS / "deep_layer.json"),
                   "--outdir", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "critical.json").read_text())
    assert doc["_meta"]["schema"] == "critical v1"
    c = doc["critical"]
    assert c["kind"] == "oscillatory"
    assert c["a_c"] == pytest.approx(1.9, abs=0.1)
    assert c["Ra_c"] == pytest.approx(79.78, rel=0.02)
    assert c["omega_c"] == pytest.approx(12.98, rel=0.05)
    assert c["interior"] is True


def test_stable_family_has_no_critical_point(tmp_path, capsys):
    rc = cli.main(["critical", "--chi", "0", "--U_s", "0", "--R_T", "-100",
                   "--M", "300", "--n_steps", "400", "--n_pts", "4",
                   "--a_lo", "2", "--a_hi", "3", "--outdir", str(tmp_path)])
    assert rc == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["exit_code"] == 3
    assert "empty" in err["error"]["message"]


def test_sweep_keeps_failed_entries(tmp_path, capsys):
    rc = cli.main(["sweep-rt", "--chi", "0", "--U_s", "0",
                   "--rt_list", "-100", "--M", "300", "--n_steps", "400",
                   "--n_pts", "4", "--a_lo", "2", "--a_hi", "3",
                   "--outdir", str(tmp_path)])
    assert rc == 3
    _, cols, rows = read_table(tmp_path / "sweep_rt.csv")
    assert cols == ["R_T", "kind", "a_c", "Ra_c", "omega_c", "period", "error"]
    assert len(rows) == 1
    assert rows[0][cols.index("error")] != ""
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["entries"][0]["R_T"] == -100.0


def test_empty_sweep_list_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"chi": 0.0, "le_list": []}))
    rc = cli.main(["sweep-le", "--config", str(cfg)])
    assert rc == 2


def test_dispersion_json_layout(tmp_path, capsys):
    rc = cli.main(["dispersion"] + STAT_FLAGS + ["--outdir", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "dispersion.json").read_text())
    assert doc["_meta"]["schema"] == "dispersion v1"
    assert set(doc) >= {"a", "Ra", "gamma", "det", "log_scale", "cond"}
    assert doc["gamma"] == {"re": 0.0, "im": 0.0}
    # the point sits on the neutral curve, so the scaled determinant is tiny
    assert abs(doc["det"]["re"]) < 1e-6


def test_phase_rejects_stationary_mode(tmp_path, capsys):
    rc = cli.main(["phase"] + STAT_FLAGS
                  + ["--gamma_re", "0", "--outdir", str(tmp_path)])
    assert rc == 2
    assert "oscillatory" in json.loads(capsys.readouterr().err)["error"]["message"]


def test_phase_series(tmp_path, capsys):
    rc = cli.main(["phase"] + DEEP_FLAGS
                  + ["--n_t", "11", "--n_periods", "1.0",
                     "--outdir", str(tmp_path)])
    assert rc == 0
    header, cols, rows = read_table(tmp_path / "phase.csv")
    assert header[0] == "# schema: probe-series v1"
    assert cols == ["t", "T_perturb", "dT_perturb_dt"]
    assert len(rows) == 11
    assert "period=0.475" in capsys.readouterr().out


def test_fields_frames_and_manifest(tmp_path, capsys):
    rc = cli.main(["fields"] + DEEP_FLAGS
                  + ["--nx", "32", "--nz", "17", "--times", "0,0.1",
                     "--outdir", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "fields_manifest.json").read_text())
    assert doc["_meta"]["schema"] == "fields-manifest v1"
    assert len(doc["files"]) == 8
    for fname in doc["files"].values():
        assert (tmp_path / fname).exists()
    header, cols, rows = read_table(tmp_path / "field_psi_00.csv")
    assert header[0] == "# schema: field-frame v1"
    assert cols == ["x1", "x3", "value"]
    assert len(rows) == 32 * 17


def test_spectrum_ranks_by_growth(tmp_path, capsys):
    rc = cli.main(["spectrum"] + STAT_FLAGS
                  + ["--k", "4", "--ncheb", "48", "--outdir", str(tmp_path)])
    assert rc == 0
    _, cols, rows = read_table(tmp_path / "spectrum.csv")
    assert cols == ["rank", "gamma_re", "gamma_im"]
    re = [float(r[1]) for r in rows]
    assert re == sorted(re, reverse=True)
    # the stationary neutral root must show up as a marginal eigenvalue;
    # it is not the leading one here, a partner real mode born from the
    # same pair collision is already unstable at this Ra
    marginal = min(abs(complex(float(r[1]), float(r[2]))) for r in rows)
    assert marginal < 1e-3
