"""Config validation, CSV plumbing, sweep orchestration, and the CLI."""

import json
import shutil

import numpy as np
import pytest

from fhnlab import cli, harness


# ---------------------------------------------------------------------------
# rate fitting


@pytest.mark.parametrize("power,expected", [(1.0, 1.0), (0.5, 0.5)])
def test_fit_rate_recovers_exact_slopes(power, expected):
    pairs = [(e, 7.0 * e ** power) for e in (0.1, 0.05, 0.025, 0.0125)]
    fit = harness.fit_rate(pairs)
    assert abs(fit.slope - expected) <= 1e-12
    assert fit.r2 >= 1.0 - 1e-12
    assert fit.pairs == tuple(pairs)


def test_fit_rate_constant_statistic_is_flat():
    fit = harness.fit_rate([(0.1, 0.7), (0.05, 0.7), (0.025, 0.7), (0.0125, 0.7)])
    assert abs(fit.slope) <= 1e-12
    # zero total variance is reported as a perfect (if useless) fit
    assert fit.r2 == 1.0


def test_fit_rate_rejects_nonpositive_values():
    with pytest.raises(harness.DegeneratePairs):
        harness.fit_rate([(0.1, 0.7), (0.05, 0.0), (0.025, 0.2)])
    with pytest.raises(harness.DegeneratePairs):
        harness.fit_rate([(0.1, 0.7), (-0.05, 0.3), (0.025, 0.2)])


def test_fit_rate_needs_three_pairs():
    with pytest.raises(ValueError):
        harness.fit_rate([(0.1, 0.7), (0.05, 0.35)])


# ---------------------------------------------------------------------------
# configuration


def test_config_defaults_merge():
    cfg = harness.RunConfig({})
    assert cfg.raw["scheme"] == "muscl"
    assert cfg.raw["sweep"] == [0.1, 0.05, 0.025, 0.0125]
    assert cfg.raw["grid"]["n_v"] == 160


def test_config_nested_override_keeps_siblings():
    cfg = harness.RunConfig({"grid": {"n_v": 48}})
    assert cfg.raw["grid"]["n_v"] == 48
    assert cfg.raw["grid"]["n_w"] == 72
    assert cfg.raw["grid"]["v_half"] == 3.0


@pytest.mark.parametrize("bad", [
    {"grdi": {"n_v": 48}},
    {"grid": {"n_vv": 48}},
    {"model": {"alpha": 2.0}},
])
def test_config_unknown_keys_rejected(bad):
    with pytest.raises(harness.ConfigError):
        harness.RunConfig(bad)


@pytest.mark.parametrize("sweep", [
    [0.05, 0.1],          # increasing
    [0.1, 0.1],           # repeated
    [0.1, -0.05],         # nonpositive
])
def test_config_sweep_ordering_rejected(sweep):
    with pytest.raises(harness.ConfigError):
        harness.RunConfig({"sweep": sweep})


@pytest.mark.parametrize("bad", [
    {"scheme": "lax"},
    {"dump_fields": "some"},
])
def test_config_enum_fields_rejected(bad):
    with pytest.raises(harness.ConfigError):
        harness.RunConfig(bad)


def test_config_file_roundtrip(tmp_path):
    cfg = harness.RunConfig({"schedule": {"t_end": 0.25}, "seed": 3})
    path = tmp_path / "config.json"
    path.write_text(cfg.to_json())
    again = harness.RunConfig.from_file(path)
    assert again.raw == cfg.raw


# ---------------------------------------------------------------------------
# CSV plumbing


def test_eps_dirname_forms():
    assert harness.eps_dirname(0.05) == "eps_0p05"
    assert harness.eps_dirname(0.0125) == "eps_0p0125"
    assert harness.eps_dirname(1.0) == "eps_1"


def test_csv_roundtrip_is_exact(tmp_path):
    rows = [(0.1 + 0.2, np.pi), (1e-300, 12345.678901234567), (-0.0, 3.0)]
    path = tmp_path / "vals.csv"
    harness._write_csv(path, ["x", "y"], rows)
    cols = harness.read_csv_columns(path)
    assert list(cols) == ["x", "y"]
    # %.17g prints enough digits that every double survives the round trip
    assert cols["x"].tolist() == [r[0] for r in rows]
    assert cols["y"].tolist() == [r[1] for r in rows]


def test_content_hash_sensitive_to_bytes_and_names(tmp_path):
    a = tmp_path / "a"
    a.mkdir()
    (a / "one.csv").write_text("t,x\n0,1\n")
    (a / "notes.txt").write_text("ignored entirely")
    h0 = harness.content_hash(a)
    assert h0.startswith("sha256:")
    (a / "notes.txt").write_text("still ignored, different bytes")
    assert harness.content_hash(a) == h0
    (a / "one.csv").write_text("t,x\n0,2\n")
    h1 = harness.content_hash(a)
    assert h1 != h0
    (a / "one.csv").rename(a / "two.csv")
    (a / "two.csv").write_text("t,x\n0,1\n")
    assert harness.content_hash(a) != h0


# ---------------------------------------------------------------------------
# sweeps and verification


def test_empty_sweep_writes_manifest_and_fails_verification(tmp_path):
    manifest = harness.run_sweep(harness.RunConfig({"sweep": []}), tmp_path / "s")
    assert manifest["members"] == []
    assert (tmp_path / "s" / "sweep_manifest.json").exists()
    ok, checks = harness.verify(tmp_path / "s")
    assert not ok
    assert any("rate fits" in c.name and not c.passed for c in checks)


def test_failed_member_is_recorded_not_raised(tmp_path):
    # initial mean sits against the box edge, so initialization must refuse
    cfg = harness.RunConfig({"grid": {"n_v": 32, "n_w": 16},
                             "rho0": {"n_x": 2},
                             "initial": {"v0_offset": 2.9},
                             "schedule": {"t_end": 0.1},
                             "dump_fields": "none"})
    manifest = harness.run_single(cfg, 0.1, tmp_path / "r")
    assert manifest["status"] == "failed"
    assert "TruncationViolation" in manifest["error"]
    assert "content_hash" not in manifest
    assert (tmp_path / "r" / "manifest.json").exists()
    checks = harness.verify_run(tmp_path / "r")
    assert len(checks) == 1 and not checks[0].passed


def test_sweep_layout_and_verification(sweep_dir):
    manifest = json.loads((sweep_dir / "sweep_manifest.json").read_text())
    assert [m["epsilon"] for m in manifest["members"]] == [0.1, 0.05, 0.025, 0.0125]
    for m in manifest["members"]:
        sub = sweep_dir / m["dir"]
        assert sub.name == harness.eps_dirname(m["epsilon"])
        for name in ("moments.csv", "macro_compare.csv", "d2_series.csv",
                     "theorem_bound.csv", "manifest.json"):
            assert (sub / name).exists(), name
        member = json.loads((sub / "manifest.json").read_text())
        assert member["schedule_effective"]["n_snapshots"] == 21
        tb = harness.read_csv_columns(sub / "theorem_bound.csv")
        assert tb["t"].shape == (21,)
        assert np.all(np.diff(tb["t"]) > 0)
        assert tb["t"][-1] == pytest.approx(1.0)
        assert np.all(tb["statistic"] > 0)
        assert np.all(np.isfinite(tb["normalized"]))

    ok, checks = harness.verify(sweep_dir)
    assert ok, "\n".join(c.render() for c in checks if not c.passed)
    names = " | ".join(c.name for c in checks)
    assert "concentration rate" in names
    assert "macro gap rate" in names
    assert "plateau" in names


def test_high_moment_stays_bounded(sweep_dir):
    """The high absolute moment used by the tightness argument never grows.

    Concentration should shrink it; 50 is several times the value the
    initial profile starts from.
    """
    manifest = json.loads((sweep_dir / "sweep_manifest.json").read_text())
    for m in manifest["members"]:
        mo = harness.read_csv_columns(sweep_dir / m["dir"] / "moments.csv")
        assert np.all(np.isfinite(mo["m_high"]))
        assert mo["m_high"].max() <= 50.0
        first = mo["m_high"][mo["t"] == mo["t"].min()].max()
        last = mo["m_high"][mo["t"] == mo["t"].max()].max()
        assert last <= first


def test_verify_detects_tampering(sweep_dir, tmp_path):
    src = sweep_dir / harness.eps_dirname(0.1)
    dst = tmp_path / "copy"
    shutil.copytree(src, dst)
    ok, _ = harness.verify(dst)
    assert ok
    path = dst / "theorem_bound.csv"
    path.write_bytes(path.read_bytes() + b"\n")
    ok, checks = harness.verify(dst)
    assert not ok
    assert any("content hash" in c.name and not c.passed for c in checks)


def test_verify_without_manifest(tmp_path):
    ok, checks = harness.verify(tmp_path)
    assert not ok and len(checks) == 1


# ---------------------------------------------------------------------------
# command line


TINY = {
    "grid": {"n_v": 32, "n_w": 16},
    "rho0": {"n_x": 2},
    "schedule": {"t_end": 0.1, "snapshot_stride": 0.05},
    "sweep": [0.1, 0.05],
    "dump_fields": "none",
}


def _write_config(tmp_path, **over):
    raw = harness.RunConfig({**TINY, **over}).raw
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return str(path)


def test_cli_validate(tmp_path, capsys):
    assert cli.main(["validate", _write_config(tmp_path)]) == 0
    assert "[PASS]" in capsys.readouterr().out
    # linear-growth drift violates the confinement checks but must not crash
    bad = _write_config(tmp_path, model={"drift_kind": "polynomial",
                                         "drift_coeffs": [0.0, 1.0]})
    assert cli.main(["validate", bad]) == 1
    assert "[FAIL]" in capsys.readouterr().out


def test_cli_kinetic_run_and_verify(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    out = tmp_path / "runs"
    assert cli.main(["kinetic-run", cfg, "--output", str(out)]) == 0
    run_dir = out / harness.eps_dirname(0.1)
    assert (run_dir / "moments.csv").exists()
    assert cli.main(["verify", str(run_dir)]) == 0
    assert "[PASS]" in capsys.readouterr().out


def test_cli_kinetic_run_reports_failure(tmp_path, capsys):
    cfg = _write_config(tmp_path, initial={"v0_offset": 2.9})
    assert cli.main(["kinetic-run", cfg, "--output", str(tmp_path / "r")]) == 1
    assert "TruncationViolation" in capsys.readouterr().err


def test_cli_macro_run(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    assert cli.main(["macro-run", cfg, "--output", str(tmp_path / "m")]) == 0
    cols = harness.read_csv_columns(tmp_path / "m" / "macro_limit.csv")
    assert list(cols) == ["t", "node", "V", "W"]
    v0 = harness.RunConfig(TINY).v0(harness.RunConfig(TINY).rho0())
    assert np.allclose(cols["V"][cols["t"] == 0.0], v0, atol=1e-12)


def test_cli_particle_run(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    code = cli.main(["particle-run", cfg, "--epsilon", "0.1", "--n", "400",
                     "--output", str(tmp_path / "p")])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n_particles"] == 400
    assert len(summary["within_3se_per_node"]) == 2


def test_cli_sweep_and_short_sweep_verify(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    out = tmp_path / "sweep"
    assert cli.main(["sweep-eps", cfg, "--output", str(out)]) == 0
    assert (out / "sweep_manifest.json").exists()
    # two members is enough to run but too few for the rate fits
    assert cli.main(["verify", str(out)]) == 1
    assert "rate fits" in capsys.readouterr().out


def test_cli_fit_rate(tmp_path, capsys):
    path = tmp_path / "pairs.csv"
    harness._write_csv(path, ["eps", "statistic"],
                       [(e, 7.0 * e) for e in (0.1, 0.05, 0.025)])
    assert cli.main(["fit-rate", str(path)]) == 0
    assert "slope 1" in capsys.readouterr().out
    assert cli.main(["fit-rate", str(path), "--y", "missing"]) == 1
