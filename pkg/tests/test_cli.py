import json

import pytest

from zorich_lab.cli import main


@pytest.fixture
def run(tmp_path):
    def _run(*args, config=None):
        argv = list(args) + ["--out", str(tmp_path / "out")]
        if config is not None:
            path = tmp_path / "cfg.json"
            path.write_text(json.dumps(config))
            argv += ["--config", str(path)]
        return main(argv)

    return _run


SMALL = {"lambda": 2.0, "nu": 1.0, "render": {"resolution": [32, 24], "window": [-2, 2, -1, 2], "png": False}}


def test_render(run, tmp_path):
    assert run("render", "--threads", "2", config=SMALL) == 0
    assert (tmp_path / "out" / "slice.ppm").read_bytes().startswith(b"P6\n32 24\n255\n")


def test_orbit_itinerary_periodic(run, tmp_path, capsys):
    assert run("orbit", config=SMALL) == 0
    assert (tmp_path / "out" / "orbit.csv").read_text().startswith("k,x1,x2,x3,parity")
    assert run("itinerary") == 0
    assert run("periodic") == 0
    doc = json.loads((tmp_path / "out" / "periodic.json").read_text())
    assert doc["converged"] and doc["residual"] < 1e-7


def test_periodic_inadmissible(run):
    assert run("periodic", config={"periodic": {"word": [[0, 0], [0, -1]]}}) == 1


def test_verify_regime(run, tmp_path):
    cfg = {"verify": {"samples": 300, "pairs": 300, "quad_resolution": 64, "n_max": 3}}
    assert run("verify", config=cfg) == 0
    doc = json.loads((tmp_path / "out" / "verify.json").read_text())
    assert doc["all_ok"] and doc["regime"]["verdicts"]["large_lambda_regime"]


def test_verify_failure_exit_code(run, monkeypatch):
    import zorich_lab.analysis as analysis

    record = {"check": "stub", "ok": False, "lhs": 0.0, "rhs": 1.0, "relation": ">="}
    monkeypatch.setattr(analysis, "run_verification_suite", lambda *a, **k: [record])
    assert run("verify") == 2


def test_regime_reports_without_failing(run, capsys):
    assert run("regime", config={"lambda": 1.0}) == 0
    out = capsys.readouterr().out
    assert '"lambda_gt_L5": false' in out


def test_surfaces_and_curves(run, tmp_path):
    cfg = {"lambda": 2.0, "nu": 1.0, "surfaces": {"n_max": 3, "resolution": 64, "grid": 8}, "curves": {"n_points": 50}}
    assert run("surfaces", config=cfg) == 0
    assert run("curves", config=cfg) == 0
    lines = (tmp_path / "out" / "volumes.csv").read_text().splitlines()
    assert lines[0] == "n,T_n_quadrature,T_n_formula,rel_err" and len(lines) == 5


def test_config_errors(run, tmp_path):
    bad_frame = {"render": {"plane": "affine", "origin": [0, 0, 0], "e1": [1, 0, 0], "e2": [1, 1, 0]}}
    assert run("render", config=bad_frame) == 1
    assert run("orbit", config={"no_such_key": 1}) == 1
    assert run("render", "--bogus") == 1
    assert main(["frobnicate"]) == 1
    assert run("regime", "--threads", "0") == 1
    assert run("regime", "--seed", "-1") == 1
