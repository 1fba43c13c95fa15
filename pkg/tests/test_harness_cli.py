import json
import os

import numpy as np
import pytest

from csarbandit import cli
from csarbandit.core import BanditInstance, make_instance
from csarbandit.exceptions import InvalidParams, NoData
from csarbandit.harness import (
    ExperimentConfig,
    _checkpoints,
    condition_study,
    regret_constant,
    run_preset,
    uniform_subset_regret,
)


def test_config_overrides_and_validation():
    cfg = ExperimentConfig("mse_study", overrides={"n": 24, "k": None})
    assert cfg.params()["n"] == 24 and cfg.params()["k"] == 4
    assert ExperimentConfig("mse_study", paper_scale=True).params()["n"] == 144
    with pytest.raises(InvalidParams):
        ExperimentConfig("nope").params()
    with pytest.raises(InvalidParams):
        ExperimentConfig("mse_study", overrides={"horizon": 5}).params()
    with pytest.raises(InvalidParams):
        ExperimentConfig("mse_study", overrides={"reps": 0}).params()


def test_mse_study_zero_noise():
    res = run_preset(ExperimentConfig("mse_study", overrides={"reps": 3, "noise": "zero", "m_grid": (2, 4)}))
    assert res.checks == {"all_methods_exact": True}
    assert all(row[5] < 1e-24 for row in res.tables["runs"][1])


def test_condition_study_no_data(monkeypatch):
    from csarbandit import harness

    monkeypatch.setattr(harness, "_condition_job", lambda job: (job[1], 1.0, 0.0, 0) if job[1] < 0 else (job[1], None, None, 1000))
    with pytest.raises(NoData):
        condition_study(ExperimentConfig("condition_study", overrides={"matrices": 5, "inner_reps": 1}))


def test_regret_study_k_sweep_rows():
    res = run_preset(
        ExperimentConfig("regret_study", overrides={"ks": (2, 3), "reps": 2, "horizon": 20_000, "n": 12})
    )
    header, rows = res.tables["summary"]
    assert [r[0] for r in rows] == [2, 3]
    assert header[0] == "k"


def test_uniform_baseline_is_exact_on_equal_means():
    inst = BanditInstance([1.0, 1.0, 0.0, 0.0], 1, "bernoulli")
    cps = np.array([10, 100, 1000])
    curve = uniform_subset_regret(inst, 1000, np.random.default_rng(0), cps)
    assert np.all(np.diff(curve) >= 0)
    assert abs(curve[-1] / 1000 - 0.5) < 0.06  # half the picks cost 1


def test_checkpoints_include_half_and_end():
    cps = _checkpoints(200_000, 40)
    assert cps[-1] == 200_000 and 100_000 in cps and np.all(np.diff(cps) > 0)


def test_regret_constant():
    assert regret_constant(2) == pytest.approx(1024 / 3)


def test_workers_do_not_change_output():
    base = dict(reps=4)
    one = run_preset(ExperimentConfig("regret_tightness", seed=9, workers=1, overrides=base))
    two = run_preset(ExperimentConfig("regret_tightness", seed=9, workers=2, overrides=base))
    for name in one.tables:
        assert one.csv_text(name) == two.csv_text(name)


def test_written_artifacts(tmp_path):
    res = run_preset(
        ExperimentConfig("mse_study", out=str(tmp_path), overrides={"reps": 3, "n": 16, "k": 2, "m_grid": (2, 4)})
    )
    names = sorted(os.listdir(tmp_path))
    assert names == ["mse_study_meta.json", "mse_study_mse.svg", "mse_study_runs.csv", "mse_study_summary.csv"]
    assert (tmp_path / "mse_study_mse.svg").read_text().startswith("<svg")
    meta = json.loads((tmp_path / "mse_study_meta.json").read_text())
    assert meta["params"]["m_grid"] == [2, 4] and set(meta["checks"]) == set(res.checks)
    lines = (tmp_path / "mse_study_runs.csv").read_text().splitlines()
    assert lines[0] == "rep,m,method,m_method,pulls,mse" and len(lines) == 1 + 3 * 2 * 3


# ---- CLI


def test_cli_hadamard(capsys):
    assert cli.main(["hadamard", "dump", "--order", "4", "--check"]) == 0
    out = capsys.readouterr().out.split()
    assert out == ["++++", "+-+-", "++--", "+--+"]
    assert cli.main(["hadamard", "dump", "--order", "6"]) == 1


def test_cli_estimate_schema(capsys):
    assert cli.main(["estimate", "--method", "all", "--reps", "2", "--n", "8", "--k", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "rep,method,mse,max_err,pulls" and len(lines) == 7


def test_cli_csar_schemas(tmp_path):
    rc = cli.main(["csar", "--instance", "two_gap:delta_plus=1,delta_minus=0.5", "--n", "8", "--k", "2",
                   "--reps", "2", "--out", str(tmp_path)])
    assert rc == 0
    runs = (tmp_path / "csar_runs.csv").read_text().splitlines()
    summary = (tmp_path / "csar_summary.csv").read_text().splitlines()
    assert runs[0] == "rep,phase,eps_t,delta_t,n_surviving,n_accepted,pulls,cum_regret"
    assert summary[0] == "rep,success,phases,total_pulls,final_regret" and len(summary) == 3


def test_cli_csar_instance_json(tmp_path, capsys):
    path = tmp_path / "inst.json"
    path.write_text(BanditInstance([0.9, 0.5, 0.3, 0.1], 1, "zero").to_json())
    assert cli.main(["csar", "--instance", str(path)]) == 0
    summary = capsys.readouterr().out.strip().splitlines()
    row = summary[-1].split(",")
    assert summary[-2] == "rep,success,phases,total_pulls,final_regret"
    assert row[:3] == ["0", "1", "3"] and int(row[3]) > 0
    inline = '{"k": 1, "means": [0.9, 0.5, 0.3, 0.1], "noise": "zero"}'
    assert cli.main(["csar", "--instance", inline, "--mode", "pac", "--eps", "0.5"]) == 0


def test_cli_instance_spec_parsing():
    inst, kind, params = cli.parse_instance_spec("planted_subset:subset=0;2,eps=0.3")
    assert inst is None and kind == "planted_subset" and params == {"subset": [0, 2], "eps": 0.3}
    with pytest.raises(Exception):
        cli.parse_instance_spec("wat:x=1")
    assert cli.main(["csar", "--instance", "wat"]) == 1


def test_cli_theory(capsys):
    assert cli.main(["theory-check", "rho", "--n", "4", "--k", "2"]) == 0
    fields = dict(item.split("=") for item in capsys.readouterr().out.split()[:2])
    assert float(fields["rho"]) == pytest.approx(4.0, abs=1e-10) and float(fields["n/k"]) == 2.0


def test_cli_preset_exit_codes(tmp_path, capsys):
    rc = cli.main(["mse-study", "--reps", "2", "--n", "16", "--k", "2", "--m-grid", "2,4"])
    assert rc in (0, 2)
    rc = cli.main(["mse-study", "--reps", "2", "--noise", "zero", "--m-grid", "2,4", "--out", str(tmp_path)])
    assert rc == 0 and (tmp_path / "mse_study_summary.csv").exists()
    # nearly equal eps values give equal pull counts, so the slope check fails
    rc = cli.main(["sample-scaling", "--reps", "1", "--eps-grid", "0.4,0.39"])
    assert rc == 2
    assert cli.main(["mse-study", "--reps", "0"]) == 1
    assert cli.main(["no-such-command"]) == 1


def test_cli_config_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"reps": 2, "m_grid": [2, 4], "noise": "zero", "seed": 3}))
    assert cli.main(["--config", str(cfg), "mse-study", "--out", str(tmp_path / "a")]) == 0
    args = cli.parse_args(["--config", str(cfg), "mse-study", "--reps", "5"])
    assert args.reps == 5 and args.m_grid == (2, 4) and args.seed == 3


def test_cli_global_flags_after_subcommand():
    args = cli.parse_args(["hadamard", "dump", "--order", "8", "--seed", "4", "--workers", "2"])
    assert args.seed == 4 and args.workers == 2
    args = cli.parse_args(["--seed", "6", "hadamard", "dump", "--order", "8"])
    assert args.seed == 6
