"""Config parsing, CSV/manifest plumbing, experiment runners, and the CLI.

Runner tests shrink the built-in default configs with dataclasses.replace so
this module stays fast; the full-size default runs live in test_acceptance.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import replace

import numpy as np
import pytest

from risklab import cli, economy, experiments

SMOKE_TRIALS = 200

THM1_COLUMNS = [
    "experiment", "d", "eps", "tau", "r", "kappa", "n", "hits",
    "p_hat", "ci_low", "ci_high", "bound", "within_bound", "error",
]
THM2_COLUMNS = [
    "experiment", "d", "eps", "r", "kappa", "n", "n_accepted", "hits",
    "indeterminate", "conditioned", "p_hat", "ci_low", "ci_high",
    "bound", "within_bound", "error",
]
CRU_COLUMNS = [
    "experiment", "d", "beta", "improvement", "r", "n", "n_accepted", "hits",
    "indeterminate", "p_hat", "ci_low", "ci_high", "bound", "within_bound", "error",
]
PROP3_COLUMNS = [
    "experiment", "phase", "d", "eps", "rho_mode", "rho", "delta", "dist",
    "empty_intersection", "vol_J", "vol_Jc", "min_rel_vol",
    "bound_c0.5", "bound_c1", "bound_c2", "within_bound", "error",
]
CHECKS_COLUMNS = ["family", "check", "passed", "detail"]


def _small(experiment_id, **overrides):
    return replace(experiments.default_config(experiment_id), **overrides)


def _manifest_dict(text):
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition(" = ")
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("experiment_id,seed", [
    ("thm1", 1733), ("thm2", 744), ("cru", 55), ("prop3", 99), ("checks", 7),
])
def test_default_configs_parse(experiment_id, seed):
    cfg = experiments.default_config(experiment_id)
    assert cfg.experiment_id == experiment_id
    assert cfg.seed == seed


def test_parse_is_deterministic_and_sha_tracks_content():
    text = experiments.DEFAULT_CONFIG_TEXT["thm1"]
    a = experiments.parse_config_text(text)
    b = experiments.parse_config_text(text)
    assert a == b
    assert a.sha256() == b.sha256()
    c = replace(a, seed=a.seed + 1)
    assert c.sha256() != a.sha256()


def test_canonical_text_covers_agents():
    cfg = experiments.default_config("thm1")
    text = cfg.canonical_text()
    assert text.count("agent.preference = cobb-douglas") == 3
    assert "seed = 1733" in text


def test_comments_and_blank_lines_are_ignored():
    cfg = experiments.parse_config_text(
        "# a full-line comment\n"
        "\n"
        "experiment = checks   # trailing comment\n"
        "seed = 12\n"
    )
    assert cfg.experiment_id == "checks"
    assert cfg.seed == 12


@pytest.mark.parametrize("text,match", [
    ("experiment = thm1\n", "explicit seed"),
    ("seed = 1\n", "must set experiment"),
    ("experiment = nope\nseed = 1\n", "unknown experiment id"),
    ("experiment = thm1\nseed = 1\nfoo = 2\n", "unknown key 'foo'"),
    ("seed = 1\nseed = 2\nexperiment = thm1\n", "duplicate key"),
    ("experiment thm1\n", "expected key = value"),
    ("experiment = thm1\nseed = 1\nagent.prior = uniform\n",
     "before agent.preference"),
    ("experiment = thm1\nseed = 1\nagent.preference = cobb-douglas\n"
     "agent.colour = red\n", "unknown agent key"),
    ("experiment = cru\nseed = 1\neps = 0.1\n", "does not recognize key 'eps'"),
    ("experiment = checks\nseed = 1\ndims = 2\n", "does not recognize key 'dims'"),
    ("experiment = prop3\nseed = 1\nagent.preference = cobb-douglas\n",
     "constructs its own agents"),
    ("experiment = thm2\nseed = 1\ncondition_positive_price = maybe\n",
     "expected a boolean"),
    ("experiment = thm1\nseed = 1\ntrials = 50\n", "trials must be >= 100"),
])
def test_config_errors(text, match):
    with pytest.raises(ValueError, match=match):
        experiments.parse_config_text(text)


# ---------------------------------------------------------------------------
# CSV and manifest plumbing
# ---------------------------------------------------------------------------


def test_csv_formatting_rules():
    columns = ["f", "b", "missing", "i", "s"]
    rows = [{"f": 0.1, "b": True, "missing": None, "i": 7, "s": "x"}]
    text = experiments.rows_to_csv(columns, rows)
    assert text == "f,b,missing,i,s\n0.10000000000000001,true,,7,x\n"
    assert experiments.rows_to_csv(["a"], [{"b": 1}]) == "a\n\n"


def test_manifest_hashes_and_layout(tmp_path):
    cfg = _small("thm1", trials=SMOKE_TRIALS, dims=(2,))
    res = experiments.run_experiment(cfg)
    man = _manifest_dict(res.manifest_text())
    assert man["schema"] == experiments.SCHEMA_VERSION
    assert man["experiment"] == "thm1"
    assert man["config_sha256"] == cfg.sha256()
    assert man["results_sha256"] == hashlib.sha256(res.csv_text.encode()).hexdigest()
    assert man["columns"] == ",".join(THM1_COLUMNS)
    assert man["rows"] == "1"
    assert man["plotdata"] == ",".join(sorted(res.plotdata))
    assert res.manifest_text().splitlines()[-1].startswith("wall_time_s = ")

    out = res.write(tmp_path / "run")
    assert (out / "results.csv").read_text() == res.csv_text
    assert (out / "manifest.txt").exists()
    written = sorted(p.name for p in (out / "plotdata").iterdir())
    assert written == sorted(res.plotdata)
    assert written == ["thm1_bound.csv", "thm1_ci_high.csv", "thm1_p_hat.csv"]


def test_run_experiment_writes_when_out_dir_set(tmp_path):
    cfg = _small("thm1", trials=SMOKE_TRIALS, dims=(2,), out_dir=str(tmp_path / "auto"))
    experiments.run_experiment(cfg)
    assert (tmp_path / "auto" / "results.csv").exists()
    assert (tmp_path / "auto" / "manifest.txt").exists()


# ---------------------------------------------------------------------------
# runners (shrunk configs)
# ---------------------------------------------------------------------------


def test_thm1_smoke_row_shape():
    res = experiments.run_experiment(_small("thm1", trials=SMOKE_TRIALS, dims=(2, 8)))
    assert res.columns == THM1_COLUMNS
    assert [r["d"] for r in res.rows] == [2, 8]
    for row in res.rows:
        assert row["error"] is None
        assert row["experiment"] == "thm1"
        assert row["n"] == SMOKE_TRIALS
        assert 0 <= row["hits"] <= row["n"]
        assert 0.0 <= row["ci_low"] <= row["p_hat"] <= row["ci_high"] <= 1.0
        assert row["bound"] > 0
        assert row["tau"] == 1.0  # unit endowments in the default config


def test_thm2_smoke_row_shape():
    res = experiments.run_experiment(_small("thm2", trials=SMOKE_TRIALS, dims=(2,)))
    assert res.columns == THM2_COLUMNS
    assert len(res.rows) == 2  # one per eps in the default sweep
    for row in res.rows:
        assert row["error"] is None
        assert row["conditioned"] is False
        assert row["n_accepted"] == row["n"] == SMOKE_TRIALS
        assert row["indeterminate"] == 0
        assert 0.0 <= row["p_hat"] <= 1.0


def test_thm2_conditioning_doubles_bound_and_filters_draws():
    base = _small("thm2", trials=1000, dims=(2,))
    plain = experiments.run_experiment(base)
    cond = experiments.run_experiment(replace(base, condition_positive_price=True))
    for rp, rc in zip(plain.rows, cond.rows):
        assert (rp["d"], rp["eps"]) == (rc["d"], rc["eps"])
        assert rc["conditioned"] is True
        assert rc["bound"] == 2.0 * rp["bound"]
        assert rc["n_accepted"] < rc["n"]  # a positive-price cut discards draws


def test_cru_smoke_identities():
    res = experiments.run_experiment(_small("cru", trials=500))
    assert res.columns == CRU_COLUMNS
    (row,) = res.rows
    assert row["error"] is None
    assert 0.0 < row["beta"] < 1.0
    assert math.isclose(row["improvement"], 1.0 - row["beta"] ** 2, rel_tol=1e-12)
    assert math.isclose(row["beta"], 0.8, abs_tol=1e-3)
    assert "cru_bound_vs_d.csv" in res.plotdata


def test_prop3_smoke_phases_and_columns():
    cfg = _small("prop3", trials=1000, n_economies=2, family_trials=1000, dims=(3, 4))
    res = experiments.run_experiment(cfg)
    assert res.columns == PROP3_COLUMNS
    dominated = [r for r in res.rows if r["phase"] == "dominated"]
    constant = [r for r in res.rows if r["phase"] == "constant"]
    # 2 economies x 2 rho modes, then per swept d: 2 modes + 1 volume row
    assert len(dominated) == 2 * 2 + 2 * 2
    assert len(constant) == 2
    for row in dominated:
        assert row["error"] is None
        assert row["empty_intersection"] is True
        assert row["rho"] > 0
        assert math.isclose(row["delta"], row["eps"] / row["rho"], rel_tol=1e-12)
        assert row["rho_mode"] in ("definitional", "paper")
    for row in constant:
        assert row["rho_mode"] is None
        assert row["min_rel_vol"] <= 0.5
    assert set(res.plotdata) == {"thm4_min_rel_vol.csv", "thm4_bound_c1.csv"}


def test_checks_smoke_all_pass():
    res = experiments.run_experiment(_small("checks", trials=20_000))
    assert res.columns == CHECKS_COLUMNS
    families = {r["family"] for r in res.rows}
    assert families == set(experiments.CHECK_FAMILIES)
    failed = [r for r in res.rows if r["passed"] is not True]
    assert failed == []


def test_single_family_config_runs_only_that_family():
    cfg = experiments.parse_config_text("experiment = bm\nseed = 3\ntrials = 200\n")
    res = experiments.run_experiment(cfg)
    assert res.experiment_id == "bm"
    assert {r["family"] for r in res.rows} == {"bm"}
    assert all(r["passed"] is True for r in res.rows)


def test_unknown_law_kind_raises():
    cfg = _small("thm1", trials=SMOKE_TRIALS, dims=(2,), law_kind="bogus")
    with pytest.raises(ValueError):
        experiments.run_experiment(cfg)


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------


def test_results_are_byte_identical_across_runs():
    cfg = _small("thm1", trials=SMOKE_TRIALS, dims=(2,))
    a = experiments.run_experiment(cfg)
    b = experiments.run_experiment(cfg)
    assert a.csv_text == b.csv_text
    am, bm = _manifest_dict(a.manifest_text()), _manifest_dict(b.manifest_text())
    assert am["results_sha256"] == bm["results_sha256"]


def test_results_do_not_depend_on_thread_count():
    # 40000 draws spans three scheduling blocks, so threads actually split work
    one = experiments.run_experiment(_small("thm1", trials=40_000, dims=(2,), threads=1))
    three = experiments.run_experiment(_small("thm1", trials=40_000, dims=(2,), threads=3))
    assert one.csv_text == three.csv_text


# ---------------------------------------------------------------------------
# closed-form anchors
# ---------------------------------------------------------------------------


def test_anchor_values_and_rendering():
    anchors = experiments.reproduce_paper_anchors()
    assert len(anchors) == 3
    (_, v1, n1), (_, v2, n2), (_, v3, n3) = anchors
    # rel_tol covers the different association order inside the bound routines
    assert math.isclose(v1, math.exp(-5.0), rel_tol=1e-12)
    assert math.isclose(v2, math.exp(-500.0 / 81.0), rel_tol=1e-12)
    assert n1 == "= 0.67%"
    assert n2 == "= 0.21%"
    assert 1.33 < v3 < 1.34
    assert v3 < math.exp(0.5)
    assert "1.6487" in n3

    table = experiments.format_anchor_table()
    assert "0.006738" in table
    assert "0.002085" in table
    assert "1.338" in table


# ---------------------------------------------------------------------------
# the two-agent ambiguity construction
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("d,a,b", [
    (4, 0.25, 0.60),   # overlapping caps
    (3, 0.20, 0.70),
    (5, 0.60, 0.20),   # disjoint caps
    (12, 0.60, 0.20),
])
def test_ambiguity_instance_trade_hurts_both_agents(d, a, b):
    inst = experiments._ambiguity_instance(d, a, b)
    assert inst.eps > 0
    assert np.allclose(inst.traded.acts.sum(axis=0), np.ones(d))
    assert np.all(inst.traded.acts >= 0)
    floor = 2.0 * inst.eps * 0.5  # eps = min utility drop / (2 t), t = 0.5
    for i, agent in enumerate(inst.econ.agents):
        u_const = agent.preference.utility(inst.constant.acts[i])
        u_trade = agent.preference.utility(inst.traded.acts[i])
        assert u_const - u_trade >= floor - 1e-12


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def test_cli_runs_thm1_and_writes_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    rc = cli.main(["thm1", "--seed", "5", "--trials", "200", "--dims", "2",
                   "--out", str(out)])
    assert rc == 0
    assert (out / "results.csv").exists()
    assert (out / "manifest.txt").exists()
    assert "thm1: 1 rows" in capsys.readouterr().out


def test_cli_rejects_config_for_another_experiment(tmp_path, capsys):
    path = tmp_path / "cru.cfg"
    path.write_text("experiment = cru\nseed = 5\ntrials = 200\n")
    rc = cli.main(["thm1", "--config", str(path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_cli_checks_accepts_single_family_config(tmp_path):
    path = tmp_path / "bm.cfg"
    path.write_text("experiment = bm\nseed = 3\ntrials = 200\n")
    rc = cli.main(["checks", "--config", str(path), "--out", str(tmp_path / "o")])
    assert rc == 0
    assert (tmp_path / "o" / "results.csv").exists()


def test_cli_anchors_prints_table(capsys):
    assert cli.main(["anchors"]) == 0
    out = capsys.readouterr().out
    assert "0.006738" in out
    assert "0.002085" in out


def test_cli_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert "risklab" in capsys.readouterr().out


def test_cli_condition_flag_is_thm2_only():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["thm1", "--condition-positive-price"])
