import json

import pytest

from frogmodel.cli import main
from frogmodel.config import ExperimentConfig, parse_pmf, parse_rule, parse_walker
from frogmodel.harness import (EXIT_CAP, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, PreconditionError, cmd_verify,
                               run_experiment)
from frogmodel.init_config import ConfigError, Deterministic, IID, point

COMPARE = """
[experiment]
name = small_compare
kind = compare
seed = 3
[model]
graph = tree(2, depth=4)
walker = srw
rules = iid(poisson(1, 1e-12)); deterministic(1)
horizons = 100, 300
replicas = 150
[order]
kind = pgf
t_grid = 16
bootstrap_reps = 200
"""


def write(tmp_path, text, name="exp.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_config_and_digest_stable():
    cfg = ExperimentConfig.parse(COMPARE)
    assert cfg.kind == "compare" and cfg.horizons == (100, 300) and len(cfg.rules) == 2
    # reordering sections and keys does not change the digest
    shuffled = "\n".join([
        "[order]", "bootstrap_reps = 200", "t_grid = 16", "kind = pgf",
        "[model]", "replicas = 150", "horizons = 100, 300", "rules = iid(poisson(1, 1e-12)); deterministic(1)",
        "walker = srw", "graph = tree(2, depth=4)",
        "[experiment]", "seed = 3", "kind = compare", "name = small_compare",
        "[output]", "path = elsewhere.jsonl",
    ])
    assert ExperimentConfig.parse(shuffled).digest() == cfg.digest()
    assert cfg.with_seed(4).digest() != cfg.digest()


@pytest.mark.parametrize("bad", [
    COMPARE.replace("kind = compare", "kind = nope"),
    COMPARE.replace("replicas = 150", "replicas = 0"),
    COMPARE + "[extra]\nx = 1\n",
    COMPARE.replace("walker = srw", "walker = srw\ncolour = red"),
    COMPARE.replace("; deterministic(1)", ""),
    COMPARE.replace("graph = tree(2, depth=4)", "graph = moebius(3)"),
])
def test_bad_configs(bad):
    with pytest.raises(Exception) as ei:
        ExperimentConfig.parse(bad)
    assert isinstance(ei.value, (ConfigError, ValueError))


def test_parse_helpers():
    assert parse_pmf("point(2)") == point(2)
    assert parse_pmf("{0: 0.5, 1: 0.5}").probs == (0.5, 0.5)
    assert parse_rule("deterministic(2)") == Deterministic(2)
    assert isinstance(parse_rule("iid(bernoulli(0.5))"), IID)
    assert parse_walker("biased(0.7)").p_right == 0.7
    for bad in ("gauss(1)", "point(x)"):
        with pytest.raises(ConfigError):
            parse_pmf(bad)
    with pytest.raises(ConfigError):
        parse_walker("levy")


def test_compare_runs_and_is_deterministic():
    cfg = ExperimentConfig.parse(COMPARE)
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    assert a.lines() == b.lines()
    verdicts = [r for r in a.records if r["type"] == "verdict"]
    assert len(verdicts) == 4 and all(v["status"] != "violated" for v in verdicts)
    assert a.exit_code == EXIT_OK
    runs = [r for r in a.records if r["type"] == "run"]
    assert len(runs) == 2 * 2 * 150
    assert run_experiment(cfg.with_seed(9)).lines() != a.lines()


def test_precondition_refusal(tmp_path):
    bad = COMPARE.replace("iid(poisson(1, 1e-12)); deterministic(1)", "deterministic(2); deterministic(1)")
    with pytest.raises(PreconditionError):
        run_experiment(ExperimentConfig.parse(bad))
    assert main(["compare", "--config", str(write(tmp_path, bad)), "--out", str(tmp_path / "o.jsonl")]) == EXIT_USAGE


def test_cli_byte_identical_and_workers(tmp_path):
    cfgp = write(tmp_path, COMPARE)
    outs = []
    for i, w in enumerate((1, 1, 2)):
        out = tmp_path / f"run{i}.jsonl"
        assert main(["run", "--config", str(cfgp), "--out", str(out), "--workers", str(w), "--emit-csv"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    meta = json.loads((tmp_path / "run0.jsonl.meta.json").read_text())
    assert "timestamp" in meta and meta["digest"] == ExperimentConfig.parse(COMPARE).digest()
    assert (tmp_path / "run0.margins.csv").exists()


def test_cli_usage_errors(tmp_path, capsys):
    assert main([]) == EXIT_USAGE
    assert main(["verify", "nonsense"]) == EXIT_USAGE
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == EXIT_USAGE
    # command must match the config kind
    assert main(["shape", "--config", str(write(tmp_path, COMPARE))]) == EXIT_USAGE
    assert main(["run", "--config", str(write(tmp_path, COMPARE)), "--workers", "0"]) == EXIT_USAGE


def test_verify_suite_json(tmp_path):
    out = tmp_path / "verify.json"
    assert main(["verify", "operator_a", "--out", str(out)]) == EXIT_OK
    rec = json.loads(out.read_text().strip())
    assert rec["type"] == "verify" and rec["passed"] and rec["pairs"] == 100
    assert cmd_verify("moments").exit_code == EXIT_OK


SIM = """
[experiment]
name = sim
kind = simulate
seed = 1
[model]
graph = {graph}
rules = deterministic(1)
horizons = {horizons}
replicas = {replicas}
max_active = {cap}
"""


def test_simulate_plateau_on_finite_tree():
    cfg = ExperimentConfig.parse(SIM.format(graph="tree(2, depth=3)", horizons="50, 400", replicas=30, cap=10**6))
    res = run_experiment(cfg)
    growth = [r for r in res.records if r["type"] == "growth"]
    assert growth[0]["label"] == "plateau" and "not recurrence" in growth[0]["caveat"]
    assert res.exit_code == EXIT_OK


def test_simulate_capped_runs_are_flagged(tmp_path):
    # a binary tree with one frog per site wakes exponentially many frogs
    text = SIM.format(graph="tree(3)", horizons="40", replicas=3, cap=200)
    res = run_experiment(ExperimentConfig.parse(text))
    runs = [r for r in res.records if r["type"] == "run"]
    assert all(r["capped"] for r in runs)
    assert res.exit_code == EXIT_CAP
    summ = [r for r in res.records if r["type"] == "summary"][0]
    assert summ["mean_r"] is None and summ["replicas"] == 0
    assert main(["run", "--config", str(write(tmp_path, text)), "--out", str(tmp_path / "c.jsonl")]) == EXIT_CAP


def test_death_small():
    text = """
[experiment]
name = death
kind = death
seed = 2
[model]
graph = tree(3)
rules = iid(point(1)); iid(point(2))
horizons = 5000
replicas = 150
[order]
kind = pgf
t_grid = 16
bootstrap_reps = 200
[death]
p_list = 0.4, 0.6, 1.0
threshold = 60
"""
    res = run_experiment(ExperimentConfig.parse(text))
    surv = [r for r in res.records if r["type"] == "survival"]
    assert {r["p"] for r in surv} == {0.4, 0.6}  # p = 1 is excluded on an infinite tree
    assert res.meta["flagged"] and res.meta["flagged"][0]["p"] == 1.0
    mono = [r for r in res.records if r.get("check") == "survival nondecreasing in p"][0]
    assert mono["passed"]
    assert all(r["status"] != "violated" for r in res.records if r["type"] == "verdict" and "status" in r)


def test_shape_small():
    text = """
[experiment]
name = shape
kind = shape
seed = 1
[model]
graph = lattice(2)
rules = iid(poisson(2, 1e-12)); iid(point(2))
horizons = 80
replicas = 30
[order]
bootstrap_reps = 200
[shape]
direction = 1, 0
n_max = 5
"""
    res = run_experiment(ExperimentConfig.parse(text))
    verdict = [r for r in res.records if r["type"] == "verdict"][0]
    assert verdict["passed"] and res.exit_code == EXIT_OK
    assert len([r for r in res.records if r["type"] == "summary"]) == 5
    assert set(res.curves) == {"mu", "cloud"}
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig.parse(text.replace("direction = 1, 0", "direction = 1, 0, 0")))


def test_exit_code_constants():
    assert (EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAP) == (0, 1, 2, 3)


def test_reversed_death_rules_report_violation():
    text = """
[experiment]
name = death_rev
kind = death
seed = 2
[model]
graph = tree(3)
rules = iid(point(3)); iid(point(1))
horizons = 5000
replicas = 300
[order]
kind = st
bootstrap_reps = 300
[death]
p_list = 0.5
threshold = 60
"""
    res = run_experiment(ExperimentConfig.parse(text))
    assert res.exit_code == EXIT_VIOLATION
