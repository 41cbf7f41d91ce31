"""
Module Name: test_experiment.py
Description: Tests for the experiment config format, the experiment runner and its output files, the
             comparison table, saddle-escape trials and the command-line entry point.
Date: 2026-10-19
"""

import json
import os

import numpy as np
import pytest

from configs.config import (
    UNKNOWN_KEY, IO_ERROR, SUCCESS, CONFIG_ERROR, BYTE_MISMATCH, METRICS_FORMAT_VERSION, parse_threads
)
from configs.errors import ConfigurationError, UnknownKeyError, ProblemMismatchError, ByteMismatchError
from configs.experiment import ExperimentConfig
from harness.compare import compare
from harness.experiment import (
    REPORT, SCHEDULE, bytes_to_threshold, read_metrics, resolve_run, run_algorithm, run_experiment,
    run_seed
)
from harness.main import main
from harness.saddle import saddle_escape_trial
from protocols import custom_protocol, json_protocol
from server.trace import RoundTrace
from problems.problems import make_problem, SADDLE_QUARTIC
from server.utils import MessageLedger
from stationarity.stationarity import fosp_fraction


def make_cfg(tmp_path=None, **keys):
    cfg = ExperimentConfig()
    if tmp_path is not None:
        cfg.output.out_dir = str(tmp_path)
    return cfg.with_overrides(keys)


@pytest.fixture
def saddle_cfg():
    return make_cfg(**{"problem.family": "saddle_quartic", "problem.n": 1, "problem.d": 2,
                       "compressor.kind": "topk", "compressor.k": 1, "algorithm.p": 1,
                       "algorithm.eta": 0.1, "algorithm.T": 500})

# ------------------------------------------------------------------
# Config format
# ------------------------------------------------------------------

def test_config_text_round_trip():
    cfg = make_cfg(**{"problem.n": 8, "problem.sigma": 0.25, "algorithm.p_fcc": 3,
                      "algorithm.x0": [0.5] * 10, "compressor.k_fraction": 0.01,
                      "output.dump_messages": True, "seeds": [4, 2, 9]})
    again = ExperimentConfig.from_text(cfg.to_text())
    assert again == cfg
    assert again.to_text() == cfg.to_text()


def test_config_file_round_trip(tmp_path):
    cfg = make_cfg(**{"algorithm.eta": 0.0123456789, "algorithm.schedule": "first"})
    path = tmp_path / "exp.cfg"
    cfg.save(str(path))
    assert ExperimentConfig.load(str(path)) == cfg


def test_config_comments_and_partial_files():
    cfg = ExperimentConfig.from_text("# comment\n\nproblem.n = 3   # three clients\nseeds = 1, 2\n")
    assert cfg.problem.n == 3
    assert cfg.seeds == [1, 2]
    assert cfg.algorithm.p_fcc is None


def test_unknown_key_is_rejected():
    with pytest.raises(UnknownKeyError) as info:
        ExperimentConfig.from_text("problem.colour = blue\n")
    assert info.value.errno == UNKNOWN_KEY
    with pytest.raises(UnknownKeyError):
        ExperimentConfig.from_text("network.port = 80\n")


@pytest.mark.parametrize("text", ["problem.n 4\n", "problem.n = four\n", "problem.family = ring\n",
                                  "seeds = \n", "output.dump_messages = maybe\n"])
def test_malformed_configs_are_rejected(text):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_text(text)


def test_hash_inside_a_value_survives_round_trip():
    cfg = make_cfg(**{"output.out_dir": "runs/#3"})
    again = ExperimentConfig.from_text(cfg.to_text())
    assert again.output.out_dir == "runs/#3"
    assert again == cfg


def test_value_that_reads_back_as_comment_is_rejected():
    with pytest.raises(ConfigurationError):
        make_cfg(**{"output.out_dir": "runs #3"})


@pytest.mark.parametrize("keys", [{"seeds": [0, -1]}, {"problem.seed": -2}])
def test_negative_seeds_are_rejected(keys):
    with pytest.raises(ConfigurationError):
        make_cfg(**keys)


@pytest.mark.parametrize("text,expected", [("4", 4), ("0", 1), ("", 1), ("abc", 1), (None, 1)])
def test_thread_count_parsing(text, expected):
    assert parse_threads(text) == expected


def test_compressor_from_fraction():
    cfg = make_cfg(**{"problem.d": 200, "compressor.k_fraction": 0.01})
    assert cfg.build_compressor().k == 2
    assert make_cfg(**{"compressor.k": 3}).build_compressor().k == 3
    assert make_cfg(**{"compressor.kind": "rounding"}).build_compressor().mu() == pytest.approx(0.75)


def test_resolve_run_applies_schedule():
    cfg = make_cfg(**{"algorithm.schedule": "first", "problem.sigma": 0.5, "compressor.k": 1})
    plan = resolve_run(cfg, seed=0)
    assert plan.schedule is not None
    assert plan.run_config.p == plan.schedule.p == 24
    assert plan.run_config.eta == plan.schedule.eta
    assert plan.run_config.T == min(plan.schedule.T, cfg.algorithm.T)


@pytest.fixture
def quartic_keys():
    return {"problem.family": "saddle_quartic", "problem.n": 4, "problem.d": 10, "problem.sigma": 0.1,
            "compressor.k": 1, "algorithm.eta": 0.01, "algorithm.T": 5000}


def test_scheduled_T_is_capped(quartic_keys):
    cfg = make_cfg(**dict(quartic_keys, **{"algorithm.schedule": "second"}))
    plan = resolve_run(cfg, seed=0)
    assert plan.schedule.T > cfg.algorithm.T
    assert plan.run_config.T == cfg.algorithm.T
    assert plan.run_config.eta == plan.schedule.eta


def test_schedule_fields_limit_what_the_schedule_sets(quartic_keys):
    cfg = make_cfg(**dict(quartic_keys, **{"algorithm.schedule": "second",
                                           "algorithm.schedule_fields": ["r"]}))
    plan = resolve_run(cfg, seed=0)
    rc = plan.run_config
    assert (rc.eta, rc.p, rc.T) == (cfg.algorithm.eta, cfg.algorithm.p, cfg.algorithm.T)
    assert rc.r == plan.schedule.r
    # sigma sqrt(ln(100) d ln d)
    assert rc.r == pytest.approx(0.1 * np.sqrt(np.log(100) * 10 * np.log(10)))


def test_unknown_schedule_field_is_rejected():
    with pytest.raises(ConfigurationError):
        make_cfg(**{"algorithm.schedule_fields": ["r", "k"]})

# ------------------------------------------------------------------
# run_experiment
# ------------------------------------------------------------------

def test_uplink_byte_accounting():
    cfg = make_cfg(**{"problem.n": 4, "problem.d": 100, "compressor.k": 1, "algorithm.p": 4,
                      "algorithm.T": 10})
    summary = run_seed(cfg, 0, write=False).summary
    assert summary["uplink_bytes"] == 2400
    assert summary["ledger_bytes"] == 2400
    assert summary["downlink_bytes"] == 10 * 4 * 100 * 8


class InflatingLedger(MessageLedger):
    """Counts one byte too many per compressed message."""

    def record(self, client, msg):
        super().record(client, msg)
        with self._lock:
            self.total_bytes += 1


def test_ledger_disagreement_stops_the_run(tmp_path, monkeypatch):
    monkeypatch.setattr("harness.experiment.MessageLedger", InflatingLedger)
    cfg = make_cfg(tmp_path, **{"algorithm.T": 3})
    with pytest.raises(ByteMismatchError) as info:
        run_experiment(cfg)
    assert info.value.errno == BYTE_MISMATCH
    assert not (tmp_path / "summary.csv").exists()


def test_dsgd_converges_on_noiseless_quadratic():
    cfg = make_cfg(**{"algorithm.name": "dsgd", "problem.sigma": 0.0, "algorithm.eta": 0.25,
                      "algorithm.T": 100, "problem.heterogeneity": 3.0})
    result = run_seed(cfg, 0, write=False)
    initial = result.rows[0].grad_norm
    assert result.summary["final_grad_norm"] <= 1e-3 * initial


def test_first_order_schedule_spends_most_rounds_near_stationarity():
    """Under the first-order schedule both algorithms spend most of T at eps-FOSPs of f."""
    epsilon = 0.35
    cfg = make_cfg(**{"problem.heterogeneity": 10.0, "compressor.k_fraction": 0.1,
                      "algorithm.schedule": "first", "algorithm.epsilon": epsilon,
                      "algorithm.T": 100000})
    plan = resolve_run(cfg, seed=0)
    assert plan.run_config.T == plan.schedule.T
    dsgd = run_algorithm("dsgd", plan)
    power = run_algorithm("power_ef", plan)
    assert fosp_fraction(dsgd, plan.problem, epsilon) >= 0.75
    assert fosp_fraction(power, plan.problem, epsilon) >= 0.5


def test_output_files(tmp_path):
    cfg = make_cfg(tmp_path, **{"problem.sigma": 0.5, "algorithm.T": 25, "seeds": [0, 1],
                                "output.eigen_stride": 5, "output.record_stride": 2})
    results = run_experiment(cfg)
    assert [r.seed for r in results] == [0, 1]
    for seed in (0, 1):
        path = tmp_path / f"metrics_{seed}.csv"
        assert path.read_text().startswith(f"# {METRICS_FORMAT_VERSION}")
        rows = read_metrics(str(path))
        ts = [row["t"] for row in rows]
        assert ts == sorted(set(ts)) and ts[0] == 0 and ts[-1] == 25
        uplink = [row["uplink_bytes_cumulative"] for row in rows]
        assert uplink == sorted(uplink)
        assert not np.isnan(rows[0]["lambda_min"])

        reports = json_protocol.read_records(str(tmp_path / f"reports_{seed}.jsonl"), REPORT)
        assert [r["t"] for r in reports] == [0, 5, 10, 15, 20, 25]
        assert {"grad_norm", "lambda_min", "classification", "epsilon", "rho"} <= set(reports[0])
    assert (tmp_path / "summary.csv").read_text().count("\n") == 3
    assert (tmp_path / "metrics_0.csv").read_bytes() != (tmp_path / "metrics_1.csv").read_bytes()


def test_reruns_are_byte_identical(tmp_path):
    keys = {"problem.sigma": 0.5, "algorithm.r": 0.2, "algorithm.T": 30}
    run_experiment(make_cfg(tmp_path / "a", **keys))
    run_experiment(make_cfg(tmp_path / "b", **keys), workers=2)
    for name in ("metrics_0.csv", "reports_0.jsonl", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_message_dump_parses_back(tmp_path):
    cfg = make_cfg(tmp_path, **{"algorithm.T": 6, "output.dump_messages": True, "compressor.k": 2})
    result = run_experiment(cfg)[0]
    records = custom_protocol.parse_uplinks((tmp_path / "uplinks_0.bin").read_bytes())
    assert len(records) == 6 * cfg.problem.n
    total = sum(packet.payload_bytes() + len(c) * 12 for _, _, packet, c in records)
    assert total == result.summary["uplink_bytes"]


def test_schedule_record_is_written(tmp_path):
    cfg = make_cfg(tmp_path, **{"algorithm.schedule": "first", "problem.sigma": 1.0,
                                "compressor.k_fraction": 1.0, "algorithm.epsilon": 1.0,
                                "algorithm.kappa_T": 1e-4})
    plan = resolve_run(cfg, 0)
    run_experiment(cfg)
    records = json_protocol.read_records(str(tmp_path / "reports_0.jsonl"), SCHEDULE)
    assert records[0]["p"] == 1
    assert records[0]["T"] == plan.schedule.T


def test_bytes_to_threshold():
    problem = make_problem(SADDLE_QUARTIC, n=1, d=2)
    trace = RoundTrace.from_iterates([[0.0, 1.0], [0.0, 0.5], [0.0, 0.05]])
    trace.uplink_bytes[:] = [100, 40]
    assert bytes_to_threshold(trace, problem, 0.1) == 140
    assert bytes_to_threshold(trace, problem, 1.0) == 0
    assert bytes_to_threshold(trace, problem, 0.01) is None

# ------------------------------------------------------------------
# compare
# ------------------------------------------------------------------

def test_identical_configs_give_identical_rows():
    cfg = make_cfg(**{"problem.sigma": 0.3, "algorithm.T": 40, "seeds": [0, 1]})
    table = compare([cfg, cfg.copy()])
    first, second = table.rows
    assert first == second
    assert table.wins(0, 1) == 0


def test_single_config_table(tmp_path):
    table = compare([make_cfg(**{"algorithm.T": 10})])
    assert len(table.rows) == 1
    table.write(str(tmp_path / "compare.csv"))
    assert (tmp_path / "compare.csv").read_text().count("\n") == 2


def test_compare_requires_shared_problem():
    with pytest.raises(ProblemMismatchError):
        compare([make_cfg(), make_cfg(**{"problem.heterogeneity": 1.0})])


def test_power_ef_needs_fewest_bytes_under_top_one_percent():
    keys = {"problem.heterogeneity": 10.0, "problem.n": 4, "problem.d": 100, "problem.sigma": 0.0,
            "compressor.k": 1, "algorithm.eta": 0.05, "algorithm.T": 3000,
            "output.eigen_stride": 1000, "seeds": list(range(10))}
    cfgs = [make_cfg(**dict(keys, **{"algorithm.name": name}))
            for name in ("power_ef", "classic_ef", "naive_csgd")]
    table = compare(cfgs)
    _, classic, naive = table.per_seed
    assert table.wins(0, 1) >= 8
    assert table.wins(0, 2) >= 8
    assert table.win_fraction(0, 1) == table.wins(0, 1) / 10
    assert all(c <= n for c, n in zip(classic, naive))
    assert table.rows[0].reached >= 8

# ------------------------------------------------------------------
# Saddle escape
# ------------------------------------------------------------------

def test_exact_saddle_never_escapes(quartic_keys):
    cfg = make_cfg(**dict(quartic_keys, **{"problem.sigma": 0.0, "algorithm.r": 0.0,
                                           "algorithm.T": 500, "seeds": list(range(20))}))
    stats = saddle_escape_trial(cfg, 0.0)
    assert stats.fraction == 0.0
    assert np.isnan(stats.median_time)


def test_offset_start_rolls_downhill(saddle_cfg):
    stats = saddle_escape_trial(saddle_cfg, 0.3, seeds=range(3))
    assert stats.fraction == 1.0
    assert all(t > 0 for t in stats.times)
    assert saddle_escape_trial(saddle_cfg, 0.5, seeds=[0]).times == [0]


def test_perturbation_escapes_saddle_under_compression_and_noise(quartic_keys):
    """Top-1 of 10 coordinates, sigma = 0.1 and the second-order radius; everything else as configured."""
    cfg = make_cfg(**dict(quartic_keys, **{"algorithm.schedule": "second",
                                           "algorithm.schedule_fields": ["r"],
                                           "seeds": list(range(20))}))
    stats = saddle_escape_trial(cfg, 0.0)
    assert stats.T == 5000
    assert sum(stats.escaped) >= 18


def test_saddle_trial_needs_quartic():
    with pytest.raises(ConfigurationError):
        saddle_escape_trial(make_cfg(), 0.0)

# ------------------------------------------------------------------
# CLI
# ------------------------------------------------------------------

def test_cli_run(tmp_path, capsys):
    code = main(["run", "--out-dir", str(tmp_path), "--T", "5", "--seed", "3", "--k", "2"])
    assert code == SUCCESS
    assert os.path.exists(tmp_path / "metrics_3.csv")
    assert "seed 3" in capsys.readouterr().out


def test_cli_error_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("problem.shape = round\n")
    assert main(["run", "--config", str(bad), "--out-dir", str(tmp_path)]) == UNKNOWN_KEY
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == IO_ERROR
    assert main(["run", "--seed", "-1", "--out-dir", str(tmp_path)]) == CONFIG_ERROR
    assert not os.path.exists(tmp_path / "summary.csv")


def test_cli_schedule(capsys):
    assert main(["schedule", "--order", "first", "--sigma", "0.5"]) == SUCCESS
    printed = json.loads(capsys.readouterr().out)
    assert printed["p"] == 24
    assert printed["order"] == "first"
