"""End-to-end tests for the command-line front end, run in process."""

import json
import math

import pytest

import pairfit.cli as cli
from pairfit.losses import LossSpec, loss
from pairfit.measures import GaussianMeasure


def write_config(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def estimate_doc():
    return {
        "model": {
            "family": "discrete",
            "space_size": 2,
            "candidates": [[0.9, 0.1], [0.5, 0.5], [0.1, 0.9]],
        },
        "loss": {"kind": "tv"},
        "sample": [0.0, 1.0] * 15,
    }


def simulate_doc():
    return {
        "scenario": {
            "truth": {
                "kind": "iid",
                "measure": {"family": "gaussian", "params": {"mean": 0.0, "sd": 1.0}},
            },
            "model": {
                "family": "gaussian-location-grid",
                "d": 1,
                "lo": -1.0,
                "hi": 1.0,
                "step": 0.5,
            },
            "loss": {"kind": "tv"},
            "n": 40,
            "replications": 12,
            "seed": 3,
        },
    }


class TestParsing:
    def test_unknown_subcommand(self, capsys):
        assert cli.main(["frobnicate"]) == 2
        assert "invalid choice" in capsys.readouterr().err

    def test_help_exits_zero(self, capsys):
        assert cli.main(["--help"]) == 0
        assert "estimate" in capsys.readouterr().out

    def test_missing_config_file(self, tmp_path, capsys):
        code = cli.main(
            ["estimate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]
        )
        assert code == 2
        assert "cannot read" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert cli.main(["estimate", "--config", str(path)]) == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_command_mismatch_inside_config(self, tmp_path, capsys):
        doc = estimate_doc()
        doc["command"] = "simulate"
        path = write_config(tmp_path, "e.json", doc)
        assert cli.main(["estimate", "--config", str(path)]) == 2
        assert "was invoked" in capsys.readouterr().err


class TestEstimate:
    def test_balanced_sample_picks_middle_candidate(self, tmp_path, capsys):
        path = write_config(tmp_path, "e.json", estimate_doc())
        out = tmp_path / "out"
        assert cli.main(["estimate", "--config", str(path), "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["format_version"] == "1"
        assert summary["report"]["chosen"] == 1
        lines = (out / "records.csv").read_text().splitlines()
        assert lines[0] == "candidate,sup_stat,in_minimizer_set"
        assert len(lines) == 4
        flagged = [int(row.split(",")[2]) for row in lines[1:]]
        assert flagged[1] == 1
        assert "chosen candidate 1" in capsys.readouterr().out

    def test_truth_sampling_is_seed_deterministic(self, tmp_path):
        doc = {
            "model": {
                "family": "gaussian-location-grid",
                "d": 1,
                "lo": -1.0,
                "hi": 1.0,
                "step": 0.5,
            },
            "loss": {"kind": "tv"},
            "truth": {"family": "gaussian", "params": {"mean": 0.4, "sd": 1.0}},
            "n": 60,
        }
        path = write_config(tmp_path, "e.json", doc)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert (
                cli.main(
                    ["estimate", "--config", str(path), "--seed", "1", "--out", str(out)]
                )
                == 0
            )
            outs.append((out / "records.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_sample_and_truth_together_rejected(self, tmp_path, capsys):
        doc = estimate_doc()
        doc["truth"] = {"family": "gaussian", "params": {"mean": 0.0, "sd": 1.0}}
        path = write_config(tmp_path, "e.json", doc)
        assert cli.main(["estimate", "--config", str(path)]) == 2
        assert "not both" in capsys.readouterr().err

    def test_no_data_source_rejected(self, tmp_path):
        doc = estimate_doc()
        del doc["sample"]
        path = write_config(tmp_path, "e.json", doc)
        assert cli.main(["estimate", "--config", str(path)]) == 2

    def test_unknown_key_rejected(self, tmp_path, capsys):
        doc = estimate_doc()
        doc["bogus"] = 1
        path = write_config(tmp_path, "e.json", doc)
        assert cli.main(["estimate", "--config", str(path)]) == 2
        assert "bogus" in capsys.readouterr().err


class TestDescribe:
    def test_estimate_describe_round_trips(self, tmp_path, capsys):
        path = write_config(tmp_path, "e.json", estimate_doc())
        out = tmp_path / "untouched"
        code = cli.main(
            [
                "estimate", "--config", str(path), "--epsilon", "0.5",
                "--out", str(out), "--describe",
            ]
        )
        assert code == 0
        first = capsys.readouterr().out
        resolved = json.loads(first)
        assert resolved["epsilon"] == 0.5
        assert resolved["command"] == "estimate"
        assert not out.exists()
        echo = write_config(tmp_path, "echo.json", resolved)
        assert cli.main(["estimate", "--config", str(echo), "--describe"]) == 0
        assert capsys.readouterr().out == first

    def test_simulate_describe_round_trips(self, tmp_path, capsys):
        doc = simulate_doc()
        doc["xis"] = [0.5, 1.0]
        path = write_config(tmp_path, "s.json", doc)
        assert cli.main(["simulate", "--config", str(path), "--describe"]) == 0
        first = capsys.readouterr().out
        echo = write_config(tmp_path, "echo.json", json.loads(first))
        assert cli.main(["simulate", "--config", str(echo), "--describe"]) == 0
        assert capsys.readouterr().out == first

    def test_check_assumptions_describe_normalizes_alias(self, capsys):
        code = cli.main(
            ["check-assumptions", "--loss", "hellinger2", "--describe"]
        )
        assert code == 0
        resolved = json.loads(capsys.readouterr().out)
        assert resolved["loss"] == "hellinger"
        assert resolved["space_size"] == 5
        assert resolved["triples"] == 200


class TestTestCommand:
    def test_two_point_example(self, tmp_path):
        doc = {
            "truth": {
                "family": "discrete",
                "params": {"points": [0.0, 1.0], "masses": [0.7, 0.3]},
            },
            "p": {
                "family": "discrete",
                "params": {"points": [0.0, 1.0], "masses": [0.7, 0.3]},
            },
            "q": {
                "family": "discrete",
                "params": {"points": [0.0, 1.0], "masses": [0.2, 0.8]},
            },
            "loss": {"kind": "tv"},
            "n": 30,
            "reps": 300,
        }
        path = write_config(tmp_path, "t.json", doc)
        out = tmp_path / "out"
        code = cli.main(
            ["test", "--config", str(path), "--seed", "7", "--out", str(out)]
        )
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["result"]["gamma"] == 0.0
        assert summary["config"]["seed"] == 7
        lines = (out / "records.csv").read_text().splitlines()
        assert lines[0] == "outcome,count"
        counts = {row.split(",")[0]: int(row.split(",")[1]) for row in lines[1:]}
        assert sum(counts.values()) == 300
        assert counts["choose_p"] >= 290


class TestSimulate:
    def test_outputs_and_thread_byte_identity(self, tmp_path):
        doc = simulate_doc()
        doc["formats"] = ["csv", "json-lines", "summary"]
        path = write_config(tmp_path, "s.json", doc)
        payloads = []
        for name, threads in (("one", "1"), ("many", "3")):
            out = tmp_path / name
            code = cli.main(
                [
                    "simulate", "--config", str(path),
                    "--out", str(out), "--threads", threads,
                ]
            )
            assert code == 0
            payloads.append(
                {
                    f: (out / f).read_bytes()
                    for f in ("summary.json", "records.csv", "records.jsonl")
                }
            )
        assert payloads[0] == payloads[1]

    def test_seed_required(self, tmp_path, capsys):
        doc = simulate_doc()
        del doc["scenario"]["seed"]
        path = write_config(tmp_path, "s.json", doc)
        assert cli.main(["simulate", "--config", str(path)]) == 2
        assert "seed" in capsys.readouterr().err

    def test_seed_flag_overrides_and_changes_records(self, tmp_path):
        path = write_config(tmp_path, "s.json", simulate_doc())
        blobs = []
        for name, seed in (("a", "3"), ("b", "4")):
            out = tmp_path / name
            assert (
                cli.main(
                    [
                        "simulate", "--config", str(path),
                        "--seed", seed, "--out", str(out),
                    ]
                )
                == 0
            )
            blobs.append((out / "records.csv").read_bytes())
        assert blobs[0] != blobs[1]

    def test_deviation_block(self, tmp_path):
        doc = {
            "scenario": {
                "truth": {
                    "kind": "iid",
                    "measure": {"family": "uniform", "params": {"low": 0.0, "width": 1.0}},
                },
                "model": {
                    "family": "histogram-net",
                    "cells": 2,
                    "value_grid": [0.5, 1.0, 1.5],
                },
                "loss": {"kind": "wasserstein1"},
                "n": 200,
                "replications": 50,
                "seed": 5,
            },
            "xis": [1.0],
        }
        path = write_config(tmp_path, "s.json", doc)
        out = tmp_path / "out"
        assert cli.main(["simulate", "--config", str(path), "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        row = summary["deviation"]["rows"][0]
        assert row["bound"] == pytest.approx(0.35142135623730947, rel=1e-12)
        assert row["frequency"] >= row["target"]

    def test_rate_block_writes_curve(self, tmp_path):
        doc = simulate_doc()
        doc["ns"] = [20, 40]
        path = write_config(tmp_path, "s.json", doc)
        out = tmp_path / "out"
        assert cli.main(["simulate", "--config", str(path), "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert [r["n"] for r in summary["rate"]["rows"]] == [20, 40]
        lines = (out / "curve.csv").read_text().splitlines()
        assert lines[0] == "n,median_loss"
        assert len(lines) == 3

    def test_csv_only_format(self, tmp_path):
        doc = simulate_doc()
        doc["formats"] = ["csv"]
        path = write_config(tmp_path, "s.json", doc)
        out = tmp_path / "out"
        assert cli.main(["simulate", "--config", str(path), "--out", str(out)]) == 0
        assert (out / "records.csv").exists()
        assert not (out / "summary.json").exists()
        assert not (out / "records.jsonl").exists()

    def test_bad_format_rejected(self, tmp_path):
        doc = simulate_doc()
        doc["formats"] = ["parquet"]
        path = write_config(tmp_path, "s.json", doc)
        assert cli.main(["simulate", "--config", str(path)]) == 2


class TestDistances:
    def test_values_match_library(self, tmp_path):
        doc = {
            "pairs": [
                {
                    "p": {"family": "gaussian", "params": {"mean": 0.0, "sd": 1.0}},
                    "q": {"family": "gaussian", "params": {"mean": 1.0, "sd": 1.0}},
                }
            ],
            "losses": [{"kind": "tv"}, {"kind": "hellinger2"}, {"kind": "kl", "a": 1.0}],
        }
        path = write_config(tmp_path, "d.json", doc)
        out = tmp_path / "out"
        assert cli.main(["distances", "--config", str(path), "--out", str(out)]) == 0
        lines = (out / "records.csv").read_text().splitlines()
        assert lines[0] == "pair,loss,value"
        P, Q = GaussianMeasure(0.0, 1.0), GaussianMeasure(1.0, 1.0)
        expected = {
            "tv": loss(LossSpec.tv(), P, Q),
            "hellinger2": loss(LossSpec.hellinger2(), P, Q),
            "kl[a=1.0]": loss(LossSpec.kl(a=1.0), P, Q),
        }
        for row in lines[1:]:
            _, token, value = row.split(",")
            assert float(value) == expected[token]

    def test_unsupported_measure_for_loss(self, tmp_path, capsys):
        doc = {
            "pairs": [
                {
                    "p": {"family": "gaussian", "params": {"mean": 0.0, "sd": 1.0}},
                    "q": {"family": "gaussian", "params": {"mean": 1.0, "sd": 1.0}},
                }
            ],
            "losses": [{"kind": "wasserstein1"}],
        }
        path = write_config(tmp_path, "d.json", doc)
        assert cli.main(["distances", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_pair_shape_validated(self, tmp_path):
        doc = {"pairs": [{"p": {"family": "gaussian", "params": {}}}], "losses": [{"kind": "tv"}]}
        path = write_config(tmp_path, "d.json", doc)
        assert cli.main(["distances", "--config", str(path)]) == 2


class TestCheckAssumptions:
    @pytest.mark.parametrize("loss_name", ["tv", "hellinger", "kl", "l1.5", "l2", "l3", "linf"])
    def test_families_pass_quick_audit(self, loss_name, capsys):
        code = cli.main(
            [
                "check-assumptions", "--loss", loss_name,
                "--space-size", "5", "--triples", "25", "--seed", "3",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS" in out
        assert "worst mean-bound slack" in out

    def test_summary_written_when_out_given(self, tmp_path):
        out = tmp_path / "audit"
        code = cli.main(
            [
                "check-assumptions", "--loss", "tv", "--triples", "10",
                "--seed", "3", "--out", str(out),
            ]
        )
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["report"]["passed"] is True
        assert summary["report"]["worst_slacks"]["antisymmetry"] <= 1e-12
        assert summary["report"]["worst_slacks"]["cond3bis_a2_prime"] is not None

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        path = write_config(
            tmp_path, "c.json", {"loss": "kl", "triples": 999, "seed": 2}
        )
        code = cli.main(
            [
                "check-assumptions", "--config", str(path),
                "--triples", "5", "--describe",
            ]
        )
        assert code == 0
        resolved = json.loads(capsys.readouterr().out)
        assert resolved["triples"] == 5
        assert resolved["loss"] == "kl"
        assert resolved["seed"] == 2

    def test_missing_loss_rejected(self, capsys):
        assert cli.main(["check-assumptions", "--triples", "5"]) == 2
        assert "--loss" in capsys.readouterr().err

    def test_failed_audit_maps_to_exit_three(self, monkeypatch, capsys):
        def failing(loss_name, space_size, triples, seed):
            return {
                "loss": loss_name,
                "space_size": space_size,
                "triples": triples,
                "seed": seed,
                "pairs_checked": 2,
                "worst_slacks": {
                    "antisymmetry": 0.0,
                    "mean": 2e-2,
                    "oscillation": 0.0,
                    "variance": None,
                    "cond3bis_a2_prime": None,
                },
                "tolerance": 1e-12,
                "passed": False,
                "violations": ["triple 0: mean bound pair (0,1) probe 0: slack 2e-2"],
            }

        monkeypatch.setattr(cli, "run_assumption_suite", failing)
        assert cli.main(["check-assumptions", "--loss", "tv"]) == 3
        captured = capsys.readouterr()
        assert "FAIL" in captured.out
        assert "numerical failure" in captured.err

    def test_suite_slacks_are_tiny_where_binding(self):
        report = cli.run_assumption_suite("l2", 5, 40, 3)
        assert report["passed"]
        assert report["pairs_checked"] == 80
        assert report["worst_slacks"]["antisymmetry"] <= 1e-12
        # The mean bound is attained (equality) at probe S = P for these
        # families, so the worst slack sits at rounding level, not far below.
        assert -1e-12 <= report["worst_slacks"]["mean"] <= 1e-12
        assert math.isfinite(report["worst_slacks"]["oscillation"])
