"""End-to-end smoke tests for the ttclab Python bindings and the CLI binary.

The heavy numerical verification lives in the C++ suites; these tests only
check that the binding surface is wired up, that a rollout produced through
Python matches the documented shapes and costs, and that the installed CLI
can run a scenario end to end.
"""

import json
import os
import subprocess

import numpy as np
import pytest

import ttclab

PLAIN_TEXT = """\
name = smoke-plain

[drift]
gain = 1.02

[run]
n_chunks = 6
n_seeds = 3
"""

BON1_TEXT = """\
name = smoke-bon1

[drift]
gain = 1.02

[tts]
mode = best-of-n
n = 1

[run]
n_chunks = 6
n_seeds = 3
"""

TTC_LAB_BIN = os.environ.get("TTC_LAB_BIN", "")

needs_cli = pytest.mark.skipif(not TTC_LAB_BIN, reason="TTC_LAB_BIN not set")


def test_module_surface():
    for name in (
        "Scenario",
        "rollout",
        "drift_report",
        "run",
        "wilcoxon_signed_rank",
        "oracle_suite",
        "preset_names",
    ):
        assert hasattr(ttclab, name), name


def test_preset_names_contains_core_presets():
    names = ttclab.preset_names()
    assert "baseline" in names
    assert "ttc" in names


def test_scenario_text_roundtrip_and_frozen_hash():
    s = ttclab.Scenario.from_preset("baseline")
    s.validate()
    assert s.hash == "8136039b27f81ba1"  # frozen hash of the canonical text
    t = ttclab.Scenario.from_text(s.to_text())
    assert t.name == s.name
    assert t.hash == s.hash
    assert t.n_chunks == 30
    assert t.n_seeds == 200


def test_rollout_shapes_and_cost():
    s = ttclab.Scenario.from_preset("ttc")  # three corrected levels per chunk
    r = ttclab.rollout(s, 123)
    assert r["seed"] == 123
    assert r["frame_dim"] == 8
    assert r["frames_per_chunk"] == 4
    assert r["frames"].shape == (120, 8)  # 30 chunks x 4 frames each
    assert r["chunks"].shape == (30, 32)
    assert r["boundaries"][0] == 3  # last frame index of the first chunk
    assert r["nfe"] == 30 * 7  # 4 base steps + 3 corrected levels per chunk

    again = ttclab.rollout(s, 123)
    np.testing.assert_array_equal(r["frames"], again["frames"])


def test_single_candidate_selection_matches_plain_rollout():
    plain = ttclab.Scenario.from_text(PLAIN_TEXT)
    bon1 = ttclab.Scenario.from_text(BON1_TEXT)
    ra = ttclab.rollout(plain, 99)
    rb = ttclab.rollout(bon1, 99)
    np.testing.assert_array_equal(ra["frames"], rb["frames"])
    assert ra["nfe"] == rb["nfe"] == 6 * 4


def test_drift_report_fields():
    s = ttclab.Scenario.from_text(PLAIN_TEXT)
    rep = ttclab.drift_report(s, 5)
    for key in ("seed", "nfe", "jepa_std", "jepa_diff", "boundary", "dynamic"):
        assert key in rep, key
    assert rep["nfe"] == 24
    assert len(rep["d_trace"]) == 24  # one entry per frame
    assert np.isfinite(rep["jepa_diff"])


def test_run_collects_rows_and_aggregates():
    s = ttclab.Scenario.from_text(PLAIN_TEXT)
    out = ttclab.run(s, 7)
    assert out["scenario_name"] == "smoke-plain"
    assert out["base_seed"] == 7
    assert len(out["seeds"]) == 3
    assert len(out["rows"]) == 3
    assert out["rows"][0]["seed"] == out["seeds"][0]
    nfe = out["aggregates"]["nfe"]
    assert nfe["n"] == 3
    assert nfe["mean"] == pytest.approx(24.0)


def test_wilcoxon_hand_case():
    res = ttclab.wilcoxon_signed_rank([2.0, 3.0, 4.0], [1.0, 1.0, 1.0])
    assert res["statistic"] == 6.0
    assert res["p_value"] == pytest.approx(0.25)
    assert res["n_effective"] == 3
    assert res["exact"] is True


def test_oracle_suite_all_pass():
    results = ttclab.oracle_suite()
    assert results
    failed = [r["name"] for r in results if not r["pass"]]
    assert not failed, failed


@needs_cli
def test_cli_oracle_exits_clean():
    proc = subprocess.run(
        [TTC_LAB_BIN, "oracle"], capture_output=True, text=True, timeout=300
    )
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout
    assert "FAIL" not in proc.stdout


@needs_cli
def test_cli_rejects_unknown_preset(tmp_path):
    proc = subprocess.run(
        [TTC_LAB_BIN, "run", "--preset", "nope", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode != 0
    assert "error" in proc.stderr.lower()


@needs_cli
def test_cli_run_writes_manifest(tmp_path):
    cfg = tmp_path / "smoke.ini"
    cfg.write_text(PLAIN_TEXT)
    out_dir = tmp_path / "out"
    proc = subprocess.run(
        [
            TTC_LAB_BIN,
            "run",
            "--config",
            str(cfg),
            "--seed",
            "11",
            "--out",
            str(out_dir),
        ],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    manifest_path = out_dir / "smoke-plain" / "manifest.json"
    assert manifest_path.is_file()
    manifest = json.loads(manifest_path.read_text())
    assert manifest["scenario_name"] == "smoke-plain"
    assert len(manifest["seeds"]) == 3
    assert manifest["aggregates"]["nfe"]["mean"] == pytest.approx(24.0)
