"""End-to-end command-line flow on a miniature data suite."""

import json
import os

import numpy as np
import pytest

from ippd.cli import build_arg_parser, main

SMALL = [
    "suite.train_maps=1", "suite.unseen_maps=1", "suite.seen_eval_maps=1",
    "suite.train_episodes=2", "suite.eval_episodes=1",
    "suite.rooms_x=3", "suite.rooms_y=3",
    "suite.episode_min_len_m=4.0", "suite.episode_min_euclid_m=0",
    "suite.episode_goal_near_m=0",
    "encoder.d_model=24", "encoder.n_layers=2", "encoder.n_heads=3",
    "trainer.epochs=2", "trainer.batch_size=8",
    "trainer.candidates_per_episode=4",
]


def cli(root, *argv, extra=()):
    args = ["--data", str(root)]
    for s in list(SMALL) + list(extra):
        args += ["--set", s]
    return main(args + list(argv))


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    """One tiny generated suite shared by the read-only command tests."""
    root = tmp_path_factory.mktemp("cli_suite")
    assert cli(root, "gen-maps") == 0
    assert cli(root, "gen-episodes") == 0
    assert cli(root, "train") == 0
    return root


def test_gen_maps_writes_files(suite):
    assert os.path.exists(suite / "maps" / "train_000.map")
    assert os.path.exists(suite / "maps" / "unseen_000.map")


def test_gen_episodes_requires_maps(tmp_path, capsys):
    assert cli(tmp_path, "gen-episodes") == 3
    assert "gen-maps" in capsys.readouterr().err


def test_gen_episodes_writes_splits(suite):
    for split, n in (("train", 2), ("eval_seen", 1), ("eval_unseen", 1)):
        path = suite / "episodes" / f"{split}.jsonl"
        assert os.path.exists(path)
        with open(path) as f:
            assert sum(1 for _ in f) == n


def test_parse_outputs_components(tmp_path, capsys):
    rc = cli(tmp_path, "parse", "Walk past the sofa then turn left.")
    assert rc == 0
    payload = json.loads(capsys.readouterr().out.strip())
    kinds = [c["kind"] for c in payload["components"]]
    labels = [c.get("label") for c in payload["components"]]
    assert "sofa" in labels
    assert any("landmark" in k or "direction" in k for k in kinds)


def test_propose_command(suite, capsys):
    rc = cli(suite, "propose", "--split", "train", "--episode", "train_0000")
    assert rc == 0
    out = capsys.readouterr().out
    assert "candidates" in out
    assert "train_0000" in out


def test_propose_unknown_episode(suite, capsys):
    rc = cli(suite, "propose", "--split", "train", "--episode", "nope")
    assert rc == 3
    assert "not found" in capsys.readouterr().err


def test_encode_command(suite, capsys):
    rc = cli(suite, "encode", "--split", "train", "--episode", "train_0000",
             "--candidate", "0")
    assert rc == 0
    out = capsys.readouterr().out
    assert "keypoints:" in out
    assert "tokens" in out


def test_encode_candidate_out_of_range(suite, capsys):
    rc = cli(suite, "encode", "--split", "train", "--episode", "train_0000",
             "--candidate", "100000")
    assert rc == 3


def test_train_writes_checkpoint(suite):
    assert os.path.exists(suite / "checkpoints" / "discriminator.ckpt")
    assert os.path.exists(suite / "logs" / "train_log.csv")


@pytest.mark.parametrize("agent", ["random-path", "proposal-only-uniform",
                                   "ippd"])
def test_run_agents(suite, capsys, agent):
    rc = cli(suite, "run", "--split", "eval_seen", "--agent", agent)
    assert rc == 0
    out = capsys.readouterr().out
    assert f"eval_seen/{agent}" in out
    assert os.path.exists(suite / "reports" / f"eval_seen_{agent}.json")
    assert os.path.exists(suite / "reports" / f"eval_seen_{agent}.csv")


def test_run_unknown_agent_is_config_error(suite, capsys):
    rc = cli(suite, "run", "--split", "eval_seen", extra=["run.agent=walker"])
    assert rc == 2
    assert "unknown agent" in capsys.readouterr().err


def test_run_ippd_needs_checkpoint(tmp_path, capsys):
    assert cli(tmp_path, "gen-maps") == 0
    assert cli(tmp_path, "gen-episodes") == 0
    rc = cli(tmp_path, "run", "--split", "eval_seen", "--agent", "ippd")
    assert rc == 3
    assert "train" in capsys.readouterr().err


def test_report_table(suite, capsys):
    json_path = str(suite / "reports" / "eval_seen_random-path.json")
    rc = cli(suite, "report", json_path)
    assert rc == 0
    out = capsys.readouterr().out
    assert "random-path" in out
    assert "SR" in out


def test_report_csv_and_mixed_splits(suite, tmp_path, capsys):
    rc = cli(suite, "run", "--split", "eval_unseen", "--agent", "random-path")
    assert rc == 0
    capsys.readouterr()
    seen = str(suite / "reports" / "eval_seen_random-path.json")
    unseen = str(suite / "reports" / "eval_unseen_random-path.json")
    csv_out = str(tmp_path / "table.csv")
    assert cli(suite, "report", seen, "--csv", csv_out) == 0
    assert os.path.exists(csv_out)
    capsys.readouterr()
    assert cli(suite, "report", seen, unseen) == 3
    assert "one split at a time" in capsys.readouterr().err


def test_render_command(suite, tmp_path):
    out = str(tmp_path / "map.png")
    rc = cli(suite, "render", "--map", "train_000", "--split", "train",
             "--episode", "train_0000", "--out", out)
    assert rc == 0
    assert os.path.getsize(out) > 0


def test_render_episode_map_mismatch(suite, tmp_path):
    rc = cli(suite, "render", "--map", "unseen_000", "--split", "train",
             "--episode", "train_0000", "--out", str(tmp_path / "x.png"))
    assert rc == 3


def test_bad_override_is_config_error(tmp_path, capsys):
    assert main(["--data", str(tmp_path), "--set", "suite.nope=1",
                 "gen-maps"]) == 2
    assert main(["--data", str(tmp_path), "--set", "malformed",
                 "gen-maps"]) == 2
    assert main(["--data", str(tmp_path), "--set", "suite.train_maps=abc",
                 "gen-maps"]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    rc = main(["--config", str(tmp_path / "none.ini"), "--data",
               str(tmp_path), "gen-maps"])
    assert rc == 2


def test_config_file_applies(tmp_path, capsys):
    ini = tmp_path / "tiny.ini"
    ini.write_text("[suite]\ntrain_maps = 1\nunseen_maps = 0\n"
                   "rooms_x = 3\nrooms_y = 3\n")
    rc = main(["--config", str(ini), "--data", str(tmp_path / "d"),
               "gen-maps"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "1 maps" in out


def test_data_dir_env_fallback(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("IPPD_DATA", str(tmp_path / "envroot"))
    rc = main(["--set", "suite.train_maps=1", "--set", "suite.unseen_maps=0",
               "--set", "suite.rooms_x=3", "--set", "suite.rooms_y=3",
               "gen-maps"])
    assert rc == 0
    assert os.path.exists(tmp_path / "envroot" / "maps" / "train_000.map")


def test_arg_parser_structure():
    p = build_arg_parser()
    args = p.parse_args(["--data", "x", "run", "--split", "eval_unseen",
                         "--agent", "ippd", "--deterministic"])
    assert args.command == "run"
    assert args.deterministic
    with pytest.raises(SystemExit):
        p.parse_args(["run", "--split", "bogus"])
