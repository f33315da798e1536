import pytest

from ippd.config import DEFAULTS, RunConfig
from ippd.errors import ConfigError


def test_defaults_snapshot():
    cfg = RunConfig.load(None)
    assert cfg.get("proposer", "max_segment_m") == 5.0
    assert cfg.get("proposer", "eps") == 0.5
    assert cfg.get("parser", "gamma") == 0.85
    assert cfg.get("encoder", "n_heads") == 12
    assert cfg.get("encoder", "d_model") % cfg.get("encoder", "n_heads") == 0
    assert cfg.get("suite", "train_maps") == 20
    assert cfg.get("suite", "eval_episodes") == 100


def test_set_and_get():
    cfg = RunConfig.load(None)
    cfg.set("trainer", "epochs", 3)
    assert cfg.get("trainer", "epochs") == 3


def test_unknown_key_rejected():
    cfg = RunConfig.load(None)
    with pytest.raises(ConfigError):
        cfg.set("trainer", "nope", 1)
    with pytest.raises(ConfigError):
        cfg.set("nosection", "epochs", 1)
    with pytest.raises(ConfigError):
        cfg.get("trainer", "nope")


def test_override_strings_coerced():
    cfg = RunConfig.load(None, overrides=["trainer.epochs=7",
                                          "proposer.eps=0.25",
                                          "run.deterministic=true"])
    assert cfg.get("trainer", "epochs") == 7
    assert cfg.get("proposer", "eps") == 0.25
    assert cfg.get("run", "deterministic") is True


def test_bad_override_format():
    with pytest.raises(ConfigError):
        RunConfig.load(None, overrides=["no-equals-sign"])
    with pytest.raises(ConfigError):
        RunConfig.load(None, overrides=["trainer.epochs=notanint"])


def test_ini_file_load(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[trainer]\nepochs = 2\n[suite]\ntrain_maps = 3\n")
    cfg = RunConfig.load(p)
    assert cfg.get("trainer", "epochs") == 2
    assert cfg.get("suite", "train_maps") == 3
    # untouched keys keep defaults
    assert cfg.get("suite", "eval_episodes") == DEFAULTS["suite"]["eval_episodes"]


def test_ini_unknown_key_rejected(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[trainer]\nbogus = 2\n")
    with pytest.raises(ConfigError):
        RunConfig.load(p)


def test_data_dir_precedence(tmp_path, monkeypatch):
    cfg = RunConfig.load(None)
    monkeypatch.delenv("IPPD_DATA", raising=False)
    assert cfg.data_dir(None) == "data"
    monkeypatch.setenv("IPPD_DATA", "/env/dir")
    assert cfg.data_dir(None) == "/env/dir"
    assert cfg.data_dir("/cli/dir") == "/cli/dir"


def test_helper_factories():
    cfg = RunConfig.load(None)
    limits = cfg.proposer_limits()
    assert limits.max_segment_m == 5.0
    tc = cfg.train_config(log_path=None)
    assert tc.epochs == cfg.get("trainer", "epochs")
    mk = cfg.model_kwargs()
    assert mk["d"] == cfg.get("encoder", "d_model")
