"""Run configuration: INI file with sections, defaults for every constant.

Unknown sections or keys are rejected so typos fail loudly. Values are
coerced to the type of their default. CLI overrides arrive as
``section.key=value`` strings and win over the file.
"""

from __future__ import annotations

import configparser
import copy
import os

from .discriminator import TrainConfig
from .errors import ConfigError
from .proposer import ProposerLimits

DEFAULTS = {
    "paths": {
        "data_dir": "data",
    },
    "suite": {
        "seed": 0,
        "train_maps": 20,
        "seen_eval_maps": 4,
        "unseen_maps": 4,
        "train_episodes": 500,
        "eval_episodes": 100,
        "rooms_x": 7,
        "rooms_y": 7,
        "room_min_m": 3.4,
        "room_max_m": 4.2,
        "objects_per_room_min": 3,
        "objects_per_room_max": 5,
        "resolution_m": 0.05,
        "episode_min_len_m": 13.0,
        "episode_max_len_m": 20.0,
        "episode_min_euclid_m": 9.0,
        "episode_goal_near_m": 1.5,
    },
    "parser": {
        "gamma": 0.85,
        "turn_window": 3,
    },
    "proposer": {
        "eps": 0.5,
        "min_pts": 1,
        "max_segment_m": 5.0,
        "endpoint_radius_m": 2.0,
        "n_end": 3,
        "max_candidates": 2000,
        "n_fallback": 100,
        "fallback_radius_m": 20.0,
    },
    "encoder": {
        "spacing_m": 1.0,
        "compass_radius_m": 3.0,
        "max_keypoints": 64,
        "d_model": 120,
        "n_layers": 6,
        "n_heads": 12,
        "l_pos": 6,
        "l_theta": 4,
        "fusion": "interleave",
        "dropout": 0.1,
        "max_seq": 256,
    },
    "trainer": {
        "epochs": 16,
        "batch_size": 16,
        "lr": 1e-4,
        "weight_decay": 0.01,
        "mask_rate": 0.15,
        "lambda_mix": 0.5,
        "seed": 0,
        "candidates_per_episode": 16,
        "num_threads": 1,
    },
    "metrics": {
        "d_th": 3.0,
    },
    "run": {
        "agent": "ippd",
        "workers": 1,
        "deterministic": False,
    },
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(section, key, raw, default):
    if isinstance(default, bool):
        low = str(raw).strip().lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{section}.{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, int):
            return int(str(raw), 0)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(
            f"{section}.{key}: expected {type(default).__name__}, got {raw!r}"
        ) from None
    return str(raw)


class RunConfig:
    """Typed view over the merged defaults + file + overrides."""

    def __init__(self, values=None):
        self.values = copy.deepcopy(DEFAULTS)
        for (section, key), raw in (values or {}).items():
            self.set(section, key, raw)

    def set(self, section, key, raw):
        if section not in self.values:
            raise ConfigError(f"unknown config section [{section}]")
        if key not in self.values[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        self.values[section][key] = _coerce(section, key, raw,
                                            DEFAULTS[section][key])

    def get(self, section, key):
        try:
            return self.values[section][key]
        except KeyError:
            raise ConfigError(f"unknown config key {section}.{key}") from None

    @classmethod
    def load(cls, path=None, overrides=()):
        """Read an INI file (optional) and apply section.key=value overrides."""
        cfg = cls()
        if path:
            if not os.path.exists(path):
                raise ConfigError(f"config file not found: {path}")
            parser = configparser.ConfigParser()
            try:
                parser.read(path)
            except configparser.Error as e:
                raise ConfigError(f"{path}: {e}") from None
            for section in parser.sections():
                for key, raw in parser.items(section):
                    cfg.set(section, key, raw)
        for item in overrides:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ConfigError(
                    f"override {item!r} must look like section.key=value")
            dotted, raw = item.split("=", 1)
            section, key = dotted.split(".", 1)
            cfg.set(section.strip(), key.strip(), raw.strip())
        return cfg

    # -- typed accessors ------------------------------------------------------

    def data_dir(self, cli_value=None):
        """CLI flag beats IPPD_DATA beats the config file."""
        if cli_value:
            return cli_value
        env = os.environ.get("IPPD_DATA")
        if env:
            return env
        return self.get("paths", "data_dir")

    def proposer_limits(self):
        p = self.values["proposer"]
        return ProposerLimits(
            max_segment_m=p["max_segment_m"],
            endpoint_radius_m=p["endpoint_radius_m"],
            n_end=p["n_end"],
            max_candidates=p["max_candidates"],
            n_fallback=p["n_fallback"],
            fallback_radius_m=p["fallback_radius_m"],
            eps=p["eps"],
            min_pts=p["min_pts"],
        )

    def train_config(self, log_path=""):
        t = self.values["trainer"]
        return TrainConfig(
            epochs=t["epochs"],
            batch_size=t["batch_size"],
            lr=t["lr"],
            weight_decay=t["weight_decay"],
            mask_rate=t["mask_rate"],
            seed=t["seed"],
            log_path=log_path,
            num_threads=t["num_threads"],
        )

    def model_kwargs(self):
        e = self.values["encoder"]
        return {
            "d": e["d_model"],
            "n_layers": e["n_layers"],
            "n_heads": e["n_heads"],
            "max_seq": e["max_seq"],
            "dropout": e["dropout"],
            "fusion": e["fusion"],
            "l_pos": e["l_pos"],
            "l_theta": e["l_theta"],
        }
