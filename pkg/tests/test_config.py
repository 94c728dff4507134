"""Seed parsing, scene resolution, and config precedence."""

from __future__ import annotations

import json

import pytest

from logit_anchor import ConfigError, scene_to_dict
from logit_anchor.config import (
    DEFAULT_SEEDS,
    DEFAULT_STRATEGIES,
    SEED_ENV_VAR,
    build_run_config,
    env_seed_override,
    parse_seed_list,
    parse_strategies,
    resolve_scene,
)
from logit_anchor.simulator import preset


class TestSeedParsing:
    def test_plain_list(self):
        assert parse_seed_list("0, 3,7") == (0, 3, 7)

    def test_range_form(self):
        assert parse_seed_list("0:4") == (0, 1, 2, 3)
        assert parse_seed_list("5,10:12") == (5, 10, 11)

    @pytest.mark.parametrize(
        "text", ["", " , ", "x", "1:1", "3:1", "a:5", "1,1", "0:3,2"]
    )
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_seed_list(text)

    def test_env_override(self, monkeypatch):
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        assert env_seed_override() is None
        monkeypatch.setenv(SEED_ENV_VAR, "  ")
        assert env_seed_override() is None
        monkeypatch.setenv(SEED_ENV_VAR, "4,5")
        assert env_seed_override() == (4, 5)
        monkeypatch.setenv(SEED_ENV_VAR, "nope")
        with pytest.raises(ConfigError, match=SEED_ENV_VAR):
            env_seed_override()


class TestResolveScene:
    def test_default(self):
        spec, name = resolve_scene(None)
        assert name == "default"
        assert spec == preset("default")

    def test_preset_names(self):
        for name in ("default", "no-decay", "strong-decay"):
            spec, got = resolve_scene(name)
            assert got == name
            assert spec == preset(name)

    def test_inline_dict(self, scene):
        spec, name = resolve_scene(scene_to_dict(scene))
        assert name == "custom"
        assert spec == scene

    def test_json_path(self, scene, tmp_path):
        path = tmp_path / "myscene.json"
        path.write_text(json.dumps(scene_to_dict(scene)))
        spec, name = resolve_scene(str(path))
        assert name == "myscene"
        assert spec == scene

    def test_unknown_rejected(self):
        with pytest.raises(ConfigError, match="unknown scene"):
            resolve_scene("atlantis")

    def test_missing_json_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            resolve_scene(str(tmp_path / "absent.json"))


class TestParseStrategies:
    def test_string_form(self):
        strategies = parse_strategies("baseline; flb:gamma=0.5")
        assert [s.kind for s in strategies] == ["baseline", "flb"]
        assert strategies[1].flb.schedule.gamma == 0.5

    def test_list_form(self):
        strategies = parse_strategies(["greedy", "vcd"])
        assert [s.kind for s in strategies] == ["greedy", "vcd"]
        assert strategies[1].contrastive is not None


class TestBuildRunConfig:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        cfg = build_run_config()
        assert cfg.scene_name == "default"
        assert cfg.seeds == DEFAULT_SEEDS
        assert len(cfg.strategies) == len(DEFAULT_STRATEGIES)
        assert cfg.max_steps == 60
        assert cfg.temperature == 1.0
        assert cfg.bin_width == 20

    def test_file_overrides_defaults(self, tmp_path, monkeypatch):
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "scene": "no-decay",
            "strategies": ["baseline", "flb"],
            "seeds": [1, 2, 3],
            "max_steps": 10,
            "temperature": 0.5,
            "bin_width": 5,
        }))
        cfg = build_run_config(config_path=str(path))
        assert cfg.scene_name == "no-decay"
        assert cfg.seeds == (1, 2, 3)
        assert [s.kind for s in cfg.strategies] == ["baseline", "flb"]
        assert (cfg.max_steps, cfg.temperature, cfg.bin_width) == (10, 0.5, 5)

    def test_flags_override_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"seeds": [1], "max_steps": 10, "scene": "no-decay"}))
        cfg = build_run_config(
            config_path=str(path), scene="strong-decay", seeds="7:9", max_steps=5
        )
        assert cfg.scene_name == "strong-decay"
        assert cfg.seeds == (7, 8)
        assert cfg.max_steps == 5

    def test_env_beats_flags(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "100,101")
        cfg = build_run_config(seeds="0:50")
        assert cfg.seeds == (100, 101)

    def test_seeds_string_in_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"seeds": "3:6"}))
        assert build_run_config(config_path=str(path)).seeds == (3, 4, 5)

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"sceen": "default"}))
        with pytest.raises(ConfigError, match="unknown config keys"):
            build_run_config(config_path=str(path))

    def test_non_object_config_rejected(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(["baseline"]))
        with pytest.raises(ConfigError, match="must be an object"):
            build_run_config(config_path=str(path))

    def test_bad_json_reports_line(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{\n  broken\n}")
        with pytest.raises(ConfigError, match="line 2"):
            build_run_config(config_path=str(path))

    def test_validation(self, monkeypatch):
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        with pytest.raises(ConfigError):
            build_run_config(max_steps=0)
        with pytest.raises(ConfigError):
            build_run_config(temperature=0.0)
        with pytest.raises(ConfigError):
            build_run_config(bin_width=0)
        with pytest.raises(ConfigError):
            build_run_config(strategies="")
