"""Unit tests for config module."""

import json
import os
from pathlib import Path

import pytest

from steklov_windows.config import DEFAULTS, Config, describe_keys, get_config, parse_config, set_config
from steklov_windows.errors import ConfigError


class TestConfig:
    """Tests for Config class."""

    def test_default_project_root(self):
        """Test that default project root is set correctly."""
        config = Config()
        assert config.project_root.exists()
        assert (config.project_root / "steklov_windows").exists()

    def test_custom_project_root(self, tmp_path: Path):
        """Test custom project root."""
        config = Config(project_root=tmp_path)
        assert config.project_root == tmp_path.resolve()

    def test_results_dir(self, tmp_path: Path):
        """Test results directory path."""
        config = Config(project_root=tmp_path)
        assert config.results_dir == tmp_path.resolve() / "results"

    def test_ensure_dirs(self, tmp_path: Path):
        """Test that ensure_dirs creates the results directory and tolerates reruns."""
        config = Config(project_root=tmp_path)
        config.ensure_dirs()
        config.ensure_dirs()
        assert config.results_dir.is_dir()

    def test_threads_from_environment(self, monkeypatch):
        """Test that STEKLOV_THREADS sets the worker count."""
        monkeypatch.setenv("STEKLOV_THREADS", "3")
        assert Config().threads == 3

    def test_threads_auto(self, monkeypatch):
        """Test that 0 means one worker per CPU."""
        monkeypatch.setenv("STEKLOV_THREADS", "0")
        assert Config().threads == (os.cpu_count() or 1)

    def test_threads_invalid(self, monkeypatch):
        """Test that a non-integer STEKLOV_THREADS is rejected with its name."""
        monkeypatch.setenv("STEKLOV_THREADS", "many")
        with pytest.raises(ConfigError) as info:
            _ = Config().threads
        assert info.value.key == "STEKLOV_THREADS"


class TestGetConfig:
    """Tests for get_config and set_config."""

    def test_singleton(self):
        """Test that get_config returns the same instance."""
        assert get_config() is get_config()

    def test_set_config(self, tmp_path: Path, monkeypatch):
        """Test that set_config replaces the default instance."""
        from steklov_windows import config as config_module

        monkeypatch.setattr(config_module, "_default_config", None)
        custom = Config(project_root=tmp_path)
        set_config(custom)
        assert get_config() is custom


class TestParseConfig:
    """Tests for parse_config."""

    def test_defaults(self):
        """Test that an empty configuration takes every documented default."""
        run = parse_config()
        assert run.p == 2.0
        assert run.alpha == 0.3
        assert run.k == (4, 8, 16, 32)
        assert run.a == 1.0
        assert run.regime == "critical"
        assert run.output is None

    def test_minimal_file(self, tmp_path: Path):
        """Test that a minimal JSON file is completed with defaults."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"regime": "critical", "alpha": 0.3}))
        run = parse_config(path)
        assert run.p == 2.0
        assert run.k == (4, 8, 16, 32)
        assert run.regime == "critical"

    def test_alpha_out_of_range(self):
        """Test that alpha outside (0, 1) is rejected with its key."""
        with pytest.raises(ConfigError) as info:
            parse_config(overrides={"alpha": 1.2})
        assert info.value.key == "alpha"

    def test_flag_overrides_file(self, tmp_path: Path):
        """Test that a k flag wins over the file value."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"k": 32}))
        assert parse_config(path).k == (32,)
        assert parse_config(path, {"k": [64]}).k == (64,)

    def test_k_flag_overrides_file_eps(self, tmp_path: Path):
        """Test that a k flag also wins over an eps list in the file."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"eps": [0.25]}))
        assert parse_config(path, {"k": [8]}).k == (8,)

    def test_toml_sections(self, tmp_path: Path):
        """Test that TOML files may group keys into sections."""
        path = tmp_path / "run.toml"
        path.write_text('[oscillation]\nregime = "supercritical"\nk = [8, 4, 8]\n\n[sweep]\nalpha = 0.25\n')
        run = parse_config(path)
        assert run.a == 2.0
        assert run.k == (4, 8)
        assert run.alpha == 0.25

    def test_unknown_key(self, tmp_path: Path):
        """Test that unknown keys are rejected with their name."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"alhpa": 0.3}))
        with pytest.raises(ConfigError) as info:
            parse_config(path)
        assert info.value.key == "alhpa"

    def test_key_in_wrong_section(self, tmp_path: Path):
        """Test that a key outside its section is rejected."""
        path = tmp_path / "run.toml"
        path.write_text("[solver]\nalpha = 0.3\n")
        with pytest.raises(ConfigError) as info:
            parse_config(path)
        assert info.value.key == "alpha"

    def test_eps_list(self):
        """Test that reciprocal eps values become k values."""
        assert parse_config(overrides={"eps": [0.125, 0.25]}).k == (4, 8)

    def test_eps_not_reciprocal(self):
        """Test that eps that is not 1/k is rejected."""
        with pytest.raises(ConfigError) as info:
            parse_config(overrides={"eps": [0.3]})
        assert info.value.key == "eps"

    def test_regime_sets_a(self):
        """Test regime defaults for the amplitude exponent."""
        assert parse_config(overrides={"regime": "subcritical"}).a == 0.5
        assert parse_config(overrides={"regime": "supercritical"}).a == 2.0

    def test_regime_conflict(self):
        """Test that a regime contradicting a is rejected on key a."""
        with pytest.raises(ConfigError) as info:
            parse_config(overrides={"regime": "subcritical", "a": 2.0})
        assert info.value.key == "a"

    def test_invalid_p(self):
        """Test that p < 2 is rejected."""
        with pytest.raises(ConfigError) as info:
            parse_config(overrides={"p": 1.5})
        assert info.value.key == "p"

    def test_missing_file(self, tmp_path: Path):
        """Test that a missing file is a configuration error."""
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "missing.toml")

    def test_unsupported_format(self, tmp_path: Path):
        """Test that only JSON and TOML files are accepted."""
        path = tmp_path / "run.yaml"
        path.write_text("alpha: 0.3\n")
        with pytest.raises(ConfigError):
            parse_config(path)

    def test_to_sweep(self):
        """Test conversion to a sweep configuration."""
        run = parse_config(overrides={"regime": "supercritical", "k": [4, 8], "threads": 2})
        sweep = run.to_sweep()
        assert sweep.ks == (4, 8)
        assert sweep.a == 2.0
        assert sweep.threads == 2
        assert sweep.regime == "supercritical"


class TestDescribeKeys:
    """Tests for describe_keys."""

    def test_lists_every_key(self):
        """Test that every configuration key appears with its default."""
        text = describe_keys()
        for key, value in DEFAULTS.items():
            assert f"{key} = {value!r}" in text
