# test_config.py - 配置加载与校验
from src.config import (
    ENV_LOG_DIR,
    ENV_LOG_LEVEL,
    ENV_THREADS,
    apply_env_overrides,
    get_default_config,
    load_config,
    validate_config,
)


def test_empty_config_gets_defaults(quiet_logger):
    config = validate_config({})
    assert config == get_default_config()


def test_values_are_clamped_and_corrected(quiet_logger):
    config = validate_config({
        "oracle": {"n_radial": 8, "n_angular": "many", "tolerance": {"laguerre": -1}},
        "cli": {"threads": 0, "format": "xml"},
        "logging": {"level": "DEBUG"},
    })
    assert config["oracle"]["n_radial"] == 32
    assert config["oracle"]["n_angular"] == 128
    assert config["oracle"]["tolerance"]["laguerre"] == 1e-5
    assert config["oracle"]["tolerance"]["hermite"] == 1e-7
    assert config["cli"]["threads"] == 1
    assert config["cli"]["format"] == "text"
    assert config["logging"]["level"] == "debug"

    config = validate_config({"logging": {"level": "loud"}, "verify": {"suites": "oracle"}})
    assert config["logging"]["level"] == "normal"
    assert "oracle" in config["verify"]["suites"]


def test_load_config_from_file(tmp_path, quiet_logger):
    path = tmp_path / "planar.yaml"
    path.write_text("cli:\n  threads: 4\noracle:\n  n_radial: 64\n", encoding="utf-8")
    config = load_config(str(path))
    assert config["cli"]["threads"] == 4
    assert config["oracle"]["n_radial"] == 64
    assert config["oracle"]["n_angular"] == 128


def test_bad_config_files_fall_back_to_defaults(tmp_path, quiet_logger):
    assert load_config(str(tmp_path / "missing.yaml")) == get_default_config()
    broken = tmp_path / "broken.yaml"
    broken.write_text("cli: [unclosed\n", encoding="utf-8")
    assert load_config(str(broken)) == get_default_config()
    listing = tmp_path / "list.yaml"
    listing.write_text("- a\n- b\n", encoding="utf-8")
    assert load_config(str(listing)) == get_default_config()


def test_bundled_config_matches_defaults(quiet_logger):
    assert load_config() == get_default_config()


def test_env_overrides(monkeypatch, quiet_logger):
    monkeypatch.setenv(ENV_THREADS, "3")
    monkeypatch.setenv(ENV_LOG_LEVEL, "TRACE")
    monkeypatch.setenv(ENV_LOG_DIR, "/tmp/planar-logs")
    config = apply_env_overrides(get_default_config())
    assert config["cli"]["threads"] == 3
    assert config["logging"]["level"] == "trace"
    assert config["logging"]["log_dir"] == "/tmp/planar-logs"

    monkeypatch.setenv(ENV_THREADS, "lots")
    assert apply_env_overrides(get_default_config())["cli"]["threads"] == 1


def test_oracle_n_values_validation(quiet_logger):
    assert validate_config({})["verify"]["oracle"]["N_values"] is None
    config = validate_config({"verify": {"oracle": {"N_values": [1, 3, 6]}}})
    assert config["verify"]["oracle"]["N_values"] == [1, 3, 6]
    assert config["verify"]["oracle"]["N_max"] == 6
    for bad in ("all", [0, 2], [1, True], [1.5]):
        config = validate_config({"verify": {"oracle": {"N_values": bad}}})
        assert config["verify"]["oracle"]["N_values"] is None
