import pytest

from covopt.exceptions import ConfigError
from covopt.harness.config import ExperimentConfig

from pathlib import Path

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.yaml"))


def test_defaults_round_trip():
    cfg = ExperimentConfig()
    assert ExperimentConfig.from_yaml(cfg.to_yaml()) == cfg


@pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_shipped_presets_parse_and_round_trip(path):
    cfg = ExperimentConfig.load(path)
    assert ExperimentConfig.from_yaml(cfg.to_yaml()) == cfg


def test_presets_cover_every_experiment():
    names = {p.stem for p in CONFIGS}
    assert {"covertime_grid9x9", "covertime_fourroom", "study_random_graphs", "draw_fourroom",
            "learn_grid9x9", "learn_fourroom", "learn_hanoi", "learn_taxi",
            "learn_count_sweep_fourroom"} <= names
    assert any(n.startswith("learn_online") for n in names)
    assert any(n.startswith("learn_sampled") for n in names)


@pytest.mark.parametrize("text,match", [
    ("bogus: 1\n", "unknown"),
    ("learning:\n  epsilonn: 0.2\n", "epsilonn"),
    ("discovery:\n  methods: [covering, magic]\n", "magic"),
    ("domain:\n  name: mars\n", "mars"),
    ("learning:\n  episodes: many\n", "episodes"),
    ("[1, 2\n", "YAML"),
    ("- a\n- b\n", "mapping"),
])
def test_rejects_bad_configs(text, match):
    with pytest.raises(ConfigError, match=match):
        ExperimentConfig.from_yaml(text)


def test_missing_file():
    with pytest.raises(ConfigError):
        ExperimentConfig.load("/nonexistent/config.yaml")


def test_save_load(tmp_path):
    cfg = ExperimentConfig.from_yaml("domain:\n  name: hanoi\n  discs: 3\nseed: 9\n")
    cfg.save(tmp_path / "c.yaml")
    assert ExperimentConfig.load(tmp_path / "c.yaml") == cfg
