import random

import pytest

from honeysim import config as config_mod
from honeysim.world import EventKind, WorldEvent


def make_config(**overrides):
    """Scenario config builder with deep-merge of nested overrides."""
    base = config_mod.ScenarioConfig().to_dict()

    def merge(dst, src):
        for key, value in src.items():
            if isinstance(value, dict) and isinstance(dst.get(key), dict):
                merge(dst[key], value)
            else:
                dst[key] = value

    merge(base, overrides)
    return config_mod.from_mapping(base)


def quiet_world(**overrides):
    """A world config with all stochastic noise silenced, so tests can
    force exact trajectories."""
    world = {
        "p_logline": 0.0, "p_false_ids": 0.0, "p_false_antimalware": 0.0,
        "p_false_unauthorized": 0.0, "p_integrity_alert": 0.0,
        "p_antimalware_alert": 0.0, "p_decoy_touch": 0.0,
        "p_dummy_process": 0.0, "load_noise": 0.0,
    }
    world.update(overrides)
    return world


def random_event(rng: random.Random, tick: int = 0) -> WorldEvent:
    kind = rng.choice(list(EventKind))
    severity = rng.randint(1, 5) if kind is EventKind.IDS_ALERT else 0
    load = rng.random() if kind is EventKind.LOAD_SAMPLE else 0.0
    return WorldEvent(tick, kind, f"node-{rng.randint(0, 5)}", severity,
                      load, rng.random() < 0.3)


@pytest.fixture
def rng():
    return random.Random(20240817)
