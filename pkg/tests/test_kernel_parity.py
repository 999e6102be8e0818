"""Cross-backend equivalence: the compiled kernels must reproduce the
pure-Python reference draw for draw and byte for byte."""

import random

import pytest

from conftest import make_config, random_event
from honeysim._kernels import get_backend, pure
from honeysim.harness import RandomPolicy, run_scenario
from honeysim.world import init_world, step_world

try:
    accel = get_backend("compiled")
except ImportError:  # extension not built in this environment
    accel = None

needs_accel = pytest.mark.skipif(accel is None,
                                 reason="compiled extension not built")


@needs_accel
def test_stream_sequences_identical():
    for seed in (0, 1, 2**40 + 7, 2**63, 2**64 - 1):
        sp, sa = pure.Stream(seed), accel.Stream(seed)
        for _ in range(500):
            assert sp.next_u64() == sa.next_u64()
        for _ in range(500):
            assert sp.uniform() == sa.uniform()
        for n in range(1, 50):
            assert sp.randrange(n) == sa.randrange(n)
        for p in (0.0, 0.3, 0.999):
            assert sp.below(p) == sa.below(p)
        assert sp.state == sa.state


@needs_accel
def test_mix64_identical():
    rng = random.Random(1)
    values = [0, 1, 2**64 - 1] + [rng.getrandbits(64) for _ in range(200)]
    for x in values:
        assert pure.mix64(x) == accel.mix64(x)


@needs_accel
def test_tally_identical(rng):
    events = [random_event(rng) for _ in range(500)]
    assert pure.tally(events) == accel.tally(events)


def varied_config(rng):
    return make_config(world={
        "capacity": 200,
        "database": {"count": rng.randint(1, 3), "cost": rng.randint(5, 15)},
        "application": {"count": rng.randint(1, 3), "cost": rng.randint(5, 15)},
        "web": {"count": rng.randint(1, 3), "cost": rng.randint(5, 15)},
        "honeypot": {"count": rng.randint(0, 2), "cost": rng.randint(5, 15)},
        "campaigns": [
            {"id": f"apt-{k}", "intensity": rng.uniform(0.2, 1.0),
             "activation_tick": rng.choice([0, 0, 25])}
            for k in range(rng.randint(0, 3))
        ],
        "p_detect": rng.uniform(0.2, 1.0),
        "hits_to_compromise": rng.randint(1, 4),
    }, episode_ticks=150)


@needs_accel
def test_world_event_streams_identical_across_backends():
    rng = random.Random(31337)
    for _ in range(10):
        cfg = varied_config(rng)
        seed = rng.getrandbits(63)
        wp = init_world(cfg, seed, backend="pure")
        wa = init_world(cfg, seed, backend="compiled")
        for _ in range(150):
            assert step_world(wp) == step_world(wa)
        assert wp.nodes() == wa.nodes()
        assert [wp.campaign_known_tokens(c) for c in wp.campaign_ids] == \
               [wa.campaign_known_tokens(c) for c in wa.campaign_ids]


@needs_accel
def test_backends_agree_under_interleaved_actions():
    # Covers the rarely-hit kernel branches: perimeter restriction,
    # rotation, quarantine, stop/start, decoy deployment.
    from honeysim.actions import ActionEffect
    from honeysim.errors import (IllegalTransition, InsufficientResources,
                                 NoSuchNode)
    from honeysim.world import ExecutedAction, apply_action

    rng = random.Random(4242)
    cfg = make_config(world={
        "capacity": 150,
        "database": {"count": 2, "cost": 10},
        "application": {"count": 2, "cost": 10},
        "web": {"count": 2, "cost": 10},
        "honeypot": {"count": 1, "cost": 10},
        "campaigns": [{"id": "apt-0", "intensity": 0.9},
                      {"id": "apt-1", "intensity": 0.5, "activation_tick": 30}],
        "hits_to_compromise": 2,
    })
    seed = 90125
    wp = init_world(cfg, seed, backend="pure")
    wa = init_world(cfg, seed, backend="compiled")
    script = [
        ExecutedAction("rotate_address", ActionEffect.ROTATE_ADDRESS, "db-0"),
        ExecutedAction("restrict_comms_inbound", ActionEffect.RESTRICT_COMMS_INBOUND),
        ExecutedAction("quarantine_node", ActionEffect.QUARANTINE_NODE, "web-0"),
        ExecutedAction("start_honeypot", ActionEffect.START_HONEYPOT),
        ExecutedAction("stop_honeypot", ActionEffect.STOP_HONEYPOT, "hp-0"),
        ExecutedAction("deploy_dummy_files", ActionEffect.DEPLOY_DUMMY_FILES, "app-1"),
        ExecutedAction("restore_known_good", ActionEffect.RESTORE_KNOWN_GOOD, "web-0"),
        ExecutedAction("stop_real_vm", ActionEffect.STOP_REAL_VM, "db-1"),
        ExecutedAction("start_real_vm", ActionEffect.START_REAL_VM, "db-1"),
    ]
    for t in range(300):
        assert step_world(wp) == step_world(wa)
        if t % 7 == 0:
            action = rng.choice(script)
            results = []
            for w in (wp, wa):
                try:
                    results.append(("ok", apply_action(w, action).delta_resources))
                except (IllegalTransition, InsufficientResources, NoSuchNode) as exc:
                    results.append(("err", type(exc).__name__))
            assert results[0] == results[1]
    assert wp.nodes() == wa.nodes()
    assert wp.pool == wa.pool


@needs_accel
def test_full_runs_byte_identical_across_backends():
    rng = random.Random(777)
    for _ in range(5):
        cfg = varied_config(rng)
        seed = rng.getrandbits(31)
        rep_p, lines_p = run_scenario(cfg, seed, RandomPolicy(), backend="pure")
        rep_a, lines_a = run_scenario(cfg, seed, RandomPolicy(), backend="compiled")
        assert lines_p == lines_a
        assert rep_p == rep_a
