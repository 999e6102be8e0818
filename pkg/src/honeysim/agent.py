"""Reward function, state discretization, and tabular Q-learning.

The reward combines three ratio terms: deception yield over real
attack volume, resource delta over resources available at action
time, and justified help requests over false alarms. Denominators
that can legitimately be zero are floored (default 1) so the reward
stays total while preserving the ratio semantics elsewhere.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple

from .errors import EmptyWindow, NonFinite
from .sensing import FeatureVector
from .world import EventKind


@dataclass(frozen=True)
class RewardParams:
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    denominator_floor: int = 1

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not math.isfinite(getattr(self, name)):
                raise NonFinite(f"reward coefficient {name} must be finite")
        if self.denominator_floor < 1:
            raise NonFinite("denominator_floor must be a positive integer")


@dataclass(frozen=True)
class RewardInputs:
    honey_events: int
    security_events: int
    delta_resources: int
    total_resources: int
    justified_cfh: int
    cw: int

    def __post_init__(self):
        for name in ("honey_events", "security_events", "justified_cfh", "cw"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.total_resources <= 0:
            raise ValueError("total_resources must be positive")


def reward(p: RewardParams, x: RewardInputs) -> float:
    """Pure, deterministic scalar reward.

    honey term is positive yield, the resource term carries the sign
    of delta_resources (negative when the action consumed resources),
    and the help term rewards justified requests per false alarm.
    """
    floor = p.denominator_floor
    honey_term = p.a * x.honey_events / max(x.security_events, floor)
    resource_term = p.b * x.delta_resources / x.total_resources
    cfh_term = p.c * x.justified_cfh / max(x.cw, floor)
    return honey_term + resource_term + cfh_term


def reward_terms(p: RewardParams, x: RewardInputs) -> tuple:
    floor = p.denominator_floor
    return (p.a * x.honey_events / max(x.security_events, floor),
            p.b * x.delta_resources / x.total_resources,
            p.c * x.justified_cfh / max(x.cw, floor))


class WorldSummary(NamedTuple):
    """The agent-visible world digest used for discretization."""

    honeypots_active: int
    available: int


class StateKey(NamedTuple):
    threat_bin: int
    load_bin: int
    honeypots_active_bin: int
    recent_honey_touch: bool

    def encode(self) -> str:
        return f"{self.threat_bin},{self.load_bin},{self.honeypots_active_bin}," \
               f"{1 if self.recent_honey_touch else 0}"

    @classmethod
    def decode(cls, text: str) -> "StateKey":
        t, l, h, r = text.split(",")
        return cls(int(t), int(l), int(h), r == "1")


@dataclass(frozen=True)
class BinThresholds:
    """Three ascending edges per axis; bin k covers [edge[k-1], edge[k])
    and values past the top edge clamp into bin 3."""

    threat: tuple = (0.5, 1.5, 3.0)
    load: tuple = (0.25, 0.5, 0.75)
    honeypots: tuple = (1, 2, 4)


def discretize(fv: FeatureVector, summary: WorldSummary,
               bins: BinThresholds = BinThresholds(),
               anomaly: float = 0.0) -> StateKey:
    """Deterministic 128-way discretization of the percept."""
    return StateKey(
        threat_bin=bisect_right(bins.threat, anomaly),
        load_bin=bisect_right(bins.load, fv.system_load),
        honeypots_active_bin=bisect_right(bins.honeypots, summary.honeypots_active),
        recent_honey_touch=fv.honey_touches >= 1,
    )


class QTable:
    """Sparse (StateKey, action id) -> value map; absent cells read 0."""

    def __init__(self, actions, alpha: float = 0.1, gamma: float = 0.9):
        self.actions = tuple(sorted(actions))
        self.alpha = alpha
        self.gamma = gamma
        self.values: dict = {}

    def get(self, state: StateKey, action_id: str) -> float:
        return self.values.get((state, action_id), 0.0)

    def max_value(self, state: StateKey) -> float:
        return max(self.values.get((state, a), 0.0) for a in self.actions)

    def best_action(self, state: StateKey) -> str:
        best = self.actions[0]
        best_value = self.values.get((state, best), 0.0)
        for a in self.actions[1:]:
            v = self.values.get((state, a), 0.0)
            if v > best_value:
                best, best_value = a, v
        return best

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "gamma": self.gamma,
            "actions": list(self.actions),
            "entries": {f"{s.encode()}|{a}": v
                        for (s, a), v in sorted(self.values.items(),
                                                key=lambda kv: (kv[0][0].encode(), kv[0][1]))},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QTable":
        table = cls(data["actions"], data["alpha"], data["gamma"])
        for key, value in data["entries"].items():
            state_text, action_id = key.split("|")
            table.values[(StateKey.decode(state_text), action_id)] = value
        return table


def select_action(q: QTable, state: StateKey, epsilon: float, rng) -> str:
    """Epsilon-greedy over the table's action set.

    With epsilon == 0 no randomness is consumed and the choice is a
    pure function of (table, state); ties break to the lowest id.
    """
    if epsilon > 0.0 and rng.uniform() < epsilon:
        return q.actions[rng.randrange(len(q.actions))]
    return q.best_action(state)


def q_update(q: QTable, state: StateKey, action_id: str, r: float,
             next_state: StateKey) -> QTable:
    """One-step temporal-difference update; touches exactly one cell."""
    if not math.isfinite(r):
        raise NonFinite(f"reward {r!r} is not finite")
    current = q.get(state, action_id)
    target = r + q.gamma * q.max_value(next_state)
    q.values[(state, action_id)] = current + q.alpha * (target - current)
    return q


_HONEY_KINDS = (EventKind.HONEY_TOUCH, EventKind.DUMMY_FILE_ACCESS,
                EventKind.DUMMY_PROCESS_ALERT)


def accumulate_reward_inputs(trace_window, pool_available: int,
                             last_action_delta: int,
                             honeypot_node_ids=frozenset(),
                             window_ticks: int = 1) -> RewardInputs:
    """Harness-side tally of one accounting period.

    trace_window mixes WorldEvents and sent-message records (anything
    with a `classification` attribute of "justified" or "cry_wolf").
    Ground truth is taken from the events; the agent never sees it.
    """
    if window_ticks <= 0:
        raise EmptyWindow("reward accounting period must cover at least one tick")
    honey = security = justified = cw = 0
    for item in trace_window:
        if hasattr(item, "classification"):  # a sent-message record
            if item.classification == "justified":
                justified += 1
            elif item.classification == "cry_wolf":
                cw += 1
            continue
        if item.kind in _HONEY_KINDS:
            honey += 1
        elif (item.kind is EventKind.IDS_ALERT and item.truth_malicious
              and item.node not in honeypot_node_ids):
            security += 1
    return RewardInputs(
        honey_events=honey,
        security_events=security,
        delta_resources=last_action_delta,
        total_resources=max(pool_available, 1),
        justified_cfh=justified,
        cw=cw,
    )
