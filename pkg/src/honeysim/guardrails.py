"""Hard limits on agent behaviour: impact budget, autonomy gating by
emissions level, and tamper detection over the sealed ruleset.

The ruleset (budget, gates, stage thresholds) is hashed at load time.
The harness re-verifies the digest every tick before the agent may
act; a mismatch must terminate the agent within the same tick. The
self-termination action itself is never vetoed, so the kill switch
stays reachable under any gate configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum

from .actions import ActionSpec, ActionEffect, AutonomyLevel
from .constraints import EmconLevel, EnvConstraints
from .errors import ConfigInvalid


@dataclass
class ImpactBudget:
    max_impact_per_action: float
    mission_need: float

    def __post_init__(self):
        if self.max_impact_per_action > self.mission_need:
            raise ConfigInvalid("impact budget must not exceed mission need")


@dataclass
class Ruleset:
    """The mutable rule data sealed by the digest. Tamper tests mutate
    an instance of this after sealing."""

    budget: ImpactBudget
    autonomy_gates: dict  # EmconLevel -> AutonomyLevel
    stage_thresholds: dict = field(default_factory=dict)  # stage name -> theta

    def canonical_bytes(self) -> bytes:
        payload = {
            "budget": {
                "max_impact_per_action": self.budget.max_impact_per_action,
                "mission_need": self.budget.mission_need,
            },
            "autonomy_gates": {level.label: gate.label
                               for level, gate in self.autonomy_gates.items()},
            "stage_thresholds": dict(self.stage_thresholds),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def ruleset_digest(rules_bytes: bytes) -> str:
    return hashlib.sha256(rules_bytes).hexdigest()


@dataclass
class GuardrailSet:
    ruleset: Ruleset
    expected_digest: str

    @property
    def budget(self) -> ImpactBudget:
        return self.ruleset.budget

    @property
    def autonomy_gates(self) -> dict:
        return self.ruleset.autonomy_gates

    @classmethod
    def seal(cls, ruleset: Ruleset) -> "GuardrailSet":
        _validate_gates(ruleset.autonomy_gates)
        return cls(ruleset=ruleset,
                   expected_digest=ruleset_digest(ruleset.canonical_bytes()))


def _validate_gates(gates: dict) -> None:
    for level in EmconLevel:
        if level not in gates:
            raise ConfigInvalid(f"autonomy gate missing for EMCON {level.label}")
    if not (gates[EmconLevel.OPEN] >= gates[EmconLevel.RESTRICTED]
            >= gates[EmconLevel.SILENT]):
        raise ConfigInvalid("autonomy gates must be monotone in EMCON strictness")


@dataclass(frozen=True)
class Verdict:
    allowed: bool
    reason: str | None = None


ALLOW = Verdict(True)

IMPACT_EXCEEDED = "impact_exceeded"
AUTONOMY_GATE = "autonomy_gate"
EMISSION_BLOCKED = "emission_blocked"


def check(action: ActionSpec, c: EnvConstraints, g: GuardrailSet) -> Verdict:
    """Review one action against the guardrails.

    Checks run in a fixed order (impact, autonomy gate, emission) and
    the first failure is reported. terminate_self is exempt by design.
    """
    if action.effect is ActionEffect.TERMINATE_SELF:
        return ALLOW
    if action.impact > g.budget.max_impact_per_action:
        return Verdict(False, IMPACT_EXCEEDED)
    if action.autonomy_level > g.autonomy_gates[c.emcon_level]:
        return Verdict(False, AUTONOMY_GATE)
    if action.emission_cost > 0 and c.emcon_level is EmconLevel.SILENT:
        return Verdict(False, EMISSION_BLOCKED)
    return ALLOW


class RulesetCheck(Enum):
    OK = "ok"
    TAMPERED = "tampered"


def verify_ruleset(g: GuardrailSet, current_rules: bytes) -> RulesetCheck:
    """Recompute the digest over the live rules. On TAMPERED the caller
    must transition the agent to Terminated within the same tick."""
    if ruleset_digest(current_rules) != g.expected_digest:
        return RulesetCheck.TAMPERED
    return RulesetCheck.OK


def save_ruleset(ruleset: Ruleset, path) -> None:
    """Write the canonical ruleset text, digest alongside in <path>.sha256."""
    data = ruleset.canonical_bytes()
    with open(path, "wb") as fh:
        fh.write(data)
        fh.write(b"\n")
    with open(f"{path}.sha256", "w", encoding="utf-8") as fh:
        fh.write(ruleset_digest(data))
        fh.write("\n")


def load_ruleset(path) -> GuardrailSet:
    """Load and seal a ruleset file, verifying the stored digest."""
    with open(path, "rb") as fh:
        data = fh.read().rstrip(b"\n")
    with open(f"{path}.sha256", "r", encoding="utf-8") as fh:
        stored = fh.read().strip()
    if ruleset_digest(data) != stored:
        raise ConfigInvalid(f"ruleset file {path} does not match its digest")
    try:
        payload = json.loads(data)
        budget = ImpactBudget(**payload["budget"])
        gates = {EmconLevel.from_name(level): AutonomyLevel.from_name(gate)
                 for level, gate in payload["autonomy_gates"].items()}
        ruleset = Ruleset(budget, gates, dict(payload["stage_thresholds"]))
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"ruleset file {path} is malformed: {exc}") from exc
    sealed = GuardrailSet.seal(ruleset)
    if sealed.expected_digest != stored:
        raise ConfigInvalid(f"ruleset file {path} is not in canonical form")
    return sealed


def build_ruleset(guard_config, thresholds_config) -> Ruleset:
    """Assemble the live ruleset from scenario configuration."""
    gates = {
        EmconLevel.OPEN: AutonomyLevel.from_name(guard_config.autonomy_gates.open),
        EmconLevel.RESTRICTED: AutonomyLevel.from_name(guard_config.autonomy_gates.restricted),
        EmconLevel.SILENT: AutonomyLevel.from_name(guard_config.autonomy_gates.silent),
    }
    thresholds = {
        "pattern_recognition": thresholds_config.pattern_recognition,
        "online_learning": thresholds_config.online_learning,
        "human_escalation": thresholds_config.human_escalation,
        "game_search": thresholds_config.game_search,
        "fail_safe": thresholds_config.fail_safe,
    }
    return Ruleset(
        budget=ImpactBudget(guard_config.max_impact_per_action,
                            guard_config.mission_need),
        autonomy_gates=gates,
        stage_thresholds=thresholds,
    )
