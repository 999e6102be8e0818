"""Staged decision flow: cheap mechanisms first, a guaranteed
fail-safe last, every proposal reviewed by an arbiter.

Stages run in a fixed order of increasing intensity. A stage is
skipped when the environment cannot pay for it (connectivity, time,
power, emissions posture); an attempted stage consumes its cost from
the per-decision budget. The first proposal the arbiter accepts wins
and is fed back to the online learner's experience stream; if nothing
is accepted the fail-safe profile decides, and a plain no-op is the
unvetoable floor, so decide() is total.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum

from . import guardrails as gr
from .actions import ActionCatalog
from .agent import StateKey
from .constraints import EmconLevel, EnvConstraints
from .errors import ModelIncomplete, OperatorTimeout
from .sensing import FeatureVector


class StageId(IntEnum):
    """Runtime stages in evaluation order. Offline learning is a
    build-time trainer that fills the pattern table; it is not a
    runtime stage."""

    PATTERN_RECOGNITION = 0
    ONLINE_LEARNING = 1
    HUMAN_ESCALATION = 2
    GAME_SEARCH = 3
    FAIL_SAFE = 4

    @property
    def label(self) -> str:
        return self.name.lower()


class FailSafeProfile(Enum):
    NO_ACTION = "no_action"
    LOW_THRESHOLD_ACT = "low_threshold_act"
    TERMINATE = "terminate"

    @classmethod
    def from_name(cls, name: str) -> "FailSafeProfile":
        return cls(name)


@dataclass(frozen=True)
class ProposedAction:
    action: str
    confidence: float
    stage: StageId


@dataclass(frozen=True)
class Decision:
    action: str
    provenance: StageId
    rejected: tuple  # ((StageId, reason), ...) in evaluation order


@dataclass(frozen=True)
class StageCost:
    time: int = 0
    power: int = 0


DEFAULT_STAGE_COSTS = {
    StageId.PATTERN_RECOGNITION: StageCost(0, 0),
    StageId.ONLINE_LEARNING: StageCost(1, 5),
    StageId.HUMAN_ESCALATION: StageCost(5, 1),
    StageId.GAME_SEARCH: StageCost(10, 10),
    StageId.FAIL_SAFE: StageCost(0, 0),
}

DEFAULT_THRESHOLDS = {
    StageId.PATTERN_RECOGNITION: 0.8,
    StageId.ONLINE_LEARNING: 0.6,
    StageId.HUMAN_ESCALATION: 0.5,
    StageId.GAME_SEARCH: 0.3,
    StageId.FAIL_SAFE: 0.0,
}

UNAVAILABLE = "unavailable"
NO_PROPOSAL = "no_proposal"
BELOW_THRESHOLD = "below_threshold"
OPERATOR_TIMEOUT = "operator_timeout"
MODEL_INCOMPLETE = "model_incomplete"


def stage_available(stage: StageId, c: EnvConstraints,
                    costs: dict = None) -> bool:
    """Whether the environment can pay for a stage right now.

    Relaxing any constraint never removes a stage from the available
    set; the fail-safe and pattern lookup are always available.
    """
    costs = costs or DEFAULT_STAGE_COSTS
    if stage is StageId.FAIL_SAFE or stage is StageId.PATTERN_RECOGNITION:
        return True
    cost = costs[stage]
    if stage is StageId.HUMAN_ESCALATION:
        return (c.connectivity and c.time_budget >= cost.time
                and c.emcon_level is not EmconLevel.SILENT)
    return c.time_budget >= cost.time and c.power_budget >= cost.power


@dataclass
class PatternTable:
    """Immutable-at-runtime map from discretized percept signature to
    (action, confidence), produced by the offline trainer."""

    entries: dict = field(default_factory=dict)  # StateKey -> (action, conf)

    def lookup(self, key: StateKey):
        return self.entries.get(key)

    def best_entry(self):
        """Highest-confidence entry, ties broken by action id then key."""
        if not self.entries:
            return None
        return min(((-conf, action, key.encode())
                    for key, (action, conf) in self.entries.items()))

    def to_dict(self) -> dict:
        return {"entries": {key.encode(): [action, conf]
                            for key, (action, conf)
                            in sorted(self.entries.items(),
                                      key=lambda kv: kv[0].encode())}}

    @classmethod
    def from_dict(cls, data: dict) -> "PatternTable":
        entries = {StateKey.decode(text): (action, conf)
                   for text, (action, conf) in data["entries"].items()}
        return cls(entries)


def pattern_match(table: PatternTable, key: StateKey):
    """Exact signature lookup; None on a miss."""
    hit = table.lookup(key)
    if hit is None:
        return None
    action, confidence = hit
    return ProposedAction(action, confidence, StageId.PATTERN_RECOGNITION)


@dataclass(frozen=True)
class OperatorPolicy:
    """Scripted stand-in for a human operator."""

    behavior: str = "approve_first"  # or "decline"
    latency: int = 1


def escalate(operator: OperatorPolicy, fv: FeatureVector, options,
             time_budget: int):
    """Offer ranked options to the scripted operator.

    The reply consumes its latency from the decision's time budget;
    a latency above the remaining budget is a timeout.
    """
    if operator.latency > time_budget:
        raise OperatorTimeout(
            f"operator latency {operator.latency} exceeds budget {time_budget}")
    if operator.behavior == "decline" or not options:
        return None
    return ProposedAction(options[0], 1.0, StageId.HUMAN_ESCALATION)


def _expected_value(model, state, action, horizon):
    total = 0.0
    for prob, next_state, payoff in model.outcomes(state, action):
        future = _best_value(model, next_state, horizon - 1)
        total += prob * (payoff + future)
    return total


def _best_value(model, state, horizon):
    if horizon == 0:
        return 0.0
    best = None
    for action in sorted(model.actions(state)):
        value = _expected_value(model, state, action, horizon)
        if best is None or value > best:
            best = value
    if best is None:
        raise ModelIncomplete(f"no actions defined for state {state!r}")
    return best


def game_search(model, state, horizon: int, confidence: float = 1.0) -> ProposedAction:
    """Expectimax over defender-max / attacker-chance levels.

    Returns the root action maximizing expected cumulative payoff,
    ties broken to the lowest action id. The model must define
    outcomes for every reachable (state, action); a missing pair
    raises ModelIncomplete (models signal it with KeyError).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    try:
        actions = sorted(model.actions(state))
        if not actions:
            raise ModelIncomplete(f"no actions defined for state {state!r}")
        best_action, best_value = None, None
        for action in actions:
            value = _expected_value(model, state, action, horizon)
            if best_value is None or value > best_value:
                best_action, best_value = action, value
        return ProposedAction(best_action, confidence, StageId.GAME_SEARCH)
    except KeyError as exc:
        raise ModelIncomplete(f"model has no outcomes for {exc}") from exc


class QValueModel:
    """Outcome model backed by learned action values: myopic payoffs,
    state assumed stable over the short search horizon."""

    def __init__(self, qtable):
        self.qtable = qtable

    def actions(self, state):
        return self.qtable.actions

    def outcomes(self, state, action):
        return ((1.0, state, self.qtable.get(state, action)),)


def failsafe(profile: FailSafeProfile, table: PatternTable | None = None,
             noop_action: str = "noop",
             terminate_action: str = "terminate_self") -> ProposedAction:
    """The preloaded terminal behaviour; always yields a proposal."""
    if profile is FailSafeProfile.TERMINATE:
        return ProposedAction(terminate_action, 1.0, StageId.FAIL_SAFE)
    if profile is FailSafeProfile.LOW_THRESHOLD_ACT and table is not None:
        best = table.best_entry()
        if best is not None:
            neg_conf, action, _key = best
            return ProposedAction(action, -neg_conf, StageId.FAIL_SAFE)
    return ProposedAction(noop_action, 1.0, StageId.FAIL_SAFE)


def arbiter_review(p: ProposedAction, c: EnvConstraints, guard: gr.GuardrailSet,
                   thresholds: dict, catalog: ActionCatalog) -> gr.Verdict:
    """Accept iff confidence clears the stage threshold and the
    guardrails allow the action; the first failure is the reason."""
    if p.confidence < thresholds[p.stage]:
        return gr.Verdict(False, BELOW_THRESHOLD)
    verdict = gr.check(catalog.get(p.action), c, guard)
    if not verdict.allowed:
        return gr.Verdict(False, f"guardrail:{verdict.reason}")
    return gr.Verdict(True)


class OnlineLearner:
    """Stage handle around the live policy.

    Every accepted decision, whatever stage produced it, is observed
    exactly once so the learner benefits from all actions taken.
    """

    def __init__(self, policy, confidence: float = 0.9):
        self.policy = policy
        self.confidence = confidence
        self.experience: list = []

    def propose(self, key: StateKey):
        action = self.policy.choose(key)
        if action is None:
            return None
        return ProposedAction(action, self.confidence, StageId.ONLINE_LEARNING)

    def rank(self, key: StateKey):
        return self.policy.rank(key)

    def observe(self, key: StateKey, action: str, stage: StageId) -> None:
        self.experience.append((key, action, stage))


@dataclass
class StageContext:
    """Initialized stage handles plus the shared review machinery."""

    catalog: ActionCatalog
    guard: gr.GuardrailSet
    online: OnlineLearner
    pattern_table: PatternTable = field(default_factory=PatternTable)
    operator: OperatorPolicy = field(default_factory=OperatorPolicy)
    game_model: object | None = None
    game_horizon: int = 2
    escalation_options: int = 3
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    stage_costs: dict = field(default_factory=lambda: dict(DEFAULT_STAGE_COSTS))
    discretize: object = None  # FeatureVector -> StateKey
    availability: object = None  # test hook; defaults to stage_available
    on_operator_reply: object = None  # callback(replied: bool)
    # Arbiter audit trail for the most recent decide() call:
    # (stage, action, reason) per rejected proposal.
    audit: list = field(default_factory=list)


def decide(fv: FeatureVector, c: EnvConstraints, ctx: StageContext,
           profile: FailSafeProfile) -> Decision:
    """Run the cascade to the first accepted proposal.

    Total by construction: every skipped or rejected stage is recorded
    with its reason, and the fail-safe path cannot fail (a vetoed
    fail-safe proposal degrades to a no-op with fail-safe provenance).
    """
    available = ctx.availability or (lambda s, env: stage_available(s, env, ctx.stage_costs))
    key = ctx.discretize(fv)
    remaining = c
    rejected = []
    ctx.audit.clear()

    def review(proposal):
        verdict = arbiter_review(proposal, c, ctx.guard, ctx.thresholds, ctx.catalog)
        if verdict.allowed:
            ctx.online.observe(key, proposal.action, proposal.stage)
            return Decision(proposal.action, proposal.stage, tuple(rejected))
        rejected.append((proposal.stage, verdict.reason))
        ctx.audit.append((proposal.stage, proposal.action, verdict.reason))
        return None

    for stage in (StageId.PATTERN_RECOGNITION, StageId.ONLINE_LEARNING,
                  StageId.HUMAN_ESCALATION, StageId.GAME_SEARCH):
        if not available(stage, remaining):
            rejected.append((stage, UNAVAILABLE))
            continue
        cost = ctx.stage_costs[stage]
        spent_time, spent_power = cost.time, cost.power
        proposal = None
        failure = NO_PROPOSAL
        try:
            if stage is StageId.PATTERN_RECOGNITION:
                proposal = pattern_match(ctx.pattern_table, key)
            elif stage is StageId.ONLINE_LEARNING:
                proposal = ctx.online.propose(key)
            elif stage is StageId.HUMAN_ESCALATION:
                options = ctx.online.rank(key)[:ctx.escalation_options]
                proposal = escalate(ctx.operator, fv, options, remaining.time_budget)
                spent_time = max(spent_time, ctx.operator.latency)
                if ctx.on_operator_reply is not None:
                    ctx.on_operator_reply(proposal is not None)
            else:
                proposal = game_search(ctx.game_model, key, ctx.game_horizon)
        except OperatorTimeout:
            failure = OPERATOR_TIMEOUT
        except ModelIncomplete:
            failure = MODEL_INCOMPLETE
        remaining = replace(
            remaining,
            time_budget=max(remaining.time_budget - spent_time, 0),
            power_budget=max(remaining.power_budget - spent_power, 0))
        if proposal is None:
            rejected.append((stage, failure))
            continue
        decision = review(proposal)
        if decision is not None:
            return decision

    proposal = failsafe(profile, ctx.pattern_table)
    decision = review(proposal)
    if decision is not None:
        return decision
    # Unvetoable floor: doing nothing needs no budget, no emissions.
    ctx.online.observe(key, "noop", StageId.FAIL_SAFE)
    return Decision("noop", StageId.FAIL_SAFE, tuple(rejected))
