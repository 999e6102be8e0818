"""Scenario runner, trainer, evaluator and replayer.

This is the only layer allowed to see ground truth: it computes the
reward from truth-tagged events and classifies cries for help, while
the agent works purely from percepts. One run is the per-tick loop

    verify ruleset -> step world -> collect -> decide -> apply ->
    comms -> (each window boundary) reward sample + TD update

and everything it does is recorded in a byte-deterministic trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from . import trace as trace_mod
from ._kernels import get_backend
from .actions import ActionCatalog, ActionEffect, build_catalog
from .agent import (BinThresholds, QTable, RewardInputs, RewardParams,
                    StateKey, WorldSummary, accumulate_reward_inputs,
                    discretize, q_update, reward, reward_terms, select_action)
from .cascade import (DEFAULT_STAGE_COSTS, FailSafeProfile, OnlineLearner,
                      OperatorPolicy, PatternTable, QValueModel, StageContext,
                      StageCost, StageId, decide)
from .comms import Message, MessageKind, MessageLog, send
from .config import ScenarioConfig
from .constraints import EmconLevel, EnvConstraints
from .errors import (ConfigInvalid, EmptyCorpus, IllegalTransition,
                     InsufficientResources, NoSuchNode, TraceCorrupt)
from .guardrails import GuardrailSet, RulesetCheck, build_ruleset, verify_ruleset
from .sensing import Baseline, anomaly_score, collect, update_baseline
from .world import (EventKind, ExecutedAction, NodeKind, NodeStatus,
                    STREAM_AGENT, WorldState, apply_action, derive_seed,
                    init_world, step_world)


# ---------------------------------------------------------------------------
# policies

class RandomPolicy:
    """Marker for the seed-paired uniform-random baseline."""


class _BoundRandomPolicy:
    def __init__(self, actions, stream):
        self.actions = tuple(sorted(actions))
        self.stream = stream

    def choose(self, key):
        return self.actions[self.stream.randrange(len(self.actions))]

    def rank(self, key):
        return list(self.actions)


class QPolicy:
    """Epsilon-greedy policy over a Q table; epsilon 0 when evaluating."""

    def __init__(self, qtable: QTable, epsilon: float = 0.0):
        self.qtable = qtable
        self.epsilon = epsilon
        self.stream = None

    def bind(self, stream):
        self.stream = stream

    def choose(self, key):
        return select_action(self.qtable, key, self.epsilon, self.stream)

    def rank(self, key):
        return sorted(self.qtable.actions,
                      key=lambda a: (-self.qtable.get(key, a), a))


# ---------------------------------------------------------------------------
# metrics

@dataclass
class MetricsReport:
    ticks: int
    cumulative_reward: float
    honey_term_total: float
    resource_term_total: float
    cfh_term_total: float
    real_server_compromises: int
    honeypot_engagements: int
    cfh_justified: int
    cfh_cry_wolf: int
    cfh_precision: float | None
    messages_sent: int
    messages_suppressed: int
    stage_histogram: dict = field(default_factory=dict)
    vetoes_by_reason: dict = field(default_factory=dict)
    agent_terminated_at: int | None = None

    def to_dict(self) -> dict:
        return {
            "ticks": self.ticks,
            "cumulative_reward": self.cumulative_reward,
            "honey_term_total": self.honey_term_total,
            "resource_term_total": self.resource_term_total,
            "cfh_term_total": self.cfh_term_total,
            "real_server_compromises": self.real_server_compromises,
            "honeypot_engagements": self.honeypot_engagements,
            "cfh_justified": self.cfh_justified,
            "cfh_cry_wolf": self.cfh_cry_wolf,
            "cfh_precision": self.cfh_precision,
            "messages_sent": self.messages_sent,
            "messages_suppressed": self.messages_suppressed,
            "stage_histogram": dict(sorted(self.stage_histogram.items())),
            "vetoes_by_reason": dict(sorted(self.vetoes_by_reason.items())),
            "agent_terminated_at": self.agent_terminated_at,
        }


class _MetricsAccumulator:
    def __init__(self, ticks):
        self.ticks = ticks
        self.cumulative = 0.0
        self.honey = 0.0
        self.resource = 0.0
        self.cfh = 0.0
        self.compromises = 0
        self.engagements = 0
        self.justified = 0
        self.cry_wolf = 0
        self.sent = 0
        self.suppressed = 0
        self.stages: dict = {}
        self.vetoes: dict = {}
        self.terminated_at = None

    def reward_sample(self, value, terms):
        self.cumulative += value
        self.honey += terms[0]
        self.resource += terms[1]
        self.cfh += terms[2]

    def event(self, kind, truth):
        if kind is EventKind.HONEY_TOUCH or kind == EventKind.HONEY_TOUCH.label:
            self.engagements += 1
        if (kind is EventKind.UNAUTHORIZED_ACCESS
                or kind == EventKind.UNAUTHORIZED_ACCESS.label) and truth:
            self.compromises += 1

    def message(self, sent, classification):
        if sent:
            self.sent += 1
            if classification == "justified":
                self.justified += 1
            elif classification == "cry_wolf":
                self.cry_wolf += 1
        else:
            self.suppressed += 1

    def decision(self, provenance_label):
        self.stages[provenance_label] = self.stages.get(provenance_label, 0) + 1

    def veto(self, reason):
        self.vetoes[reason] = self.vetoes.get(reason, 0) + 1

    def report(self) -> MetricsReport:
        total_cfh = self.justified + self.cry_wolf
        return MetricsReport(
            ticks=self.ticks,
            cumulative_reward=self.cumulative,
            honey_term_total=self.honey,
            resource_term_total=self.resource,
            cfh_term_total=self.cfh,
            real_server_compromises=self.compromises,
            honeypot_engagements=self.engagements,
            cfh_justified=self.justified,
            cfh_cry_wolf=self.cry_wolf,
            cfh_precision=(self.justified / total_cfh) if total_cfh else None,
            messages_sent=self.sent,
            messages_suppressed=self.suppressed,
            stage_histogram=self.stages,
            vetoes_by_reason=self.vetoes,
            agent_terminated_at=self.terminated_at,
        )


# ---------------------------------------------------------------------------
# target resolution (agent view only: Compromised looks like Running)

_SUSPICIOUS_KINDS = (EventKind.IDS_ALERT, EventKind.ANTI_MALWARE_ALERT,
                     EventKind.UNAUTHORIZED_ACCESS,
                     EventKind.FILE_INTEGRITY_VIOLATION)


def _agent_sees_up(status: NodeStatus) -> bool:
    return status in (NodeStatus.RUNNING, NodeStatus.COMPROMISED)


def resolve_target(effect: ActionEffect, world: WorldState, window_events):
    """Bind an effect to a concrete node using only agent-visible state.

    Suspicion ranking counts alert-type events per node in the current
    window; ties and empty rankings fall back to the lowest node id.
    Returns None when no legal candidate exists.
    """
    suspicion: dict = {}
    for ev in window_events:
        if ev.kind in _SUSPICIOUS_KINDS:
            suspicion[ev.node] = suspicion.get(ev.node, 0) + 1

    nodes = world.nodes()

    def most_suspicious(candidates):
        if not candidates:
            return None
        return min(candidates, key=lambda n: (-suspicion.get(n.id, 0), n.id)).id

    if effect is ActionEffect.STOP_HONEYPOT:
        ups = [n for n in nodes if n.kind is NodeKind.HONEYPOT
               and n.status is not NodeStatus.STOPPED]
        return min((n.id for n in ups), default=None)
    if effect is ActionEffect.START_REAL_VM:
        stopped = [n for n in nodes if n.kind is not NodeKind.HONEYPOT
                   and n.status is NodeStatus.STOPPED]
        return min((n.id for n in stopped), default=None)
    if effect is ActionEffect.STOP_REAL_VM:
        ups = [n for n in nodes if n.kind is not NodeKind.HONEYPOT
               and _agent_sees_up(n.status)]
        return most_suspicious(ups)
    if effect in (ActionEffect.QUARANTINE_NODE, ActionEffect.ROTATE_ADDRESS):
        ups = [n for n in nodes if n.kind is not NodeKind.HONEYPOT
               and _agent_sees_up(n.status)]
        return most_suspicious(ups)
    if effect is ActionEffect.QUARANTINE_FILE:
        ups = [n for n in nodes if n.status is not NodeStatus.STOPPED]
        return most_suspicious(ups)
    if effect is ActionEffect.RESTORE_KNOWN_GOOD:
        ups = [n for n in nodes if n.kind is not NodeKind.HONEYPOT
               and n.status is not NodeStatus.STOPPED]
        return most_suspicious(ups)
    if effect is ActionEffect.DEPLOY_DUMMY_FILES:
        ups = [n for n in nodes if _agent_sees_up(n.status)]
        if not ups:
            return None
        return min(ups, key=lambda n: (n.decoy_files, n.id)).id
    return None


_TARGETLESS = (ActionEffect.NOOP, ActionEffect.START_HONEYPOT,
               ActionEffect.RESTRICT_COMMS_INBOUND,
               ActionEffect.RESTRICT_COMMS_OUTBOUND,
               ActionEffect.CRY_FOR_HELP, ActionEffect.SHARE_BLOCKLIST,
               ActionEffect.TERMINATE_SELF)


# ---------------------------------------------------------------------------
# scenario execution

def _emcon_for_tick(schedule, tick: int) -> EmconLevel:
    level = schedule[0].level
    for entry in schedule:
        if entry.tick <= tick:
            level = entry.level
        else:
            break
    return EmconLevel.from_name(level)


def _stage_costs(config: ScenarioConfig) -> dict:
    sc = config.cascade.stage_costs
    costs = dict(DEFAULT_STAGE_COSTS)
    costs[StageId.PATTERN_RECOGNITION] = StageCost(sc.pattern_recognition.time,
                                                   sc.pattern_recognition.power)
    costs[StageId.ONLINE_LEARNING] = StageCost(sc.online_learning.time,
                                               sc.online_learning.power)
    costs[StageId.HUMAN_ESCALATION] = StageCost(sc.human_escalation.time,
                                                sc.human_escalation.power)
    costs[StageId.GAME_SEARCH] = StageCost(sc.game_search.time,
                                           sc.game_search.power)
    return costs


def _thresholds(config: ScenarioConfig) -> dict:
    th = config.cascade.thresholds
    return {
        StageId.PATTERN_RECOGNITION: th.pattern_recognition,
        StageId.ONLINE_LEARNING: th.online_learning,
        StageId.HUMAN_ESCALATION: th.human_escalation,
        StageId.GAME_SEARCH: th.game_search,
        StageId.FAIL_SAFE: th.fail_safe,
    }


def make_catalog(config: ScenarioConfig) -> ActionCatalog:
    real_cost = max(config.world.database.cost, config.world.application.cost,
                    config.world.web.cost)
    return build_catalog(config.world.honeypot.cost, real_cost,
                         config.agent.actions)


def _bind_policy(policy, catalog: ActionCatalog, stream):
    if isinstance(policy, QTable):
        policy = QPolicy(policy, epsilon=0.0)
    if policy is RandomPolicy or isinstance(policy, RandomPolicy) \
            or policy == "random":
        return _BoundRandomPolicy(catalog.selectable_ids, stream), "random"
    if isinstance(policy, QPolicy):
        policy.bind(stream)
        return policy, "q"
    if hasattr(policy, "choose") and hasattr(policy, "rank"):
        if hasattr(policy, "bind"):
            policy.bind(stream)
        return policy, getattr(policy, "name", "custom")
    raise ConfigInvalid(f"unsupported policy object {policy!r}")


_ERROR_LABELS = {
    InsufficientResources: "insufficient_resources",
    NoSuchNode: "no_such_node",
    IllegalTransition: "illegal_transition",
}


def run_scenario(config: ScenarioConfig, seed: int, policy,
                 *, learn: bool = False, backend: str | None = None,
                 with_trace: bool = True):
    """Execute one episode; returns (MetricsReport, trace lines).

    trace lines are [] when with_trace is False (training runs skip
    record serialization for speed). The same (config, seed, policy)
    always yields byte-identical lines.
    """
    world = init_world(config, seed, backend)
    catalog = make_catalog(config)
    window = config.agent.window
    rp = config.agent.reward
    params = RewardParams(rp.a, rp.b, rp.c, rp.denominator_floor)
    bins = BinThresholds(tuple(config.agent.bins.threat),
                         tuple(config.agent.bins.load),
                         tuple(config.agent.bins.honeypots))

    agent_stream = get_backend(backend).Stream(derive_seed(seed, STREAM_AGENT))
    policy_obj, policy_label = _bind_policy(policy, catalog, agent_stream)
    if learn and not isinstance(policy_obj, QPolicy):
        raise ConfigInvalid("learning runs need a QPolicy")

    ruleset = build_ruleset(config.guardrails, config.cascade.thresholds)
    guard = GuardrailSet.seal(ruleset)
    online = OnlineLearner(policy_obj, config.cascade.online_confidence)
    if config.cascade.pattern_table:
        pattern_table = load_pattern_table(config.cascade.pattern_table)
    else:
        pattern_table = PatternTable()
    qtable_for_model = policy_obj.qtable if isinstance(policy_obj, QPolicy) \
        else QTable(catalog.selectable_ids)
    profile = FailSafeProfile.from_name(config.cascade.failsafe_profile)

    current_key_box = [StateKey(0, 0, 0, False)]
    ctx = StageContext(
        catalog=catalog,
        guard=guard,
        online=online,
        pattern_table=pattern_table,
        operator=OperatorPolicy(config.cascade.operator.behavior,
                                config.cascade.operator.latency),
        game_model=QValueModel(qtable_for_model),
        game_horizon=config.cascade.game_horizon,
        escalation_options=config.cascade.escalation_options,
        thresholds=_thresholds(config),
        stage_costs=_stage_costs(config),
        discretize=lambda _fv: current_key_box[0],
    )

    writer = None
    if with_trace:
        writer = trace_mod.TraceWriter({
            "seed": seed,
            "episode_ticks": config.episode_ticks,
            "window": window,
            "policy": policy_label,
            "reward": {"a": params.a, "b": params.b, "c": params.c,
                       "floor": params.denominator_floor},
            "config_digest": config.digest(),
        })

    metrics = _MetricsAccumulator(config.episode_ticks)
    msg_log = MessageLog()
    baseline = Baseline()
    buckets = []  # last `window` ticks of events, one list per tick

    agent_active = True
    last_action: tuple | None = None  # (state, action_id)
    period_delta = 0
    period_available = None
    period_messages = []

    current_tick = [0]

    def record(kind, payload):
        if writer is not None:
            writer.record(kind, current_tick[0], payload)

    def record_event(ev):
        metrics.event(ev.kind, ev.truth_malicious)
        record("event", {"event": ev.to_dict()})

    def operator_replied(replied):
        ev = world.append_event(current_tick[0], EventKind.OPERATOR_REPLY, "operator")
        buckets[-1].append(ev)
        record_event(ev)

    ctx.on_operator_reply = operator_replied

    def send_message(msg, emcon):
        rec = send(msg, emcon, guard)
        if rec.sent and msg.kind is MessageKind.CRY_FOR_HELP:
            window_events = [e for b in buckets for e in b]
            label = "justified" if any(e.truth_malicious for e in window_events) \
                else "cry_wolf"
            rec = replace(rec, classification=label)
        msg_log.append(rec)
        metrics.message(rec.sent, rec.classification)
        if rec.sent:
            period_messages.append(rec)
        record("message", {
            "message_kind": msg.kind.value,
            "status": "sent" if rec.sent else "suppressed",
            "reason": rec.reason,
            "classification": rec.classification,
            "evidence_start": msg.evidence_start,
            "evidence_end": msg.evidence_end,
            "entries": list(msg.entries),
            "action_taken": msg.action_taken,
        })

    record("agent_status", {"status": "active", "reason": "episode_start"})

    for t in range(config.episode_ticks):
        current_tick[0] = t
        emcon = _emcon_for_tick(config.env.emcon_schedule, t)
        env = EnvConstraints(
            connectivity=config.env.connectivity,
            time_budget=config.env.time_budget,
            power_budget=config.env.power_budget,
            safety_margin=config.env.safety_margin,
            emcon_level=emcon,
        )

        if config.guardrails.tamper_tick == t:
            ruleset.budget.max_impact_per_action += 1.0

        if agent_active:
            if verify_ruleset(guard, ruleset.canonical_bytes()) is RulesetCheck.TAMPERED:
                agent_active = False
                metrics.terminated_at = t
                record("agent_status", {"status": "terminated",
                                        "reason": "ruleset_tampered"})

        events = step_world(world)
        buckets.append(list(events))
        if len(buckets) > window:
            buckets.pop(0)
        for ev in events:
            record_event(ev)

        key = None
        if agent_active:
            window_events = [e for b in buckets for e in b]
            fv = collect(window_events, window)
            score = anomaly_score(baseline, fv) if baseline.sample_count >= 2 else 0.0
            baseline = update_baseline(baseline, fv)
            summary = WorldSummary(world.honeypots_active(), world.pool.available)
            key = discretize(fv, summary, bins, score)
            current_key_box[0] = key
            record("percept", {"features": fv._asdict(), "anomaly": score,
                               "state": key.encode()})

            decision = decide(fv, env, ctx, profile)
            metrics.decision(decision.provenance.label)
            record("decision", {
                "action": decision.action,
                "provenance": decision.provenance.label,
                "rejected": [[stage.label, reason]
                             for stage, reason in decision.rejected],
            })
            for stage, action_id, reason in ctx.audit:
                if reason.startswith("guardrail:"):
                    metrics.veto(reason)
                    record("veto", {"action": action_id, "stage": stage.label,
                                    "reason": reason})

            spec = catalog.get(decision.action)
            target = None
            if spec.effect not in _TARGETLESS:
                target = resolve_target(spec.effect, world, window_events)
            available_before = world.pool.available
            applied, error, delta = False, None, 0
            if spec.effect in _TARGETLESS or target is not None:
                try:
                    outcome = apply_action(world, ExecutedAction(decision.action,
                                                                 spec.effect, target))
                    applied, delta = True, outcome.delta_resources
                    if outcome.node is not None:
                        target = outcome.node
                except (InsufficientResources, NoSuchNode, IllegalTransition) as exc:
                    error = _ERROR_LABELS[type(exc)]
            else:
                error = "no_target"
            record("executed_action", {
                "action": decision.action,
                "effect": spec.effect.value,
                "target": target,
                "applied": applied,
                "error": error,
                "delta_resources": delta,
                "available_before": available_before,
                "pool_used": world.pool.used,
                "pool_available": world.pool.available,
            })
            last_action = (key, decision.action)
            period_delta = delta
            period_available = available_before

            if applied:
                if spec.effect is ActionEffect.CRY_FOR_HELP:
                    send_message(Message(MessageKind.CRY_FOR_HELP, tick=t,
                                         evidence_start=max(0, t - window + 1),
                                         evidence_end=t), emcon)
                elif spec.effect is ActionEffect.SHARE_BLOCKLIST:
                    blocked = tuple(sorted(
                        n.address for n in world.nodes()
                        if n.status is NodeStatus.QUARANTINED))
                    send_message(Message(MessageKind.SHARE_BLOCKLIST, tick=t,
                                         entries=blocked), emcon)
                elif spec.effect is ActionEffect.TERMINATE_SELF:
                    agent_active = False
                    metrics.terminated_at = t
                    record("agent_status", {"status": "terminated",
                                            "reason": "self_terminated"})
                elif config.comms.alert_after_actions \
                        and spec.effect is not ActionEffect.NOOP:
                    send_message(Message(MessageKind.ALERT, tick=t,
                                         action_taken=decision.action), emcon)

            if agent_active and config.comms.heartbeat_every \
                    and t % config.comms.heartbeat_every == 0:
                send_message(Message(MessageKind.HEARTBEAT, tick=t), emcon)

        if (t + 1) % window == 0:
            window_events = [e for b in buckets for e in b]
            available = period_available if period_available is not None \
                else world.pool.available
            inputs = accumulate_reward_inputs(
                window_events + period_messages, available, period_delta,
                window_ticks=window)
            value = reward(params, inputs)
            terms = reward_terms(params, inputs)
            credited = last_action[1] if last_action is not None else None
            metrics.reward_sample(value, terms)
            record("reward_sample", {
                "value": value,
                "terms": {"honey": terms[0], "resource": terms[1],
                          "cfh": terms[2]},
                "inputs": {
                    "honey_events": inputs.honey_events,
                    "security_events": inputs.security_events,
                    "delta_resources": inputs.delta_resources,
                    "total_resources": inputs.total_resources,
                    "justified_cfh": inputs.justified_cfh,
                    "cw": inputs.cw,
                },
                "credited_action": credited,
            })
            if learn and agent_active and last_action is not None and key is not None:
                q_update(policy_obj.qtable, last_action[0], last_action[1],
                         value, key)
            period_messages = []
            period_delta = 0
            period_available = None
            last_action = None

    lines = writer.finish() if writer is not None else []
    return metrics.report(), lines


# ---------------------------------------------------------------------------
# training / evaluation

@dataclass
class TrainResult:
    qtable: QTable
    reward_curve: list


def epsilon_for_episode(episode: int, episodes: int, start: float, end: float) -> float:
    """Linear anneal; a single-episode schedule uses the end value."""
    if episodes <= 1:
        return end
    return start + (end - start) * episode / (episodes - 1)


def train_agent(config: ScenarioConfig, episodes: int, seeds=None,
                backend: str | None = None) -> TrainResult:
    """Run learning episodes and return the table plus reward curve."""
    if episodes < 1:
        raise ConfigInvalid("episodes must be >= 1")
    catalog = make_catalog(config)
    lc = config.agent.learning
    qtable = QTable(catalog.selectable_ids, alpha=lc.alpha, gamma=lc.gamma)
    curve = []
    for ep in range(episodes):
        if seeds:
            seed = seeds[ep % len(seeds)]
        else:
            seed = derive_seed(config.seed, 1000 + ep)
        eps = epsilon_for_episode(ep, episodes, lc.epsilon_start, lc.epsilon_end)
        policy = QPolicy(qtable, epsilon=eps)
        report, _ = run_scenario(config, seed, policy, learn=True,
                                 backend=backend, with_trace=False)
        curve.append(report.cumulative_reward)
    return TrainResult(qtable, curve)


def evaluate(config: ScenarioConfig, policy_spec, seeds,
             backend: str | None = None, with_trace: bool = False):
    """Greedy evaluation over a seed list; reports are seed-ordered."""
    reports = []
    for seed in seeds:
        if isinstance(policy_spec, QTable):
            policy = QPolicy(policy_spec, epsilon=0.0)
        else:
            policy = policy_spec
        report, lines = run_scenario(config, seed, policy, backend=backend,
                                     with_trace=with_trace)
        reports.append((seed, report, lines))
    return reports


# ---------------------------------------------------------------------------
# offline pattern training

def offline_train(corpus, min_support: int = 5) -> PatternTable:
    """Condense (state, action, success) triples into a pattern table.

    States seen fewer than min_support times are dropped; each kept
    state maps to the action with the best empirical success rate
    (ties: more samples, then lowest id), at that rate as confidence.
    """
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("no experience triples to train on")
    per_state: dict = {}
    for state, action, success in corpus:
        stats = per_state.setdefault(state, {})
        wins, total = stats.get(action, (0, 0))
        stats[action] = (wins + (1 if success else 0), total + 1)
    table = PatternTable()
    for state, stats in per_state.items():
        seen = sum(total for _, total in stats.values())
        if seen < min_support:
            continue
        best = min(stats.items(),
                   key=lambda kv: (-(kv[1][0] / kv[1][1]), -kv[1][1], kv[0]))
        action, (wins, total) = best
        table.entries[state] = (action, wins / total)
    return table


def experience_from_trace(lines, window: int | None = None):
    """Extract (StateKey, action, success) triples from a trace.

    A decision is marked successful when the reward sample closing its
    accounting period is positive.
    """
    header, records = trace_mod.parse(lines)
    window = window or header.get("window", 20)
    decisions = []
    state_by_tick = {}
    triples = []
    for rec in records:
        if rec["kind"] == "percept":
            state_by_tick[rec["tick"]] = StateKey.decode(rec["state"])
        elif rec["kind"] == "decision":
            state = state_by_tick.get(rec["tick"])
            if state is not None:
                decisions.append((rec["tick"], state, rec["action"]))
        elif rec["kind"] == "reward_sample":
            success = rec["value"] > 0
            tick = rec["tick"]
            for dt, state, action in decisions:
                if tick - window < dt <= tick:
                    triples.append((state, action, success))
            decisions = [d for d in decisions if d[0] > tick]
    return triples


# ---------------------------------------------------------------------------
# replay

def replay(lines) -> MetricsReport:
    """Recompute the metrics purely from trace records.

    Cross-checks every reward sample against a recount of its period's
    events and messages and the stated reward parameters; mismatches
    raise TraceCorrupt.
    """
    header, records = trace_mod.parse(lines)
    rw = header.get("reward")
    if not rw:
        raise TraceCorrupt("header lacks reward parameters")
    params = RewardParams(rw["a"], rw["b"], rw["c"], rw["floor"])
    window = header.get("window")
    ticks = header.get("episode_ticks")
    if not isinstance(window, int) or not isinstance(ticks, int):
        raise TraceCorrupt("header lacks window/episode_ticks")

    metrics = _MetricsAccumulator(ticks)
    period_events = []
    period_cfh = {"justified": 0, "cry_wolf": 0}
    period_execs = []

    for rec in records:
        kind = rec["kind"]
        if kind == "event":
            ev = rec["event"]
            metrics.event(ev["kind"], ev["truth_malicious"])
            period_events.append(ev)
        elif kind == "message":
            sent = rec["status"] == "sent"
            metrics.message(sent, rec.get("classification"))
            if sent and rec["message_kind"] == "cry_for_help":
                label = rec.get("classification")
                if label not in period_cfh:
                    raise TraceCorrupt(
                        f"sent cry_for_help lacks classification at seq {rec['seq']}")
                period_cfh[label] += 1
        elif kind == "decision":
            metrics.decision(rec["provenance"])
        elif kind == "veto":
            metrics.veto(rec["reason"])
        elif kind == "executed_action":
            period_execs.append(rec)
        elif kind == "agent_status":
            if rec["status"] == "terminated":
                metrics.terminated_at = rec["tick"]
        elif kind == "reward_sample":
            inputs = rec["inputs"]
            honey = sum(1 for ev in period_events
                        if ev["kind"] in ("honey_touch", "dummy_file_access",
                                          "dummy_process_alert"))
            security = sum(1 for ev in period_events
                           if ev["kind"] == "ids_alert" and ev["truth_malicious"])
            checks = [
                ("honey_events", honey),
                ("security_events", security),
                ("justified_cfh", period_cfh["justified"]),
                ("cw", period_cfh["cry_wolf"]),
            ]
            for name, expected in checks:
                if inputs[name] != expected:
                    raise TraceCorrupt(
                        f"reward sample at tick {rec['tick']}: {name}="
                        f"{inputs[name]} but records imply {expected}")
            if period_execs:
                last = period_execs[-1]
                delta = last["delta_resources"] if last["applied"] else 0
                if inputs["delta_resources"] != delta:
                    raise TraceCorrupt(
                        f"reward sample at tick {rec['tick']}: delta mismatch")
                if inputs["total_resources"] != max(last["available_before"], 1):
                    raise TraceCorrupt(
                        f"reward sample at tick {rec['tick']}: total mismatch")
            value = reward(params, RewardInputs(**inputs))
            if abs(value - rec["value"]) > 1e-12:
                raise TraceCorrupt(
                    f"reward sample at tick {rec['tick']}: value {rec['value']} "
                    f"!= recomputed {value}")
            metrics.reward_sample(value, reward_terms(params, RewardInputs(**inputs)))
            period_events = []
            period_cfh = {"justified": 0, "cry_wolf": 0}
            period_execs = []

    return metrics.report()


# ---------------------------------------------------------------------------
# artifact io

def save_qtable(qtable: QTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(qtable.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_qtable(path) -> QTable:
    with open(path, "r", encoding="utf-8") as fh:
        return QTable.from_dict(json.load(fh))


def save_pattern_table(table: PatternTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(table.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_pattern_table(path) -> PatternTable:
    with open(path, "r", encoding="utf-8") as fh:
        return PatternTable.from_dict(json.load(fh))
