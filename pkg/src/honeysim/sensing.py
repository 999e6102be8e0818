"""Percept construction: event categorization, the feature vector,
and a z-score anomaly detector over running baseline moments.

Nothing in this module reads truth_malicious; the agent's view of the
world is built exclusively from observable event fields.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

from . import _kernels
from .errors import InsufficientBaseline
from .world import EventKind

VARIANCE_FLOOR = 1e-6


class DataSourceCategory(Enum):
    NETWORK_TRAFFIC = "network_traffic"
    EVENT_LOGS = "event_logs"
    HARDWARE_SENSOR = "hardware_sensor"
    OS_SENSOR = "os_sensor"
    HIGH_LEVEL_INPUT = "high_level_input"


# Total mapping over event kinds. NETWORK_TRAFFIC is reserved for
# packet-level sources, which the desk-scale simulation does not emit.
_CATEGORY_BY_KIND = {
    EventKind.IDS_ALERT: DataSourceCategory.EVENT_LOGS,
    EventKind.ANTI_MALWARE_ALERT: DataSourceCategory.EVENT_LOGS,
    EventKind.UNAUTHORIZED_ACCESS: DataSourceCategory.EVENT_LOGS,
    EventKind.HONEY_TOUCH: DataSourceCategory.OS_SENSOR,
    EventKind.DUMMY_FILE_ACCESS: DataSourceCategory.OS_SENSOR,
    EventKind.DUMMY_PROCESS_ALERT: DataSourceCategory.OS_SENSOR,
    EventKind.FILE_INTEGRITY_VIOLATION: DataSourceCategory.EVENT_LOGS,
    EventKind.LOAD_SAMPLE: DataSourceCategory.HARDWARE_SENSOR,
    EventKind.LOG_LINE: DataSourceCategory.EVENT_LOGS,
    EventKind.OPERATOR_REPLY: DataSourceCategory.HIGH_LEVEL_INPUT,
}


def categorize_event(event) -> DataSourceCategory:
    """Total, pure mapping from an event to its data-source category."""
    return _CATEGORY_BY_KIND[event.kind]


class FeatureVector(NamedTuple):
    ids_alert_count: int = 0
    ids_severity_sum: int = 0
    antimalware_alerts: int = 0
    unauthorized_accesses: int = 0
    honey_touches: int = 0
    dummy_process_alerts: int = 0
    integrity_violations: int = 0
    system_load: float = 0.0
    window_ticks: int = 1

    def as_moments_array(self) -> tuple:
        """The numeric features tracked by the baseline (window_ticks
        is configuration, not signal)."""
        return self[:8]


N_FEATURES = 8


def collect(events, window: int) -> FeatureVector:
    """Tally a window of events into the agent's percept.

    honey_touches counts honeypot touches plus decoy-file accesses;
    system_load is the mean of the load samples seen (0 if none).
    """
    (ids_count, sev_sum, antimalware, unauthorized, honey, dummy_proc,
     integrity, load_sum, load_count) = _kernels.tally(events)
    load = load_sum / load_count if load_count else 0.0
    return FeatureVector(ids_count, sev_sum, antimalware, unauthorized,
                         honey, dummy_proc, integrity, load, window)


class Baseline(NamedTuple):
    """Running mean / M2 aggregates per feature (Welford update)."""

    means: tuple = (0.0,) * N_FEATURES
    m2: tuple = (0.0,) * N_FEATURES
    sample_count: int = 0

    def variances(self) -> tuple:
        if self.sample_count == 0:
            return (0.0,) * N_FEATURES
        return tuple(v / self.sample_count for v in self.m2)


def update_baseline(baseline: Baseline, fv: FeatureVector) -> Baseline:
    """Numerically stable single-pass moment update."""
    n = baseline.sample_count + 1
    xs = fv.as_moments_array()
    means = []
    m2 = []
    for mean, m, x in zip(baseline.means, baseline.m2, xs):
        delta = x - mean
        mean = mean + delta / n
        m2.append(m + delta * (x - mean))
        means.append(mean)
    return Baseline(tuple(means), tuple(m2), n)


def anomaly_score(baseline: Baseline, fv: FeatureVector) -> float:
    """Max per-feature |z| with a variance floor; 0 when fv sits on
    the baseline mean."""
    if baseline.sample_count < 2:
        raise InsufficientBaseline(
            f"need at least 2 baseline samples, have {baseline.sample_count}")
    score = 0.0
    variances = baseline.variances()
    for x, mean, var in zip(fv.as_moments_array(), baseline.means, variances):
        z = abs(x - mean) / math.sqrt(var + VARIANCE_FLOOR)
        if z > score:
            score = z
    return score
