"""Line-delimited run traces with byte-exact replay semantics.

One JSON object per line, keys sorted, compact separators: two runs
with the same (config, seed, policy) must produce identical bytes.
A header line pins the schema and the reward parameters; a footer
line carries the record count so truncation is detectable.
"""

from __future__ import annotations

import json

from .errors import TraceCorrupt

FORMAT = "honeysim-trace"
FORMAT_END = "honeysim-trace-end"
VERSION = 1

RECORD_KINDS = frozenset({
    "event", "percept", "decision", "executed_action", "veto",
    "message", "reward_sample", "agent_status",
})


def dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class TraceWriter:
    """Accumulates one run's records; emits header/records/footer."""

    def __init__(self, header_fields: dict):
        header = {"format": FORMAT, "version": VERSION}
        header.update(header_fields)
        self.lines = [dumps(header)]
        self.seq = 0

    def record(self, kind: str, tick: int, payload: dict) -> None:
        entry = {"kind": kind, "seq": self.seq, "tick": tick}
        entry.update(payload)
        self.lines.append(dumps(entry))
        self.seq += 1

    def finish(self) -> list:
        self.lines.append(dumps({"format": FORMAT_END, "records": self.seq}))
        return self.lines


def write_file(path, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def read_file(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def parse(lines) -> tuple:
    """Validate framing, schema and ordering; returns (header, records).

    Raises TraceCorrupt on any violation: bad JSON, wrong header or
    footer, unknown record kind, non-consecutive sequence numbers,
    non-monotone ticks, or a record-count mismatch (truncation).
    """
    if not lines:
        raise TraceCorrupt("empty trace")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceCorrupt(f"header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise TraceCorrupt("missing or wrong trace header")
    if header.get("version") != VERSION:
        raise TraceCorrupt(f"unsupported trace version {header.get('version')!r}")
    if len(lines) < 2:
        raise TraceCorrupt("trace has no footer")

    records = []
    last_tick = -1
    for n, line in enumerate(lines[1:-1]):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceCorrupt(f"line {n + 2} is not valid JSON: {exc}") from exc
        kind = rec.get("kind")
        if kind not in RECORD_KINDS:
            raise TraceCorrupt(f"line {n + 2}: unknown record kind {kind!r}")
        if rec.get("seq") != n:
            raise TraceCorrupt(
                f"line {n + 2}: sequence number {rec.get('seq')!r}, expected {n}")
        tick = rec.get("tick")
        if not isinstance(tick, int) or tick < last_tick:
            raise TraceCorrupt(f"line {n + 2}: tick {tick!r} breaks ordering")
        last_tick = tick
        records.append(rec)

    try:
        footer = json.loads(lines[-1])
    except json.JSONDecodeError as exc:
        raise TraceCorrupt(f"footer is not valid JSON: {exc}") from exc
    if not isinstance(footer, dict) or footer.get("format") != FORMAT_END:
        raise TraceCorrupt("missing trace footer (truncated file?)")
    if footer.get("records") != len(records):
        raise TraceCorrupt(
            f"footer claims {footer.get('records')!r} records, found {len(records)}")
    return header, records
