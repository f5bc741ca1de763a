"""Edge gateway: filter, summarize, anchor, then prune.

The gateway turns an epoch of raw readings into a small set of per-metric
statistics, binds them to the private ledger's head and state digest in an
EpochSummary, publishes that summary to the public chain, and only after
the anchor is confirmed resets the private ledger. Losing unpublished data
is unrecoverable, so the order is strict: publish before prune.

verify_pruned_epoch is the consumer-side counterpart: given an archived
ledger and a summary, it re-derives everything and checks the public chain
holds a confirmed anchor committing to exactly these bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

from .canon import digest_json
from .errors import (
    DuplicateEpoch,
    DuplicateRange,
    InvalidArgument,
    InvalidWindow,
    NonEmptyMempool,
    PublishFailed,
    UnknownGateway,
)
from .ledger import Ledger, head, verify_chain
from .private_chain import METRICS, PrivateNode, SensorReading, ledger_readings
from .worldstate import replay, state_digest

REL_TOL = 1e-9
ABS_TOL = 1e-12


@dataclass(frozen=True)
class ValidityRange:
    """Inclusive plausibility bounds for one metric, as decimal strings."""

    metric: str
    min_valid: str
    max_valid: str

    def __post_init__(self):
        if self.metric not in METRICS:
            raise InvalidArgument(f"unknown metric {self.metric!r}")
        if Decimal(self.min_valid) > Decimal(self.max_valid):
            raise InvalidArgument(f"empty validity range for {self.metric}")


@dataclass(frozen=True)
class MetricStats:
    metric: str
    count: int
    mean: str
    std_dev: str
    min: str
    max: str


@dataclass(frozen=True)
class EpochSummary:
    """Per-epoch statistics plus the ledger anchor they were derived from."""

    channel_id: str
    epoch_index: int
    window_start: int
    window_end: int
    stats: tuple[MetricStats, ...]
    excluded_count: int
    ledger_head_hash: bytes
    ledger_height: int
    state_digest: bytes


def stats_to_json_value(stats: MetricStats) -> dict:
    return {
        "count": stats.count,
        "max": stats.max,
        "mean": stats.mean,
        "metric": stats.metric,
        "min": stats.min,
        "std_dev": stats.std_dev,
    }


def stats_from_json_value(value: dict) -> MetricStats:
    return MetricStats(value["metric"], value["count"], value["mean"],
                       value["std_dev"], value["min"], value["max"])


def summary_to_json_value(summary: EpochSummary) -> dict:
    """JSON form of a summary; its canonical bytes are what anchors commit to."""
    return {
        "channel_id": summary.channel_id,
        "epoch_index": summary.epoch_index,
        "excluded_count": summary.excluded_count,
        "ledger_head_hash": summary.ledger_head_hash.hex(),
        "ledger_height": summary.ledger_height,
        "state_digest": summary.state_digest.hex(),
        "stats": [stats_to_json_value(s) for s in summary.stats],
        "window_end": summary.window_end,
        "window_start": summary.window_start,
    }


def summary_from_json_value(value: dict) -> EpochSummary:
    return EpochSummary(
        channel_id=value["channel_id"],
        epoch_index=value["epoch_index"],
        window_start=value["window_start"],
        window_end=value["window_end"],
        stats=tuple(stats_from_json_value(s) for s in value["stats"]),
        excluded_count=value["excluded_count"],
        ledger_head_hash=bytes.fromhex(value["ledger_head_hash"]),
        ledger_height=value["ledger_height"],
        state_digest=bytes.fromhex(value["state_digest"]),
    )


def summary_digest(summary: EpochSummary) -> bytes:
    return digest_json(summary_to_json_value(summary))


def _range_map(ranges: Iterable[ValidityRange]) -> dict[str, tuple[Decimal, Decimal]]:
    out: dict[str, tuple[Decimal, Decimal]] = {}
    for r in ranges:
        if r.metric in out:
            raise DuplicateRange(f"two ranges configured for {r.metric}")
        out[r.metric] = (Decimal(r.min_valid), Decimal(r.max_valid))
    return out


def filter_out_of_scale(readings: Sequence[SensorReading],
                        ranges: Iterable[ValidityRange]) -> tuple[list[SensorReading], list[SensorReading]]:
    """Partition readings into (kept, excluded), preserving order.

    A reading is kept when its metric has no configured range or its value
    lies inside the inclusive bounds; everything else is treated as sensor
    malfunction or tampering and excluded from analysis.
    """
    bounds = _range_map(ranges)
    kept: list[SensorReading] = []
    excluded: list[SensorReading] = []
    for reading in readings:
        limits = bounds.get(reading.metric)
        if limits is None or limits[0] <= reading.decimal() <= limits[1]:
            kept.append(reading)
        else:
            excluded.append(reading)
    return kept, excluded


def summarize(readings: Sequence[SensorReading]) -> list[MetricStats]:
    """Per-metric count, mean, population standard deviation, min, max.

    Values are parsed as exact decimals; mean and deviation are evaluated
    in binary floating point and rendered back as decimal strings. Min and
    max keep the exact input strings. Metrics with no readings are omitted;
    output is sorted by metric name.
    """
    groups: dict[str, list[SensorReading]] = {}
    for reading in readings:
        groups.setdefault(reading.metric, []).append(reading)
    out: list[MetricStats] = []
    for metric in sorted(groups):
        group = groups[metric]
        values = [float(r.decimal()) for r in group]
        n = len(values)
        mean = math.fsum(values) / n
        variance = math.fsum((v - mean) ** 2 for v in values) / n
        std_dev = math.sqrt(variance)
        lo = min(group, key=lambda r: r.decimal())
        hi = max(group, key=lambda r: r.decimal())
        out.append(MetricStats(metric, n, repr(mean), repr(std_dev), lo.value, hi.value))
    return out


def rollover_epoch(node: PrivateNode, ranges: Iterable[ValidityRange],
                   window_start: int, window_end: int, pub,
                   trace: list | None = None) -> tuple[EpochSummary, object, PrivateNode]:
    """Close an epoch: collect, filter, summarize, anchor, then reset.

    `pub` is the gateway's public-chain client (see public_chain.PublicClient).
    On any publication failure the private ledger is untouched and
    PublishFailed is raised; the reset happens strictly after the anchor is
    confirmed. Returns (summary, anchor record, fresh node); the old node
    keeps the archived ledger.
    """
    if node.mempool:
        raise NonEmptyMempool("commit or drop pending transactions before rollover")
    readings = node.readings_in_window(window_start, window_end)
    if node.raw_reading_count() != len(readings):
        raise InvalidWindow("ledger holds readings outside the epoch window")
    kept, excluded = filter_out_of_scale(readings, ranges)
    stats = summarize(kept)
    height, head_hash = head(node.ledger)
    summary = EpochSummary(
        channel_id=node.channel_id,
        epoch_index=pub.next_epoch_index(node.channel_id),
        window_start=window_start,
        window_end=window_end,
        stats=tuple(stats),
        excluded_count=len(excluded),
        ledger_head_hash=head_hash,
        ledger_height=height,
        state_digest=state_digest(node.state),
    )
    try:
        record = pub.submit_anchor(summary)
    except (DuplicateEpoch, UnknownGateway) as exc:
        raise PublishFailed(f"anchor rejected: {exc}") from exc
    if trace is not None:
        trace.append({"event": "anchor_submitted", "channel": node.channel_id,
                      "epoch": summary.epoch_index})
    if not pub.confirm(record):
        raise PublishFailed("anchor was not confirmed; private ledger left intact")
    if trace is not None:
        trace.append({"event": "anchor_confirmed", "channel": node.channel_id,
                      "epoch": summary.epoch_index})
    new_node = node.reset_with_anchor(record.summary_digest)
    if trace is not None:
        trace.append({"event": "ledger_reset", "channel": node.channel_id,
                      "epoch": summary.epoch_index})
    return summary, record, new_node


@dataclass(frozen=True)
class EpochVerification:
    ok: bool
    failures: tuple[str, ...]


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=ABS_TOL)


def _stats_match(expected: Sequence[MetricStats], actual: Sequence[MetricStats]) -> bool:
    if [s.metric for s in expected] != [s.metric for s in actual]:
        return False
    for e, a in zip(expected, actual):
        if e.count != a.count:
            return False
        if Decimal(e.min) != Decimal(a.min) or Decimal(e.max) != Decimal(a.max):
            return False
        if not _close(float(e.mean), float(a.mean)):
            return False
        if not _close(float(e.std_dev), float(a.std_dev)):
            return False
    return True


def verify_pruned_epoch(archived: Ledger, summary: EpochSummary, pub,
                        ranges: Iterable[ValidityRange]) -> EpochVerification:
    """Check that a pruned epoch is still fully accounted for.

    Failure codes:
      chain  - archived ledger does not pass verify_chain
      head   - archived head hash/height differ from the summary's
      state  - replayed state digest differs from the summary's
      stats  - re-running filter+summarize does not reproduce the summary
      anchor - no confirmed public anchor commits to these summary bytes

    `pub` is the PublicChain (or anything with find_anchor(channel, epoch)).
    """
    failures: list[str] = []
    chain_ok = verify_chain(archived).ok
    if not chain_ok:
        failures.append("chain")
    height, head_hash = head(archived)
    if (height, head_hash) != (summary.ledger_height, summary.ledger_head_hash):
        failures.append("head")
    if chain_ok:
        try:
            if state_digest(replay(archived)) != summary.state_digest:
                failures.append("state")
        except Exception:
            failures.append("state")
    try:
        readings = ledger_readings(archived, summary.window_start, summary.window_end)
        kept, excluded = filter_out_of_scale(readings, ranges)
        recomputed = summarize(kept)
        if len(excluded) != summary.excluded_count or not _stats_match(recomputed, summary.stats):
            failures.append("stats")
    except Exception:
        failures.append("stats")
    record = pub.find_anchor(summary.channel_id, summary.epoch_index)
    if record is None or not record.confirmed or record.summary_digest != summary_digest(summary):
        failures.append("anchor")
    return EpochVerification(not failures, tuple(failures))
