"""End-to-end orchestration: dataset text in, per-frame result objects out.

Both the HTTP service and the CLI go through these functions, so the two
surfaces cannot drift apart.  Everything here is pure: no files, no clocks,
no global state.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import timedelta

from . import classify as classify_mod
from . import ingest, metrics, temporal
from .classify import HypothesisVerdict, Thresholds
from .errors import EmptyDataset
from .ingest import DatasetStats, FramePattern
from .metrics import CohortMetricsMatrix


@dataclass(frozen=True)
class ParseSummary:
    lines: int
    records: int
    errors: list[str]


@dataclass(frozen=True)
class FrameStats:
    frame: str
    stats: DatasetStats


@dataclass(frozen=True)
class FrameAnalysis:
    frame: str
    n_periods: int
    window_starts: list[str]
    tweets_per_period: list[int]
    incomer_curve: list[int]
    clustering: CohortMetricsMatrix
    betweenness: CohortMetricsMatrix
    betweenness_zscores: CohortMetricsMatrix
    giant_component: list[float]
    edge_lists: list[list[tuple[str, str, int]]]  # one per period, sorted


@dataclass(frozen=True)
class FrameVerdict:
    frame: str
    verdict: HypothesisVerdict


def _parse(text: str, fmt: str) -> tuple[list[ingest.RawRecord], ParseSummary]:
    report = ingest.parse_dataset(text, fmt)
    summary = ParseSummary(
        lines=report.lines,
        records=len(report.records),
        errors=[str(e) for e in report.errors],
    )
    return report.records, summary


def run_stats(
    text: str, frames: list[FramePattern], fmt: str = "auto"
) -> tuple[list[FrameStats], ParseSummary]:
    """Frame-filter the dataset and compute the four headline counts."""
    records, summary = _parse(text, fmt)
    out = []
    for frame in frames:
        matching = ingest.filter_frame(records, frame)
        out.append(FrameStats(frame=frame.label, stats=ingest.descriptive_stats(matching)))
    return out, summary


def build_network(
    records: list[ingest.RawRecord],
    frame: FramePattern,
    window_hours: float = 72.0,
    cumulative: bool = False,
) -> tuple[temporal.TemporalNetwork, list[ingest.RawRecord]]:
    """Filter records to the frame and window them into a TemporalNetwork."""
    matching = ingest.filter_frame(records, frame)
    if not matching:
        raise EmptyDataset(f"no records match frame {frame.label!r}")
    interactions = [
        inter for record in matching for inter in ingest.extract_interactions(record)
    ]
    net = temporal.build_temporal_network(
        frame.label, matching, interactions, width=timedelta(hours=window_hours)
    )
    if cumulative:
        net = net.cumulative()
    return net, matching


def analyze_network(
    net: temporal.TemporalNetwork,
    matching: list[ingest.RawRecord],
    include_passive: bool = True,
    n_jobs: int = 1,
) -> FrameAnalysis:
    clustering = metrics.avg_clustering_by_cohort(net, include_passive=include_passive)
    bc = metrics.avg_betweenness_by_cohort(
        net, include_passive=include_passive, n_jobs=n_jobs
    )
    edge_lists = [
        sorted((s, t, w) for (s, t), w in snap.edges.items())
        for snap in net.snapshots
    ]
    return FrameAnalysis(
        frame=net.frame,
        n_periods=net.n_periods,
        window_starts=[w.start.strftime("%Y-%m-%dT%H:%M:%SZ") for w in net.grid.windows()],
        tweets_per_period=temporal.tweets_per_period(matching, net.grid),
        incomer_curve=temporal.incomer_curve(net.cohorts, net.n_periods),
        clustering=clustering,
        betweenness=bc,
        betweenness_zscores=metrics.deviation_grid(bc),
        giant_component=metrics.giant_component_series(net),
        edge_lists=edge_lists,
    )


def run_analyze(
    text: str,
    frames: list[FramePattern],
    fmt: str = "auto",
    window_hours: float = 72.0,
    cumulative: bool = False,
    include_passive: bool = True,
    n_jobs: int = 1,
) -> tuple[list[FrameAnalysis], ParseSummary]:
    records, summary = _parse(text, fmt)
    analyses = []
    for frame in frames:
        net, matching = build_network(records, frame, window_hours, cumulative)
        analyses.append(analyze_network(net, matching, include_passive, n_jobs))
    return analyses, summary


def classify_network(
    net: temporal.TemporalNetwork,
    include_passive: bool = True,
    thresholds: Thresholds | None = None,
    formation_window: tuple[int, int] | None = None,
    n_jobs: int = 1,
) -> HypothesisVerdict:
    clustering = metrics.avg_clustering_by_cohort(net, include_passive=include_passive)
    bc = metrics.avg_betweenness_by_cohort(
        net, include_passive=include_passive, n_jobs=n_jobs
    )
    window = formation_window or classify_mod.formation_window_detect(net)
    features = classify_mod.extract_features(net, clustering, bc, window)
    return classify_mod.classify(features, thresholds, formation_window=window)


def run_classify(
    text: str,
    frames: list[FramePattern],
    fmt: str = "auto",
    window_hours: float = 72.0,
    cumulative: bool = False,
    include_passive: bool = True,
    thresholds: Thresholds | None = None,
    formation_window: tuple[int, int] | None = None,
    n_jobs: int = 1,
) -> tuple[list[FrameVerdict], ParseSummary]:
    records, summary = _parse(text, fmt)
    verdicts = []
    for frame in frames:
        net, _ = build_network(records, frame, window_hours, cumulative)
        verdict = classify_network(
            net, include_passive, thresholds, formation_window, n_jobs
        )
        verdicts.append(FrameVerdict(frame=frame.label, verdict=verdict))
    return verdicts, summary
