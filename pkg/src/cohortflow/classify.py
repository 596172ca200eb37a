"""Map cohort clustering/betweenness patterns to a discourse-formation verdict.

Three regimes are scored: a persistent activist core (H0), an opportunistic
late takeover (H1), and rotating participant waves (H2).  Scores are smooth
ramps rather than hard booleans, and a near-tie yields the first-class label
"inconclusive" instead of a forced winner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from statistics import median

from .errors import InsufficientData
from .metrics import CohortMetricsMatrix, SimpleGraph
from .temporal import TemporalNetwork, incomer_curve

H0 = "H0"
H1 = "H1"
H2 = "H2"
INCONCLUSIVE = "inconclusive"

TAKEOVER_RECENCY = 3  # a "new" max cohort arrived within this many periods


@dataclass(frozen=True)
class Thresholds:
    """Decision thresholds; qualitative High/Low rows made operational.

    Every verdict reports the thresholds it was computed with.
    """

    clustering_high: float = 2.0  # x the density-matched random baseline
    dominance: float = 0.5  # fraction of periods cohort 1 tops the column
    takeover_events: float = 2.0  # max-cohort handovers to a recent cohort
    homogeneity: float = 0.5  # column coefficient of variation

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class EvidenceFeatures:
    """The four summary features the verdict is based on."""

    clustering_level: float
    first_cohort_dominance: float
    takeover_events: int
    bc_homogeneity: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class HypothesisVerdict:
    scores: dict[str, float]
    label: str
    features: EvidenceFeatures
    thresholds: Thresholds
    formation_window: tuple[int, int]


def _column_cells(m: CohortMetricsMatrix, period: int) -> list[tuple[int, float]]:
    """(cohort, value) pairs of a column's defined cells, cohort-ascending."""
    out = []
    for cohort in range(1, m.n_cohorts + 1):
        value = m.cell(cohort, period)
        if value is not None:
            out.append((cohort, value))
    return out


def _column_argmax(cells: list[tuple[int, float]]) -> int:
    """Cohort holding the column maximum; ties go to the earliest cohort."""
    best_cohort, best_value = cells[0]
    for cohort, value in cells[1:]:
        if value > best_value:
            best_cohort, best_value = cohort, value
    return best_cohort


def extract_features(
    net: TemporalNetwork,
    clustering: CohortMetricsMatrix,
    bc: CohortMetricsMatrix,
    formation_window: tuple[int, int],
) -> EvidenceFeatures:
    """Summarize the matrices over the formation window.

    clustering_level: median over periods of (mean cohort clustering) /
    (random baseline), where the baseline is the period projection's edge
    density 2m / n(n-1).

    first_cohort_dominance: fraction of data-bearing periods in which
    cohort 1 holds the column maximum of betweenness.  Raw-value argmax is
    used; it is rank-identical to the z-score argmax within a column.

    takeover_events: count of consecutive data-bearing period pairs whose
    column-max cohort changed AND whose new max cohort arrived within the
    last three periods.

    bc_homogeneity: median over periods of the column coefficient of
    variation (population std / mean; 0 for all-zero columns).
    """
    first, last = formation_window
    if first > last:
        raise InsufficientData("empty formation window")
    if net.n_periods < 3:
        raise InsufficientData(f"{net.n_periods} periods; need at least 3")
    cohorts_present = {e.cohort for e in net.cohorts.entries.values()}
    if len(cohorts_present) < 2:
        raise InsufficientData("fewer than 2 cohorts")

    periods = range(first, last + 1)

    ratios = []
    for p in periods:
        col_mean = clustering.column_mean(p)
        if col_mean is None:
            continue
        density = SimpleGraph.from_snapshot(net.snapshots[p - 1]).density
        if density > 0:
            ratios.append(col_mean / density)
    clustering_level = median(ratios) if ratios else 0.0

    argmax_by_period: dict[int, int] = {}
    max_by_period: dict[int, float] = {}
    cohort1_by_period: dict[int, float] = {}
    cvs = []
    for p in periods:
        cells = _column_cells(bc, p)
        if not cells:
            continue
        argmax_by_period[p] = _column_argmax(cells)
        max_by_period[p] = max(v for _, v in cells)
        for cohort, value in cells:
            if cohort == 1:
                cohort1_by_period[p] = value
        values = [v for _, v in cells]
        mean = sum(values) / len(values)
        if mean == 0:
            cvs.append(0.0)
        else:
            std = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
            cvs.append(std / mean)
    bc_homogeneity = median(cvs) if cvs else 0.0

    data_periods = sorted(argmax_by_period)
    dominant = sum(
        1
        for p in data_periods
        if p in cohort1_by_period and cohort1_by_period[p] == max_by_period[p]
    )
    first_cohort_dominance = dominant / len(data_periods) if data_periods else 0.0

    takeover_events = 0
    for p in data_periods:
        if p - 1 not in argmax_by_period:
            continue
        new_max = argmax_by_period[p]
        if new_max != argmax_by_period[p - 1] and p - new_max < TAKEOVER_RECENCY:
            takeover_events += 1

    return EvidenceFeatures(
        clustering_level=clustering_level,
        first_cohort_dominance=first_cohort_dominance,
        takeover_events=takeover_events,
        bc_homogeneity=bc_homogeneity,
    )


def _ramp_up(x: float, threshold: float) -> float:
    """0 at x=0, 0.5 at the threshold, 1 at twice the threshold."""
    if threshold <= 0:
        return 1.0 if x > 0 else 0.0
    return min(max(x / (2.0 * threshold), 0.0), 1.0)


def classify(
    features: EvidenceFeatures,
    thresholds: Thresholds | None = None,
    formation_window: tuple[int, int] = (0, 0),
) -> HypothesisVerdict:
    """Score the three regimes and pick a label.

    H0 wants high clustering plus first-cohort dominance; H1 wants high
    clustering, repeated takeovers, and *no* first-cohort dominance; H2
    wants low clustering and homogeneous betweenness.  A top-two gap under
    0.1 is reported as inconclusive.
    """
    t = thresholds or Thresholds()
    up_clust = _ramp_up(features.clustering_level, t.clustering_high)
    up_dom = _ramp_up(features.first_cohort_dominance, t.dominance)
    up_take = _ramp_up(features.takeover_events, t.takeover_events)
    up_hom = _ramp_up(features.bc_homogeneity, t.homogeneity)

    scores = {
        H0: up_clust * up_dom,
        H1: up_clust * up_take * (1.0 - up_dom),
        H2: (1.0 - up_clust) * (1.0 - up_hom),
    }
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    label = ranked[0][0]
    if ranked[0][1] - ranked[1][1] < 0.1:
        label = INCONCLUSIVE
    return HypothesisVerdict(
        scores=scores,
        label=label,
        features=features,
        thresholds=t,
        formation_window=formation_window,
    )


def formation_window_detect(net: TemporalNetwork) -> tuple[int, int]:
    """Find the discourse-formation span of periods.

    Runs from period 1 through the first period whose incomer count drops
    below 10% of the running per-period average of the cumulative user
    total; never shorter than 3 periods, and the full range when the
    cutoff never fires.
    """
    n = net.n_periods
    if n < 3:
        raise InsufficientData(f"{n} periods; need at least 3")
    curve = incomer_curve(net.cohorts, n)
    if sum(curve) == 0:
        raise InsufficientData("no users in the network")
    end = n
    cumulative = 0
    for p in range(1, n + 1):
        cumulative += curve[p - 1]
        if curve[p - 1] < 0.1 * (cumulative / p):
            end = p
            break
    return (1, min(max(end, 3), n))
