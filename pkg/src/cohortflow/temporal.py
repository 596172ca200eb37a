"""Slice interactions into fixed-width windows and build per-window graphs.

Windows are half-open intervals ``[start, start + width)`` anchored at
midnight UTC of the earliest timestamp's day, so period indices line up with
calendar time.  Each window becomes one Snapshot; users are assigned a
cohort equal to the window of their first appearance in the frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .errors import EmptyDataset
from .ingest import Interaction, RawRecord

DEFAULT_WIDTH = timedelta(days=3)


@dataclass(frozen=True)
class WindowIndex:
    """One time window: 1-based period number, start instant, width."""

    index: int
    start: datetime
    width: timedelta


@dataclass(frozen=True)
class WindowGrid:
    """The contiguous window layout covering a dataset."""

    anchor: datetime
    width: timedelta
    count: int

    @classmethod
    def from_timestamps(cls, timestamps, width: timedelta = DEFAULT_WIDTH) -> "WindowGrid":
        """Build the grid spanning all given instants.

        The anchor is midnight UTC of the earliest instant's day; the count
        is the number of windows needed to reach the latest instant.
        """
        if width <= timedelta(0):
            raise ValueError("window width must be positive")
        ts = list(timestamps)
        if not ts:
            raise EmptyDataset("no timestamps to build windows from")
        earliest = min(ts)
        anchor = earliest.astimezone(timezone.utc).replace(
            hour=0, minute=0, second=0, microsecond=0
        )
        count = (max(ts) - anchor) // width + 1
        return cls(anchor=anchor, width=width, count=count)

    def index_of(self, instant: datetime) -> int:
        """Period number of an instant; boundary instants fall in the later window."""
        return (instant - self.anchor) // self.width + 1

    def window(self, index: int) -> WindowIndex:
        return WindowIndex(
            index=index, start=self.anchor + (index - 1) * self.width, width=self.width
        )

    def windows(self) -> list[WindowIndex]:
        return [self.window(i) for i in range(1, self.count + 1)]


@dataclass(frozen=True)
class Snapshot:
    """The interaction graph of a single period.

    Edges are directed and kind-agnostic; the weight of (source, target) is
    the number of interactions between the pair inside the window.
    """

    window: WindowIndex
    nodes: frozenset[str]
    edges: dict[tuple[str, str], int]

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())


@dataclass(frozen=True)
class CohortEntry:
    """Cohort assignment of one user.

    ``cohort`` is the first window the user appears in, whether as author or
    as interaction target.  Users who never author in the dataset are
    passive; they can be excluded from cohort aggregates.
    """

    cohort: int
    first_authored: int | None
    first_targeted: int | None

    @property
    def passive(self) -> bool:
        return self.first_authored is None


@dataclass
class CohortMap:
    entries: dict[str, CohortEntry] = field(default_factory=dict)

    def cohort(self, user: str) -> int:
        return self.entries[user].cohort

    def users(self, include_passive: bool = True):
        if include_passive:
            return set(self.entries)
        return {u for u, e in self.entries.items() if not e.passive}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, user: str) -> bool:
        return user in self.entries


@dataclass(frozen=True)
class TemporalNetwork:
    """Ordered per-window snapshots plus the user-to-cohort map for one frame."""

    frame: str
    grid: WindowGrid
    snapshots: tuple[Snapshot, ...]
    cohorts: CohortMap

    @property
    def n_periods(self) -> int:
        return self.grid.count

    def cumulative(self) -> "TemporalNetwork":
        """Sensitivity variant: snapshot p holds the union of windows 1..p."""
        acc_edges: dict[tuple[str, str], int] = {}
        acc_nodes: set[str] = set()
        snaps = []
        for snap in self.snapshots:
            for pair, weight in snap.edges.items():
                acc_edges[pair] = acc_edges.get(pair, 0) + weight
            acc_nodes |= snap.nodes
            snaps.append(
                Snapshot(
                    window=snap.window,
                    nodes=frozenset(acc_nodes),
                    edges=dict(acc_edges),
                )
            )
        return TemporalNetwork(
            frame=self.frame, grid=self.grid, snapshots=tuple(snaps), cohorts=self.cohorts
        )


def assign_windows(
    interactions: list[Interaction],
    width: timedelta = DEFAULT_WIDTH,
    grid: WindowGrid | None = None,
) -> list[tuple[Interaction, WindowIndex]]:
    """Map each interaction to its window.

    When no grid is given, one is derived from the interactions themselves;
    the pipeline passes the record-derived grid so that windows and cohorts
    share one layout.
    """
    if grid is None:
        if not interactions:
            raise EmptyDataset("cannot derive windows from zero interactions")
        grid = WindowGrid.from_timestamps((i.timestamp for i in interactions), width)
    return [(inter, grid.window(grid.index_of(inter.timestamp))) for inter in interactions]


def build_snapshots(
    windowed: list[tuple[Interaction, WindowIndex]],
    grid: WindowGrid,
) -> list[Snapshot]:
    """Fold windowed interactions into one snapshot per window (1..count).

    Empty windows yield snapshots with zero nodes so period indices stay
    aligned with calendar time.
    """
    edges_by_window: dict[int, dict[tuple[str, str], int]] = {}
    for inter, window in windowed:
        if not 1 <= window.index <= grid.count:
            raise ValueError(
                f"interaction window {window.index} outside grid 1..{grid.count}"
            )
        pair = (inter.source, inter.target)
        bucket = edges_by_window.setdefault(window.index, {})
        bucket[pair] = bucket.get(pair, 0) + 1
    snapshots = []
    for idx in range(1, grid.count + 1):
        edges = edges_by_window.get(idx, {})
        nodes = frozenset(u for pair in edges for u in pair)
        snapshots.append(Snapshot(window=grid.window(idx), nodes=nodes, edges=edges))
    return snapshots


def assign_cohorts(
    records: list[RawRecord],
    windowed: list[tuple[Interaction, WindowIndex]],
    grid: WindowGrid,
) -> CohortMap:
    """Assign every user their cohort: the window of first appearance.

    Authoring a frame-matching record and appearing as an interaction target
    both count as appearing; users who never author are flagged passive.
    """
    first_authored: dict[str, int] = {}
    for record in records:
        idx = grid.index_of(record.timestamp)
        prev = first_authored.get(record.author)
        if prev is None or idx < prev:
            first_authored[record.author] = idx
    first_targeted: dict[str, int] = {}
    for inter, window in windowed:
        prev = first_targeted.get(inter.target)
        if prev is None or window.index < prev:
            first_targeted[inter.target] = window.index

    entries: dict[str, CohortEntry] = {}
    for user in set(first_authored) | set(first_targeted):
        authored = first_authored.get(user)
        targeted = first_targeted.get(user)
        cohort = min(x for x in (authored, targeted) if x is not None)
        entries[user] = CohortEntry(
            cohort=cohort, first_authored=authored, first_targeted=targeted
        )
    return CohortMap(entries=entries)


def incomer_curve(
    cohorts: CohortMap, n_windows: int, include_passive: bool = True
) -> list[int]:
    """Count of first-time participants per window; sums to the user total."""
    curve = [0] * n_windows
    for user, entry in cohorts.entries.items():
        if not include_passive and entry.passive:
            continue
        curve[entry.cohort - 1] += 1
    return curve


def tweets_per_period(records: list[RawRecord], grid: WindowGrid) -> list[int]:
    """Count of records falling in each window (the activity series)."""
    counts = [0] * grid.count
    for record in records:
        counts[grid.index_of(record.timestamp) - 1] += 1
    return counts


def build_temporal_network(
    frame: str,
    records: list[RawRecord],
    interactions: list[Interaction],
    width: timedelta = DEFAULT_WIDTH,
) -> TemporalNetwork:
    """Window a frame-filtered dataset end to end.

    The grid is anchored on the records (authored activity defines the
    calendar), and interactions are placed onto that same grid.
    """
    if not records:
        raise EmptyDataset("no records for frame " + frame)
    grid = WindowGrid.from_timestamps((r.timestamp for r in records), width)
    windowed = assign_windows(interactions, grid=grid)
    snapshots = build_snapshots(windowed, grid)
    cohorts = assign_cohorts(records, windowed, grid)
    return TemporalNetwork(
        frame=frame, grid=grid, snapshots=tuple(snapshots), cohorts=cohorts
    )
