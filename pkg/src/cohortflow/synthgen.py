"""Deterministic synthetic interaction streams for the three regimes.

Each regime operationalizes one discourse-formation story at desk scale
(roughly 2,000 users over 21 three-day periods by default):

* ``activist_core`` -- a fixed core authors and retweets each other every
  period; newcomers preferentially retweet core members and often mention a
  second, adjacent core member, closing triangles around persistent hubs.
* ``opportunist`` -- sparse random chatter until ``takeover_period``, after
  which a fresh activist squad arrives every ``takeover_stride`` periods,
  absorbs the newcomers, and bridges older participants.
* ``waves`` -- every period a fresh group converses internally through a
  random pairing, with only a trickle of cross-period interactions.

All randomness comes from a single numpy PCG64 stream seeded from the spec,
so identical specs produce byte-identical datasets on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from datetime import datetime, timedelta, timezone

import numpy as np

from .errors import InvalidSpec
from .ingest import RawRecord

REGIMES = ("activist_core", "opportunist", "waves")

DEFAULT_START = datetime(2011, 9, 17, tzinfo=timezone.utc)

_PLAIN_TEXTS = (
    "we keep marching downtown #{tag}",
    "the square is full again tonight #{tag}",
    "another assembly at the park #{tag}",
    "numbers growing every day #{tag}",
)
_RETWEET_TEXT = "RT @{target}: {body}"
_MENTION_TEXTS = (
    "totally with you @{target} on this #{tag}",
    "well said @{target} #{tag}",
    "reading @{target} and nodding along #{tag}",
)
_VIA_TEXT = "worth passing on #{tag} via @{target}"


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one synthetic regime run."""

    regime: str
    seed: int
    periods: int = 21
    core_size: int = 12
    incomers_start: int = 300
    incomers_decay: float = 0.85
    p_retweet_core: float = 0.6
    takeover_period: int = 8
    takeover_stride: int = 4
    chatter_rate: float = 0.25
    hashtag: str = "99percent"
    width: timedelta = timedelta(days=3)
    start: datetime = DEFAULT_START

    def validate(self) -> None:
        if self.regime not in REGIMES:
            raise InvalidSpec(f"unknown regime {self.regime!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec("seed must be a 64-bit unsigned integer")
        if self.periods < 5:
            raise InvalidSpec("periods must be at least 5")
        if self.core_size < 3:
            raise InvalidSpec("core_size must be at least 3")
        if self.incomers_start < 1:
            raise InvalidSpec("incomers_start must be positive")
        if not 0 < self.incomers_decay <= 1:
            raise InvalidSpec("incomers_decay must be in (0, 1]")
        for name in ("p_retweet_core",):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InvalidSpec(f"{name} must be in [0, 1]")
        if self.chatter_rate < 0:
            raise InvalidSpec("chatter_rate must be non-negative")
        if not 2 <= self.takeover_period <= self.periods:
            raise InvalidSpec("takeover_period must fall inside the run")
        if self.takeover_stride < 1:
            raise InvalidSpec("takeover_stride must be positive")
        if self.width <= timedelta(0):
            raise InvalidSpec("width must be positive")

    def incomer_schedule(self) -> list[int]:
        """Geometric newcomer counts, never below one per period."""
        return [
            max(1, round(self.incomers_start * self.incomers_decay ** (k - 1)))
            for k in range(1, self.periods + 1)
        ]


@dataclass(frozen=True)
class _Post:
    period: int
    author: str
    kind: str  # plain | retweet | mention | via
    target: str | None
    offset: int  # seconds into the period


class _Stream:
    """Accumulates posts and hands out deterministic random draws."""

    def __init__(self, spec: GeneratorSpec):
        self.spec = spec
        self.rng = np.random.Generator(np.random.PCG64(spec.seed))
        self.posts: list[_Post] = []
        self.width_seconds = int(spec.width.total_seconds())

    def pick(self, pool: list[str], exclude: str | None = None) -> str | None:
        if not pool:
            return None
        if exclude is not None and len(pool) == 1 and pool[0] == exclude:
            return None
        while True:
            choice = pool[int(self.rng.integers(0, len(pool)))]
            if choice != exclude:
                return choice

    def post(self, period: int, author: str, kind: str, target: str | None = None):
        offset = int(self.rng.integers(0, self.width_seconds))
        self.posts.append(_Post(period, author, kind, target, offset))

    def chatter(self, period: int, pool: list[str], events: int):
        """Background mentions (occasionally "via") among existing users."""
        for _ in range(events):
            author = self.pick(pool)
            target = self.pick(pool, exclude=author)
            if author is None or target is None:
                continue
            kind = "via" if self.rng.random() < 0.1 else "mention"
            self.post(period, author, kind, target)


def _ring_neighbor(members: list[str], member: str) -> str:
    return members[(members.index(member) + 1) % len(members)]


def _attach_newcomer(
    stream: _Stream, period: int, user: str, hubs: list[str],
    old_pool: list[str], closure_p: float,
):
    """First contact retweets a hub (or an earlier user); a second mention of
    the hub's ring neighbor closes a triangle with probability closure_p."""
    spec = stream.spec
    if stream.rng.random() < spec.p_retweet_core or not old_pool:
        hub = stream.pick(hubs, exclude=user)
        stream.post(period, user, "retweet", hub)
        if hub is not None and stream.rng.random() < closure_p:
            stream.post(period, user, "mention", _ring_neighbor(hubs, hub))
    else:
        target = stream.pick(old_pool, exclude=user)
        if target is None:
            target = stream.pick(hubs, exclude=user)
        stream.post(period, user, "retweet", target)


def _squad_round(stream: _Stream, period: int, squad: list[str]):
    """One period of squad activity: a plain post each, a ring retweet, and
    one random chord mention, keeping the squad interconnected."""
    for member in squad:
        stream.post(period, member, "plain")
        stream.post(period, member, "retweet", _ring_neighbor(squad, member))
        chord = stream.pick(squad, exclude=member)
        if chord is not None and chord != _ring_neighbor(squad, member):
            stream.post(period, member, "mention", chord)


def _generate_activist_core(stream: _Stream) -> None:
    spec = stream.spec
    core = [f"core{i:02d}" for i in range(spec.core_size)]
    schedule = spec.incomer_schedule()
    veterans: list[str] = []  # newcomers from earlier periods
    serial = 0
    for period in range(1, spec.periods + 1):
        _squad_round(stream, period, core)
        # triangle closure tightens over the run: later cohorts arrive into
        # denser neighborhoods
        closure_p = 0.35 + 0.45 * (period - 1) / max(1, spec.periods - 1)
        arrivals = []
        for _ in range(schedule[period - 1]):
            user = f"u{serial:05d}"
            serial += 1
            arrivals.append(user)
            _attach_newcomer(stream, period, user, core, veterans, closure_p)
        pool = core + veterans + arrivals
        stream.chatter(period, pool, round(spec.chatter_rate * len(arrivals)))
        veterans.extend(arrivals)


def _generate_opportunist(stream: _Stream) -> None:
    spec = stream.spec
    schedule = spec.incomer_schedule()
    everyone: list[str] = []
    squads: list[list[str]] = []
    serial = 0
    for period in range(1, spec.periods + 1):
        past_takeover = period >= spec.takeover_period
        if past_takeover and (period - spec.takeover_period) % spec.takeover_stride == 0:
            squad = [
                f"crew{period:02d}_{i:02d}" for i in range(spec.core_size)
            ]
            squads.append(squad)
            everyone.extend(squad)
        arrivals = []
        for _ in range(schedule[period - 1]):
            user = f"u{serial:05d}"
            serial += 1
            arrivals.append(user)
        if past_takeover:
            current = squads[-1]
            _squad_round(stream, period, current)
            # older squads keep bridging, at a lower rate than the current hub
            for squad in squads[:-1]:
                for member in squad:
                    target = stream.pick(everyone, exclude=member)
                    if target is not None:
                        stream.post(period, member, "mention", target)
            for member in current:
                # the takeover move: pull previously disconnected users in
                target = stream.pick(everyone, exclude=member)
                if target is not None:
                    stream.post(period, member, "mention", target)
            for user in arrivals:
                _attach_newcomer(stream, period, user, current, everyone, 0.6)
        else:
            # diffuse chatter: each newcomer mentions someone at random
            pool = everyone + arrivals
            for user in arrivals:
                target = stream.pick(pool, exclude=user)
                if target is None:
                    stream.post(period, user, "plain")
                else:
                    stream.post(period, user, "mention", target)
        everyone.extend(arrivals)
        stream.chatter(period, everyone, round(spec.chatter_rate * len(arrivals)))


def _generate_waves(stream: _Stream) -> None:
    spec = stream.spec
    schedule = spec.incomer_schedule()
    old_users: list[str] = []
    serial = 0
    for period in range(1, spec.periods + 1):
        wave = [f"u{serial + i:05d}" for i in range(schedule[period - 1])]
        serial += len(wave)
        order = [wave[int(i)] for i in stream.rng.permutation(len(wave))]
        for i in range(0, len(order) - 1, 2):
            stream.post(period, order[i], "mention", order[i + 1])
        if len(order) % 2 == 1:
            stream.post(period, order[-1], "plain")
        # a trickle of cross-period pairs; kept well under a tenth of edges
        stream.chatter(period, old_users, round(0.15 * spec.chatter_rate * len(wave)))
        old_users.extend(wave)


_REGIME_BUILDERS = {
    "activist_core": _generate_activist_core,
    "opportunist": _generate_opportunist,
    "waves": _generate_waves,
}


def _render_text(stream: _Stream, post: _Post) -> str:
    tag = stream.spec.hashtag
    variant = int(stream.rng.integers(0, len(_PLAIN_TEXTS)))
    body = _PLAIN_TEXTS[variant].format(tag=tag)
    if post.kind == "plain":
        return body
    if post.kind == "retweet":
        return _RETWEET_TEXT.format(target=post.target, body=body)
    if post.kind == "mention":
        variant = int(stream.rng.integers(0, len(_MENTION_TEXTS)))
        return _MENTION_TEXTS[variant].format(target=post.target, tag=tag)
    return _VIA_TEXT.format(tag=tag, target=post.target)


def generate_with_manifest(spec: GeneratorSpec) -> tuple[list[RawRecord], dict]:
    """Run a regime and return its records plus the generation manifest.

    The manifest's ``interaction_events`` is counted from the generator's
    own event structure, not from re-parsing the text, so it can serve as an
    independent check on the ingest pipeline.
    """
    spec.validate()
    stream = _Stream(spec)
    _REGIME_BUILDERS[spec.regime](stream)

    ordered = sorted(
        stream.posts, key=lambda post: (post.period, post.offset)
    )
    records = []
    for n, post in enumerate(ordered, start=1):
        timestamp = spec.start + (post.period - 1) * spec.width + timedelta(
            seconds=post.offset
        )
        records.append(
            RawRecord(
                id=f"t{n:07d}",
                author=post.author,
                timestamp=timestamp,
                text=_render_text(stream, post),
            )
        )

    users = {p.author for p in stream.posts} | {
        p.target for p in stream.posts if p.target is not None
    }
    manifest = {
        "spec": _spec_dict(spec),
        "records": len(records),
        "interaction_events": sum(1 for p in stream.posts if p.target is not None),
        "unique_users": len(users),
        "rng": "numpy PCG64",
    }
    return records, manifest


def generate(spec: GeneratorSpec) -> list[RawRecord]:
    """Generate the synthetic record stream for a spec (see the manifest
    variant for the event counts)."""
    return generate_with_manifest(spec)[0]


def _spec_dict(spec: GeneratorSpec) -> dict:
    data = asdict(spec)
    data["width_hours"] = spec.width.total_seconds() / 3600
    del data["width"]
    data["start"] = spec.start.strftime("%Y-%m-%dT%H:%M:%SZ")
    return data


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def records_to_jsonl(records: list[RawRecord]) -> str:
    """Canonical line-delimited serialization (the ingest input format)."""
    lines = []
    for record in records:
        lines.append(
            json.dumps(
                {
                    "id": record.id,
                    "user": record.author,
                    "created_at": format_timestamp(record.timestamp),
                    "text": record.text,
                },
                ensure_ascii=False,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n" if lines else ""
