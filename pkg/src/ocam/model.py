"""Shared domain types, identity resolution and week arithmetic."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Iterable, Mapping, Optional, Union

log = logging.getLogger(__name__)

DEFAULT_EPOCH = date(2020, 1, 6)
UNAFFILIATED = "unaffiliated"

Instant = Union[datetime, date]


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime.

    Naive values are taken to be UTC already; a trailing ``Z`` is accepted.
    """
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"not a timestamp: {value!r}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    return to_utc(dt)


def parse_date(value: Union[str, date]) -> date:
    if isinstance(value, datetime):
        return to_utc(value).date()
    if isinstance(value, date):
        return value
    return date.fromisoformat(value.strip())


def to_utc(instant: Instant) -> datetime:
    if isinstance(instant, str):
        instant = parse_timestamp(instant)
    if isinstance(instant, datetime):
        if instant.tzinfo is None:
            return instant.replace(tzinfo=timezone.utc)
        return instant.astimezone(timezone.utc)
    return datetime.combine(instant, time(0), tzinfo=timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return to_utc(dt).strftime("%Y-%m-%dT%H:%M:%SZ")


def week_of(timestamp: Instant, epoch: date = DEFAULT_EPOCH) -> int:
    """Return the 1-based index of the 7-day bucket containing ``timestamp``.

    Buckets start on ``epoch`` (a Monday) and are counted sequentially, so
    2021-03-01 falls in week 61 for the default epoch. Timestamps are
    normalised to UTC before bucketing.
    """
    if epoch.weekday() != 0:
        raise ValueError(f"epoch {epoch.isoformat()} is not a Monday")
    day = to_utc(timestamp).date()
    delta = (day - epoch).days
    if delta < 0:
        raise ValueError(
            f"timestamp {day.isoformat()} precedes epoch {epoch.isoformat()}"
        )
    return 1 + delta // 7


def week_start(week: int, epoch: date = DEFAULT_EPOCH) -> datetime:
    """First instant (UTC) of ``week``."""
    if week < 1:
        raise ValueError(f"week index must be >= 1, got {week}")
    return to_utc(epoch + timedelta(days=7 * (week - 1)))


@dataclass(frozen=True)
class Identity:
    canonical_id: str
    raw_names: frozenset = frozenset()
    raw_emails: frozenset = frozenset()

    def __post_init__(self):
        if not self.canonical_id:
            raise ValueError("canonical_id must be non-empty")


class AliasTable:
    """Maps raw e-mails (or names) to canonical identities.

    Keys are matched case-insensitively. Every resolved identity is
    remembered so that raw names/e-mails seen for the same person are merged.
    """

    def __init__(self, aliases: Optional[Mapping[str, str]] = None):
        self._map = {k.strip().lower(): v for k, v in (aliases or {}).items()}
        self._seen: dict[str, Identity] = {}
        self.unknown: set[str] = set()

    def lookup(self, key: str) -> Optional[str]:
        return self._map.get(key.strip().lower())

    def __len__(self):
        return len(self._map)

    def as_dict(self) -> dict[str, str]:
        return dict(sorted(self._map.items()))

    def identities(self) -> list[Identity]:
        return [self._seen[k] for k in sorted(self._seen)]

    def _remember(self, identity: Identity) -> Identity:
        prev = self._seen.get(identity.canonical_id)
        if prev is not None:
            identity = Identity(
                identity.canonical_id,
                prev.raw_names | identity.raw_names,
                prev.raw_emails | identity.raw_emails,
            )
        self._seen[identity.canonical_id] = identity
        return identity


def resolve_identity(
    raw_name: Optional[str],
    raw_email: Optional[str],
    alias_map: Union[AliasTable, Mapping[str, str], None] = None,
    warnings: Optional[list] = None,
) -> Identity:
    """Resolve a raw (name, e-mail) pair to an :class:`Identity`.

    The alias table is consulted by e-mail, then by name. Unknown people
    fall back to their lower-cased e-mail (or name when no e-mail exists)
    and a warning is appended to ``warnings``.
    """
    name = (raw_name or "").strip()
    email = (raw_email or "").strip()
    if not name and not email:
        raise ValueError("identity has neither name nor e-mail")
    table = alias_map if isinstance(alias_map, AliasTable) else AliasTable(alias_map)

    canonical = None
    if email:
        canonical = table.lookup(email)
    if canonical is None and name:
        canonical = table.lookup(name)
    if canonical is None:
        canonical = email.lower() if email else name.lower()
        if canonical not in table.unknown:
            table.unknown.add(canonical)
            msg = f"unknown identity {name!r} <{email}> -> {canonical!r}"
            log.debug(msg)
            if warnings is not None:
                warnings.append(msg)
    ident = Identity(
        canonical,
        frozenset([name]) if name else frozenset(),
        frozenset([email.lower()]) if email else frozenset(),
    )
    return table._remember(ident)


@dataclass(frozen=True)
class Membership:
    canonical_id: str
    team_id: str
    start: date
    end: Optional[date] = None

    def __post_init__(self):
        if self.end is not None and not self.start < self.end:
            raise ValueError(
                f"membership of {self.canonical_id} in {self.team_id}: "
                f"start {self.start} must precede end {self.end}"
            )

    def contains(self, at: datetime) -> bool:
        if at < to_utc(self.start):
            return False
        return self.end is None or at < to_utc(self.end)


def _check_disjoint(intervals, what):
    ordered = sorted(intervals, key=lambda m: m.start)
    for a, b in zip(ordered, ordered[1:]):
        if a.end is None or b.start < a.end:
            raise ValueError(f"overlapping intervals for {what}: {a} / {b}")
    return tuple(ordered)


class AffiliationTimeline:
    """Team membership per person over half-open date intervals."""

    def __init__(self, memberships: Iterable[Membership] = ()):
        by_person: dict[str, list[Membership]] = {}
        for m in memberships:
            by_person.setdefault(m.canonical_id, []).append(m)
        self._by_person = {
            pid: _check_disjoint(ms, pid) for pid, ms in by_person.items()
        }

    @property
    def memberships(self) -> list[Membership]:
        return [m for pid in sorted(self._by_person) for m in self._by_person[pid]]

    def people(self) -> list[str]:
        return sorted(self._by_person)

    def team_of(self, identity: Union[Identity, str], at: Instant) -> str:
        pid = identity.canonical_id if isinstance(identity, Identity) else identity
        at = to_utc(at)
        for m in self._by_person.get(pid, ()):
            if m.contains(at):
                return m.team_id
        return UNAFFILIATED

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "AffiliationTimeline":
        out = []
        for r in records:
            end = r.get("end")
            out.append(
                Membership(
                    str(r["canonical_id"]),
                    str(r["team_id"]),
                    parse_date(r["start"]),
                    parse_date(end) if end else None,
                )
            )
        return cls(out)

    def to_records(self) -> list[dict]:
        return [
            {
                "canonical_id": m.canonical_id,
                "team_id": m.team_id,
                "start": m.start.isoformat(),
                "end": m.end.isoformat() if m.end else None,
            }
            for m in self.memberships
        ]


def team_of(identity: Union[Identity, str], at: Instant, timeline: AffiliationTimeline) -> str:
    """Team of ``identity`` at instant ``at``, or ``"unaffiliated"``."""
    return timeline.team_of(identity, at)


@dataclass(frozen=True)
class Ownership:
    team_id: str
    start: date
    end: Optional[date] = None

    def __post_init__(self):
        if self.end is not None and not self.start < self.end:
            raise ValueError(f"ownership by {self.team_id}: start must precede end")

    def contains(self, at: datetime) -> bool:
        if at < to_utc(self.start):
            return False
        return self.end is None or at < to_utc(self.end)


@dataclass(frozen=True)
class SplitEvent:
    date: date
    description: str = ""


@dataclass(frozen=True)
class ComponentSpec:
    component_id: str
    repo_path: str = ""
    path_globs: tuple = ("**/*.java", "**/*.xml")
    owner_timeline: tuple = ()
    split_events: tuple = ()

    def __post_init__(self):
        if not self.component_id:
            raise ValueError("component_id must be non-empty")
        ordered = tuple(sorted(self.owner_timeline, key=lambda o: o.start))
        for a, b in zip(ordered, ordered[1:]):
            if a.end is None or b.start < a.end:
                raise ValueError(
                    f"{self.component_id}: overlapping owner intervals {a} / {b}"
                )
        object.__setattr__(self, "owner_timeline", ordered)
        object.__setattr__(self, "path_globs", tuple(self.path_globs))
        object.__setattr__(
            self, "split_events", tuple(sorted(self.split_events, key=lambda s: s.date))
        )

    def owner_at(self, at: Instant) -> Optional[str]:
        at = to_utc(at)
        for o in self.owner_timeline:
            if o.contains(at):
                return o.team_id
        return None

    def split_weeks(self, epoch: date = DEFAULT_EPOCH) -> list[int]:
        return sorted({week_of(s.date, epoch) for s in self.split_events})

    @classmethod
    def from_dict(cls, d: Mapping) -> "ComponentSpec":
        owners = [
            Ownership(
                str(o["team_id"]),
                parse_date(o["start"]),
                parse_date(o["end"]) if o.get("end") else None,
            )
            for o in d.get("owner_timeline", [])
        ]
        splits = [
            SplitEvent(parse_date(s["date"]), s.get("description", ""))
            for s in d.get("split_events", [])
        ]
        globs = d.get("path_globs") or ("**/*.java", "**/*.xml")
        return cls(
            component_id=str(d["component_id"]),
            repo_path=str(d.get("repo_path", "")),
            path_globs=tuple(globs),
            owner_timeline=tuple(owners),
            split_events=tuple(splits),
        )

    def to_dict(self) -> dict:
        return {
            "component_id": self.component_id,
            "repo_path": self.repo_path,
            "path_globs": list(self.path_globs),
            "owner_timeline": [
                {
                    "team_id": o.team_id,
                    "start": o.start.isoformat(),
                    "end": o.end.isoformat() if o.end else None,
                }
                for o in self.owner_timeline
            ],
            "split_events": [
                {"date": s.date.isoformat(), "description": s.description}
                for s in self.split_events
            ],
        }


@dataclass(frozen=True)
class CommitRecord:
    component_id: str
    commit_hash: str
    author: str
    timestamp: datetime
    additions: int
    deletions: int
    is_merge: bool = False

    def __post_init__(self):
        if self.additions < 0 or self.deletions < 0:
            raise ValueError(f"commit {self.commit_hash}: negative line counts")

    @property
    def churn(self) -> int:
        return self.additions + self.deletions

    def to_dict(self) -> dict:
        return {
            "component_id": self.component_id,
            "hash": self.commit_hash,
            "author": self.author,
            "timestamp": format_timestamp(self.timestamp),
            "additions": self.additions,
            "deletions": self.deletions,
            "is_merge": self.is_merge,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CommitRecord":
        return cls(
            str(d["component_id"]),
            str(d["hash"]),
            str(d["author"]),
            parse_timestamp(d["timestamp"]),
            int(d["additions"]),
            int(d["deletions"]),
            bool(d.get("is_merge", False)),
        )


@dataclass(frozen=True)
class ActivityRecord:
    """A created pull request or ticket."""

    component_id: str
    item_id: str
    creator: str
    created_at: datetime

    def to_dict(self) -> dict:
        return {
            "component_id": self.component_id,
            "item_id": self.item_id,
            "creator": self.creator,
            "created_at": format_timestamp(self.created_at),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ActivityRecord":
        return cls(
            str(d["component_id"]),
            str(d["item_id"]),
            str(d["creator"]),
            parse_timestamp(d["created_at"]),
        )


PullRequestRecord = ActivityRecord
TicketRecord = ActivityRecord


@dataclass(frozen=True)
class TdIssueRecord:
    component_id: str
    issue_id: str
    remediation_minutes: float
    introduced_at: datetime
    removed_at: Optional[datetime] = None

    def __post_init__(self):
        if not self.remediation_minutes >= 0:
            raise ValueError(f"issue {self.issue_id}: negative remediation time")
        if self.removed_at is not None and not self.removed_at > self.introduced_at:
            raise ValueError(f"issue {self.issue_id}: removed_at must follow introduced_at")

    def to_dict(self) -> dict:
        return {
            "component_id": self.component_id,
            "issue_id": self.issue_id,
            "remediation_minutes": self.remediation_minutes,
            "introduced_at": format_timestamp(self.introduced_at),
            "removed_at": format_timestamp(self.removed_at) if self.removed_at else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TdIssueRecord":
        removed = d.get("removed_at")
        return cls(
            str(d["component_id"]),
            str(d["issue_id"]),
            d["remediation_minutes"],
            parse_timestamp(d["introduced_at"]),
            parse_timestamp(removed) if removed else None,
        )


@dataclass(frozen=True)
class SizeSnapshot:
    component_id: str
    week: int
    loc: int

    def __post_init__(self):
        if self.week < 1:
            raise ValueError(f"week index must be >= 1, got {self.week}")
        if self.loc < 0:
            raise ValueError(f"negative size for {self.component_id} week {self.week}")
