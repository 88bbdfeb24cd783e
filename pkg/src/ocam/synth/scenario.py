"""Synthetic input filesets with a planted degree/TDD coupling."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Optional, Union

from ..io import atomic_write
from ..model import DEFAULT_EPOCH, format_timestamp, parse_date, week_start
from .rng import SplitMix64

SECONDS_PER_WEEK = 7 * 24 * 3600


@dataclass(frozen=True)
class Scenario:
    seed: int = 1
    weeks: int = 100
    teams: tuple = ("blue", "brown", "gray")
    split_week: Optional[int] = None
    coupling_before: float = 0.8
    coupling_after: float = -0.8
    noise_scale: float = 0.05
    event_rates: dict = field(default_factory=lambda: {"commits": 6.0, "prs": 2.0, "tickets": 2.0})
    component_id: str = "C1"
    members_per_team: int = 4
    outsiders: int = 2
    share_range: tuple = (0.1, 0.9)
    base_tdd: float = 0.2
    tdd_amplitude: float = 0.5
    base_loc: int = 20000
    loc_growth: int = 15
    max_issue_minutes: int = 240
    merge_rate: float = 0.05
    epoch: str = DEFAULT_EPOCH.isoformat()

    def __post_init__(self):
        if self.weeks < 1:
            raise ValueError("weeks must be >= 1")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")
        if any(v < 0 for v in self.event_rates.values()):
            raise ValueError("event rates must be non-negative")
        if not self.teams:
            raise ValueError("at least one team is required")
        if self.split_week is not None and not 1 < self.split_week <= self.weeks:
            raise ValueError("split_week must fall inside (1, weeks]")
        lo, hi = self.share_range
        if not 0 <= lo <= hi <= 1:
            raise ValueError("share_range must satisfy 0 <= lo <= hi <= 1")
        object.__setattr__(self, "teams", tuple(self.teams))
        object.__setattr__(self, "share_range", tuple(self.share_range))

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        d = dict(d)
        if "event_rates" in d:
            d["event_rates"] = {**cls().event_rates, **d["event_rates"]}
        return cls(**d)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["teams"] = list(self.teams)
        d["share_range"] = list(self.share_range)
        return d

    def owner(self, week: int) -> str:
        if self.split_week is not None and week >= self.split_week and len(self.teams) > 1:
            return self.teams[1]
        return self.teams[0]

    def coupling(self, week: int) -> float:
        if self.split_week is not None and week >= self.split_week:
            return self.coupling_after
        return self.coupling_before


def _jsonl(rows) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)


def _people(s: Scenario):
    """Members per team and the membership intervals of the fileset."""
    epoch = parse_date(s.epoch)
    split_date = None if s.split_week is None else epoch + timedelta(days=7 * (s.split_week - 1))
    members = {t: [f"{t}-dev{i}" for i in range(s.members_per_team)] for t in s.teams}
    memberships = []
    for t in s.teams:
        for i, pid in enumerate(members[t]):
            moves = (split_date is not None and len(s.teams) > 1 and t == s.teams[0]
                     and i >= s.members_per_team // 2)
            if moves:
                memberships.append({"canonical_id": pid, "team_id": t,
                                    "start": epoch.isoformat(), "end": split_date.isoformat()})
                memberships.append({"canonical_id": pid, "team_id": s.teams[1],
                                    "start": split_date.isoformat(), "end": None})
            else:
                memberships.append({"canonical_id": pid, "team_id": t,
                                    "start": epoch.isoformat(), "end": None})
    return epoch, split_date, members, memberships


def _team_at(memberships, pid, day: date) -> Optional[str]:
    for m in memberships:
        if m["canonical_id"] != pid:
            continue
        start = date.fromisoformat(m["start"])
        end = date.fromisoformat(m["end"]) if m["end"] else None
        if start <= day and (end is None or day < end):
            return m["team_id"]
    return None


def generate_scenario(s: Scenario) -> dict[str, str]:
    """Build a complete input fileset (file name -> text) for ``s``.

    Every week gets at least one commit, so all weeks are active. The
    owning team's share of each week's events follows a latent draw from
    ``share_range``; TD issues are then added or removed so that the week's
    TD stock equals
    ``round(base_tdd * loc * (1 + tdd_amplitude * drift))`` with
    ``drift = -coupling * (degree - 50) / 50 + noise_scale * N(0, 1)``,
    where ``degree`` is the realised contribution degree of that week.
    """
    rng = SplitMix64(s.seed)
    epoch, split_date, members, memberships = _people(s)
    outsiders = [f"ext{i}@partner.example" for i in range(s.outsiders)]
    aliases = {}
    for pid in sorted(p for team in members.values() for p in team):
        aliases[f"{pid}@corp.example"] = pid
        aliases[f"{pid.replace('-', '.')}@mail.example"] = pid

    commits, prs, tickets, issues, sizes, truth = [], [], [], [], [], []
    open_issues: list[dict] = []
    issue_seq = pr_seq = ticket_seq = 0
    cid = s.component_id
    lo, hi = s.share_range

    def author(owner_pool, other_pool, share):
        pid = rng.choice(owner_pool) if (rng.random() < share or not other_pool) else rng.choice(other_pool)
        if "@" in pid:
            return pid.split("@")[0], pid, False
        email = f"{pid}@corp.example" if rng.random() < 0.8 else f"{pid.replace('-', '.')}@mail.example"
        return pid.replace("-", " ").title(), email, True

    for w in range(1, s.weeks + 1):
        start = week_start(w, epoch)
        day = start.date()
        owner = s.owner(w)
        owner_pool = sorted(p for t in members.values() for p in t
                            if _team_at(memberships, p, day) == owner)
        other_pool = sorted(p for t in members.values() for p in t
                            if _team_at(memberships, p, day) != owner) + outsiders
        share = rng.uniform(lo, hi)
        counts = {m: [0, 0] for m in ("C", "Ch", "P", "T")}

        def stamp():
            return format_timestamp(start + timedelta(seconds=rng.randbelow(SECONDS_PER_WEEK)))

        def owned(email):
            pid = aliases.get(email)
            return pid is not None and _team_at(memberships, pid, day) == owner

        n_commits = max(1, rng.poisson(s.event_rates.get("commits", 0.0)))
        for _ in range(n_commits):
            name, email, _ = author(owner_pool, other_pool, share)
            files, adds, dels = [], 0, 0
            for k in range(1 + rng.randbelow(3)):
                ext = "java" if rng.random() < 0.8 else "xml"
                a, d = 1 + rng.randbelow(80), rng.randbelow(40)
                files.append({"path": f"src/main/{ext}/mod{rng.randbelow(20)}/File{k}.{ext}",
                              "additions": a, "deletions": d})
                adds += a
                dels += d
            if rng.random() < 0.3:
                files.append({"path": "README.md", "additions": 1 + rng.randbelow(10), "deletions": 0})
            commits.append({"hash": rng.hexdigest(), "author_name": name, "author_email": email,
                            "timestamp": stamp(), "files": files, "parents": 1})
            is_owner = owned(email)
            counts["C"][1] += 1
            counts["Ch"][1] += adds + dels
            if is_owner:
                counts["C"][0] += 1
                counts["Ch"][0] += adds + dels
        if rng.random() < s.merge_rate:
            name, email, _ = author(owner_pool, other_pool, share)
            commits.append({"hash": rng.hexdigest(), "author_name": name, "author_email": email,
                            "timestamp": stamp(), "parents": 2,
                            "files": [{"path": "src/main/java/Merged.java",
                                       "additions": 5 + rng.randbelow(50), "deletions": 0}]})
        for key, rate, sink in (("P", "prs", prs), ("T", "tickets", tickets)):
            for _ in range(rng.poisson(s.event_rates.get(rate, 0.0))):
                name, email, _ = author(owner_pool, other_pool, share)
                if key == "P":
                    pr_seq += 1
                    item = f"PR-{pr_seq}"
                else:
                    ticket_seq += 1
                    item = f"TCK-{ticket_seq}"
                sink.append({"item_id": item, "author_name": name, "author_email": email,
                             "created_at": stamp(), "component_id": cid})
                counts[key][1] += 1
                if owned(email):
                    counts[key][0] += 1

        shares = [100.0 * t / a for t, a in counts.values() if a > 0]
        degree = sum(shares) / len(shares)
        loc = s.base_loc + s.loc_growth * w
        drift = -s.coupling(w) * (degree - 50.0) / 50.0 + s.noise_scale * rng.gauss()
        target = max(0, round(s.base_tdd * loc * (1.0 + s.tdd_amplitude * drift)))

        stock = sum(i["remediation_minutes"] for i in open_issues)
        while stock > target and open_issues:
            victim = open_issues.pop(rng.randbelow(len(open_issues)))
            victim["removed_at"] = stamp()
            stock -= victim["remediation_minutes"]
        while stock < target:
            minutes = min(target - stock, 1 + rng.randbelow(s.max_issue_minutes))
            issue_seq += 1
            rec = {"issue_id": f"TD-{issue_seq}", "component_id": cid,
                   "remediation_minutes": minutes, "introduced_at": stamp(), "removed_at": None}
            issues.append(rec)
            open_issues.append(rec)
            stock += minutes
        sizes.append(f"{cid},{w},{loc}")
        truth.append(f"{w},{degree!r},{stock},{loc},{owner}")

    owner_timeline = [{"team_id": s.teams[0], "start": epoch.isoformat(),
                       "end": split_date.isoformat() if split_date else None}]
    split_events = []
    if split_date is not None and len(s.teams) > 1:
        owner_timeline.append({"team_id": s.teams[1], "start": split_date.isoformat(), "end": None})
        split_events.append({"date": split_date.isoformat(), "description": "team split"})
    config = {
        "epoch": epoch.isoformat(),
        "components": [{
            "component_id": cid,
            "repo_path": cid,
            "path_globs": ["**/*.java", "**/*.xml"],
            "owner_timeline": owner_timeline,
            "split_events": split_events,
            "commits": f"commits_{cid}.jsonl",
        }],
        "inputs": {"prs": "prs.jsonl", "tickets": "tickets.jsonl", "td_issues": "td_issues.jsonl",
                   "affiliations": "affiliations.json", "aliases": "aliases.json",
                   "sizes": "sizes.csv"},
        "store_dir": "store",
        "output_dir": "out",
    }
    return {
        "scenario.json": json.dumps(s.to_dict(), indent=2, sort_keys=True) + "\n",
        "config.json": json.dumps(config, indent=2, sort_keys=True) + "\n",
        f"commits_{cid}.jsonl": _jsonl(commits),
        "prs.jsonl": _jsonl(prs),
        "tickets.jsonl": _jsonl(tickets),
        "td_issues.jsonl": _jsonl(issues),
        "affiliations.json": json.dumps(memberships, indent=2, sort_keys=True) + "\n",
        "aliases.json": json.dumps(aliases, indent=2, sort_keys=True) + "\n",
        "sizes.csv": "component_id,week,loc\n" + "\n".join(sizes) + "\n",
        "truth.csv": "week,degree,td_minutes,loc,owner\n" + "\n".join(truth) + "\n",
    }


def write_scenario(s: Scenario, out_dir: Union[str, Path]) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    for name, text in sorted(generate_scenario(s).items()):
        atomic_write(out_dir / name, text)
        paths.append(out_dir / name)
    return paths
