"""Normalised event store written by ``ocam ingest`` and read by ``ocam analyze``."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .config import RunConfig, config_from_dict, config_to_dict
from .ingest import (
    IngestDiagnostics,
    count_lines,
    load_affiliations,
    load_aliases,
    load_commits_jsonl,
    load_events,
    load_sizes,
    parse_git_numstat,
    read_normalized,
    write_jsonl,
    write_sizes,
)
from .io import atomic_write
from .metrics import active_weeks
from .model import (
    ActivityRecord,
    AffiliationTimeline,
    AliasTable,
    CommitRecord,
    SizeSnapshot,
    TdIssueRecord,
)

log = logging.getLogger(__name__)

STORE_FILES = ("run.json", "commits.jsonl", "prs.jsonl", "tickets.jsonl", "td_issues.jsonl",
               "affiliations.json", "identities.json", "sizes.csv", "diagnostics.json")


class MissingInputError(FileNotFoundError):
    pass


@dataclass
class Store:
    config: RunConfig
    commits: list = field(default_factory=list)
    prs: list = field(default_factory=list)
    tickets: list = field(default_factory=list)
    td_issues: list = field(default_factory=list)
    affiliation: AffiliationTimeline = field(default_factory=AffiliationTimeline)
    sizes: list = field(default_factory=list)
    identities: list = field(default_factory=list)


def _require(path, what):
    if path is None:
        return None
    if not Path(path).is_file():
        raise MissingInputError(f"missing {what} input file: {path}")
    return Path(path)


def ingest(cfg: RunConfig) -> tuple[Store, IngestDiagnostics]:
    """Parse every configured input into validated records."""
    for src in cfg.components:
        if src.commits is None and src.git_log is None:
            raise MissingInputError(
                f"component {src.spec.component_id}: no 'commits' or 'git_log' input configured")
        _require(src.commits, f"{src.spec.component_id} commits")
        _require(src.git_log, f"{src.spec.component_id} git_log")
    paths = {k: _require(cfg.inputs.get(k), k) for k in
             ("prs", "tickets", "td_issues", "affiliations", "aliases", "sizes")}

    diag = IngestDiagnostics()
    aliases = load_aliases(paths["aliases"]) if paths["aliases"] else AliasTable()
    affiliation = load_affiliations(paths["affiliations"]) if paths["affiliations"] \
        else AffiliationTimeline()

    commits = []
    for src in cfg.components:
        if src.git_log is not None:
            with open(src.git_log, encoding="utf-8", errors="replace") as fh:
                recs, d = parse_git_numstat(fh, src.spec, aliases)
        else:
            recs, d = load_commits_jsonl(src.commits, src.spec, aliases)
        commits.extend(recs)
        diag.merge(d)

    events = {}
    for key, kind in (("prs", "pr"), ("tickets", "ticket"), ("td_issues", "td_issue")):
        if paths[key] is None:
            events[key] = []
            continue
        recs, d = load_events(paths[key], kind, aliases)
        events[key] = recs
        diag.merge(d)

    if paths["sizes"] is not None:
        sizes, d = load_sizes(paths["sizes"])
        diag.merge(d)
    else:
        sizes = []
    sized = {s.component_id for s in sizes}
    for src in cfg.components:
        cid = src.spec.component_id
        if cid in sized or src.source_tree is None:
            continue
        loc = count_lines(src.source_tree, src.spec.path_globs, warnings=diag.warnings)
        weeks = active_weeks([c for c in commits if c.component_id == cid], cfg.epoch,
                             include_merges=True)
        diag.warn(f"{cid}: no sizes.csv entries; using current tree size {loc} LOC "
                  f"for all {len(weeks)} active weeks")
        sizes.extend(SizeSnapshot(cid, w, loc) for w in sorted(weeks))

    store = Store(
        config=cfg,
        commits=sorted(commits, key=lambda c: (c.component_id, c.timestamp, c.commit_hash)),
        prs=sorted(events["prs"], key=lambda r: (r.component_id, r.created_at, r.item_id)),
        tickets=sorted(events["tickets"], key=lambda r: (r.component_id, r.created_at, r.item_id)),
        td_issues=sorted(events["td_issues"],
                         key=lambda r: (r.component_id, r.introduced_at, r.issue_id)),
        affiliation=affiliation,
        sizes=sorted(sizes, key=lambda s: (s.component_id, s.week)),
        identities=aliases.identities(),
    )
    diag.unknown_identities |= aliases.unknown
    return store, diag


def write_store(store: Store, diag: IngestDiagnostics, store_dir: Union[str, Path]) -> Path:
    d = Path(store_dir)
    d.mkdir(parents=True, exist_ok=True)
    atomic_write(d / "run.json", json.dumps(config_to_dict(store.config), indent=2,
                                            sort_keys=True) + "\n")
    write_jsonl(d / "commits.jsonl", store.commits)
    write_jsonl(d / "prs.jsonl", store.prs)
    write_jsonl(d / "tickets.jsonl", store.tickets)
    write_jsonl(d / "td_issues.jsonl", store.td_issues)
    atomic_write(d / "affiliations.json",
                 json.dumps(store.affiliation.to_records(), indent=2, sort_keys=True) + "\n")
    identities = [{"canonical_id": i.canonical_id, "raw_names": sorted(i.raw_names),
                   "raw_emails": sorted(i.raw_emails)}
                  for i in store.identities]
    atomic_write(d / "identities.json", json.dumps(identities, indent=2, sort_keys=True) + "\n")
    write_sizes(d / "sizes.csv", store.sizes)
    summary = dict(diag.summary(), unknown_identity_ids=sorted(diag.unknown_identities),
                   warning_messages=diag.warnings)
    atomic_write(d / "diagnostics.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return d


def read_store(store_dir: Union[str, Path]) -> Store:
    d = Path(store_dir)
    for name in STORE_FILES:
        if not (d / name).is_file():
            raise MissingInputError(f"normalised store incomplete: missing {d / name}")
    with open(d / "run.json", encoding="utf-8") as fh:
        cfg = config_from_dict(json.load(fh), d)
    sizes, _ = load_sizes(d / "sizes.csv")
    return Store(
        config=cfg,
        commits=read_normalized(d / "commits.jsonl", CommitRecord),
        prs=read_normalized(d / "prs.jsonl", ActivityRecord),
        tickets=read_normalized(d / "tickets.jsonl", ActivityRecord),
        td_issues=read_normalized(d / "td_issues.jsonl", TdIssueRecord),
        affiliation=load_affiliations(d / "affiliations.json"),
        sizes=sizes,
    )
