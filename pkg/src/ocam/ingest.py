"""Parsers for git numstat logs, JSONL event exports, affiliation files and
source trees."""
from __future__ import annotations

import csv
import json
import logging
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional, TextIO, Union

from .model import (
    ActivityRecord,
    AffiliationTimeline,
    AliasTable,
    CommitRecord,
    ComponentSpec,
    SizeSnapshot,
    TdIssueRecord,
    parse_timestamp,
    resolve_identity,
)

log = logging.getLogger(__name__)

GIT_LOG_COMMAND = (
    "git log --numstat --no-merges --date=iso-strict "
    "--pretty=format:'@%H|%an|%ae|%ad|%P'"
)
GIT_LOG_COMMAND_WITH_MERGES = (
    "git log --numstat --diff-merges=first-parent --date=iso-strict "
    "--pretty=format:'@%H|%an|%ae|%ad|%P'"
)

EVENT_KINDS = ("pr", "ticket", "td_issue")
CLOSED_STATUSES = {"closed", "fixed", "removed", "resolved"}


@dataclass
class IngestDiagnostics:
    records_read: int = 0
    records_rejected: int = 0
    records_dropped: int = 0
    unknown_identities: set = field(default_factory=set)
    warnings: list = field(default_factory=list)

    def reject(self, msg: str):
        self.records_rejected += 1
        self.warn(msg)

    def warn(self, msg: str):
        log.warning(msg)
        self.warnings.append(msg)

    def merge(self, other: "IngestDiagnostics") -> "IngestDiagnostics":
        self.records_read += other.records_read
        self.records_rejected += other.records_rejected
        self.records_dropped += other.records_dropped
        self.unknown_identities |= other.unknown_identities
        self.warnings.extend(other.warnings)
        return self

    def summary(self) -> dict:
        return {
            "records_read": self.records_read,
            "records_rejected": self.records_rejected,
            "records_dropped": self.records_dropped,
            "unknown_identities": len(self.unknown_identities),
            "warnings": len(self.warnings),
        }


# -- glob matching -----------------------------------------------------------


@lru_cache(maxsize=256)
def _glob_regex(pattern: str) -> re.Pattern:
    i, out = 0, []
    while i < len(pattern):
        if pattern.startswith("**/", i):
            out.append("(?:.*/)?")
            i += 3
        elif pattern.startswith("**", i):
            out.append(".*")
            i += 2
        elif pattern[i] == "*":
            out.append("[^/]*")
            i += 1
        elif pattern[i] == "?":
            out.append("[^/]")
            i += 1
        else:
            out.append(re.escape(pattern[i]))
            i += 1
    return re.compile("".join(out) + r"\Z")


def path_matches(path: str, globs: Iterable[str]) -> bool:
    """True when the posix ``path`` matches any glob.

    ``**/`` matches zero or more directories, ``*`` stays within one path
    segment.
    """
    path = path.replace("\\", "/")
    while path.startswith("./"):
        path = path[2:]
    return any(_glob_regex(g).match(path) for g in globs)


_RENAME_BRACES = re.compile(r"\{([^{}]*) => ([^{}]*)\}")


def resolve_rename(path: str) -> str:
    """Destination path of a numstat rename entry."""
    if "=>" not in path:
        return path
    if "{" in path:
        new = _RENAME_BRACES.sub(lambda m: m.group(2), path)
        return re.sub("/{2,}", "/", new)
    return path.split(" => ", 1)[1]


# -- git numstat ---------------------------------------------------------------


def _parse_header(line: str):
    body = line[1:]
    head, sep, rest = body.partition("|")
    if not sep:
        raise ValueError("missing fields")
    parts = rest.rsplit("|", 3)
    if len(parts) != 4:
        raise ValueError("expected hash|name|email|date|parents")
    name, email, date_text, parents = parts
    commit_hash = head.strip()
    if not re.fullmatch(r"[0-9a-fA-F]{4,64}", commit_hash):
        raise ValueError(f"bad hash {commit_hash!r}")
    timestamp = parse_timestamp(date_text)
    n_parents = len(parents.split())
    return commit_hash, name, email, timestamp, n_parents


def _numstat_count(field_text: str) -> int:
    if field_text == "-":
        return 0
    value = int(field_text)
    if value < 0:
        raise ValueError("negative count")
    return value


def parse_git_numstat(
    stream: Union[TextIO, Iterable[str]],
    component: ComponentSpec,
    alias_map: Union[AliasTable, Mapping[str, str], None] = None,
) -> tuple[list[CommitRecord], IngestDiagnostics]:
    """Parse ``git log --numstat`` output with the documented header format.

    Churn is summed only over files matching the component's globs; binary
    entries (``-``) count as zero. Commits that touch no matching file are
    dropped.
    """
    table = alias_map if isinstance(alias_map, AliasTable) else AliasTable(alias_map)
    diag = IngestDiagnostics()
    commits: list[CommitRecord] = []
    seen: set[str] = set()
    current = None  # (hash, author, ts, is_merge, adds, dels, matched) or "skip"

    def flush():
        if current is None or current == "skip":
            return
        commit_hash, author, ts, is_merge, adds, dels, matched = current
        if not matched:
            diag.records_dropped += 1
            return
        if commit_hash in seen:
            diag.reject(f"duplicate commit {commit_hash}")
            return
        seen.add(commit_hash)
        commits.append(
            CommitRecord(component.component_id, commit_hash, author, ts, adds, dels, is_merge)
        )

    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if line.startswith("'@") and line.endswith("'"):
            line = line[1:-1]
        if not line.strip():
            continue
        if line.startswith("@"):
            flush()
            diag.records_read += 1
            try:
                commit_hash, name, email, ts, n_parents = _parse_header(line)
                ident = resolve_identity(name, email, table, diag.warnings)
            except ValueError as exc:
                diag.reject(f"line {lineno}: malformed commit header ({exc})")
                current = "skip"
                continue
            if ident.canonical_id in table.unknown:
                diag.unknown_identities.add(ident.canonical_id)
            current = [commit_hash, ident.canonical_id, ts, n_parents >= 2, 0, 0, False]
            continue
        if current == "skip":
            continue
        if current is None:
            diag.warn(f"line {lineno}: numstat line before any commit header")
            continue
        parts = line.split("\t", 2)
        try:
            if len(parts) != 3:
                raise ValueError("expected 3 tab-separated fields")
            adds = _numstat_count(parts[0])
            dels = _numstat_count(parts[1])
        except ValueError as exc:
            diag.warn(f"line {lineno}: malformed numstat line skipped ({exc})")
            continue
        if path_matches(resolve_rename(parts[2]), component.path_globs):
            current[4] += adds
            current[5] += dels
            current[6] = True
    flush()
    return commits, diag


def load_commits_jsonl(
    path: Union[str, Path],
    component: ComponentSpec,
    alias_map: Union[AliasTable, Mapping[str, str], None] = None,
) -> tuple[list[CommitRecord], IngestDiagnostics]:
    """Commits supplied as JSONL ``{hash, author_name, author_email,
    timestamp, files: [{path, additions, deletions}], parents?}``."""
    table = alias_map if isinstance(alias_map, AliasTable) else AliasTable(alias_map)
    diag = IngestDiagnostics()
    commits = []
    seen = set()
    for lineno, obj in _iter_jsonl(path, diag):
        try:
            commit_hash = str(obj["hash"])
            ident = resolve_identity(
                obj.get("author_name"), obj.get("author_email"), table, diag.warnings
            )
            ts = parse_timestamp(obj["timestamp"])
            files = obj["files"]
            if not isinstance(files, list):
                raise ValueError("files must be a list")
            parents = obj.get("parents", 1)
            n_parents = len(parents) if isinstance(parents, list) else int(parents)
        except (KeyError, ValueError, TypeError) as exc:
            diag.reject(f"{path}:{lineno}: rejected commit ({exc!r})")
            continue
        if ident.canonical_id in table.unknown:
            diag.unknown_identities.add(ident.canonical_id)
        adds = dels = 0
        matched = False
        for f in files:
            try:
                a = _numstat_count(str(f.get("additions", 0)))
                d = _numstat_count(str(f.get("deletions", 0)))
                p = resolve_rename(str(f["path"]))
            except (KeyError, ValueError, AttributeError) as exc:
                diag.warn(f"{path}:{lineno}: bad file entry skipped ({exc!r})")
                continue
            if path_matches(p, component.path_globs):
                adds += a
                dels += d
                matched = True
        if not matched:
            diag.records_dropped += 1
            continue
        if commit_hash in seen:
            diag.reject(f"{path}:{lineno}: duplicate commit {commit_hash}")
            continue
        seen.add(commit_hash)
        commits.append(
            CommitRecord(component.component_id, commit_hash, ident.canonical_id, ts,
                         adds, dels, n_parents >= 2)
        )
    return commits, diag


# -- JSONL event exports --------------------------------------------------------


def _iter_jsonl(path, diag: IngestDiagnostics) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            diag.records_read += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                diag.reject(f"{path}:{lineno}: invalid JSON ({exc.msg})")
                continue
            if not isinstance(obj, dict):
                diag.reject(f"{path}:{lineno}: record is not an object")
                continue
            yield lineno, obj


def _minutes(value) -> Union[int, float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"remediation_minutes must be a number, got {value!r}")
    if not value >= 0:
        raise ValueError("remediation_minutes must be >= 0")
    return value


def load_events(
    path: Union[str, Path],
    kind: str,
    alias_map: Union[AliasTable, Mapping[str, str], None] = None,
) -> tuple[list, IngestDiagnostics]:
    """Load one JSONL export of pull requests, tickets or TD issues."""
    if kind not in EVENT_KINDS:
        raise ValueError(f"unknown event kind {kind!r}; expected one of {EVENT_KINDS}")
    table = alias_map if isinstance(alias_map, AliasTable) else AliasTable(alias_map)
    diag = IngestDiagnostics()
    records = []
    seen = set()
    for lineno, obj in _iter_jsonl(path, diag):
        try:
            if kind == "td_issue":
                removed = obj.get("removed_at")
                rec = TdIssueRecord(
                    str(obj["component_id"]),
                    str(obj["issue_id"]),
                    _minutes(obj["remediation_minutes"]),
                    parse_timestamp(obj["introduced_at"]),
                    parse_timestamp(removed) if removed else None,
                )
                key = (rec.component_id, rec.issue_id)
            else:
                ident = resolve_identity(
                    obj.get("author_name"), obj.get("author_email"), table, diag.warnings
                )
                if ident.canonical_id in table.unknown:
                    diag.unknown_identities.add(ident.canonical_id)
                rec = ActivityRecord(
                    str(obj["component_id"]),
                    str(obj["item_id"]),
                    ident.canonical_id,
                    parse_timestamp(obj["created_at"]),
                )
                key = (rec.component_id, rec.item_id)
        except (KeyError, ValueError, TypeError) as exc:
            diag.reject(f"{path}:{lineno}: rejected {kind} record ({exc!r})")
            continue
        if key in seen:
            diag.reject(f"{path}:{lineno}: duplicate {kind} id {key[1]!r} in {key[0]}")
            continue
        seen.add(key)
        if kind == "td_issue" and rec.removed_at is None:
            status = str(obj.get("status", "")).strip().lower()
            if status in CLOSED_STATUSES:
                diag.warn(
                    f"{path}:{lineno}: issue {rec.issue_id} is {status} but has no "
                    "removal date; TD stock will be overstated"
                )
        records.append(rec)
    return records, diag


def write_jsonl(path: Union[str, Path], records: Iterable) -> None:
    from .io import atomic_write

    lines = [json.dumps(r.to_dict(), sort_keys=True) for r in records]
    atomic_write(path, "".join(line + "\n" for line in lines))


def read_normalized(path: Union[str, Path], cls) -> list:
    with open(path, encoding="utf-8") as fh:
        return [cls.from_dict(json.loads(line)) for line in fh if line.strip()]


# -- affiliations, aliases, sizes ----------------------------------------------


def load_affiliations(path: Union[str, Path]) -> AffiliationTimeline:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError(f"{path}: expected a JSON list of memberships")
    return AffiliationTimeline.from_records(data)


def load_aliases(path: Union[str, Path]) -> AliasTable:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object raw_email -> canonical_id")
    return AliasTable({str(k): str(v) for k, v in data.items()})


def load_sizes(path: Union[str, Path]) -> tuple[list[SizeSnapshot], IngestDiagnostics]:
    diag = IngestDiagnostics()
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"component_id", "week", "loc"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            diag.records_read += 1
            try:
                out.append(SizeSnapshot(row["component_id"], int(row["week"]), int(row["loc"])))
            except (TypeError, ValueError) as exc:
                diag.reject(f"{path}: bad size row {row} ({exc})")
    return out, diag


def write_sizes(path: Union[str, Path], sizes: Iterable[SizeSnapshot]) -> None:
    from .io import atomic_write

    rows = ["component_id,week,loc"]
    rows += [f"{s.component_id},{s.week},{s.loc}" for s in
             sorted(sizes, key=lambda s: (s.component_id, s.week))]
    atomic_write(path, "\n".join(rows) + "\n")


# -- line counting -------------------------------------------------------------

# (line comment markers, block comment pairs) per file suffix
DEFAULT_COMMENT_RULES = {
    ".java": (("//",), (("/*", "*/"),)),
    ".xml": ((), (("<!--", "-->"),)),
}


def _count_file_lines(lines: Iterable[str], rule) -> int:
    line_markers, blocks = rule
    in_block = None
    count = 0
    for line in lines:
        pos, has_code = 0, False
        while pos < len(line):
            if in_block is not None:
                end = line.find(in_block, pos)
                if end < 0:
                    break
                pos = end + len(in_block)
                in_block = None
                continue
            best, best_kind = None, None
            for m in line_markers:
                i = line.find(m, pos)
                if i >= 0 and (best is None or i < best):
                    best, best_kind = i, ("line", m)
            for start, stop in blocks:
                i = line.find(start, pos)
                if i >= 0 and (best is None or i < best):
                    best, best_kind = i, ("block", start, stop)
            if best is None:
                if line[pos:].strip():
                    has_code = True
                break
            if line[pos:best].strip():
                has_code = True
            if best_kind[0] == "line":
                break
            in_block = best_kind[2]
            pos = best + len(best_kind[1])
        if has_code:
            count += 1
    return count


def count_lines(
    tree: Union[str, Path],
    globs: Iterable[str] = ("**/*.java", "**/*.xml"),
    comment_rules: Optional[Mapping] = None,
    warnings: Optional[list] = None,
) -> int:
    """Count non-blank, non-comment lines of files under ``tree`` that match
    ``globs``.

    Block comments are tracked per file; string literals are not parsed, so
    a comment marker inside a string is treated as a real comment.
    """
    rules = DEFAULT_COMMENT_RULES if comment_rules is None else comment_rules
    globs = tuple(globs)
    root = Path(tree)
    total = 0
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = [d for d in dirnames if d != ".git"]
        for name in filenames:
            full = Path(dirpath) / name
            rel = full.relative_to(root).as_posix()
            if not path_matches(rel, globs):
                continue
            rule = rules.get(full.suffix.lower(), ((), ()))
            try:
                with open(full, encoding="utf-8", errors="replace") as fh:
                    total += _count_file_lines(fh, rule)
            except OSError as exc:
                msg = f"unreadable file {rel} skipped ({exc})"
                log.warning(msg)
                if warnings is not None:
                    warnings.append(msg)
    return total
