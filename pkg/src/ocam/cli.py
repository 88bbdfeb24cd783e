"""Command-line entry point: ``ocam ingest|analyze|report|synth|selftest``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__, kernels
from .config import ConfigError, RunConfig, load_config
from .io import atomic_write
from .metrics import MetricOptions, build_weekly_series, metrics_csv
from .pipeline import AnalysisConfig, run_analysis
from .report import (
    FORMATS,
    export_plot_data,
    format_p,
    load_report_json,
    render_report,
    write_documents,
)
from .store import MissingInputError, ingest, read_store, write_store
from .synth import Scenario, write_scenario

log = logging.getLogger("ocam")

EXIT_OK, EXIT_USAGE, EXIT_REJECTED = 0, 1, 2


def _setup_logging():
    level = os.environ.get("OCAM_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _fail(msg: str, code: int = EXIT_USAGE) -> int:
    print(f"ocam: error: {msg}", file=sys.stderr)
    return code


def _overrides(args) -> dict:
    return {
        "store_dir": getattr(args, "store", None),
        "output_dir": getattr(args, "out", None),
        "format": getattr(args, "format", None),
        "alpha": getattr(args, "alpha", None),
        "min_n": getattr(args, "min_n", None),
        "window_weeks": getattr(args, "window_weeks", None),
        "jobs": getattr(args, "jobs", None),
        "merge_commits": True if getattr(args, "merge_commits", False) else None,
        "strict": True if getattr(args, "strict", False) else None,
        "strict_measures": True if getattr(args, "strict_measures", False) else None,
        "no_segmentation": True if getattr(args, "no_segmentation", False) else None,
        "force_segmentation": True if getattr(args, "force_segmentation", False) else None,
    }


# -- ingest ----------------------------------------------------------------------


def cmd_ingest(args) -> int:
    cfg = load_config(args.config).with_overrides(**_overrides(args))
    store, diag = ingest(cfg)
    write_store(store, diag, cfg.store_dir)
    summary = diag.summary()
    print(f"store: {cfg.store_dir}")
    print("  " + "  ".join(f"{k}={v}" for k, v in summary.items()))
    print(f"  commits={len(store.commits)} prs={len(store.prs)} tickets={len(store.tickets)} "
          f"td_issues={len(store.td_issues)} sizes={len(store.sizes)}")
    if cfg.strict and diag.records_rejected:
        return _fail(f"{diag.records_rejected} record(s) rejected in strict mode", EXIT_REJECTED)
    return EXIT_OK


# -- analyze --------------------------------------------------------------------------


def _analyze_component(job):
    spec, commits, prs, tickets, td_issues, sizes, affiliation, metric_opts, analysis_cfg = job
    warnings: list[str] = []
    series = build_weekly_series(spec, commits, prs, tickets, td_issues, sizes, affiliation,
                                 metric_opts, warnings)
    if len(series) == 0:
        return spec.component_id, series, None, warnings
    return spec.component_id, series, run_analysis(series, spec, analysis_cfg), warnings


def _summary_line(analysis) -> str:
    parts = []
    for s in analysis.segments:
        if analysis.segmentation_applied and s.label == "full":
            continue
        if not analysis.segmentation_applied and s.label != "full":
            continue
        if s.kendall is None:
            parts.append(f"{s.label}(n={s.n}) skipped")
        else:
            parts.append(f"{s.label}(n={s.n}) tau={s.kendall.tau_b:.3f} {s.magnitude} "
                         f"p={format_p(s.kendall.p_value)}")
    seg = "segmented" if analysis.segmentation_applied else "full-series"
    return f"{analysis.component_id}: {seg}; " + "; ".join(parts)


def cmd_analyze(args) -> int:
    if args.config:
        base = load_config(args.config)
        store_dir = Path(args.store) if args.store else base.store_dir
    elif args.store:
        store_dir = Path(args.store)
        base = None
    else:
        return _fail("analyze needs --config or --store")
    store = read_store(store_dir)
    cfg = (base or store.config)
    if base is not None:
        # components/epoch come from the store; analysis options from config
        cfg = RunConfig(**{**store.config.__dict__, **{
            k: getattr(base, k) for k in ("alpha", "min_n", "merge_commits", "window_weeks",
                                          "strict_measures", "force_segmentation",
                                          "no_segmentation", "output_dir", "format", "jobs")}})
    cfg = cfg.with_overrides(**{k: v for k, v in _overrides(args).items() if k != "store_dir"})

    metric_opts = MetricOptions(epoch=cfg.epoch, include_merges=cfg.merge_commits,
                                window_weeks=cfg.window_weeks,
                                strict_measures=cfg.strict_measures)
    analysis_cfg = AnalysisConfig(epoch=cfg.epoch, alpha=cfg.alpha, min_n=cfg.min_n,
                                  force_segmentation=cfg.force_segmentation,
                                  no_segmentation=cfg.no_segmentation)
    jobs = []
    for src in cfg.components:
        cid = src.spec.component_id
        jobs.append((
            src.spec,
            [c for c in store.commits if c.component_id == cid],
            [r for r in store.prs if r.component_id == cid],
            [r for r in store.tickets if r.component_id == cid],
            [r for r in store.td_issues if r.component_id == cid],
            [s for s in store.sizes if s.component_id == cid],
            store.affiliation, metric_opts, analysis_cfg,
        ))
    n_workers = min(cfg.effective_jobs, len(jobs)) if jobs else 1
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_analyze_component, jobs))
    else:
        results = [_analyze_component(j) for j in jobs]

    out_dir = Path(cfg.output_dir)
    analyses, skipped = [], []
    for cid, series, analysis, warnings in results:
        for w in warnings:
            log.info(w)
        atomic_write(out_dir / cid / "metrics.csv", metrics_csv(series))
        if analysis is None:
            skipped.append(cid)
            continue
        export_plot_data(series, analysis, out_dir)
        analyses.append(analysis)
        print(_summary_line(analysis))
    if analyses:
        write_documents(render_report(analyses, cfg.format), out_dir)
    if skipped:
        print("skipped (no observations): " + ", ".join(skipped))
    return EXIT_OK


# -- report / synth / selftest ------------------------------------------------------


def cmd_report(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        analyses = load_report_json(fh.read())
    docs = render_report(analyses, args.format)
    if args.out:
        for p in write_documents(docs, args.out):
            print(p)
    else:
        for name, text in sorted(docs.items()):
            if len(docs) > 1:
                print(f"==> {name} <==")
            sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    scenario = Scenario.load(args.scenario)
    for p in write_scenario(scenario, args.out_dir):
        print(p)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(instances=args.instances, seed=args.seed, out=sys.stdout)
    return EXIT_OK if ok else EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    # exit status 2 is reserved for strict-mode rejections
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ocam", description=__doc__)
    p.add_argument("--version", action="version",
                   version=f"ocam {__version__} ({kernels.BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    ing = sub.add_parser("ingest", help="parse inputs into a normalised event store")
    ing.add_argument("--config", required=True, help="run configuration JSON")
    ing.add_argument("--store", help="store directory (overrides config)")
    ing.add_argument("--strict", action="store_true", help="exit 2 if any record is rejected")
    ing.set_defaults(func=cmd_ingest)

    an = sub.add_parser("analyze", help="compute metrics, statistics, reports and plot data")
    an.add_argument("--config", help="run configuration JSON")
    an.add_argument("--store", help="normalised store directory")
    an.add_argument("--out", help="output directory")
    an.add_argument("--format", choices=FORMATS)
    an.add_argument("--alpha", type=float)
    an.add_argument("--min-n", type=int, dest="min_n")
    an.add_argument("--window-weeks", type=int, dest="window_weeks")
    an.add_argument("--merge-commits", action="store_true", help="count merge commits")
    an.add_argument("--strict-measures", action="store_true",
                    help="drop weeks lacking any of the four measures")
    seg = an.add_mutually_exclusive_group()
    seg.add_argument("--no-segmentation", action="store_true",
                     help="single full-series correlation per component")
    seg.add_argument("--force-segmentation", action="store_true",
                     help="always correlate per segment")
    an.add_argument("--jobs", type=int, help="parallel component workers (default: CPUs)")
    an.set_defaults(func=cmd_analyze)

    rep = sub.add_parser("report", help="re-render a report.json")
    rep.add_argument("report", help="path to report.json")
    rep.add_argument("--format", choices=FORMATS, default="markdown")
    rep.add_argument("--out", help="directory to write into (default: stdout)")
    rep.set_defaults(func=cmd_report)

    syn = sub.add_parser("synth", help="generate a synthetic input fileset")
    syn.add_argument("scenario", help="scenario JSON file")
    syn.add_argument("out_dir")
    syn.set_defaults(func=cmd_synth)

    st = sub.add_parser("selftest", help="run oracle-equivalence checks")
    st.add_argument("--instances", type=int, default=200)
    st.add_argument("--seed", type=int, default=7)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MissingInputError, FileNotFoundError) as exc:
        return _fail(str(exc))
    except (ConfigError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(f"I/O error: {exc}")


if __name__ == "__main__":
    sys.exit(main())
