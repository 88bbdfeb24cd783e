import math
from datetime import date, timedelta

import pytest
from hypothesis import given, settings, strategies as st

from conftest import ts
from ocam.metrics import (
    MetricOptions,
    active_weeks,
    build_weekly_series,
    contribution_breakdown,
    measure_shares,
    metrics_csv,
    td_stock_by_week,
    tdd_series,
)
from ocam.model import (
    ActivityRecord,
    AffiliationTimeline,
    CommitRecord,
    ComponentSpec,
    Membership,
    SizeSnapshot,
    TdIssueRecord,
    UNAFFILIATED,
)
from ocam.synth.oracles import brute_force_td_stock
from ocam.synth.rng import SplitMix64

E = date(2020, 1, 6)
TL = AffiliationTimeline([
    Membership("a1", "blue", E), Membership("a2", "blue", E),
    Membership("b1", "brown", E), Membership("g1", "gray", E),
])


def commit(h, who, week, adds=1, dels=0, merge=False, day=1):
    return CommitRecord("C1", h, who, ts(week, day), adds, dels, merge)


def act(i, who, week):
    return ActivityRecord("C1", str(i), who, ts(week, 2))


def test_degree_example_mixed_measures():
    # 3 of 12 commits, 500 of 1000 churn, 4 of 10 PRs, 2 of 5 tickets
    commits = [commit("o1", "a1", 3, adds=400), commit("o2", "a1", 3, adds=50, dels=50),
               commit("o3", "a2", 3, adds=0, dels=0)]
    commits += [commit(f"x{i}", "b1", 3, adds=500 // 9 + (1 if i < 500 % 9 else 0)) for i in range(9)]
    assert sum(c.churn for c in commits) == 1000
    prs = [act(i, "a1" if i < 4 else "b1", 3) for i in range(10)]
    tickets = [act(i, "a2" if i < 2 else "g1", 3) for i in range(5)]
    cb = contribution_breakdown(3, "blue", commits, prs, tickets, TL)
    assert cb.c_commits == 25.0 and cb.ch_churn == 50.0
    assert cb.p_prs == 40.0 and cb.t_tickets == 40.0
    assert cb.degree == pytest.approx(38.75, abs=1e-12)


def test_missing_measures_are_omitted_not_zeroed():
    commits = [commit("1", "a1", 1, adds=3), commit("2", "b1", 1, adds=1)]
    cb = contribution_breakdown(1, "blue", commits, [], [], TL)
    assert cb.measures_present == {"C", "Ch"}
    assert cb.p_prs is None and cb.t_tickets is None
    assert cb.degree == pytest.approx((50 + 75) / 2)


def test_merges_excluded_by_default_and_optional():
    commits = [commit("1", "a1", 1), commit("m", "b1", 1, merge=True)]
    assert contribution_breakdown(1, "blue", commits, [], [], TL).c_commits == 100.0
    opts = MetricOptions(include_merges=True)
    assert contribution_breakdown(1, "blue", commits, [], [], TL, options=opts).c_commits == 50.0


def test_attribution_uses_event_time():
    tl = AffiliationTimeline([Membership("p", "blue", E, E + timedelta(days=10)),
                              Membership("p", "brown", E + timedelta(days=10))])
    # week 2 spans days 7..13: the Monday commit is blue, the Friday one brown
    c = [commit("1", "p", 2, day=0), commit("2", "p", 2, day=4)]
    assert contribution_breakdown(2, "blue", c, [], [], tl).c_commits == 50.0


def test_week_without_commits_is_not_active():
    with pytest.raises(ValueError):
        contribution_breakdown(1, "blue", [], [act(1, "a1", 1)], [], TL)


def _random_week(rng: SplitMix64):
    people = ["a1", "a2", "b1", "g1", "outsider"]
    commits = [commit(str(i), rng.choice(people), 5, adds=rng.randbelow(50), dels=rng.randbelow(20))
               for i in range(1 + rng.randbelow(10))]
    prs = [act(i, rng.choice(people), 5) for i in range(rng.randbelow(5))]
    tickets = [act(i, rng.choice(people), 5) for i in range(rng.randbelow(5))]
    return commits, prs, tickets


def test_conservation_and_bounds():
    rng = SplitMix64(17)
    for _ in range(100):
        commits, prs, tickets = _random_week(rng)
        shares = measure_shares(commits, prs, tickets, TL)
        for m, by_team in shares.items():
            assert abs(math.fsum(by_team.values()) - 100.0) <= 1e-9
        for team in ("blue", "brown", "gray", UNAFFILIATED):
            cb = contribution_breakdown(5, team, commits, prs, tickets, TL)
            assert 0.0 <= cb.degree <= 100.0
            for m in cb.measures_present:
                assert cb.measure(m) == pytest.approx(shares[m].get(team, 0.0))


def test_duplicating_all_events_leaves_degree_unchanged():
    rng = SplitMix64(4)
    for _ in range(30):
        commits, prs, tickets = _random_week(rng)
        a = contribution_breakdown(5, "blue", commits, prs, tickets, TL).degree
        b = contribution_breakdown(5, "blue", commits * 2, prs * 3, tickets * 2, TL).degree
        assert a == pytest.approx(b, abs=1e-12)


def test_active_weeks_count():
    rng = SplitMix64(8)
    weeks = sorted(rng.randbelow(200) + 1 for _ in range(1000))
    chosen = sorted(set(weeks))[:122]
    commits = [commit(f"h{w}", "a1", w) for w in chosen]
    commits.append(commit("merge-only", "a1", 250, merge=True))
    assert len(active_weeks(commits, E, include_merges=False)) == 122
    assert len(active_weeks(commits, E, include_merges=True)) == 123


# -- technical debt

def issue(i, minutes, intro_week, removed_week=None):
    return TdIssueRecord("C1", str(i), minutes, ts(intro_week, 3),
                         ts(removed_week, 1) if removed_week else None)


def test_td_stock_half_open_interval():
    issues = [issue(1, 30, 2, 5), issue(2, 10, 4)]
    stock = td_stock_by_week(issues, range(1, 8))
    assert stock == {1: 0, 2: 30, 3: 30, 4: 40, 5: 10, 6: 10, 7: 10}


def test_tdd_example_and_zero_size():
    warnings = []
    pts = tdd_series([issue(1, 500, 1)], [SizeSnapshot("C1", 1, 2000), SizeSnapshot("C1", 2, 0)],
                     [1, 2, 3], component_id="C1", warnings=warnings)
    assert [(p.week, p.tdd) for p in pts] == [(1, 0.25)]
    assert len(warnings) == 2


def test_pre_epoch_debt_counts_from_week_one():
    from datetime import datetime, timezone
    old = TdIssueRecord("C1", "old", 15, datetime(2019, 6, 1, tzinfo=timezone.utc))
    assert td_stock_by_week([old], [1, 2]) == {1: 15, 2: 15}


def _random_issues(rng, n_issues, n_weeks):
    out = []
    for i in range(n_issues):
        start = 1 + rng.randbelow(n_weeks)
        minutes = rng.randbelow(240) if rng.random() < 0.7 else rng.randbelow(240) + rng.random()
        if rng.random() < 0.6:
            end = start + 1 + rng.randbelow(n_weeks)
            # some removals happen inside the introduction week
            if rng.random() < 0.1:
                out.append(TdIssueRecord("C1", str(i), minutes, ts(start, 0, 1), ts(start, 5)))
                continue
            out.append(issue(i, minutes, start, end))
        else:
            out.append(issue(i, minutes, start))
    return out


def test_incremental_stock_equals_rescan():
    rng = SplitMix64(23)
    for _ in range(20):
        n_weeks = 1 + rng.randbelow(200)
        issues = _random_issues(rng, rng.randbelow(500), n_weeks)
        weeks = list(range(1, n_weeks + 1))
        stock = td_stock_by_week(issues, weeks)
        for w in weeks:
            assert stock[w] == brute_force_td_stock(issues, w)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 30), st.integers(0, 40), st.integers(0, 500)), max_size=40))
def test_stock_is_never_negative_and_matches_rescan(rows):
    issues = [issue(i, m, s, s + d if d else None) for i, (s, d, m) in enumerate(rows)]
    stock = td_stock_by_week(issues, range(1, 80))
    for w, v in stock.items():
        assert v >= 0
        assert v == brute_force_td_stock(issues, w)


def test_build_weekly_series_and_csv():
    spec = ComponentSpec.from_dict({"component_id": "C1",
                                    "owner_timeline": [{"team_id": "blue", "start": "2020-01-06"}]})
    commits = [commit("1", "a1", 1), commit("2", "b1", 1), commit("3", "a1", 3)]
    sizes = [SizeSnapshot("C1", 1, 100), SizeSnapshot("C1", 3, 200)]
    s = build_weekly_series(spec, commits, [], [], [issue(1, 50, 1)], sizes, TL)
    assert s.weeks == [1, 3]
    assert s.degrees == [50.0, 100.0]
    assert s.tdds == [0.5, 0.25]
    csv = metrics_csv(s).splitlines()
    assert csv[0] == "week,c,ch,p,t,degree,td_minutes,loc,tdd"
    assert csv[1].startswith("1,50.0,50.0,,,50.0,50.0,100,0.5")
