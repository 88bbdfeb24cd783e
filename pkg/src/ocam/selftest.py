"""Quick oracle-equivalence checks run by ``ocam selftest``."""
from __future__ import annotations

import math
import sys
import time

from . import kernels
from .stats import DegenerateInputError, kendall_tau_b, mann_whitney_u
from .synth.oracles import brute_force_tau, permutation_mwu_p
from .synth.rng import SplitMix64


def _check_kendall(rng: SplitMix64, instances: int) -> int:
    bad = 0
    for _ in range(instances):
        n = 2 + rng.randbelow(40)
        k = 2 + rng.randbelow(10)
        x = [rng.randbelow(k) for _ in range(n)]
        y = [rng.randbelow(k) for _ in range(n)]
        want = brute_force_tau(x, y)
        for name, mod in kernels.available_backends().items():
            if tuple(mod.kendall_counts(x, y)[:4]) != want[:4]:
                bad += 1
        try:
            got = kendall_tau_b(x, y).tau_b
        except DegenerateInputError:
            got = None
        if (got is None) != (want[4] is None) or (got is not None and abs(got - want[4]) > 1e-12):
            bad += 1
    return bad


def _check_mwu_exact(rng: SplitMix64, instances: int) -> int:
    bad = 0
    for _ in range(instances):
        n1 = 1 + rng.randbelow(6)
        n2 = 1 + rng.randbelow(7 - n1 + 5)
        n2 = min(n2, 12 - n1)
        pool = list(range(100))
        vals = []
        for _ in range(n1 + n2):
            vals.append(pool.pop(rng.randbelow(len(pool))))
        xs, ys = vals[:n1], vals[n1:]
        p = mann_whitney_u(xs, ys, method="exact").p_value
        if abs(p - permutation_mwu_p(xs, ys)) > 1e-12:
            bad += 1
    return bad


def _check_null_counts() -> int:
    bad = 0
    mods = list(kernels.available_backends().values())
    for n1 in range(1, 9):
        for n2 in range(1, 9):
            ref = list(mods[0].mwu_null_counts(n1, n2))
            if sum(ref) != math.comb(n1 + n2, n1):
                bad += 1
            for mod in mods[1:]:
                if list(mod.mwu_null_counts(n1, n2)) != ref:
                    bad += 1
    return bad


def run_selftest(instances: int = 200, seed: int = 7, out=sys.stdout) -> bool:
    rng = SplitMix64(seed)
    print(f"backend: {kernels.BACKEND} (available: {', '.join(kernels.available_backends())})",
          file=out)
    ok = True
    for name, fn in (
        ("kendall counts vs pairwise enumeration", lambda: _check_kendall(rng, instances)),
        ("exact MWU p vs permutation enumeration", lambda: _check_mwu_exact(rng, instances // 4)),
        ("MWU null counts across backends", _check_null_counts),
    ):
        t0 = time.perf_counter()
        bad = fn()
        ok = ok and bad == 0
        status = "PASS" if bad == 0 else f"FAIL ({bad} mismatches)"
        print(f"{status:6} {name} [{time.perf_counter() - t0:.2f}s]", file=out)
    return ok
