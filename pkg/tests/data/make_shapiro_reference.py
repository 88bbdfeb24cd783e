"""Regenerate shapiro_reference.json with scipy.stats.shapiro.

Run once; the JSON is committed and the test suite never imports scipy for
these values.
"""
import json
from pathlib import Path

import numpy as np
import scipy
from scipy import stats

rng = np.random.default_rng(20230401)
sizes = [10, 12, 15, 20, 25, 30, 40, 50, 60, 75, 90, 110, 130, 160, 200, 250, 300, 360, 420, 500]
kinds = ["normal", "uniform", "exponential", "lognormal", "bimodal", "student_t", "normal", "gamma"]
datasets = []
for i, n in enumerate(sizes):
    kind = kinds[i % len(kinds)]
    if kind == "normal":
        x = rng.normal(10.0, 2.0, n)
    elif kind == "uniform":
        x = rng.uniform(0.0, 1.0, n)
    elif kind == "exponential":
        x = rng.exponential(1.5, n)
    elif kind == "lognormal":
        x = rng.lognormal(0.0, 0.6, n)
    elif kind == "bimodal":
        x = np.concatenate([rng.normal(-2.0, 0.5, n // 2), rng.normal(2.0, 0.5, n - n // 2)])
    elif kind == "student_t":
        x = rng.standard_t(5, n)
    else:
        x = rng.gamma(4.0, 1.0, n)
    x = np.round(x, 6)
    res = stats.shapiro(x)
    datasets.append({"kind": kind, "n": int(n), "data": [float(v) for v in x],
                     "w": float(res.statistic), "p": float(res.pvalue)})

out = {"generator": f"scipy.stats.shapiro (scipy {scipy.__version__})", "datasets": datasets}
Path(__file__).with_name("shapiro_reference.json").write_text(json.dumps(out, indent=1) + "\n")
