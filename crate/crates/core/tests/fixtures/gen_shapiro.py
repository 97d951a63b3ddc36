"""Regenerates shapiro_reference.json with numpy and scipy.stats.shapiro."""
import json
from pathlib import Path

import numpy as np
from scipy import stats

rng = np.random.default_rng(20240917)
draws = {
    "normal": lambda n: rng.normal(3.0, 2.0, n),
    "uniform": lambda n: rng.uniform(-1.0, 1.0, n),
    "exponential": lambda n: rng.exponential(1.5, n),
    "student_t3": lambda n: rng.standard_t(3, n),
    "near_normal": lambda n: rng.normal(0.0, 1.0, n) + 0.15 * rng.uniform(-1.0, 1.0, n),
}
cases = []
for n in (10, 50, 500, 2000):
    for name, draw in draws.items():
        x = draw(n)
        res = stats.shapiro(x)
        cases.append({
            "name": f"{name}_{n}",
            "sample": [float(v) for v in x],
            "w": float(res.statistic),
            "p_value": float(res.pvalue),
        })
out = Path(__file__).with_name("shapiro_reference.json")
out.write_text(json.dumps({"scipy": __import__("scipy").__version__, "cases": cases}) + "\n")
