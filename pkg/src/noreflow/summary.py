"""Demographic comparison between reflow and no-reflow patients."""
from __future__ import annotations

import numpy as np

from .stats import fisher_exact, mann_whitney_u

CONTINUOUS = ("age", "nihss")
CATEGORICAL = (
    ("sex = male", "sex", lambda v: v == "male"),
    ("mTICI = 2c", "mtici", lambda v: v == "2c"),
    ("race = white", "race", lambda v: v.lower() in {"white", "white/caucasian", "caucasian"}),
    ("passes = 1", "passes", lambda v: v == 1),
)


def _median_iqr(values):
    if values.size == 0:
        return None
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    return f"{med:g} [{q1:g}, {q3:g}]"


def cohort_summary(patients):
    """Rows of medians/IQRs (Mann-Whitney) and counts/percentages (Fisher's exact)."""
    patients = list(patients)
    rows = []
    n_pos = sum(p.label for p in patients)
    rows.append({"variable": "n", "reflow": str(len(patients) - n_pos), "no_reflow": str(n_pos),
                 "test": None, "p_value": None})
    for attr in CONTINUOUS:
        pairs = [(getattr(p, attr), p.label) for p in patients if getattr(p, attr) is not None]
        pos = np.array([v for v, y in pairs if y == 1], dtype=float)
        neg = np.array([v for v, y in pairs if y == 0], dtype=float)
        p_value = mann_whitney_u(pos, neg, "two_sided").p_value if pos.size and neg.size else None
        rows.append({"variable": f"{attr} (median [IQR])", "reflow": _median_iqr(neg), "no_reflow": _median_iqr(pos),
                     "test": "mann_whitney_u", "p_value": p_value})
    for name, attr, is_yes in CATEGORICAL:
        pairs = [(is_yes(getattr(p, attr)), p.label) for p in patients if getattr(p, attr) is not None]
        counts = {(yes, y): sum(1 for a, b in pairs if a == yes and b == y) for yes in (True, False) for y in (0, 1)}
        table = [[counts[(True, 1)], counts[(False, 1)]], [counts[(True, 0)], counts[(False, 0)]]]
        res = fisher_exact(table)

        def fmt(y):
            total = counts[(True, y)] + counts[(False, y)]
            pct = 100.0 * counts[(True, y)] / total if total else 0.0
            return f"{counts[(True, y)]} ({pct:.1f})"

        rows.append({"variable": f"{name} (%)", "reflow": fmt(0), "no_reflow": fmt(1),
                     "test": "fisher_exact", "p_value": res.p_value})
    return rows
