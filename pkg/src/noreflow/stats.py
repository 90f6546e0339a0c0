"""Nonparametric tests, Holm step-down correction and classification metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllZeroDifferences, EmptySample, OutOfRangeP, SingleClass

ALTERNATIVES = ("less", "greater", "two_sided")
MWU_EXACT_MAX_N = 20
WILCOXON_EXACT_MAX_N = 25


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    alternative: str
    flags: tuple = ()

    def as_dict(self):
        return {
            "statistic": self.statistic, "p_value": self.p_value, "method": self.method,
            "alternative": self.alternative, "flags": list(self.flags),
        }


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0 or self.total < 1:
            raise ValueError("confusion counts must be non-negative with total >= 1")

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def _alternative(alt):
    alt = alt.replace("-", "_")
    if alt not in ALTERNATIVES:
        raise ValueError(f"alternative must be one of {ALTERNATIVES}, got {alt!r}")
    return alt


def _norm_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _tail_p(p_less, p_greater, alternative):
    if alternative == "less":
        p = p_less
    elif alternative == "greater":
        p = p_greater
    else:
        p = 2.0 * min(p_less, p_greater)
    return min(1.0, max(0.0, p))


def _normal_p(stat, mu, var, alternative):
    """Normal approximation with a 0.5 continuity correction."""
    if var <= 0.0:
        return 1.0
    sd = math.sqrt(var)
    if alternative == "greater":
        p = _norm_sf((stat - mu - 0.5) / sd)
    elif alternative == "less":
        p = 1.0 - _norm_sf((stat - mu + 0.5) / sd)
    else:
        p = 2.0 * _norm_sf((abs(stat - mu) - 0.5) / sd)
    return min(1.0, max(0.0, p))


def midranks(x):
    """1-based ranks with ties sharing their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(x.size)
    sorted_x = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_sizes(x):
    _, counts = np.unique(np.asarray(x, dtype=float), return_counts=True)
    return counts


# -- Mann-Whitney U -----------------------------------------------------------


def mwu_exact_distribution(n1, n2):
    """Counts of each U value (0..n1*n2) over all C(n1+n2, n1) labelings.

    Gaussian-binomial recursion: c(i, j) = c(i-1, j) shifted by j + c(i, j-1).
    """
    # row[j] holds the count vector for (i, j) with i fixed
    row = [np.ones(1) for _ in range(n2 + 1)]
    for i in range(1, n1 + 1):
        new = [np.ones(1)]
        for j in range(1, n2 + 1):
            size = i * j + 1
            c = np.zeros(size)
            prev = row[j]  # (i-1, j): append an element of sample 1 above all j of sample 2
            c[j:j + prev.size] += prev
            left = new[j - 1]  # (i, j-1)
            c[:left.size] += left
            new.append(c)
        row = new
    return row[n2]


def mann_whitney_u(a, b, alternative="two_sided", method="auto"):
    """U statistic of ``a`` against ``b`` with exact or normal-approximation p.

    ``greater`` tests whether ``a`` tends to exceed ``b``.  ``method="auto"``
    uses the exact null when the pooled size is at most 20 and there are no
    ties; otherwise a tie- and continuity-corrected normal approximation.
    """
    alternative = _alternative(alternative)
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptySample("both samples must be non-empty")
    n1, n2 = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    ties = _tie_sizes(pooled)
    has_ties = bool((ties > 1).any())
    if method == "auto":
        method = "exact" if (n1 + n2 <= MWU_EXACT_MAX_N and not has_ties) else "normal_approx"
    if method == "exact":
        if has_ties:
            raise ValueError("exact Mann-Whitney path requires tie-free samples")
        counts = mwu_exact_distribution(n1, n2)
        total = counts.sum()
        k = int(round(u))
        p_less = counts[:k + 1].sum() / total
        p_greater = counts[k:].sum() / total
        p = _tail_p(p_less, p_greater, alternative)
    elif method == "normal_approx":
        n = n1 + n2
        mu = n1 * n2 / 2.0
        tie_term = float(np.sum(ties ** 3 - ties)) / (n * (n - 1)) if n > 1 else 0.0
        var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
        p = _normal_p(u, mu, var, alternative)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TestResult(u, float(p), method, alternative)


# -- Wilcoxon signed-rank -----------------------------------------------------


def signed_rank_distribution(ranks):
    """Counts of 2*W+ over all 2^n sign patterns of the given (mid)ranks."""
    weights = [int(round(2 * r)) for r in ranks]
    counts = np.zeros(sum(weights) + 1)
    counts[0] = 1.0
    reach = 0
    for w in weights:
        counts[w:reach + w + 1] += counts[:reach + 1].copy()
        reach += w
    return counts


def wilcoxon_signed_rank(diffs, alternative="greater", method="auto"):
    """Signed-rank test on paired differences, zeros dropped.

    ``greater`` tests whether the differences tend to be positive.  The exact
    null conditions on the observed (mid)ranks, so ties among |d| are allowed.
    """
    alternative = _alternative(alternative)
    d = np.asarray(diffs, dtype=float).ravel()
    d = d[d != 0.0]
    if d.size == 0:
        raise AllZeroDifferences("every paired difference is zero")
    n = d.size
    ranks = midranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if method == "auto":
        method = "exact" if n <= WILCOXON_EXACT_MAX_N else "normal_approx"
    if method == "exact":
        counts = signed_rank_distribution(ranks)
        total = counts.sum()
        k = int(round(2 * w_plus))
        p_less = counts[:k + 1].sum() / total
        p_greater = counts[k:].sum() / total
        p = _tail_p(p_less, p_greater, alternative)
    elif method == "normal_approx":
        ties = _tie_sizes(np.abs(d))
        mu = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(ties ** 3 - ties)) / 48.0
        p = _normal_p(w_plus, mu, var, alternative)
    else:
        raise ValueError(f"unknown method {method!r}")
    return TestResult(w_plus, float(p), method, alternative)


# -- Holm-Bonferroni ----------------------------------------------------------


def holm_bonferroni(pvalues):
    """Holm step-down adjusted p-values, returned in input order."""
    p = np.asarray(pvalues, dtype=float).ravel()
    if p.size == 0:
        return []
    if not np.all((p >= 0.0) & (p <= 1.0)):
        raise OutOfRangeP(f"p-values must lie in [0, 1], got {p.tolist()}")
    m = p.size
    order = np.argsort(p, kind="mergesort")
    scaled = p[order] * (m - np.arange(m))
    adjusted_sorted = np.minimum(np.maximum.accumulate(scaled), 1.0)
    out = np.empty(m)
    out[order] = adjusted_sorted
    return out.tolist()


# -- Fisher's exact -----------------------------------------------------------


def fisher_exact(table, alternative="two_sided"):
    """2x2 Fisher exact test.

    Two-sided p sums every table with the observed margins whose
    hypergeometric probability does not exceed the observed one.  The
    comparison is done on exact integer numerators.  A zero margin yields
    p = 1.0 with a ``degenerate_margins`` flag.
    """
    alternative = _alternative(alternative)
    (a, b), (c, d) = [[int(v) for v in row] for row in table]
    if min(a, b, c, d) < 0:
        raise ValueError("table entries must be non-negative")
    odds = (a * d) / (b * c) if b * c else (math.inf if a * d else math.nan)
    r1, r2, c1 = a + b, c + d, a + c
    n = r1 + r2
    if 0 in (r1, r2, c1, n - c1):
        return TestResult(odds, 1.0, "exact", alternative, ("degenerate_margins",))
    lo, hi = max(0, c1 - r2), min(r1, c1)
    weights = {k: math.comb(r1, k) * math.comb(r2, c1 - k) for k in range(lo, hi + 1)}
    denom = math.comb(n, c1)
    if alternative == "less":
        num = sum(w for k, w in weights.items() if k <= a)
    elif alternative == "greater":
        num = sum(w for k, w in weights.items() if k >= a)
    else:
        observed = weights[a]
        num = sum(w for w in weights.values() if w <= observed)
    return TestResult(odds, min(1.0, num / denom), "exact", alternative)


# -- classification metrics ---------------------------------------------------


def auroc(scores, labels):
    """Probability that a random positive outscores a random negative (ties count 1/2)."""
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel().astype(int)
    if s.size != y.size:
        raise ValueError("scores and labels differ in length")
    pos, neg = s[y == 1], s[y == 0]
    if pos.size == 0 or neg.size == 0:
        raise SingleClass("AUROC needs both classes")
    diff = pos[:, None] - neg[None, :]
    wins = np.count_nonzero(diff > 0) + 0.5 * np.count_nonzero(diff == 0)
    return float(wins / (pos.size * neg.size))


def confusion_counts(scores, labels, threshold=0.5):
    """Counts with a positive call whenever score >= threshold."""
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel().astype(int)
    pred = s >= threshold
    return ConfusionCounts(
        tp=int(np.sum(pred & (y == 1))), fp=int(np.sum(pred & (y == 0))),
        tn=int(np.sum(~pred & (y == 0))), fn=int(np.sum(~pred & (y == 1))),
    )


def _ratio(num, den):
    return num / den if den else None


def f1_from(precision, recall):
    if precision is None or recall is None or precision + recall == 0:
        return None
    return 2.0 * precision * recall / (precision + recall)


def confusion_metrics(counts):
    """Accuracy, recall, specificity, precision and F1; ``None`` marks a zero denominator."""
    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    return {
        "accuracy": _ratio(tp + tn, counts.total),
        "recall": _ratio(tp, tp + fn),
        "specificity": _ratio(tn, tn + fp),
        "precision": _ratio(tp, tp + fp),
        "f1": _ratio(2 * tp, 2 * tp + fp + fn),
    }


METRIC_NAMES = ("auroc", "accuracy", "recall", "specificity", "f1", "precision")


def classification_metrics(scores, labels, threshold=0.5):
    """Full metric row; AUROC is ``None`` when only one class is present."""
    y = np.asarray(labels).astype(int)
    counts = confusion_counts(scores, y, threshold)
    out = {"auroc": auroc(scores, y) if 0 < y.sum() < y.size else None}
    out.update(confusion_metrics(counts))
    out.update({"tp": counts.tp, "fp": counts.fp, "tn": counts.tn, "fn": counts.fn, "n": counts.total})
    return out
