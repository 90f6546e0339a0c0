"""Straight-line reference implementations used as test oracles.

Plain Python loops over lists, written from the feature and test
definitions without looking at the package code paths.
"""
import itertools
import math
from fractions import Fraction


# -- features -----------------------------------------------------------------


def o_max(x):
    m = x[0]
    for v in x:
        if v > m:
            m = v
    return m


def o_min(x):
    m = x[0]
    for v in x:
        if v < m:
            m = v
    return m


def o_half_width(x):
    h = 0.5 * o_max(x)
    idx = [t for t in range(1, len(x) + 1) if x[t - 1] > h]
    if not idx:
        return 0
    return max(idx) - min(idx)


def o_max_slope(x):
    return max(x[t] - x[t - 1] for t in range(1, len(x)))


def o_mean(x):
    s = 0.0
    for v in x:
        s += v
    return s / len(x)


def o_pstd(x):
    mu = o_mean(x)
    s = 0.0
    for v in x:
        s += (v - mu) ** 2
    return math.sqrt(s / len(x))


def o_std_moment(x, k):
    mu, sd = o_mean(x), o_pstd(x)
    s = 0.0
    for v in x:
        s += ((v - mu) / sd) ** k
    return s / len(x)


def o_t_alpha(x, alpha):
    m = o_max(x)
    for t in range(1, len(x) + 1):
        if x[t - 1] >= alpha * m:
            return t
    raise AssertionError("unreachable")


def o_decay(x, frac=0.1):
    m = o_max(x)
    tp = o_t_alpha(x, 1.0)
    for t in range(tp + 1, len(x) + 1):
        if x[t - 1] <= frac * m:
            return t
    return len(x)


def o_decay_literal(x):
    m = o_max(x)
    tp = o_t_alpha(x, 1.0)
    for t in range(tp + 1, len(x) + 1):
        if x[t - 1] >= 0.9 * m:
            return t
    return len(x)


def o_plateau(x, eps=0.01):
    n = 0
    for t in range(2, len(x) + 1):
        if abs(x[t - 1] - x[t - 2]) < eps:
            n += 1
    return n


def o_pearson(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    ma, mb = o_mean(a), o_mean(b)
    sab = saa = sbb = 0.0
    for i in range(n):
        sab += (a[i] - ma) * (b[i] - mb)
        saa += (a[i] - ma) ** 2
        sbb += (b[i] - mb) ** 2
    return sab / math.sqrt(saa * sbb)


def o_combination(pre, post):
    """All fifteen pre/post features keyed by their short names."""
    return {
        "peakHeight": o_max(post) - o_max(pre),
        "peakWidth": o_half_width(post) - o_half_width(pre),
        "peakRatio": o_max(post) / o_max(pre),
        "peakSlope": o_max_slope(post) - o_max_slope(pre),
        "meanIntensity": o_mean(post) - o_mean(pre),
        "stdDevIntensity": o_pstd(post) - o_pstd(pre),
        "minIntensity": o_min(post) - o_min(pre),
        "meanIntensityRatio": o_mean(post) / o_mean(pre),
        "skewness": o_std_moment(post, 3) - o_std_moment(pre, 3),
        "kurtosis": o_std_moment(post, 4) - o_std_moment(pre, 4),
        "timeTo50Max": o_t_alpha(post, 0.5) - o_t_alpha(pre, 0.5),
        "timeToPeak": o_t_alpha(pre, 1.0) - o_t_alpha(post, 1.0),
        "decayTime": o_decay(post) - o_decay(pre),
        "plateauDuration": o_plateau(post) - o_plateau(pre),
        "signalCorrelation": o_pearson(pre, post),
    }


def o_single(x):
    return {
        "peakHeight": o_max(x),
        "peakWidth": o_half_width(x),
        "peakSlope": o_max_slope(x),
        "meanIntensity": o_mean(x),
        "stdDevIntensity": o_pstd(x),
        "minIntensity": o_min(x),
        "skewness": o_std_moment(x, 3),
        "kurtosis": o_std_moment(x, 4),
        "timeTo50Max": o_t_alpha(x, 0.5),
        "timeToPeak": o_t_alpha(x, 1.0),
        "decayTime": o_decay(x),
        "plateauDuration": o_plateau(x),
    }


def o_raw(x, L=15, beta=0.5):
    n = len(x)
    if n >= L:
        return list(x[:L])
    out = list(x)
    for t in range(n + 1, L + 1):
        v = x[-1] * (math.exp(-beta * (t - n + 1)) - math.exp(-beta * (L - n))) / (1 - math.exp(-beta * (L - n)))
        out.append(v if v > 0 else 0.0)
    return out


# -- statistics ---------------------------------------------------------------


def o_mwu_u(a, b):
    u = 0.0
    for x in a:
        for y in b:
            u += 1.0 if x > y else (0.5 if x == y else 0.0)
    return u


def o_mwu_exact(a, b, alternative):
    """p by relabeling every split of the pooled sample."""
    pooled = list(a) + list(b)
    n1 = len(a)
    u_obs = o_mwu_u(a, b)
    n_le = n_ge = total = 0
    for chosen in itertools.combinations(range(len(pooled)), n1):
        sa = [pooled[i] for i in chosen]
        sb = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        u = o_mwu_u(sa, sb)
        total += 1
        n_le += u <= u_obs
        n_ge += u >= u_obs
    return _tails(Fraction(n_le, total), Fraction(n_ge, total), alternative)


def _tails(p_less, p_greater, alternative):
    if alternative == "less":
        return float(p_less)
    if alternative == "greater":
        return float(p_greater)
    return float(min(Fraction(1), 2 * min(p_less, p_greater)))


def o_ranks_abs(d):
    a = [abs(v) for v in d]
    ranks = []
    for v in a:
        below = sum(1 for w in a if w < v)
        equal = sum(1 for w in a if w == v)
        ranks.append(below + (equal + 1) / 2.0)
    return ranks


def o_wilcoxon_exact(d, alternative):
    d = [v for v in d if v != 0]
    ranks = o_ranks_abs(d)
    w_obs = sum(r for r, v in zip(ranks, d) if v > 0)
    n_le = n_ge = total = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        w = sum(r for r, s in zip(ranks, signs) if s)
        total += 1
        n_le += w <= w_obs + 1e-9
        n_ge += w >= w_obs - 1e-9
    return _tails(Fraction(n_le, total), Fraction(n_ge, total), alternative)


def o_fisher(table):
    (a, b), (c, d) = table
    r1, r2, c1 = a + b, c + d, a + c
    n = r1 + r2

    def prob(k):
        return Fraction(math.comb(r1, k) * math.comb(r2, c1 - k), math.comb(n, c1))

    p_obs = prob(a)
    total = Fraction(0)
    for k in range(0, min(r1, c1) + 1):
        if c1 - k > r2:
            continue
        if prob(k) <= p_obs:
            total += prob(k)
    return float(total)


def o_auroc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            wins += 1.0 if p > q else (0.5 if p == q else 0.0)
    return wins / (len(pos) * len(neg))


# -- boosting -----------------------------------------------------------------


def o_sigmoid(v):
    v = max(-35.0, min(35.0, v))
    return 1.0 / (1.0 + math.exp(-v))


def o_fit_gbm(X, y, n_estimators=10, max_depth=3, learning_rate=0.9, min_leaf=2):
    """Brute-force boosting with the documented split and tie rules.

    Returns a predict(row) -> score closure.
    """
    n, nf = len(X), len(X[0])
    prev = sum(y) / n
    init = math.log(prev / (1 - prev))
    F = [init] * n
    trees = []

    def grow(idx, depth, r, h):
        value = sum(r[i] for i in idx) / max(sum(h[i] for i in idx), 1e-12)
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return ("leaf", value)
        s = sum(r[i] for i in idx)
        cands = []
        for f in range(nf):
            vals = sorted(set(X[i][f] for i in idx))
            for lo, hi in zip(vals, vals[1:]):
                thr = 0.5 * (lo + hi)
                if not lo <= thr < hi:
                    thr = lo
                L = [i for i in idx if X[i][f] <= thr]
                R = [i for i in idx if X[i][f] > thr]
                if len(L) < min_leaf or len(R) < min_leaf:
                    continue
                sl = sum(r[i] for i in L)
                sr = sum(r[i] for i in R)
                gain = sl * sl / len(L) + sr * sr / len(R) - s * s / len(idx)
                cands.append((f, thr, gain, L, R))
        if not cands:
            return ("leaf", value)
        best = max(c[2] for c in cands)
        if best <= 1e-12:
            return ("leaf", value)
        f, thr, _, L, R = next(c for c in cands if c[2] >= best - 1e-12 * max(1.0, best))
        return ("split", f, thr, grow(L, depth + 1, r, h), grow(R, depth + 1, r, h))

    def walk(node, row):
        while node[0] == "split":
            node = node[3] if row[node[1]] <= node[2] else node[4]
        return node[1]

    for _ in range(n_estimators):
        p = [o_sigmoid(v) for v in F]
        r = [y[i] - p[i] for i in range(n)]
        h = [p[i] * (1 - p[i]) for i in range(n)]
        tree = grow(list(range(n)), 0, r, h)
        trees.append(tree)
        F = [F[i] + learning_rate * walk(tree, X[i]) for i in range(n)]

    def predict(row):
        v = init
        for t in trees:
            v += learning_rate * walk(t, row)
        return o_sigmoid(v)

    return predict
