"""PEAK, SIPS, FLOW and RAW descriptors of aligned perfusion signals.

All time indices are 1-based frame numbers, so a timing feature of 3 means
the third sample after onset.  Moments are population moments and kurtosis
is the plain fourth standardized moment (no -3).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateLength, MissingSignal, ParseError, ZeroMean, ZeroPeak, ZeroVariance
from .ingest import VIEWS

GROUPS = ("PEAK", "SIPS", "FLOW", "RAW", "CLN")
TSF_GROUPS = ("PEAK", "SIPS", "FLOW")
MODES = ("combination", "post_only", "pre_only")
MODE_TAGS = {"combination": "comb", "post_only": "post", "pre_only": "pre"}

COMBINATION_NAMES = {
    "PEAK": ("peakHeight", "peakWidth", "peakRatio", "peakSlope"),
    "SIPS": ("meanIntensity", "stdDevIntensity", "minIntensity", "meanIntensityRatio", "skewness", "kurtosis"),
    "FLOW": ("timeTo50Max", "timeToPeak", "decayTime", "plateauDuration", "signalCorrelation"),
}
# single-signal analogues: ratios and the pre/post correlation have no one-signal form
SINGLE_NAMES = {
    "PEAK": ("peakHeight", "peakWidth", "peakSlope"),
    "SIPS": ("meanIntensity", "stdDevIntensity", "minIntensity", "skewness", "kurtosis"),
    "FLOW": ("timeTo50Max", "timeToPeak", "decayTime", "plateauDuration"),
}


@dataclass(frozen=True)
class FeatureConfig:
    groups: tuple = ("SIPS", "FLOW")
    mode: str = "post_only"
    views: tuple = VIEWS
    raw_length: int = 15
    beta: float = 0.5
    plateau_epsilon: float = 0.01
    onset_epsilon: float = 0.01
    decay_fraction: float = 0.1
    decay_literal_mode: bool = False
    raw_fill: str = "printed"

    def __post_init__(self):
        groups = tuple(g for g in GROUPS if g in set(self.groups))
        unknown = set(self.groups) - set(GROUPS)
        if unknown or not groups:
            raise ValueError(f"groups must be a non-empty subset of {GROUPS}, got {self.groups}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        views = tuple(v for v in VIEWS if v in set(self.views))
        if set(self.views) - set(VIEWS):
            raise ValueError(f"views must be a subset of {VIEWS}, got {self.views}")
        if self.raw_length < 2:
            raise DegenerateLength(f"raw_length must be >= 2, got {self.raw_length}")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.raw_fill not in ("printed", "continuity"):
            raise ValueError("raw_fill must be 'printed' or 'continuity'")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "views", views)

    @property
    def tsf_groups(self):
        return tuple(g for g in self.groups if g in TSF_GROUPS)


@dataclass(frozen=True)
class FeatureVector:
    names: tuple
    values: np.ndarray
    patient_id: str = ""

    def __post_init__(self):
        names = tuple(self.names)
        values = np.array(self.values, dtype=float).reshape(-1)
        if len(names) != values.size:
            raise ValueError(f"{len(names)} names for {values.size} values")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    def as_dict(self):
        return dict(zip(self.names, self.values.tolist()))

    def __len__(self):
        return len(self.names)


def _values(signal):
    return np.asarray(getattr(signal, "values", signal), dtype=float)


# -- single-signal primitives -------------------------------------------------


def half_max_width(x):
    """Last minus first frame strictly above half the maximum (0 if none)."""
    above = np.flatnonzero(x > 0.5 * x.max())
    if above.size == 0:
        return 0.0
    return float(above[-1] - above[0])


def max_slope(x):
    return float(np.diff(x).max()) if x.size > 1 else 0.0


def time_to_fraction(x, alpha):
    """Earliest 1-based frame with x >= alpha * max(x)."""
    return int(np.flatnonzero(x >= alpha * x.max())[0]) + 1


def decay_time(x, fraction=0.1, literal=False):
    """First frame after the peak that falls to ``fraction`` of the maximum.

    ``literal`` switches to the printed-formula reading: first frame after the
    peak that is still at or above 0.9 of the maximum.  Never reached -> len(x).
    """
    peak = time_to_fraction(x, 1.0)
    after = np.arange(peak + 1, x.size + 1)
    tail = x[peak:]
    hits = tail >= 0.9 * x.max() if literal else tail <= fraction * x.max()
    found = after[hits]
    return int(found[0]) if found.size else int(x.size)


def plateau_count(x, eps=0.01):
    return int(np.count_nonzero(np.abs(np.diff(x)) < eps))


def moments(x):
    """Population mean, sd, skewness and (non-excess) kurtosis."""
    mu = float(x.mean())
    if x.max() == x.min():
        # exact test: the mean of a constant can differ from it by an ulp
        return mu, 0.0, None, None
    sd = float(np.sqrt(np.mean((x - mu) ** 2)))
    z = (x - mu) / sd
    return mu, sd, float(np.mean(z ** 3)), float(np.mean(z ** 4))


def pearson(a, b):
    n = min(a.size, b.size)
    if a[:n].max() == a[:n].min() or b[:n].max() == b[:n].min():
        raise ZeroVariance("correlation undefined for a constant signal")
    a = a[:n] - a[:n].mean()
    b = b[:n] - b[:n].mean()
    denom = math.sqrt(float(np.sum(a * a)) * float(np.sum(b * b)))
    if denom == 0.0:
        raise ZeroVariance("correlation undefined for a constant signal")
    return float(np.sum(a * b)) / denom


def _higher_moments(x, which):
    mu, sd, skew, kurt = moments(x)
    if skew is None:
        raise ZeroVariance(f"{which} signal is constant; skewness/kurtosis undefined")
    return skew, kurt


# -- pre/post combination features -------------------------------------------


def peak_features(pre, post, cfg=None):
    x0, x1 = _values(pre), _values(post)
    m0, m1 = float(x0.max()), float(x1.max())
    if m0 == 0.0:
        raise ZeroPeak("pre-procedure maximum is zero; peak ratio undefined")
    return {
        "peakHeight": m1 - m0,
        "peakWidth": half_max_width(x1) - half_max_width(x0),
        "peakRatio": m1 / m0,
        "peakSlope": max_slope(x1) - max_slope(x0),
    }


def sips_features(pre, post, cfg=None):
    x0, x1 = _values(pre), _values(post)
    mu0, sd0, _, _ = moments(x0)
    mu1, sd1, _, _ = moments(x1)
    if mu0 == 0.0:
        raise ZeroMean("pre-procedure mean is zero; mean ratio undefined")
    sk0, ku0 = _higher_moments(x0, "pre")
    sk1, ku1 = _higher_moments(x1, "post")
    return {
        "meanIntensity": mu1 - mu0,
        "stdDevIntensity": sd1 - sd0,
        "minIntensity": float(x1.min() - x0.min()),
        "meanIntensityRatio": mu1 / mu0,
        "skewness": sk1 - sk0,
        "kurtosis": ku1 - ku0,
    }


def flow_features(pre, post, cfg=None):
    cfg = cfg or FeatureConfig()
    x0, x1 = _values(pre), _values(post)
    decay = lambda x: decay_time(x, cfg.decay_fraction, cfg.decay_literal_mode)
    return {
        "timeTo50Max": float(time_to_fraction(x1, 0.5) - time_to_fraction(x0, 0.5)),
        # pre minus post, in that order
        "timeToPeak": float(time_to_fraction(x0, 1.0) - time_to_fraction(x1, 1.0)),
        "decayTime": float(decay(x1) - decay(x0)),
        "plateauDuration": float(plateau_count(x1, cfg.plateau_epsilon) - plateau_count(x0, cfg.plateau_epsilon)),
        "signalCorrelation": pearson(x0, x1),
    }


# -- single-signal analogues --------------------------------------------------


def single_peak_features(signal, cfg=None):
    x = _values(signal)
    return {"peakHeight": float(x.max()), "peakWidth": half_max_width(x), "peakSlope": max_slope(x)}


def single_sips_features(signal, cfg=None):
    x = _values(signal)
    mu, sd, _, _ = moments(x)
    skew, kurt = _higher_moments(x, "input")
    return {
        "meanIntensity": mu, "stdDevIntensity": sd, "minIntensity": float(x.min()),
        "skewness": skew, "kurtosis": kurt,
    }


def single_flow_features(signal, cfg=None):
    cfg = cfg or FeatureConfig()
    x = _values(signal)
    return {
        "timeTo50Max": float(time_to_fraction(x, 0.5)),
        "timeToPeak": float(time_to_fraction(x, 1.0)),
        "decayTime": float(decay_time(x, cfg.decay_fraction, cfg.decay_literal_mode)),
        "plateauDuration": float(plateau_count(x, cfg.plateau_epsilon)),
    }


COMBINATION_FUNCS = {"PEAK": peak_features, "SIPS": sips_features, "FLOW": flow_features}
SINGLE_FUNCS = {"PEAK": single_peak_features, "SIPS": single_sips_features, "FLOW": single_flow_features}


# -- fixed-length RAW vector --------------------------------------------------


def raw_vector(post, cfg=None):
    """First L samples of the post signal, exponentially extrapolated when short.

    The fill for t = n+1..L is
    f[n] * (exp(-b(t-n+1)) - exp(-b(L-n))) / (1 - exp(-b(L-n))), clamped at 0.
    With ``raw_fill="continuity"`` the first exponent uses t-n-1 instead, which
    starts the fill at f[n].
    """
    cfg = cfg or FeatureConfig()
    L, beta = cfg.raw_length, cfg.beta
    if L < 2:
        raise DegenerateLength(f"raw length must be >= 2, got {L}")
    x = _values(post)
    n = x.size
    if n == 0:
        raise DegenerateLength("empty signal")
    if n >= L:
        return x[:L].copy()
    out = np.empty(L)
    out[:n] = x
    t = np.arange(n + 1, L + 1, dtype=float)
    offset = -1.0 if cfg.raw_fill == "continuity" else 1.0
    tail = np.exp(-beta * (L - n))
    fill = x[-1] * (np.exp(-beta * (t - n + offset)) - tail) / (1.0 - tail)
    out[n:] = np.maximum(fill, 0.0)
    return out


# -- assembly -----------------------------------------------------------------


def feature_names(cfg):
    """Deterministic feature name list for ``cfg`` (RAW after time-series groups)."""
    names = []
    tag = MODE_TAGS[cfg.mode]
    table = COMBINATION_NAMES if cfg.mode == "combination" else SINGLE_NAMES
    for view in cfg.views:
        for group in cfg.tsf_groups:
            names.extend(f"{view}.{tag}.{group.lower()}.{n}" for n in table[group])
        if "RAW" in cfg.groups:
            width = len(str(cfg.raw_length))
            names.extend(f"{view}.post.raw.f{i:0{width}d}" for i in range(1, cfg.raw_length + 1))
    return names


def _get(signals, phase, view):
    try:
        return signals[(phase, view)]
    except KeyError:
        raise MissingSignal(f"missing {phase}/{view} signal") from None


def extract_all(signals, cfg, patient_id=""):
    """Feature vector from a {(phase, view): PerfusionSignal} map.

    CLN is not produced here; clinical encoding needs training-fold
    statistics and happens inside cross-validation.
    """
    values = []
    for view in cfg.views:
        for group in cfg.tsf_groups:
            if cfg.mode == "combination":
                pre, post = _get(signals, "pre", view), _get(signals, "post", view)
                feats = COMBINATION_FUNCS[group](pre, post, cfg)
                values.extend(feats[n] for n in COMBINATION_NAMES[group])
            else:
                phase = "post" if cfg.mode == "post_only" else "pre"
                feats = SINGLE_FUNCS[group](_get(signals, phase, view), cfg)
                values.extend(feats[n] for n in SINGLE_NAMES[group])
        if "RAW" in cfg.groups:
            values.extend(raw_vector(_get(signals, "post", view), cfg).tolist())
    return FeatureVector(feature_names(cfg), values, patient_id)


def select(vector, names):
    """Sub-vector restricted to ``names`` (order of ``names``)."""
    lookup = vector.as_dict()
    return FeatureVector(tuple(names), [lookup[n] for n in names], vector.patient_id)


# -- CSV ----------------------------------------------------------------------


def format_float(value):
    return repr(float(value))


def write_feature_csv(vectors, path):
    vectors = list(vectors)
    if not vectors:
        raise ValueError("no feature vectors to write")
    names = vectors[0].names
    for v in vectors:
        if v.names != names:
            raise ValueError(f"{v.patient_id}: feature names differ from first row")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["patient_id", *names])
        for v in vectors:
            writer.writerow([v.patient_id, *(format_float(x) for x in v.values)])
    return path


def read_feature_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0] != "patient_id":
        raise ParseError("header must start with 'patient_id'", f"{path}: line 1")
    names = tuple(rows[0][1:])
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(names) + 1:
            raise ParseError(f"expected {len(names) + 1} fields, got {len(row)}", f"{path}: line {lineno}")
        try:
            vals = [float(x) for x in row[1:]]
        except ValueError as exc:
            raise ParseError(str(exc), f"{path}: line {lineno}") from None
        out.append(FeatureVector(names, vals, row[0]))
    return out
