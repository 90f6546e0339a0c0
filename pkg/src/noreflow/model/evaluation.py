"""Leave-one-out evaluation, view ensembling, ablations and subgroup tables."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..errors import (
    AllZeroDifferences,
    EmptyClass,
    EmptyGrid,
    MissingCovariate,
    NoReflowError,
    PatientSetMismatch,
    SingleClassTraining,
)
from ..features import MODE_TAGS, MODES, TSF_GROUPS, FeatureConfig, extract_all
from ..ingest import VIEWS
from ..stats import (
    TestResult,
    classification_metrics,
    holm_bonferroni,
    mann_whitney_u,
    wilcoxon_signed_rank,
)
from .gbm import GbmConfig, fit_gbm

CLINICAL_NAMES = ("clinical.age", "clinical.sex", "clinical.mtici")
FEATURE_SETS = ("CLN", "TSF", "RAW")
VIEW_STRATEGIES = ("ensemble", "concat")


# -- clinical encoding --------------------------------------------------------


@dataclass(frozen=True)
class ClinicalEncoder:
    """Age z-scored with training-fold mean and sample sd; sex and mTICI as 0/1."""

    age_mean: float
    age_sd: float
    zero_variance: bool = False

    @classmethod
    def fit(cls, patients):
        if not patients:
            raise ValueError("clinical encoder needs at least one training patient")
        ages = np.array([p.age for p in patients], dtype=float)
        sd = float(ages.std(ddof=1)) if ages.size > 1 else 0.0
        return cls(float(ages.mean()), sd, sd == 0.0)

    def transform(self, patient):
        z = 0.0 if self.zero_variance else (patient.age - self.age_mean) / self.age_sd
        return np.array([z, float(patient.sex == "male"), float(patient.mtici == "3")])


def encode_clinical(training, target):
    return ClinicalEncoder.fit(list(training)).transform(target)


# -- cohort container and design matrices -------------------------------------


@dataclass(frozen=True)
class CohortData:
    """Patients plus their aligned signals keyed by (phase, view)."""

    patients: tuple
    signals: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "patients", tuple(self.patients))

    @property
    def ids(self):
        return [p.id for p in self.patients]

    @property
    def labels(self):
        return np.array([p.label for p in self.patients], dtype=int)

    def without(self, patient_id):
        return CohortData(
            tuple(p for p in self.patients if p.id != patient_id),
            {k: v for k, v in self.signals.items() if k != patient_id},
        )


@dataclass(frozen=True)
class EvalConfig:
    features: FeatureConfig = field(default_factory=lambda: FeatureConfig(groups=("CLN", "SIPS", "FLOW", "RAW")))
    view_strategy: str = "ensemble"
    threshold: float = 0.5

    def __post_init__(self):
        if self.view_strategy not in VIEW_STRATEGIES:
            raise ValueError(f"view_strategy must be one of {VIEW_STRATEGIES}")

    @property
    def feature_sets(self):
        groups = set(self.features.groups)
        out = []
        if "CLN" in groups:
            out.append("CLN")
        if groups & set(TSF_GROUPS):
            out.append("TSF")
        if "RAW" in groups:
            out.append("RAW")
        return tuple(out)

    @property
    def label(self):
        return "+".join(self.feature_sets)

    def describe(self):
        f = self.features
        return {
            "feature_sets": list(self.feature_sets),
            "groups": list(f.groups),
            "mode": f.mode,
            "views": list(f.views) if self.feature_sets != ("CLN",) else [],
            "view_strategy": self.view_strategy,
            "threshold": self.threshold,
            "raw_length": f.raw_length,
            "beta": f.beta,
            "decay_literal_mode": f.decay_literal_mode,
            "raw_fill": f.raw_fill,
        }


def make_eval_config(sets=("CLN", "TSF", "RAW"), tsf_groups=("SIPS", "FLOW"), mode="post_only",
                     views=VIEWS, view_strategy="ensemble", threshold=0.5, **feature_kwargs):
    unknown = set(sets) - set(FEATURE_SETS)
    if unknown or not sets:
        raise ValueError(f"feature sets must be a non-empty subset of {FEATURE_SETS}")
    groups = []
    if "CLN" in sets:
        groups.append("CLN")
    if "TSF" in sets:
        groups.extend(tsf_groups)
    if "RAW" in sets:
        groups.append("RAW")
    fcfg = FeatureConfig(groups=tuple(groups), mode=mode, views=tuple(views), **feature_kwargs)
    return EvalConfig(fcfg, view_strategy, threshold)


@dataclass(frozen=True)
class DesignUnit:
    """Columns for one independently trained model (one view, or all views)."""

    name: str
    ts_names: tuple
    ts: np.ndarray
    raw_names: tuple
    raw: np.ndarray
    clinical: bool

    @property
    def feature_names(self):
        return self.ts_names + self.raw_names + (CLINICAL_NAMES if self.clinical else ())


@dataclass(frozen=True)
class FoldStats:
    held_out: str
    age_mean: Optional[float]
    age_sd: Optional[float]
    ts_mean: tuple
    ts_sd: tuple


def _split_columns(names, matrix, prefix=None):
    ts_idx, raw_idx = [], []
    for j, name in enumerate(names):
        view, _, group, _ = name.split(".", 3)
        if prefix is not None and view != prefix:
            continue
        (raw_idx if group == "raw" else ts_idx).append(j)
    return (
        tuple(names[j] for j in ts_idx), matrix[:, ts_idx],
        tuple(names[j] for j in raw_idx), matrix[:, raw_idx],
    )


def feature_table(data, fcfg, jobs=1):
    """Per-patient feature vectors (CLN excluded) in cohort order."""
    groups = tuple(g for g in fcfg.groups if g != "CLN")
    if not groups:
        return []
    cfg = replace(fcfg, groups=groups)
    work = lambda p: extract_all(data.signals[p.id], cfg, p.id)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(work, data.patients))
    return [work(p) for p in data.patients]


def build_units(data, cfg, jobs=1):
    use_cln = "CLN" in cfg.feature_sets
    vectors = feature_table(data, cfg.features, jobs)
    n = len(data.patients)
    if not vectors:
        empty = np.zeros((n, 0))
        return [DesignUnit("clinical", (), empty, (), empty, True)]
    names = list(vectors[0].names)
    matrix = np.vstack([v.values for v in vectors])
    if cfg.view_strategy == "concat":
        return [DesignUnit("concat", *_split_columns(names, matrix), use_cln)]
    return [DesignUnit(view, *_split_columns(names, matrix, view), use_cln) for view in cfg.features.views]


def fold_design(unit, patients, train_idx, test_idx):
    """Training matrix and held-out row, normalized with training rows only.

    TSF columns are z-scored (sample sd; zero-sd columns only centered), RAW
    columns pass through, clinical columns come from ``ClinicalEncoder``.
    """
    train_idx = np.asarray(train_idx)
    ts_train = unit.ts[train_idx]
    mean = ts_train.mean(axis=0) if ts_train.shape[1] else np.zeros(0)
    sd = ts_train.std(axis=0, ddof=1) if ts_train.shape[1] else np.zeros(0)
    scale = np.where(sd > 0, sd, 1.0)

    def rows(idx):
        block = [(unit.ts[idx] - mean) / scale, unit.raw[idx]]
        if unit.clinical:
            block.append(np.vstack([encoder.transform(patients[i]) for i in np.atleast_1d(idx)]))
        return np.hstack(block)

    encoder = ClinicalEncoder.fit([patients[i] for i in train_idx]) if unit.clinical else None
    X_train = rows(train_idx)
    x_test = rows(np.array([test_idx]))[0]
    stats = FoldStats(
        held_out=patients[test_idx].id,
        age_mean=encoder.age_mean if encoder else None,
        age_sd=encoder.age_sd if encoder else None,
        ts_mean=tuple(mean.tolist()),
        ts_sd=tuple(sd.tolist()),
    )
    return X_train, x_test, stats


# -- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class FoldPrediction:
    patient_id: str
    true_label: int
    score: float
    view_scores: dict = field(default_factory=dict)


@dataclass
class EvaluationReport:
    config: dict
    folds: list
    metrics: dict
    importances: dict = field(default_factory=dict)
    p_vs_baseline: Optional[TestResult] = None
    subgroups: Optional[dict] = None
    ablations: Optional[dict] = None
    fold_stats: dict = field(default_factory=dict, repr=False)

    @property
    def scores(self):
        return np.array([f.score for f in self.folds])

    @property
    def labels(self):
        return np.array([f.true_label for f in self.folds], dtype=int)

    @property
    def ids(self):
        return [f.patient_id for f in self.folds]

    def score_map(self):
        return {f.patient_id: f.score for f in self.folds}


def _check_classes(labels):
    pos = int(labels.sum())
    neg = labels.size - pos
    if labels.size < 3 or pos < 2 or neg < 2:
        raise SingleClassTraining(
            f"LOOCV needs >= 2 patients per class so no training fold is single-class "
            f"(got {pos} positive, {neg} negative)"
        )


def _run_fold(unit, patients, labels, i, gbm_cfg):
    train = np.array([j for j in range(len(patients)) if j != i])
    X_train, x_test, stats = fold_design(unit, patients, train, i)
    model = fit_gbm(X_train, labels[train], gbm_cfg, unit.feature_names)
    return float(model.predict_score(x_test)), model.importances, stats


def loocv_units(units, patients, gbm_cfg=None, threshold=0.5, config=None, jobs=1):
    gbm_cfg = gbm_cfg or GbmConfig()
    patients = list(patients)
    labels = np.array([p.label for p in patients], dtype=int)
    _check_classes(labels)
    tasks = [(u, i) for u in units for i in range(len(patients))]
    work = lambda t: _run_fold(t[0], patients, labels, t[1], gbm_cfg)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    n = len(patients)
    per_unit = {u.name: results[k * n:(k + 1) * n] for k, u in enumerate(units)}
    folds = []
    for i, p in enumerate(patients):
        view_scores = {name: res[i][0] for name, res in per_unit.items()}
        score = float(np.mean(list(view_scores.values())))
        folds.append(FoldPrediction(p.id, int(p.label), score, view_scores))
    importances = {
        u.name: dict(zip(u.feature_names, np.mean([r[1] for r in per_unit[u.name]], axis=0).tolist()))
        for u in units
    }
    fold_stats = {name: [r[2] for r in res] for name, res in per_unit.items()}
    metrics = classification_metrics([f.score for f in folds], labels, threshold)
    return EvaluationReport(dict(config or {}), folds, metrics, importances, fold_stats=fold_stats)


def loocv(data, cfg=None, gbm_cfg=None, jobs=1):
    """Leave-one-out predictions for every patient under one feature configuration."""
    cfg = cfg or EvalConfig()
    gbm_cfg = gbm_cfg or GbmConfig()
    units = build_units(data, cfg, jobs)
    config = {**cfg.describe(), "gbm": gbm_config_dict(gbm_cfg)}
    return loocv_units(units, data.patients, gbm_cfg, cfg.threshold, config, jobs)


def gbm_config_dict(cfg):
    return {
        "n_estimators": cfg.n_estimators, "max_depth": cfg.max_depth,
        "learning_rate": cfg.learning_rate, "min_leaf": cfg.min_leaf, "seed": cfg.seed,
    }


# -- view ensembling and baseline comparison ----------------------------------


def ensemble_views(view_scores):
    """Per-patient mean of per-view scores; ``view_scores`` maps view -> {id: score}."""
    if not view_scores:
        raise ValueError("no views to ensemble")
    views = list(view_scores)
    ids = set(view_scores[views[0]])
    for v in views[1:]:
        if set(view_scores[v]) != ids:
            raise PatientSetMismatch(f"view {v!r} covers a different patient set")
    return {pid: float(np.mean([view_scores[v][pid] for v in views])) for pid in view_scores[views[0]]}


def combine_reports(reports, threshold=0.5, config=None):
    """Ensemble report from independently evaluated single-view reports."""
    views = list(reports)
    merged = ensemble_views({v: reports[v].score_map() for v in views})
    base = reports[views[0]]
    folds = []
    for f in base.folds:
        view_scores = {}
        for v in views:
            view_scores.update(next(g for g in reports[v].folds if g.patient_id == f.patient_id).view_scores)
        folds.append(FoldPrediction(f.patient_id, f.true_label, merged[f.patient_id], view_scores))
    labels = np.array([f.true_label for f in folds], dtype=int)
    importances = {}
    fold_stats = {}
    for v in views:
        importances.update(reports[v].importances)
        fold_stats.update(reports[v].fold_stats)
    metrics = classification_metrics([f.score for f in folds], labels, threshold)
    cfg = dict(config if config is not None else base.config)
    return EvaluationReport(cfg, folds, metrics, importances, fold_stats=fold_stats)


def compare_to_baseline(candidate, baseline, method="auto"):
    """One-sided signed-rank test that the candidate's per-patient |y - score| is smaller."""
    cand = {f.patient_id: abs(f.true_label - f.score) for f in candidate.folds}
    base = {f.patient_id: abs(f.true_label - f.score) for f in baseline.folds}
    if set(cand) != set(base):
        raise PatientSetMismatch("candidate and baseline cover different patients")
    ids = sorted(cand)
    diffs = np.array([base[i] - cand[i] for i in ids])
    try:
        return wilcoxon_signed_rank(diffs, "greater", method)
    except AllZeroDifferences:
        return TestResult(0.0, 1.0, "exact", "greater", ("all_zero_differences",))


# -- ablation grids -----------------------------------------------------------

TABLE2_ROWS = (("CLN",), ("RAW",), ("TSF",), ("CLN", "RAW"), ("CLN", "TSF"), ("TSF", "RAW"), ("CLN", "TSF", "RAW"))
TABLE2_COLUMNS = VIEWS + ("ensemble",)
TABLE4_ROWS = (("PEAK",), ("SIPS",), ("FLOW",), ("PEAK", "SIPS"), ("PEAK", "FLOW"), ("SIPS", "FLOW"),
               ("PEAK", "SIPS", "FLOW"))
GRIDS = ("feature_sets", "groups")


def _safe_loocv(data, cfg, gbm_cfg):
    try:
        return loocv(data, cfg, gbm_cfg), None
    except NoReflowError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _pmap(fn, items, jobs):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _mark_best(cells, key):
    groups = {}
    for c in cells:
        if c["auroc"] is not None:
            groups.setdefault(c[key], []).append(c)
    for members in groups.values():
        top = max(m["auroc"] for m in members)
        for m in members:
            m[f"best_in_{key}"] = m["auroc"] == top


def feature_set_grid(data, gbm_cfg=None, tsf_groups=("SIPS", "FLOW"), tsf_mode="post_only",
                     threshold=0.5, jobs=1, **feature_kwargs):
    """Table II-style grid: seven feature-set rows x {AP, lateral, ensemble}."""
    gbm_cfg = gbm_cfg or GbmConfig()
    jobs_list = []
    for sets in TABLE2_ROWS:
        if sets == ("CLN",):
            jobs_list.append((sets, None))
        else:
            jobs_list.extend((sets, v) for v in VIEWS)

    def run(job):
        sets, view = job
        views = VIEWS if view is None else (view,)
        cfg = make_eval_config(sets, tsf_groups, tsf_mode, views, "ensemble", threshold, **feature_kwargs)
        return _safe_loocv(data, cfg, gbm_cfg)

    results = dict(zip(jobs_list, _pmap(run, jobs_list, jobs)))
    rows, best_reports = [], {}
    for sets in TABLE2_ROWS:
        name = "+".join(sets)
        reports, errors = {}, {}
        if sets == ("CLN",):
            rep, err = results[(sets, None)]
            if rep is not None:
                reports["-"] = rep
            else:
                errors["-"] = err
        else:
            for v in VIEWS:
                rep, err = results[(sets, v)]
                if rep is not None:
                    reports[v] = rep
                else:
                    errors[v] = err
            if all(v in reports for v in VIEWS):
                cfg = make_eval_config(sets, tsf_groups, tsf_mode, VIEWS, "ensemble", threshold, **feature_kwargs)
                reports["ensemble"] = combine_reports(
                    {v: reports[v] for v in VIEWS}, threshold,
                    {**cfg.describe(), "gbm": gbm_config_dict(gbm_cfg)},
                )
            else:
                errors["ensemble"] = "missing per-view result"
        cells = {col: rep.metrics["auroc"] for col, rep in reports.items()}
        best_col = max(cells, key=lambda c: (cells[c], -list(cells).index(c))) if cells else None
        if best_col is not None:
            best_reports[name] = reports[best_col]
        rows.append({
            "feature_set": name,
            "auroc_by_view": cells,
            "errors": errors,
            "best_view": best_col,
            "metrics": dict(reports[best_col].metrics) if best_col else None,
        })

    baseline = best_reports.get("CLN")
    primary = "CLN+TSF+RAW"
    secondary = [r["feature_set"] for r in rows if r["feature_set"] not in ("CLN", primary)
                 and r["feature_set"] in best_reports]
    raw_p = {}
    if baseline is not None:
        for name, rep in best_reports.items():
            if name != "CLN":
                raw_p[name] = compare_to_baseline(rep, baseline).p_value
    adjusted = dict(zip(secondary, holm_bonferroni([raw_p[s] for s in secondary]))) if raw_p else {}
    for r in rows:
        name = r["feature_set"]
        r["p_vs_baseline"] = raw_p.get(name)
        r["p_adjusted"] = adjusted.get(name, raw_p.get(name) if name == primary else None)
        r["holm_adjusted"] = name in adjusted
    return {"rows": rows, "tsf_groups": list(tsf_groups), "tsf_mode": tsf_mode}, best_reports


def group_grid(data, gbm_cfg=None, views=("lateral",), view_strategy="ensemble", threshold=0.5, jobs=1,
               **feature_kwargs):
    """Table IV-style grid: seven PEAK/SIPS/FLOW combinations x three signal modes."""
    gbm_cfg = gbm_cfg or GbmConfig()
    jobs_list = [(groups, mode) for groups in TABLE4_ROWS for mode in MODES]

    def run(job):
        groups, mode = job
        cfg = make_eval_config(("TSF",), groups, mode, views, view_strategy, threshold, **feature_kwargs)
        return _safe_loocv(data, cfg, gbm_cfg)

    cells = []
    for (groups, mode), (rep, err) in zip(jobs_list, _pmap(run, jobs_list, jobs)):
        cells.append({
            "row": "+".join(groups), "column": mode,
            "auroc": rep.metrics["auroc"] if rep is not None else None,
            "error": err, "best_in_row": False, "best_in_column": False,
        })
    _mark_best(cells, "row")
    _mark_best(cells, "column")
    return {"cells": cells, "views": list(views), "view_strategy": view_strategy}


def ablation_grid(data, grids=GRIDS, gbm_cfg=None, jobs=1, tsf_groups=("SIPS", "FLOW"), tsf_mode="post_only",
                  group_views=("lateral",), threshold=0.5, **feature_kwargs):
    grids = tuple(grids)
    if not grids:
        raise EmptyGrid("no grid requested")
    unknown = set(grids) - set(GRIDS)
    if unknown:
        raise ValueError(f"unknown grid(s) {sorted(unknown)}; choose from {GRIDS}")
    out = {}
    if "feature_sets" in grids:
        out["feature_sets"], _ = feature_set_grid(data, gbm_cfg, tsf_groups, tsf_mode, threshold, jobs,
                                                   **feature_kwargs)
    if "groups" in grids:
        out["groups"] = group_grid(data, gbm_cfg, group_views, "ensemble", threshold, jobs, **feature_kwargs)
    return out


# -- subgroup analysis --------------------------------------------------------

WHITE_LABELS = {"white", "white/caucasian", "caucasian"}


def _subgroup_specs(patients):
    ages = [p.age for p in patients]
    nihss = [p.nihss for p in patients]
    specs = [
        ("mTICI", "mtici", (("mTICI = 2c", lambda p: p.mtici == "2c"), ("mTICI = 3", lambda p: p.mtici == "3")), None),
        ("Sex", "sex", (("Sex = Female", lambda p: p.sex == "female"), ("Sex = Male", lambda p: p.sex == "male")), None),
        ("Race", "race", (("Race = White", lambda p: p.race.lower() in WHITE_LABELS),
                          ("Race = Other", lambda p: p.race.lower() not in WHITE_LABELS)), None),
    ]
    age_med = float(np.median(ages))
    specs.append(("Age", "age", ((f"Age > {age_med:g}", lambda p: p.age > age_med),
                                 (f"Age <= {age_med:g}", lambda p: p.age <= age_med)), age_med))
    if all(v is not None for v in nihss):
        med = float(np.median(nihss))
        specs.append(("NIHSS", "nihss", ((f"NIHSS > {med:g}", lambda p: p.nihss > med),
                                         (f"NIHSS <= {med:g}", lambda p: p.nihss <= med)), med))
    else:
        specs.append(("NIHSS", "nihss", None, None))
    specs.append(("Passes", "passes", (("passes = 1", lambda p: p.passes == 1),
                                        ("passes > 1", lambda p: p.passes > 1)), None))
    return specs


def subgroup_analysis(report, patients, threshold=None):
    """Per-subgroup metrics plus two-sided MWU on scores within each true-label stratum."""
    threshold = report.config.get("threshold", 0.5) if threshold is None else threshold
    by_id = {p.id: p for p in patients}
    if set(by_id) != set(report.ids):
        raise PatientSetMismatch("report and cohort cover different patients")
    folds = report.folds
    pts = [by_id[f.patient_id] for f in folds]
    scores = np.array([f.score for f in folds])
    labels = np.array([f.true_label for f in folds], dtype=int)

    rows, tests, skipped, medians = [], [], {}, {}
    for name, attr, levels, median in _subgroup_specs(pts):
        if levels is None or any(getattr(p, attr) is None for p in pts):
            skipped[name] = str(MissingCovariate(f"{attr} missing for at least one patient"))
            continue
        if median is not None:
            medians[name] = median
        masks = [np.array([pred(p) for p in pts]) for _, pred in levels]
        for (level, _), m in zip(levels, masks):
            row = {"subgroup": name, "level": level, "n": int(m.sum())}
            if m.any():
                row.update(classification_metrics(scores[m], labels[m], threshold))
            rows.append(row)
        for stratum in (0, 1):
            a = scores[masks[0] & (labels == stratum)]
            b = scores[masks[1] & (labels == stratum)]
            entry = {"subgroup": name, "true_label": stratum, "n_a": int(a.size), "n_b": int(b.size),
                     "statistic": None, "p_value": None, "method": None}
            if a.size and b.size:
                res = mann_whitney_u(a, b, "two_sided")
                entry.update(statistic=res.statistic, p_value=res.p_value, method=res.method)
            tests.append(entry)
    return {"rows": rows, "tests": tests, "skipped": skipped, "medians": medians}


# -- univariate screen --------------------------------------------------------

# expected shift of each feature in the no-reflow group, keyed "<mode tag>.<feature>"
DEFAULT_DIRECTIONS = {
    "comb.peakHeight": "less", "comb.peakWidth": "greater", "comb.peakRatio": "less",
    "comb.peakSlope": "greater", "comb.meanIntensity": "less", "comb.stdDevIntensity": "greater",
    "comb.minIntensity": "greater", "comb.meanIntensityRatio": "less", "comb.skewness": "greater",
    "comb.kurtosis": "greater", "comb.timeTo50Max": "greater", "comb.timeToPeak": "less",
    "comb.decayTime": "less", "comb.plateauDuration": "greater", "comb.signalCorrelation": "less",
    "post.peakHeight": "less", "post.peakWidth": "greater", "post.peakSlope": "greater",
    "post.meanIntensity": "less", "post.stdDevIntensity": "greater", "post.minIntensity": "greater",
    "post.skewness": "greater", "post.kurtosis": "greater", "post.timeTo50Max": "greater",
    "post.timeToPeak": "greater", "post.decayTime": "less", "post.plateauDuration": "greater",
}


def feature_direction(name, registry=None):
    registry = DEFAULT_DIRECTIONS if registry is None else registry
    if name in registry:
        return registry[name]
    parts = name.split(".")
    if len(parts) == 4:
        _, tag, _, feat = parts
        for key in (f"{tag}.{feat}", feat):
            if key in registry:
                return registry[key]
    return "two_sided"


def univariate_screen(vectors, labels, registry=None, method="auto"):
    """One MWU row per feature: no-reflow values against reflow values."""
    vectors = list(vectors)
    if isinstance(labels, dict):
        labels = [labels[v.patient_id] for v in vectors]
    y = np.asarray(labels, dtype=int)
    if y.size != len(vectors):
        raise ValueError("one label per feature vector required")
    if not (y == 1).any() or not (y == 0).any():
        raise EmptyClass("univariate screen needs at least one patient per class")
    names = vectors[0].names
    matrix = np.vstack([v.values for v in vectors])
    rows = []
    for j, name in enumerate(names):
        pos, neg = matrix[y == 1, j], matrix[y == 0, j]
        direction = feature_direction(name, registry)
        res = mann_whitney_u(pos, neg, direction, method)
        rows.append({
            "feature": name, "direction": direction, "statistic": res.statistic,
            "p_value": res.p_value, "method": res.method,
            "median_no_reflow": float(np.median(pos)), "median_reflow": float(np.median(neg)),
            "n_no_reflow": int(pos.size), "n_reflow": int(neg.size),
        })
    for row, adj in zip(rows, holm_bonferroni([r["p_value"] for r in rows])):
        row["p_holm"] = adj
    return rows
