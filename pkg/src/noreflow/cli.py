"""Batch command-line front end.

Exit codes: 0 success, 1 data/validation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import plots
from .errors import NoReflowError
from .features import write_feature_csv
from .ingest import VIEWS, load_manifest, validate_cohort
from .model.evaluation import (
    EvalConfig,
    ablation_grid,
    compare_to_baseline,
    feature_table,
    loocv,
    make_eval_config,
    subgroup_analysis,
    univariate_screen,
)
from .model.gbm import GbmConfig
from .pipeline import load_cohort_data
from .report import dump_json, write_folds_csv, write_importances_csv, write_metrics_csv, write_report, write_rows
from .summary import cohort_summary
from .synth import SynthConfig, SynthEffect, generate_cohort, write_cohort

log = logging.getLogger("noreflow")

MODE_FLAGS = {"combination": "combination", "post": "post_only", "pre": "pre_only"}
COMMANDS = ("validate", "extract", "evaluate", "ablate", "subgroup", "univariate", "cohort-summary", "synth")


def _csv_list(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _views(text):
    lookup = {v.lower(): v for v in VIEWS}
    out = []
    for v in _csv_list(text):
        if v.lower() not in lookup:
            raise argparse.ArgumentTypeError(f"unknown view {v!r}; choose from {', '.join(VIEWS)}")
        out.append(lookup[v.lower()])
    return tuple(out)


def _groups(text):
    return tuple(g.upper() for g in _csv_list(text))


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="noreflow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", required=True, type=Path)
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=_positive_int, default=1)

    feats = argparse.ArgumentParser(add_help=False)
    feats.add_argument("--mode", choices=sorted(MODE_FLAGS), default=None)
    feats.add_argument("--groups", type=_groups, default=None, help="comma list of PEAK,SIPS,FLOW[,RAW]")
    feats.add_argument("--views", type=_views, default=VIEWS)
    feats.add_argument("--raw-length", type=int, default=15)
    feats.add_argument("--beta", type=float, default=0.5)
    feats.add_argument("--decay-literal", action="store_true",
                       help="decay time = first post-peak frame >= 0.9 of max instead of <= 0.1")
    feats.add_argument("--raw-fill", choices=("printed", "continuity"), default="printed")
    feats.add_argument("--window", type=float, default=5.0, help="seconds kept after onset")
    feats.add_argument("--onset-threshold", type=float, default=0.01)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--feature-sets", type=_groups, default=("CLN", "TSF", "RAW"))
    model.add_argument("--view-strategy", choices=("ensemble", "concat"), default="ensemble")
    model.add_argument("--threshold", type=float, default=0.5)
    model.add_argument("--n-estimators", type=_positive_int, default=10)
    model.add_argument("--max-depth", type=_positive_int, default=3)
    model.add_argument("--learning-rate", type=float, default=0.9)
    model.add_argument("--min-leaf", type=_positive_int, default=2)
    model.add_argument("--no-figures", action="store_true")

    sub.add_parser("validate", parents=[common], help="check every patient has four loadable sequences")
    sub.add_parser("extract", parents=[common, feats], help="write the per-patient feature matrix")
    sub.add_parser("evaluate", parents=[common, feats, model], help="LOOCV evaluation against the CLN baseline")
    ab = sub.add_parser("ablate", parents=[common, feats, model], help="feature-set and feature-group grids")
    ab.add_argument("--grids", type=_csv_list, default=("feature_sets", "groups"))
    ab.add_argument("--group-views", type=_views, default=("lateral",))
    sub.add_parser("subgroup", parents=[common, feats, model], help="subgroup metrics and score tests")
    sub.add_parser("univariate", parents=[common, feats, model], help="one-sided MWU per feature")
    sub.add_parser("cohort-summary", parents=[common], help="demographic comparison table")

    sy = sub.add_parser("synth", help="generate a synthetic cohort on disk")
    sy.add_argument("--out", type=Path, required=True)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--jobs", type=_positive_int, default=1)
    sy.add_argument("--n", type=_positive_int, default=40)
    sy.add_argument("--prevalence", type=float, default=7 / 39)
    sy.add_argument("--noise-sd", type=float, default=0.02)
    sy.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    sy.add_argument("--image-size", type=int, default=16)
    sy.add_argument("--plateau-frames", type=int, default=SynthEffect.plateau_frames)
    sy.add_argument("--decay-slowdown", type=float, default=SynthEffect.decay_slowdown)
    sy.add_argument("--peak-attenuation", type=float, default=SynthEffect.peak_attenuation)
    return parser


def _feature_kwargs(args):
    return dict(raw_length=args.raw_length, beta=args.beta, decay_literal_mode=args.decay_literal,
                raw_fill=args.raw_fill)


def _gbm(args):
    return GbmConfig(args.n_estimators, args.max_depth, args.learning_rate, args.min_leaf, args.seed)


def _eval_config(args, default_mode="post", default_groups=("SIPS", "FLOW")):
    mode = MODE_FLAGS[args.mode or default_mode]
    groups = args.groups or default_groups
    sets = tuple(args.feature_sets)
    tsf_groups = tuple(g for g in groups if g in ("PEAK", "SIPS", "FLOW")) or default_groups
    if "RAW" in groups and "RAW" not in sets:
        sets = sets + ("RAW",)
    return make_eval_config(sets, tsf_groups, mode, args.views, args.view_strategy, args.threshold,
                            **_feature_kwargs(args))


def _load(args):
    manifest = load_manifest(args.manifest)
    data = load_cohort_data(manifest, args.window, args.onset_threshold, args.jobs)
    return manifest, data


def cmd_validate(args):
    manifest = load_manifest(args.manifest)
    issues = validate_cohort(manifest, args.jobs)
    write_rows([{"patient_id": i.patient_id, "sequence": i.key, "kind": i.kind, "message": i.message}
                for i in issues], args.out / "issues.csv", ["patient_id", "sequence", "kind", "message"])
    for i in issues:
        print(f"{i.patient_id}\t{i.key}\t{i.kind}\t{i.message}")
    print(f"{len(manifest.patients)} patients, {len(issues)} issue(s)", file=sys.stderr)
    return 1 if issues else 0


def cmd_extract(args):
    from .features import FeatureConfig

    _, data = _load(args)
    mode = MODE_FLAGS[args.mode or "combination"]
    cfg = FeatureConfig(groups=args.groups or ("PEAK", "SIPS", "FLOW"), mode=mode, views=args.views,
                        **_feature_kwargs(args))
    vectors = feature_table(data, cfg, args.jobs)
    if not vectors:
        raise NoReflowError("no time-series or RAW group selected; nothing to extract")
    path = write_feature_csv(vectors, args.out / "features.csv")
    plots.plot_mean_curves(data, args.out / "mean_curves.png")
    print(path)
    return 0


def _evaluate(args, data):
    cfg = _eval_config(args)
    gbm = _gbm(args)
    report = loocv(data, cfg, gbm, args.jobs)
    baseline = None
    if cfg.feature_sets != ("CLN",):
        base_cfg = EvalConfig(replace(cfg.features, groups=("CLN",)), cfg.view_strategy, cfg.threshold)
        baseline = loocv(data, base_cfg, gbm, args.jobs)
        report.p_vs_baseline = compare_to_baseline(report, baseline)
    return report, baseline


def _write_evaluation(args, report, baseline):
    args.out.mkdir(parents=True, exist_ok=True)
    write_report(report, args.out / "report.json")
    write_folds_csv(report, args.out / "folds.csv")
    write_metrics_csv(report, args.out / "metrics.csv")
    write_importances_csv(report, args.out / "importances.csv")
    if baseline is not None:
        write_folds_csv(baseline, args.out / "baseline_folds.csv")
    if not args.no_figures:
        plots.plot_roc(report, args.out / "roc.png", baseline)
        plots.plot_importances(report, args.out / "importances.png")


def cmd_evaluate(args):
    _, data = _load(args)
    report, baseline = _evaluate(args, data)
    _write_evaluation(args, report, baseline)
    m = report.metrics
    p = report.p_vs_baseline.p_value if report.p_vs_baseline else None
    print(f"AUROC {m['auroc']:.4f}  accuracy {m['accuracy']:.4f}  p_vs_CLN {p if p is None else f'{p:.4g}'}")
    return 0


def cmd_ablate(args):
    _, data = _load(args)
    mode = MODE_FLAGS[args.mode or "post"]
    tsf_groups = tuple(g for g in (args.groups or ("SIPS", "FLOW")) if g != "RAW")
    result = ablation_grid(data, args.grids, _gbm(args), args.jobs, tsf_groups, mode, args.group_views,
                           args.threshold, **_feature_kwargs(args))
    dump_json({"schema_version": 1, "kind": "ablation", "grids": result}, args.out / "ablation.json")
    if "feature_sets" in result:
        rows = []
        for r in result["feature_sets"]["rows"]:
            row = {"feature_set": r["feature_set"]}
            row.update({f"auroc.{v}": r["auroc_by_view"].get(v) for v in ("-", *VIEWS, "ensemble")})
            row.update({"best_view": r["best_view"], "p_vs_baseline": r["p_vs_baseline"],
                        "p_adjusted": r["p_adjusted"], "holm_adjusted": r["holm_adjusted"]})
            row.update(r["metrics"] or {})
            rows.append(row)
        write_rows(rows, args.out / "feature_sets.csv")
    if "groups" in result:
        write_rows(result["groups"]["cells"], args.out / "groups.csv",
                   ["row", "column", "auroc", "best_in_row", "best_in_column", "error"])
        if not args.no_figures:
            plots.plot_group_grid(result["groups"], args.out / "groups.png")
    print(args.out / "ablation.json")
    return 0


def cmd_subgroup(args):
    manifest, data = _load(args)
    report, baseline = _evaluate(args, data)
    report.subgroups = subgroup_analysis(report, manifest.patients, args.threshold)
    _write_evaluation(args, report, baseline)
    write_rows(report.subgroups["rows"], args.out / "subgroups.csv",
               ["subgroup", "level", "n", "auroc", "accuracy", "recall", "specificity", "f1", "precision"])
    write_rows(report.subgroups["tests"], args.out / "subgroup_tests.csv")
    for name, why in report.subgroups["skipped"].items():
        print(f"skipped {name}: {why}", file=sys.stderr)
    print(args.out / "subgroups.csv")
    return 0


def cmd_univariate(args):
    from .features import FeatureConfig

    manifest, data = _load(args)
    mode = MODE_FLAGS[args.mode or "combination"]
    groups = tuple(g for g in (args.groups or ("PEAK", "SIPS", "FLOW")) if g != "RAW")
    cfg = FeatureConfig(groups=groups, mode=mode, views=args.views, **_feature_kwargs(args))
    vectors = feature_table(data, cfg, args.jobs)
    rows = univariate_screen(vectors, {p.id: p.label for p in manifest.patients})
    write_rows(rows, args.out / "univariate.csv")
    dump_json({"schema_version": 1, "kind": "univariate", "mode": mode, "rows": rows}, args.out / "univariate.json")
    print(args.out / "univariate.csv")
    return 0


def cmd_cohort_summary(args):
    manifest = load_manifest(args.manifest)
    rows = cohort_summary(manifest.patients)
    write_rows(rows, args.out / "cohort_summary.csv", ["variable", "reflow", "no_reflow", "test", "p_value"])
    dump_json({"schema_version": 1, "kind": "cohort_summary", "rows": rows}, args.out / "cohort_summary.json")
    print(args.out / "cohort_summary.csv")
    return 0


def cmd_synth(args):
    effect = SynthEffect(args.plateau_frames, args.decay_slowdown, args.peak_attenuation)
    cfg = SynthConfig(n_patients=args.n, prevalence=args.prevalence, seed=args.seed, noise_sd=args.noise_sd,
                      effect=effect, bit_depth=args.bit_depth, image_size=args.image_size)
    path = write_cohort(generate_cohort(cfg), args.out)
    print(path)
    return 0


HANDLERS = {
    "validate": cmd_validate, "extract": cmd_extract, "evaluate": cmd_evaluate, "ablate": cmd_ablate,
    "subgroup": cmd_subgroup, "univariate": cmd_univariate, "cohort-summary": cmd_cohort_summary,
    "synth": cmd_synth,
}


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return HANDLERS[args.command](args)
    except NoReflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # bad option combination caught by a config contract
        parser.print_usage(sys.stderr)
        print(f"noreflow: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
