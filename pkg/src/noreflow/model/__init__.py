from .gbm import GbmConfig, GbmModel, fit_gbm, predict_score
from .evaluation import (
    ClinicalEncoder,
    CohortData,
    EvalConfig,
    EvaluationReport,
    FoldPrediction,
    ablation_grid,
    compare_to_baseline,
    encode_clinical,
    ensemble_views,
    loocv,
    make_eval_config,
    subgroup_analysis,
    univariate_screen,
)
