"""No-reflow prediction from angiographic perfusion signals."""
from .errors import NoReflowError
from .features import FeatureConfig, FeatureVector, extract_all
from .ingest import CohortManifest, FrameStack, PatientRecord, TdtMask, load_manifest, validate_cohort
from .model import EvalConfig, EvaluationReport, GbmConfig, fit_gbm, loocv
from .signals import PerfusionSignal, align_and_truncate, detect_onset, extract_series, min_projection

__version__ = "0.1.0"
