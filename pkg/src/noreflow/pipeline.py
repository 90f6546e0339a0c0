"""Manifest -> aligned signals for every patient."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .errors import NoReflowError
from .ingest import SEQUENCE_KEYS, key_to_str, load_sequence
from .model.evaluation import CohortData
from .signals import ONSET_THRESHOLD, perfusion_signal


class SequenceError(NoReflowError):
    """Wraps a per-sequence failure with its (patient, phase/view) locus."""

    def __init__(self, patient_id, key, cause):
        self.patient_id = patient_id
        self.key = key
        self.cause = cause
        super().__init__(f"{patient_id} {key_to_str(key)}: {type(cause).__name__}: {cause}")


def patient_signals(manifest, patient, window_seconds=5.0, threshold=ONSET_THRESHOLD):
    out = {}
    for key in SEQUENCE_KEYS:
        if key not in patient.sequences:
            continue
        try:
            stack, mask = load_sequence(manifest, patient, key)
            out[key] = perfusion_signal(stack, mask, key[0], key[1], window_seconds, threshold)
        except NoReflowError as exc:
            raise SequenceError(patient.id, key, exc) from exc
    return out


def load_cohort_data(manifest, window_seconds=5.0, threshold=ONSET_THRESHOLD, jobs=1):
    work = lambda p: patient_signals(manifest, p, window_seconds, threshold)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            signals = list(pool.map(work, manifest.patients))
    else:
        signals = [work(p) for p in manifest.patients]
    return CohortData(manifest.patients, {p.id: s for p, s in zip(manifest.patients, signals)})
