import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from noreflow.ingest import SEQUENCE_KEYS, PatientRecord, SequenceRef  # noqa: E402
from noreflow.model.evaluation import CohortData  # noqa: E402
from noreflow.signals import PerfusionSignal  # noqa: E402
from noreflow.synth import SynthConfig, cohort_data, generate_cohort, write_cohort  # noqa: E402


def make_patient(pid, label, age=70.0, sex="female", mtici="3", nihss=10, passes=1, race="white"):
    return PatientRecord(
        id=pid, label=label, age=age, sex=sex, mtici=mtici, nihss=nihss, passes=passes, race=race,
        sequences={k: SequenceRef(f"{pid}/{k[0]}_{k[1]}", 3.0, 8) for k in SEQUENCE_KEYS},
        masks={k: f"{pid}/{k[0]}_{k[1]}_mask.png" for k in SEQUENCE_KEYS},
    )


def signal_map(values_by_key, fps=3.0, aligned=True):
    return {k: PerfusionSignal(np.asarray(v, dtype=float), fps, k[0], k[1], aligned)
            for k, v in values_by_key.items()}


def random_cohort_data(n=20, n_pos=5, seed=0, length=15):
    """Label-independent random signals with random clinical fields."""
    rng = np.random.default_rng(seed)
    labels = np.zeros(n, dtype=int)
    labels[rng.permutation(n)[:n_pos]] = 1
    patients, signals = [], {}
    for i in range(n):
        pid = f"p{i:02d}"
        patients.append(make_patient(pid, int(labels[i]), age=float(rng.normal(75, 10)),
                                     sex="male" if rng.random() < 0.4 else "female",
                                     mtici="3" if rng.random() < 0.5 else "2c"))
        signals[pid] = signal_map({k: rng.uniform(0.05, 0.9, length) for k in SEQUENCE_KEYS})
    return CohortData(tuple(patients), signals)


@pytest.fixture(scope="session")
def small_synth():
    return generate_cohort(SynthConfig(n_patients=16, prevalence=0.25, seed=3))


@pytest.fixture(scope="session")
def small_synth_data(small_synth):
    return cohort_data(small_synth)


@pytest.fixture(scope="session")
def small_synth_dir(tmp_path_factory, small_synth):
    out = tmp_path_factory.mktemp("synth")
    manifest = write_cohort(small_synth, out)
    return manifest


# -- acceptance reporting -----------------------------------------------------

_ACCEPTANCE = []


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number}: {status} - {self.title}"
        if self.detail:
            line += f" [{self.detail}]"
        if exc_type is not None and exc is not None:
            line += f" ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        _ACCEPTANCE.append((self.number, line))
        print(line)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE, key=lambda t: t[0]):
            terminalreporter.write_line(line)
