"""Synthetic cohorts built from gamma-variate bolus curves.

Every patient gets a label-independent pre-procedure curve.  The
post-procedure curve reuses the patient's bolus shape with a recanalization
gain; no-reflow patients additionally get a held plateau at the peak, a
slower washout and an attenuated peak.  Curves can be rasterized into frame
stacks with a disk-shaped TDT mask so the whole image pipeline can be
exercised without clinical data.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateConfig, InvalidShape
from .ingest import SEQUENCE_KEYS, CohortManifest, PatientRecord, SequenceRef, key_to_str, save_manifest, write_raster
from .model.evaluation import CohortData
from .signals import PerfusionSignal, align_and_truncate


def gamma_variate(t, amplitude, t0, tp, alpha):
    """Bolus curve peaking at exactly ``amplitude`` when t = t0 + tp; zero before t0."""
    if amplitude < 0 or tp <= 0 or alpha <= 0:
        raise InvalidShape(f"need amplitude >= 0, tp > 0, alpha > 0 (got {amplitude}, {tp}, {alpha})")
    t = np.asarray(t, dtype=float)
    s = np.maximum(t - t0, 0.0) / tp
    out = amplitude * s ** alpha * np.exp(alpha * (1.0 - s))
    out = np.where(t > t0, out, 0.0)
    return out if out.ndim else float(out)


def bolus_curve(t, amplitude, t0, tp, alpha, plateau_s=0.0, decay_slowdown=1.0):
    """Gamma variate with an optional hold at the peak and a stretched washout."""
    t = np.asarray(t, dtype=float)
    peak_t = t0 + tp
    rising = gamma_variate(np.minimum(t, peak_t), amplitude, t0, tp, alpha)
    after = t - peak_t - plateau_s
    falling = gamma_variate(peak_t + np.maximum(after, 0.0) / decay_slowdown, amplitude, t0, tp, alpha)
    return np.where(t <= peak_t, rising, np.where(after <= 0, amplitude, falling))


@dataclass(frozen=True)
class SynthEffect:
    plateau_frames: int = 3
    decay_slowdown: float = 2.0
    peak_attenuation: float = 0.75


@dataclass(frozen=True)
class SynthConfig:
    n_patients: int = 40
    prevalence: float = 7 / 39
    seed: int = 0
    fps: float = 3.0
    duration_s: float = 6.0
    noise_sd: float = 0.02
    effect: SynthEffect = field(default_factory=SynthEffect)
    bit_depth: int = 8
    image_size: int = 16
    # uniform sampling ranges for the bolus model
    amplitude: tuple = (0.35, 0.6)
    recanalization_gain: tuple = (1.1, 1.4)
    arrival_s: tuple = (0.4, 1.0)
    time_to_peak_s: tuple = (1.0, 1.8)
    shape: tuple = (2.0, 4.0)
    baseline: tuple = (0.03, 0.08)
    view_scale: tuple = (0.85, 1.15)
    background: float = 0.02

    def __post_init__(self):
        if self.n_patients < 1:
            raise DegenerateConfig("n_patients must be positive")
        if not 0 < self.prevalence < 1:
            raise DegenerateConfig("prevalence must lie strictly between 0 and 1")
        if self.duration_s * self.fps < 4:
            raise DegenerateConfig("duration_s * fps must be at least 4 frames")
        if self.noise_sd < 0:
            raise DegenerateConfig("noise_sd must be non-negative")
        if self.bit_depth not in (8, 16):
            raise DegenerateConfig("bit_depth must be 8 or 16")
        if self.image_size < 4:
            raise DegenerateConfig("image_size must be >= 4")

    @property
    def n_frames(self):
        return int(round(self.duration_s * self.fps))

    @property
    def n_positive(self):
        return int(round(self.prevalence * self.n_patients))


@dataclass(frozen=True)
class SynthCohort:
    config: SynthConfig
    patients: tuple
    signals: dict  # patient id -> {(phase, view): unaligned PerfusionSignal}

    def manifest(self, root=Path(".")):
        return CohortManifest(self.patients, self.config.fps, self.config.bit_depth, Path(root))


def _draw(rng, bounds):
    return float(rng.uniform(*bounds))


def _clinical(rng):
    return {
        "age": float(np.round(np.clip(rng.normal(76.0, 11.0), 40.0, 98.0), 1)),
        "sex": "male" if rng.random() < 0.28 else "female",
        "mtici": "3" if rng.random() < 0.5 else "2c",
        "nihss": int(rng.integers(5, 26)),
        "passes": int(rng.choice([1, 2, 3], p=[0.55, 0.25, 0.2])),
        "race": str(rng.choice(["white", "black", "other"], p=[0.5, 0.18, 0.32])),
    }


def _patient_signals(rng, cfg, label):
    t = np.arange(cfg.n_frames) / cfg.fps
    amp = _draw(rng, cfg.amplitude)
    t0 = _draw(rng, cfg.arrival_s)
    tp = _draw(rng, cfg.time_to_peak_s)
    alpha = _draw(rng, cfg.shape)
    gain = _draw(rng, cfg.recanalization_gain)
    out = {}
    for phase, view in SEQUENCE_KEYS:
        scale = _draw(rng, cfg.view_scale)
        base = _draw(rng, cfg.baseline)
        if phase == "pre":
            curve = bolus_curve(t, amp * scale, t0, tp, alpha)
        else:
            a = amp * gain * scale
            plateau, slow = 0.0, 1.0
            if label:
                a *= cfg.effect.peak_attenuation
                plateau = cfg.effect.plateau_frames / cfg.fps
                slow = cfg.effect.decay_slowdown
            curve = bolus_curve(t, a, t0, tp, alpha, plateau, slow)
        noise = rng.normal(0.0, cfg.noise_sd, t.size) if cfg.noise_sd > 0 else 0.0
        values = np.clip(base + curve + noise, 0.0, 1.0)
        out[(phase, view)] = PerfusionSignal(values, cfg.fps, phase, view, False)
    return out


def generate_cohort(cfg=None):
    """Deterministic cohort; patient i draws from the (seed, i) random substream."""
    cfg = cfg or SynthConfig()
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.n_patients + 1)
    label_rng = np.random.default_rng(streams[0])
    labels = np.zeros(cfg.n_patients, dtype=int)
    labels[label_rng.permutation(cfg.n_patients)[:cfg.n_positive]] = 1

    width = max(2, len(str(cfg.n_patients)))
    patients, signals = [], {}
    for i in range(cfg.n_patients):
        rng = np.random.default_rng(streams[i + 1])
        pid = f"s{i + 1:0{width}d}"
        clinical = _clinical(rng)
        signals[pid] = _patient_signals(rng, cfg, int(labels[i]))
        patients.append(PatientRecord(
            id=pid, label=int(labels[i]), **clinical,
            sequences={k: SequenceRef(f"{pid}/{k[0]}_{k[1]}", cfg.fps, cfg.bit_depth) for k in SEQUENCE_KEYS},
            masks={k: f"{pid}/{k[0]}_{k[1]}_mask.png" for k in SEQUENCE_KEYS},
        ))
    return SynthCohort(cfg, tuple(patients), signals)


def disk_mask(size):
    yy, xx = np.mgrid[:size, :size]
    c = (size - 1) / 2.0
    return (yy - c) ** 2 + (xx - c) ** 2 <= (size / 3.0) ** 2


def rasterize(signal, cfg):
    """Frames (T, H, W) painting the signal uniformly inside the disk mask."""
    top = 2 ** cfg.bit_depth - 1
    mask = disk_mask(cfg.image_size)
    bg = int(round((1.0 - cfg.background) * top))
    frames = np.full((len(signal), cfg.image_size, cfg.image_size), bg, dtype=np.int64)
    inside = np.rint((1.0 - signal.values) * top).astype(np.int64)
    frames[:, mask] = inside[:, None]
    return frames, mask


def write_cohort(cohort, out_dir):
    """Materialize frames, masks, the manifest and a wide signal CSV; return the manifest path."""
    cfg = cohort.config
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    top = 2 ** cfg.bit_depth - 1
    width = max(3, len(str(cfg.n_frames)))
    for p in cohort.patients:
        for key in SEQUENCE_KEYS:
            frames, mask = rasterize(cohort.signals[p.id][key], cfg)
            seq_dir = out_dir / p.sequences[key].path
            for k, frame in enumerate(frames):
                write_raster(seq_dir / f"frame_{k:0{width}d}.png", frame, cfg.bit_depth)
            write_raster(out_dir / p.masks[key], mask.astype(np.int64) * top, cfg.bit_depth)
    with (out_dir / "signals.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["patient_id", "label", "sequence", *[f"t{k + 1}" for k in range(cfg.n_frames)]])
        for p in cohort.patients:
            for key in SEQUENCE_KEYS:
                values = cohort.signals[p.id][key].values
                writer.writerow([p.id, p.label, key_to_str(key), *(repr(float(v)) for v in values)])
    return save_manifest(cohort.manifest(out_dir), out_dir / "manifest.json")


def cohort_data(cohort, window_seconds=5.0):
    """Aligned in-memory signals, skipping rasterization."""
    signals = {
        pid: {k: align_and_truncate(s, window_seconds) for k, s in seqs.items()}
        for pid, seqs in cohort.signals.items()
    }
    return CohortData(cohort.patients, signals)
