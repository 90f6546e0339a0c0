"""Frame stack + TDT mask -> normalized, onset-aligned perfusion signal."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, EmptyMask, EmptyStack, NoOnset, WindowTooShort
from .ingest import FrameStack, write_raster

ONSET_THRESHOLD = 0.01


@dataclass(frozen=True)
class PerfusionSignal:
    """Tracer time-intensity curve; higher values mean more contrast.

    ``values[0]`` is frame t = 1 in the 1-based indexing used by the
    feature definitions.
    """

    values: np.ndarray
    frame_rate: float = 3.0
    phase: str = "post"
    view: str = "lateral"
    onset_applied: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("signal values must be a non-empty 1D sequence")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def _frames_of(stack):
    if isinstance(stack, FrameStack):
        return stack.frames
    frames = np.asarray(stack)
    if frames.ndim != 3 or frames.shape[0] == 0:
        raise EmptyStack("need at least one 2D frame")
    return frames


def min_projection(stack):
    """Pixel-wise minimum over frames of the raw (non-inverted) intensities."""
    return _frames_of(stack).min(axis=0)


def export_projection(stack, path):
    """Save the min-projection as a lossless raster for external mask drawing."""
    write_raster(path, min_projection(stack), bit_depth=stack.bit_depth)
    return path


def extract_series(stack, mask, phase="post", view="lateral"):
    """Mean inverted intensity inside the mask for every frame."""
    pixels = mask.pixels if hasattr(mask, "pixels") else np.asarray(mask, dtype=bool)
    if not pixels.any():
        raise EmptyMask("mask has no foreground pixels")
    if pixels.shape != stack.shape:
        raise DimensionMismatch(f"mask {pixels.shape} vs frames {stack.shape}")
    inside = stack.frames[:, pixels].astype(float)
    values = (1.0 - inside / stack.max_value).mean(axis=1)
    return PerfusionSignal(np.clip(values, 0.0, 1.0), stack.frame_rate, phase, view, False)


def detect_onset(signal, threshold=ONSET_THRESHOLD):
    """1-based index of the first frame whose backward difference exceeds ``threshold``."""
    if signal.onset_applied:
        raise ValueError("signal is already onset-aligned")
    if len(signal) < 2:
        raise NoOnset("need at least two samples to detect an onset")
    jumps = np.flatnonzero(np.abs(np.diff(signal.values)) > threshold)
    if jumps.size == 0:
        raise NoOnset(f"no frame-to-frame change exceeds {threshold}")
    return int(jumps[0]) + 2


def align_and_truncate(signal, window_seconds=5.0, threshold=ONSET_THRESHOLD):
    onset = detect_onset(signal, threshold)
    n_keep = int(round(window_seconds * signal.frame_rate))
    stop = min(len(signal), onset - 1 + n_keep)
    values = signal.values[onset - 1:stop]
    if values.size < 2:
        raise WindowTooShort(f"only {values.size} sample(s) remain after onset t={onset}")
    return replace(signal, values=values, onset_applied=True)


def perfusion_signal(stack, mask, phase, view, window_seconds=5.0, threshold=ONSET_THRESHOLD):
    """extract_series followed by align_and_truncate."""
    raw = extract_series(stack, mask, phase, view)
    return align_and_truncate(raw, window_seconds, threshold)
