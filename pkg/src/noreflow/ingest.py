"""Cohort manifest, frame stacks and TDT masks.

The manifest is a single JSON document; every path inside it is relative to
the manifest's own directory.  A minimal example::

    {
      "frame_rate_default": 3,
      "bit_depth_default": 8,
      "patients": [
        {"id": "p01", "label": 1, "age": 71.5, "sex": "female", "mtici": "2c",
         "nihss": 15, "passes": 1, "race": "white",
         "sequences": {"pre/AP": "p01/pre_AP", "post/AP": {"path": "p01/post_AP", "frame_rate": 4}},
         "masks": {"pre/AP": "p01/pre_AP_mask.png", "post/AP": "p01/post_AP_mask.png"}}
      ]
    }

Frame stacks are directories of lossless grayscale rasters (PNG/PGM/TIFF),
ordered lexicographically by file name.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import (
    DimensionMismatch,
    DuplicatePatientId,
    EmptyMask,
    EmptyStack,
    MissingFile,
    MissingMaskForSequence,
    NoReflowError,
    ParseError,
    UnsupportedBitDepth,
)

PHASES = ("pre", "post")
VIEWS = ("AP", "lateral")
SEQUENCE_KEYS = tuple((p, v) for p in PHASES for v in VIEWS)
SEXES = ("female", "male")
MTICI_GRADES = ("2c", "3")
RASTER_SUFFIXES = (".png", ".pgm", ".pnm", ".tif", ".tiff")


def key_to_str(key):
    return f"{key[0]}/{key[1]}"


def str_to_key(text, locus=None):
    parts = text.split("/")
    if len(parts) != 2 or parts[0] not in PHASES or parts[1] not in VIEWS:
        raise ParseError(f"sequence key must be '<pre|post>/<AP|lateral>', got {text!r}", locus)
    return parts[0], parts[1]


@dataclass(frozen=True)
class SequenceRef:
    path: str
    frame_rate: float
    bit_depth: int
    # per-sequence overrides are remembered so the manifest saves back unchanged
    explicit_frame_rate: bool = False
    explicit_bit_depth: bool = False


@dataclass(frozen=True)
class PatientRecord:
    id: str
    label: int
    age: float
    sex: str
    mtici: str
    nihss: Optional[int] = None
    passes: Optional[int] = None
    race: Optional[str] = None
    sequences: dict = field(default_factory=dict)
    masks: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CohortManifest:
    patients: tuple
    frame_rate_default: float = 3.0
    bit_depth_default: int = 8
    root: Path = field(default=Path("."), compare=False)

    @property
    def positives(self):
        return sum(p.label for p in self.patients)

    @property
    def negatives(self):
        return len(self.patients) - self.positives

    def patient(self, patient_id):
        for p in self.patients:
            if p.id == patient_id:
                return p
        raise KeyError(patient_id)

    def resolve(self, relative):
        return self.root / relative


@dataclass(frozen=True)
class FrameStack:
    """Raw grayscale frames, shape (n_frames, height, width)."""

    frames: np.ndarray
    bit_depth: int
    frame_rate: float

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 3 or frames.shape[0] == 0:
            raise EmptyStack("frame stack must hold at least one 2D frame")
        if self.bit_depth not in (8, 16):
            raise UnsupportedBitDepth(f"bit depth {self.bit_depth} not in {{8, 16}}")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def shape(self):
        return self.frames.shape[1:]

    def __len__(self):
        return self.frames.shape[0]

    @property
    def max_value(self):
        return 2 ** self.bit_depth - 1


@dataclass(frozen=True)
class TdtMask:
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels).astype(bool)
        if pixels.ndim != 2:
            raise DimensionMismatch("mask must be a 2D raster")
        if not pixels.any():
            raise EmptyMask("mask has no foreground pixels")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def shape(self):
        return self.pixels.shape


@dataclass(frozen=True)
class Issue:
    patient_id: str
    key: str
    kind: str
    message: str

    def as_row(self):
        return [self.patient_id, self.key, self.kind, self.message]


# -- manifest parsing ---------------------------------------------------------


def _require(obj, name, locus):
    if name not in obj:
        raise ParseError(f"missing required field {name!r}", locus)
    return obj[name]


def _parse_optional_int(value, locus, minimum):
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ParseError(f"expected integer >= {minimum}, got {value!r}", locus)
    return value


def _parse_sequence(value, frame_rate, bit_depth, locus):
    if isinstance(value, str):
        return SequenceRef(value, frame_rate, bit_depth)
    if not isinstance(value, dict) or "path" not in value:
        raise ParseError("sequence entry must be a path or an object with 'path'", locus)
    fr = value.get("frame_rate", frame_rate)
    bd = value.get("bit_depth", bit_depth)
    if not isinstance(fr, (int, float)) or isinstance(fr, bool) or fr <= 0:
        raise ParseError(f"frame_rate must be positive, got {fr!r}", locus + ".frame_rate")
    if bd not in (8, 16):
        raise ParseError(f"bit_depth must be 8 or 16, got {bd!r}", locus + ".bit_depth")
    return SequenceRef(
        value["path"], float(fr), int(bd),
        explicit_frame_rate="frame_rate" in value,
        explicit_bit_depth="bit_depth" in value,
    )


def _parse_patient(obj, idx, frame_rate, bit_depth):
    locus = f"patients[{idx}]"
    if not isinstance(obj, dict):
        raise ParseError("patient entry must be an object", locus)
    pid = _require(obj, "id", locus)
    if not isinstance(pid, str) or not pid:
        raise ParseError("id must be a non-empty string", locus + ".id")
    label = _require(obj, "label", locus)
    if label not in (0, 1) or isinstance(label, bool):
        raise ParseError(f"label must be 0 or 1, got {label!r}", locus + ".label")
    age = _require(obj, "age", locus)
    if isinstance(age, bool) or not isinstance(age, (int, float)) or not age > 0:
        raise ParseError(f"age must be a positive number, got {age!r}", locus + ".age")
    sex = _require(obj, "sex", locus)
    if sex not in SEXES:
        raise ParseError(f"sex must be one of {SEXES}, got {sex!r}", locus + ".sex")
    mtici = str(_require(obj, "mtici", locus))
    if mtici not in MTICI_GRADES:
        raise ParseError(f"mtici must be one of {MTICI_GRADES}, got {mtici!r}", locus + ".mtici")
    nihss = _parse_optional_int(obj.get("nihss"), locus + ".nihss", 0)
    passes = _parse_optional_int(obj.get("passes"), locus + ".passes", 1)
    race = obj.get("race")
    if race is not None and not isinstance(race, str):
        raise ParseError("race must be a string", locus + ".race")

    sequences = {}
    for name, value in obj.get("sequences", {}).items():
        key = str_to_key(name, f"{locus}.sequences")
        sequences[key] = _parse_sequence(value, frame_rate, bit_depth, f"{locus}.sequences[{name!r}]")
    masks = {}
    for name, value in obj.get("masks", {}).items():
        key = str_to_key(name, f"{locus}.masks")
        if not isinstance(value, str):
            raise ParseError("mask entry must be a path", f"{locus}.masks[{name!r}]")
        masks[key] = value
    for key in sequences:
        if key not in masks:
            raise MissingMaskForSequence(f"{pid}: sequence {key_to_str(key)} has no mask entry")

    return PatientRecord(
        id=pid, label=int(label), age=float(age), sex=sex, mtici=mtici,
        nihss=nihss, passes=passes, race=race, sequences=sequences, masks=masks,
    )


def parse_manifest(text, root=Path(".")):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("manifest must be a JSON object", "line 1")
    frame_rate = doc.get("frame_rate_default", 3.0)
    if isinstance(frame_rate, bool) or not isinstance(frame_rate, (int, float)) or frame_rate <= 0:
        raise ParseError(f"must be positive, got {frame_rate!r}", "frame_rate_default")
    bit_depth = doc.get("bit_depth_default", 8)
    if bit_depth not in (8, 16):
        raise ParseError(f"must be 8 or 16, got {bit_depth!r}", "bit_depth_default")
    raw_patients = _require(doc, "patients", "manifest")
    if not isinstance(raw_patients, list) or not raw_patients:
        raise ParseError("patient list must be non-empty", "patients")

    patients = []
    seen = set()
    for idx, obj in enumerate(raw_patients):
        rec = _parse_patient(obj, idx, float(frame_rate), int(bit_depth))
        if rec.id in seen:
            raise DuplicatePatientId(f"patient id {rec.id!r} appears more than once")
        seen.add(rec.id)
        patients.append(rec)
    return CohortManifest(tuple(patients), float(frame_rate), int(bit_depth), Path(root))


def load_manifest(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    return parse_manifest(path.read_text(encoding="utf-8"), root=path.parent)


def manifest_to_dict(manifest):
    patients = []
    for p in manifest.patients:
        sequences = {}
        for key in sorted(p.sequences, key=SEQUENCE_KEYS.index):
            ref = p.sequences[key]
            if ref.explicit_frame_rate or ref.explicit_bit_depth:
                entry = {"path": ref.path}
                if ref.explicit_frame_rate:
                    entry["frame_rate"] = ref.frame_rate
                if ref.explicit_bit_depth:
                    entry["bit_depth"] = ref.bit_depth
            else:
                entry = ref.path
            sequences[key_to_str(key)] = entry
        entry = {
            "id": p.id, "label": p.label, "age": p.age, "sex": p.sex, "mtici": p.mtici,
            "nihss": p.nihss, "passes": p.passes, "race": p.race,
            "sequences": sequences,
            "masks": {key_to_str(k): p.masks[k] for k in sorted(p.masks, key=SEQUENCE_KEYS.index)},
        }
        patients.append(entry)
    return {
        "frame_rate_default": manifest.frame_rate_default,
        "bit_depth_default": manifest.bit_depth_default,
        "patients": patients,
    }


def save_manifest(manifest, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest_to_dict(manifest), indent=2) + "\n", encoding="utf-8")
    return path


# -- rasters ------------------------------------------------------------------


def read_raster(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"raster not found: {path}")
    with Image.open(path) as img:
        if img.mode not in ("L", "I;16", "I;16B", "I", "1"):
            raise UnsupportedBitDepth(f"{path}: unsupported raster mode {img.mode}")
        return np.asarray(img).astype(np.int64)


def write_raster(path, pixels, bit_depth=8):
    """Write a 2D integer raster as lossless PNG (8 or 16 bit)."""
    pixels = np.asarray(pixels)
    if bit_depth == 8:
        arr = pixels.astype(np.uint8)
    elif bit_depth == 16:
        arr = pixels.astype(np.uint16)
    else:
        raise UnsupportedBitDepth(f"bit depth {bit_depth} not in {{8, 16}}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path, format="PNG")


def load_frame_stack(ref, root=Path(".")):
    if ref.bit_depth not in (8, 16):
        raise UnsupportedBitDepth(f"bit depth {ref.bit_depth} not in {{8, 16}}")
    directory = Path(root) / ref.path
    if not directory.is_dir():
        raise MissingFile(f"frame directory not found: {directory}")
    files = sorted(f for f in directory.iterdir() if f.suffix.lower() in RASTER_SUFFIXES)
    if not files:
        raise EmptyStack(f"no raster frames in {directory}")
    frames = [read_raster(f) for f in files]
    shape = frames[0].shape
    for f, frame in zip(files, frames):
        if frame.ndim != 2:
            raise DimensionMismatch(f"{f}: expected a single-channel raster")
        if frame.shape != shape:
            raise DimensionMismatch(f"{f}: frame is {frame.shape}, expected {shape}")
    stack = np.stack(frames)
    top = 2 ** ref.bit_depth - 1
    if stack.min() < 0 or stack.max() > top:
        raise UnsupportedBitDepth(
            f"{directory}: pixel values span [{stack.min()}, {stack.max()}], outside {ref.bit_depth}-bit range"
        )
    return FrameStack(stack, ref.bit_depth, ref.frame_rate)


def load_mask(path, root=Path(".")):
    return TdtMask(read_raster(Path(root) / path) > 0)


def load_sequence(manifest, patient, key):
    """Load the (stack, mask) pair for one (phase, view) of a patient."""
    if key not in patient.sequences:
        raise MissingFile(f"{patient.id}: no sequence {key_to_str(key)}")
    stack = load_frame_stack(patient.sequences[key], manifest.root)
    mask = load_mask(patient.masks[key], manifest.root)
    if mask.shape != stack.shape:
        raise DimensionMismatch(
            f"{patient.id} {key_to_str(key)}: mask {mask.shape} vs frames {stack.shape}"
        )
    return stack, mask


def _patient_issues(manifest, patient):
    issues = []
    for key in SEQUENCE_KEYS:
        name = key_to_str(key)
        if key not in patient.sequences:
            issues.append(Issue(patient.id, name, "MissingSequence", f"no {name} sequence"))
            continue
        try:
            load_sequence(manifest, patient, key)
        except NoReflowError as exc:
            issues.append(Issue(patient.id, name, type(exc).__name__, str(exc)))
    return issues


def validate_cohort(manifest, jobs=1):
    """Return the list of issues blocking the full four-sequence pipeline."""
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_patient = list(pool.map(lambda p: _patient_issues(manifest, p), manifest.patients))
    else:
        per_patient = [_patient_issues(manifest, p) for p in manifest.patients]
    return [issue for issues in per_patient for issue in issues]
