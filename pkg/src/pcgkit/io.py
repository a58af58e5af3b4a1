"""Dataset ingestion, stream alignment, and report serialization.

A dataset is a directory of subject folders, each holding ``pcg.wav``
(16-bit PCM), an optional ``ecg.txt`` (one value per line, or
"time,value" lines), and an optional ``meta.json`` with references and
free-form metadata. Reports are JSON with sorted keys so identical runs
produce identical bytes; plot series go to CSV.
"""

import json
import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SampledSignal, SignalLabel
from .errors import (
    EmptyDataError,
    InsufficientEventsError,
    InvalidInputError,
    MissingFileError,
    ParseError,
    UnsupportedEncodingError,
)

PCM16_SCALE = 32768.0


def read_wav_pcm16(path, label=SignalLabel.PCG):
    """Read a mono (or first-channel) 16-bit PCM WAV file.

    Samples are scaled to [-1, 1) by dividing by 32768; the rate comes
    from the header.

    Raises
    ------
    MissingFileError, UnsupportedEncodingError, EmptyDataError
    """
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"no such file: {path}")
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getcomptype() != "NONE":
                raise UnsupportedEncodingError(
                    f"{path}: compressed WAV not supported")
            if wf.getsampwidth() != 2:
                raise UnsupportedEncodingError(
                    f"{path}: only 16-bit PCM supported, "
                    f"got {8 * wf.getsampwidth()}-bit")
            n_frames = wf.getnframes()
            if n_frames == 0:
                raise EmptyDataError(f"{path}: zero-length data chunk")
            n_channels = wf.getnchannels()
            rate = wf.getframerate()
            raw = wf.readframes(n_frames)
    except wave.Error as exc:
        raise UnsupportedEncodingError(f"{path}: {exc}") from exc
    data = np.frombuffer(raw, dtype="<i2").reshape(-1, n_channels)[:, 0]
    return SampledSignal(data.astype(np.float64) / PCM16_SCALE, float(rate),
                         label)


def write_wav_pcm16(path, signal):
    """Write a signal as mono 16-bit PCM WAV, clipping to full scale."""
    path = Path(path)
    scaled = np.clip(np.round(signal.samples * PCM16_SCALE), -32768, 32767)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(round(signal.rate_hz)))
        wf.writeframes(scaled.astype("<i2").tobytes())


def read_ecg_text(path, rate_hz=None, label=SignalLabel.ECG):
    """Read an ECG from a text file.

    Two layouts are accepted: one numeric value per line with the rate
    supplied by the caller, or "time,value" lines from which the rate is
    inferred (the time column must increase uniformly).

    Raises
    ------
    ParseError
        Non-numeric content (with its line number), or a time column
        that is not monotone.
    """
    path = Path(path)
    if not path.exists():
        raise MissingFileError(f"no such file: {path}")
    times = []
    values = []
    has_time = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if has_time is None:
                has_time = len(parts) == 2
            if len(parts) != (2 if has_time else 1):
                raise ParseError(
                    f"{path}:{line_no}: inconsistent column count", line_no)
            try:
                if has_time:
                    times.append(float(parts[0]))
                    values.append(float(parts[1]))
                else:
                    values.append(float(parts[0]))
            except ValueError:
                raise ParseError(
                    f"{path}:{line_no}: not numeric: {line!r}", line_no) from None
    if not values:
        raise EmptyDataError(f"{path}: no samples")
    if has_time:
        dt = np.diff(times)
        if len(dt) == 0:
            raise ParseError(f"{path}: single row, rate cannot be inferred")
        if np.any(dt <= 0):
            bad = int(np.argmax(dt <= 0)) + 2
            raise ParseError(f"{path}: time column not increasing at line {bad}",
                             bad)
        rate_hz = 1.0 / float(np.median(dt))
    elif rate_hz is None:
        raise InvalidInputError("rate_hz required for plain value files")
    return SampledSignal(np.asarray(values), float(rate_hz), label)


def write_ecg_text(path, signal):
    """Write an ECG as one value per line (rate travels in metadata)."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in signal.samples:
            fh.write(f"{float(v)!r}\n")


@dataclass(frozen=True)
class AlignmentResult:
    """Best lag between two event streams.

    ``lag_s`` added to the second stream's times aligns them with the
    first; ``score`` is the matched fraction; ``low_confidence`` marks
    scores under 0.5.
    """

    lag_s: float
    score: float
    low_confidence: bool


def _match_stats(ref, other, lag, tol):
    """Greedy one-to-one matching on sorted event lists."""
    i = j = matched = 0
    residual = 0.0
    while i < len(ref) and j < len(other):
        d = other[j] + lag - ref[i]
        if abs(d) <= tol:
            matched += 1
            residual += abs(d)
            i += 1
            j += 1
        elif d < 0:
            j += 1
        else:
            i += 1
    return matched, residual


def align_streams(ref_events, other_events, max_lag_s=0.5, tol_s=0.040,
                  step_s=0.001):
    """Find the lag that best matches two event-time streams.

    Lags from ``-max_lag_s`` to ``+max_lag_s`` in ``step_s`` increments
    are scored by the number of events matching within ``tol_s``; ties
    prefer smaller matched residual, then smaller absolute lag.

    Raises
    ------
    InsufficientEventsError
        If either stream has fewer than 3 events.
    """
    ref = sorted(float(t) for t in ref_events)
    other = sorted(float(t) for t in other_events)
    if len(ref) < 3 or len(other) < 3:
        raise InsufficientEventsError(
            f"need >= 3 events per stream, got {len(ref)} and {len(other)}")
    n_steps = int(round(max_lag_s / step_s))
    best = None
    for k in range(-n_steps, n_steps + 1):
        lag = k * step_s
        matched, residual = _match_stats(ref, other, lag, tol_s)
        key = (-matched, residual, abs(lag), lag)
        if best is None or key < best[0]:
            best = (key, lag, matched)
    _, lag, matched = best
    score = matched / min(len(ref), len(other))
    return AlignmentResult(lag_s=lag, score=score, low_confidence=score < 0.5)


@dataclass(frozen=True)
class SubjectRecord:
    """One subject's signals, references, and metadata."""

    subject_id: str
    pcg: SampledSignal
    ecg: SampledSignal = None
    sbp_ref: float = None
    dbp_ref: float = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pcg is None:
            raise InvalidInputError("subject record requires a PCG signal")
        if self.sbp_ref is not None and self.dbp_ref is not None:
            if not self.sbp_ref > self.dbp_ref > 0:
                raise InvalidInputError(
                    f"need sbp_ref > dbp_ref > 0, got "
                    f"{self.sbp_ref}/{self.dbp_ref}")


def load_subject_dir(subject_dir):
    """Load one subject folder (``pcg.wav`` required, rest optional)."""
    subject_dir = Path(subject_dir)
    meta = {}
    meta_path = subject_dir / "meta.json"
    if meta_path.exists():
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    pcg = read_wav_pcm16(subject_dir / "pcg.wav")
    ecg = None
    ecg_path = subject_dir / "ecg.txt"
    if ecg_path.exists():
        ecg = read_ecg_text(ecg_path, rate_hz=meta.get("ecg_rate_hz"))
    return SubjectRecord(
        subject_id=str(meta.get("subject_id", subject_dir.name)),
        pcg=pcg, ecg=ecg,
        sbp_ref=meta.get("sbp_ref"), dbp_ref=meta.get("dbp_ref"),
        meta=meta)


def load_dataset(root):
    """Load every subject folder under a dataset root, sorted by name."""
    root = Path(root)
    if not root.is_dir():
        raise MissingFileError(f"dataset directory not found: {root}")
    dirs = sorted(p for p in root.iterdir() if (p / "pcg.wav").exists())
    if not dirs:
        raise EmptyDataError(f"{root}: no subject folders with pcg.wav")
    return [load_subject_dir(d) for d in dirs]


def write_subject_dir(subject_dir, pcg, ecg=None, meta=None):
    """Write one subject folder in the layout :func:`load_subject_dir` reads."""
    subject_dir = Path(subject_dir)
    subject_dir.mkdir(parents=True, exist_ok=True)
    write_wav_pcm16(subject_dir / "pcg.wav", pcg)
    meta = dict(meta or {})
    if ecg is not None:
        write_ecg_text(subject_dir / "ecg.txt", ecg)
        meta.setdefault("ecg_rate_hz", ecg.rate_hz)
    with open(subject_dir / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_json_report(path, payload):
    """Serialize a report with sorted keys for reproducible bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv_series(path, header, rows):
    """Write a simple CSV; values are formatted with repr for round trips."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                repr(float(v)) if isinstance(v, (float, np.floating))
                else str(v) for v in row) + "\n")
