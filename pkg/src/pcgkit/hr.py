"""Heart-rate estimation from ECG reference frames and PCG segmentations.

Two interval-to-rate conversions are first class citizens because they
disagree: the verbatim average of the two interval reciprocals
(EQ7_VERBATIM) roughly doubles the physiologic rate for typical interval
splits, while the cycle-period form (CYCLE_PERIOD, the default) treats
one systole plus one diastole as a full beat. Their ratio is the exact
algebraic factor ``(t_sys + t_dias)**2 / (2 * t_sys * t_dias)``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .core import SampledSignal, normalize_max_abs
from .envelopes import EnvelopeMethod, compute_envelope
from .errors import (
    ContractViolationError,
    DegenerateSignalError,
    InsufficientPeaksError,
    InvalidSegmentationError,
    PcgKitError,
    StageError,
)
from .segmentation import CycleSegmentation, segment
from .wavelets import dwt_denoise_db4

HR_MIN_BPM = 20.0
HR_MAX_BPM = 240.0


class HrSource(enum.Enum):
    ECG = "ecg"
    PCG_HILBERT = "pcg_hilbert"
    PCG_SHANNON = "pcg_shannon"
    PCG_WES = "pcg_wes"


class HrFormula(enum.Enum):
    EQ7_VERBATIM = "eq7"
    CYCLE_PERIOD = "cycle"


_METHOD_SOURCE = {
    EnvelopeMethod.HILBERT: HrSource.PCG_HILBERT,
    EnvelopeMethod.SHANNON: HrSource.PCG_SHANNON,
    EnvelopeMethod.WES: HrSource.PCG_WES,
}


@dataclass(frozen=True)
class HrEstimate:
    """One heart-rate value with its provenance and acceptance flags."""

    bpm: float
    source: HrSource
    formula: HrFormula
    frame_index: int = 0
    flags: tuple = ()

    @property
    def accepted(self):
        """True when the estimate lies in the physiologic 20..240 band."""
        return "out_of_range" not in self.flags


def _range_flags(bpm):
    return ("out_of_range",) if not HR_MIN_BPM <= bpm <= HR_MAX_BPM else ()


def hr_from_ecg_frame(frame, prominence=0.8, frame_index=0):
    """Reference heart rate from R-peak spacing.

    R-peaks are local maxima with topographic prominence at least
    ``prominence`` on the detrended, max-abs normalized frame; the rate
    is ``60 * rate_hz / mean(sample gaps)``.

    Raises
    ------
    ContractViolationError
        If the frame exceeds unit amplitude (not normalized).
    InsufficientPeaksError
        If fewer than 2 R-peaks are found.
    """
    x = frame.samples
    if np.max(np.abs(x)) > 1 + 1e-9:
        raise ContractViolationError(
            "ECG frame must be detrended and max-abs normalized")
    locs, _ = find_peaks(x, prominence=prominence)
    if len(locs) < 2:
        raise InsufficientPeaksError(
            f"found {len(locs)} R-peaks, need >= 2")
    mean_gap = float(np.mean(np.diff(locs)))
    bpm = 60.0 * frame.rate_hz / mean_gap
    return HrEstimate(bpm, HrSource.ECG, HrFormula.CYCLE_PERIOD,
                      frame_index, _range_flags(bpm))


def hr_from_pcg(seg, formula=HrFormula.CYCLE_PERIOD,
                source=HrSource.PCG_SHANNON, frame_index=0):
    """Heart rate from the mean systolic and diastolic intervals.

    EQ7_VERBATIM computes ``(1/t_sys + 1/t_dias) * 60 / 2``; CYCLE_PERIOD
    computes ``60 / (t_sys + t_dias)``.

    Raises
    ------
    InvalidSegmentationError
        If either interval is non-positive.
    """
    formula = HrFormula(formula) if not isinstance(formula, HrFormula) else formula
    if not (seg.t_sys > 0 and seg.t_dias > 0):
        raise InvalidSegmentationError(
            f"intervals must be positive, got t_sys={seg.t_sys}, "
            f"t_dias={seg.t_dias}")
    if formula is HrFormula.EQ7_VERBATIM:
        bpm = (1.0 / seg.t_sys + 1.0 / seg.t_dias) * 30.0
    else:
        bpm = 60.0 / (seg.t_sys + seg.t_dias)
    return HrEstimate(bpm, source, formula, frame_index, _range_flags(bpm))


@dataclass(frozen=True)
class PipelineResult:
    """HR estimate plus every intermediate product for inspection."""

    hr: HrEstimate
    denoised: SampledSignal
    normalized: SampledSignal
    envelope: object
    segmentation: CycleSegmentation


def hr_pipeline(pcg_frame, method=EnvelopeMethod.SHANNON,
                formula=HrFormula.CYCLE_PERIOD, frame_index=0,
                denoise_levels=8, denoise_threshold=0.15,
                smoothing_cutoff_hz=20.0, min_height_frac=0.15,
                min_distance_s=0.125, baseline_frac=0.15,
                wavelet_kind=None):
    """Full heart-rate chain on one raw PCG frame.

    Stages: db4 denoise, max-abs normalize, envelope extraction, 20 Hz
    zero-phase smoothing with renormalization, peak segmentation, rate
    conversion. Any toolkit error raised inside a stage is rethrown as a
    :class:`StageError` naming that stage. An all-zero frame passes the
    normalize stage unscaled and fails at segmentation, which is the
    informative failure.

    Returns
    -------
    PipelineResult
    """
    method = EnvelopeMethod(method) if not isinstance(method, EnvelopeMethod) else method

    def run(stage, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PcgKitError as exc:
            raise StageError(stage, exc) from exc

    denoised = run("denoise", dwt_denoise_db4, pcg_frame,
                   denoise_levels, denoise_threshold)
    try:
        normalized = normalize_max_abs(denoised)
    except DegenerateSignalError:
        normalized = denoised
    envelope = run("envelope", compute_envelope, normalized, method,
                   kind=wavelet_kind, smoothing_cutoff_hz=smoothing_cutoff_hz)
    seg = run("segmentation", segment, envelope, min_height_frac,
              min_distance_s, baseline_frac)
    hr = run("hr", hr_from_pcg, seg, formula, _METHOD_SOURCE[method],
             frame_index)
    return PipelineResult(hr, denoised, normalized, envelope, seg)
