"""Envelope peak detection, S1/S2 labeling, and cycle timing features.

The rules are deliberately small and exact: strict local maxima with a
relative height floor, greedy tall-first distance suppression, a
first-gap labeling decision, and threshold-crossing rise/decay times.
Everything downstream (heart rate, blood-pressure features) consumes the
:class:`CycleSegmentation` produced here.
"""

import enum
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InsufficientCyclesError,
    InsufficientPeaksError,
    InvalidInputError,
)


class PeakLabel(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class PeakEvent:
    """One detected envelope peak.

    ``time_s`` is measured from the frame start; ``index`` is the sample
    position inside the frame.
    """

    time_s: float
    height: float
    label: PeakLabel = PeakLabel.UNLABELED
    index: int = -1


@dataclass(frozen=True)
class RiseDecayTimes:
    """Averaged threshold-crossing times around S1 and S2 peaks."""

    t_rs1: float
    t_ds1: float
    t_rd2: float
    t_dd2: float
    n_skipped: int = 0

    @property
    def t_s1(self):
        return self.t_rs1 + self.t_ds1

    @property
    def t_s2(self):
        return self.t_rd2 + self.t_dd2


@dataclass(frozen=True)
class CycleSegmentation:
    """Labeled peaks plus every per-cycle timing quantity."""

    peaks: tuple
    t_sys: float
    t_dias: float
    t_rs1: float
    t_ds1: float
    t_rd2: float
    t_dd2: float
    n_cycles: int

    @property
    def t_s1(self):
        return self.t_rs1 + self.t_ds1

    @property
    def t_s2(self):
        return self.t_rd2 + self.t_dd2


def _strict_local_maxima(y):
    """Indices of strict local maxima; plateaus report their center sample.

    Frame endpoints are never maxima since they lack one neighbor.
    """
    idx = []
    n = len(y)
    i = 1
    while i < n - 1:
        if y[i] > y[i - 1]:
            j = i
            while j + 1 < n and y[j + 1] == y[i]:
                j += 1
            if j < n - 1 and y[j + 1] < y[i]:
                idx.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return idx


def find_envelope_peaks(envelope, min_height_frac=0.15, min_distance_s=0.125):
    """Apply the raw peak rules and return every surviving peak.

    Rules: strict local maxima at or above ``min_height_frac`` of the
    envelope maximum, then greedy suppression that keeps the taller of
    any two peaks closer than ``min_distance_s`` (ties keep the earlier).
    No minimum-count requirement; see :func:`detect_peaks` for the
    usable-frame contract.

    Returns
    -------
    list of PeakEvent
        Sorted by time, all UNLABELED.
    """
    y = envelope.samples
    rate = envelope.rate_hz
    if len(y) == 0:
        raise InvalidInputError("empty envelope")
    peak_max = float(np.max(y))
    if peak_max > 1 + 1e-9:
        raise InvalidInputError("envelope must be normalized to max 1")
    floor = min_height_frac * peak_max
    cand = [i for i in _strict_local_maxima(y) if y[i] >= floor]
    # tall-first greedy suppression; equal heights keep the earlier peak
    order = sorted(cand, key=lambda i: (-y[i], i))
    min_gap = min_distance_s * rate
    kept = []
    for i in order:
        if all(abs(i - j) >= min_gap for j in kept):
            kept.append(i)
    kept.sort()
    return [PeakEvent(time_s=i / rate, height=float(y[i]), index=i) for i in kept]


def detect_peaks(envelope, min_height_frac=0.15, min_distance_s=0.125):
    """Peak detection for segmentation; a usable frame needs 3 peaks.

    Raises
    ------
    InsufficientPeaksError
        If fewer than 3 peaks survive the rules, since labeling and
        interval work are impossible below that.
    """
    peaks = find_envelope_peaks(envelope, min_height_frac, min_distance_s)
    if len(peaks) < 3:
        raise InsufficientPeaksError(
            f"only {len(peaks)} peaks survive detection; need >= 3")
    return peaks


def label_s1_s2(peaks):
    """Assign alternating S1/S2 labels from the first-gap comparison.

    A shorter first gap than second gap means the frame starts on an S1
    (systole is the shorter interval at rest); otherwise it starts on an
    S2. Exact equality labels S1 first.
    """
    if len(peaks) < 3:
        raise InsufficientPeaksError(
            f"labeling needs >= 3 peaks, got {len(peaks)}")
    times = [p.time_s for p in peaks]
    first_is_s1 = (times[1] - times[0]) <= (times[2] - times[1])
    labels = (PeakLabel.S1, PeakLabel.S2) if first_is_s1 else (PeakLabel.S2, PeakLabel.S1)
    return [replace(p, label=labels[k % 2]) for k, p in enumerate(peaks)]


def cycle_intervals(labeled, rate_hz=None):
    """Mean systolic and diastolic intervals from a labeled peak list.

    ``t_sys`` averages S1-to-next-S2 gaps, ``t_dias`` averages S2-to-next-S1
    gaps, and ``n_cycles`` counts the former. ``rate_hz`` is accepted for
    callers that track peaks by sample index; the computation itself is
    purely time based.

    Returns
    -------
    (float, float, int)
        ``(t_sys, t_dias, n_cycles)``.

    Raises
    ------
    InsufficientCyclesError
        If either interval kind has no complete pair.
    """
    sys_gaps = []
    dias_gaps = []
    for a, b in zip(labeled, labeled[1:]):
        if a.label is PeakLabel.S1 and b.label is PeakLabel.S2:
            sys_gaps.append(b.time_s - a.time_s)
        elif a.label is PeakLabel.S2 and b.label is PeakLabel.S1:
            dias_gaps.append(b.time_s - a.time_s)
    if not sys_gaps or not dias_gaps:
        raise InsufficientCyclesError(
            f"need at least one S1->S2 and one S2->S1 pair, "
            f"got {len(sys_gaps)} and {len(dias_gaps)}")
    return float(np.mean(sys_gaps)), float(np.mean(dias_gaps)), len(sys_gaps)


def _crossing_backward(y, peak_idx, level, stop_idx):
    """Last sample at or below level before the peak, or None if truncated."""
    for i in range(peak_idx - 1, stop_idx, -1):
        if y[i] <= level:
            return i
    return None


def _crossing_forward(y, peak_idx, level, stop_idx):
    for i in range(peak_idx + 1, stop_idx):
        if y[i] <= level:
            return i
    return None


def rise_decay_times(envelope, labeled, baseline_frac=0.15):
    """Average rise and decay times of S1 and S2 envelope peaks.

    For each peak the baseline is ``baseline_frac`` of that peak's own
    height. Rise time runs from the last preceding sample at or below the
    baseline to the peak; decay time from the peak to the first following
    such sample. Searches stop at the neighboring peaks; a peak whose
    crossing is cut off there (or by the frame edge) is skipped and
    counted.

    Returns
    -------
    RiseDecayTimes

    Raises
    ------
    InsufficientCyclesError
        If no S1 or no S2 peak yields a complete rise/decay pair.
    """
    y = envelope.samples
    rate = envelope.rate_hz
    per_label = {PeakLabel.S1: ([], []), PeakLabel.S2: ([], [])}
    skipped = 0
    for k, p in enumerate(labeled):
        if p.label not in per_label:
            continue
        idx = p.index if p.index >= 0 else int(round(p.time_s * rate))
        level = baseline_frac * p.height
        lo = labeled[k - 1].index if k > 0 else -1
        hi = labeled[k + 1].index if k + 1 < len(labeled) else len(y)
        back = _crossing_backward(y, idx, level, lo)
        fwd = _crossing_forward(y, idx, level, hi)
        if back is None or fwd is None:
            warnings.warn(
                f"peak at {p.time_s:.3f} s has truncated support, skipped",
                RuntimeWarning, stacklevel=2)
            skipped += 1
            continue
        rises, decays = per_label[p.label]
        rises.append((idx - back) / rate)
        decays.append((fwd - idx) / rate)
    for label, (rises, _) in per_label.items():
        if not rises:
            raise InsufficientCyclesError(
                f"no usable {label.value} peak for rise/decay timing")
    s1_r, s1_d = per_label[PeakLabel.S1]
    s2_r, s2_d = per_label[PeakLabel.S2]
    return RiseDecayTimes(
        t_rs1=float(np.mean(s1_r)), t_ds1=float(np.mean(s1_d)),
        t_rd2=float(np.mean(s2_r)), t_dd2=float(np.mean(s2_d)),
        n_skipped=skipped)


def segment(envelope, min_height_frac=0.15, min_distance_s=0.125,
            baseline_frac=0.15):
    """Full segmentation of one normalized, smoothed envelope.

    Chains peak detection, labeling, interval averaging, and rise/decay
    timing into a :class:`CycleSegmentation`.
    """
    labeled = label_s1_s2(detect_peaks(envelope, min_height_frac, min_distance_s))
    t_sys, t_dias, n_cycles = cycle_intervals(labeled)
    rd = rise_decay_times(envelope, labeled, baseline_frac)
    return CycleSegmentation(
        peaks=tuple(labeled), t_sys=t_sys, t_dias=t_dias,
        t_rs1=rd.t_rs1, t_ds1=rd.t_ds1, t_rd2=rd.t_rd2, t_dd2=rd.t_dd2,
        n_cycles=n_cycles)
