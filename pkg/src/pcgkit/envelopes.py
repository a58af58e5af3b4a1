"""Amplitude envelope detectors for heart-sound localization.

Three detectors produce an :class:`Envelope`: analytic-signal magnitude,
Shannon energy, and the wavelet energy spectrum. All are typically
followed by :func:`smooth` (20 Hz zero-phase lowpass) and a max
renormalization so the downstream 15% peak threshold means the same
thing regardless of method.
"""

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import hilbert

from .core import SampledSignal, SignalLabel, butterworth_lowpass_zero_phase
from .errors import ContractViolationError, InvalidInputError
from .wavelets import ScaleGrid, WaveletKind, wes

SHANNON_EPS = 1e-12


class EnvelopeMethod(enum.Enum):
    HILBERT = "hilbert"
    SHANNON = "shannon"
    WES = "wes"


@dataclass(frozen=True)
class Envelope:
    """Nonnegative amplitude track plus how it was made.

    ``smoothing_cutoff_hz`` is None until :func:`smooth` has been applied.
    """

    track: SampledSignal
    method: EnvelopeMethod
    smoothing_cutoff_hz: float = None

    @property
    def samples(self):
        return self.track.samples

    @property
    def rate_hz(self):
        return self.track.rate_hz

    def normalized(self):
        """Envelope rescaled to a maximum of 1. All-zero tracks pass through."""
        peak = float(np.max(self.track.samples)) if len(self.track.samples) else 0.0
        if peak <= 0:
            return self
        return replace(self, track=self.track.with_samples(
            self.track.samples / peak, norm_scale=1.0 / peak))


def _as_envelope_signal(sig, values):
    return SampledSignal(values, sig.rate_hz, SignalLabel.ENVELOPE,
                         sig.start_time_s, dict(sig.meta))


def hilbert_envelope(frame):
    """Instantaneous amplitude via the analytic signal.

    The quadrature component comes from the frequency-domain construction
    (negative frequencies zeroed, positive doubled), so the result
    dominates the rectified input pointwise.

    Parameters
    ----------
    frame : SampledSignal

    Returns
    -------
    Envelope
    """
    if len(frame.samples) == 0:
        raise InvalidInputError("frame is empty")
    analytic = hilbert(frame.samples)
    e = np.abs(analytic)
    return Envelope(_as_envelope_signal(frame, e), EnvelopeMethod.HILBERT)


def shannon_energy_envelope(frame):
    """Shannon energy ``-x**2 * log(x**2 + eps)`` of a normalized frame.

    Emphasizes mid-amplitude content and suppresses both the noise floor
    and the (rare) full-scale samples. Requires ``max|x| <= 1`` so the
    transform stays nonnegative; tiny negative values produced at exactly
    ``|x| = 1`` by the stabilizing epsilon are clipped to zero.

    Raises
    ------
    ContractViolationError
        If the frame was not max-abs normalized first.
    """
    if len(frame.samples) == 0:
        raise InvalidInputError("frame is empty")
    x = frame.samples
    if np.max(np.abs(x)) > 1 + 1e-9:
        raise ContractViolationError(
            "Shannon energy requires a max-abs normalized frame")
    sq = x * x
    e = -sq * np.log(sq + SHANNON_EPS)
    np.maximum(e, 0.0, out=e)
    return Envelope(_as_envelope_signal(frame, e), EnvelopeMethod.SHANNON)


def wes_envelope(frame, kind=None, grid=None):
    """Wavelet-energy-spectrum envelope.

    Parameters
    ----------
    frame : SampledSignal
    kind : WaveletKind, optional
        Defaults to Morlet.
    grid : ScaleGrid, optional
        Defaults to the standard 64-step 10..500 Hz ladder at the frame
        rate.
    """
    if kind is None:
        kind = WaveletKind.morlet()
    if grid is None:
        grid = ScaleGrid.log_spaced(kind, frame.rate_hz)
    track = wes(frame, kind, grid)
    return Envelope(track, EnvelopeMethod.WES)


def smooth(envelope, cutoff_hz=20.0, order=4):
    """Zero-phase lowpass an envelope and clip filter undershoot to zero.

    The default 20 Hz cutoff sits in a broad stable region; well below
    (around 8 Hz) adjacent S1/S2 peaks start to merge and timing-based
    estimates degrade, so lower values should be used deliberately.
    """
    filtered = butterworth_lowpass_zero_phase(envelope.track, cutoff_hz, order)
    clipped = filtered.with_samples(np.maximum(filtered.samples, 0.0))
    return replace(envelope, track=clipped, smoothing_cutoff_hz=float(cutoff_hz))


def compute_envelope(frame, method, kind=None, grid=None,
                     smoothing_cutoff_hz=20.0, order=4):
    """Detector dispatch plus the standard smooth-then-renormalize chain."""
    method = EnvelopeMethod(method) if not isinstance(method, EnvelopeMethod) else method
    if method is EnvelopeMethod.HILBERT:
        env = hilbert_envelope(frame)
    elif method is EnvelopeMethod.SHANNON:
        env = shannon_energy_envelope(frame)
    else:
        env = wes_envelope(frame, kind=kind, grid=grid)
    return smooth(env, smoothing_cutoff_hz, order).normalized()
