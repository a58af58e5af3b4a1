"""Semi-empirical blood-pressure regression on PCG timing features.

Both pressures are affine in ten coefficients over an expanded feature
row (linear terms, heart rate and its square, two squared durations, one
duration interaction). A built-in reference coefficient set is included;
fitting and subject-wise leave-one-out cross-validation let callers
derive their own.

Time features are handled under an explicit unit convention (seconds by
default, milliseconds optional) because the coefficient values only make
sense together with the convention they were fitted under; converting a
coefficient set between conventions preserves predictions exactly.
"""

import enum
from dataclasses import dataclass, fields as dataclass_fields, replace

import numpy as np

from .errors import (
    InsufficientDataError,
    InvalidInputError,
    NoValidFramesError,
    NumericOverflowError,
    RankDeficiencyError,
)

SBP_PLAUSIBLE = (60.0, 220.0)
DBP_PLAUSIBLE = (30.0, 140.0)
N_COEFFS_PER_SIDE = 10


class UnitConvention(enum.Enum):
    SECONDS = "s"
    MILLISECONDS = "ms"


@dataclass(frozen=True)
class PcgFeatureVector:
    """The eight averaged timing features plus PCG heart rate, in seconds.

    ``t_s1`` and ``t_s2`` are derived, so the sum identities hold by
    construction.
    """

    t_sys: float
    t_dias: float
    t_rs1: float
    t_ds1: float
    t_rd2: float
    t_dd2: float
    hr_pcg: float

    def __post_init__(self):
        # Zero is allowed so the intercept-only evaluation is expressible;
        # upstream extraction screens out non-positive measured durations.
        for f in dataclass_fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v) or v < 0:
                raise InvalidInputError(
                    f"feature {f.name} must be nonnegative and finite, got {v}")

    @property
    def t_s1(self):
        return self.t_rs1 + self.t_ds1

    @property
    def t_s2(self):
        return self.t_rd2 + self.t_dd2

    @classmethod
    def from_segmentation(cls, seg, hr_bpm):
        return cls(t_sys=seg.t_sys, t_dias=seg.t_dias, t_rs1=seg.t_rs1,
                   t_ds1=seg.t_ds1, t_rd2=seg.t_rd2, t_dd2=seg.t_dd2,
                   hr_pcg=hr_bpm)


# Coefficient field order matches the design-row term order below.
_SBP_FIELDS = ("c1", "sigma_sys", "sigma_rs1", "sigma_ds1", "sigma_s1",
               "sigma_s_hr", "sigma_s_hr2", "sigma_sys2", "sigma_s12",
               "sigma_rds1")
_DBP_FIELDS = ("c2", "alpha_dias", "alpha_rd2", "alpha_dd2", "alpha_s2",
               "alpha_d_hr", "alpha_d_hr2", "alpha_dias2", "alpha_s22",
               "alpha_rdd2")

# Per-term time dimension: scaling exponent applied when converting the
# convention (0 = unitless/HR term, 1 = linear time, 2 = quadratic time).
_TIME_POWERS = (0, 1, 1, 1, 1, 0, 0, 2, 2, 2)


@dataclass(frozen=True)
class BpCoefficients:
    """Twenty regression coefficients plus the unit convention they assume."""

    c1: float
    sigma_sys: float
    sigma_rs1: float
    sigma_ds1: float
    sigma_s1: float
    sigma_s_hr: float
    sigma_s_hr2: float
    sigma_sys2: float
    sigma_s12: float
    sigma_rds1: float
    c2: float
    alpha_dias: float
    alpha_rd2: float
    alpha_dd2: float
    alpha_s2: float
    alpha_d_hr: float
    alpha_d_hr2: float
    alpha_dias2: float
    alpha_s22: float
    alpha_rdd2: float
    unit_convention: UnitConvention = UnitConvention.SECONDS

    def __post_init__(self):
        for f in dataclass_fields(self):
            if f.name == "unit_convention":
                continue
            if not np.isfinite(getattr(self, f.name)):
                raise InvalidInputError(f"coefficient {f.name} is not finite")

    @classmethod
    def reference(cls, unit_convention=UnitConvention.SECONDS):
        """Built-in reference set fitted on resting adult recordings."""
        return cls(
            c1=0.655, sigma_sys=-1.112, sigma_rs1=48.90, sigma_ds1=48.45,
            sigma_s1=-50.44, sigma_s_hr=-6.940e-3, sigma_s_hr2=0.41e-5,
            sigma_sys2=1.689, sigma_s12=22.98, sigma_rds1=-59.02,
            c2=1.799, alpha_dias=2.463, alpha_rd2=11.96, alpha_dd2=7.878,
            alpha_s2=-9.643, alpha_d_hr=-5.291e-2, alpha_d_hr2=3.05e-4,
            alpha_dias2=-2.816, alpha_s22=30.49, alpha_rdd2=-10.94,
            unit_convention=unit_convention)

    def sbp_vector(self):
        return np.array([getattr(self, f) for f in _SBP_FIELDS])

    def dbp_vector(self):
        return np.array([getattr(self, f) for f in _DBP_FIELDS])

    def converted(self, target):
        """Equivalent coefficient set under the other unit convention.

        Linear time coefficients pick up one factor of 1000 per power of
        time, so predictions are identical for the same physical features.
        """
        target = UnitConvention(target)
        if target is self.unit_convention:
            return self
        factor = 1000.0 if target is UnitConvention.MILLISECONDS else 1e-3
        new = {}
        for names in (_SBP_FIELDS, _DBP_FIELDS):
            for name, power in zip(names, _TIME_POWERS):
                new[name] = getattr(self, name) / factor ** power
        return replace(self, unit_convention=target, **new)

    def to_json_dict(self):
        d = {f: getattr(self, f) for f in _SBP_FIELDS + _DBP_FIELDS}
        d["unit_convention"] = self.unit_convention.value
        return d

    @classmethod
    def from_json_dict(cls, d):
        kwargs = {f: float(d[f]) for f in _SBP_FIELDS + _DBP_FIELDS}
        return cls(unit_convention=UnitConvention(d["unit_convention"]),
                   **kwargs)


def _time_scale(convention):
    return 1000.0 if convention is UnitConvention.MILLISECONDS else 1.0


def design_row_sbp(f, unit_convention=UnitConvention.SECONDS):
    """Expanded systolic-side regression row for one feature vector."""
    k = _time_scale(UnitConvention(unit_convention))
    t_sys, t_rs1, t_ds1, t_s1 = (k * f.t_sys, k * f.t_rs1,
                                 k * f.t_ds1, k * f.t_s1)
    hr = f.hr_pcg
    return np.array([1.0, t_sys, t_rs1, t_ds1, t_s1, hr, hr * hr,
                     t_sys * t_sys, t_s1 * t_s1, t_rs1 * t_ds1])


def design_row_dbp(f, unit_convention=UnitConvention.SECONDS):
    """Expanded diastolic-side regression row for one feature vector."""
    k = _time_scale(UnitConvention(unit_convention))
    t_dias, t_rd2, t_dd2, t_s2 = (k * f.t_dias, k * f.t_rd2,
                                  k * f.t_dd2, k * f.t_s2)
    hr = f.hr_pcg
    return np.array([1.0, t_dias, t_rd2, t_dd2, t_s2, hr, hr * hr,
                     t_dias * t_dias, t_s2 * t_s2, t_rd2 * t_dd2])


def _checked(value, what):
    if not np.isfinite(value):
        raise NumericOverflowError(f"{what} evaluated to a non-finite value")
    return float(value)


def predict_sbp(f, coeffs):
    """Systolic pressure in mmHg for one feature vector."""
    row = design_row_sbp(f, coeffs.unit_convention)
    return _checked(row @ coeffs.sbp_vector(), "SBP")


def predict_dbp(f, coeffs):
    """Diastolic pressure in mmHg for one feature vector."""
    row = design_row_dbp(f, coeffs.unit_convention)
    return _checked(row @ coeffs.dbp_vector(), "DBP")


@dataclass(frozen=True)
class BpPrediction:
    """Paired pressure estimate with plausibility flags."""

    sbp: float
    dbp: float
    coefficients_id: str = "reference"
    flags: tuple = ()


def predict_pair(f, coeffs, coefficients_id="reference"):
    sbp = predict_sbp(f, coeffs)
    dbp = predict_dbp(f, coeffs)
    flags = []
    if not SBP_PLAUSIBLE[0] <= sbp <= SBP_PLAUSIBLE[1]:
        flags.append("sbp_implausible")
    if not DBP_PLAUSIBLE[0] <= dbp <= DBP_PLAUSIBLE[1]:
        flags.append("dbp_implausible")
    return BpPrediction(sbp, dbp, coefficients_id, tuple(flags))


@dataclass(frozen=True)
class FitResult:
    """Least-squares solution with conditioning diagnostics."""

    coeffs: np.ndarray
    residual_rms: float
    condition_number: float
    rank: int


def fit_multiple_regression(X, y, ridge_lambda=0.0, allow_rank_deficient=False):
    """Ordinary (or ridge) least squares via orthogonal decomposition.

    Parameters
    ----------
    X : ndarray, shape (n, p)
        Expanded design matrix, n >= p, all entries finite.
    y : ndarray, shape (n,)
        Targets in mmHg.
    ridge_lambda : float
        Tikhonov strength; 0 gives plain least squares.
    allow_rank_deficient : bool
        With plain least squares and a rank-deficient design, return the
        minimum-norm solution instead of raising. The solution still
        reproduces every target reachable from the row space, which is
        what cross-validation on structurally collinear features needs.

    Raises
    ------
    RankDeficiencyError
        Rank-deficient design with ``ridge_lambda == 0`` and
        ``allow_rank_deficient`` unset.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != len(y):
        raise InvalidInputError("X must be (n, p) and y (n,) with matching n")
    n, p = X.shape
    if n < p:
        raise InvalidInputError(f"need rows >= columns, got {n} x {p}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InvalidInputError("design matrix and targets must be finite")
    sv = np.linalg.svd(X, compute_uv=False)
    tol = sv[0] * max(n, p) * np.finfo(np.float64).eps if sv[0] > 0 else 0.0
    rank = int(np.sum(sv > tol))
    cond = float(sv[0] / sv[-1]) if sv[-1] > tol else float("inf")
    if ridge_lambda > 0:
        X_aug = np.vstack([X, np.sqrt(ridge_lambda) * np.eye(p)])
        y_aug = np.concatenate([y, np.zeros(p)])
        beta = np.linalg.lstsq(X_aug, y_aug, rcond=None)[0]
    else:
        if rank < p and not allow_rank_deficient:
            raise RankDeficiencyError(
                f"design matrix has rank {rank} < {p}", rank, p)
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
    residual_rms = float(np.sqrt(np.mean((X @ beta - y) ** 2)))
    return FitResult(beta, residual_rms, cond, rank)


@dataclass(frozen=True)
class LoocvReport:
    """Out-of-sample errors from subject-wise leave-one-out fitting."""

    sbp_mae: float
    sbp_rmse: float
    dbp_mae: float
    dbp_rmse: float
    insample_sbp_rmse: float
    insample_dbp_rmse: float
    predictions: tuple  # (index, predicted sbp, predicted dbp, ref sbp, ref dbp)


def loocv_subjectwise(dataset, unit_convention=UnitConvention.SECONDS,
                      ridge_lambda=0.0):
    """Leave-one-subject-out cross-validation of both pressure models.

    Parameters
    ----------
    dataset : sequence of (PcgFeatureVector, sbp_ref, dbp_ref)
    unit_convention : UnitConvention
        Convention for the design rows.
    ridge_lambda : float
        Passed to each fold's fit.

    Returns
    -------
    LoocvReport

    Raises
    ------
    InsufficientDataError
        With fewer than 12 subjects (10 coefficients per side plus 2).
    """
    n = len(dataset)
    minimum = N_COEFFS_PER_SIDE + 2
    if n < minimum:
        raise InsufficientDataError(
            f"LOOCV needs at least {minimum} subjects, got {n}")
    unit_convention = UnitConvention(unit_convention)
    X_sbp = np.array([design_row_sbp(f, unit_convention) for f, _, _ in dataset])
    X_dbp = np.array([design_row_dbp(f, unit_convention) for f, _, _ in dataset])
    y_sbp = np.array([s for _, s, _ in dataset], dtype=np.float64)
    y_dbp = np.array([d for _, _, d in dataset], dtype=np.float64)
    preds = []
    for i in range(n):
        keep = np.arange(n) != i
        fit_s = fit_multiple_regression(X_sbp[keep], y_sbp[keep],
                                        ridge_lambda, allow_rank_deficient=True)
        fit_d = fit_multiple_regression(X_dbp[keep], y_dbp[keep],
                                        ridge_lambda, allow_rank_deficient=True)
        preds.append((i, float(X_sbp[i] @ fit_s.coeffs),
                      float(X_dbp[i] @ fit_d.coeffs),
                      float(y_sbp[i]), float(y_dbp[i])))
    d_sbp = np.array([p[1] - p[3] for p in preds])
    d_dbp = np.array([p[2] - p[4] for p in preds])
    full_s = fit_multiple_regression(X_sbp, y_sbp, ridge_lambda,
                                     allow_rank_deficient=True)
    full_d = fit_multiple_regression(X_dbp, y_dbp, ridge_lambda,
                                     allow_rank_deficient=True)
    return LoocvReport(
        sbp_mae=float(np.mean(np.abs(d_sbp))),
        sbp_rmse=float(np.sqrt(np.mean(d_sbp ** 2))),
        dbp_mae=float(np.mean(np.abs(d_dbp))),
        dbp_rmse=float(np.sqrt(np.mean(d_dbp ** 2))),
        insample_sbp_rmse=full_s.residual_rms,
        insample_dbp_rmse=full_d.residual_rms,
        predictions=tuple(preds))


@dataclass(frozen=True)
class SubjectFeatures:
    """Per-subject feature average plus how many frames contributed."""

    features: PcgFeatureVector
    n_used: int
    n_excluded: int


def extract_subject_features(per_frame):
    """Average per-frame timing features into one subject vector.

    Parameters
    ----------
    per_frame : sequence of (CycleSegmentation, HrEstimate)
        Frames whose heart rate fell outside the physiologic acceptance
        band, or whose intervals are non-positive, are excluded and
        counted rather than averaged in.

    Raises
    ------
    NoValidFramesError
        If no frame survives the validity screen.
    """
    rows = []
    excluded = 0
    for seg, hr in per_frame:
        durations = (seg.t_sys, seg.t_dias, seg.t_rs1, seg.t_ds1,
                     seg.t_rd2, seg.t_dd2)
        if not hr.accepted or any(d <= 0 for d in durations):
            excluded += 1
            continue
        rows.append(durations + (hr.bpm,))
    if not rows:
        raise NoValidFramesError(
            f"all {excluded} frames failed the validity screen")
    mean = np.mean(np.array(rows, dtype=np.float64), axis=0)
    features = PcgFeatureVector(t_sys=mean[0], t_dias=mean[1], t_rs1=mean[2],
                                t_ds1=mean[3], t_rd2=mean[4], t_dd2=mean[5],
                                hr_pcg=mean[6])
    return SubjectFeatures(features, len(rows), excluded)
