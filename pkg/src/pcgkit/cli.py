"""Command-line front end: dataset synthesis, HR, BP, and quality runs.

Every report embeds the fully resolved :class:`RunConfig` and the
toolkit version, so a report documents exactly how it was produced and
re-running with the same inputs reproduces it byte for byte.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import __version__
from .bp import (
    BpCoefficients,
    PcgFeatureVector,
    UnitConvention,
    design_row_dbp,
    design_row_sbp,
    extract_subject_features,
    fit_multiple_regression,
    loocv_subjectwise,
    predict_pair,
)
from .core import FramePlan, resample_rational, segment_frames, detrend, normalize_max_abs
from .envelopes import EnvelopeMethod
from .errors import ConfigError, PcgKitError
from .evaluation import bland_altman, subject_aggregate
from .hr import HrFormula, hr_from_ecg_frame, hr_pipeline
from .io import (
    load_subject_dir,
    write_csv_series,
    write_json_report,
    write_subject_dir,
)
from .plots import write_scatter_svg
from .quality import aggregate_quality, frame_quality
from .synth import (
    CohortRanges,
    default_cohort_coefficients,
    generate_cohort,
    generate_ecg,
    generate_pcg,
)
from .wavelets import WaveletKind

CONFIG_ENV_VAR = "PCGKIT_CONFIG"

_METHODS = {"hilbert": EnvelopeMethod.HILBERT,
            "shannon": EnvelopeMethod.SHANNON,
            "wes": EnvelopeMethod.WES}
_FORMULAS = {"eq7": HrFormula.EQ7_VERBATIM, "cycle": HrFormula.CYCLE_PERIOD}
_UNITS = {"s": UnitConvention.SECONDS, "ms": UnitConvention.MILLISECONDS}
_WAVELETS = {"morlet": WaveletKind.morlet, "morse": WaveletKind.morse,
             "bump": WaveletKind.bump}


@dataclass(frozen=True)
class RunConfig:
    """Resolved analysis parameters, embedded verbatim in every report."""

    frame_len_s: float = 4.0
    method: str = "shannon"
    formula: str = "cycle"
    wavelet: str = "morlet"
    units: str = "s"
    peak_height_frac: float = 0.15
    peak_distance_s: float = 0.125
    smoothing_cutoff_hz: float = 20.0
    denoise_threshold: float = 0.15
    denoise_levels: int = 8
    ecg_prominence: float = 0.8
    baseline_frac: float = 0.15
    pcg_rate_hz: float = 2000.0
    ridge_lambda: float = 0.0
    out_dir: str = "."

    def __post_init__(self):
        checks = [
            ("frame_len_s", 0.5, 30.0), ("peak_height_frac", 0.0, 1.0),
            ("peak_distance_s", 0.01, 2.0), ("smoothing_cutoff_hz", 1.0, 200.0),
            ("denoise_threshold", 0.0, 1.0), ("ecg_prominence", 0.0, 1.0),
            ("baseline_frac", 0.01, 0.9), ("pcg_rate_hz", 200.0, 48000.0),
        ]
        for name, lo, hi in checks:
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ConfigError(f"{name}={v} outside [{lo}, {hi}]")
        if self.method not in _METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.formula not in _FORMULAS:
            raise ConfigError(f"unknown formula {self.formula!r}")
        if self.units not in _UNITS:
            raise ConfigError(f"unknown units {self.units!r}")
        if self.wavelet not in _WAVELETS:
            raise ConfigError(f"unknown wavelet {self.wavelet!r}")

    def to_dict(self):
        return asdict(self)


def load_config_file(path):
    """Parse a flat ``key = value`` config file into a dict of strings."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def resolve_config(args):
    """Merge defaults, an optional config file, and CLI overrides."""
    field_types = {f.name: f.type for f in dataclass_fields(RunConfig)}
    values = {}
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if config_path and Path(config_path).exists():
        for key, raw in load_config_file(config_path).items():
            if key not in field_types:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                values[key] = field_types[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    overrides = {
        "frame_len_s": getattr(args, "frames", None),
        "method": getattr(args, "method", None),
        "formula": getattr(args, "formula", None),
        "units": getattr(args, "units", None),
        "wavelet": getattr(args, "wavelet", None),
        "ridge_lambda": getattr(args, "ridge", None),
        "out_dir": getattr(args, "out", None),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def _jsonable(obj):
    """Coerce numpy scalars/arrays and tuples for deterministic JSON."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    return obj


def _report_header(config):
    return {"version": __version__, "config": config.to_dict()}


def _load_records(root):
    """Load a dataset folder, collecting per-subject ingest failures."""
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"dataset directory not found: {root}")
    dirs = sorted(p for p in root.iterdir() if (p / "pcg.wav").exists())
    if not dirs:
        raise ConfigError(f"{root}: no subject folders with pcg.wav")
    records, errors = [], {}
    for d in dirs:
        try:
            records.append(load_subject_dir(d))
        except PcgKitError as exc:
            errors[d.name] = f"ingest: {exc}"
    return records, errors


def _prepared_pcg(record, config):
    pcg = record.pcg
    if abs(pcg.rate_hz - config.pcg_rate_hz) > 1e-9:
        pcg = resample_rational(pcg, config.pcg_rate_hz)
    return pcg


def _pipeline_kwargs(config):
    return dict(
        method=_METHODS[config.method],
        formula=_FORMULAS[config.formula],
        denoise_levels=config.denoise_levels,
        denoise_threshold=config.denoise_threshold,
        smoothing_cutoff_hz=config.smoothing_cutoff_hz,
        min_height_frac=config.peak_height_frac,
        min_distance_s=config.peak_distance_s,
        baseline_frac=config.baseline_frac,
        wavelet_kind=_WAVELETS[config.wavelet](),
    )


def _features_from_meta(record):
    feat = record.meta.get("features")
    if not feat:
        return None
    names = ("t_sys", "t_dias", "t_rs1", "t_ds1", "t_rd2", "t_dd2", "hr_pcg")
    try:
        return PcgFeatureVector(**{k: float(feat[k]) for k in names})
    except KeyError:
        return None


def _features_from_audio(record, config):
    pcg = _prepared_pcg(record, config)
    frames = segment_frames(pcg, FramePlan(config.frame_len_s))
    kwargs = _pipeline_kwargs(config)
    per_frame = []
    for i, frame in enumerate(frames):
        try:
            result = hr_pipeline(frame, frame_index=i, **kwargs)
        except PcgKitError:
            continue
        per_frame.append((result.segmentation, result.hr))
    return extract_subject_features(per_frame).features


def cmd_synth(args):
    """Generate a cohort fixture dataset on disk."""
    params = {}
    if args.spec_file:
        with open(args.spec_file, "r", encoding="utf-8") as fh:
            params = json.load(fh)
    ranges = CohortRanges(**{k: tuple(v) for k, v in
                             params.get("ranges", {}).items()})
    coeffs = default_cohort_coefficients()
    cohort = generate_cohort(
        n_subjects=args.subjects or params.get("n_subjects", 15),
        ranges=ranges,
        coeffs=coeffs,
        sbp_noise_sd=params.get("sbp_noise_sd", 0.0),
        dbp_noise_sd=params.get("dbp_noise_sd", 0.0),
        seed=args.seed if args.seed is not None else params.get("seed", 0),
        duration_s=args.duration or params.get("duration_s", 60.0),
        jitter_ms=params.get("jitter_ms", 2.0),
        snr_db=params.get("snr_db", 25.0))
    out = Path(args.out)
    for subject in cohort:
        pcg, truth = generate_pcg(subject.spec)
        ecg, r_times = generate_ecg(subject.spec)
        peak = float(np.max(np.abs(pcg.samples)))
        pcg = pcg.with_samples(pcg.samples * (0.99 / peak))
        f = subject.features
        meta = {
            "subject_id": subject.subject_id,
            "sbp_ref": subject.sbp_ref,
            "dbp_ref": subject.dbp_ref,
            "hr_bpm": subject.spec.hr_bpm,
            "seed": subject.spec.seed,
            "features": {
                "t_sys": f.t_sys, "t_dias": f.t_dias, "t_rs1": f.t_rs1,
                "t_ds1": f.t_ds1, "t_rd2": f.t_rd2, "t_dd2": f.t_dd2,
                "t_s1": f.t_s1, "t_s2": f.t_s2, "hr_pcg": f.hr_pcg,
            },
            "s1_times": list(truth.s1_times),
            "s2_times": list(truth.s2_times),
            "r_times": list(r_times),
        }
        write_subject_dir(out / subject.subject_id, pcg, ecg, _jsonable(meta))
    manifest = {
        "version": __version__,
        "n_subjects": len(cohort),
        "target_coefficients": coeffs.to_json_dict(),
    }
    write_json_report(out / "manifest.json", _jsonable(manifest))
    print(f"wrote {len(cohort)} subjects to {out}")
    return 0


def cmd_hr(args):
    """Per-frame and per-subject heart-rate report, with ECG agreement."""
    config = resolve_config(args)
    records, errors = _load_records(args.dataset)
    plan = FramePlan(config.frame_len_s)
    kwargs = _pipeline_kwargs(config)
    subjects = {}
    pairs = []
    abs_diffs_by_subject = {}
    sq_diffs_by_subject = {}
    for record in records:
        try:
            pcg = _prepared_pcg(record, config)
            frames = segment_frames(pcg, plan)
            ecg_frames = None
            if record.ecg is not None:
                ecg_frames = segment_frames(record.ecg, plan)
            frame_rows = []
            for i, frame in enumerate(frames):
                row = {"frame": i}
                try:
                    result = hr_pipeline(frame, frame_index=i, **kwargs)
                    row["bpm_pcg"] = result.hr.bpm
                    row["flags"] = list(result.hr.flags)
                except PcgKitError as exc:
                    row["error"] = str(exc)
                if ecg_frames is not None and i < len(ecg_frames):
                    try:
                        ecg_frame = normalize_max_abs(detrend(ecg_frames[i]))
                        ecg_hr = hr_from_ecg_frame(ecg_frame,
                                                   config.ecg_prominence, i)
                        row["bpm_ecg"] = ecg_hr.bpm
                    except PcgKitError as exc:
                        row["ecg_error"] = str(exc)
                if "bpm_pcg" in row and "bpm_ecg" in row and not row["flags"]:
                    d = row["bpm_pcg"] - row["bpm_ecg"]
                    pairs.append((row["bpm_ecg"], row["bpm_pcg"]))
                    abs_diffs_by_subject.setdefault(
                        record.subject_id, []).append(abs(d))
                    sq_diffs_by_subject.setdefault(
                        record.subject_id, []).append(d * d)
                frame_rows.append(row)
            if not any("bpm_pcg" in r for r in frame_rows):
                raise PcgKitError("no frame produced a usable estimate")
            entry = {"frames": frame_rows,
                     "n_frames": len(frame_rows)}
            if record.subject_id in abs_diffs_by_subject:
                a = abs_diffs_by_subject[record.subject_id]
                q = sq_diffs_by_subject[record.subject_id]
                entry["mae"] = float(np.mean(a))
                entry["rmse"] = float(np.sqrt(np.mean(q)))
            subjects[record.subject_id] = entry
        except PcgKitError as exc:
            errors[record.subject_id] = str(exc)
    report = _report_header(config)
    report["subjects"] = subjects
    report["errors"] = errors
    if abs_diffs_by_subject:
        cohort_mae, per_subject_mae = subject_aggregate(abs_diffs_by_subject)
        subject_rmses = {s: float(np.sqrt(np.mean(q)))
                         for s, q in sq_diffs_by_subject.items()}
        report["cohort"] = {
            "mae": cohort_mae,
            "rmse": float(np.mean(list(subject_rmses.values()))),
            "per_subject_mae": per_subject_mae,
            "per_subject_rmse": subject_rmses,
        }
    if len(pairs) >= 3:
        ref = [p[0] for p in pairs]
        pred = [p[1] for p in pairs]
        agreement, means, diffs = bland_altman(np.array(pred), np.array(ref))
        report["agreement"] = {
            "pearson_r": agreement.pearson_r,
            "mae": agreement.mae, "rmse": agreement.rmse,
            "bias_mean": agreement.bias_mean, "bias_sd": agreement.bias_sd,
            "loa_low": agreement.loa_low, "loa_high": agreement.loa_high,
            "within_loa_frac": agreement.within_loa_frac, "n": agreement.n,
        }
        out = Path(config.out_dir)
        write_csv_series(out / "hr_pairs.csv", ["bpm_ecg", "bpm_pcg"],
                         [(float(a), float(b)) for a, b in pairs])
        write_csv_series(out / "hr_bland_altman.csv", ["mean_bpm", "diff_bpm"],
                         list(zip(map(float, means), map(float, diffs))))
        write_scatter_svg(out / "hr_scatter.svg", ref, pred,
                          "ECG heart rate (bpm)", "PCG heart rate (bpm)",
                          "Frame-wise heart-rate agreement", identity=True)
        write_scatter_svg(out / "hr_bland_altman.svg", list(means), list(diffs),
                          "Mean of estimates (bpm)", "Difference (bpm)",
                          "Bland-Altman",
                          hlines=((agreement.bias_mean, False),
                                  (agreement.loa_low, True),
                                  (agreement.loa_high, True)))
    write_json_report(Path(config.out_dir) / "hr_report.json", _jsonable(report))
    return 0 if not errors else 1


def _load_features(records, config, from_audio):
    rows = []
    errors = {}
    for record in records:
        try:
            features = None if from_audio else _features_from_meta(record)
            if features is None:
                features = _features_from_audio(record, config)
            rows.append((record, features))
        except PcgKitError as exc:
            errors[record.subject_id] = str(exc)
    return rows, errors


def cmd_bp(args):
    """Fit, predict, or cross-validate the pressure model on a dataset."""
    config = resolve_config(args)
    convention = _UNITS[config.units]
    records, errors = _load_records(args.dataset)
    rows, feature_errors = _load_features(records, config,
                                          args.features_from_audio)
    errors.update(feature_errors)
    report = _report_header(config)
    report["errors"] = errors
    out = Path(config.out_dir)
    status = 0 if not errors else 1

    if args.bp_command == "fit":
        labeled = [(f, r.sbp_ref, r.dbp_ref) for r, f in rows
                   if r.sbp_ref is not None and r.dbp_ref is not None]
        if len(labeled) < 12:
            print(f"error: fit needs >= 12 subjects with references, "
                  f"got {len(labeled)}", file=sys.stderr)
            return 1
        X_s = np.array([design_row_sbp(f, convention) for f, _, _ in labeled])
        X_d = np.array([design_row_dbp(f, convention) for f, _, _ in labeled])
        y_s = np.array([s for _, s, _ in labeled])
        y_d = np.array([d for _, _, d in labeled])
        fit_s = fit_multiple_regression(X_s, y_s, config.ridge_lambda,
                                        allow_rank_deficient=True)
        fit_d = fit_multiple_regression(X_d, y_d, config.ridge_lambda,
                                        allow_rank_deficient=True)
        names_s = ("c1", "sigma_sys", "sigma_rs1", "sigma_ds1", "sigma_s1",
                   "sigma_s_hr", "sigma_s_hr2", "sigma_sys2", "sigma_s12",
                   "sigma_rds1")
        names_d = ("c2", "alpha_dias", "alpha_rd2", "alpha_dd2", "alpha_s2",
                   "alpha_d_hr", "alpha_d_hr2", "alpha_dias2", "alpha_s22",
                   "alpha_rdd2")
        coeff_dict = dict(zip(names_s, fit_s.coeffs))
        coeff_dict.update(zip(names_d, fit_d.coeffs))
        coeff_dict["unit_convention"] = convention.value
        report["coefficients"] = coeff_dict
        report["diagnostics"] = {
            "sbp": {"residual_rms": fit_s.residual_rms, "rank": fit_s.rank,
                    "condition_number": fit_s.condition_number},
            "dbp": {"residual_rms": fit_d.residual_rms, "rank": fit_d.rank,
                    "condition_number": fit_d.condition_number},
            "n_subjects": len(labeled),
        }
        write_json_report(out / "bp_coefficients.json", _jsonable(report))

    elif args.bp_command == "predict":
        if args.coeffs:
            with open(args.coeffs, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
            coeffs = BpCoefficients.from_json_dict(
                payload.get("coefficients", payload))
            coeffs_id = str(args.coeffs)
        else:
            coeffs = BpCoefficients.reference(convention)
            coeffs_id = "reference"
        predictions = {}
        for record, features in rows:
            pred = predict_pair(features, coeffs, coeffs_id)
            entry = {"sbp": pred.sbp, "dbp": pred.dbp,
                     "flags": list(pred.flags)}
            if record.sbp_ref is not None:
                entry["sbp_ref"] = record.sbp_ref
                entry["sbp_error"] = pred.sbp - record.sbp_ref
            if record.dbp_ref is not None:
                entry["dbp_ref"] = record.dbp_ref
                entry["dbp_error"] = pred.dbp - record.dbp_ref
            predictions[record.subject_id] = entry
        report["coefficients_id"] = coeffs_id
        report["predictions"] = predictions
        write_json_report(out / "bp_predictions.json", _jsonable(report))

    else:  # loocv
        with_refs = [(r, f) for r, f in rows
                     if r.sbp_ref is not None and r.dbp_ref is not None]
        labeled = [(f, r.sbp_ref, r.dbp_ref) for r, f in with_refs]
        loocv = loocv_subjectwise(labeled, convention, config.ridge_lambda)
        report["loocv"] = {
            "sbp_mae": loocv.sbp_mae, "sbp_rmse": loocv.sbp_rmse,
            "dbp_mae": loocv.dbp_mae, "dbp_rmse": loocv.dbp_rmse,
            "insample_sbp_rmse": loocv.insample_sbp_rmse,
            "insample_dbp_rmse": loocv.insample_dbp_rmse,
            "n_subjects": len(labeled),
        }
        report["predictions"] = {
            with_refs[i][0].subject_id: {
                "sbp": ps, "dbp": pd, "sbp_ref": rs, "dbp_ref": rd}
            for i, ps, pd, rs, rd in loocv.predictions
        }
        write_json_report(out / "bp_loocv.json", _jsonable(report))

    return status


def cmd_quality(args):
    """Per-subject quality table: band, energy-track errors, SNR."""
    config = resolve_config(args)
    records, errors = _load_records(args.dataset)
    plan = FramePlan(config.frame_len_s)
    kwargs = _pipeline_kwargs(config)
    subjects = {}
    for record in records:
        try:
            pcg = _prepared_pcg(record, config)
            frames = segment_frames(pcg, plan)
            frame_rows = []
            n_failed = 0
            for i, frame in enumerate(frames):
                try:
                    result = hr_pipeline(frame, frame_index=i, **kwargs)
                    fq = frame_quality(result.normalized, result.segmentation)
                    frame_rows.append(fq)
                except PcgKitError:
                    n_failed += 1
            if not frame_rows:
                raise PcgKitError("no frame survived segmentation")
            agg = aggregate_quality(frame_rows)
            subjects[record.subject_id] = {
                "freq_low_hz": agg.freq_range_hz[0],
                "freq_high_hz": agg.freq_range_hz[1],
                "nrmse": agg.nrmse,
                "snr_max_db": agg.snr_db[0],
                "snr_min_db": agg.snr_db[1],
                "snr_avg_db": agg.snr_db[2],
                "per_frame_snr_db": list(agg.per_frame_snr),
                "n_frames": len(frame_rows),
                "n_failed": n_failed,
            }
        except PcgKitError as exc:
            errors[record.subject_id] = str(exc)
    report = _report_header(config)
    report["subjects"] = subjects
    report["errors"] = errors
    out = Path(config.out_dir)
    write_json_report(out / "quality_report.json", _jsonable(report))
    rows = [(sid,
             entry["freq_low_hz"], entry["freq_high_hz"],
             entry["nrmse"]["morlet"], entry["nrmse"]["morse"],
             entry["nrmse"]["bump"],
             entry["snr_max_db"], entry["snr_min_db"], entry["snr_avg_db"])
            for sid, entry in sorted(subjects.items())]
    write_csv_series(out / "quality_table.csv",
                     ["subject", "freq_low_hz", "freq_high_hz",
                      "nrmse_morlet", "nrmse_morse", "nrmse_bump",
                      "snr_max_db", "snr_min_db", "snr_avg_db"],
                     rows)
    return 0 if not errors else 1


def _add_common(parser):
    parser.add_argument("--frames", type=float, default=None,
                        help="frame length in seconds (default 4)")
    parser.add_argument("--method", choices=sorted(_METHODS), default=None,
                        help="envelope method")
    parser.add_argument("--formula", choices=sorted(_FORMULAS), default=None,
                        help="interval-to-rate conversion")
    parser.add_argument("--units", choices=sorted(_UNITS), default=None,
                        help="time-feature unit convention")
    parser.add_argument("--wavelet", choices=sorted(_WAVELETS), default=None,
                        help="wavelet family for the WES envelope")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--config", default=None,
                        help=f"config file (default ${CONFIG_ENV_VAR})")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pcgkit",
        description="Batch phonocardiogram analysis toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--out", required=True, help="dataset directory")
    p_synth.add_argument("--subjects", type=int, default=None)
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--duration", type=float, default=None,
                         help="per-subject recording length in seconds")
    p_synth.add_argument("--spec-file", default=None,
                         help="JSON file with cohort parameters")
    p_synth.set_defaults(func=cmd_synth)

    p_hr = sub.add_parser("hr", help="heart-rate estimation report")
    p_hr.add_argument("dataset", help="dataset directory")
    _add_common(p_hr)
    p_hr.set_defaults(func=cmd_hr)

    p_bp = sub.add_parser("bp", help="blood-pressure model commands")
    p_bp.add_argument("bp_command", choices=["fit", "predict", "loocv"])
    p_bp.add_argument("dataset", help="dataset directory")
    p_bp.add_argument("--coeffs", default=None,
                      help="coefficients JSON for predict")
    p_bp.add_argument("--ridge", type=float, default=None,
                      help="ridge strength for fitting")
    p_bp.add_argument("--features-from-audio", action="store_true",
                      help="always derive features from audio, ignoring "
                           "precomputed features in meta.json")
    _add_common(p_bp)
    p_bp.set_defaults(func=cmd_bp)

    p_q = sub.add_parser("quality", help="signal-quality report")
    p_q.add_argument("dataset", help="dataset directory")
    _add_common(p_q)
    p_q.set_defaults(func=cmd_quality)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PcgKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
