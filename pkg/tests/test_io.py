"""File ingestion, stream alignment, and report serialization."""

import json
import struct
import wave

import numpy as np
import pytest

from pcgkit import (
    EmptyDataError,
    InsufficientEventsError,
    InvalidInputError,
    MissingFileError,
    ParseError,
    SampledSignal,
    SignalLabel,
    SubjectRecord,
    UnsupportedEncodingError,
    align_streams,
    load_dataset,
    load_subject_dir,
    read_ecg_text,
    read_wav_pcm16,
    write_csv_series,
    write_ecg_text,
    write_json_report,
    write_subject_dir,
    write_wav_pcm16,
)


def raw_wav(path, values, rate=2000, sampwidth=2, channels=1):
    """Write a WAV straight through the wave module, bypassing the package."""
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(sampwidth)
        wf.setframerate(rate)
        if sampwidth == 2:
            wf.writeframes(struct.pack(f"<{len(values)}h", *values))
        else:
            wf.writeframes(bytes(len(values) * sampwidth))


class TestReadWav:

    def test_pcm_scaling(self, tmp_path):
        path = tmp_path / "a.wav"
        raw_wav(path, [0, 16384, -32768])
        sig = read_wav_pcm16(path)
        assert np.array_equal(sig.samples, [0.0, 0.5, -1.0])
        assert sig.rate_hz == 2000.0
        assert sig.label is SignalLabel.PCG

    def test_rate_comes_from_header(self, tmp_path):
        path = tmp_path / "a.wav"
        raw_wav(path, [1, 2, 3], rate=8000)
        assert read_wav_pcm16(path).rate_hz == 8000.0

    def test_first_channel_of_stereo(self, tmp_path):
        path = tmp_path / "a.wav"
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(2)
            wf.setsampwidth(2)
            wf.setframerate(2000)
            wf.writeframes(struct.pack("<6h", 100, -5, 200, -5, 300, -5))
        sig = read_wav_pcm16(path)
        assert np.array_equal(sig.samples * 32768.0, [100.0, 200.0, 300.0])

    def test_label_override(self, tmp_path):
        path = tmp_path / "a.wav"
        raw_wav(path, [1])
        assert read_wav_pcm16(path, label=SignalLabel.ECG).label is SignalLabel.ECG

    @pytest.mark.parametrize("width", [1, 3, 4])
    def test_non_16_bit_rejected(self, tmp_path, width):
        path = tmp_path / "a.wav"
        raw_wav(path, [0, 0], sampwidth=width)
        with pytest.raises(UnsupportedEncodingError):
            read_wav_pcm16(path)

    def test_garbage_bytes_rejected(self, tmp_path):
        path = tmp_path / "a.wav"
        path.write_bytes(b"definitely not RIFF data")
        with pytest.raises(UnsupportedEncodingError):
            read_wav_pcm16(path)

    def test_zero_frames_rejected(self, tmp_path):
        path = tmp_path / "a.wav"
        raw_wav(path, [])
        with pytest.raises(EmptyDataError):
            read_wav_pcm16(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFileError):
            read_wav_pcm16(tmp_path / "absent.wav")


class TestWriteWav:

    def test_grid_values_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(17)
        ints = rng.integers(-32768, 32768, size=1000)
        sig = SampledSignal(ints / 32768.0, 2000.0, SignalLabel.PCG)
        path = tmp_path / "a.wav"
        write_wav_pcm16(path, sig)
        back = read_wav_pcm16(path)
        assert np.array_equal(back.samples, sig.samples)
        assert back.rate_hz == sig.rate_hz

    def test_overrange_clips_to_full_scale(self, tmp_path):
        sig = SampledSignal(np.array([1.5, -2.0]), 2000.0, SignalLabel.PCG)
        path = tmp_path / "a.wav"
        write_wav_pcm16(path, sig)
        back = read_wav_pcm16(path)
        assert np.array_equal(back.samples * 32768.0, [32767.0, -32768.0])

    def test_subgrid_values_round_to_nearest_step(self, tmp_path):
        sig = SampledSignal(np.array([1e-5]), 2000.0, SignalLabel.PCG)
        path = tmp_path / "a.wav"
        write_wav_pcm16(path, sig)
        assert read_wav_pcm16(path).samples[0] == 0.0


class TestReadEcgText:

    def test_plain_values_need_a_rate(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("1.0\n-2.5\n3.0\n")
        sig = read_ecg_text(path, rate_hz=190.0)
        assert np.array_equal(sig.samples, [1.0, -2.5, 3.0])
        assert sig.rate_hz == 190.0
        assert sig.label is SignalLabel.ECG
        with pytest.raises(InvalidInputError):
            read_ecg_text(path)

    def test_time_value_rate_inferred(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0.0,1.0\n0.005,2.0\n0.010,3.0\n")
        sig = read_ecg_text(path)
        assert sig.rate_hz == pytest.approx(200.0, rel=1e-9)
        assert np.array_equal(sig.samples, [1.0, 2.0, 3.0])

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("\n1.0\n\n2.0\n\n")
        assert len(read_ecg_text(path, rate_hz=190.0).samples) == 2

    def test_non_numeric_cites_line(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("abc\n")
        with pytest.raises(ParseError) as exc:
            read_ecg_text(path, rate_hz=190.0)
        assert exc.value.line_no == 1
        assert "abc" in str(exc.value)

    def test_column_count_must_be_consistent(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0.0,1.0\n2.0\n")
        with pytest.raises(ParseError) as exc:
            read_ecg_text(path)
        assert exc.value.line_no == 2

    def test_time_column_must_increase(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0.0,1.0\n0.010,2.0\n0.010,3.0\n")
        with pytest.raises(ParseError):
            read_ecg_text(path)

    def test_single_timed_row_raises(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0.0,1.0\n")
        with pytest.raises(ParseError):
            read_ecg_text(path)

    def test_empty_file_raises(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("")
        with pytest.raises(EmptyDataError):
            read_ecg_text(path, rate_hz=190.0)

    def test_write_read_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(23)
        sig = SampledSignal(rng.standard_normal(64), 190.0, SignalLabel.ECG)
        path = tmp_path / "e.txt"
        write_ecg_text(path, sig)
        back = read_ecg_text(path, rate_hz=190.0)
        assert np.array_equal(back.samples, sig.samples)


class TestAlignStreams:

    def test_fixed_offset_recovered(self):
        r_times = [0.96 + k for k in range(10)]
        s1_times = [t + 0.250 for t in r_times]
        result = align_streams(r_times, s1_times)
        assert abs(result.lag_s + 0.250) <= 0.001
        assert result.score == 1.0
        assert not result.low_confidence

    def test_identical_streams_give_zero_lag(self):
        times = [0.5, 1.3, 2.1, 2.9]
        result = align_streams(times, times)
        assert result.lag_s == 0.0
        assert result.score == 1.0

    def test_antisymmetry(self):
        a = [1.0, 2.0, 3.0, 4.0]
        b = [t + 0.123 for t in a]
        fwd = align_streams(a, b)
        rev = align_streams(b, a)
        assert abs(fwd.lag_s + rev.lag_s) <= 0.001

    def test_unrelated_streams_flagged(self):
        ref = [float(k) for k in range(1, 11)]
        other = [0.0, 0.37, 5.11]
        result = align_streams(ref, other)
        assert result.score < 0.5
        assert result.low_confidence

    def test_input_order_does_not_matter(self):
        ref = [3.0, 1.0, 2.0, 4.0]
        other = [4.2, 2.2, 1.2, 3.2]
        assert align_streams(ref, other) == align_streams(sorted(ref),
                                                          sorted(other))

    def test_too_few_events_raises(self):
        with pytest.raises(InsufficientEventsError):
            align_streams([1.0, 2.0], [1.0, 2.0, 3.0])


class TestSubjectRecord:

    def _pcg(self):
        return SampledSignal(np.zeros(10), 2000.0, SignalLabel.PCG)

    def test_pcg_required(self):
        with pytest.raises(InvalidInputError):
            SubjectRecord(subject_id="x", pcg=None)

    def test_reference_ordering_enforced(self):
        with pytest.raises(InvalidInputError):
            SubjectRecord(subject_id="x", pcg=self._pcg(),
                          sbp_ref=80.0, dbp_ref=120.0)
        with pytest.raises(InvalidInputError):
            SubjectRecord(subject_id="x", pcg=self._pcg(),
                          sbp_ref=120.0, dbp_ref=-5.0)

    def test_partial_references_allowed(self):
        record = SubjectRecord(subject_id="x", pcg=self._pcg(), sbp_ref=120.0)
        assert record.dbp_ref is None


class TestSubjectDirs:

    def _signals(self):
        ints = np.arange(-100, 100)
        pcg = SampledSignal(ints / 32768.0, 2000.0, SignalLabel.PCG)
        ecg = SampledSignal(np.linspace(-1.0, 1.0, 50), 190.0, SignalLabel.ECG)
        return pcg, ecg

    def test_write_then_load_round_trip(self, tmp_path):
        pcg, ecg = self._signals()
        sdir = tmp_path / "s01"
        write_subject_dir(sdir, pcg, ecg=ecg,
                          meta={"subject_id": "s01", "sbp_ref": 120.0,
                                "dbp_ref": 80.0})
        record = load_subject_dir(sdir)
        assert record.subject_id == "s01"
        assert np.array_equal(record.pcg.samples, pcg.samples)
        assert np.array_equal(record.ecg.samples, ecg.samples)
        assert record.ecg.rate_hz == 190.0
        assert record.sbp_ref == 120.0 and record.dbp_ref == 80.0

    def test_minimal_folder_defaults(self, tmp_path):
        pcg, _ = self._signals()
        sdir = tmp_path / "bare"
        sdir.mkdir()
        write_wav_pcm16(sdir / "pcg.wav", pcg)
        record = load_subject_dir(sdir)
        assert record.subject_id == "bare"
        assert record.ecg is None
        assert record.sbp_ref is None and record.dbp_ref is None
        assert record.meta == {}

    def test_dataset_sorted_and_filtered(self, tmp_path):
        pcg, _ = self._signals()
        for name in ("s02", "s01", "s03"):
            write_subject_dir(tmp_path / name, pcg)
        (tmp_path / "notes.txt").write_text("ignore me\n")
        (tmp_path / "empty_dir").mkdir()
        records = load_dataset(tmp_path)
        assert [r.subject_id for r in records] == ["s01", "s02", "s03"]

    def test_missing_root_raises(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_dataset(tmp_path / "nope")

    def test_rootful_of_nothing_raises(self, tmp_path):
        (tmp_path / "empty_dir").mkdir()
        with pytest.raises(EmptyDataError):
            load_dataset(tmp_path)


class TestReports:

    def test_json_bytes_reproducible_and_sorted(self, tmp_path):
        payload = {"zeta": 1, "alpha": {"b": 2.5, "a": [1, 2]}}
        p1 = tmp_path / "deep" / "r1.json"
        p2 = tmp_path / "r2.json"
        write_json_report(p1, payload)
        write_json_report(p2, payload)
        assert p1.read_bytes() == p2.read_bytes()
        text = p1.read_text()
        assert text.index('"alpha"') < text.index('"zeta"')
        assert text.endswith("\n")
        assert json.loads(text) == payload

    def test_csv_floats_survive_reparse(self, tmp_path):
        rows = [("a", 0.1 + 0.2, 1), ("b", 1e-17, 2)]
        path = tmp_path / "series.csv"
        write_csv_series(path, ("name", "value", "count"), rows)
        lines = path.read_text().splitlines()
        assert lines[0] == "name,value,count"
        for line, row in zip(lines[1:], rows):
            name, value, count = line.split(",")
            assert name == row[0]
            assert float(value) == row[1]
            assert int(count) == row[2]
