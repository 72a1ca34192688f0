"""Audio ingest: WAV decoding, resampling, high-pass conditioning."""

import struct
import wave

import numpy as np
import pytest
from scipy.io import wavfile

from birdcolor.audio import (
    PIPELINE_RATE,
    AudioClip,
    AudioError,
    EmptyAudioError,
    UnreadableFileError,
    highpass,
    load_wav,
    resample,
    resample_edge_samples,
)


def write_wav24(path, values, rate):
    """Independent 24-bit PCM encoder: values are integers in
    [-2^23, 2^23 - 1], packed little-endian by the wave module."""
    frames = b"".join(struct.pack("<i", v << 8)[1:] for v in values)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(3)
        fh.setframerate(rate)
        fh.writeframes(frames)


class TestLoadWav:
    def test_16bit_stereo_identical_channels(self, tmp_path):
        data = np.full((100, 2), 16384, dtype=np.int16)
        wavfile.write(tmp_path / "s.wav", 32000, data)
        clip = load_wav(tmp_path / "s.wav")
        assert clip.samples.shape == (100,)
        np.testing.assert_allclose(clip.samples, 0.5)

    def test_all_zero_one_second(self, tmp_path):
        wavfile.write(tmp_path / "z.wav", 32000, np.zeros(32000, dtype=np.int16))
        clip = load_wav(tmp_path / "z.wav")
        assert clip.samples.size == 32000
        assert clip.sample_rate == 32000
        assert not clip.samples.any()

    def test_24bit_ramp_bit_exact(self, tmp_path):
        values = np.arange(-1000, 1000, 7)
        write_wav24(tmp_path / "r.wav", values, 32000)
        clip = load_wav(tmp_path / "r.wav")
        # 24-bit integer k decodes to exactly k / 2^23
        np.testing.assert_array_equal(clip.samples, values / 2.0**23)

    def test_uint8_scaling(self, tmp_path):
        data = np.array([0, 128, 255], dtype=np.uint8)
        wavfile.write(tmp_path / "u.wav", 8000, data)
        clip = load_wav(tmp_path / "u.wav")
        np.testing.assert_allclose(clip.samples, [(0 - 128) / 128, 0.0, 127 / 128])

    def test_float32_passthrough(self, tmp_path):
        data = np.array([-0.5, 0.0, 0.25, 1.0], dtype=np.float32)
        wavfile.write(tmp_path / "f.wav", 16000, data)
        clip = load_wav(tmp_path / "f.wav")
        np.testing.assert_allclose(clip.samples, data, atol=1e-7)

    def test_unreadable_file(self, tmp_path):
        bad = tmp_path / "junk.wav"
        bad.write_bytes(b"this is not RIFF data")
        with pytest.raises(UnreadableFileError):
            load_wav(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(UnreadableFileError):
            load_wav(tmp_path / "absent.wav")

    def test_non_pcm_codec(self, tmp_path):
        # minimal mu-law (format code 7) file: a codec we refuse, distinct
        # from an unreadable file
        fmt = struct.pack("<HHIIHH", 7, 1, 8000, 8000, 1, 8)
        data = bytes(16)
        body = (b"WAVEfmt " + struct.pack("<I", len(fmt)) + fmt
                + b"data" + struct.pack("<I", len(data)) + data)
        blob = b"RIFF" + struct.pack("<I", len(body)) + body
        (tmp_path / "m.wav").write_bytes(blob)
        from birdcolor.audio import UnsupportedCodecError

        with pytest.raises(UnsupportedCodecError):
            load_wav(tmp_path / "m.wav")

    def test_zero_length_audio(self, tmp_path):
        with wave.open(str(tmp_path / "e.wav"), "wb") as fh:
            fh.setnchannels(1)
            fh.setsampwidth(2)
            fh.setframerate(32000)
            fh.writeframes(b"")
        with pytest.raises(EmptyAudioError):
            load_wav(tmp_path / "e.wav")


class TestClipValidation:
    def test_rejects_out_of_range(self):
        with pytest.raises(AudioError):
            AudioClip(samples=np.array([0.0, 1.5]), sample_rate=32000)

    def test_rejects_non_finite(self):
        with pytest.raises(AudioError):
            AudioClip(samples=np.array([0.0, np.nan]), sample_rate=32000)

    def test_rejects_bad_rate(self):
        with pytest.raises(AudioError):
            AudioClip(samples=np.zeros(4), sample_rate=0)

    def test_duration(self):
        clip = AudioClip(samples=np.zeros(16000), sample_rate=32000)
        assert clip.duration == 0.5


class TestResample:
    def test_same_rate_identity(self):
        clip = AudioClip(samples=np.linspace(-1, 1, 500), sample_rate=32000)
        out = resample(clip, 32000)
        np.testing.assert_array_equal(out.samples, clip.samples)

    def test_silence_44100_to_32000(self):
        clip = AudioClip(samples=np.zeros(44100), sample_rate=44100)
        out = resample(clip, 32000)
        assert out.sample_rate == 32000
        assert out.samples.size == 32000
        assert not out.samples.any()

    def test_sine_48k_to_32k_against_analytic(self):
        # tapered sine: the fade removes the boundary discontinuity, so the
        # windowed-sinc interpolator is accurate at every output sample
        rate_in, rate_out, f = 48000, 32000, 1000.0
        t_in = np.arange(rate_in) / rate_in
        taper = np.hanning(rate_in)
        clip = AudioClip(samples=0.9 * np.sin(2 * np.pi * f * t_in) * taper,
                         sample_rate=rate_in)
        out = resample(clip, rate_out)
        t_out = np.arange(out.samples.size) / rate_out
        expected = 0.9 * np.sin(2 * np.pi * f * t_out) * np.interp(t_out, t_in, taper)
        assert np.abs(out.samples - expected).max() < 1e-3

    def test_raw_sine_interior_accuracy(self):
        # an untapered sine has a step discontinuity at the signal edges;
        # the FIR startup transient there is inherent to band-limited
        # interpolation, so the analytic comparison covers the interior
        rate_in, rate_out, f = 48000, 32000, 1000.0
        t_in = np.arange(rate_in) / rate_in
        clip = AudioClip(samples=0.9 * np.sin(2 * np.pi * f * t_in), sample_rate=rate_in)
        out = resample(clip, rate_out)
        t_out = np.arange(out.samples.size) / rate_out
        expected = 0.9 * np.sin(2 * np.pi * f * t_out)
        edge = resample_edge_samples(rate_in, rate_out)
        err = np.abs(out.samples - expected)[edge:-edge]
        assert err.max() < 1e-3

    def test_duration_preserved(self):
        for rate_in in (22050, 44100, 48000):
            clip = AudioClip(samples=np.zeros(rate_in * 3 + 13), sample_rate=rate_in)
            out = resample(clip, PIPELINE_RATE)
            in_dur = clip.samples.size / rate_in
            out_dur = out.samples.size / PIPELINE_RATE
            assert abs(in_dur - out_dur) <= 1.0 / PIPELINE_RATE

    def test_rejects_bad_target(self):
        clip = AudioClip(samples=np.zeros(100), sample_rate=32000)
        with pytest.raises(AudioError):
            resample(clip, 0)


class TestHighpass:
    def test_dc_removed(self):
        clip = AudioClip(samples=np.full(32000, 0.5), sample_rate=32000)
        out = highpass(clip, 300.0)
        assert np.sqrt(np.mean(out.samples**2)) < 0.01

    def test_1khz_preserved(self):
        t = np.arange(32000) / 32000
        x = 0.5 * np.sin(2 * np.pi * 1000 * t)
        out = highpass(AudioClip(samples=x, sample_rate=32000), 300.0)
        rms_in = np.sqrt(np.mean(x**2))
        rms_out = np.sqrt(np.mean(out.samples**2))
        assert abs(rms_out - rms_in) / rms_in < 0.05

    def test_100hz_attenuated(self):
        t = np.arange(32000) / 32000
        x = 0.5 * np.sin(2 * np.pi * 100 * t)
        out = highpass(AudioClip(samples=x, sample_rate=32000), 300.0)
        rms_in = np.sqrt(np.mean(x**2))
        rms_out = np.sqrt(np.mean(out.samples**2))
        assert rms_out < 0.25 * rms_in

    def test_linearity(self, rng):
        x = rng.uniform(-0.4, 0.4, 8000)
        y = rng.uniform(-0.4, 0.4, 8000)
        a, b = 0.6, -0.3
        fx = highpass(AudioClip(samples=x, sample_rate=32000)).samples
        fy = highpass(AudioClip(samples=y, sample_rate=32000)).samples
        fxy = highpass(AudioClip(samples=a * x + b * y, sample_rate=32000)).samples
        np.testing.assert_allclose(fxy, a * fx + b * fy, atol=1e-9)

    def test_length_preserved(self):
        clip = AudioClip(samples=np.random.default_rng(1).uniform(-0.5, 0.5, 12345),
                         sample_rate=32000)
        assert highpass(clip).samples.size == 12345

    def test_rejects_bad_cutoff(self):
        clip = AudioClip(samples=np.zeros(100), sample_rate=32000)
        with pytest.raises(AudioError):
            highpass(clip, 16000.0)
        with pytest.raises(AudioError):
            highpass(clip, 0.0)


def test_load_then_resample_same_rate_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    data = (rng.uniform(-0.8, 0.8, 1000) * 32767).astype(np.int16)
    wavfile.write(tmp_path / "x.wav", 32000, data)
    clip = load_wav(tmp_path / "x.wav")
    out = resample(clip, 32000)
    np.testing.assert_array_equal(out.samples, clip.samples)
