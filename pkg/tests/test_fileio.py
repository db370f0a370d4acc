"""Tests for the binary matrix format, CSV/SVG writers, and scenario loading."""

import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tbddma import Coding, Fading, RangeDopplerMap, Scheme, beampattern
from tbddma.fileio import (
    MatrixFormatError,
    ScenarioError,
    load_scenario,
    read_matrix,
    write_detections_csv,
    write_map_csv,
    write_matrix,
    write_pattern_csv,
    write_pattern_svg,
)
from tbddma.rdproc import Detection


class TestMatrixFormat:
    @pytest.mark.parametrize(
        "shape", [(4,), (3, 5), (2, 3, 4)]
    )
    def test_round_trip_exact(self, tmp_path, shape):
        rng = np.random.default_rng(0)
        arr = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)).astype(
            np.complex64
        )
        p = write_matrix(tmp_path / "m.rdmx", arr)
        back = read_matrix(p)
        assert back.dtype == np.complex64
        np.testing.assert_array_equal(back, arr)

    @given(
        arr=hnp.arrays(
            dtype=np.complex64,
            shape=hnp.array_shapes(min_dims=1, max_dims=3, max_side=6),
            elements=st.complex_numbers(
                max_magnitude=1e6, allow_nan=False, allow_infinity=False, width=64
            ),
        )
    )
    @settings(max_examples=30, deadline=None,
              suppress_health_check=[HealthCheck.function_scoped_fixture])
    def test_round_trip_property(self, tmp_path, arr):
        p = write_matrix(tmp_path / "h.rdmx", arr)
        np.testing.assert_array_equal(read_matrix(p), arr.astype(np.complex64))

    def test_header_layout(self, tmp_path):
        p = write_matrix(tmp_path / "m.rdmx", np.zeros((2, 3), dtype=np.complex64))
        blob = p.read_bytes()
        assert blob[:4] == b"RDMX"
        assert int.from_bytes(blob[4:8], "little") == 1  # version
        assert int.from_bytes(blob[8:12], "little") == 2  # rank
        assert int.from_bytes(blob[12:20], "little") == 2
        assert int.from_bytes(blob[20:28], "little") == 3
        assert len(blob) == 28 + 8 * 6

    def test_deterministic_bytes(self, tmp_path):
        arr = np.arange(12, dtype=np.complex64).reshape(3, 4) * (1 + 2j)
        a = write_matrix(tmp_path / "a.rdmx", arr).read_bytes()
        b = write_matrix(tmp_path / "b.rdmx", arr).read_bytes()
        assert a == b

    def test_float64_input_narrowed(self, tmp_path):
        arr = np.array([[1.5 + 0.5j]])
        back = read_matrix(write_matrix(tmp_path / "m.rdmx", arr))
        assert back.dtype == np.complex64
        np.testing.assert_array_equal(back, arr.astype(np.complex64))

    def test_bad_magic(self, tmp_path):
        f = tmp_path / "bad.rdmx"
        f.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(MatrixFormatError, match="magic"):
            read_matrix(f)

    def test_truncated_header(self, tmp_path):
        f = tmp_path / "short.rdmx"
        f.write_bytes(b"RDMX\x01")
        with pytest.raises(MatrixFormatError, match="truncated"):
            read_matrix(f)

    def test_size_mismatch(self, tmp_path):
        p = write_matrix(tmp_path / "m.rdmx", np.zeros(4, dtype=np.complex64))
        blob = p.read_bytes()
        p.write_bytes(blob[:-8])  # drop one element
        with pytest.raises(MatrixFormatError, match="imply"):
            read_matrix(p)

    def test_unsupported_version(self, tmp_path):
        p = write_matrix(tmp_path / "m.rdmx", np.zeros(2, dtype=np.complex64))
        blob = bytearray(p.read_bytes())
        blob[4] = 9
        p.write_bytes(bytes(blob))
        with pytest.raises(MatrixFormatError, match="version"):
            read_matrix(p)


class TestCsvWriters:
    def test_map_csv_header_and_shape(self, tmp_path):
        m = RangeDopplerMap(
            values=np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex),
            range_axis_m=np.array([0.0, 0.5]),
            doppler_axis=np.array([-0.25, 0.5]),
        )
        p = write_map_csv(tmp_path / "map.csv", m)
        lines = p.read_text().strip().split("\n")
        assert lines[0] == "range_m,doppler_norm,value_db"
        assert len(lines) == 1 + 4
        r, d, v = lines[1].split(",")
        assert float(r) == 0.0
        assert float(d) == -0.25
        assert float(v) == pytest.approx(0.0)  # 20 log10 |1|

    def test_pattern_csv(self, tmp_path):
        pat = beampattern(np.ones(4), 0.5, np.linspace(-1, 1, 5))
        p = write_pattern_csv(tmp_path / "pat.csv", pat)
        lines = p.read_text().strip().split("\n")
        assert lines[0] == "sin_theta,power_db"
        assert len(lines) == 6
        s, db = lines[3].split(",")  # grid point 0.0: coherent sum of 4
        assert float(s) == 0.0
        assert float(db) == pytest.approx(10 * np.log10(16.0))

    def test_detections_csv(self, tmp_path):
        from tbddma import RadarParams

        params = RadarParams(carrier_freq_hz=79e9, bandwidth_hz=300e6,
                             chirp_time_s=12e-6, num_pulses=64, num_tx=2,
                             num_rx=2, fast_time_samples=32)
        dets = [Detection(range_bin=10, recovered_doppler=0.125, start_bin=40,
                          confidence=2)]
        p = write_detections_csv(tmp_path / "det.csv", dets, params)
        lines = p.read_text().strip().split("\n")
        assert lines[0] == "range_bin,doppler_norm,velocity_mps,start_bin,confidence"
        cells = lines[1].split(",")
        assert cells[0] == "10"
        assert float(cells[1]) == 0.125
        assert float(cells[2]) == pytest.approx(dets[0].velocity_mps(params))
        assert cells[3] == "40"
        assert cells[4] == "2"

    def test_empty_detections(self, tmp_path):
        from tbddma import RadarParams

        params = RadarParams(carrier_freq_hz=79e9, bandwidth_hz=300e6,
                             chirp_time_s=12e-6, num_pulses=8, num_tx=2,
                             num_rx=2, fast_time_samples=8)
        p = write_detections_csv(tmp_path / "det.csv", [], params)
        assert p.read_text() == "range_bin,doppler_norm,velocity_mps,start_bin,confidence\n"


class TestSvgWriter:
    def test_deterministic_and_wellformed(self, tmp_path):
        pat = beampattern(np.ones(8), 0.5, np.linspace(-1, 1, 181))
        a = write_pattern_svg(tmp_path / "a.svg", pat, title="test").read_text()
        b = write_pattern_svg(tmp_path / "b.svg", pat, title="test").read_text()
        assert a == b
        assert a.startswith("<svg ")
        assert "<polyline points=" in a
        assert "test" in a
        assert a.rstrip().endswith("</svg>")

    def test_title_optional(self, tmp_path):
        pat = beampattern(np.ones(2), 0.5, np.linspace(-1, 1, 11))
        text = write_pattern_svg(tmp_path / "t.svg", pat).read_text()
        assert "<text" in text  # axis labels still present


def valid_scenario():
    return {
        "radar": {
            "carrier_freq_hz": 79e9,
            "bandwidth_hz": 300e6,
            "chirp_time_s": 12e-6,
            "num_pulses": 64,
            "num_tx": 2,
            "num_rx": 3,
            "fast_time_samples": 32,
        },
        "modulation": {"scheme": "empty_spectrum", "virtual_tx": 4,
                       "coding": "first-bin"},
        "targets": [
            {"range_m": 20.0, "velocity_mps": 5.0, "fading": "swerling1"},
            {"range_m": 10.0, "velocity_mps": -2.0, "sin_angle": 0.1},
        ],
        "noise": {"input_snr_db": -5.0, "seed": 3},
        "processing": {"window": "hann", "threshold_scale": 10.0,
                       "consolidate": True},
        "output_dir": "out",
    }


def write_scenario(tmp_path, doc):
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(doc))
    return p


class TestLoadScenario:
    def test_valid_document(self, tmp_path):
        out = load_scenario(write_scenario(tmp_path, valid_scenario()))
        assert out["params"].num_tx == 2
        assert out["params"].num_pulses == 64
        assert out["modulation"].scheme is Scheme.EMPTY_SPECTRUM
        assert out["modulation"].virtual_tx == 4
        assert len(out["targets"]) == 2
        assert out["targets"][0].fading is Fading.SWERLING_I
        assert out["targets"][1].sin_angle == 0.1
        assert out["noise"].input_snr_db == -5.0
        assert out["noise"].seed == 3
        assert out["processing"].window == "hann"
        assert out["processing"].threshold_scale == 10.0
        assert out["output_dir"] == "out"

    def test_defaults(self, tmp_path):
        doc = valid_scenario()
        doc["modulation"] = {"scheme": "ddma"}
        del doc["noise"]
        del doc["processing"]
        del doc["output_dir"]
        out = load_scenario(write_scenario(tmp_path, doc))
        assert out["modulation"].scheme is Scheme.DDMA
        assert out["modulation"].coding is Coding.FIRST_BIN
        assert out["noise"] is None
        assert out["processing"].window == "hann"
        assert out["output_dir"] is None

    def test_tb_ddma_scheme(self, tmp_path):
        doc = valid_scenario()
        doc["modulation"] = {"scheme": "tb_ddma", "virtual_tx": 4, "beams": [1, 3]}
        out = load_scenario(write_scenario(tmp_path, doc))
        assert out["modulation"].scheme is Scheme.TB_DDMA
        assert out["modulation"].pulse_selection is not None

    def test_null_noise_disables(self, tmp_path):
        doc = valid_scenario()
        doc["noise"] = None
        out = load_scenario(write_scenario(tmp_path, doc))
        assert out["noise"] is None

    def test_not_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{ nope")
        with pytest.raises(ScenarioError) as e:
            load_scenario(p)
        assert e.value.field == "<document>"

    @pytest.mark.parametrize(
        "mutate,field",
        [
            (lambda d: d.pop("radar"), "radar"),
            (lambda d: d["radar"].pop("bandwidth_hz"), "radar.bandwidth_hz"),
            (lambda d: d["radar"].update(num_tx="two"), "radar.num_tx"),
            (lambda d: d["radar"].update(num_pulses=True), "radar.num_pulses"),
            (lambda d: d["radar"].update(bandwidth_hz=-1.0), "radar"),
            (lambda d: d["modulation"].update(scheme="qpsk"), "modulation.scheme"),
            (lambda d: d["modulation"].update(coding="gray"), "modulation.coding"),
            (lambda d: d["modulation"].pop("virtual_tx"), "modulation.virtual_tx"),
            (lambda d: d["modulation"].update(virtual_tx=2), "modulation"),
            (lambda d: d.pop("targets"), "targets"),
            (lambda d: d["targets"].append(7), "targets[2]"),
            (lambda d: d["targets"][0].pop("range_m"), "targets[0].range_m"),
            (lambda d: d["targets"][0].update(range_m=-5.0), "targets[0]"),
            (lambda d: d["targets"][1].update(fading="rician"), "targets[1].fading"),
            (lambda d: d.update(noise=[1]), "noise"),
            (lambda d: d["noise"].update(seed="x"), "noise.seed"),
            (lambda d: d["noise"].update(input_snr_db="loud"), "noise.input_snr_db"),
            (lambda d: d.update(processing="fast"), "processing"),
            (lambda d: d["processing"].update(window=5), "processing.window"),
            (lambda d: d["processing"].update(threshold_scale="big"),
             "processing.threshold_scale"),
            (lambda d: d["processing"].update(threshold=True), "processing.threshold"),
            (lambda d: d["processing"].update(consolidate="yes"),
             "processing.consolidate"),
            (lambda d: d.update(output_dir=5), "output_dir"),
        ],
    )
    def test_bad_field_reported(self, tmp_path, mutate, field):
        doc = valid_scenario()
        mutate(doc)
        with pytest.raises(ScenarioError) as e:
            load_scenario(write_scenario(tmp_path, doc))
        assert e.value.field == field
        assert field in str(e.value)
