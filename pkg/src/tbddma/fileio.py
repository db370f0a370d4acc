"""Deterministic file I/O: complex-matrix binary format, CSV tables, SVG plots.

Every writer here produces identical bytes for identical inputs (no
timestamps, fixed float formatting), so seeded runs can be diffed file by
file. The binary format is deliberately primitive: magic, version, rank,
dims, then interleaved little-endian float32 real/imag pairs in row-major
order. complex64 arrays round-trip exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"RDMX"
VERSION = 1

CSV_FLOAT = "%.9e"


class ScenarioError(ValueError):
    """Scenario file problem; carries the dotted path of the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"scenario field '{field}': {message}")


class MatrixFormatError(ValueError):
    pass


def write_matrix(path, array) -> Path:
    """Serialize a complex array (any rank) to the binary matrix format."""
    path = Path(path)
    arr = np.ascontiguousarray(np.asarray(array), dtype="<c8")
    header = MAGIC + struct.pack("<II", VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    path.write_bytes(header + arr.tobytes())
    return path


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 12:
        raise MatrixFormatError(f"{path}: truncated header ({len(blob)} bytes)")
    if blob[:4] != MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    version, rank = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise MatrixFormatError(f"{path}: unsupported version {version}")
    if len(blob) < 12 + 8 * rank:
        raise MatrixFormatError(f"{path}: header claims rank {rank} but file is too short")
    dims = struct.unpack_from(f"<{rank}Q", blob, 12)
    offset = 12 + 8 * rank
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    expected = offset + 8 * count
    if len(blob) != expected:
        raise MatrixFormatError(
            f"{path}: dims {dims} imply {expected} bytes, file has {len(blob)}")
    flat = np.frombuffer(blob, dtype="<c8", count=count, offset=offset)
    return flat.reshape(dims).copy()


def write_map_csv(path, rdmap, floor: float = 1e-12) -> Path:
    """Magnitude of a range-Doppler map as range_m,doppler_norm,value_db rows."""
    path = Path(path)
    mag = np.maximum(rdmap.magnitude, floor)
    db = 20.0 * np.log10(mag)
    rr, dd = np.meshgrid(rdmap.range_axis_m, rdmap.doppler_axis, indexing="ij")
    table = np.column_stack([rr.ravel(), dd.ravel(), db.ravel()])
    np.savetxt(path, table, fmt=CSV_FLOAT, delimiter=",",
               header="range_m,doppler_norm,value_db", comments="")
    return path


def write_pattern_csv(path, pattern, floor: float = 1e-12) -> Path:
    path = Path(path)
    table = np.column_stack([pattern.grid, pattern.db(floor)])
    np.savetxt(path, table, fmt=CSV_FLOAT, delimiter=",",
               header="sin_theta,power_db", comments="")
    return path


def write_detections_csv(path, detections, params) -> Path:
    path = Path(path)
    lines = ["range_bin,doppler_norm,velocity_mps,start_bin,confidence"]
    for det in detections:
        lines.append(",".join([
            str(det.range_bin),
            CSV_FLOAT % det.recovered_doppler,
            CSV_FLOAT % det.velocity_mps(params),
            str(det.start_bin),
            str(det.confidence),
        ]))
    path.write_text("\n".join(lines) + "\n")
    return path


def _svg_ticks(lo: float, hi: float, step: float) -> np.ndarray:
    first = np.ceil(lo / step) * step
    return np.arange(first, hi + step / 2, step)


def write_pattern_svg(path, pattern, title: str = "", floor: float = 1e-12) -> Path:
    """Line plot of a beampattern, sin-angle against dB, as standalone SVG."""
    path = Path(path)
    x = np.asarray(pattern.grid, dtype=float)
    y = pattern.db(floor)
    width, height = 640, 400
    ml, mr, mt, mb = 60, 15, 30, 45
    x0, x1 = float(x.min()), float(x.max())
    y1 = float(np.ceil(y.max() / 10.0) * 10.0)
    y0 = max(float(np.floor(y.min() / 10.0) * 10.0), y1 - 80.0)
    y = np.maximum(y, y0)

    def px(v):
        return ml + (v - x0) / (x1 - x0) * (width - ml - mr)

    def py(v):
        return mt + (y1 - v) / (y1 - y0) * (height - mt - mb)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{width - ml - mr}" height="{height - mt - mb}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')
    for tv in _svg_ticks(x0, x1, 0.5):
        parts.append(f'<line x1="{px(tv):.2f}" y1="{py(y0):.2f}" x2="{px(tv):.2f}" '
                     f'y2="{py(y0) + 5:.2f}" stroke="black"/>')
        parts.append(f'<text x="{px(tv):.2f}" y="{py(y0) + 18:.2f}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{tv:g}</text>')
    for tv in _svg_ticks(y0, y1, 10.0):
        parts.append(f'<line x1="{ml - 5}" y1="{py(tv):.2f}" x2="{ml}" '
                     f'y2="{py(tv):.2f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{py(tv) + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{tv:g}</text>')
    parts.append(f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 8}" '
                 'text-anchor="middle" font-family="sans-serif" font-size="12">'
                 'sin &#952;</text>')
    parts.append(f'<text x="14" y="{(mt + height - mb) / 2:.1f}" text-anchor="middle" '
                 'font-family="sans-serif" font-size="12" '
                 f'transform="rotate(-90 14 {(mt + height - mb) / 2:.1f})">dB</text>')
    pts = " ".join(f"{px(xi):.2f},{py(yi):.2f}" for xi, yi in zip(x, y))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" '
                 'stroke-width="1.5"/>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path


# scenario files ------------------------------------------------------------

def _require(table: dict, field: str, kind, parent: str):
    dotted = f"{parent}.{field}" if parent else field
    if field not in table:
        raise ScenarioError(dotted, "missing")
    value = table[field]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(dotted, f"expected integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ScenarioError(dotted, f"expected {kind.__name__}, got {value!r}")
    return value


def load_scenario(path) -> dict:
    """Read and validate a scenario JSON file into constructed objects.

    Returns a dict with keys: params, modulation, targets, noise, processing,
    output_dir. Raises ScenarioError naming the bad field.
    """
    from . import modmat, params as params_mod, rdproc, scene

    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("<document>", f"not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ScenarioError("<document>", "top level must be an object")

    radar = _require(raw, "radar", dict, "")
    kwargs = {}
    for name in ("carrier_freq_hz", "bandwidth_hz", "chirp_time_s"):
        kwargs[name] = _require(radar, name, float, "radar")
    for name in ("num_pulses", "num_tx", "num_rx"):
        kwargs[name] = _require(radar, name, int, "radar")
    if "fast_time_samples" in radar:
        kwargs["fast_time_samples"] = _require(radar, "fast_time_samples", int, "radar")
    if "tx_spacing_wavelengths" in radar:
        kwargs["tx_spacing_wavelengths"] = _require(
            radar, "tx_spacing_wavelengths", float, "radar")
    if radar.get("rx_spacing_wavelengths") is not None:
        kwargs["rx_spacing_wavelengths"] = _require(
            radar, "rx_spacing_wavelengths", float, "radar")
    try:
        params = params_mod.RadarParams(**kwargs)
    except ValueError as exc:
        raise ScenarioError("radar", str(exc)) from None

    mod = _require(raw, "modulation", dict, "")
    scheme_name = _require(mod, "scheme", str, "modulation")
    coding_name = mod.get("coding", "first-bin")
    if not isinstance(coding_name, str):
        raise ScenarioError("modulation.coding", f"expected string, got {coding_name!r}")
    try:
        coding = modmat.Coding(coding_name)
    except ValueError:
        raise ScenarioError(
            "modulation.coding",
            f"unknown coding {coding_name!r} "
            f"(choices: {[c.value for c in modmat.Coding]})") from None
    M, Q = params.num_tx, params.num_pulses
    try:
        if scheme_name == "tdma":
            modulation = modmat.tdma_matrix(M, Q)
        elif scheme_name == "ddma":
            modulation = modmat.ddma_matrix(M, Q, coding)
        elif scheme_name == "hadamard":
            modulation = modmat.hadamard_matrix(M, Q)
        elif scheme_name == "empty_spectrum":
            virtual = _require(mod, "virtual_tx", int, "modulation")
            modulation = modmat.empty_spectrum_matrix(M, virtual, Q, coding)
        elif scheme_name == "tb_ddma":
            virtual = _require(mod, "virtual_tx", int, "modulation")
            beams = _require(mod, "beams", list, "modulation")
            modulation = modmat.tb_ddma_matrix(M, virtual, Q, beams)
        else:
            raise ScenarioError(
                "modulation.scheme",
                f"unknown scheme {scheme_name!r} (choices: tdma, ddma, hadamard, "
                "empty_spectrum, tb_ddma)")
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError("modulation", str(exc)) from None

    target_list = _require(raw, "targets", list, "")
    targets = []
    for i, entry in enumerate(target_list):
        where = f"targets[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(where, "expected object")
        fading_name = entry.get("fading", "fixed")
        if fading_name not in ("fixed", "swerling1"):
            raise ScenarioError(f"{where}.fading",
                                f"expected 'fixed' or 'swerling1', got {fading_name!r}")
        try:
            targets.append(scene.Target(
                range_m=_require(entry, "range_m", float, where),
                velocity_mps=_require(entry, "velocity_mps", float, where),
                sin_angle=float(entry.get("sin_angle", 0.0)),
                mean_amplitude=float(entry.get("mean_amplitude", 1.0)),
                fading=scene.Fading.SWERLING_I if fading_name == "swerling1"
                else scene.Fading.FIXED,
            ))
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(where, str(exc)) from None

    noise_raw = raw.get("noise")
    if noise_raw is None:
        noise = None
    elif isinstance(noise_raw, dict):
        snr = noise_raw.get("input_snr_db")
        if snr is not None and not isinstance(snr, (int, float)):
            raise ScenarioError("noise.input_snr_db", f"expected number, got {snr!r}")
        seed = noise_raw.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ScenarioError("noise.seed", f"expected integer, got {seed!r}")
        noise = scene.NoiseConfig(
            input_snr_db=None if snr is None else float(snr), seed=seed)
    else:
        raise ScenarioError("noise", "expected object or null")

    proc_raw = raw.get("processing", {})
    if not isinstance(proc_raw, dict):
        raise ScenarioError("processing", "expected object")
    cfg = rdproc.DetectionConfig()
    if "window" in proc_raw:
        window = proc_raw["window"]
        if window is not None and not isinstance(window, str):
            raise ScenarioError("processing.window", f"expected string or null, got {window!r}")
        cfg.window = window
    if "threshold_scale" in proc_raw:
        scale = proc_raw["threshold_scale"]
        if not isinstance(scale, (int, float)) or isinstance(scale, bool):
            raise ScenarioError("processing.threshold_scale", f"expected number, got {scale!r}")
        cfg.threshold_scale = float(scale)
    if proc_raw.get("threshold") is not None:
        thr = proc_raw["threshold"]
        if not isinstance(thr, (int, float)) or isinstance(thr, bool):
            raise ScenarioError("processing.threshold", f"expected number, got {thr!r}")
        cfg.threshold = float(thr)
    if "consolidate" in proc_raw:
        cons = proc_raw["consolidate"]
        if not isinstance(cons, bool):
            raise ScenarioError("processing.consolidate", f"expected boolean, got {cons!r}")
        cfg.consolidate = cons

    out_dir = raw.get("output_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ScenarioError("output_dir", f"expected string, got {out_dir!r}")

    return {
        "params": params,
        "modulation": modulation,
        "targets": targets,
        "noise": noise,
        "processing": cfg,
        "output_dir": out_dir,
    }
