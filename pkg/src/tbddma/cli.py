"""Command-line front end: scenario runner, designers, detectors, examples.

Exit codes: 0 success, 2 configuration problem (bad scenario/config field,
bad arguments), 3 numeric or dimension failure, 4 file I/O problem. The
default output directory is ./tbddma_out, overridable per run with --out-dir
or globally with the TBDDMA_OUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .fileio import MatrixFormatError, ScenarioError
from .modmat import Scheme
from .params import derive_metrics
from .rdproc import binary_detection, detect_and_estimate, estimate_threshold, \
    range_doppler_map
from .reproduce import ResultBundle, noncoherent_sum, reproduce, resolve_out_dir
from .scene import DataCube, NoiseConfig, simulate_rx
from .tbdesign import TBDesignConfig, beampattern, design_tb

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_COMB_SCHEMES = (Scheme.EMPTY_SPECTRUM, Scheme.TB_DDMA)


def export_matrix(data, fmt: str, path) -> Path:
    """Write a complex array in a supported on-disk format."""
    if fmt == "rdmx":
        return fileio.write_matrix(path, data)
    raise ValueError(f"unsupported export format {fmt!r}")


def plot(data, kind: str, path) -> Path:
    """Render a supported artifact kind to SVG."""
    if kind == "pattern":
        return fileio.write_pattern_svg(path, data)
    raise ValueError(f"unsupported plot kind {kind!r}")


def _print_detections(detections, params) -> None:
    print(f"detections: {len(detections)}")
    if detections:
        print(f"{'range_m':>10} {'velocity_mps':>13} {'doppler':>9} {'conf':>5}")
        res = derive_metrics(params).range_resolution_m
        for det in detections:
            print(f"{det.range_bin * res:10.2f} {det.velocity_mps(params):13.2f} "
                  f"{det.recovered_doppler:9.4f} {det.confidence:5d}")


def _print_files(files) -> None:
    for name, path in files.items():
        print(f"wrote {name}: {path}")


def run_scenario(path, out_dir=None, seed: int | None = None,
                 fast_time_samples: int | None = None, plot: bool = True) -> ResultBundle:
    """Simulate, process and detect per a scenario file; write the artifacts."""
    scenario = fileio.load_scenario(path)
    params = scenario["params"]
    if fast_time_samples is not None:
        params = dataclasses.replace(params, fast_time_samples=fast_time_samples)
    noise = scenario["noise"] if scenario["noise"] is not None else NoiseConfig(None, 0)
    if seed is not None:
        noise = dataclasses.replace(noise, seed=seed)
    W = scenario["modulation"]
    cfg = scenario["processing"]

    cube = simulate_rx(params, W, scenario["targets"], noise)
    maps = range_doppler_map(cube, cfg.window)
    threshold = cfg.threshold if cfg.threshold is not None else \
        estimate_threshold(maps, cfg.threshold_scale)
    fused = binary_detection(maps, threshold)
    if W.scheme in _COMB_SCHEMES:
        detections = detect_and_estimate(cube, cfg)
    else:
        detections = []
        print(f"note: ambiguity recovery undefined for scheme "
              f"'{W.scheme.value}', skipping detection")

    out = resolve_out_dir(out_dir if out_dir is not None else scenario["output_dir"])
    stem = Path(path).stem
    summed = noncoherent_sum(maps)
    files = {
        "map_csv": fileio.write_map_csv(out / f"{stem}_map.csv", summed),
        "binary_rdmx": fileio.write_matrix(out / f"{stem}_binary.rdmx",
                                           fused.matrix.astype(np.complex64)),
        "detections_csv": fileio.write_detections_csv(
            out / f"{stem}_detections.csv", detections, params),
    }
    metrics = derive_metrics(params)
    print(f"range resolution {metrics.range_resolution_m:.3f} m, "
          f"velocity resolution {metrics.velocity_resolution_mps:.3f} m/s, "
          f"threshold {threshold:.6g}")
    _print_detections(detections, params)
    _print_files(files)
    return ResultBundle(metrics, detections, files)


def _load_design_config(path) -> TBDesignConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("<document>", f"not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ScenarioError("<document>", "top level must be an object")
    if "num_tx" not in raw:
        raise ScenarioError("num_tx", "missing")
    kwargs = {}
    for name in ("num_tx", "num_waveforms", "randomization_trials",
                 "randomization_seed"):
        if name in raw:
            value = raw[name]
            if isinstance(value, bool) or not isinstance(value, int):
                raise ScenarioError(name, f"expected integer, got {value!r}")
            kwargs[name] = value
    for name in ("spacing_wavelengths", "feasibility_tol", "gap_tol"):
        if name in raw:
            value = raw[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ScenarioError(name, f"expected number, got {value!r}")
            kwargs[name] = float(value)
    if "region" in raw:
        region = raw["region"]
        if isinstance(region, (int, float)) and not isinstance(region, bool):
            kwargs["region"] = float(region)
        elif isinstance(region, list) and len(region) == 2 and \
                all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in region):
            kwargs["region"] = (float(region[0]), float(region[1]))
        else:
            raise ScenarioError("region", f"expected number or [lo, hi], got {region!r}")
    if "grid_points" in raw:
        gp = raw["grid_points"]
        if isinstance(gp, bool) or not isinstance(gp, int) or gp < 2:
            raise ScenarioError("grid_points", f"expected integer >= 2, got {gp!r}")
        kwargs["grid"] = np.linspace(-1.0, 1.0, gp)
    try:
        return TBDesignConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ScenarioError("<design config>", str(exc)) from None


def _cmd_simulate(args) -> int:
    run_scenario(args.scenario, args.out_dir, args.seed, args.fast_time_samples,
                 args.plot)
    return EXIT_OK


def _cmd_design_tb(args) -> int:
    cfg = _load_design_config(args.config)
    tb = design_tb(cfg)
    out = resolve_out_dir(args.out_dir)
    pattern = beampattern(tb.matrix, cfg.spacing_wavelengths, cfg.grid)
    files = {
        "tb_matrix_rdmx": export_matrix(tb.matrix, "rdmx", out / "tb_matrix.rdmx"),
        "pattern_csv": fileio.write_pattern_csv(out / "tb_pattern.csv", pattern),
    }
    if args.plot:
        files["pattern_svg"] = plot(pattern, "pattern", out / "tb_pattern.svg")
    print(f"minimax ripple {tb.ripple:.6g}, rank-one residual "
          f"{tb.rank_one_residual:.3g}")
    print("row powers:", np.round(np.sum(np.abs(tb.matrix) ** 2, axis=1), 6))
    _print_files(files)
    return EXIT_OK


def _cmd_beampattern(args) -> int:
    arr = fileio.read_matrix(args.matrix)
    if arr.ndim not in (1, 2):
        raise ValueError(f"beampattern needs a vector or matrix, got rank {arr.ndim}")
    grid = np.linspace(-1.0, 1.0, args.grid_points)
    pattern = beampattern(arr, args.spacing, grid, normalize=args.normalize)
    out = resolve_out_dir(args.out_dir)
    stem = Path(args.matrix).stem
    files = {"pattern_csv": fileio.write_pattern_csv(out / f"{stem}_pattern.csv",
                                                     pattern)}
    if args.plot:
        files["pattern_svg"] = plot(pattern, "pattern", out / f"{stem}_pattern.svg")
    _print_files(files)
    return EXIT_OK


def _cmd_detect(args) -> int:
    scenario = fileio.load_scenario(args.scenario)
    params, W, cfg = scenario["params"], scenario["modulation"], scenario["processing"]
    arr = fileio.read_matrix(args.cube)
    expected = (params.num_rx, params.fast_time_samples, params.num_pulses)
    if arr.shape != expected:
        raise ValueError(f"cube dims {arr.shape} inconsistent with scenario "
                         f"{expected}")
    cube = DataCube(arr, params, W)
    detections = detect_and_estimate(cube, cfg)
    out = resolve_out_dir(args.out_dir)
    files = {"detections_csv": fileio.write_detections_csv(
        out / f"{Path(args.cube).stem}_detections.csv", detections, params)}
    _print_detections(detections, params)
    _print_files(files)
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    bundle = reproduce(args.example, seed=args.seed if args.seed is not None else 0,
                       out_dir=args.out_dir, fast_time_samples=args.fast_time_samples,
                       plot=args.plot)
    print(f"detections: {len(bundle.detections)}")
    _print_files(bundle.files)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tbddma",
        description="FMCW MIMO radar waveform-coding and beamspace toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fast_time=True):
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario random seed")
        p.add_argument("--out-dir", default=None,
                       help="output directory (default $TBDDMA_OUT_DIR or ./tbddma_out)")
        if fast_time:
            p.add_argument("--fast-time-samples", type=int, default=None,
                           help="override samples per chirp")
        p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True,
                       help="emit SVG plots alongside data files")

    p = sub.add_parser("simulate", help="run a scenario file end to end")
    p.add_argument("scenario")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("design-tb", help="solve the fast-time beamspace design")
    p.add_argument("config")
    common(p, fast_time=False)
    p.set_defaults(func=_cmd_design_tb)

    p = sub.add_parser("beampattern", help="evaluate a stored matrix's pattern")
    p.add_argument("matrix")
    p.add_argument("--spacing", type=float, default=0.5,
                   help="element spacing in wavelengths")
    p.add_argument("--grid-points", type=int, default=181)
    p.add_argument("--normalize", action="store_true")
    common(p, fast_time=False)
    p.set_defaults(func=_cmd_beampattern)

    p = sub.add_parser("detect", help="run detection on a stored cube")
    p.add_argument("cube")
    p.add_argument("--scenario", required=True,
                   help="scenario file supplying parameters and coding")
    common(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("reproduce", help="run a built-in example configuration")
    p.add_argument("example", type=int, choices=(1, 2, 3, 4))
    common(p)
    p.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
