"""Command-line interface.

Subcommands: ``derain``, ``synth``, ``estimate-angle``, ``evaluate``,
``sweep``.  Options may come from a JSON config file (``--config``) with
command-line flags taking precedence.  Exit codes: 0 success, 1 runtime
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import image, metrics, report, solver, tiles
from .angle import estimate_angle
from .errors import ConfigError, DerainError
from .synth import BLEND_MODES, RainSpec, RainPair, make_pair

PARAM_KEYS = ("tau", "lambda_along", "lambda_across", "alpha0", "beta0",
              "rho", "inner_iters", "outer_iters", "tol")
SPEC_KEYS = ("angle_degrees", "density", "length_px", "length_jitter",
             "width_px", "intensity", "intensity_jitter", "seed")


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as handle:
            cfg = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _merged(args, cfg: dict, key: str, default):
    """Flag value if given, else config value, else default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in cfg:
        return cfg[key]
    return default


def _params_from(args, cfg: dict) -> solver.UdgParams:
    kwargs = {}
    src = cfg.get("params", {})
    if not isinstance(src, dict):
        raise ConfigError("config field 'params' must be an object")
    for key in PARAM_KEYS:
        if key in src:
            kwargs[key] = src[key]
    for flag, key in (("tau", "tau"), ("lx", "lambda_along"),
                      ("ly", "lambda_across"), ("iters", "outer_iters")):
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[key] = value
    try:
        return solver.UdgParams(**kwargs)
    except (TypeError, DerainError) as exc:
        raise ConfigError(f"invalid solver parameters: {exc}") from exc


def _spec_from(args, cfg: dict) -> RainSpec:
    kwargs = {}
    src = cfg.get("rain_spec", {})
    if not isinstance(src, dict):
        raise ConfigError("config field 'rain_spec' must be an object")
    for key in SPEC_KEYS:
        if key in src:
            kwargs[key] = src[key]
    for flag, key in (("angle", "angle_degrees"), ("density", "density"),
                      ("length", "length_px"),
                      ("length_jitter", "length_jitter"),
                      ("width", "width_px"), ("intensity", "intensity"),
                      ("intensity_jitter", "intensity_jitter"),
                      ("seed", "seed")):
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[key] = value
    try:
        return RainSpec(**kwargs)
    except (TypeError, DerainError) as exc:
        raise ConfigError(f"invalid rain spec: {exc}") from exc


def _collect_pngs(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if path.is_dir():
        found = sorted(path.glob("*.png"))
        if not found:
            raise ConfigError(f"no PNG files in {path}")
        return found
    raise ConfigError(f"input path does not exist: {path}")


def _write_json(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


# ----------------------------------------------------------------- derain

def _derain_one(img, params, angle, tile_mode):
    """Gray or RGB derain with one shared angle; returns (X, R, result)."""
    planes = image.split_channels(img)
    use_tiles = (tile_mode == "on") or (
        tile_mode == "auto" and tiles.should_tile(planes[0].shape)
    )
    if angle is None and len(planes) == 3:
        try:
            angle = estimate_angle(image.to_luma(img))
        except DerainError:
            angle = None
    clean_planes, rain_planes, result = [], [], None
    for plane in planes:
        if use_tiles:
            result = tiles.derain_tiled(plane, params=params, angle=angle)
        else:
            result = solver.derain(plane, params=params, angle=angle)
        if angle is None:
            angle = result.angle
        clean_planes.append(result.clean)
        rain_planes.append(result.rain)
    X = image.merge_channels(clean_planes)
    R = image.merge_channels(rain_planes)
    return X, R, result, use_tiles


def cmd_derain(args) -> int:
    cfg = _load_config(args.config)
    params = _params_from(args, cfg)
    out_dir = Path(_merged(args, cfg, "out", "derained_out"))
    tile_mode = _merged(args, cfg, "tile", "auto")
    if tile_mode not in ("auto", "on", "off"):
        raise ConfigError(f"--tile must be auto/on/off, got {tile_mode}")
    angle = args.angle

    inputs = _collect_pngs(Path(args.input))
    failures = 0
    for path in inputs:
        try:
            img = image.load_image(path)
            X, R, result, tiled = _derain_one(img, params, angle, tile_mode)
            stem = path.stem
            image.save_image(X, out_dir / f"{stem}.X.png")
            image.save_image(R, out_dir / f"{stem}.R.png")
            meta = {
                "input": str(path),
                "angle_degrees": result.angle.angle_degrees,
                "angle_confidence": result.angle.confidence,
                "angle_source": "user" if angle is not None
                                and not hasattr(angle, "confidence")
                                else result.angle_source,
                "low_confidence_angle": result.low_confidence_angle,
                "iterations": result.iters_used,
                "converged": result.converged,
                "final_energy": float(result.objective_trace[-1]),
                "tiled": tiled,
                "params": asdict(params),
            }
            _write_json(meta, out_dir / f"{stem}.meta.json")
            if result.low_confidence_angle:
                print(f"warning: {path.name}: low-confidence angle estimate",
                      file=sys.stderr)
            print(f"{path.name}: angle {result.angle.angle_degrees:+.2f} deg, "
                  f"{result.iters_used} outer iterations")
        except (DerainError, OSError) as exc:
            failures += 1
            print(f"error: {path}: {exc}", file=sys.stderr)
    return 1 if failures else 0


# ------------------------------------------------------------------ synth

def cmd_synth(args) -> int:
    cfg = _load_config(args.config)
    spec = _spec_from(args, cfg)
    blend = _merged(args, cfg, "blend", "screen")
    if blend not in BLEND_MODES:
        raise ConfigError(f"--blend must be one of {BLEND_MODES}")
    out_dir = Path(_merged(args, cfg, "out", "synth_out"))

    inputs = _collect_pngs(Path(args.clean))
    failures = 0
    for idx, path in enumerate(inputs):
        try:
            clean = image.load_image(path)
            file_spec = replace(spec, seed=spec.seed + idx)
            planes = image.split_channels(clean)
            pair = make_pair(planes[0], file_spec, blend=blend)
            rainy_planes = [pair.rainy]
            if len(planes) == 3:
                rainy_planes = []
                for plane in planes:
                    p = make_pair(plane, file_spec, blend=blend)
                    rainy_planes.append(p.rainy)
            stem = path.stem
            image.save_image(clean, out_dir / f"{stem}.clean.png")
            image.save_image(pair.rain_layer, out_dir / f"{stem}.rain.png")
            image.save_image(image.merge_channels(rainy_planes),
                             out_dir / f"{stem}.rainy.png")
            sidecar = {"rain_spec": file_spec.to_dict(), "blend": blend,
                       "source": str(path)}
            _write_json(sidecar, out_dir / f"{stem}.spec.json")
            print(f"{path.name}: {blend} blend, seed {file_spec.seed}")
        except (DerainError, OSError) as exc:
            failures += 1
            print(f"error: {path}: {exc}", file=sys.stderr)
    return 1 if failures else 0


# --------------------------------------------------------- estimate-angle

def cmd_estimate_angle(args) -> int:
    img = image.load_image(Path(args.input))
    arr = image.to_luma(img) if np.asarray(img).ndim == 3 else img
    step = args.refine_step if args.refine_step is not None else 0.25
    est = estimate_angle(arr, refine_step_degrees=step)
    print(f"{est.angle_degrees:.1f} ± {step} degrees")
    print(f"confidence: {est.confidence:.2f}")
    if est.confidence < 1.5:
        print("warning: no dominant direction (low confidence); "
              "proceeding is safe but rotation may not help", file=sys.stderr)
    return 0


# --------------------------------------------------------------- evaluate

def _metric_plane(img):
    arr = np.asarray(img)
    return image.to_luma(arr) if arr.ndim == 3 else arr


def cmd_evaluate(args) -> int:
    pred_dir = Path(args.pred_dir)
    gt_dir = Path(args.gt_dir)
    out_dir = Path(args.out) if args.out else Path("eval_out")
    gt_files = sorted(gt_dir.glob("*.png"))
    if not gt_files:
        raise ConfigError(f"no PNG files in {gt_dir}")

    triples = []
    for gt_path in gt_files:
        stem = gt_path.stem.replace(".clean", "")
        candidates = [pred_dir / gt_path.name,
                      pred_dir / f"{stem}.png",
                      pred_dir / f"{stem}.X.png"]
        pred_path = next((c for c in candidates if c.exists()), None)
        if pred_path is None:
            print(f"warning: no prediction for {gt_path.name}",
                  file=sys.stderr)
            continue
        pred = _metric_plane(image.load_image(pred_path))
        gt = _metric_plane(image.load_image(gt_path))
        triples.append((stem, pred, gt))

    rep = metrics.evaluate_images(triples)
    print(f"{'id':<20} {'psnr_db':>10} {'ssim':>8}")
    for row in rep.per_image:
        psnr_text = ("inf" if row["psnr_db"] == metrics.PSNR_INF
                     else f"{row['psnr_db']:.2f}")
        print(f"{row['id']:<20} {psnr_text:>10} {row['ssim']:>8.4f}")
    if rep.per_image:
        print(f"mean PSNR {rep.aggregates['mean_psnr_db']:.2f} dB, "
              f"mean SSIM {rep.aggregates['mean_ssim']:.4f}")
    else:
        print("warning: empty evaluation set", file=sys.stderr)

    metrics.write_report_csv(rep, out_dir / "report.csv")
    _write_json(rep.to_dict(), out_dir / "report.json")
    if rep.per_image:
        report.render_eval_figure(rep, out_dir / "report.png")
    return 0


# ------------------------------------------------------------------ sweep

def _load_pairs(pairs_dir: Path, limit: int | None) -> list[RainPair]:
    sidecars = sorted(pairs_dir.glob("*.spec.json"))
    pairs = []
    for sidecar in sidecars[:limit]:
        stem = sidecar.name.replace(".spec.json", "")
        clean_path = pairs_dir / f"{stem}.clean.png"
        rainy_path = pairs_dir / f"{stem}.rainy.png"
        rain_path = pairs_dir / f"{stem}.rain.png"
        if not (clean_path.exists() and rainy_path.exists()):
            continue
        with open(sidecar) as handle:
            meta = json.load(handle)
        spec = RainSpec.from_dict(meta.get("rain_spec", {}))
        clean = _metric_plane(image.load_image(clean_path))
        rainy = _metric_plane(image.load_image(rainy_path))
        layer = (image.load_image(rain_path) if rain_path.exists()
                 else np.clip(rainy - clean, 0, 1))
        pairs.append(RainPair(clean=clean, rain_layer=np.asarray(layer),
                              rainy=rainy, spec=spec,
                              blend=meta.get("blend", "screen")))
    return pairs


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    if not cfg and args.pairs_dir is None:
        raise ConfigError("sweep needs --config or --pairs-dir")
    pairs_dir = Path(_merged(args, cfg, "pairs_dir", "synth_out"))
    out_dir = Path(_merged(args, cfg, "out", "sweep_out"))
    ratios = _merged(args, cfg, "ratios", [0.5, 1.0, 1.5, 2.25, 3.0])
    angle_errors = _merged(args, cfg, "angle_errors_deg", [0.0])
    limit = _merged(args, cfg, "limit", None)
    if not isinstance(ratios, (list, tuple)) or not ratios:
        raise ConfigError("config field 'ratios' must be a non-empty list")
    if not isinstance(angle_errors, (list, tuple)) or not angle_errors:
        raise ConfigError("config field 'angle_errors_deg' must be a "
                          "non-empty list")
    params = _params_from(args, cfg)

    if not pairs_dir.is_dir():
        raise ConfigError(f"pairs directory does not exist: {pairs_dir}")
    pairs = _load_pairs(pairs_dir, limit)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not pairs:
        print("warning: empty dataset; writing empty report",
              file=sys.stderr)
        rep = metrics.EvalReport().finalize()
        metrics.write_report_csv(rep, out_dir / "sweep.csv")
        _write_json(rep.to_dict(), out_dir / "sweep.json")
        return 0

    rep = metrics.run_sweep(pairs, ratios=list(ratios),
                            angle_errors_deg=list(angle_errors),
                            params=params, csv_path=out_dir / "sweep.csv")
    _write_json(rep.to_dict(), out_dir / "sweep.json")
    report.render_sweep_figure(rep, out_dir / "sweep.png")
    for ratio, value in metrics.sweep_means(rep, "psnr_db").items():
        print(f"ratio {ratio:.2f}: mean PSNR {value:.2f} dB")
    print(f"{len(rep.sweep_table)} rows -> {out_dir / 'sweep.csv'}")
    return 0


# ------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deraintv",
        description="Rain streak removal by directional-gradient "
                    "decomposition, with synthesis and evaluation tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derain", help="remove rain streaks from PNG images")
    p.add_argument("input", help="PNG file or directory of PNGs")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--angle", type=float, help="streak angle in degrees "
                   "(skips estimation)")
    p.add_argument("--tau", type=float, help="clean-layer TV weight")
    p.add_argument("--lx", type=float, help="rain along-streak sparsity weight")
    p.add_argument("--ly", type=float, help="rain across-streak fidelity weight")
    p.add_argument("--iters", type=int, help="outer iterations")
    p.add_argument("--tile", choices=("auto", "on", "off"),
                   help="sliding-window processing (default auto)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_derain)

    p = sub.add_parser("synth", help="generate rainy/clean training pairs")
    p.add_argument("clean", help="clean PNG file or directory")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--angle", type=float, help="streak angle in degrees")
    p.add_argument("--density", type=float, help="streak seeds per 1000 px")
    p.add_argument("--length", type=float, help="mean streak length (px)")
    p.add_argument("--length-jitter", type=float)
    p.add_argument("--width", type=float, help="streak thickness (px)")
    p.add_argument("--intensity", type=float, help="mean streak brightness")
    p.add_argument("--intensity-jitter", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--blend", choices=BLEND_MODES)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("estimate-angle", help="print the dominant streak angle")
    p.add_argument("input", help="PNG file")
    p.add_argument("--refine-step", type=float, help="refinement resolution "
                   "in degrees (default 0.25)")
    p.set_defaults(func=cmd_estimate_angle)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("pred_dir")
    p.add_argument("gt_dir")
    p.add_argument("--out", help="report directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="parameter/angle sensitivity study")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--pairs-dir", help="directory produced by `synth`")
    p.add_argument("--out", help="output directory")
    p.add_argument("--tau", type=float)
    p.add_argument("--lx", type=float)
    p.add_argument("--ly", type=float)
    p.add_argument("--iters", type=int)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DerainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
