"""Command-line front end: one subcommand per pipeline stage."""

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import beamform, bpm, container, enhance, metrics, pgm, pipeline
from .config import PipelineConfig, load_config, load_phantom
from .enhance import AttentionWeights


def _parse_weights(text: str) -> AttentionWeights:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--weights expects alpha,beta,gamma")
    return AttentionWeights(*(float(p) for p in parts))


def _add_common(parser):
    parser.add_argument("--config", help="pipeline config file (INI)")
    parser.add_argument("--angles", type=int,
                        help="override the steered-angle count")
    parser.add_argument("--seed", type=int, help="override the RNG seed")
    parser.add_argument("--weights", type=_parse_weights,
                        help="attention weights as alpha,beta,gamma")
    parser.add_argument("--dynamic-range", type=float,
                        help="log-compression dynamic range in dB")


def _build_config(args) -> PipelineConfig:
    cfg = load_config(getattr(args, "config", None))
    if getattr(args, "angles", None) is not None:
        cfg = replace(cfg, angle_count=args.angles)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "weights", None) is not None:
        cfg = replace(cfg, weights=args.weights)
    if getattr(args, "dynamic_range", None) is not None:
        cfg = replace(cfg, dynamic_range=args.dynamic_range)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _build_config(args)
    phantom = load_phantom(args.phantom)
    from .acquisition import steering_angle_set
    angles = steering_angle_set(cfg.geometry(), cfg.angle_count)
    sweep = pipeline._simulate_sweep(cfg, phantom, angles, force_numpy=False)
    pipeline.write_sweep(args.out, sweep,
                         header_extra={"config_digest": cfg.digest()})
    print(f"wrote {len(sweep)} frames x {sweep.frames[0].n_samples} samples "
          f"to {args.out}")
    return 0


def _cmd_beamform(args) -> int:
    cfg = _build_config(args)
    sweep = pipeline.read_sweep(args.infile)
    grid = cfg.grid.build()
    images = [beamform.das_beamform(frame, sweep.geometry, grid,
                                    cfg.apodization)
              for frame in sweep.frames]
    if args.angle_index is not None:
        image = images[args.angle_index]
    else:
        image = beamform.compound(images)
    bmode = beamform.log_compress(beamform.envelope_detect(image),
                                  cfg.dynamic_range)
    pgm.write_pgm(args.out, bmode.values)
    print(f"wrote {bmode.values.shape[0]}x{bmode.values.shape[1]} B-mode "
          f"to {args.out}")
    return 0


def _cmd_bpm(args) -> int:
    cfg = _build_config(args)
    image = pgm.read_pgm(args.infile)
    bone_map = bpm.bone_probability_map(image, cfg.filter_bank, cfg.tau_ratio)
    pgm.write_pgm(args.out, bone_map.values)
    print(f"wrote bone probability map to {args.out}")
    return 0


def _cmd_enhance(args) -> int:
    cfg = _build_config(args)
    image = pgm.read_pgm(args.infile)
    bone_map = bpm.BoneProbabilityMap(values=pgm.read_pgm(args.bpm))
    enhanced = enhance.beam_enhance(image, bone_map, cfg.weights)
    pgm.write_pgm(args.out, enhanced.display)
    print(f"wrote enhanced image to {args.out}")
    return 0


def _cmd_metrics(args) -> int:
    cfg = _build_config(args)
    image = pgm.read_pgm(args.infile)
    bone_map = bpm.BoneProbabilityMap(values=pgm.read_pgm(args.bpm))
    _, mask = enhance.otsu_threshold(bone_map)
    if not mask.any():
        mask = bone_map.values == bone_map.values.max()
    roi = metrics.make_background(mask, cfg.dilation_radius)
    reference = pgm.read_pgm(args.ref) if args.ref else None
    report = metrics.evaluate(image, reference, roi, cfg.n_bins)
    sys.stdout.write(metrics.format_report(report))
    return 0


def _cmd_pipeline(args) -> int:
    cfg = _build_config(args)
    out_dir = pipeline.run_pipeline(cfg, args.phantom, args.out)
    print(f"pipeline outputs written to {out_dir}")
    return 0


def _cmd_export(args) -> int:
    cfg = _build_config(args)
    phantoms = [load_phantom(p) for p in args.phantom]
    path = pipeline.export_dataset(cfg, phantoms, args.out)
    print(f"exported {len(phantoms)} records to {path}")
    return 0


def _cmd_inspect(args) -> int:
    sys.stdout.write(container.summarize(args.file))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="usbf",
        description="Plane-wave ultrasound beamforming and bone enhancement")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize an RF sweep from a phantom")
    _add_common(p)
    p.add_argument("--phantom", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("beamform", help="reconstruct a B-mode image from RF")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--angle-index", type=int,
                   help="beamform a single frame instead of compounding")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_beamform)

    p = sub.add_parser("bpm", help="bone probability map from a B-mode PGM")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_bpm)

    p = sub.add_parser("enhance", help="blend a B-mode image with its map")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--bpm", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_enhance)

    p = sub.add_parser("metrics", help="quality metrics for an image")
    _add_common(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--bpm", required=True, help="map PGM defining the ROI")
    p.add_argument("--ref", help="reference PGM for similarity metrics")
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("pipeline", help="run simulate through metrics")
    _add_common(p)
    p.add_argument("--phantom", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_pipeline)

    p = sub.add_parser("export-dataset",
                       help="write paired training records to a container")
    _add_common(p)
    p.add_argument("--phantom", action="append", required=True,
                   help="phantom file; repeat for multiple records")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_export)

    p = sub.add_parser("inspect", help="summarize a container file")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
