#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Command line interface.

    cocalib segment IMAGE.ppm --config CFG --out DIR
    cocalib eval RUN_DIR GT.lbl --mode fg|bg
    cocalib heatmap IMAGE.ppm --config CFG --out DIR
    cocalib bench --sizes 32 64 128 256 --reps 3
    cocalib generate --out DIR --count N
    cocalib suite --config CFG --scenes 50

CFG is a config file or the name of a shipped config
(learned64, scenes64, suite64). Exit codes: 0 success, 1 I/O error,
2 configuration or shape error, 3 numeric error.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from os import path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from dataclasses_json import DataClassJsonMixin

from cocalib import __version__
from cocalib.bench import DEFAULT_SIZES, evaluate_suite, run_bench
from cocalib.coca.compactness import compactness_heatmap, init_pixel_attrs
from cocalib.config import RunConfig, load_config
from cocalib.exceptions import CocaLibRuntimeError, CocaLibTypeError, CocaLibValueError
from cocalib.hierarchy.net import CocaNetResult, coca_net
from cocalib.metrics import score_segmentation
from cocalib.netpbm import read_labels, read_ppm, write_labels, write_pgm, write_ppm
from cocalib.scene import SceneSpec, generate_scene
from cocalib.utils import resolve_threads

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

LABELS_FILE = "labels.lbl"
MANIFEST_FILE = "manifest.json"


@dataclass
class RunManifest(DataClassJsonMixin):
    image: str
    height: int
    width: int
    slots: int
    nonempty_slots: int
    anchored: int
    anchors: List[List[List[int]]]
    slot_files: List[str]
    config: Dict[str, Any]


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.ERROR
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(levelname)s - %(name)s: %(message)s",
        datefmt="%H:%M:%S",
    )


def _run_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        seed=args.seed,
        anchor_mode=args.anchor_mode,
        output_dir=args.out,
        threads=resolve_threads(args.threads if args.threads else cfg.threads),
    )


def _segment(image_path: str, cfg: RunConfig) -> CocaNetResult:
    image = read_ppm(image_path)
    return coca_net(
        image,
        cfg.effective_layers(),
        cfg.encoder,
        cfg.anchor_mode,
        cfg.seed,
        cfg.threads,
    )


def cmd_segment(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    result = _segment(args.image, cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)

    write_labels(path.join(cfg.output_dir, LABELS_FILE), result.hard_labels)
    slot_files: List[str] = []
    for i, mask in enumerate(result.slot_masks):
        name = f"slot_{i:02d}.pgm"
        write_pgm(path.join(cfg.output_dir, name), np.clip(mask, 0.0, 1.0))
        slot_files.append(name)
    height, width = result.hard_labels.shape
    manifest = RunManifest(
        path.basename(args.image),
        height,
        width,
        result.n_slots,
        result.nonempty_slots,
        result.final_anchored,
        [anchors.tolist() for anchors in result.anchors],
        slot_files,
        cfg.to_dict(),
    )
    with open(path.join(cfg.output_dir, MANIFEST_FILE), "w") as file_:
        file_.write(manifest.to_json(indent=2))
    LOGGER.info("%d slot masks written to %s", len(slot_files), cfg.output_dir)
    print(f"{result.n_slots} slots ({result.nonempty_slots} non-empty)")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    pred, _ = read_labels(path.join(args.run_dir, LABELS_FILE))
    gt, bg_ids = read_labels(args.gt)
    scores = score_segmentation(pred, gt, bg_ids, args.mode)
    out_dir = args.out or args.run_dir
    os.makedirs(out_dir, exist_ok=True)
    report = scores.to_json(indent=2)
    with open(path.join(out_dir, f"metrics_{args.mode}.json"), "w") as file_:
        file_.write(report)
    print(report)
    return EXIT_OK


def heatmap_image(result: CocaNetResult) -> np.ndarray:
    "Per-pixel compactness of its slot mask, min-max scaled to [0, 1]."

    height, width = result.hard_labels.shape
    attrs = init_pixel_attrs(height, width)
    masks = result.slot_masks.reshape(result.n_slots, -1)
    heat = compactness_heatmap(attrs, masks, result.hard_labels.ravel())
    span = heat.max() - heat.min()
    if span <= 0:
        return np.zeros((height, width))
    return ((heat - heat.min()) / span).reshape(height, width)


def cmd_heatmap(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    result = _segment(args.image, cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    stem = path.splitext(path.basename(args.image))[0]
    filename = path.join(cfg.output_dir, f"{stem}_heatmap.pgm")
    write_pgm(filename, heatmap_image(result))
    print(filename)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    report = run_bench(args.sizes, args.reps, args.threads, args.seed or 0)
    text = report.to_json(indent=2)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(path.join(args.out, "bench.json"), "w") as file_:
            file_.write(text)
    print(text)
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    spec = SceneSpec(
        args.size,
        args.size,
        n_objects=tuple(args.objects),
        bg=args.bg,
        seed=args.seed or 0,
    )
    os.makedirs(args.out, exist_ok=True)
    for index in range(args.start, args.start + args.count):
        scene = generate_scene(spec, index)
        stem = path.join(args.out, f"scene_{index:04d}")
        write_ppm(stem + ".ppm", scene.image)
        write_labels(stem + ".lbl", scene.gt, scene.bg_ids)
    print(f"{args.count} scenes written to {args.out}")
    return EXIT_OK


def cmd_suite(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    report = evaluate_suite(cfg, args.scenes, args.ras_seeds, cfg.threads, cfg.seed)
    text = report.to_json(indent=2)
    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(path.join(cfg.output_dir, "suite.json"), "w") as file_:
        file_.write(text)
    print(text)
    return EXIT_OK


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", default="scenes64", help="config file or shipped config name"
    )
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument(
        "--anchor-mode",
        choices=("compact", "random"),
        default=None,
        help="anchor selection (overrides the config)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cocalib",
        description="Compactness-guided hierarchical clustering segmentation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="store_true")
    common.add_argument(
        "--threads", type=int, default=None, help="worker threads (env COCA_THREADS)"
    )
    common.add_argument("--seed", type=int, default=None, help="random seed")
    sub = parser.add_subparsers(dest="command", required=True)

    segment = sub.add_parser("segment", parents=[common], help="segment an image")
    segment.add_argument("image", help="binary PPM image")
    _add_run_options(segment)
    segment.set_defaults(func=cmd_segment)

    evaluate = sub.add_parser("eval", parents=[common], help="score a segmentation")
    evaluate.add_argument("run_dir", help="output directory of segment")
    evaluate.add_argument("gt", help="ground-truth label sidecar")
    evaluate.add_argument("--mode", choices=("fg", "bg"), default="fg")
    evaluate.add_argument("--out", default=None, help="report directory")
    evaluate.set_defaults(func=cmd_eval)

    heatmap = sub.add_parser(
        "heatmap", parents=[common], help="export a compactness heatmap"
    )
    heatmap.add_argument("image", help="binary PPM image")
    _add_run_options(heatmap)
    heatmap.set_defaults(func=cmd_heatmap)

    bench = sub.add_parser("bench", parents=[common], help="runtime scaling")
    bench.add_argument("--sizes", type=int, nargs="+", default=list(DEFAULT_SIZES))
    bench.add_argument("--reps", type=int, default=3)
    bench.add_argument("--out", default=None, help="report directory")
    bench.set_defaults(func=cmd_bench)

    generate = sub.add_parser("generate", parents=[common], help="synthetic scenes")
    generate.add_argument("--out", required=True, help="output directory")
    generate.add_argument("--count", type=int, default=10)
    generate.add_argument("--start", type=int, default=0)
    generate.add_argument("--size", type=int, default=64)
    generate.add_argument(
        "--objects", type=int, nargs=2, default=[3, 6], metavar=("MIN", "MAX")
    )
    generate.add_argument("--bg", choices=("solid", "two-tone"), default="solid")
    generate.set_defaults(func=cmd_generate)

    suite = sub.add_parser("suite", parents=[common], help="scene suite evaluation")
    _add_run_options(suite)
    suite.add_argument("--scenes", type=int, default=50)
    suite.add_argument("--ras-seeds", type=int, default=5)
    suite.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(-1 if args.quiet else args.verbose)
    try:
        return args.func(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (CocaLibValueError, CocaLibTypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CocaLibRuntimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
