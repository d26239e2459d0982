#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"Tests for the `cocalib.cli` module."

import json
from pathlib import Path

import numpy as np
import pytest

from cocalib.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main
from cocalib.netpbm import read_labels, read_pgm, write_labels


@pytest.fixture(scope="module")
def scenes(tmp_path_factory: pytest.TempPathFactory) -> Path:
    out = tmp_path_factory.mktemp("scenes")
    args = ["generate", "--out", str(out), "--count", "2", "--objects", "3", "3"]
    assert main(args) == EXIT_OK
    return out


@pytest.fixture(scope="module")
def run_dir(scenes: Path, tmp_path_factory: pytest.TempPathFactory) -> Path:
    out = tmp_path_factory.mktemp("run")
    image = str(scenes / "scene_0000.ppm")
    args = ["segment", image, "--config", "scenes64", "--out", str(out)]
    assert main(args + ["--threads", "2"]) == EXIT_OK
    return out


def test_generate(scenes: Path) -> None:
    names = sorted(p.name for p in scenes.iterdir())
    assert names == [
        "scene_0000.lbl",
        "scene_0000.ppm",
        "scene_0001.lbl",
        "scene_0001.ppm",
    ]
    gt, bg_ids = read_labels(scenes / "scene_0001.lbl")
    assert gt.shape == (64, 64)
    assert bg_ids == (3,)


def test_segment(run_dir: Path) -> None:
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["image"] == "scene_0000.ppm"
    assert (manifest["height"], manifest["width"]) == (64, 64)
    assert manifest["slots"] == len(manifest["slot_files"])
    assert manifest["anchored"] >= 3
    assert len(manifest["anchors"]) == 2
    assert manifest["config"]["threads"] == 2
    for name in manifest["slot_files"]:
        assert read_pgm(run_dir / name).shape == (64, 64)

    labels, bg_ids = read_labels(run_dir / "labels.lbl")
    assert labels.shape == (64, 64)
    assert bg_ids == ()
    assert labels.max() < manifest["slots"]


def test_eval(scenes: Path, run_dir: Path, capsys: pytest.CaptureFixture[str]) -> None:
    gt = str(scenes / "scene_0000.lbl")
    assert main(["eval", str(run_dir), gt, "--mode", "fg"]) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["mode"] == "fg"
    assert printed["ari"] >= 0.9
    saved = json.loads((run_dir / "metrics_fg.json").read_text())
    assert saved == printed

    assert main(["eval", str(run_dir), gt, "--mode", "bg"]) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["scored_pixels"] == 64 * 64
    assert (run_dir / "metrics_bg.json").exists()


def test_eval_reference(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    halves = np.zeros((4, 6), dtype=int)
    halves[2:] = 1
    write_labels(tmp_path / "gt.lbl", halves)
    write_labels(tmp_path / "labels.lbl", halves)
    args = ["eval", str(tmp_path), str(tmp_path / "gt.lbl"), "--mode", "bg"]
    assert main(args) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["ari"] == 1.0
    assert printed["msc"] == 1.0

    write_labels(tmp_path / "labels.lbl", np.zeros((4, 6), dtype=int))
    assert main(args) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["msc"] == 0.5


def test_heatmap(
    scenes: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    image = str(scenes / "scene_0001.ppm")
    assert main(["heatmap", image, "--out", str(tmp_path), "-q"]) == EXIT_OK
    filename = tmp_path / "scene_0001_heatmap.pgm"
    assert capsys.readouterr().out.strip() == str(filename)
    heat = read_pgm(filename)
    assert heat.shape == (64, 64)
    assert heat.min() >= 0.0
    assert heat.max() <= 1.0


def test_bench(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    args = ["bench", "--sizes", "32", "--reps", "1", "--threads", "1"]
    assert main(args + ["--out", str(tmp_path)]) == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed["sizes"] == [32]
    assert printed["slope"] is None
    assert json.loads((tmp_path / "bench.json").read_text()) == printed


def test_exit_codes(
    scenes: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    missing = str(tmp_path / "missing.ppm")
    assert main(["segment", missing, "--out", str(tmp_path)]) == EXIT_IO
    assert "error: " in capsys.readouterr().err

    image = str(scenes / "scene_0000.ppm")
    bad_cfg = tmp_path / "bad.cfg"
    bad_cfg.write_text("layer.1.t = 8\nlayer.1.k = 4\nlayer.1.tau = 1\nfoo = 1\n")
    args = ["segment", image, "--config", str(bad_cfg), "--out", str(tmp_path)]
    assert main(args) == EXIT_CONFIG
    assert "invalid config key at line 4" in capsys.readouterr().err

    chain_cfg = tmp_path / "chain.cfg"
    chain_cfg.write_text("layer.1.t = 3\nlayer.1.k = 4\nlayer.1.tau = 1\n")
    args = ["segment", image, "--config", str(chain_cfg), "--out", str(tmp_path)]
    assert main(args) == EXIT_CONFIG

    labels = np.zeros((4, 6), dtype=int)
    write_labels(tmp_path / "labels.lbl", labels)
    write_labels(tmp_path / "all_bg.lbl", labels, (0,))
    args = ["eval", str(tmp_path), str(tmp_path / "all_bg.lbl"), "--mode", "fg"]
    assert main(args) == EXIT_NUMERIC
    assert "empty scored region" in capsys.readouterr().err

    write_labels(tmp_path / "small.lbl", np.zeros((2, 6), dtype=int))
    args = ["eval", str(tmp_path), str(tmp_path / "small.lbl")]
    assert main(args) == EXIT_CONFIG
    assert "shape mismatch" in capsys.readouterr().err

    (tmp_path / "labels.lbl").write_bytes(b"garbage")
    args = ["eval", str(tmp_path), str(tmp_path / "small.lbl")]
    assert main(args) == EXIT_IO

    with pytest.raises(SystemExit):
        main([])
