#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"Tests for the `cocalib.config` module."

from pathlib import Path

import pytest

from cocalib.coca.sbc import StopPolicy
from cocalib.config import CONFIG_NAMES, RunConfig, load_config, parse_config_text
from cocalib.encoder import EncoderConfig
from cocalib.exceptions import CocaLibValueError
from cocalib.hierarchy.layer import LayerConfig


def test_shipped_configs() -> None:
    assert "learned64" in CONFIG_NAMES
    assert "scenes64" in CONFIG_NAMES
    assert "suite64" in CONFIG_NAMES

    cfg = load_config("scenes64")
    assert cfg.encoder.position_weight == 0.0
    assert cfg.encoder.d0 == 16
    assert [layer.t for layer in cfg.layers] == [8, 1]
    assert [layer.k for layer in cfg.layers] == [8, 12]
    assert [layer.tau for layer in cfg.layers] == [3000.0, 6000.0]
    assert cfg.layers[0].inertia_pooling == "parallel_axis"
    assert cfg.stop == StopPolicy("dynamic", 12, 0.025)
    last = cfg.effective_layers()[-1]
    assert last.dynamic
    assert last.k == 12
    assert last.threshold == 0.025
    assert not cfg.effective_layers()[0].dynamic

    cfg = load_config("suite64")
    assert cfg.encoder.position_weight == 0.01
    assert [layer.k for layer in cfg.layers] == [4, 12]
    assert [layer.tau for layer in cfg.layers] == [1600000.0, 480.0]
    assert cfg.stop == StopPolicy("dynamic", 12, 0.025, "area")
    last = cfg.effective_layers()[-1]
    assert last.measure == "area"
    assert last.stop_policy() == cfg.stop
    assert cfg.effective_layers()[0].measure == "nodes"

    cfg = load_config("learned64")
    assert cfg.stop is None
    assert cfg.effective_layers() == cfg.layers
    assert [layer.tau for layer in cfg.layers] == [1.0, 1.25]
    assert cfg.anchor_mode == "compact"


def test_round_trips() -> None:
    for name in CONFIG_NAMES:
        cfg = load_config(name)
        assert RunConfig.from_text(cfg.to_text()) == cfg
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    cfg = RunConfig(
        EncoderConfig(d0=12),
        [LayerConfig(2, 3, 0.5, smoothing_radius=1), LayerConfig(1, 4, 2.0)],
        StopPolicy.dynamic(0.1, 6),
        "random",
        9,
        "out",
        2,
    )
    assert RunConfig.from_text(cfg.to_text()) == cfg
    assert "threads = 2" in cfg.to_text()


def test_load_file(tmp_path: Path) -> None:
    filename = tmp_path / "run.cfg"
    filename.write_text(
        "# two layers\n"
        "layer.1.t = 2  # windows per axis\n"
        "layer.1.k = 3\n"
        "layer.1.tau = 0.5\n"
        "\n"
        "layer.2.t = 1\n"
        "layer.2.k = 5\n"
        "layer.2.tau = 1\n"
        "layer.2.dynamic = yes\n"
        "anchor.seed = 4\n"
    )
    cfg = load_config(str(filename))
    assert cfg.encoder == EncoderConfig()
    assert cfg.layers[1].dynamic
    assert cfg.seed == 4
    assert cfg.stop is None

    with pytest.raises(OSError):
        load_config(str(tmp_path / "missing.cfg"))


def test_parse_errors() -> None:
    layer = "layer.1.t = 1\nlayer.1.k = 2\nlayer.1.tau = 1\n"
    assert len(parse_config_text(layer)["layers"]) == 1

    with pytest.raises(CocaLibValueError, match="invalid config key at line 4: foo"):
        parse_config_text(layer + "foo = 1")
    with pytest.raises(CocaLibValueError, match="invalid config key at line 1: "):
        parse_config_text("encoder.depth = 3")
    with pytest.raises(CocaLibValueError, match="invalid config key at line 1: "):
        parse_config_text("layer.1.t.x = 3")
    with pytest.raises(CocaLibValueError, match="invalid config value at line 2: "):
        parse_config_text("layer.1.t = 1\nlayer.1.k = two")
    with pytest.raises(CocaLibValueError, match="invalid config value at line 1: "):
        parse_config_text("layer.1.dynamic = maybe")
    with pytest.raises(CocaLibValueError, match="invalid config line 1: "):
        parse_config_text("encoder.d0 16")
    with pytest.raises(CocaLibValueError, match="invalid layer number at line 1: "):
        parse_config_text("layer.one.t = 1")
    with pytest.raises(CocaLibValueError, match="invalid layer numbering: "):
        parse_config_text(layer + layer.replace("layer.1", "layer.3"))
    with pytest.raises(CocaLibValueError, match="missing layer.1.tau"):
        parse_config_text("layer.1.t = 1\nlayer.1.k = 2")

    with pytest.raises(CocaLibValueError, match="invalid config: no layers"):
        RunConfig.from_text("encoder.d0 = 16")
    with pytest.raises(CocaLibValueError, match="invalid k: "):
        RunConfig.from_text(layer.replace("k = 2", "k = 0"))
    with pytest.raises(CocaLibValueError, match="invalid anchor mode: "):
        RunConfig.from_text(layer + "anchor.mode = central")


def test_stop_override() -> None:
    layers = [LayerConfig(2, 3, 1.0), LayerConfig(1, 4, 1.0)]
    cfg = RunConfig(EncoderConfig(), layers, StopPolicy.fixed(7))
    effective = cfg.effective_layers()
    assert effective[0] == layers[0]
    assert effective[1].k == 7
    assert not effective[1].dynamic
    assert cfg.layers == tuple(layers)

    parsed = parse_config_text(
        "layer.1.t = 1\nlayer.1.k = 5\nlayer.1.tau = 1\nstop.kind = dynamic\n"
    )
    assert parsed["stop"] == {"kind": "dynamic", "k": 5}

    parsed = parse_config_text(
        "layer.1.t = 1\nlayer.1.k = 5\nlayer.1.tau = 1\nstop.measure = area\n"
    )
    assert parsed["stop"] == {"measure": "area", "k": 5}
    with pytest.raises(CocaLibValueError, match="invalid stop measure: "):
        RunConfig.from_dict(dict(parsed, stop={"measure": "pixels"}))

    never = StopPolicy("never", 1, 0.1, check_validity=False)
    with pytest.raises(CocaLibValueError, match="invalid stop kind: "):
        RunConfig(EncoderConfig(), layers, never)


def test_with_overrides() -> None:
    cfg = load_config("scenes64")
    same = cfg.with_overrides()
    assert same == cfg

    changed = cfg.with_overrides(seed=5, anchor_mode="random", threads=2)
    assert changed.seed == 5
    assert changed.anchor_mode == "random"
    assert changed.threads == 2
    assert changed.layers == cfg.layers
    assert cfg.seed == 0

    with pytest.raises(CocaLibValueError, match="invalid anchor mode: "):
        cfg.with_overrides(anchor_mode="central")
    with pytest.raises(CocaLibValueError, match="invalid threads: 0"):
        cfg.with_overrides(threads=0)
