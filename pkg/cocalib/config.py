#!/usr/bin/env python3

# Copyright (C) 2025-2026 The cocalib developers
#
# This file is part of cocalib. It is subject to the license terms in the
# LICENSE file found in the top-level directory of this distribution.
#
# No part of cocalib including this file, may be copied, modified, propagated,
# or distributed except according to the terms contained in the LICENSE file.

"""Run configuration.

Configuration files are flat key=value text with dotted section
prefixes; '#' starts a comment, blank lines are ignored:

    encoder.d0 = 16
    encoder.position_weight = 0
    layer.1.t = 8
    layer.1.k = 6
    layer.1.tau = 3000
    layer.2.t = 1
    layer.2.k = 8
    layer.2.tau = 6000
    stop.kind = dynamic
    stop.measure = area
    anchor.mode = compact
    anchor.seed = 0

Layers are numbered contiguously from 1; stop.* optionally overrides
the stopping rule of the final layer.
"""

import os
from dataclasses import dataclass, replace
from os import path
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Type,
    TypeVar,
)

from cocalib.coca.sbc import ANCHOR_MODES, StopPolicy
from cocalib.encoder import EncoderConfig
from cocalib.exceptions import CocaLibValueError
from cocalib.hierarchy.layer import LayerConfig

_RunConfig = TypeVar("_RunConfig", bound="RunConfig")


def _to_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(value)


_ENCODER_KEYS: Dict[str, Callable[[str], Any]] = {
    "d0": int,
    "color_weight": float,
    "position_weight": float,
    "smoothing_radius": int,
    "smoothing_strength": float,
    "projection_seed": int,
}
_LAYER_KEYS: Dict[str, Callable[[str], Any]] = {
    "t": int,
    "k": int,
    "tau": float,
    "groups": int,
    "dynamic": _to_bool,
    "threshold": float,
    "measure": str,
    "smoothing_radius": int,
    "smoothing_strength": float,
    "projection": str,
    "projection_seed": int,
    "inertia_pooling": str,
}
_STOP_KEYS: Dict[str, Callable[[str], Any]] = {
    "kind": str,
    "k": int,
    "threshold": float,
    "measure": str,
}
_ANCHOR_KEYS: Dict[str, Callable[[str], Any]] = {"mode": str, "seed": int}
_TOP_KEYS: Dict[str, Callable[[str], Any]] = {"output_dir": str, "threads": int}


@dataclass(frozen=True)
class RunConfig:
    encoder: EncoderConfig
    layers: Tuple[LayerConfig, ...]
    stop: Optional[StopPolicy] = None
    anchor_mode: str = "compact"
    seed: int = 0
    output_dir: str = "."
    threads: Optional[int] = None

    def __init__(
        self,
        encoder: EncoderConfig,
        layers: Sequence[LayerConfig],
        stop: Optional[StopPolicy] = None,
        anchor_mode: str = "compact",
        seed: int = 0,
        output_dir: str = ".",
        threads: Optional[int] = None,
        check_validity: bool = True,
    ) -> None:

        object.__setattr__(self, "encoder", encoder)
        object.__setattr__(self, "layers", tuple(layers))
        object.__setattr__(self, "stop", stop)
        object.__setattr__(self, "anchor_mode", anchor_mode)
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "output_dir", str(output_dir))
        object.__setattr__(self, "threads", threads)

        if check_validity:
            self.assert_valid()

    def assert_valid(self) -> None:
        self.encoder.assert_valid()
        if not self.layers:
            raise CocaLibValueError("invalid config: no layers")
        for layer in self.effective_layers():
            layer.assert_valid()
        if self.anchor_mode not in ANCHOR_MODES:
            raise CocaLibValueError(f"invalid anchor mode: {self.anchor_mode}")
        if self.threads is not None and self.threads < 1:
            raise CocaLibValueError(f"invalid threads: {self.threads}")

    def effective_layers(self) -> Tuple[LayerConfig, ...]:
        "Layers with the final stopping rule applied."

        if self.stop is None:
            return self.layers
        self.stop.assert_valid()
        last = replace(
            self.layers[-1],
            dynamic=self.stop.kind == "dynamic",
            k=self.stop.k,
            threshold=self.stop.threshold,
            measure=self.stop.measure,
        )
        return self.layers[:-1] + (last,)

    def with_overrides(
        self,
        seed: Optional[int] = None,
        anchor_mode: Optional[str] = None,
        output_dir: Optional[str] = None,
        threads: Optional[int] = None,
    ) -> "RunConfig":
        "Return a copy with the given command line overrides."

        return RunConfig(
            self.encoder,
            self.layers,
            self.stop,
            self.anchor_mode if anchor_mode is None else anchor_mode,
            self.seed if seed is None else seed,
            self.output_dir if output_dir is None else output_dir,
            self.threads if threads is None else threads,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "encoder": self.encoder.to_dict(),
            "layers": [layer.to_dict() for layer in self.layers],
            "stop": None if self.stop is None else self.stop.to_dict(),
            "anchor_mode": self.anchor_mode,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "threads": self.threads,
        }

    @classmethod
    def from_dict(
        cls: Type[_RunConfig], dict_: Mapping[str, Any], check_validity: bool = True
    ) -> _RunConfig:
        stop = dict_.get("stop")
        return cls(
            EncoderConfig.from_dict(dict_.get("encoder", {})),
            [LayerConfig.from_dict(layer) for layer in dict_["layers"]],
            None if stop is None else StopPolicy.from_dict(stop),
            dict_.get("anchor_mode", "compact"),
            dict_.get("seed", 0),
            dict_.get("output_dir", "."),
            dict_.get("threads"),
            check_validity,
        )

    def to_text(self) -> str:
        lines: List[str] = []
        for key, value in self.encoder.to_dict().items():
            lines.append(f"encoder.{key} = {value}")
        for i, layer in enumerate(self.layers, 1):
            for key, value in layer.to_dict().items():
                lines.append(f"layer.{i}.{key} = {value}")
        if self.stop is not None:
            for key, value in self.stop.to_dict().items():
                lines.append(f"stop.{key} = {value}")
        lines.append(f"anchor.mode = {self.anchor_mode}")
        lines.append(f"anchor.seed = {self.seed}")
        lines.append(f"output_dir = {self.output_dir}")
        if self.threads is not None:
            lines.append(f"threads = {self.threads}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(
        cls: Type[_RunConfig], text: str, check_validity: bool = True
    ) -> _RunConfig:
        return cls.from_dict(parse_config_text(text), check_validity)


def _convert(
    table: Mapping[str, Callable[[str], Any]], key: str, value: str, lineno: int
) -> Any:
    if key not in table:
        raise CocaLibValueError(f"invalid config key at line {lineno}: {key}")
    try:
        return table[key](value)
    except ValueError as e:
        err_msg = f"invalid config value at line {lineno}: {key} = {value}"
        raise CocaLibValueError(err_msg) from e


def parse_config_text(text: str) -> Dict[str, Any]:
    "Parse key=value text into the RunConfig.from_dict layout."

    encoder: Dict[str, Any] = {}
    layers: Dict[int, Dict[str, Any]] = {}
    stop: Dict[str, Any] = {}
    result: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CocaLibValueError(f"invalid config line {lineno}: {raw.strip()}")
        key, value = (part.strip() for part in line.split("=", 1))
        parts = key.split(".")
        if parts[0] == "encoder" and len(parts) == 2:
            encoder[parts[1]] = _convert(_ENCODER_KEYS, parts[1], value, lineno)
        elif parts[0] == "layer" and len(parts) == 3:
            try:
                index = int(parts[1])
            except ValueError as e:
                err_msg = f"invalid layer number at line {lineno}: {parts[1]}"
                raise CocaLibValueError(err_msg) from e
            layer = layers.setdefault(index, {})
            layer[parts[2]] = _convert(_LAYER_KEYS, parts[2], value, lineno)
        elif parts[0] == "stop" and len(parts) == 2:
            stop[parts[1]] = _convert(_STOP_KEYS, parts[1], value, lineno)
        elif parts[0] == "anchor" and len(parts) == 2:
            name = "anchor_mode" if parts[1] == "mode" else parts[1]
            result[name] = _convert(_ANCHOR_KEYS, parts[1], value, lineno)
        elif len(parts) == 1:
            result[key] = _convert(_TOP_KEYS, key, value, lineno)
        else:
            raise CocaLibValueError(f"invalid config key at line {lineno}: {key}")

    if sorted(layers) != list(range(1, len(layers) + 1)):
        err_msg = f"invalid layer numbering: {sorted(layers)}, "
        err_msg += "instead of 1, 2, ..."
        raise CocaLibValueError(err_msg)
    for index, layer in sorted(layers.items()):
        for required in ("t", "k", "tau"):
            if required not in layer:
                raise CocaLibValueError(f"missing layer.{index}.{required}")
    result["encoder"] = encoder
    result["layers"] = [layers[i] for i in sorted(layers)]
    if stop:
        if layers:
            stop.setdefault("k", layers[len(layers)]["k"])
        result["stop"] = stop
    return result


def load_config(path_or_name: str) -> RunConfig:
    "Load a config file, or a shipped config by name."

    if not path.isfile(path_or_name) and path_or_name in CONFIG_NAMES:
        path_or_name = path.join(datadir, path_or_name + ".cfg")
    with open(path_or_name, "r") as file_:
        return RunConfig.from_text(file_.read())


datadir = path.join(path.dirname(__file__), "_data")
CONFIG_NAMES = tuple(
    name[:-4] for name in sorted(os.listdir(datadir)) if name.endswith(".cfg")
)
