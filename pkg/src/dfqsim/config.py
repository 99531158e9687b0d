"""Strict scene-configuration parsing.

Configs are YAML with a fixed schema; unknown keys are rejected with a
line/column diagnostic. Lengths are nm, frequencies kHz, fields Gauss.
Angles are radians when given as plain numbers, or strings tagged with a
suffix: "0.45pi" (multiples of pi) or "1.41rad".

Two geometry styles are supported: actuator-relative pairs (spin P placed
from the actuator at the origin) and midpoint pairs plus an actuator at
(d, 0, h) or an explicit position.
"""

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import yaml

from .constants import PhysicalConstants
from .dynamics import DEFAULT_DELTA1_GRID
from .geometry import (
    PROTON_PAIR_SEPARATION_NM,
    SceneGeometry,
    SphericalPlacement,
    SpinPair,
)


class ConfigError(ValueError):
    """Configuration problem, carrying a file location when known."""

    def __init__(self, message: str, mark=None):
        if mark is not None:
            message = f"line {mark.line + 1}, column {mark.column + 1}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class NoiseSpec:
    delta1_grid: tuple[float, ...] = tuple(float(x) for x in DEFAULT_DELTA1_GRID)
    jitter_grid_khz: tuple[float, ...] = (0.0,)


@dataclass(frozen=True)
class GrapeSpec:
    target: str = "swap"
    segments: int = 100
    duration_us: Optional[float] = None  # None: 1.5 for swap, 5.0 for cnot
    seeds: int = 8
    max_iters: int = 3000
    tol: float = 1e-9
    robust_jitter_khz: float = 0.2
    delta1_ensemble: tuple[float, ...] = (-0.02, 0.0, 0.02)

    @property
    def segment_duration_us(self) -> float:
        if self.duration_us is not None:
            return self.duration_us
        return 1.5 if self.target == "swap" else 5.0


@dataclass(frozen=True)
class MapsSpec:
    orientation_samples: int = 20000
    h_min_nm: float = 1.2
    h_max_nm: float = 1.5
    d_max_nm: float = 0.4
    bin_khz: float = 0.5


@dataclass(frozen=True)
class SceneConfig:
    scene: SceneGeometry
    constants: PhysicalConstants = PhysicalConstants()
    seed: int = 0
    noise: NoiseSpec = NoiseSpec()
    grape: GrapeSpec = GrapeSpec()
    maps: MapsSpec = MapsSpec()


_ANGLE_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*\*?\s*(pi|rad)\s*$")


def parse_angle(raw, mark=None) -> float:
    """Angles: plain numbers are radians; strings need a 'pi' or 'rad' suffix."""
    if isinstance(raw, (int, float)):
        return float(raw)
    m = _ANGLE_RE.match(str(raw))
    if not m:
        raise ConfigError(f"cannot parse angle {raw!r} (use radians, '0.45pi' or '1.2rad')", mark)
    value, unit = float(m.group(1)), m.group(2)
    return value * np.pi if unit == "pi" else value


# --- YAML node walking with marks ---------------------------------------------

def _is_scalar(node):
    return isinstance(node, yaml.ScalarNode)


def _scalar_value(node):
    # Resolve through the safe loader so types match plain yaml.safe_load.
    return yaml.safe_load(yaml.serialize(node))


def _mapping(node, what: str) -> dict:
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"{what} must be a mapping", getattr(node, "start_mark", None))
    out = {}
    for key_node, value_node in node.value:
        key = _scalar_value(key_node)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", key_node.start_mark)
        out[key] = (key_node, value_node)
    return out


def _check_keys(items: dict, allowed: set, what: str):
    for key, (key_node, _) in items.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {what}", key_node.start_mark)


def _float(node, what: str) -> float:
    v = _scalar_value(node)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{what} must be a number", node.start_mark)
    return float(v)


def _int(node, what: str) -> int:
    v = _scalar_value(node)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"{what} must be an integer", node.start_mark)
    return v


def _angle(node, what: str) -> float:
    v = _scalar_value(node)
    try:
        return parse_angle(v, node.start_mark)
    except ConfigError:
        raise
    except Exception:
        raise ConfigError(f"{what} must be an angle", node.start_mark) from None


def _float_list(node, what: str) -> tuple[float, ...]:
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError(f"{what} must be a list of numbers", getattr(node, "start_mark", None))
    return tuple(_float(item, what) for item in node.value)


_PAIR_KEYS = {
    "r_pq_nm", "theta_pq", "phi_pq",
    "r_pnv_nm", "theta_pnv", "phi_pnv",
    "midpoint_nm",
}
_ACTUATOR_KEYS = {"h_nm", "d_nm", "position_nm"}
_NOISE_KEYS = {"delta1_grid", "jitter_grid_khz"}
_GRAPE_KEYS = {
    "target", "segments", "duration_us", "seeds", "max_iters", "tol",
    "robust_jitter_khz", "delta1_ensemble",
}
_MAPS_KEYS = {"orientation_samples", "h_min_nm", "h_max_nm", "d_max_nm", "bin_khz"}
_TOP_KEYS = {"seed", "constants", "pairs", "actuator", "noise", "grape", "maps"}
_CONST_KEYS = {"d_ghz", "b0_gauss"}


def _parse_actuator(items) -> np.ndarray:
    _check_keys(items, _ACTUATOR_KEYS, "actuator")
    if "position_nm" in items:
        if "h_nm" in items or "d_nm" in items:
            raise ConfigError(
                "actuator: give either position_nm or (h_nm, d_nm), not both",
                items["position_nm"][0].start_mark,
            )
        vec = _float_list(items["position_nm"][1], "position_nm")
        if len(vec) != 3:
            raise ConfigError("position_nm must have 3 components", items["position_nm"][1].start_mark)
        return np.array(vec)
    h = _float(items["h_nm"][1], "h_nm") if "h_nm" in items else 0.0
    d = _float(items["d_nm"][1], "d_nm") if "d_nm" in items else 0.0
    return np.array([d, 0.0, h])


def _parse_pair(node, actuator: np.ndarray, index: int):
    items = _mapping(node, f"pairs[{index}]")
    _check_keys(items, _PAIR_KEYS, f"pairs[{index}]")

    def get_angle(key, default=None):
        if key in items:
            return _angle(items[key][1], key)
        if default is None:
            raise ConfigError(f"pairs[{index}]: missing {key}", node.start_mark)
        return default

    r_pq = _float(items["r_pq_nm"][1], "r_pq_nm") if "r_pq_nm" in items else PROTON_PAIR_SEPARATION_NM
    axis = SphericalPlacement(r=r_pq, theta=get_angle("theta_pq"), phi=get_angle("phi_pq", 0.0))

    has_rel = "r_pnv_nm" in items
    has_mid = "midpoint_nm" in items
    if has_rel == has_mid:
        raise ConfigError(
            f"pairs[{index}]: give exactly one of (r_pnv_nm, theta_pnv, phi_pnv) "
            "or midpoint_nm",
            node.start_mark,
        )
    if has_rel:
        placement = SphericalPlacement(
            r=_float(items["r_pnv_nm"][1], "r_pnv_nm"),
            theta=get_angle("theta_pnv"),
            phi=get_angle("phi_pnv", 0.0),
        )
        return SpinPair.from_actuator_relative(actuator, placement, axis)
    mid = _float_list(items["midpoint_nm"][1], "midpoint_nm")
    if len(mid) != 3:
        raise ConfigError("midpoint_nm must have 3 components", items["midpoint_nm"][1].start_mark)
    return SpinPair(midpoint=tuple(mid), axis=axis)


def parse_scene_config(text: str, source: str = "<config>") -> SceneConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML in {source}: {exc}", mark) from None
    if root is None:
        raise ConfigError(f"{source} is empty")
    top = _mapping(root, "config")
    _check_keys(top, _TOP_KEYS, "config")

    seed = _int(top["seed"][1], "seed") if "seed" in top else 0

    constants = PhysicalConstants()
    if "constants" in top:
        items = _mapping(top["constants"][1], "constants")
        _check_keys(items, _CONST_KEYS, "constants")
        kwargs = {}
        if "d_ghz" in items:
            kwargs["zero_field_splitting_ghz"] = _float(items["d_ghz"][1], "d_ghz")
        if "b0_gauss" in items:
            kwargs["static_field_gauss"] = _float(items["b0_gauss"][1], "b0_gauss")
        constants = PhysicalConstants(**kwargs)

    actuator = np.zeros(3)
    if "actuator" in top:
        actuator = _parse_actuator(_mapping(top["actuator"][1], "actuator"))

    if "pairs" not in top:
        raise ConfigError("config needs a 'pairs' section")
    pairs_node = top["pairs"][1]
    if not isinstance(pairs_node, yaml.SequenceNode) or not pairs_node.value:
        raise ConfigError("pairs must be a nonempty list", getattr(pairs_node, "start_mark", None))
    pairs = tuple(
        _parse_pair(item, actuator, i) for i, item in enumerate(pairs_node.value)
    )
    scene = SceneGeometry(actuator=tuple(actuator), pairs=pairs)

    noise = NoiseSpec()
    if "noise" in top:
        items = _mapping(top["noise"][1], "noise")
        _check_keys(items, _NOISE_KEYS, "noise")
        kwargs = {}
        if "delta1_grid" in items:
            kwargs["delta1_grid"] = _float_list(items["delta1_grid"][1], "delta1_grid")
        if "jitter_grid_khz" in items:
            kwargs["jitter_grid_khz"] = _float_list(items["jitter_grid_khz"][1], "jitter_grid_khz")
        noise = NoiseSpec(**kwargs)

    grape = GrapeSpec()
    if "grape" in top:
        items = _mapping(top["grape"][1], "grape")
        _check_keys(items, _GRAPE_KEYS, "grape")
        kwargs = {}
        if "target" in items:
            target = _scalar_value(items["target"][1])
            if target not in ("swap", "cnot"):
                raise ConfigError("grape target must be 'swap' or 'cnot'", items["target"][0].start_mark)
            kwargs["target"] = target
        for key, conv in (
            ("segments", _int), ("seeds", _int), ("max_iters", _int),
            ("duration_us", _float), ("tol", _float), ("robust_jitter_khz", _float),
        ):
            if key in items:
                kwargs[key] = conv(items[key][1], key)
        if "delta1_ensemble" in items:
            kwargs["delta1_ensemble"] = _float_list(items["delta1_ensemble"][1], "delta1_ensemble")
        if kwargs.get("segments", 100) < 1:
            raise ConfigError("grape segments must be >= 1", items["segments"][0].start_mark)
        grape = GrapeSpec(**kwargs)

    maps = MapsSpec()
    if "maps" in top:
        items = _mapping(top["maps"][1], "maps")
        _check_keys(items, _MAPS_KEYS, "maps")
        kwargs = {}
        for key, conv in (
            ("orientation_samples", _int), ("h_min_nm", _float),
            ("h_max_nm", _float), ("d_max_nm", _float), ("bin_khz", _float),
        ):
            if key in items:
                kwargs[key] = conv(items[key][1], key)
        maps = MapsSpec(**kwargs)

    return SceneConfig(
        scene=scene, constants=constants, seed=seed, noise=noise, grape=grape, maps=maps
    )


def load_scene_config(path: Union[str, Path]) -> SceneConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_scene_config(text, source=str(path))
