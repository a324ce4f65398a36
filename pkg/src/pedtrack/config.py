"""Flat ``key = value`` configuration files for the pipeline and scenarios."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

from .calibration import TrapConfig
from .detection import DetectionParams
from .synth import Actor, Scenario
from .tracking import VoteParams


class ConfigError(ValueError):
    pass


def read_pairs(path) -> dict[str, str]:
    pairs = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            pairs[key] = value
    return pairs


def _floats(text: str, n: int, what: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != n:
        raise ConfigError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


@dataclass
class PipelineConfig:
    theta: float = 15.0
    area_threshold: int = 50
    morph_radius: int = 1
    voting_threshold: float = 50.0
    speed_threshold: Optional[float] = None  # pixels per slice; no universal default
    max_gap: int = 3
    frame_interval: float = 1.0
    trap: Optional[tuple[float, float, float, float]] = None  # x_min, y_min, x_max, y_max (world)
    line_y: Optional[float] = None
    calibration: Optional[str] = None
    background: str = "median"

    def __post_init__(self):
        if not 0 <= self.theta <= 255:
            raise ConfigError("theta must lie in [0, 255]")
        if self.area_threshold < 0 or self.morph_radius < 0:
            raise ConfigError("area_threshold and morph_radius must be >= 0")
        if not 0 <= self.voting_threshold <= 100:
            raise ConfigError("voting_threshold must lie in [0, 100]")
        if self.speed_threshold is not None and not self.speed_threshold > 0:
            raise ConfigError("speed_threshold must be positive")
        if self.max_gap < 1:
            raise ConfigError("max_gap must be >= 1")
        if not self.frame_interval > 0:
            raise ConfigError("frame_interval must be positive")
        if self.trap is not None:
            try:
                TrapConfig(*self.trap)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    @classmethod
    def from_pairs(cls, pairs: dict) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in pairs.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None or value == "":
                continue
            try:
                kwargs[key] = _convert(key, value)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from exc
        return cls(**kwargs)

    @classmethod
    def load(cls, path=None, overrides: Optional[dict] = None) -> "PipelineConfig":
        pairs = read_pairs(path) if path else {}
        pairs.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_pairs(pairs)

    def detection_params(self) -> DetectionParams:
        return DetectionParams(self.theta, self.area_threshold, self.morph_radius)

    def vote_params(self) -> VoteParams:
        if self.speed_threshold is None:
            raise ConfigError("speed_threshold must be configured for tracking")
        return VoteParams(self.speed_threshold, self.voting_threshold, self.max_gap)

    def trap_config(self) -> Optional[TrapConfig]:
        return TrapConfig(*self.trap) if self.trap else None

    def provenance(self) -> str:
        """One-line record of the effective configuration."""
        items = []
        for key, value in sorted(asdict(self).items()):
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            items.append(f"{key}={value}")
        return "# config: " + " ".join(items)


_INT_KEYS = {"area_threshold", "morph_radius", "max_gap"}
_FLOAT_KEYS = {"theta", "voting_threshold", "speed_threshold", "frame_interval", "line_y"}


def _convert(key: str, value):
    if not isinstance(value, str):
        return value
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key == "trap":
        return _floats(value, 4, "trap")
    return value


def _color(text: str) -> tuple[int, int, int]:
    return tuple(int(v) for v in _floats(text, 3, "color"))


def parse_scenario(pairs: dict) -> Scenario:
    """Build a scenario from flat keys; actors use ``actor.<n>.<field>`` keys.

    ``actor.<n>.path`` lists waypoints as ``slice:x:y`` separated by ``;``
    and ``actor.<n>.hidden`` lists slices (``a-b`` ranges allowed).
    """
    top, actor_keys = {}, {}
    for key, value in pairs.items():
        if key.startswith("actor."):
            try:
                _, idx, name = key.split(".", 2)
                actor_keys.setdefault(int(idx), {})[name] = value
            except ValueError as exc:
                raise ConfigError(f"bad actor key {key!r}") from exc
        else:
            top[key] = value

    actors = []
    for idx in sorted(actor_keys):
        akeys = actor_keys[idx]
        try:
            path = []
            for wp in akeys["path"].split(";"):
                if wp.strip():
                    t, x, y = wp.split(":")
                    path.append((int(t), float(x), float(y)))
            hidden = set()
            for part in akeys.get("hidden", "").split(","):
                part = part.strip()
                if "-" in part:
                    a, b = part.split("-")
                    hidden.update(range(int(a), int(b) + 1))
                elif part:
                    hidden.add(int(part))
            actors.append(Actor(
                shape=akeys.get("shape", "disk"),
                size=float(akeys.get("size", 8)),
                color=_color(akeys.get("color", "200,40,40")),
                path=path,
                hidden=frozenset(hidden),
                height=float(akeys["height"]) if "height" in akeys else None,
            ))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"actor {idx}: {exc}") from exc

    try:
        scenario = Scenario(
            width=int(top.pop("width", 320)),
            height=int(top.pop("height", 240)),
            background_color=_color(top.pop("background_color", "90,90,90")),
            actors=actors,
            frame_count=int(top.pop("frame_count", 30)),
            seed=int(top.pop("seed", 0)),
            noise_amplitude=int(top.pop("noise_amplitude", 0)),
            frame_interval=float(top.pop("frame_interval", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if top:
        raise ConfigError(f"unknown scenario keys: {', '.join(sorted(top))}")
    return scenario


def load_scenario(path) -> Scenario:
    return parse_scenario(read_pairs(path))
