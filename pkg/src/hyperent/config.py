"""Run configuration: a YAML document validated before any computation.

Example::

    experiment: chain
    output_dir: out/chain
    orders: [1, 2]
    cumulant_orders: [2, 4, 6]
    chain: {L: 400, boundary: open, filling: 0.5}
    region: {start: 150, stop: 250}

Unknown keys are rejected.  Only ``HYPERENT_OUTPUT_DIR`` is read from the
environment; it overrides ``output_dir``.
"""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Any, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

OUTPUT_DIR_ENV = "HYPERENT_OUTPUT_DIR"

Experiment = Literal["chain", "chern-torus", "chern-cylinder", "cft-compare", "holo", "qpc", "recon"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ChainSection(_Section):
    L: int = Field(gt=1)
    boundary: Literal["open", "periodic", "infinite"] = "open"
    filling: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    mu: Optional[float] = None

    @model_validator(mode="after")
    def _one_occupation(self) -> "ChainSection":
        if self.filling is not None and self.mu is not None:
            raise ValueError("give either filling or mu, not both")
        return self


class ChernSection(_Section):
    Lx: int = Field(default=40, gt=1)
    Ly: int = Field(default=40, gt=1)
    m: float = 3.0
    lam: float = 1.0
    mu: float = 0.0
    chern_grid: int = Field(default=40, ge=20)


class CylinderSection(_Section):
    Ly: int = Field(default=40, gt=3)
    lam: float = 1.0
    mu: float = 0.0
    m_min: float = -3.0
    m_max: float = 3.0
    m_step: float = Field(default=0.1, gt=0)
    kx: list[float] = Field(default_factory=lambda: [0.0, math.pi, math.pi / 3, 4 * math.pi / 3])
    n: float = Field(default=2.0, gt=0)
    boundary_width: int = Field(default=2, ge=1)

    @field_validator("kx")
    @classmethod
    def _kx_range(cls, v: list[float]) -> list[float]:
        for k in v:
            if not 0 <= k < 2 * math.pi:
                raise ValueError("k_x values must lie in [0, 2 pi)")
        return v


class RegionSection(_Section):
    """Interval ``[start, stop)`` for chains or rectangle ``[x0, x1) x [y0, y1)`` for tori."""

    start: Optional[int] = Field(default=None, ge=0)
    stop: Optional[int] = None
    x0: Optional[int] = Field(default=None, ge=0)
    x1: Optional[int] = None
    y0: Optional[int] = Field(default=None, ge=0)
    y1: Optional[int] = None

    @model_validator(mode="after")
    def _shape(self) -> "RegionSection":
        interval = self.start is not None or self.stop is not None
        rect = any(v is not None for v in (self.x0, self.x1, self.y0, self.y1))
        if interval == rect:
            raise ValueError("give either start/stop or x0/x1/y0/y1")
        if interval and (self.start is None or self.stop is None or self.stop <= self.start):
            raise ValueError("interval needs start < stop")
        if rect:
            if None in (self.x0, self.x1, self.y0, self.y1):
                raise ValueError("rectangle needs x0, x1, y0 and y1")
            if self.x1 <= self.x0 or self.y1 <= self.y0:
                raise ValueError("rectangle needs x0 < x1 and y0 < y1")
        return self

    @property
    def is_interval(self) -> bool:
        return self.start is not None


class HoloSection(_Section):
    R: float = Field(default=2.0, gt=0)
    samples: int = Field(default=400, ge=200)
    cutoff: float = Field(default=1e-3, gt=0)
    flow_start: tuple[float, float, float] = (0.1, -0.2, 2.0)
    flow_time: float = Field(default=0.25, gt=0)


class QpcSection(_Section):
    sites: Optional[list[int]] = None
    order: int = Field(default=12, ge=2, le=24)


class Tolerances(_Section):
    sum_rule: float = Field(default=1e-10, gt=0)
    qpc: float = Field(default=1e-8, gt=0)
    spectrum: float = Field(default=1e-6, gt=0)
    flow: float = Field(default=1e-8, gt=0)
    cft_mean: float = Field(default=0.05, gt=0)
    cft_ratio_spread: float = Field(default=0.05, gt=0)


class RunConfig(_Section):
    experiment: Experiment
    output_dir: str = "out"
    orders: list[float] = Field(default_factory=lambda: [1.0, 2.0])
    cumulant_orders: list[int] = Field(default_factory=lambda: [2, 4, 6])
    hyperfine: bool = False
    chain: Optional[ChainSection] = None
    chern: Optional[ChernSection] = None
    cylinder: Optional[CylinderSection] = None
    region: Optional[RegionSection] = None
    holo: Optional[HoloSection] = None
    qpc: Optional[QpcSection] = None
    middle_fraction: float = Field(default=0.6, gt=0, le=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("orders")
    @classmethod
    def _orders(cls, v: list[float]) -> list[float]:
        if not v or any(n <= 0 for n in v):
            raise ValueError("orders must be a non-empty list of positive numbers")
        return v

    @field_validator("cumulant_orders")
    @classmethod
    def _korders(cls, v: list[int]) -> list[int]:
        if any(k < 1 for k in v):
            raise ValueError("cumulant orders must be >= 1")
        return v

    @model_validator(mode="after")
    def _sections(self) -> "RunConfig":
        need = {
            "chain": ("chain", "region"),
            "cft-compare": ("chain", "region"),
            "qpc": ("chain", "region"),
            "recon": ("chain", "region"),
            "chern-torus": ("chern", "region"),
            "chern-cylinder": (),
            "holo": (),
        }[self.experiment]
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"experiment {self.experiment!r} needs a {name!r} section")
        if self.region is not None and self.experiment in ("chain", "cft-compare", "qpc", "recon"):
            if not self.region.is_interval:
                raise ValueError("chain experiments need an interval region (start/stop)")
        if self.experiment == "chern-torus" and self.region is not None and self.region.is_interval:
            raise ValueError("chern-torus needs a rectangle region (x0/x1/y0/y1)")
        if self.hyperfine and any(k % 2 for k in self.cumulant_orders):
            raise ValueError("hyperfine fields need even cumulant orders")
        return self

    def echo(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)


# Loading -------------------------------------------------------------------


def _node_line(root: Optional[yaml.Node], loc: tuple) -> Optional[int]:
    """1-based line of the deepest YAML node reachable along ``loc``."""
    node = root
    line = node.start_mark.line + 1 if node is not None else None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    nxt = (k, v)
                    break
            if nxt is None:
                break
            line = nxt[0].start_mark.line + 1
            node = nxt[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Validate YAML ``text``; errors name the offending line."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{where}: invalid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: top level must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = tuple(err["loc"])
            line = _node_line(root, loc)
            path = ".".join(str(p) for p in loc) or "<root>"
            lines.append(f"{source}:{line}: {path}: {err['msg']}")
        raise ConfigError("\n".join(lines)) from None


def load_config(path: Union[str, Path]) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(p))
