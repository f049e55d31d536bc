"""Run configuration: strict JSON files plus command-line overrides."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .flux import FLUX_KINDS, HELICITY_LP, HELICITY_MOLL
from .scaling import parse_ladder

__all__ = ["ConfigError", "RunConfig", "load_config", "GENERATORS", "PLANTED_SHAPES"]

GENERATORS = ("taylor_green", "abc", "single_mode", "lacunary", "smooth")
PLANTED_SHAPES = ("const", "decay")


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (exit code 2)."""


@dataclass
class RunConfig:
    # grid and reproducibility
    dim: int = 2
    n: int = 64
    seed: int = 0
    jobs: int = 1
    out: str = "out"
    input: str | None = None
    # field generation
    generator: str = "lacunary"
    planted: str = "decay"
    planted_rate: float = 0.25
    decay_rate: float = 3.0
    abc: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    mode_k: list = field(default_factory=lambda: [0, 4])
    mode_amplitude: list = field(default_factory=lambda: [1.0, 0.0])
    # exponents
    p: float = 3.0
    q: float | str = "inf"
    alpha: float | None = None
    beta: float | None = None
    theta: float | None = None
    # scans
    kind: str = "energy_LP"
    ladder: str | None = None
    scales: list | None = None
    derivative: int = 0
    # simulation
    T: float = 1.0
    dt: float = 0.002
    snapshot_every: float | str = "inf"

    def __post_init__(self):
        self.validate()

    @property
    def alpha_value(self) -> float:
        """Smoothness exponent; defaults to the critical 1/p."""
        return 1.0 / self.p if self.alpha is None else float(self.alpha)

    @property
    def q_value(self):
        if isinstance(self.q, str):
            return math.inf if self.q == "inf" else self.q
        return float(self.q)

    @property
    def snapshot_value(self) -> float:
        s = self.snapshot_every
        return math.inf if s in ("inf", math.inf) else float(s)

    def ladder_values(self):
        return None if self.ladder is None else parse_ladder(self.ladder)

    def validate(self):
        if self.dim not in (2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 16 or self.n & (self.n - 1):
            raise ConfigError(f"n must be a power of two >= 16, got {self.n}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.generator not in GENERATORS:
            raise ConfigError(f"generator must be one of {GENERATORS}, got {self.generator!r}")
        if self.planted not in PLANTED_SHAPES:
            raise ConfigError(f"planted must be one of {PLANTED_SHAPES}, got {self.planted!r}")
        if self.kind not in FLUX_KINDS:
            raise ConfigError(f"kind must be one of {FLUX_KINDS}, got {self.kind!r}")
        helicity = self.kind in (HELICITY_LP, HELICITY_MOLL)
        if helicity and not 2 < self.p <= 3:
            raise ConfigError(f"p = {self.p} outside (2, 3] required for helicity")
        if not helicity and not 1 < self.p <= 3:
            raise ConfigError(f"p = {self.p} outside (1, 3] required for energy")
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ConfigError(f"alpha = {self.alpha} outside (0, 1)")
        if self.beta is not None and not 0 < self.beta < 1:
            raise ConfigError(f"beta = {self.beta} outside (0, 1)")
        if self.theta is not None and not 0 < self.theta <= 2:
            raise ConfigError(f"theta = {self.theta} outside (0, 2]")
        if self.beta is not None and self.theta is not None:
            if self.theta * self.alpha_value + self.beta < 1:
                raise ConfigError(
                    f"theta*alpha + beta = {self.theta * self.alpha_value + self.beta:.6g} < 1"
                )
        if isinstance(self.q, str) and self.q not in ("inf", "cnat", "vmo"):
            raise ConfigError(f"q must be a number >= 1, 'inf', 'cnat' or 'vmo', got {self.q!r}")
        if not isinstance(self.q, str) and not self.q >= 1:
            raise ConfigError(f"q = {self.q} must be >= 1")
        if self.derivative not in (0, 1, 2):
            raise ConfigError(f"derivative must be 0, 1 or 2, got {self.derivative}")
        if self.T < 0 or self.dt <= 0:
            raise ConfigError("need T >= 0 and dt > 0")
        if self.ladder is not None:
            try:
                parse_ladder(self.ladder)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        s = self.snapshot_every
        if s not in ("inf", math.inf) and not (isinstance(s, (int, float)) and s >= 1):
            raise ConfigError(f"snapshot_every must be a positive integer or 'inf', got {s!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def hashed_dict(self) -> dict:
        """Parameters that determine outputs (the output directory and worker count do not)."""
        d = self.to_dict()
        d.pop("out")
        d.pop("jobs")
        return d


_KEYS = {f.name for f in fields(RunConfig)}


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Read a JSON object, reject unknown keys, apply non-None overrides, validate."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except FileNotFoundError as exc:
            raise FileNotFoundError(f"config file not found: {path}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    unknown = sorted(set(data) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
