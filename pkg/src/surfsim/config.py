"""Scenario parameters and the flat ``key = value`` scenario file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

STRATEGIES = ("surf", "rd", "sb", "ca")
PR_MODELS = ("fixed", "dynamic")


class ConfigError(ValueError):
    """Raised for invalid scenario parameters or malformed scenario files.

    ``keys`` lists the offending parameter names.
    """

    def __init__(self, message: str, keys: list[str] | None = None):
        super().__init__(message)
        self.keys = list(keys or [])


@dataclass(frozen=True)
class ScenarioConfig:
    num_cr_nodes: int = 70
    num_pr_nodes: int = 30
    num_channels: int = 5
    acs_size: int = 3
    total_slots: int = 6
    area_side: float = 707.0
    tx_range: float = 250.0
    beta: int = 10
    # "fixed": every channel has pr_slots occupied slots for the whole run.
    # "dynamic": each PR node is ON with its own probability drawn from
    # [pr_on_low, pr_on_high], resampled every hop.
    pr_model: str = "fixed"
    pr_slots: int = 0
    pr_on_low: float = 0.20
    pr_on_high: float = 0.80
    strategy: str = "surf"
    num_runs: int = 1000
    rng_seed: int = 0
    # 0 means derive from the geometry as ceil(2a/R)
    ttl: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        bad: list[str] = []
        if self.num_cr_nodes < 1:
            bad.append("num_cr_nodes")
        if self.num_pr_nodes < 0:
            bad.append("num_pr_nodes")
        if self.num_channels < 1:
            bad.append("num_channels")
        if not 0 < self.acs_size <= self.num_channels:
            bad.append("acs_size")
        if self.total_slots < 1:
            bad.append("total_slots")
        if not self.area_side > 0:
            bad.append("area_side")
        if not self.tx_range > 0:
            bad.append("tx_range")
        if self.beta < 1:
            bad.append("beta")
        if self.pr_model not in PR_MODELS:
            bad.append("pr_model")
        if not 0 <= self.pr_slots <= self.total_slots:
            bad.append("pr_slots")
        if not 0.0 <= self.pr_on_low <= self.pr_on_high <= 1.0:
            bad.extend(["pr_on_low", "pr_on_high"])
        if self.strategy not in STRATEGIES:
            bad.append("strategy")
        if self.num_runs < 1:
            bad.append("num_runs")
        if not 0 <= self.rng_seed < 2**64:
            bad.append("rng_seed")
        if self.ttl < 0:
            bad.append("ttl")
        if bad:
            raise ConfigError(f"invalid scenario parameters: {', '.join(bad)}", bad)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def hop_budget(self) -> int:
        from surfsim.topology import ttl_for

        return self.ttl or ttl_for(self.area_side, self.tx_range)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw, 0)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}", [key]) from None
    return raw


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse ``key = value`` lines. ``#`` starts a comment; unknown keys are rejected."""
    values: dict = {}
    unknown: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            unknown.append(key)
            continue
        values[key] = _coerce(key, raw)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}", unknown)
    return dataclasses.replace(base or ScenarioConfig(), **values)


def dump_config(config: ScenarioConfig) -> str:
    return "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                   for k, v in config.to_dict().items())


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())
