"""Size caps and run configuration.

Every cap is an explicit error when exceeded, never a silent truncation.
The environment variables below mirror the CLI flags so scripted runs can
raise a cap without touching call sites.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

_ENV_MAP = {
    "max_full_base": "ASPA_MAX_BASE",
    "max_minimal_base": "ASPA_MAX_MINIMAL_BASE",
    "max_free_atoms": "ASPA_MAX_FREE",
    "max_ground_rules": "ASPA_MAX_GROUND",
    "max_search_nodes": "ASPA_MAX_NODES",
    "max_subset_atoms": "ASPA_MAX_SUBSET",
    "max_candidate_atoms": "ASPA_MAX_CANDIDATES",
}


@dataclass(frozen=True)
class Limits:
    """Caps for the combinatorial stages.

    max_full_base:       base size for enumerating the full solution set
    max_minimal_base:    base size for minimal-complete solution sets and
                         the monotonicity check (three-valued above it)
    max_free_atoms:      undecided atoms a single solution check may sweep
    max_ground_rules:    ground rules the instantiator may emit
    max_search_nodes:    nodes the answer-set search may visit
    max_subset_atoms:    model size for subset-minimality checking
    max_candidate_atoms: candidate-base size for generate-and-test
    """

    max_full_base: int = 12
    max_minimal_base: int = 16
    max_free_atoms: int = 20
    max_ground_rules: int = 1_000_000
    max_search_nodes: int = 1 << 24
    max_subset_atoms: int = 22
    max_candidate_atoms: int = 18

    def __post_init__(self):
        for name in _ENV_MAP:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "Limits":
        values = {}
        for attr, var in _ENV_MAP.items():
            raw = os.environ.get(var)
            if raw is not None:
                values[attr] = int(raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_(self, **overrides) -> "Limits":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation's knobs: base mode, solution mode, caps, format."""

    base_mode: str = "head-restricted"  # or "full-pattern"
    solution_mode: str = "minimal"      # or "full"
    json_output: bool = False
    limits: Limits = field(default_factory=Limits)

    def __post_init__(self):
        if self.base_mode not in ("head-restricted", "full-pattern"):
            raise ValueError(f"unknown base mode {self.base_mode!r}")
        if self.solution_mode not in ("minimal", "full"):
            raise ValueError(f"unknown solution mode {self.solution_mode!r}")
