"""The twenty predefined communication rules between loop-level kinds.

Seven must-use entries carry information along the monitor-analyze-plan-
execute flow and into the knowledge base; thirteen must-not-use entries
forbid every back edge. Each entry can be toggled off through a JSON
config file; absent keys stay active.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

from .dsl import Modality
from .kinds import AbstractionKind

K = AbstractionKind


@dataclass(frozen=True)
class DomainRule:
    """One kind-level rule of the matrix, numbered for diagnostics."""

    number: int
    source: AbstractionKind
    target: AbstractionKind
    modality: Modality

    @property
    def key(self) -> str:
        return f"{self.source.value}->{self.target.value}"

    def __str__(self) -> str:
        arrow = "->" if self.modality is Modality.MUST_USE else "-x->"
        return f"#{self.number} {self.source.value} {arrow} {self.target.value}"


def _build_rules() -> tuple[DomainRule, ...]:
    must_use = [
        (K.MONITOR, K.ANALYZER),
        (K.ANALYZER, K.PLANNER),
        (K.PLANNER, K.EXECUTOR),
        (K.MONITOR, K.KNOWLEDGE),
        (K.ANALYZER, K.KNOWLEDGE),
        (K.PLANNER, K.KNOWLEDGE),
        (K.EXECUTOR, K.KNOWLEDGE),
    ]
    must_not_use = [
        (K.ANALYZER, K.MONITOR),
        (K.PLANNER, K.MONITOR),
        (K.EXECUTOR, K.MONITOR),
        (K.KNOWLEDGE, K.MONITOR),
        (K.PLANNER, K.ANALYZER),
        (K.EXECUTOR, K.ANALYZER),
        (K.KNOWLEDGE, K.ANALYZER),
        (K.MONITOR, K.PLANNER),
        (K.EXECUTOR, K.PLANNER),
        (K.KNOWLEDGE, K.PLANNER),
        (K.MONITOR, K.EXECUTOR),
        (K.ANALYZER, K.EXECUTOR),
        (K.KNOWLEDGE, K.EXECUTOR),
    ]
    rules = []
    for number, (src, tgt) in enumerate(must_use, start=1):
        rules.append(DomainRule(number, src, tgt, Modality.MUST_USE))
    for number, (src, tgt) in enumerate(must_not_use, start=len(must_use) + 1):
        rules.append(DomainRule(number, src, tgt, Modality.MUST_NOT_USE))
    return tuple(rules)


#: All twenty entries in numbering order (must-use first).
DOMAIN_RULES: tuple[DomainRule, ...] = _build_rules()

_RULES_BY_KEY: dict[str, DomainRule] = {rule.key: rule for rule in DOMAIN_RULES}


class DomainConfigError(ValueError):
    """Raised when a domain-rule config file is malformed."""


@dataclass
class DomainRuleMatrix:
    """The twenty entries plus per-entry activation flags."""

    active: dict[str, bool] = field(
        default_factory=lambda: {rule.key: True for rule in DOMAIN_RULES}
    )

    @classmethod
    def all_active(cls) -> "DomainRuleMatrix":
        return cls()

    @classmethod
    def from_config(cls, config: dict) -> "DomainRuleMatrix":
        """Build a matrix from a toggle mapping; absent keys stay active."""
        if not isinstance(config, dict):
            raise DomainConfigError("domain-rule config must be a JSON object")
        matrix = cls()
        for key, value in config.items():
            if key not in _RULES_BY_KEY:
                raise DomainConfigError(f"unknown domain-rule key {key!r}")
            if not isinstance(value, bool):
                raise DomainConfigError(f"domain-rule key {key!r} must map to a boolean")
            matrix.active[key] = value
        return matrix

    @classmethod
    def load(cls, path: str) -> "DomainRuleMatrix":
        with open(path, "r", encoding="utf-8") as handle:
            try:
                config = json.load(handle)
            except json.JSONDecodeError as exc:
                raise DomainConfigError(f"invalid domain-rule config: {exc}") from exc
        return cls.from_config(config)

    def is_active(self, rule: DomainRule) -> bool:
        return self.active[rule.key]

    def set_active(self, source: AbstractionKind, target: AbstractionKind, value: bool) -> None:
        key = f"{source.value}->{target.value}"
        if key not in _RULES_BY_KEY:
            raise DomainConfigError(f"unknown domain-rule key {key!r}")
        self.active[key] = value

    def active_rules(self) -> Iterator[DomainRule]:
        for rule in DOMAIN_RULES:
            if self.active[rule.key]:
                yield rule

    def lookup(
        self, source: AbstractionKind, target: AbstractionKind
    ) -> DomainRule | None:
        """Return the matrix entry for a kind pair, if one exists."""
        return _RULES_BY_KEY.get(f"{source.value}->{target.value}")
