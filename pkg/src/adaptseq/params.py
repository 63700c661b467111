from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction

from .errors import ConfigError


@dataclass(frozen=True)
class MasteryParams:
    """Tunables of the re-evaluation and selection rules.

    Mastery amounts are micro-units: 10_000 per mastery point, 100_000 = 10.0.
    """

    alpha_num: int = 2
    alpha_den: int = 3
    snap_threshold: int = 97_500
    max_drop: int = 10_000
    demotion_amount: int = 10_000
    reopen_after: int = 10
    non_improving_limit: int = 2
    open_init: int = 50_000
    max_mastery: int = 100_000
    unlock_threshold: int = 75_000
    # selection-rule knobs
    recent_window: int = 2
    poor_score: float = 0.5
    items_per_session: int = 7

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{f.name} must be a number, got {value!r}")
            if value < 0:
                raise ConfigError(f"{f.name} must be >= 0, got {value!r}")
        if self.alpha_den <= 0 or not 0 < self.alpha_num <= self.alpha_den:
            raise ConfigError("smoothing factor must satisfy 0 < alpha <= 1")
        if self.snap_threshold > self.max_mastery:
            raise ConfigError("snap_threshold exceeds max_mastery")
        if self.unlock_threshold > self.max_mastery or self.open_init > self.max_mastery:
            raise ConfigError("unlock_threshold and open_init must not exceed max_mastery")
        if self.items_per_session < 1:
            raise ConfigError("items_per_session must be >= 1")
        if self.non_improving_limit < 1:
            raise ConfigError("non_improving_limit must be >= 1")

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.alpha_num, self.alpha_den)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "MasteryParams":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
        return cls(**data)

    def with_overrides(self, **changes) -> "MasteryParams":
        return replace(self, **changes)
