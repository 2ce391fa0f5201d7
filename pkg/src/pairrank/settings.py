"""Per-context engine options (oracle choice, RNG seed, Groebner step budget)."""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, replace

ORACLES = ("jacobian", "elim", "both")


@dataclass(frozen=True)
class Settings:
    oracle: str = "jacobian"
    seed: int = 0
    budget: int = 1_000_000
    # bound for coordinates of random specialization points
    sample_bound: int = 10_000
    sample_attempts: int = 5

    def __post_init__(self) -> None:
        if self.oracle not in ORACLES:
            raise ValueError(f"unknown oracle {self.oracle!r}; expected one of {ORACLES}")
        if self.budget <= 0:
            raise ValueError("budget must be positive")


_current: contextvars.ContextVar[Settings] = contextvars.ContextVar("pairrank_settings", default=Settings())


def current() -> Settings:
    return _current.get()


@contextlib.contextmanager
def use(**changes):
    """Temporarily override settings for the current context (thread / task local)."""
    token = _current.set(replace(_current.get(), **changes))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
