"""Process-wide tuning knobs.

Budgets live in a context variable so a caller (normally the CLI) can
override them for one run without threading arguments through every
function.
"""
from __future__ import annotations

import contextlib
import contextvars
import dataclasses


@dataclasses.dataclass(frozen=True)
class Settings:
    trial_bound: int = 10_000            # trial division limit in factor()
    factor_effort: int = 2_000_000       # total rho iterations per factor() call
    prime_budget: int = 1_000_000        # default prime search limit
    coordinate_bit_cap: int = 1 << 20    # max materialized coordinate size
    exhaustive_count_below: int = 10_000  # E(F_p) point counting switch
    residue_power: int = 1               # work mod p**e in residue probes


_current: contextvars.ContextVar[Settings] = contextvars.ContextVar(
    "orbitobs_settings", default=Settings()
)


def get() -> Settings:
    return _current.get()


@contextlib.contextmanager
def override(**changes):
    """Temporarily replace some settings::

        with config.override(factor_effort=10):
            factor(n)
    """
    token = _current.set(dataclasses.replace(_current.get(), **changes))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
