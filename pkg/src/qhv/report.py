"""Verification reports returned by the ``verify_*`` routines."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of a batch of numerical checks.

    Verification routines never raise on a failed check; they record the
    deviation here and the caller decides what to do with ``passed``.
    """

    name: str
    tolerance: float
    max_deviation: float = 0.0
    checks: int = 0
    failures: list[str] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    def record(self, deviation: float, context: str = "", *, lower_bound: bool = False) -> bool:
        """Record one check. ``lower_bound`` records a signed value that must be >= -tolerance."""
        self.checks += 1
        if lower_bound:
            ok = deviation >= -self.tolerance
            dev = max(0.0, -deviation)
        else:
            ok = deviation <= self.tolerance
            dev = deviation
        if dev > self.max_deviation or dev != dev:
            self.max_deviation = dev
        if not ok:
            self.failures.append(f"{context}: {deviation:.3e}" if context else f"{deviation:.3e}")
        return ok

    def merge(self, other: "CheckReport") -> "CheckReport":
        self.checks += other.checks
        self.max_deviation = max(self.max_deviation, other.max_deviation)
        self.failures.extend(f"{other.name}: {f}" for f in other.failures)
        self.rows.extend(other.rows)
        return self

    @property
    def passed(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{self.name}: {status} ({self.checks} checks, max_dev={self.max_deviation:.3e})"
