"""Numerical tolerances and resource limits shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

N_MAX = 8
DEFAULT_ATOM_CAP = 250_000
MAX_DIMENSION = 16


@dataclass(frozen=True)
class Tolerances:
    """Tolerance bundle.

    ``eig`` is relative (scaled by ``max(1, ||X||_F)``) and controls eigenvalue
    clustering and spectral-point matching. ``check`` is absolute and applies to
    Frobenius norms and scalars in every verification. ``herm`` bounds
    ``||A - A^dagger||_F`` for input validation.
    """

    eig: float = 1e-8
    check: float = 1e-10
    herm: float = 1e-12

    def with_overrides(self, **kwargs: float | None) -> "Tolerances":
        return replace(self, **{k: float(v) for k, v in kwargs.items() if v is not None})


DEFAULT_TOL = Tolerances()


def atom_cap() -> int:
    raw = os.environ.get("QHV_ATOM_CAP")
    if raw is None or raw.strip() == "":
        return DEFAULT_ATOM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"QHV_ATOM_CAP must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"QHV_ATOM_CAP must be positive, got {cap}")
    return cap
