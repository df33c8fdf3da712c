"""Random instances used by the verification routines and the test-suite."""

from __future__ import annotations

from itertools import chain, combinations
from typing import Sequence

import numpy as np

from .spectral import DensityState, HermitianObservable, eigendecompose, validate_state


def powerset(n: int) -> list[tuple[int, ...]]:
    """All subsets of ``range(n)`` in size-then-lexicographic order."""
    return list(chain.from_iterable(combinations(range(n), k) for k in range(n + 1)))


def random_subset(n: int, rng: np.random.Generator, *, allow_empty: bool = True) -> tuple[int, ...]:
    while True:
        pick = tuple(int(i) for i in np.flatnonzero(rng.random(n) < 0.5))
        if pick or allow_empty:
            return pick


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


def random_observable(
    d: int,
    rng: np.random.Generator,
    *,
    spectrum: Sequence[float] | None = None,
    n_levels: int | None = None,
    label: str = "",
) -> HermitianObservable:
    """Observable ``U diag(levels) U^dagger`` with a random unitary.

    ``n_levels`` fixes how many distinct eigenvalues appear (degeneracies are
    spread at random); ``spectrum`` fixes the diagonal outright.
    """
    if spectrum is None:
        k = d if n_levels is None else n_levels
        levels = np.sort(rng.integers(-4, 5, size=k) + rng.random(k) * 0.5)
        levels = np.unique(np.round(levels, 6))
        while len(levels) < k:
            levels = np.unique(np.append(levels, np.round(rng.uniform(-3, 3), 6)))
        diag = np.concatenate([levels, rng.choice(levels, size=d - len(levels))]) if d > len(levels) else levels[:d]
    else:
        diag = np.asarray(spectrum, dtype=float)
    u = random_unitary(d, rng)
    m = (u * diag) @ u.conj().T
    m = (m + m.conj().T) / 2
    return eigendecompose(m, label=label)


def random_state(d: int, rng: np.random.Generator, *, rank: int | None = None, label: str = "") -> DensityState:
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    rho = (rho + rho.conj().T) / 2
    return validate_state(rho, label)
