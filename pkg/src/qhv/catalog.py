"""Finite observable catalogs and their outcome lattice.

An atom of the lattice picks one spectral point per catalog observable. Atoms
are enumerated in mixed-radix order (first observable most significant) over
the increasing eigenvalue indices; every reduction in the package follows that
order so sums are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._config import DEFAULT_TOL, Tolerances, atom_cap
from .errors import ResourceError, ValidationError
from .spectral import HermitianObservable

OutcomeAtom = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Catalog:
    observables: tuple[HermitianObservable, ...]
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self) -> None:
        obs = tuple(self.observables)
        object.__setattr__(self, "observables", obs)
        if not obs:
            raise ValidationError("a catalog needs at least one observable")
        d = obs[0].dim
        for o in obs:
            if o.dim != d:
                raise ValidationError(f"catalog observables disagree in dimension: {d} vs {o.dim} ({o.label})")
        for i in range(len(obs)):
            for j in range(i + 1, len(obs)):
                if np.linalg.norm(obs[i].matrix - obs[j].matrix) <= self.tol.check:
                    raise ValidationError(
                        f"catalog observables {i} ({obs[i].label}) and {j} ({obs[j].label}) coincide"
                    )
        n = self.n_atoms
        cap = atom_cap()
        if n > cap:
            raise ResourceError(f"catalog needs {n} atoms, exceeding atom_cap = {cap}")

    def __len__(self) -> int:
        return len(self.observables)

    def __getitem__(self, i: int) -> HermitianObservable:
        return self.observables[i]

    @property
    def dim(self) -> int:
        return self.observables[0].dim

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(o.eigenvalues) for o in self.observables)

    @property
    def n_atoms(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    @property
    def labels(self) -> list[str]:
        return [o.label for o in self.observables]

    def atoms(self) -> Iterator[OutcomeAtom]:
        return product(*(range(k) for k in self.shape))

    @cached_property
    def atom_indices(self) -> np.ndarray:
        """``(n_atoms, K)`` integer table of spectral-point indices."""
        grids = np.indices(self.shape).reshape(len(self), -1).T
        grids.setflags(write=False)
        return grids

    @cached_property
    def atom_values(self) -> np.ndarray:
        """``(n_atoms, K)`` table of eigenvalues; column ``i`` is the canonical projection onto observable ``i``."""
        cols = [np.asarray(o.eigenvalues)[self.atom_indices[:, i]] for i, o in enumerate(self.observables)]
        out = np.stack(cols, axis=1)
        out.setflags(write=False)
        return out

    def atom_position(self, atom: OutcomeAtom) -> int:
        return int(np.ravel_multi_index(tuple(atom), self.shape))

    def index_of_observable(self, x: HermitianObservable) -> int | None:
        """Catalog position of an observable equal to ``x`` within ``tol.check``, else None."""
        for i, o in enumerate(self.observables):
            if o.dim == x.dim and np.linalg.norm(o.matrix - x.matrix) <= self.tol.check:
                return i
        return None

    def check_indices(self, indices: Iterable[int]) -> tuple[int, ...]:
        idx = tuple(int(i) for i in indices)
        if len(set(idx)) != len(idx):
            raise ValidationError(f"repeated catalog indices in {idx}")
        for i in idx:
            if not 0 <= i < len(self):
                raise ValidationError(f"catalog index {i} out of range (catalog size {len(self)})")
        return idx

    def cylinder_mask(self, indices: Sequence[int], outcome_indices: Iterable[Sequence[int]]) -> np.ndarray:
        """Boolean atom mask of the cylinder over ``indices`` with base given as index tuples."""
        idx = self.check_indices(indices)
        mask = np.zeros(self.n_atoms, dtype=bool)
        if not idx:
            # the 0-fold cylinder is all of the lattice iff its base contains the empty tuple
            return mask | any(True for _ in outcome_indices)
        sub_shape = tuple(self.shape[i] for i in idx)
        keys = np.ravel_multi_index(self.atom_indices[:, idx].T, sub_shape)
        wanted = []
        for tup in outcome_indices:
            tup = tuple(int(t) for t in tup)
            if len(tup) != len(idx) or any(not 0 <= t < s for t, s in zip(tup, sub_shape)):
                raise ValidationError(f"outcome tuple {tup} is invalid for sub-collection {idx}")
            wanted.append(np.ravel_multi_index(tup, sub_shape))
        if wanted:
            mask = np.isin(keys, np.asarray(wanted))
        return mask
