"""The global operator-valued measure on a catalog's outcome lattice.

``M({atom})`` is the symmetrized product of the catalog's singleton projectors
at that atom. Tracing ``M`` against a state gives a normalized signed measure
on the lattice whose cylinder values reproduce every product measure of every
sub-collection.
"""

from __future__ import annotations

import weakref
from itertools import product
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._config import N_MAX
from .catalog import Catalog
from .errors import ResourceError, ValidationError
from .report import CheckReport
from .spectral import DensityState
from .sampling import powerset
from .symmetrized import (
    all_sub_collections,
    product_measure_by_index,
    product_measure_of_set,
    random_set,
    sub_collection_sets,
    sym_product,
)


@dataclass(frozen=True)
class CylinderSet:
    """Preimage of ``F`` under the projection onto the catalog positions ``indices``.

    ``outcomes`` holds tuples of spectral points (eigenvalues), one entry per
    index, matched to cluster representatives within the eigenvalue tolerance.
    """

    indices: tuple[int, ...]
    outcomes: frozenset[tuple[float, ...]]

    @classmethod
    def of(cls, indices: Iterable[int], outcomes: Iterable[Sequence[float]]) -> "CylinderSet":
        return cls(tuple(int(i) for i in indices), frozenset(tuple(float(v) for v in o) for o in outcomes))

    def mask(self, catalog: Catalog) -> np.ndarray:
        idx = catalog.check_indices(self.indices)
        tuples = []
        for out in self.outcomes:
            if len(out) != len(idx):
                raise ValidationError(f"outcome {out} does not match sub-collection {idx}")
            tuples.append(tuple(catalog[i].index_of(v, catalog.tol) for i, v in zip(idx, out)))
        return catalog.cylinder_mask(idx, tuples)


@dataclass(frozen=True, eq=False)
class OperatorValuedMeasure:
    catalog: Catalog
    values: np.ndarray  # (n_atoms, d, d), mixed-radix atom order

    def measure(self, mask: np.ndarray) -> np.ndarray:
        """Measure of an atom set given as a boolean mask (sequential sum in atom order)."""
        out = np.zeros((self.catalog.dim, self.catalog.dim), dtype=complex)
        for k in np.flatnonzero(mask):
            out = out + self.values[k]
        return out

    def atom(self, atom: Sequence[int]) -> np.ndarray:
        return self.values[self.catalog.atom_position(tuple(atom))]


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    catalog: Catalog
    values: np.ndarray  # (n_atoms,) float64
    label: str = ""

    def measure(self, mask: np.ndarray) -> float:
        return float(np.sum(self.values[np.asarray(mask, dtype=bool)]))

    def atom(self, atom: Sequence[int]) -> float:
        return float(self.values[self.catalog.atom_position(tuple(atom))])

    @property
    def total(self) -> float:
        return float(np.sum(self.values))


_MEASURES: "weakref.WeakKeyDictionary[Catalog, OperatorValuedMeasure]" = weakref.WeakKeyDictionary()


def build_global_measure(catalog: Catalog) -> OperatorValuedMeasure:
    """Operator-valued measure of every atom, ``M({l}) = sym_product(P_1({l_1}), ..., P_K({l_K}))``.

    Results are cached per catalog object.
    """
    cached = _MEASURES.get(catalog)
    if cached is not None:
        return cached
    if len(catalog) > N_MAX:
        raise ResourceError(f"catalog of {len(catalog)} observables exceeds n_max = {N_MAX}")
    d = catalog.dim
    values = np.empty((catalog.n_atoms, d, d), dtype=complex)
    for pos, atom in enumerate(catalog.atoms()):
        values[pos] = sym_product([o.projectors[k] for o, k in zip(catalog.observables, atom)])
    values.setflags(write=False)
    m = OperatorValuedMeasure(catalog, values)
    _MEASURES[catalog] = m
    return m


def measure_of_cylinder(m: OperatorValuedMeasure, cylinder: CylinderSet) -> np.ndarray:
    return m.measure(cylinder.mask(m.catalog))


def verify_pushforward(
    catalog: Catalog,
    trials: int = 200,
    rng: np.random.Generator | None = None,
    *,
    exhaustive: bool = False,
) -> CheckReport:
    """Compare ``M`` on cylinders with the directly computed sub-collection product measures.

    ``exhaustive`` runs every non-empty sub-collection against every set ``F``
    produced by :func:`qhv.symmetrized.sub_collection_sets`, then against every
    rectangle with the right side taken as the symmetrized product of the side
    projectors (no atom decomposition).
    """
    report = CheckReport("pushforward", catalog.tol.check)
    if trials <= 0 and not exhaustive:
        return report
    m = build_global_measure(catalog)

    def check(sub: tuple[int, ...], f: list[tuple[int, ...]]) -> None:
        lhs = m.measure(catalog.cylinder_mask(sub, f))
        rhs = product_measure_of_set(catalog, sub, f)
        report.record(float(np.linalg.norm(lhs - rhs)), f"sub={sub} F={f}")

    n = len(catalog)
    if exhaustive:
        for sub in all_sub_collections(n):
            shape = [catalog.shape[i] for i in sub]
            for f in sub_collection_sets(shape):
                check(sub, f)
            for sides in product(*(powerset(k) for k in shape)):
                lhs = m.measure(catalog.cylinder_mask(sub, list(product(*sides))))
                rhs = product_measure_by_index(catalog, sub, sides)
                report.record(float(np.linalg.norm(lhs - rhs)), f"sub={sub} rectangle={sides}")
        return report
    rng = np.random.default_rng() if rng is None else rng
    for _ in range(trials):
        k = int(rng.integers(1, n + 1))
        sub = tuple(sorted(int(i) for i in rng.choice(n, size=k, replace=False)))
        check(sub, random_set([catalog.shape[i] for i in sub], rng))
    return report


def induce_signed_measure(m: OperatorValuedMeasure, rho: DensityState) -> SignedMeasure:
    """Atomwise ``tr[rho M({atom})]``."""
    if rho.dim != m.catalog.dim:
        raise ValidationError(f"dimension mismatch: state {rho.dim} vs catalog {m.catalog.dim}")
    vals = np.einsum("ij,aji->a", rho.matrix, m.values).real.astype(np.float64)
    vals.setflags(write=False)
    return SignedMeasure(m.catalog, vals, rho.label)


def signed_measure(catalog: Catalog, rho: DensityState) -> SignedMeasure:
    return induce_signed_measure(build_global_measure(catalog), rho)


def mixture_measure(components: Sequence[tuple[float, SignedMeasure]]) -> SignedMeasure:
    """Atomwise convex combination of signed measures over one catalog."""
    if not components:
        raise ValidationError("mixture needs at least one component")
    catalog = components[0][1].catalog
    weights = [float(w) for w, _ in components]
    if any(w <= 0 for w in weights):
        raise ValidationError(f"mixture weights must be positive, got {weights}")
    if abs(sum(weights) - 1.0) > catalog.tol.check:
        raise ValidationError(f"mixture weights sum to {sum(weights)!r}, not 1")
    vals = np.zeros(catalog.n_atoms)
    for w, mu in components:
        if mu.catalog is not catalog:
            raise ValidationError("mixture components refer to different catalogs")
        vals = vals + w * mu.values
    vals.setflags(write=False)
    return SignedMeasure(catalog, vals, "mixture")


def product_expectation_via_measure(mu: SignedMeasure, subset: Sequence[int]) -> float:
    """Integral of the product of the canonical projections in ``subset``."""
    idx = mu.catalog.check_indices(subset)
    if not idx:
        return mu.total
    prod = np.prod(mu.catalog.atom_values[:, idx], axis=1)
    return float(np.dot(prod, mu.values))


@dataclass(frozen=True)
class NegativityDiagnostics:
    total_variation: float
    min_atom: float
    negative_atom_count: int


def negativity_diagnostics(mu: SignedMeasure) -> NegativityDiagnostics:
    tol = mu.catalog.tol.check
    return NegativityDiagnostics(
        total_variation=float(np.sum(np.abs(mu.values))),
        min_atom=float(np.min(mu.values)),
        negative_atom_count=int(np.count_nonzero(mu.values < -tol)),
    )
