"""Symmetrized spectral-product measures on finite product algebras.

For observables ``X_1..X_n`` and sides ``B_1..B_n`` the product measure of the
rectangle is the average over all orderings of ``P_{X_1}(B_1) ... P_{X_n}(B_n)``.
For commuting observables the ordering is irrelevant and the measure is the
joint spectral measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import permutations, product as _product_iter
from math import factorial
from typing import Callable, Iterable, Sequence

import numpy as np

from ._config import DEFAULT_TOL, N_MAX, Tolerances
from .catalog import Catalog
from .errors import ContractViolation, ResourceError, ValidationError
from .report import CheckReport
from .sampling import powerset, random_subset
from .spectral import DensityState, HermitianObservable, commute_check, expectation


def _half_orderings(n: int) -> list[tuple[int, ...]]:
    # lexicographically first member of each (ordering, reversed ordering) pair
    return [p for p in permutations(range(n)) if p < p[::-1]]


def sym_product(operators: Sequence[np.ndarray]) -> np.ndarray:
    """``(1/n!)`` times the sum of ``Z_{s(1)} ... Z_{s(n)}`` over all orderings ``s``.

    Inputs must be Hermitian: the reversed ordering of a product is its adjoint,
    so only half of the orderings are multiplied out.
    """
    mats = [np.asarray(z, dtype=complex) for z in operators]
    n = len(mats)
    if n == 0:
        raise ValidationError("sym_product needs at least one factor")
    if n > N_MAX:
        raise ResourceError(f"sym_product of {n} factors exceeds n_max = {N_MAX} ({factorial(n)} orderings)")
    d = mats[0].shape
    for z in mats:
        if z.shape != d or len(d) != 2 or d[0] != d[1]:
            raise ValidationError(f"sym_product factors must share one square shape, got {z.shape} and {d}")
    if n == 1:
        return mats[0].copy()
    half = np.zeros(d, dtype=complex)
    for perm in _half_orderings(n):
        half = half + reduce(np.matmul, (mats[i] for i in perm))
    return (half + half.conj().T) / factorial(n)


@dataclass(frozen=True)
class ProjectorSelection:
    """A rectangle: for each chosen catalog index, a set of its spectral points."""

    choices: tuple[tuple[int, tuple[float, ...]], ...] = ()

    @classmethod
    def of(cls, mapping: dict[int, Iterable[float]] | Iterable[tuple[int, Iterable[float]]]) -> "ProjectorSelection":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(tuple((int(i), tuple(float(v) for v in vals)) for i, vals in items))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.choices)


def rectangle_projectors(catalog: Catalog, selection: ProjectorSelection) -> list[np.ndarray]:
    idx = catalog.check_indices(selection.indices)
    return [catalog[i].projector(vals, catalog.tol) for i, (_, vals) in zip(idx, selection.choices)]


def product_measure_on_rectangle(catalog: Catalog, selection: ProjectorSelection) -> np.ndarray:
    """Product measure of the sub-collection named by ``selection`` on its rectangle.

    The empty selection is the 0-fold product and returns the identity.
    """
    projs = rectangle_projectors(catalog, selection)
    if not projs:
        return np.eye(catalog.dim, dtype=complex)
    return sym_product(projs)


def product_measure_by_index(catalog: Catalog, indices: Sequence[int], sides: Sequence[Sequence[int]]) -> np.ndarray:
    """Same as :func:`product_measure_on_rectangle` with sides given as spectral indices."""
    idx = catalog.check_indices(indices)
    if not idx:
        return np.eye(catalog.dim, dtype=complex)
    return sym_product([catalog[i].projector_by_index(s) for i, s in zip(idx, sides)])


def product_measure_of_set(catalog: Catalog, indices: Sequence[int], points: Iterable[Sequence[int]]) -> np.ndarray:
    """Product measure of an arbitrary set of outcome tuples (index form), by atom decomposition."""
    idx = catalog.check_indices(indices)
    out = np.zeros((catalog.dim, catalog.dim), dtype=complex)
    for pt in points:
        out = out + product_measure_by_index(catalog, idx, [(k,) for k in pt])
    return out


def _ordered_product(mats: Sequence[np.ndarray], d: int) -> np.ndarray:
    return reduce(np.matmul, mats, np.eye(d, dtype=complex))


def _require_commuting(observables: Sequence[HermitianObservable], tol: Tolerances) -> None:
    for i in range(len(observables)):
        for j in range(i + 1, len(observables)):
            if not commute_check(observables[i], observables[j], tol):
                a, b = observables[i].label or str(i), observables[j].label or str(j)
                raise ContractViolation(f"observables {a} and {b} do not commute")


def joint_probability_commuting(
    rho: DensityState,
    observables: Sequence[HermitianObservable],
    selection: Sequence[Iterable[float]],
    tol: Tolerances = DEFAULT_TOL,
) -> float:
    """Born probability ``tr[rho P_1(B_1)...P_n(B_n)]`` of a joint measurement of commuting observables."""
    _require_commuting(observables, tol)
    if len(selection) != len(observables):
        raise ValidationError("one value set per observable is required")
    projs = [o.projector(b, tol) for o, b in zip(observables, selection)]
    return expectation(rho, _ordered_product(projs, rho.dim))


def joint_function(
    psi: Callable[..., float], observables: Sequence[HermitianObservable], tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """``psi(X_1..X_n) = sum over joint outcomes of psi(x) P_1({x_1})...P_n({x_n})`` for commuting X_i."""
    _require_commuting(observables, tol)
    d = observables[0].dim
    out = np.zeros((d, d), dtype=complex)
    shape = [len(o.eigenvalues) for o in observables]
    for pt in np.ndindex(*shape):
        vals = [o.eigenvalues[k] for o, k in zip(observables, pt)]
        out = out + float(psi(*vals)) * _ordered_product([o.projectors[k] for o, k in zip(observables, pt)], d)
    return out


def _rect_label(idx: Sequence[int], sides: Sequence[Sequence[int]]) -> str:
    return ",".join(f"{i}:{list(s)}" for i, s in zip(idx, sides))


def verify_permutation_invariance(
    catalog: Catalog,
    trials: int = 200,
    rng: np.random.Generator | None = None,
    *,
    exhaustive: bool = False,
) -> CheckReport:
    """Check that reordering the observables (with their sides) leaves the product measure unchanged.

    With ``exhaustive`` every rectangle over the full catalog is compared under
    every permutation; otherwise ``trials`` random rectangle/permutation pairs.
    """
    tol = catalog.tol
    report = CheckReport("permutation-invariance", tol.check)
    if trials <= 0 and not exhaustive:
        return report
    n = len(catalog)
    full = tuple(range(n))
    if exhaustive:
        side_sets = [powerset(k) for k in catalog.shape]
        for sides in _product_iter(*side_sets):
            base = product_measure_by_index(catalog, full, sides)
            for perm in permutations(full):
                other = product_measure_by_index(catalog, perm, [sides[i] for i in perm])
                report.record(float(np.linalg.norm(base - other)), f"{_rect_label(full, sides)} perm={perm}")
        return report
    rng = np.random.default_rng() if rng is None else rng
    for _ in range(trials):
        sides = [random_subset(k, rng) for k in catalog.shape]
        perm = tuple(int(i) for i in rng.permutation(n))
        base = product_measure_by_index(catalog, full, sides)
        other = product_measure_by_index(catalog, perm, [sides[i] for i in perm])
        report.record(float(np.linalg.norm(base - other)), f"{_rect_label(full, sides)} perm={perm}")
    return report


ENUMERABLE_POINTS = 12


def sub_collection_sets(shape: Sequence[int]) -> Iterable[list[tuple[int, ...]]]:
    """Sets ``F`` over a sub-collection used by the exhaustive consistency checks.

    All subsets of the outcome space when it has at most ``ENUMERABLE_POINTS``
    points; otherwise every rectangle plus every singleton, which generate the
    algebra (both sides of every checked identity are finitely additive).
    """
    points = list(np.ndindex(*shape))
    if len(points) <= ENUMERABLE_POINTS:
        for subset in powerset(len(points)):
            yield [points[k] for k in subset]
        return
    for pt in points:
        yield [pt]
    for sides in _product_iter(*[powerset(k) for k in shape]):
        yield [tuple(p) for p in _product_iter(*sides)]


def random_set(shape: Sequence[int], rng: np.random.Generator) -> list[tuple[int, ...]]:
    points = list(np.ndindex(*shape))
    return [points[k] for k in random_subset(len(points), rng)]


def all_sub_collections(n: int) -> list[tuple[int, ...]]:
    return [s for s in powerset(n) if s]


def verify_marginal_consistency(
    catalog: Catalog,
    trials: int = 200,
    rng: np.random.Generator | None = None,
    *,
    exhaustive: bool = False,
) -> CheckReport:
    """Check that summing the full product measure over a cylinder recovers the sub-collection measure."""
    tol = catalog.tol
    report = CheckReport("marginal-consistency", tol.check)
    n = len(catalog)
    full = tuple(range(n))
    # full-catalog atom values, the only place the n-fold measure is evaluated
    atoms = {}
    if exhaustive or trials > 0:
        atoms = {a: product_measure_by_index(catalog, full, [(k,) for k in a]) for a in catalog.atoms()}

    def check(sub: tuple[int, ...], f: list[tuple[int, ...]]) -> None:
        fset = set(f)
        lhs = np.zeros((catalog.dim, catalog.dim), dtype=complex)
        for a, m in atoms.items():
            if tuple(a[i] for i in sub) in fset:
                lhs = lhs + m
        rhs = product_measure_of_set(catalog, sub, f)
        report.record(float(np.linalg.norm(lhs - rhs)), f"sub={sub} F={sorted(fset)}")

    if exhaustive:
        for sub in all_sub_collections(n):
            for f in sub_collection_sets([catalog.shape[i] for i in sub]):
                check(sub, f)
        return report
    rng = np.random.default_rng() if rng is None else rng
    for _ in range(trials):
        k = int(rng.integers(1, n + 1))
        sub = tuple(sorted(int(i) for i in rng.choice(n, size=k, replace=False)))
        check(sub, random_set([catalog.shape[i] for i in sub], rng))
    return report
