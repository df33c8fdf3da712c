"""Random variables on the outcome lattice and the qHV representation checks.

Two models are exercised here. In the statistically noncontextual one each
catalog observable is represented by its canonical projection. In the
context-invariant one an observable ``X`` may also be represented by
``phi o pi_Y`` for any catalog member ``Y`` with ``phi(Y) = X``; such
representatives differ pointwise but give identical measure values inside
every joint-measurement cylinder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .catalog import Catalog
from .errors import ContractViolation, ValidationError
from .extension import OperatorValuedMeasure, SignedMeasure, build_global_measure, signed_measure
from .report import CheckReport
from .sampling import powerset, random_subset
from .spectral import (
    DensityState,
    HermitianObservable,
    SpectrumFunction,
    apply_function,
    commute_check,
    expectation,
)
from .symmetrized import joint_function, random_set


@dataclass(frozen=True, eq=False)
class RandomVariable:
    catalog: Catalog
    values: np.ndarray  # (n_atoms,)
    label: str = ""
    target: HermitianObservable | None = None  # the observable this variable represents

    @property
    def range(self) -> tuple[float, ...]:
        return tuple(float(v) for v in np.unique(self.values))

    def satisfies_spectral_correspondence(self) -> bool:
        """Attained values equal the target's spectrum exactly."""
        if self.target is None:
            return True
        return self.range == tuple(sorted(self.target.eigenvalues))


def canonical_rv(catalog: Catalog, index: int) -> RandomVariable:
    """The coordinate projection onto catalog observable ``index``."""
    (i,) = catalog.check_indices([index])
    vals = np.array(catalog.atom_values[:, i])
    vals.setflags(write=False)
    obs = catalog[i]
    return RandomVariable(catalog, vals, f"pi[{obs.label or i}]", obs)


def compose_rv(phi: SpectrumFunction, g: RandomVariable) -> RandomVariable:
    """``phi o g`` tablewise; the result represents ``phi(target)`` when ``g`` has a target."""
    tol = g.catalog.tol
    target = None
    if g.target is not None:
        target = apply_function(phi, g.target, tol)
        atol = tol.eig * g.target.scale
    else:
        atol = tol.eig * max(1.0, float(np.max(np.abs(g.values))))
    table = {v: phi.lookup(v, atol) for v in g.range}
    if target is not None:
        # snap images onto the cluster representatives of phi(target)
        table = {v: target.eigenvalues[target.index_of(y, tol)] for v, y in table.items()}
    vals = np.array([table[float(v)] for v in g.values])
    vals.setflags(write=False)
    return RandomVariable(g.catalog, vals, f"phi({g.label})", target)


@dataclass(frozen=True, eq=False)
class FunctionalRepresentation:
    """``phi(Y) = X`` with ``Y`` the catalog member at ``base``."""

    base: int
    phi: SpectrumFunction
    target: HermitianObservable

    def variable(self, catalog: Catalog) -> RandomVariable:
        g = compose_rv(self.phi, canonical_rv(catalog, self.base))
        snap = {v: self.target.eigenvalues[self.target.index_of(v, catalog.tol)] for v in g.range}
        vals = np.array([snap[float(v)] for v in g.values])
        vals.setflags(write=False)
        return RandomVariable(catalog, vals, f"phi(pi[{catalog[self.base].label or self.base}])", self.target)

    def defect(self, catalog: Catalog) -> float:
        """``||phi(Y) - X||_F``."""
        fy = apply_function(self.phi, catalog[self.base], catalog.tol)
        return float(np.linalg.norm(fy.matrix - self.target.matrix))


def _function_between(y: HermitianObservable, x: HermitianObservable, tol_check: float) -> dict[float, float] | None:
    """The map ``phi: sp Y -> sp X`` with ``P_X(b) = sum_{phi(y)=b} P_Y({y})``, or None."""
    phi: dict[float, float] = {}
    for lam, p in y.spectrum:
        hit = None
        for b, q in x.spectrum:
            if np.linalg.norm(q @ p - p) <= tol_check:
                hit = b
                break
        if hit is None:
            return None
        phi[lam] = hit
    for b, q in x.spectrum:
        acc = sum((p for lam, p in y.spectrum if phi[lam] == b), np.zeros_like(q))
        if np.linalg.norm(acc - q) > tol_check:
            return None
    return phi


def find_functional_representations(catalog: Catalog, x: HermitianObservable) -> list[FunctionalRepresentation]:
    """Every catalog member ``Y`` that ``x`` is a function of, with its function table.

    When ``x`` itself is in the catalog the trivial representation (identity on
    ``sp x``) appears at ``x``'s position.
    """
    if x.dim != catalog.dim:
        raise ValidationError(f"dimension mismatch: observable {x.dim} vs catalog {catalog.dim}")
    reps = []
    for i, y in enumerate(catalog.observables):
        phi = _function_between(y, x, catalog.tol.check)
        if phi is not None:
            reps.append(FunctionalRepresentation(i, SpectrumFunction(phi), x))
    return reps


def _member_mask(values: np.ndarray, allowed: Iterable[float], atol: float) -> np.ndarray:
    allowed = np.asarray(list(allowed), dtype=float)
    if allowed.size == 0:
        return np.zeros(values.shape[0], dtype=bool)
    return np.any(np.abs(values[:, None] - allowed[None, :]) <= atol, axis=1)


def rv_cylinder(g_list: Sequence[RandomVariable], b_list: Sequence[Iterable[float]]) -> np.ndarray:
    """Boolean atom mask of ``{l : g_i(l) in B_i for all i}``."""
    if len(g_list) != len(b_list):
        raise ValidationError("rv_cylinder needs one value set per random variable")
    if not g_list:
        raise ValidationError("rv_cylinder needs at least one random variable")
    catalog = g_list[0].catalog
    mask = np.ones(catalog.n_atoms, dtype=bool)
    for g, b in zip(g_list, b_list):
        if g.catalog is not catalog:
            raise ValidationError("random variables live on different catalogs")
        scale = g.target.scale if g.target is not None else max(1.0, float(np.max(np.abs(g.values))))
        mask &= _member_mask(g.values, b, catalog.tol.eig * scale)
    return mask


def _require_pairwise_commuting(catalog: Catalog, subset: Sequence[int]) -> None:
    for a in range(len(subset)):
        for b in range(a + 1, len(subset)):
            i, j = subset[a], subset[b]
            if not commute_check(catalog[i], catalog[j], catalog.tol):
                raise ContractViolation(
                    f"catalog observables {catalog[i].label or i} and {catalog[j].label or j} do not commute"
                )


def _ordered(projs: Sequence[np.ndarray], d: int) -> np.ndarray:
    out = np.eye(d, dtype=complex)
    for p in projs:
        out = out @ p
    return out


def verify_noncontextual_joint(
    catalog: Catalog,
    rho: DensityState,
    subset: Sequence[int],
    trials: int = 200,
    rng: np.random.Generator | None = None,
    *,
    exhaustive: bool = False,
    measure: SignedMeasure | None = None,
) -> CheckReport:
    """Joint Born probabilities of a commuting sub-collection versus the signed measure of the matching cylinder.

    Each ``F`` is an arbitrary set of joint outcomes; both the agreement and the
    nonnegativity of the cylinder value are recorded.
    """
    idx = catalog.check_indices(subset)
    _require_pairwise_commuting(catalog, idx)
    nu = signed_measure(catalog, rho) if measure is None else measure
    report = CheckReport("commuting-joint", catalog.tol.check)
    shape = [catalog.shape[i] for i in idx]

    def check(f: list[tuple[int, ...]]) -> None:
        joint = np.zeros((catalog.dim, catalog.dim), dtype=complex)
        for pt in f:
            joint = joint + _ordered([catalog[i].projectors[k] for i, k in zip(idx, pt)], catalog.dim)
        quantum = expectation(rho, joint)
        via = nu.measure(catalog.cylinder_mask(idx, f))
        report.record(abs(quantum - via), f"F={f}")
        report.record(via, f"negative cylinder F={f}", lower_bound=True)

    if exhaustive:
        points = list(np.ndindex(*shape))
        for sel in powerset(len(points)):
            check([points[k] for k in sel])
        return report
    rng = np.random.default_rng() if rng is None else rng
    for _ in range(trials):
        check(random_set(shape, rng))
    return report


def product(*xs):
    """Product of the arguments; the usual ``psi`` for product averages."""
    out = 1.0
    for x in xs:
        out = out * x
    return out


def qhv_average(nu: SignedMeasure, psi: Callable[..., object], g_list: Sequence[RandomVariable]) -> float:
    """``sum over atoms of psi(g_1(l), ..., g_n(l)) nu({l})``.

    ``psi`` receives one numpy array per variable (all atoms at once) and must
    broadcast; scalar results are broadcast over the lattice.
    """
    for g in g_list:
        if g.catalog is not nu.catalog:
            raise ValidationError("random variable and measure live on different catalogs")
    vals = np.broadcast_to(np.asarray(psi(*(g.values for g in g_list)), dtype=float), nu.values.shape)
    return float(np.dot(vals, nu.values))


@dataclass(frozen=True)
class KSCase:
    """One average relation to check.

    ``relation`` is ``"st1"`` (function of one observable, ``phi`` required),
    ``"st1'"`` (sum of arbitrary observables) or ``"st2"`` (product of
    commuting observables).
    """

    relation: str
    indices: tuple[int, ...]
    phi: SpectrumFunction | None = None
    label: str = ""


def verify_ks_average_relations(catalog: Catalog, rho: DensityState, cases: Sequence[KSCase]) -> CheckReport:
    """Quantum averages versus qHV averages of the canonical variables, one row per case."""
    nu = signed_measure(catalog, rho)
    report = CheckReport("ks-averages", catalog.tol.check)
    for case in cases:
        idx = catalog.check_indices(case.indices)
        if not idx:
            raise ValidationError(f"case {case.label or case.relation} names no observable")
        gs = [canonical_rv(catalog, i) for i in idx]
        if case.relation == "st1":
            if case.phi is None or len(idx) != 1:
                raise ValidationError("st1 needs exactly one observable and a function table")
            fx = apply_function(case.phi, catalog[idx[0]], catalog.tol)
            quantum = expectation(rho, fx)
            via = qhv_average(nu, lambda v: v, [compose_rv(case.phi, gs[0])])
        elif case.relation == "st1'":
            quantum = expectation(rho, sum(catalog[i].matrix for i in idx))
            via = qhv_average(nu, lambda *v: sum(v), gs)
        elif case.relation == "st2":
            _require_pairwise_commuting(catalog, idx)
            quantum = expectation(rho, _ordered([catalog[i].matrix for i in idx], catalog.dim))
            via = qhv_average(nu, product, gs)
        else:
            raise ValidationError(f"unknown average relation {case.relation!r}")
        dev = abs(quantum - via)
        name = case.label or f"{case.relation}{list(idx)}"
        report.record(dev, name)
        report.rows.append({"case": name, "quantum": quantum, "qhv": via, "deviation": dev})
    return report


def _partner_check(catalog: Catalog, target: HermitianObservable, partners: Sequence[int]) -> None:
    for j in partners:
        if not commute_check(target, catalog[j], catalog.tol):
            raise ContractViolation(f"partner {catalog[j].label or j} does not commute with {target.label or 'target'}")
    _require_pairwise_commuting(catalog, partners)


def verify_context_invariance(
    catalog: Catalog,
    rho: DensityState,
    rep: FunctionalRepresentation,
    partners: Sequence[int] = (),
    trials: int = 200,
    rng: np.random.Generator | None = None,
    *,
    exhaustive: bool = False,
) -> CheckReport:
    """Interchangeability of representatives of ``rep.target`` inside joint-measurement cylinders.

    For value sets ``B`` of the target and ``B_j`` of each partner the composed
    representative ``phi o pi_Y`` is compared with the canonical variable of the
    target (when it is a catalog member) and always with the trace
    ``tr[rho P_X(B) P_{Z_1}(B_1) ...]``. Product and random bounded-function
    averages with each representative substituted are checked as well.
    """
    tol = catalog.tol
    report = CheckReport("context-invariance", tol.check)
    base_idx = catalog.check_indices([rep.base])[0]
    partners = catalog.check_indices(partners)
    if rep.defect(catalog) > tol.check:
        raise ValidationError(f"invalid representation: ||phi(Y) - X||_F = {rep.defect(catalog):.3e}")
    x = rep.target
    _partner_check(catalog, x, partners)
    nu = signed_measure(catalog, rho)
    g_rep = rep.variable(catalog)
    target_idx = catalog.index_of_observable(x)
    g_can = canonical_rv(catalog, target_idx) if target_idx is not None else None
    if not g_rep.satisfies_spectral_correspondence():
        report.record(float("inf"), "representative violates spectral correspondence")
    part_g = [canonical_rv(catalog, j) for j in partners]
    nx = len(x.eigenvalues)

    def check(b: tuple[int, ...], sides: Sequence[tuple[int, ...]]) -> None:
        bvals = [x.eigenvalues[k] for k in b]
        svals = [[catalog[j].eigenvalues[k] for k in s] for j, s in zip(partners, sides)]
        quantum = expectation(
            rho, _ordered([x.projector_by_index(b)] + [catalog[j].projector_by_index(s) for j, s in zip(partners, sides)], catalog.dim)
        )
        via_rep = nu.measure(rv_cylinder([g_rep, *part_g], [bvals, *svals]))
        ctx = f"B={bvals} partners={svals}"
        report.record(abs(via_rep - quantum), f"rep vs trace {ctx}")
        if g_can is not None:
            via_can = nu.measure(rv_cylinder([g_can, *part_g], [bvals, *svals]))
            report.record(abs(via_rep - via_can), f"rep vs canonical {ctx}")

    if exhaustive:
        from itertools import product as iproduct

        for b in powerset(nx):
            for sides in iproduct(*(powerset(catalog.shape[j]) for j in partners)):
                check(b, sides)
    else:
        rng = np.random.default_rng() if rng is None else rng
        for _ in range(trials):
            check(random_subset(nx, rng), [random_subset(catalog.shape[j], rng) for j in partners])

    # averages with each representative substituted
    observables = [x, *(catalog[j] for j in partners)]
    reps = [g_rep] + ([g_can] if g_can is not None else [])
    quantum_prod = expectation(rho, _ordered([o.matrix for o in observables], catalog.dim))
    coeffs = (np.random.default_rng(0) if rng is None else rng).uniform(-1, 1, size=len(observables))

    def psi(*v):
        return np.cos(sum(c * vi for c, vi in zip(coeffs, v)))

    quantum_psi = expectation(rho, joint_function(psi, observables, tol))
    for g in reps:
        report.record(abs(qhv_average(nu, product, [g, *part_g]) - quantum_prod), f"product average via {g.label}")
        report.record(abs(qhv_average(nu, psi, [g, *part_g]) - quantum_psi), f"bounded-function average via {g.label}")
    return report


def reconstructed_spectral_measure(m: OperatorValuedMeasure, g: RandomVariable) -> dict[tuple[float, ...], np.ndarray]:
    """``B -> M(g^{-1}(B))`` for every subset ``B`` of the range of ``g``."""
    rng_vals = g.range
    out = {}
    for sel in powerset(len(rng_vals)):
        b = tuple(rng_vals[k] for k in sel)
        out[b] = m.measure(rv_cylinder([g], [b]))
    return out


def verify_representative_reconstruction(
    catalog: Catalog, rep: FunctionalRepresentation, measure: OperatorValuedMeasure | None = None
) -> CheckReport:
    """``M(g^{-1}(B)) = P_X(B)`` for all ``B`` in the spectrum of the target."""
    m = build_global_measure(catalog) if measure is None else measure
    report = CheckReport("representative-reconstruction", catalog.tol.check)
    g = rep.variable(catalog)
    x = rep.target
    for sel in powerset(len(x.eigenvalues)):
        b = [x.eigenvalues[k] for k in sel]
        lhs = m.measure(rv_cylinder([g], [b]))
        report.record(float(np.linalg.norm(lhs - x.projector_by_index(sel))), f"B={b}")
    return report
