"""N-partite scenarios, the local qHV representation and CHSH through the signed measure."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from ._config import DEFAULT_TOL, Tolerances
from .catalog import Catalog
from .errors import ValidationError
from .extension import SignedMeasure, negativity_diagnostics, signed_measure
from .models import canonical_rv, product, qhv_average
from .report import CheckReport
from .sampling import powerset, random_subset
from .spectral import DensityState, HermitianObservable, expectation, observable, tensor_embed, validate_state

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class PartiteScenario:
    dims: tuple[int, ...]
    sites: tuple[tuple[HermitianObservable, ...], ...]
    state: DensityState

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        sites = tuple(tuple(s) for s in self.sites)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "sites", sites)
        if len(sites) != len(dims):
            raise ValidationError(f"{len(dims)} local dimensions but {len(sites)} observable lists")
        for n, (d, obs) in enumerate(zip(dims, sites)):
            if not obs:
                raise ValidationError(f"site {n} has no observables")
            for o in obs:
                if o.dim != d:
                    raise ValidationError(f"observable {o.label or '?'} at site {n} has dimension {o.dim}, expected {d}")
        total = int(np.prod(dims))
        if self.state.dim != total:
            raise ValidationError(f"state dimension {self.state.dim} does not match product dimension {total}")

    def offset(self, site: int) -> int:
        return sum(len(s) for s in self.sites[:site])

    def catalog_index(self, site: int, k: int) -> int:
        if not 0 <= k < len(self.sites[site]):
            raise ValidationError(f"site {site} has no observable {k}")
        return self.offset(site) + k


def build_scenario_catalog(scenario: PartiteScenario, tol: Tolerances = DEFAULT_TOL) -> Catalog:
    """Catalog of every lifted local observable, site-major."""
    lifted = [
        tensor_embed(o, n, scenario.dims) for n, obs in enumerate(scenario.sites) for o in obs
    ]
    return Catalog(tuple(lifted), tol)


@dataclass(frozen=True)
class LocalResponse:
    """Indicator that the chosen observable at ``site`` lands in ``values`` (spectral indices)."""

    site: int
    observable: int
    values: tuple[int, ...]

    def table(self, scenario: PartiteScenario, catalog: Catalog) -> np.ndarray:
        i = scenario.catalog_index(self.site, self.observable)
        return np.isin(catalog.atom_indices[:, i], np.asarray(self.values, dtype=int)).astype(float)


def response_is_local(scenario: PartiteScenario, catalog: Catalog, site: int, table: np.ndarray) -> bool:
    """True iff ``table`` is constant along every lattice axis owned by another site."""
    t = np.asarray(table).reshape(catalog.shape)
    own = range(scenario.offset(site), scenario.offset(site) + len(scenario.sites[site]))
    for axis in range(len(catalog)):
        if axis in own:
            continue
        if not np.array_equal(t.max(axis=axis), t.min(axis=axis)):
            return False
    return True


def verify_lqhv(
    scenario: PartiteScenario,
    trials: int = 200,
    rng: np.random.Generator | None = None,
    *,
    exhaustive: bool = False,
    catalog: Catalog | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> CheckReport:
    """N-partite Born probabilities versus the signed-measure integral of local indicator responses.

    The quantum side is the Kronecker product of local spectral projectors,
    independent of the catalog machinery.
    """
    catalog = build_scenario_catalog(scenario, tol) if catalog is None else catalog
    nu = signed_measure(catalog, scenario.state)
    report = CheckReport("lqhv", catalog.tol.check)
    n_sites = len(scenario.sites)

    def check(choice: Sequence[tuple[int, tuple[int, ...]]]) -> None:
        local = [scenario.sites[n][k].projector_by_index(b) for n, (k, b) in enumerate(choice)]
        quantum = expectation(scenario.state, reduce(np.kron, local))
        weight = np.ones(catalog.n_atoms)
        for n, (k, b) in enumerate(choice):
            chi = LocalResponse(n, k, b).table(scenario, catalog)
            if not response_is_local(scenario, catalog, n, chi):
                report.record(float("inf"), f"response at site {n} is not local")
            weight = weight * chi
        via = float(np.dot(weight, nu.values))
        report.record(abs(quantum - via), f"choice={list(choice)}")

    if exhaustive:
        per_site = [
            [(k, b) for k, o in enumerate(obs) for b in powerset(len(o.eigenvalues))] for obs in scenario.sites
        ]
        for choice in iproduct(*per_site):
            check(choice)
        return report
    rng = np.random.default_rng() if rng is None else rng
    for _ in range(trials):
        choice = []
        for n in range(n_sites):
            k = int(rng.integers(len(scenario.sites[n])))
            choice.append((k, random_subset(len(scenario.sites[n][k].eigenvalues), rng)))
        check(choice)
    return report


def _require_dichotomic(o: HermitianObservable, tol: Tolerances) -> None:
    atol = tol.eig * o.scale
    ev = o.eigenvalues
    if len(ev) != 2 or abs(ev[0] + 1) > atol or abs(ev[1] - 1) > atol:
        raise ValidationError(f"observable {o.label or '?'} is not dichotomic: spectrum {list(ev)}")


@dataclass(frozen=True)
class ChshValue:
    quantum: float
    via_measure: float


def chsh_value(scenario: PartiteScenario, *, measure: SignedMeasure | None = None) -> ChshValue:
    """CHSH combination ``A1B1 + A1B2 + A2B1 - A2B2`` by trace and by signed-measure averages."""
    tol = measure.catalog.tol if measure is not None else DEFAULT_TOL
    if len(scenario.sites) != 2 or any(len(s) != 2 for s in scenario.sites):
        raise ValidationError("CHSH needs two sites with two observables each")
    for obs in scenario.sites:
        for o in obs:
            _require_dichotomic(o, tol)
    (a1, a2), (b1, b2) = scenario.sites
    signs = {(0, 0): 1.0, (0, 1): 1.0, (1, 0): 1.0, (1, 1): -1.0}
    quantum = sum(
        s * expectation(scenario.state, np.kron((a1, a2)[i].matrix, (b1, b2)[j].matrix)) for (i, j), s in signs.items()
    )
    nu = signed_measure(build_scenario_catalog(scenario, tol), scenario.state) if measure is None else measure
    cat = nu.catalog
    via = 0.0
    for (i, j), s in signs.items():
        ga = canonical_rv(cat, scenario.catalog_index(0, i))
        gb = canonical_rv(cat, scenario.catalog_index(1, j))
        via += s * qhv_average(nu, product, [ga, gb])
    return ChshValue(float(quantum), float(via))


def singlet_state() -> DensityState:
    """``|psi-> = (|01> - |10>)/sqrt2``."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return validate_state(np.outer(psi, psi.conj()), "singlet")


def werner_state(p: float) -> DensityState:
    """``p |psi-><psi-| + (1 - p) I/4``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"Werner parameter p={p} outside [0, 1]")
    rho = p * singlet_state().matrix + (1 - p) * np.eye(4) / 4
    return validate_state(rho, f"werner(p={p:g})")


def standard_chsh_settings() -> tuple[tuple[HermitianObservable, ...], tuple[HermitianObservable, ...]]:
    """A1 = Z, A2 = X, B1 = (Z + X)/sqrt2, B2 = (Z - X)/sqrt2."""
    return (
        (observable(SIGMA_Z, "A1"), observable(SIGMA_X, "A2")),
        (observable((SIGMA_Z + SIGMA_X) / np.sqrt(2), "B1"), observable((SIGMA_Z - SIGMA_X) / np.sqrt(2), "B2")),
    )


@dataclass(frozen=True)
class WernerRow:
    p: float
    chsh: float
    chsh_quantum: float
    total_variation: float
    min_atom: float


def werner_scan(
    p_grid: Sequence[float],
    settings: tuple[Sequence[HermitianObservable], Sequence[HermitianObservable]] | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> list[WernerRow]:
    """CHSH value and negativity of the signed measure along the Werner family, in grid order."""
    ps = [float(p) for p in p_grid]
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"Werner parameter p={p} outside [0, 1]")
    sites = standard_chsh_settings() if settings is None else settings
    catalog = None
    rows = []
    for p in ps:
        scenario = PartiteScenario((2, 2), sites, werner_state(p))
        if catalog is None:
            catalog = build_scenario_catalog(scenario, tol)
        nu = signed_measure(catalog, scenario.state)
        value = chsh_value(scenario, measure=nu)
        diag = negativity_diagnostics(nu)
        rows.append(WernerRow(p, value.via_measure, value.quantum, diag.total_variation, diag.min_atom))
    return rows
