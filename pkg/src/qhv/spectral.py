"""Hermitian observables, density states and the finite-spectrum calculus.

Every observable is stored together with its clustered spectral decomposition:
a strictly increasing tuple of eigenvalues and the matching orthogonal
projectors. Degenerate (or numerically near-degenerate) eigenvalues are merged
into one cluster whose projector is the sum of the rank-1 projectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._config import DEFAULT_TOL, Tolerances
from .errors import NumericalError, ValidationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def _as_square(matrix, what: str = "matrix") -> np.ndarray:
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValidationError(f"{what} must be a non-empty square matrix, got shape {a.shape}")
    return a


def hermiticity_defect(matrix) -> float:
    a = np.asarray(matrix, dtype=complex)
    return float(np.linalg.norm(a - a.conj().T))


@dataclass(frozen=True, eq=False)
class HermitianObservable:
    """A Hermitian matrix with its clustered spectral decomposition."""

    matrix: np.ndarray
    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]
    label: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.eigenvalues, self.projectors))

    @property
    def scale(self) -> float:
        return max(1.0, float(np.linalg.norm(self.matrix)))

    def index_of(self, value: float, tol: Tolerances = DEFAULT_TOL) -> int:
        """Position of the cluster representative matching ``value``."""
        atol = tol.eig * self.scale
        for k, lam in enumerate(self.eigenvalues):
            if abs(lam - value) <= atol:
                return k
        raise ValidationError(
            f"{float(value)!r} is not a spectral point of observable {self.label or '<unnamed>'}"
            f" (spectrum {list(self.eigenvalues)})"
        )

    def indices_of(self, values: Iterable[float], tol: Tolerances = DEFAULT_TOL) -> tuple[int, ...]:
        return tuple(sorted({self.index_of(v, tol) for v in values}))

    def projector(self, values: Iterable[float], tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        """Spectral measure of a set of spectral points, ``P_X(B)``."""
        return self.projector_by_index(self.indices_of(values, tol))

    def projector_by_index(self, indices: Iterable[int]) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k in indices:
            out = out + self.projectors[k]
        return out


@dataclass(frozen=True, eq=False)
class DensityState:
    matrix: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectrumFunction:
    """A real function tabulated on a finite set of spectral points."""

    mapping: Mapping[float, float] = field(default_factory=dict)

    @classmethod
    def from_callable(cls, fn: Callable[[float], float], observable: HermitianObservable) -> "SpectrumFunction":
        return cls({lam: float(fn(lam)) for lam in observable.eigenvalues})

    @classmethod
    def identity_on(cls, observable: HermitianObservable) -> "SpectrumFunction":
        return cls({lam: lam for lam in observable.eigenvalues})

    def lookup(self, value: float, atol: float = 0.0) -> float:
        if value in self.mapping:
            return float(self.mapping[value])
        for key, out in self.mapping.items():
            if abs(key - value) <= atol:
                return float(out)
        raise ValidationError(f"function is undefined at spectral point {value!r}")

    def compose(self, inner: "SpectrumFunction", atol: float = 0.0) -> "SpectrumFunction":
        """Table of ``self o inner`` on the domain of ``inner``."""
        return SpectrumFunction({x: self.lookup(y, atol) for x, y in inner.mapping.items()})


def _cluster(values: Sequence[float], gap: float) -> list[list[int]]:
    """Group sorted values into runs whose consecutive gaps are <= ``gap``."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def eigendecompose(
    matrix,
    tol_eig: float | None = None,
    *,
    label: str = "",
    tol: Tolerances = DEFAULT_TOL,
) -> HermitianObservable:
    """Clustered spectral decomposition of a Hermitian matrix.

    Eigenvalues closer than ``tol_eig * max(1, ||matrix||_F)`` are merged; the
    cluster is represented by the mean of its members and by the sum of the
    member rank-1 projectors.

    Examples
    --------
    >>> obs = eigendecompose(np.diag([1.0, -1.0]))
    >>> obs.eigenvalues
    (-1.0, 1.0)
    """
    a = _as_square(matrix, f"observable {label}".strip())
    defect = hermiticity_defect(a)
    if defect > tol.herm:
        raise ValidationError(
            f"observable {label or '<unnamed>'} is not Hermitian: ||A - A^dagger||_F = {defect:.3e}"
            f" > tol_herm = {tol.herm:.1e}"
        )
    tol_eig = tol.eig if tol_eig is None else tol_eig
    a = 0.5 * (a + a.conj().T)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed for observable {label or '<unnamed>'}: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError(f"eigensolver returned non-finite eigenvalues for {label or '<unnamed>'}")
    scale = max(1.0, float(np.linalg.norm(a)))
    eigenvalues = []
    projectors = []
    for group in _cluster(list(w), tol_eig * scale):
        vecs = v[:, group]
        eigenvalues.append(float(np.mean(w[group])))
        projectors.append(_frozen(vecs @ vecs.conj().T))
    return HermitianObservable(_frozen(a), tuple(eigenvalues), tuple(projectors), label)


def observable(matrix, label: str = "", tol: Tolerances = DEFAULT_TOL) -> HermitianObservable:
    """Shorthand for :func:`eigendecompose` with default clustering."""
    return eigendecompose(matrix, label=label, tol=tol)


def decomposition_defects(obs: HermitianObservable) -> dict[str, float]:
    """Largest violation of each spectral-decomposition invariant (Frobenius norms)."""
    d = obs.dim
    eye = np.eye(d)
    ps = obs.projectors
    idem = max(float(np.linalg.norm(p @ p - p)) for p in ps)
    orth = max(
        (float(np.linalg.norm(ps[i] @ ps[j])) for i in range(len(ps)) for j in range(len(ps)) if i != j),
        default=0.0,
    )
    complete = float(np.linalg.norm(sum(ps) - eye))
    recon = float(np.linalg.norm(sum(lam * p for lam, p in obs.spectrum) - obs.matrix))
    herm = max(hermiticity_defect(p) for p in ps)
    increasing = all(b > a for a, b in zip(obs.eigenvalues, obs.eigenvalues[1:]))
    return {
        "idempotency": idem,
        "orthogonality": orth,
        "completeness": complete,
        "reconstruction": recon,
        "projector_hermiticity": herm,
        "increasing": 0.0 if increasing else float("inf"),
    }


def validate_state(matrix, label: str = "", tol: Tolerances = DEFAULT_TOL) -> DensityState:
    """Check that ``matrix`` is a density operator.

    Eigenvalues in ``[-tol.check, 0)`` are clamped to zero and the trace is
    renormalized; anything more negative is rejected.
    """
    name = label or "<unnamed>"
    a = _as_square(matrix, f"state {label}".strip())
    defect = hermiticity_defect(a)
    if defect > tol.herm:
        raise ValidationError(f"state {name} is not Hermitian: ||A - A^dagger||_F = {defect:.3e}")
    a = 0.5 * (a + a.conj().T)
    tr = float(np.trace(a).real)
    if abs(tr - 1.0) > tol.check:
        raise ValidationError(f"state {name} has trace {tr!r}, expected 1 within {tol.check:.1e}")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed for state {name}: {exc}") from exc
    if w[0] < -tol.check:
        raise ValidationError(f"state {name} has negative eigenvalue {w[0]!r}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        a = (v * w) @ v.conj().T
        a = a / np.trace(a).real
    return DensityState(_frozen(a), label)


def _same_dim(x: int, y: int, what: str) -> None:
    if x != y:
        raise ValidationError(f"dimension mismatch in {what}: {x} vs {y}")


def commutator_norm(x: HermitianObservable, y: HermitianObservable) -> float:
    _same_dim(x.dim, y.dim, "commutator")
    return float(np.linalg.norm(x.matrix @ y.matrix - y.matrix @ x.matrix))


def commute_check(x: HermitianObservable, y: HermitianObservable, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff every spectral projector of ``x`` commutes with every one of ``y``."""
    _same_dim(x.dim, y.dim, "commute_check")
    for p in x.projectors:
        for q in y.projectors:
            if np.linalg.norm(p @ q - q @ p) > tol.check:
                return False
    return True


def apply_function(
    phi: SpectrumFunction, x: HermitianObservable, tol: Tolerances = DEFAULT_TOL, *, label: str | None = None
) -> HermitianObservable:
    """Functional calculus ``phi(X) = sum_x phi(x) P_X({x})``.

    Spectral points sharing the same image are merged so that
    ``P_{phi(X)}(B) = P_X(phi^{-1}(B))`` holds projector by projector.
    """
    atol = tol.eig * x.scale
    images = [phi.lookup(lam, atol) for lam in x.eigenvalues]
    order = sorted(range(len(images)), key=lambda k: images[k])
    sorted_images = [images[k] for k in order]
    img_scale = max(1.0, max(abs(v) for v in images))
    eigenvalues = []
    projectors = []
    for group in _cluster(sorted_images, tol.eig * img_scale):
        members = [order[g] for g in group]
        eigenvalues.append(float(np.mean([images[k] for k in members])))
        projectors.append(_frozen(x.projector_by_index(members)))
    matrix = sum(lam * p for lam, p in zip(eigenvalues, projectors))
    name = label if label is not None else (f"phi({x.label})" if x.label else "")
    return HermitianObservable(_frozen(matrix), tuple(eigenvalues), tuple(projectors), name)


def tensor_embed(x: HermitianObservable, site: int, dims: Sequence[int]) -> HermitianObservable:
    """Lift a local observable to ``I x ... x X x ... x I`` (``site`` is 0-based)."""
    dims = [int(d) for d in dims]
    if not 0 <= site < len(dims):
        raise ValidationError(f"site {site} out of range for {len(dims)} sites")
    _same_dim(x.dim, dims[site], f"tensor_embed at site {site}")
    left = np.eye(int(np.prod(dims[:site], dtype=int)))
    right = np.eye(int(np.prod(dims[site + 1 :], dtype=int)))

    def lift(m: np.ndarray) -> np.ndarray:
        return _frozen(reduce(np.kron, (left, m, right)))

    return HermitianObservable(
        lift(x.matrix), x.eigenvalues, tuple(lift(p) for p in x.projectors), x.label
    )


def _matrix_of(obj) -> np.ndarray:
    if isinstance(obj, (HermitianObservable, DensityState)):
        return obj.matrix
    return np.asarray(obj, dtype=complex)


def expectation(rho: DensityState | np.ndarray, x: HermitianObservable | np.ndarray) -> float:
    """Quantum average ``tr[rho X]`` (real part)."""
    r, m = _matrix_of(rho), _matrix_of(x)
    _same_dim(r.shape[0], m.shape[0], "expectation")
    return float(np.einsum("ij,ji->", r, m).real)
