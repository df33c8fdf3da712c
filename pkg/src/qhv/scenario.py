"""JSON scenario documents: parsing, execution and report emission.

A scenario declares observables and states as complex matrices (entries are
``[re, im]`` pairs), groups observables into named catalogs and lists typed
queries. ``run`` executes the queries in order; every randomized check draws
from a generator seeded by ``(seed, query position)``, so a document and a
seed determine the report completely.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from ._config import DEFAULT_TOL, Tolerances
from .catalog import Catalog
from .errors import QHVError, ValidationError
from .extension import negativity_diagnostics, signed_measure, verify_pushforward
from .lqhv import PartiteScenario, build_scenario_catalog, chsh_value, verify_lqhv, werner_scan
from .models import (
    FunctionalRepresentation,
    KSCase,
    verify_context_invariance,
    verify_ks_average_relations,
    verify_noncontextual_joint,
    verify_representative_reconstruction,
)
from .report import CheckReport
from .spectral import DensityState, HermitianObservable, SpectrumFunction, eigendecompose, expectation, validate_state
from .symmetrized import verify_marginal_consistency, verify_permutation_invariance

DEMOS = ("trine-negativity", "chsh-singlet", "werner-scan", "qutrit-context-invariance")

Matrix = list[list[tuple[float, float]]]
PhiTable = list[tuple[float, float]]


class ScenarioError(ValidationError):
    """Syntax or semantic problem in a scenario document."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _Query(_Model):
    name: str | None = None


class ExpectQuery(_Query):
    type: Literal["expect"]
    state: str
    observable: str
    expected: float | None = None
    tolerance: float | None = None


class NegativityQuery(_Query):
    type: Literal["negativity"]
    catalog: str
    state: str
    expected_total_variation: float | None = None
    expected_min_atom: float | None = None
    tolerance: float | None = None


class Lemma1Query(_Query):
    type: Literal["verify-lemma1"]
    catalog: str
    trials: int = 200
    exhaustive: bool = False


class PushforwardQuery(_Query):
    type: Literal["verify-pushforward"]
    catalog: str
    trials: int = 200
    exhaustive: bool = False


class JointQuery(_Query):
    type: Literal["verify-joint"]
    catalog: str
    state: str
    subset: list[str]
    trials: int = 200
    exhaustive: bool = False


class ContextInvarianceQuery(_Query):
    type: Literal["verify-context-invariance"]
    catalog: str
    state: str
    base: str
    phi: PhiTable
    target: str
    partners: list[str] = []
    trials: int = 200
    exhaustive: bool = False


class KSCaseSpec(_Model):
    relation: Literal["st1", "st1'", "st2"]
    observables: list[str]
    phi: PhiTable | None = None


class KSQuery(_Query):
    type: Literal["ks-averages"]
    catalog: str
    state: str
    cases: list[KSCaseSpec]


class LqhvQuery(_Query):
    type: Literal["lqhv"]
    state: str
    sites: list[list[str]]
    trials: int = 200
    exhaustive: bool = False


class ChshQuery(_Query):
    type: Literal["chsh"]
    state: str
    sites: list[list[str]]
    expected_magnitude: float | None = None
    tolerance: float | None = None


class WernerScanQuery(_Query):
    type: Literal["werner-scan"]
    p_grid: list[float]
    sites: list[list[str]] | None = None


Query = Annotated[
    Union[
        ExpectQuery,
        NegativityQuery,
        Lemma1Query,
        PushforwardQuery,
        JointQuery,
        ContextInvarianceQuery,
        KSQuery,
        LqhvQuery,
        ChshQuery,
        WernerScanQuery,
    ],
    Field(discriminator="type"),
]


class ToleranceBlock(_Model):
    eig: float | None = None
    check: float | None = None
    herm: float | None = None


class ScenarioDocument(_Model):
    dimension: int | list[int]
    observables: dict[str, Matrix] = {}
    states: dict[str, Matrix] = {}
    catalogs: dict[str, list[str]] = {}
    queries: list[Query] = []
    tolerances: ToleranceBlock = ToleranceBlock()

    @property
    def local_dims(self) -> list[int]:
        return [self.dimension] if isinstance(self.dimension, int) else list(self.dimension)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.local_dims))

    def tol(self) -> Tolerances:
        t = self.tolerances
        return DEFAULT_TOL.with_overrides(eig=t.eig, check=t.check, herm=t.herm)


def _to_array(m: Matrix, what: str) -> np.ndarray:
    rows = len(m)
    if rows == 0 or any(len(r) != rows for r in m):
        raise ScenarioError(f"{what}: matrix must be square and non-empty")
    return np.array([[complex(re, im) for re, im in row] for row in m], dtype=complex)


@dataclass
class _Resolved:
    doc: ScenarioDocument
    tol: Tolerances
    observables: dict[str, HermitianObservable]
    states: dict[str, DensityState]
    _catalogs: dict[str, Catalog] = field(default_factory=dict)

    def catalog(self, name: str) -> Catalog:
        if name not in self._catalogs:
            self._catalogs[name] = Catalog(tuple(self.observables[o] for o in self.doc.catalogs[name]), self.tol)
        return self._catalogs[name]

    def catalog_index(self, catalog: str, observable: str) -> int:
        return self.doc.catalogs[catalog].index(observable)


def _resolve(doc: ScenarioDocument) -> _Resolved:
    tol = doc.tol()
    dims = doc.local_dims
    if any(d < 1 for d in dims):
        raise ScenarioError(f"dimension entries must be positive, got {dims}")
    allowed = {doc.total_dim, *dims}
    observables = {}
    for name, m in doc.observables.items():
        a = _to_array(m, f"observable {name}")
        if a.shape[0] not in allowed:
            raise ScenarioError(f"observable {name} has dimension {a.shape[0]}, expected one of {sorted(allowed)}")
        try:
            observables[name] = eigendecompose(a, label=name, tol=tol)
        except QHVError as exc:
            raise ScenarioError(f"observable {name}: {exc}") from exc
    states = {}
    for name, m in doc.states.items():
        a = _to_array(m, f"state {name}")
        if a.shape[0] != doc.total_dim:
            raise ScenarioError(f"state {name} has dimension {a.shape[0]}, expected {doc.total_dim}")
        try:
            states[name] = validate_state(a, name, tol)
        except QHVError as exc:
            raise ScenarioError(f"state {name}: {exc}") from exc
    for cname, members in doc.catalogs.items():
        if not members:
            raise ScenarioError(f"catalog {cname} is empty")
        for o in members:
            if o not in observables:
                raise ScenarioError(f"catalog {cname} references undeclared observable {o}")
            if observables[o].dim != doc.total_dim:
                raise ScenarioError(f"catalog {cname}: observable {o} is local, catalogs need dimension {doc.total_dim}")
        if len(set(members)) != len(members):
            raise ScenarioError(f"catalog {cname} lists an observable twice")
    res = _Resolved(doc, tol, observables, states)
    for k, q in enumerate(doc.queries):
        _check_query_refs(res, q, k)
    return res


def _check_query_refs(res: _Resolved, q, k: int) -> None:
    doc = res.doc
    where = f"query {k} ({q.type})"

    def need(kind: str, table: dict, name: str) -> None:
        if name not in table:
            raise ScenarioError(f"{where} references undeclared {kind} {name}")

    if hasattr(q, "state"):
        need("state", res.states, q.state)
    if hasattr(q, "catalog"):
        need("catalog", doc.catalogs, q.catalog)
    if isinstance(q, ExpectQuery):
        need("observable", res.observables, q.observable)
        if res.observables[q.observable].dim != doc.total_dim:
            raise ScenarioError(f"{where}: observable {q.observable} does not act on the full space")
    members = doc.catalogs.get(getattr(q, "catalog", ""), [])
    in_catalog = []
    if isinstance(q, JointQuery):
        in_catalog = q.subset
    elif isinstance(q, ContextInvarianceQuery):
        in_catalog = [q.base, *q.partners]
        need("observable", res.observables, q.target)
    elif isinstance(q, KSQuery):
        in_catalog = [o for case in q.cases for o in case.observables]
    for o in in_catalog:
        if o not in members:
            raise ScenarioError(f"{where}: observable {o} is not in catalog {q.catalog}")
    if isinstance(q, (LqhvQuery, ChshQuery)) or (isinstance(q, WernerScanQuery) and q.sites is not None):
        dims = doc.local_dims if not isinstance(q, WernerScanQuery) else [2, 2]
        if len(q.sites) != len(dims):
            raise ScenarioError(f"{where}: {len(q.sites)} sites but {len(dims)} local dimensions")
        for n, names in enumerate(q.sites):
            for o in names:
                need("observable", res.observables, o)
                if res.observables[o].dim != dims[n]:
                    raise ScenarioError(f"{where}: observable {o} does not match site {n} dimension {dims[n]}")
    if isinstance(q, WernerScanQuery):
        for p in q.p_grid:
            if not 0.0 <= p <= 1.0:
                raise ScenarioError(f"{where}: p={p} outside [0, 1]")


def parse_scenario(text: str) -> ScenarioDocument:
    """Strict parse plus semantic validation of a scenario document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        doc = ScenarioDocument.model_validate(raw)
    except PydanticValidationError as exc:
        msgs = "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors())
        raise ScenarioError(f"invalid scenario: {msgs}") from exc
    _resolve(doc)
    return doc


def dump_scenario(doc: ScenarioDocument) -> str:
    """Canonical JSON text of a document (``parse_scenario`` inverts it)."""
    return json.dumps(doc.model_dump(mode="json", exclude_none=True), indent=2) + "\n"


def load_demo(name: str) -> ScenarioDocument:
    if name not in DEMOS:
        raise ScenarioError(f"unknown demo {name!r}; available: {', '.join(DEMOS)}")
    text = resources.files("qhv").joinpath("demos", f"{name}.json").read_text(encoding="utf-8")
    return parse_scenario(text)


@dataclass
class QueryResult:
    index: int
    name: str
    type: str
    status: str  # pass | fail | error
    max_deviation: float | None = None
    checks: int = 0
    message: str = ""
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)


@dataclass
class Report:
    seed: int
    results: list[QueryResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.status == "pass" for r in self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def _from_checks(res: QueryResult, reports: list[CheckReport]) -> QueryResult:
    res.columns = ["check", "checks", "max_deviation", "status"]
    for r in reports:
        res.rows.append([r.name, r.checks, r.max_deviation, "pass" if r.passed else "fail"])
    res.checks = sum(r.checks for r in reports)
    res.max_deviation = max((r.max_deviation for r in reports), default=0.0)
    failures = [f"{r.name}: {f}" for r in reports for f in r.failures]
    res.status = "pass" if not failures else "fail"
    if failures:
        res.message = f"{len(failures)} failed checks; first: {failures[0]}"
    return res


def _phi(table: PhiTable) -> SpectrumFunction:
    return SpectrumFunction({float(x): float(y) for x, y in table})


def _scenario_of(r: _Resolved, state: str, sites: list[list[str]]) -> PartiteScenario:
    return PartiteScenario(
        tuple(r.doc.local_dims), tuple(tuple(r.observables[o] for o in s) for s in sites), r.states[state]
    )


def _case_label(c: KSCaseSpec) -> str:
    joiner = "+" if c.relation == "st1'" else ","
    return f"{c.relation}[{joiner.join(c.observables)}]"


def _atom_label(catalog: Catalog, atom: tuple[int, ...]) -> str:
    return "(" + ",".join(f"{catalog[i].eigenvalues[k]:+.6g}" for i, k in enumerate(atom)) + ")"


def _run_query(r: _Resolved, q, res: QueryResult, rng: np.random.Generator) -> QueryResult:
    tol = r.tol
    if isinstance(q, ExpectQuery):
        value = expectation(r.states[q.state], r.observables[q.observable])
        res.columns, res.rows = ["quantity", "value"], [["expectation", value]]
        res.status, res.max_deviation = "pass", 0.0
        if q.expected is not None:
            dev = abs(value - q.expected)
            res.max_deviation, res.checks = dev, 1
            res.status = "pass" if dev <= (q.tolerance if q.tolerance is not None else tol.check) else "fail"
        return res
    if isinstance(q, NegativityQuery):
        cat = r.catalog(q.catalog)
        mu = signed_measure(cat, r.states[q.state])
        diag = negativity_diagnostics(mu)
        res.columns = ["atom", "value"]
        res.rows = [[_atom_label(cat, a), mu.values[k]] for k, a in enumerate(cat.atoms())]
        res.rows += [
            ["total", mu.total],
            ["total_variation", diag.total_variation],
            ["min_atom", diag.min_atom],
            ["negative_atom_count", diag.negative_atom_count],
        ]
        limit = q.tolerance if q.tolerance is not None else tol.check
        rep = CheckReport("negativity", limit)
        rep.record(abs(mu.total - 1.0), "normalization")
        if q.expected_total_variation is not None:
            rep.record(abs(diag.total_variation - q.expected_total_variation), "total_variation")
        if q.expected_min_atom is not None:
            rep.record(abs(diag.min_atom - q.expected_min_atom), "min_atom")
        res.max_deviation, res.checks = rep.max_deviation, rep.checks
        res.status = "pass" if rep.passed else "fail"
        res.message = "; ".join(rep.failures)
        return res
    if isinstance(q, Lemma1Query):
        cat = r.catalog(q.catalog)
        return _from_checks(
            res,
            [
                verify_permutation_invariance(cat, q.trials, rng, exhaustive=q.exhaustive),
                verify_marginal_consistency(cat, q.trials, rng, exhaustive=q.exhaustive),
            ],
        )
    if isinstance(q, PushforwardQuery):
        return _from_checks(res, [verify_pushforward(r.catalog(q.catalog), q.trials, rng, exhaustive=q.exhaustive)])
    if isinstance(q, JointQuery):
        subset = [r.catalog_index(q.catalog, o) for o in q.subset]
        rep = verify_noncontextual_joint(
            r.catalog(q.catalog), r.states[q.state], subset, q.trials, rng, exhaustive=q.exhaustive
        )
        return _from_checks(res, [rep])
    if isinstance(q, ContextInvarianceQuery):
        cat = r.catalog(q.catalog)
        rep = FunctionalRepresentation(r.catalog_index(q.catalog, q.base), _phi(q.phi), r.observables[q.target])
        partners = [r.catalog_index(q.catalog, o) for o in q.partners]
        return _from_checks(
            res,
            [
                verify_context_invariance(
                    cat, r.states[q.state], rep, partners, q.trials, rng, exhaustive=q.exhaustive
                ),
                verify_representative_reconstruction(cat, rep),
            ],
        )
    if isinstance(q, KSQuery):
        cat = r.catalog(q.catalog)
        cases = [
            KSCase(
                c.relation,
                tuple(r.catalog_index(q.catalog, o) for o in c.observables),
                _phi(c.phi) if c.phi is not None else None,
                _case_label(c),
            )
            for c in q.cases
        ]
        rep = verify_ks_average_relations(cat, r.states[q.state], cases)
        _from_checks(res, [rep])
        res.columns = ["case", "quantum", "qhv", "deviation"]
        res.rows = [[row["case"], row["quantum"], row["qhv"], row["deviation"]] for row in rep.rows]
        return res
    if isinstance(q, LqhvQuery):
        sc = _scenario_of(r, q.state, q.sites)
        return _from_checks(res, [verify_lqhv(sc, q.trials, rng, exhaustive=q.exhaustive, tol=tol)])
    if isinstance(q, ChshQuery):
        sc = _scenario_of(r, q.state, q.sites)
        mu = signed_measure(build_scenario_catalog(sc, tol), sc.state)
        value = chsh_value(sc, measure=mu)
        diag = negativity_diagnostics(mu)
        res.columns = ["quantity", "value"]
        res.rows = [
            ["quantum", value.quantum],
            ["via_measure", value.via_measure],
            ["total_variation", diag.total_variation],
            ["min_atom", diag.min_atom],
        ]
        rep = CheckReport("chsh", tol.check)
        rep.record(abs(value.quantum - value.via_measure), "quantum vs via_measure")
        if q.expected_magnitude is not None:
            limit = q.tolerance if q.tolerance is not None else tol.check
            dev = abs(abs(value.via_measure) - q.expected_magnitude)
            rep.checks += 1
            rep.max_deviation = max(rep.max_deviation, dev)
            if dev > limit:
                rep.failures.append(f"|chsh| deviates from expected by {dev:.3e}")
        if abs(value.via_measure) > 2 + tol.check and diag.total_variation <= 1 + tol.check:
            rep.failures.append("Bell violation with a nonnegative measure")
        res.max_deviation, res.checks = rep.max_deviation, rep.checks
        res.status = "pass" if rep.passed else "fail"
        res.message = "; ".join(rep.failures)
        return res
    if isinstance(q, WernerScanQuery):
        settings = None
        if q.sites is not None:
            settings = tuple(tuple(r.observables[o] for o in s) for s in q.sites)
        rows = werner_scan(q.p_grid, settings, tol)
        rep = CheckReport("werner-scan", tol.check)
        res.columns = ["p", "chsh", "total_variation", "min_atom"]
        for row in rows:
            res.rows.append([row.p, row.chsh, row.total_variation, row.min_atom])
            rep.record(abs(row.chsh - row.chsh_quantum), f"p={row.p}")
            if abs(row.chsh) > 2 + tol.check:
                rep.record(row.total_variation - 1 - tol.check, f"negativity at p={row.p}", lower_bound=True)
        res.max_deviation, res.checks = rep.max_deviation, rep.checks
        res.status = "pass" if rep.passed else "fail"
        res.message = "; ".join(rep.failures)
        return res
    raise ScenarioError(f"unsupported query type {q.type}")  # pragma: no cover


def run(doc: ScenarioDocument, seed: int = 0) -> Report:
    """Execute every query; per-query errors are reported, never raised."""
    r = _resolve(doc)
    report = Report(seed)
    for k, q in enumerate(doc.queries):
        name = q.name or q.type.removeprefix("verify-")
        res = QueryResult(k, name, q.type, "error")
        rng = np.random.default_rng([seed, k])
        try:
            _run_query(r, q, res, rng)
        except QHVError as exc:
            res.status, res.message = "error", f"{type(exc).__name__}: {exc}"
            res.columns, res.rows = [], []
        report.results.append(res)
    return report


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _summary(res: QueryResult) -> str:
    dev = "n/a" if res.max_deviation is None else _fmt(res.max_deviation)
    return f"{res.name}, {res.status}, max_dev={dev}"


def emit(report: Report, fmt: str = "human") -> str:
    """Render a report as aligned text tables or as CSV sections."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for res in report.results:
            w.writerow(["query", "name", "type", "status", "max_deviation", "checks", "message"])
            dev = "" if res.max_deviation is None else _fmt(res.max_deviation)
            w.writerow([res.index, res.name, res.type, res.status, dev, res.checks, res.message])
            if res.columns:
                w.writerow(res.columns)
                for row in res.rows:
                    w.writerow([_fmt(v) for v in row])
            w.writerow([])
        return buf.getvalue()
    if fmt != "human":
        raise ValueError(f"unknown format {fmt!r}")
    out = []
    for res in report.results:
        flag = "" if res.status == "pass" else "  <-- " + res.status.upper()
        out.append(f"[{res.index}] {_summary(res)}  ({res.type}, {res.checks} checks){flag}")
        if res.message:
            out.append(f"    {res.message}")
        if res.columns:
            cells = [res.columns] + [[_fmt(v) for v in row] for row in res.rows]
            widths = [max(len(row[c]) for row in cells) for c in range(len(res.columns))]
            for row in cells:
                out.append("    " + "  ".join(cell.ljust(wd) for cell, wd in zip(row, widths)).rstrip())
        out.append("")
    verdict = "all queries passed" if report.passed else "some queries did not pass"
    out.append(f"seed={report.seed}: {len(report.results)} queries, {verdict}")
    return "\n".join(out) + "\n"
