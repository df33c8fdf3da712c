"""Regenerate the bundled demo scenarios under src/qhv/demos/."""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "qhv" / "demos"

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2)


def enc(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def bloch_projector(deg):
    t = np.deg2rad(deg)
    return (I2 + np.cos(t) * X + np.sin(t) * Y) / 2


def write(name, doc):
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def trine():
    write(
        "trine-negativity",
        {
            "dimension": 2,
            "observables": {
                "A120": enc(2 * bloch_projector(120) - I2),
                "A240": enc(2 * bloch_projector(240) - I2),
                "A0": enc(2 * bloch_projector(0) - I2),
            },
            "states": {"rho0": enc(bloch_projector(0))},
            "catalogs": {"trine": ["A120", "A240"], "trine3": ["A0", "A120", "A240"]},
            "queries": [
                {
                    "type": "negativity",
                    "name": "trine-atoms",
                    "catalog": "trine",
                    "state": "rho0",
                    "expected_total_variation": 1.25,
                    "expected_min_atom": -0.125,
                    "tolerance": 1e-12,
                },
                {"type": "verify-lemma1", "name": "lemma1", "catalog": "trine3", "exhaustive": True},
                {"type": "verify-pushforward", "name": "pushforward", "catalog": "trine3", "exhaustive": True},
                {"type": "expect", "state": "rho0", "observable": "A120", "expected": -0.5},
            ],
        },
    )


def _sites():
    return {
        "A1": enc(Z),
        "A2": enc(X),
        "B1": enc((Z + X) / np.sqrt(2)),
        "B2": enc((Z - X) / np.sqrt(2)),
    }


def chsh():
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    obs = _sites()
    obs.update({"ZI": enc(np.kron(Z, I2)), "IZ": enc(np.kron(I2, Z)), "XI": enc(np.kron(X, I2)), "IX": enc(np.kron(I2, X))})
    write(
        "chsh-singlet",
        {
            "dimension": [2, 2],
            "observables": obs,
            "states": {"singlet": enc(np.outer(psi, psi))},
            "catalogs": {"pauli": ["ZI", "IZ", "XI", "IX"]},
            "queries": [
                {
                    "type": "chsh",
                    "name": "chsh",
                    "state": "singlet",
                    "sites": [["A1", "A2"], ["B1", "B2"]],
                    "expected_magnitude": 2.828427,
                    "tolerance": 1e-6,
                },
                {"type": "lqhv", "state": "singlet", "sites": [["A1", "A2"], ["B1", "B2"]], "exhaustive": True},
                {"type": "verify-joint", "catalog": "pauli", "state": "singlet", "subset": ["ZI", "IZ"], "exhaustive": True},
                {
                    "type": "ks-averages",
                    "catalog": "pauli",
                    "state": "singlet",
                    "cases": [
                        {"relation": "st2", "observables": ["ZI", "IZ"]},
                        {"relation": "st1'", "observables": ["ZI", "XI"]},
                    ],
                },
            ],
        },
    )


def werner():
    grid = [round(0.1 * k, 1) for k in range(11)] + [float(1 / np.sqrt(2))]
    write(
        "werner-scan",
        {
            "dimension": [2, 2],
            "observables": _sites(),
            "states": {},
            "catalogs": {},
            "queries": [{"type": "werner-scan", "name": "werner", "p_grid": grid, "sites": [["A1", "A2"], ["B1", "B2"]]}],
        },
    )


def qutrit():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v = v / np.linalg.norm(v)
    w = np.array([[0.3, 0.5 - 0.2j, 0.1j], [0.5 + 0.2j, -0.4, 0.7], [-0.1j, 0.7, 0.2]])
    write(
        "qutrit-context-invariance",
        {
            "dimension": 3,
            "observables": {
                "Y": enc(np.diag([1, 0, -1])),
                "Y2": enc(np.diag([1, 0, 1])),
                "D": enc(np.diag([2, -1, 3])),
                "W": enc(w),
            },
            "states": {"psi": enc(np.outer(v, v.conj()))},
            "catalogs": {"qutrit": ["Y", "Y2", "D"], "qutrit_w": ["Y", "Y2", "D", "W"]},
            "queries": [
                {
                    "type": "verify-context-invariance",
                    "name": "square-of-Y",
                    "catalog": "qutrit",
                    "state": "psi",
                    "base": "Y",
                    "phi": [[1, 1], [0, 0], [-1, 1]],
                    "target": "Y2",
                    "partners": ["D"],
                    "exhaustive": True,
                },
                {
                    "type": "verify-context-invariance",
                    "name": "square-of-Y-signed",
                    "catalog": "qutrit_w",
                    "state": "psi",
                    "base": "Y",
                    "phi": [[1, 1], [0, 0], [-1, 1]],
                    "target": "Y2",
                    "partners": ["D"],
                    "exhaustive": True,
                },
                {"type": "negativity", "name": "signed-measure", "catalog": "qutrit_w", "state": "psi"},
                {
                    "type": "ks-averages",
                    "catalog": "qutrit_w",
                    "state": "psi",
                    "cases": [
                        {"relation": "st1", "observables": ["Y"], "phi": [[1, 1], [0, 0], [-1, 1]]},
                        {"relation": "st1'", "observables": ["Y", "W"]},
                        {"relation": "st2", "observables": ["Y", "D"]},
                    ],
                },
            ],
        },
    )


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    trine()
    chsh()
    werner()
    qutrit()
