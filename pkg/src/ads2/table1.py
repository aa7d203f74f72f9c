"""Machine-readable classification table of the invariant mode families.

Each row lists the mode functions, the frequency formula, the boundary
condition, the representation and unitarity. The frequencies and labels
are not copied into the report: for a few sample values of lambda the
spectrum is recomputed and the classifier is run, and each sample records
whether the result matches the row.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

from .boundary import ExtensionParams, SelfAdjointBC
from .spectrum import find_spectrum
from .symmetry import RepKind, classify_representation

__all__ = ["TableRow", "TABLE1", "table1_report"]

N_CHECK = 4
OMEGA_TOL = 1e-8


@dataclass(frozen=True)
class TableRow:
    lambda_range: str
    mode_functions: str
    omega: str
    bc: str
    irrep: str
    unitary: bool
    samples: Sequence[float]
    omega_of: Callable[[float, int], float]
    first_n: int
    kind: RepKind
    lambda_hat_of: Optional[Callable[[float], float]]
    note: str = ""

    def boundary_condition(self) -> Optional[SelfAdjointBC]:
        if self.bc == "square integrability":
            return None
        return SelfAdjointBC.named({"Dirichlet": "dirichlet", "Neumann": "neumann",
                                    "mixed theta=0": "mixed0",
                                    "mixed theta=pi/2": "mixed90"}[self.bc])


def _lam_plus_n(lam: float, n: int) -> float:
    return lam + n


def _one_minus_lam_plus_n(lam: float, n: int) -> float:
    return 1.0 - lam + n


def _half_plus_n(lam: float, n: int) -> float:
    return n + 0.5


def _n(lam: float, n: int) -> float:
    return float(n)


_A = "a = lambda - 1/2"
_DIR = "cos^lambda(rho) P_n^(a,a)(sin rho)"
_NEU = "cos^(1-lambda)(rho) P_n^(-a,-a)(sin rho)"
_MIX90 = "cos^lambda(rho) (1 - sin rho)^(-a) P_n^(-a,a)(sin rho)"
_MIX0 = "cos^lambda(rho) (1 + sin rho)^(-a) P_n^(a,-a)(sin rho)"

TABLE1: List[TableRow] = [
    TableRow("lambda >= 3/2", _DIR, "lambda + n", "square integrability", "D+_lambda", True,
             (1.5, 2.0, 3.3), _lam_plus_n, 0, RepKind.DISCRETE_PLUS, lambda l: l),
    TableRow("1 < lambda < 3/2", _DIR, "lambda + n", "Dirichlet", "D+_lambda", True,
             (1.1, 1.25, 1.4), _lam_plus_n, 0, RepKind.DISCRETE_PLUS, lambda l: l),
    TableRow("1 < lambda < 3/2", _NEU, "1 - lambda + n", "Neumann", "F+_(1-lambda)", False,
             (1.1, 1.25, 1.4), _one_minus_lam_plus_n, 0, RepKind.NON_UNITARY_DISCRETE,
             lambda l: 1.0 - l),
    TableRow("1 < lambda < 3/2", _MIX90, "n + 1/2", "mixed theta=pi/2", "--", False,
             (1.1, 1.25, 1.4), _half_plus_n, 0, RepKind.NO_LABEL, None),
    TableRow("1 < lambda < 3/2", _MIX0, "n + 1/2", "mixed theta=0", "--", False,
             (1.1, 1.25, 1.4), _half_plus_n, 0, RepKind.NO_LABEL, None),
    TableRow("lambda = 1", "cos(n rho) for odd n, sin(n rho) for even n", "n (n >= 1)",
             "Dirichlet", "D+_1", True, (1.0,), _n, 1, RepKind.DISCRETE_PLUS, lambda l: 1.0),
    TableRow("lambda = 1", "sin(n rho) for odd n, cos(n rho) for even n", "n",
             "Neumann", "D+_1", True, (1.0,), _n, 0, RepKind.DISCRETE_PLUS, lambda l: 1.0,
             note="the omega = 0 constant is quotiented out"),
    TableRow("1/2 < lambda < 1", _DIR, "lambda + n", "Dirichlet", "D+_lambda", True,
             (0.55, 0.75, 0.9), _lam_plus_n, 0, RepKind.DISCRETE_PLUS, lambda l: l),
    TableRow("1/2 < lambda < 1", _NEU, "1 - lambda + n", "Neumann", "D+_(1-lambda)", True,
             (0.55, 0.75, 0.9), _one_minus_lam_plus_n, 0, RepKind.DISCRETE_PLUS,
             lambda l: 1.0 - l,
             note="lowest weight is 1 - lambda, so the label is D+_(1-lambda)"),
    TableRow("1/2 < lambda < 1", _MIX90, "n + 1/2", "mixed theta=pi/2", "--", False,
             (0.6, 0.75, 0.9), _half_plus_n, 0, RepKind.NO_LABEL, None),
    TableRow("1/2 < lambda < 1", _MIX0, "n + 1/2", "mixed theta=0", "--", False,
             (0.6, 0.75, 0.9), _half_plus_n, 0, RepKind.NO_LABEL, None),
    TableRow("lambda = 1/2", "cos^(1/2)(rho) P_n(sin rho)", "n + 1/2", "Dirichlet",
             "D+_(1/2)", True, (0.5,), _half_plus_n, 0, RepKind.MOCK_DISCRETE, lambda l: 0.5),
]


def _check_sample(row: TableRow, lam: float) -> Dict[str, object]:
    params = ExtensionParams(lam)
    bc = row.boundary_condition()
    expected = [row.omega_of(lam, n) ** 2 for n in range(row.first_n, row.first_n + N_CHECK)]
    hi = max(expected) + 1.0
    sp = find_spectrum(params, bc if params.has_extensions else None, (-1.0, hi),
                       tol=1e-12, n_points=801)
    found = sp.omega_sq[:N_CHECK]
    spectrum_ok = len(found) == N_CHECK and all(
        abs(abs(f) ** 0.5 - abs(e) ** 0.5) < OMEGA_TOL for f, e in zip(found, expected))
    label = classify_representation(params, bc)
    lam_hat = row.lambda_hat_of(lam) if row.lambda_hat_of else None
    label_ok = (label.kind is row.kind and label.unitary == row.unitary
                and (lam_hat is None or abs(label.lambda_hat - lam_hat) < 1e-12))
    return {"lambda": lam, "omega_sq": found, "expected_omega_sq": expected,
            "spectrum_ok": spectrum_ok, "label": label.to_json(), "symbol": label.symbol,
            "label_ok": label_ok}


def table1_report() -> Dict[str, object]:
    rows = []
    ok = True
    for row in TABLE1:
        samples = [_check_sample(row, lam) for lam in row.samples]
        row_ok = all(s["spectrum_ok"] and s["label_ok"] for s in samples)
        ok = ok and row_ok
        rows.append({
            "lambda_range": row.lambda_range,
            "mode_functions": row.mode_functions,
            "omega": row.omega,
            "bc": row.bc,
            "irrep": row.irrep,
            "unitary": row.unitary,
            "note": row.note,
            "jacobi_parameter": _A,
            "samples": samples,
            "checks_pass": row_ok,
        })
    return {"rows": rows, "all_checks_pass": ok}
