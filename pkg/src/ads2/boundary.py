"""Boundary-condition algebra for the operator -d^2/drho^2 + lambda(lambda-1)/cos^2 rho.

Regularized endpoint traces of solutions, the U(2) family of self-adjoint
boundary conditions and the Robin, inverse-Robin and Pauli parametrizations.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .specfun import digamma, gamma, rgamma

__all__ = [
    "Regime",
    "RegimeError",
    "UnitarityError",
    "ExtensionParams",
    "BoundaryTrace",
    "SelfAdjointBC",
    "BCClassification",
    "connection_coefficients",
    "log_coefficients",
    "boundary_trace",
    "apply_bc",
    "classify_bc",
    "boundary_form",
    "bc_from_json",
    "bc_to_json",
]

UNITARY_TOL = 1e-12
REPROJECT_TOL = 1e-8
_HALF_INT_TOL = 1e-12


class RegimeError(ValueError):
    """Operation is not defined for this range of lambda."""


class UnitarityError(ValueError):
    """Matrix is too far from unitary to be re-projected."""


class Regime(enum.Enum):
    LARGE = "large"                      # lambda >= 3/2, not half-integer
    HALF_INTEGER_LARGE = "half_integer_large"  # lambda = k + 1/2, k >= 1
    MIDDLE = "middle"                    # 1/2 < lambda < 3/2
    EDGE = "edge"                        # lambda = 1/2


@dataclass(frozen=True)
class ExtensionParams:
    """Mass parameter lambda >= 1/2 with M^2 = lambda (lambda - 1)."""

    lam: float

    def __post_init__(self) -> None:
        if not (self.lam >= 0.5 - _HALF_INT_TOL):
            raise ValueError("lambda must be >= 1/2")

    @property
    def mass_sq(self) -> float:
        return self.lam * (self.lam - 1.0)

    @property
    def half_integer_k(self) -> Optional[int]:
        """k when lambda = k + 1/2, else None."""
        k = round(self.lam - 0.5)
        if abs(self.lam - 0.5 - k) <= _HALF_INT_TOL:
            return int(k)
        return None

    @property
    def regime(self) -> Regime:
        k = self.half_integer_k
        if k == 0:
            return Regime.EDGE
        if k is not None:
            return Regime.HALF_INTEGER_LARGE
        if self.lam >= 1.5:
            return Regime.LARGE
        return Regime.MIDDLE

    @property
    def has_extensions(self) -> bool:
        return self.regime in (Regime.MIDDLE, Regime.EDGE)

    def require_extensions(self) -> None:
        if not self.has_extensions:
            raise RegimeError(f"lambda = {self.lam} has a unique extension; no traces")


@dataclass(frozen=True)
class BoundaryTrace:
    """Regularized boundary data (Psi~(-pi/2), Psi~(pi/2), DPsi~(-pi/2), DPsi~(pi/2))."""

    psi_minus: complex
    psi_plus: complex
    dpsi_minus: complex
    dpsi_plus: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.psi_minus, self.psi_plus, self.dpsi_minus, self.dpsi_plus],
                        dtype=complex)

    def scale(self) -> float:
        return float(np.max(np.abs(self.as_array())))

    def __add__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        return BoundaryTrace(*(self.as_array() + other.as_array()))

    def __mul__(self, s: complex) -> "BoundaryTrace":
        return BoundaryTrace(*(s * self.as_array()))

    __rmul__ = __mul__

    def conj(self) -> "BoundaryTrace":
        return BoundaryTrace(*np.conj(self.as_array()))


# connection coefficients -----------------------------------------------------

def connection_coefficients(params: ExtensionParams, omega: complex
                            ) -> Tuple[complex, complex, complex, complex]:
    """Coefficients of the cos^lambda and cos^{1-lambda} branches near the ends.

    For lambda != k + 1/2 returns (A1, B1, A2, B2). For lambda = k + 1/2
    returns (H1, B1, H2, B2) of the logarithmic expansion; B1 = B2 = 0 when
    k = 0 because the finite sum is empty there. Poles of Gamma in a
    denominator give exact zeros through the reciprocal gamma function.
    """
    if params.half_integer_k is not None:
        return log_coefficients(params.half_integer_k, omega)
    lam = params.lam
    w = complex(omega)
    g_half, g_3half = math.sqrt(math.pi), 0.5 * math.sqrt(math.pi)
    ga = gamma(0.5 - lam)
    gb = gamma(lam - 0.5)
    a1 = g_half * ga * rgamma((1 - lam + w) / 2) * rgamma((1 - lam - w) / 2)
    b1 = g_half * gb * rgamma((lam + w) / 2) * rgamma((lam - w) / 2)
    a2 = g_3half * ga * rgamma((2 - lam + w) / 2) * rgamma((2 - lam - w) / 2)
    b2 = g_3half * gb * rgamma((1 + lam + w) / 2) * rgamma((1 + lam - w) / 2)
    return a1, b1, a2, b2


def log_coefficients(k: int, omega: complex) -> Tuple[complex, complex, complex, complex]:
    """(H1, B1, H2, B2) of the logarithmic expansion at lambda = k + 1/2."""
    w = complex(omega)
    g_half, g_3half = math.sqrt(math.pi), 0.5 * math.sqrt(math.pi)
    sign = (-1) ** (k + 1)
    h1 = sign * g_half * rgamma((-k + w) / 2 + 0.25) * rgamma((-k - w) / 2 + 0.25)
    h2 = sign * g_3half * rgamma((-k + w) / 2 + 0.75) * rgamma((-k - w) / 2 + 0.75)
    if k == 0:
        return h1, 0j, h2, 0j
    b1 = gamma(k) * g_half * rgamma((k + w) / 2 + 0.25) * rgamma((k - w) / 2 + 0.25)
    b2 = gamma(k) * g_3half * rgamma((k + w) / 2 + 0.75) * rgamma((k - w) / 2 + 0.75)
    return h1, b1, h2, b2


def _rgamma_digamma(z: complex) -> complex:
    """1/Gamma(z) * psi(z), continuous through the poles of Gamma."""
    z = complex(z)
    if z.real >= 0.5:
        return rgamma(z) * digamma(z)
    # reflection keeps the product finite at non-positive integers
    s = cmath.sin(math.pi * z)
    c = cmath.cos(math.pi * z)
    return (s * digamma(1.0 - z) - math.pi * c) * gamma(1.0 - z) / math.pi


def log_h_products(k: int, omega: complex, j: int = 0) -> Tuple[complex, complex]:
    """H1 h1(j) and H2 h2(j) evaluated as entire functions of omega."""
    w = complex(omega)
    out = []
    for q, g in ((0.25, math.sqrt(math.pi)), (0.75, 0.5 * math.sqrt(math.pi))):
        sign = (-1) ** (k + 1)
        # H = sign g / (Gamma(x1) Gamma(x2)); h = psi(y1) + psi(y2) - psi(j+1) - psi(j+k+1)
        x1, x2 = (-k + w) / 2 + q, (-k - w) / 2 + q
        y1, y2 = (k + w) / 2 + q + j, (k - w) / 2 + q + j
        const = digamma(j + 1.0) + digamma(j + k + 1.0)
        if k == 0 and j == 0:
            # x_i = y_i, so the pole cancellation is local to each factor
            val = _rgamma_digamma(x1) * rgamma(x2) + rgamma(x1) * _rgamma_digamma(x2) \
                - const * rgamma(x1) * rgamma(x2)
        else:
            val = rgamma(x1) * rgamma(x2) * (digamma(y1) + digamma(y2) - const)
        out.append(sign * g * val)
    return out[0], out[1]


# traces ------------------------------------------------------------------------

def boundary_trace(params: ExtensionParams, c1: complex, c2: complex,
                   omega: complex) -> BoundaryTrace:
    """Closed-form boundary trace of C1 Psi^(1) + C2 Psi^(2) at frequency omega.

    The trace derivative is d/drho at both ends, as in the definition of
    DPsi~; at +pi/2 this gives -(2 lambda - 1) times the cos^lambda
    coefficient and at -pi/2 the opposite sign.
    """
    params.require_extensions()
    c1, c2 = complex(c1), complex(c2)
    if params.regime is Regime.MIDDLE:
        a1, b1, a2, b2 = connection_coefficients(params, omega)
        s = 2.0 * params.lam - 1.0
        return BoundaryTrace(
            psi_minus=c1 * b1 - c2 * b2,
            psi_plus=c1 * b1 + c2 * b2,
            dpsi_minus=s * (c1 * a1 - c2 * a2),
            dpsi_plus=-s * (c1 * a1 + c2 * a2),
        )
    h1, _, h2, _ = log_coefficients(0, omega)
    hh1, hh2 = log_h_products(0, omega)
    lp, lm = c1 * h1 + c2 * h2, c1 * h1 - c2 * h2
    qp, qm = c1 * hh1 + c2 * hh2, c1 * hh1 - c2 * hh2
    return BoundaryTrace(
        psi_minus=lm,
        psi_plus=lp,
        dpsi_minus=-2.0 * (lm + qm),
        dpsi_plus=2.0 * (lp + qp),
    )


def trace_matrix(params: ExtensionParams, omega: complex) -> np.ndarray:
    """Linear map (C1, C2) -> (psi_plus, psi_minus, dpsi_plus, dpsi_minus)."""
    e1 = boundary_trace(params, 1.0, 0.0, omega)
    e2 = boundary_trace(params, 0.0, 1.0, omega)
    return np.array([
        [e1.psi_plus, e2.psi_plus],
        [e1.psi_minus, e2.psi_minus],
        [e1.dpsi_plus, e2.dpsi_plus],
        [e1.dpsi_minus, e2.dpsi_minus],
    ], dtype=complex)


def boundary_form(t1: BoundaryTrace, t2: BoundaryTrace) -> complex:
    """[conj(P1) D2 - conj(D1) P2] at +pi/2 minus the same at -pi/2."""
    plus = np.conj(t1.psi_plus) * t2.dpsi_plus - np.conj(t1.dpsi_plus) * t2.psi_plus
    minus = np.conj(t1.psi_minus) * t2.dpsi_minus - np.conj(t1.dpsi_minus) * t2.psi_minus
    return complex(plus - minus)


# self-adjoint boundary conditions -----------------------------------------------

def _polar_unitary(m: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def _unitarity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(2))))


NAMED = ("dirichlet", "neumann", "mixed0", "mixed90")


@dataclass(frozen=True)
class SelfAdjointBC:
    """Boundary condition (I - U) D = i (I + U) (Psi~+, -Psi~-) for unitary U.

    Use the classmethod constructors; direct construction validates and, if
    the matrix is within ``REPROJECT_TOL`` of unitary, re-projects it.
    """

    u: np.ndarray
    label: str = "generic"
    meta: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        m = np.asarray(self.u, dtype=complex).reshape(2, 2)
        defect = _unitarity_defect(m)
        if defect > UNITARY_TOL:
            if defect > REPROJECT_TOL:
                raise UnitarityError(f"matrix is not unitary (defect {defect:.2e})")
            m = _polar_unitary(m)
        m.setflags(write=False)
        object.__setattr__(self, "u", m)

    # named constructors
    @classmethod
    def dirichlet(cls) -> "SelfAdjointBC":
        return cls(np.eye(2), "dirichlet")

    @classmethod
    def neumann(cls) -> "SelfAdjointBC":
        return cls(-np.eye(2), "neumann")

    @classmethod
    def mixed0(cls) -> "SelfAdjointBC":
        """theta = 0: Psi~(pi/2) = 0 and DPsi~(-pi/2) = 0."""
        return cls(np.diag([1.0, -1.0]), "mixed0", {"theta": 0.0, "phi": 0.0})

    @classmethod
    def mixed90(cls) -> "SelfAdjointBC":
        """theta = pi/2: Psi~(-pi/2) = 0 and DPsi~(pi/2) = 0."""
        return cls(np.diag([-1.0, 1.0]), "mixed90", {"theta": math.pi / 2, "phi": 0.0})

    @classmethod
    def named(cls, name: str) -> "SelfAdjointBC":
        name = name.lower()
        if name not in NAMED:
            raise ValueError(f"unknown boundary condition {name!r}")
        return getattr(cls, name)()

    @classmethod
    def robin(cls, alpha: float, beta: complex = 0.0, gamma_: float = 0.0) -> "SelfAdjointBC":
        """DPsi~(pi/2) = alpha Psi~(pi/2) - beta Psi~(-pi/2),
        DPsi~(-pi/2) = conj(beta) Psi~(pi/2) + gamma Psi~(-pi/2)."""
        h = np.array([[alpha, beta], [np.conj(beta), -gamma_]], dtype=complex)
        u = (h - 1j * np.eye(2)) @ np.linalg.inv(h + 1j * np.eye(2))
        return cls(u, "robin", {"alpha": float(alpha), "beta": complex(beta), "gamma": float(gamma_)})

    @classmethod
    def inverse_robin(cls, a: float, b: complex = 0.0, c: float = 0.0) -> "SelfAdjointBC":
        """Psi~(pi/2) = a DPsi~(pi/2) - b DPsi~(-pi/2),
        Psi~(-pi/2) = conj(b) DPsi~(pi/2) + c DPsi~(-pi/2)."""
        k = np.array([[a, -b], [-np.conj(b), -c]], dtype=complex)
        u = (np.eye(2) - 1j * k) @ np.linalg.inv(np.eye(2) + 1j * k)
        return cls(u, "inverse_robin", {"a": float(a), "b": complex(b), "c": float(c)})

    @classmethod
    def symmetric_robin(cls, alpha: float) -> "SelfAdjointBC":
        """Psi~(+-pi/2) = +-alpha DPsi~(+-pi/2); the inverse-Robin form with a = alpha, c = -alpha."""
        bc = cls.inverse_robin(alpha, 0.0, -alpha)
        return cls(bc.u, "symmetric_robin", {"alpha": float(alpha)})

    @classmethod
    def pauli(cls, theta: float, phi: float = 0.0) -> "SelfAdjointBC":
        e = cmath.exp(1j * phi)
        u = np.array([[math.cos(2 * theta), e * math.sin(2 * theta)],
                      [np.conj(e) * math.sin(2 * theta), -math.cos(2 * theta)]], dtype=complex)
        return cls(u, "pauli", {"theta": float(theta), "phi": float(phi)})

    @classmethod
    def from_matrix(cls, u: np.ndarray) -> "SelfAdjointBC":
        return cls(np.asarray(u, dtype=complex), "generic")

    @property
    def is_named(self) -> bool:
        return self.label in NAMED


def apply_bc(bc: SelfAdjointBC, trace: BoundaryTrace) -> np.ndarray:
    """Residual (I - U)(D+, D-) - i (I + U)(P+, -P-); zero iff the trace satisfies bc."""
    u = bc.u
    eye = np.eye(2)
    d = np.array([trace.dpsi_plus, trace.dpsi_minus], dtype=complex)
    p = np.array([trace.psi_plus, -trace.psi_minus], dtype=complex)
    return (eye - u) @ d - 1j * (eye + u) @ p


@dataclass(frozen=True)
class BCClassification:
    form: str                  # "robin", "inverse_robin" or "pauli"
    params: Dict[str, Any]
    special: Optional[str]     # dirichlet / neumann / mixed0 / mixed90 / None


_SING_TOL = 1e-10


def classify_bc(bc: SelfAdjointBC) -> BCClassification:
    """Express bc in the first applicable of the Robin, inverse-Robin, Pauli forms."""
    u = bc.u
    eye = np.eye(2)
    special = None
    if np.max(np.abs(u - eye)) < 1e-10:
        special = "dirichlet"
    elif np.max(np.abs(u + eye)) < 1e-10:
        special = "neumann"
    elif np.max(np.abs(u - np.diag([1.0, -1.0]))) < 1e-10:
        special = "mixed0"
    elif np.max(np.abs(u - np.diag([-1.0, 1.0]))) < 1e-10:
        special = "mixed90"
    if abs(np.linalg.det(eye - u)) > _SING_TOL:
        h = 1j * np.linalg.inv(eye - u) @ (eye + u)
        return BCClassification("robin", {
            "alpha": float(h[0, 0].real),
            "beta": complex(h[0, 1]),
            "gamma": float(-h[1, 1].real),
        }, special)
    if abs(np.linalg.det(eye + u)) > _SING_TOL:
        k = -1j * np.linalg.inv(eye + u) @ (eye - u)
        return BCClassification("inverse_robin", {
            "a": float(k[0, 0].real),
            "b": complex(-k[0, 1]),
            "c": float(-k[1, 1].real),
        }, special)
    c2t = float(u[0, 0].real)
    s2t = float(abs(u[0, 1]))
    theta = 0.5 * math.atan2(s2t, c2t)
    phi = float(cmath.phase(u[0, 1])) if s2t > 1e-14 else 0.0
    return BCClassification("pauli", {"theta": theta, "phi": phi}, special)


def hermitian_robin_matrix(bc: SelfAdjointBC) -> np.ndarray:
    """i (I - U)^{-1} (I + U); Hermitian when it exists."""
    eye = np.eye(2)
    return 1j * np.linalg.inv(eye - bc.u) @ (eye + bc.u)


# serialization -----------------------------------------------------------------

def bc_to_json(bc: SelfAdjointBC) -> Dict[str, Any]:
    if bc.is_named:
        return {"named": bc.label}
    if bc.label == "robin":
        m = bc.meta
        return {"robin": {"alpha": m["alpha"], "beta_re": m["beta"].real,
                          "beta_im": m["beta"].imag, "gamma": m["gamma"]}}
    if bc.label == "inverse_robin":
        m = bc.meta
        return {"inverse_robin": {"a": m["a"], "b_re": m["b"].real,
                                  "b_im": m["b"].imag, "c": m["c"]}}
    if bc.label == "symmetric_robin":
        return {"symmetric_robin": {"alpha": bc.meta["alpha"]}}
    if bc.label == "pauli":
        return {"pauli": {"theta": bc.meta["theta"], "phi": bc.meta["phi"]}}
    return {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in bc.u]}


def bc_from_json(obj: Dict[str, Any]) -> SelfAdjointBC:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError("boundary condition JSON must have exactly one key")
    (key, val), = obj.items()
    if key == "named":
        return SelfAdjointBC.named(str(val))
    if key == "matrix":
        arr = np.array(val, dtype=float)
        if arr.shape != (2, 2, 2):
            raise ValueError("matrix must be [[re,im] x 2] x 2")
        return SelfAdjointBC.from_matrix(arr[..., 0] + 1j * arr[..., 1])
    if key == "robin":
        return SelfAdjointBC.robin(float(val["alpha"]),
                                   complex(float(val.get("beta_re", 0.0)), float(val.get("beta_im", 0.0))),
                                   float(val.get("gamma", 0.0)))
    if key == "inverse_robin":
        return SelfAdjointBC.inverse_robin(float(val["a"]),
                                           complex(float(val.get("b_re", 0.0)), float(val.get("b_im", 0.0))),
                                           float(val.get("c", 0.0)))
    if key == "symmetric_robin":
        return SelfAdjointBC.symmetric_robin(float(val["alpha"]))
    if key == "pauli":
        return SelfAdjointBC.pauli(float(val["theta"]), float(val.get("phi", 0.0)))
    raise ValueError(f"unknown boundary condition key {key!r}")
