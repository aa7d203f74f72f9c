"""Deficiency subspaces and the map from deficiency-space unitaries to boundary matrices."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .boundary import (ExtensionParams, SelfAdjointBC, UnitarityError,
                       boundary_trace)
from .modes import Point, l2_inner_product, spatial_solution_at

__all__ = [
    "DEFICIENCY_OMEGA",
    "DeficiencyFunction",
    "DeficiencyPair",
    "IdentityViolation",
    "SingularMapError",
    "deficiency_indices",
    "deficiency_functions",
    "trace_matrices",
    "map_um_to_bc",
    "deficiency_element_trace",
]

# omega^2 = 2i
DEFICIENCY_OMEGA = complex(1.0, 1.0)
IDENTITY_TOL = 1e-8


class IdentityViolation(ArithmeticError):
    """The trace matrices fail B conj(A) - A conj(B) = 2i I."""


class SingularMapError(ArithmeticError):
    """V1 is numerically singular; cannot happen for unitary input in exact arithmetic."""


@dataclass(frozen=True)
class DeficiencyFunction:
    """Phi = Psi^(j)(omega = 1+i) / norm, even for j = 1 and odd for j = 2."""

    lam: float
    index: int
    norm: float

    @property
    def parity(self) -> str:
        return "even" if self.index == 1 else "odd"

    @property
    def coefficients(self) -> Tuple[complex, complex]:
        if self.index == 1:
            return 1.0 / self.norm, 0.0
        return 0.0, 1.0 / self.norm

    def at(self, p: Point) -> complex:
        c1, c2 = self.coefficients
        return spatial_solution_at(ExtensionParams(self.lam), DEFICIENCY_OMEGA, c1, c2, p)


@dataclass(frozen=True)
class DeficiencyPair:
    phi1: DeficiencyFunction
    phi2: DeficiencyFunction

    @property
    def norms(self) -> Tuple[float, float]:
        return self.phi1.norm, self.phi2.norm


def deficiency_indices(params: ExtensionParams) -> Tuple[int, int]:
    """(n+, n-): (2, 2) when both ends are limit circle, (0, 0) otherwise."""
    return (2, 2) if params.has_extensions else (0, 0)


@functools.lru_cache(maxsize=64)
def _deficiency_cached(lam: float) -> DeficiencyPair:
    params = ExtensionParams(lam)
    norms = []
    for c1, c2 in ((1.0, 0.0), (0.0, 1.0)):
        f = functools.partial(spatial_solution_at, params, DEFICIENCY_OMEGA, c1, c2)
        sq = l2_inner_product(f, f, tol=1e-12).real
        norms.append(math.sqrt(sq))
    return DeficiencyPair(DeficiencyFunction(lam, 1, norms[0]),
                          DeficiencyFunction(lam, 2, norms[1]))


def deficiency_functions(params: ExtensionParams) -> DeficiencyPair:
    """Normalized solutions of A* Phi = 2i Phi (cached per lambda)."""
    params.require_extensions()
    return _deficiency_cached(float(params.lam))


@functools.lru_cache(maxsize=64)
def _trace_matrices_cached(lam: float) -> Tuple[np.ndarray, np.ndarray]:
    params = ExtensionParams(lam)
    pair = _deficiency_cached(lam)
    t1 = boundary_trace(params, *pair.phi1.coefficients, DEFICIENCY_OMEGA)
    t2 = boundary_trace(params, *pair.phi2.coefficients, DEFICIENCY_OMEGA)
    a = np.diag([t1.dpsi_plus, t2.dpsi_plus]).astype(complex)
    b = np.diag([t1.psi_plus, t2.psi_plus]).astype(complex)
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def trace_matrices(params: ExtensionParams, check: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonal trace matrices (A, B) of the deficiency functions at +pi/2.

    A holds D Phi~ and B holds Phi~. Raises IdentityViolation when
    B conj(A) - A conj(B) differs from 2i I by more than 1e-8.
    """
    params.require_extensions()
    a, b = _trace_matrices_cached(float(params.lam))
    if check:
        defect = np.max(np.abs(b @ a.conj() - a @ b.conj() - 2j * np.eye(2)))
        if defect > IDENTITY_TOL:
            raise IdentityViolation(f"2i identity violated by {defect:.3g}")
    return a, b


_S = np.array([[1.0, -1.0], [1.0, 1.0]])
_S_INV = 0.5 * np.array([[1.0, 1.0], [-1.0, 1.0]])


def map_um_to_bc(u_m: np.ndarray, params: ExtensionParams) -> SelfAdjointBC:
    """Boundary matrix of the extension whose domain adds Phi_j + sum_k u_jk conj(Phi_k)."""
    u_m = np.asarray(u_m, dtype=complex)
    if u_m.shape != (2, 2):
        raise ValueError("u_m must be 2x2")
    if np.max(np.abs(u_m.conj().T @ u_m - np.eye(2))) > 1e-10:
        raise UnitarityError("u_m is not unitary")
    a, b = trace_matrices(params)
    ub = u_m.conj()
    v1 = b.conj() - 1j * a.conj() + ub @ (b - 1j * a)
    v2 = b.conj() + 1j * a.conj() + ub @ (b + 1j * a)
    if np.linalg.cond(v1) > 1e12:
        raise SingularMapError("V1 is numerically singular")
    u_tilde = -np.linalg.solve(v1, v2)
    u = _S_INV @ u_tilde @ _S
    return SelfAdjointBC(u, label="from-deficiency", meta={"u_m": u_m.tolist()})


def deficiency_element_trace(params: ExtensionParams, u_m: np.ndarray,
                             amplitudes: Tuple[complex, complex]):
    """Boundary trace of sum_j a_j (Phi_j + sum_k u_jk conj(Phi_k))."""
    pair = deficiency_functions(params)
    t = [boundary_trace(params, *f.coefficients, DEFICIENCY_OMEGA) for f in (pair.phi1, pair.phi2)]
    total = t[0] * 0.0
    for j in range(2):
        elem = t[j]
        for k in range(2):
            elem = elem + t[k].conj() * u_m[j, k]
        total = total + elem * amplitudes[j]
    return total
