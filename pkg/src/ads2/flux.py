"""Energy flux through the conformal boundary for the improved stress tensor.

With F(rho) = ((1 - 2 beta) Psi' + beta tan(rho) Psi) Psi, the flux
condition asks F -> 0 at both ends. Near an end with x = cos(rho):

* 1/2 < lambda < 3/2, Psi = P x^{1-lambda} + A x^lambda + ...:
  F = sin(rho) [kappa P^2 x^{1-2 lambda} + (4 beta - 1) P A] + o(1),
  kappa = (3 - 2 lambda) beta - (1 - lambda).
* lambda = 1/2, Psi = x^{1/2} (2 L ln x + Q) + ...:
  F = sin(rho) [(2 beta - 1/2) u^2 - 2 (1 - 2 beta) L u] + o(1), u = 2 L ln x + Q.

Each coefficient of the asymptotic expansion is affine in beta, so the set of
flux-killing beta values is found by intersecting affine zero sets.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .boundary import (BoundaryTrace, ExtensionParams, Regime, SelfAdjointBC,
                       boundary_trace)

__all__ = [
    "Boundary",
    "FluxReport",
    "BetaSet",
    "flux_coefficients",
    "energy_flux",
    "flux_killing_beta",
    "beta_scan",
    "flux_invariance_equivalence",
    "conformal_beta",
]

FLUX_TOL = 1e-10


class Boundary(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def _boundary(b) -> Boundary:
    return b if isinstance(b, Boundary) else Boundary(str(b).lower())


def conformal_beta(lam: float) -> float:
    """beta = (1 - lambda) / (3 - 2 lambda)."""
    return (1.0 - lam) / (3.0 - 2.0 * lam)


def _phase_strip(trace: BoundaryTrace) -> BoundaryTrace:
    # real modes carry an arbitrary global phase; remove it so values are real
    arr = trace.as_array()
    k = int(np.argmax(np.abs(arr)))
    if abs(arr[k]) == 0:
        return trace
    return trace * (abs(arr[k]) / arr[k])


def flux_coefficients(params: ExtensionParams, trace: BoundaryTrace,
                      boundary) -> List[Tuple[str, complex, complex]]:
    """Asymptotic coefficients of F at one end as (order, a, b) with coefficient a + b beta.

    Orders are listed from the most singular down to the constant term. The
    overall sin(rho) = +-1 sign is included.
    """
    boundary = _boundary(boundary)
    params.require_extensions()
    sgn = 1.0 if boundary is Boundary.PLUS else -1.0
    lam = params.lam
    if params.regime is Regime.MIDDLE:
        if boundary is Boundary.PLUS:
            p, a = trace.psi_plus, -trace.dpsi_plus / (2 * lam - 1)
        else:
            p, a = trace.psi_minus, trace.dpsi_minus / (2 * lam - 1)
        pp, pa = p * p, p * a
        return [
            ("x^(1-2lambda)", sgn * -(1.0 - lam) * pp, sgn * (3.0 - 2.0 * lam) * pp),
            ("1", sgn * -pa, sgn * 4.0 * pa),
        ]
    if boundary is Boundary.PLUS:
        L, q = trace.psi_plus, trace.dpsi_plus / 2 - trace.psi_plus
    else:
        L, q = trace.psi_minus, -trace.dpsi_minus / 2 - trace.psi_minus
    # (2b - 1/2) u^2 - 2 (1 - 2b) L u with u = 2 L ln x + q
    ll, lq, qq = 4 * L * L, 4 * L * q, q * q
    return [
        ("ln^2 x", sgn * -0.5 * ll, sgn * 2.0 * ll),
        ("ln x", sgn * (-0.5 * lq - 4 * L * L), sgn * (2.0 * lq + 8 * L * L)),
        ("1", sgn * (-0.5 * qq - 2 * L * q), sgn * (2.0 * qq + 4 * L * q)),
    ]


@dataclass(frozen=True)
class FluxReport:
    """Leading non-vanishing coefficient of the flux at one end.

    ``value`` is the coefficient of the most singular order whose coefficient
    exceeds ``tol``; it is 0 when every order vanishes.
    """

    beta: float
    boundary: Boundary
    value: float
    vanishes: bool
    order: Optional[str] = None
    coefficients: Dict[str, float] = field(default_factory=dict)

    def to_json(self) -> Dict[str, object]:
        return {"beta": self.beta, "boundary": self.boundary.value, "value": self.value,
                "vanishes": self.vanishes, "order": self.order,
                "coefficients": dict(self.coefficients)}


def _mode_trace(params: ExtensionParams, c1: complex, c2: complex, omega: complex) -> BoundaryTrace:
    return _phase_strip(boundary_trace(params, c1, c2, omega))


def energy_flux(params: ExtensionParams, beta: float, c1: complex, c2: complex,
                omega: complex, boundary="plus", tol: float = FLUX_TOL) -> FluxReport:
    """Flux functional of the mode C1 Psi^(1) + C2 Psi^(2) at one end.

    The functional is bilinear in Psi (no conjugation). The global phase of
    the trace is removed first so that real modes give real values; scaling
    (C1, C2) by a real s scales the value by s^2.
    """
    boundary = _boundary(boundary)
    if not params.has_extensions:
        # Psi ~ cos^lambda with lambda >= 3/2: F -> 0
        return FluxReport(float(beta), boundary, 0.0, True, None, {})
    trace = _mode_trace(params, c1, c2, omega)
    coeffs = flux_coefficients(params, trace, boundary)
    values = {name: a + b * beta for name, a, b in coeffs}
    value, order = 0.0, None
    for name, _, _ in coeffs:
        v = values[name]
        if abs(v) >= tol:
            value, order = float(v.real), name
            break
    return FluxReport(float(beta), boundary, value, order is None, order,
                      {k: float(v.real) for k, v in values.items()})


@dataclass(frozen=True)
class BetaSet:
    """Set of beta killing the flux: everything, a single value or nothing."""

    kind: str  # "all", "point" or "empty"
    value: Optional[float] = None

    @property
    def nonempty(self) -> bool:
        return self.kind != "empty"

    def intersect(self, other: "BetaSet", tol: float = 1e-9) -> "BetaSet":
        if self.kind == "empty" or other.kind == "empty":
            return BetaSet("empty")
        if self.kind == "all":
            return other
        if other.kind == "all":
            return self
        if abs(self.value - other.value) <= tol * max(1.0, abs(self.value)):
            return self
        return BetaSet("empty")

    def to_json(self) -> Dict[str, object]:
        return {"kind": self.kind, "value": self.value}


def _affine_zero_set(a: complex, b: complex, scale: float, tol: float) -> BetaSet:
    if abs(b) <= tol * scale:
        return BetaSet("all") if abs(a) <= tol * scale else BetaSet("empty")
    beta = -a / b
    if abs(beta.imag) > 1e-8 * max(1.0, abs(beta)):
        return BetaSet("empty")
    return BetaSet("point", float(beta.real))


def flux_killing_beta(params: ExtensionParams, trace: BoundaryTrace,
                      tol: float = FLUX_TOL) -> BetaSet:
    """Values of beta making the flux vanish at both ends, by solving the affine conditions."""
    if not params.has_extensions:
        return BetaSet("all")
    trace = _phase_strip(trace)
    scale = max(trace.scale() ** 2, 1e-300)
    out = BetaSet("all")
    for bnd in (Boundary.PLUS, Boundary.MINUS):
        for _, a, b in flux_coefficients(params, trace, bnd):
            out = out.intersect(_affine_zero_set(a, b, scale, tol))
    return out


def beta_scan(params: ExtensionParams, trace: BoundaryTrace,
              betas: Sequence[float]) -> Tuple[float, float]:
    """(beta, residual) minimizing the largest relative flux coefficient over a beta grid."""
    trace = _phase_strip(trace)
    scale = max(trace.scale() ** 2, 1e-300)
    betas = np.asarray(betas, dtype=float)
    worst = np.zeros_like(betas)
    for bnd in (Boundary.PLUS, Boundary.MINUS):
        for _, a, b in flux_coefficients(params, trace, bnd):
            worst = np.maximum(worst, np.abs(a + b * betas) / scale)
    k = int(np.argmin(worst))
    return float(betas[k]), float(worst[k])


def flux_invariance_equivalence(params: ExtensionParams, sample_bcs: Sequence[SelfAdjointBC],
                                n_modes: int = 3) -> List[Dict[str, object]]:
    """For each bc: does one beta kill the flux of its lowest modes, and is bc invariant?

    Each entry holds ``flux_ok``, ``invariant``, ``beta`` and ``equivalent``
    (the two verdicts coincide).
    """
    from .symmetry import is_invariant_bc

    report = []
    for bc in sample_bcs:
        # the certificate already holds the traces of the lowest eigenmodes
        invariant, cert = is_invariant_bc(params, bc, n_modes=n_modes)
        betas = BetaSet("all")
        for tr in cert.traces:
            betas = betas.intersect(flux_killing_beta(params, tr))
        report.append({
            "bc": bc.label,
            "u": [[complex(z) for z in row] for row in bc.u],
            "flux_ok": betas.nonempty,
            "beta": betas.to_json(),
            "invariant": invariant,
            "equivalent": betas.nonempty == invariant,
        })
    return report
