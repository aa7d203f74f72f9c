"""Solutions of the spatial equation and normalized positive-frequency modes.

A point of the strip is carried around as ``(s, c, 1+s, 1-s)`` with
``s = sin rho`` and ``c = cos rho``; near an endpoint these are computed from
the endpoint distance so the ``c^{1-lambda}`` and ``(1 +- sin rho)`` factors
keep full relative precision.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, Tuple

from .boundary import ExtensionParams, Regime, connection_coefficients
from .quadrature import integrate_strip
from .specfun import (digamma, gamma, hyp2f1_series, jacobi_p, pochhammer,
                      rgamma)
from .boundary import _rgamma_digamma

__all__ = [
    "Family",
    "ModeFunction",
    "Point",
    "point_from_rho",
    "point_from_endpoint",
    "spatial_solution",
    "spatial_solution_at",
    "make_mode",
    "normalization_constant",
    "mode_profile",
    "mode_profile_derivative",
    "mode_function",
    "kg_inner_product",
    "l2_inner_product",
]


@dataclass(frozen=True)
class Point:
    """sin rho, cos rho, 1 + sin rho, 1 - sin rho, rho, and log(1 +- sin rho)."""

    s: float
    c: float
    ops: float
    oms: float
    rho: float
    log_ops: float
    log_oms: float

    def reflect(self) -> "Point":
        return Point(-self.s, self.c, self.oms, self.ops, -self.rho,
                     self.log_oms, self.log_ops)


def point_from_rho(rho: float) -> Point:
    if not (-0.5 * math.pi < rho < 0.5 * math.pi):
        raise ValueError("rho must lie strictly inside (-pi/2, pi/2)")
    s, c = math.sin(rho), math.cos(rho)
    half = 0.5 * rho + 0.25 * math.pi
    ops = 2.0 * math.sin(half) ** 2
    oms = 2.0 * math.cos(half) ** 2
    return Point(s, c, ops, oms, rho,
                 math.log(2.0) + 2.0 * math.log(math.sin(half)),
                 math.log(2.0) + 2.0 * math.log(math.cos(half)))


def point_from_endpoint(rt: float, side: int) -> Point:
    """Point at distance ``rt`` from the endpoint ``side * pi/2``."""
    c = math.sin(rt)
    near = 2.0 * math.sin(0.5 * rt) ** 2      # 1 - cos(rt)
    log_near = math.log(2.0) + 2.0 * math.log(math.sin(0.5 * rt))
    far = 2.0 - near
    log_far = math.log(far)
    rho = side * (0.5 * math.pi - rt)
    if side > 0:
        return Point(math.cos(rt), c, far, near, rho, log_far, log_near)
    return Point(-math.cos(rt), c, near, far, rho, log_near, log_far)


# general solutions ------------------------------------------------------------

def _log_branch(k: int, omega: complex, z: float, q: float, lz: float) -> Tuple[complex, complex]:
    """H-series and B-sum of the logarithmic expansion at lambda = k + 1/2.

    Returns (S_H, S_B) so that the solution is
    H * c^{k+1/2} * S_H + B * c^{-k+1/2} * S_B with the H factor already
    folded into S_H (the products H h(j) are evaluated as entire functions).
    """
    w = complex(omega)
    g = math.sqrt(math.pi) if q == 0.25 else 0.5 * math.sqrt(math.pi)
    sign = (-1) ** (k + 1)
    x1, x2 = (-k + w) / 2 + q, (-k - w) / 2 + q
    a, b = (k + w) / 2 + q, (k - w) / 2 + q
    rx1, rx2 = rgamma(x1), rgamma(x2)
    h = sign * g * rx1 * rx2
    total = 0j
    coef = 1.0 / math.factorial(k) + 0j      # (a)_j (b)_j / (j! (j+k)!)
    small = 0
    for j in range(2000):
        y1, y2 = a + j, b + j
        const = digamma(j + 1.0) + digamma(j + k + 1.0)
        if y1.real < 0.5 or y2.real < 0.5:
            t1 = pochhammer(x1, k + j) * _rgamma_digamma(y1) * rx2 if y1.real < 0.5 \
                else rx1 * rx2 * digamma(y1)
            t2 = pochhammer(x2, k + j) * _rgamma_digamma(y2) * rx1 if y2.real < 0.5 \
                else rx1 * rx2 * digamma(y2)
            hh = sign * g * (t1 + t2 - const * rx1 * rx2)
        else:
            hh = h * (digamma(y1) + digamma(y2) - const)
        inc = coef * (h * lz + hh)
        total += inc
        if abs(inc) <= 1e-17 * abs(total) and j > 2:
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        coef *= (a + j) * (b + j) / ((j + 1) * (j + k + 1)) * z
    sb = 0j
    if k > 0:
        t = 1.0 + 0j
        for j in range(k):
            sb += t
            if j == k - 1:
                break
            t *= ((-k + w) / 2 + q + j) * ((-k - w) / 2 + q + j) / ((j + 1) * (1 - k + j)) * z
    return total, sb


def _solutions(params: ExtensionParams, omega: complex, p: Point) -> Tuple[complex, complex]:
    """(Psi^(1), Psi^(2)) at the point p."""
    lam = params.lam
    w = complex(omega)
    s, c = p.s, p.c
    if s * s <= 0.5:
        z = s * s
        f1 = hyp2f1_series((lam + w) / 2, (lam - w) / 2, 0.5, z)
        f2 = hyp2f1_series((1 + lam + w) / 2, (1 + lam - w) / 2, 1.5, z)
        cl = c ** lam
        return cl * f1, s * cl * f2
    z = c * c
    k = params.half_integer_k
    if k is not None:
        _, b1, _, b2 = connection_coefficients(params, w)
        sh1, sb1 = _log_branch(k, w, z, 0.25, 2.0 * math.log(c))
        sh2, sb2 = _log_branch(k, w, z, 0.75, 2.0 * math.log(c))
        psi1 = c ** (k + 0.5) * sh1
        psi2 = c ** (k + 0.5) * sh2
        if k > 0:
            psi1 += b1 * c ** (0.5 - k) * sb1
            psi2 += b2 * c ** (0.5 - k) * sb2
        return psi1, s * psi2
    a1, b1, a2, b2 = connection_coefficients(params, w)
    cl, cm = c ** lam, c ** (1.0 - lam)
    psi1 = 0j
    psi2 = 0j
    if a1 != 0:
        psi1 += cl * a1 * hyp2f1_series((lam + w) / 2, (lam - w) / 2, 0.5 + lam, z)
    if b1 != 0:
        psi1 += cm * b1 * hyp2f1_series((1 - lam + w) / 2, (1 - lam - w) / 2, 1.5 - lam, z)
    if a2 != 0:
        psi2 += cl * a2 * hyp2f1_series((1 + lam + w) / 2, (1 + lam - w) / 2, 0.5 + lam, z)
    if b2 != 0:
        psi2 += cm * b2 * hyp2f1_series((2 - lam + w) / 2, (2 - lam - w) / 2, 1.5 - lam, z)
    return psi1, s * psi2


def spatial_solution_at(params: ExtensionParams, omega: complex, c1: complex,
                        c2: complex, p: Point) -> complex:
    """C1 Psi^(1) + C2 Psi^(2) at a prepared point."""
    psi1, psi2 = _solutions(params, omega, p)
    return complex(c1) * psi1 + complex(c2) * psi2


def spatial_solution(params: ExtensionParams, omega: complex, c1: complex,
                     c2: complex, rho: float) -> complex:
    """C1 Psi^(1) + C2 Psi^(2) at rho in (-pi/2, pi/2).

    The sin^2 rho series is used for |sin rho| <= 1/sqrt 2 and the cos^2 rho
    connection form beyond it.
    """
    return spatial_solution_at(params, omega, c1, c2, point_from_rho(rho))


def solution_near_boundary_form(params: ExtensionParams, omega: complex, c1: complex,
                                c2: complex, p: Point) -> complex:
    """Evaluate with the cos^2 rho connection form regardless of |sin rho|."""
    lam = params.lam
    w = complex(omega)
    z = p.c * p.c
    if params.half_integer_k is not None:
        raise ValueError("connection form check is for generic lambda")
    a1, b1, a2, b2 = connection_coefficients(params, w)
    from .specfun import hyp2f1
    cl, cm = p.c ** lam, p.c ** (1.0 - lam)
    psi1 = cl * a1 * hyp2f1((lam + w) / 2, (lam - w) / 2, 0.5 + lam, z) \
        + cm * b1 * hyp2f1((1 - lam + w) / 2, (1 - lam - w) / 2, 1.5 - lam, z)
    psi2 = cl * a2 * hyp2f1((1 + lam + w) / 2, (1 + lam - w) / 2, 0.5 + lam, z) \
        + cm * b2 * hyp2f1((2 - lam + w) / 2, (2 - lam - w) / 2, 1.5 - lam, z)
    return complex(c1) * psi1 + complex(c2) * p.s * psi2


# mode families ----------------------------------------------------------------

class Family(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    LAMBDA1_DIRICHLET = "L1D"
    LAMBDA1_NEUMANN = "L1N"


@dataclass(frozen=True)
class ModeFunction:
    """Positive-frequency mode N * profile(rho) * exp(-i omega t).

    ``zero_sector`` marks the omega = 0 constant of the lambda = 1 Neumann
    family, which is kept only as a quotient representative.
    """

    family: Family
    lam: float
    n: int
    omega: float
    norm: float
    zero_sector: bool = False

    @property
    def params(self) -> ExtensionParams:
        return ExtensionParams(self.lam)


def family_omega(family: Family, lam: float, n: int) -> float:
    if family is Family.I:
        return lam + n
    if family is Family.II:
        return abs(1.0 - lam) if n == 0 else 1.0 - lam + n
    if family in (Family.III, Family.IV, Family.V):
        return n + 0.5
    return float(n)


def normalization_constant(family: Family, lam: float, n: int) -> float:
    """Closed-form Klein-Gordon normalization constant."""
    if family is Family.I:
        return math.sqrt(math.factorial(n) * gamma(2 * lam + n).real) / (
            2.0 ** lam * gamma(lam + n + 0.5).real)
    if family is Family.II:
        return math.sqrt(math.factorial(n) * abs(gamma(2 - 2 * lam + n).real)) / (
            2.0 ** (1 - lam) * gamma(1.5 - lam + n).real)
    if family in (Family.III, Family.IV):
        return math.factorial(n) / math.sqrt(
            2.0 * gamma(lam + n + 0.5).real * gamma(1.5 - lam + n).real)
    if family is Family.V:
        return 1.0 / math.sqrt(2.0)
    if n == 0:
        return 0.0
    return 1.0 / math.sqrt(math.pi * n)


def make_mode(family: Family, lam: float, n: int) -> ModeFunction:
    """Build a normalized mode and check the family's range of lambda."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if family is Family.I and lam < 0.5:
        raise ValueError("family I needs lambda >= 1/2")
    if family is Family.II and not (0.5 < lam < 1.5 and lam != 1.0):
        raise ValueError("family II needs 1/2 < lambda < 3/2, lambda != 1")
    if family in (Family.III, Family.IV) and not (0.5 < lam < 1.5):
        raise ValueError("mixed families need 1/2 < lambda < 3/2")
    if family is Family.V and lam != 0.5:
        raise ValueError("family V is lambda = 1/2")
    if family in (Family.LAMBDA1_DIRICHLET, Family.LAMBDA1_NEUMANN):
        if lam != 1.0:
            raise ValueError("lambda = 1 family")
        if family is Family.LAMBDA1_DIRICHLET and n == 0:
            raise ValueError("lambda = 1 Dirichlet modes start at n = 1")
    return ModeFunction(family, float(lam), int(n), family_omega(family, lam, n),
                        normalization_constant(family, lam, n),
                        zero_sector=(family is Family.LAMBDA1_NEUMANN and n == 0))


def _jacobi_and_derivative(n: int, a: float, b: float, x: float) -> Tuple[float, float]:
    p = jacobi_p(n, a, b, x)
    dp = 0.0 if n == 0 else 0.5 * (n + a + b + 1) * jacobi_p(n - 1, a + 1, b + 1, x)
    return p, dp


def _profile_parts(mode: ModeFunction, p: Point, deriv: bool = False) -> Tuple[float, float]:
    """Unnormalized profile and (if ``deriv``) its rho-derivative at p."""
    lam, n = mode.lam, mode.n
    s, c = p.s, p.c
    fam = mode.family
    if fam is Family.IV:
        val, der = _profile_parts(
            ModeFunction(Family.III, lam, n, mode.omega, mode.norm), p.reflect(), deriv)
        return val, -der
    if fam in (Family.I, Family.V, Family.II):
        a = lam - 0.5 if fam is not Family.II else 0.5 - lam
        m = lam if fam is not Family.II else 1.0 - lam
        pn, dpn = _jacobi_and_derivative(n, a, a, s)
        val = c ** m * pn
        if not deriv:
            return val, 0.0
        # d/drho [c^m P(s)] = c^m (c P' - m tan P)
        return val, c ** m * (c * dpn - m * s / c * pn)
    if fam is Family.III:
        a = lam - 0.5
        pn, dpn = _jacobi_and_derivative(n, a, -a, s)
        f = math.exp(lam * math.log(c) - a * p.log_ops)
        if not deriv:
            return f * pn, 0.0
        # d/drho log f = -lam tan + (1/2 - lam) c / (1 + s)
        dlog = -lam * s / c - a * c / p.ops
        return f * pn, f * (c * dpn + dlog * pn)
    rho = p.rho
    if fam is Family.LAMBDA1_DIRICHLET:
        if n % 2 == 1:
            return math.cos(n * rho), -n * math.sin(n * rho)
        return math.sin(n * rho), n * math.cos(n * rho)
    if fam is Family.LAMBDA1_NEUMANN:
        if n == 0:
            return 1.0, 0.0
        if n % 2 == 1:
            return math.sin(n * rho), n * math.cos(n * rho)
        return math.cos(n * rho), -n * math.sin(n * rho)
    raise ValueError(f"unknown family {fam}")


def mode_profile(mode: ModeFunction, p: Point) -> float:
    """Normalized spatial profile Psi_n at p."""
    val, _ = _profile_parts(mode, p)
    if mode.zero_sector:
        return val
    return mode.norm * val


def mode_profile_derivative(mode: ModeFunction, p: Point) -> float:
    _, der = _profile_parts(mode, p, deriv=True)
    if mode.zero_sector:
        return der
    return mode.norm * der


def mode_function(mode: ModeFunction, t: float, rho: float) -> complex:
    """phi(t, rho) = Psi(rho) exp(-i omega t)."""
    return mode_profile(mode, point_from_rho(rho)) * cmath.exp(-1j * mode.omega * t)


# inner products ---------------------------------------------------------------

def l2_inner_product(f: Callable[[Point], complex], g: Callable[[Point], complex],
                     tol: float = 1e-13) -> complex:
    """Integral of conj(f) g over the strip."""
    def integrand(rt: float, side: int) -> complex:
        p = point_from_endpoint(rt, side)
        return complex(f(p)).conjugate() * complex(g(p))
    return integrate_strip(integrand, tol=tol)


def kg_inner_product(mode_a: ModeFunction, mode_b: ModeFunction, t: float = 0.0,
                     conj_a: bool = False, conj_b: bool = False) -> complex:
    """Klein-Gordon product i * int (conj(phi_a) d_t phi_b - d_t conj(phi_a) phi_b).

    ``conj_a`` / ``conj_b`` replace a mode by its complex conjugate
    (a negative-frequency solution).
    """
    def freq(m: ModeFunction, conj: bool) -> float:
        return -m.omega if conj else m.omega

    wa, wb = freq(mode_a, conj_a), freq(mode_b, conj_b)
    ov = l2_inner_product(lambda p: mode_profile(mode_a, p), lambda p: mode_profile(mode_b, p))
    # phi = Psi exp(-i w t) with real profiles; d_t phi = -i w phi
    phase = cmath.exp(1j * (wa - wb) * t)
    if mode_a.zero_sector or mode_b.zero_sector:
        # constant representative: d_t vanishes for it
        wa_eff = 0.0 if mode_a.zero_sector else wa
        wb_eff = 0.0 if mode_b.zero_sector else wb
        return complex(1j * (-1j * wb_eff - 1j * wa_eff) * ov * phase)
    return complex((wa + wb) * ov * phase)
