"""Eigenfrequencies of the self-adjoint extensions.

The quantization determinant is scanned on a grid in omega^2 (so negative
eigenvalues sit on the same axis), sign changes are refined by bracketing,
and touching zeros are picked up from local minima of |det|.
"""
from __future__ import annotations

import cmath
import csv
import io
import json
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg, optimize, special

from .boundary import (ExtensionParams, Regime, RegimeError, SelfAdjointBC,
                       bc_to_json, connection_coefficients, trace_matrix)

__all__ = [
    "Eigenvalue",
    "Spectrum",
    "ScanResolutionWarning",
    "omega_from_sq",
    "quantization_determinant",
    "null_vector",
    "find_spectrum",
    "negative_modes_robin",
    "finite_difference_oracle",
    "rayleigh_quotient_unbounded",
    "rayleigh_core_integral",
]

log = logging.getLogger(__name__)

DEFAULT_WINDOW = (-25.0, 100.0)
DEFAULT_POINTS = 2001
DEFAULT_TOL = 1e-10
DOUBLE_ROOT_REL = 1e-8


class ScanResolutionWarning(UserWarning):
    """Two roots may share one scan cell."""


def omega_from_sq(omega_sq: float) -> complex:
    """omega = sqrt(omega^2) for omega^2 >= 0, i nu for omega^2 < 0."""
    if omega_sq >= 0:
        return complex(math.sqrt(omega_sq), 0.0)
    return complex(0.0, math.sqrt(-omega_sq))


def _system_matrix(params: ExtensionParams, bc: SelfAdjointBC, omega: complex) -> np.ndarray:
    """2x2 matrix M with M (C1, C2) = apply_bc residual."""
    t = trace_matrix(params, omega)
    p = np.vstack([t[0], -t[1]])
    d = np.vstack([t[2], t[3]])
    eye = np.eye(2)
    return (eye - bc.u) @ d - 1j * (eye + bc.u) @ p


def quantization_determinant(params: ExtensionParams, bc: Optional[SelfAdjointBC],
                             omega_sq: float) -> float:
    """Real-valued determinant whose zeros are the eigenvalues omega^2.

    With extensions, det M is divided by sqrt(det U); the quotient is real on
    the real omega^2 axis. Without extensions the only condition is the
    vanishing of the cos^{1-lambda} coefficient for both parities, so the
    determinant is B1 * B2.
    """
    omega = omega_from_sq(float(omega_sq))
    if not params.has_extensions:
        _, b1, _, b2 = connection_coefficients(params, omega)
        return float((b1 * b2).real)
    if bc is None:
        raise ValueError("a boundary condition is required when extensions exist")
    m = _system_matrix(params, bc, omega)
    phase = cmath.sqrt(np.linalg.det(bc.u))
    return float((np.linalg.det(m) / phase).real)


def null_vector(params: ExtensionParams, bc: Optional[SelfAdjointBC],
                omega_sq: float) -> Tuple[complex, complex]:
    """(C1, C2) spanning the (numerical) kernel at an eigenvalue."""
    omega = omega_from_sq(omega_sq)
    if not params.has_extensions:
        _, b1, _, b2 = connection_coefficients(params, omega)
        return (1.0 + 0j, 0j) if abs(b1) <= abs(b2) else (0j, 1.0 + 0j)
    m = _system_matrix(params, bc, omega)
    _, _, vh = np.linalg.svd(m)
    v = vh[-1].conj()
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    return complex(v[0]), complex(v[1])


@dataclass(frozen=True)
class Eigenvalue:
    omega_sq: float
    multiplicity: int = 1
    residual: float = 0.0
    parity_hint: Optional[str] = None

    @property
    def negative(self) -> bool:
        return self.omega_sq < 0

    @property
    def omega_or_nu(self) -> float:
        """omega for omega^2 >= 0, otherwise nu with omega = i nu."""
        return math.sqrt(abs(self.omega_sq))


@dataclass
class Spectrum:
    lam: float
    bc: Optional[SelfAdjointBC]
    eigenvalues: List[Eigenvalue]
    scan_window: Tuple[float, float]
    tol: float
    warnings: List[str] = field(default_factory=list)

    @property
    def omega_sq(self) -> List[float]:
        out = []
        for e in self.eigenvalues:
            out.extend([e.omega_sq] * e.multiplicity)
        return out

    @property
    def omegas(self) -> List[float]:
        """Non-negative eigenfrequencies (omega^2 >= 0) in increasing order."""
        return [math.sqrt(w) for w in self.omega_sq if w >= 0]

    def to_records(self) -> List[Dict[str, object]]:
        return [{"omega_sq": float(e.omega_sq), "omega_or_nu": float(e.omega_or_nu),
                 "negative": bool(e.negative), "multiplicity": int(e.multiplicity)}
                for e in self.eigenvalues]

    def to_json(self) -> str:
        body = {
            "schema": 1,
            "lambda": self.lam,
            "bc": bc_to_json(self.bc) if self.bc is not None else None,
            "scan_window": [float(x) for x in self.scan_window],
            "tol": float(self.tol),
            "eigenvalues": self.to_records(),
            "warnings": self.warnings,
        }
        return json.dumps(body, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["omega_sq", "omega", "negative", "multiplicity"])
        for r in self.to_records():
            w.writerow([repr(r["omega_sq"]), repr(r["omega_or_nu"]),
                        str(r["negative"]).lower(), r["multiplicity"]])
        return buf.getvalue()


def _parity(c: Tuple[complex, complex]) -> Optional[str]:
    a, b = abs(c[0]), abs(c[1])
    if b <= 1e-8 * max(a, b):
        return "even"
    if a <= 1e-8 * max(a, b):
        return "odd"
    return None


def find_spectrum(params: ExtensionParams, bc: Optional[SelfAdjointBC],
                  omega_sq_range: Tuple[float, float] = DEFAULT_WINDOW,
                  tol: float = DEFAULT_TOL, n_points: int = DEFAULT_POINTS,
                  threads: int = 1) -> Spectrum:
    """All eigenvalues omega^2 in the half-open window (lo, hi].

    Parameters
    ----------
    params, bc
        lambda and the boundary condition (ignored when lambda has a unique
        extension).
    omega_sq_range
        Scan window in omega^2.
    tol
        Bracketing tolerance in omega^2.
    n_points
        Scan grid size.
    threads
        Worker threads for the grid evaluation.
    """
    lo, hi = map(float, omega_sq_range)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ValueError("scan window must be finite with lo < hi")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if n_points < 3:
        raise ValueError("need at least 3 scan points")
    grid = np.linspace(lo, hi, n_points)

    def f(x: float) -> float:
        return quantization_determinant(params, bc, x)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = np.array(list(pool.map(f, grid)))
    else:
        vals = np.array([f(x) for x in grid])

    roots: List[Eigenvalue] = []
    notes: List[str] = []
    scale = float(np.max(np.abs(vals))) or 1.0

    def add(x: float, mult: int) -> None:
        if not (lo < x <= hi):
            return
        c = null_vector(params, bc, x)
        roots.append(Eigenvalue(float(x), mult, float(abs(f(x))), _parity(c)))

    for i in range(n_points - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            if i == 0 or vals[i - 1] != 0.0:
                add(a, 1)
            continue
        if fa * fb < 0:
            x = optimize.brentq(f, a, b, xtol=tol, rtol=4 * np.finfo(float).eps)
            add(x, 1)
    if vals[-1] == 0.0:
        add(grid[-1], 1)

    # touching zeros and hidden pairs: interior local minima of |det|
    mag = np.abs(vals)
    for i in range(1, n_points - 1):
        if not (mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]):
            continue
        if vals[i - 1] * vals[i] < 0 or vals[i] * vals[i + 1] < 0 or vals[i] == 0:
            continue
        a, b = grid[i - 1], grid[i + 1]
        res = optimize.minimize_scalar(lambda x: abs(f(x)), bounds=(a, b), method="bounded",
                                       options={"xatol": tol})
        x = float(res.x)
        fx = f(x)
        local = max(mag[i - 1], mag[i + 1], 1e-300)
        if fx * vals[i] >= 0:
            # a close pair can hide from the minimizer, which may stop beside one zero;
            # the vertex of a local parabola sits between the two zeros
            h = max(1e-6 * (b - a), 1e3 * tol)
            f0, f2 = f(x - h), f(x + h)
            curv = (f0 - 2.0 * fx + f2) / (h * h)
            if curv != 0.0:
                xv = min(max(x - (f2 - f0) / (2.0 * h * curv), a + tol), b - tol)
                fv = f(xv)
                if fv * vals[i] < 0:
                    x, fx = xv, fv
        if fx * vals[i] < 0:
            # the sign flips inside the cell and back again: two simple roots
            msg = (f"two roots in one scan cell near omega^2 = {x:.6g}; "
                   "refine the grid for separate values")
            notes.append(msg)
            warnings.warn(msg, ScanResolutionWarning, stacklevel=2)
            r1 = optimize.brentq(f, a, x, xtol=tol) if f(a) * fx < 0 else x
            r2 = optimize.brentq(f, x, b, xtol=tol) if fx * f(b) < 0 else x
            add(r1, 1)
            add(r2, 1)
        elif abs(fx) <= DOUBLE_ROOT_REL * local and abs(fx) <= DOUBLE_ROOT_REL * scale:
            add(x, 2)

    roots.sort(key=lambda e: e.omega_sq)
    merged: List[Eigenvalue] = []
    for e in roots:
        if merged and abs(e.omega_sq - merged[-1].omega_sq) <= 10 * tol:
            continue
        merged.append(e)
    return Spectrum(float(params.lam), bc, merged, (lo, hi), tol, notes)


# Robin-type negative modes at lambda = 1 ----------------------------------------

def _bisect(g, a: float, b: float, tol: float = 1e-14, max_iter: int = 400) -> float:
    ga, gb = g(a), g(b)
    if ga == 0:
        return a
    if gb == 0:
        return b
    if ga * gb > 0:
        raise ValueError("root is not bracketed")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        gm = g(m)
        if gm == 0 or (b - a) < tol * max(1.0, abs(m)):
            return m
        if ga * gm < 0:
            b, gb = m, gm
        else:
            a, ga = m, gm
    return 0.5 * (a + b)


def negative_modes_robin(alpha: float) -> List[Dict[str, object]]:
    """Roots nu > 0 of coth(nu pi/2) = alpha nu (even) and tanh(nu pi/2) = alpha nu (odd).

    These are the omega^2 = -nu^2 eigenvalues at lambda = 1 for
    Psi(+-pi/2) = +-alpha Psi'(+-pi/2).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    half_pi = 0.5 * math.pi
    out: List[Dict[str, object]] = []

    def even(nu: float) -> float:
        return alpha * nu * math.tanh(nu * half_pi) - 1.0

    hi = 50.0
    while even(hi) <= 0:
        hi *= 2.0
    out.append({"nu": _bisect(even, 1e-12, hi), "parity": "even"})

    if alpha < half_pi:
        def odd(nu: float) -> float:
            return math.tanh(nu * half_pi) - alpha * nu
        hi = 50.0
        while odd(hi) >= 0:
            hi *= 2.0
        # odd(nu) ~ (pi/2 - alpha) nu > 0 just above zero
        lo = 1e-6
        while odd(lo) <= 0:
            lo *= 0.5
        out.append({"nu": _bisect(odd, lo, hi), "parity": "odd"})
    return out


# finite-volume oracle --------------------------------------------------------------

def _cos_power_from_end(dist: np.ndarray, p: float) -> np.ndarray:
    """Integral of cos^p over the last ``dist`` of the half strip (dist in [0, pi/2])."""
    a = 0.5 * (p + 1.0)
    x = np.sin(np.asarray(dist, dtype=float)) ** 2
    return 0.5 * special.beta(a, 0.5) * special.betainc(a, 0.5, x)


def _cos_power_integral(d_left: np.ndarray, d_right: np.ndarray, side: np.ndarray,
                        p: float) -> np.ndarray:
    """Integral of cos^p between two points on the same half, given endpoint distances."""
    g_l = _cos_power_from_end(d_left, p)
    g_r = _cos_power_from_end(d_right, p)
    return np.abs(g_l - g_r)


def _graded_nodes(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cosine-graded nodes with endpoint distances and half labels."""
    i = np.arange(n + 1)
    rho = -0.5 * math.pi * np.cos(math.pi * i / n)
    # distance to the nearer end without cancellation
    d_minus = math.pi * np.sin(0.5 * math.pi * i / n) ** 2
    d_plus = math.pi * np.sin(0.5 * math.pi * (n - i) / n) ** 2
    side = np.where(rho < 0, -1, 1)
    dist = np.where(rho < 0, d_minus, d_plus)
    return rho, dist, side


def _segment_integral(rho_a, dist_a, side_a, rho_b, dist_b, side_b, p: float) -> np.ndarray:
    """Integral of cos^p over [rho_a, rho_b] elementwise, splitting at 0."""
    out = np.empty_like(rho_a)
    same = side_a == side_b
    out[same] = _cos_power_integral(dist_a[same], dist_b[same], side_a[same], p)
    cross = ~same
    if np.any(cross):
        mid = np.full(np.count_nonzero(cross), 0.5 * math.pi)
        out[cross] = (_cos_power_integral(dist_a[cross], mid, side_a[cross], p)
                      + _cos_power_integral(mid, dist_b[cross], side_b[cross], p))
    return out


def finite_difference_oracle(params: ExtensionParams, bc: SelfAdjointBC,
                             n_grid: int = 400, n_eigs: int = 10) -> np.ndarray:
    """Lowest eigenvalues omega^2 from a finite-volume discretization.

    The unknown is u = cos^{lambda-1} Psi, which satisfies
    -(w u')' = (omega^2 - (1-lambda)^2) w u with w = cos^{2-2lambda};
    the flux w u' is the trace D Psi~ and u at the ends is Psi~. Face
    transmissibilities and lumped masses are exact integrals of 1/w and w
    over the cells of a cosine-graded grid. The boundary condition enters
    through the eigen-decomposition of U: eigenvalue 1 constrains the trace,
    any other eigenvalue e^{i t} contributes -cot(t/2) |v^H X|^2 to the form.
    """
    if n_grid < 200:
        raise ValueError("n_grid must be at least 200")
    params.require_extensions()
    if params.regime is Regime.EDGE:
        raise RegimeError("the finite-volume oracle needs 1/2 < lambda < 3/2")
    lam = params.lam
    if lam > 1.4:
        warnings.warn("stiffness is badly conditioned for lambda near 3/2", RuntimeWarning,
                      stacklevel=2)
    n = n_grid
    rho, dist, side = _graded_nodes(n)
    p_w = 2.0 - 2.0 * lam

    # faces between consecutive nodes
    inv_w = _segment_integral(rho[:-1], dist[:-1], side[:-1], rho[1:], dist[1:], side[1:], -p_w)
    trans = 1.0 / inv_w

    # dual cells: node i owns [mid_{i-1}, mid_i]
    mid = 0.5 * (rho[:-1] + rho[1:])
    mid_side = np.where(mid < 0, -1, 1)
    mid_dist = 0.5 * math.pi - np.abs(mid)
    w_half_left = _segment_integral(rho[:-1], dist[:-1], side[:-1], mid, mid_dist, mid_side, p_w)
    w_half_right = _segment_integral(mid, mid_dist, mid_side, rho[1:], dist[1:], side[1:], p_w)
    mass = np.zeros(n + 1)
    mass[:-1] += w_half_left
    mass[1:] += w_half_right

    k = np.zeros((n + 1, n + 1), dtype=complex)
    idx = np.arange(n)
    k[idx, idx] += trans
    k[idx + 1, idx + 1] += trans
    k[idx, idx + 1] -= trans
    k[idx + 1, idx] -= trans

    # X = (u_N, -u_0) = C u
    c = np.zeros((2, n + 1))
    c[0, n] = 1.0
    c[1, 0] = -1.0
    evals, evecs = np.linalg.eig(bc.u)
    constraints = []
    h_eff = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        v = evecs[:, j] / np.linalg.norm(evecs[:, j])
        t = cmath.phase(evals[j])
        if abs(evals[j] - 1.0) < 1e-10:
            constraints.append(v.conj() @ c)
        else:
            h = -1.0 / math.tan(0.5 * t)
            h_eff += h * np.outer(v, v.conj())
    k -= c.T @ h_eff @ c

    m = np.diag(mass).astype(complex)
    if constraints:
        q = linalg.null_space(np.array(constraints))
    else:
        q = np.eye(n + 1)
    kr = q.conj().T @ k @ q
    mr = q.conj().T @ m @ q
    kr = 0.5 * (kr + kr.conj().T)
    mr = 0.5 * (mr + mr.conj().T)
    e = linalg.eigh(kr, mr, eigvals_only=True, subset_by_index=[0, min(n_eigs, kr.shape[0]) - 1])
    return e + (1.0 - lam) ** 2


# unboundedness below for M^2 < -1/4 --------------------------------------------

def rayleigh_core_integral(a: float, eta: float) -> float:
    """Integral over [-eta, eta] of cos^{1/2} A cos^{1/2}: -2a ln(sec + tan) + sin(eta)/2."""
    return -2.0 * a * math.log(1.0 / math.cos(eta) + math.tan(eta)) + 0.5 * math.sin(eta)


def _smooth_step(x: float) -> Tuple[float, float, float]:
    """chi(x) and its first two derivatives; chi = 1 for x <= -1 and 0 for x >= 1."""
    if x <= -1.0:
        return 1.0, 0.0, 0.0
    if x >= 1.0:
        return 0.0, 0.0, 0.0
    y = 0.5 * (x + 1.0)   # in (0, 1)
    # S(y) = e^{-1/y} / (e^{-1/y} + e^{-1/(1-y)}) written as 1 / (1 + e^{g})
    g = 1.0 / y - 1.0 / (1.0 - y)
    gp = -1.0 / y ** 2 - 1.0 / (1.0 - y) ** 2
    gpp = 2.0 / y ** 3 - 2.0 / (1.0 - y) ** 3
    if g > 700:
        return 1.0, 0.0, 0.0
    if g < -700:
        return 0.0, 0.0, 0.0
    s = 0.5 * (1.0 - math.tanh(0.5 * g))
    q = 0.25 / math.cosh(0.5 * g) ** 2          # s (1 - s)
    sp = -gp * q
    spp = -gpp * q + gp * gp * q * (1.0 - 2.0 * s)
    # chi = 1 - S((x+1)/2)
    return 1.0 - s, -0.5 * sp, -0.25 * spp


def rayleigh_quotient_unbounded(a: float, eta: float) -> float:
    """<f, A f> / <f, f> for A = -d^2 - (1/4 + a)/cos^2 and the cut-off test function.

    f = cos^{1/2} for |rho| <= eta - eps and cos^{1/2} chi((|rho| - eta)/eps)
    beyond, with eps = (pi/2 - eta)/2.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if not (math.pi / 6 < eta < math.pi / 2):
        raise ValueError("eta must lie in (pi/6, pi/2)")
    eps = 0.5 * (0.5 * math.pi - eta)
    inner = eta - eps
    core = rayleigh_core_integral(a, inner)
    core_norm = 2.0 * math.sin(inner)

    def f_af(r: float) -> float:
        x = (r - eta) / eps
        chi, d1, d2 = _smooth_step(x)
        c, s = math.cos(r), math.sin(r)
        return chi * (-c * d2 / eps ** 2 + s * d1 / eps + (-a / c + 0.25 * c) * chi)

    def f_sq(r: float) -> float:
        chi, _, _ = _smooth_step((r - eta) / eps)
        return math.cos(r) * chi * chi

    lo, hi = inner, eta + eps
    edge, _ = integrate.quad(f_af, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
    edge_norm, _ = integrate.quad(f_sq, lo, hi, epsabs=1e-15, epsrel=1e-12, limit=200)
    return (core + 2.0 * edge) / (core_norm + 2.0 * edge_norm)
