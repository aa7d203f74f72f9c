"""Special-function kernel.

Gamma, reciprocal gamma, digamma, the Gauss hypergeometric function on the
real interval [0, 1), and Jacobi / Legendre polynomials with their
normalization integral. Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

Number = Union[int, float, complex]

__all__ = [
    "SeriesControl",
    "SeriesError",
    "PoleError",
    "gamma",
    "rgamma",
    "digamma",
    "pochhammer",
    "hyp2f1",
    "hyp2f1_series",
    "jacobi_p",
    "jacobi_series",
    "legendre_p",
    "jacobi_norm",
]


class PoleError(ArithmeticError):
    """Raised when a function is evaluated at one of its poles."""


class SeriesError(ArithmeticError):
    """Raised when a series fails to converge under its SeriesControl."""


@dataclass(frozen=True)
class SeriesControl:
    """Stopping rules for power-series evaluation.

    A sum stops once two consecutive terms fall below
    ``max(rel_tol * |sum|, abs_tol)``. Reaching ``max_terms`` first raises
    :class:`SeriesError` instead of returning a truncated value.
    """

    max_terms: int = 20000
    rel_tol: float = 1e-17
    abs_tol: float = 1e-300

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")


DEFAULT_CONTROL = SeriesControl()

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _nonpositive_integer(z: Number, tol: float = 0.0) -> bool:
    z = complex(z)
    if z.imag != 0.0 or z.real > 0.0:
        return False
    return abs(z.real - round(z.real)) <= tol


def _sinpi(z: complex) -> complex:
    """sin(pi z) with the real part reduced exactly before scaling."""
    x, y = z.real, z.imag
    # reduce x to [-1, 1] so sin(pi x) keeps full relative accuracy near integers
    r = math.fmod(x, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    if r > 0.5:
        sr, cr = math.sin(math.pi * (1.0 - r)), -math.cos(math.pi * (1.0 - r))
    elif r < -0.5:
        sr, cr = -math.sin(math.pi * (1.0 + r)), -math.cos(math.pi * (1.0 + r))
    else:
        sr, cr = math.sin(math.pi * r), math.cos(math.pi * r)
    if y == 0.0:
        return complex(sr, 0.0)
    return complex(sr * math.cosh(math.pi * y), cr * math.sinh(math.pi * y))


def _lanczos(z: complex) -> complex:
    # valid for Re z >= 1/2
    z = z - 1.0
    x = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((z + 0.5) * cmath.log(t) - t) * x


def gamma(z: Number) -> complex:
    """Gamma function for complex argument.

    Raises
    ------
    PoleError
        If ``z`` is a non-positive integer.
    """
    z = complex(z)
    if _nonpositive_integer(z):
        raise PoleError(f"gamma has a pole at {z}")
    if z.imag == 0.0 and z.real == round(z.real) and z.real <= 30:
        return complex(math.factorial(int(z.real) - 1))
    if z.real < 0.5:
        return math.pi / (_sinpi(z) * _lanczos(1.0 - z))
    return _lanczos(z)


def rgamma(z: Number) -> complex:
    """Reciprocal gamma function, entire, exactly zero at the poles of gamma."""
    z = complex(z)
    if _nonpositive_integer(z):
        return 0j
    if z.real < 0.5:
        return _sinpi(z) * _lanczos(1.0 - z) / math.pi
    return 1.0 / gamma(z)


_BERNOULLI_TERMS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: Number) -> Number:
    """Digamma function psi = Gamma'/Gamma.

    Real input gives a float; complex input is accepted as well, which the
    log-case connection formulas need for complex frequencies.
    """
    is_real = not isinstance(x, complex) or x.imag == 0.0
    z = complex(x)
    if _nonpositive_integer(z):
        raise PoleError(f"digamma has a pole at {z}")
    acc = 0j
    if z.real < 0.5:
        # reflection: psi(1-z) - psi(z) = pi cot(pi z)
        s = _sinpi(z)
        c = _sinpi(z + 0.5)
        acc -= math.pi * c / s
        z = 1.0 - z
    while abs(z) < 10.0 or z.real < 10.0:
        acc -= 1.0 / z
        z += 1.0
    w = 1.0 / (z * z)
    series = 0j
    p = w
    for b in _BERNOULLI_TERMS:
        series += b * p
        p *= w
    val = acc + cmath.log(z) - 0.5 / z - series
    return val.real if is_real else val


def pochhammer(a: Number, n: int) -> Number:
    """Rising factorial (a)_n."""
    out: Number = 1.0
    for k in range(n):
        out *= a + k
    return out


def _terminating_index(a: complex) -> int | None:
    if _nonpositive_integer(a, tol=0.0):
        return int(round(-a.real))
    return None


def hyp2f1_series(a: Number, b: Number, c: Number, z: float,
                  control: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Direct Gauss series for F(a, b; c; z).

    Terminating series (``a`` or ``b`` a non-positive integer) are summed
    exactly for any ``z``; otherwise ``|z| < 1`` is required.
    """
    a, b, c = complex(a), complex(b), complex(c)
    na, nb = _terminating_index(a), _terminating_index(b)
    stop = None
    if na is not None or nb is not None:
        stop = min(n for n in (na, nb) if n is not None)
    nc = _terminating_index(c)
    if nc is not None and (stop is None or stop > nc):
        raise PoleError(f"hypergeometric parameter c = {c} is a pole")
    term = 1.0 + 0j
    total = 1.0 + 0j
    if stop is not None:
        for k in range(stop):
            term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
            total += term
        return total
    if abs(z) >= 1.0:
        raise ValueError("series needs |z| < 1")
    small = 0
    for k in range(control.max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        if abs(term) <= max(control.rel_tol * abs(total), control.abs_tol):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise SeriesError(f"2F1 series did not converge in {control.max_terms} terms")


def _log_connection(a: complex, b: complex, m: int, w: float,
                    control: SeriesControl) -> complex:
    """F(a, b; a+b-m; 1-w) for integer m >= 0 (logarithmic connection).

    This is the form used for the solutions at half-integer lambda: a finite
    sum carrying w^{-m} plus a log series in w with digamma corrections.
    """
    c = a + b - m
    total = 0j
    if m > 0:
        pref = gamma(m) * gamma(c) * rgamma(a) * rgamma(b) * w ** (-m)
        if pref != 0:
            s = 0j
            t = 1.0 + 0j
            for n in range(m):
                s += t
                if n + 1 == m:
                    break
                t *= (a - m + n) * (b - m + n) / ((n + 1) * (1 - m + n)) * w
            total += pref * s
    h = -((-1) ** m) * gamma(c) * rgamma(a - m) * rgamma(b - m)
    if h == 0:
        return total
    lw = math.log(w)
    s = 0j
    t = 1.0 / math.factorial(m) + 0j
    small = 0
    for n in range(control.max_terms):
        hn = lw - digamma(n + 1.0) - digamma(n + m + 1.0) + digamma(a + n) + digamma(b + n)
        inc = t * hn
        s += inc
        if abs(inc) <= max(control.rel_tol * abs(s), control.abs_tol) and n > 2:
            small += 1
            if small >= 2:
                return total + h * s
        else:
            small = 0
        t *= (a + n) * (b + n) / ((n + 1) * (n + m + 1)) * w
    raise SeriesError("log-case connection series did not converge")


def _generic_connection(a: complex, b: complex, c: complex, z: float,
                        control: SeriesControl) -> complex:
    w = 1.0 - z
    s = c - a - b
    t1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b)
    t2 = gamma(c) * gamma(-s) * rgamma(a) * rgamma(b)
    out = 0j
    if t1 != 0:
        out += t1 * hyp2f1_series(a, b, 1.0 - s, w, control)
    if t2 != 0:
        out += t2 * cmath.exp(s * math.log(w)) * hyp2f1_series(c - a, c - b, 1.0 + s, w, control)
    return out


# half-width of the perturbation used when c - a - b is a positive integer
PERTURB_EPS = 1e-6


def hyp2f1(a: Number, b: Number, c: Number, z: float,
           control: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Gauss hypergeometric function F(a, b; c; z) for real z in [0, 1).

    For ``z <= 1/2`` the defining series is summed directly. For ``z > 1/2``
    the z -> 1 - z connection formula is used. When ``c - a - b`` is a
    non-positive integer the logarithmic connection formula applies; when it
    is a positive integer the parameter ``c`` is perturbed symmetrically by
    ``PERTURB_EPS`` and the pair averaged, which cancels the odd terms.

    Raises
    ------
    PoleError
        If ``c`` is a non-positive integer and the series does not terminate
        before reaching it.
    SeriesError
        If a series fails to converge under ``control``.
    """
    a, b, c = complex(a), complex(b), complex(c)
    z = float(z)
    if not (0.0 <= z < 1.0):
        raise ValueError("z must lie in [0, 1)")
    if z == 0.0:
        if _terminating_index(c) is not None and _terminating_index(a) is None \
                and _terminating_index(b) is None:
            raise PoleError(f"hypergeometric parameter c = {c} is a pole")
        return 1.0 + 0j
    if z <= 0.5 or _terminating_index(a) is not None or _terminating_index(b) is not None:
        return hyp2f1_series(a, b, c, z, control)
    if _terminating_index(c) is not None:
        raise PoleError(f"hypergeometric parameter c = {c} is a pole")
    s = c - a - b
    m = round(s.real)
    if abs(s.imag) < 1e-14 and abs(s.real - m) < 1e-9:
        if m <= 0:
            # exact log formula; absorb the tiny offset into a
            return _log_connection(a, b + (s - m), -m, 1.0 - z, control)
        eps = PERTURB_EPS
        up = _generic_connection(a, b, c + eps, z, control)
        dn = _generic_connection(a, b, c - eps, z, control)
        return 0.5 * (up + dn)
    return _generic_connection(a, b, c, z, control)


def jacobi_series(n: int, a: float, b: float, x: float) -> float:
    """Jacobi polynomial P_n^{(a,b)}(x) summed from its terminating 2F1 definition.

    P_n^{(a,b)}(x) = Gamma(n+a+1) / (n! Gamma(a+1)) F(n+a+b+1, -n; a+1; (1-x)/2)

    The alternating sum loses digits for large n; :func:`jacobi_p` is the
    accurate entry point.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1.0
    pref = gamma(n + a + 1) * rgamma(a + 1) / math.factorial(n)
    y = (1.0 - x) / 2.0
    term = 1.0
    total = 1.0
    for k in range(n):
        term *= (n + a + b + 1 + k) * (-n + k) / ((a + 1 + k) * (k + 1)) * y
        total += term
    return float((pref * total).real)


def jacobi_p(n: int, a: float, b: float, x: float) -> float:
    """Jacobi polynomial P_n^{(a,b)}(x) by the three-term recurrence in n.

    Same polynomial as :func:`jacobi_series`, started from P_0 = 1 and
    P_1 = (a+1) + (a+b+2)(x-1)/2, without the cancellation of the series.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    p_prev = 1.0
    if n == 0:
        return p_prev
    p = (a + 1.0) + 0.5 * (a + b + 2.0) * (x - 1.0)
    for k in range(2, n + 1):
        s = 2 * k + a + b
        c0 = 2.0 * k * (k + a + b) * (s - 2.0)
        c1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b)
        c2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        p_prev, p = p, (c1 * p - c2 * p_prev) / c0
    return float(p)


def legendre_p(n: int, x: float) -> float:
    """Legendre polynomial P_n(x) = P_n^{(0,0)}(x)."""
    return jacobi_p(n, 0.0, 0.0, x)


def jacobi_norm(n: int, a: float, b: float) -> float:
    """Weighted L2 norm squared of P_n^{(a,b)} on [-1, 1].

    Returns 2^{a+b+1} Gamma(a+n+1) Gamma(b+n+1) / (n! (a+b+1+2n) Gamma(a+b+n+1)).
    The product (a+b+1+2n) Gamma(a+b+n+1) is evaluated as Gamma(a+b+n+2) when
    n = 0 so that a + b + 1 = 0 is handled.
    """
    if a <= -1 or b <= -1:
        raise ValueError("need a, b > -1")
    num = 2.0 ** (a + b + 1) * gamma(a + n + 1) * gamma(b + n + 1)
    if n == 0:
        den = gamma(a + b + 2)
    else:
        den = math.factorial(n) * (a + b + 1 + 2 * n) * gamma(a + b + n + 1)
    return float((num / den).real)
