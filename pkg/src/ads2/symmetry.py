"""SL(2,R) structure: ladder actions, invariant boundary conditions, representation labels
and a truncated Fock-space check of the charge algebra."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .boundary import (BoundaryTrace, ExtensionParams, Regime, RegimeError,
                       SelfAdjointBC, apply_bc, boundary_trace)
from .modes import (Family, ModeFunction, make_mode, mode_profile,
                    mode_profile_derivative, point_from_rho)
from .spectrum import find_spectrum, null_vector, omega_from_sq

__all__ = [
    "Direction",
    "RepKind",
    "RepLabel",
    "FockTruncation",
    "InvarianceCertificate",
    "InvarianceInconsistency",
    "ladder_action_trace",
    "is_invariant_bc",
    "lowest_eigenvalues",
    "analytic_invariance",
    "classify_representation",
    "unitarity_inequalities",
    "principal_series",
    "complementary_series",
    "ladder_coefficients",
    "anomalous_coefficient",
    "verify_ladder_numerically",
    "fock_commutator_check",
]

INVARIANCE_RESIDUAL = 1e-7


class Direction(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def _direction(d) -> Direction:
    return d if isinstance(d, Direction) else Direction(str(d).lower())


# ladder action on traces -----------------------------------------------------------

def ladder_action_trace(params: ExtensionParams, omega: complex, trace: BoundaryTrace,
                        direction="minus") -> BoundaryTrace:
    """Boundary trace of delta_-+ Psi_omega from the trace of Psi_omega.

    For 1/2 < lambda < 3/2, delta_- multiplies (Psi~, DPsi~) at +-pi/2 by
    +-(omega - 1 + lambda) and +-(omega - lambda); delta_+ follows from
    omega -> -omega. At lambda = 1/2 both factors are +-(omega - 1/2) and
    DPsi~ picks up -4 Psi~.
    """
    params.require_extensions()
    w = complex(omega)
    if _direction(direction) is Direction.PLUS:
        w = -w
    lam = params.lam
    if params.regime is Regime.EDGE:
        f = w - 0.5
        return BoundaryTrace(
            psi_minus=-f * trace.psi_minus,
            psi_plus=f * trace.psi_plus,
            dpsi_minus=-f * trace.dpsi_minus - 4.0 * trace.psi_minus,
            dpsi_plus=f * trace.dpsi_plus - 4.0 * trace.psi_plus,
        )
    fp, fd = w - 1.0 + lam, w - lam
    return BoundaryTrace(
        psi_minus=-fp * trace.psi_minus,
        psi_plus=fp * trace.psi_plus,
        dpsi_minus=-fd * trace.dpsi_minus,
        dpsi_plus=fd * trace.dpsi_plus,
    )


# invariance ------------------------------------------------------------------------

class InvarianceInconsistency(RuntimeError):
    """The analytic and the dynamic invariance tests disagree."""


@dataclass(frozen=True)
class InvarianceCertificate:
    analytic: bool
    dynamic: bool
    omega_sq: Tuple[float, ...]
    residuals: Tuple[float, ...]
    traces: Tuple[BoundaryTrace, ...] = field(default=(), compare=False, repr=False)

    @property
    def invariant(self) -> bool:
        return self.analytic


def analytic_invariance(params: ExtensionParams, bc: SelfAdjointBC, tol: float = 1e-8) -> bool:
    """U diagonal with entries +-1 (lambda in (1/2, 3/2)) or U = I (lambda = 1/2)."""
    params.require_extensions()
    u = bc.u
    if params.regime is Regime.EDGE:
        return bool(np.max(np.abs(u - np.eye(2))) < tol)
    if abs(u[0, 1]) > tol or abs(u[1, 0]) > tol:
        return False
    return all(min(abs(u[i, i] - 1), abs(u[i, i] + 1)) < tol for i in range(2))


def lowest_eigenvalues(params: ExtensionParams, bc: SelfAdjointBC, count: int) -> List[float]:
    """The ``count`` lowest omega^2, widening the scan window until enough are found."""
    lo, hi = -25.0, 30.0
    for _ in range(8):
        sp = find_spectrum(params, bc, (lo, hi), tol=1e-12, n_points=551)
        vals = sp.omega_sq
        if len(vals) >= count:
            return vals[:count]
        lo *= 4.0
        hi *= 2.0
    raise RuntimeError("could not locate enough eigenvalues for the certificate")


def is_invariant_bc(params: ExtensionParams, bc: SelfAdjointBC,
                    n_modes: int = 3) -> Tuple[bool, InvarianceCertificate]:
    """Decide SL(2,R) invariance of bc analytically and certify it dynamically.

    The certificate applies both ladder actions to the traces of the lowest
    ``n_modes`` eigenfunctions and checks the images against bc. The two
    verdicts must agree; otherwise InvarianceInconsistency is raised.
    """
    params.require_extensions()
    analytic = analytic_invariance(params, bc)
    omegas = lowest_eigenvalues(params, bc, n_modes)
    residuals, traces = [], []
    for w2 in omegas:
        omega = omega_from_sq(w2)
        c1, c2 = null_vector(params, bc, w2)
        tr = boundary_trace(params, c1, c2, omega)
        traces.append(tr)
        ref = max(tr.scale(), 1e-300) * (abs(omega) + params.lam + 1.0)
        for direction in (Direction.MINUS, Direction.PLUS):
            image = ladder_action_trace(params, omega, tr, direction)
            residuals.append(float(np.max(np.abs(apply_bc(bc, image)))) / ref)
    dynamic = max(residuals) < INVARIANCE_RESIDUAL
    cert = InvarianceCertificate(analytic, dynamic, tuple(omegas), tuple(residuals), tuple(traces))
    if analytic != dynamic:
        raise InvarianceInconsistency(
            f"analytic={analytic} but dynamic={dynamic} (max residual {max(residuals):.3g})")
    return analytic, cert


# representations -------------------------------------------------------------------

class RepKind(enum.Enum):
    DISCRETE_PLUS = "DiscretePlus"
    MOCK_DISCRETE = "MockDiscrete"
    NON_UNITARY_DISCRETE = "NonUnitaryDiscrete"
    NO_LABEL = "NoLabel"
    PRINCIPAL_SERIES = "PrincipalSeries"
    COMPLEMENTARY_SERIES = "ComplementarySeries"


@dataclass(frozen=True)
class RepLabel:
    kind: RepKind
    lambda_hat: Optional[float]
    casimir_q: float
    unitary: bool
    mu: Optional[float] = None
    s: Optional[float] = None
    zero_mode_quotient: bool = False

    def __post_init__(self) -> None:
        non_unitary = self.kind in (RepKind.NON_UNITARY_DISCRETE, RepKind.NO_LABEL)
        if self.unitary == non_unitary:
            raise ValueError(f"{self.kind.value} has unitary={not non_unitary}")

    @property
    def symbol(self) -> str:
        if self.kind is RepKind.DISCRETE_PLUS or self.kind is RepKind.MOCK_DISCRETE:
            return f"D+_{self.lambda_hat:g}"
        if self.kind is RepKind.NON_UNITARY_DISCRETE:
            return f"F+_{self.lambda_hat:g}"
        if self.kind is RepKind.PRINCIPAL_SERIES:
            return f"P_i{self.s:g}^{self.mu:g}"
        if self.kind is RepKind.COMPLEMENTARY_SERIES:
            return f"C_{self.lambda_hat:g}^{self.mu:g}"
        return "--"

    def to_json(self) -> Dict[str, object]:
        return {"kind": self.kind.value, "lambda_hat": self.lambda_hat,
                "casimir_q": self.casimir_q, "unitary": self.unitary}


def _discrete(kind: RepKind, lam_hat: float, unitary: bool, quotient: bool = False) -> RepLabel:
    return RepLabel(kind, lam_hat, lam_hat * (lam_hat - 1.0), unitary,
                    zero_mode_quotient=quotient)


def unitarity_inequalities(lam: complex, mu: float, ks: Sequence[int]) -> bool:
    """Both norms -q + omega^2 -+ omega >= 0 for omega = mu + k, k in ks."""
    q = lam * (lam - 1)
    for k in ks:
        w = mu + k
        n_minus = -q + w * w - w
        n_plus = -q + w * w + w
        if abs(complex(n_minus).imag) > 1e-12 or abs(complex(n_plus).imag) > 1e-12:
            return False
        if complex(n_minus).real < -1e-12 or complex(n_plus).real < -1e-12:
            return False
    return True


def principal_series(s: float, mu: float) -> RepLabel:
    """lambda = 1/2 + i s, s > 0, -1/2 < mu <= 1/2."""
    if not (s > 0 and -0.5 < mu <= 0.5):
        raise ValueError("principal series needs s > 0 and -1/2 < mu <= 1/2")
    lam = complex(0.5, s)
    if not unitarity_inequalities(lam, mu, range(-50, 51)):
        raise ValueError("inequalities fail")
    return RepLabel(RepKind.PRINCIPAL_SERIES, None, -0.25 - s * s, True, mu=mu, s=s)


def complementary_series(lam: float, mu: float) -> RepLabel:
    """0 < lambda < 1/2 and |mu| < lambda."""
    if not (0 < lam < 0.5 and abs(mu) < lam):
        raise ValueError("complementary series needs 0 < lambda < 1/2 and |mu| < lambda")
    if not unitarity_inequalities(lam, mu, range(-50, 51)):
        raise ValueError("inequalities fail")
    return RepLabel(RepKind.COMPLEMENTARY_SERIES, lam, lam * (lam - 1), True, mu=mu)


def classify_representation(params: ExtensionParams, bc: Optional[SelfAdjointBC]) -> RepLabel:
    """Representation carried by the positive-frequency modes of (lambda, bc)."""
    lam = params.lam
    q = lam * (lam - 1.0)
    if not params.has_extensions:
        return _discrete(RepKind.DISCRETE_PLUS, lam, True)
    if bc is None:
        raise ValueError("a boundary condition is required when extensions exist")
    if not analytic_invariance(params, bc):
        return RepLabel(RepKind.NO_LABEL, None, q, False)
    u = bc.u
    if params.regime is Regime.EDGE:
        return _discrete(RepKind.MOCK_DISCRETE, 0.5, True)
    d0, d1 = u[0, 0].real, u[1, 1].real
    if d0 > 0 and d1 > 0:
        return _discrete(RepKind.DISCRETE_PLUS, lam, True)
    if d0 < 0 and d1 < 0:
        if lam < 1.0:
            return _discrete(RepKind.DISCRETE_PLUS, 1.0 - lam, True)
        if lam == 1.0:
            return _discrete(RepKind.DISCRETE_PLUS, 1.0, True, quotient=True)
        return _discrete(RepKind.NON_UNITARY_DISCRETE, 1.0 - lam, False)
    return RepLabel(RepKind.NO_LABEL, None, q, False)


# ladder coefficients ---------------------------------------------------------------

def _check_family(params: ExtensionParams, family: Family) -> None:
    lam = params.lam
    if family is Family.II and not (1.0 < lam < 1.5 or 0.5 < lam < 1.0):
        raise ValueError("family II needs 1/2 < lambda < 3/2, lambda != 1")
    if family in (Family.III, Family.IV) and not (0.5 < lam < 1.5):
        raise ValueError("mixed families need 1/2 < lambda < 3/2")
    if family not in (Family.II, Family.III, Family.IV):
        raise ValueError("ladder coefficients are defined for families II, III, IV")


def ladder_coefficients(params: ExtensionParams, family: Family, n: int) -> float:
    """k_n (mixed) or q_n (Neumann) coupling mode n to mode n + 1."""
    _check_family(params, family)
    lam = params.lam
    if n < 0:
        raise ValueError("n must be non-negative")
    if family is Family.II:
        if lam > 1.0 and n == 0:
            raise ValueError("for lambda > 1 mode 0 couples only through the anomalous term")
        return math.sqrt((n + 1) * (2.0 - 2.0 * lam + n))
    return math.sqrt((lam + n + 0.5) * (n + 1.5 - lam))


def anomalous_coefficient(params: ExtensionParams, family: Family) -> float:
    """Coupling of the lowest modes to negative frequency.

    Mixed: delta_- phi_0 = (1/2 - lambda) conj(phi_0). Neumann with
    1 < lambda < 3/2: sqrt(2 (lambda - 1)) between phi_0 and conj(phi_1).
    """
    _check_family(params, family)
    lam = params.lam
    if family is Family.II:
        if not lam > 1.0:
            raise ValueError("no anomalous coupling for 1/2 < lambda < 1")
        return math.sqrt(2.0 * (lam - 1.0))
    return 0.5 - lam


def _ladder_target(mode: ModeFunction, direction: Direction) -> Tuple[float, Optional[ModeFunction]]:
    """Expected delta image as coefficient * profile of a target mode (real profiles)."""
    fam, lam, n = mode.family, mode.lam, mode.n
    p = ExtensionParams(lam)
    if direction is Direction.MINUS:
        if fam in (Family.I, Family.V):
            if n == 0:
                return 0.0, None
            return math.sqrt(n * (n + 2 * lam - 1)), make_mode(fam, lam, n - 1)
        if fam is Family.II:
            if lam < 1.0:
                if n == 0:
                    return 0.0, None
                return ladder_coefficients(p, fam, n - 1), make_mode(fam, lam, n - 1)
            c = anomalous_coefficient(p, fam)
            if n == 0:
                return c, make_mode(fam, lam, 1)
            if n == 1:
                return c, make_mode(fam, lam, 0)
            return ladder_coefficients(p, fam, n - 1), make_mode(fam, lam, n - 1)
        if fam in (Family.III, Family.IV):
            sign = 1.0 if fam is Family.III else -1.0
            if n == 0:
                return sign * anomalous_coefficient(p, fam), mode
            return sign * ladder_coefficients(p, fam, n - 1), make_mode(fam, lam, n - 1)
        if fam is Family.LAMBDA1_DIRICHLET:
            if n == 1:
                return 0.0, None
            sign = 1.0 if n % 2 == 0 else -1.0
            return sign * math.sqrt(n * (n - 1)), make_mode(fam, lam, n - 1)
        if fam is Family.LAMBDA1_NEUMANN:
            if n == 0:
                return 0.0, None
            if n == 1:
                # lands on the omega = 0 constant
                return mode.norm, make_mode(fam, lam, 0)
            sign = 1.0 if n % 2 == 1 else -1.0
            return sign * math.sqrt(n * (n - 1)), make_mode(fam, lam, n - 1)
    else:
        if fam in (Family.I, Family.V):
            return -math.sqrt((n + 1) * (n + 2 * lam)), make_mode(fam, lam, n + 1)
        if fam is Family.II:
            if lam > 1.0 and n == 0:
                return 0.0, None
            return -ladder_coefficients(p, fam, n), make_mode(fam, lam, n + 1)
        if fam in (Family.III, Family.IV):
            sign = -1.0 if fam is Family.III else 1.0
            return sign * ladder_coefficients(p, fam, n), make_mode(fam, lam, n + 1)
    raise ValueError(f"no ladder target for family {fam.value} in direction {direction.value}")


def verify_ladder_numerically(params: ExtensionParams, family: Family, n: int,
                              direction="minus", n_grid: int = 201) -> float:
    """Max deviation of (cos d/drho +- omega sin) Psi_n from the expected target on a grid.

    delta_- raises nothing: it is the action of +i L_- at t = 0 and maps
    Psi_n to the coefficient times the profile of the lower mode (or of a
    conjugate mode for the anomalous couplings).
    """
    direction = _direction(direction)
    mode = make_mode(family, params.lam, n)
    coef, target = _ladder_target(mode, direction)
    sgn = 1.0 if direction is Direction.MINUS else -1.0
    err = 0.0
    for rho in np.linspace(-1.5, 1.5, n_grid):
        p = point_from_rho(float(rho))
        lhs = p.c * mode_profile_derivative(mode, p) + sgn * mode.omega * p.s * mode_profile(mode, p)
        rhs = 0.0 if target is None else coef * mode_profile(target, p)
        err = max(err, abs(lhs - rhs))
    return err


# truncated Fock space ----------------------------------------------------------------

@dataclass(frozen=True)
class FockTruncation:
    n_modes: int
    max_total_occupation: int

    def basis(self) -> List[Tuple[int, ...]]:
        """Occupation vectors with total <= max, in lexicographic order."""
        out = []
        for occ in itertools.product(range(self.max_total_occupation + 1), repeat=self.n_modes):
            if sum(occ) <= self.max_total_occupation:
                out.append(occ)
        return out

    def protected(self, occ: Tuple[int, ...]) -> bool:
        """States on which products of two charges never leave the truncation."""
        return sum(occ) <= self.max_total_occupation - 2 and occ[-1] == 0


class _FockSpace:
    def __init__(self, trunc: FockTruncation):
        self.trunc = trunc
        self.states = trunc.basis()
        self.index = {s: i for i, s in enumerate(self.states)}
        self.dim = len(self.states)
        self.create = [self._creation(i) for i in range(trunc.n_modes)]
        self.annihilate = [a.T.tocsr() for a in self.create]

    def _creation(self, mode: int) -> sparse.csr_matrix:
        rows, cols, vals = [], [], []
        for j, s in enumerate(self.states):
            t = list(s)
            t[mode] += 1
            t = tuple(t)
            i = self.index.get(t)
            if i is not None:
                rows.append(i)
                cols.append(j)
                vals.append(math.sqrt(s[mode] + 1))
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def number(self, mode: int) -> sparse.csr_matrix:
        return (self.create[mode] @ self.annihilate[mode]).tocsr()


def fock_commutator_check(params: ExtensionParams, family: Family,
                          trunc: FockTruncation) -> Dict[str, object]:
    """Check [L+, L-] = 2 L0 on the protected subspace and report the vacuum L0.

    Mixed (family III/IV):
      i L+ = sum_n k_n a+_{n+1} a_n - (lambda - 1/2)/2 (a+_0)^2,
      L0 = sum_n (n + 1/2) a+_n a_n + (lambda - 1/2)^2 / 4.
    Neumann, 1 < lambda < 3/2:
      i L+ = sum_{n>=1} q_n a+_{n+1} a_n - sqrt(2(lambda - 1)) a+_1 a+_0,
      L0 = sum_n omega_n a+_n a_n + (lambda - 1).
    L- = -(L+)^dagger.
    """
    if trunc.max_total_occupation < 4 or trunc.n_modes < 3:
        raise ValueError("truncation too small: need n_modes >= 3 and max occupation >= 4")
    lam = params.lam
    fs = _FockSpace(trunc)
    ad, a = fs.create, fs.annihilate
    nm = trunc.n_modes
    x = sparse.csr_matrix((fs.dim, fs.dim), dtype=complex)
    l0 = sparse.csr_matrix((fs.dim, fs.dim), dtype=complex)
    if family in (Family.III, Family.IV):
        if not (0.5 < lam < 1.5):
            raise ValueError("mixed family needs 1/2 < lambda < 3/2")
        p = ExtensionParams(lam)
        for n in range(nm - 1):
            x = x + ladder_coefficients(p, Family.III, n) * (ad[n + 1] @ a[n])
        x = x - 0.5 * (lam - 0.5) * (ad[0] @ ad[0])
        for n in range(nm):
            l0 = l0 + (n + 0.5) * fs.number(n)
        vac = (lam - 0.5) ** 2 / 4.0
        omegas = [n + 0.5 for n in range(nm)]
    elif family is Family.II:
        if not (1.0 < lam < 1.5):
            raise ValueError("the Neumann Fock check needs 1 < lambda < 3/2")
        p = ExtensionParams(lam)
        for n in range(1, nm - 1):
            x = x + ladder_coefficients(p, Family.II, n) * (ad[n + 1] @ a[n])
        x = x - math.sqrt(2.0 * (lam - 1.0)) * (ad[1] @ ad[0])
        omegas = [lam - 1.0] + [1.0 - lam + n for n in range(1, nm)]
        for n in range(nm):
            l0 = l0 + omegas[n] * fs.number(n)
        vac = lam - 1.0
    else:
        raise ValueError("Fock check is for the Neumann and mixed families")
    l0 = (l0 + vac * sparse.identity(fs.dim, format="csr")).tocsr()
    l_plus = (-1j * x).tocsr()
    l_minus = (-l_plus.conj().T).tocsr()
    comm = (l_plus @ l_minus - l_minus @ l_plus - 2.0 * l0).tocsc()
    protected = [i for i, s in enumerate(fs.states) if trunc.protected(s)]
    err = 0.0
    for j in protected:
        col = comm[:, j]
        if col.nnz:
            err = max(err, float(np.max(np.abs(col.data))))
    vac_index = fs.index[tuple([0] * nm)]
    vacuum_l0 = complex(l0[vac_index, vac_index]).real
    one_particle = []
    for n in range(nm):
        occ = [0] * nm
        occ[n] = 1
        i = fs.index[tuple(occ)]
        one_particle.append(complex(l0[i, i]).real - vacuum_l0)
    # L0 is diagonal, so the vacuum value is an eigenvalue
    offdiag = abs(l0 - sparse.diags(l0.diagonal())).max()
    return {
        "commutator_error": err,
        "vacuum_L0": vacuum_l0,
        "one_particle_shifts": one_particle,
        "omegas": omegas,
        "protected_states": len(protected),
        "dimension": fs.dim,
        "l0_offdiagonal": float(offdiag),
    }
