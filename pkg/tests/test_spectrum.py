import csv
import io
import json
import math
import time
import warnings

import numpy as np
import pytest

from ads2.boundary import ExtensionParams, SelfAdjointBC
from ads2.modes import l2_inner_product, point_from_rho, spatial_solution_at
from ads2.spectrum import (ScanResolutionWarning, find_spectrum, finite_difference_oracle,
                           negative_modes_robin, null_vector, omega_from_sq,
                           quantization_determinant, rayleigh_core_integral,
                           rayleigh_quotient_unbounded)


def omegas(lam, bc, hi, lo=-1.0, n_points=2001):
    return find_spectrum(ExtensionParams(lam), bc, (lo, hi), tol=1e-12, n_points=n_points).omega_sq


# determinant

def test_determinant_examples():
    d = SelfAdjointBC.dirichlet()
    p = ExtensionParams(0.75)
    assert abs(quantization_determinant(p, d, 0.75 ** 2)) < 1e-10
    assert abs(quantization_determinant(p, d, 0.64)) > 1e-3
    assert abs(quantization_determinant(ExtensionParams(0.9), SelfAdjointBC.mixed90(), 0.25)) < 1e-10


def test_determinant_real_for_random_bc():
    rng = np.random.default_rng(3)
    from scipy.stats import unitary_group
    for seed in range(10):
        bc = SelfAdjointBC.from_matrix(unitary_group.rvs(2, random_state=seed))
        for x in rng.uniform(-20, 40, size=5):
            v = quantization_determinant(ExtensionParams(0.8), bc, x)
            assert math.isfinite(v)


def test_omega_from_sq():
    assert omega_from_sq(4.0) == 2.0
    assert omega_from_sq(-9.0) == 3j


# named spectra

def test_dirichlet_spectrum():
    got = omegas(0.75, SelfAdjointBC.dirichlet(), 30.0, lo=0.0)
    assert len(got) == 5
    for n, x in enumerate(got):
        assert math.sqrt(x) == pytest.approx(0.75 + n, abs=1e-8)


def test_neumann_spectrum():
    got = omegas(0.75, SelfAdjointBC.neumann(), 30.0, lo=0.0)
    assert got[:3] == pytest.approx([0.0625, 1.5625, 5.0625], abs=1e-8)


@pytest.mark.parametrize("lam", [0.6, 0.9, 1.2, 1.4])
@pytest.mark.parametrize("name", ["mixed0", "mixed90"])
def test_mixed_spectrum_lambda_independent(lam, name):
    got = omegas(lam, SelfAdjointBC.named(name), 40.0)
    assert len(got) >= 6
    for n, x in enumerate(got[:6]):
        assert math.sqrt(x) == pytest.approx(n + 0.5, abs=1e-8)


def test_unique_extension_regime():
    got = omegas(2.0, None, 20.0, lo=0.0)
    assert [math.sqrt(x) for x in got] == pytest.approx([2, 3, 4], abs=1e-8)


def test_invalid_arguments():
    p = ExtensionParams(0.75)
    with pytest.raises(ValueError):
        find_spectrum(p, SelfAdjointBC.dirichlet(), (5.0, 1.0))
    with pytest.raises(ValueError):
        find_spectrum(p, SelfAdjointBC.dirichlet(), (0.0, 1.0), tol=0.0)
    with pytest.raises(ValueError):
        quantization_determinant(p, None, 1.0)


def test_spectrum_invariants():
    p = ExtensionParams(0.8)
    bc = SelfAdjointBC.robin(0.4, 0.3 - 0.2j, -0.7)
    sp = find_spectrum(p, bc, (-25.0, 60.0), tol=1e-11)
    vals = sp.omega_sq
    assert vals == sorted(vals)
    for x in vals:
        # a genuine sign change brackets each simple root
        lo = quantization_determinant(p, bc, x - 1e-8)
        hi = quantization_determinant(p, bc, x + 1e-8)
        assert lo * hi <= 0


def test_threads_give_same_result():
    p = ExtensionParams(0.8)
    bc = SelfAdjointBC.pauli(0.4, 0.3)
    a = find_spectrum(p, bc, (-5, 30), n_points=401).omega_sq
    b = find_spectrum(p, bc, (-5, 30), n_points=401, threads=4).omega_sq
    assert a == b


def test_scan_resolution_warning():
    # a coarse grid over a dense window merges neighbouring roots
    p = ExtensionParams(0.75)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        sp = find_spectrum(p, SelfAdjointBC.pauli(0.3, 0.0), (0.0, 400.0), n_points=12)
    flagged = any(issubclass(w.category, ScanResolutionWarning) for w in rec)
    assert flagged == bool(sp.warnings)


# serialization

def test_json_and_csv():
    sp = find_spectrum(ExtensionParams(1.0), SelfAdjointBC.symmetric_robin(1.0), (-25, 10))
    body = json.loads(sp.to_json())
    assert body["schema"] == 1
    recs = body["eigenvalues"]
    assert set(recs[0]) == {"omega_sq", "omega_or_nu", "negative", "multiplicity"}
    assert recs[0]["negative"] is True
    rows = list(csv.reader(io.StringIO(sp.to_csv())))
    assert rows[0] == ["omega_sq", "omega", "negative", "multiplicity"]
    assert len(rows) == len(recs) + 1
    assert float(rows[1][0]) == recs[0]["omega_sq"]


# eigenfunctions

def _eigenfunction(params, bc, x):
    c1, c2 = null_vector(params, bc, x)
    w = omega_from_sq(x)
    return lambda p: spatial_solution_at(params, w, c1, c2, p)


@pytest.mark.parametrize("lam,bc", [(0.75, SelfAdjointBC.robin(0.4, 0.3 - 0.2j, -0.7)),
                                    (1.25, SelfAdjointBC.pauli(0.6, 0.4)),
                                    (0.5, SelfAdjointBC.dirichlet())])
def test_eigenfunction_ode_residual(lam, bc):
    p = ExtensionParams(lam)
    h = 1e-3
    m2 = lam * (lam - 1)
    for x in find_spectrum(p, bc, (-25.0, 40.0)).omega_sq[:4]:
        f = _eigenfunction(p, bc, x)
        for rho in np.linspace(-1.4, 1.4, 13):
            v = [f(point_from_rho(rho + k * h)) for k in (-2, -1, 0, 1, 2)]
            d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
            pot = m2 / math.cos(rho) ** 2 * v[2]
            res = -d2 + pot - x * v[2]
            scale = abs(d2) + abs(pot) + abs(x * v[2]) + max(abs(t) for t in v)
            assert abs(res) <= 1e-6 * scale


@pytest.mark.parametrize("lam,bc", [(0.75, SelfAdjointBC.robin(0.4, 0.3 - 0.2j, -0.7)),
                                    (1.25, SelfAdjointBC.pauli(0.6, 0.4))])
def test_eigenfunction_orthogonality(lam, bc):
    p = ExtensionParams(lam)
    roots = find_spectrum(p, bc, (-25.0, 40.0)).omega_sq[:4]
    fs = [_eigenfunction(p, bc, x) for x in roots]
    norms = [math.sqrt(l2_inner_product(f, f).real) for f in fs]
    for i in range(len(fs)):
        for j in range(i):
            ov = l2_inner_product(fs[i], fs[j]) / (norms[i] * norms[j])
            assert abs(ov) < 1e-8


# finite-difference oracle

def _fd_errors(params, bc, reference, grids=(200, 400, 800), k=5):
    return [np.max(np.abs(finite_difference_oracle(params, bc, n, k)[:k] - reference[:k]))
            for n in grids]


def test_oracle_dirichlet_lambda_one():
    ref = np.array([1.0, 4.0, 9.0, 16.0, 25.0])
    errs = _fd_errors(ExtensionParams(1.0), SelfAdjointBC.dirichlet(), ref)
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] > 3.0 and errs[0] / errs[1] > 3.0
    assert errs[2] < 1e-4 * ref[-1]


def test_oracle_neumann_zero_mode():
    e = finite_difference_oracle(ExtensionParams(1.0), SelfAdjointBC.neumann(), 400, 3)
    # roundoff floor of the generalized eigensolver
    assert abs(e[0]) < 1e-6


def test_oracle_order_h_squared_middle():
    p = ExtensionParams(0.75)
    bc = SelfAdjointBC.pauli(math.pi / 4, 0.0)
    ref = np.array(find_spectrum(p, bc, (-5.0, 40.0)).omega_sq[:5])
    errs = _fd_errors(p, bc, ref)
    for a, b in zip(errs, errs[1:]):
        assert 3.0 < a / b < 5.0


def test_oracle_pauli_quarter():
    p = ExtensionParams(0.8)
    bc = SelfAdjointBC.pauli(math.pi / 4, 0.0)
    ref = np.array(find_spectrum(p, bc, (0.0, 10.0)).omega_sq)
    fd = finite_difference_oracle(p, bc, 800, len(ref))
    errs = _fd_errors(p, bc, ref, grids=(400, 800), k=len(ref))
    assert errs[1] < errs[0]
    assert np.max(np.abs(fd - ref)) < 1e-3


def test_oracle_rejects_coarse_grid_and_edge():
    with pytest.raises(ValueError):
        finite_difference_oracle(ExtensionParams(0.75), SelfAdjointBC.dirichlet(), 100)
    with pytest.raises(ValueError):
        finite_difference_oracle(ExtensionParams(0.5), SelfAdjointBC.dirichlet(), 400)


@pytest.mark.slow
@pytest.mark.parametrize("lam", [0.75, 1.0, 1.25])
def test_oracle_agreement_random_robin(lam):
    p = ExtensionParams(lam)
    rng = np.random.default_rng(int(lam * 100))
    for _ in range(20):
        alpha, gamma_ = rng.normal(size=2)
        beta = complex(*rng.normal(size=2))
        bc = SelfAdjointBC.robin(alpha, beta, gamma_)
        fd_coarse = finite_difference_oracle(p, bc, 200, 5)
        fd_fine = finite_difference_oracle(p, bc, 400, 5)
        lo = min(-25.0, 1.5 * fd_fine[0] - 10.0)
        ref = np.array(find_spectrum(p, bc, (lo, fd_fine[-1] + 20.0)).omega_sq[:5])
        e_coarse = np.max(np.abs(fd_coarse - ref))
        e_fine = np.max(np.abs(fd_fine - ref))
        # second-order convergence towards the root-finder values
        assert e_fine < 0.4 * e_coarse + 1e-9
        assert e_fine < 1e-2 * max(1.0, np.max(np.abs(ref)))


# negative modes at lambda = 1

@pytest.mark.parametrize("alpha,parities", [(1.6, ["even"]), (2.0, ["even"]), (5.0, ["even"]),
                                            (0.1, ["even", "odd"]), (1.0, ["even", "odd"]),
                                            (1.5, ["even", "odd"])])
def test_negative_modes(alpha, parities):
    roots = negative_modes_robin(alpha)
    assert [r["parity"] for r in roots] == parities
    for r in roots:
        nu = r["nu"]
        if r["parity"] == "even":
            assert abs(1.0 / math.tanh(nu * math.pi / 2) - alpha * nu) < 1e-10
        else:
            assert abs(math.tanh(nu * math.pi / 2) - alpha * nu) < 1e-10


def test_negative_modes_small_alpha():
    nu = negative_modes_robin(0.01)[0]["nu"]
    assert abs(nu * 0.01 - 1.0) < 0.01
    with pytest.raises(ValueError):
        negative_modes_robin(0.0)


def test_negative_modes_match_spectrum_and_oracle():
    p = ExtensionParams(1.0)
    bc = SelfAdjointBC.symmetric_robin(1.0)
    nus = sorted(r["nu"] for r in negative_modes_robin(1.0))
    expected = sorted(-nu * nu for nu in nus)
    neg = [x for x in find_spectrum(p, bc, (-25.0, 10.0), tol=1e-12).omega_sq if x < 0]
    assert neg == pytest.approx(expected, abs=1e-9)
    errs = [np.max(np.abs(finite_difference_oracle(p, bc, n, 2) - expected)) for n in (200, 400, 800)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] > 3.0
    assert errs[2] < 1e-5


# quadratic form below -1/4

def test_rayleigh_core_integral():
    assert rayleigh_core_integral(0.0, math.pi / 3) == pytest.approx(math.sin(math.pi / 3) / 2, abs=1e-12)


def test_rayleigh_decreases():
    assert rayleigh_quotient_unbounded(1.0, 0.99 * math.pi / 2) < rayleigh_quotient_unbounded(1.0, 0.9 * math.pi / 2)
    vals = [rayleigh_quotient_unbounded(1.0, math.pi / 2 - 2.0 ** -k) for k in range(3, 11)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # the decrease is logarithmic in 1 / (pi/2 - eta)
    steps = np.diff(vals)
    assert np.allclose(steps, -math.log(2.0), atol=0.05)


def test_rayleigh_rejects():
    with pytest.raises(ValueError):
        rayleigh_quotient_unbounded(0.0, 1.0)
    with pytest.raises(ValueError):
        rayleigh_quotient_unbounded(1.0, 0.2)


def test_dirichlet_runtime():
    t0 = time.perf_counter()
    find_spectrum(ExtensionParams(0.55), SelfAdjointBC.dirichlet(), (0.0, 120.0))
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.parametrize("n_points", [12, 20, 30, 50])
def test_close_pair_resolved_on_coarse_grid(n_points):
    # even and odd negative modes at alpha = 0.2 differ by ~3e-5 in omega^2
    p = ExtensionParams(1.0)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        sp = find_spectrum(p, SelfAdjointBC.symmetric_robin(0.2), (-40.0, 5.0), n_points=n_points)
    expected = sorted(-r["nu"] ** 2 for r in negative_modes_robin(0.2))
    neg = [e for e in sp.eigenvalues if e.negative]
    assert [e.multiplicity for e in neg] == [1, 1]
    assert [e.omega_sq for e in neg] == pytest.approx(expected, abs=1e-8)
    assert any(issubclass(w.category, ScanResolutionWarning) for w in rec)
