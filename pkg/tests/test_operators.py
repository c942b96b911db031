import math

import numpy as np
import pytest
import scipy.linalg

from hinflab import (Operator, operator_from_json, resolvent, resolvent_stack,
                     sector_profile, strip_profile)
from hinflab.errors import NotSectorial, SpectrumHit
from hinflab.operators import principal_sqrt

from conftest import random_normal_sectorial


def test_resolvent_diagonal():
    a = Operator(np.diag([1.0, 2.0]))
    assert np.allclose(resolvent(a, 0.0), -np.diag([1.0, 0.5]), atol=1e-14)


def test_resolvent_scalar():
    a = Operator([[1.0]])
    assert resolvent(a, 2.0)[0, 0] == pytest.approx(1.0)


def test_resolvent_jordan_derived():
    a = Operator([[1.0, 1.0], [0.0, 1.0]])
    oracle = -np.linalg.inv(np.asarray(a.entries))  # direct 2x2 inverse of -A
    assert np.allclose(resolvent(a, 0.0), oracle, atol=1e-14)
    assert np.allclose(oracle, [[-1, 1], [0, -1]])


def test_resolvent_defect_identity():
    a = Operator(np.diag([1.0, 2.0, 5.0]))
    lam = 3.0 + 1j
    res = resolvent(a, lam)
    defect = np.linalg.norm((lam * np.eye(3) - a.entries) @ res - np.eye(3))
    assert defect <= 1e-10 * a.dim


def test_resolvent_spectrum_hit():
    a = Operator(np.diag([1.0, 2.0]))
    with pytest.raises(SpectrumHit):
        resolvent(a, 1.0 + 1e-15)


def test_resolvent_identity_random(rng):
    a = random_normal_sectorial(5, rng)
    lam, mu = 4.0 + 3.0j, -2.0 + 0.5j
    rl, rm = resolvent(a, lam), resolvent(a, mu)
    lhs = rl - rm
    rhs = (mu - lam) * rl @ rm
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(np.linalg.norm(lhs), 1.0)


def test_resolvent_stack_matches_pointwise(rng):
    a = random_normal_sectorial(4, rng)
    lams = np.array([2.0 + 1j, -1.0 + 2j, 5.0])
    stack = resolvent_stack(a, lams)
    for k, lam in enumerate(lams):
        assert np.allclose(stack[k], resolvent(a, lam), atol=1e-12)


def test_eigendecomposition_cache_certified(rng):
    a = random_normal_sectorial(6, rng)
    assert a.normality_flag
    recon = a.eig.vectors @ (a.eig.values[:, None] * a.eig.inverse)
    assert np.linalg.norm(recon - a.entries) <= 1e-10 * np.linalg.norm(a.entries)


def test_nonnormal_flagged():
    a = Operator([[1.0, 10.0], [0.0, 1.2]])
    assert not a.normality_flag


def test_sector_profile_diagonal():
    a = Operator(np.diag([1.0, 2.0]))
    prof = sector_profile(a, [math.pi / 2, 0.75 * math.pi], rays_per_angle=8)
    assert prof.omega_spec == 0.0
    # scalar oracle: sup_t t/sqrt(t^2+a^2) -> 1
    assert prof.M[math.pi / 2] == pytest.approx(1.0, abs=1e-9)
    # Hilbert identity: R-bound of {lam R(lam, A)} equals the sup-norm bound
    assert prof.r_bound_profile[math.pi / 2].value == pytest.approx(
        prof.M[math.pi / 2], rel=1e-9)


def test_sector_profile_normal_matches_1d_optimization(rng):
    a = random_normal_sectorial(4, rng, angle=0.2 * math.pi)
    sigma = 0.7 * math.pi
    prof = sector_profile(a, [sigma], rays_per_angle=8)
    # oracle: max over the ray of |lam| / dist(lam, spec) by dense 1-d scan
    lam_abs = np.geomspace(1e-6, 1e6, 20001)
    best = 0.0
    for sgn in (1, -1):
        lam = lam_abs * np.exp(1j * sgn * sigma)
        dist = np.abs(lam[:, None] - a.eigenvalues[None, :]).min(axis=1)
        best = max(best, float((lam_abs / dist).max()))
    assert prof.M[sigma] == pytest.approx(best, rel=0.05)


def test_sector_profile_arg_eigenvalue():
    a = Operator(np.diag([np.exp(1j * math.pi / 4)]))
    prof = sector_profile(a, [math.pi / 2], rays_per_angle=4)
    assert prof.omega_spec == pytest.approx(math.pi / 4, abs=1e-12)


def test_sector_profile_rejects_negative_axis():
    a = Operator(np.diag([-1.0, 2.0]))
    with pytest.raises(NotSectorial):
        sector_profile(a, [math.pi / 2])


def test_strip_profile_examples():
    b = Operator(1j * np.diag([1.0, -3.0]))
    prof = strip_profile(b, [1.0])
    assert prof.w_spec == 0.0
    assert prof.C[1.0] <= 1.0 + 1e-9  # normal: ||R|| = 1/dist <= 1/b
    b2 = Operator(np.diag([0.5 + 1j]))
    assert strip_profile(b2, [1.0]).w_spec == pytest.approx(0.5)


def test_square_root_factorization_identity():
    # A^{1/2} R(t e^{i om}) = [I + (e^{i nu} - e^{i om}) t R(t e^{i om})] A^{1/2} R(t e^{i nu})
    a = Operator(np.diag([0.5, 2.0, 7.0]))
    s = principal_sqrt(a)
    t, om, nu = 1.7, 2.6, 1.9
    r_om = resolvent(a, t * np.exp(1j * om))
    r_nu = resolvent(a, t * np.exp(1j * nu))
    lhs = s @ r_om
    rhs = (np.eye(3) + (np.exp(1j * nu) - np.exp(1j * om)) * t * r_om) @ (s @ r_nu)
    assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


def test_principal_sqrt_nonnormal_matches_scipy():
    a = Operator([[1.0, 1.0], [0.0, 1.2]])
    assert np.allclose(principal_sqrt(a),
                       scipy.linalg.sqrtm(np.asarray(a.entries)), atol=1e-9)


def test_operator_json_roundtrip(rng):
    a = random_normal_sectorial(3, rng)
    b = operator_from_json(a.to_json())
    assert np.allclose(a.entries, b.entries)
    d = operator_from_json({"diag_re": [1.0, 2.0], "diag_im": [0.5, 0.0]})
    assert np.allclose(d.entries, np.diag([1.0 + 0.5j, 2.0]))


def test_operator_rejects_nonfinite():
    with pytest.raises(ValueError):
        Operator([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        Operator([[1.0, 2.0, 3.0]])
