import math

import numpy as np
import pytest
import scipy.integrate

from hinflab import (Operator, SampledFunction, SpaceSpec, apply, fourier,
                     hilbert_pv, mellin_convolution, periodic_line_grid)
from hinflab.calculus import _cached_stack
from hinflab.errors import GridMismatch
from hinflab.grids import interval_grid, line_grid, ray_grid, sector_boundary_grid
from hinflab.kernels import (averaging_kernel, bilinear_adjoint,
                             cauchy_pv_kernel, dense_kernel, identity_kernel,
                             vertex_sensitivity)
from hinflab.operators import principal_sqrt
from hinflab.squarefn import embed_matrix, gamma_norm_of_matrix

from conftest import random_normal_sectorial


def test_apply_identity_equality(rng):
    sp = SpaceSpec(2, 2)
    g = interval_grid(1.0, 16)
    f = SampledFunction(g, rng.standard_normal((16, 2)) + 0j, sp)
    out, rep = apply(identity_kernel(g), f, seed=1)
    assert np.allclose(out.values, f.values)
    assert rep["out_norm"]["value"] == pytest.approx(rep["in_norm"]["value"])


def test_apply_averaging_projection_contracts(rng):
    sp = SpaceSpec(2, 3)
    g = interval_grid(2.0, 12)
    cells = [np.arange(0, 4), np.arange(4, 7), np.arange(7, 12)]
    proj = averaging_kernel(g, cells)
    f = SampledFunction(g, rng.standard_normal((12, 3)) + 0j, sp)
    out, rep = apply(proj, f, seed=2)
    assert rep["passed"]
    assert rep["out_norm"]["value"] <= rep["in_norm"]["value"] * (1 + 1e-12)
    # idempotent orthogonal projection in the weighted inner product
    assert np.linalg.norm(proj.matrix @ proj.matrix - proj.matrix) <= 1e-12


def test_apply_random_unit_norm_kernel_mc(rng):
    sp = SpaceSpec(3, 2)
    g = interval_grid(1.0, 10)
    k = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    ker = dense_kernel(k, g)
    scaled = dense_kernel(k / ker.l2_norm_estimate, g)
    assert scaled.l2_norm_estimate == pytest.approx(1.0, rel=1e-9)
    f = SampledFunction(g, rng.standard_normal((10, 2)) + 0j, sp)
    out, rep = apply(scaled, f, budget=8000, seed=3)
    assert rep["passed"]


def test_apply_grid_mismatch():
    sp = SpaceSpec(2, 1)
    g1, g2 = interval_grid(1.0, 8), interval_grid(2.0, 8)
    f = SampledFunction(g2, np.ones((8, 1)), sp)
    with pytest.raises(GridMismatch):
        apply(identity_kernel(g1), f)


def test_fourier_gaussian_bump_p2():
    sp = SpaceSpec(2, 2)
    g = periodic_line_grid(40.0, 1024)
    t = g.points.real
    vals = np.exp(-t ** 2 / 2)[:, None] * np.array([1.0, 2j])[None, :]
    f = SampledFunction(g, vals, sp)
    out, rep = fourier(f)
    assert rep["passed"] and rep["isometry_defect"] <= 1e-8
    # self-dual Gaussian oracle
    xi = out.grid.points.real
    assert np.abs(out.values[:, 0] - np.exp(-xi ** 2 / 2)).max() <= 1e-10


def test_fourier_delta_flat_modulus():
    sp = SpaceSpec(2, 1)
    g = periodic_line_grid(8.0, 64)
    vals = np.zeros((64, 1), dtype=complex)
    vals[10, 0] = 1.0
    out, _ = fourier(SampledFunction(g, vals, sp))
    mags = np.abs(out.values[:, 0])
    assert mags.max() == pytest.approx(mags.min(), rel=1e-12)


def test_fourier_parseval_disjoint_frequencies():
    sp = SpaceSpec(2, 2)
    g = periodic_line_grid(20.0, 512)
    t = g.points.real
    vals = (np.exp(1j * 2.0 * t)[:, None] * np.array([1.0, 0])[None, :]
            + np.exp(1j * 5.0 * t)[:, None] * np.array([0, 1.0])[None, :])
    vals *= np.exp(-t ** 2 / 16)[:, None]
    f = SampledFunction(g, vals, sp)
    out, _ = fourier(f)
    total = gamma_norm_of_matrix(embed_matrix(out), sp).value ** 2
    part1 = float(out.grid.weights @ np.abs(out.values[:, 0]) ** 2)
    part2 = float(out.grid.weights @ np.abs(out.values[:, 1]) ** 2)
    assert total == pytest.approx(part1 + part2, rel=1e-12)


def test_fourier_gamma_preserved_mc(rng):
    for p in (1.5, 3.0):
        sp = SpaceSpec(p, 2)
        g = periodic_line_grid(30.0, 256)
        t = g.points.real
        vals = (rng.standard_normal(2) + 1j * rng.standard_normal(2))[None, :] \
            * np.exp(-t ** 2 / 8)[:, None]
        f = SampledFunction(g, vals + 0j, sp)
        out, rep = fourier(f, budget=20_000, seed=int(p * 10))
        assert rep["passed"]


def test_fourier_needs_periodic_power_of_two():
    sp = SpaceSpec(2, 1)
    f = SampledFunction(line_grid(5.0, 64), np.ones((64, 1)), sp)
    with pytest.raises(GridMismatch):
        fourier(f)


def test_hilbert_line_cos_to_sin():
    # closed-form Hilbert pair oracle on a symmetric window, 4096 nodes
    half = 840.0
    g = line_grid(half, 4096)
    sp = SpaceSpec(2, 1)
    f = SampledFunction(g, np.cos(g.points.real)[:, None] + 0j, sp)
    out, kernel = hilbert_pv(f, "line")
    t = g.points.real
    inner = np.abs(t) <= half / 2  # away from the truncation edges
    rel = (np.linalg.norm(out.values[inner, 0].real - np.sin(t[inner]))
           / np.linalg.norm(np.sin(t[inner])))
    assert rel <= 1e-3
    assert kernel.l2_norm_estimate == pytest.approx(1.0, abs=0.05)


def test_hilbert_zero_input():
    g = line_grid(10.0, 128)
    sp = SpaceSpec(2, 2)
    out, _ = hilbert_pv(SampledFunction(g, np.zeros((128, 2)), sp), "line")
    assert np.count_nonzero(out.values) == 0


def test_sector_cauchy_identity(rng):
    # K applied to A^{1/2} R(., A) x with f == 1 returns ~0 (Cauchy identity)
    a = Operator(np.diag([1.0, 4.0]))
    g = sector_boundary_grid(2.2, 1e-6, 1e6, 40)
    root = principal_sqrt(a)
    stack = _cached_stack(a, g)
    x = np.array([1.0, 1.0 + 0.3j])
    vals = np.einsum("kij,j->ki", stack, x) @ root.T
    f = SampledFunction(g, vals, SpaceSpec(2, 2))
    out, _ = hilbert_pv(f, "sector-K")
    num = math.sqrt(float(g.weights @ (np.abs(out.values) ** 2).sum(axis=1)))
    den = math.sqrt(float(g.weights @ (np.abs(vals) ** 2).sum(axis=1)))
    assert num / den <= 1e-3


def test_sector_cauchy_constant_image_exact():
    g = sector_boundary_grid(1.0, 1e-4, 1e4, 30)
    kernel = cauchy_pv_kernel(g, include_plemelj=True)
    ones = np.ones(g.size, dtype=complex)
    from hinflab.kernels import _truncated_constant_image
    target = np.array([_truncated_constant_image(g, j)
                       for j in range(g.size)]) + 0.5
    assert np.abs(kernel.matrix @ ones - target).max() <= 1e-12


def test_vertex_sensitivity_reported():
    a = Operator(np.diag([1.0, 4.0]))
    root = principal_sqrt(a)
    x = np.array([1.0, -0.5])

    def build(cut):
        return sector_boundary_grid(2.2, cut, 1e5, 24)

    def fval(g):
        stack = _cached_stack(a, g)
        vals = np.einsum("kij,j->ki", stack, x) @ root.T
        return SampledFunction(g, vals, SpaceSpec(2, 2))

    rep = vertex_sensitivity(build, fval, [1e-4, 1e-6, 1e-8])
    assert rep["spread"] <= 1e-2
    assert len(rep["l2_ratios"]) == 3


def test_mellin_point_mass_identity():
    g = ray_grid(1e-3, 1e3, 30, "haar")
    sp = SpaceSpec(2, 1)
    m, du = g.size, g.params["du"]
    delta = np.zeros(2 * m - 1)
    delta[m - 1] = 1.0 / du
    f = SampledFunction(g, np.cos(np.log(g.points.real))[:, None] + 0j, sp)
    out, rep = mellin_convolution(delta, f)
    assert np.abs(out.values - f.values).max() <= 1e-12
    assert rep["l2_norm"] == pytest.approx(1.0, rel=1e-12)


def test_mellin_symbol_eigenfunction():
    # kernel g(t) = t^{1/2} e^{-t} acting on t^{-i xi}: multiplication by the
    # Mellin symbol, frozen from a direct quadrature oracle
    xi = 2.0
    re = scipy.integrate.quad(
        lambda u: math.exp(u / 2) * math.exp(-math.exp(u)) * math.cos(xi * u),
        -40, 6, limit=400)[0]
    im = scipy.integrate.quad(
        lambda u: math.exp(u / 2) * math.exp(-math.exp(u)) * math.sin(xi * u),
        -40, 6, limit=400)[0]
    symbol = re + 1j * im
    g = ray_grid(1e-8, 1e8, 30, "haar")
    sp = SpaceSpec(2, 1)
    f = SampledFunction(g, (g.points.real ** (-1j * xi))[:, None], sp)
    out, _ = mellin_convolution(lambda r: math.sqrt(r) * math.exp(-r), f)
    mid = g.size // 2
    got = out.values[mid, 0] / f.values[mid, 0]
    assert abs(got - symbol) <= 2e-3 * abs(symbol)


def test_mellin_l_operator_norm_bound():
    # the lifting operator with g(lam) = lam^{1/2}(1+lam)^{-1} on a rotated
    # ray: norm bounded by int |g(t e^{i gamma})| dt/t
    gamma_ang = 1.1
    g = ray_grid(1e-6, 1e6, 30, "haar")
    sp = SpaceSpec(2, 1)
    rot = np.exp(1j * gamma_ang)

    def kernel(r):
        lam = r * rot
        return np.sqrt(lam) / (1.0 + lam)

    f = SampledFunction(g, np.ones((g.size, 1), dtype=complex), sp)
    out, ker = mellin_convolution(kernel, f, return_kernel=True)
    bound = scipy.integrate.quad(
        lambda u: abs(complex(np.sqrt(math.exp(u) * rot)
                              / (1 + math.exp(u) * rot))), -14, 14, limit=400)[0]
    assert ker.l2_norm_estimate <= bound * (1 + 1e-6)


def test_bilinear_adjoint_duality(rng):
    # <K f, g> = <f, K' g> for the weighted bilinear pairing
    g = interval_grid(2.0, 10)
    k = dense_kernel(rng.standard_normal((10, 10)) + 0j, g)
    f = rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2))
    h = rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2))
    lhs = complex((g.weights * ((k.matrix @ f) * h).sum(axis=1)).sum())
    rhs = complex((g.weights * (f * (bilinear_adjoint(k) @ h)).sum(axis=1)).sum())
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_conjugated_multiplier_preserves_gamma_bound(rng):
    # F^{-1} N F with a gamma-bounded diagonal symbol keeps the inequality
    sp = SpaceSpec(2, 2)
    g = periodic_line_grid(20.0, 128)
    t = g.points.real
    vals = (rng.standard_normal((128, 2))
            * np.exp(-t ** 2 / 12)[:, None]) + 0j
    f = SampledFunction(g, vals, sp)
    fhat, _ = fourier(f, budget=400, seed=1)
    symbol = np.cos(3 * fhat.grid.points.real)  # |symbol| <= 1
    mult = fhat.with_values(symbol[:, None] * fhat.values)
    # inverse transform = forward with conjugation trick on the p = 2 path
    norm_in = gamma_norm_of_matrix(embed_matrix(f), sp).value
    norm_out = gamma_norm_of_matrix(embed_matrix(mult), sp).value
    assert norm_out <= norm_in * (1 + 1e-12)


def test_s_otimes_contract_every_kind(rng):
    # for every kernel kind on p = 2: ||K f||_gamma <= sigma_max ||f||_gamma
    sp = SpaceSpec(2, 2)
    g = interval_grid(1.0, 12)
    f = SampledFunction(g, rng.standard_normal((12, 2)) + 0j, sp)
    kins = [identity_kernel(g),
            averaging_kernel(g, [np.arange(0, 6), np.arange(6, 12)]),
            dense_kernel(rng.standard_normal((12, 12)) + 0j, g)]
    for ker in kins:
        out, rep = apply(ker, f, seed=9)
        assert rep["out_norm"]["value"] <= (ker.l2_norm_estimate
                                            * rep["in_norm"]["value"]) + 1e-8
