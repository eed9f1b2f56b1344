import numpy as np
import pytest

from sqfn.errors import (ParameterError, ResolutionError, SpectralTailError)
from sqfn.grid import Grid, GridFunction
from sqfn.spectral import (HermiteOscillator1D, LaplacianTorus,
                           fit_gaussian_bound)


@pytest.fixture(scope="module")
def torus():
    return LaplacianTorus(Grid(1, 128, 1.0))


@pytest.fixture(scope="module")
def hermite():
    return HermiteOscillator1D(Grid(1, 256, 22.5), 128)


def _mode(grid, m):
    x = grid.axis_coords()
    return GridFunction(grid, np.cos(np.pi * m * x / grid.half_width))


def test_heat_single_mode_eigenvalue(torus):
    g = torus.grid
    m = 5
    f = _mode(g, m)
    t = 0.01
    u = torus.heat_semigroup(t, f)
    lam = (np.pi * m / g.half_width) ** 2
    np.testing.assert_allclose(u.values.real, np.exp(-t * lam) * f.values.real,
                               atol=1e-13)


def test_gradient_is_derivative(torus):
    g = torus.grid
    m = 3
    x = g.axis_coords()
    f = GridFunction(g, np.sin(np.pi * m * x))
    (df,) = torus.gradient(f)
    np.testing.assert_allclose(df.values.real, np.pi * m * np.cos(np.pi * m * x),
                               atol=1e-9)


def test_wave_cosine_mode(torus):
    g = torus.grid
    f = _mode(g, 4)
    t = 0.3
    u = torus.wave_cosine(t, f)
    s = np.pi * 4 / g.half_width
    np.testing.assert_allclose(u.values.real, np.cos(t * s) * f.values.real,
                               atol=1e-13)


def test_poisson_subordination_agrees(torus):
    # the Laguerre rule is converged once t * s >= ~5 for every nonzero
    # spectral node (the subordination integrand then lives away from
    # the u -> 0 singularity); the torus has s_min = pi
    g = torus.grid
    rng = np.random.default_rng(3)
    f = GridFunction(g, rng.standard_normal(g.shape))
    t = 2.0
    a = torus.poisson_semigroup(t, f, method="multiplier")
    b = torus.poisson_semigroup(t, f, method="subordination")
    scale = float(np.max(np.abs(a.values)))
    assert np.max(np.abs(a.values - b.values)) < 1e-6 * scale


def test_poisson_subordination_guard_fires(torus):
    # mid-range t * s: the 48/64-node comparison must reject the answer
    from sqfn.errors import AccuracyError

    g = torus.grid
    f = _mode(g, 1)
    with pytest.raises(AccuracyError):
        torus.poisson_semigroup(0.05, f, method="subordination")


def test_kernel_matrix_is_symmetric_circulant(torus):
    km = torus.kernel_matrix(lambda s: np.exp(-0.01 * s**2))
    assert km.symmetry_defect() < 1e-12
    e = np.asarray(km.entries)
    # circulant: every row is a rotation of the first
    np.testing.assert_allclose(e[1], np.roll(e[0], 1), atol=1e-12)


def test_kernel_matrix_applies_like_multiplier(torus):
    g = torus.grid
    rng = np.random.default_rng(4)
    f = GridFunction(g, rng.standard_normal(g.shape))
    km = torus.kernel_matrix(lambda s: np.exp(-0.02 * s**2))
    via_kernel = km.apply(f)
    direct = torus.heat_semigroup(0.02, f)
    np.testing.assert_allclose(via_kernel.values, direct.values, atol=1e-11)


def test_kernel_profile_matches_matrix_column(torus):
    profile = lambda s: np.exp(-0.05 * s**2)
    dist, col = torus.kernel_profile(profile, oversample=4)
    km = torus.kernel_matrix(profile)
    n = torus.grid.points_per_axis
    coarse = np.asarray(km.entries)[0]
    # every 4th oversampled value must reproduce the matrix column
    np.testing.assert_allclose(col[::4].real, coarse.real, atol=1e-10)
    assert dist.size == 4 * n


def test_time_budget_guard(torus):
    g = torus.grid
    f = _mode(g, 1)
    with pytest.raises(ParameterError):
        torus.heat_semigroup(-0.1, f)


def test_hermite_orthonormality_guard():
    # too many modes for the window: the top eigenfunctions alias
    with pytest.raises(ResolutionError):
        HermiteOscillator1D(Grid(1, 256, 10.0), 128)


def test_hermite_eigenfunction_heat(hermite):
    k = 17
    coeffs = np.zeros(hermite.truncation)
    coeffs[k] = 1.0
    f = hermite.synthesize(coeffs)
    t = 0.05
    u = hermite.heat_semigroup(t, f)
    np.testing.assert_allclose(u.values.real,
                               np.exp(-t * (2 * k + 1)) * f.values.real,
                               atol=1e-10)


def test_hermite_mehler_oracle(hermite):
    t = 0.1
    km = hermite.kernel_matrix(lambda s: np.exp(-t * s**2))
    oracle = hermite.mehler_heat_kernel(t)
    # truncation at 128 modes: agreement to the truncated tail level
    assert np.max(np.abs(np.asarray(km.entries) - oracle)) < 1e-8 * np.max(oracle)


def test_hermite_ground_state_gradient_analytic(hermite):
    # d/dx [pi^{-1/4} e^{-x^2/2}] = -x * h_0(x), independent of the recurrence
    g = hermite.grid
    coeffs = np.zeros(hermite.truncation)
    coeffs[0] = 1.0
    h0 = hermite.synthesize(coeffs)
    (dh0,) = hermite.gradient(h0)
    x = g.axis_coords()
    np.testing.assert_allclose(dh0.values.real, -x * h0.values.real, atol=1e-10)


def test_hermite_gradient_matches_finite_difference(hermite):
    g = hermite.grid
    coeffs = np.zeros(hermite.truncation)
    coeffs[3] = 1.0
    coeffs[10] = -0.5
    f = hermite.synthesize(coeffs)
    (df,) = hermite.gradient(f)
    fd = np.gradient(f.values.real, g.spacing)
    interior = slice(10, -10)
    # second-order stencil at mode ~10: a few percent is the expected error
    np.testing.assert_allclose(df.values.real[interior], fd[interior],
                               atol=0.08 * np.max(np.abs(df.values)))


def test_hermite_rejects_unresolved_input(hermite):
    g = hermite.grid
    spike = np.zeros(g.shape)
    spike[g.points_per_axis // 2] = 1.0
    with pytest.raises(SpectralTailError):
        hermite.coefficients(GridFunction(g, spike))


def test_hermite_projection_idempotent(hermite):
    g = hermite.grid
    rng = np.random.default_rng(5)
    f = GridFunction(g, rng.standard_normal(g.shape))
    p1 = hermite.project(f)
    p2 = hermite.project(p1)
    np.testing.assert_allclose(p1.values, p2.values, atol=1e-10)


def test_fit_gaussian_bound_recovers_planted_constants():
    d = np.linspace(0.0, 3.0, 400)
    scale = 0.25
    C_true, c_true = 2.0, 1.7
    vals = C_true * np.exp(-(d**2) / (c_true * scale))
    C, c = fit_gaussian_bound(vals, d, scale, prefactor=1.0)
    assert c == pytest.approx(c_true, rel=0.05)
    assert C == pytest.approx(C_true, rel=0.1)


def test_laplacian_2d_mode():
    op = LaplacianTorus(Grid(2, 32, 1.0))
    g = op.grid
    x, y = g.coords()
    f = GridFunction(g, np.cos(np.pi * 2 * x) * np.cos(np.pi * 3 * y))
    t = 0.005
    u = op.heat_semigroup(t, f)
    lam = (np.pi * 2) ** 2 + (np.pi * 3) ** 2
    np.testing.assert_allclose(u.values.real, np.exp(-t * lam) * f.values.real,
                               atol=1e-12)
