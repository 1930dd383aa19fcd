import math

import numpy as np
import pytest

from fracqm.errors import ConfigurationError, NumericalError
from fracqm.numerics import PhysicalParams, adaptive_quadrature, make_grid
from fracqm.spectral import EvolverConfig, Potential, evolve
from fracqm.statmech import (
    ThermoQuery,
    bloch_density_matrix,
    bloch_trace,
    bloch_trace_ladder,
    classical_partition_function,
    free_density_matrix,
    free_partition_function,
    momentum_density_matrix_weight,
)

P15 = PhysicalParams(1.0, 1.0, 1.5)
P2 = PhysicalParams.gaussian(mass=1.0)


def mehler_kernel(x, x0, beta, m=1.0, w=1.0, hbar=1.0):
    s = math.sinh(hbar * w * beta)
    c = math.cosh(hbar * w * beta)
    return math.sqrt(m * w / (2.0 * math.pi * hbar * s)) * math.exp(
        -m * w / (2.0 * hbar * s) * ((x * x + x0 * x0) * c - 2.0 * x * x0)
    )


def test_free_density_matrix_gaussian_reduction():
    for dx in (0.0, 0.4, 1.1, 2.3):
        for beta in (0.5, 1.0, 2.0):
            mine = free_density_matrix(dx, 0.0, beta, P2)
            ref = math.sqrt(1.0 / (2.0 * math.pi * beta)) * math.exp(
                -dx * dx / (2.0 * beta)
            )
            assert mine == pytest.approx(ref, rel=1e-10)


def test_free_density_matrix_diagonal_gamma_value():
    # confirmed: Gamma(1 + 2/3)/pi = 0.28735275145...
    assert free_density_matrix(0.0, 0.0, 1.0, P15) == pytest.approx(
        math.gamma(1.0 + 2.0 / 3.0) / math.pi, rel=1e-10
    )


def test_free_density_matrix_diagonal_beta_scaling():
    r = free_density_matrix(0.0, 0.0, 2.0, P15) / free_density_matrix(0.0, 0.0, 1.0, P15)
    assert r == pytest.approx(2.0 ** (-1.0 / 1.5), rel=1e-10)


def test_free_density_matrix_even_positive_peaked_normalized():
    vals = [free_density_matrix(x, 0.0, 1.0, P15) for x in (-2.0, -0.5, 0.0, 0.5, 2.0)]
    assert all(v > 0 for v in vals)
    assert vals[0] == pytest.approx(vals[-1], rel=1e-12)
    assert vals[1] == pytest.approx(vals[-2], rel=1e-12)
    assert vals[2] == max(vals)
    res = adaptive_quadrature(
        lambda x: free_density_matrix(x, 0.0, 1.0, P15), 0.0, np.inf, rel_tol=1e-8
    )
    assert 2.0 * res.value == pytest.approx(1.0, abs=1e-6)


def test_free_partition_function_values():
    # alpha=2 reduces to the classical ideal-gas expression
    z2 = free_partition_function(ThermoQuery(1.0, 3.0, P2))
    assert z2 == pytest.approx(3.0 * math.sqrt(1.0 / (2.0 * math.pi)), rel=1e-12)
    # alpha=1.5: the diagonal value fixes Z/Omega; confirmed 0.28735275...
    z15 = free_partition_function(ThermoQuery(1.0, 1.0, P15))
    assert z15 == pytest.approx(math.gamma(1.0 + 2.0 / 3.0) / math.pi, rel=1e-12)


def test_partition_function_scalings():
    base = free_partition_function(ThermoQuery(1.0, 1.0, P15))
    assert free_partition_function(ThermoQuery(1.0, 2.0, P15)) == pytest.approx(
        2.0 * base, rel=1e-14
    )
    assert free_partition_function(ThermoQuery(2.0, 1.0, P15)) == pytest.approx(
        2.0 ** (-1.0 / 1.5) * base, rel=1e-14
    )


def test_classical_partition_free_consistency():
    z_cl = classical_partition_function(Potential.free(), 1.0, P15, (0.0, 5.0))
    z = free_partition_function(ThermoQuery(1.0, 5.0, P15))
    assert z_cl == pytest.approx(z, rel=1e-10)


def test_classical_partition_harmonic_alpha2():
    z = classical_partition_function(Potential.harmonic(1.0, 1.0), 1.0, P2)
    assert z == pytest.approx(1.0, rel=1e-10)  # 1/(beta hbar omega)
    z2 = classical_partition_function(Potential.harmonic(1.0, 1.0), 2.0, P2)
    assert z2 == pytest.approx(0.5, rel=1e-10)


def test_classical_partition_divergent_integrand_rejected():
    grow = Potential(lambda x: -np.asarray(x, dtype=float) ** 2)
    with pytest.raises(NumericalError):
        classical_partition_function(grow, 1.0, P15)


def test_bloch_free_matches_quadrature():
    grid = make_grid(4096, 200.0)
    row = bloch_density_matrix(Potential.free(), 1.0, P15, grid, 0.0)
    mask = np.abs(grid.positions) < 30.0
    ref = np.array([free_density_matrix(x, 0.0, 1.0, P15) for x in grid.positions[mask]])
    assert np.max(np.abs(row[mask] - ref)) < 1e-5


def test_bloch_small_beta_concentrates_at_start():
    grid = make_grid(1024, 60.0)
    second_moments = []
    for beta in (0.2, 0.05, 0.01):
        row = bloch_density_matrix(Potential.free(), beta, P15, grid, 0.0, n_steps=16)
        m0 = np.sum(row) * grid.spacing
        second_moments.append(float(np.sum(grid.positions**2 * row) / m0 * grid.spacing))
    assert second_moments[0] > second_moments[1] > second_moments[2]


def test_bloch_harmonic_matches_mehler():
    grid = make_grid(512, 40.0)
    x0 = 0.3
    row = bloch_density_matrix(Potential.harmonic(1.0, 1.0), 1.0, P2, grid, x0)
    x0_snap = grid.positions[int(np.argmin(np.abs(grid.positions - x0)))]
    ref = np.array([mehler_kernel(x, x0_snap, 1.0) for x in grid.positions])
    assert np.max(np.abs(row - ref)) < 1e-5


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8, 2.0])
def test_bloch_semigroup(alpha):
    params = PhysicalParams.gaussian(mass=1.0) if alpha == 2.0 else PhysicalParams(1.0, 1.0, alpha)
    grid = make_grid(512, 60.0)
    pot = Potential.harmonic(1.0, 1.0)
    from fracqm.numerics import ComplexField

    spike = np.zeros(512, dtype=complex)
    spike[256] = 1.0 / grid.spacing
    field = ComplexField(spike, grid)
    dt = 1.0 / 256.0
    half = evolve(field, pot, params, EvolverConfig(dt, 128, mode="imaginary_time"))
    full = evolve(half, pot, params, EvolverConfig(dt, 128, mode="imaginary_time"))
    direct = evolve(field, pot, params, EvolverConfig(dt, 256, mode="imaginary_time"))
    assert np.max(np.abs(full.values - direct.values)) < 1e-8


def test_bloch_positivity_for_positive_potential():
    grid = make_grid(512, 40.0)
    row = bloch_density_matrix(Potential.harmonic(1.0, 1.0), 1.0, P15, grid, 0.0)
    assert np.min(row) > -1e-10


def test_trace_identity_free():
    grid = make_grid(2048, 120.0)
    tr = bloch_trace(Potential.free(), 1.0, P15, grid)
    z = free_partition_function(ThermoQuery(1.0, 120.0, P15))
    assert tr == pytest.approx(z, rel=1e-4)


def test_classical_ratio_monotone_on_beta_ladder():
    grid = make_grid(512, 50.0)
    pot = Potential.harmonic(1.0, 1.0)
    ladder = bloch_trace_ladder(pot, 0.125, 4, P15, grid)
    ratios = [classical_partition_function(pot, b, P15) / tr for b, tr in ladder][::-1]
    gaps = [abs(r - 1.0) for r in ratios]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert ratios[-1] == pytest.approx(1.0, abs=5e-3)


def test_momentum_weight_values():
    assert momentum_density_matrix_weight(0.0, 1.0, P15) == 1.0
    assert momentum_density_matrix_weight(1.0, 1.0, P15) == pytest.approx(
        math.exp(-1.0), rel=1e-14
    )
    # alpha=2 Maxwell weight e^{-beta p^2 / 2m}
    assert momentum_density_matrix_weight(1.3, 0.7, P2) == pytest.approx(
        math.exp(-0.7 * 1.3**2 / 2.0), rel=1e-14
    )
    ps = np.array([0.5, 1.5])
    assert np.array_equal(
        momentum_density_matrix_weight(ps, 1.0, P15),
        momentum_density_matrix_weight(-ps, 1.0, P15),
    )


def test_thermo_query_validation():
    with pytest.raises(ConfigurationError):
        ThermoQuery(-1.0, 1.0, P15)
    with pytest.raises(ConfigurationError):
        ThermoQuery(1.0, 0.0, P15)
