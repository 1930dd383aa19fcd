"""Analytic fractional statistical mechanics and the thermal-kernel solver.

Free thermal density matrix (the imaginary-time analogue of the free
kernel), its partition function, the classical-limit partition function,
and grid solutions of the thermal-kernel equation

    -d rho / d beta = [-D_alpha (hbar nabla)^alpha + V] rho,
    rho(x, 0 | x0) = delta(x - x0)

by imaginary-time split-operator stepping of a discrete delta spike.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, NumericalError
from .numerics import ComplexField, GridSpec, PhysicalParams
from .spectral import EvolverConfig, Potential, evolve, kinetic_symbol, refine_time_step

__all__ = [
    "ThermoQuery",
    "free_density_matrix",
    "free_partition_function",
    "classical_partition_function",
    "bloch_density_matrix",
    "bloch_matrix",
    "bloch_trace",
    "bloch_trace_ladder",
    "momentum_density_matrix_weight",
]


@dataclass(frozen=True)
class ThermoQuery:
    """Inverse temperature beta (1/erg) and linear system size omega (cm)."""

    beta: float
    omega: float
    params: PhysicalParams

    def __post_init__(self):
        if not (self.beta > 0):
            raise ConfigurationError(f"beta must be positive, got {self.beta}")
        if not (self.omega > 0):
            raise ConfigurationError(f"omega must be positive, got {self.omega}")


def free_density_matrix(x: float, x0: float, beta: float, params: PhysicalParams) -> float:
    """rho_0(x, beta | x0) = (1/2 pi hbar) integral dp e^{ip(x-x0)/hbar - beta D |p|^alpha}.

    Evaluated by cosine-transform quadrature (even in x - x0, maximal on the
    diagonal); integrates to one over x.
    """
    if not (beta > 0):
        raise ConfigurationError(f"beta must be positive, got {beta}")
    c = beta * params.d_alpha * params.hbar**params.alpha
    dx = abs(x - x0)
    # truncate where the damping reaches e^-45, then use the finite-interval
    # oscillatory rule (the infinite-interval cosine rule is unreliable for
    # rapidly decaying integrands)
    k_max = (45.0 / c) ** (1.0 / params.alpha)
    with warnings.catch_warnings():
        # convergence is checked explicitly on err below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if dx == 0.0:
            val, err = integrate.quad(
                lambda k: math.exp(-c * k**params.alpha), 0.0, k_max,
                epsabs=1e-14, epsrel=1e-13, limit=400,
            )
        else:
            val, err = integrate.quad(
                lambda k: math.exp(-c * k**params.alpha), 0.0, k_max,
                weight="cos", wvar=dx, epsabs=1e-14, epsrel=1e-13, limit=2000,
            )
    if not np.isfinite(val) or (err > 1e-8 * max(abs(val), 1e-30) and err > 1e-12):
        raise NumericalError(
            f"free density quadrature did not converge (error {err:.2e})", residual=err
        )
    return val / math.pi


def _kinetic_trace_factor(beta: float, params: PhysicalParams) -> float:
    """(1/2 pi hbar) integral dp e^{-beta D |p|^alpha}
    = Gamma(1 + 1/alpha) / (pi hbar (beta D)^(1/alpha)).

    This is the diagonal of the free thermal kernel.  Mind the constant:
    2 Gamma(1 + 1/alpha) = (2/alpha) Gamma(1/alpha), and dropping the
    2/alpha (invisible at alpha = 2) would break the trace identity.
    """
    return math.gamma(1.0 + 1.0 / params.alpha) / (
        math.pi * params.hbar * (beta * params.d_alpha) ** (1.0 / params.alpha)
    )


def free_partition_function(query: ThermoQuery) -> float:
    """Z = Omega * (1/2 pi hbar) integral dp e^{-beta D |p|^alpha}.

    Linear in Omega, scaling as beta^(-1/alpha); reduces to the classical
    ideal-gas Omega sqrt(m / 2 pi beta hbar^2) at alpha = 2.
    """
    return query.omega * _kinetic_trace_factor(query.beta, query.params)


def classical_partition_function(
    potential: Potential,
    beta: float,
    params: PhysicalParams,
    domain: tuple[float, float] | None = None,
) -> float:
    """Z_cl = [free-kernel diagonal] * integral e^{-beta V} over the domain.

    Valid when V changes little over the thermal wander scale; with V = 0 on
    a finite domain this reproduces free_partition_function.
    """
    if not (beta > 0):
        raise ConfigurationError(f"beta must be positive, got {beta}")
    lo, hi = domain if domain is not None else (-np.inf, np.inf)
    try:
        val, err = integrate.quad(
            lambda x: math.exp(-beta * float(potential.func(np.asarray([x]))[0])),
            lo, hi, epsabs=1e-12, epsrel=1e-11, limit=400,
        )
    except OverflowError as exc:
        raise NumericalError(
            "configurational integrand overflowed; e^(-beta V) is not "
            "integrable on the domain"
        ) from exc
    if not np.isfinite(val) or (err > 1e-6 * max(abs(val), 1e-30)):
        raise NumericalError(
            "configurational integral did not converge; "
            f"is e^(-beta V) integrable on the domain? (error {err:.2e})",
            residual=err,
        )
    return _kinetic_trace_factor(beta, params) * val


def _delta_field(grid: GridSpec, x0: float) -> ComplexField:
    # Kronecker spike of height 1/dx at the node nearest x0: unit grid mass
    values = np.zeros(grid.n_points, dtype=complex)
    idx = int(round((x0 + grid.length / 2.0) / grid.spacing)) % grid.n_points
    values[idx] = 1.0 / grid.spacing
    return ComplexField(values, grid)


def _pick_steps(
    potential: Potential,
    beta: float,
    params: PhysicalParams,
    grid: GridSpec,
    x0: float,
) -> int:
    field = _delta_field(grid, x0)
    dt = refine_time_step(
        field, potential, params, beta / 16.0, mode="imaginary_time", defect_tol=1e-8
    )
    return max(16, int(math.ceil(beta / dt)))


def bloch_density_matrix(
    potential: Potential,
    beta: float,
    params: PhysicalParams,
    grid: GridSpec,
    x0: float,
    n_steps: int | None = None,
) -> np.ndarray:
    """Row rho(., beta | x0) from split-operator imaginary-time evolution.

    The delta initial condition is a unit-mass grid spike; for V = 0 the
    splitting is exact and the result matches the free quadrature up to grid
    truncation.
    """
    if n_steps is None:
        n_steps = _pick_steps(potential, beta, params, grid, x0)
    cfg = EvolverConfig(dt=beta / n_steps, n_steps=n_steps, mode="imaginary_time")
    out = evolve(_delta_field(grid, x0), potential, params, cfg)
    imag_max = float(np.max(np.abs(out.values.imag)))
    real_max = float(np.max(np.abs(out.values.real)))
    if imag_max > 1e-10 * max(real_max, 1e-300):
        raise NumericalError(
            f"thermal kernel row acquired an imaginary part ({imag_max:.2e})",
            residual=imag_max,
        )
    return out.values.real.copy()


def bloch_matrix(
    potential: Potential,
    beta: float,
    params: PhysicalParams,
    grid: GridSpec,
    n_steps: int | None = None,
) -> np.ndarray:
    """Full kernel matrix rho[i, j] = rho(x_i, beta | x_j), all columns at once."""
    if n_steps is None:
        n_steps = _pick_steps(potential, beta, params, grid, 0.0)
    dt = beta / n_steps
    v = potential.on_grid(grid)
    half_v = np.exp(-0.5 * v * dt)[:, None]
    kin_fac = np.exp(-kinetic_symbol(grid, params) * dt)[:, None]
    rho = np.eye(grid.n_points, dtype=complex) / grid.spacing
    for step in range(n_steps):
        rho = half_v * rho
        rho = np.fft.ifft(kin_fac * np.fft.fft(rho, axis=0), axis=0)
        rho = half_v * rho
        if not np.all(np.isfinite(rho)):
            raise NumericalError(f"thermal kernel diverged at step {step}")
    return rho.real


def bloch_trace(
    potential: Potential,
    beta: float,
    params: PhysicalParams,
    grid: GridSpec,
    n_steps: int | None = None,
) -> float:
    """Grid trace integral of the kernel diagonal, sum rho(x, beta | x) dx."""
    rho = bloch_matrix(potential, beta, params, grid, n_steps)
    return float(np.trace(rho) * grid.spacing)


def bloch_trace_ladder(
    potential: Potential,
    beta_min: float,
    n_doublings: int,
    params: PhysicalParams,
    grid: GridSpec,
    n_steps: int | None = None,
) -> list[tuple[float, float]]:
    """Traces at beta_min * 2^k, k = 0..n_doublings, by matrix squaring.

    The kernel composes over imaginary time (rho_{2b} = rho_b rho_b dx), so
    one evolution to beta_min plus repeated squaring covers the whole ladder
    at the cost of the shortest leg.
    """
    rho = bloch_matrix(potential, beta_min, params, grid, n_steps)
    out = [(beta_min, float(np.trace(rho) * grid.spacing))]
    beta = beta_min
    for _ in range(n_doublings):
        rho = (rho @ rho) * grid.spacing
        beta *= 2.0
        out.append((beta, float(np.trace(rho) * grid.spacing)))
    return out


def momentum_density_matrix_weight(p, beta: float, params: PhysicalParams):
    """Diagonal momentum-space weight e^{-beta D |p|^alpha}; one at p = 0."""
    if not (beta > 0):
        raise ConfigurationError(f"beta must be positive, got {beta}")
    p = np.asarray(p, dtype=float)
    out = np.exp(-beta * params.d_alpha * np.abs(p) ** params.alpha)
    return float(out) if out.ndim == 0 else out
