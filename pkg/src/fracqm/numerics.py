"""Grids, Fourier transforms and adaptive quadrature shared by every module.

Transform convention (the hbar-scaled physics pair):

    phi(p) = integral dx  e^{-i p x / hbar} psi(x)          (forward)
    psi(x) = (1 / 2 pi hbar) integral dp e^{+i p x / hbar} phi(p)   (inverse)

On a periodic grid of n points over [-L/2, L/2) the conjugate momenta are
p_k = 2 pi hbar k / L with k in the symmetric integer range (FFT layout,
exactly one zero entry, one unpaired Nyquist value).  Parseval then reads

    sum |psi_j|^2 dx == (1 / 2 pi hbar) sum |phi_k|^2 dp
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (
    ConfigurationError,
    GridMismatchError,
    QuadraturePointError,
)

__all__ = [
    "GridSpec",
    "PhysicalParams",
    "ComplexField",
    "QuadResult",
    "make_grid",
    "transform_pair",
    "to_momentum_space",
    "to_position_space",
    "inner_product",
    "adaptive_quadrature",
]


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform periodic position grid with its conjugate momentum grid."""

    n_points: int
    length: float
    hbar: float
    spacing: float
    positions: np.ndarray = field(repr=False)
    momenta: np.ndarray = field(repr=False)

    @property
    def momentum_spacing(self) -> float:
        return 2.0 * np.pi * self.hbar / self.length

    @property
    def max_momentum(self) -> float:
        """Magnitude of the Nyquist momentum."""
        return np.pi * self.hbar * self.n_points / self.length


@dataclass(frozen=True)
class PhysicalParams:
    """Constants defining the fractional dynamics.

    hbar in erg*s, d_alpha in erg^(1-alpha)*cm^alpha*s^(-alpha), alpha the
    Levy index in (1, 2].  mass (g) is optional and only meaningful at
    alpha == 2, where consistency demands d_alpha == 1/(2*mass).
    """

    hbar: float = 1.0
    d_alpha: float = 1.0
    alpha: float = 2.0
    mass: float | None = None

    def __post_init__(self):
        if not (self.hbar > 0):
            raise ConfigurationError(f"hbar must be positive, got {self.hbar}")
        if not (self.d_alpha > 0):
            raise ConfigurationError(f"d_alpha must be positive, got {self.d_alpha}")
        if not (1.0 < self.alpha <= 2.0):
            raise ConfigurationError(
                f"alpha must lie in (1, 2], got {self.alpha}"
            )
        if self.mass is not None:
            if not (self.mass > 0):
                raise ConfigurationError(f"mass must be positive, got {self.mass}")
            if self.alpha == 2.0:
                expected = 1.0 / (2.0 * self.mass)
                if abs(self.d_alpha - expected) > 1e-12 * max(1.0, abs(expected)):
                    raise ConfigurationError(
                        "at alpha=2, d_alpha must equal 1/(2*mass): "
                        f"got d_alpha={self.d_alpha}, 1/(2m)={expected}"
                    )

    @staticmethod
    def gaussian(mass: float = 1.0, hbar: float = 1.0) -> "PhysicalParams":
        """alpha=2 parameters with the conventional d_2 = 1/(2m)."""
        return PhysicalParams(hbar=hbar, d_alpha=1.0 / (2.0 * mass), alpha=2.0, mass=mass)


@dataclass
class ComplexField:
    """A complex-valued function sampled on a GridSpec."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"field has shape {self.values.shape}, "
                f"grid expects ({self.grid.n_points},)"
            )

    def norm_sq(self) -> float:
        """L^2 norm squared, sum |psi_j|^2 dx."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def copy(self) -> "ComplexField":
        return ComplexField(self.values.copy(), self.grid)


def make_grid(n_points: int, length: float, hbar: float = 1.0) -> GridSpec:
    """Build the periodic grid [-length/2, length/2) and its momenta."""
    if n_points < 8 or (n_points & (n_points - 1)) != 0:
        raise ConfigurationError(
            f"n_points must be a power of two >= 8, got {n_points}"
        )
    if not (length > 0):
        raise ConfigurationError(f"length must be positive, got {length}")
    if not (hbar > 0):
        raise ConfigurationError(f"hbar must be positive, got {hbar}")
    spacing = length / n_points
    positions = -length / 2.0 + spacing * np.arange(n_points)
    # p_k = 2 pi hbar k / length, k in FFT layout {0,..,n/2-1,-n/2,..,-1}
    momenta = 2.0 * np.pi * hbar * np.fft.fftfreq(n_points, d=spacing)
    return GridSpec(
        n_points=n_points,
        length=length,
        hbar=hbar,
        spacing=spacing,
        positions=positions,
        momenta=momenta,
    )


def _phase_signs(n: int) -> np.ndarray:
    # e^{+/- i p_k x_0 / hbar} with x_0 = -L/2 reduces to (-1)^k
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def to_momentum_space(psi: ComplexField) -> ComplexField:
    """Forward transform: phi(p_k) = sum_j e^{-i p_k x_j/hbar} psi_j dx."""
    n = psi.grid.n_points
    phi = psi.grid.spacing * _phase_signs(n) * np.fft.fft(psi.values)
    return ComplexField(phi, psi.grid)


def to_position_space(phi: ComplexField) -> ComplexField:
    """Inverse transform: psi(x_j) = (1/2 pi hbar) sum_k e^{i p_k x_j/hbar} phi_k dp."""
    n = phi.grid.n_points
    psi = np.fft.ifft(_phase_signs(n) * phi.values) / phi.grid.spacing
    return ComplexField(psi, phi.grid)


def transform_pair(psi: ComplexField, direction: str) -> ComplexField:
    """Dispatch to the forward or inverse half of the transform pair."""
    if direction == "forward":
        return to_momentum_space(psi)
    if direction == "inverse":
        return to_position_space(psi)
    raise ConfigurationError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def inner_product(a: ComplexField, b: ComplexField) -> complex:
    """(a, b) = sum conj(a_j) b_j dx.  Fields must share a grid."""
    if a.grid is not b.grid and (
        a.grid.n_points != b.grid.n_points
        or a.grid.length != b.grid.length
        or a.grid.hbar != b.grid.hbar
    ):
        raise GridMismatchError("inner product requires fields on the same grid")
    return complex(np.vdot(a.values, b.values) * a.grid.spacing)


@dataclass(frozen=True)
class QuadResult:
    value: float | complex
    error: float
    converged: bool


def adaptive_quadrature(
    integrand: Callable[[float], float | complex],
    lower: float,
    upper: float,
    rel_tol: float = 1e-10,
    *,
    abs_tol: float = 0.0,
    points: list[float] | None = None,
    complex_valued: bool = False,
    limit: int = 400,
) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature with infinite-limit support.

    Returns value, an error estimate, and a convergence flag.  The flag is
    true when the estimate satisfies error <= max(rel_tol*|value|, abs_tol).
    Non-finite integrand values raise QuadraturePointError naming the
    abscissa.  `points` marks interior break points (kinks, cusps); when the
    interval is infinite the integral is split there explicitly.
    """
    if not (1e-14 < rel_tol < 1e-2):
        raise ConfigurationError(f"rel_tol must lie in (1e-14, 1e-2), got {rel_tol}")

    def wrapped(x: float):
        v = integrand(x)
        if not np.all(np.isfinite([np.real(v), np.imag(v)])):
            raise QuadraturePointError(x)
        return v

    infinite = np.isinf(lower) or np.isinf(upper)
    if points and infinite:
        cuts = sorted(p for p in points if lower < p < upper)
        edges = [lower, *cuts, upper]
        total = 0.0 + 0.0j if complex_valued else 0.0
        err = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            part = adaptive_quadrature(
                integrand, a, b, rel_tol,
                abs_tol=abs_tol, complex_valued=complex_valued, limit=limit,
            )
            total += part.value
            err += part.error
        scale = max(abs(total), 0.0)
        return QuadResult(total, err, err <= max(rel_tol * scale, abs_tol))

    kwargs = dict(epsabs=abs_tol if abs_tol > 0 else 1.49e-13,
                  epsrel=rel_tol, limit=limit, full_output=True)
    if points and not infinite:
        kwargs["points"] = points
    if complex_valued:
        kwargs["complex_func"] = True
    out = integrate.quad(wrapped, lower, upper, **kwargs)
    value, err = out[0], out[1]
    converged = err <= max(rel_tol * abs(value), abs_tol) or err <= 1.49e-13
    return QuadResult(value, float(err), bool(converged))
