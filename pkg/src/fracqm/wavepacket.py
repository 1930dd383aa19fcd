"""Levy wave packet: states, densities, observables, uncertainty relation.

The packet is the plane-wave superposition with stretched-exponential
momentum weight

    phi(p, t) = exp{-|p - p0|^nu l^nu / 2 hbar^nu} exp{-i D |p|^alpha t / hbar}
    psi(x, t) = (A_nu / 2 pi hbar) integral dp phi(p, t) e^{i p x / hbar}
    A_nu      = sqrt(pi nu l / Gamma(1/nu))

which normalizes the position density to one.  Closed-form observables:
<x> = alpha D p0^(alpha-1) t (group-velocity drift), <p> = p0, and the
momentum moment <|p - p0|^mu> = (hbar/l)^mu Gamma((mu+1)/nu) / Gamma(1/nu).

The position moment reduces, in the dimensionless variables
eta0 = p0 l / (2^(1/nu) hbar) and tau = (D t / hbar)(2^(1/nu) hbar / l)^alpha,
to a spread factor

    N = (2^(1/nu) nu / 4 pi Gamma(1/nu)) integral dsigma |sigma|^mu |g(sigma)|^2
    g(sigma) = integral deta exp{i eta (sigma + alpha tau eta0^(alpha-1))}
               exp{-i tau |eta|^alpha - |eta - eta0|^nu}

via <|x - <x>|^mu> = (l / 2^(1/nu))^mu N; the inner double integral collapses
to |g|^2 because the two factors are complex conjugates.  Note the moment
prefactor: the mu = 0 normalization <1> = 1 forces (l/2^(1/nu))^mu, which a
naive reading of the product form (matching only at mu = nu) would miss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractError, DomainTooSmallError
from .numerics import (
    ComplexField,
    GridSpec,
    PhysicalParams,
    adaptive_quadrature,
    make_grid,
    to_position_space,
)

__all__ = [
    "PacketParams",
    "UncertaintyReport",
    "normalization_constant",
    "packet_momentum_state",
    "momentum_density",
    "packet_position_state",
    "suggest_grid",
    "tail_mass_estimate",
    "reduced_time",
    "reduced_carrier",
    "time_from_reduced",
    "observable_means",
    "drift_velocity",
    "mean_mu_deviation",
    "packet_spread_factor",
    "uncertainty_report",
]


@dataclass(frozen=True)
class PacketParams:
    """Space scale l (cm), carrier momentum p0 > 0 (g cm/s), weight exponent nu."""

    l: float
    p0: float
    nu: float

    def __post_init__(self):
        if not (self.l > 0):
            raise ConfigurationError(f"l must be positive, got {self.l}")
        if not (self.p0 > 0):
            raise ConfigurationError(f"p0 must be positive, got {self.p0}")
        if not (1.0 < self.nu <= 2.0):
            raise ConfigurationError(f"nu must lie in (1, 2], got {self.nu}")


@dataclass(frozen=True)
class UncertaintyReport:
    mu: float
    dx_mu: float
    dp_mu: float
    product: float
    bound: float
    n_factor: float
    tau: float
    eta0: float
    exceeds_bound: bool


def _check_nu(packet: PacketParams, params: PhysicalParams) -> None:
    if packet.nu > params.alpha:
        raise ContractError(
            f"packet weight exponent nu={packet.nu} must not exceed alpha={params.alpha}"
        )


def normalization_constant(nu: float, l: float) -> float:
    """A_nu = sqrt(pi nu l / Gamma(1/nu)); scales as sqrt(l)."""
    if not (1.0 < nu <= 2.0):
        raise ConfigurationError(f"nu must lie in (1, 2], got {nu}")
    if not (l > 0):
        raise ConfigurationError(f"l must be positive, got {l}")
    return math.sqrt(math.pi * nu * l / math.gamma(1.0 / nu))


def packet_momentum_state(p, t: float, packet: PacketParams, params: PhysicalParams):
    """phi(p, t); |phi| is t-independent and phi(p, 0) is real positive."""
    _check_nu(packet, params)
    p = np.asarray(p, dtype=float)
    weight = np.exp(
        -np.abs(p - packet.p0) ** packet.nu * packet.l**packet.nu
        / (2.0 * params.hbar**packet.nu)
    )
    phase = np.exp(
        -1j * params.d_alpha * np.abs(p) ** params.alpha * t / params.hbar
    )
    out = weight * phase
    return complex(out) if out.ndim == 0 else out


def momentum_density(p, packet: PacketParams, params: PhysicalParams):
    """w(p) = (nu l / 2 hbar Gamma(1/nu)) exp{-|p-p0|^nu l^nu / hbar^nu}.

    Time independent and even about p0; integrates to one.
    """
    _check_nu(packet, params)
    p = np.asarray(p, dtype=float)
    pref = packet.nu * packet.l / (2.0 * params.hbar * math.gamma(1.0 / packet.nu))
    out = pref * np.exp(
        -np.abs(p - packet.p0) ** packet.nu
        * (packet.l / params.hbar) ** packet.nu
    )
    return float(out) if out.ndim == 0 else out


def reduced_carrier(packet: PacketParams, params: PhysicalParams) -> float:
    """eta0 = p0 l / (2^(1/nu) hbar)."""
    return packet.p0 * packet.l / (2.0 ** (1.0 / packet.nu) * params.hbar)


def reduced_time(t: float, packet: PacketParams, params: PhysicalParams) -> float:
    """tau = (D t / hbar) (2^(1/nu) hbar / l)^alpha."""
    return (
        params.d_alpha * t / params.hbar
        * (2.0 ** (1.0 / packet.nu) * params.hbar / packet.l) ** params.alpha
    )


def time_from_reduced(tau: float, packet: PacketParams, params: PhysicalParams) -> float:
    """Invert reduced_time."""
    return (
        tau * params.hbar / params.d_alpha
        * (packet.l / (2.0 ** (1.0 / packet.nu) * params.hbar)) ** params.alpha
    )


def suggest_grid(
    packet: PacketParams,
    params: PhysicalParams,
    t: float = 0.0,
    *,
    norm_tol: float = 1e-9,
    n_max: int = 1 << 20,
) -> GridSpec:
    """Grid sized so the packet's wrapped tails stay below norm_tol.

    For nu < 2 the position density has |x|^(-2-2nu) power tails, so the
    domain length comes from the image-mass bound; the momentum reach covers
    the stretched-exponential weight.  The domain is snapped so that p0 falls
    exactly on the momentum grid, which makes grid momentum averages of the
    (p0-even) densities cancel symmetrically.
    """
    hbar, l, nu = params.hbar, packet.l, packet.nu
    s = 2.0 ** (1.0 / nu) * l  # conservative image scale of |phi|^2 in x (cm)
    if nu == 2.0:
        length_norm = s * (4.0 + 2.0 * math.sqrt(math.log(1.0 / norm_tol)))
    else:
        c_nu = math.gamma(1.0 + nu) * math.sin(math.pi * nu / 2.0) / math.gamma(1.0 + 1.0 / nu)
        length_norm = s * (2.0 * c_nu / norm_tol) ** (1.0 / (1.0 + nu))
    drift = abs(observable_means(t, packet, params, "closed_form")[0])
    tau = abs(reduced_time(t, packet, params))
    length = max(length_norm, 2.0 * (drift + 40.0 * l * (1.0 + tau)), 40.0 * l)
    # snap so p0 is a momentum-grid point
    dp_unit = 2.0 * math.pi * hbar / packet.p0
    length = max(1, round(length / dp_unit)) * dp_unit
    q_max = (hbar / l) * math.log(1e18) ** (1.0 / nu)
    p_need = packet.p0 + q_max + 6.0 * hbar / l
    dx_target = math.pi * hbar / p_need
    n = 1 << max(8, int(math.ceil(length / dx_target)) - 1).bit_length()
    if n > n_max:
        n = n_max
    return make_grid(n, length, hbar)


def tail_mass_estimate(
    t: float, packet: PacketParams, params: PhysicalParams, grid: GridSpec
) -> float:
    """Probability mass beyond the grid, from w(p) past the momentum reach
    plus a power-law extrapolation of the position density at the edges."""
    p_edge = grid.max_momentum
    mom_tail = adaptive_quadrature(
        lambda q: momentum_density(q, packet, params)
        + momentum_density(-q, packet, params),
        p_edge, np.inf, rel_tol=1e-6, abs_tol=1e-14,
    ).value
    psi = _position_values(t, packet, params, grid)
    rho = np.abs(psi) ** 2
    half = grid.length / 2.0
    # rho ~ C |x|^(-2-2nu): integral past the edge is rho_edge * |x| / (1+2nu)
    pos_tail = (rho[0] + rho[-1]) * half / (1.0 + 2.0 * packet.nu)
    return float(mom_tail + pos_tail)


def _position_values(
    t: float, packet: PacketParams, params: PhysicalParams, grid: GridSpec
) -> np.ndarray:
    a_nu = normalization_constant(packet.nu, packet.l)
    phi = a_nu * np.asarray(packet_momentum_state(grid.momenta, t, packet, params))
    return to_position_space(ComplexField(phi, grid)).values


def packet_position_state(
    t: float,
    packet: PacketParams,
    params: PhysicalParams,
    grid: GridSpec | None = None,
    *,
    tail_tol: float = 1e-6,
) -> ComplexField:
    """psi_L(., t) on the grid, unit-normalized by construction.

    Raises DomainTooSmallError when the estimated off-grid mass exceeds
    tail_tol.
    """
    _check_nu(packet, params)
    if grid is None:
        grid = suggest_grid(packet, params, t)
    tail = tail_mass_estimate(t, packet, params, grid)
    if tail > tail_tol:
        raise DomainTooSmallError(
            f"estimated off-grid probability mass {tail:.3e} exceeds {tail_tol:.1e}; "
            "enlarge the domain", tail,
        )
    return ComplexField(_position_values(t, packet, params, grid), grid)


def drift_velocity(
    packet: PacketParams, params: PhysicalParams, *, exact: bool = False
) -> float:
    """Packet drift rate d<x>/dt.

    The group-velocity form alpha D p0^(alpha-1) is the sharp-packet limit;
    with exact=True the full momentum average alpha D <|p|^(alpha-1) sgn p>_w
    is taken by quadrature (the two differ at order (hbar / l p0)^2 and
    coincide for alpha = 2).
    """
    _check_nu(packet, params)
    a, d = params.alpha, params.d_alpha
    if not exact or a == 2.0:
        return a * d * packet.p0 ** (a - 1.0)
    res = adaptive_quadrature(
        lambda p: np.abs(p) ** (a - 1.0) * np.sign(p)
        * (momentum_density(p, packet, params) - momentum_density(-p, packet, params)),
        0.0, np.inf, rel_tol=1e-11, points=[packet.p0],
    )
    return a * d * float(res.value)


def observable_means(
    t: float,
    packet: PacketParams,
    params: PhysicalParams,
    method: str = "closed_form",
    grid: GridSpec | None = None,
) -> tuple[float, float]:
    """(<x>(t), <p>): drift alpha D p0^(alpha-1) t and carrier p0.

    method 'grid' recomputes both as self-normalized grid averages of the
    position density rho(x, t) and the momentum density w(p).
    """
    _check_nu(packet, params)
    if method == "closed_form":
        mean_x = (
            params.alpha * params.d_alpha * packet.p0 ** (params.alpha - 1.0) * t
        )
        return mean_x, packet.p0
    if method != "grid":
        raise ConfigurationError(f"method must be 'closed_form' or 'grid', got {method!r}")
    psi = packet_position_state(t, packet, params, grid)
    rho = np.abs(psi.values) ** 2
    mean_x = float(np.sum(psi.grid.positions * rho) / np.sum(rho))
    w = momentum_density(psi.grid.momenta, packet, params)
    mean_p = float(np.sum(psi.grid.momenta * w) / np.sum(w))
    return mean_x, mean_p


def mean_mu_deviation(
    target: str,
    mu: float,
    t: float,
    packet: PacketParams,
    params: PhysicalParams,
    grid: GridSpec | None = None,
) -> float:
    """mu-root of the mean-mu deviation <|q - <q>|^mu>^(1/mu).

    target 'momentum' integrates the analytic w(p) by adaptive quadrature
    (time independent); target 'position' takes the self-normalized grid
    moment of rho(x, t).  Requires mu < nu strictly, else the moment may
    diverge.
    """
    _check_nu(packet, params)
    if not (0.0 < mu < packet.nu):
        raise ContractError(f"need 0 < mu < nu, got mu={mu}, nu={packet.nu}")
    if target == "momentum":
        pref = packet.nu * packet.l / (2.0 * params.hbar * math.gamma(1.0 / packet.nu))
        scale = packet.l / params.hbar
        res = adaptive_quadrature(
            lambda q: 2.0 * pref * q**mu * math.exp(-((q * scale) ** packet.nu)),
            0.0, np.inf, rel_tol=1e-11,
        )
        return float(res.value) ** (1.0 / mu)
    if target != "position":
        raise ConfigurationError(f"target must be 'position' or 'momentum', got {target!r}")
    psi = packet_position_state(t, packet, params, grid)
    rho = np.abs(psi.values) ** 2
    x = psi.grid.positions
    # deviations are taken about the closed-form drift (the group-velocity
    # center), which is also the origin of the spread-factor reduction
    mean_x = observable_means(t, packet, params, "closed_form")[0]
    moment = _cusp_weighted_sum(x - mean_x, rho, psi.grid.spacing, mu) / (
        float(np.sum(rho)) * psi.grid.spacing
    )
    return moment ** (1.0 / mu)


def _cusp_weighted_sum(u: np.ndarray, h: np.ndarray, du: float, mu: float) -> float:
    """Sum of |u|^mu h(u) du with the |u|^mu cusp removed by subtraction.

    Plain midpoint converges only as du^(1+mu) because of the cusp at u=0.
    Subtracting h(0) * gaussian(u) cancels the cusp coefficient; the
    subtracted piece integrates in closed form against |u|^mu.
    """
    j = int(np.argmin(np.abs(u)))
    lo = max(0, min(j - 1, len(u) - 4))
    # cubic Lagrange interpolation of h at u = 0 from the four nearest cells
    h0 = 0.0
    for i in range(lo, lo + 4):
        weight = 1.0
        for k in range(lo, lo + 4):
            if k != i:
                weight *= (0.0 - u[k]) / (u[i] - u[k])
        h0 += weight * h[i]
    w = 16.0 * du
    gauss = np.exp(-(u * u) / (2.0 * w * w))
    base = float(np.sum(np.abs(u) ** mu * (h - h0 * gauss))) * du
    closed = h0 * (math.sqrt(2.0) * w) ** (mu + 1.0) * math.gamma((mu + 1.0) / 2.0)
    return base + closed


def packet_spread_factor(
    alpha: float,
    mu: float,
    nu: float,
    tau: float,
    eta0: float,
    *,
    n_fft: int = 1 << 18,
    sigma_nyquist: float = 1024.0,
) -> float:
    """The dimensionless position-spread factor N(alpha, mu, nu; tau, eta0).

    Evaluates g(sigma) on a fine sigma grid with one FFT of the
    zero-padded eta window, then integrates |sigma|^mu |g|^2 by midpoint
    rule with an analytic treatment of the |sigma|^mu cusp cells.  The
    result is self-normalized by the mu = 0 sum, which equals one exactly
    in the continuum.
    """
    if not (0.0 < mu < nu <= alpha <= 2.0):
        raise ContractError(
            f"need 0 < mu < nu <= alpha <= 2, got mu={mu}, nu={nu}, alpha={alpha}"
        )
    c0 = alpha * tau * eta0 ** (alpha - 1.0)
    half_width = math.log(1e16) ** (1.0 / nu) + 2.0
    d_eta = math.pi / (sigma_nyquist + abs(c0))
    n_phys = int(math.ceil(2.0 * half_width / d_eta))
    if n_phys > n_fft // 2:
        n_fft = 1 << (2 * n_phys - 1).bit_length()
    eta = eta0 - half_width + d_eta * np.arange(n_phys)
    f = np.exp(
        1j * eta * c0
        - 1j * tau * np.abs(eta) ** alpha
        - np.abs(eta - eta0) ** nu
    )
    padded = np.zeros(n_fft, dtype=complex)
    padded[:n_phys] = f
    g_mag2 = np.abs(d_eta * n_fft * np.fft.ifft(padded)) ** 2
    sigma = 2.0 * math.pi * np.fft.fftfreq(n_fft, d=d_eta)
    d_sigma = 2.0 * math.pi / (n_fft * d_eta)

    def cusp_sum(order: float) -> float:
        # midpoint cells, with the three cells around sigma=0 replaced by
        # the exact integral of |s|^order against a local parabola
        weights = np.abs(sigma) ** order
        total = float(np.sum(weights * g_mag2)) * d_sigma
        total -= float(
            weights[0] * g_mag2[0]
            + weights[1] * g_mag2[1]
            + weights[-1] * g_mag2[-1]
        ) * d_sigma
        h0, hp, hm = g_mag2[0], g_mag2[1], g_mag2[-1]
        curv = (hp + hm - 2.0 * h0) / (2.0 * d_sigma**2)
        edge = 1.5 * d_sigma
        total += 2.0 * (
            h0 * edge ** (order + 1.0) / (order + 1.0)
            + curv * edge ** (order + 3.0) / (order + 3.0)
        )
        return total

    return cusp_sum(mu) / cusp_sum(0.0)


def uncertainty_report(
    mu: float, t: float, packet: PacketParams, params: PhysicalParams
) -> UncertaintyReport:
    """Uncertainty product against the fractional lower bound hbar/(2 alpha)^(1/mu).

    dx comes from the spread-factor route, dp from the closed gamma-ratio
    form; the bound comparison presumes nu = alpha.
    """
    _check_nu(packet, params)
    nu, l, alpha, hbar = packet.nu, packet.l, params.alpha, params.hbar
    if not (0.0 < mu < nu):
        raise ContractError(f"need 0 < mu < nu, got mu={mu}, nu={nu}")
    tau = reduced_time(t, packet, params)
    eta0 = reduced_carrier(packet, params)
    n_factor = packet_spread_factor(alpha, mu, nu, tau, eta0)
    dx_mu = (l / 2.0 ** (1.0 / nu)) * n_factor ** (1.0 / mu)
    dp_mu = (hbar / l) * (
        math.gamma((mu + 1.0) / nu) / math.gamma(1.0 / nu)
    ) ** (1.0 / mu)
    product = dx_mu * dp_mu
    bound = hbar / (2.0 * alpha) ** (1.0 / mu)
    return UncertaintyReport(
        mu=mu,
        dx_mu=dx_mu,
        dp_mu=dp_mu,
        product=product,
        bound=bound,
        n_factor=n_factor,
        tau=tau,
        eta0=eta0,
        exceeds_bound=product > bound,
    )
