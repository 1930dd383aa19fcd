"""Reproducible experiment driver.

Configs are flat ``key = value`` text files (``#`` comments allowed, no
nesting).  Every run echoes its config, emits a results table and a
comparisons table (each row carries the value, its oracle, the deviation,
an explicit tolerance and a pass flag, plus a formula anchor tag), and
writes output atomically.  A given (config, seed) pair produces
byte-identical output files.

    fracqm <experiment> --config <file> [--seed N] [--out PREFIX] [--format csv|json]

Exit status is nonzero iff any comparison fails or a module raises.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ConfigurationError
from .numerics import PhysicalParams, adaptive_quadrature, make_grid
from .propagator import KernelQuery, chapman_kolmogorov_residual, free_kernel
from .pimc import estimate_density_matrix, fractal_scaling_exponent
from .spectral import EvolverConfig, Potential, energy_expectation, evolve
from .stable import StableParams, levy_density
from .statmech import (
    ThermoQuery,
    bloch_density_matrix,
    bloch_trace_ladder,
    classical_partition_function,
    free_density_matrix,
    free_partition_function,
)
from .wavepacket import (
    PacketParams,
    drift_velocity,
    mean_mu_deviation,
    momentum_density,
    observable_means,
    packet_position_state,
    tail_mass_estimate,
    time_from_reduced,
    uncertainty_report,
)

EXPERIMENTS = (
    "density",
    "kernel-check",
    "evolve",
    "packet",
    "uncertainty",
    "pimc",
    "statmech",
    "scaling",
)

def _float_list(s) -> list[float]:
    return [float(v) for v in str(s).split(",") if str(v).strip()]



_SCHEMAS: dict[str, dict[str, tuple]] = {
    "density": {
        "alpha": (float, 1.5),
        "scale": (float, 1.0),
        "x_max": (float, 8.0),
        "n_points": (int, 81),
    },
    "kernel-check": {
        "alpha": (float, 2.0),
        "hbar": (float, 1.0),
        "d_alpha": (float, None),
        "t_values": (_float_list, [0.5, 1.0, 1.5]),
        "dx_values": (_float_list, [0.0, 0.5, 1.0]),
        "t_split": (float, None),
    },
    "evolve": {
        "alpha": (float, 1.5),
        "hbar": (float, 1.0),
        "d_alpha": (float, 1.0),
        "potential": (str, "harmonic"),
        "mass": (float, 1.0),
        "omega": (float, 1.0),
        "n_points": (int, 1024),
        "length": (float, 40.0),
        "dt": (float, 0.005),
        "n_steps": (int, 1000),
        "x0": (float, 1.0),
        "sigma": (float, 0.7),
    },
    "packet": {
        "alpha": (float, 1.5),
        "nu": (float, None),
        "l": (float, 1.0),
        "p0": (float, 2.0),
        "hbar": (float, 1.0),
        "d_alpha": (float, 1.0),
        "t": (float, 1.0),
        "mu": (float, None),
        "table_points": (int, 65),
    },
    "uncertainty": {
        "alpha": (float, 1.8),
        "nu": (float, None),
        "mu": (float, None),
        "l": (float, 1.0),
        "p0": (float, 2.0),
        "hbar": (float, 1.0),
        "d_alpha": (float, 1.0),
        "tau_values": (_float_list, [0.0, 1.0, 5.0]),
    },
    "pimc": {
        "alpha": (float, 1.5),
        "hbar": (float, 1.0),
        "d_alpha": (float, 1.0),
        "mass": (float, 1.0),
        "omega": (float, 1.0),
        "potential": (str, "free"),
        "beta": (float, 1.0),
        "x0": (float, 0.0),
        "n_slices": (int, 32),
        "n_chains": (int, 16),
        "n_paths": (int, 2000),
        "bin_points": (int, 64),
        "bin_length": (float, 30.0),
    },
    "statmech": {
        "alpha": (float, 1.5),
        "hbar": (float, 1.0),
        "d_alpha": (float, 1.0),
        "beta": (float, 1.0),
        "omega_size": (float, 60.0),
        "mass": (float, 1.0),
        "omega": (float, 1.0),
        "n_points": (int, 512),
        "length": (float, 50.0),
    },
    "scaling": {
        "alpha": (float, 1.5),
        "hbar": (float, 1.0),
        "d_alpha": (float, 1.0),
        "mu": (float, 1.0),
        "sigma0": (float, 0.02),
        "n_rungs": (int, 6),
        "n_samples": (int, 20000),
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    out: str
    format: str
    parameters: dict


@dataclass
class RunReport:
    config: dict
    results: dict
    comparisons: list
    provenance: dict
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(row["passed"] for row in self.comparisons)


def parse_flat(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(
                f"line {lineno}: expected 'key = value', got {line.strip()!r}"
            )
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def validate_config(raw: str | dict) -> ExperimentConfig:
    """Build a fully-defaulted config; aggregate every violation, not just the first."""
    if isinstance(raw, str):
        raw = parse_flat(raw)
    raw = dict(raw)
    errors: list[str] = []

    experiment = raw.pop("experiment", None)
    if experiment is None:
        raise ConfigurationError("missing required key 'experiment'")
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        )

    seed = raw.pop("seed", 42)
    out = raw.pop("out", experiment.replace("-", "_"))
    fmt = raw.pop("format", "json")

    schema = _SCHEMAS[experiment]
    params: dict = {}
    user_keys = set(raw)
    for key, (conv, default) in schema.items():
        if key in raw:
            try:
                params[key] = conv(raw.pop(key))
            except (TypeError, ValueError):
                errors.append(f"key {key!r}: cannot parse value")
        else:
            params[key] = default
    if raw:
        errors.append(f"unknown keys: {', '.join(sorted(raw))}")

    try:
        seed = int(seed)
    except (TypeError, ValueError):
        errors.append("seed must be an integer")
    if fmt not in ("csv", "json"):
        errors.append(f"format must be 'csv' or 'json', got {fmt!r}")

    alpha = params.get("alpha")
    if alpha is not None and not (1.0 < alpha <= 2.0):
        errors.append(f"alpha must lie in (1,2], got {alpha}")
    if params.get("nu") is None and "nu" in schema:
        params["nu"] = alpha  # documented default: nu = alpha
    if params.get("mu") is None and "mu" in schema:
        params["mu"] = 0.6 * params["nu"] if params.get("nu") else None
    nu, mu = params.get("nu"), params.get("mu")
    if nu is not None and alpha is not None and not (1.0 < nu <= alpha):
        errors.append(f"nu must lie in (1, alpha], got nu={nu}, alpha={alpha}")
    if mu is not None and nu is not None and not (0.0 < mu < nu):
        errors.append(f"mu must be < nu, got mu={mu}, nu={nu}")
    if params.get("d_alpha") is None and "d_alpha" in schema:
        params["d_alpha"] = 0.5 / params.get("mass", 1.0) if alpha == 2.0 else 1.0
    elif alpha == 2.0 and "d_alpha" in schema and "d_alpha" not in user_keys:
        # at alpha=2 an unset diffusion coefficient follows the mass
        params["d_alpha"] = 0.5 / params.get("mass", 1.0)
    for key in ("n_points", "n_slices", "n_chains", "n_paths", "n_rungs",
                "bin_points", "n_samples", "table_points", "n_steps"):
        if key in params and params[key] is not None and params[key] < 1:
            errors.append(f"{key} must be positive, got {params[key]}")

    if errors:
        raise ConfigurationError("invalid config:\n  - " + "\n  - ".join(errors))
    return ExperimentConfig(experiment, seed, str(out), fmt, params)


def _cmp(name, value, oracle, tol, kind, anchor):
    value = float(value)
    oracle = float(oracle)
    abs_dev = abs(value - oracle)
    rel_dev = abs_dev / abs(oracle) if oracle != 0 else math.inf
    if kind == "abs":
        passed = abs_dev <= tol
    elif kind == "rel":
        passed = rel_dev <= tol
    elif kind == "ge":
        passed = value >= oracle - tol
    elif kind == "gt":
        passed = value > oracle
    else:
        raise ConfigurationError(f"unknown comparison kind {kind!r}")
    return {
        "name": name,
        "value": value,
        "oracle": oracle,
        "abs_dev": abs_dev,
        "rel_dev": rel_dev,
        "tolerance": tol,
        "kind": kind,
        "passed": bool(passed),
        "anchor": anchor,
    }


def _physical(p, alpha=None):
    alpha = alpha if alpha is not None else p["alpha"]
    mass = p.get("mass") if alpha == 2.0 else None
    return PhysicalParams(hbar=p.get("hbar", 1.0), d_alpha=p["d_alpha"],
                          alpha=alpha, mass=mass)


def _run_density(p, seed):
    sp = StableParams(p["alpha"], p["scale"])
    xs = np.linspace(-p["x_max"], p["x_max"], p["n_points"])
    dens = levy_density(xs, sp)
    results = {
        "density": {
            "anchor": "stable_characteristic_inversion",
            "columns": ["x (cm)", "density (1/cm)"],
            "rows": [[float(x), float(d)] for x, d in zip(xs, dens)],
        }
    }
    peak_oracle = math.gamma(1.0 + 1.0 / p["alpha"]) / math.pi * p["scale"] ** (-1.0 / p["alpha"])
    norm = adaptive_quadrature(lambda x: levy_density(x, sp), 0.0, np.inf, rel_tol=1e-9)
    comparisons = [
        _cmp("peak value vs gamma integral", levy_density(0.0, sp), peak_oracle,
             1e-8, "rel", "stable_density_peak_gamma"),
        _cmp("unit normalization", 2.0 * norm.value, 1.0, 1e-8, "rel",
             "stable_density_normalization"),
        _cmp("evenness at x = +/- x_max/2",
             levy_density(p["x_max"] / 2, sp), levy_density(-p["x_max"] / 2, sp),
             0.0, "abs", "stable_density_symmetry"),
    ]
    return results, comparisons


def _run_kernel_check(p, seed):
    alpha = p["alpha"]
    params = _physical(p)
    rows, comparisons = [], []
    for t in p["t_values"]:
        for dx in p["dx_values"]:
            est = free_kernel(KernelQuery(dx, 0.0, t, params))
            rows.append([dx, t, est.value.real, est.value.imag, est.error])
            if alpha == 2.0:
                m = 1.0 / (2.0 * params.d_alpha)
                ref = (m / (2.0 * math.pi * 1j * params.hbar * t)) ** 0.5 * cmath.exp(
                    1j * m * dx * dx / (2.0 * params.hbar * t)
                )
                comparisons.append(
                    _cmp(f"gaussian closed form at dx={dx}, t={t}",
                         abs(est.value - ref), 0.0, 1e-8 * abs(ref), "abs",
                         "gaussian_kernel_closed_form")
                )
    center = free_kernel(KernelQuery(0.0, 0.0, p["t_values"][0], params))
    a_phase = params.d_alpha * p["t_values"][0] / params.hbar
    ref0 = (
        math.gamma(1.0 + 1.0 / alpha) / (math.pi * params.hbar)
        * a_phase ** (-1.0 / alpha)
        * cmath.exp(-1j * math.pi / (2.0 * alpha))
    )
    comparisons.append(
        _cmp("on-axis value vs rotated gamma integral", abs(center.value - ref0),
             0.0, 1e-7 * abs(ref0), "abs", "kernel_on_axis_closed_form")
    )
    t_split = p["t_split"] if p["t_split"] is not None else p["t_values"][0] / 2.0
    res = chapman_kolmogorov_residual(0.0, 0.0, p["t_values"][0], t_split, params)
    comparisons.append(
        _cmp("composition-rule residual", res, 0.0, 1e-6, "abs",
             "kernel_composition_rule")
    )
    results = {
        "kernel": {
            "anchor": "free_kernel_fourier_integral",
            "columns": ["dx (cm)", "t (s)", "Re K (1/cm)", "Im K (1/cm)", "error (1/cm)"],
            "rows": rows,
        }
    }
    return results, comparisons


def _run_evolve(p, seed):
    params = _physical(p)
    grid = make_grid(p["n_points"], p["length"], params.hbar)
    if p["potential"] == "harmonic":
        pot = Potential.harmonic(p["mass"], p["omega"])
    elif p["potential"] == "free":
        pot = Potential.free()
    else:
        raise ConfigurationError(f"potential must be 'free' or 'harmonic', got {p['potential']!r}")
    psi0 = np.exp(-((grid.positions - p["x0"]) ** 2) / (4.0 * p["sigma"] ** 2)).astype(complex)
    psi0 /= math.sqrt(float(np.sum(np.abs(psi0) ** 2) * grid.spacing))
    from .numerics import ComplexField

    field = ComplexField(psi0, grid)
    e0 = energy_expectation(field, pot, params)
    cfg = EvolverConfig(dt=p["dt"], n_steps=p["n_steps"], mode="real_time")
    out = evolve(field, pot, params, cfg)
    e1 = energy_expectation(out, pot, params)
    rows = [[0.0, 1.0, e0], [p["dt"] * p["n_steps"], out.norm(), e1]]
    comparisons = [
        _cmp("norm conservation", out.norm(), 1.0, 1e-10, "abs", "unitary_norm_conservation"),
        _cmp("energy drift", e1, e0, 5e-6, "rel", "strang_energy_drift"),
    ]
    results = {
        "evolution": {
            "anchor": "fractional_schrodinger_split_step",
            "columns": ["t (s)", "norm", "energy (erg)"],
            "rows": rows,
        }
    }
    return results, comparisons


def _run_packet(p, seed):
    params = _physical(p)
    packet = PacketParams(l=p["l"], p0=p["p0"], nu=p["nu"])
    t = p["t"]
    psi = packet_position_state(t, packet, params)
    grid = psi.grid
    rho = np.abs(psi.values) ** 2
    stride = max(1, grid.n_points // p["table_points"])
    results = {
        "position_density": {
            "anchor": "packet_position_density",
            "columns": ["x (cm)", "rho (1/cm)"],
            "rows": [[float(x), float(r)] for x, r in
                     zip(grid.positions[::stride], rho[::stride])],
        },
        "momentum_density": {
            "anchor": "packet_momentum_density",
            "columns": ["p (g cm/s)", "w (s/(g cm))"],
            "rows": [[float(q), float(momentum_density(q, packet, params))]
                     for q in np.linspace(p["p0"] - 6, p["p0"] + 6, p["table_points"])],
        },
    }
    mean_x_cf, mean_p_cf = observable_means(t, packet, params, "closed_form")
    mean_x_g, mean_p_g = observable_means(t, packet, params, "grid", grid)
    mean_x_exact = drift_velocity(packet, params, exact=True) * t
    mu = p["mu"]
    dp_quad = mean_mu_deviation("momentum", mu, t, packet, params)
    dp_gamma = (params.hbar / packet.l) * (
        math.gamma((mu + 1.0) / packet.nu) / math.gamma(1.0 / packet.nu)
    ) ** (1.0 / mu)
    comparisons = [
        _cmp("position norm", psi.norm_sq(), 1.0, 1e-8, "abs", "packet_unit_norm"),
        _cmp("off-grid tail mass below guard",
             tail_mass_estimate(t, packet, params, grid), 0.0, 1e-6, "abs",
             "packet_tail_mass_guard"),
        _cmp("grid <p> vs carrier", mean_p_g, mean_p_cf, 1e-8, "abs",
             "carrier_momentum_mean"),
        _cmp("grid <x> vs exact first-moment law", mean_x_g, mean_x_exact,
             1e-6, "rel", "packet_drift_exact_moment"),
        # the group-velocity form is the sharp-packet limit; it deviates from
        # the exact drift at order (hbar / l p0)^2
        _cmp("grid <x> vs group-velocity drift", mean_x_g, mean_x_cf,
             max(0.05 * abs(mean_x_cf), 0.05), "abs", "group_velocity_drift"),
        _cmp("momentum mean-mu deviation vs gamma ratio", dp_quad, dp_gamma,
             1e-8, "rel", "momentum_moment_gamma_ratio"),
    ]
    return results, comparisons


def _run_uncertainty(p, seed):
    params = _physical(p)
    packet = PacketParams(l=p["l"], p0=p["p0"], nu=p["nu"])
    rows, comparisons = [], []
    for tau in p["tau_values"]:
        t = time_from_reduced(tau, packet, params)
        rep = uncertainty_report(p["mu"], t, packet, params)
        rows.append([tau, rep.dx_mu, rep.dp_mu, rep.product, rep.bound,
                     rep.n_factor, rep.eta0])
        comparisons.append(
            _cmp(f"product exceeds bound at tau={tau}", rep.product, rep.bound,
                 0.0, "gt", "uncertainty_product_bound")
        )
    results = {
        "uncertainty": {
            "anchor": "mean_mu_uncertainty_product",
            "columns": ["tau", "dx_mu (cm)", "dp_mu (g cm/s)", "product (erg s)",
                        "bound (erg s)", "spread_factor", "eta0"],
            "rows": rows,
        }
    }
    return results, comparisons


def _run_pimc(p, seed):
    params = _physical(p)
    bin_grid = make_grid(p["bin_points"], p["bin_length"], params.hbar)
    if p["potential"] == "harmonic":
        pot = Potential.harmonic(p["mass"], p["omega"])
    else:
        pot = Potential.free()
    est = estimate_density_matrix(
        pot, p["x0"], p["beta"], params, p["n_slices"], p["n_chains"],
        p["n_paths"], bin_grid, seed,
    )
    if p["potential"] == "free":
        oracle = np.array(
            [free_density_matrix(x, p["x0"], p["beta"], params) for x in bin_grid.positions]
        )
        anchor = "free_thermal_kernel_quadrature"
    else:
        fine = make_grid(1024, p["bin_length"], params.hbar)
        row = bloch_density_matrix(pot, p["beta"], params, fine, p["x0"])
        oracle = np.interp(bin_grid.positions, fine.positions, row)
        anchor = "thermal_kernel_equation_solution"
    cov = est.covered & (est.std_error > 0)
    within = np.abs(est.mean[cov] - oracle[cov]) <= 3.0 * est.std_error[cov]
    frac = float(within.mean()) if cov.any() else 0.0
    results = {
        "histogram": {
            "anchor": "levy_measure_endpoint_histogram",
            "columns": ["x (cm)", "rho (1/cm)", "std_error (1/cm)", "oracle (1/cm)",
                        "covered"],
            "rows": [[float(x), float(m), float(s), float(o), int(c)]
                     for x, m, s, o, c in zip(bin_grid.positions, est.mean,
                                              est.std_error, oracle, cov)],
        }
    }
    comparisons = [
        _cmp("fraction of covered bins within 3 std errors", frac, 0.95, 0.0,
             "ge", anchor),
        _cmp("overflow mass", est.overflow_low + est.overflow_high, 0.0, 0.05,
             "abs", "histogram_overflow_mass"),
    ]
    return results, comparisons


def _run_statmech(p, seed):
    params = _physical(p)
    beta = p["beta"]
    q = ThermoQuery(beta, p["omega_size"], params)
    z_free = free_partition_function(q)
    grid = make_grid(p["n_points"], p["length"], params.hbar)
    pot = Potential.harmonic(p["mass"], p["omega"])
    ladder = bloch_trace_ladder(pot, 0.125, 4, params, grid)
    ratios = [
        classical_partition_function(pot, b, params) / tr for b, tr in ladder
    ][::-1]  # descending beta
    gaps = [abs(r - 1.0) for r in ratios]
    mono = all(gaps[i] > gaps[i + 1] for i in range(len(gaps) - 1))
    diag = free_density_matrix(0.0, 0.0, beta, params)

    # free thermal-kernel row: split-operator solution against quadrature,
    # on a wide grid so wrapped power tails stay below the tolerance
    row_grid = make_grid(2048, 120.0, params.hbar)
    row = bloch_density_matrix(Potential.free(), beta, params, row_grid, 0.0)
    mask = np.abs(row_grid.positions) <= 20.0
    idx = np.flatnonzero(mask)[:: max(1, mask.sum() // 101)]
    quad_vals = np.array(
        [free_density_matrix(x, 0.0, beta, params) for x in row_grid.positions[idx]]
    )
    row_dev = float(np.max(np.abs(row[idx] - quad_vals)))

    comparisons = [
        _cmp("free partition function vs kernel diagonal x size",
             z_free, diag * p["omega_size"], 1e-10, "rel", "thermal_trace_identity"),
        _cmp("beta doubling scaling of Z",
             free_partition_function(ThermoQuery(2.0 * beta, p["omega_size"], params)) / z_free,
             2.0 ** (-1.0 / params.alpha), 1e-12, "rel", "partition_beta_scaling"),
        _cmp("thermal-kernel row vs quadrature (max dev)", row_dev, 0.0, 1e-5,
             "abs", "thermal_kernel_equation_solution"),
        _cmp("classical-limit ratio monotone toward 1", float(mono), 1.0, 0.0,
             "ge", "classical_limit_ratio"),
        _cmp("classical-limit ratio at smallest beta", ratios[-1], 1.0, 5e-3,
             "rel", "classical_limit_ratio"),
    ]
    results = {
        "classical_ratio": {
            "anchor": "classical_limit_ratio",
            "columns": ["beta (1/erg)", "Z_classical / bloch_trace"],
            "rows": [[b, r] for (b, _), r in zip(ladder[::-1], ratios)],
        },
        "partition": {
            "anchor": "free_partition_function",
            "columns": ["beta (1/erg)", "Z_free"],
            "rows": [[beta, z_free]],
        },
        "thermal_row": {
            "anchor": "thermal_kernel_equation_solution",
            "columns": ["x (cm)", "rho (1/cm)", "quadrature (1/cm)"],
            "rows": [[float(row_grid.positions[i]), float(row[i]), float(v)]
                     for i, v in zip(idx, quad_vals)],
        },
    }
    return results, comparisons


def _run_scaling(p, seed):
    params = _physical(p)
    ladder = [p["sigma0"] * 2.0**k for k in range(p["n_rungs"])]
    est = fractal_scaling_exponent(params, p["mu"], ladder, p["n_samples"], seed)
    target = p["mu"] / params.alpha
    results = {
        "scaling": {
            "anchor": "increment_scaling_slope",
            "columns": ["slope", "std_error", "target"],
            "rows": [[est.mean, est.std_error, target]],
        }
    }
    comparisons = [
        _cmp("slope vs mu/alpha", est.mean, target, 3.0 * est.std_error, "abs",
             "increment_scaling_slope"),
    ]
    return results, comparisons


_RUNNERS = {
    "density": _run_density,
    "kernel-check": _run_kernel_check,
    "evolve": _run_evolve,
    "packet": _run_packet,
    "uncertainty": _run_uncertainty,
    "pimc": _run_pimc,
    "statmech": _run_statmech,
    "scaling": _run_scaling,
}


def run_experiment(config: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    results, comparisons = _RUNNERS[config.experiment](config.parameters, config.seed)
    wall = time.perf_counter() - start
    config_echo = {
        "experiment": config.experiment,
        "seed": config.seed,
        "out": config.out,
        "format": config.format,
        **{k: v for k, v in sorted(config.parameters.items())},
    }
    provenance = {
        "library": "fracqm",
        "version": __version__,
        "master_seed": config.seed,
    }
    return RunReport(config_echo, results, comparisons, provenance, wall)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _atomic_write(path: str, data: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_report(report: RunReport, prefix: str, fmt: str) -> list[str]:
    """Write output files (atomically); returns the paths written."""
    written = []
    if fmt == "json":
        payload = {
            "config": report.config,
            "results": report.results,
            "comparisons": report.comparisons,
            "provenance": report.provenance,
        }
        path = f"{prefix}.json"
        _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        written.append(path)
    else:
        for name, table in report.results.items():
            lines = [",".join(table["columns"])]
            for row in table["rows"]:
                lines.append(",".join(_fmt(v) for v in row))
            path = f"{prefix}_{name}.csv"
            _atomic_write(path, "\n".join(lines) + "\n")
            written.append(path)
        cols = ["name", "value", "oracle", "abs_dev", "rel_dev", "tolerance",
                "kind", "passed", "anchor"]
        lines = [",".join(cols)]
        for row in report.comparisons:
            lines.append(",".join(_fmt(row[c]) for c in cols))
        path = f"{prefix}_comparisons.csv"
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fracqm",
        description="Fractional quantum mechanics experiment driver",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="flat key=value config file")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="output path prefix")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            raw = parse_flat(fh.read())
        raw.setdefault("experiment", args.experiment)
        if raw["experiment"] != args.experiment:
            raise ConfigurationError(
                f"config names experiment {raw['experiment']!r}, "
                f"command line says {args.experiment!r}"
            )
        if args.seed is not None:
            raw["seed"] = str(args.seed)
        if args.out is not None:
            raw["out"] = args.out
        if args.fmt is not None:
            raw["format"] = args.fmt
        config = validate_config(raw)
        report = run_experiment(config)
        paths = write_report(report, config.out, config.format)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(f"experiment: {config.experiment} (seed {config.seed})")
    for row in report.comparisons:
        flag = "pass" if row["passed"] else "FAIL"
        print(
            f"  [{flag}] {row['name']}: value={row['value']:.6g} "
            f"oracle={row['oracle']:.6g} tol={row['tolerance']:.2g} ({row['kind']})"
        )
    print(f"wall clock: {report.wall_clock:.2f} s")
    for path in paths:
        print(f"wrote {path}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
