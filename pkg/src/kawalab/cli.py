"""Batch experiment front end.

Commands map one-to-one onto the library operations; every run writes a
manifest echoing the fully resolved configuration, and a fixed seed gives
byte-identical artifacts for any worker count. Configuration is read from
a line-oriented ``key = value`` file with one ``[section]`` per command;
command-line flags override file values.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import io as kio
from .dispersion import DispersionParams, resonance
from .grid import Grid, SpectralField, save_field
from .imultiplier import IMultiplier
from .multipliers import EnergyMultipliers, power_sum_identity_check
from .solver import SolverConfig, simulate, trajectory_to_rows

__all__ = ["main", "parse_config", "run", "ConfigError"]

OUT_ENV = "KAWALAB_OUT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: command, parameter block, seed, output, format."""

    command: str
    params: dict = dc_field(default_factory=dict)
    seed: int = 0
    out_dir: str = ""
    fmt: str = "both"
    workers: int = 1

    def wants(self, kind):
        return self.fmt == "both" or self.fmt == kind


# -- config file -------------------------------------------------------


def _read_config_file(path):
    sections = {}
    current = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                sections.setdefault(current, {})
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if current is None:
                raise ConfigError(f"{path}:{lineno}: key '{key}' outside any section")
            sections[current][key] = value
    return sections


def _convert(key, value, default):
    try:
        if isinstance(default, bool):
            if str(value).lower() in ("1", "true", "yes"):
                return True
            if str(value).lower() in ("0", "false", "no"):
                return False
            raise ValueError(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, tuple):
            return tuple(type(default[0])(v) for v in str(value).split(","))
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"key '{key}': cannot parse {value!r} as {type(default).__name__}")


def parse_config(command, defaults, file_path=None, flag_values=None):
    """Resolve defaults < config-file section < flags; strict keys."""
    resolved = dict(defaults)
    if file_path:
        sections = _read_config_file(file_path)
        for key, value in sections.get(command, {}).items():
            if key not in defaults:
                raise ConfigError(f"unknown key '{key}' in section [{command}]")
            resolved[key] = _convert(key, value, defaults[key])
    for key, value in (flag_values or {}).items():
        if value is None:
            continue
        if key not in defaults:
            raise ConfigError(f"unknown key '{key}'")
        resolved[key] = _convert(key, value, defaults[key])
    if "n" in resolved:
        n = resolved["n"]
        if n < 8 or (n & (n - 1)) != 0:
            raise ConfigError("n must be a power of two")
    return resolved


def _parallel_map(fn, units, workers):
    if workers <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, units))


# -- command implementations --------------------------------------------


def _random_datum(grid, seed, amplitude, decay, support=None):
    rng = np.random.default_rng(seed)
    u = SpectralField.random_real(
        grid, rng, envelope=lambda a: (1.0 + a ** 2) ** (-decay / 2.0),
        support=support,
    )
    norm = u.l2_norm()
    if norm == 0.0:
        return u
    return u * (amplitude / norm)



def _wants(fmt, kind):
    return fmt == "both" or fmt == kind

SIMULATE_DEFAULTS = {
    "L": 256.0 * np.pi,
    "n": 1024,
    "mu": 1.0,
    "dt": 1e-3,
    "t_end": 1.0,
    "dealias_fraction": 2.0 / 3.0,
    "monitor_stride": 50,
    "amplitude": 0.5,
    "decay": 8.0,
    "s_norm": 0.0,
    "datum": "",
    "save_fields": False,
}


def _cmd_simulate(cfg, out, seed, workers, fmt='both'):
    grid = Grid(cfg["L"], cfg["n"])
    disp = DispersionParams(cfg["mu"])
    if cfg["datum"]:
        from .grid import load_field

        u0 = load_field(cfg["datum"])
    else:
        u0 = _random_datum(grid, seed, cfg["amplitude"], cfg["decay"])
    sc = SolverConfig(grid, disp, dt=cfg["dt"], t_end=cfg["t_end"],
                      dealias_fraction=cfg["dealias_fraction"],
                      monitor_stride=cfg["monitor_stride"])
    traj = simulate(u0, sc)
    rows = trajectory_to_rows(traj, s=cfg["s_norm"])
    if _wants(fmt, "csv"):
        kio.write_csv(os.path.join(out, "trajectory.csv"),
                      ["t", "mean", "l2_mass", "h_s_norm"], rows)
    if cfg["save_fields"]:
        for i, (t, u) in enumerate(zip(traj.times, traj.fields)):
            save_field(u, os.path.join(out, f"field_{i:05d}.txt"))
    mean_drift = max(abs(m - traj.means[0]) for m in traj.means)
    base = traj.l2_masses[0]
    l2_drift = 0.0 if base == 0 else max(abs(m / base - 1.0) for m in traj.l2_masses)
    gates = {
        "mean_conserved": mean_drift <= 1e-14,
        "l2_mass_conserved": l2_drift <= 1e-8,
    }
    if _wants(fmt, "json"):
        kio.write_json(os.path.join(out, "summary.json"), {
            "mean_drift": mean_drift, "l2_relative_drift": l2_drift,
            "samples": len(traj), "gates": gates,
        })
    return gates


ENERGY_DEFAULTS = {
    "L": 4.0 * np.pi,
    "n": 256,
    "mu": 1.0,
    "N": 16.0,
    "s": -1.75,
    "amplitude": 2.5,
    "decay": 1.0,
    "support": 80,
    "pre_time": 0.01,
    "audit_steps": 4,
    "audit_safety": 0.05,
}


def _cmd_energy_track(cfg, out, seed, workers, fmt='both'):
    from .imethod import energy_derivative_audit, suggest_audit_stride

    grid = Grid(cfg["L"], cfg["n"])
    disp = DispersionParams(cfg["mu"])
    mult = IMultiplier(cfg["N"], cfg["s"])
    u0 = _random_datum(grid, seed, cfg["amplitude"], cfg["decay"], cfg["support"])
    if cfg["pre_time"] > 0:
        wmax = float(np.max(np.abs(disp.mu * grid.xi ** 3 - grid.xi ** 5)))
        dt_pre = min(2e-5, 0.5e6 / wmax)
        pre = SolverConfig(grid, disp, dt=dt_pre, t_end=cfg["pre_time"],
                           monitor_stride=10 ** 9)
        u0 = simulate(u0, pre).fields[-1]
    stride = suggest_audit_stride(u0, safety=cfg["audit_safety"])
    sc = SolverConfig(grid, disp, dt=stride, t_end=cfg["audit_steps"] * stride,
                      monitor_stride=1)
    traj = simulate(u0, sc, t0=cfg["pre_time"])
    audit = energy_derivative_audit(traj, mult, disp)
    rows = [
        (r["t"], r["e2"], r["corr3"], r["corr4"], r["e4"], r["resid3"], r["resid5"])
        for r in audit["rows"]
    ]
    if _wants(fmt, "csv"):
        kio.write_csv(os.path.join(out, "energy.csv"),
                      ["t", "E2", "corr3", "corr4", "E4", "resid3", "resid5"],
                      rows)
    worst = max(r["resid3"] for r in audit["rows"])
    gates = {"cubic_derivative_identity": worst <= 1e-3}
    if _wants(fmt, "json"):
        kio.write_json(os.path.join(out, "summary.json"), {
            "stride": stride, "worst_resid3": worst,
            "dealias_warning": audit["dealias_warning"], "gates": gates,
        })
    return gates


GWP_DEFAULTS = {
    "eps0": 0.1,
    "N": 64.0,
    "steps": 20,
    "s": -1.75,
    "n": 512,
    "mu": 1.0,
    "spectral_slope": 1.25,
    "track_e4": False,
}


def _cmd_gwp(cfg, out, seed, workers, fmt='both'):
    from .imethod import GwpConfig, gwp_experiment
    from .solver import dealias_cutoff_index

    # lam lands near 1/N when the datum norm matches eps0, so size the
    # original box to put the stretched dealias band at ~1.5 N
    n = cfg["n"]
    lam_target = 1.0 / cfg["N"]
    cutoff_target = 1.5 * cfg["N"]
    dxi_stretched = cutoff_target / dealias_cutoff_index(Grid(2 * np.pi, n))
    L0 = lam_target * 2.0 * np.pi / dxi_stretched
    grid = Grid(L0, n)
    disp = DispersionParams(cfg["mu"])
    rng = np.random.default_rng(seed)
    slope = cfg["spectral_slope"]
    datum = SpectralField.random_real(
        grid, rng, envelope=lambda a: (1.0 + a ** 2) ** (slope / 2.0),
        support=dealias_cutoff_index(grid) - 2,
    )
    # normalize so the rescaling solver lands exactly at lam = 1/N and the
    # stretched band sits where the box was sized for it
    from .grid import rescale_datum
    from .imultiplier import apply_I

    mult = IMultiplier(cfg["N"], cfg["s"])
    probe = apply_I(rescale_datum(datum, lam_target), mult).l2_norm()
    datum = datum * (cfg["eps0"] / probe)
    gc = GwpConfig(threshold=cfg["N"], eps0=cfg["eps0"], steps=cfg["steps"],
                   sobolev_s=cfg["s"], track_e4=cfg["track_e4"])
    result = gwp_experiment(gc, datum, disp)
    gates = {"bootstrap_bound": result.all_passed}
    kio.write_json(os.path.join(out, "gwp.json"), {
        "lam": result.lam, "eps0": result.eps0, "threshold": result.threshold,
        "times": result.times, "e2": result.e2, "e4": result.e4,
        "growth_norm": result.growth_norm, "passed": result.passed,
        "first_failure": result.first_failure,
        "growth_exponent": result.growth_exponent,
        "growth_reference": result.growth_reference, "gates": gates,
    })
    return gates


BOUNDS_DEFAULTS = {
    "N": 16.0,
    "mu": 1.0,
    "s": -1.75,
    "cap_lo": 6,
    "cap_hi": 7,
    "samples": 100000,
}


def _bounds_unit(args):
    name, mult_args, mu, cap, samples, seed = args
    from .audits import m5_bound_audit, sigma3_bound_audit, sigma4_bound_audit

    mult = IMultiplier(*mult_args)
    disp = DispersionParams(mu)
    fn = {"sigma3": sigma3_bound_audit, "sigma4": sigma4_bound_audit,
          "m5": m5_bound_audit}[name]
    return fn(mult, disp, cap, samples, seed).as_dict()


def _cmd_verify_bounds(cfg, out, seed, workers, fmt='both'):
    units = []
    for name in ("sigma3", "sigma4", "m5"):
        for cap in (cfg["cap_lo"], cfg["cap_hi"]):
            units.append((name, (cfg["N"], cfg["s"]), cfg["mu"], cap,
                          cfg["samples"], seed))
    reports = _parallel_map(_bounds_unit, units, workers)
    by_key = {(u[0], u[3]): r for u, r in zip(units, reports)}
    gates = {}
    drifts = {}
    for name in ("sigma3", "sigma4", "m5"):
        lo = by_key[(name, cfg["cap_lo"])]["max_ratio"]
        hi = by_key[(name, cfg["cap_hi"])]["max_ratio"]
        drift = hi / lo if lo > 0 else float("inf")
        drifts[name] = drift
        gates[f"{name}_cap_stability"] = (drift < 2.0) and (drift > 0.5)
    if _wants(fmt, "json"):
        kio.write_json(os.path.join(out, "bounds.json"), {
            "reports": {f"{u[0]}_cap{u[3]}": r for u, r in zip(units, reports)},
            "drifts": drifts, "gates": gates,
        })
    if _wants(fmt, "csv"):
        lines = []
        for u, r in zip(units, reports):
            lines.append(
                f"{r['bound_name']:34s} cap=2^{u[3]} "
                f"samples={r['samples_evaluated']:8d} "
                f"max_ratio={r['max_ratio']:.6g} seed={r['seed']}"
            )
        kio.atomic_write_text(os.path.join(out, "bounds.txt"),
                              "\n".join(lines) + "\n")
    return gates


RESONANCE_DEFAULTS = {
    "samples": 1000000,
    "budget_factor": 10,
    "mu_fixed": float("nan"),
}


def _cmd_resonance(cfg, out, seed, workers, fmt='both'):
    from .audits import resonance_size_audit

    mu = None if np.isnan(cfg["mu_fixed"]) else cfg["mu_fixed"]
    small = resonance_size_audit(cfg["samples"], seed, mu=mu)
    big = resonance_size_audit(cfg["samples"] * cfg["budget_factor"], seed, mu=mu)
    zero = resonance_size_audit(cfg["samples"], seed, mu=0.0)
    move_lo = abs(big.min_ratio / small.min_ratio - 1.0)
    move_hi = abs(big.max_ratio / small.max_ratio - 1.0)
    gates = {
        "bracket_stable": move_lo < 0.1 and move_hi < 0.1,
        "bracket_contains_worked_value":
            zero.min_ratio <= 1.875 <= zero.max_ratio,
        "no_false_zero": small.min_ratio > 0.0,
    }
    if _wants(fmt, "json"):
        kio.write_json(os.path.join(out, "resonance.json"), {
            "bracket": [small.min_ratio, small.max_ratio],
            "bracket_large_budget": [big.min_ratio, big.max_ratio],
            "bracket_mu0": [zero.min_ratio, zero.max_ratio],
            "moves": [move_lo, move_hi],
            "samples": [small.samples_evaluated, big.samples_evaluated],
            "gates": gates,
        })
    if _wants(fmt, "csv"):
        lines = [
            f"seed={seed}",
            f"bracket          [{small.min_ratio:.6f}, {small.max_ratio:.6f}] "
            f"samples={small.samples_evaluated}",
            f"bracket (10x)    [{big.min_ratio:.6f}, {big.max_ratio:.6f}] "
            f"samples={big.samples_evaluated}",
            f"bracket (mu=0)   [{zero.min_ratio:.6f}, {zero.max_ratio:.6f}]",
            f"argmax tuple     {small.argmax}",
        ]
        kio.atomic_write_text(os.path.join(out, "resonance.txt"),
                              "\n".join(lines) + "\n")
    return gates


KNAPP_DEFAULTS = {
    "n1_lo_exp": 8,
    "n1_hi_exp": 10,
    "L1": 1.0,
    "L2": 16.0,
    "mu": 1.0,
    "samples": 1 << 20,
}


def _cmd_knapp(cfg, out, seed, workers, fmt='both'):
    from .audits import KnappConfig, knapp_sharpness

    results = []
    for exp in (cfg["n1_lo_exp"], cfg["n1_hi_exp"]):
        kc = KnappConfig(2.0 ** exp, cfg["L1"], cfg["L2"], mu=cfg["mu"])
        results.append(knapp_sharpness(kc, n_samples=cfg["samples"], seed=seed))
    r_lo, r_hi = results
    ratio_drift = r_hi["sharpness_ratio"] / r_lo["sharpness_ratio"]
    gates = {
        "sharpness_ratio_stable": 0.5 < ratio_drift < 2.0,
        "j_scaling_stable":
            0.5 < r_hi["j_scaling"] / r_lo["j_scaling"] < 2.0,
        "norm_scaling_stable":
            0.5 < r_hi["norm_product_scaling"] / r_lo["norm_product_scaling"] < 2.0,
    }
    kio.write_json(os.path.join(out, "knapp.json"), {
        "results": results, "ratio_drift": ratio_drift, "gates": gates,
    })
    return gates


STRICHARTZ_DEFAULTS = {
    "k_lo": 4,
    "k_hi": 9,
    "trials": 8,
    "n": 8192,
    "L": 4.0 * np.pi,
    "n_times": 1024,
    "mu": 1.0,
    "slope_tol": 0.15,
}


def _strichartz_unit(args):
    (mu, k, trials, n, L, n_times, seed) = args
    from .audits import linear_estimate_audit

    disp = DispersionParams(mu)
    grid = Grid(L, n)
    return linear_estimate_audit(
        disp, [k], [(6.0, 6.0), (8.0, 4.0), (np.inf, 2.0)], trials, seed,
        grid=grid, n_times=n_times,
    )


def _cmd_strichartz(cfg, out, seed, workers, fmt='both'):
    ks = list(range(cfg["k_lo"], cfg["k_hi"] + 1))
    units = [(cfg["mu"], k, cfg["trials"], cfg["n"], cfg["L"], cfg["n_times"],
              seed + i) for i, k in enumerate(ks)]
    partial = _parallel_map(_strichartz_unit, units, workers)
    ratios = {}
    for res in partial:
        for key, table in res["ratios"].items():
            ratios.setdefault(key, {}).update(table)
    karr = np.asarray(ks, dtype=np.float64)
    slopes = {}
    for key, table in ratios.items():
        vals = np.array([table[k] for k in ks])
        slopes[key] = float(np.polyfit(karr, np.log2(vals), 1)[0])
    unit_key = next(key for key in ratios if key.startswith("Ltinf"))
    unit_ratio = ratios[unit_key]
    gates = {
        "Lt6Lx6_flat": abs(slopes["Lt6.0Lx6.0"]) <= cfg["slope_tol"],
        "Lt8Lx4_flat": abs(slopes["Lt8.0Lx4.0"]) <= cfg["slope_tol"],
        "maximal_flat": abs(slopes["maximal_Lx4"]) <= cfg["slope_tol"],
        "smoothing_flat": abs(slopes["smoothing"]) <= cfg["slope_tol"],
        "unitarity_exact": all(
            abs(v - 1.0) <= 1e-12 for v in unit_ratio.values()
        ),
    }
    kio.write_json(os.path.join(out, "strichartz.json"), {
        "ratios": {key: {str(k): v for k, v in t.items()} for key, t in ratios.items()},
        "slopes": slopes, "gates": gates,
    })
    if _wants(fmt, "csv"):
        lines = [f"seed={seed}  shells k={ks[0]}..{ks[-1]}  trials={cfg['trials']}"]
        for key in sorted(ratios):
            row = "  ".join(f"{ratios[key][k]:10.4f}" for k in ks)
            lines.append(f"{key:14s} {row}   slope {slopes[key]:+.4f}")
        kio.atomic_write_text(os.path.join(out, "strichartz.txt"),
                              "\n".join(lines) + "\n")
    return gates


XNORMS_DEFAULTS = {
    "L": 16.0 * np.pi,
    "n": 256,
    "mu": 1.0,
    "t_box": 8.0,
    "n_times": 4096,
    "shell": 1,
    "s": -1.75,
    "b": 0.5,
}


def _cmd_xnorms(cfg, out, seed, workers, fmt='both'):
    from .spacetime import (SpaceTimeField, free_trajectory, uniform_times,
                            xsb_norm, xk_norm, fbar_norm)
    from .dyadic import eta_k, eta0 as _eta0

    grid = Grid(cfg["L"], cfg["n"])
    disp = DispersionParams(cfg["mu"])
    rng = np.random.default_rng(seed)
    k = cfg["shell"]
    phi = SpectralField.random_real(
        grid, rng, envelope=lambda a: np.sqrt(eta_k(a, k)))
    nrm = phi.l2_norm()
    phi = phi * (1.0 / nrm if nrm else 1.0)
    times = uniform_times(-cfg["t_box"] / 2, cfg["t_box"] / 2, cfg["n_times"])
    _, fields = free_trajectory(phi, disp, times)
    F = SpaceTimeField.from_samples(grid, times, fields)
    st_l2 = xsb_norm(F, 0.0, 0.0, disp)
    # direct windowed space-time quadrature for the b=0, s=0 cross-check
    direct = np.sqrt(sum(
        (_eta0(t) * f.l2_norm()) ** 2 * (times[1] - times[0])
        for t, f in zip(times, fields)
    ))
    xsb = xsb_norm(F, cfg["s"], cfg["b"], disp)
    xk = xk_norm(F, k, disp)
    fb = fbar_norm(times, fields, cfg["s"], disp)
    # modulation concentration: shells j <= 2 of the windowed free flow
    from .dispersion import omega as _omega

    mod = F.tau[:, None] - _omega(grid.xi, disp)[None, :]
    mag2 = np.abs(F.coeffs2d) ** 2
    low = float(np.sum(mag2 * (_eta0(mod / 4.0))) / np.sum(mag2))
    gates = {
        "plancherel_spacetime": abs(st_l2 / direct - 1.0) <= 1e-10,
        "modulation_concentrated": low >= 0.9,
    }
    kio.write_json(os.path.join(out, "xnorms.json"), {
        "spacetime_l2": st_l2, "direct_l2": direct, "xsb": xsb,
        "xk": xk, "fbar": fb, "low_modulation_share": low, "gates": gates,
    })
    return gates


DUHAMEL_DEFAULTS = {
    "L": 16.0 * np.pi,
    "n": 256,
    "mu": 1.0,
    "n_times": 1024,
    "mode": 8,
    "amplitude": 0.1,
}


def _cmd_duhamel(cfg, out, seed, workers, fmt='both'):
    from .spacetime import duhamel_bilinear, free_trajectory, uniform_times

    grid = Grid(cfg["L"], cfg["n"])
    disp = DispersionParams(cfg["mu"])
    m0 = cfg["mode"]
    amp = cfg["amplitude"]
    phi = SpectralField.from_mode_dict(grid, {m0: amp, -m0: amp})
    times = uniform_times(-2.0, 2.0, cfg["n_times"])
    _, fu = free_trajectory(phi, disp, times)
    res = duhamel_bilinear(times, fu, fu, disp)
    # closed-form check at t inside the window plateau: the doubled mode
    # grows like the integrated phase-difference quotient
    xi0 = m0 * grid.dxi
    t_idx = int(np.argmin(np.abs(res["times"] - 1.0)))
    t_chk = float(res["times"][t_idx])
    theta = float(resonance(xi0, xi0, disp))
    phase_integral = (np.exp(1j * theta * t_chk) - 1.0) / (1j * theta)
    expected = (
        1j * (2 * xi0) * amp * amp * grid.dxi / np.sqrt(2 * np.pi)
        * np.exp(1j * (disp.mu * (2 * xi0) ** 3 - (2 * xi0) ** 5) * t_chk)
        * phase_integral
    )
    got = res["fields"][t_idx].coeffs[grid.index_of_mode(2 * m0)]
    rel = abs(got - expected) / abs(expected)
    gates = {
        "quadrature_converged": res["quadrature_change"] < 0.005,
        "single_mode_closed_form": rel < 0.01,
    }
    kio.write_json(os.path.join(out, "duhamel.json"), {
        "quadrature_change": res["quadrature_change"],
        "closed_form_relative_error": float(rel), "t_checked": t_chk,
        "gates": gates,
    })
    return gates


ILLPOSED_DEFAULTS = {
    "s": -2.5,
    "n_exp_lo": 7,
    "n_exp_hi": 11,
    "t_eval": 0.5,
    "mu": 1.0,
    "quad_points": 48,
    "out_points": 64,
    "slope_tol": 0.3,
}


def _illposed_unit(args):
    from .illposed import IllposedConfig, illposed_sweep

    cfg_kw, N = args
    config = IllposedConfig(n_list=(N,), **cfg_kw)
    return illposed_sweep(config)[0]


def _cmd_illposed(cfg, out, seed, workers, fmt='both'):
    from .illposed import IllposedConfig, growth_fit

    n_list = tuple(2 ** e for e in range(cfg["n_exp_lo"], cfg["n_exp_hi"] + 1))
    kw = {"sobolev_s": cfg["s"], "t_eval": cfg["t_eval"], "mu": cfg["mu"],
          "quad_points": cfg["quad_points"], "out_points": cfg["out_points"]}
    rows = _parallel_map(_illposed_unit, [(kw, N) for N in n_list], workers)
    config = IllposedConfig(n_list=n_list, **kw)
    fit = growth_fit(config, rows=rows)
    if _wants(fmt, "csv"):
        kio.write_csv(os.path.join(out, "illposed.csv"),
                      ["N", "a1_norm", "a2_norm", "a3_norm",
                       "g1_share", "g2_share"],
                      [(r["N"], r["a1_norm"], r["a2_norm"], r["a3_norm"],
                        r["g1_norm"] / r["a3_norm"],
                        r["g2_norm"] / r["a3_norm"]) for r in rows])
    gates = {"growth_exponent": fit["gap"] <= cfg["slope_tol"]}
    kio.write_json(os.path.join(out, "illposed_fit.json"), {
        "slope": fit["slope"], "expected": fit["expected"], "gap": fit["gap"],
        "rows": rows, "gates": gates,
    })
    return gates


IDENTITIES_DEFAULTS = {
    "tuples": 10000,
    "N": 16.0,
    "mu": 1.0,
    "s": -1.75,
    "mode_range": 1000,
}


def _cmd_identities(cfg, out, seed, workers, fmt='both'):
    rng = np.random.default_rng(seed)
    disp = DispersionParams(cfg["mu"])
    mult = IMultiplier(cfg["N"], cfg["s"])
    kern = EnergyMultipliers(mult, disp)
    count = cfg["tuples"]

    x3 = rng.uniform(-cfg["mode_range"], cfg["mode_range"], (count, 2))
    x3 = np.column_stack([x3, -x3.sum(axis=1)])
    gap3 = power_sum_identity_check(x3)
    x4 = rng.uniform(-cfg["mode_range"], cfg["mode_range"], (count, 3))
    x4 = np.column_stack([x4, -x4.sum(axis=1)])
    gap4 = power_sum_identity_check(x4)

    from kawalab.illposed import theta_identity_gap

    xt = rng.uniform(-cfg["mode_range"], cfg["mode_range"], (count, 3))
    gap_theta = theta_identity_gap(xt, disp)

    m3i = rng.integers(-cfg["mode_range"], cfg["mode_range"] + 1, (count, 2))
    m3 = np.column_stack([m3i, -m3i.sum(axis=1)]).astype(np.float64)
    ok3 = (m3 != 0).all(axis=1)
    m3 = m3[ok3]
    m3v = kern.m3(m3[:, 0], m3[:, 1], m3[:, 2])
    s3v = kern.sigma3(m3[:, 0], m3[:, 1], m3[:, 2])
    hv3 = kern.hv3(m3[:, 0], m3[:, 1], m3[:, 2])
    res3 = np.abs(m3v + s3v * hv3)
    nz3 = np.abs(m3v) > 0
    canc3 = float(np.max(res3[nz3] / np.abs(m3v[nz3]))) if nz3.any() else 0.0

    m4i = rng.integers(-cfg["mode_range"], cfg["mode_range"] + 1, (count, 3))
    m4 = np.column_stack([m4i, -m4i.sum(axis=1)]).astype(np.float64)
    p = np.stack([m4[:, 0] + m4[:, 1], m4[:, 0] + m4[:, 2], m4[:, 1] + m4[:, 2]])
    ok4 = (np.abs(p) > 0).all(axis=0)
    m4 = m4[ok4]
    m4v = kern.m4(m4[:, 0], m4[:, 1], m4[:, 2], m4[:, 3])
    s4v = kern.sigma4(m4[:, 0], m4[:, 1], m4[:, 2], m4[:, 3])
    hv4 = kern.hv4(m4[:, 0], m4[:, 1], m4[:, 2], m4[:, 3])
    res4 = np.abs(m4v + s4v * hv4)
    nz4 = np.abs(m4v) > 0
    canc4 = float(np.max(res4[nz4] / np.abs(m4v[nz4]))) if nz4.any() else 0.0

    gates = {
        "power_sums_k3": gap3 <= 1e-11,
        "power_sums_k4": gap4 <= 1e-11,
        "theta_factorization": gap_theta <= 1e-11,
        "cubic_cancellation": canc3 <= 1e-12,
        "quartic_cancellation": canc4 <= 1e-12,
    }
    kio.write_json(os.path.join(out, "identities.json"), {
        "power_sum_gap_k3": gap3, "power_sum_gap_k4": gap4,
        "theta_gap": gap_theta, "cubic_cancellation": canc3,
        "quartic_cancellation": canc4,
        "tuples": count, "gates": gates,
    })
    return gates


COMMANDS = {
    "simulate": (SIMULATE_DEFAULTS, _cmd_simulate),
    "energy-track": (ENERGY_DEFAULTS, _cmd_energy_track),
    "gwp": (GWP_DEFAULTS, _cmd_gwp),
    "verify-bounds": (BOUNDS_DEFAULTS, _cmd_verify_bounds),
    "resonance": (RESONANCE_DEFAULTS, _cmd_resonance),
    "knapp": (KNAPP_DEFAULTS, _cmd_knapp),
    "strichartz": (STRICHARTZ_DEFAULTS, _cmd_strichartz),
    "xnorms": (XNORMS_DEFAULTS, _cmd_xnorms),
    "duhamel": (DUHAMEL_DEFAULTS, _cmd_duhamel),
    "illposed": (ILLPOSED_DEFAULTS, _cmd_illposed),
    "identities": (IDENTITIES_DEFAULTS, _cmd_identities),
}


def run(command, resolved, out_dir, seed, workers, enforce_gates=True,
        fmt="both"):
    os.makedirs(out_dir, exist_ok=True)
    manifest = dict(resolved)
    manifest["seed"] = seed
    manifest["format"] = fmt
    kio.write_manifest(os.path.join(out_dir, "manifest.txt"), command, manifest)
    _, runner = COMMANDS[command]
    gates = runner(resolved, out_dir, seed, workers, fmt)
    failed = sorted(name for name, ok in gates.items() if not ok)
    if failed:
        kio.write_json(os.path.join(out_dir, "failures.json"),
                       {"command": command, "failed_gates": failed})
    if enforce_gates and failed:
        return 1
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kawalab",
        description="Kawahara pseudospectral lab: batch experiments and audits",
    )
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--format", choices=("csv", "json", "both"), default="both")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--no-gate", action="store_true",
                        help="report gates but always exit 0")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (defaults, _) in COMMANDS.items():
        p = sub.add_parser(name)
        for key, value in defaults.items():
            if isinstance(value, bool):
                p.add_argument(f"--{key}", default=None)
            else:
                p.add_argument(f"--{key}", default=None)
    args = parser.parse_args(argv)

    defaults, _ = COMMANDS[args.command]
    flag_values = {key: getattr(args, key.replace("-", "_"), None) for key in defaults}
    try:
        resolved = parse_config(args.command, defaults, args.config, flag_values)
        seed = args.seed
        if args.config:
            sections = _read_config_file(args.config)
            common = sections.get("common", {})
            if "seed" in common and "--seed" not in (argv or sys.argv):
                seed = int(common["seed"])
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out_dir = args.out or os.environ.get(OUT_ENV) or os.path.join(
        "runs", f"{args.command}-seed{seed}"
    )
    rc = RunConfig(command=args.command, params=resolved, seed=seed,
                   out_dir=out_dir, fmt=args.format, workers=args.workers)
    return run(rc.command, rc.params, rc.out_dir, rc.seed, rc.workers,
               enforce_gates=not args.no_gate, fmt=rc.fmt)


if __name__ == "__main__":
    sys.exit(main())
