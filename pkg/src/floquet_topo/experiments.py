"""Experiment recipes: each turns a flat, validated configuration into a
Dataset of tables plus a summary record."""
from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np

from . import analysis as an
from .edge import edge_weight
from .errors import ConfigError, ContractError
from .models import PiFluxSpec, RabiSpec, SSHSpec, piflux_harmonic
from .output import (
    CHERN_SWEEP_HEADER,
    FLUX_HEADER,
    SPECTRUM_HEADER,
    ZAK_SWEEP_HEADER,
    Dataset,
    Table,
)
from .parallel import pmap
from .rwa import critical_frequencies, degeneracy_points, ssh_rwa
from .topology import UNDEFINED, analytic_chern_highfreq, analytic_phase_diagram

COMMON = {"grid": None, "steps": None, "threads": 1}

DEFAULTS: dict[str, dict] = {
    "rabi-quasienergy": {
        "delta": 1.0, "V": 0.1, "phi": 0.0,
        "omega_min": 0.8, "omega_max": 5.0, "omega_points": 85, "steps": 2048,
    },
    "ssh-obc-sweep": {
        "J": 1.0, "V": 0.2, "omega": 5.0, "n_cells": 20,
        "jp_min": 0.5, "jp_max": 4.5, "jp_points": 41, "steps": 2048, "grid": 256,
    },
    "ssh-resonance": {"J": 1.0, "Jp": 1.5, "V": 0.2, "omega": 5.0, "grid": 256, "steps": 2048},
    "ssh-pbc-compare": {"J": 1.0, "Jp": 1.5, "V": 0.2, "omega": 5.0, "grid": 256, "steps": 2048},
    "ssh-zak": {
        "J": 0.5, "Jp": 2.0, "V": 0.2, "t": 0.0,
        "omega_min": 2.5, "omega_max": 10.0, "omega_points": 31, "grid": 512,
    },
    "piflux-highfreq": {"J": 1.0, "Ax": 0.5, "Ay": 0.5, "phi": math.pi / 2, "omega": 6.0, "grid": 200, "steps": 4096},
    "piflux-phase-diagram": {
        "J": 1.0, "phi": math.pi / 2, "omega": 6.0,
        "a_min": 0.0, "a_max": 6.0, "a_points": 121, "a_cut": 0.5,
    },
    "piflux-berry": {
        "J": 1.0, "Ax": 0.5, "Ay": 0.5, "phi": math.pi / 2, "omega": 6.0, "band": 1, "grid": 200, "steps": 4096,
    },
    "piflux-chern-sweep": {
        "J": 1.0, "Ax": 0.5, "Ay": 0.5, "phi": math.pi / 2,
        "omega_min": 3.5, "omega_max": 7.0, "omega_points": 8, "grid": 100, "steps": 4096,
    },
    "piflux-ribbon": {
        "J": 1.0, "Ax": 0.5, "Ay": 0.5, "phi": math.pi / 2, "omega": 3.5, "n_y": 40, "grid": 64, "steps": 512,
    },
    "piflux-band-overlap": {"J": 1.0, "Ax": 1.0, "Ay": 1.0, "phi": math.pi / 2, "omega": 6.0, "grid": 128, "steps": 4096},
}

MODEL_OF = {name: name.split("-", 1)[0] for name in DEFAULTS}


def resolve_experiment(model: str, name: str) -> str:
    full = name if name.startswith(model + "-") else f"{model}-{name}"
    if full not in DEFAULTS or MODEL_OF[full] != model:
        choices = sorted(n for n, m in MODEL_OF.items() if m == model)
        raise ConfigError(f"unknown experiment {name!r} for model {model!r}; choose from {choices}")
    return full


def resolve_config(experiment: str, *layers: dict) -> dict:
    """Defaults, then each layer in turn; unknown keys and nested values are rejected."""
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[experiment])
    for layer in layers:
        for key, value in layer.items():
            if key == "experiment":
                continue
            if key not in cfg:
                raise ConfigError(f"unknown key {key!r} for {experiment}; known: {sorted(cfg)}")
            if isinstance(value, (dict, list)):
                raise ConfigError(f"key {key!r}: nested values are not allowed")
            if value is not None:
                default = cfg[key]
                if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
                    value = float(value)
                elif default is not None and type(value) is not type(default):
                    raise ConfigError(f"key {key!r}: expected {type(default).__name__}, got {value!r}")
            cfg[key] = value
    cfg["experiment"] = experiment
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    for key in ("grid", "steps", "threads"):
        v = cfg.get(key)
        if v is not None and (not isinstance(v, int) or v < 1):
            raise ConfigError(f"{key} must be a positive integer")
    for lo, hi, n in (("omega_min", "omega_max", "omega_points"), ("jp_min", "jp_max", "jp_points"), ("a_min", "a_max", "a_points")):
        if lo in cfg:
            if not cfg[hi] >= cfg[lo]:
                raise ConfigError(f"{hi} must be >= {lo}")
            if cfg[n] < 1:
                raise ConfigError(f"{n} must be >= 1")
    try:
        _build_specs(cfg)
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc


def _build_specs(cfg: dict):
    exp = cfg["experiment"]
    omega = cfg.get("omega", cfg.get("omega_min", 1.0)) or 1.0
    if exp.startswith("rabi"):
        return RabiSpec(cfg["delta"], cfg["V"], omega, cfg["phi"])
    if exp.startswith("ssh"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return SSHSpec(cfg["J"], cfg.get("Jp", cfg.get("jp_min", 1.0)), cfg["V"], omega, cfg.get("n_cells", 20))
    return PiFluxSpec(cfg["J"], cfg.get("Ax", 0.0), cfg.get("Ay", 0.0), omega, cfg["phi"], cfg.get("n_y", 40))


def _sweep(cfg: dict, key: str) -> np.ndarray:
    n = cfg[f"{key}_points"]
    return np.linspace(cfg[f"{key}_min"], cfg[f"{key}_max"], n) if n > 1 else np.array([cfg[f"{key}_min"]])


def _grid(cfg: dict, fallback: int) -> int:
    return cfg["grid"] or fallback


def _steps(cfg: dict) -> int:
    return cfg["steps"] or 4096


def _fl(x) -> float:
    return float(x)


# ------------------------------------------------------------------ recipes

def rabi_quasienergy(cfg: dict) -> Dataset:
    omegas = _sweep(cfg, "omega")
    rows = an.rabi_sweep(cfg["delta"], cfg["V"], omegas, _steps(cfg), cfg["threads"])
    table = Table("quasienergy", ("omega", "band", "quasienergy_exact", "quasienergy_analytic"))
    for r in rows:
        for i, band in enumerate(("minus", "plus")):
            table.rows.append((_fl(r.omega), band, _fl(r.exact[i]), _fl(r.analytic[i])))
    crit = critical_frequencies(RabiSpec(cfg["delta"], cfg["V"], 1.0))
    summary = {
        "max_deviation": max((r.deviation for r in rows), default=0.0),
        "critical_frequencies": [c.omega for c in crit.frequencies],
        "diagnostics": crit.diagnostics,
    }
    return Dataset(cfg["experiment"], cfg, [table], summary, [("scatter", "quasienergy")])


def ssh_obc_sweep(cfg: dict) -> Dataset:
    table = Table("spectrum", ("jp_over_j",) + SPECTRUM_HEADER[1:])
    counts = Table("edge_counts", ("jp_over_j", "zero_gap_count", "pi_gap_count"))

    def one(jp):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            spec = SSHSpec(cfg["J"], float(jp), cfg["V"], cfg["omega"], cfg["n_cells"])
        return jp, an.ssh_edge_counts(spec, _steps(cfg), _grid(cfg, 256))

    for jp, res in pmap(one, _sweep(cfg, "jp"), cfg["threads"]):
        ratio = _fl(jp / cfg["J"])
        w = edge_weight(res.spectrum.modes)
        for a, e in enumerate(res.spectrum.energies):
            table.rows.append((ratio, a, _fl(e), _fl(w[a])))
        counts.rows.append((ratio, res.zero.count, res.pi.count))
    crit = [c.omega for c in critical_frequencies(SSHSpec(cfg["J"], 1.5 * cfg["J"], cfg["V"], cfg["omega"])).frequencies]
    summary = {
        "pi_closure_jp": [cfg["omega"] / 2 - cfg["J"], cfg["omega"] / 2 + cfg["J"]],
        "edge_counts": {str(r[0]): [r[1], r[2]] for r in counts.rows},
        "critical_frequencies_at_jp_1.5": crit,
    }
    return Dataset(cfg["experiment"], cfg, [table, counts], summary, [("scatter", "spectrum")])


def _ssh_spec(cfg: dict, omega: float | None = None) -> SSHSpec:
    return SSHSpec(cfg["J"], cfg["Jp"], cfg["V"], cfg["omega"] if omega is None else omega)


def ssh_resonance(cfg: dict) -> Dataset:
    spec = _ssh_spec(cfg)
    ks = an.ssh_k_grid(_grid(cfg, 256))
    sol = ssh_rwa(spec, ks)
    lam = sol.rotating.eigenvalues()
    table = Table("rotating_frame", ("k", "gamma_abs", "detuning", "e_tilde_minus", "e_tilde_plus"))
    for i, k in enumerate(ks):
        table.rows.append((_fl(k), _fl(abs(sol.gamma[i])), _fl(sol.rotating.detuning[i]), _fl(lam[i, 0]), _fl(lam[i, 1])))
    crit = critical_frequencies(spec)
    summary = {
        "critical_frequencies": [{"omega": c.omega, "k": list(c.k_point), "mechanism": c.mechanism} for c in crit.frequencies],
        "diagnostics": crit.diagnostics,
        "degeneracy_points": degeneracy_points(spec),
    }
    return Dataset(cfg["experiment"], cfg, [table], summary, [("scatter", "rotating_frame")])


def ssh_pbc_compare(cfg: dict) -> Dataset:
    spec = _ssh_spec(cfg)
    nk = _grid(cfg, 256)
    ks = an.ssh_k_grid(nk)
    exact = an.ssh_bulk_quasienergies(spec, nk, _steps(cfg))
    analytic = ssh_rwa(spec, ks).quasienergies()
    table = Table("spectrum", SPECTRUM_HEADER)
    for i, k in enumerate(ks):
        for b, label in enumerate(("exact_minus", "exact_plus")):
            table.rows.append((_fl(k), label, _fl(exact[i, b]), None))
        for b, label in enumerate(("analytic_minus", "analytic_plus")):
            table.rows.append((_fl(k), label, _fl(analytic[i, b]), None))
    g0, gpi = an.bulk_gap_widths(exact, spec.omega)
    summary = {"zero_gap": g0, "pi_gap": gpi}
    return Dataset(cfg["experiment"], cfg, [table], summary, [("scatter", "spectrum")])


def ssh_zak(cfg: dict) -> Dataset:
    table = Table("zak", ZAK_SWEEP_HEADER)
    bar = Table("zak_bar", ("omega", "gamma_bar_plus", "gamma_bar_minus"))
    omegas = _sweep(cfg, "omega")

    def one(w):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return an.ssh_zak_split(_ssh_spec(cfg, float(w)), _grid(cfg, 512), cfg["t"])

    for w, z in zip(omegas, pmap(one, omegas, cfg["threads"])):
        # index 1 = rotating-frame plus, 0 = minus
        table.rows.append((_fl(w), _fl(z.gamma[1]), _fl(z.gamma[0]), _fl(z.gamma_tilde_signed[1]), _fl(z.gamma_tilde_signed[0])))
        bar.rows.append((_fl(w), _fl(z.gamma_bar_signed[1]), _fl(z.gamma_bar_signed[0])))
    spec = _ssh_spec(cfg, cfg["omega_min"])
    summary = {
        "resonances": [c.omega for c in critical_frequencies(spec).frequencies],
        "labels": "plus/minus index the rotating-frame states; gamma reduced to (-pi, pi], tilde/bar signed in the SU(2) loop gauge",
    }
    return Dataset(cfg["experiment"], cfg, [table, bar], summary, [("scatter", "zak")])


def _pf_spec(cfg: dict, omega: float | None = None) -> PiFluxSpec:
    return PiFluxSpec(cfg["J"], cfg["Ax"], cfg["Ay"], cfg["omega"] if omega is None else omega, cfg["phi"], cfg.get("n_y", 40))


def _flux_table(fmap) -> Table:
    table = Table("flux", FLUX_HEADER)
    cx, cy = fmap.centers()
    for i in range(cx.shape[0]):
        for j in range(cx.shape[1]):
            table.rows.append((_fl(cx[i, j]), _fl(cy[i, j]), _fl(fmap.flux[i, j])))
    return table


def piflux_highfreq(cfg: dict) -> Dataset:
    spec = _pf_spec(cfg)
    bands = an.piflux_exact_bands(spec, _grid(cfg, 200), _steps(cfg))
    c_plus, fmap = an.band_chern(bands, 1)
    c_minus, _ = an.band_chern(bands, -1)
    try:
        analytic = analytic_chern_highfreq(spec)
    except ArithmeticError:
        analytic = (UNDEFINED, UNDEFINED)
    tables = [_flux_table(fmap)] if fmap is not None else [Table("flux", FLUX_HEADER)]
    dirac = [(-math.pi / 2, 0.0), (math.pi / 2, 0.0)]
    summary = {
        "c_plus": c_plus, "c_minus": c_minus,
        "analytic_c_plus": analytic[0], "analytic_c_minus": analytic[1],
        "gaps": list(bands.gaps()),
        "flux_fraction_near_dirac": an.flux_concentration(fmap, dirac, math.pi / 4) if fmap is not None else None,
    }
    return Dataset(cfg["experiment"], cfg, tables, summary, [("heatmap", "flux")])


def piflux_phase_diagram(cfg: dict) -> Dataset:
    amps = _sweep(cfg, "a")
    diag = analytic_phase_diagram(amps, amps, cfg["J"], cfg["omega"], cfg["phi"])
    table = Table("phase_diagram", ("ax", "ay", "c_plus"))
    for i, ax in enumerate(amps):
        for j, ay in enumerate(amps):
            table.rows.append((_fl(ax), _fl(ay), int(diag[i, j])))
    cut = analytic_phase_diagram(amps, [cfg["a_cut"]], cfg["J"], cfg["omega"], cfg["phi"])[:, 0]
    flips = [[_fl(amps[i]), _fl(amps[i + 1])] for i in range(len(amps) - 1) if cut[i] != cut[i + 1]]
    summary = {"sign_changes_along_ax_at_ay_cut": flips}
    return Dataset(cfg["experiment"], cfg, [table], summary, [("heatmap", "phase_diagram")])


def piflux_berry(cfg: dict) -> Dataset:
    spec = _pf_spec(cfg)
    bands = an.piflux_exact_bands(spec, _grid(cfg, 200), _steps(cfg))
    c, fmap = an.band_chern(bands, cfg["band"])
    tables = [_flux_table(fmap)] if fmap is not None else [Table("flux", FLUX_HEADER)]
    summary = {"band": cfg["band"], "chern": c, "total_flux": fmap.total if fmap is not None else None}
    return Dataset(cfg["experiment"], cfg, tables, summary, [("heatmap", "flux")])


def piflux_chern_sweep(cfg: dict) -> Dataset:
    omegas = _sweep(cfg, "omega")
    n = _grid(cfg, 100)
    if n % 2:
        n += 1

    def one(w):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return an.piflux_chern_row(_pf_spec(cfg, float(w)), n, _steps(cfg))

    rows = pmap(one, omegas, cfg["threads"])
    table = Table("invariants", CHERN_SWEEP_HEADER)
    for r in rows:
        table.rows.append((_fl(r.omega), r.c[1], r.c[-1], r.c_tilde[1], r.c_tilde[-1], r.c_bar[1], r.c_bar[-1]))
    crit = critical_frequencies(_pf_spec(cfg, 1.0))
    jumps = []
    for a, b in zip(rows, rows[1:]):
        if isinstance(a.c[1], int) and isinstance(b.c[1], int) and a.c[1] != b.c[1]:
            jumps.append([a.omega, b.omega, a.c[1], b.c[1]])
    summary = {"critical_frequency": crit.frequencies[0].omega, "exact_chern_jumps": jumps}
    return Dataset(cfg["experiment"], cfg, [table], summary, [("scatter", "invariants")])


def piflux_ribbon(cfg: dict) -> Dataset:
    spec = _pf_spec(cfg)
    res = an.piflux_ribbon_counts(spec, _grid(cfg, 64), cfg["steps"] or 512)
    w = edge_weight(res.spectrum.modes, cell_size=2)
    table = Table("spectrum", SPECTRUM_HEADER)
    for i, k in enumerate(res.kx):
        for a in range(res.spectrum.energies.shape[-1]):
            table.rows.append((_fl(k), a, _fl(res.spectrum.energies[i, a]), _fl(w[i, a])))
    summary = {
        "zero_gap": {"pairs": res.zero.pairs, "lower_edge": res.zero.lower_edge, "upper_edge": res.zero.upper_edge},
        "pi_gap": {"pairs": res.pi.pairs, "lower_edge": res.pi.lower_edge, "upper_edge": res.pi.upper_edge},
    }
    return Dataset(cfg["experiment"], cfg, [table], summary, [("scatter", "spectrum")])


def piflux_band_overlap(cfg: dict) -> Dataset:
    spec = _pf_spec(cfg)
    n = _grid(cfg, 128)
    bands = an.piflux_exact_bands(spec, n, _steps(cfg))
    KX, KY = np.meshgrid(bands.kx, bands.ky, indexing="ij")
    h0 = piflux_harmonic(spec, KX, KY, 0)
    e0 = np.abs(h0[..., 0, 1])
    table = Table("bands", ("kx", "ky", "e_driven", "e_static"))
    for i in range(KX.shape[0]):
        for j in range(KX.shape[1]):
            table.rows.append((_fl(KX[i, j]), _fl(KY[i, j]), _fl(bands.energies[i, j, 1]), _fl(e0[i, j])))
    ov = an.piflux_band_overlap(spec, n, _steps(cfg))
    summary = {
        "max_relative_deviation_outside_dirac": ov.max_relative_deviation,
        "dirac_gap": ov.dirac_gap,
        "two_abs_h1": ov.mass_gap,
    }
    return Dataset(cfg["experiment"], cfg, [table], summary, [("heatmap", "bands")])


RECIPES: dict[str, Callable[[dict], Dataset]] = {
    "rabi-quasienergy": rabi_quasienergy,
    "ssh-obc-sweep": ssh_obc_sweep,
    "ssh-resonance": ssh_resonance,
    "ssh-pbc-compare": ssh_pbc_compare,
    "ssh-zak": ssh_zak,
    "piflux-highfreq": piflux_highfreq,
    "piflux-phase-diagram": piflux_phase_diagram,
    "piflux-berry": piflux_berry,
    "piflux-chern-sweep": piflux_chern_sweep,
    "piflux-ribbon": piflux_ribbon,
    "piflux-band-overlap": piflux_band_overlap,
}


def run_experiment(cfg: dict) -> Dataset:
    return RECIPES[cfg["experiment"]](cfg)
