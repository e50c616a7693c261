"""Model-level workflows built from the kernels: exact band structures,
invariants, gap scans and edge counts for the three models."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edge import (
    BranchCount,
    EdgeCount,
    bulk_gap_widths,
    count_chiral_branches,
    count_gap_edge_states,
    ribbon_kx_grid,
)
from .floquet import (
    DEFAULT_STEPS,
    RIBBON_STEPS,
    QuasienergySpectrum,
    fold,
    gap_widths,
    one_period_propagator,
    pi_gap_width,
    quasienergies,
    ribbon_propagator,
)
from .models import (
    PiFluxSpec,
    RabiSpec,
    SSHSpec,
    piflux_hamiltonian,
    piflux_harmonic,
    rabi_hamiltonian,
    ssh_bloch,
    ssh_open_chain,
)
from .rwa import piflux_rwa, rabi_analytic_quasienergies, ssh_rwa
from .topology import (
    GAP_UNDEFINED,
    UNDEFINED,
    BerryFluxMap,
    ZakSplit,
    berry_flux_map,
    chern_number,
    split_chern,
    split_zak,
)

BANDS = (-1, 1)


# ---------------------------------------------------------------------- Rabi

def rabi_exact_quasienergies(spec: RabiSpec, steps: int = DEFAULT_STEPS) -> np.ndarray:
    return quasienergies(one_period_propagator(rabi_hamiltonian(spec), steps)).energies


def circle_set_distance(a, b, omega: float) -> float:
    """Largest circle distance between two level pairs after optimal matching."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    straight = np.max(np.abs(fold(a - b, omega)))
    swapped = np.max(np.abs(fold(a - b[::-1], omega)))
    return float(min(straight, swapped))


def rabi_pi_gap(spec: RabiSpec, steps: int = DEFAULT_STEPS) -> float:
    return pi_gap_width(rabi_exact_quasienergies(spec, steps), spec.omega)


@dataclass
class RabiRow:
    omega: float
    exact: np.ndarray
    analytic: np.ndarray

    @property
    def deviation(self) -> float:
        return circle_set_distance(self.exact, self.analytic, self.omega)


def rabi_sweep(delta: float, V: float, omegas, steps: int = DEFAULT_STEPS, threads: int = 1) -> list[RabiRow]:
    from .parallel import pmap

    def one(w):
        spec = RabiSpec(delta, V, float(w))
        return RabiRow(float(w), rabi_exact_quasienergies(spec, steps), rabi_analytic_quasienergies(spec))

    return pmap(one, omegas, threads)


# ----------------------------------------------------------------------- SSH

def ssh_k_grid(n: int = 512) -> np.ndarray:
    """n points on [-pi, pi), including k = 0 and k = -pi for even n."""
    return -math.pi + 2 * math.pi * np.arange(n) / n


def ssh_bulk_quasienergies(spec: SSHSpec, nk: int = 256, steps: int = DEFAULT_STEPS) -> np.ndarray:
    return quasienergies(one_period_propagator(ssh_bloch(spec, ssh_k_grid(nk)), steps)).energies


def ssh_gap_widths(spec: SSHSpec, nk: int = 256, steps: int = DEFAULT_STEPS) -> tuple[float, float]:
    """Minimum (0-gap, pi-gap) widths of the periodic chain over the k-grid."""
    return bulk_gap_widths(ssh_bulk_quasienergies(spec, nk, steps), spec.omega)


def ssh_obc_spectrum(spec: SSHSpec, steps: int = DEFAULT_STEPS) -> QuasienergySpectrum:
    return quasienergies(one_period_propagator(ssh_open_chain(spec), steps))


@dataclass
class SSHEdgeResult:
    zero: EdgeCount
    pi: EdgeCount
    gaps: tuple[float, float]
    spectrum: QuasienergySpectrum


def ssh_edge_counts(spec: SSHSpec, steps: int = 2048, nk: int = 256) -> SSHEdgeResult:
    spectrum = ssh_obc_spectrum(spec, steps)
    g0, gpi = ssh_gap_widths(spec, nk, steps)
    return SSHEdgeResult(
        count_gap_edge_states(spectrum, "0-gap", g0),
        count_gap_edge_states(spectrum, "pi-gap", gpi),
        (g0, gpi),
        spectrum,
    )


def ssh_pi_gap_closures(
    J: float, V: float, omega: float, jp_values, nk: int = 256, steps: int = 2048, tol: float = 1e-3, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """pi-gap minimum over k for each J'; returns (gaps, J' at local minima below tol)."""
    from .parallel import pmap

    jp_values = np.asarray(jp_values, float)
    gaps = np.array(pmap(lambda jp: ssh_gap_widths(SSHSpec(J, float(jp), V, omega), nk, steps)[1], jp_values, threads))
    found = []
    for i, g in enumerate(gaps):
        left = gaps[i - 1] if i else np.inf
        right = gaps[i + 1] if i + 1 < len(gaps) else np.inf
        if g < tol and g <= left and g <= right:
            found.append(jp_values[i])
    return gaps, np.array(found)


def ssh_zak_split(spec: SSHSpec, nk: int = 512, t: float = 0.0) -> ZakSplit:
    sol = ssh_rwa(spec, ssh_k_grid(nk))
    return split_zak(sol.floquet_states(t), sol.phi)


# ------------------------------------------------------------------- pi-flux

def piflux_zone_grid(n: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """kx: n periodic points on [-pi, pi); ky: n/2 + 1 points on [-pi/2, pi/2].

    (kx, ky) and (kx + pi, ky + pi) are the same crystal momentum, so this
    half torus is the whole zone; the top and bottom rows are related by that
    shift and their links cancel in the flux sum (n must be even).
    """
    if n % 2:
        raise ValueError("pi-flux zone grid needs an even n")
    kx = -math.pi + 2 * math.pi * np.arange(n) / n
    ky = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n // 2 + 1)
    return kx, ky


@dataclass
class ExactBands:
    kx: np.ndarray
    ky: np.ndarray
    energies: np.ndarray  # (nx, ny, 2), ascending
    modes: np.ndarray  # (nx, ny, 2, 2), columns paired with energies
    omega: float

    def gaps(self) -> tuple[float, float]:
        """Minimum (0-gap, pi-gap) over the grid."""
        upper = np.abs(self.energies).max(axis=-1)
        return float(2 * upper.min()), float(self.omega - 2 * upper.max())

    def band_states(self, band: int) -> np.ndarray:
        return self.modes[..., :, 1 if band > 0 else 0]


def piflux_exact_bands(spec: PiFluxSpec, n: int = 200, steps: int = DEFAULT_STEPS) -> ExactBands:
    kx, ky = piflux_zone_grid(n)
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    spec_ = quasienergies(one_period_propagator(piflux_hamiltonian(spec, KX, KY), steps))
    return ExactBands(kx, ky, spec_.energies, spec_.modes, spec.omega)


def band_chern(bands: ExactBands, band: int, gap_tol: float = GAP_UNDEFINED):
    """Chern number of an exact Floquet band, or UNDEFINED when a gap closes."""
    if min(bands.gaps()) < gap_tol:
        return UNDEFINED, None
    fmap = berry_flux_map(bands.band_states(band), bands.kx, bands.ky, (True, False), band=band)
    return chern_number(fmap), fmap


@dataclass
class ChernRow:
    omega: float
    c: dict  # quasienergy band -> exact Chern number (or UNDEFINED)
    c_tilde: dict  # quasienergy band alpha -> c_tilde of rotating index -alpha
    c_bar: dict
    c_analytic: dict  # composed analytic states, same labelling
    gaps: tuple[float, float]


def piflux_analytic_split(spec: PiFluxSpec, n: int = 200, t: float = 0.0, static: str = "stroboscopic"):
    """Split Chern numbers of the analytic Floquet states, keyed by rotating index."""
    kx, ky = piflux_zone_grid(n)
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    sol = piflux_rwa(spec, KX, KY, static=static, check=False)
    return split_chern(sol.floquet_states(t), sol.phi, kx, ky, (True, False))


def piflux_chern_row(spec: PiFluxSpec, n: int = 200, steps: int = DEFAULT_STEPS) -> ChernRow:
    bands = piflux_exact_bands(spec, n, steps)
    c = {b: band_chern(bands, b)[0] for b in BANDS}
    try:
        split = piflux_analytic_split(spec, n)
        # quasienergy band alpha is carried by rotating index -alpha
        ct = {a: split[-a].c_tilde for a in BANDS}
        cb = {a: split[-a].c_bar for a in BANDS}
        ca = {a: split[-a].c for a in BANDS}
    except ArithmeticError:
        ct = cb = ca = {a: UNDEFINED for a in BANDS}
    return ChernRow(spec.omega, c, ct, cb, ca, bands.gaps())


def piflux_exact_pi_gap_at(spec: PiFluxSpec, kx: float, ky: float, steps: int = DEFAULT_STEPS) -> float:
    h = piflux_hamiltonian(spec, np.array([kx]), np.array([ky]))
    return pi_gap_width(quasienergies(one_period_propagator(h, steps)).energies[0], spec.omega)


def flux_concentration(fmap: BerryFluxMap, centers, radius: float) -> float:
    """Fraction of total |flux| within ``radius`` of any of ``centers``
    (distances taken modulo the reciprocal lattice of the zone)."""
    cx, cy = fmap.centers()
    weight = np.abs(fmap.flux)
    near = np.zeros(weight.shape, bool)
    for px, py in centers:
        for sx, sy in ((0, 0), (math.pi, math.pi), (-math.pi, math.pi), (math.pi, -math.pi), (-math.pi, -math.pi)):
            dx = np.angle(np.exp(1j * (cx - px - sx)))
            dy = np.angle(np.exp(1j * (cy - py - sy)))
            near |= np.hypot(dx, dy) < radius
    total = weight.sum()
    return float(weight[near].sum() / total) if total > 0 else 0.0


@dataclass
class RibbonResult:
    kx: np.ndarray
    spectrum: QuasienergySpectrum
    zero: BranchCount
    pi: BranchCount


def piflux_ribbon_counts(spec: PiFluxSpec, nk: int = 64, steps: int = RIBBON_STEPS) -> RibbonResult:
    kx = ribbon_kx_grid(nk)
    spectrum = quasienergies(ribbon_propagator(spec, kx, steps))
    return RibbonResult(
        kx,
        spectrum,
        count_chiral_branches(spectrum.energies, spectrum.modes, spec.omega, "0-gap"),
        count_chiral_branches(spectrum.energies, spectrum.modes, spec.omega, "pi-gap"),
    )


@dataclass
class BandOverlap:
    max_relative_deviation: float
    dirac_gap: float
    mass_gap: float


def piflux_band_overlap(spec: PiFluxSpec, n: int = 128, steps: int = DEFAULT_STEPS, radius: float = math.pi / 3) -> BandOverlap:
    """Driven exact bands vs the renormalised static bands E^(0) of H^(0).

    Deviation is |eps_+ - E^(0)_+| / bandwidth outside disks of ``radius``
    around the Dirac points (+-pi/2, 0); the gap is read at the Dirac points.
    """
    from .models import piflux_mass_term

    bands = piflux_exact_bands(spec, n, steps)
    KX, KY = np.meshgrid(bands.kx, bands.ky, indexing="ij")
    h0 = piflux_harmonic(spec, KX, KY, 0)
    e0 = np.sqrt(np.abs(h0[..., 0, 1]) ** 2 + np.abs(h0[..., 0, 0]) ** 2)
    bandwidth = 2 * float(e0.max())
    eps = bands.energies[..., 1]
    dist = np.full(KX.shape, np.inf)
    for px in (-0.5 * math.pi, 0.5 * math.pi):
        dx = np.angle(np.exp(1j * (KX - px)))
        dist = np.minimum(dist, np.hypot(dx, KY))
    outside = dist >= radius
    dev = float(np.max(np.abs(eps - e0)[outside]) / bandwidth)
    gaps = []
    for px in (-0.5 * math.pi, 0.5 * math.pi):
        h = piflux_hamiltonian(spec, np.array([px]), np.array([0.0]))
        e = quasienergies(one_period_propagator(h, steps)).energies[0]
        gaps.append(float(gap_widths(e, spec.omega)[0]))
    mass = float(abs(piflux_mass_term(spec, 0.5 * math.pi, 0.0)))
    return BandOverlap(dev, min(gaps), 2 * mass)
