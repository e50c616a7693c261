import math

import numpy as np
import pytest

from floquet_topo.analysis import (
    band_chern,
    piflux_analytic_split,
    piflux_chern_row,
    piflux_exact_bands,
    ssh_k_grid,
    ssh_zak_split,
)
from floquet_topo.errors import GaplessError, NonConvergenceError, ResolutionError
from floquet_topo.models import PiFluxSpec, SSHSpec, ssh_static
from floquet_topo.numerics import eig_hermitian
from floquet_topo.rwa import critical_frequencies
from floquet_topo.topology import (
    UNDEFINED,
    BerryFluxMap,
    analytic_chern_highfreq,
    analytic_phase_diagram,
    berry_flux_map,
    chern_number,
    wilson_loop_zak,
    wrap_phase,
)

HALF_PI = math.pi / 2


def _qwz(m, n=64):
    k = -math.pi + 2 * math.pi * np.arange(n) / n
    kx, ky = np.meshgrid(k, k, indexing="ij")
    d = np.stack([np.sin(kx), np.sin(ky), m + np.cos(kx) + np.cos(ky)], axis=-1)
    h = np.zeros(kx.shape + (2, 2), complex)
    h[..., 0, 0] = d[..., 2]
    h[..., 1, 1] = -d[..., 2]
    h[..., 0, 1] = d[..., 0] - 1j * d[..., 1]
    h[..., 1, 0] = d[..., 0] + 1j * d[..., 1]
    return k, d, eig_hermitian(h).vectors[..., 0]


def _skyrmion_oracle(m, n=400):
    # C_lower = (1/4pi) int dhat . (d_x dhat x d_y dhat), trapezoid on a fine periodic grid
    k = -math.pi + 2 * math.pi * np.arange(n) / n
    kx, ky = np.meshgrid(k, k, indexing="ij")
    d = np.stack([np.sin(kx), np.sin(ky), m + np.cos(kx) + np.cos(ky)], axis=-1)
    dx = np.stack([np.cos(kx), 0 * kx, -np.sin(kx)], axis=-1)
    dy = np.stack([0 * ky, np.cos(ky), -np.sin(ky)], axis=-1)
    norm = np.linalg.norm(d, axis=-1)
    dens = np.einsum("...i,...i", d, np.cross(dx, dy)) / norm**3
    return float(dens.sum() * (2 * math.pi / n) ** 2 / (4 * math.pi))


# ---------------------------------------------------------------- Chern core


@pytest.mark.parametrize("m", [-1.0, 1.0, 3.0, -2.6])
def test_qwz_chern_matches_curvature_oracle(m):
    k, _, u = _qwz(m)
    c = chern_number(berry_flux_map(u, k, k))
    oracle = _skyrmion_oracle(m)
    assert abs(oracle - round(oracle)) < 1e-3
    assert c == round(oracle)
    assert abs(c) == (1 if abs(m) < 2 else 0)


def test_constant_state_has_zero_flux():
    u = np.zeros((64, 64, 2), complex)
    u[..., 0] = 1.0
    k = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    fmap = berry_flux_map(u, k, k)
    assert np.abs(fmap.flux).max() == 0.0
    assert chern_number(fmap) == 0


def test_flux_is_gauge_invariant():
    k, _, u = _qwz(1.0)
    rng = np.random.default_rng(0)
    twisted = u * np.exp(1j * rng.uniform(-math.pi, math.pi, u.shape[:2]))[..., None]
    a = berry_flux_map(u, k, k).flux
    b = berry_flux_map(twisted, k, k).flux
    assert np.abs(wrap_phase(a - b)).max() < 1e-10


def test_flux_grid_too_coarse_and_non_integer_total():
    k, _, u = _qwz(1.0, 32)
    with pytest.raises(ResolutionError):
        berry_flux_map(u, k, k)
    fake = BerryFluxMap(k, k, np.full((32, 32), 0.3 * 2 * math.pi / 1024))
    with pytest.raises(NonConvergenceError):
        chern_number(fake)


def test_orthogonal_neighbours_are_a_resolution_error():
    u = np.zeros((64, 64, 2), complex)
    u[..., 0] = 1.0
    u[10, 10] = [0.0, 1.0]
    k = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    with pytest.raises(ResolutionError):
        berry_flux_map(u, k, k)


# ------------------------------------------------------------------ Zak phase


def test_wrap_phase_interval():
    x = np.linspace(-20, 20, 2001)
    w = wrap_phase(x)
    assert np.all((w > -math.pi) & (w <= math.pi))
    assert wrap_phase(-math.pi) == math.pi
    assert np.allclose(np.exp(1j * w), np.exp(1j * x))


@pytest.mark.parametrize("jp,expect", [(2.0, math.pi), (0.5, 0.0)])
def test_static_ssh_zak_quantized(jp, expect):
    spec = SSHSpec(1.0, jp, 0.0, 5.0)
    lower = eig_hermitian(ssh_static(spec, ssh_k_grid(512))).vectors[..., 0]
    z = wilson_loop_zak(lower)
    assert abs(wrap_phase(z - expect)) < 1e-3


def test_wilson_loop_needs_enough_points():
    spec = SSHSpec(1.0, 2.0, 0.0, 5.0)
    with pytest.raises(ResolutionError):
        wilson_loop_zak(eig_hermitian(ssh_static(spec, ssh_k_grid(32))).vectors[..., 0])


def test_rotating_frame_zak_vanishes_far_from_resonance():
    # at w = 10 no k is resonant (2(J + J') = 5), so phi stays close to the
    # static frame and the whole phase sits in the Lambda part
    z = ssh_zak_split(SSHSpec(0.5, 2.0, 0.2, 10.0), 512)
    assert np.abs(z.gamma_tilde).max() < 1e-3
    assert np.abs(wrap_phase(z.gamma - z.gamma_bar)).max() < 1e-3
    assert np.allclose(np.abs(z.gamma_bar), math.pi, atol=1e-3)


def test_zak_split_independent_of_time_origin():
    spec = SSHSpec(0.5, 2.0, 0.2, 4.0)
    a = ssh_zak_split(spec, 512, 0.0)
    b = ssh_zak_split(spec, 512, 0.37 * 2 * math.pi / spec.omega)
    assert np.abs(wrap_phase(a.gamma - b.gamma)).max() < 1e-9
    assert np.abs(wrap_phase(a.gamma_tilde - b.gamma_tilde)).max() < 1e-9


def test_gamma_bar_depends_only_on_hopping_ratio():
    a = ssh_zak_split(SSHSpec(0.5, 2.0, 0.2, 4.0), 512)
    b = ssh_zak_split(SSHSpec(1.0, 4.0, 0.3, 9.0), 512)
    c = ssh_zak_split(SSHSpec(2.0, 0.5, 0.2, 4.0), 512)
    assert np.abs(wrap_phase(a.gamma_bar - b.gamma_bar)).max() < 1e-9
    assert np.abs(c.gamma_bar).max() < 1e-9


def test_signed_zak_phases_are_opposite_and_consistent():
    z = ssh_zak_split(SSHSpec(0.5, 2.0, 0.2, 4.0), 512)
    assert z.gamma_signed[0] == pytest.approx(-z.gamma_signed[1], abs=1e-9)
    assert np.allclose(z.gamma_signed, z.gamma_tilde_signed + z.gamma_bar_signed)
    assert np.abs(wrap_phase(z.gamma_signed - z.gamma)).max() < 1e-9


# ------------------------------------------------------------ pi-flux Chern


def test_analytic_highfreq_signs():
    spec = PiFluxSpec(1.0, 0.5, 0.5, 6.0, HALF_PI)
    cp, cm = analytic_chern_highfreq(spec)
    assert (cp, cm) == (-1, 1)
    assert analytic_chern_highfreq(PiFluxSpec(1.0, 0.5, 0.5, 6.0, -HALF_PI)) == (1, -1)
    # past the first Bessel zero J0 changes sign along x
    assert analytic_chern_highfreq(PiFluxSpec(1.0, 3.0, 0.5, 6.0, HALF_PI)) == (1, -1)
    for bad in (PiFluxSpec(1.0, 0.0, 0.5, 6.0), PiFluxSpec(1.0, 0.5, 0.5, 6.0, 0.0)):
        with pytest.raises(GaplessError):
            analytic_chern_highfreq(bad)


def test_phase_diagram_agrees_with_pointwise_formula():
    amps = [0.5, 1.5, 3.0, 4.5]
    grid = analytic_phase_diagram(amps, amps)
    for i, ax in enumerate(amps):
        for j, ay in enumerate(amps):
            assert grid[i, j] == analytic_chern_highfreq(PiFluxSpec(1.0, ax, ay, 6.0))[0]
    assert analytic_phase_diagram([0.5], [0.5], phi=0.0)[0, 0] == 0


@pytest.fixture(scope="module")
def bands_w6():
    return {n: piflux_exact_bands(PiFluxSpec(1.0, 0.5, 0.5, 6.0, HALF_PI), n, 1024) for n in (64, 128)}


def test_exact_band_cherns_sum_to_zero(bands_w6):
    b = bands_w6[64]
    assert band_chern(b, 1)[0] + band_chern(b, -1)[0] == 0
    assert (band_chern(b, 1)[0], band_chern(b, -1)[0]) == analytic_chern_highfreq(PiFluxSpec(1.0, 0.5, 0.5, 6.0))


def test_chern_stable_under_grid_refinement(bands_w6):
    exact = {band_chern(b, 1)[0] for b in bands_w6.values()}
    assert len(exact) == 1
    spec = PiFluxSpec(1.0, 0.5, 0.5, 6.0, HALF_PI)
    split = [piflux_analytic_split(spec, n) for n in (64, 128, 200)]
    for idx in (-1, 1):
        assert len({(s[idx].c, s[idx].c_tilde, s[idx].c_bar) for s in split}) == 1


def test_split_is_additive():
    split = piflux_analytic_split(PiFluxSpec(1.0, 0.5, 0.5, 3.5, HALF_PI), 100)
    for idx in (-1, 1):
        s = split[idx]
        assert s.c == s.c_tilde + s.c_bar
        full, rot, bar = s.maps
        assert np.abs(wrap_phase(full.flux - rot.flux - bar.flux)).max() < 1e-12


@pytest.mark.parametrize("omega", [4.5, 6.0, 7.0, 8.0])
def test_exact_and_analytic_chern_agree(omega):
    wc = critical_frequencies(PiFluxSpec(1.0, 0.5, 0.5, 6.0)).values()
    assert min(abs(omega - w) for w in wc) > 0.1
    row = piflux_chern_row(PiFluxSpec(1.0, 0.5, 0.5, omega, HALF_PI), 100, 1024)
    assert row.c[1] != UNDEFINED
    assert row.c == row.c_analytic


def test_gap_closing_reports_undefined():
    # the exact pi-gap closes just below the analytic critical frequency
    row = piflux_chern_row(PiFluxSpec(1.0, 0.5, 0.5, 5.3069040, HALF_PI), 64, 1024)
    assert row.gaps[1] < 1e-3
    assert row.c[1] == UNDEFINED and row.c[-1] == UNDEFINED
