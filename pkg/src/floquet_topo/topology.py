"""Discrete Berry phases: Wilson-loop Zak phase, plaquette Berry flux,
Chern numbers and their rotating-frame / Floquet-frame split.

States are passed as arrays whose last axis is the Hilbert-space index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GaplessError, NonConvergenceError, ResolutionError
from .models import PiFluxSpec
from .numerics import bessel_j

MIN_LOOP = 64
MIN_GRID = 64
OVERLAP_TOL = 1e-6
CHERN_RESIDUAL = 1e-6
GAP_UNDEFINED = 1e-3
UNDEFINED = "undefined (gap closing)"


def wrap_phase(x):
    """Reduce to (-pi, pi]."""
    out = -(np.mod(-np.asarray(x, float) + np.pi, 2 * np.pi) - np.pi)
    # round-off just above -pi belongs to the +pi end of the interval
    out = np.where(out < -np.pi + 1e-9, np.pi, out)
    return out if out.ndim else float(out)


def _overlap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(np.conj(a) * b, axis=-1)


def _check_overlaps(ov: np.ndarray, what: str) -> None:
    small = float(np.min(np.abs(ov))) if ov.size else 1.0
    if small < OVERLAP_TOL:
        raise ResolutionError(f"{what}: neighbour overlap {small:.2e} < {OVERLAP_TOL}; refine the grid")


# ----------------------------------------------------------------- 1D loops

def link_phases(states: np.ndarray) -> np.ndarray:
    """Principal arguments of <u_i|u_{i+1}> around a closed loop.

    ``states[..., i, :]`` is the state at k_i; the loop closes from the last
    point back to the first, so the endpoint must not be repeated.
    """
    states = np.asarray(states, complex)
    if states.shape[-2] < MIN_LOOP:
        raise ResolutionError(f"Wilson loop needs >= {MIN_LOOP} k-points, got {states.shape[-2]}")
    ov = _overlap(states, np.roll(states, -1, axis=-2))
    _check_overlaps(ov, "Wilson loop")
    return np.angle(ov)


def wilson_loop_zak(states: np.ndarray) -> float | np.ndarray:
    """gamma = -Im sum_i log <u_i|u_{i+1}>, reduced to (-pi, pi]."""
    return wrap_phase(-np.sum(link_phases(states), axis=-1))


@dataclass(frozen=True)
class ZakSplit:
    """Per rotating-frame index (-, +) along the last axis.

    ``gamma`` is the phase of the composed Floquet states, ``gamma_tilde`` of
    the rotating-frame eigenvectors and ``gamma_bar = gamma - gamma_tilde``
    evaluated link by link (the Lambda part between Floquet states); all
    reduced to (-pi, pi].

    ``*_signed`` are unreduced link sums in the SU(2) loop gauge, where the
    plus column is re-phased so det[u_-, u_+] does not wind. This fixes the
    sign of a +-pi phase and makes the two bands' values opposite.
    """

    gamma: np.ndarray
    gamma_tilde: np.ndarray
    gamma_bar: np.ndarray
    gamma_signed: np.ndarray
    gamma_tilde_signed: np.ndarray
    gamma_bar_signed: np.ndarray


def su2_loop_phases(states: np.ndarray) -> np.ndarray:
    """Unreduced Berry phases of the two columns of ``states`` (N, dim, 2)
    in the SU(2) loop gauge. Returns (minus, plus)."""
    cols = np.moveaxis(np.asarray(states, complex), -1, 0)
    raw = -np.sum(link_phases(cols), axis=-1)
    det = np.linalg.det(states)
    det_winding = np.sum(np.angle(np.roll(det, -1) / det)) / (2 * np.pi)
    # removing the det winding from the plus column shifts its phase by 2 pi n
    raw = raw.copy()
    raw[1] += 2 * np.pi * round(det_winding)
    return raw


def split_zak(floquet_states: np.ndarray, rotating_states: np.ndarray) -> ZakSplit:
    """Frame split of the Zak phase of the analytic Floquet states.

    Both inputs have shape (N, 2, 2) with columns (minus, plus) as returned by
    ``RWASolution.floquet_states`` and ``RWASolution.phi``.
    """
    full = np.moveaxis(np.asarray(floquet_states, complex), -1, 0)  # (band, N, dim)
    rot = np.moveaxis(np.asarray(rotating_states, complex), -1, 0)
    a_full = link_phases(full)
    a_rot = link_phases(rot)
    a_bar = wrap_phase(a_full - a_rot)
    g = wrap_phase(-a_full.sum(axis=-1))
    gt = wrap_phase(-a_rot.sum(axis=-1))
    gb = wrap_phase(-a_bar.sum(axis=-1))
    g_signed = su2_loop_phases(floquet_states)
    gt_signed = su2_loop_phases(rotating_states)
    # gamma_bar keeps the link-wise relation gamma = gamma_tilde + gamma_bar
    gb_signed = g_signed - gt_signed
    return ZakSplit(g, gt, gb, g_signed, gt_signed, gb_signed)


# ------------------------------------------------------------- 2D flux maps

@dataclass(frozen=True)
class BerryFluxMap:
    """Plaquette fluxes in (-pi, pi]; ``flux[i, j]`` belongs to the cell with
    lower-left corner (kx[i], ky[j])."""

    kx: np.ndarray
    ky: np.ndarray
    flux: np.ndarray
    band: object = None

    @property
    def total(self) -> float:
        return math.fsum(self.flux.ravel().tolist())

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        dx = self.kx[1] - self.kx[0]
        dy = self.ky[1] - self.ky[0]
        cx, cy = self.kx + 0.5 * dx, self.ky[: self.flux.shape[1]] + 0.5 * dy
        return np.meshgrid(cx, cy, indexing="ij")


def berry_flux_map(
    states: np.ndarray,
    kx: np.ndarray,
    ky: np.ndarray,
    periodic: tuple[bool, bool] = (True, True),
    band=None,
) -> BerryFluxMap:
    """theta = -Im log(<u(k)|u(k+dx)><u(k+dx)|u(k+dx+dy)><u(k+dx+dy)|u(k+dy)><u(k+dy)|u(k)>).

    ``states`` has shape (Nx, Ny, dim). A periodic axis closes onto its first
    row; a non-periodic axis yields one plaquette fewer (the caller makes
    sure the boundary links cancel, as on the reduced pi-flux zone, which
    covers the torus twice over along that axis).
    """
    u = np.asarray(states, complex)
    nx, ny = u.shape[:2]
    # an open axis closed by a half-zone identification counts twice
    ex = nx if periodic[0] else 2 * (nx - 1)
    ey = ny if periodic[1] else 2 * (ny - 1)
    if ex < MIN_GRID or ey < MIN_GRID:
        raise ResolutionError(f"flux grid must be at least {MIN_GRID}x{MIN_GRID} on the torus, got {ex}x{ey}")

    def shift(a, axis):
        return np.roll(a, -1, axis=axis)

    ux = shift(u, 0) if periodic[0] else u[1:]
    base = u if periodic[0] else u[:-1]
    uxy = shift(ux, 1)
    uy = shift(base, 1)
    if not periodic[1]:
        base, ux, uxy, uy = base[:, :-1], ux[:, :-1], uxy[:, :-1], uy[:, :-1]
    l1 = _overlap(base, ux)
    l2 = _overlap(ux, uxy)
    l3 = _overlap(uxy, uy)
    l4 = _overlap(uy, base)
    for link in (l1, l2, l3, l4):
        _check_overlaps(link, "Berry flux")
    flux = wrap_phase(-np.angle(l1 * l2 * l3 * l4))
    return BerryFluxMap(np.asarray(kx, float), np.asarray(ky, float), flux, band)


def chern_number(fmap: BerryFluxMap, tol: float = CHERN_RESIDUAL) -> int:
    c = fmap.total / (2 * math.pi)
    n = round(c)
    if abs(c - n) > tol:
        raise NonConvergenceError(f"Berry flux total/2pi = {c:.8f}, residual {abs(c - n):.2e}")
    return int(n)


@dataclass(frozen=True)
class ChernSplit:
    """Per rotating-frame index: composed, rotating-frame and Lambda parts."""

    c: int
    c_tilde: int
    c_bar: int
    maps: tuple


def split_chern(
    floquet_states: np.ndarray,
    rotating_states: np.ndarray,
    kx: np.ndarray,
    ky: np.ndarray,
    periodic: tuple[bool, bool] = (True, False),
) -> dict[int, ChernSplit]:
    """Split of each analytic Floquet band's Chern number, keyed by rotating
    index (-1, +1). Plaquette-wise theta_bar = theta(Phi) - theta(phi) so
    c = c_tilde + c_bar holds exactly."""
    out = {}
    for idx, col in ((-1, 0), (1, 1)):
        full = berry_flux_map(floquet_states[..., col], kx, ky, periodic, band=idx)
        rot = berry_flux_map(rotating_states[..., col], kx, ky, periodic, band=idx)
        bar = BerryFluxMap(full.kx, full.ky, wrap_phase(full.flux - rot.flux), idx)
        out[idx] = ChernSplit(chern_number(full), chern_number(rot), chern_number(bar), (full, rot, bar))
    return out


# ------------------------------------------------- analytic high frequency

def analytic_chern_highfreq(spec: PiFluxSpec, tol: float = 1e-12) -> tuple[int, int]:
    """c_+- = -+ sgn(Jx0 Jy0) sgn(Jx1 Jy1 sin phi)."""
    jx0, jy0 = spec.hopping("x", 0), spec.hopping("y", 0)
    jx1, jy1 = spec.hopping("x", 1), spec.hopping("y", 1)
    s = math.sin(spec.phi)
    if min(abs(jx0), abs(jy0), abs(jx1), abs(jy1)) < tol or abs(s) < tol:
        raise GaplessError("Bessel factor or sin(phi) vanishes: gapless point, invariant undefined")
    sign = np.sign(jx0 * jy0) * np.sign(jx1 * jy1 * s)
    return int(-sign), int(sign)


def analytic_phase_diagram(ax_values, ay_values, J: float = 1.0, omega: float = 6.0, phi: float = math.pi / 2):
    """c_+ over an (A_x, A_y) grid; 0 marks gapless points."""
    ax_values = np.asarray(ax_values, float)
    ay_values = np.asarray(ay_values, float)
    out = np.zeros((ax_values.size, ay_values.size), dtype=int)
    s = np.sign(math.sin(phi)) if abs(math.sin(phi)) > 1e-12 else 0.0
    j0x = np.array([bessel_j(0, a) for a in ax_values])
    j1x = np.array([bessel_j(1, a) for a in ax_values])
    j0y = np.array([bessel_j(0, a) for a in ay_values])
    j1y = np.array([bessel_j(1, a) for a in ay_values])
    sign = np.outer(np.sign(j0x) * np.sign(j1x), np.sign(j0y) * np.sign(j1y)) * s
    out[:] = (-sign).astype(int)
    return out
