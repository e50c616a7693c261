"""Model Hamiltonians: driven two-level (Rabi) system, driven SSH chain and
Peierls-driven pi-flux lattice.

Sublattice order inside a unit cell is always (a, b). Momentum arguments
broadcast, so one call can evaluate a whole k-grid; ``evaluate(t)`` then
returns an array of shape ``k.shape + (dim, dim)``.

pi-flux conventions: H_k = 2J[cos kx sx + sin ky sy] and the drive enters as
k -> k + A(t) with A(t) = (Ax sin wt, Ay sin(wt + phi)). H_{k+(pi,pi)} is
unitarily equivalent to H_k, so the primitive zone is kx in [-pi, pi),
ky in [-pi/2, pi/2) (see ``PIFLUX_ZONE``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, RegimeWarning
from .numerics import PAULI_X, PAULI_Y, PAULI_Z, bessel_j

PIFLUX_ZONE = ((-math.pi, math.pi), (-math.pi / 2, math.pi / 2))

# mass-term ratio h2/h1 above which the first-harmonic picture is flagged
J2_CONTRIBUTION_LIMIT = 0.05


@dataclass(frozen=True)
class RabiSpec:
    delta: float
    V: float
    omega: float
    phi: float = 0.0

    def __post_init__(self):
        if not (self.delta > 0 and self.omega > 0 and self.V >= 0):
            raise ContractError("RabiSpec needs delta > 0, omega > 0, V >= 0")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    def renormalized(self, n: int) -> float:
        """Delta_n = Delta J_n(2V/omega)."""
        return self.delta * bessel_j(n, 2 * self.V / self.omega)


@dataclass(frozen=True)
class SSHSpec:
    J: float
    Jp: float
    V: float
    omega: float
    n_cells: int = 20

    def __post_init__(self):
        if not (self.J > 0 and self.Jp >= 0 and self.V >= 0 and self.omega > 0):
            raise ContractError("SSHSpec needs J > 0, J' >= 0, V >= 0, omega > 0")
        if self.n_cells < 2:
            raise ContractError("SSHSpec needs n_cells >= 2")
        if self.V >= self.omega:
            warnings.warn(
                f"SSH drive V={self.V} >= omega={self.omega}: weak-drive analysis not trusted",
                RegimeWarning,
                stacklevel=3,
            )

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega


@dataclass(frozen=True)
class PiFluxSpec:
    J: float
    Ax: float
    Ay: float
    omega: float
    phi: float = math.pi / 2
    n_y: int = 40

    def __post_init__(self):
        if not (self.J > 0 and self.Ax >= 0 and self.Ay >= 0 and self.omega > 0):
            raise ContractError("PiFluxSpec needs J > 0, A >= 0, omega > 0")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    def hopping(self, axis: str, n: int) -> float:
        """Renormalised hopping J_{u,n} = J J_n(A_u)."""
        amp = self.Ax if axis == "x" else self.Ay
        return self.J * bessel_j(n, amp)

    def j2_contribution(self) -> float:
        """|h_2 / h_1| prefactor ratio; large values invalidate the n <= 1 truncation."""
        num = abs(self.hopping("x", 2) * self.hopping("y", 2)) / 2
        den = abs(self.hopping("x", 1) * self.hopping("y", 1))
        return math.inf if den == 0 else num / den


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    evaluate: Callable[[float], np.ndarray]
    period: float
    dim: int

    def __call__(self, t: float) -> np.ndarray:
        return self.evaluate(t)


@dataclass(frozen=True)
class BlochOperator:
    """Static k-resolved 2x2 operator; call with broadcastable momenta."""

    func: Callable[..., np.ndarray]

    def __call__(self, *k) -> np.ndarray:
        return self.func(*k)


def _pauli_combo(cx, cy=0.0, cz=0.0, c0=0.0) -> np.ndarray:
    cx, cy, cz, c0 = np.broadcast_arrays(*(np.asarray(c, dtype=complex) for c in (cx, cy, cz, c0)))
    out = np.empty(cx.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c0 + cz
    out[..., 1, 1] = c0 - cz
    out[..., 0, 1] = cx - 1j * cy
    out[..., 1, 0] = cx + 1j * cy
    return out


# ---------------------------------------------------------------------- Rabi

def rabi_hamiltonian(spec: RabiSpec) -> TimeDependentHamiltonian:
    half = 0.5 * spec.delta * PAULI_Z

    def evaluate(t):
        return half + spec.V * math.cos(spec.omega * t + spec.phi) * PAULI_X

    return TimeDependentHamiltonian(evaluate, spec.period, 2)


def rabi_truncated_interaction(spec: RabiSpec) -> TimeDependentHamiltonian:
    """(Delta_0/2) sz + Delta_1 sin(wt + phi) sy, valid while Delta_1 dominates."""
    d0, d1 = spec.renormalized(0), spec.renormalized(1)
    higher = max(abs(spec.renormalized(n)) for n in range(2, 8))
    if abs(d1) <= higher:
        warnings.warn(
            f"|Delta_1|={abs(d1):.3g} does not dominate higher harmonics ({higher:.3g})",
            RegimeWarning,
            stacklevel=2,
        )
    static = 0.5 * d0 * PAULI_Z

    def evaluate(t):
        return static + d1 * math.sin(spec.omega * t + spec.phi) * PAULI_Y

    return TimeDependentHamiltonian(evaluate, spec.period, 2)


# ----------------------------------------------------------------------- SSH

def ssh_static(spec: SSHSpec, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return _pauli_combo(spec.J + spec.Jp * np.cos(k), spec.Jp * np.sin(k))


def ssh_drive_shape(k) -> np.ndarray:
    """M(k) with V(k, t) = v(t) M(k): (1 - cos k) sx - sin k sy."""
    k = np.asarray(k, dtype=float)
    return _pauli_combo(1 - np.cos(k), -np.sin(k))


def ssh_harmonic(spec: SSHSpec, k, n: int) -> np.ndarray:
    """Fourier component multiplying exp(i n w t)."""
    if n == 0:
        return ssh_static(spec, k)
    if abs(n) == 1:
        return spec.V * ssh_drive_shape(k)
    return np.zeros(np.shape(k) + (2, 2), dtype=complex)


def ssh_bloch(spec: SSHSpec, k) -> TimeDependentHamiltonian:
    """H_k(t) = J1(t) sx + J2(t)(s+ e^{-ik} + s- e^{ik}), J1 = J + v, J2 = J' - v."""
    static = ssh_static(spec, k)
    shape = ssh_drive_shape(k)

    def evaluate(t):
        return static + 2 * spec.V * math.cos(spec.omega * t) * shape

    return TimeDependentHamiltonian(evaluate, spec.period, 2)


def ssh_energies(spec: SSHSpec, k) -> np.ndarray:
    """Upper static band E_+(k)."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(spec.J**2 + spec.Jp**2 + 2 * spec.J * spec.Jp * np.cos(k))


def ssh_open_chain(spec: SSHSpec) -> TimeDependentHamiltonian:
    """2N x 2N chain a1 b1 a2 b2 ... with intra J1(t) and inter J2(t) hoppings."""
    n_sites = 2 * spec.n_cells
    intra = np.zeros((n_sites, n_sites))
    inter = np.zeros((n_sites, n_sites))
    for c in range(spec.n_cells):
        a, b = 2 * c, 2 * c + 1
        intra[a, b] = intra[b, a] = 1.0
        if c + 1 < spec.n_cells:
            inter[b, b + 1] = inter[b + 1, b] = 1.0

    def evaluate(t):
        v = 2 * spec.V * math.cos(spec.omega * t)
        return ((spec.J + v) * intra + (spec.Jp - v) * inter).astype(complex)

    return TimeDependentHamiltonian(evaluate, spec.period, n_sites)


# ------------------------------------------------------------------- pi-flux

def piflux_undriven(spec: PiFluxSpec, kx, ky) -> np.ndarray:
    kx, ky = np.asarray(kx, float), np.asarray(ky, float)
    return _pauli_combo(2 * spec.J * np.cos(kx), 2 * spec.J * np.sin(ky))


def piflux_hamiltonian(spec: PiFluxSpec, kx, ky) -> TimeDependentHamiltonian:
    """Exact Peierls-substituted Bloch Hamiltonian."""
    kx, ky = np.broadcast_arrays(np.asarray(kx, float), np.asarray(ky, float))
    two_j = 2 * spec.J

    def evaluate(t):
        wt = spec.omega * t
        return _pauli_combo(
            two_j * np.cos(kx + spec.Ax * math.sin(wt)),
            two_j * np.sin(ky + spec.Ay * math.sin(wt + spec.phi)),
        )

    return TimeDependentHamiltonian(evaluate, spec.period, 2)


def _fourier_coeffs(spec: PiFluxSpec, n: int, kx, ky):
    jx_n, jx_m = bessel_j(n, spec.Ax), bessel_j(-n, spec.Ax)
    jy_n, jy_m = bessel_j(n, spec.Ay), bessel_j(-n, spec.Ay)
    ex, ey = np.exp(1j * np.asarray(kx, float)), np.exp(1j * np.asarray(ky, float))
    cx = spec.J * (ex * jx_n + np.conj(ex) * jx_m)
    cy = -1j * spec.J * np.exp(1j * n * spec.phi) * (ey * jy_n - np.conj(ey) * jy_m)
    return cx, cy


def piflux_harmonic(spec: PiFluxSpec, kx, ky, n: int) -> np.ndarray:
    """H^(n)_k, the coefficient of exp(i n w t) (includes the overall J)."""
    if abs(n) > 16:
        raise ContractError("harmonic index limited to |n| <= 16")
    cx, cy = _fourier_coeffs(spec, n, kx, ky)
    return _pauli_combo(cx, cy)


def piflux_fourier_component(spec: PiFluxSpec, n: int) -> BlochOperator:
    return BlochOperator(lambda kx, ky: piflux_harmonic(spec, kx, ky, n))


def piflux_truncated(spec: PiFluxSpec, kx, ky, n_max: int = 1) -> TimeDependentHamiltonian:
    """Jacobi-Anger resummation sum_{|n|<=n_max} H^(n) e^{inwt}."""
    comps = {n: piflux_harmonic(spec, kx, ky, n) for n in range(-n_max, n_max + 1)}

    def evaluate(t):
        out = comps[0].copy()
        for n in range(1, n_max + 1):
            ph = np.exp(1j * n * spec.omega * t)
            out += comps[n] * ph + comps[-n] * np.conj(ph)
        return out

    return TimeDependentHamiltonian(evaluate, spec.period, 2)


def piflux_mass_term(spec: PiFluxSpec, kx, ky) -> np.ndarray:
    """First-order high-frequency mass h_1(k) (coefficient of sz).

    Obtained from [H^(1), H^(-1)] / w; the sign is the one that makes the
    stroboscopic bands share the Chern number of the exact Floquet bands.
    """
    pref = -16 * spec.hopping("x", 1) * spec.hopping("y", 1) / spec.omega
    return pref * np.sin(np.asarray(kx, float)) * np.cos(np.asarray(ky, float)) * math.sin(spec.phi)


def _check_piflux_regime(spec: PiFluxSpec) -> None:
    ratio = spec.j2_contribution()
    if ratio > J2_CONTRIBUTION_LIMIT:
        warnings.warn(
            f"second-harmonic mass contribution {ratio:.1%} of the first; "
            "first-harmonic truncation degraded",
            RegimeWarning,
            stacklevel=3,
        )


def piflux_stroboscopic_matrix(spec: PiFluxSpec, kx, ky) -> np.ndarray:
    cx, cy = _fourier_coeffs(spec, 0, kx, ky)
    return _pauli_combo(cx, cy, piflux_mass_term(spec, kx, ky))


def piflux_stroboscopic(spec: PiFluxSpec) -> BlochOperator:
    """H_bar = H^(0) + h_1 sz."""
    _check_piflux_regime(spec)
    return BlochOperator(lambda kx, ky: piflux_stroboscopic_matrix(spec, kx, ky))


def piflux_stroboscopic_energies(spec: PiFluxSpec, kx, ky) -> np.ndarray:
    """E_+(k) = 2 sqrt(Jx0^2 cos^2 kx + Jy0^2 sin^2 ky + h1^2/4)."""
    kx, ky = np.asarray(kx, float), np.asarray(ky, float)
    jx0, jy0 = spec.hopping("x", 0), spec.hopping("y", 0)
    h1 = piflux_mass_term(spec, kx, ky)
    return np.sqrt(4 * (jx0 * np.cos(kx)) ** 2 + 4 * (jy0 * np.sin(ky)) ** 2 + h1**2)


def ribbon_parts(spec: PiFluxSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(X, B, cell) for the ribbon: X couples a_m-b_m (unit weight), B holds
    the vertical bonds without their Peierls phase, cell[i] is the cell index
    of site i. H(kx, t) = 2J cos(kx + Ax sin wt) X + G^dag B G with
    G = diag(exp(i cell Ay sin(wt + phi)))."""
    ny = spec.n_y
    if ny < 4:
        raise ContractError("ribbon needs n_y >= 4")
    dim = 2 * ny
    cells = np.arange(ny)
    a_idx, b_idx = 2 * cells, 2 * cells + 1
    x = np.zeros((dim, dim), dtype=complex)
    x[a_idx, b_idx] = x[b_idx, a_idx] = 1.0
    b = np.zeros((dim, dim), dtype=complex)
    # T = -i J sy couples cell m to m+1
    b[a_idx[:-1], b_idx[1:]] = b[b_idx[1:], a_idx[:-1]] = -spec.J
    b[b_idx[:-1], a_idx[1:]] = b[a_idx[1:], b_idx[:-1]] = spec.J
    return x, b, np.repeat(cells, 2)


def piflux_ribbon(spec: PiFluxSpec, kx) -> TimeDependentHamiltonian:
    """Ribbon open along y with n_y two-site cells (a_m, b_m), sites ordered
    a_0 b_0 a_1 b_1 ...

    Intra-cell (horizontal) bonds carry the Bloch phase, 2J cos(kx + Ax sin wt);
    vertical bonds a_m-b_{m+1} = -J e^{i Ay sin(wt+phi)}, b_m-a_{m+1} = +J e^{...}.
    """
    kx = np.atleast_1d(np.asarray(kx, float))
    x, b, cell = ribbon_parts(spec)
    dim = x.shape[0]

    def evaluate(t):
        wt = spec.omega * t
        hor = 2 * spec.J * np.cos(kx + spec.Ax * math.sin(wt))
        g = np.exp(1j * cell * spec.Ay * math.sin(wt + spec.phi))
        vert = np.conj(g)[:, None] * b * g[None, :]
        return hor[..., None, None] * x + np.broadcast_to(vert, kx.shape + (dim, dim))

    return TimeDependentHamiltonian(evaluate, spec.period, dim)
