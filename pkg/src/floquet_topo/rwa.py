"""Analytic resonance pipeline.

static part -> eigenframe Lambda (conduction column first) -> rotating
coupling Gamma -> time-independent rotating-frame Hamiltonian H~ -> folded
quasienergies and first-sideband Floquet states.

Band labels: H~ eigenpairs are indexed by the rotating-frame sign (lambda_-,
lambda_+); the quasienergy band +1 comes from lambda_- and vice versa.
That swap lives in ``rwa_quasienergy_map`` / ``quasienergy_band_source``
and nowhere else.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError, RegimeWarning
from .floquet import fold
from .models import (
    PIFLUX_ZONE,
    PiFluxSpec,
    RabiSpec,
    SSHSpec,
    piflux_harmonic,
    piflux_stroboscopic_matrix,
    ssh_harmonic,
    ssh_static,
)
from .numerics import bessel_j, dagger, eig_hermitian, solve_scalar_root

DEGENERACY_TOL = 1e-10
WINDOW_RATIO = 1.5


@dataclass(frozen=True)
class EigenFrame:
    """Lambda has the E_+ eigenvector in column 0 and E_- in column 1."""

    lam: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray
    k: object = None


@dataclass(frozen=True)
class RotatingFrameHamiltonian:
    detuning: np.ndarray  # (E_+ - E_- - w) / 2
    gamma: np.ndarray
    offset: np.ndarray = 0.0  # (E_+ + E_-) / 2, zero for the two-band models here
    k: object = None

    @property
    def matrix(self) -> np.ndarray:
        d = np.asarray(self.detuning, float)
        g = np.asarray(self.gamma, complex)
        d, g, c = np.broadcast_arrays(d, g, np.asarray(self.offset, float))
        out = np.empty(d.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = c + d
        out[..., 1, 1] = c - d
        out[..., 0, 1] = g
        out[..., 1, 0] = np.conj(g)
        return out

    def eigenvalues(self) -> np.ndarray:
        """(lambda_-, lambda_+) along the last axis."""
        r = np.sqrt(np.asarray(self.detuning, float) ** 2 + np.abs(self.gamma) ** 2)
        c = np.asarray(self.offset, float)
        return np.stack(np.broadcast_arrays(c - r, c + r), axis=-1)

    def eigenvectors(self) -> np.ndarray:
        """Columns |phi_->, |phi_+> (gauge-fixed)."""
        return eig_hermitian(self.matrix).vectors


@dataclass(frozen=True)
class CriticalFrequency:
    omega: float
    k_point: tuple
    mechanism: str
    exact: bool = True


@dataclass
class CriticalFrequencySet:
    frequencies: list[CriticalFrequency] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def values(self) -> list[float]:
        return [c.omega for c in self.frequencies]


@dataclass(frozen=True)
class RWASolution:
    frame: EigenFrame
    gamma: np.ndarray
    rotating: RotatingFrameHamiltonian
    e_tilde: np.ndarray  # (..., 2) = (lambda_-, lambda_+)
    phi: np.ndarray  # (..., 2, 2) columns |phi_->, |phi_+>
    omega: float

    def quasienergies(self) -> np.ndarray:
        """(eps_-, eps_+) along the last axis."""
        eps_m, eps_p = rwa_quasienergy_map(self.e_tilde, self.omega)
        return np.stack([eps_m, eps_p], axis=-1)

    def floquet_states(self, t: float = 0.0) -> np.ndarray:
        """Columns (Phi_-, Phi_+) at time t, labelled by rotating-frame index."""
        return analytic_floquet_state(self.frame, self.phi, t, self.omega)


# ------------------------------------------------------------------ frame

def static_eigenframe(h0: np.ndarray, k=None, tol: float = DEGENERACY_TOL) -> EigenFrame:
    vals, vecs = eig_hermitian(h0)
    gap = vals[..., 1] - vals[..., 0]
    if np.any(gap < tol):
        where = np.argwhere(np.atleast_1d(gap < tol))[:3].tolist()
        raise DegeneracyError(
            f"static part degenerate at grid index {where}; offset the k-grid "
            "away from the band touching point"
        )
    lam = vecs[..., ::-1]
    return EigenFrame(lam, vals[..., 1], vals[..., 0], k)


def rotating_coupling(frame: EigenFrame, h_minus: np.ndarray) -> np.ndarray:
    """Gamma = [Lambda^dag H^(-1) Lambda]^{1,2}: the sigma_+ e^{-iwt} part."""
    rotated = dagger(frame.lam) @ np.asarray(h_minus, complex) @ frame.lam
    return rotated[..., 0, 1]


def rotating_frame_hamiltonian(
    frame: EigenFrame, gamma: np.ndarray, omega: float
) -> RotatingFrameHamiltonian:
    ep, em = np.asarray(frame.e_plus), np.asarray(frame.e_minus)
    return RotatingFrameHamiltonian(
        detuning=0.5 * (ep - em - omega),
        gamma=np.asarray(gamma, complex),
        offset=0.5 * (ep + em),
        k=frame.k,
    )


def rwa_quasienergy_map(e_tilde: np.ndarray, omega: float):
    """eps_+ = w/2 + lambda_-,  eps_- = -w/2 + lambda_+  (folded).

    ``e_tilde[..., 0]`` is lambda_-, ``e_tilde[..., 1]`` is lambda_+.
    Returns ``(eps_minus, eps_plus)``.
    """
    e_tilde = np.asarray(e_tilde, float)
    lam_m, lam_p = e_tilde[..., 0], e_tilde[..., 1]
    return fold(-0.5 * omega + lam_p, omega), fold(0.5 * omega + lam_m, omega)


def quasienergy_band_source(band: int) -> int:
    """Rotating-frame index (+1/-1) whose state carries quasienergy band ``band``."""
    if band not in (1, -1):
        raise ValueError("band must be +1 or -1")
    return -band


def analytic_floquet_state(frame: EigenFrame, phi: np.ndarray, t: float, omega: float) -> np.ndarray:
    """|Phi_+-(k,t)> = Lambda exp(-i w t (sz -+ 1)/2) |phi_+->, columns (Phi_-, Phi_+)."""
    phi = np.asarray(phi, complex)
    out = np.empty(np.broadcast_shapes(frame.lam.shape, phi.shape), dtype=complex)
    wt = omega * t
    # Phi_-: sz + 1 -> diag(e^{-iwt}, 1); Phi_+: sz - 1 -> diag(1, e^{iwt})
    rot_m = np.array([np.exp(-1j * wt), 1.0])
    rot_p = np.array([1.0, np.exp(1j * wt)])
    out[..., :, 0] = np.einsum("...ij,...j->...i", frame.lam, rot_m * phi[..., :, 0])
    out[..., :, 1] = np.einsum("...ij,...j->...i", frame.lam, rot_p * phi[..., :, 1])
    return out


def solve_rwa(static: np.ndarray, h_minus: np.ndarray, omega: float, k=None) -> RWASolution:
    frame = static_eigenframe(static, k)
    gamma = rotating_coupling(frame, h_minus)
    rot = rotating_frame_hamiltonian(frame, gamma, omega)
    dec = eig_hermitian(rot.matrix)
    return RWASolution(frame, gamma, rot, dec.values, dec.vectors, omega)


# ------------------------------------------------------------- model wrappers

def rabi_rotating_frame(spec: RabiSpec) -> RotatingFrameHamiltonian:
    """H~ = (Delta_0 - w)/2 sz + Delta_1/2 (e^{-i phi} s+ + h.c.)."""
    d0, d1 = spec.renormalized(0), spec.renormalized(1)
    return RotatingFrameHamiltonian(
        detuning=np.asarray(0.5 * (d0 - spec.omega)),
        gamma=np.asarray(0.5 * d1 * np.exp(-1j * spec.phi)),
    )


def rabi_analytic_quasienergies(spec: RabiSpec) -> np.ndarray:
    """(eps_-, eps_+) = (-w/2 + lambda_+, w/2 + lambda_-), folded."""
    lam = rabi_rotating_frame(spec).eigenvalues()
    eps_m, eps_p = rwa_quasienergy_map(lam, spec.omega)
    return np.array([float(eps_m), float(eps_p)])


def ssh_rwa(spec: SSHSpec, k) -> RWASolution:
    k = np.asarray(k, float)
    return solve_rwa(ssh_static(spec, k), ssh_harmonic(spec, k, -1), spec.omega, k)


def ssh_gamma_closed_form(spec: SSHSpec, k) -> np.ndarray:
    """|Gamma(k)| = (J + J') V |sin k| / E_+(k)."""
    k = np.asarray(k, float)
    e = np.sqrt(spec.J**2 + spec.Jp**2 + 2 * spec.J * spec.Jp * np.cos(k))
    return (spec.J + spec.Jp) * spec.V * np.abs(np.sin(k)) / e


def check_piflux_window(spec: PiFluxSpec, ratio: float = WINDOW_RATIO) -> bool:
    """4 sqrt(Jx0^2 + Jy0^2) >> w >> 16 Jx1 Jy1 / w, each by at least ``ratio``."""
    bandwidth = 4 * math.hypot(spec.hopping("x", 0), spec.hopping("y", 0))
    dyn_gap = 16 * abs(spec.hopping("x", 1) * spec.hopping("y", 1)) / spec.omega
    ok = bandwidth >= ratio * spec.omega and spec.omega >= ratio * dyn_gap
    if not ok:
        warnings.warn(
            f"pi-flux RWA window violated: bandwidth {bandwidth:.3g}, w {spec.omega:.3g}, "
            f"dynamical gap {dyn_gap:.3g}",
            RegimeWarning,
            stacklevel=2,
        )
    return ok


def piflux_rwa(spec: PiFluxSpec, kx, ky, static: str = "stroboscopic", check: bool = True) -> RWASolution:
    """RWA solution with the stroboscopic H_bar (default) or the bare average H^(0)
    as static part. The latter leaves the 0-gap closed at the Dirac points."""
    if check:
        check_piflux_window(spec)
    kx, ky = np.broadcast_arrays(np.asarray(kx, float), np.asarray(ky, float))
    if static == "stroboscopic":
        h_static = piflux_stroboscopic_matrix(spec, kx, ky)
    elif static == "average":
        h_static = piflux_harmonic(spec, kx, ky, 0)
    else:
        raise ValueError("static must be 'stroboscopic' or 'average'")
    return solve_rwa(h_static, piflux_harmonic(spec, kx, ky, -1), spec.omega, (kx, ky))


def piflux_gamma_angle_form(spec: PiFluxSpec, kx, ky) -> np.ndarray:
    """Gamma from the angle parametrisation of Lambda (theta, phi_k of H_bar)."""
    kx, ky = np.asarray(kx, float), np.asarray(ky, float)
    h = piflux_stroboscopic_matrix(spec, kx, ky)
    dx, dy, dz = h[..., 1, 0].real, h[..., 1, 0].imag, h[..., 0, 0].real
    theta = np.arctan2(np.hypot(dx, dy), dz)
    jx1, jy1 = spec.hopping("x", 1), spec.hopping("y", 1)
    ephi = np.exp(-1j * spec.phi)
    v12 = -2 * (1j * jx1 * np.sin(kx) - jy1 * ephi * np.cos(ky))
    v21 = -2 * (1j * jx1 * np.sin(kx) + jy1 * ephi * np.cos(ky))
    az = np.exp(1j * np.arctan2(dy, dx))  # e^{i phi_k} with phi_k = arg(dx + i dy)
    return 0.5 * np.conj(az) * v21 * (1 - np.cos(theta)) - 0.5 * az * v12 * (1 + np.cos(theta))


# -------------------------------------------------------- critical frequencies

def critical_frequencies(spec) -> CriticalFrequencySet:
    out = CriticalFrequencySet()
    if isinstance(spec, RabiSpec):
        def g(w):
            return w - spec.delta * bessel_j(0, 2 * spec.V / w)

        lo = max(1e-3 * spec.delta, 2 * spec.V / 100.0)
        try:
            w = solve_scalar_root(g, (lo, spec.delta), scan=2000)
        except Exception as exc:  # no root: report, do not fail
            out.diagnostics.append(f"no root of w = Delta J0(2V/w) in ({lo:.3g}, {spec.delta}): {exc}")
            return out
        d1 = spec.delta * bessel_j(1, 2 * spec.V / w)
        exact = abs(d1) < 1e-9
        out.frequencies.append(CriticalFrequency(w, (), "resonance w = Delta_0", exact))
        if not exact:
            out.diagnostics.append(f"anticrossing of width |Delta_1| = {abs(d1):.4g}; no exact closure")
    elif isinstance(spec, SSHSpec):
        out.frequencies.append(CriticalFrequency(2 * (spec.J + spec.Jp), (0.0,), "resonance at k=0"))
        w_pi = 2 * abs(spec.J - spec.Jp)
        if w_pi > 0:
            out.frequencies.append(CriticalFrequency(w_pi, (math.pi,), "resonance at |k|=pi"))
        else:
            out.diagnostics.append("2|J - J'| = 0: no pi-gap closure at |k| = pi")
    elif isinstance(spec, PiFluxSpec):
        w = 4 * math.hypot(spec.hopping("x", 0), spec.hopping("y", 0))
        for ky in (math.pi / 2, -math.pi / 2):
            out.frequencies.append(CriticalFrequency(w, (0.0, ky), "resonance at Gamma = 0 point"))
    else:
        raise TypeError(f"unsupported spec {type(spec).__name__}")
    return out


# ---------------------------------------------------------- degeneracy points

def _golden_min(f, a: float, b: float, tol: float = 1e-13, iters: int = 200) -> float:
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _ssh_gamma_sq(spec: SSHSpec, k) -> np.ndarray:
    return np.abs(ssh_rwa(spec, k).gamma) ** 2


def _piflux_gamma_sq(spec: PiFluxSpec, kx, ky) -> np.ndarray:
    return np.abs(piflux_rwa(spec, kx, ky, check=False).gamma) ** 2


def degeneracy_points(spec, grid: int = 1024, threshold: float = 1e-6, tol: float = 1e-12) -> list:
    """k-points where |Gamma(k)|^2 vanishes: grid scan, then golden-section refinement."""
    if isinstance(spec, SSHSpec):
        ks = np.linspace(-math.pi, math.pi, grid + 1)
        g2 = _ssh_gamma_sq(spec, ks)
        found = []
        step = ks[1] - ks[0]
        for i in range(len(ks)):
            left = g2[i - 1] if i > 0 else np.inf
            right = g2[i + 1] if i + 1 < len(ks) else np.inf
            if g2[i] < threshold and g2[i] <= left and g2[i] <= right:
                a, b = max(-math.pi, ks[i] - step), min(math.pi, ks[i] + step)
                k = _golden_min(lambda x: float(_ssh_gamma_sq(spec, np.array([x]))[0]), a, b)
                if abs(k - ks[i]) < step and g2[i] <= _ssh_gamma_sq(spec, np.array([k]))[0]:
                    k = float(ks[i])
                k = _snap(k, lambda x: float(_ssh_gamma_sq(spec, np.array([x]))[0]))
                if _ssh_gamma_sq(spec, np.array([k]))[0] < tol:
                    found.append(float(k) + 0.0)
        return sorted(set(found))
    if isinstance(spec, PiFluxSpec):
        (x0, x1), (y0, y1) = PIFLUX_ZONE
        kx = np.linspace(x0, x1, grid + 1)
        ky = np.linspace(y0, y1, grid // 2 + 1)
        KX, KY = np.meshgrid(kx, ky, indexing="ij")
        g2 = _piflux_gamma_sq(spec, KX, KY)
        pad = np.pad(g2, 1, constant_values=np.inf)
        neigh = np.min(
            [np.roll(np.roll(pad, dx, 0), dy, 1)[1:-1, 1:-1] for dx in (-1, 0, 1) for dy in (-1, 0, 1)
             if (dx, dy) != (0, 0)],
            axis=0,
        )
        cand = np.argwhere((g2 < threshold) & (g2 <= neigh))
        hx, hy = kx[1] - kx[0], ky[1] - ky[0]
        pts = []
        for i, j in cand:
            px, py = float(kx[i]), float(ky[j])
            for _ in range(4):  # alternating golden-section sweeps
                px = _golden_min(lambda x: float(_piflux_gamma_sq(spec, x, py)), px - hx, px + hx)
                py = _golden_min(lambda y: float(_piflux_gamma_sq(spec, px, y)), py - hy, py + hy)
            if float(_piflux_gamma_sq(spec, kx[i], ky[j])) <= float(_piflux_gamma_sq(spec, px, py)):
                px, py = float(kx[i]), float(ky[j])
            # Dirac points of H^(0): Gamma can vanish there too (phi = pi/2),
            # but E_+ is only the O(1/w) mass, so no resonance can close a gap
            if abs(piflux_harmonic(spec, px, py, 0)[0, 1]) < 1e-6 * spec.J:
                continue
            px = _snap(px, lambda x: float(_piflux_gamma_sq(spec, x, py)))
            py = _snap(py, lambda y: float(_piflux_gamma_sq(spec, px, y)))
            if float(_piflux_gamma_sq(spec, px, py)) < tol:
                pts.append((float(px) + 0.0, float(py) + 0.0))
        return _dedupe_piflux(pts)
    raise TypeError(f"unsupported spec {type(spec).__name__}")


def _snap(x: float, f, quantum: float = math.pi / 2, tol: float = 1e-7) -> float:
    """Replace a refined coordinate by the nearby multiple of ``quantum`` when
    that is at least as good a minimum of ``f``."""
    c = quantum * round(x / quantum)
    if abs(x - c) < tol and f(c) <= f(x):
        return float(c)
    return float(x)


def _dedupe_piflux(pts, tol: float = 1e-6) -> list:
    """Identify points differing by (2pi, 0), (0, 2pi) or (pi, pi); keep the
    representative of smallest norm."""
    reps: list[tuple[float, float]] = []
    for p in sorted(pts, key=lambda q: (q[0] ** 2 + q[1] ** 2, q)):
        dup = False
        for r in reps:
            dx, dy = (p[0] - r[0]) / math.pi, (p[1] - r[1]) / math.pi
            # lattice generated by (2,0), (0,2), (1,1) in units of pi: integers with even sum
            nx, ny = round(dx), round(dy)
            if abs(dx - nx) < tol and abs(dy - ny) < tol and (nx + ny) % 2 == 0:
                dup = True
                break
        if not dup:
            reps.append(p)
    return sorted(reps)
