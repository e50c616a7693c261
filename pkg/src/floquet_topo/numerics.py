"""Numerical kernels: Bessel functions, dense eigensolvers, matrix exponentials
and bracketed scalar root finding.

All matrix routines accept a single ``(n, n)`` matrix or a stack ``(..., n, n)``
and operate on the trailing two axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketError, ContractError, DomainError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

GAUGE_TOL = 1e-8
PHASE_DEGENERACY_TOL = 1e-9
# eigenvalues of the cosine part closer than this are refined together
_COS_CLUSTER_TOL = 1e-6

_MAX_ORDER = 64
_MAX_ARG = 100.0
_SERIES_LIMIT = 12.0


# ---------------------------------------------------------------- Bessel J_n

def _bessel_series(n: int, x: float) -> float:
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    q = -half * half
    m = 0
    while True:
        m += 1
        term *= q / (m * (m + n))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and m > 2:
            return total
        if m > 200:
            return total


def _bessel_miller(n: int, x: float) -> float:
    """Backward recurrence from a high start order, normalised by
    J_0 + 2 sum_k J_2k = 1."""
    top = max(n, int(x)) + 20 + int(math.sqrt(40.0 * max(n, x)))
    top += top % 2
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    wanted = 0.0
    for m in range(top, 0, -1):
        j_prev = (2.0 * m / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if m - 1 == n:
            wanted = j_cur
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            wanted *= 1e-250
    norm += j_cur
    return wanted / norm


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for integer ``n``.

    Ascending series for |x| <= 12, normalised backward (Miller) recurrence
    otherwise. Accurate to ~1e-13 absolute for |n| <= 64, |x| <= 100.
    """
    if int(n) != n or abs(n) > _MAX_ORDER:
        raise DomainError(f"order n={n!r} outside |n| <= {_MAX_ORDER}")
    x = float(x)
    if not math.isfinite(x) or abs(x) > _MAX_ARG:
        raise DomainError(f"argument x={x!r} outside |x| <= {_MAX_ARG}")
    n = int(n)
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    if x < 0:
        x = -x
        if n % 2:
            sign = -sign
    if x == 0.0:
        return sign * (1.0 if n == 0 else 0.0)
    if x <= _SERIES_LIMIT:
        return sign * _bessel_series(n, x)
    return sign * _bessel_miller(n, x)


# ---------------------------------------------------------- eigen-decomposition

@dataclass(frozen=True)
class EigenDecomposition:
    """``values[..., i]`` pairs with column ``vectors[..., :, i]``."""

    values: np.ndarray
    vectors: np.ndarray

    def __iter__(self):
        yield self.values
        yield self.vectors


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def fix_gauge(vectors: np.ndarray, tol: float = GAUGE_TOL) -> np.ndarray:
    """Rotate every column so its first component of modulus > ``tol`` is real positive."""
    v = np.array(vectors, dtype=complex, copy=True)
    mags = np.abs(v)
    first = np.argmax(mags > tol, axis=-2)  # (..., ncols)
    pivot = np.take_along_axis(v, first[..., None, :], axis=-2)
    pmag = np.abs(pivot)
    phase = np.where(pmag > 0, np.conj(pivot) / np.where(pmag > 0, pmag, 1.0), 1.0)
    return v * phase


def _check_hermitian(h: np.ndarray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    defect = float(np.max(np.abs(h - dagger(h)))) if h.size else 0.0
    if defect > tol * scale:
        raise ContractError(f"matrix not Hermitian (defect {defect:.3e})")


def eig_hermitian(h: np.ndarray, tol: float = 1e-12) -> EigenDecomposition:
    """Ascending real eigenvalues and gauge-fixed orthonormal eigenvectors."""
    h = np.asarray(h, dtype=complex)
    _check_hermitian(h, tol)
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return EigenDecomposition(w, fix_gauge(v))


def eig_unitary(u: np.ndarray, tol: float = 1e-9) -> EigenDecomposition:
    """Eigenphases theta in (-pi, pi] with ``U v = exp(i theta) v``.

    The commuting Hermitian parts C = (U+U^dag)/2 and S = (U-U^dag)/2i are
    diagonalised simultaneously: first C, then S inside every cluster of
    (near-)equal cosines. Output is sorted by ascending phase.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[-1]
    eye = np.eye(n)
    defect = np.max(np.abs(dagger(u) @ u - eye)) if u.size else 0.0
    if defect > tol:
        raise ContractError(f"matrix not unitary (defect {defect:.3e})")
    ud = dagger(u)
    c = 0.5 * (u + ud)
    s = -0.5j * (u - ud)
    cvals, cvecs = np.linalg.eigh(c)
    # cluster ids along the ascending cosine spectrum
    jumps = np.diff(cvals, axis=-1) > _COS_CLUSTER_TOL
    ids = np.concatenate(
        [np.zeros(cvals.shape[:-1] + (1,), dtype=int), np.cumsum(jumps, axis=-1)], axis=-1
    )
    s_rot = dagger(cvecs) @ s @ cvecs
    same = ids[..., :, None] == ids[..., None, :]
    # block-diagonal S; the integer shift keeps distinct clusters from mixing
    block = np.where(same, s_rot, 0.0) + 4.0 * ids[..., :, None] * np.eye(n)
    _, w = np.linalg.eigh(0.5 * (block + dagger(block)))
    vecs = cvecs @ w
    rayleigh = np.einsum("...ji,...jk,...ki->...i", np.conj(vecs), u, vecs)
    phases = np.angle(rayleigh)
    phases = np.where(phases <= -np.pi, np.pi, phases)
    order = np.argsort(phases, axis=-1, kind="stable")
    phases = np.take_along_axis(phases, order, axis=-1)
    vecs = np.take_along_axis(vecs, order[..., None, :], axis=-1)
    return EigenDecomposition(phases, fix_gauge(vecs))


# ------------------------------------------------------------- exponentials

def expm_hermitian(h: np.ndarray, tau: float | np.ndarray) -> np.ndarray:
    """exp(-i H tau) for Hermitian H (stacks allowed).

    Closed SU(2) formula for 2x2 input, spectral decomposition otherwise.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] == 2:
        return _expm2(h, tau)
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * w * np.asarray(tau)[..., None])
    return (v * phase[..., None, :]) @ dagger(v)


def _expm2(h: np.ndarray, tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    h0 = 0.5 * (h[..., 0, 0] + h[..., 1, 1]).real
    hz = 0.5 * (h[..., 0, 0] - h[..., 1, 1]).real
    off = 0.5 * (h[..., 0, 1] + np.conj(h[..., 1, 0]))
    norm = np.sqrt(hz * hz + (off * np.conj(off)).real)
    cs = np.cos(norm * tau)
    sn = tau * np.sinc(norm * tau / np.pi)  # sin(|h| tau) / |h|
    glob = np.exp(-1j * h0 * tau)
    out = np.empty(np.broadcast_shapes(h.shape, tau.shape + (2, 2)), dtype=complex)
    out[..., 0, 0] = glob * (cs - 1j * sn * hz)
    out[..., 1, 1] = glob * (cs + 1j * sn * hz)
    out[..., 0, 1] = glob * (-1j * sn * off)
    out[..., 1, 0] = glob * (-1j * sn * np.conj(off))
    return out


# ------------------------------------------------------------- root finding

def solve_scalar_root(
    g: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-12,
    scan: int = 200,
) -> float:
    """Root of ``g`` inside ``bracket`` by bisection with a secant polish.

    If the bracket holds several sign changes, the right-most one is used.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise BracketError(f"empty bracket ({a}, {b})")
    xs = np.linspace(a, b, scan + 1)
    gs = np.array([g(x) for x in xs])
    if gs[-1] == 0.0:
        return b
    lo = hi = None
    for i in range(scan, 0, -1):
        if gs[i - 1] == 0.0:
            return float(xs[i - 1])
        if np.sign(gs[i - 1]) != np.sign(gs[i]):
            lo, hi, glo = xs[i - 1], xs[i], gs[i - 1]
            break
    if lo is None:
        raise BracketError(f"no sign change of g on ({a}, {b})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return float(mid)
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    # secant polish, kept only if it improves the residual inside the bracket
    x0, x1 = lo, hi
    g0, g1 = g(x0), g(x1)
    best = x0 if abs(g0) < abs(g1) else x1
    for _ in range(8):
        if g1 == g0:
            break
        x2 = x1 - g1 * (x1 - x0) / (g1 - g0)
        if not (min(lo, hi) - 1e-12 <= x2 <= max(lo, hi) + 1e-12):
            break
        g2 = g(x2)
        if abs(g2) < abs(g(best)):
            best = x2
        if abs(g2) <= tol:
            break
        x0, g0, x1, g1 = x1, g1, x2, g2
    return float(best)
