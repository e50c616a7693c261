"""Open-boundary diagnostics: edge weights, gap-resolved edge-state counts
for chains, chiral branch counting for ribbons."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, RegimeWarning
from .floquet import QuasienergySpectrum, fold

EDGE_FRACTION = 0.1
EDGE_THRESHOLD = 0.5
WINDOW_FACTOR = 0.1
GAP_LABELS = ("0-gap", "pi-gap")


@dataclass(frozen=True)
class EdgeProfile:
    state: np.ndarray
    edge_weight: float
    gap_label: str  # "0-gap" | "pi-gap" | "bulk"


@dataclass
class EdgeCount:
    count: int
    window: float
    diagnostics: list[str] = field(default_factory=list)
    members: list[int] = field(default_factory=list)


def _edge_mask(n_sites: int, fraction: float, cell_size: int = 1) -> np.ndarray:
    if not 0 < fraction <= 0.5:
        raise ContractError("edge fraction must lie in (0, 0.5]")
    n_cells = n_sites // cell_size
    depth = max(1, int(round(fraction * n_cells)))
    cells = np.arange(n_sites) // cell_size
    return (cells < depth) | (cells >= n_cells - depth)


def edge_weight(state: np.ndarray, fraction: float = EDGE_FRACTION, cell_size: int = 1) -> np.ndarray:
    """Probability on the sites (or cells of ``cell_size`` sites) within
    ``fraction`` of either end. ``state`` may be a stack with sites on axis -2
    and states on axis -1, or a single vector."""
    state = np.asarray(state, complex)
    prob = np.abs(state) ** 2
    if state.ndim == 1:
        mask = _edge_mask(state.shape[0], fraction, cell_size)
        return float(prob[mask].sum())
    mask = _edge_mask(state.shape[-2], fraction, cell_size)
    return prob[..., mask, :].sum(axis=-2)


def side_weight(state: np.ndarray, fraction: float = EDGE_FRACTION, cell_size: int = 1) -> np.ndarray:
    """(lower-end, upper-end) edge weights of the columns of ``state``."""
    prob = np.abs(np.asarray(state, complex)) ** 2
    n = prob.shape[-2]
    n_cells = n // cell_size
    depth = max(1, int(round(fraction * n_cells)))
    cells = np.arange(n) // cell_size
    lower = prob[..., cells < depth, :].sum(axis=-2)
    upper = prob[..., cells >= n_cells - depth, :].sum(axis=-2)
    return lower, upper


def circle_distance(e: np.ndarray, target: float, omega: float) -> np.ndarray:
    return np.abs(fold(np.asarray(e, float) - target, omega))


def gap_center(gap: str, omega: float) -> float:
    if gap == "0-gap":
        return 0.0
    if gap == "pi-gap":
        return -0.5 * omega
    raise ValueError(f"gap must be one of {GAP_LABELS}")


def bulk_gap_widths(bulk_energies: np.ndarray, omega: float) -> tuple[float, float]:
    """(0-gap, pi-gap) widths of a symmetric two-band bulk spectrum on a k-grid."""
    e = np.asarray(bulk_energies, float)
    upper = np.abs(e).max(axis=-1)  # eps_+ >= 0 branch
    return float(2 * upper.min()), float(omega - 2 * upper.max())


def classify_states(
    spectrum: QuasienergySpectrum,
    gaps: dict[str, float],
    fraction: float = EDGE_FRACTION,
    threshold: float = EDGE_THRESHOLD,
    cell_size: int = 1,
) -> list[EdgeProfile]:
    """Tag each OBC state with the gap window it falls in ("bulk" otherwise)."""
    weights = edge_weight(spectrum.modes, fraction, cell_size)
    out = []
    for a, e in enumerate(spectrum.energies):
        label = "bulk"
        for gap, width in gaps.items():
            if circle_distance(e, gap_center(gap, spectrum.omega), spectrum.omega) < WINDOW_FACTOR * width:
                label = gap
        out.append(EdgeProfile(spectrum.modes[:, a], float(weights[a]), label))
    return out


def count_gap_edge_states(
    spectrum: QuasienergySpectrum,
    gap: str,
    gap_width: float,
    fraction: float = EDGE_FRACTION,
    threshold: float = EDGE_THRESHOLD,
    window_factor: float = WINDOW_FACTOR,
    cell_size: int = 1,
) -> EdgeCount:
    """States with |eps - center| < w on the circle and edge weight > threshold.

    ``gap_width`` is the bulk gap at that center; w = window_factor * gap_width.
    When the bulk gap is closed the window collapses and the count is zero.
    """
    w = window_factor * max(gap_width, 0.0)
    center = gap_center(gap, spectrum.omega)
    dist = circle_distance(spectrum.energies, center, spectrum.omega)
    weights = edge_weight(spectrum.modes, fraction, cell_size)
    inside = np.flatnonzero(dist < w)
    members = [int(a) for a in inside if weights[a] > threshold]
    diags = []
    bulk_inside = [int(a) for a in inside if weights[a] <= threshold]
    if bulk_inside:
        diags.append(
            f"{len(bulk_inside)} delocalised state(s) inside the {gap} window w={w:.3g}; "
            "band edge inside window, use a smaller window"
        )
    if len(members) % 2:
        diags.append(f"odd {gap} edge count {len(members)}")
    return EdgeCount(len(members), w, diags, members)


# -------------------------------------------------------------------- ribbons

@dataclass
class BranchCount:
    """Signed crossings of a fixed quasienergy line, split by edge."""

    gap: str
    lower_edge: int  # net chirality (+1 per upward crossing) on the lower edge
    upper_edge: int
    crossings: int  # edge-localised crossings regardless of sign

    @property
    def pairs(self) -> int:
        return (abs(self.lower_edge) + abs(self.upper_edge)) // 2


def track_bands(energies: np.ndarray, modes: np.ndarray, omega: float):
    """Continue the quasienergy branches of a k-sweep by overlap.

    ``energies`` (Nk, n), ``modes`` (Nk, n, n). Returns the permutation
    ``perm[i]`` mapping each branch to a column at step i.
    """
    nk, n = energies.shape
    perm = np.zeros((nk, n), dtype=int)
    perm[0] = np.arange(n)
    for i in range(1, nk):
        prev = modes[i - 1][:, perm[i - 1]]
        ov = np.abs(prev.conj().T @ modes[i]) ** 2
        # greedy assignment, strongest overlaps first
        taken = np.zeros(n, bool)
        assigned = np.full(n, -1)
        order = np.dstack(np.unravel_index(np.argsort(-ov, axis=None), ov.shape))[0]
        left = n
        for b, j in order:
            if assigned[b] < 0 and not taken[j]:
                assigned[b] = j
                taken[j] = True
                left -= 1
                if not left:
                    break
        perm[i] = assigned
    return perm


def count_chiral_branches(
    energies: np.ndarray,
    modes: np.ndarray,
    omega: float,
    gap: str,
    fraction: float = EDGE_FRACTION,
    threshold: float = EDGE_THRESHOLD,
    cell_size: int = 2,
) -> BranchCount:
    """Net crossings of the mid-gap line over one period of the k-sweep.

    ``energies``/``modes`` are sampled along one full period in k with both
    endpoints included. A branch crossing the line between two samples
    contributes +1 (upward) or -1 (downward) to the edge that holds more of
    its weight.
    """
    energies = np.asarray(energies, float)
    modes = np.asarray(modes, complex)
    nk, n = energies.shape
    perm = track_bands(energies, modes, omega)
    center = gap_center(gap, omega)
    lower_w, upper_w = side_weight(modes, fraction, cell_size)
    lower = upper = crossings = 0
    for i in range(nk - 1):
        a0, a1 = perm[i], perm[i + 1]
        e0 = fold(energies[i, a0] - center, omega)
        e1 = e0 + fold(energies[i + 1, a1] - energies[i, a0], omega)
        sign = np.where((e0 < 0) & (e1 >= 0), 1, np.where((e1 < 0) & (e0 >= 0), -1, 0))
        lw = 0.5 * (lower_w[i, a0] + lower_w[i + 1, a1])
        uw = 0.5 * (upper_w[i, a0] + upper_w[i + 1, a1])
        hit = (sign != 0) & (lw + uw > threshold)
        crossings += int(hit.sum())
        lower += int(np.sum(sign[hit & (lw >= uw)]))
        upper += int(np.sum(sign[hit & (lw < uw)]))
    return BranchCount(gap, lower, upper, crossings)


def warn_if_unresolved(count: BranchCount, expect_even: bool = True) -> None:
    if expect_even and count.lower_edge + count.upper_edge != 0:
        warnings.warn(
            f"{count.gap}: edge chiralities do not cancel ({count.lower_edge}, {count.upper_edge}); "
            "refine the k-sweep",
            RegimeWarning,
            stacklevel=2,
        )


def ribbon_kx_grid(n: int) -> np.ndarray:
    """n + 1 points spanning one period of length pi (the ribbon spectrum
    repeats under kx -> kx + pi), shifted by half a step so that crossings at
    the symmetric points kx = 0, +-pi/2 never fall on a sample."""
    return -0.5 * math.pi + math.pi * (np.arange(n + 1) + 0.5) / n
