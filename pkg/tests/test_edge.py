import math
import warnings

import numpy as np
import pytest

from floquet_topo.analysis import ssh_edge_counts, ssh_obc_spectrum
from floquet_topo.edge import (
    BranchCount,
    circle_distance,
    classify_states,
    count_chiral_branches,
    count_gap_edge_states,
    edge_weight,
    gap_center,
    ribbon_kx_grid,
    side_weight,
    warn_if_unresolved,
)
from floquet_topo.errors import ContractError, RegimeWarning
from floquet_topo.floquet import QuasienergySpectrum
from floquet_topo.models import SSHSpec, ssh_open_chain


def test_uniform_state_edge_weight():
    psi = np.ones(40) / math.sqrt(40)
    # 10% of the chain at each end: 4 + 4 of 40 sites
    assert edge_weight(psi) == pytest.approx(0.2, abs=1e-14)
    assert edge_weight(psi, cell_size=2) == pytest.approx(0.2, abs=1e-14)


def test_first_site_state_is_fully_on_the_edge():
    psi = np.zeros(40)
    psi[0] = 1.0
    assert edge_weight(psi) == 1.0
    lower, upper = side_weight(psi[:, None])
    assert lower[0] == 1.0 and upper[0] == 0.0


def test_edge_weight_stack_and_bad_fraction():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(30, 5)) + 1j * rng.normal(size=(30, 5))
    m /= np.linalg.norm(m, axis=0)
    w = edge_weight(m)
    assert w.shape == (5,)
    assert np.allclose(w, [edge_weight(m[:, a]) for a in range(5)])
    with pytest.raises(ContractError):
        edge_weight(m, 0.0)
    with pytest.raises(ContractError):
        edge_weight(m, 0.6)


def test_static_ssh_zero_modes_are_edge_localised():
    spec = SSHSpec(1.0, 2.0, 0.0, 5.0, 20)
    e, v = np.linalg.eigh(ssh_open_chain(spec).evaluate(0.0))
    zero = np.argsort(np.abs(e))[:2]
    assert np.all(edge_weight(v[:, zero], cell_size=2) > 0.9)


def test_circle_distance_and_centers():
    w = 4.0
    assert circle_distance(1.9, -2.0, w) == pytest.approx(0.1)
    assert circle_distance(-1.9, -2.0, w) == pytest.approx(0.1)
    assert circle_distance(0.3, 0.0, w) == pytest.approx(0.3)
    assert gap_center("pi-gap", w) == -2.0 and gap_center("0-gap", w) == 0.0
    with pytest.raises(ValueError):
        gap_center("1-gap", w)


def _toy_spectrum(energies, weights, omega=4.0, n=20):
    # states supported on the first site (edge) or spread uniformly (bulk)
    modes = np.zeros((n, len(energies)), complex)
    for a, on_edge in enumerate(weights):
        if on_edge:
            modes[a % 2, a] = 1.0
        else:
            modes[:, a] = 1.0 / math.sqrt(n)
    return QuasienergySpectrum(np.asarray(energies, float), modes, omega)


def test_count_uses_window_and_threshold():
    spec = _toy_spectrum([0.01, -0.01, 0.3, 1.99, -1.99, 0.02], [1, 1, 1, 1, 1, 0])
    zero = count_gap_edge_states(spec, "0-gap", 1.0)
    assert zero.count == 2 and zero.window == pytest.approx(0.1)
    assert any("delocalised" in d for d in zero.diagnostics)
    pi = count_gap_edge_states(spec, "pi-gap", 1.0)
    assert pi.count == 2 and pi.members == [3, 4]
    closed = count_gap_edge_states(spec, "0-gap", 0.0)
    assert closed.count == 0 and closed.window == 0.0


def test_odd_count_is_flagged():
    spec = _toy_spectrum([0.01, 1.0], [1, 0])
    res = count_gap_edge_states(spec, "0-gap", 1.0)
    assert res.count == 1
    assert any("odd" in d for d in res.diagnostics)


def test_classify_states_labels():
    spec = _toy_spectrum([0.01, 1.99, 1.0], [1, 1, 0])
    labels = [p.gap_label for p in classify_states(spec, {"0-gap": 1.0, "pi-gap": 1.0})]
    assert labels == ["0-gap", "pi-gap", "bulk"]


@pytest.mark.parametrize("jp", [0.5, 1.0, 2.0, 3.0])
def test_driven_chain_counts_are_even(jp):
    res = ssh_edge_counts(SSHSpec(1.0, jp, 0.2, 5.0, 20), steps=1024, nk=128)
    assert res.zero.count % 2 == 0 and res.pi.count % 2 == 0


def test_high_frequency_trivial_chain_has_no_edge_states():
    res = ssh_edge_counts(SSHSpec(1.0, 0.5, 0.2, 10.0, 20), steps=1024, nk=128)
    assert (res.zero.count, res.pi.count) == (0, 0)
    topo = ssh_edge_counts(SSHSpec(1.0, 2.0, 0.2, 10.0, 20), steps=1024, nk=128)
    assert (topo.zero.count, topo.pi.count) == (2, 0)


def test_obc_spectrum_is_chirally_symmetric():
    e = ssh_obc_spectrum(SSHSpec(1.0, 2.0, 0.2, 5.0, 10), 1024).energies
    assert np.abs(np.sort(e) + np.sort(e)[::-1]).max() < 1e-8


# -------------------------------------------------------------------- ribbons


def test_ribbon_kx_grid_avoids_symmetric_points():
    g = ribbon_kx_grid(64)
    assert g.size == 65
    assert g[-1] - g[0] == pytest.approx(math.pi)
    for p in (0.0, math.pi / 2, -math.pi / 2):
        assert np.abs(g - p).min() > 0.4 * math.pi / 64


def _linear_branches(slope_lower, slope_upper, n=41):
    # two edge branches e = s k on a 4-site strip, one per edge
    k = np.linspace(-1, 1, n)
    e = np.stack([slope_lower * k, slope_upper * k], axis=-1)
    modes = np.zeros((n, 4, 2), complex)
    modes[:, 0, 0] = 1.0
    modes[:, 3, 1] = 1.0
    order = np.argsort(e, axis=-1)
    e = np.take_along_axis(e, order, axis=-1)
    modes = np.take_along_axis(modes, order[:, None, :], axis=-1)
    return e, modes


def test_chiral_branch_count_signs():
    e, modes = _linear_branches(1.0, -1.0)
    c = count_chiral_branches(e, modes, 8.0, "0-gap", fraction=0.25, cell_size=1)
    assert (c.lower_edge, c.upper_edge, c.crossings) == (1, -1, 2)
    assert c.pairs == 1
    none = count_chiral_branches(e, modes, 8.0, "pi-gap", fraction=0.25, cell_size=1)
    assert none.crossings == 0


def test_unbalanced_chirality_warns():
    with pytest.warns(RegimeWarning):
        warn_if_unresolved(BranchCount("0-gap", 1, 0, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        warn_if_unresolved(BranchCount("0-gap", 2, -2, 4))
