import math

import numpy as np
import pytest
from scipy import special
from scipy.linalg import expm

from floquet_topo.floquet import (
    MIN_STEPS,
    Propagator,
    fold,
    gap_widths,
    label_bands,
    micromotion,
    one_period_propagator,
    pi_gap_width,
    quasienergies,
    ribbon_propagator,
)
from floquet_topo.models import (
    PiFluxSpec,
    RabiSpec,
    SSHSpec,
    TimeDependentHamiltonian,
    piflux_hamiltonian,
    piflux_ribbon,
    rabi_hamiltonian,
    ssh_bloch,
    ssh_open_chain,
)
from floquet_topo.numerics import dagger
from floquet_topo.rwa import rabi_rotating_frame


def _unitarity(u):
    return float(np.abs(dagger(u) @ u - np.eye(u.shape[-1])).max())


# ------------------------------------------------------------------ folding


def test_fold_convention():
    w = 2.0
    assert fold(0.7 * w, w) == pytest.approx(-0.3 * w)
    assert fold(0.5 * w, w) == -0.5 * w
    assert fold(-0.5 * w, w) == -0.5 * w
    x = np.linspace(-20, 20, 4001)
    f = fold(x, w)
    assert np.all((f >= -1.0) & (f < 1.0))
    assert np.array_equal(fold(f, w), f)
    assert fold(-1e-18, w) < 1.0


# ---------------------------------------------------------------- propagator


def test_static_hamiltonian_gives_exact_exponential():
    h = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, -0.5]])
    ham = TimeDependentHamiltonian(lambda t: h, 2 * math.pi / 1.7, 2)
    prop = one_period_propagator(ham, 512)
    assert np.abs(prop.U - expm(-1j * h * ham.period)).max() < 1e-10


def test_min_steps_enforced():
    with pytest.raises(ValueError):
        one_period_propagator(rabi_hamiltonian(RabiSpec(1.0, 0.1, 1.0)), MIN_STEPS - 1)


def test_unitarity_all_models():
    rng = np.random.default_rng(0)
    hams = [
        rabi_hamiltonian(RabiSpec(1.0, 5.0, 2.0)),
        ssh_bloch(SSHSpec(1.0, 1.5, 0.2, 5.0), np.linspace(-3, 3, 16)),
        ssh_open_chain(SSHSpec(1.0, 2.0, 0.2, 5.0, 8)),
        piflux_hamiltonian(PiFluxSpec(1.0, 0.5, 0.5, 3.5), rng.uniform(-3, 3, 16), rng.uniform(-3, 3, 16)),
    ]
    for ham in hams:
        assert _unitarity(one_period_propagator(ham, 4096).U) < 1e-10


def test_quasienergies_of_identity_and_raw_rate():
    prop = Propagator(np.eye(3, dtype=complex), 2 * math.pi, 256)
    assert np.allclose(quasienergies(prop).energies, 0.0)
    # raw rate 0.7 w folds to -0.3 w
    w, T = 1.0, 2 * math.pi
    u = np.diag(np.exp(-1j * np.array([0.7, 0.1]) * T))
    spec = quasienergies(Propagator(u, T, 256), w)
    assert np.allclose(spec.energies, [-0.3, 0.1])


def test_static_floquet_modes_are_energy_eigenvectors():
    h = np.diag([0.2, -0.4]).astype(complex)
    ham = TimeDependentHamiltonian(lambda t: h, 2 * math.pi, 2)
    spec = quasienergies(one_period_propagator(ham, 256))
    assert np.allclose(spec.energies, [-0.4, 0.2])
    assert np.allclose(np.abs(spec.modes), np.array([[0, 1], [1, 0]]))


def test_micromotion_is_periodic():
    ham = rabi_hamiltonian(RabiSpec(1.0, 0.4, 1.3))
    spec = quasienergies(one_period_propagator(ham, 2048))
    back = micromotion(ham, spec, ham.period, 2048)
    assert np.abs(back - spec.modes).max() < 1e-8


def test_time_origin_shift_invariance():
    ham = ssh_bloch(SSHSpec(1.0, 1.5, 0.2, 5.0), np.linspace(-3, 3, 9))
    a = quasienergies(one_period_propagator(ham, 4096, 0.0)).energies
    b = quasienergies(one_period_propagator(ham, 4096, 0.3)).energies
    assert np.abs(a - b).max() < 1e-8


def test_second_order_convergence():
    ham = rabi_hamiltonian(RabiSpec(1.0, 0.8, 1.3))
    steps = np.array([256, 512, 1024, 2048])
    ref = quasienergies(one_period_propagator(ham, 4 * steps[-1])).energies
    err = [np.abs(quasienergies(one_period_propagator(ham, int(n))).energies - ref).max() for n in steps]
    slope = np.polyfit(np.log(1.0 / steps), np.log(err), 1)[0]
    assert abs(slope - 2) <= 0.2


def test_doubling_default_steps_changes_little():
    ham = rabi_hamiltonian(RabiSpec(1.0, 0.1, 1.0))
    a = quasienergies(one_period_propagator(ham, 4096)).energies
    b = quasienergies(one_period_propagator(ham, 8192)).energies
    assert np.abs(a - b).max() < 1e-8


def test_rabi_resonant_pi_gap_splitting():
    spec = RabiSpec(1.0, 0.1, 1.0)
    e = quasienergies(one_period_propagator(rabi_hamiltonian(spec), 4096)).energies
    gap = spec.omega - (e.max() - e.min())
    target = special.j1(0.2)
    assert abs(gap - target) / target < 0.05


def test_rabi_exact_modes_overlap_rwa_states():
    # at the fixed point w = Delta_0 the RWA states are Lambda e^{...}|phi>;
    # at t = 0 the frame is the identity, so |Phi_-+(0)> are the H~ eigenvectors
    w = 0.9898192477782756
    spec = RabiSpec(1.0, 0.1, w)
    exact = quasienergies(one_period_propagator(rabi_hamiltonian(spec), 4096)).modes
    phi = rabi_rotating_frame(spec).eigenvectors()
    ov = np.abs(dagger(exact) @ phi) ** 2
    best = max(ov[0, 0] + ov[1, 1], ov[0, 1] + ov[1, 0]) / 2
    assert best > 0.99


def test_ssh_obc_chiral_pairing():
    spec = SSHSpec(1.0, 2.0, 0.2, 5.0, 12)
    e = quasienergies(one_period_propagator(ssh_open_chain(spec), 4096)).energies
    w = spec.omega
    mirrored = np.sort(fold(-e, w))
    d = np.abs(fold(np.sort(e)[:, None] - mirrored[None, :], w)).min(axis=1)
    assert d.max() < 1e-8


def test_ssh_pi_gap_closes_at_first_critical_coupling():
    spec = SSHSpec(1.0, 1.5, 0.2, 5.0)
    e = quasienergies(one_period_propagator(ssh_bloch(spec, np.linspace(-math.pi, math.pi, 257)), 2048)).energies
    assert pi_gap_width(e, spec.omega) < 1e-3


# --------------------------------------------------------------------- gaps


def test_gap_widths_on_circle():
    g0, gpi = gap_widths(np.array([[-0.2, 0.3], [0.1, 0.4], [-0.45, 0.45]]), 1.0)
    assert np.allclose(g0, [0.5, 0.7, 0.9])
    assert np.allclose(gpi, [0.5, 0.3, 0.1])
    with pytest.raises(ValueError):
        gap_widths(np.zeros((2, 3)), 1.0)
    assert pi_gap_width(np.array([[-0.45, 0.45], [-0.2, 0.3]]), 1.0) == pytest.approx(0.1)


def test_label_bands_follows_crossing():
    # two bands crossing linearly; sorting would swap them at the crossing
    ks = np.linspace(-1, 1, 21)
    energies, vectors = [], []
    for k in ks:
        e = np.array([k, -k])
        v = np.eye(2, dtype=complex)
        order = np.argsort(e)
        energies.append(e[order])
        vectors.append(v[:, order])
    e, v = label_bands(np.array(energies), np.array(vectors))
    assert np.allclose(e[:, 0], -ks) or np.allclose(e[:, 0], ks)
    assert np.allclose(np.abs(v[:, 0, 0]), np.abs(v[0, 0, 0]))


# ------------------------------------------------------------------ ribbon


def test_ribbon_propagator_matches_generic_integrator():
    spec = PiFluxSpec(1.0, 0.5, 0.5, 3.5, math.pi / 2, n_y=6)
    kx = np.array([-1.0, 0.2, 1.3])
    fast = ribbon_propagator(spec, kx, 1024)
    assert _unitarity(fast.U) < 1e-12
    ref = one_period_propagator(piflux_ribbon(spec, kx), 4096).U
    assert np.abs(fast.U - ref).max() < 1e-4
    ea = quasienergies(fast).energies
    eb = quasienergies(Propagator(ref, spec.period, 4096)).energies
    assert np.abs(fold(ea - eb, spec.omega)).max() < 1e-5


def test_ribbon_propagator_second_order():
    spec = PiFluxSpec(1.0, 0.5, 0.5, 3.5, math.pi / 2, n_y=5)
    kx = np.array([0.4])
    ref = ribbon_propagator(spec, kx, 4096).U
    e1 = np.abs(ribbon_propagator(spec, kx, 256).U - ref).max()
    e2 = np.abs(ribbon_propagator(spec, kx, 512).U - ref).max()
    assert 3.0 < e1 / e2 < 5.0
