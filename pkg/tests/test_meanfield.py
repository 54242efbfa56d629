import numpy as np
import pytest

from latticevar.model import (ModelParams, LatticeSpec, DegenerateParametersError,
                              atomic_ground_occupations, atomic_energy_per_pair)
from latticevar import coherent, ed
from latticevar import meanfield as mf


def test_local_hamiltonian_diagonal_without_drive():
    p = ModelParams(mu=1.2, u=1.0, v=0.3)
    h = mf.local_hamiltonian(0.0, 0.5, p, n_max=6)
    assert np.allclose(h, np.diag(np.diagonal(h)))
    # ground level is the minimizer of the local number energy
    n = np.arange(7.0)
    local = -(p.mu - 2 * p.v * 0.5) * n + 0.5 * p.u * n * (n - 1)
    assert np.argmin(np.diagonal(h).real) == np.argmin(local)


def test_local_hamiltonian_pair_steps_of_two():
    p = ModelParams(mu=0.0, u=1.0, eps=0.4)
    h = mf.local_hamiltonian(0.0, 0.0, p, n_max=5)
    nz = np.nonzero(h - np.diag(np.diagonal(h)))
    assert np.all(np.abs(nz[0] - nz[1]) == 2)


def test_local_ground_develops_coherence():
    p = ModelParams(mu=0.0, u=1.0, j=0.4)
    h = mf.local_hamiltonian(1.0, 0.0, p, n_max=10)
    w, vecs = np.linalg.eigh(h)
    psi = vecs[:, 0]
    n = np.arange(11.0)
    phi = np.sum(psi[:-1] * np.sqrt(n[1:]) * psi[1:])
    assert phi > 0.1


def test_scf_atomic_limit():
    p = ModelParams(mu=1.8, u=1.0, v=0.75)
    sol = mf.scf_solve(p, n_max=6, init=(0.0, 0.0, 2.0, 0.0))
    assert sol.converged
    assert abs(sol.phi_o) < 1e-12 and abs(sol.phi_e) < 1e-12
    assert (sol.rho_o, sol.rho_e) == (2.0, 0.0)
    assert sol.e_pair == pytest.approx(-2.6, abs=1e-12)


def test_scf_fixed_point_identity():
    p = ModelParams(mu=1.8, u=1.0, v=0.75)
    sol = mf.scf_solve(p, n_max=6, init=(0.0, 0.0, 2.0, 0.0))
    again = mf.scf_solve(p, n_max=6, init=(sol.phi_o, sol.phi_e, sol.rho_o, sol.rho_e))
    assert again.converged and again.iterations <= 2
    assert again.rho_o == pytest.approx(sol.rho_o, abs=1e-10)
    assert again.e_pair == pytest.approx(sol.e_pair, abs=1e-12)


def test_scf_self_consistency_invariant():
    p = ModelParams(mu=1.8, u=1.0, v=0.75, j=0.4)
    sol = mf.multistart_mf(p, n_max=12, n_random=2, seed=0)
    assert sol.converged
    # re-diagonalizing both local problems reproduces the order parameters
    psi_o = mf._local_ground(sol.phi_e, sol.rho_e, p, 12)
    phi_o, rho_o = mf._expectations(psi_o)
    assert abs(phi_o - sol.phi_o) < 1e-6
    assert abs(rho_o - sol.rho_o) < 1e-6


def test_superfluid_point_has_coherence():
    p = ModelParams(mu=1.8, u=1.0, v=0.75, j=0.4)
    sol = mf.multistart_mf(p, n_max=12, n_random=2, seed=0)
    assert max(abs(sol.phi_o), abs(sol.phi_e)) > 0.1
    assert mf.classify(sol) in ("SF", "SS")


def test_deep_mott_point():
    p = ModelParams(mu=0.5, u=1.0, j=0.025)
    sol = mf.multistart_mf(p, n_max=8, n_random=2, seed=0)
    assert mf.classify(sol) == "MI"
    assert sol.rho_o == pytest.approx(1.0, abs=1e-6)


def test_large_hopping_superfluid_beats_atomic():
    p = ModelParams(mu=1.0, u=1.0, j=1.0)
    sol = mf.multistart_mf(p, n_max=14, n_random=2, seed=0)
    assert mf.classify(sol) == "SF"
    assert sol.e_pair < atomic_energy_per_pair(1, 1, p) - 0.1


def test_multistart_reproducible():
    p = ModelParams(mu=1.1, u=1.0, v=0.6, j=0.3, eps=0.1)
    a = mf.multistart_mf(p, n_max=10, n_random=3, seed=42)
    b = mf.multistart_mf(p, n_max=10, n_random=3, seed=42)
    assert a.e_pair == b.e_pair
    assert a.phi_o == b.phi_o and a.rho_e == b.rho_e


def test_multistart_never_beats_atomic_guess():
    rng = np.random.default_rng(7)
    for _ in range(6):
        p = ModelParams(mu=rng.uniform(0.1, 2.5), u=1.0, v=rng.uniform(0, 0.4),
                        j=rng.uniform(0.02, 0.6), eps=rng.uniform(0, 0.3))
        sol = mf.multistart_mf(p, n_max=10, n_random=2, seed=1)
        gs = atomic_ground_occupations(p)
        assert sol.e_pair <= gs.energy_per_pair + 1e-10


def test_rho_ordering_convention():
    p = ModelParams(mu=1.8, u=1.0, v=0.75, j=0.1)
    sol = mf.multistart_mf(p, n_max=10, n_random=2, seed=3)
    assert sol.rho_o >= sol.rho_e


def test_mf_energy_cross_check_coherent_embedding():
    # a coherent local state embedded as LocalStates must reproduce the
    # coherent-ansatz energy per pair of sites
    p = ModelParams(mu=1.0, u=1.0, v=0.75, j=0.1, eps=0.15)
    n_max = 30
    n = np.arange(n_max + 1)
    from scipy.special import gammaln
    for a_o, a_e in ((0.9, 0.45), (0.6, 0.6)):
        def coh(alpha):
            logw = -0.5 * alpha ** 2 + n * np.log(alpha + 1e-300) - 0.5 * gammaln(n + 1.0)
            psi = np.exp(logw)
            return psi / np.linalg.norm(psi)
        sol = mf.MFSolution(coh(a_o), coh(a_e), 0, 0, 0, 0, 0.0, True, 0)
        e_mf = mf.mf_energy_per_pair(sol, p)
        field = np.array([a_o, a_e] * 4, dtype=complex)
        e_coh = coherent.energy(field, p) / 4.0
        assert e_mf == pytest.approx(e_coh, rel=1e-10)


def test_mf_energy_matches_local_hamiltonian_correction():
    # variational energy equals <h_o> + <h_e> with the double-counted
    # mean-field terms added back: e = <h_o>+<h_e> + 2 J (phi_o* phi_e + c.c.)
    # - 2 v rho_o rho_e ... evaluated at the self-consistent point
    p = ModelParams(mu=1.5, u=1.0, v=0.5, j=0.35, eps=0.1)
    sol = mf.multistart_mf(p, n_max=14, n_random=2, seed=5)
    h_o = mf.local_hamiltonian(sol.phi_e, sol.rho_e, p, 14)
    h_e = mf.local_hamiltonian(sol.phi_o, sol.rho_o, p, 14)
    e_loc = (np.conj(sol.psi_o) @ h_o @ sol.psi_o
             + np.conj(sol.psi_e) @ h_e @ sol.psi_e).real
    hop = 2.0 * p.j * 2.0 * np.real(np.conj(sol.phi_o) * sol.phi_e)
    e_expected = e_loc + hop - 2.0 * p.v * sol.rho_o * sol.rho_e
    assert sol.e_pair == pytest.approx(e_expected, abs=1e-8)


@pytest.mark.parametrize("phi,rho,label", [
    ((0.0, 0.0), (2.0, 0.0), "DW"),
    ((0.9, 0.9), (1.0, 1.0), "SF"),
    ((0.9, 0.4), (1.3, 0.6), "SS"),
    ((0.0, 0.0), (1.0, 1.0), "MI"),
])
def test_classify_table(phi, rho, label):
    assert mf.classify_order_parameters(phi[0], phi[1], rho[0], rho[1]) == label


def test_chi_values():
    chi_o, chi_e = mf.chi_pair(1, 1, 0.5, 0.0)
    assert chi_o == pytest.approx(6.0, abs=1e-12)
    assert chi_e == pytest.approx(6.0, abs=1e-12)


def test_chi_vacuum_lobe_extension():
    chi_o, chi_e = mf.chi_pair(0, 0, -0.5, 0.0)
    assert chi_o == pytest.approx(2.0, abs=1e-12)


def test_chi_nonnegative_inside_lobes():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.uniform(0, 1.2)
        if abs(2 * v - 1.0) < 0.05:
            continue
        mu = rng.uniform(0.02, 3.0)
        p = ModelParams(mu=mu, u=1.0, v=v)
        gs = atomic_ground_occupations(p)
        try:
            chi_o, chi_e = mf.chi_pair(gs.n_odd, gs.n_even, mu, v)
        except DegenerateParametersError:
            continue
        assert chi_o >= 0.0 and chi_e >= 0.0


def test_chi_degenerate_denominator():
    # mu/u exactly at a lobe corner: n_o - mu/u + 2 n_e v/u = 0
    with pytest.raises(DegenerateParametersError):
        mf.chi_pair(1, 0, 1.0, 0.3)


def test_critical_hopping_values():
    assert mf.critical_hopping(0.5, ModelParams(mu=0.5, u=1.0)) == \
        pytest.approx(1.0 / 12.0, abs=1e-14)
    x = np.sqrt(2.0) - 1.0
    assert 2.0 * mf.critical_hopping(x, ModelParams(mu=x, u=1.0)) == \
        pytest.approx(3.0 - 2.0 * np.sqrt(2.0), abs=1e-12)


def test_lobe_tip_maximizes_critical_hopping():
    # scan oracle: j_c over the first lobe peaks at mu/u = sqrt(2) - 1
    mus = np.linspace(0.02, 0.98, 481)
    jc = [mf.critical_hopping(m, ModelParams(mu=m, u=1.0)) for m in mus]
    k = int(np.argmax(jc))
    assert mus[k] == pytest.approx(np.sqrt(2.0) - 1.0, abs=2.5e-3)


def test_kappa_sign_flip_around_boundary():
    mu = 0.5
    p0 = ModelParams(mu=mu, u=1.0)
    jc = mf.critical_hopping(mu, p0)
    chi_o, chi_e = mf.chi_pair(1, 1, 0.5, 0.0)
    _, k_below = mf.kappa_pm(jc * 0.95, chi_o, chi_e, 1.0)
    _, k_above = mf.kappa_pm(jc * 1.05, chi_o, chi_e, 1.0)
    assert k_below > 0.0 > k_above
    for delta, phase_group in ((-0.05, "insulating"), (0.05, "superfluid")):
        p = ModelParams(mu=mu, u=1.0, j=jc * (1.0 + delta))
        sol = mf.multistart_mf(p, n_max=10, n_random=2, seed=2)
        label = mf.classify(sol)
        got = "insulating" if label in ("MI", "DW") else "superfluid"
        assert got == phase_group


def test_variational_bound_vs_ed():
    lat = LatticeSpec(sites=4, n_max=6)
    rng = np.random.default_rng(12)
    for _ in range(4):
        p = ModelParams(mu=rng.uniform(0.2, 1.6), u=1.0, v=rng.uniform(0, 0.6),
                        j=rng.uniform(0.05, 0.5), eps=rng.uniform(0, 0.3))
        st, _ = ed.solve_ground(p, lat)
        sol = mf.multistart_mf(p, n_max=12, n_random=2, seed=3)
        assert sol.e_pair * 2.0 >= st.energy - 1e-9
