"""Two-sublattice self-consistent mean field and the analytic insulator/superfluid boundary.

The product ansatz |psi_o> x |psi_e> repeated over the chain turns the
Hamiltonian into two coupled local problems: each sublattice sees the other
only through its order parameters phi = <a> and rho = <n>.  A damped
alternating diagonalization finds the self-consistent pair of local states;
multistart over educated and random initializations picks the lowest-energy
fixed point.

For eps = 0 the insulator/superfluid boundary has a closed form: the
quadratic Landau expansion of the energy in (phi_o, phi_e) has curvature
eigenvalues kappa_+- built from two sublattice susceptibilities chi_o, chi_e,
and the boundary is where kappa_- crosses zero, i.e. j_c = u / (2 sqrt(chi_o chi_e)).
"""

from dataclasses import dataclass

import numpy as np

from ._seeding import as_seed_sequence
from .model import (ModelParams, DegenerateParametersError, ValidationError,
                    atomic_ground_occupations, atomic_energy_per_pair)

PHASE_LABELS = ("MI", "DW", "SF", "SS")


class ConvergenceError(RuntimeError):
    """No self-consistent start converged."""


@dataclass(frozen=True)
class SCFOptions:
    mixing: float = 0.5
    tol_e: float = 1e-10      # energy tolerance, in units of u
    tol_p: float = 1e-8       # order-parameter tolerance
    max_iter: int = 10000
    min_mixing: float = 0.02  # floor for the oscillation fallback


@dataclass
class MFSolution:
    psi_o: np.ndarray
    psi_e: np.ndarray
    phi_o: complex
    phi_e: complex
    rho_o: float
    rho_e: float
    e_pair: float
    converged: bool
    iterations: int


def _lowering(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), 1)


def local_hamiltonian(phi_other, rho_other, params, n_max):
    """Local sublattice Hamiltonian given the other sublattice's order parameters.

    h = -(mu - 2 v rho_other) n - (eps/2)(a^2 + a^dag^2) + (u/2) n(n-1)
        - 2 j (conj(phi_other) a + phi_other a^dag)

    on the Fock levels 0..n_max.  Both sublattices share this form; the
    matrix is kept real symmetric whenever the coherent field is real.
    """
    n = np.arange(n_max + 1, dtype=float)
    phi_other = complex(phi_other)
    dtype = float if phi_other.imag == 0.0 else complex
    h = np.diag(-(params.mu - 2.0 * params.v * rho_other) * n
                + 0.5 * params.u * n * (n - 1.0)).astype(dtype)
    if params.eps != 0.0:
        amp = 0.5 * params.eps * np.sqrt(n[2:] * (n[2:] - 1.0))
        idx = np.arange(n_max - 1)
        h[idx, idx + 2] -= amp
        h[idx + 2, idx] -= amp
    if params.j != 0.0 and phi_other != 0.0:
        sq = np.sqrt(n[1:])
        idx = np.arange(n_max)
        if dtype is complex:
            h[idx, idx + 1] -= 2.0 * params.j * np.conj(phi_other) * sq
            h[idx + 1, idx] -= 2.0 * params.j * phi_other * sq
        else:
            h[idx, idx + 1] -= 2.0 * params.j * phi_other.real * sq
            h[idx + 1, idx] -= 2.0 * params.j * phi_other.real * sq
    return h


def _local_ground(phi_other, rho_other, params, n_max):
    h = local_hamiltonian(phi_other, rho_other, params, n_max)
    w, vecs = np.linalg.eigh(h)
    psi = vecs[:, 0]
    k = np.argmax(np.abs(psi))
    if np.iscomplexobj(psi):
        psi = psi * (np.conj(psi[k]) / abs(psi[k]))  # largest component real positive
    elif psi[k] < 0:
        psi = -psi
    return psi


class _LocalWorkspace:
    """Per-(params, n_max) scratch for the SCF inner loop: cached level arrays
    and the phi-independent part of the local Hamiltonian."""

    def __init__(self, params, n_max):
        self.params = params
        self.n_max = n_max
        self.n = np.arange(n_max + 1, dtype=float)
        self.sq1 = np.sqrt(self.n[1:])
        self.nn1 = self.n * (self.n - 1.0)
        self.idx1 = np.arange(n_max)
        base = np.diag(-params.mu * self.n + 0.5 * params.u * self.nn1)
        if params.eps != 0.0:
            amp = 0.5 * params.eps * np.sqrt(self.nn1[2:])
            idx = np.arange(n_max - 1)
            base[idx, idx + 2] -= amp
            base[idx + 2, idx] -= amp
        self.base = base

    def ground(self, phi_other, rho_other):
        phi_other = complex(phi_other)
        h = self.base.copy() if phi_other.imag == 0.0 else self.base.astype(complex)
        if rho_other != 0.0:
            h[self.n.astype(int), self.n.astype(int)] += \
                2.0 * self.params.v * rho_other * self.n
        if self.params.j != 0.0 and phi_other != 0.0:
            cpl = 2.0 * self.params.j * self.sq1
            if phi_other.imag == 0.0:
                h[self.idx1, self.idx1 + 1] -= phi_other.real * cpl
                h[self.idx1 + 1, self.idx1] -= phi_other.real * cpl
            else:
                h[self.idx1, self.idx1 + 1] -= np.conj(phi_other) * cpl
                h[self.idx1 + 1, self.idx1] -= phi_other * cpl
        vals, vecs = np.linalg.eigh(h)
        psi = vecs[:, 0]
        k = int(np.argmax(np.abs(psi)))
        if np.iscomplexobj(psi):
            psi = psi * (np.conj(psi[k]) / abs(psi[k]))
        elif psi[k] < 0:
            psi = -psi
        return psi

    def moments(self, psi):
        """(phi, rho, <a^2>, <n(n-1)>)."""
        if np.iscomplexobj(psi):
            w = (psi.conj() * psi).real
            cpsi = psi.conj()
        else:
            w = psi * psi
            cpsi = psi
        rho = float(w @ self.n)
        phi = complex((cpsi[:-1] * self.sq1) @ psi[1:])
        a2 = complex((cpsi[:-2] * np.sqrt(self.nn1[2:])) @ psi[2:])
        nn1 = float(w @ self.nn1)
        return phi, rho, a2, nn1


def _moments(psi):
    """(phi, rho, <a^2>, <n(n-1)>) of a local state in one pass."""
    n = np.arange(len(psi), dtype=float)
    w = np.abs(psi) ** 2
    rho = float(np.sum(w * n))
    phi = complex(np.sum(np.conj(psi[:-1]) * np.sqrt(n[1:]) * psi[1:]))
    a2 = complex(np.sum(np.conj(psi[:-2]) * np.sqrt(n[2:] * (n[2:] - 1.0)) * psi[2:]))
    nn1 = float(np.sum(w * n * (n - 1.0)))
    return phi, rho, a2, nn1


def _expectations(psi):
    phi, rho, _, _ = _moments(psi)
    return phi, rho


def _pair_moment(psi):
    """<a^2> of a local state."""
    n = np.arange(len(psi), dtype=float)
    amp = np.sqrt(n[2:] * (n[2:] - 1.0))
    return complex(np.sum(np.conj(psi[:-2]) * amp * psi[2:]))


def _nn1_moment(psi):
    """<n(n-1)> of a local state."""
    n = np.arange(len(psi), dtype=float)
    return float(np.sum(np.abs(psi) ** 2 * n * (n - 1.0)))


def mf_energy_per_pair(sol, params):
    """Exact product-state expectation of the chain Hamiltonian per pair of sites.

    e = -mu (rho_o + rho_e) + (u/2) sum_m <n(n-1)>_m - (eps/2) sum_m (<a^2>_m + c.c.)
        - 2 j (conj(phi_o) phi_e + c.c.) + 2 v rho_o rho_e
    """
    phi_o, rho_o = _expectations(sol.psi_o)
    phi_e, rho_e = _expectations(sol.psi_e)
    e = -params.mu * (rho_o + rho_e)
    e += 0.5 * params.u * (_nn1_moment(sol.psi_o) + _nn1_moment(sol.psi_e))
    e -= 0.5 * params.eps * float(2.0 * (np.real(_pair_moment(sol.psi_o))
                                         + np.real(_pair_moment(sol.psi_e))))
    e -= 2.0 * params.j * float(2.0 * np.real(np.conj(phi_o) * phi_e))
    e += 2.0 * params.v * rho_o * rho_e
    return e


def _energy_from_states(psi_o, psi_e, params):
    return mf_energy_per_pair(MFSolution(psi_o, psi_e, 0, 0, 0, 0, 0.0, False, 0), params)


def _gauge_fix(psi_o, psi_e, params):
    """Rotate the global U(1)/Z2 phase so phi on the odd sublattice is real nonnegative."""
    phi_o, _ = _expectations(psi_o)
    phi_e, _ = _expectations(psi_e)
    ref = phi_o if abs(phi_o) > 1e-12 else phi_e
    if abs(ref) <= 1e-12:
        return psi_o, psi_e
    n = np.arange(len(psi_o), dtype=float)
    if params.eps == 0.0:
        theta = -np.angle(ref)
    else:
        theta = np.pi if ref.real < 0 else 0.0  # pair injection leaves only a sign
    if theta == 0.0:
        return psi_o, psi_e
    rot = np.exp(1j * theta * n)
    return psi_o * rot, psi_e * rot


def scf_solve(params, n_max, init, opts=SCFOptions()):
    """Damped alternating self-consistency loop from one initialization.

    ``init`` is a tuple (phi_o, phi_e, rho_o, rho_e).  Each sweep diagonalizes
    the odd-site Hamiltonian given the even parameters, then the even one
    given the fresh odd parameters, mixing new into old with weight
    ``opts.mixing``; the mixing is halved whenever the energy keeps rising
    (oscillation guard).  Converged means both the energy and every order
    parameter moved less than tolerance over the final sweep.  The reported
    solution carries expectations recomputed exactly from the final states and
    is normalized to rho_o >= rho_e, with the global phase gauge-fixed.
    """
    phi_o, phi_e, rho_o, rho_e = (complex(init[0]), complex(init[1]),
                                  float(init[2]), float(init[3]))
    lam = opts.mixing
    if not 0.0 < lam <= 1.0:
        raise ValidationError("mixing must be in (0, 1]")
    tol_e = opts.tol_e * params.u
    ws = _LocalWorkspace(params, n_max)
    psi_o = psi_e = None
    e_prev = np.inf
    rising = 0
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        psi_o = ws.ground(phi_e, rho_e)
        new_phi_o, new_rho_o, a2_o, nn1_o = ws.moments(psi_o)
        phi_o_mix = (1.0 - lam) * phi_o + lam * new_phi_o
        rho_o_mix = (1.0 - lam) * rho_o + lam * new_rho_o

        psi_e = ws.ground(phi_o_mix, rho_o_mix)
        new_phi_e, new_rho_e, a2_e, nn1_e = ws.moments(psi_e)
        phi_e_mix = (1.0 - lam) * phi_e + lam * new_phi_e
        rho_e_mix = (1.0 - lam) * rho_e + lam * new_rho_e

        delta = max(abs(phi_o_mix - phi_o), abs(phi_e_mix - phi_e),
                    abs(rho_o_mix - rho_o), abs(rho_e_mix - rho_e))
        phi_o, phi_e, rho_o, rho_e = phi_o_mix, phi_e_mix, rho_o_mix, rho_e_mix

        e = (-params.mu * (new_rho_o + new_rho_e)
             + 0.5 * params.u * (nn1_o + nn1_e)
             - params.eps * (a2_o.real + a2_e.real)
             - 4.0 * params.j * (np.conj(new_phi_o) * new_phi_e).real
             + 2.0 * params.v * new_rho_o * new_rho_e)
        if e > e_prev + tol_e:
            rising += 1
            if rising >= 3 and lam > opts.min_mixing:
                lam = max(opts.min_mixing, 0.5 * lam)
                rising = 0
        else:
            rising = 0
        if abs(e - e_prev) < tol_e and delta < opts.tol_p:
            converged = True
            break
        e_prev = e

    psi_o, psi_e = _gauge_fix(psi_o, psi_e, params)
    phi_o, rho_o = _expectations(psi_o)
    phi_e, rho_e = _expectations(psi_e)
    if rho_o < rho_e:
        psi_o, psi_e = psi_e, psi_o
        phi_o, phi_e, rho_o, rho_e = phi_e, phi_o, rho_e, rho_o
    e_pair = _energy_from_states(psi_o, psi_e, params)
    return MFSolution(psi_o, psi_e, phi_o, phi_e, rho_o, rho_e,
                      e_pair, converged, it)


def _educated_inits(params):
    inits = []
    try:
        gs = atomic_ground_occupations(params)
        inits.append((0.0, 0.0, float(gs.n_odd), float(gs.n_even)))
    except DegenerateParametersError:
        k = max(0.0, np.ceil(params.mu / params.u))
        inits.append((0.0, 0.0, k, k))
        inits.append((0.0, 0.0, k, max(0.0, k - 1.0)))
    drive = params.mu + params.eps + 2.0 * params.j
    alpha = np.sqrt(max(drive, 0.0) / (params.u + 2.0 * params.v))
    if alpha == 0.0:
        alpha = 0.1
    inits.append((alpha, alpha, alpha ** 2, alpha ** 2))
    a_o, a_e = 1.5 * alpha, 0.3 * alpha
    inits.append((a_o, a_e, a_o ** 2, a_e ** 2))
    return inits


def multistart_mf(params, n_max, n_random=8, seed=0, opts=SCFOptions()):
    """Best converged SCF solution over educated plus seeded random initializations.

    Educated starts: the atomic pattern, a uniform coherent guess, and a
    staggered coherent guess.  Random starts draw phi with uniform modulus and
    phase and rho uniform, from a generator seeded per start.  Identical seeds
    give identical solutions.

    Raises
    ------
    ConvergenceError
        Only if every start fails to converge.
    """
    inits = _educated_inits(params)
    rng = np.random.default_rng(as_seed_sequence(seed))
    drive = params.mu + params.eps + 2.0 * params.j
    alpha = np.sqrt(max(drive, 0.0) / (params.u + 2.0 * params.v))
    phi_scale = 2.0 * max(1.0, alpha)
    rho_scale = max(2.0, 1.5 * alpha ** 2)
    for _ in range(n_random):
        r = rng.uniform(0.0, phi_scale, size=2)
        th = rng.uniform(0.0, 2.0 * np.pi, size=2)
        rho = rng.uniform(0.0, rho_scale, size=2)
        inits.append((r[0] * np.exp(1j * th[0]), r[1] * np.exp(1j * th[1]),
                      rho[0], rho[1]))
    best = None
    for init in inits:
        sol = scf_solve(params, n_max, init, opts)
        if not sol.converged:
            continue
        if best is None or sol.e_pair < best.e_pair:
            best = sol
    if best is None:
        raise ConvergenceError("no SCF start converged")
    return best


def classify_order_parameters(phi_o, phi_e, rho_o, rho_e, tol_phi=1e-4, tol_rho=1e-4):
    """Phase label from the order-parameter pattern.

    MI: no coherence, uniform density.  DW: no coherence, staggered density.
    SF: coherent, uniform.  SS: coherent, staggered.
    """
    coherent = max(abs(phi_o), abs(phi_e)) > tol_phi
    staggered = abs(rho_o - rho_e) > tol_rho
    if not coherent:
        return "DW" if staggered else "MI"
    return "SS" if staggered else "SF"


def classify(sol, tol_phi=1e-4, tol_rho=1e-4):
    return classify_order_parameters(sol.phi_o, sol.phi_e, sol.rho_o, sol.rho_e,
                                     tol_phi, tol_rho)


def chi_pair(n_o, n_e, mu_over_u, v_over_u):
    """Dimensionless sublattice susceptibilities of the insulating Fock pattern (n_o, n_e).

    chi_o = n_o / (mu/u - 2 n_e v/u + 1 - n_o) + (n_o + 1) / (n_o - mu/u + 2 n_e v/u)

    and o <-> e for chi_e.  Both are nonnegative inside a lobe; a vanishing
    denominator marks a lobe corner, where the expressions are undefined.
    """
    out = []
    for na, nb in ((n_o, n_e), (n_e, n_o)):
        d1 = mu_over_u - 2.0 * nb * v_over_u + 1.0 - na
        d2 = na - mu_over_u + 2.0 * nb * v_over_u
        if abs(d1) < 1e-14 or abs(d2) < 1e-14:
            raise DegenerateParametersError(
                "susceptibility denominator vanishes (lobe corner)")
        out.append(na / d1 + (na + 1.0) / d2)
    return out[0], out[1]


def kappa_pm(j, chi_o, chi_e, u):
    """Curvature eigenvalues of the Landau expansion around phi = 0 at hopping j."""
    root = np.sqrt((chi_e - chi_o) ** 2 + 16.0 * j ** 2 * chi_o ** 2 * chi_e ** 2 / u ** 2)
    pref = 2.0 * j ** 2 / u
    return pref * (chi_e + chi_o + root), pref * (chi_e + chi_o - root)


def critical_hopping(mu, params):
    """Hopping j_c where the insulating solution destabilizes, for eps = 0.

    j_c = u / (2 sqrt(chi_o chi_e)) with occupations taken from the atomic
    limit at chemical potential ``mu``.  Valid only for eps = 0, where the
    Landau expansion holds.
    """
    if params.eps != 0.0:
        raise ValidationError("analytic boundary requires eps = 0")
    p = ModelParams(mu=mu, u=params.u, v=params.v, j=0.0, eps=0.0)
    gs = atomic_ground_occupations(p)
    chi_o, chi_e = chi_pair(gs.n_odd, gs.n_even, mu / params.u, params.v / params.u)
    return params.u / (2.0 * np.sqrt(chi_o * chi_e))
