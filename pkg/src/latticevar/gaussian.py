"""Pure Gaussian-state variational ansatz in the quadrature representation.

Conventions
-----------
Quadratures x_j = a_j^dag + a_j and p_j = i (a_j^dag - a_j) are stacked as
r = (x_1..x_L, p_1..p_L), so [r_m, r_n] = 2i Omega_mn with

    Omega = [[0, I], [-I, 0]].

A state is a real mean vector d = <r> (length 2L) and a real symmetric
covariance matrix V_mn = <dr_m dr_n + dr_n dr_m>/2 (2L x 2L), with
<dr_m dr_n> = V_mn + i Omega_mn.  Vacuum has V = I; a pure state satisfies
(V Omega)^2 = -I, equivalently V = S S^T for symplectic S.  Coherent
amplitudes alpha map to d_j = 2 Re alpha_j, d_{L+j} = 2 Im alpha_j at V = I.

Every expectation value reduces to pairings of second moments (Gaussian
moment theorem); the chain energy is quartic in the quadratures and is
evaluated both through the generic pairing engine (``energy_via_moments``,
the reference path) and through an explicit closed form (``energy``) with
matching analytic gradients.  The imaginary-time flow

    d'   = -2 V (dE/dd)
    V'   = 4 Omega^T (dE/dV) Omega - 4 V (dE/dV) V

descends the energy on the pure-Gaussian manifold; numerical purity drift is
monitored through max|(V Omega)^2 + I| and repaired by a Williamson
projection (set all symplectic eigenvalues back to 1).

The staggered-density moments behind the Binder cumulant are eighth-order
quadrature polynomials; they are evaluated exactly via quadratic-form trace
identities (cost: a handful of (2L)^3 matrix products), cross-checked against
the pairing engine in the tests.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import coherent as _coherent
from ._seeding import as_seed_sequence
from .analysis import DegenerateMomentError, binder_from_moments
from .coherent import StepCollapseError
from .model import ValidationError


class PurityProjectionError(RuntimeError):
    """Williamson re-projection failed to restore purity below tolerance."""


@dataclass(frozen=True)
class GaussianFlowOptions:
    step: float = 0.02
    grad_tol: float = 1e-8      # flow-velocity max-norm at termination
    max_steps: int = 100000
    purity_tol: float = 1e-6    # defect ceiling; reprojection kicks in at a tenth of it


@dataclass
class GaussianPureState:
    d: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        if self.d.ndim != 1 or self.d.size % 2:
            raise ValidationError("mean vector must have even length 2L")
        if self.cov.shape != (self.d.size, self.d.size):
            raise ValidationError("covariance must be 2L x 2L")

    @property
    def sites(self):
        return self.d.size // 2

    def copy(self):
        return GaussianPureState(self.d.copy(), self.cov.copy())


def symplectic_form(sites):
    eye = np.eye(sites)
    return np.block([[np.zeros((sites, sites)), eye],
                     [-eye, np.zeros((sites, sites))]])


def vacuum(sites):
    """Vacuum state: zero means, identity covariance."""
    return GaussianPureState(np.zeros(2 * sites), np.eye(2 * sites))


def from_coherent(alpha):
    """Embed a coherent amplitude configuration: identity covariance, displaced means."""
    alpha = np.asarray(alpha, dtype=complex)
    d = np.concatenate([2.0 * alpha.real, 2.0 * alpha.imag])
    return GaussianPureState(d, np.eye(2 * alpha.size))


def haar_interferometer(sites, rng):
    """Orthogonal symplectic K = [[X, -Y], [Y, X]] from a Haar-random unitary X + iY."""
    z = rng.normal(size=(sites, sites)) + 1j * rng.normal(size=(sites, sites))
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))[None, :]
    x, y = q.real, q.imag
    return np.block([[x, -y], [y, x]])


def random_pure(sites, squeeze_bound=1.0, seed=0, mean_scale=1.0):
    """Random pure state: V = K^T D K with D single-mode squeezers, K a random interferometer.

    Squeezing parameters are uniform in [0, squeeze_bound]; means are normal
    with standard deviation ``mean_scale``.  Bitwise reproducible per seed.
    """
    if squeeze_bound < 0:
        raise ValidationError("squeeze_bound must be nonnegative")
    rng = np.random.default_rng(as_seed_sequence(seed))
    r = rng.uniform(0.0, squeeze_bound, size=sites)
    dd = np.concatenate([np.exp(-2.0 * r), np.exp(2.0 * r)])
    k = haar_interferometer(sites, rng)
    cov = k.T @ np.diag(dd) @ k
    cov = 0.5 * (cov + cov.T)
    d = rng.normal(scale=mean_scale, size=2 * sites) if mean_scale > 0 else np.zeros(2 * sites)
    return GaussianPureState(d, cov)


def purity_defect(state):
    """max|(V Omega)^2 + I|; exactly zero for pure states."""
    vo = state.cov @ symplectic_form(state.sites)
    return float(np.max(np.abs(vo @ vo + np.eye(2 * state.sites))))


def physicality_defect(state):
    """Most negative eigenvalue of V + i Omega, clipped at zero for physical states."""
    w = np.linalg.eigvalsh(state.cov + 1j * symplectic_form(state.sites))
    return float(max(0.0, -w.min()))


# ---------------------------------------------------------------------------
# Wick pairing engine

def central_moment(state, indices):
    """<dr_{i1} dr_{i2} ... dr_{iK}> by the Gaussian moment theorem, K <= 8.

    Exactly zero for odd K; for even K the sum over the (K-1)!! pairings of
    pair values <dr_m dr_n> = V_mn + i Omega_mn, the first factor of each
    pair being the earlier one in the original operator order.
    """
    idx = list(indices)
    k = len(idx)
    if k > 8:
        raise ValidationError("moment order above 8 is not supported")
    n2 = state.d.size
    if any(i < 0 or i >= n2 for i in idx):
        raise ValidationError("quadrature index out of range")
    if k % 2:
        return 0j
    if k == 0:
        return 1 + 0j
    m = state.cov + 1j * symplectic_form(state.sites)

    def paired(rest):
        if not rest:
            return 1 + 0j
        first, tail = rest[0], rest[1:]
        total = 0j
        for pos in range(len(tail)):
            total += m[idx[first], idx[tail[pos]]] * paired(tail[:pos] + tail[pos + 1:])
        return total

    return paired(tuple(range(k)))


def raw_moment(state, indices):
    """<r_{i1} ... r_{iK}> with mean shifts: sum over even-size subsets of centrals."""
    idx = list(indices)
    k = len(idx)
    total = 0j
    for mask in range(1 << k):
        sub = [p for p in range(k) if mask >> p & 1]
        if len(sub) % 2:
            continue
        mean_part = 1.0
        for p in range(k):
            if not mask >> p & 1:
                mean_part *= state.d[idx[p]]
        if mean_part == 0.0:
            continue
        total += mean_part * central_moment(state, [idx[p] for p in sub])
    return total


def energy_via_moments(state, params):
    """Chain energy evaluated term by term through the pairing engine (reference path)."""
    L = state.sites
    total = 0j
    for j in range(L):
        l = (j + 1) % L
        xj, pj, xl, pl = j, L + j, l, L + l
        x2 = raw_moment(state, [xj, xj])
        p2 = raw_moment(state, [pj, pj])
        n_j = (x2 + p2 - 2.0) / 4.0
        n2_j = (raw_moment(state, [xj] * 4) + raw_moment(state, [xj, xj, pj, pj])
                + raw_moment(state, [pj, pj, xj, xj]) + raw_moment(state, [pj] * 4)
                - 4.0 * x2 - 4.0 * p2 + 4.0) / 16.0
        pair_j = (x2 - p2) / 2.0
        hop_j = (raw_moment(state, [xj, xl]) + raw_moment(state, [pj, pl])) / 2.0
        xl2 = raw_moment(state, [xl, xl])
        pl2 = raw_moment(state, [pl, pl])
        nn_j = (raw_moment(state, [xj, xj, xl, xl]) + raw_moment(state, [xj, xj, pl, pl])
                + raw_moment(state, [pj, pj, xl, xl]) + raw_moment(state, [pj, pj, pl, pl])
                - 2.0 * (x2 + p2 + xl2 + pl2) + 4.0) / 16.0
        total += (-params.mu * n_j + 0.5 * params.u * (n2_j - n_j)
                  - 0.5 * params.eps * pair_j - params.j * hop_j
                  + params.v * nn_j)
    assert abs(total.imag) < 1e-9 * max(1.0, abs(total.real))
    return float(total.real)


# ---------------------------------------------------------------------------
# Closed-form energy and gradients

def _blocks(state):
    L = state.sites
    x, p = state.d[:L], state.d[L:]
    a_xx = state.cov[:L, :L]
    b_pp = state.cov[L:, L:]
    c_xp = state.cov[:L, L:]
    return x, p, a_xx, b_pp, c_xp


def _bond_entries(a_xx, b_pp, c_xp):
    L = a_xx.shape[0]
    j = np.arange(L)
    l = (j + 1) % L
    return a_xx[j, l], b_pp[j, l], c_xp[j, l], c_xp[l, j], j, l


def energy(state, params):
    """Closed-form E(d, V); agrees with ``energy_via_moments`` to machine precision."""
    x, p, a_xx, b_pp, c_xp = _blocks(state)
    a, b, c = np.diagonal(a_xx), np.diagonal(b_pp), np.diagonal(c_xp)
    rho = (a + b + x ** 2 + p ** 2 - 2.0) / 4.0
    axx, bpp, cxp, cpx, j_, l_ = _bond_entries(a_xx, b_pp, c_xp)
    xn, pn = np.roll(x, -1), np.roll(p, -1)
    rho_n = np.roll(rho, -1)

    quart = (a * a + b * b + 2.0 * c * c + 2.0 * a * x ** 2 + 2.0 * b * p ** 2
             + 4.0 * x * p * c - 2.0) / 8.0
    hop = axx + bpp + x * xn + p * pn
    nn = (rho * rho_n + (axx ** 2 + cxp ** 2 + cpx ** 2 + bpp ** 2) / 8.0
          + (x * xn * axx + x * pn * cxp + p * xn * cpx + p * pn * bpp) / 4.0)

    return float(-params.mu * rho.sum()
                 - 0.25 * params.eps * np.sum(a - b + x ** 2 - p ** 2)
                 - 0.5 * params.j * hop.sum()
                 + 0.5 * params.u * np.sum(rho ** 2 - rho + quart)
                 + params.v * nn.sum())


def gradients(state, params):
    """Analytic (dE/dd, dE/dV); the covariance gradient is symmetric.

    Convention: dE = sum_mn G_mn dV_mn for symmetric perturbations dV, so the
    two entries of an off-diagonal pair each carry half of the derivative
    with respect to that matrix element.
    """
    L = state.sites
    x, p, a_xx, b_pp, c_xp = _blocks(state)
    a, b, c = np.diagonal(a_xx), np.diagonal(b_pp), np.diagonal(c_xp)
    rho = (a + b + x ** 2 + p ** 2 - 2.0) / 4.0
    axx, bpp, cxp, cpx, j_, l_ = _bond_entries(a_xx, b_pp, c_xp)
    xn, pn = np.roll(x, -1), np.roll(p, -1)
    xm, pm = np.roll(x, 1), np.roll(p, 1)

    # coefficient of d(rho_j): chemical potential, on-site quartic, both neighbor bonds
    drho = (-params.mu + 0.5 * params.u * (2.0 * rho - 1.0)
            + params.v * (np.roll(rho, -1) + np.roll(rho, 1)))

    gx = (drho * x / 2.0
          - 0.5 * params.eps * x
          - 0.5 * params.j * (xn + xm)
          + 0.25 * params.u * (a * x + p * c)
          + 0.25 * params.v * (xn * axx + pn * cxp)
          + 0.25 * params.v * (xm * np.roll(axx, 1) + pm * np.roll(cpx, 1)))
    gp = (drho * p / 2.0
          + 0.5 * params.eps * p
          - 0.5 * params.j * (pn + pm)
          + 0.25 * params.u * (b * p + x * c)
          + 0.25 * params.v * (xn * cpx + pn * bpp)
          + 0.25 * params.v * (xm * np.roll(cxp, 1) + pm * np.roll(bpp, 1)))
    gd = np.concatenate([gx, gp])

    gv = np.zeros((2 * L, 2 * L))
    s = np.arange(L)
    gv[s, s] = drho / 4.0 - 0.25 * params.eps + 0.125 * params.u * (a + x ** 2)
    gv[L + s, L + s] = drho / 4.0 + 0.25 * params.eps + 0.125 * params.u * (b + p ** 2)
    half_c = 0.125 * params.u * (c + x * p)
    gv[s, L + s] = half_c
    gv[L + s, s] = half_c

    t_xx = 0.5 * (-0.5 * params.j + 0.25 * params.v * (axx + x * xn))
    t_pp = 0.5 * (-0.5 * params.j + 0.25 * params.v * (bpp + p * pn))
    t_xp = 0.5 * (0.25 * params.v * (cxp + x * pn))
    t_px = 0.5 * (0.25 * params.v * (cpx + p * xn))
    np.add.at(gv, (j_, l_), t_xx)
    np.add.at(gv, (l_, j_), t_xx)
    np.add.at(gv, (L + j_, L + l_), t_pp)
    np.add.at(gv, (L + l_, L + j_), t_pp)
    np.add.at(gv, (j_, L + l_), t_xp)
    np.add.at(gv, (L + l_, j_), t_xp)
    np.add.at(gv, (L + j_, l_), t_px)
    np.add.at(gv, (l_, L + j_), t_px)
    return gd, gv


# ---------------------------------------------------------------------------
# Williamson decomposition and purity repair

def williamson(cov):
    """Symplectic eigenvalues and matrix: cov = S diag(nu, nu) S^T, S Omega S^T = Omega."""
    n2 = cov.shape[0]
    sites = n2 // 2
    omega = symplectic_form(sites)
    mhalf = scipy.linalg.sqrtm(cov).real
    w = mhalf @ omega @ mhalf
    t, q = scipy.linalg.schur(w, output="real")
    # Schur form of an antisymmetric matrix: 2x2 blocks [[0, nu], [-nu, 0]],
    # interleaved ordering; make every nu positive then split x/p planes.
    for k in range(sites):
        if t[2 * k, 2 * k + 1] < 0:
            q[:, [2 * k, 2 * k + 1]] = q[:, [2 * k + 1, 2 * k]]
            t[:, [2 * k, 2 * k + 1]] = t[:, [2 * k + 1, 2 * k]]
            t[[2 * k, 2 * k + 1], :] = t[[2 * k + 1, 2 * k], :]
    nu = np.array([t[2 * k, 2 * k + 1] for k in range(sites)])
    order = np.concatenate([2 * np.arange(sites), 2 * np.arange(sites) + 1])
    qt = q[:, order]
    dinv_half = np.diag(np.concatenate([nu, nu]) ** -0.5)
    s = mhalf @ qt @ dinv_half
    return nu, s


def project_to_pure(state):
    """Closest pure covariance in the Williamson sense: squash symplectic eigenvalues to 1."""
    nu, s = williamson(state.cov)
    cov = s @ s.T
    return GaussianPureState(state.d.copy(), 0.5 * (cov + cov.T))


# ---------------------------------------------------------------------------
# Imaginary-time flow

def flow_velocity(state, params):
    """(d', V') of the pure-state imaginary-time flow."""
    gd, gv = gradients(state, params)
    omega = symplectic_form(state.sites)
    vd = -2.0 * state.cov @ gd
    vv = 4.0 * omega.T @ gv @ omega - 4.0 * state.cov @ gv @ state.cov
    return vd, vv


def flow_relax(state0, params, opts=GaussianFlowOptions()):
    """Integrate the imaginary-time flow until the velocity max-norm drops below tolerance.

    Projected integrator: after each RK4 proposal the purity defect is
    checked, and if it exceeds a tenth of ``opts.purity_tol`` the covariance
    is re-projected onto the pure manifold (Williamson eigenvalues squashed
    to 1) before the step is judged.  A step is accepted only if the repaired
    state does not raise the energy (1e-12 relative slack); otherwise the
    step is halved, growing back after a run of accepted steps.  Every state
    on the accepted trajectory therefore satisfies the purity bound and the
    energy is non-increasing.  Returns (state, energy, info) with the peak
    accepted defect and step count in ``info``.
    """
    if opts.step <= 0 or opts.grad_tol <= 0 or opts.max_steps <= 0:
        raise ValidationError("flow options must be positive")
    defect_cap = opts.purity_tol / 10.0
    state = state0.copy()
    if purity_defect(state) > defect_cap:
        state = project_to_pure(state)
    e = energy(state, params)
    h = opts.step
    streak = 0
    max_defect = purity_defect(state)
    steps = 0
    vnorm = np.inf

    def rk4(d, cov, h):
        k1d, k1v = flow_velocity(GaussianPureState(d, cov), params)
        k2d, k2v = flow_velocity(GaussianPureState(d + 0.5 * h * k1d, cov + 0.5 * h * k1v), params)
        k3d, k3v = flow_velocity(GaussianPureState(d + 0.5 * h * k2d, cov + 0.5 * h * k2v), params)
        k4d, k4v = flow_velocity(GaussianPureState(d + h * k3d, cov + h * k3v), params)
        dn = d + (h / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        vn = cov + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        return dn, 0.5 * (vn + vn.T)

    for steps in range(1, opts.max_steps + 1):
        vd, vv = flow_velocity(state, params)
        vnorm = max(np.max(np.abs(vd)), np.max(np.abs(vv)))
        if vnorm < opts.grad_tol:
            break
        while True:
            ok = True
            dn, covn = rk4(state.d, state.cov, h)
            cand = GaussianPureState(dn, covn)
            defect = purity_defect(cand)
            if defect > defect_cap:
                try:
                    cand = project_to_pure(cand)
                    defect = purity_defect(cand)
                except np.linalg.LinAlgError:
                    ok = False
                if ok and defect > defect_cap:
                    raise PurityProjectionError(
                        "projection left purity defect above tolerance")
            if ok:
                e_new = energy(cand, params)
                if e_new <= e + 1e-12 * abs(e):
                    break
            h *= 0.5
            if h < 1e-14:
                raise StepCollapseError(
                    f"flow step collapsed below 1e-14 at velocity norm {vnorm:.3e}")
        state, e = cand, e_new
        max_defect = max(max_defect, defect)
        streak += 1
        if h < opts.step and streak >= 16:
            h = min(opts.step, 2.0 * h)
            streak = 0
    return state, e, {"velocity_norm": float(vnorm), "steps": steps,
                      "max_purity_defect": float(max_defect)}


def multistart_flow(params, sites, n_random=16, seed=0, opts=GaussianFlowOptions(),
                    coherent_starts=4):
    """Lowest flow attractor over educated starts (vacuum, best coherent embedding)
    plus seeded random pure states.  Returns (state, energy)."""
    seq = as_seed_sequence(seed)
    coh_seed, rand_seq = seq.spawn(2)
    starts = [vacuum(sites)]
    field, _ = _coherent.multistart_ground(
        params, sites, n_starts=max(1, coherent_starts), seed=coh_seed,
        opts=_coherent.FlowOptions(grad_tol=1e-8))
    starts.append(from_coherent(field))
    drive = params.mu + params.eps + 2.0 * params.j
    alpha_sf = np.sqrt(max(drive, 0.0) / (params.u + 2.0 * params.v))
    scale = 2.0 * max(0.5, alpha_sf)
    for child in rand_seq.spawn(n_random):
        starts.append(random_pure(sites, squeeze_bound=1.0, seed=child, mean_scale=scale))
    best, best_e = None, np.inf
    for s0 in starts:
        s, e, _ = flow_relax(s0, params, opts)
        if e < best_e:
            best, best_e = s, e
    return best, best_e


# ---------------------------------------------------------------------------
# Staggered-density moments and Binder cumulant

def phi_moments(state):
    """Raw moments (<phi>, <phi^2>, <phi^4>) of phi = sum_l (n_{odd l} - n_{even l}).

    With the alternating sign vector s (whose sum vanishes on an even chain)
    phi = (1/4) r^T F r exactly, F = diag(s, s).  Writing W = 4 phi as a
    quadratic-plus-linear form in the fluctuations, the central moments <Q^k>
    follow from cycle and chain Wick diagrams with pair matrix M = V + i Omega:

        <Q^2> = 2 tr[(FM)(FM^T)] + g^T V g
        <Q^3> = 8 tr[(FM)(FM)(FM^T)]
                + 2 g^T (M^T F M + M F M + M F M^T) g
        <Q^4> = 12 tr2^2 + 16 (tr[FMFMFMFM^T] + tr[FMFMFM^T FM^T] + tr[FMFM^T FMFM^T])
                + 12 tr2 g^T V g + 4 g^T (chain sum) g + 3 (g^T V g)^2

    with g = 2 F d and tr2 = tr[(FM)(FM^T)]; the chain sum enumerates the
    twelve time-orderings of a linear-quadratic-quadratic-linear contraction.
    Raw moments then follow from the binomial shift by <W>.
    """
    L = state.sites
    s = np.where(np.arange(L) % 2 == 0, 1.0, -1.0)
    f = np.concatenate([s, s])
    cov = state.cov
    d = state.d
    omega = symplectic_form(L)
    m = cov + 1j * omega
    mt = m.T
    g = 2.0 * f * d

    fm = f[:, None] * m
    fmt = f[:, None] * mt

    m1 = float(np.sum(f * np.diagonal(cov)) + d @ (f * d))

    gvg = float(g @ cov @ g)
    tr2 = np.trace(fm @ fmt)
    c2 = 2.0 * tr2 + gvg

    tr3 = np.trace(fm @ fm @ fmt)
    lin3 = g @ (mt @ fm + m @ fm + m @ fmt) @ g
    c3 = 8.0 * tr3 + 2.0 * lin3

    fm2 = fm @ fm
    tr4 = (np.trace(fm2 @ fm @ fmt) + np.trace(fm2 @ fmt @ fmt)
           + np.trace(fm @ fmt @ fm @ fmt))
    chain = (2.0 * (mt @ fm @ fm) + (mt @ fmt @ fm) + 4.0 * (m @ fmt @ fm)
             + (mt @ fm @ fmt) + (m @ fm @ fm) + 2.0 * (m @ fm @ fmt)
             + (m @ fmt @ fmt))
    c4 = (12.0 * tr2 ** 2 + 16.0 * tr4 + 12.0 * tr2 * gvg
          + 4.0 * (g @ chain @ g) + 3.0 * gvg ** 2)

    c2, c3, c4 = (complex(c2), complex(c3), complex(c4))
    assert max(abs(c2.imag), abs(c3.imag), abs(c4.imag)) < 1e-8 * max(
        1.0, abs(c2.real), abs(c4.real))
    w2 = m1 ** 2 + c2.real
    w4 = m1 ** 4 + 6.0 * m1 ** 2 * c2.real + 4.0 * m1 * c3.real + c4.real
    return m1 / 4.0, w2 / 16.0, w4 / 256.0


def phi_moments_direct(state):
    """Pairing-engine evaluation of the same moments (small lattices; test reference)."""
    L = state.sites
    f = np.concatenate([np.where(np.arange(L) % 2 == 0, 1.0, -1.0)] * 2)
    diag_idx = np.arange(2 * L)
    w1 = sum(f[i] * raw_moment(state, [i, i]) for i in diag_idx)
    w2 = sum(f[i] * f[j] * raw_moment(state, [i, i, j, j])
             for i in diag_idx for j in diag_idx)
    w4 = sum(f[i] * f[j] * f[k] * f[l] * raw_moment(state, [i, i, j, j, k, k, l, l])
             for i in diag_idx for j in diag_idx for k in diag_idx for l in diag_idx)
    return w1.real / 4.0, w2.real / 16.0, w4.real / 256.0


def binder_dw(state):
    """Binder cumulant of the staggered-density operator on the state's own lattice."""
    _, phi2, phi4 = phi_moments(state)
    if phi2 < 1e-12:
        raise DegenerateMomentError("staggered-density variance vanishes (Binder undefined)")
    return binder_from_moments(phi2, phi4)
