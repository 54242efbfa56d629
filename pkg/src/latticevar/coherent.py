"""Coherent-product variational ansatz: closed-form minima and imaginary-time flow.

One complex amplitude per site.  The variational energy is a quartic
polynomial in the amplitudes; its stationary points include, in closed form,
the trivial configuration, a uniform superfluid-like solution and a staggered
supersolid-like solution.  Two reduced parameters organize everything:

    nu = (mu + eps) / (2 j)        a = nu (2 v / u - 1)

The staggered solution exists for a >= 2 (equivalently mu >= 4 j /(2v/u - 1) - eps,
requiring 2v > u) with amplitude ratio r solving 1 + r^2 - a r = 0, and its
energy never exceeds the uniform one on its domain.  Minima beyond the closed
forms are hunted by integrating the Wirtinger gradient descent
d(alpha)/d(tau) = -dE/d(conj alpha), whose fixed points are exactly the
stationarity conditions; energy never increases along accepted steps.

A two-species variant couples two amplitudes per site through the pair term
eps (a_j b_j + h.c.), restoring a continuous relative-phase symmetry; balanced
configurations reduce to the single-species problem at twice the energy.
"""

from dataclasses import dataclass

import numpy as np

from ._seeding import as_seed_sequence
from .model import ValidationError


class StepCollapseError(RuntimeError):
    """Adaptive step shrank below 1e-14 without meeting the gradient tolerance."""


@dataclass(frozen=True)
class FlowOptions:
    step: float = 0.05
    grad_tol: float = 1e-10
    max_steps: int = 10 ** 6


@dataclass(frozen=True)
class AnalyticCoherentSolution:
    kind: str        # "trivial" | "uniform" | "staggered"
    alpha: float
    r: float
    energy: float    # total energy for the lattice size it was built for
    nu: float
    a: float


@dataclass(frozen=True)
class TwoModeSolution:
    kind: str        # "trivial" | "uniform" | "staggered" | "unbalanced"
    alphas: np.ndarray
    betas: np.ndarray
    energy: float


def _check_field(alpha):
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.ndim != 1 or len(alpha) < 4 or len(alpha) % 2:
        raise ValidationError("amplitude vector must have even length ≥ 4")
    if not np.all(np.isfinite(alpha)):
        raise ValidationError("amplitudes must be finite")
    return alpha


def energy(alpha, params):
    """Variational energy of the amplitude configuration, periodic bonds.

    E = sum_j [ -mu |a_j|^2 - 2 j Re(a_j conj a_{j+1}) - eps Re(a_j^2)
                + (u/2) |a_j|^4 + v |a_j|^2 |a_{j+1}|^2 ]
    """
    alpha = _check_field(alpha)
    n = np.abs(alpha) ** 2
    nxt = np.roll(alpha, -1)
    return float(np.sum(-params.mu * n
                        - 2.0 * params.j * np.real(alpha * np.conj(nxt))
                        - params.eps * np.real(alpha ** 2)
                        + 0.5 * params.u * n ** 2
                        + params.v * n * np.roll(n, -1)))


def gradient(alpha, params):
    """Wirtinger derivative dE/d(conj alpha_j); zero exactly at stationary configurations."""
    alpha = _check_field(alpha)
    n = np.abs(alpha) ** 2
    neigh_n = np.roll(n, -1) + np.roll(n, 1)
    neigh_a = np.roll(alpha, -1) + np.roll(alpha, 1)
    return ((-params.mu + params.u * n + params.v * neigh_n) * alpha
            - params.eps * np.conj(alpha)
            - params.j * neigh_a)


def reduced_parameters(params):
    """(nu, a) with nu = (mu+eps)/(2j) and a = nu (2v/u - 1); infinities at j = 0."""
    drive = params.mu + params.eps
    w = 2.0 * params.v / params.u
    if params.j > 0.0:
        nu = drive / (2.0 * params.j)
    else:
        nu = np.inf if drive > 0.0 else 0.0
    return nu, nu * (w - 1.0)


def analytic_solutions(params, sites):
    """Closed-form stationary configurations, sorted ascending by total energy.

    Always contains the trivial configuration.  The uniform one is included
    when mu + eps + 2j >= 0 with amplitude alpha^2 = (mu+eps+2j)/(u+2v) and
    energy -2 L j^2 (nu+1)^2 / (u+2v).  The staggered one is included when
    a >= 2 and 2v > u, with 2r = a - sqrt(a^2 - 4) and energy
    -(L j^2 / u)(nu^2 + 2/(2v/u - 1)).
    """
    if sites < 4 or sites % 2:
        raise ValidationError("sites must be even and ≥ 4")
    nu, a = reduced_parameters(params)
    w = 2.0 * params.v / params.u
    out = [AnalyticCoherentSolution("trivial", 0.0, 1.0, 0.0, nu, a)]

    drive = params.mu + params.eps + 2.0 * params.j
    if drive >= 0.0:
        alpha_sf = np.sqrt(drive / (params.u + 2.0 * params.v))
        e_sf = -0.5 * sites * drive ** 2 / (params.u + 2.0 * params.v)
        out.append(AnalyticCoherentSolution("uniform", alpha_sf, 1.0, e_sf, nu, a))

    if a >= 2.0 and w > 1.0:
        r = 0.5 * (a - np.sqrt(a * a - 4.0)) if np.isfinite(a) else 0.0
        alpha_ss = np.sqrt((params.mu + params.eps + 2.0 * r * params.j)
                           / (params.u + 2.0 * r * r * params.v))
        # j^2 nu^2 = (mu+eps)^2 / 4 stays finite as j -> 0
        e_ss = -(sites / params.u) * (0.25 * (params.mu + params.eps) ** 2
                                      + 2.0 * params.j ** 2 / (w - 1.0))
        out.append(AnalyticCoherentSolution("staggered", alpha_ss, r, e_ss, nu, a))

    out.sort(key=lambda s: s.energy)
    return out


def solution_field(sol, sites):
    """Amplitude vector realizing an analytic solution on a chain of given size."""
    alpha = np.full(sites, sol.alpha, dtype=complex)
    if sol.kind == "staggered":
        alpha[1::2] *= sol.r
    elif sol.kind == "trivial":
        alpha[:] = 0.0
    return alpha


def ss_boundary_mu(params):
    """Critical chemical potential of the uniform/staggered transition.

    mu_c = 4 j / (2v/u - 1) - eps, defined only for 2v/u > 1 (returns None
    otherwise).
    """
    w = 2.0 * params.v / params.u
    if w <= 1.0:
        return None
    return 4.0 * params.j / (w - 1.0) - params.eps


def _rk4_flow(y0, grad_fn, energy_fn, opts):
    """Energy-monotone RK4 descent shared by the one- and two-species flows.

    The step is halved whenever a proposed step raises the energy (beyond a
    1e-12 relative slack) and relaxes back toward the nominal step after a run
    of accepted steps.  Terminates when the gradient max-norm drops below
    ``opts.grad_tol``.
    """
    if opts.step <= 0 or opts.grad_tol <= 0 or opts.max_steps <= 0:
        raise ValidationError("flow options must be positive")
    y = y0.copy()
    e = energy_fn(y)
    h = opts.step
    streak = 0
    for _ in range(opts.max_steps):
        g1 = grad_fn(y)
        gn = np.max(np.abs(g1))
        if gn < opts.grad_tol:
            return y, e, gn
        while True:
            k1 = -g1
            k2 = -grad_fn(y + 0.5 * h * k1)
            k3 = -grad_fn(y + 0.5 * h * k2)
            k4 = -grad_fn(y + h * k3)
            y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            e_new = energy_fn(y_new)
            if e_new <= e + 1e-12 * abs(e):
                break
            h *= 0.5
            if h < 1e-14:
                raise StepCollapseError(
                    f"step collapsed below 1e-14 at gradient norm {gn:.3e}")
        y, e = y_new, e_new
        streak += 1
        if h < opts.step and streak >= 16:
            h = min(opts.step, 2.0 * h)
            streak = 0
    g = grad_fn(y)
    return y, e, float(np.max(np.abs(g)))


def relax(alpha0, params, opts=FlowOptions()):
    """Integrate the imaginary-time flow d(alpha)/d(tau) = -dE/d(conj alpha).

    Returns (field, energy, gradient max-norm).  Energy is non-increasing
    across accepted steps; raises StepCollapseError if the adaptive step
    underflows before reaching the tolerance.
    """
    alpha0 = _check_field(alpha0)
    return _rk4_flow(alpha0,
                     lambda y: gradient(y, params),
                     lambda y: energy(y, params),
                     opts)


def _batched_descent(y0, grad_fn, energy_fn, opts):
    """Row-parallel variant of the RK4 descent: one adaptive step per row.

    ``grad_fn``/``energy_fn`` act row-wise on an (n, m) array.  Rows freeze
    once their gradient max-norm drops below tolerance; rows whose step
    collapses freeze at their current (monotonically descended) iterate.
    Returns (Y, E) with per-row energies.
    """
    y = y0.copy()
    e = energy_fn(y)
    n = y.shape[0]
    h = np.full(n, opts.step)
    streak = np.zeros(n, dtype=int)
    active = np.ones(n, dtype=bool)
    for _ in range(opts.max_steps):
        g = grad_fn(y)
        gn = np.max(np.abs(g), axis=1)
        active &= gn >= opts.grad_tol
        if not active.any():
            break
        hh = np.where(active, h, 0.0)[:, None]
        k1 = -g
        k2 = -grad_fn(y + 0.5 * hh * k1)
        k3 = -grad_fn(y + 0.5 * hh * k2)
        k4 = -grad_fn(y + hh * k3)
        y_new = y + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        e_new = energy_fn(y_new)
        accept = active & (e_new <= e + 1e-12 * np.abs(e))
        reject = active & ~accept
        y[accept] = y_new[accept]
        e[accept] = e_new[accept]
        streak[accept] += 1
        h[reject] *= 0.5
        streak[reject] = 0
        collapsed = reject & (h < 1e-14)
        active &= ~collapsed
        grow = accept & (h < opts.step) & (streak >= 16)
        h[grow] = np.minimum(opts.step, 2.0 * h[grow])
        streak[grow] = 0
    return y, e


def random_field(params, sites, rng):
    """Random start: modulus uniform in [0, 2 max(1, alpha_uniform)], uniform phase."""
    drive = params.mu + params.eps + 2.0 * params.j
    alpha_sf = np.sqrt(max(drive, 0.0) / (params.u + 2.0 * params.v))
    mod = rng.uniform(0.0, 2.0 * max(1.0, alpha_sf), size=sites)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=sites)
    return mod * np.exp(1j * phase)


def _energy_rows(alpha, params):
    """Row-wise coherent energy of an (n, L) amplitude array."""
    n = np.abs(alpha) ** 2
    nxt = np.roll(alpha, -1, axis=1)
    return np.sum(-params.mu * n
                  - 2.0 * params.j * np.real(alpha * np.conj(nxt))
                  - params.eps * np.real(alpha ** 2)
                  + 0.5 * params.u * n ** 2
                  + params.v * n * np.roll(n, -1, axis=1), axis=1)


def _grad_rows(alpha, params):
    """Row-wise Wirtinger gradient of an (n, L) amplitude array."""
    n = np.abs(alpha) ** 2
    neigh_n = np.roll(n, -1, axis=1) + np.roll(n, 1, axis=1)
    neigh_a = np.roll(alpha, -1, axis=1) + np.roll(alpha, 1, axis=1)
    return ((-params.mu + params.u * n + params.v * neigh_n) * alpha
            - params.eps * np.conj(alpha)
            - params.j * neigh_a)


def multistart_ground(params, sites, n_starts=32, seed=0, opts=FlowOptions()):
    """Lowest-energy flow attractor over analytic-solution starts plus random starts.

    Deterministic per seed.  Returns (field, energy).
    """
    if n_starts < 1:
        raise ValidationError("n_starts must be ≥ 1")
    starts = [solution_field(s, sites) for s in analytic_solutions(params, sites)]
    seq = as_seed_sequence(seed)
    for child in seq.spawn(n_starts):
        starts.append(random_field(params, sites, np.random.default_rng(child)))
    y, e = _batched_descent(np.array(starts),
                            lambda a: _grad_rows(a, params),
                            lambda a: _energy_rows(a, params), opts)
    k = int(np.argmin(e))
    return y[k], float(e[k])


# ---------------------------------------------------------------------------
# Two-species chain with cross-species pair injection (U(1)-symmetric variant)

def _check_two_mode(field):
    alpha, beta = field
    alpha = _check_field(alpha)
    beta = _check_field(beta)
    if len(alpha) != len(beta):
        raise ValidationError("species amplitude vectors must have equal length")
    return alpha, beta


def two_mode_energy(field, params):
    """Energy of the two-species configuration (alphas, betas), periodic bonds.

    Each species carries the single-species functional without its own pair
    term; the species couple locally through -2 eps Re(a_j b_j).
    """
    alpha, beta = _check_two_mode(field)
    e = 0.0
    for amp in (alpha, beta):
        n = np.abs(amp) ** 2
        e += float(np.sum(-params.mu * n
                          - 2.0 * params.j * np.real(amp * np.conj(np.roll(amp, -1)))
                          + 0.5 * params.u * n ** 2
                          + params.v * n * np.roll(n, -1)))
    e -= 2.0 * params.eps * float(np.sum(np.real(alpha * beta)))
    return e


def two_mode_gradient(field, params):
    """Wirtinger derivatives (dE/d conj alpha, dE/d conj beta)."""
    alpha, beta = _check_two_mode(field)
    out = []
    for amp, other in ((alpha, beta), (beta, alpha)):
        n = np.abs(amp) ** 2
        neigh_n = np.roll(n, -1) + np.roll(n, 1)
        neigh_a = np.roll(amp, -1) + np.roll(amp, 1)
        out.append((-params.mu + params.u * n + params.v * neigh_n) * amp
                   - params.eps * np.conj(other)
                   - params.j * neigh_a)
    return out[0], out[1]


def two_mode_analytic(params, sites):
    """Closed-form two-species stationary configurations, sorted by energy.

    Balanced entries reuse the single-species solutions with both amplitudes
    equal (energy doubles).  The unbalanced homogeneous pair exists when
    2 eps <= mu + 2j, with squared amplitudes

        2 (u+2v) alpha^2 = (mu+2j) +/- sqrt((mu+2j)^2 - 4 eps^2)

    and beta carrying the mirrored root with the OPPOSITE sign: stationarity
    forces (u+2v) alpha^2 + (u+2v) beta^2 = mu+2j, which makes
    ((u+2v) alpha^2 - (mu+2j)) alpha = eps beta solvable only for
    alpha beta < 0 (the product alpha beta is invariant under the
    relative-phase symmetry, so no gauge removes the sign).  The resulting
    energy is E = -L [(mu+2j)^2/2 - eps^2] / (u+2v), which always exceeds the
    balanced minimum.  Both mirror orderings are returned.
    """
    out = []
    for sol in analytic_solutions(params, sites):
        amp = solution_field(sol, sites)
        out.append(TwoModeSolution(sol.kind, amp, amp.copy(),
                                   2.0 * sol.energy))
    m = params.mu + params.j * 2.0
    if 2.0 * params.eps <= m and m > 0.0:
        disc = np.sqrt(m * m - 4.0 * params.eps ** 2)
        w = params.u + 2.0 * params.v
        hi = np.sqrt((m + disc) / (2.0 * w))
        lo = np.sqrt(max(m - disc, 0.0) / (2.0 * w))
        e_unb = -sites * (0.5 * m * m - params.eps ** 2) / w
        for big, small in ((hi, -lo), (lo, -hi)):
            out.append(TwoModeSolution("unbalanced",
                                       np.full(sites, big, dtype=complex),
                                       np.full(sites, small, dtype=complex),
                                       e_unb))
    out.sort(key=lambda s: s.energy)
    return out


def two_mode_relax(field0, params, opts=FlowOptions()):
    """Gradient-descent flow for both species; same contract as ``relax``.

    Returns ((alphas, betas), energy, gradient max-norm).
    """
    alpha, beta = _check_two_mode(field0)
    y0 = np.concatenate([alpha, beta])
    sites = len(alpha)

    def grad_fn(y):
        ga, gb = two_mode_gradient((y[:sites], y[sites:]), params)
        return np.concatenate([ga, gb])

    def energy_fn(y):
        return two_mode_energy((y[:sites], y[sites:]), params)

    y, e, gn = _rk4_flow(y0, grad_fn, energy_fn, opts)
    return (y[:sites], y[sites:]), e, gn


def _two_mode_energy_rows(y, params):
    sites = y.shape[1] // 2
    alpha, beta = y[:, :sites], y[:, sites:]
    e = np.zeros(y.shape[0])
    for amp in (alpha, beta):
        n = np.abs(amp) ** 2
        e += np.sum(-params.mu * n
                    - 2.0 * params.j * np.real(amp * np.conj(np.roll(amp, -1, axis=1)))
                    + 0.5 * params.u * n ** 2
                    + params.v * n * np.roll(n, -1, axis=1), axis=1)
    e -= 2.0 * params.eps * np.sum(np.real(alpha * beta), axis=1)
    return e


def _two_mode_grad_rows(y, params):
    sites = y.shape[1] // 2
    alpha, beta = y[:, :sites], y[:, sites:]
    out = []
    for amp, other in ((alpha, beta), (beta, alpha)):
        n = np.abs(amp) ** 2
        neigh_n = np.roll(n, -1, axis=1) + np.roll(n, 1, axis=1)
        neigh_a = np.roll(amp, -1, axis=1) + np.roll(amp, 1, axis=1)
        out.append((-params.mu + params.u * n + params.v * neigh_n) * amp
                   - params.eps * np.conj(other)
                   - params.j * neigh_a)
    return np.concatenate(out, axis=1)


def two_mode_multistart(params, sites, n_starts=32, seed=0, opts=FlowOptions()):
    """Lowest two-species attractor over analytic starts plus random starts."""
    if n_starts < 1:
        raise ValidationError("n_starts must be ≥ 1")
    starts = [np.concatenate([s.alphas, s.betas])
              for s in two_mode_analytic(params, sites)]
    seq = as_seed_sequence(seed)
    for child in seq.spawn(n_starts):
        rng = np.random.default_rng(child)
        starts.append(np.concatenate([random_field(params, sites, rng),
                                      random_field(params, sites, rng)]))
    y, e = _batched_descent(np.array(starts),
                            lambda a: _two_mode_grad_rows(a, params),
                            lambda a: _two_mode_energy_rows(a, params), opts)
    k = int(np.argmin(e))
    return (y[k, :sites], y[k, sites:]), float(e[k])
