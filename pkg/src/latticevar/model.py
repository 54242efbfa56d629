"""Hamiltonian couplings, lattice geometry, and the zero-hopping ground state.

The chain couples L bosonic modes (periodic, site L+1 identified with site 1)
through a chemical potential ``mu``, on-site repulsion ``u``, nearest-neighbor
repulsion ``v``, hopping ``j`` and a pair-injection rate ``eps`` that creates
and destroys bosons two at a time.  All couplings are real and nonnegative,
with ``u`` strictly positive setting the natural energy unit.

With ``j = eps = 0`` the Hamiltonian is diagonal in the Fock basis and the
ground state is a two-site-periodic Fock pattern ``(n_odd, n_even)`` given by
closed-form ceiling expressions.  That limit is exposed here and doubles as an
exact oracle for the variational solvers.
"""

from dataclasses import dataclass
import math


class ValidationError(ValueError):
    """A type invariant on parameters or lattice geometry is violated."""


class DegenerateParametersError(ValueError):
    """Parameters sit on a degeneracy line where the requested quantity is undefined."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the chain Hamiltonian, in the caller's energy units."""

    mu: float
    u: float
    v: float = 0.0
    j: float = 0.0
    eps: float = 0.0


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic chain of ``sites`` modes, each truncated at ``n_max`` bosons."""

    sites: int
    n_max: int
    boundary: str = "periodic"


@dataclass(frozen=True)
class AtomicGroundState:
    """Zero-hopping ground-state occupations (n_odd >= n_even) and energy per site pair."""

    n_odd: int
    n_even: int
    energy_per_pair: float


def validate(params, lattice):
    """Check every invariant of ``params`` and ``lattice``; raise on the first violation.

    Raises
    ------
    ValidationError
        Naming the violated invariant.
    """
    for name in ("mu", "u", "v", "j", "eps"):
        if not math.isfinite(getattr(params, name)):
            raise ValidationError(f"{name} must be finite")
    if not params.u > 0:
        raise ValidationError("u must be positive")
    for name in ("mu", "v", "j", "eps"):
        if getattr(params, name) < 0:
            raise ValidationError(f"{name} must be nonnegative")
    if lattice.sites % 2 != 0 or lattice.sites < 4:
        raise ValidationError("L must be even and ≥ 4")
    if lattice.n_max < 1:
        raise ValidationError("n_max must be ≥ 1")
    if lattice.boundary != "periodic":
        raise ValidationError("boundary must be periodic")


def atomic_energy_per_pair(n_o, n_e, params):
    """Energy per pair of sites of the two-site-periodic Fock pattern (n_o, n_e) at j = eps = 0.

    e0 = -mu (n_o + n_e) + 2 v n_o n_e + (u/2) [n_o(n_o-1) + n_e(n_e-1)]
    """
    if n_o < 0 or n_e < 0:
        raise ValidationError("occupations must be nonnegative")
    return (-params.mu * (n_o + n_e) + 2.0 * params.v * n_o * n_e
            + 0.5 * params.u * (n_o * (n_o - 1) + n_e * (n_e - 1)))


def atomic_ground_occupations(params):
    """Exact ground-state occupations of the j = eps = 0 chain.

    Two branches, split by the sign of 2v - u:

    * ``2v > u``: n_odd = ceil(mu/u), n_even = 0 (checkerboard pattern),
    * ``2v < u``: n_odd = ceil(mu/(u+2v)), n_even = ceil((mu-2v)/(u+2v)).

    The ceiling is taken literally (``ceil(k) = k`` for integer arguments),
    so on the degeneracy points where the argument is an exact integer the
    lower-occupation competitor is returned; many Fock patterns share the
    ground energy there.

    Raises
    ------
    DegenerateParametersError
        On the line 2v = u, where whole families of configurations are
        degenerate and no branch applies.
    """
    if params.v * 2.0 == params.u:
        raise DegenerateParametersError(
            "2v = u: atomic ground state is massively degenerate on this line")
    if 2.0 * params.v > params.u:
        n_o = max(0, math.ceil(params.mu / params.u))
        n_e = 0
    else:
        n_o = max(0, math.ceil(params.mu / (params.u + 2.0 * params.v)))
        n_e = max(0, math.ceil((params.mu - 2.0 * params.v) / (params.u + 2.0 * params.v)))
    return AtomicGroundState(n_o, n_e, atomic_energy_per_pair(n_o, n_e, params))
