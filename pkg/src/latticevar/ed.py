"""Exact diagonalization of the chain on small periodic lattices.

Serves as the correctness oracle for every variational solver in this
package: any product-state, coherent or Gaussian energy must lie at or above
the exact ground energy once the local Fock truncation is converged.

The many-body basis is the full product Fock basis with per-site truncation
``n_max``; basis index is mixed-radix in site order (site 0 is the fastest
digit).  The Hamiltonian conserves boson-number parity (-1)^N even when pair
injection breaks number conservation, so the ground state is always resolved
per parity sector and the lower sector reported.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .model import ModelParams, LatticeSpec

DIMENSION_CAP = 2 ** 20
DENSE_CUTOFF = 4096
PARITY_TIE = 1e-12


class DimensionOverflowError(ValueError):
    """Requested Fock space exceeds the configured dimension cap."""


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach the requested residual."""


class FockBasis:
    """Product Fock basis of a lattice, with the index <-> occupation bijection."""

    def __init__(self, lattice, dim_cap=DIMENSION_CAP):
        self.lattice = lattice
        L, n_max = lattice.sites, lattice.n_max
        dim = (n_max + 1) ** L
        if dim > dim_cap:
            raise DimensionOverflowError(
                f"Fock dimension {dim} exceeds cap {dim_cap} (L={L}, n_max={n_max})")
        self.dimension = dim
        self.strides = (n_max + 1) ** np.arange(L, dtype=np.int64)
        # (dim, L) occupation table; row i holds the digits of index i
        self.occupations = (np.arange(dim, dtype=np.int64)[:, None]
                            // self.strides[None, :]) % (n_max + 1)
        self.total_n = self.occupations.sum(axis=1)

    def index_of(self, occ):
        return int(np.dot(np.asarray(occ, dtype=np.int64), self.strides))

    def occupation_of(self, index):
        return self.occupations[index].copy()


@dataclass
class EDGroundState:
    energy: float
    coefficients: np.ndarray
    parity: int
    degenerate: bool = False


def build_hamiltonian(params, lattice, basis=None):
    """Sparse CSR matrix of the chain Hamiltonian in the truncated Fock basis.

    All five couplings are included with periodic bonds; the result is real
    symmetric.  Returns ``(h, basis)``.  The only precondition is the basis
    dimension cap, so out-of-contract couplings (negative mu diagnostics) are
    allowed here; use :func:`latticevar.model.validate` to enforce the model
    domain.
    """
    if basis is None:
        basis = FockBasis(lattice)
    L, n_max = lattice.sites, lattice.n_max
    occ = basis.occupations
    dim = basis.dimension
    idx = np.arange(dim, dtype=np.int64)

    diag = (-params.mu * basis.total_n
            + 0.5 * params.u * np.sum(occ * (occ - 1), axis=1)).astype(float)
    if params.v != 0.0:
        for j in range(L):
            diag += params.v * occ[:, j] * occ[:, (j + 1) % L]

    rows, cols, vals = [idx], [idx], [diag]

    if params.j != 0.0:
        for j in range(L):
            l = (j + 1) % L
            for src, dst in ((l, j), (j, l)):  # a_dst^dag a_src and h.c.
                mask = (occ[:, dst] < n_max) & (occ[:, src] > 0)
                amp = -params.j * np.sqrt((occ[mask, dst] + 1.0) * occ[mask, src])
                rows.append(idx[mask] + basis.strides[dst] - basis.strides[src])
                cols.append(idx[mask])
                vals.append(amp)

    if params.eps != 0.0:
        for j in range(L):
            mask = occ[:, j] <= n_max - 2  # a_j^dag a_j^dag
            n = occ[mask, j].astype(float)
            rows.append(idx[mask] + 2 * basis.strides[j])
            cols.append(idx[mask])
            vals.append(-0.5 * params.eps * np.sqrt((n + 1.0) * (n + 2.0)))
            mask = occ[:, j] >= 2  # a_j a_j
            n = occ[mask, j].astype(float)
            rows.append(idx[mask] - 2 * basis.strides[j])
            cols.append(idx[mask])
            vals.append(-0.5 * params.eps * np.sqrt(n * (n - 1.0)))

    h = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim)).tocsr()
    return h, basis


def _lowest_eigenpair(h, tol):
    """Smallest eigenvalue and vector of a real symmetric sparse matrix.

    Dense below DENSE_CUTOFF, restarted Lanczos above, always started from the
    normalized all-ones vector so repeated calls are deterministic.
    """
    dim = h.shape[0]
    if dim == 1:
        return float(h[0, 0]), np.ones(1)
    if dim < DENSE_CUTOFF:
        w, vecs = scipy.linalg.eigh(h.toarray(), subset_by_index=(0, 0))
        return float(w[0]), vecs[:, 0]
    # symmetry-breaking deterministic start: an exactly uniform vector can be
    # orthogonal to the ground state on symmetric lattices
    v0 = 1.0 + 1e-3 * np.sin(1.7 * np.arange(dim))
    v0 /= np.linalg.norm(v0)
    for maxiter in (5000, 50000):
        w, vecs = scipy.sparse.linalg.eigsh(h, k=1, which="SA", v0=v0,
                                            tol=tol / 10.0, maxiter=maxiter)
        vec = vecs[:, 0]
        resid = np.linalg.norm(h @ vec - w[0] * vec)
        if resid <= tol:
            return float(w[0]), vec
    raise ConvergenceError(f"eigensolver residual {resid:.3e} above tolerance {tol:.3e}")


def _fix_phase(vec):
    k = np.argmax(np.abs(vec))
    if vec[k] < 0:
        vec = -vec
    return vec


def ground_state(h, basis, tol=1e-10):
    """Ground state of ``h``, resolved per boson-number-parity sector.

    Both (-1)^N = +1 and -1 sectors are solved and the lower-energy one
    reported; on a tie below 1e-12 the even sector wins and the result is
    flagged degenerate.  Coefficients live in the full basis (the complementary
    sector is exactly zero), are unit norm, and the residual ||H psi - E psi||
    is at most ``tol``.
    """
    parity_even = basis.total_n % 2 == 0
    out = {}
    for parity, mask in ((+1, parity_even), (-1, ~parity_even)):
        sel = np.nonzero(mask)[0]
        if sel.size == 0:
            continue
        e, vec = _lowest_eigenpair(h[sel][:, sel], tol)
        out[parity] = (e, sel, vec)
    if -1 not in out:
        choice, degenerate = +1, False
    else:
        e_even, e_odd = out[+1][0], out[-1][0]
        degenerate = abs(e_even - e_odd) < PARITY_TIE
        choice = +1 if (degenerate or e_even <= e_odd) else -1
    e, sel, vec = out[choice]
    full = np.zeros(basis.dimension)
    full[sel] = _fix_phase(vec / np.linalg.norm(vec))
    return EDGroundState(energy=e, coefficients=full, parity=choice, degenerate=degenerate)


def solve_ground(params, lattice, tol=1e-10):
    """Build the Hamiltonian and return ``(EDGroundState, FockBasis)``."""
    h, basis = build_hamiltonian(params, lattice)
    return ground_state(h, basis, tol=tol), basis


def _pair_expectation(psi, basis, j):
    """<a_j^2> on a real-coefficient state."""
    occ_j = basis.occupations[:, j]
    mask = occ_j >= 2
    src = np.nonzero(mask)[0]
    dst = src - 2 * basis.strides[j]
    n = occ_j[src].astype(float)
    return float(np.sum(psi[dst] * np.sqrt(n * (n - 1.0)) * psi[src]))

def _hop_expectation(psi, basis, j, l):
    """<a_j^dag a_l> for j != l on a real-coefficient state."""
    occ = basis.occupations
    n_max = basis.lattice.n_max
    mask = (occ[:, j] < n_max) & (occ[:, l] > 0)
    src = np.nonzero(mask)[0]
    dst = src + basis.strides[j] - basis.strides[l]
    amp = np.sqrt((occ[src, j] + 1.0) * occ[src, l])
    return float(np.sum(psi[dst] * amp * psi[src]))


def observables(state, basis):
    """Densities, pair amplitudes, correlations and staggered-density moments.

    Correlators are averaged over the reference site (the periodic chain is
    translation covariant) and returned for distances d = 1 .. L/2.  Density
    fluctuations are taken about the mean density over the whole chain.  The
    staggered-density moments are raw (not centered) expectations of
    phi = sum_l (n_{odd l} - n_{even l}).
    """
    psi = state.coefficients
    w = psi * psi
    occ = basis.occupations
    L = basis.lattice.sites

    density = w @ occ
    nbar = density.mean()
    a2 = np.array([_pair_expectation(psi, basis, j) for j in range(L)])

    dists = np.arange(1, L // 2 + 1)
    c_sf = np.zeros(len(dists))
    c_dw = np.zeros(len(dists))
    for k, d in enumerate(dists):
        c_sf[k] = np.mean([_hop_expectation(psi, basis, j, (j + d) % L) for j in range(L)])
        c_dw[k] = np.mean([
            np.sum(w * (occ[:, j] - nbar) * (occ[:, (j + d) % L] - nbar)) for j in range(L)])

    signs = np.where(np.arange(L) % 2 == 0, 1.0, -1.0)  # site 1 (index 0) is odd
    phi = occ @ signs
    return {
        "density": density,
        "pair": a2,
        "c_sf": c_sf,
        "c_dw": c_dw,
        "phi2": float(np.sum(w * phi ** 2)),
        "phi4": float(np.sum(w * phi ** 4)),
    }
