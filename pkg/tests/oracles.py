"""Independent reference constructions used by the tests.

The Fock-space oracle builds 1- and 2-mode pure Gaussian states by applying
displacement / squeezing / rotation / beam-splitter gates to the vacuum in a
truncated number basis, while tracking the exact same state on the
(mean, covariance) side through the known symplectic action of each gate.
Quadrature moments computed by sparse matrix-vector products in the Fock
space are then an implementation-independent check of the Wick engine.

Conventions match the package: x = a^dag + a, p = i(a^dag - a), quadrature
order (x_1..x_L, p_1..p_L), vacuum covariance = identity.
"""

import numpy as np
import scipy.sparse
from scipy.sparse.linalg import expm_multiply


def destroy(n_trunc):
    return scipy.sparse.diags(np.sqrt(np.arange(1, n_trunc)), 1, format="csr")


class FockGaussianOracle:
    """Pure Gaussian states on ``modes`` modes, truncation ``n_trunc`` per mode."""

    def __init__(self, modes, n_trunc=40):
        self.modes = modes
        self.n_trunc = n_trunc
        eye = scipy.sparse.identity(n_trunc, format="csr")
        self.a = []
        for k in range(modes):
            ops = [eye] * modes
            ops[k] = destroy(n_trunc)
            full = ops[0]
            for op in ops[1:]:
                full = scipy.sparse.kron(full, op, format="csr")
            self.a.append(full)
        self.x = [(ak.conj().T + ak).tocsr() for ak in self.a]
        self.p = [(1j * (ak.conj().T - ak)).tocsr() for ak in self.a]
        dim = n_trunc ** modes
        self.psi = np.zeros(dim, dtype=complex)
        self.psi[0] = 1.0
        self.symp = np.eye(2 * modes)
        self.mean = np.zeros(2 * modes)

    def _apply(self, generator, gate_symp, gate_shift=None):
        self.psi = expm_multiply(generator, self.psi)
        self.symp = gate_symp @ self.symp
        self.mean = gate_symp @ self.mean
        if gate_shift is not None:
            self.mean = self.mean + gate_shift

    def displace(self, k, alpha):
        gen = alpha * self.a[k].conj().T - np.conj(alpha) * self.a[k]
        shift = np.zeros(2 * self.modes)
        shift[k], shift[self.modes + k] = 2.0 * alpha.real, 2.0 * alpha.imag
        self._apply(gen, np.eye(2 * self.modes), shift)

    def squeeze(self, k, r):
        gen = 0.5 * r * (self.a[k] @ self.a[k]
                         - self.a[k].conj().T @ self.a[k].conj().T)
        s = np.eye(2 * self.modes)
        s[k, k] = np.exp(-r)
        s[self.modes + k, self.modes + k] = np.exp(r)
        self._apply(gen, s)

    def rotate(self, k, theta):
        gen = -1j * theta * (self.a[k].conj().T @ self.a[k])
        s = np.eye(2 * self.modes)
        m, c, sn = self.modes, np.cos(theta), np.sin(theta)
        s[k, k] = c
        s[k, m + k] = sn
        s[m + k, k] = -sn
        s[m + k, m + k] = c
        self._apply(gen, s)

    def beamsplit(self, j, k, theta):
        gen = theta * (self.a[j].conj().T @ self.a[k]
                       - self.a[j] @ self.a[k].conj().T)
        s = np.eye(2 * self.modes)
        m, c, sn = self.modes, np.cos(theta), np.sin(theta)
        for base in (0, m):
            s[base + j, base + j] = c
            s[base + j, base + k] = sn
            s[base + k, base + j] = -sn
            s[base + k, base + k] = c
        self._apply(gen, s)

    @property
    def cov(self):
        return self.symp @ self.symp.T

    def quadrature(self, index):
        m = self.modes
        return self.x[index] if index < m else self.p[index - m]

    def fock_mean(self, index):
        op = self.quadrature(index)
        return complex(np.vdot(self.psi, op @ self.psi))

    def central_moment(self, indices):
        """<prod_k (r_{i_k} - <r_{i_k}>)> in the given operator order, via Fock space."""
        vec = self.psi.copy()
        for idx in reversed(list(indices)):
            vec = self.quadrature(idx) @ vec - self.fock_mean(idx) * vec
        return complex(np.vdot(self.psi, vec))

    def number_moments(self, signs):
        """Raw <phi>, <phi^2>, <phi^4> for phi = sum_k signs[k] n_k (diagonal in Fock)."""
        n_ops = [self.a[k].conj().T @ self.a[k] for k in range(self.modes)]
        phi = sum(s * op for s, op in zip(signs, n_ops))
        diag = np.real(phi.diagonal())
        w = np.abs(self.psi) ** 2
        return (float(w @ diag), float(w @ diag ** 2), float(w @ diag ** 4))


def random_gaussian_oracle(modes, rng, n_trunc=40, squeeze_max=0.7, disp_max=1.0):
    """A random pure Gaussian state in Bloch-Messiah layering: rotations /
    beam splitter, squeezers, rotations / beam splitter, displacements."""
    o = FockGaussianOracle(modes, n_trunc)
    for k in range(modes):
        o.rotate(k, rng.uniform(0, 2 * np.pi))
    if modes == 2:
        o.beamsplit(0, 1, rng.uniform(0, np.pi))
    for k in range(modes):
        o.squeeze(k, rng.uniform(-squeeze_max, squeeze_max))
        o.rotate(k, rng.uniform(0, 2 * np.pi))
    if modes == 2:
        o.beamsplit(0, 1, rng.uniform(0, np.pi))
    for k in range(modes):
        amp = rng.uniform(0, disp_max) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        o.displace(k, amp)
    return o
