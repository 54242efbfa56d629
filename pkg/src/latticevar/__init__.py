"""Ground-state phase diagrams of a 1D extended Bose-Hubbard chain with pair injection.

Four mutually cross-validating solvers over one parameter set:

* :mod:`latticevar.ed` — exact diagonalization on small periodic chains (the oracle),
* :mod:`latticevar.meanfield` — two-sublattice self-consistent mean field,
* :mod:`latticevar.coherent` — coherent-product ansatz with closed-form minima,
* :mod:`latticevar.gaussian` — general pure-Gaussian ansatz with Wick moment engine,

plus :mod:`latticevar.analysis` for boundary extraction (correlation ratios,
Binder cumulants, interpolation, finite-size scaling) and :mod:`latticevar.cli`
for batch scans, boundary traces and plots.
"""

from .model import ModelParams, LatticeSpec, AtomicGroundState

__all__ = ["ModelParams", "LatticeSpec", "AtomicGroundState"]
__version__ = "0.1.0"
