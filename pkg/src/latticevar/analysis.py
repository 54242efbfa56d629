"""Order-parameter diagnostics and phase-boundary extraction.

Pure numerics shared by every solver: correlation ratios, Binder cumulants,
modified-Akima interpolation of sampled curves, crossing and zero-threshold
extraction, power-law finite-size extrapolation, and classifier bisection.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import Akima1DInterpolator


class NoCrossingError(ValueError):
    """The requested crossing/threshold does not exist on the sampled range."""


class DegenerateMomentError(ValueError):
    """A ratio of moments is undefined because the denominator vanishes."""


@dataclass(frozen=True)
class Curve:
    """An observable sampled on a strictly ascending grid, tagged with a system size."""

    x: np.ndarray
    y: np.ndarray
    size_label: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or len(x) < 4:
            raise ValueError("curve needs matching x/y vectors with at least 4 points")
        if not np.all(np.diff(x) > 0):
            raise ValueError("curve x grid must be strictly ascending")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class FssFit:
    mu_inf: float
    beta: float
    eta: float
    rms_residual: float


def correlation_ratio(corr, sites):
    """corr(L/2) / corr(L/4) for a distance-indexed correlator on L sites.

    Tends to 1 under long-range order and to 0 under exponential decay.
    """
    if sites % 4:
        raise ValueError("correlation ratio needs L divisible by 4")
    denom = corr(sites // 4)
    if abs(denom) <= 1e-14:
        raise DegenerateMomentError("correlator vanishes at L/4 (exact insulator?)")
    return corr(sites // 2) / denom


def binder_from_moments(phi2, phi4):
    """Binder cumulant (3 - phi4/phi2^2)/2 of the staggered-density moments."""
    if phi2 <= 0.0:
        raise DegenerateMomentError("second moment must be positive")
    return 0.5 * (3.0 - phi4 / phi2 ** 2)


def _interpolant(curve):
    return Akima1DInterpolator(curve.x, curve.y, method="makima", extrapolate=False)


def makima_interpolate(curve, x_query):
    """Modified-Akima piecewise-cubic value(s) at ``x_query`` (within the knot range)."""
    x_query = np.asarray(x_query, dtype=float)
    if np.any(x_query < curve.x[0]) or np.any(x_query > curve.x[-1]):
        raise ValueError("query outside the interpolation range")
    out = _interpolant(curve)(x_query)
    return float(out) if out.ndim == 0 else out


def _bisect_zero(f, lo, hi, width=1e-12, max_iter=200):
    flo = f(lo)
    for _ in range(max_iter):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_mu_zero_threshold(curve, zero_tol=1e-6):
    """Largest x at which the interpolated curve still sits at or below ``zero_tol``.

    Found by a dense scan from the right followed by bisection on the
    interpolant.  Requires the sampled curve to take values on both sides of
    the threshold.
    """
    f = _interpolant(curve)
    xs = np.linspace(curve.x[0], curve.x[-1], max(512, 16 * len(curve.x)))
    below = f(xs) <= zero_tol
    if not below.any() or below.all():
        raise NoCrossingError("curve does not cross the zero threshold")
    last = np.nonzero(below)[0][-1]
    if last == len(xs) - 1:
        return float(xs[-1])
    return float(_bisect_zero(lambda x: f(x) - zero_tol, xs[last], xs[last + 1]))


def crossing_point(c1, c2):
    """Smallest x where the two interpolated curves meet, on their overlapping range."""
    lo = max(c1.x[0], c2.x[0])
    hi = min(c1.x[-1], c2.x[-1])
    if lo >= hi:
        raise NoCrossingError("curves do not overlap")
    f1, f2 = _interpolant(c1), _interpolant(c2)
    diff = lambda x: f1(x) - f2(x)
    xs = np.linspace(lo, hi, 2048)
    d = diff(xs)
    sign = np.sign(d)
    flip = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    exact = np.nonzero(sign == 0)[0]
    if exact.size and (not flip.size or exact[0] <= flip[0]):
        return float(xs[exact[0]])
    if not flip.size:
        raise NoCrossingError("interpolated curves do not cross")
    k = flip[0]
    return float(_bisect_zero(diff, xs[k], xs[k + 1]))


def fss_fit(points, eta_range=(0.1, 4.0), eta_step=1e-3):
    """Power-law extrapolation mu_c(L) = mu_inf + beta L^(-eta).

    Deterministic grid search over the decay exponent with an exact linear
    solve for (mu_inf, beta) at each candidate; returns the least-squares
    best triple and the RMS residual.
    """
    pts = sorted(points)
    if len(pts) < 3:
        raise ValueError("power-law fit needs at least 3 sizes")
    sizes = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.unique(sizes).size < 2:
        raise ValueError("power-law fit needs distinct sizes")
    etas = np.arange(eta_range[0], eta_range[1] + eta_step / 2, eta_step)
    basis = sizes[None, :] ** (-etas[:, None])      # (n_eta, n_sizes)
    n = float(len(sizes))
    s1 = basis.sum(axis=1)
    s2 = (basis ** 2).sum(axis=1)
    sy = y.sum()
    s1y = basis @ y
    det = n * s2 - s1 ** 2
    det = np.where(det == 0, np.nan, det)
    mu_inf = (s2 * sy - s1 * s1y) / det
    beta = (n * s1y - s1 * sy) / det
    resid = y[None, :] - mu_inf[:, None] - beta[:, None] * basis
    rss = np.einsum("ij,ij->i", resid, resid)
    k = int(np.nanargmin(rss))
    return FssFit(float(mu_inf[k]), float(beta[k]), float(etas[k]),
                  float(np.sqrt(rss[k] / n)))


def boundary_bisect(classifier, lo, hi, tol):
    """Bisection of a two-label classifier; returns the midpoint of the final bracket."""
    label_lo = classifier(lo)
    if classifier(hi) == label_lo:
        raise NoCrossingError("classifier gives the same label at both endpoints")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if classifier(mid) == label_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
