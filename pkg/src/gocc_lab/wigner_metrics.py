"""Classical functionals of Wigner densities: L1 distance and Chernoff exponent.

Monte Carlo estimates draw from the balanced proposal ``q = (w0 + w1) / 2``.
With that proposal the L1 integrand ``|w0 - w1| / q`` is bounded by 2 and the
Chernoff integrand ``w0^s w1^(1-s) / q`` by 2, so the estimators have bounded
variance. Samples come from fixed-size chunks seeded by ``(seed, chunk)``.
"""
import numpy as np

from ._numerics import golden_section_min, map_chunks
from .gaussian_core import DimensionError, GaussianMixturePdf, GaussianPdf, mahalanobis_sq
from scipy.special import erf

MIN_SAMPLES = 10_000


def _as_mixture(w):
    if isinstance(w, GaussianPdf):
        return GaussianMixturePdf([1.0], [w])
    return w


def proposal_logs(w0, w1, n_samples, seed, stream=0):
    """Sample the balanced proposal and return ``(log w0, log w1)`` at the samples."""
    w0, w1 = _as_mixture(w0), _as_mixture(w1)
    if w0.dim != w1.dim:
        raise DimensionError(f"densities live in dimensions {w0.dim} and {w1.dim}")
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")

    def chunk(rng, count):
        pick = rng.random(count) < 0.5
        x = np.empty((count, w0.dim))
        n0 = int(pick.sum())
        x[pick] = w0.sample(n0, rng)
        x[~pick] = w1.sample(count - n0, rng)
        return w0.logpdf(x), w1.logpdf(x)

    parts = map_chunks(chunk, n_samples, seed, stream)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def l1_from_logs(l0, l1):
    # |w0 - w1| / ((w0 + w1) / 2) = 2 |tanh((l0 - l1) / 2)|
    vals = 2.0 * np.abs(np.tanh(0.5 * (l0 - l1)))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))


def l1_distance_mc(w0, w1, n_samples, seed):
    """Importance-sampled ``int |w0 - w1|``; returns ``(estimate, std_err)``."""
    return l1_from_logs(*proposal_logs(w0, w1, n_samples, seed))


def l1_distance_equal_cov(mu0, mu1, cov):
    """Exact L1 distance between two normals sharing ``cov``."""
    d = np.sqrt(mahalanobis_sq(mu0, mu1, cov))
    return float(2.0 * erf(d / (2.0 * np.sqrt(2.0))))


def chernoff_from_logs(l0, l1, tol=1e-6):
    """Minimise the importance-sampled s-integral on common samples; returns ``(xi, s*)``."""
    # log q = log((w0 + w1) / 2)
    lq = np.logaddexp(l0, l1) - np.log(2.0)
    a, b = l0 - lq, l1 - lq

    def s_integral(s):
        return float(np.mean(np.exp(s * a + (1.0 - s) * b)))

    s_star, best = golden_section_min(s_integral, 1e-4, 1 - 1e-4, tol=tol)
    return float(-np.log(best)), s_star


def classical_chernoff_mc(w0, w1, n_samples, seed):
    """Classical Chernoff exponent ``-ln min_s int w0^s w1^(1-s)`` by Monte Carlo."""
    return chernoff_from_logs(*proposal_logs(w0, w1, n_samples, seed))[0]


def classical_chernoff_equal_cov(mu0, mu1, cov):
    """Chernoff exponent of two normals with shared covariance: one eighth of the squared Mahalanobis distance."""
    return mahalanobis_sq(mu0, mu1, cov) / 8.0
