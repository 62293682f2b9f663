"""Lower bounds on W+ distinguishability and the full norm-ordering audit."""
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._numerics import golden_section_min
from .fock_oracle import hs_norm_sq_gram, trace_distance_gram
from .gaussian_core import amplitudes_to_phase, wigner_of_constellation
from .gocc_sim import run_protocol_error_prob
from .wigner_metrics import l1_distance_mc


class TowerViolation(AssertionError):
    """An ordering that must hold between distinguishability norms failed."""


def _require_traceless(delta, tol=1e-12):
    if abs(delta.weights.sum()) > tol:
        raise ValueError(f"difference operator must be traceless, weights sum to {delta.weights.sum():.3g}")


def proposition_povm_bias(delta, m):
    """Bias ``tr delta (2M - 1)`` of the POVM ``M = (1 + eta delta) / 2`` with ``eta = 2^-(m+1)``.

    Returns ``(eta, bias)``; bias is ``eta * ||delta||_2^2``.
    """
    _require_traceless(delta)
    if delta.n_modes != m:
        raise ValueError(f"constellation has {delta.n_modes} modes, expected {m}")
    eta = 2.0 ** (-m - 1)
    return eta, eta * hs_norm_sq_gram(delta)


def _signed_wigner(delta, z):
    """Closed-form Wigner function of a signed coherent constellation at rows of z."""
    mu = amplitudes_to_phase(delta.points)
    m = delta.n_modes
    sq = np.sum(z ** 2, axis=1)[:, None] + np.sum(mu ** 2, axis=1)[None, :] - 2.0 * z @ mu.T
    return np.pi ** (-m) * (np.exp(-np.maximum(sq, 0.0)) @ delta.weights)


def verify_wplus_validity(delta, m, spacing=0.05, n_sigma=6.0, eta=None, max_points=5_000_000):
    """Smallest value of the Wigner functions of ``M`` and ``1 - M`` on a grid.

    All components share the isotropic covariance I/2, so every critical point
    of the mixture lies in the affine hull of the component means. The grid
    therefore spans that hull (``spacing`` apart, padded by ``n_sigma``
    standard deviations); away from it the functions only approach the
    positive constant ``(2 pi)^-m / 2``.
    """
    if eta is None:
        eta = 2.0 ** (-m - 1)
    base = 0.5 * (2 * np.pi) ** (-m)
    mu = amplitudes_to_phase(delta.points)
    live = mu[delta.weights != 0]
    if live.shape[0] == 0:
        return base
    origin = live[0]
    span = live[1:] - origin
    if span.shape[0]:
        u, s, vt = np.linalg.svd(span, full_matrices=False)
        basis = vt[s > 1e-12 * max(1.0, s.max(initial=0.0))]
    else:
        basis = np.zeros((0, mu.shape[1]))
    # one axis along the hull when it is a point, so the peak itself is sampled
    if basis.shape[0] == 0:
        basis = np.eye(mu.shape[1])[:1]
    coords = (live - origin) @ basis.T
    pad = n_sigma * math.sqrt(0.5)
    axes = [np.arange(lo - pad, hi + pad + spacing / 2, spacing)
            for lo, hi in zip(coords.min(axis=0), coords.max(axis=0))]
    total = math.prod(len(a) for a in axes)
    if total > max_points:
        raise ValueError(f"validity grid would have {total} points (hull dimension {len(axes)})")
    worst = np.inf
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    for lo in range(0, grid.shape[0], 200_000):
        z = origin + grid[lo:lo + 200_000] @ basis
        wd = _signed_wigner(delta, z)
        worst = min(worst, float(np.min(base - 0.5 * eta * np.abs(wd))))
    return worst


@dataclass(frozen=True)
class EnergyBound:
    r: float
    D: int
    bound: float
    bound_pre_relaxation: float


def corollary_energy_bound(m, E_bar, t, c):
    """Energy-truncated W+ lower bound ``r^2 2^-(m+1) (1 + E/c^2)^-m`` with ``r = t - 4c``.

    ``D = binom(floor(E/c^2) + m, m)`` is returned as an exact integer;
    ``bound_pre_relaxation`` uses ``1/D`` in place of the relaxed
    ``(1 + E/c^2)^-m``. ``4c == t`` is the degenerate case and returns zeros.
    """
    if not 0 < t <= 2:
        raise ValueError(f"t must lie in (0, 2], got {t}")
    if not 0 < c <= t / 4:
        raise ValueError(f"need 0 < 4c <= t, got c={c}, t={t}")
    if E_bar < 0 or m < 1:
        raise ValueError("need E_bar >= 0 and m >= 1")
    r = t - 4 * c
    D = math.comb(math.floor(E_bar / c ** 2) + m, m)
    if r <= 0:
        return EnergyBound(0.0, D, 0.0, 0.0)
    log_head = 2 * math.log(r) - (m + 1) * math.log(2.0)
    bound = math.exp(log_head - m * math.log1p(E_bar / c ** 2))
    sharper = math.exp(log_head - math.log(D))
    return EnergyBound(r, D, bound, sharper)


def optimize_corollary_c(m, E_bar, t, tol=1e-10):
    """Best ``c`` in ``(0, t/4)`` for :func:`corollary_energy_bound`; returns ``(c, bound)``.

    The log of the bound is strictly concave in c, so golden-section on it is exact.
    """
    if not 0 < t <= 2:
        raise ValueError(f"t must lie in (0, 2], got {t}")

    def neg_log(c):
        return -(2 * math.log(t - 4 * c) - m * math.log1p(E_bar / c ** 2))

    eps = 1e-9 * t
    c_star, _ = golden_section_min(neg_log, eps, t / 4 - eps, tol=tol * t)
    return c_star, corollary_energy_bound(m, E_bar, t, c_star).bound


@dataclass
class TowerReport:
    gocc_bias: float
    gocc_bias_err: float
    proposition_bias: float
    l1_wigner: float
    l1_wigner_err: float
    trace_norm: float
    checks: dict

    def to_dict(self):
        return asdict(self)


def tower_audit(r0, r1, protocol, n_trials=100_000, n_samples=100_000, seed=0, n_sigma=3.0):
    """Achieved GOCC bias, W+ lower bound, Wigner L1 and trace norm, with their ordering checked.

    All four numbers are in norm units (twice the bias). Raises
    :class:`TowerViolation` when an ordering fails beyond ``n_sigma`` standard errors.
    """
    p_err, p_se = run_protocol_error_prob(protocol, r0, r1, n_trials, seed)
    gocc, gocc_se = 2.0 * (1.0 - 2.0 * p_err), 4.0 * p_se
    delta = r0.minus(r1)
    _, prop = proposition_povm_bias(delta, r0.n_modes)
    l1, l1_se = l1_distance_mc(wigner_of_constellation(r0), wigner_of_constellation(r1), n_samples, seed)
    trace = 2.0 * trace_distance_gram(r0, r1)
    se = math.hypot(gocc_se, l1_se)
    checks = {
        "gocc <= l1": gocc <= l1 + n_sigma * se,
        "gocc <= trace": gocc <= trace + n_sigma * gocc_se,
        "proposition <= l1": prop <= l1 + n_sigma * l1_se,
        "proposition <= trace": prop <= trace + 1e-12,
        "l1 <= 2": l1 <= 2.0 + n_sigma * l1_se,
    }
    report = TowerReport(gocc, gocc_se, prop, l1, l1_se, trace, checks)
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise TowerViolation(f"ordering violated: {failed}; report {report.to_dict()}")
    return report
