"""Phase-space algebra for bosonic modes.

Conventions: hbar = 1, quadratures ordered ``(x1, p1, ..., xm, pm)``, vacuum
covariance ``I / 2`` and ``alpha = (x + i p) / sqrt(2)``. Homodyne detection
always measures ``x``; rotate first to read another quadrature.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import logsumexp

TOL = 1e-10


class DimensionError(ValueError):
    """Raised when mode counts or phase-space dimensions disagree."""


def _symmetrize(a):
    return 0.5 * (a + a.T)


def symplectic_form(n_modes):
    """Block-diagonal symplectic form for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def as_amplitudes(a):
    """Coerce to a 1-D complex amplitude vector."""
    arr = np.atleast_1d(np.asarray(a, dtype=complex))
    if arr.ndim != 1:
        raise DimensionError(f"amplitude vector must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("amplitudes must be finite")
    return arr


def amplitudes_to_phase(a):
    """Map complex amplitudes (..., m) to phase-space means (..., 2m)."""
    a = np.asarray(a, dtype=complex)
    out = np.empty(a.shape[:-1] + (2 * a.shape[-1],))
    out[..., 0::2] = np.sqrt(2.0) * a.real
    out[..., 1::2] = np.sqrt(2.0) * a.imag
    return out


def phase_to_amplitudes(z):
    z = np.asarray(z, dtype=float)
    return (z[..., 0::2] + 1j * z[..., 1::2]) / np.sqrt(2.0)


def coherent_overlap(a, b):
    """Inner product <a|b> of two multimode coherent states."""
    a, b = as_amplitudes(a), as_amplitudes(b)
    if a.shape != b.shape:
        raise DimensionError(f"mode counts differ: {a.size} vs {b.size}")
    return complex(np.exp(-0.5 * np.vdot(a, a).real - 0.5 * np.vdot(b, b).real + np.vdot(a, b)))


def gram_matrix(points_a, points_b=None):
    """Matrix of coherent overlaps ``G[i, j] = <a_i|b_j>`` for point arrays (n, m)."""
    A = np.atleast_2d(np.asarray(points_a, dtype=complex))
    B = A if points_b is None else np.atleast_2d(np.asarray(points_b, dtype=complex))
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"mode counts differ: {A.shape[1]} vs {B.shape[1]}")
    na = np.sum(np.abs(A) ** 2, axis=1)
    nb = np.sum(np.abs(B) ** 2, axis=1)
    return np.exp(-0.5 * na[:, None] - 0.5 * nb[None, :] + A.conj() @ B.T)


@dataclass(frozen=True)
class CoherentConstellation:
    """Weighted set of m-mode coherent amplitudes, ``sum_k w_k |a_k><a_k|``.

    Weights may be signed (a difference of two states has weights summing to 0).
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("constellation needs at least one point of shape (m,)")
        if w.shape[0] != pts.shape[0]:
            raise DimensionError(f"{pts.shape[0]} points but {w.shape[0]} weights")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise ValueError("points and weights must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points):
        pts = np.asarray(points, dtype=complex)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]))

    @classmethod
    def pure(cls, alpha):
        return cls(as_amplitudes(alpha)[None, :], np.ones(1))

    @property
    def n_modes(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def is_state(self, tol=1e-12):
        return bool(np.all(self.weights >= 0) and abs(self.weights.sum() - 1.0) <= tol)

    def mean_photons_per_mode(self):
        return float(self.weights @ np.sum(np.abs(self.points) ** 2, axis=1)) / self.n_modes

    def minus(self, other):
        """Signed constellation representing ``self - other``."""
        if other.n_modes != self.n_modes:
            raise DimensionError("mode counts differ")
        return CoherentConstellation(np.vstack([self.points, other.points]),
                                     np.concatenate([self.weights, -other.weights]))


@dataclass(frozen=True)
class GaussianPdf:
    """Real normal density on R^d."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not np.allclose(cov, cov.T, atol=TOL):
            raise ValueError("covariance must be symmetric")
        cov = _symmetrize(cov)
        if np.linalg.eigvalsh(cov).min() <= 0:
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.size

    def logpdf(self, x):
        return GaussianMixturePdf([1.0], [self]).logpdf(x)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, n, rng):
        return rng.multivariate_normal(self.mean, self.cov, size=n, method="cholesky")


class GaussianMixturePdf:
    """Finite convex mixture of normal densities sharing one dimension.

    Component parameters are stored as stacked arrays so that mixtures with
    thousands of components (random constellations) evaluate by matrix products.
    """

    def __init__(self, weights, components=None, *, means=None, covs=None):
        w = np.asarray(weights, dtype=float).ravel()
        if components is not None:
            components = list(components)
            if not components:
                raise ValueError("mixture needs at least one component")
            dims = {c.dim for c in components}
            if len(dims) != 1:
                raise DimensionError(f"components have different dimensions: {sorted(dims)}")
            means = np.array([c.mean for c in components])
            covs = np.array([c.cov for c in components])
        else:
            means = np.atleast_2d(np.asarray(means, dtype=float))
            covs = np.asarray(covs, dtype=float)
            if covs.ndim == 2:
                covs = np.broadcast_to(covs, (means.shape[0],) + covs.shape)
        if w.size != means.shape[0]:
            raise DimensionError(f"{means.shape[0]} components but {w.size} weights")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        self.weights = w
        self.means = means
        self.covs = covs
        self._shared = bool(np.all(covs == covs[0]))
        self._chol = None

    @classmethod
    def shared_cov(cls, weights, means, cov):
        means = np.atleast_2d(np.asarray(means, dtype=float))
        cov = np.asarray(cov, dtype=float)
        GaussianPdf(means[0], cov)  # validates cov
        return cls(weights, means=means, covs=cov)

    @property
    def dim(self):
        return self.means.shape[1]

    @property
    def components(self):
        return [GaussianPdf(mu, c) for mu, c in zip(self.means, self.covs)]

    def __len__(self):
        return self.weights.size

    def mean(self):
        return self.weights @ self.means

    def _factors(self):
        if self._chol is None:
            covs = self.covs[:1] if self._shared else self.covs
            self._chol = [np.linalg.cholesky(c) for c in covs]
        return self._chol

    def logpdf(self, x):
        """Log density at points ``x`` of shape (n, d) or (d,), via log-sum-exp."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.dim:
            raise DimensionError(f"points have dimension {x.shape[1]}, mixture {self.dim}")
        d = self.dim
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)
        out = np.empty(x.shape[0])
        if self._shared:
            L = self._factors()[0]
            logdet = 2.0 * np.sum(np.log(np.diag(L)))
            mu_w = np.linalg.solve(L, self.means.T).T
            mu_sq = np.sum(mu_w ** 2, axis=1)
            rows = max(1, int(4e6 // max(1, len(self))))
            for lo in range(0, x.shape[0], rows):
                y = np.linalg.solve(L, x[lo:lo + rows].T).T
                sq = np.sum(y ** 2, axis=1)[:, None] + mu_sq[None, :] - 2.0 * y @ mu_w.T
                np.maximum(sq, 0.0, out=sq)
                out[lo:lo + rows] = logsumexp(logw[None, :] - 0.5 * sq, axis=1)
            out -= 0.5 * (d * np.log(2 * np.pi) + logdet)
        else:
            terms = np.empty((x.shape[0], len(self)))
            for k, L in enumerate(self._factors()):
                y = np.linalg.solve(L, (x - self.means[k]).T)
                logdet = 2.0 * np.sum(np.log(np.diag(L)))
                terms[:, k] = logw[k] - 0.5 * (np.sum(y ** 2, axis=0) + d * np.log(2 * np.pi) + logdet)
            out = logsumexp(terms, axis=1)
        return out[0] if single else out

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def sample(self, n, rng):
        idx = rng.choice(len(self), size=n, p=self.weights)
        z = rng.standard_normal((n, self.dim))
        if self._shared:
            return self.means[idx] + z @ self._factors()[0].T
        chols = np.array(self._factors())
        return self.means[idx] + np.einsum("nij,nj->ni", chols[idx], z)


def wigner_of_coherent(a):
    """Wigner density of the coherent state ``|a>``."""
    a = as_amplitudes(a)
    return GaussianPdf(amplitudes_to_phase(a), 0.5 * np.eye(2 * a.size))


def wigner_of_constellation(c):
    """Wigner density of a coherent mixture; requires nonnegative normalized weights."""
    if not c.is_state():
        raise ValueError("constellation weights must be a probability vector")
    return GaussianMixturePdf.shared_cov(c.weights, amplitudes_to_phase(c.points),
                                         0.5 * np.eye(2 * c.n_modes))


def wigner_of_thermal(E_bar, m):
    """Wigner density of the m-mode thermal state with mean photon number ``E_bar`` per mode."""
    if E_bar < 0:
        raise ValueError(f"mean photon number must be >= 0, got {E_bar}")
    if m < 1:
        raise ValueError("need at least one mode")
    return GaussianPdf(np.zeros(2 * m), (E_bar + 0.5) * np.eye(2 * m))


# --- Gaussian unitaries -----------------------------------------------------

GATE_KINDS = ("beamsplitter", "phase", "squeeze", "displace")


@dataclass(frozen=True)
class Gate:
    """One elementary Gaussian unitary.

    ``beamsplitter(i, j, theta)``: ``x_i -> c x_i - s x_j``, ``x_j -> s x_i + c x_j``
    (same for p). ``phase(i, phi)`` rotates ``(x, p)`` counter-clockwise by phi.
    ``squeeze(i, r)`` maps ``x -> e^-r x``, ``p -> e^r p``. ``displace(i, a)``
    shifts the mode by the complex amplitude ``a``.
    """

    kind: str
    modes: tuple
    param: complex

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "beamsplitter" else 1
        modes = tuple(int(k) for k in np.atleast_1d(self.modes))
        if len(modes) != want or len(set(modes)) != want or min(modes) < 0:
            raise ValueError(f"{self.kind} needs {want} distinct nonnegative mode indices, got {modes}")
        if self.kind != "displace" and complex(self.param).imag != 0:
            raise ValueError(f"{self.kind} parameter must be real")
        object.__setattr__(self, "modes", modes)

    def affine(self, n_modes):
        if max(self.modes) >= n_modes:
            raise DimensionError(f"gate on modes {self.modes} in a {n_modes}-mode circuit")
        S = np.eye(2 * n_modes)
        d = np.zeros(2 * n_modes)
        i = self.modes[0]
        if self.kind == "displace":
            a = complex(self.param)
            d[2 * i:2 * i + 2] = np.sqrt(2.0) * np.array([a.real, a.imag])
        elif self.kind == "phase":
            c, s = np.cos(self.param.real), np.sin(self.param.real)
            S[2 * i:2 * i + 2, 2 * i:2 * i + 2] = [[c, -s], [s, c]]
        elif self.kind == "squeeze":
            r = complex(self.param).real
            S[2 * i, 2 * i] = np.exp(-r)
            S[2 * i + 1, 2 * i + 1] = np.exp(r)
        else:
            j = self.modes[1]
            t = complex(self.param).real
            c, s = np.cos(t), np.sin(t)
            for q in (0, 1):
                a, b = 2 * i + q, 2 * j + q
                S[a, a], S[a, b], S[b, a], S[b, b] = c, -s, s, c
        return S, d


def beamsplitter(i, j, theta):
    return Gate("beamsplitter", (i, j), theta)


def phase_rotation(i, phi):
    return Gate("phase", (i,), phi)


def squeeze(i, r):
    return Gate("squeeze", (i,), r)


def displace(i, amount):
    return Gate("displace", (i,), complex(amount))


@dataclass(frozen=True)
class SymplecticCircuit:
    n_modes: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_modes < 0:
            raise ValueError("mode count must be nonnegative")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.modes) >= self.n_modes:
                raise DimensionError(f"gate on modes {g.modes} in a {self.n_modes}-mode circuit")

    def affine(self):
        """Composed ``(S, d)`` with ``z -> S z + d``; S is checked to be symplectic."""
        n = self.n_modes
        S = np.eye(2 * n)
        d = np.zeros(2 * n)
        for g in self.gates:
            Sg, dg = g.affine(n)
            S = Sg @ S
            d = Sg @ d + dg
        omega = symplectic_form(n)
        if n and np.max(np.abs(S @ omega @ S.T - omega)) > TOL:
            raise ArithmeticError("composed circuit is not symplectic to 1e-10")
        return S, d


@dataclass(frozen=True)
class GaussianState:
    """Gaussian quantum state given by its mean and covariance in phase space."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = _symmetrize(np.atleast_2d(np.asarray(self.cov, dtype=float)))
        if mean.size % 2 or cov.shape != (mean.size, mean.size):
            raise DimensionError(f"inconsistent mean {mean.shape} / cov {cov.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def vacuum(cls, n_modes):
        return cls(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))

    @classmethod
    def coherent(cls, alpha):
        a = as_amplitudes(alpha)
        return cls(amplitudes_to_phase(a), 0.5 * np.eye(2 * a.size))

    @property
    def n_modes(self):
        return self.mean.size // 2

    def is_physical(self, tol=TOL):
        if self.n_modes == 0:
            return True
        h = self.cov + 0.5j * symplectic_form(self.n_modes)
        return bool(np.linalg.eigvalsh(h).min() >= -tol)

    def attach_vacua(self, k):
        """Append ``k`` vacuum modes after the existing ones."""
        if k == 0:
            return self
        n = self.mean.size
        cov = np.zeros((n + 2 * k, n + 2 * k))
        cov[:n, :n] = self.cov
        cov[n:, n:] = 0.5 * np.eye(2 * k)
        return GaussianState(np.concatenate([self.mean, np.zeros(2 * k)]), cov)


def apply_circuit(s, circ):
    if circ.n_modes != s.n_modes:
        raise DimensionError(f"circuit acts on {circ.n_modes} modes, state has {s.n_modes}")
    S, d = circ.affine()
    return GaussianState(S @ s.mean + d, S @ s.cov @ S.T)


def condition_on_homodyne(s, mode, rng):
    """Measure ``x`` of one mode; return the outcome and the post-measurement state.

    The measured mode is removed; the others are updated by Gaussian conditioning
    on the sampled outcome.
    """
    if not 0 <= mode < s.n_modes:
        raise DimensionError(f"mode {mode} out of range for {s.n_modes}-mode state")
    i = 2 * mode
    var = s.cov[i, i]
    outcome = float(s.mean[i] + np.sqrt(var) * rng.standard_normal())
    keep = np.r_[0:i, i + 2:s.mean.size]
    gain = s.cov[keep, i] / var
    mean = s.mean[keep] + gain * (outcome - s.mean[i])
    cov = s.cov[np.ix_(keep, keep)] - np.outer(gain, s.cov[i, keep])
    return outcome, GaussianState(mean, cov)


def mahalanobis_sq(mu0, mu1, cov):
    diff = np.asarray(mu0, dtype=float) - np.asarray(mu1, dtype=float)
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape != (diff.size, diff.size):
        raise DimensionError(f"cov shape {cov.shape} vs mean length {diff.size}")
    try:
        factor = cho_factor(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance must be positive definite") from exc
    return float(diff @ cho_solve(factor, diff))
