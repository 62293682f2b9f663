"""Truncated Fock-space reference computations.

These routines are deliberately independent of the closed-form phase-space
paths: kets are built from the number-basis expansion, operators are handled
as explicit matrices, and spectra come from dense eigendecompositions. They
exist to check the fast paths, not to replace them.

A density operator that is a finite coherent mixture is stored in factored
form ``V diag(w) V^H`` (columns of ``V`` are truncated kets). Pairwise
functionals then work on the joint column span of both factors, which is
exact in the truncated space and avoids forming ``dim x dim`` matrices.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.stats import poisson

from ._numerics import golden_section_min
from .gaussian_core import CoherentConstellation, DimensionError, as_amplitudes, gram_matrix

TRUNCATION_TOL = 1e-8
EIG_FLOOR = 1e-12


class CutoffTooSmallError(ValueError):
    pass


class NotADensityError(ValueError):
    pass


def adaptive_cutoff(points):
    """Per-mode photon cutoff large enough for every amplitude in ``points``."""
    r = float(np.max(np.abs(np.asarray(points, dtype=complex)), initial=0.0))
    return max(10, math.ceil(r * r + 6 * r + 10))


def _mode_ket(a, n_max):
    amp = np.empty(n_max + 1, dtype=complex)
    amp[0] = np.exp(-0.5 * abs(a) ** 2)
    for n in range(1, n_max + 1):
        amp[n] = amp[n - 1] * a / math.sqrt(n)
    return amp


def coherent_ket(a, n_max):
    """Number-basis amplitudes of ``|a>``, tensor ordered with mode 0 most significant."""
    a = as_amplitudes(a)
    if n_max < 1:
        raise ValueError("cutoff must be >= 1")
    for aj in a:
        tail = poisson.sf(n_max, abs(aj) ** 2)
        if tail >= TRUNCATION_TOL:
            raise CutoffTooSmallError(
                f"cutoff {n_max} leaves truncated mass {tail:.2e} for amplitude {aj:.3g}")
    ket = np.ones(1, dtype=complex)
    for aj in a:
        ket = np.kron(ket, _mode_ket(aj, n_max))
    return ket


@dataclass
class FockOperator:
    """Hermitian operator on ``n_modes`` modes truncated at ``n_max`` photons per mode.

    Either ``matrix`` is given, or the factor pair ``kets`` (dim x K) and
    ``weights`` (K,) with ``matrix = kets @ diag(weights) @ kets^H``.
    """

    n_max: int
    n_modes: int
    matrix: np.ndarray = None
    kets: np.ndarray = None
    weights: np.ndarray = None

    def __post_init__(self):
        if self.matrix is None and self.kets is None:
            raise ValueError("need a matrix or a ket factorisation")
        if self.matrix is not None:
            self.matrix = np.asarray(self.matrix, dtype=complex)
            if self.matrix.shape != (self.dim, self.dim):
                raise DimensionError(f"matrix shape {self.matrix.shape} != ({self.dim}, {self.dim})")
            if np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) > 1e-12:
                raise ValueError("operator is not Hermitian to 1e-12")

    @property
    def dim(self):
        return (self.n_max + 1) ** self.n_modes

    @property
    def factored(self):
        return self.kets is not None

    def dense(self):
        if self.matrix is None:
            self.matrix = (self.kets * self.weights) @ self.kets.conj().T
        return self.matrix

    def trace(self):
        if self.factored:
            return float(np.real(np.sum(self.weights * np.sum(np.abs(self.kets) ** 2, axis=0))))
        return float(np.trace(self.matrix).real)


def density_from_constellation(c, n_max=None):
    """Truncated ``sum_k w_k |a_k><a_k|`` (signed weights allowed)."""
    if n_max is None:
        n_max = adaptive_cutoff(c.points)
    kets = np.column_stack([coherent_ket(p, n_max) for p in c.points])
    return FockOperator(n_max, c.n_modes, kets=kets, weights=c.weights.copy())


def thermal_density(E_bar, n_max, n_modes=1):
    """Diagonal thermal state ``(1 - e^-b) e^(-b N)`` with mean photon number ``E_bar``."""
    if E_bar < 0:
        raise ValueError("mean photon number must be >= 0")
    q = E_bar / (E_bar + 1.0)
    diag = (1.0 - q) * q ** np.arange(n_max + 1)
    full = np.ones(1)
    for _ in range(n_modes):
        full = np.kron(full, diag)
    return FockOperator(n_max, n_modes, matrix=np.diag(full).astype(complex))


def _check_pair(r0, r1):
    if (r0.n_max, r0.n_modes) != (r1.n_max, r1.n_modes):
        raise DimensionError(
            f"operators live on different spaces: {(r0.n_modes, r0.n_max)} vs {(r1.n_modes, r1.n_max)}")


def _compress(r0, r1):
    """Small Hermitian matrices ``A0, A1`` unitarily equivalent to ``r0, r1`` on their joint support."""
    _check_pair(r0, r1)
    if r0.factored and r1.factored and r0.kets.shape[1] + r1.kets.shape[1] < r0.dim:
        k0 = r0.kets.shape[1]
        _, R = np.linalg.qr(np.hstack([r0.kets, r1.kets]))
        R0, R1 = R[:, :k0], R[:, k0:]
        A0 = (R0 * r0.weights) @ R0.conj().T
        A1 = (R1 * r1.weights) @ R1.conj().T
    else:
        A0, A1 = r0.dense(), r1.dense()
    return 0.5 * (A0 + A0.conj().T), 0.5 * (A1 + A1.conj().T)


def _check_density(A, name):
    ev = np.linalg.eigvalsh(A)
    tr = ev.sum()
    if ev.min() < -1e-10 or tr > 1 + 1e-8 or tr < 1 - 1e-6:
        raise NotADensityError(f"{name} is not a density operator (trace {tr:.3g}, min eig {ev.min():.3g})")
    return ev


def trace_distance_fock(r0, r1):
    """Half the trace norm of ``r0 - r1``."""
    A0, A1 = _compress(r0, r1)
    _check_density(A0, "r0")
    _check_density(A1, "r1")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(A0 - A1))))


def hs_norm_sq_fock(delta):
    """``tr(delta^2)`` for a single (possibly signed) operator."""
    if delta.factored:
        k = delta.kets
        M = k.conj().T @ k
        return float(np.real(np.sum(delta.weights[:, None] * np.abs(M) ** 2 * delta.weights[None, :])))
    return float(np.sum(np.abs(delta.matrix) ** 2))


def _psd_power(A, s):
    ev, U = np.linalg.eigh(A)
    ev = np.where(ev > EIG_FLOOR, ev, 0.0)
    with np.errstate(divide="ignore"):
        powered = np.where(ev > 0, ev ** s, 0.0)
    return (U * powered) @ U.conj().T


def quantum_chernoff(r0, r1, tol=1e-6):
    """Quantum Chernoff exponent ``-ln min_s tr r0^s r1^(1-s)``."""
    A0, A1 = _compress(r0, r1)
    e0, U0 = np.linalg.eigh(A0)
    e1, U1 = np.linalg.eigh(A1)
    for ev, name in ((e0, "r0"), (e1, "r1")):
        if ev.min() < -1e-10 or ev.sum() > 1 + 1e-8:
            raise NotADensityError(f"{name} is not a density operator")
    e0 = np.where(e0 > EIG_FLOOR, e0, 0.0)
    e1 = np.where(e1 > EIG_FLOOR, e1, 0.0)
    overlap = np.abs(U0.conj().T @ U1) ** 2

    def s_trace(s):
        p0 = np.where(e0 > 0, e0 ** s, 0.0)
        p1 = np.where(e1 > 0, e1 ** (1.0 - s), 0.0)
        return float(p0 @ overlap @ p1)

    _, best = golden_section_min(s_trace, 1e-4, 1 - 1e-4, tol=tol)
    return float(-np.log(best))


def fidelity_fock(r0, r1):
    """Root fidelity ``|| sqrt(r0) sqrt(r1) ||_1``."""
    A0, A1 = _compress(r0, r1)
    return float(np.sum(np.linalg.svd(_psd_power(A0, 0.5) @ _psd_power(A1, 0.5), compute_uv=False)))


def hs_norm_sq_gram(delta):
    """``tr(delta^2)`` for a signed coherent constellation, from exact overlaps."""
    G2 = np.abs(gram_matrix(delta.points)) ** 2
    w = delta.weights
    return float(w @ G2 @ w)


def _gram_root(G):
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        pass
    ev, U = np.linalg.eigh(G)
    top = ev.max()
    if ev.min() < -1e-8 * top:
        raise ArithmeticError(f"Gram matrix has eigenvalue {ev.min():.3g}; points nearly coincide")
    ev = np.where(ev > EIG_FLOOR * top, ev, 0.0)
    return (U * np.sqrt(ev)) @ U.conj().T


def signed_spectrum(delta):
    """Nonzero spectrum of ``sum_k w_k |a_k><a_k|`` via the Gram matrix of the points."""
    R = _gram_root(gram_matrix(delta.points))
    H = (R.conj().T * delta.weights) @ R
    return np.linalg.eigvalsh(0.5 * (H + H.conj().T))


def trace_distance_gram(r0, r1):
    """Half trace norm of ``r0 - r1`` for coherent mixtures, without truncation."""
    if r0.n_modes != r1.n_modes:
        raise DimensionError("mode counts differ")
    return 0.5 * float(np.sum(np.abs(signed_spectrum(r0.minus(r1)))))


def wigner_grid_fock(rho, xs, ps, pad=80):
    """Single-mode Wigner function on a grid by displaced parity, ``W = tr(rho D P D^H) / pi``."""
    if rho.n_modes != 1:
        raise DimensionError("grid Wigner oracle is single-mode only")
    R = rho.dense()
    n = rho.n_max + 1
    big = n + pad
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    parity = (-1.0) ** np.arange(big)
    W = np.empty((len(xs), len(ps)))
    for i, x in enumerate(xs):
        for j, p in enumerate(ps):
            alpha = (x + 1j * p) / np.sqrt(2.0)
            # columns: D(-alpha)|n>, so <n|D P D^H|n'> = sum_k (-1)^k conj(D_kn) D_kn'
            D = expm(-alpha * a.conj().T + np.conj(alpha) * a)[:, :n]
            kernel = (D.conj().T * parity) @ D
            W[i, j] = np.real(np.sum(R * kernel.T)) / np.pi
    return W
