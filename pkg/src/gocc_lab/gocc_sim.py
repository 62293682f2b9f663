"""Monte Carlo execution of GOCC measurement protocols on coherent mixtures.

A protocol is a list of rounds. Each round attaches vacuum ancillas, applies a
fixed Gaussian circuit followed by displacements that depend affinely on the
outcomes recorded so far, and homodynes (x quadrature) the last ``measure``
modes. The last round measures everything that is left, and a decision rule
maps the flat outcome record to a guess 0 or 1.

Adaptivity is restricted to affine feed-forward and the decision rules below;
that is a strict subset of what a general GOCC protocol may do.

Coherent inputs all share the vacuum covariance and conditioning on homodyne
outcomes does not change the covariance, so the covariance trajectory is the
same for every trial. Only the means are tracked per trial.
"""
from dataclasses import dataclass, field

import numpy as np

from ._numerics import map_chunks
from .gaussian_core import (
    DimensionError,
    GaussianMixturePdf,
    GaussianPdf,
    GaussianState,
    SymplecticCircuit,
    amplitudes_to_phase,
    phase_to_amplitudes,
)


class ProtocolError(ValueError):
    """Inconsistent protocol definition."""


@dataclass(frozen=True)
class FeedForward:
    """Displace ``target_mode`` by ``offset + sum_k coefficients[k] * outcome[k]``.

    Indices into the outcome record count every homodyne result of earlier
    rounds, in order.
    """

    target_mode: int
    offset: complex = 0j
    coefficients: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in self.coefficients))
        object.__setattr__(self, "offset", complex(self.offset))


@dataclass(frozen=True)
class Round:
    ancillas: int
    circuit: SymplecticCircuit
    measure: int
    feedforward: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "feedforward", tuple(self.feedforward))


@dataclass(frozen=True)
class DecisionRule:
    """Map the outcome record to a guess.

    ``sign``: guess 0 when ``coefficients . record > threshold``, else 1.
    ``binned``: bin ``coefficients . record`` by ``edges`` and look the guess up
    in ``labels`` (one more label than edges).
    """

    kind: str
    coefficients: tuple
    threshold: float = 0.0
    edges: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
        object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))
        if self.kind == "sign":
            return
        if self.kind != "binned":
            raise ProtocolError(f"unknown decision type {self.kind!r}")
        if len(self.labels) != len(self.edges) + 1:
            raise ProtocolError("binned decision needs len(labels) == len(edges) + 1")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ProtocolError("bin edges must increase strictly")
        if any(v not in (0, 1) for v in self.labels):
            raise ProtocolError("labels must be 0 or 1")

    def decide(self, record):
        stat = np.asarray(record, dtype=float) @ np.asarray(self.coefficients)
        if self.kind == "sign":
            return np.where(stat > self.threshold, 0, 1)
        return np.asarray(self.labels)[np.searchsorted(self.edges, stat, side="right")]


@dataclass(frozen=True)
class GoccProtocol:
    n_modes: int
    rounds: tuple
    decision: DecisionRule
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))
        self.validate()

    def validate(self):
        if self.n_modes < 1:
            raise ProtocolError("protocol needs at least one input mode")
        if not self.rounds:
            raise ProtocolError("protocol needs at least one round")
        live, seen = self.n_modes, 0
        for r, rnd in enumerate(self.rounds):
            where = f"round {r}"
            if rnd.ancillas < 0:
                raise ProtocolError(f"{where}: negative ancilla count")
            width = live + rnd.ancillas
            if rnd.circuit.n_modes != width:
                raise ProtocolError(f"{where}: circuit acts on {rnd.circuit.n_modes} modes, "
                                    f"{width} are present")
            if not 1 <= rnd.measure <= width:
                raise ProtocolError(f"{where}: must measure between 1 and {width} modes")
            for ff in rnd.feedforward:
                if not 0 <= ff.target_mode < width:
                    raise ProtocolError(f"{where}: feed-forward targets mode {ff.target_mode}")
                if len(ff.coefficients) > seen:
                    raise ProtocolError(f"{where}: feed-forward uses {len(ff.coefficients)} outcomes, "
                                        f"only {seen} exist before this round")
            live = width - rnd.measure
            seen += rnd.measure
        if live != 0:
            raise ProtocolError(f"{live} modes left unmeasured after the final round")
        if len(self.decision.coefficients) != seen:
            raise ProtocolError(f"decision has {len(self.decision.coefficients)} coefficients "
                                f"for {seen} outcomes")

    @property
    def n_outcomes(self):
        return sum(r.measure for r in self.rounds)


def run_on_means(protocol, means, rng):
    """Execute the protocol on a batch of coherent inputs given by phase-space means.

    ``means`` has shape (N, 2m). Returns the outcome record, shape (N, outcomes).
    """
    means = np.array(means, dtype=float)
    if means.ndim != 2 or means.shape[1] != 2 * protocol.n_modes:
        raise DimensionError(f"means must have shape (N, {2 * protocol.n_modes})")
    N = means.shape[0]
    cov = 0.5 * np.eye(means.shape[1])
    record = np.empty((N, 0))
    for rnd in protocol.rounds:
        k = rnd.ancillas
        if k:
            means = np.hstack([means, np.zeros((N, 2 * k))])
            cov = GaussianState(np.zeros(cov.shape[0]), cov).attach_vacua(k).cov
        S, d = rnd.circuit.affine()
        means = means @ S.T + d
        cov = S @ cov @ S.T
        for ff in rnd.feedforward:
            shift = np.full(N, ff.offset)
            if ff.coefficients:
                shift = shift + record[:, :len(ff.coefficients)] @ np.asarray(ff.coefficients)
            means[:, 2 * ff.target_mode] += np.sqrt(2.0) * shift.real
            means[:, 2 * ff.target_mode + 1] += np.sqrt(2.0) * shift.imag
        width = rnd.circuit.n_modes
        xi = np.arange(2 * (width - rnd.measure), 2 * width, 2)
        keep = np.arange(2 * (width - rnd.measure))
        Sxx = 0.5 * (cov[np.ix_(xi, xi)] + cov[np.ix_(xi, xi)].T)
        chol = np.linalg.cholesky(Sxx)
        z = rng.standard_normal((N, xi.size))
        x = means[:, xi] + z @ chol.T
        gain = np.linalg.solve(Sxx, cov[np.ix_(xi, keep)]).T
        means = means[:, keep] + (x - means[:, xi]) @ gain.T
        cov = cov[np.ix_(keep, keep)] - gain @ cov[np.ix_(xi, keep)]
        cov = 0.5 * (cov + cov.T)
        record = np.hstack([record, x])
    return record


def sample_inputs(r0, r1, rng, count):
    """Draw hypotheses uniformly and a component of the chosen mixture for each trial."""
    hyp = rng.integers(0, 2, size=count)
    lam0 = rng.choice(len(r0), size=count, p=r0.weights)
    lam1 = rng.choice(len(r1), size=count, p=r1.weights)
    alphas = np.where(hyp[:, None] == 0, r0.points[lam0], r1.points[lam1])
    return hyp, alphas


def _check_inputs(n_modes, r0, r1):
    for c in (r0, r1):
        if c.n_modes != n_modes:
            raise DimensionError(f"protocol has {n_modes} modes, state has {c.n_modes}")
        if not c.is_state():
            raise ValueError("input constellations must be states")


def run_protocol_error_prob(protocol, r0, r1, n_trials, seed):
    """Empirical error probability of ``protocol`` with equal priors; ``(p_err, std_err)``."""
    _check_inputs(protocol.n_modes, r0, r1)
    if n_trials < 1:
        raise ValueError("need at least one trial")

    def chunk(rng, count):
        hyp, alphas = sample_inputs(r0, r1, rng, count)
        record = run_on_means(protocol, amplitudes_to_phase(alphas), rng)
        return int(np.sum(protocol.decision.decide(record) != hyp))

    errors = sum(map_chunks(chunk, n_trials, seed, stream=1))
    p = errors / n_trials
    return p, float(np.sqrt(max(p * (1 - p), 1.0 / n_trials) / n_trials))


def gocc_norm_from_error(p_err):
    """Distinguishability norm achieved by a test with error ``p_err``."""
    if not 0.0 <= p_err <= 0.5:
        raise ValueError(f"error probability {p_err} outside [0, 1/2]; negate the decision rule")
    return 2.0 * (1.0 - 2.0 * p_err)


def heterodyne_sample(state, rng, size=None):
    """Sample heterodyne outcomes (complex amplitudes) from a Gaussian state.

    Outcomes follow the Husimi density: phase-space covariance ``cov + I/2``.
    """
    shape = () if size is None else (size,)
    cov = state.cov + 0.5 * np.eye(state.mean.size)
    z = rng.multivariate_normal(state.mean, cov, size=shape, method="cholesky")
    return phase_to_amplitudes(z)


def husimi_of_constellation(c):
    """Husimi density in phase-space coordinates: the Wigner mixture with covariance I."""
    return GaussianMixturePdf.shared_cov(c.weights, amplitudes_to_phase(c.points),
                                         np.eye(2 * c.n_modes))


def homodyne_of_constellation(c):
    """Density of x-homodyne outcomes on every mode (mixture of N(sqrt2 Re a, I/2))."""
    return GaussianMixturePdf.shared_cov(c.weights, np.sqrt(2.0) * c.points.real,
                                         0.5 * np.eye(c.n_modes))


def ml_attack_error(r0, r1, measurement, n_trials, seed):
    """Error of the likelihood-ratio decision after a fixed Gaussian measurement on all modes.

    ``measurement`` is ``"heterodyne"`` or ``"homodyne"`` (x on every mode).
    Both are GOCC: heterodyne is a balanced beamsplitter with a vacuum
    ancilla followed by homodyning both outputs. Returns ``(p_err, std_err)``.
    """
    _check_inputs(r0.n_modes, r0, r1)
    if measurement == "heterodyne":
        q0, q1 = husimi_of_constellation(r0), husimi_of_constellation(r1)
    elif measurement == "homodyne":
        q0, q1 = homodyne_of_constellation(r0), homodyne_of_constellation(r1)
    else:
        raise ValueError(f"unknown measurement {measurement!r}")

    def chunk(rng, count):
        hyp, alphas = sample_inputs(r0, r1, rng, count)
        if measurement == "heterodyne":
            y = amplitudes_to_phase(alphas) + rng.standard_normal((count, 2 * r0.n_modes))
        else:
            y = np.sqrt(2.0) * alphas.real + np.sqrt(0.5) * rng.standard_normal((count, r0.n_modes))
        guess = np.where(q0.logpdf(y) >= q1.logpdf(y), 0, 1)
        return int(np.sum(guess != hyp))

    errors = sum(map_chunks(chunk, n_trials, seed, stream=2))
    p = errors / n_trials
    return p, float(np.sqrt(max(p * (1 - p), 1.0 / n_trials) / n_trials))


@dataclass(frozen=True)
class ResponseFunction:
    """Measurement response ``F(z)`` on phase space (vectorised over rows of z).

    ``bound=None`` declares a W+ response, ``0 <= F <= 1``; otherwise
    ``|2F - 1| <= bound``.
    """

    fn: object
    bound: float = None

    def __call__(self, z):
        return np.asarray(self.fn(z), dtype=float)

    def check(self, values, tol=1e-12):
        if self.bound is None:
            ok = np.all((values >= -tol) & (values <= 1 + tol))
        else:
            ok = np.all(np.abs(2 * values - 1) <= self.bound + tol)
        if not ok:
            raise ValueError("response function left its declared range at a sampled point")


def wplus_bias(F, w0, w1, n_samples, seed):
    """Monte Carlo ``int (w0 - w1) F``; returns ``(estimate, std_err)``."""
    if isinstance(w0, GaussianPdf):
        w0 = GaussianMixturePdf([1.0], [w0])
    if isinstance(w1, GaussianPdf):
        w1 = GaussianMixturePdf([1.0], [w1])
    if w0.dim != w1.dim:
        raise DimensionError("densities have different dimensions")

    def chunk(rng, count):
        pick = rng.random(count) < 0.5
        x = np.empty((count, w0.dim))
        n0 = int(pick.sum())
        x[pick] = w0.sample(n0, rng)
        x[~pick] = w1.sample(count - n0, rng)
        vals = F(x)
        F.check(vals)
        # (w0 - w1) / q = 2 tanh((l0 - l1) / 2)
        return 2.0 * np.tanh(0.5 * (w0.logpdf(x) - w1.logpdf(x))) * vals

    vals = np.concatenate(map_chunks(chunk, n_samples, seed, stream=3))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))
