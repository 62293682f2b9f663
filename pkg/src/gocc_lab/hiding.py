"""Random coherent constellations that hide a bit from Gaussian measurements.

``2L`` multimode coherent amplitudes are drawn i.i.d. complex normal with
``E|a|^2 = E_bar`` per mode; even-numbered points (1-based) form state 0 and
odd-numbered ones state 1. ``L`` is placed between the resolvability threshold
of the Wigner (AWGN) channel and the coding capacity of the noiseless bosonic
channel, where the states are far apart in trace distance but their Wigner
functions nearly coincide.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import xlogy

from .fock_oracle import trace_distance_gram
from .gaussian_core import CoherentConstellation, wigner_of_constellation, wigner_of_thermal
from .gocc_sim import ml_attack_error
from .wigner_metrics import l1_from_logs, proposal_logs

#: Largest constellation (2L points) for the exact Gram path; 4096^2 complex is 268 MB.
MAX_GRAM_POINTS = 4096


class InfeasibleParameters(ValueError):
    pass


def capacity_noiseless(E_bar):
    """Classical capacity (nats/mode) of the noiseless bosonic channel at mean photon number E_bar."""
    if E_bar < 0:
        raise ValueError("mean photon number must be >= 0")
    return float(xlogy(E_bar + 1.0, E_bar + 1.0) - xlogy(E_bar, E_bar))


def capacity_awgn(E_bar):
    """Capacity of the real AWGN channel seen by the Wigner functions, per mode."""
    if E_bar < 0:
        raise ValueError("mean photon number must be >= 0")
    return 0.5 * math.log1p(2.0 * E_bar)


def l_window(m, E_bar, delta):
    """Admissible range ``(lo, hi)`` for the total number of points 2L."""
    lo = 2 * m * (capacity_awgn(E_bar) + delta)
    hi = m * (capacity_noiseless(E_bar) - delta)
    return lo, hi


def choose_L(m, E_bar, delta):
    """Codewords per state at the geometric midpoint of the admissible window for 2L."""
    lo, hi = l_window(m, E_bar, delta)
    if lo >= hi:
        raise InfeasibleParameters(
            f"empty window: 2m(C_W+delta)={lo:.4g} >= m(g-delta)={hi:.4g}; lower delta")
    L = round(0.5 * math.exp(0.5 * (lo + hi)))
    if L < 1 or not math.exp(lo) <= 2 * L <= math.exp(hi):
        raise InfeasibleParameters(f"window [{math.exp(lo):.3g}, {math.exp(hi):.3g}] holds no even integer; raise m")
    return L


@dataclass(frozen=True)
class HidingParams:
    m: int
    E_bar: float
    delta: float
    L: int
    seed: int

    @classmethod
    def auto(cls, m, E_bar, delta, seed):
        return cls(m, E_bar, delta, choose_L(m, E_bar, delta), seed)


def sample_constellations(p):
    """The two random states for ``p``; deterministic in ``p.seed``."""
    rng = np.random.default_rng(p.seed)
    sd = math.sqrt(p.E_bar / 2.0)
    pts = sd * rng.standard_normal((2 * p.L, p.m)) + 1j * sd * rng.standard_normal((2 * p.L, p.m))
    # 1-based even indices 2, 4, ... are 0-based 1, 3, ...
    return CoherentConstellation.uniform(pts[1::2]), CoherentConstellation.uniform(pts[0::2])


@dataclass
class HidingReport:
    params: dict
    capacities: dict
    trace_dist_half: float
    trace_dist_status: str
    l1_w0_w1: float
    l1_w0_w1_err: float
    l1_w0_thermal: float
    l1_w0_thermal_err: float
    l1_w1_thermal: float
    l1_w1_thermal_err: float
    mean_photons_per_mode: list
    energy_flags: list
    heterodyne_bias: float
    heterodyne_bias_err: float
    homodyne_bias: float
    homodyne_bias_err: float
    n_mc_samples: int
    n_trials: int
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def run_hiding_experiment(p, n_mc_samples, n_trials=None, r0=None, r1=None,
                          max_gram_points=MAX_GRAM_POINTS):
    """Trace distance, Wigner proximity and Gaussian-attack bias for one draw.

    ``r0``/``r1`` override the random draw (used for the single-mode reduction).
    When 2L exceeds ``max_gram_points`` the exact trace distance is not
    computed and ``trace_dist_half`` is NaN with the reason in
    ``trace_dist_status``.
    """
    if r0 is None or r1 is None:
        r0, r1 = sample_constellations(p)
    n_trials = n_mc_samples if n_trials is None else n_trials
    n_points = len(r0) + len(r1)
    if n_points <= max_gram_points:
        td, status = trace_distance_gram(r0, r1), "exact (Gram)"
    else:
        td = float("nan")
        status = (f"skipped: 2L={n_points} exceeds the exact Gram limit of {max_gram_points} points "
                  f"({16 * n_points ** 2 / 2 ** 30:.1f} GiB per dense matrix)")

    w0, w1 = wigner_of_constellation(r0), wigner_of_constellation(r1)
    thermal = wigner_of_thermal(p.E_bar, p.m)
    seed = p.seed
    l1_01 = l1_from_logs(*proposal_logs(w0, w1, n_mc_samples, seed, stream=10))
    l1_0t = l1_from_logs(*proposal_logs(w0, thermal, n_mc_samples, seed, stream=11))
    l1_1t = l1_from_logs(*proposal_logs(w1, thermal, n_mc_samples, seed, stream=12))
    het = ml_attack_error(r0, r1, "heterodyne", n_trials, seed)
    hom = ml_attack_error(r0, r1, "homodyne", n_trials, seed + 1)

    photons = [r0.mean_photons_per_mode(), r1.mean_photons_per_mode()]
    slack = 3.0 * math.sqrt(p.E_bar / (p.L * p.m))
    flags = [ph > p.E_bar + slack for ph in photons]
    g, cw = capacity_noiseless(p.E_bar), capacity_awgn(p.E_bar)
    lo, hi = l_window(p.m, p.E_bar, p.delta)
    return HidingReport(
        params=asdict(p),
        capacities={"g": g, "C_W": cw, "window_2L": [math.exp(lo), math.exp(hi)]},
        trace_dist_half=td,
        trace_dist_status=status,
        l1_w0_w1=l1_01[0], l1_w0_w1_err=l1_01[1],
        l1_w0_thermal=l1_0t[0], l1_w0_thermal_err=l1_0t[1],
        l1_w1_thermal=l1_1t[0], l1_w1_thermal_err=l1_1t[1],
        mean_photons_per_mode=photons,
        energy_flags=flags,
        heterodyne_bias=2.0 * (1.0 - 2.0 * het[0]), heterodyne_bias_err=4.0 * het[1],
        homodyne_bias=2.0 * (1.0 - 2.0 * hom[0]), homodyne_bias_err=4.0 * hom[1],
        n_mc_samples=n_mc_samples,
        n_trials=n_trials,
    )
