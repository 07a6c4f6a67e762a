"""Worked systems: the question-answer agent, the Brownian ring, the reset clock,
and the two three-state ensembles that compare memory dimensions.

The ring and clock evaluators exploit structure (Markovian posteriors, a single
non-synchronizing window) instead of enumerating (|X||Y|)^L words.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.stats import norm

from .entropy import WeightedKernel, _plogp, check_gram, kernel_spectrum
from .errors import CapacityError, DomainError, ValidationError
from .transducer import InputModel, Transducer, steady_state

EIGEN_BUDGET = 4096
TAIL_MASS_TOL = 1e-6


# question-answer agent --------------------------------------------------------


def alice_bob() -> tuple[Transducer, np.ndarray]:
    """Two yes/no questions; repeating the last question repeats the last answer.

    State ``"xy"`` remembers the last question x and answer y. The returned
    qubit Gram has state order (00, 01, 10, 11) -> (|0>, |1>, |+>, |->): states
    sharing a last question must be orthogonal, since that question separates them.
    """
    states = ("00", "01", "10", "11")
    transitions = []
    for s in states:
        last_x, last_y = int(s[0]), int(s[1])
        for x in (0, 1):
            if x == last_x:
                transitions.append((s, x, last_y, 1.0, f"{x}{last_y}"))
            else:
                for y in (0, 1):
                    transitions.append((s, x, y, 0.5, f"{x}{y}"))
    t = Transducer.from_transitions((0, 1), (0, 1), states, transitions)
    r = 1 / math.sqrt(2)
    vecs = np.array([[1.0, 0.0], [0.0, 1.0], [r, r], [r, -r]])
    return t, np.round(vecs @ vecs.T, 15)


def memoryless_responder(n_outputs: int = 2) -> Transducer:
    """Single state; every input gets a uniformly random output."""
    outs = tuple(range(n_outputs))
    tr = [("s", x, y, 1.0 / n_outputs, "s") for x in (0, 1) for y in outs]
    return Transducer.from_transitions((0, 1), outs, ("s",), tr)


def echo() -> Transducer:
    """Single state; the output copies the input."""
    return Transducer.from_transitions((0, 1), (0, 1), ("s",), [("s", x, x, 1.0, "s") for x in (0, 1)])


# Brownian ring ----------------------------------------------------------------


@dataclass(frozen=True)
class BrownianRingParams:
    N: int
    sigma: float
    discretization: str = "bin"  # "bin": Gaussian mass over each bin; "point": density at bin centres

    def __post_init__(self):
        if self.N < 2:
            raise ValidationError("ring needs at least 2 bins")
        if not self.sigma > 0:
            raise ValidationError("sigma must be positive")
        if self.discretization not in ("bin", "point"):
            raise ValidationError(f"unknown discretization {self.discretization!r}")


def brownian_kernel_row(params: BrownianRingParams) -> np.ndarray:
    """Jump distribution over ring displacements 0..N-1, normalized over the ring."""
    n = params.N
    m = np.arange(n)
    d = np.minimum(m, n - m) / n  # wrap-around distance in circumference units
    if params.discretization == "bin":
        row = norm.cdf((d + 0.5 / n) / params.sigma) - norm.cdf((d - 0.5 / n) / params.sigma)
    else:
        row = norm.pdf(d / params.sigma)
    return row / row.sum()


def brownian_transition_matrix(params: BrownianRingParams, shift: int = 0) -> np.ndarray:
    """P[j, k]: from bin j, land in bin k, after a deterministic rotation by ``shift`` bins."""
    row = brownian_kernel_row(params)
    n = params.N
    j = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    return row[(k - j - shift) % n]


def brownian_ring(params: BrownianRingParams) -> Transducer:
    """Particle on a ring of N bins. Input 1 first rotates by half a turn; the output is the landing bin."""
    n = params.N
    probs = np.stack([brownian_transition_matrix(params, 0), brownian_transition_matrix(params, n // 2)], axis=1)
    succ = np.where(probs > 0, np.broadcast_to(np.arange(n), probs.shape), -1)
    labels = tuple(range(n))
    return Transducer((0, 1), labels, labels, probs, succ)


def brownian_gram(params: BrownianRingParams) -> np.ndarray:
    """Overlaps of |s_i> = sum_k sqrt(P_ik) |k>: G_ij = sum_k sqrt(P_ik P_jk)."""
    root = np.sqrt(brownian_transition_matrix(params))
    g = root @ root.T
    np.fill_diagonal(g, 1.0)
    return g


def brownian_quantum_entropy_bound(sigma: float) -> float:
    """Upper bound on the quantum memory entropy of the ring, valid while 2 sqrt(2 pi) sigma < 1."""
    a = 2 * math.sqrt(2 * math.pi) * sigma
    if not 0 < a < 1:
        raise DomainError(f"bound needs 0 < 2*sqrt(2*pi)*sigma < 1, got {a:.4g}")
    return 1 / (2 * math.log(2)) - (1 + 2 * a) * math.log2(a)


@dataclass(frozen=True)
class BrownianRow:
    N: int
    H_classical: float
    H_quantum: float

    @property
    def gap(self) -> float:
        return self.H_classical - self.H_quantum


def brownian_sweep(sigma: float, N_list, discretization: str = "bin") -> list[BrownianRow]:
    """Memory entropies per N. Posteriors are point masses, so these are the information terms at every L."""
    rows = []
    for n in N_list:
        if n > EIGEN_BUDGET:
            raise CapacityError(f"N = {n} exceeds the eigensolve budget of {EIGEN_BUDGET}")
        params = BrownianRingParams(int(n), sigma, discretization)
        pi = np.full(params.N, 1.0 / params.N)
        h_q = _plogp(kernel_spectrum(brownian_gram(params), pi))
        rows.append(BrownianRow(params.N, _plogp(pi), h_q))
    return rows


# reset clock ------------------------------------------------------------------


@dataclass(frozen=True)
class ResetClockParams:
    p: float = 0.5
    gamma0: float = 1.0
    gamma1: float = 10.0
    gammax: float = 0.1
    dt: float = 0.1
    tau: float = 1.0
    truncation: int | None = None  # highest tracked age; default ceil(1/dt)

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValidationError("p must lie in [0, 1]")
        if min(self.gamma0, self.gamma1, self.gammax) <= 0 or self.dt <= 0 or self.tau <= 0:
            raise ValidationError("rates, dt and tau must be positive")
        if abs(self.tau / self.dt - round(self.tau / self.dt)) > 1e-9 * max(1.0, self.tau / self.dt):
            raise ValidationError(f"tau = {self.tau} is not a multiple of dt = {self.dt}")
        if self.truncation is not None and self.truncation < 1:
            raise ValidationError("truncation must be at least 1")

    @property
    def stride(self) -> int:
        return int(round(self.tau / self.dt))

    @property
    def cutoff(self) -> int:
        return self.truncation if self.truncation is not None else math.ceil(1 / self.dt - 1e-9)

    @property
    def decay(self) -> tuple[float, float]:
        return math.exp(-self.gamma0 * self.dt), math.exp(-self.gamma1 * self.dt)

    @property
    def input_quiet(self) -> float:
        """q(x = 0) = exp(-gammax dt)."""
        return math.exp(-self.gammax * self.dt)


def clock_survival(params: ResetClockParams, n) -> np.ndarray:
    """Phi(n) = p G0^n + (1-p) G1^n."""
    g0, g1 = params.decay
    n = np.asarray(n, dtype=float)
    return params.p * g0**n + (1 - params.p) * g1**n


def clock_hazard(params: ResetClockParams) -> np.ndarray:
    """Tick probability at each tracked age 0..cutoff, 1 - Phi(n+1)/Phi(n)."""
    n = np.arange(params.cutoff + 1)
    return 1 - clock_survival(params, n + 1) / clock_survival(params, n)


def clock_machine(params: ResetClockParams) -> Transducer:
    """Truncated clock machine over ages 0..cutoff.

    Input 1 forces a tick. On input 0 the clock ticks with the age hazard and
    otherwise ages by one; the last age absorbs everything older.
    """
    T = params.cutoff
    n = np.arange(T + 1)
    h = clock_hazard(params)
    probs = np.zeros((T + 1, 2, 2))
    succ = np.full(probs.shape, -1, dtype=np.int64)
    probs[:, 0, 1] = h
    probs[:, 0, 0] = 1 - h
    probs[:, 1, 1] = 1.0
    succ[:, :, 1] = 0
    succ[:, 0, 0] = np.minimum(n + 1, T)
    return Transducer((0, 1), (0, 1), tuple(int(k) for k in n), probs, succ)


def clock_amplitudes(params: ResetClockParams) -> np.ndarray:
    """Row n: |sigma_n> = a_n |h0> + i b_n |h1> in the basis (|0>, |1>), with <h0|h1> = g."""
    g0, g1 = params.decay
    n = np.arange(params.cutoff + 1)
    phi = clock_survival(params, n)
    a = np.sqrt(params.p * g0**n / phi)
    b = np.sqrt((1 - params.p) * g1**n / phi)
    g = math.sqrt((1 - g0) * (1 - g1)) / (1 - math.sqrt(g0 * g1))
    h1 = np.array([g, math.sqrt(max(1 - g * g, 0.0))])
    return np.outer(a, [1.0, 0.0]) + 1j * np.outer(b, h1)


def clock_gram(params: ResetClockParams) -> np.ndarray:
    """Closed-form overlaps <sigma_m|sigma_n> (complex, rank at most 2)."""
    v = clock_amplitudes(params)
    gram = v.conj() @ v.T
    np.fill_diagonal(gram, 1.0)
    return check_gram(gram)


def reset_clock(params: ResetClockParams) -> tuple[Transducer, np.ndarray]:
    """Truncated clock machine with its closed-form Gram."""
    return clock_machine(params), clock_gram(params)


def _qubit_entropy(amplitudes: np.ndarray, w: np.ndarray) -> float:
    """Entropy of sum_n w_n |sigma_n><sigma_n| from the 2x2 density matrix."""
    rho = amplitudes.T @ (w[:, None] * amplitudes.conj())
    lam = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    return _plogp(lam / lam.sum())


def clock_input_model(params: ResetClockParams) -> InputModel:
    q0 = params.input_quiet
    return InputModel(np.array([q0, 1 - q0]), 1.0)


def clock_stationary_closed_form(params: ResetClockParams, n) -> np.ndarray:
    """pi_n = mu Phi~(n) for the untruncated clock, Phi~ using G_i * q(x=0)."""
    g0, g1 = params.decay
    q = params.input_quiet
    t0, t1 = g0 * q, g1 * q
    mu = (1 - t0) * (1 - t1) / (params.p * (1 - t1) + (1 - params.p) * (1 - t0))
    n = np.asarray(n, dtype=float)
    return mu * (params.p * t0**n + (1 - params.p) * t1**n)


@dataclass(frozen=True)
class ClockInformation:
    stride: int
    classical: float  # I(Z_{0:L}; S_L)
    quantum: float  # I(Z_{0:L}; M_L)
    p_silent: float  # probability of a window with no output 1
    H_classical: float  # H(S_0)
    H_quantum: float  # H(M_0)


def clock_block_information(params: ResetClockParams, stationary: np.ndarray | None = None) -> ClockInformation:
    """Block informations at L = tau/dt without enumerating words.

    Any window containing an output 1 ends in a known state (pure memory),
    so only the all-quiet window carries a mixed posterior.
    """
    t = clock_machine(params)
    amps = clock_amplitudes(params)
    pi = steady_state(t, clock_input_model(params)) if stationary is None else np.asarray(stationary, float)
    h = clock_hazard(params)
    keep = params.input_quiet * (1 - h)
    v = pi.copy()
    for _ in range(params.stride):
        moved = v * keep
        v = np.zeros_like(v)
        v[1:] = moved[:-1]
        v[-1] += moved[-1]
    p_silent = float(v.sum())
    h_c = _plogp(pi)
    h_q = _qubit_entropy(amps, pi)
    if p_silent > 0:
        post = v / p_silent
        cond_c = _plogp(post)
        cond_q = _qubit_entropy(amps, post)
    else:
        cond_c = cond_q = 0.0
    return ClockInformation(
        params.stride,
        max(h_c - p_silent * cond_c, 0.0),
        max(h_q - p_silent * cond_q, 0.0),
        p_silent,
        h_c,
        h_q,
    )


@dataclass(frozen=True)
class ClockRow:
    dt: float
    L: int
    classical_dissipation_per_time: float
    quantum_dissipation_per_time: float


def clock_sweep(params: ResetClockParams, dt_list) -> list[ClockRow]:
    """Dissipation per unit time (kT ln 2 / tau) * I at L = tau/dt, rows in decreasing dt."""
    rows = []
    for dt in sorted(dt_list, reverse=True):
        p = ResetClockParams(params.p, params.gamma0, params.gamma1, params.gammax, dt, params.tau, params.truncation)
        info = clock_block_information(p)
        rows.append(ClockRow(dt, info.stride, info.classical / p.tau, info.quantum / p.tau))
    return rows


@dataclass(frozen=True)
class ContinuumEntropy:
    value: float
    tail_mass: float  # stationary mass beyond the truncation
    precise: bool


def clock_continuum_entropy(params: ResetClockParams) -> ContinuumEntropy:
    """Small-dt approximation log2(1/(mu dt)) - mu * int Phi~ log2 Phi~ dt, with mu = 1 / int Phi~ dt."""
    r0 = params.gamma0 + params.gammax
    r1 = params.gamma1 + params.gammax
    p = params.p

    def phi(s):
        return p * math.exp(-r0 * s) + (1 - p) * math.exp(-r1 * s)

    def integrand(s):
        f = phi(s)
        return f * math.log2(f) if f > 0 else 0.0

    mu = 1 / (p / r0 + (1 - p) / r1)
    val, _ = integrate.quad(integrand, 0, math.inf, epsrel=1e-8, epsabs=0, limit=200)
    result = math.log2(1 / (mu * params.dt)) - mu * val

    g0, g1 = params.decay
    q = params.input_quiet
    t0, t1 = g0 * q, g1 * q
    T = params.cutoff
    # closed-form geometric tails of pi_n beyond the last tracked age
    tail = float(clock_stationary_closed_form(params, 0) * (p * t0**T / (1 - t0) + (1 - p) * t1**T / (1 - t1)))
    precise = tail < TAIL_MASS_TOL
    if not precise:
        warnings.warn(f"truncation tail mass {tail:.3g} exceeds {TAIL_MASS_TOL}; continuum comparison is imprecise",
                      RuntimeWarning, stacklevel=2)
    return ContinuumEntropy(result, tail, precise)


# memory-dimension comparison ----------------------------------------------------


@dataclass(frozen=True)
class ThreeStateEnsembles:
    qubit: WeightedKernel  # three trine states in a 2-d space
    qutrit: WeightedKernel  # three symmetric states spanning 3 dimensions
    weights_inferred: bool = True  # uniform weights are an inference, not published


def appendix_i_ensembles() -> ThreeStateEnsembles:
    """Two encodings of one Markovian three-state process, uniform weights."""
    s3 = math.sqrt(3) / 2
    m = np.array([[1.0, 0.0], [0.5, s3], [0.5, -s3]])
    a, b = math.sqrt(2 / 3), 1 / math.sqrt(6)
    n = np.array([[a, b, b], [b, a, b], [b, b, a]])
    w = np.full(3, 1 / 3)
    return ThreeStateEnsembles(WeightedKernel(m @ m.T, w), WeightedKernel(n @ n.T, w))
