"""Work-cost accounting, in units of kT ln 2 per time step.

The i.i.d. work rate of an L-stride agent whose memory retains
``I(Z_{0:L}; M_L)`` bits about the last block is

    w = h_dflt + (I(Z_{0:L}; M_L) - H(Y_{0:L} | X_{0:L})) / L,

which both bounds every agent and is attained by the battery protocol. The
classical rate uses causal-state memory; quantum rates use a Gram encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import _plogp, ensemble_relative_entropy, kernel_spectrum, kl_divergence, mutual_information
from .errors import PreconditionError, ShapeError
from .quantum_encoding import (
    ZERO_OVERLAP,
    GramEncoding,
    distinguishability,
    quantum_block_mutual_information,
    systematic_encoding,
    user_encoding,
)
from .transducer import (
    BlockLaw,
    InputModel,
    Transducer,
    block_conditional_output_entropy,
    block_law,
    classical_block_mutual_information,
    is_minimal,
    minimize,
    steady_state,
    symbol_state_joint,
)

POSTERIOR_SHIFT_TOL = 1e-10
GAP_TOL = 1e-8  # a systematic gap above this counts as a strict advantage


def work_rate(bl: BlockLaw, im: InputModel, memory_information: float) -> float:
    """i.i.d. work per step for a memory holding ``memory_information`` bits about the block."""
    return im.default_output_entropy + (memory_information - block_conditional_output_entropy(bl, im)) / bl.stride


def landauer_floor(bl: BlockLaw, im: InputModel) -> float:
    """h_dflt - H(Y_{0:L}|X_{0:L}) / L: the reversible (zero-dissipation) rate."""
    return im.default_output_entropy - block_conditional_output_entropy(bl, im) / bl.stride


def _require_minimal(t: Transducer, what: str) -> None:
    if not is_minimal(t):
        raise PreconditionError(f"{what} expects a minimal machine; run minimize() first")


def _symbol_state_information(t: Transducer, im: InputModel, pi: np.ndarray) -> float:
    """I(Z_0; S_0) from the joint P(S_0, Z_0)."""
    return mutual_information(symbol_state_joint(t, im, pi), tol=1e-9)


@dataclass(frozen=True)
class OnlineCostForms:
    successor_form: float  # I(Z_0; S_1) - I(Z_0; S_0), with I(Z_0;S_0) via H(Z_0|S_0)
    next_symbol_form: float  # I(Z_0; S_1) - I(Z_1; S_1), with (S_1, Z_1) from a two-step enumeration


def online_cost_forms(t: Transducer, im: InputModel, budget: int | None = None) -> OnlineCostForms:
    """Work cost of online response computed along two independent routes."""
    _require_minimal(t, "online_cost")
    bl1 = block_law(t, im, 1, budget)
    pi = bl1.stationary
    i_z0_s1 = classical_block_mutual_information(bl1)
    successor_form = i_z0_s1 - _symbol_state_information(t, im, pi)

    bl2 = block_law(t, im, 2, budget, stationary=pi)
    pairs = t.n_inputs * t.n_outputs
    # state after the first symbol, read off each two-step word's path
    joint = np.zeros((t.n_states, pairs))
    start_weight = pi[:, None, None] * im.distribution[None, :, None] * t.probs
    for j, a, b in zip(*np.nonzero(start_weight > 0)):
        s1 = t.succ[j, a, b]
        joint[s1] += start_weight[j, a, b] * (im.distribution[:, None] * t.probs[s1]).ravel()
    if not np.isclose(joint.sum(), bl2.word_probs.sum(), atol=1e-9):
        raise ShapeError("two-step enumeration is inconsistent with the block law")
    next_symbol_form = i_z0_s1 - mutual_information(joint, tol=1e-9)
    return OnlineCostForms(successor_form, next_symbol_form)


def online_cost(t: Transducer, im: InputModel, budget: int | None = None) -> float:
    """Extra dissipation of an online agent over an unboundedly patient one: I(Z_0;S_1) - I(Z_0;S_0)."""
    return online_cost_forms(t, im, budget).successor_form


def quantum_online_dissipation(t: Transducer, im: InputModel, enc: GramEncoding, budget: int | None = None) -> float:
    """Online dissipation with quantum memory: I_q(Z_0; M_1) - I(Z_0; S_0)."""
    _require_minimal(t, "quantum_online_dissipation")
    bl1 = block_law(t, im, 1, budget)
    return quantum_block_mutual_information(bl1, enc) - _symbol_state_information(t, im, bl1.stationary)


@dataclass(frozen=True)
class AdvantageGap:
    value: float  # (I(Z;S_L) - I(Z;M_L)) / L
    crosscheck: float  # same quantity as an average of relative-entropy differences
    residual: float


def advantage_gap(bl: BlockLaw, enc: GramEncoding) -> AdvantageGap:
    """Per-step work saved by the quantum encoding, with a relative-entropy cross-check."""
    if bl.posteriors.shape[1] != enc.n_states:
        raise ShapeError(f"block law over {bl.posteriors.shape[1]} states, encoding over {enc.n_states}")
    primary = (classical_block_mutual_information(bl) - quantum_block_mutual_information(bl, enc)) / bl.stride
    pi = bl.word_probs @ bl.posteriors
    pi = pi / pi.sum()
    total = 0.0
    for pz, post in zip(bl.word_probs, bl.posteriors):
        total += pz * (kl_divergence(post, pi, 1e-9) - ensemble_relative_entropy(enc.gram, post, pi))
    secondary = total / bl.stride
    return AdvantageGap(primary, secondary, abs(primary - secondary))


@dataclass(frozen=True)
class AdvantagePrediction:
    predicted: bool
    pair: tuple[int, int] | None = None
    word: int | None = None  # index into the block law's words


def advantage_predicate(t: Transducer, im: InputModel, L: int, budget: int | None = None,
                        bl: BlockLaw | None = None, relation: str = "certainty") -> AdvantagePrediction:
    """Is a strict quantum advantage guaranteed at stride L?

    True iff some causal state belongs to a causally wasteful pair and its
    posterior after some length-L word differs from its stationary weight.
    The witness is the first such (pair, word) in index order.

    ``relation`` picks what counts as a wasteful pair: ``"certainty"`` (no
    finite adaptive interrogation separates the states with certainty, the
    exact boolean relation) or ``"systematic"`` (the systematic encoding gives
    the pair an overlap above ``ZERO_OVERLAP``). The two differ when a pair is
    only separated in the limit of infinitely long interrogations, or when
    the tensor-product construction drives an overlap to zero that another
    encoding could keep; only the second form predicts the systematic gap.
    """
    _require_minimal(t, "advantage_predicate")
    if bl is None:
        bl = block_law(t, im, L, budget)
    n = t.n_states
    if relation == "certainty":
        linked = ~distinguishability(t)
    elif relation == "systematic":
        linked = np.abs(systematic_encoding(t, check_minimal=False).gram) > ZERO_OVERLAP
    else:
        raise ValueError(f"unknown relation {relation!r}")
    np.fill_diagonal(linked, False)
    shift = np.abs(bl.posteriors - bl.stationary[None, :]) > POSTERIOR_SHIFT_TOL
    for i in range(n):
        partners = np.flatnonzero(linked[i])
        if partners.size == 0:
            continue
        hits = np.flatnonzero(shift[:, i])
        if hits.size:
            j = int(partners[0])
            return AdvantagePrediction(True, (min(i, j), max(i, j)), int(hits[0]))
    return AdvantagePrediction(False)


@dataclass
class EncodingReport:
    provenance: str
    memory_information: float  # I(Z_{0:L}; M_L)
    quantum_rate: float
    gap: float
    gap_residual: float
    quantum_online_dissipation: float
    memory_entropy: float  # H(M) of the stationary ensemble
    rank: int
    necessary_condition_failures: int = 0


@dataclass
class ThermoReport:
    """All rates in kT ln 2 per step. ``kT_scale`` (joules) only affects :meth:`scaled`."""

    stride: int
    classical_information: float
    classical_rate: float
    online_cost: float
    landauer_floor: float
    conditional_output_entropy: float
    wasteful_pairs: list
    advantage_predicted: bool  # certainty relation
    witness: dict | None
    systematic_advantage: bool  # systematic gap above GAP_TOL
    encodings: dict = field(default_factory=dict)
    primary_encoding: str = "systematic"
    kT_scale: float | None = None

    @property
    def quantum_rate(self) -> float:
        return self.encodings[self.primary_encoding].quantum_rate

    @property
    def gap(self) -> float:
        return self.encodings[self.primary_encoding].gap

    def scaled(self) -> dict:
        """Energies per step in joules (requires ``kT_scale``)."""
        if self.kT_scale is None:
            return {}
        unit = self.kT_scale * math.log(2)
        out = {
            "classical_rate": self.classical_rate * unit,
            "online_cost": self.online_cost * unit,
            "landauer_floor": self.landauer_floor * unit,
        }
        for name, e in self.encodings.items():
            out[f"quantum_rate[{name}]"] = e.quantum_rate * unit
            out[f"gap[{name}]"] = e.gap * unit
        return out


def analyze(t: Transducer, im: InputModel, L: int, gram=None, kT: float | None = None,
            budget: int | None = None) -> ThermoReport:
    """Full report for a machine at stride L.

    The machine is minimized first. The systematic encoding is always
    evaluated; a supplied ``gram`` (over the original states) is evaluated as
    well and becomes the primary encoding.
    """
    m, state_map = minimize(t)
    pi = steady_state(m, im)
    bl = block_law(m, im, L, budget, stationary=pi)
    bl1 = bl if L == 1 else block_law(m, im, 1, budget, stationary=pi)
    i_c = classical_block_mutual_information(bl)
    i_z0_s0 = _symbol_state_information(m, im, pi)

    encodings = {"systematic": systematic_encoding(m, check_minimal=False)}
    failures = {"systematic": 0}
    primary = "systematic"
    if gram is not None:
        g = np.asarray(gram)
        reps = np.array([np.flatnonzero(state_map == b)[0] for b in range(m.n_states)])
        enc, feas = user_encoding(g[np.ix_(reps, reps)], m)
        encodings["user_supplied"] = enc
        failures["user_supplied"] = len(feas.failures)
        primary = "user_supplied"

    enc_reports = {}
    for name, enc in encodings.items():
        i_q = quantum_block_mutual_information(bl, enc)
        gap = advantage_gap(bl, enc)
        enc_reports[name] = EncodingReport(
            provenance=enc.provenance,
            memory_information=i_q,
            quantum_rate=work_rate(bl, im, i_q),
            gap=gap.value,
            gap_residual=gap.residual,
            quantum_online_dissipation=quantum_block_mutual_information(bl1, enc) - i_z0_s0,
            memory_entropy=_plogp(kernel_spectrum(enc.gram, pi)),
            rank=enc.rank,
            necessary_condition_failures=failures[name],
        )

    pred = advantage_predicate(m, im, L, bl=bl)
    witness = None
    if pred.predicted:
        i, j = pred.pair
        witness = {
            "pair": [m.states[i], m.states[j]],
            "word": [list(p) for p in bl.decode(m, pred.word)],
        }
    d = distinguishability(m)
    return ThermoReport(
        stride=L,
        classical_information=i_c,
        classical_rate=work_rate(bl, im, i_c),
        online_cost=classical_block_mutual_information(bl1) - i_z0_s0,
        landauer_floor=landauer_floor(bl, im),
        conditional_output_entropy=block_conditional_output_entropy(bl, im),
        wasteful_pairs=[(m.states[i], m.states[j]) for i in range(m.n_states)
                        for j in range(i + 1, m.n_states) if not d[i, j]],
        advantage_predicted=pred.predicted,
        witness=witness,
        systematic_advantage=enc_reports["systematic"].gap > GAP_TOL,
        encodings=enc_reports,
        primary_encoding=primary,
        kT_scale=kT,
    )

