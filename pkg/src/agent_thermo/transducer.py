"""Unifilar input-output transducers driven by i.i.d. inputs.

A machine is stored densely: ``probs[j, x, y]`` is P(y | x, state j) and
``succ[j, x, y]`` the unique successor state (``-1`` where the transition is
absent). Inputs, outputs and states are addressed by index internally; the
label tuples are only used at the edges (spec files, reports).
"""

from __future__ import annotations

import math
import os
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .entropy import PROB_TOL, _plogp, as_distribution
from .errors import CapacityError, StructureError, ValidationError

DEFAULT_BUDGET = 10**7
MERGE_TOL = 1e-10


def enumeration_budget(budget: int | None = None) -> int:
    """Resolve the enumeration budget: explicit value, else ``AGENT_THERMO_BUDGET``, else 10^7."""
    if budget is not None:
        return int(budget)
    env = os.environ.get("AGENT_THERMO_BUDGET")
    return int(float(env)) if env else DEFAULT_BUDGET


@dataclass(frozen=True, eq=False)
class Transducer:
    inputs: tuple
    outputs: tuple
    states: tuple
    probs: np.ndarray
    succ: np.ndarray
    # (state, input, output) coordinates that were declared with several successors
    branching: tuple = field(default=())

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        succ = np.asarray(self.succ, dtype=np.int64)
        shape = (len(self.states), len(self.inputs), len(self.outputs))
        if probs.shape != shape or succ.shape != shape:
            raise ValidationError(
                f"tensor shapes {probs.shape}/{succ.shape} do not match (states, inputs, outputs) = {shape}"
            )
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "succ", succ)
        object.__setattr__(self, "branching", tuple(self.branching))

    @classmethod
    def from_transitions(cls, inputs, outputs, states, transitions: Iterable[Sequence]) -> "Transducer":
        """Build a machine from ``(from, x, y, p, to)`` label tuples.

        Repeated ``(from, x, y, to)`` entries add their probabilities. Entries
        that give one ``(from, x, y)`` two different successors are kept on
        the machine as ``branching`` so that :func:`validate` can report them.
        """
        inputs, outputs, states = tuple(inputs), tuple(outputs), tuple(states)
        xi = {s: i for i, s in enumerate(inputs)}
        yi = {s: i for i, s in enumerate(outputs)}
        si = {s: i for i, s in enumerate(states)}
        probs = np.zeros((len(states), len(inputs), len(outputs)))
        succ = np.full(probs.shape, -1, dtype=np.int64)
        branching = []
        for src, x, y, p, dst in transitions:
            j, a, b, k = si[src], xi[x], yi[y], si[dst]
            probs[j, a, b] += p
            if p <= 0:
                continue
            if succ[j, a, b] == -1:
                succ[j, a, b] = k
            elif succ[j, a, b] != k and (j, a, b) not in branching:
                branching.append((j, a, b))
        return cls(inputs, outputs, states, probs, succ, tuple(branching))

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    def transitions(self):
        """Yield ``(from, x, y, p, to)`` label tuples for every positive-probability edge."""
        for j, a, b in zip(*np.nonzero(self.probs > 0)):
            k = self.succ[j, a, b]
            yield self.states[j], self.inputs[a], self.outputs[b], float(self.probs[j, a, b]), self.states[k]

    @cached_property
    def _edges(self):
        j, a, b = np.nonzero(self.probs > 0)
        return j, a, b, self.succ[j, a, b], self.probs[j, a, b]

    def state_chain(self, input_distribution) -> sp.csr_matrix:
        """Sparse induced chain P(k | j) = sum_x q(x) sum_y T^{y|x}_{jk}."""
        q = np.asarray(input_distribution, dtype=float)
        j, a, _, k, p = self._edges
        n = self.n_states
        return sp.csr_matrix((q[a] * p, (j, k)), shape=(n, n))

    def __repr__(self):
        return (
            f"Transducer(states={self.n_states}, inputs={list(self.inputs)}, "
            f"outputs={len(self.outputs)} symbols)"
        )


@dataclass(frozen=True)
class InputModel:
    """I.i.d. input law plus the entropy of the blank output tape (h_dflt)."""

    distribution: np.ndarray
    default_output_entropy: float

    def __post_init__(self):
        object.__setattr__(self, "distribution", as_distribution(self.distribution).ravel())
        object.__setattr__(self, "default_output_entropy", float(self.default_output_entropy))

    @classmethod
    def for_machine(cls, t: Transducer, distribution=None, default_output_entropy=None) -> "InputModel":
        """Uniform inputs and ``h_dflt = log2 |Y|`` unless overridden."""
        if distribution is None:
            distribution = np.full(t.n_inputs, 1.0 / t.n_inputs)
        if len(distribution) != t.n_inputs:
            raise ValidationError(f"input distribution has {len(distribution)} entries for {t.n_inputs} inputs")
        if default_output_entropy is None:
            default_output_entropy = math.log2(t.n_outputs)
        return cls(np.asarray(distribution, dtype=float), default_output_entropy)

    @property
    def input_entropy(self) -> float:
        return _plogp(self.distribution)


@dataclass(frozen=True)
class Violation:
    kind: str  # "stochasticity" | "unifilarity"
    state: object
    input: object
    output: object | None
    message: str


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(f"{v.kind}: {v.message}" for v in self.violations)


def validate(t: Transducer, tol: float = PROB_TOL) -> ValidationReport:
    """Report stochasticity and unifilarity violations; an empty report means the machine is valid."""
    out = []
    for j in range(t.n_states):
        for a in range(t.n_inputs):
            row = t.probs[j, a]
            bad = [b for b in range(t.n_outputs) if not (0 <= row[b] <= 1 + tol)]
            for b in bad:
                out.append(Violation(
                    "stochasticity", t.states[j], t.inputs[a], t.outputs[b],
                    f"P(y={t.outputs[b]!r} | x={t.inputs[a]!r}, state {t.states[j]!r}) = {row[b]!r} is outside [0, 1]",
                ))
            total = row.sum()
            if abs(total - 1.0) > tol:
                out.append(Violation(
                    "stochasticity", t.states[j], t.inputs[a], None,
                    f"outputs for state {t.states[j]!r}, input {t.inputs[a]!r} sum to {total!r}",
                ))
    for j, a, b in t.branching:
        out.append(Violation(
            "unifilarity", t.states[j], t.inputs[a], t.outputs[b],
            f"state {t.states[j]!r} on (x={t.inputs[a]!r}, y={t.outputs[b]!r}) has more than one successor",
        ))
    j_idx, a_idx, b_idx = np.nonzero((t.probs > 0) & ((t.succ < 0) | (t.succ >= t.n_states)))
    for j, a, b in zip(j_idx, a_idx, b_idx):
        out.append(Violation(
            "unifilarity", t.states[j], t.inputs[a], t.outputs[b],
            f"state {t.states[j]!r} on (x={t.inputs[a]!r}, y={t.outputs[b]!r}) has no successor",
        ))
    return ValidationReport(out)


def require_valid(t: Transducer) -> None:
    report = validate(t)
    if not report.ok:
        raise ValidationError(str(report))


def _chain_structure(chain: sp.csr_matrix) -> None:
    """Raise StructureError unless the chain has one closed class and that class is aperiodic."""
    n = chain.shape[0]
    adj = chain.copy()
    adj.data = (adj.data > 0).astype(float)
    adj.eliminate_zeros()
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    coo = adj.tocoo()
    leaving = np.zeros(n_comp, dtype=bool)
    cross = labels[coo.row] != labels[coo.col]
    leaving[labels[coo.row[cross]]] = True
    closed = np.flatnonzero(~leaving)
    if closed.size > 1:
        raise StructureError(
            f"reducible state chain: {closed.size} closed communicating classes, stationary law is not unique"
        )
    members = np.flatnonzero(labels == closed[0])
    inside = np.zeros(n, dtype=bool)
    inside[members] = True
    # BFS levels inside the closed class; the period is the gcd of level defects over its edges
    level = np.full(n, -1)
    level[members[0]] = 0
    frontier = [members[0]]
    indptr, indices = adj.indptr, adj.indices
    while frontier:
        nxt = []
        for u in frontier:
            for v in indices[indptr[u]:indptr[u + 1]]:
                if inside[v] and level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    mask = inside[coo.row] & inside[coo.col]
    defects = level[coo.row[mask]] + 1 - level[coo.col[mask]]
    period = int(np.gcd.reduce(np.abs(defects))) if defects.size else 0
    if period > 1:
        raise StructureError(f"periodic state chain (period {period}); power iteration does not converge")


def steady_state(t: Transducer, im: InputModel, tol: float = 1e-12, max_iter: int = 10**6) -> np.ndarray:
    """Stationary law of the driven state chain, by power iteration from uniform.

    Transient states are allowed (they receive zero weight); more than one
    closed class or a periodic closed class raises :class:`StructureError`.
    """
    require_valid(t)
    chain = t.state_chain(im.distribution)
    _chain_structure(chain)
    pt = chain.T.tocsr()
    pi = np.full(t.n_states, 1.0 / t.n_states)
    for _ in range(max_iter):
        nxt = pt @ pi
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) <= tol:
            return nxt
        pi = nxt
    raise StructureError(f"power iteration did not reach residual {tol} within {max_iter} iterations")


def _canonical(labels: np.ndarray) -> np.ndarray:
    """Renumber block labels in order of first appearance."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse.ravel()]


def minimize(t: Transducer, tol: float = MERGE_TOL) -> tuple[Transducer, np.ndarray]:
    """Quotient a unifilar machine by behavioural equivalence (Moore partition refinement).

    States start in one block per distinct output table ``P(.|x, j)`` (rows equal
    to within ``tol``), and blocks are split by the blocks of their successors
    until stable. Returns the quotient machine, whose states are the causal
    states of the strategy, and the map ``old state index -> new state index``.
    Quotient states keep the label of the first original state in their block.
    """
    require_valid(t)
    n = t.n_states
    flat = t.probs.reshape(n, -1)
    keys = np.rint(flat / tol).astype(np.int64)
    _, block = np.unique(keys, axis=0, return_inverse=True)
    block = _canonical(block.ravel())
    live = t.probs > 0
    safe_succ = np.where(live, t.succ, 0)
    while True:
        succ_block = np.where(live, block[safe_succ], -1).reshape(n, -1)
        sig = np.concatenate([block[:, None], succ_block], axis=1)
        _, refined = np.unique(sig, axis=0, return_inverse=True)
        refined = _canonical(refined.ravel())
        if refined.max() == block.max():
            block = refined
            break
        block = refined
    n_blocks = int(block.max()) + 1
    reps = np.array([np.flatnonzero(block == b)[0] for b in range(n_blocks)])
    probs = t.probs[reps]
    succ = np.where(probs > 0, block[np.where(probs > 0, t.succ[reps], 0)], -1)
    quotient = Transducer(t.inputs, t.outputs, tuple(t.states[r] for r in reps), probs, succ)
    return quotient, block


def is_minimal(t: Transducer) -> bool:
    return minimize(t)[0].n_states == t.n_states


@dataclass(frozen=True, eq=False)
class BlockLaw:
    """Exact law of length-L input-output words, with end-of-block state posteriors.

    Only words of positive probability are kept. ``words[w, t]`` is the pair
    code ``x * |Y| + y`` of step ``t``.
    """

    stride: int
    words: np.ndarray  # (W, L) pair codes
    word_probs: np.ndarray  # (W,)
    posteriors: np.ndarray  # (W, S): P(S_L = k | z_{0:L})
    stationary: np.ndarray  # (S,)
    n_outputs: int

    def decode(self, t: Transducer, w: int) -> tuple:
        """Word ``w`` as a tuple of ``(x, y)`` label pairs."""
        return tuple((t.inputs[c // self.n_outputs], t.outputs[c % self.n_outputs]) for c in self.words[w])

    def input_words(self) -> np.ndarray:
        return self.words // self.n_outputs


def _step_matrix(t: Transducer, q: np.ndarray) -> sp.csr_matrix:
    """Sparse map ``(S) -> (X*Y*S)``: entry [j, (x*Y + y)*S + k] = q(x) P(y|x,j) [succ = k]."""
    j, a, b, k, p = t._edges
    n = t.n_states
    cols = (a * t.n_outputs + b) * n + k
    return sp.csr_matrix((q[a] * p, (j, cols)), shape=(n, t.n_inputs * t.n_outputs * n))


def block_law(t: Transducer, im: InputModel, L: int, budget: int | None = None,
              stationary: np.ndarray | None = None) -> BlockLaw:
    """Enumerate every length-L word exactly, starting from the stationary law."""
    if L < 1:
        raise ValueError("stride must be a positive integer")
    budget = enumeration_budget(budget)
    pairs = t.n_inputs * t.n_outputs
    cost = float(pairs) ** L * t.n_states
    if cost > budget:
        raise CapacityError(
            f"exact enumeration of stride {L} needs (|X||Y|)^L * |S| = {cost:.3g} > budget {budget}; "
            "use a smaller stride, raise the budget (--budget / AGENT_THERMO_BUDGET), or a structured "
            "case-study evaluator such as clock_block_information"
        )
    pi = steady_state(t, im) if stationary is None else np.asarray(stationary, dtype=float)
    step = _step_matrix(t, im.distribution).T.tocsr()
    alpha = pi[None, :]
    words = np.zeros((1, 0), dtype=np.int64)
    n = t.n_states
    for _ in range(L):
        nxt = (step @ alpha.T).T.reshape(-1, n)
        codes = np.tile(np.arange(pairs), alpha.shape[0])
        words = np.concatenate([np.repeat(words, pairs, axis=0), codes[:, None]], axis=1)
        keep = nxt.sum(axis=1) > 0
        alpha, words = nxt[keep], words[keep]
    pz = alpha.sum(axis=1)
    return BlockLaw(L, words, pz, alpha / pz[:, None], pi, t.n_outputs)


def block_conditional_output_entropy(bl: BlockLaw, im: InputModel) -> float:
    """H(Y_{0:L} | X_{0:L}) = H(Z_{0:L}) - L h_x."""
    return max(_plogp(bl.word_probs) - bl.stride * im.input_entropy, 0.0)


def classical_block_mutual_information(bl: BlockLaw) -> float:
    """I(Z_{0:L}; S_L) = H(pi) - sum_z P(z) H(S_L | z)."""
    cond = sum(pz * _plogp(post) for pz, post in zip(bl.word_probs, bl.posteriors) if np.count_nonzero(post) > 1)
    return max(_plogp(bl.stationary) - cond, 0.0)


def symbol_state_joint(t: Transducer, im: InputModel, pi: np.ndarray) -> np.ndarray:
    """Joint P(S_0 = j, Z_0 = (x, y)) as an ``(S, X*Y)`` table."""
    joint = pi[:, None, None] * im.distribution[None, :, None] * t.probs
    return joint.reshape(t.n_states, -1)


@dataclass(frozen=True)
class EntropyRateEstimate:
    block_rate: float  # H(Z_{0:L}) / L at L = L_max
    conditional_entropy: float  # H(Z_0 | S_0)
    stride: int

    @property
    def gap(self) -> float:
        return self.block_rate - self.conditional_entropy


def entropy_rate_estimate(t: Transducer, im: InputModel, L_max: int, budget: int | None = None) -> EntropyRateEstimate:
    """Joint input-output entropy rate two ways: block estimate and H(Z_0 | S_0)."""
    bl = block_law(t, im, L_max, budget)
    pi = bl.stationary
    joint = symbol_state_joint(t, im, pi)
    cond = sum(_plogp(row / pi[j]) * pi[j] for j, row in enumerate(joint) if pi[j] > 0)
    return EntropyRateEstimate(_plogp(bl.word_probs) / L_max, cond, L_max)


@dataclass(frozen=True)
class Trajectory:
    inputs: np.ndarray
    outputs: np.ndarray
    states: np.ndarray  # state occupied when input t arrives

    def __len__(self):
        return len(self.inputs)


def simulate(t: Transducer, im: InputModel, steps: int, seed: int | None = None,
             start: int | None = None) -> Trajectory:
    """Drive the machine with i.i.d. inputs; the start state is drawn from the stationary law."""
    require_valid(t)
    rng = np.random.default_rng(seed)
    if start is None:
        pi = steady_state(t, im)
        start = int(rng.choice(t.n_states, p=pi / pi.sum()))
    xs = rng.choice(t.n_inputs, size=steps, p=im.distribution)
    us = rng.random(steps)
    cum = np.cumsum(t.probs, axis=2)
    cum[..., -1] = np.maximum(cum[..., -1], 1.0)
    cum = cum.tolist()
    succ = t.succ.tolist()
    ys = np.empty(steps, dtype=np.int64)
    ss = np.empty(steps, dtype=np.int64)
    s = start
    for i, (x, u) in enumerate(zip(xs.tolist(), us.tolist())):
        ss[i] = s
        y = bisect_right(cum[s][x], u)
        ys[i] = y
        s = succ[s][x][y]
    return Trajectory(xs.astype(np.int64), ys, ss)


def output_word_distribution(t: Transducer, start: int, xs: Sequence[int]) -> np.ndarray:
    """P(y_{0:K} | x_{0:K}, S_0 = start) over all |Y|^K output words (row-major in y_0..y_{K-1})."""
    n = t.n_states
    dist = np.zeros((1, n))
    dist[0, start] = 1.0
    for x in xs:
        nxt = np.zeros((dist.shape[0], t.n_outputs, n))
        for b in range(t.n_outputs):
            p = t.probs[:, x, b]
            live = p > 0
            np.add.at(nxt[:, b, :], (slice(None), t.succ[live, x, b]), dist[:, live] * p[live])
        dist = nxt.reshape(-1, n)
    return dist.sum(axis=1)
