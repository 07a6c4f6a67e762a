"""Quantum memory encodings of causal states.

An encoding is carried entirely by its Gram matrix over causal states. The
systematic encoding is the maximal solution of the per-input overlap
recursion; user encodings can be supplied and screened against a necessary
isometry condition. Which pairs of causal states admit a nonzero overlap is
decided exactly by a boolean fixed point, independent of floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .entropy import PSD_TOL, check_gram, gram_factor, holevo_information
from .errors import CapacityError, ConvergenceError, PreconditionError, ShapeError
from .transducer import BlockLaw, Transducer, enumeration_budget, is_minimal, require_valid

ZERO_OVERLAP = 1e-8


@dataclass(frozen=True, eq=False)
class OverlapFamily:
    """Per-input overlaps ``overlaps[x, i, j] = <s_i^x | s_j^x>``."""

    overlaps: np.ndarray
    iterations: int
    residual: float

    @property
    def gram(self) -> np.ndarray:
        return np.prod(self.overlaps, axis=0)


@dataclass(frozen=True, eq=False)
class GramEncoding:
    gram: np.ndarray
    provenance: str  # "systematic" | "user_supplied" | "closed_form"
    vectors: np.ndarray | None = None  # row i: amplitudes of |s_i> in a rank-dimensional basis

    @property
    def n_states(self) -> int:
        return self.gram.shape[0]

    @property
    def rank(self) -> int:
        if self.vectors is not None:
            return self.vectors.shape[1]
        return int(np.sum(np.linalg.eigvalsh(self.gram) > 1e-10))


def make_encoding(gram, provenance: str, with_vectors: bool = True) -> GramEncoding:
    g = check_gram(gram)
    vectors = None
    if with_vectors:
        vectors = gram_factor(g)
        recon = vectors.conj() @ vectors.T
        if np.max(np.abs(recon - g)) > 1e-9:
            # the dropped sub-cutoff eigenvalues were not negligible; keep the Gram only
            vectors = None
    return GramEncoding(g, provenance, vectors)


def _pair_update(t: Transducer, x: int, gram: np.ndarray) -> np.ndarray:
    """sum_y sqrt(P(y|x,i) P(y|x,j)) * gram[succ(i,x,y), succ(j,x,y)]."""
    roots = np.sqrt(t.probs[:, x, :])  # (S, Y)
    live = t.probs[:, x, :] > 0
    out = np.zeros_like(gram, dtype=np.result_type(gram, float))
    for y in range(t.n_outputs):
        rows = np.flatnonzero(live[:, y])
        if rows.size == 0:
            continue
        s = t.succ[rows, x, y]
        out[np.ix_(rows, rows)] += roots[rows, y][:, None] * roots[rows, y][None, :] * gram[np.ix_(s, s)]
    return out


def solve_overlaps(t: Transducer, tol: float = 1e-12, max_iter: int = 10**5, check_minimal: bool = True,
                   on_iterate: Callable[[int, np.ndarray, np.ndarray], None] | None = None) -> OverlapFamily:
    """Maximal fixed point of the per-input overlap recursion, iterated from all-ones.

    ``c[x]_ij <- sum_y sqrt(P(y|x,i) P(y|x,j)) prod_x' c[x']_{succ_i, succ_j}``.
    Iterates decrease monotonically; ``on_iterate(k, previous, current)`` is
    called after every sweep.
    """
    require_valid(t)
    if check_minimal and not is_minimal(t):
        raise PreconditionError("solve_overlaps expects a minimal machine; run minimize() first")
    n = t.n_states
    c = np.ones((t.n_inputs, n, n))
    residual = np.inf
    for k in range(1, max_iter + 1):
        gram = np.prod(c, axis=0)
        new = np.stack([_pair_update(t, x, gram) for x in range(t.n_inputs)])
        new = np.minimum(np.maximum(new, 0.0), 1.0)
        for x in range(t.n_inputs):
            np.fill_diagonal(new[x], 1.0)
        residual = float(np.max(np.abs(new - c)))
        if on_iterate is not None:
            on_iterate(k, c, new)
        c = new
        if residual < tol:
            return OverlapFamily(c, k, residual)
    if residual > 1e-8:
        raise ConvergenceError(f"overlap iteration stopped at residual {residual:.3g} after {max_iter} sweeps")
    return OverlapFamily(c, max_iter, residual)


def gram_from_overlaps(of: OverlapFamily) -> GramEncoding:
    """Systematic encoding: tensor product over inputs, so G_ij = prod_x c[x]_ij."""
    return make_encoding(of.gram, "systematic")


def systematic_encoding(t: Transducer, **kwargs) -> GramEncoding:
    return gram_from_overlaps(solve_overlaps(t, **kwargs))


@dataclass(frozen=True)
class ConditionFailure:
    input: int
    i: int
    j: int
    overlap: float  # |G_ij|
    bound: float  # sum_y sqrt(P P) |G_succ|


@dataclass
class FeasibilityReport:
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def user_encoding(gram, t: Transducer, tol: float = PSD_TOL) -> tuple[GramEncoding, FeasibilityReport]:
    """Accept a supplied Gram matrix and check the necessary isometry condition per input.

    For every input x: |G_ij| <= sum_y sqrt(P(y|x,i) P(y|x,j)) |G_{succ_i, succ_j}|.
    Passing does not certify that junk states completing the isometry exist.
    """
    g = np.asarray(gram)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] != t.n_states:
        raise ShapeError(f"Gram matrix of shape {g.shape} for a {t.n_states}-state machine")
    enc = make_encoding(g, "user_supplied")
    mod = np.abs(enc.gram)
    failures = []
    for x in range(t.n_inputs):
        bound = _pair_update(t, x, mod)
        bad = np.argwhere(np.triu(mod - bound > tol, k=1))
        failures.extend(ConditionFailure(x, int(i), int(j), float(mod[i, j]), float(bound[i, j])) for i, j in bad)
    return enc, FeasibilityReport(failures)


def distinguishability(t: Transducer) -> np.ndarray:
    """Boolean matrix: True where some adaptive interrogation tells the two states apart with certainty.

    Least fixed point of: mark (i, j) if some input x sends every commonly
    possible output y to an already-marked successor pair (vacuously true when
    the output supports are disjoint).
    """
    require_valid(t)
    n = t.n_states
    live = t.probs > 0
    marked = np.zeros((n, n), dtype=bool)
    while True:
        new = marked.copy()
        for x in range(t.n_inputs):
            ok = np.ones((n, n), dtype=bool)
            for y in range(t.n_outputs):
                rows = live[:, x, y]
                both = rows[:, None] & rows[None, :]
                s = np.where(rows, t.succ[:, x, y], 0)
                ok &= ~both | marked[np.ix_(s, s)]
            new |= ok
        np.fill_diagonal(new, False)
        if np.array_equal(new, marked):
            return marked
        marked = new


def wasteful_pairs(t: Transducer) -> list[tuple[int, int]]:
    """Pairs (i < j) that no interrogation can distinguish with certainty."""
    d = distinguishability(t)
    n = t.n_states
    return [(i, j) for i in range(n) for j in range(i + 1, n) if not d[i, j]]


def interrogation_values(t: Transducer, depth: int, budget: int | None = None) -> np.ndarray:
    """Minimal Bhattacharyya overlap of output records over depth-``depth`` adaptive interrogations, all pairs.

    ``V_0 = 1``; ``V_{d+1}(i, j) = min_x sum_y sqrt(P(y|x,i) P(y|x,j)) V_d(succ_i, succ_j)``.
    """
    require_valid(t)
    cost = float(depth) * t.n_inputs * t.n_outputs * t.n_states**2
    if cost > enumeration_budget(budget):
        raise CapacityError(f"interrogation dynamic program of cost {cost:.3g} exceeds the budget")
    v = np.ones((t.n_states, t.n_states))
    for _ in range(depth):
        v = np.min(np.stack([_pair_update(t, x, v) for x in range(t.n_inputs)]), axis=0)
        np.fill_diagonal(v, 1.0)
    return v


def interrogation_oracle(t: Transducer, i: int, j: int, depth: int, budget: int | None = None) -> float:
    return float(interrogation_values(t, depth, budget)[i, j])


def quantum_block_mutual_information(bl: BlockLaw, enc: GramEncoding) -> float:
    """I(Z_{0:L}; M_L): Holevo quantity of the end-of-block memory ensembles."""
    if bl.posteriors.shape[1] != enc.n_states:
        raise ShapeError(f"block law over {bl.posteriors.shape[1]} states, encoding over {enc.n_states}")
    return holevo_information(bl.word_probs, bl.posteriors, enc.gram)
