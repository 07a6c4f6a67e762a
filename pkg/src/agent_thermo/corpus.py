"""Random machines and refinements for property tests and audits."""

from __future__ import annotations

import itertools

import numpy as np

from .errors import AgentThermoError
from .transducer import InputModel, Transducer, minimize, steady_state


def random_transducer(rng: np.random.Generator, n_states: int, n_inputs: int = 2, n_outputs: int = 2,
                      zero_prob: float = 0.3, dyadic: bool = False) -> Transducer:
    """Random unifilar machine. Entries are zeroed with probability ``zero_prob`` (one output always survives).

    With ``dyadic`` the probabilities are multiples of 1/4, which makes exact ties common.
    """
    probs = np.zeros((n_states, n_inputs, n_outputs))
    for j in range(n_states):
        for a in range(n_inputs):
            if dyadic:
                row = rng.integers(0, 4, size=n_outputs).astype(float)
                row[rng.random(n_outputs) < zero_prob] = 0.0
            else:
                row = rng.random(n_outputs)
                row[rng.random(n_outputs) < zero_prob] = 0.0
            if row.sum() == 0:
                row[rng.integers(n_outputs)] = 1.0
            probs[j, a] = row / row.sum()
    succ = rng.integers(0, n_states, size=probs.shape)
    succ = np.where(probs > 0, succ, -1)
    return Transducer(tuple(range(n_inputs)), tuple(range(n_outputs)), tuple(range(n_states)), probs, succ)


def random_minimal_machine(rng: np.random.Generator, max_states: int = 4, n_inputs: int = 2, n_outputs: int = 2,
                           tries: int = 200, **kwargs) -> tuple[Transducer, InputModel]:
    """Minimal machine with a well-defined stationary law under uniform inputs.

    Draws until the minimized machine has a single aperiodic recurrent class
    and no transient states, so every state is a causal state in use.
    """
    for _ in range(tries):
        n = int(rng.integers(1, max_states + 1))
        t = random_transducer(rng, n, n_inputs, n_outputs, **kwargs)
        m, _ = minimize(t)
        im = InputModel.for_machine(m)
        try:
            pi = steady_state(m, im)
        except AgentThermoError:
            continue
        if np.all(pi > 1e-9):
            return m, im
    raise RuntimeError("no usable machine drawn")


def random_refinement(t: Transducer, rng: np.random.Generator, copies: int = 2) -> tuple[Transducer, np.ndarray]:
    """Split every state into ``copies`` clones; each edge picks a random clone of its target.

    The result is unifilar, realizes the same strategy, and minimizes back to ``t``.
    Returns the refined machine and the map clone -> original state.
    """
    n = t.n_states
    origin = np.repeat(np.arange(n), copies)
    probs = t.probs[origin]
    pick = rng.integers(0, copies, size=probs.shape)
    succ = np.where(probs > 0, t.succ[origin] * copies + pick, -1)
    states = tuple(f"{t.states[o]}.{c}" for o, c in zip(origin, itertools.cycle(range(copies))))
    return Transducer(t.inputs, t.outputs, states, probs, succ), origin


def history_refinement(t: Transducer, depth: int = 2) -> Transducer:
    """Machine whose states are (causal state, last ``depth`` input-output pairs) combinations.

    Only combinations consistent with the machine are kept; pairs with no
    history yet are excluded, so the result tracks strictly more than needed.
    """
    pairs = [(a, b) for a in range(t.n_inputs) for b in range(t.n_outputs)]
    keys = [(j, h) for j in range(t.n_states) for h in itertools.product(pairs, repeat=depth)]
    index = {k: i for i, k in enumerate(keys)}
    probs = np.zeros((len(keys), t.n_inputs, t.n_outputs))
    succ = np.full(probs.shape, -1, dtype=np.int64)
    for (j, h), i in index.items():
        probs[i] = t.probs[j]
        for a, b in pairs:
            if t.probs[j, a, b] > 0:
                succ[i, a, b] = index[(int(t.succ[j, a, b]), h[1:] + ((a, b),))]
    labels = tuple(f"{t.states[j]}|" + "".join(f"{a}{b}" for a, b in h) for j, h in keys)
    return Transducer(t.inputs, t.outputs, labels, probs, succ)
