import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from agent_thermo.case_studies import (
    BrownianRingParams,
    ResetClockParams,
    alice_bob,
    appendix_i_ensembles,
    brownian_gram,
    brownian_quantum_entropy_bound,
    brownian_ring,
    brownian_sweep,
    clock_block_information,
    clock_continuum_entropy,
    clock_gram,
    clock_input_model,
    clock_machine,
    clock_stationary_closed_form,
    clock_sweep,
    echo,
    memoryless_responder,
    reset_clock,
)
from agent_thermo.entropy import ensemble_entropy, kernel_spectrum, shannon_entropy
from agent_thermo.errors import CapacityError, DomainError, ValidationError
from agent_thermo.quantum_encoding import make_encoding, quantum_block_mutual_information
from agent_thermo.transducer import (
    InputModel,
    block_law,
    classical_block_mutual_information,
    is_minimal,
    minimize,
    require_valid,
    simulate,
    steady_state,
)

import oracles


def test_alice_bob_machine():
    t, gram = alice_bob()
    require_valid(t)
    assert is_minimal(t) and minimize(t)[0].n_states == 4
    assert np.allclose(gram, gram.T) and np.allclose(np.diag(gram), 1)
    # states sharing a last question are orthogonal
    assert gram[0, 1] == 0 and gram[2, 3] == 0
    assert np.allclose(np.abs(gram[:2, 2:]), 0.5 ** 0.5)


def test_alice_bob_repeated_questions_repeat_answers():
    t, _ = alice_bob()
    im = InputModel(np.array([1.0, 0.0]), 1.0)
    for start in range(4):
        traj = simulate(t, im, 50, seed=3, start=start)
        assert len(set(traj.outputs[1:].tolist())) == 1


def test_small_generators_are_valid():
    for t in (memoryless_responder(), memoryless_responder(3), echo()):
        require_valid(t)
        assert t.n_states == 1 and is_minimal(t)


def test_brownian_bound_examples():
    assert brownian_quantum_entropy_bound(0.01) == pytest.approx(5.47241, abs=1e-5)
    edge = 1 / (2 * math.sqrt(2 * math.pi))
    assert brownian_quantum_entropy_bound(edge * (1 - 1e-12)) == pytest.approx(1 / (2 * math.log(2)), abs=1e-9)
    for bad in (0.0, edge, 1.0, -0.01):
        with pytest.raises(DomainError):
            brownian_quantum_entropy_bound(bad)


def test_brownian_ring_examples():
    params = BrownianRingParams(16, 0.05)
    t = brownian_ring(params)
    require_valid(t)
    assert is_minimal(t)
    im = InputModel.for_machine(t)
    assert np.allclose(steady_state(t, im), 1 / 16, atol=1e-12)
    for L in (1, 2):
        assert classical_block_mutual_information(block_law(t, im, L)) == pytest.approx(4.0, abs=1e-9)


def test_brownian_two_sites():
    t = brownian_ring(BrownianRingParams(2, 0.1))
    q = t.probs[0, 0]
    assert np.allclose(t.probs[1, 0], q[::-1])
    assert np.allclose(t.probs[0, 1], q[::-1])
    assert minimize(t)[0].n_states == 2


def test_brownian_params_reject():
    with pytest.raises(ValidationError):
        BrownianRingParams(1, 0.1)
    with pytest.raises(ValidationError):
        BrownianRingParams(8, -0.1)
    with pytest.raises(ValidationError):
        BrownianRingParams(8, 0.1, "midpoint")


def test_brownian_gram_matches_sum_of_root_products():
    params = BrownianRingParams(12, 0.07)
    P = brownian_ring(params).probs[:, 0, :]
    expected = np.sqrt(P) @ np.sqrt(P).T
    assert np.allclose(brownian_gram(params), expected, atol=1e-12)


def test_brownian_sweep_examples():
    rows = brownian_sweep(0.01, [8, 16, 32, 64, 128, 256, 512, 1024])
    bound = brownian_quantum_entropy_bound(0.01)
    assert [r.H_classical for r in rows] == [float(k) for k in range(3, 11)]
    hq = [r.H_quantum for r in rows]
    assert all(h <= bound for h in hq)
    assert all(b >= a - 1e-12 for a, b in zip(hq, hq[1:]))
    # increments shrink as the quantum column saturates
    inc = np.diff(hq)
    assert all(b < a for a, b in zip(inc, inc[1:]))
    assert rows[3].gap == pytest.approx(rows[3].H_classical - rows[3].H_quantum)
    with pytest.raises(CapacityError):
        brownian_sweep(0.01, [8192])


def test_brownian_sweep_equals_ensemble_entropy_at_64():
    params = BrownianRingParams(64, 0.01)
    h = ensemble_entropy(brownian_gram(params), np.full(64, 1 / 64))
    assert brownian_sweep(0.01, [64])[0].H_quantum == pytest.approx(h, abs=1e-12)
    assert h <= brownian_quantum_entropy_bound(0.01)


def test_clock_params_reject():
    with pytest.raises(ValidationError):
        ResetClockParams(p=1.5)
    with pytest.raises(ValidationError):
        ResetClockParams(gamma0=0)
    with pytest.raises(ValidationError):
        ResetClockParams(dt=0.3, tau=1.0)
    with pytest.raises(ValidationError):
        ResetClockParams(truncation=0)


def test_clock_defaults():
    p = ResetClockParams()
    assert (p.stride, p.cutoff) == (10, 10)
    assert ResetClockParams(dt=0.00625).cutoff == 160
    t = clock_machine(p)
    require_valid(t)
    assert t.n_states == 11 and is_minimal(t)


def test_clock_single_rate_is_memoryless():
    params = ResetClockParams(gamma0=2.0, gamma1=2.0, dt=0.1)
    t, gram = reset_clock(params)
    assert np.allclose(gram, 1.0, atol=1e-12)
    pi = steady_state(t, clock_input_model(params))
    assert ensemble_entropy(gram, pi) == pytest.approx(0.0, abs=1e-9)
    assert minimize(t)[0].n_states == 1


def test_clock_stationary_closed_form():
    # a deep truncation leaves a negligible tail
    params = ResetClockParams(dt=0.05, truncation=400)
    pi = steady_state(clock_machine(params), clock_input_model(params))
    n = np.arange(100)
    assert np.abs(pi[:100] - clock_stationary_closed_form(params, n)).max() < 1e-6
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)


def test_clock_gram_rank_two():
    params = ResetClockParams(dt=0.025)
    gram = clock_gram(params)
    assert np.iscomplexobj(gram)
    pi = steady_state(clock_machine(params), clock_input_model(params))
    lam = kernel_spectrum(gram, pi)
    assert np.sum(lam > 1e-10) <= 2
    assert ensemble_entropy(gram, pi) <= 1.0 + 1e-9


@pytest.mark.parametrize("dt", [0.1, 0.05, 0.025, 0.0125, 0.00625])
def test_clock_information_bounds(dt):
    params = ResetClockParams(dt=dt)
    info = clock_block_information(params)
    bound = (1 - math.exp(-(params.gamma0 + params.gammax) * params.tau)) * info.H_classical
    assert info.classical >= bound - 1e-9
    assert 0 <= info.quantum <= 1.0 + 1e-9
    assert info.quantum <= info.classical + 1e-9


@pytest.mark.parametrize("dt, truncation", [(0.5, None), (0.25, 6), (0.1, 3)])
def test_clock_structured_equals_enumeration(dt, truncation):
    params = ResetClockParams(dt=dt, truncation=truncation)
    t, gram = reset_clock(params)
    im = clock_input_model(params)
    bl = block_law(t, im, params.stride)
    info = clock_block_information(params, stationary=bl.stationary)
    assert info.classical == pytest.approx(classical_block_mutual_information(bl), abs=1e-9)
    enc = make_encoding(gram, "closed_form")
    assert info.quantum == pytest.approx(quantum_block_mutual_information(bl, enc), abs=1e-9)


def test_clock_structured_equals_density_matrices():
    params = ResetClockParams(dt=0.5)
    t, gram = reset_clock(params)
    im = clock_input_model(params)
    pi = steady_state(t, im)
    words = oracles.enumerate_words(t, im.distribution, params.stride, pi)
    info = clock_block_information(params, stationary=pi)
    assert info.classical == pytest.approx(oracles.block_information(words, pi), abs=1e-9)
    assert info.quantum == pytest.approx(oracles.holevo_by_density(words, gram), abs=1e-6)


def test_clock_sweep_examples():
    rows = clock_sweep(ResetClockParams(), [0.025, 0.1, 0.05])
    assert [r.dt for r in rows] == [0.1, 0.05, 0.025]
    assert [r.L for r in rows] == [10, 20, 40]
    c = [r.classical_dissipation_per_time for r in rows]
    assert c[0] < c[1] < c[2]
    assert all(r.quantum_dissipation_per_time <= 2.0 for r in rows)


def test_clock_sweep_is_information_per_time():
    for tau in (1.0, 0.5):
        params = ResetClockParams(dt=0.05, tau=tau)
        row = clock_sweep(params, [0.05])[0]
        info = clock_block_information(params)
        assert row.classical_dissipation_per_time == pytest.approx(info.classical / tau, rel=1e-12)
        assert row.quantum_dissipation_per_time == pytest.approx(info.quantum / tau, rel=1e-12)


def test_clock_sweep_classical_slope():
    rows = clock_sweep(ResetClockParams(), [0.1, 0.05, 0.025, 0.0125, 0.00625])
    x = np.log2(1 / np.array([r.dt for r in rows]))
    y = np.array([r.classical_dissipation_per_time for r in rows])
    slope = np.polyfit(x, y, 1)[0]
    assert slope > 0
    assert slope == pytest.approx(1 - math.exp(-1.1), abs=0.1)


def test_continuum_analytic_case():
    gamma, dt = 3.0, 1e-3
    params = ResetClockParams(gamma0=gamma, gamma1=gamma, gammax=1e-9, dt=dt, truncation=20000)
    c = clock_continuum_entropy(params)
    rate = gamma + 1e-9
    expected = math.log2(1 / (rate * dt)) + 1 / math.log(2)
    assert c.value == pytest.approx(expected, abs=1e-8)


def test_continuum_scaling_and_agreement():
    base = ResetClockParams(dt=1e-3, truncation=20000)
    c = clock_continuum_entropy(base)
    half = clock_continuum_entropy(ResetClockParams(dt=5e-4, truncation=40000))
    assert half.value - c.value == pytest.approx(1.0, abs=1e-9)
    assert c.precise and c.tail_mass < 1e-6
    # exact entropy of the closed-form stationary law, summed far past the tail
    pi = clock_stationary_closed_form(base, np.arange(20000))
    assert abs(c.value - shannon_entropy(pi / pi.sum(), 1e-6)) < 0.05


def test_continuum_warns_on_heavy_tail():
    with pytest.warns(RuntimeWarning):
        c = clock_continuum_entropy(ResetClockParams(dt=0.1))
    assert not c.precise


def test_three_state_ensembles():
    e = appendix_i_ensembles()
    assert e.qubit.entropy() == pytest.approx(1.0, abs=1e-9)
    assert e.qutrit.entropy() == pytest.approx(0.614, abs=0.005)
    assert e.weights_inferred
    lam = np.sort(kernel_spectrum(e.qutrit.gram, e.qutrit.weights))
    assert np.allclose(lam, [1 / 18, 1 / 18, 8 / 9], atol=1e-12)


def test_uniform_weights_are_singled_out():
    # among symmetric two-parameter families, only uniform weights give both values
    e = appendix_i_ensembles()
    hits = []
    for a in np.linspace(0.02, 0.96, 95):
        w = np.array([a, (1 - a) / 2, (1 - a) / 2])
        h1 = ensemble_entropy(e.qubit.gram, w)
        h2 = ensemble_entropy(e.qutrit.gram, w)
        if abs(h1 - 1.0) < 1e-3 and abs(h2 - 0.61) < 0.01:
            hits.append(a)
    assert hits and all(abs(a - 1 / 3) < 0.03 for a in hits)


@given(N=st.integers(3, 24), sigma=st.floats(0.02, 0.15))
def test_brownian_generator_minimal(N, sigma):
    t = brownian_ring(BrownianRingParams(N, sigma))
    require_valid(t)
    assert is_minimal(t)


@given(dt=st.sampled_from([0.5, 0.25, 0.2, 0.1, 0.05]), p=st.floats(0.05, 0.95))
def test_clock_generator_minimal(dt, p):
    t = clock_machine(ResetClockParams(p=p, dt=dt))
    require_valid(t)
    assert is_minimal(t)


def test_sweeps_are_deterministic():
    a = clock_sweep(ResetClockParams(), [0.1, 0.05])
    b = clock_sweep(ResetClockParams(), [0.1, 0.05])
    assert a == b
    assert brownian_sweep(0.02, [8, 16]) == brownian_sweep(0.02, [8, 16])
