import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from agent_thermo.case_studies import alice_bob
from agent_thermo.corpus import random_minimal_machine
from agent_thermo.transducer import InputModel

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store an acceptance verdict: record(criterion, passed, detail); repeated calls AND together."""

    def _record(criterion, passed, detail=""):
        if criterion in ACCEPTANCE:
            old, old_detail = ACCEPTANCE[criterion]
            passed, detail = old and bool(passed), f"{old_detail}; {detail}"
        ACCEPTANCE[criterion] = (bool(passed), detail)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def ab():
    t, gram = alice_bob()
    return t, InputModel.for_machine(t), gram


def machine_from_seed(seed, max_states=4):
    rng = np.random.default_rng(seed)
    return random_minimal_machine(rng, max_states, dyadic=bool(seed % 2))
