from __future__ import annotations

import json

import numpy as np
import pytest

from oranlab.drl import Mlp, PolicyModel, untrained_encoder
from oranlab.intent import IntentSpec, make_intent
from oranlab.ric import Domain


def _random_policy(domain: str | Domain, n_slices: int = 3, seed: int = 0) -> PolicyModel:
    dom = Domain.parse(domain) if isinstance(domain, str) else domain
    n_actions = len(dom.action_space())
    rng = np.random.default_rng(seed)
    net = Mlp.create((3 * n_slices, 30, n_actions), hidden="tanh", output="linear", rng=rng)
    enc = untrained_encoder(seed, lo=[0.0, 0.0, 0.0], hi=[1e5, 1e7, 100.0])
    return PolicyModel("ppo", net, enc, {"domain": str(dom)})


def _intent_for(actions=("ran_slicing",)) -> IntentSpec:
    return make_intent(["embb", "mmtc", "urllc"], list(actions), [72.0440333, 0.229357798, -0.00005])


@pytest.fixture
def random_policy():
    return _random_policy


@pytest.fixture
def intent_for():
    return _intent_for


def intent_bytes(intent: IntentSpec) -> bytes:
    return json.dumps(intent.to_dict(), sort_keys=True).encode()


@pytest.fixture
def intent_to_bytes():
    return intent_bytes


# Acceptance verdicts, one line per criterion, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
