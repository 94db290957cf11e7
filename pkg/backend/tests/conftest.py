"""
Shared fixtures for the RedunFlow test suite.
"""

import logging
import shlex
import sys
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parents[2]
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from backend.app.analytics.fixtures import dictator_fixture, planted_redundancy_dataset  # noqa: E402
from backend.app.model.baseline import BaselineSpec  # noqa: E402
from backend.app.shapley.exact import exact_explain  # noqa: E402
from backend.app.utility.games import model_utility  # noqa: E402

TOOLS_DIR = REPO_ROOT / "tools"


def adapter_command(script: str, *args: str) -> str:
    """Shell-style command line running a tools/ adapter with this interpreter"""
    return " ".join(shlex.quote(part) for part in (sys.executable, str(TOOLS_DIR / script), *args))


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop handlers bound to streams captured by a previous test"""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


@pytest.fixture
def dictator():
    """(dataset, predictor) whose decision depends on feature 0 only"""
    return dictator_fixture()


@pytest.fixture
def dictator_explanation(dictator):
    """Exact (phi, matrix) of the dictator model on its first instance"""
    dataset, predictor = dictator
    u = model_utility(predictor, dataset.instances[0], BaselineSpec.zero())
    return exact_explain(u)


@pytest.fixture
def planted():
    return planted_redundancy_dataset(n=40, copies=3, noise=3, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
