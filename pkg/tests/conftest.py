import numpy as np
import pytest

from brvlab.dep_families import DependenceFamily, MixingFunction, WeightLaw
from brvlab.rv_core import RVMarginal


@pytest.fixture
def pareto2():
    return RVMarginal(2.0)


@pytest.fixture
def u02():
    return WeightLaw.uniform(0.0, 2.0)


@pytest.fixture
def third_config(pareto2, u02):
    """Joint mixture with w = 0.5 and iid uniform(0, 2) weights: corner mass 1/3."""
    return DependenceFamily.joint_mixture(pareto2, pareto2, u02, u02, MixingFunction(0.5))


@pytest.fixture
def tilt_config(u02):
    """Marginal tilt with a1 = a2 = 0.5, Delta ~ uniform(0, 1), alpha = 2, beta = 3."""
    return DependenceFamily.marginal_tilt(RVMarginal(2.0), RVMarginal(3.0), u02, WeightLaw.uniform(0.0, 1.0), 0.5, 0.5)


@pytest.fixture
def comonotone():
    def make(alpha=2.0, w=1.0):
        m = RVMarginal(alpha)
        one = WeightLaw.constant(1.0)
        return DependenceFamily.joint_mixture(m, m, one, one, MixingFunction(w))
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion and echo it."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def emit(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capman.global_and_fixture_disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
