import math

import pytest

from kato.vec_model import RsuProfile, Scenario, SystemParams, TaskSpec, VehicleState


def rsu_with_costs(rid, beta, tx, d=10.0, angle=0.0, B=50.0):
    """RSU whose full-bandwidth transmission cost 1/R(0) equals ``tx`` s/Gbit.

    So its unit cost at sharing count m is exactly ``beta + m * tx`` (up to
    rounding through the dB round trip).
    """
    eta_lin = d * d * (2.0 ** (1.0 / (B * tx)) - 1.0)
    return RsuProfile(id=rid, x=d * math.cos(angle), y=d * math.sin(angle), beta=beta,
                      eta_db=10.0 * math.log10(eta_lin))


def make_scenario(rsus, beta0=1.0, Q=1.0, T=None, speed=0.0, x0=0.0, y0=0.0, sid=0):
    T = Q * beta0 if T is None else T
    return Scenario(id=sid, vehicle=VehicleState(x0, y0, speed, beta0), task=TaskSpec(Q, T),
                    rsus=tuple(rsus), params=SystemParams(), seed=0)


@pytest.fixture
def two_rsu_helpful():
    """Both RSUs worth using: c1 = 1 + m, c2 = 3 + m, beta0 = 1."""
    return make_scenario([rsu_with_costs(1, 1.0, 1.0, angle=0.3),
                          rsu_with_costs(2, 3.0, 1.0, angle=2.0)])


@pytest.fixture
def two_rsu_weak():
    """Second RSU too slow to pay for halving the bandwidth: c2 = 10 + m."""
    return make_scenario([rsu_with_costs(1, 1.0, 1.0, angle=0.3),
                          rsu_with_costs(2, 10.0, 1.0, angle=2.0)])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
