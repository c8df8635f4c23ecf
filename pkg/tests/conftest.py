import numpy as np
import pytest

from vesselsafe import preset_scenario

# Reference values printed to two decimals for the shipped scenario: the
# Riccati solution, feedback gain, and closed-loop matrix the acceptance
# gate compares against entry-wise.
P_PRINTED = np.array([
    [1.99, -0.06, -0.92],
    [-0.06, 2.64, 11.32],
    [-0.92, 11.32, 63.81],
])
K_PRINTED = np.array([
    [-0.05, 0.00, 0.02],
    [0.02, -0.09, -0.75],
])
ABAR_PRINTED = np.array([
    [-0.05, 0.10, 0.32],
    [-0.16, 0.25, 3.24],
    [0.02, -0.08, -0.75],
])


@pytest.fixture(scope="session")
def sec7():
    return preset_scenario("paper-sec7")


@pytest.fixture(scope="session")
def design(sec7):
    return sec7.design()


@pytest.fixture(scope="session")
def zcbf(sec7, design):
    return sec7.zcbf(design)


@pytest.fixture(scope="session")
def cert(sec7, design):
    return sec7.certificate(design)
