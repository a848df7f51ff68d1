import numpy as np
import pytest

from pathfollow import make_ideal_diode, make_practical_diode, make_transistor


@pytest.fixture(scope="session")
def ideal_diode():
    return make_ideal_diode()


@pytest.fixture(scope="session")
def practical_diode():
    return make_practical_diode()


@pytest.fixture(scope="session")
def transistor():
    # session scope shares the oracle's warm-start cache across tests
    return make_transistor()


@pytest.fixture(scope="session")
def all_problems(practical_diode, ideal_diode, transistor):
    return (practical_diode, ideal_diode, transistor)


# Times where each problem's path sits on a smooth branch (away from
# segment boundaries; for the transistor also away from its branch-switch
# discontinuities near t = 0.111, 3.365, 3.700).
SMOOTH_TIMES = {
    "ideal-diode": (0.10, 0.15, 0.20, 0.25, 0.30),
    "practical-diode": (0.8, 1.2, 1.5708, 2.0, 2.4),
    "transistor": (1.2, 1.5708, 2.0, 2.4, 2.8),
}

# Transistor branch switches (the swapped diode ordering makes the exact
# path jump there); sampling for Lipschitz/per-step contracts avoids them.
TRANSISTOR_JUMPS = (0.1112, 3.3653, 3.7002)


def smooth_sample_times(problem, count):
    """Deterministic times on smooth arcs of the tracked path."""
    if problem.name == "ideal-diode":
        # kinks of sinh(max(sin 2 pi t, 0)) sit at multiples of 0.5
        ts = [t for t in np.linspace(0.06, 2.94, 4 * count) if min(abs(t - 0.5 * k) for k in range(7)) > 0.05]
    elif problem.name == "practical-diode":
        # segment boundaries where 3 sin t crosses 1 sit at 0.3398 and 2.8018
        ts = [t for t in np.linspace(0.06, 2.94, 4 * count) if abs(t - 0.3398) > 0.08 and abs(t - 2.8018) > 0.08]
    else:
        ts = [
            t
            for t in np.linspace(0.3, 6.0, 4 * count)
            if min(abs(t - tj) for tj in TRANSISTOR_JUMPS) > 0.12
        ]
    return [float(t) for t in ts[:count]]
