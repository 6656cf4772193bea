import numpy as np
import pytest

from pdmdp.exact import value_iteration
from pdmdp.instances import three_state_example


@pytest.fixture(scope="session")
def ex3():
    return three_state_example()


@pytest.fixture(scope="session")
def ex3_solution(ex3):
    return value_iteration(ex3.instance, 1e-12)


@pytest.fixture(scope="session")
def ex3_optimal_value():
    # Exact solution of v = r_pi + gamma P_pi v under (leave, leave, right).
    return np.array([1.3, 1.3, 1.8])
