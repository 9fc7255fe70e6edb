import numpy as np
import pytest

from mercereig import (
    BrownianBridgeKernel,
    greedy_select,
    newton_l2_gramian,
    random_interval_points,
)


@pytest.fixture(scope="session")
def bb_rough():
    return BrownianBridgeKernel(1, 0.0)


@pytest.fixture(scope="session")
def interval_100(bb_rough):
    return random_interval_points(100, seed=0)


@pytest.fixture(scope="session")
def bb_greedy_100(bb_rough, interval_100):
    """50-point sup-norm greedy selection on 100 seeded points, with the
    exact Gramian of the full basis (shared by several test modules)."""
    basis = greedy_select(bb_rough, interval_100, 50, criterion="linf")
    gram = newton_l2_gramian(basis, interval_100, mode="exact")
    return basis, gram


def assert_reports_equal(a, b):
    """Field-by-field equality of two report dataclasses, NaN-tolerant."""
    assert type(a) is type(b)
    for name, av in vars(a).items():
        bv = getattr(b, name)
        if isinstance(av, np.ndarray):
            assert np.array_equal(av, np.asarray(bv), equal_nan=av.dtype.kind == "f"), name
        elif isinstance(av, dict):
            assert set(av) == set(bv), name
            for k in av:
                x, y = av[k], bv[k]
                if isinstance(x, np.ndarray):
                    assert np.array_equal(x, np.asarray(y), equal_nan=True), (name, k)
                elif isinstance(x, float) and isinstance(y, float) and np.isnan(x):
                    assert np.isnan(y), (name, k)
                else:
                    assert x == y, (name, k)
        elif isinstance(av, float) and np.isnan(av):
            assert np.isnan(bv), name
        else:
            assert av == bv, name
