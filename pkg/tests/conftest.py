import numpy as np
import pytest

from sympb import EllipseSupport, FourierSupport, sample_fourier_domain


@pytest.fixture(scope="session")
def circle():
    return FourierSupport(1.0, name="circle")


@pytest.fixture(scope="session")
def ellipse():
    return EllipseSupport(2.0, 1.0, name="ellipse21")


@pytest.fixture(scope="session")
def rotated_ellipse():
    return EllipseSupport(2.0, 1.0, rotation=0.3, name="ellipse21rot")


@pytest.fixture(scope="session")
def wavy():
    # 1 + 0.1 cos(3 alpha): valid, visibly non-elliptic
    return FourierSupport(1.0, [0.0, 0.0, 0.1], name="wavy3")


@pytest.fixture(scope="session")
def random_domains():
    rng = np.random.default_rng(20240817)
    return [sample_fourier_domain(rng) for _ in range(6)]
