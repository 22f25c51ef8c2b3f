import numpy as np
import pytest

from intrinsicopt import CallPosition, MarketParams, OneTouchSpec


@pytest.fixture
def fig3():
    """Headline call-study parameter set."""
    return MarketParams.from_theta(s0=1.2, theta=0.05, r=0.01, sigma=0.5,
                                   T=2.0, p=0.75, w0=0.16, alpha=0.4)


@pytest.fixture
def fig3_pos():
    return CallPosition(K=0.85, lam=3.1, delta_c=0.02)


@pytest.fixture
def fig7():
    """One-touch study parameter set."""
    return MarketParams.from_theta(s0=1.2, theta=0.05, r=0.01, sigma=0.5,
                                   T=2.0, p=0.75, w0=0.1, alpha=0.1)


@pytest.fixture
def fig7_spec():
    return OneTouchSpec(B=1.9, K=1.3, premium=0.02)
