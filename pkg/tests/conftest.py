import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

HYPERBOLA = {"kind": "surface_of_revolution", "profile": "hyperbola", "working_region": [0.25, 6.2]}


@pytest.fixture(scope="session")
def plane():
    from flowerflow.manifold import make_manifold

    return make_manifold("euclidean_plane")


@pytest.fixture(scope="session")
def sphere():
    from flowerflow.manifold import make_manifold

    return make_manifold("round_sphere")


@pytest.fixture(scope="session")
def torus():
    from flowerflow.manifold import make_manifold

    return make_manifold("flat_torus")


@pytest.fixture(scope="session")
def sech():
    from flowerflow.manifold import make_manifold

    return make_manifold({"kind": "surface_of_revolution", "profile": "sech_bulge"})


@pytest.fixture(scope="session")
def hyperbola():
    from flowerflow.manifold import make_manifold

    return make_manifold(HYPERBOLA)


@pytest.fixture(scope="session")
def hyperbola_ends(hyperbola):
    from flowerflow.ends import EndsDecomposition, Sigma

    return EndsDecomposition(hyperbola, (Sigma(1.0, "+", "narrow"),), 0.05)


@pytest.fixture(scope="session")
def hyperbola_config(hyperbola):
    from flowerflow.flow import FlowConfig

    return FlowConfig.create(hyperbola, L=5.05, delta=0.24, record_every=500)


@pytest.fixture(scope="session")
def hyperbola_filling(hyperbola, hyperbola_ends, hyperbola_config):
    """Escape filling of the radius-0.8 parallel; its flow is the one used by the escape tests."""
    import time

    from flowerflow.fill import fill_2cage
    from flowerflow.nets import parallel_circle

    f0 = parallel_circle(hyperbola, 1.0 / 0.8, hyperbola_config.N)
    t0 = time.perf_counter()
    filling = fill_2cage(hyperbola, f0, hyperbola_config, hyperbola_ends)
    return filling, time.perf_counter() - t0


@pytest.fixture(scope="session")
def hyperbola_run(hyperbola_filling):
    filling, seconds = hyperbola_filling
    return filling.outcome, seconds


@pytest.fixture(scope="session")
def sphere_run(sphere):
    import time

    from flowerflow.flow import FlowConfig, run_flow
    from flowerflow.nets import equator_petal

    cfg = FlowConfig.create(sphere, L=7.5, delta=0.4)
    f0 = equator_petal(sphere, cfg.N, 0.05)
    t0 = time.perf_counter()
    out = run_flow(sphere, f0, cfg)
    return out, time.perf_counter() - t0


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = [v for k, v in sorted((k, v) for k, v in getattr(mod, "RESULTS", {}).items() if isinstance(k, int))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
