import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from laymat.calibration import synth_calibration
from laymat.selector import DeviceCandidate
from laymat.topology import nairobi

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def nairobi_map():
    return nairobi()


@pytest.fixture(scope="session", params=["uniform", "gradient", "hotspot"])
def nairobi_device(request, nairobi_map):
    snap = synth_calibration(nairobi_map, seed=11, profile=request.param)
    return DeviceCandidate(request.param, nairobi_map, snap)


@pytest.fixture(scope="session")
def gradient_device(nairobi_map):
    return DeviceCandidate("gradient", nairobi_map, synth_calibration(nairobi_map, 5, "gradient"))


# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
