import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from ionhom.config import (LaserDrive, MagneticField, SystemConfig, linear_polarization, mhz,
                           standard_scheme)
from ionhom.configfile import load_config
from ionhom.pipeline import analytic

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def full_config(rabi_g=80.0, det_g=-20.0, rabi_r=60.0, det_r=10.0, field=3.0, ang_g=90.0, ang_r=90.0,
                gamma=20.1, branching=0.731, lw=0.0):
    """8-level config from ordinary MHz values."""
    lasers = (
        LaserDrive(("S12", "P12"), mhz(rabi_g), mhz(det_g), linear_polarization(ang_g), mhz(lw)),
        LaserDrive(("D32", "P12"), mhz(rabi_r), mhz(det_r), linear_polarization(ang_r), mhz(lw)),
    )
    return SystemConfig(standard_scheme(mhz(gamma), branching), lasers, MagneticField(field))


@pytest.fixture
def config8():
    return full_config()


@pytest.fixture(scope="session")
def ba_run():
    return analytic(load_config("ba-like"))


@pytest.fixture(scope="session")
def ca_run():
    return analytic(load_config("ca-like"))


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def record(criterion: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        checks = ACCEPTANCE[key]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        terminalreporter.write_line(f"{key} {status}: " + "; ".join(d for _, d in checks))
