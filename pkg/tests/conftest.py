import numpy as np
import pytest

from ddghz.config import bundled_register
from ddghz.spinmodel import NuclearSpin, Register


@pytest.fixture(scope="session")
def register27():
    return bundled_register()


@pytest.fixture(scope="session")
def toy_register():
    """Four strongly coupled nuclei picked from the bundled register."""
    spins = (
        NuclearSpin.from_khz("C5", -11.346, 59.21),
        NuclearSpin.from_khz("C12", 20.569, 41.51),
        NuclearSpin.from_khz("C18", -36.308, 26.62),
        NuclearSpin.from_khz("C19", 24.399, 24.81),
    )
    return Register(spins=spins, omega_larmor=2.0 * np.pi * 431.94e3)
