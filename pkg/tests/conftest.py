import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


def circular_distance(a: float, b: float) -> float:
    """Distance between two angles modulo 2*pi."""
    d = (a - b) % (2 * np.pi)
    return min(d, 2 * np.pi - d)


@pytest.fixture(scope="session")
def canonical_transports():
    """Transport results for every bundled preset, computed once per session."""
    from eptriad.loops import PRESET_NAMES, preset_loop
    from eptriad.transport import transport

    return {name: transport(preset_loop(name, steps_per_segment=256)) for name in PRESET_NAMES}
