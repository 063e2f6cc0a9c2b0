"""Shared fixtures: the default catalog and cached preset runs.

Full preset runs take a few hundred milliseconds each, so every
(preset, controller) trajectory is simulated once per session and shared
across test modules.
"""

from __future__ import annotations

import pytest

from platoonsim import harness
from platoonsim.params import Controller, default_params


@pytest.fixture(scope="session")
def catalog():
    return default_params()


@pytest.fixture(scope="session")
def preset_run(catalog):
    control, energy = catalog
    cache = {}

    def get(preset: str, controller: Controller):
        key = (preset, controller)
        if key not in cache:
            spec = harness.build_preset(preset, controller)
            cache[key] = harness.run(spec, control, energy)
        return cache[key]

    return get
