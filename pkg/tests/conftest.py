"""Shared fixtures: cached meshes/systems and the acceptance-line report."""

from __future__ import annotations

import numpy as np
import pytest

from patfp.assembly import assemble_system, cfl_dt
from patfp.medium import default_medium
from patfp.mesh import generate_disk_mesh

ACCEPTANCE_LINES: list[str] = []

_MESHES: dict[int, object] = {}
_SYSTEMS: dict[int, object] = {}


@pytest.fixture(scope="session")
def params():
    return default_medium()


@pytest.fixture(scope="session")
def mesh_at():
    def get(level: int):
        if level not in _MESHES:
            _MESHES[level] = generate_disk_mesh(level)
        return _MESHES[level]

    return get


@pytest.fixture(scope="session")
def system_at(mesh_at, params):
    def get(level: int):
        if level not in _SYSTEMS:
            _SYSTEMS[level] = assemble_system(mesh_at(level), params)
        return _SYSTEMS[level]

    return get


@pytest.fixture(scope="session")
def dt_at(mesh_at, params):
    def get(level: int, safety: float = 0.05) -> float:
        return cfl_dt(mesh_at(level), params, safety)

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def acceptance():
    def record(number: int, name: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} {name}: {'PASS' if ok else 'FAIL'} [{detail}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
