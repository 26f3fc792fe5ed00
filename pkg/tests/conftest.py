"""Shared fixtures: cached generators/spectra and the acceptance summary."""

import re

import pytest

from wrlab import (
    Grid1D,
    assemble_generator,
    build_kernel_blocks,
    constant_coefficients,
)
from wrlab.spectral import spectrum


def rotation_descriptor(tau):
    """Boundary-rotation preset at strength tau; zero coupling for None."""
    if tau is None:
        return {"kind": "zero"}
    return {"kind": "preset", "name": "example-8.1", "tau": float(tau)}


@pytest.fixture(scope="session")
def make_gen():
    """Memoized generator factory keyed by (tau, n)."""
    cache = {}

    def build(tau=None, n=200):
        key = (tau, n)
        if key not in cache:
            grid = Grid1D(n)
            coupling = build_kernel_blocks(grid, rotation_descriptor(tau))
            cache[key] = assemble_generator(grid, constant_coefficients(), coupling)
        return cache[key]

    return build


@pytest.fixture(scope="session")
def make_spectrum(make_gen):
    """Memoized spectrum factory keyed by (tau, n, count)."""
    cache = {}

    def build(tau=None, n=200, count=8):
        key = (tau, n, count)
        if key not in cache:
            cache[key] = spectrum(make_gen(tau=tau, n=n), count=count)
        return cache[key]

    return build


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    results = {}
    for status, outcome in (("passed", "PASS"), ("failed", "FAIL"),
                            ("error", "FAIL"), ("skipped", "SKIP")):
        for rep in terminalreporter.stats.get(status, ()):
            m = re.search(r"test_criterion_(\d+)_(\w+)", getattr(rep, "nodeid", ""))
            if m and getattr(rep, "when", "call") == "call":
                results[int(m.group(1))] = (m.group(2), outcome)
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for num in sorted(results):
            label, outcome = results[num]
            terminalreporter.write_line(f"criterion {num:02d} [{label}]: {outcome}")
