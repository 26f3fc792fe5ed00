"""Grid, weighted product space and lattice operations."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrlab.errors import DimensionError, DomainError
from wrlab.meshspace import (
    Grid1D,
    as_state,
    inner_product,
    lattice_ops,
    mass_weights,
    norm,
)


def test_grid_nodes_and_midpoints():
    grid = Grid1D(4)
    assert grid.h == 0.25
    assert grid.size == 5
    npt.assert_allclose(grid.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])
    npt.assert_allclose(grid.midpoints(), [0.125, 0.375, 0.625, 0.875])


@pytest.mark.parametrize("n", [1, 0, -3])
def test_grid_rejects_degenerate_cell_counts(n):
    with pytest.raises(DimensionError):
        Grid1D(n)


def test_mass_weights_total_is_three():
    # interval measure 1 plus two unit boundary weights
    for n in (2, 7, 50):
        w = mass_weights(Grid1D(n))
        assert w.interior.sum() == pytest.approx(1.0, abs=1e-14)
        assert w.w.sum() == pytest.approx(3.0, abs=1e-13)


def test_mass_weights_structure():
    grid = Grid1D(10)
    w = mass_weights(grid)
    h = grid.h
    npt.assert_allclose(w.interior[1:-1], h)
    assert w.interior[0] == pytest.approx(h / 2)
    assert w.interior[-1] == pytest.approx(h / 2)
    npt.assert_allclose(w.boundary, [1.0] + [0.0] * 9 + [1.0])
    assert w.w[0] == pytest.approx(h / 2 + 1.0)
    npt.assert_allclose(w.matrix(), np.diag(w.w))


def test_inner_product_of_ones_is_total_measure():
    grid = Grid1D(37)
    w = mass_weights(grid)
    ones = np.ones(grid.size)
    assert inner_product(ones, ones, w) == pytest.approx(3.0, abs=1e-13)
    assert norm(ones, w) == pytest.approx(np.sqrt(3.0), abs=1e-13)


def test_inner_product_conjugates_second_argument():
    grid = Grid1D(5)
    w = mass_weights(grid)
    u = np.linspace(0, 1, grid.size) * (1 + 2j)
    v = np.ones(grid.size) * 1j
    lhs = inner_product(u, v, w)
    rhs = np.conj(inner_product(v, u, w))
    assert lhs == pytest.approx(rhs)


def test_as_state_validates_shape():
    grid = Grid1D(4)
    state = as_state([1, 2, 3, 4, 5], grid)
    assert state.shape == (5,)
    with pytest.raises(DimensionError):
        as_state([1.0, 2.0], grid)
    with pytest.raises(DimensionError):
        as_state(np.ones((5, 1)), grid)


def test_lattice_parts_simple_vector():
    parts = lattice_ops(np.array([1.5, -2.0, 0.0]), Grid1D(2))
    npt.assert_allclose(parts.positive_part, [1.5, 0.0, 0.0])
    npt.assert_allclose(parts.negative_part, [0.0, 2.0, 0.0])
    npt.assert_allclose(parts.modulus, [1.5, 2.0, 0.0])


def test_lattice_ops_reject_complex():
    with pytest.raises(DomainError):
        lattice_ops(np.array([1.0 + 1j, 0.0, 0.0]), Grid1D(2))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=3, max_size=30))
def test_lattice_decomposition_identities(values):
    u = np.asarray(values)
    parts = lattice_ops(u, Grid1D(len(values) - 1))
    npt.assert_allclose(parts.positive_part - parts.negative_part, u, atol=1e-9)
    npt.assert_allclose(parts.positive_part + parts.negative_part,
                        parts.modulus, atol=1e-9)
    assert (parts.positive_part >= 0).all()
    assert (parts.negative_part >= 0).all()
    assert (parts.positive_part * parts.negative_part == 0).all()
