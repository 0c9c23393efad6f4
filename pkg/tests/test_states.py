import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_cascade import GhzState, SchmidtState, density_bipartite, density_ghz, schmidt_L
from nonlocal_cascade.errors import InvalidState


def assert_pure_state(rho):
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
    assert abs(np.trace(rho) - 1) < 1e-12
    assert abs(np.trace(rho @ rho) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho)[0] > -1e-10


def test_product_state():
    rho = density_bipartite(SchmidtState((1.0, 0.0)))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    np.testing.assert_array_equal(rho, expected)


def test_maximally_entangled_state(bell):
    rho = density_bipartite(bell)
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    np.testing.assert_allclose(rho, np.outer(phi, phi), atol=1e-15)


def test_rectangular_state_entries():
    rho = density_bipartite(SchmidtState((0.8, 0.6), 2, 3))
    assert rho.shape == (6, 6)
    expected = np.zeros((6, 6))
    expected[0, 0], expected[0, 4], expected[4, 0], expected[4, 4] = 0.64, 0.48, 0.48, 0.36
    np.testing.assert_allclose(rho, expected, atol=1e-15)
    assert_pure_state(rho)


@pytest.mark.parametrize("coeffs, dims", [
    ((0.6, 0.8), (2, 2)),          # ascending
    ((0.5, 0.5), (2, 2)),          # not normalized
    ((0.8, 0.6), (2, 1)),          # s > t
    ((1.0, 0.0, 0.0), (2, 2)),     # wrong count
    ((1.2, -0.2), (2, 2)),         # negative
])
def test_invalid_schmidt_states(coeffs, dims):
    with pytest.raises(InvalidState):
        SchmidtState(coeffs, *dims)


def test_normalized_records_factor():
    st_, factor = SchmidtState.normalized([1, 3], 2, 2)
    assert factor == pytest.approx(1 / math.sqrt(10))
    assert st_.coeffs == pytest.approx((3 / math.sqrt(10), 1 / math.sqrt(10)))


def test_ghz_densities():
    rho = density_ghz(GhzState(math.pi / 4))
    expected = np.zeros((8, 8))
    expected[0, 0] = expected[0, 7] = expected[7, 0] = expected[7, 7] = 0.5
    np.testing.assert_allclose(rho, expected, atol=1e-15)

    rho = density_ghz(GhzState(math.pi / 6))
    assert rho[0, 0] == pytest.approx(0.75)
    assert rho[7, 7] == pytest.approx(0.25)
    assert rho[0, 7] == pytest.approx(math.sqrt(3) / 4)
    assert rho[7, 0] == pytest.approx(math.sqrt(3) / 4)
    assert_pure_state(rho)


@pytest.mark.parametrize("alpha", [0.0, math.pi / 2, -0.1, 2.0])
def test_ghz_rejects_boundary(alpha):
    with pytest.raises(InvalidState):
        GhzState(alpha)


def test_ghz_from_sin2_2alpha():
    g = GhzState.from_sin2_2alpha(8 / 9)
    assert math.sin(2 * g.alpha) ** 2 == pytest.approx(8 / 9)


@pytest.mark.parametrize("coeffs, expected", [
    ((1 / math.sqrt(2), 1 / math.sqrt(2)), 1.0),
    ((1.0, 0.0), 0.0),
    ((math.sqrt(0.5), math.sqrt(0.3), math.sqrt(0.2)), 2 * math.sqrt(0.15)),
])
def test_schmidt_L(coeffs, expected):
    assert schmidt_L(SchmidtState(coeffs)) == pytest.approx(expected, abs=1e-15)


schmidt_vectors = st.lists(st.floats(0, 1), min_size=2, max_size=6).filter(lambda v: sum(v) > 1e-3)


@settings(max_examples=200, deadline=None)
@given(schmidt_vectors, st.integers(0, 2))
def test_random_states_are_pure_and_L_bounded(raw, extra):
    state, _ = SchmidtState.normalized(raw, len(raw), len(raw) + extra)
    assert_pure_state(density_bipartite(state))
    L = schmidt_L(state)
    assert 0 <= L <= 1 + 1e-12
    c = state.coeffs
    if L > 1 - 1e-9:
        # equality needs the coefficients to pair up
        for i in range(0, len(c), 2):
            tail = c[i + 1] if i + 1 < len(c) else 0.0
            assert c[i] == pytest.approx(tail, abs=1e-4)
    assert (L > 0) == (c[1] > 0)
