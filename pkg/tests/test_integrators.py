import math

import numpy as np
import pytest

from aisepred.integrators import build_integrator


def test_order1_matrices():
    m = build_integrator(1, 0.01)
    assert m.A.shape == (1, 1) and m.A[0, 0] == 1.0
    assert m.B[0] == pytest.approx(0.01)
    assert m.C[0] == 1.0


def test_order2_matrices():
    m = build_integrator(2, 0.01)
    np.testing.assert_allclose(m.A, [[1.0, 0.01], [0.0, 1.0]])
    np.testing.assert_allclose(m.B, [0.00005, 0.01])
    np.testing.assert_allclose(m.C, [1.0, 0.0])


def test_order3_input_column():
    m = build_integrator(3, 0.01)
    np.testing.assert_allclose(m.B, [1e-6 / 6.0, 5e-5, 1e-2])
    np.testing.assert_allclose(np.diag(m.A), 1.0)
    assert np.allclose(m.A, np.triu(m.A))


@pytest.mark.parametrize("order", [0, 4, -1])
def test_invalid_order_rejected(order):
    with pytest.raises(ValueError, match="order"):
        build_integrator(order, 0.01)


def test_nonpositive_sample_time_rejected():
    with pytest.raises(ValueError, match="sample time"):
        build_integrator(1, 0.0)


def test_matrices_read_only():
    m = build_integrator(2, 0.01)
    with pytest.raises(ValueError):
        m.A[0, 0] = 2.0


@pytest.mark.parametrize("order", [1, 2, 3])
def test_constant_input_yields_polynomial_output(order):
    # Iterating the chain with a constant input makes the output a degree-m
    # polynomial of time whose m-th finite difference recovers the input.
    t_s = 0.01
    m = build_integrator(order, t_s)
    d = 2.7
    x = np.zeros(order)
    ys = []
    for _ in range(200):
        ys.append(m.C @ x)
        x = m.A @ x + m.B * d
    ys = np.asarray(ys)
    diffed = np.diff(ys, n=order) / t_s**order
    np.testing.assert_allclose(diffed, d, rtol=1e-9)

    # Exactness check against the continuous-time solution from rest.
    k = np.arange(200)
    expected = d * (k * t_s) ** order / math.factorial(order)
    np.testing.assert_allclose(ys, expected, atol=1e-12)
