"""Discrete-time integrator chains used as the internal model for derivative estimation.

An order-m chain maps an unknown input d (the m-th derivative of the measured
signal) through m cascaded discrete integrators to the measured output, so
estimating d amounts to m-fold numerical differentiation.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np

__all__ = ["SystemMatrices", "build_integrator"]


@dataclass(frozen=True)
class SystemMatrices:
    """State-space matrices (A, B, C) of a discrete integrator chain.

    State ordering is (signal, first derivative, ..., highest derivative), so
    C = [1, 0, ..., 0] always selects the signal component. Immutable; safe to
    share across threads.
    """

    order: int
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    t_s: float
    n: int

    def __post_init__(self):
        self.A.setflags(write=False)
        self.B.setflags(write=False)
        self.C.setflags(write=False)


def build_integrator(order, t_s):
    """Build the order-1, -2, or -3 discrete integrator model for sample time t_s.

    A is upper triangular with unit diagonal (Taylor propagation of the state),
    B holds t_s^i / i! for i = order down to 1, and C reads the first state.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"differentiation order must be 1, 2, or 3, got {order!r}")
    if not t_s > 0:
        raise ValueError(f"sample time must be positive, got {t_s!r}")

    n = order
    A = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = t_s ** (j - i) / factorial(j - i)
    B = np.array([t_s ** (n - i) / factorial(n - i) for i in range(n)])
    C = np.zeros(n)
    C[0] = 1.0
    return SystemMatrices(order=order, A=A, B=B, C=C, t_s=float(t_s), n=n)
