"""Quantum phase estimation."""

from __future__ import annotations

from qforge.arithmetic import qft
from qforge.environments import control
from qforge.gates import h
from qforge.variables import QuantumFloat


def qpe(psi, U, precision, iter_spec=False):
    """Estimate the eigenphase of ``U`` on ``psi`` into a fresh QuantumFloat.

    The result register has ``precision`` qubits and exponent ``-precision``,
    so it holds phases in [0, 1) on a grid of 2^-precision. Qubit i of the
    register controls ``U`` applied 2^i times; with ``iter_spec`` the
    procedure is called once as ``U(psi, iter=2**i)`` instead.
    """
    if precision < 1:
        raise ValueError("precision must be at least 1")
    qs = psi.qs if hasattr(psi, "qs") else None
    res = QuantumFloat(precision, -precision, name="qpe_res", qs=qs)
    h(res)
    for i in range(precision):
        with control(res[i]):
            if iter_spec:
                U(psi, iter=2 ** i)
            else:
                for _ in range(2 ** i):
                    U(psi)
    qft(res, inv=True)
    return res
