"""Grover search: phase tagging, the diffuser and the iteration driver."""

from __future__ import annotations

import math

from qforge.gates import h, mcz, qubits_of, x


def tag_state(mapping):
    """Multiply the joint basis state ``{var: label, ...}`` by -1.

    Implemented as one MCZ over all listed qubits, with X conjugation on the
    qubits whose bit in the encoded label is 0.
    """
    qubits, bits = [], []
    for var, label in mapping.items():
        idx = var.encoder(label)
        qubits.extend(var.qubits)
        bits.extend((idx >> j) & 1 for j in range(var.size))
    if not qubits:
        return
    mcz(qubits, ctrl_state="".join(str(b) for b in bits))


def diffuser(variables):
    """Reflection about the uniform superposition of ``variables`` (up to global phase)."""
    qs = qubits_of(variables)
    h(qs)
    x(qs)
    mcz(qs)
    x(qs)
    h(qs)


def grover_iterations(n_qubits, num_solutions):
    """floor(pi/4 * sqrt(2^n / M)), at least 1."""
    if num_solutions < 1:
        return 1
    return max(1, math.floor(math.pi / 4 * math.sqrt(2 ** n_qubits / num_solutions)))


def success_probability(n_qubits, num_solutions, iterations):
    """Closed-form probability of measuring a solution after ``iterations`` rounds."""
    theta = math.asin(math.sqrt(num_solutions / 2 ** n_qubits))
    return math.sin((2 * iterations + 1) * theta) ** 2


def grovers_alg(variables, oracle, num_solutions=1, kwargs=None, iterations=None):
    """Run Grover's algorithm in place on ``variables``.

    Parameters
    ----------
    variables : QuantumVariable or list of QuantumVariable
        Search register(s); brought into uniform superposition first.
    oracle : callable
        Called as ``oracle(variables, **kwargs)``; must phase-flip solutions.
    num_solutions : int
        Expected number of solutions M, used for the iteration count.
    iterations : int, optional
        Overrides the iteration count.
    """
    kwargs = kwargs or {}
    n = len(qubits_of(variables))
    if iterations is None:
        iterations = grover_iterations(n, num_solutions)
    h(variables)
    for _ in range(iterations):
        oracle(variables, **kwargs)
        diffuser(variables)


__all__ = ["diffuser", "grover_iterations", "grovers_alg", "success_probability", "tag_state"]
