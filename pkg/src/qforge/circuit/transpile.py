"""Rewrite a circuit into the {CX, single-qubit} basis."""

from __future__ import annotations

import numpy as np

from qforge.circuit.operations import _FIXED, OperationError
from qforge.circuit.quantum_circuit import QuantumCircuit


def transpile(qc):
    out = QuantumCircuit(qc.num_qubits, qc.num_clbits, labels=list(qc.labels))
    for ins in qc.data:
        _lower(out, ins.op, ins.qubits, ins.clbits)
    return out


def _lower(out, op, qubits, clbits):
    from qforge.circuit.mcx import mcx_template

    if op.definition is not None:
        for ins in op.definition.data:
            _lower(out, ins.op, tuple(qubits[q] for q in ins.qubits), ins.clbits)
        return
    if op.num_qubits == 1 or op.is_barrier or op.is_measurement or op.name == "cx":
        out.append(op, qubits, clbits)
        return
    if op.name == "swap":
        a, b = qubits
        out.cx(a, b)
        out.cx(b, a)
        out.cx(a, b)
        return
    if op.name == "cp":
        c, t = qubits
        theta = op.params[0]
        out.p(theta / 2, c)
        out.cx(c, t)
        out.p(-theta / 2, t)
        out.cx(c, t)
        out.p(theta / 2, t)
        return
    if op.base is not None:
        k = op.num_ctrls
        t = qubits[-1]
        if np.allclose(op.base, _FIXED["x"]):
            out.compose(mcx_template(k, 0, 0, op.phase_tolerant and k == 2), list(qubits))
            return
        if np.allclose(op.base, _FIXED["z"]):
            out.h(t)
            out.compose(mcx_template(k, 0, 0), list(qubits))
            out.h(t)
            return
        from qforge.circuit.mcx import control_gate
        from qforge.circuit.operations import Operation
        single = Operation("u", 1, base=op.base)
        _lower(out, control_gate(single, k), qubits, clbits)
        return
    raise OperationError(f"cannot transpile {op.name}")
