from qforge.circuit.operations import Operation, OperationError, gate, defined, mcx_op, mcz_op
from qforge.circuit.quantum_circuit import CircuitError, Instruction, QuantumCircuit, Qubit
from qforge.circuit.mcx import (
    control_gate,
    mcx_decompose,
    mcx_phase_tolerant,
    pt_mcx_op,
)

__all__ = [
    "CircuitError",
    "Instruction",
    "Operation",
    "OperationError",
    "QuantumCircuit",
    "Qubit",
    "control_gate",
    "defined",
    "gate",
    "mcx_decompose",
    "mcx_op",
    "mcx_phase_tolerant",
    "mcz_op",
    "pt_mcx_op",
]
