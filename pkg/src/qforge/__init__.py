"""High-level quantum programming: typed variables, environments, uncomputation."""

from qforge.arithmetic import QFT, AdderKind, QuantumArithmeticError, adder_kind, qft
from qforge.circuit import QuantumCircuit
from qforge.dictionary import QuantumDictionary
from qforge.environments import (
    QuantumEnvironment,
    QuantumEnvironmentError,
    conjugate,
    control,
    custom_control,
    gate_wrap,
    invert,
)
from qforge.gates import (
    barrier,
    cp,
    cx,
    cz,
    h,
    mcx,
    mcz,
    p,
    rx,
    ry,
    rz,
    s,
    s_dg,
    swap,
    t,
    t_dg,
    x,
    y,
    z,
)
from qforge.session import QuantumSession, SessionError
from qforge.simulator import SimulatorCapError
from qforge.uncompute import UncomputeError, auto_uncompute, uncompute
from qforge.variables import (
    EncodingError,
    QuantumBool,
    QuantumFloat,
    QuantumModulus,
    QuantumVariable,
    multi_measurement,
)

__version__ = "0.1.0"

__all__ = [
    "QFT",
    "AdderKind",
    "EncodingError",
    "QuantumArithmeticError",
    "QuantumBool",
    "QuantumCircuit",
    "QuantumDictionary",
    "QuantumEnvironment",
    "QuantumEnvironmentError",
    "QuantumFloat",
    "QuantumModulus",
    "QuantumSession",
    "QuantumVariable",
    "SessionError",
    "SimulatorCapError",
    "UncomputeError",
    "adder_kind",
    "auto_uncompute",
    "barrier",
    "conjugate",
    "control",
    "cp",
    "custom_control",
    "cx",
    "cz",
    "gate_wrap",
    "h",
    "invert",
    "mcx",
    "mcz",
    "multi_measurement",
    "p",
    "qft",
    "rx",
    "ry",
    "rz",
    "s",
    "s_dg",
    "swap",
    "t",
    "t_dg",
    "uncompute",
    "x",
    "y",
    "z",
]
