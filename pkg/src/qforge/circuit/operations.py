"""Gate kinds of the circuit IR.

Every gate is an :class:`Operation`. Primitive single-target gates are described
by a 2x2 base matrix plus a number of leading control qubits, which is all the
simulator needs. Composite gates carry a definition circuit.

Qubit ordering convention: within an operation, qubit ``j`` of the argument list
corresponds to bit ``j`` (least significant first) of the matrix index.
"""

from __future__ import annotations

import cmath
import functools
import math

import numpy as np


class OperationError(ValueError):
    pass


_SQ2 = 1 / math.sqrt(2)

_FIXED = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, cmath.exp(-1j * math.pi / 4)]], dtype=complex),
}

_ADJOINT_NAMES = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}


def _rotation(name, theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if name == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if name == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "rz":
        return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]])
    if name == "p":
        return np.array([[1, 0], [0, cmath.exp(1j * theta)]], dtype=complex)
    raise OperationError(f"unknown rotation {name}")


def controlled_matrix(base, num_ctrls):
    """Matrix of ``base`` (2x2) controlled on the ``num_ctrls`` lowest bits."""
    dim = 2 ** (num_ctrls + 1)
    mat = np.eye(dim, dtype=complex)
    mask = (1 << num_ctrls) - 1
    tbit = 1 << num_ctrls
    lo = mask
    hi = mask | tbit
    mat[lo, lo] = base[0, 0]
    mat[lo, hi] = base[0, 1]
    mat[hi, lo] = base[1, 0]
    mat[hi, hi] = base[1, 1]
    return mat


class Operation:
    """A gate kind.

    Attributes
    ----------
    name : str
        Gate name; also the key used in gate counts.
    num_qubits : int
        Arity.
    params : tuple of float
        Angles in radians.
    num_ctrls : int
        For primitive controlled gates, the number of leading control qubits.
    base : ndarray or None
        2x2 matrix applied to the qubit following the controls.
    definition : QuantumCircuit or None
        Sub-circuit for composite gates.
    """

    def __init__(self, name, num_qubits, params=(), base=None, num_ctrls=0,
                 definition=None, permeability=None, qfree=None,
                 phase_tolerant=False, mcx_ctrls=None, dagger=False, perm=None):
        self.name = name
        self.num_qubits = num_qubits
        self.params = tuple(float(p) for p in params)
        for p in self.params:
            if not math.isfinite(p):
                raise OperationError(f"non-finite angle for {name}")
        self.base = base
        self.num_ctrls = num_ctrls
        self.definition = definition
        if definition is not None and definition.num_qubits != num_qubits:
            raise OperationError(
                f"definition of {name} has {definition.num_qubits} qubits, gate has {num_qubits}")
        self._permeability = permeability
        self._qfree = qfree
        # set on phase-tolerant multi-controlled X gates
        self.phase_tolerant = phase_tolerant
        self.mcx_ctrls = mcx_ctrls
        self.dagger = dagger
        # optional exact classical action (forward, inverse) on local basis
        # indices, used by the simulator in place of the definition
        self.perm = perm
        self._matrix = None

    # control pattern of an open-controlled MCX (bit per control, 1 = closed)
    ctrl_state = None

    def __repr__(self):
        if self.params:
            args = ", ".join(f"{p:.6g}" for p in self.params)
            return f"{self.name}({args})"
        return self.name

    @property
    def is_primitive(self):
        return self.definition is None

    @property
    def is_measurement(self):
        return self.name == "measure"

    @property
    def is_barrier(self):
        return self.name == "barrier"

    def matrix(self):
        if self._matrix is not None:
            return self._matrix
        if self.name in ("measure", "barrier"):
            raise OperationError(f"{self.name} has no unitary")
        if self.name == "swap":
            mat = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
        elif self.base is not None:
            mat = controlled_matrix(self.base, self.num_ctrls)
        else:
            mat = self.definition.unitary()
        self._matrix = mat
        return mat

    def inverse(self):
        if self.name == "measure":
            raise OperationError("measurement is not invertible")
        if self.name == "barrier":
            return self
        if self.phase_tolerant:
            from qforge.circuit.mcx import pt_mcx_op
            return pt_mcx_op(self.mcx_ctrls, not self.dagger)
        if self.ctrl_state is not None:
            return self
        if self.definition is not None:
            if self.name.endswith("_dg"):
                name = self.name[:-3]
            else:
                name = self.name + "_dg"
            return Operation(name, self.num_qubits, definition=self.definition.inverse(),
                             permeability=self._permeability, qfree=self._qfree,
                             phase_tolerant=self.phase_tolerant, mcx_ctrls=self.mcx_ctrls,
                             dagger=not self.dagger,
                             perm=None if self.perm is None else (self.perm[1], self.perm[0]))
        if self.name in _ADJOINT_NAMES:
            return STANDARD[_ADJOINT_NAMES[self.name]]
        if self.params:
            return make_parametrized(self.name, -self.params[0])
        return self

    # classification used by uncomputation

    @property
    def qfree(self):
        """True if the unitary maps basis states to basis states (up to phase)."""
        if self._qfree is None:
            if self.name == "measure":
                self._qfree = False
            elif self.name == "barrier":
                self._qfree = True
            elif self.definition is not None:
                flag = all(ins.op.qfree for ins in self.definition.data)
                if not flag and self.num_qubits <= _MATRIX_CHECK_LIMIT:
                    flag = is_generalized_permutation(self.matrix())
                self._qfree = flag
            else:
                self._qfree = is_generalized_permutation(self.matrix())
        return self._qfree

    @property
    def permeability(self):
        """Map qubit position -> True if that qubit is only used diagonally."""
        if self._permeability is None:
            if self.name == "barrier":
                self._permeability = {i: True for i in range(self.num_qubits)}
            elif self.name == "swap":
                self._permeability = {0: False, 1: False}
            elif self.base is not None:
                perm = {i: True for i in range(self.num_ctrls)}
                diag = abs(self.base[0, 1]) < 1e-12 and abs(self.base[1, 0]) < 1e-12
                perm[self.num_ctrls] = diag
                self._permeability = perm
            else:
                perm = {i: True for i in range(self.num_qubits)}
                for ins in self.definition.data:
                    sub = ins.op.permeability
                    for j, q in enumerate(ins.qubits):
                        if not sub[j]:
                            perm[q] = False
                if not all(perm.values()) and self.num_qubits <= _MATRIX_CHECK_LIMIT:
                    perm = permeability_from_matrix(self.matrix())
                self._permeability = perm
        return self._permeability


_MATRIX_CHECK_LIMIT = 8


def is_generalized_permutation(mat, atol=1e-9):
    nz = np.abs(mat) > atol
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def permeability_from_matrix(mat, atol=1e-9):
    """A qubit is permeable iff the unitary is block diagonal in its basis."""
    n = int(round(math.log2(mat.shape[0])))
    idx = np.arange(mat.shape[0])
    result = {}
    for q in range(n):
        bit = (idx >> q) & 1
        off = bit[:, None] != bit[None, :]
        result[q] = bool(np.all(np.abs(mat[off]) < atol))
    return result


def make_parametrized(name, theta):
    if name in ("rx", "ry", "rz", "p"):
        return Operation(name, 1, (theta,), base=_rotation(name, theta))
    if name == "cp":
        return Operation("cp", 2, (theta,), base=_rotation("p", theta), num_ctrls=1)
    raise OperationError(f"unknown parametrized gate {name}")


def mcx_op(num_ctrls):
    if num_ctrls < 1:
        raise OperationError("MCX needs at least one control")
    name = "cx" if num_ctrls == 1 else "mcx"
    return Operation(name, num_ctrls + 1, base=_FIXED["x"], num_ctrls=num_ctrls,
                     mcx_ctrls=num_ctrls)


@functools.lru_cache(maxsize=None)
def open_mcx_op(state):
    """MCX firing when its controls read ``state`` (tuple of bits, control 0 first).

    Kept as one gate so that the X conjugation of open controls is inverted,
    controlled and uncomputed together with the MCX.
    """
    from qforge.circuit.quantum_circuit import QuantumCircuit, classical_action

    state = tuple(int(b) for b in state)
    k = len(state)
    if all(state):
        return mcx_op(k)
    qc = QuantumCircuit(k + 1)
    flips = [j for j, b in enumerate(state) if not b]
    for j in flips:
        qc.x(j)
    qc.mcx(range(k), k)
    for j in flips:
        qc.x(j)
    op = Operation("omcx", k + 1, definition=qc,
                   permeability={**{j: True for j in range(k)}, k: False}, qfree=True,
                   perm=classical_action(qc))
    op.ctrl_state = state
    return op


def mcz_op(num_ctrls):
    if num_ctrls < 1:
        raise OperationError("MCZ needs at least one control")
    name = "cz" if num_ctrls == 1 else "mcz"
    return Operation(name, num_ctrls + 1, base=_FIXED["z"], num_ctrls=num_ctrls)


@functools.lru_cache(maxsize=None)
def open_mcz_op(state):
    """Phase -1 on the basis state ``state`` of its qubits (last qubit nominal target)."""
    from qforge.circuit.quantum_circuit import QuantumCircuit

    state = tuple(int(b) for b in state)
    n = len(state)
    if all(state):
        return mcz_op(n - 1) if n > 1 else STANDARD["z"]
    qc = QuantumCircuit(n)
    flips = [j for j, b in enumerate(state) if not b]
    for j in flips:
        qc.x(j)
    if n == 1:
        qc.z(0)
    else:
        qc.mcz(range(n - 1), n - 1)
    for j in flips:
        qc.x(j)
    op = Operation("omcz", n, definition=qc,
                   permeability={j: True for j in range(n)}, qfree=True)
    op.ctrl_state = state
    return op


def measure_op():
    return Operation("measure", 1)


def barrier_op(n):
    return Operation("barrier", n)


STANDARD = {name: Operation(name, 1, base=mat) for name, mat in _FIXED.items()}
STANDARD["cx"] = mcx_op(1)
STANDARD["cz"] = mcz_op(1)
STANDARD["swap"] = Operation("swap", 2)


def gate(name, *params):
    """Look up a gate kind by name, e.g. ``gate("rz", 0.3)`` or ``gate("h")``."""
    if params:
        return make_parametrized(name, params[0])
    if name in STANDARD:
        return STANDARD[name]
    raise OperationError(f"unknown gate {name}")


def defined(name, definition, permeability=None, qfree=None, perm=None):
    """Composite gate from a circuit.

    ``perm`` optionally gives the exact basis-state action as a pair of
    vectorized functions (forward, inverse) on local indices (bit j is the
    gate's qubit j); it must agree with ``definition`` on every input.
    """
    return Operation(name, definition.num_qubits, definition=definition,
                     permeability=permeability, qfree=qfree, perm=perm)


def controlled_perm(perm, k):
    """Lift a classical action to ``k`` leading control bits."""
    fwd, inv = perm
    mask = (1 << k) - 1

    def lift(fn):
        def apply(idx):
            on = (idx & mask) == mask
            out = idx.copy()
            if on.any():
                out[on] = (fn(idx[on] >> k) << k) | mask
            return out
        return apply

    return lift(fwd), lift(inv)
