from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from qforge.circuit.operations import (
    Operation,
    OperationError,
    barrier_op,
    gate,
    mcx_op,
    mcz_op,
    measure_op,
)

UNITARY_CAP = 12


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Qubit:
    id: int
    label: str = ""


@dataclass(frozen=True)
class Instruction:
    op: Operation
    qubits: tuple
    clbits: tuple = ()

    def __repr__(self):
        args = ",".join(str(q) for q in self.qubits)
        if self.clbits:
            args += "->" + ",".join(str(c) for c in self.clbits)
        return f"{self.op!r}({args})"


@dataclass
class QuantumCircuit:
    """Gate list over integer-indexed qubits.

    The methods named after gates (``h``, ``cx``, ...) follow the usual circuit
    builder style; qubits are plain integers.
    """

    num_qubits: int = 0
    num_clbits: int = 0
    data: list = field(default_factory=list)
    labels: list = None

    def __post_init__(self):
        if self.labels is None:
            self.labels = [f"q.{i}" for i in range(self.num_qubits)]

    @property
    def qubits(self):
        return [Qubit(i, self.labels[i]) for i in range(self.num_qubits)]

    def copy(self):
        return QuantumCircuit(self.num_qubits, self.num_clbits, list(self.data), list(self.labels))

    def add_qubit(self, label=None):
        self.labels.append(label or f"q.{self.num_qubits}")
        self.num_qubits += 1
        return self.num_qubits - 1

    def append(self, op, qubits, clbits=()):
        if isinstance(qubits, int):
            qubits = (qubits,)
        qubits = tuple(int(q) for q in qubits)
        clbits = tuple(int(c) for c in clbits)
        if len(qubits) != op.num_qubits:
            raise CircuitError(f"{op.name} expects {op.num_qubits} qubits, got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"duplicate qubit in {op.name}{qubits}")
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise CircuitError(f"unknown qubit {q}")
        if op.is_measurement:
            if len(clbits) != 1:
                raise CircuitError("measure needs exactly one classical bit")
            if not 0 <= clbits[0] < self.num_clbits:
                raise CircuitError(f"unknown clbit {clbits[0]}")
        self.data.append(Instruction(op, qubits, clbits))

    # gate shorthands

    def x(self, q): self.append(gate("x"), [q])
    def y(self, q): self.append(gate("y"), [q])
    def z(self, q): self.append(gate("z"), [q])
    def h(self, q): self.append(gate("h"), [q])
    def s(self, q): self.append(gate("s"), [q])
    def sdg(self, q): self.append(gate("sdg"), [q])
    def t(self, q): self.append(gate("t"), [q])
    def tdg(self, q): self.append(gate("tdg"), [q])
    def rx(self, theta, q): self.append(gate("rx", theta), [q])
    def ry(self, theta, q): self.append(gate("ry", theta), [q])
    def rz(self, theta, q): self.append(gate("rz", theta), [q])
    def p(self, theta, q): self.append(gate("p", theta), [q])
    def cx(self, c, t): self.append(gate("cx"), [c, t])
    def cz(self, c, t): self.append(gate("cz"), [c, t])
    def cp(self, theta, c, t): self.append(gate("cp", theta), [c, t])
    def swap(self, a, b): self.append(gate("swap"), [a, b])

    def mcx(self, ctrls, target):
        ctrls = list(ctrls)
        self.append(mcx_op(len(ctrls)), ctrls + [target])

    def mcz(self, ctrls, target):
        ctrls = list(ctrls)
        self.append(mcz_op(len(ctrls)), ctrls + [target])

    def measure(self, q, c):
        self.append(measure_op(), [q], [c])

    def barrier(self, qubits=None):
        if qubits is None:
            qubits = range(self.num_qubits)
        qubits = list(qubits)
        self.append(barrier_op(len(qubits)), qubits)

    def compose(self, other, qubits=None):
        """Append ``other`` with its qubit ``i`` mapped to ``qubits[i]``."""
        if qubits is None:
            qubits = list(range(other.num_qubits))
        for ins in other.data:
            self.append(ins.op, [qubits[q] for q in ins.qubits], ins.clbits)

    def inverse(self):
        inv = QuantumCircuit(self.num_qubits, self.num_clbits, labels=list(self.labels))
        for ins in reversed(self.data):
            try:
                op = ins.op.inverse()
            except OperationError as exc:
                raise CircuitError(f"cannot invert circuit: {exc}") from None
            inv.data.append(Instruction(op, ins.qubits, ins.clbits))
        return inv

    def to_gate(self, name, **kwargs):
        from qforge.circuit.operations import defined
        return defined(name, self, **kwargs)

    def flatten(self, keep_perm=False):
        """Yield (op, qubits, clbits) for primitive ops, expanding definitions.

        With ``keep_perm`` composite gates carrying a classical action are
        yielded whole.
        """
        for ins in self.data:
            op = ins.op
            if op.definition is None or (keep_perm and op.perm is not None):
                yield op, ins.qubits, ins.clbits
            else:
                for sub, qs, cs in op.definition.flatten(keep_perm):
                    yield sub, tuple(ins.qubits[q] for q in qs), cs

    def unitary(self, cap=None):
        cap = UNITARY_CAP if cap is None else cap
        n = self.num_qubits
        if n > cap:
            raise CircuitError(f"unitary of {n} qubits exceeds cap {cap}")
        dim = 2 ** n
        tensor = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
        for op, qs, _ in self.flatten():
            if op.is_barrier:
                continue
            if op.is_measurement:
                raise CircuitError("circuit contains measurements; no unitary")
            tensor = apply_matrix(tensor, op.matrix(), qs, n)
        return tensor.reshape(dim, dim)

    def compare_unitary(self, other, precision=10):
        if self.num_qubits != other.num_qubits:
            raise CircuitError("qubit counts differ")
        return unitaries_equal(self.unitary(), other.unitary(), precision)

    def count_ops(self):
        counts = {}
        for ins in self.data:
            counts[ins.op.name] = counts.get(ins.op.name, 0) + 1
        return counts

    def depth(self):
        levels = [0] * self.num_qubits
        for ins in self.data:
            if ins.op.is_barrier:
                continue
            level = max(levels[q] for q in ins.qubits) + 1
            for q in ins.qubits:
                levels[q] = level
        return max(levels, default=0)

    def cnot_count(self):
        from qforge.circuit.transpile import transpile
        return transpile(self).count_ops().get("cx", 0)

    def stats(self, transpiled=False):
        qc = self
        if transpiled:
            from qforge.circuit.transpile import transpile
            qc = transpile(self)
        return {"depth": qc.depth(), "counts": dict(sorted(qc.count_ops().items())),
                "num_qubits": qc.num_qubits}

    def to_qasm(self):
        from qforge.circuit.qasm import to_qasm
        return to_qasm(self)

    def __len__(self):
        return len(self.data)


def apply_matrix(tensor, mat, qubits, n):
    """Apply ``mat`` to the qubit axes of ``tensor`` (shape (2,)*n + batch)."""
    a = len(qubits)
    m = mat.reshape((2,) * (2 * a))
    axes = [n - 1 - q for q in reversed(qubits)]
    out = np.tensordot(m, tensor, axes=(list(range(a, 2 * a)), axes))
    return np.moveaxis(out, list(range(a)), axes)


def unitaries_equal(u1, u2, precision=10):
    if u1.shape != u2.shape:
        raise CircuitError("dimension mismatch")
    flat = np.argmax(np.abs(u1))
    a, b = u1.flat[flat], u2.flat[flat]
    if abs(b) < 1e-12:
        return False
    phase = (a / b) / abs(a / b)
    return bool(np.max(np.abs(u1 - phase * u2)) < 10.0 ** (-precision))


def unitary_cap_from_env():
    return int(os.environ.get("QFORGE_UNITARY_CAP", UNITARY_CAP))


def gather_bits(idx, qubits):
    """Sub-register value of ``qubits`` (bit j = qubits[j]) for each index."""
    out = np.zeros(len(idx), dtype=np.int64)
    for j, q in enumerate(qubits):
        out |= ((idx >> q) & 1) << j
    return out


def scatter_bits(idx, qubits, values):
    """Overwrite ``qubits`` of each index with the bits of ``values``."""
    clear = 0
    for q in qubits:
        clear |= 1 << q
    out = idx & ~np.int64(clear)
    for j, q in enumerate(qubits):
        out |= ((values >> j) & 1) << q
    return out


def classical_action(circuit):
    """(forward, inverse) index maps if ``circuit`` is a phase-free permutation.

    Only built from X-type gates (X, CX, exact MCX), SWAP and composite gates
    that carry or admit a classical action; returns None otherwise.
    """
    steps = []
    for ins in circuit.data:
        op = ins.op
        if op.is_barrier:
            continue
        if op.perm is not None:
            steps.append(("perm", op.perm, ins.qubits))
        elif op.name == "swap":
            steps.append(("swap", None, ins.qubits))
        elif (op.base is not None and op.definition is None and not op.phase_tolerant
              and np.array_equal(op.base, _X_BASE)):
            steps.append(("mcx", None, ins.qubits))
        elif op.definition is not None and not op.phase_tolerant:
            sub = classical_action(op.definition)
            if sub is None:
                return None
            steps.append(("perm", sub, ins.qubits))
        else:
            return None

    def run(idx, forward):
        idx = np.asarray(idx, dtype=np.int64).copy()
        seq = steps if forward else reversed(steps)
        for kind, perm, qs in seq:
            if kind == "mcx":
                cmask = 0
                for c in qs[:-1]:
                    cmask |= 1 << c
                on = (idx & cmask) == cmask
                idx = np.where(on, idx ^ (np.int64(1) << qs[-1]), idx)
            elif kind == "swap":
                a, b = qs
                diff = ((idx >> a) & 1) != ((idx >> b) & 1)
                idx = np.where(diff, idx ^ ((np.int64(1) << a) | (np.int64(1) << b)), idx)
            else:
                fn = perm[0] if forward else perm[1]
                idx = scatter_bits(idx, qs, np.asarray(fn(gather_bits(idx, qs)), dtype=np.int64))
        return idx

    return (lambda idx: run(idx, True)), (lambda idx: run(idx, False))


_X_BASE = np.array([[0, 1], [1, 0]], dtype=complex)
