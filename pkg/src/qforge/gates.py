"""Gate application on quantum variables and qubits.

Single-qubit gates broadcast over every qubit of their argument; two-qubit
gates pair their arguments qubit by qubit.
"""

from __future__ import annotations

from qforge.circuit.operations import barrier_op, gate, make_parametrized, open_mcx_op, open_mcz_op
from qforge.session import LQubit, Rec, SessionError


def qubits_of(obj):
    if isinstance(obj, LQubit):
        return [obj]
    qs = getattr(obj, "qubits", None)
    if qs is not None and not callable(qs):
        return list(qs)
    if isinstance(obj, (list, tuple)):
        out = []
        for item in obj:
            out.extend(qubits_of(item))
        return out
    raise TypeError(f"expected a qubit, quantum variable or list, got {type(obj).__name__}")


def apply(op, qubits):
    """Emit ``op`` on the given logical qubits through the environment stack."""
    from qforge.environments import emit

    qubits = tuple(qubits)
    if len(qubits) != op.num_qubits:
        raise SessionError(f"{op.name} expects {op.num_qubits} qubits, got {len(qubits)}")
    if len(set(qubits)) != len(qubits):
        raise SessionError(f"duplicate qubit in {op.name}")
    for q in qubits:
        if not q.live:
            raise SessionError(f"gate {op.name} on deallocated qubit {q.label}")
    emit(Rec("gate", op, qubits))


def _single(name):
    def fn(target):
        op = gate(name)
        for q in qubits_of(target):
            apply(op, (q,))
    fn.__name__ = name
    fn.__doc__ = f"Apply {name.upper()} to every qubit of ``target``."
    return fn


x = _single("x")
y = _single("y")
z = _single("z")
h = _single("h")
s = _single("s")
s_dg = _single("sdg")
t = _single("t")
t_dg = _single("tdg")


def _rotation(name):
    def fn(theta, target):
        op = make_parametrized(name, theta)
        for q in qubits_of(target):
            apply(op, (q,))
    fn.__name__ = name
    return fn


rx = _rotation("rx")
ry = _rotation("ry")
rz = _rotation("rz")
p = _rotation("p")


def _pairs(a, b):
    qa, qb = qubits_of(a), qubits_of(b)
    if len(qa) == 1 and len(qb) > 1:
        qa = qa * len(qb)
    if len(qa) != len(qb):
        raise SessionError("two-qubit gate arguments differ in size")
    return zip(qa, qb)


def cx(ctrl, target):
    for a, b in _pairs(ctrl, target):
        apply(gate("cx"), (a, b))


def cz(a, b):
    for u, v in _pairs(a, b):
        apply(gate("cz"), (u, v))


def cp(theta, a, b):
    op = make_parametrized("cp", theta)
    for u, v in _pairs(a, b):
        apply(op, (u, v))


def swap(a, b):
    for u, v in _pairs(a, b):
        apply(gate("swap"), (u, v))


def _state_bits(ctrl_state, n):
    if ctrl_state is None:
        return (1,) * n
    if isinstance(ctrl_state, str):
        if len(ctrl_state) != n or set(ctrl_state) - {"0", "1"}:
            raise SessionError(f"control state {ctrl_state!r} does not match {n} qubits")
        return tuple(int(c) for c in ctrl_state)
    return tuple((int(ctrl_state) >> j) & 1 for j in range(n))


def mcx(ctrls, target, ctrl_state=None):
    """X on ``target`` controlled on all ``ctrls`` (``ctrl_state`` bit string, qubit 0 first)."""
    cs = qubits_of(ctrls)
    tq = qubits_of(target)
    if len(tq) != 1:
        raise SessionError("mcx expects exactly one target qubit")
    apply(open_mcx_op(_state_bits(ctrl_state, len(cs))), cs + tq)


def mcz(qubits, ctrl_state=None):
    """Phase -1 on the all-ones state of ``qubits`` (or on ``ctrl_state``)."""
    qs = qubits_of(qubits)
    apply(open_mcz_op(_state_bits(ctrl_state, len(qs))), qs)


def barrier(qubits):
    qs = qubits_of(qubits)
    apply(barrier_op(len(qs)), qs)


def append_operation(op, qubits):
    """Apply an arbitrary gate kind (e.g. a composite gate) to ``qubits``."""
    apply(op, qubits_of(qubits))
