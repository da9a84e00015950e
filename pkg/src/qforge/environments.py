"""Quantum environments: scoped compilation modes entered with ``with``.

All environments share one stack. Every record (gate, allocation,
deallocation) produced by user code travels from the innermost frame outwards;
each frame may rewrite it, buffer it, or pass it on, and whatever leaves the
outermost frame is appended to the owning session's log.

Control frames fold outer controls into a single accumulator qubit, so the
body of an environment is only ever controlled on one qubit regardless of the
nesting depth. Records carry a ``covered`` set naming the control frames that
have already been applied (or must be bypassed), which is what lets an
accumulator's own computation be controlled by the outer frames while body
gates are not controlled twice.
"""

from __future__ import annotations

import functools
import itertools
import sys

from qforge.circuit.mcx import control_gate, pt_mcx_op
from qforge.circuit.operations import OperationError, defined, gate
from qforge.circuit.quantum_circuit import QuantumCircuit
from qforge.session import Rec, SessionError

_STACK = []
_frame_ids = itertools.count()
_X = gate("x")


class QuantumEnvironmentError(SessionError):
    pass


def stack_depth():
    return len(_STACK)


def current_stack():
    return list(_STACK)


def _sink(rec):
    if rec.kind == "gate":
        sessions = []
        for q in rec.qubits:
            s = q.session
            if not any(s is t for t in sessions):
                sessions.append(s)
        target = sessions[0]
        for other in sessions[1:]:
            target = target.merge(other)
        target.record(rec)
    else:
        rec.qubits[0].session.record(rec)


def emit(rec, level=None):
    """Pass ``rec`` through frames ``level-1 .. 0`` and record what comes out."""
    level = len(_STACK) if level is None else level
    recs = [rec]
    for i in range(level - 1, -1, -1):
        frame = _STACK[i]
        out = []
        for r in recs:
            out.extend(frame.process(r, i))
        recs = out
        if not recs:
            return
    for r in recs:
        _sink(r)


def emit_all(recs, level=None):
    for r in recs:
        emit(r, level)


def record_list_for(qubit):
    """Innermost list that holds the records of ``qubit``'s allocation.

    Returns (list, frame) where frame is the buffering frame or None for the
    session log.
    """
    for frame in reversed(_STACK):
        buf = getattr(frame, "buffer", None)
        if buf is not None and frame.collects:
            return buf, frame
    return qubit.session.log, None


class Frame:
    """Base environment: its body is executed without modification."""

    collects = False

    def __init__(self):
        self.id = next(_frame_ids)
        self.level = None

    def process(self, rec, level):
        return [rec]

    def __enter__(self):
        self.level = len(_STACK)
        _STACK.append(self)
        self.on_enter()
        return self.enter_value()

    def enter_value(self):
        return None

    def on_enter(self):
        pass

    def __exit__(self, exc_type, exc, tb):
        top = _STACK.pop()
        if top is not self:
            raise QuantumEnvironmentError("quantum environments exited out of order")
        if exc_type is None:
            self.on_exit()
        return False

    def on_exit(self):
        pass


class QuantumEnvironment(Frame):
    """Neutral environment."""


# control


def effective_controls(level=None):
    """Control frames below ``level`` whose control still has to be applied.

    Suppressed frames (handed to a custom-controlled callee) are skipped along
    with every frame folded into their accumulator.
    """
    level = len(_STACK) if level is None else level
    skip = set()
    result = []
    for i in range(level - 1, -1, -1):
        f = _STACK[i]
        if not getattr(f, "is_control", False):
            continue
        if f.suppressed:
            skip.add(f.id)
            skip.update(f.folded)
            continue
        if f.id in skip:
            continue
        result.append(f)
    return result


class ControlFrame(Frame):
    """Controls every body gate on ``ctrls`` (with optional control state)."""

    def __init__(self, ctrls, ctrl_state=None):
        super().__init__()
        self.ctrls = list(ctrls)
        if not self.ctrls:
            raise QuantumEnvironmentError("control environment needs at least one control qubit")
        if ctrl_state is None:
            ctrl_state = [1] * len(self.ctrls)
        elif isinstance(ctrl_state, str):
            ctrl_state = [int(c) for c in ctrl_state]
        elif isinstance(ctrl_state, int):
            ctrl_state = [(ctrl_state >> j) & 1 for j in range(len(self.ctrls))]
        if len(ctrl_state) != len(self.ctrls):
            raise QuantumEnvironmentError("control state length does not match the control qubits")
        self.ctrl_state = list(ctrl_state)
        self.acc = None
        self.acc_owned = False
        self.compute = []
        self.folded = frozenset()
        self.suppressed = 0
        self.is_control = True

    def effective_outer(self, level):
        return effective_controls(level)

    def needs_accumulator(self, level):
        return (len(self.ctrls) > 1 or 0 in self.ctrl_state
                or bool(self.effective_outer(level)))

    def ensure_control(self, level):
        """Return (control qubit, records to emit before first use)."""
        if self.acc is not None:
            return self.acc, []
        if not self.needs_accumulator(level):
            self.acc = self.ctrls[0]
            return self.acc, []
        outer = self.effective_outer(level)
        self.folded = frozenset(f.id for f in outer)
        session = self.ctrls[0].session
        acc = session.alloc_silent(1, "ctrl_acc")[0]
        self.acc, self.acc_owned = acc, True
        recs = [Rec("alloc", qubits=(acc,)),
                Rec("gate", _accumulator_gate(tuple(self.ctrl_state)), tuple(self.ctrls) + (acc,))]
        self.compute = recs[1:]
        return acc, recs

    def process(self, rec, level):
        if rec.kind != "gate" or rec.op.is_barrier:
            return [rec]
        if self.id in rec.covered:
            return [rec]
        if self.suppressed:
            rec.covered = rec.covered | {self.id} | self.folded
            return [rec]
        if rec.op.is_measurement:
            raise QuantumEnvironmentError("cannot measure inside a control environment")
        ctrl, pre = self.ensure_control(level)
        if ctrl in rec.qubits:
            raise QuantumEnvironmentError(f"gate {rec.op.name} acts on its own control qubit {ctrl.label}")
        try:
            op = control_gate(rec.op, 1)
        except OperationError as exc:
            raise QuantumEnvironmentError(str(exc)) from None
        out = Rec("gate", op, (ctrl,) + tuple(rec.qubits),
                  covered=rec.covered | {self.id} | self.folded)
        return pre + [out]

    def control_qubit(self):
        """Control qubit for custom-controlled callees (accumulator if needed)."""
        ctrl, pre = self.ensure_control(self.level)
        emit_all(pre, self.level)
        return ctrl

    def on_exit(self):
        if not self.acc_owned:
            return
        recs = []
        for r in reversed(self.compute):
            recs.append(Rec("gate", r.op.inverse(), r.qubits, covered=r.covered))
        emit_all(recs)
        self.acc.live = False
        emit(Rec("dealloc", qubits=(self.acc,)))


@functools.lru_cache(maxsize=None)
def _accumulator_gate(state):
    """Phase-tolerant AND of the controls (open where ``state`` is 0) into a fresh qubit."""
    k = len(state)
    if all(state):
        return pt_mcx_op(k)
    qc = QuantumCircuit(k + 1)
    flips = [j for j, b in enumerate(state) if not b]
    for j in flips:
        qc.x(j)
    qc.append(pt_mcx_op(k), list(range(k + 1)))
    for j in flips:
        qc.x(j)
    return defined("ctrl_acc", qc, permeability={**{j: True for j in range(k)}, k: False},
                   qfree=True)


def control(ctrls, ctrl_state=None):
    """``with control(q):`` controls the body on qubit(s) ``q``."""
    return ControlFrame(_qubit_list(ctrls), ctrl_state)


class ConditionFrame(ControlFrame):
    """Body controlled on a QuantumBool; the bool itself serves as accumulator."""

    def __init__(self, qbool):
        super().__init__([qbool.qubits[0]])
        self.qbool = qbool

    def ensure_control(self, level):
        if self.acc is not None:
            return self.acc, []
        outer = self.effective_outer(level)
        ctx = getattr(self.qbool, "_env_context", frozenset())
        if frozenset(f.id for f in outer) == ctx:
            # computed under exactly the enclosing controls: already AND-ed in
            self.folded = ctx
            self.acc = self.qbool.qubits[0]
            return self.acc, []
        return super().ensure_control(level)

    def on_exit(self):
        super().on_exit()
        qb = self.qbool
        if getattr(qb, "_auto_condition", False) and not qb.is_deleted:
            if sys.getrefcount(qb) - _internal_refs(qb) <= 0:
                qb.uncompute()


def _with_statement_refs():
    """References the interpreter's with-statement holds on its context manager."""
    class Probe:
        def __enter__(self):
            return None

        def __exit__(self, *exc):
            Probe.count = sys.getrefcount(self) - 2  # getrefcount arg, ``self``
            return False

    with Probe():
        pass
    return Probe.count


_WITH_REFS = _with_statement_refs()


def _internal_refs(qb):
    """References to a condition bool held by the machinery during its exit.

    Counted: getrefcount's argument, the ``qb`` local of ``on_exit``, the
    frame's ``qbool`` attribute, ``self`` of ``QuantumBool.__exit__``, the
    with-statement, and the session's variable list and qubit back-links.
    Anything beyond that is a user reference, i.e. a possible later use.
    """
    session = qb.qubits[0].session
    owned = sum(1 for v in session.variables if v is qb)
    owned += sum(1 for q in qb.qubits if q.var is qb)
    return 4 + _WITH_REFS + owned


# buffering frames


class _BufferFrame(Frame):
    collects = True

    def on_enter(self):
        self.buffer = []

    def process(self, rec, level):
        self.buffer.append(rec)
        return []


class InversionFrame(_BufferFrame):
    """Body replaced by its inverse."""

    def on_exit(self):
        _check_balanced(self.buffer, "inverted")
        out = []
        for r in reversed(self.buffer):
            if r.kind == "alloc":
                out.append(Rec("dealloc", qubits=r.qubits))
            elif r.kind == "dealloc":
                out.append(Rec("alloc", qubits=r.qubits))
            else:
                try:
                    op = r.op.inverse()
                except OperationError as exc:
                    raise QuantumEnvironmentError(f"cannot invert environment: {exc}") from None
                out.append(Rec("gate", op, r.qubits, r.clbits, r.covered))
        emit_all(out)


def invert():
    return InversionFrame()


class GateWrapFrame(_BufferFrame):
    """Body collected into one composite gate named ``name``."""

    def __init__(self, name="wrapped", permeability=None, qfree=None):
        super().__init__()
        self.name = name
        self.permeability = permeability
        self.qfree = qfree
        self.op = None

    def on_exit(self):
        if not any(r.kind == "gate" for r in self.buffer):
            emit_all(self.buffer)
            return
        order, index = [], {}
        for r in self.buffer:
            for q in r.qubits:
                if q not in index:
                    index[q] = len(order)
                    order.append(q)
        allocated = [r.qubits[0] for r in self.buffer if r.kind == "alloc"]
        deallocated = [r.qubits[0] for r in self.buffer if r.kind == "dealloc"]
        alloc_set = set(allocated)
        for q in deallocated:
            if q in alloc_set and allocated.count(q) > 1:
                raise QuantumEnvironmentError("gate wrap cannot reuse a qubit inside its body")
        qc = QuantumCircuit(len(order), labels=[q.label for q in order])
        for r in self.buffer:
            if r.kind != "gate":
                continue
            if r.op.is_measurement:
                raise QuantumEnvironmentError("cannot wrap a measurement into a gate")
            qc.append(r.op, [index[q] for q in r.qubits])
        self.op = defined(self.name, qc, permeability=self.permeability, qfree=self.qfree)
        covered = frozenset.intersection(*[r.covered for r in self.buffer if r.kind == "gate"])
        recs = [Rec("alloc", qubits=(q,)) for q in allocated]
        recs.append(Rec("gate", self.op, tuple(order), covered=covered))
        recs.extend(Rec("dealloc", qubits=(q,)) for q in deallocated)
        emit_all(recs)


def gate_wrap(name="wrapped", permeability=None, qfree=None):
    return GateWrapFrame(name, permeability, qfree)


class _BypassFrame(Frame):
    """Records its input and marks it as bypassing every control frame below."""

    def __init__(self):
        super().__init__()
        self.recorded = []

    def process(self, rec, level):
        rec.covered = rec.covered | frozenset(f.id for f in _STACK[:level])
        self.recorded.append(rec)
        return [rec]


class ConjugationFrame(Frame):
    """Runs ``f(*args)``, then the body, then the inverse of ``f``.

    Gates of ``f`` and its inverse are never controlled by enclosing control
    environments; only the body is.
    """

    def __init__(self, f, args, kwargs):
        super().__init__()
        self.f, self.args, self.kwargs = f, args, kwargs
        self.result = None
        self.recorded = []

    def on_enter(self):
        bypass = _BypassFrame()
        with bypass:
            self.result = self.f(*self.args, **self.kwargs)
        _check_balanced(bypass.recorded, "conjugator", strict=True)
        self.recorded = bypass.recorded

    def enter_value(self):
        return self.result

    def on_exit(self):
        out = []
        for r in reversed(self.recorded):
            if r.kind == "alloc":
                out.append(Rec("dealloc", qubits=r.qubits))
            elif r.kind == "dealloc":
                out.append(Rec("alloc", qubits=r.qubits))
            else:
                out.append(Rec("gate", r.op.inverse(), r.qubits, r.clbits, r.covered))
        emit_all(out)


def conjugate(f):
    """``with conjugate(f)(*args) as res:`` runs f, the body, then f inverse."""

    def bind(*args, **kwargs):
        return ConjugationFrame(f, args, kwargs)

    return bind


def _check_balanced(recs, what, strict=False):
    state = {}
    for r in recs:
        if r.kind == "alloc":
            state[r.qubits[0]] = state.get(r.qubits[0], 0) + 1
        elif r.kind == "dealloc":
            state[r.qubits[0]] = state.get(r.qubits[0], 0) - 1
    bad = [q for q, v in state.items() if v != 0]
    if bad:
        if strict:
            raise QuantumEnvironmentError(
                f"{what} must deallocate what it allocates (qubit {bad[0].label})")
        raise QuantumEnvironmentError(
            f"{what} code allocates or deallocates qubit {bad[0].label} without its counterpart")


# custom control


def _innermost_control():
    for frame in reversed(_STACK):
        if getattr(frame, "is_control", False):
            if frame.suppressed:
                return None
            return frame
        if isinstance(frame, GateWrapFrame):
            return None
    return None


def custom_control(func):
    """Mark ``func`` as custom-controlled.

    Inside a control or condition environment the function receives the
    control qubit as keyword ``ctrl`` and its gates are not controlled by that
    environment. Outside of one it is called with ``ctrl=None``.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        frame = _innermost_control()
        if frame is None or kwargs.get("ctrl") is not None:
            kwargs.setdefault("ctrl", None)
            return func(*args, **kwargs)
        kwargs["ctrl"] = frame.control_qubit()
        frame.suppressed += 1
        try:
            return func(*args, **kwargs)
        finally:
            frame.suppressed -= 1

    wrapper.custom_controlled = True
    return wrapper


def _qubit_list(obj):
    from qforge.gates import qubits_of
    return qubits_of(obj)


__all__ = [
    "ConditionFrame",
    "QuantumEnvironmentError",
    "ConjugationFrame",
    "ControlFrame",
    "GateWrapFrame",
    "InversionFrame",
    "QuantumEnvironment",
    "conjugate",
    "control",
    "custom_control",
    "gate_wrap",
    "invert",
]
