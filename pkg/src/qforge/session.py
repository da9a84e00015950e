"""Quantum sessions: the instruction log behind quantum variables and its compiler.

A session log is a list of :class:`Rec` entries over logical qubits. Logical
qubits are never reused at the log level; :meth:`QuantumSession.compile` maps
them onto physical slots, reusing deallocated slots and borrowing free ones as
ancillae for multi-controlled X gates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from qforge.circuit.mcx import mcx_depth, mcx_template
from qforge.circuit.quantum_circuit import QuantumCircuit
from qforge import simulator


class SessionError(RuntimeError):
    pass


class LQubit:
    """A logical qubit. ``live`` tracks the allocation state seen by user code."""

    __slots__ = ("id", "label", "_session", "live", "var", "__weakref__")

    def __init__(self, uid, label, session, var=None):
        self.id = uid
        self.label = label
        self._session = session
        self.live = False
        self.var = var

    @property
    def session(self):
        s = self._session.resolve()
        self._session = s
        return s

    def __repr__(self):
        return f"Qubit({self.label})"


@dataclass
class Rec:
    """One log entry: a gate, or the allocation/deallocation of a qubit."""

    kind: str
    op: object = None
    qubits: tuple = ()
    clbits: tuple = ()
    covered: frozenset = field(default_factory=frozenset)

    @property
    def is_gate(self):
        return self.kind == "gate"


_session_ids = itertools.count()


class QuantumSession:
    def __init__(self):
        self.uid = next(_session_ids)
        self.log = []
        self.variables = []
        self.qubits = []
        self._forward = None
        self._names = set()
        self._next_qubit = 0
        self._version = 0
        self._sim_cache = None

    def __repr__(self):
        return f"QuantumSession({self.resolve().uid})"

    def resolve(self):
        s = self
        while s._forward is not None:
            s = s._forward
        # path compression
        t = self
        while t._forward is not None and t._forward is not s:
            t._forward, t = s, t._forward
        return s

    # bookkeeping

    def touch(self):
        self._version += 1

    def fresh_name(self, base):
        name, i = base, 1
        while name in self._names:
            name = f"{base}_{i}"
            i += 1
        self._names.add(name)
        return name

    def register(self, var, name):
        s = self.resolve()
        s.variables.append(var)
        return s.fresh_name(name)

    def new_qubits(self, n, name, var=None):
        s = self.resolve()
        qs = []
        for j in range(n):
            q = LQubit(s._next_qubit, f"{name}.{j}", s, var)
            s._next_qubit += 1
            s.qubits.append(q)
            qs.append(q)
        return qs

    def alloc(self, n, name="q", var=None):
        """Create and allocate ``n`` fresh logical qubits."""
        from qforge.environments import emit

        if n < 1:
            raise SessionError("allocation size must be at least 1")
        qs = self.new_qubits(n, name, var)
        for q in qs:
            q.live = True
            emit(Rec("alloc", qubits=(q,)))
        return qs

    def alloc_silent(self, n, name="q"):
        """Allocate without emitting records (the caller emits them)."""
        qs = self.new_qubits(n, name)
        for q in qs:
            q.live = True
        return qs

    def dealloc(self, qubits, verify=False):
        from qforge.environments import emit, stack_depth

        qubits = list(qubits)
        if not qubits:
            return
        for q in qubits:
            if not q.live:
                raise SessionError(f"qubit {q.label} is not allocated")
        if verify:
            if stack_depth():
                raise SessionError("cannot verify a deletion inside a quantum environment")
            s = qubits[0].session
            s.verify_zero(qubits)
        for q in qubits:
            q.live = False
            emit(Rec("dealloc", qubits=(q,)))

    def verify_zero(self, qubits):
        state, mapping = self.simulate()
        for q in qubits:
            slot = mapping[q]
            p1 = simulator.marginal(state, [slot]).get(1, 0.0)
            if p1 > 1e-9:
                raise SessionError(f"qubit {q.label} is not in |0> (P(1) = {p1:.3g})")

    def record(self, rec):
        self.resolve().log.append(rec)
        self.resolve().touch()

    # merging

    def merge(self, other):
        """Merge ``other`` into this session; returns the surviving session."""
        a, b = self.resolve(), other.resolve()
        if a is b:
            raise SessionError("cannot merge a session with itself")
        for q in b.qubits:
            q.id = a._next_qubit
            a._next_qubit += 1
            q._session = a
            a.qubits.append(q)
        for var in b.variables:
            if var.name in a._names:
                old = var.name
                var.name = a.fresh_name(old)
                for j, q in enumerate(var.qubits):
                    q.label = f"{var.name}.{j}"
            else:
                a._names.add(var.name)
            a.variables.append(var)
        a.log.extend(b.log)
        b.log = []
        b.variables = []
        b.qubits = []
        b._forward = a
        a.touch()
        return a

    # compilation

    def live_qubits(self):
        return [q for q in self.resolve().qubits if q.live]

    def live_variables(self):
        return [v for v in self.resolve().variables if not v.is_deleted]

    def compile(self, workspace=0, mcx_recompilation=True, gate_speed=None):
        """Compile the log into a QuantumCircuit with qubit reuse."""
        return self.compile_with_mapping(workspace, mcx_recompilation, gate_speed)[0]

    def compile_with_mapping(self, workspace=0, mcx_recompilation=True, gate_speed=None,
                             expand=True):
        """Compile and also return the logical -> physical qubit mapping.

        ``expand=False`` keeps composite gates whole (used for simulation).
        """
        from qforge.environments import stack_depth

        if stack_depth():
            raise SessionError("cannot compile with open quantum environments")
        if workspace < 0:
            raise SessionError("workspace must be non-negative")
        compiler = _Compiler(workspace, mcx_recompilation, gate_speed or {}, expand)
        for rec in self.resolve().log:
            compiler.process(rec)
        return compiler.finish()

    def compile_stats_ab(self, workspace=0, gate_speed=None):
        """Transpiled stats with and without MCX recompilation."""
        out = {}
        for key, flag in (("with_mcx", True), ("without_mcx", False)):
            qc = self.compile(workspace, flag, gate_speed)
            st = qc.stats(transpiled=True)
            out[key] = {"qubits": qc.num_qubits, "depth": st["depth"],
                        "cx": st["counts"].get("cx", 0), "counts": st["counts"]}
        return out

    def to_circuit(self):
        """Naive circuit: one physical qubit per logical qubit, no reuse."""
        s = self.resolve()
        index = {q: i for i, q in enumerate(s.qubits)}
        qc = QuantumCircuit(len(s.qubits), labels=[q.label for q in s.qubits])
        for rec in s.log:
            if rec.is_gate:
                qc.append(rec.op, [index[q] for q in rec.qubits], rec.clbits)
        return qc, index

    def simulate(self):
        """Simulate the log (qubit reuse, MCX left intact); cached per log version."""
        s = self.resolve()
        if s._sim_cache is not None and s._sim_cache[0] == s._version:
            return s._sim_cache[1], s._sim_cache[2]
        qc, mapping = s.compile_with_mapping(mcx_recompilation=False, expand=False)
        state = simulator.run(qc)
        s._sim_cache = (s._version, state, mapping)
        return state, mapping

    def statevector_terms(self, variables=None, cutoff=1e-12):
        """List of (label tuple, amplitude) over the live variables."""
        import numpy as np

        s = self.resolve()
        state, mapping = s.simulate()
        variables = list(variables) if variables is not None else s.live_variables()
        var_qubits = set()
        for v in variables:
            var_qubits.update(v.qubits)
        others = [mapping[q] for q in s.live_qubits() if q not in var_qubits]
        groups = {}
        for idx, amp in zip(state.indices, state.amps):
            idx = int(idx)
            if any((idx >> slot) & 1 for slot in others):
                raise SessionError("qubits outside the listed variables are not in |0>")
            labels = []
            for v in variables:
                sub = 0
                for j, q in enumerate(v.qubits):
                    sub |= ((idx >> mapping[q]) & 1) << j
                labels.append(v.decoder(sub))
            key = tuple(labels)
            groups[key] = groups.get(key, 0) + complex(amp)
        terms = [(k, a) for k, a in groups.items() if abs(a) > cutoff]
        terms.sort(key=lambda kv: _sort_key(kv[0]))
        # fix the global phase so the first amplitude is real and positive
        if terms:
            ph = terms[0][1] / abs(terms[0][1])
            terms = [(k, a / ph) for k, a in terms]
            terms = [(k, complex(np.round(a.real, 12), np.round(a.imag, 12))) for k, a in terms]
        return terms

    def statevector(self, variables=None):
        return simulator.format_statevector(self.statevector_terms(variables))


def _sort_key(labels):
    return tuple((type(l).__name__, l) if not isinstance(l, (int, float)) else ("", l)
                 for l in labels)


class _Compiler:
    def __init__(self, workspace, recompile, gate_speed, expand=True):
        self.recompile = recompile
        self.expand = expand
        self.speed = gate_speed
        self.ts = [0.0] * workspace
        # workspace slots only ever serve as MCX ancillae, never as allocations
        self.workspace = set(range(workspace))
        self.free = set()
        self.mapping = {}
        self.data = []
        self.labels = [f"workspace.{i}" for i in range(workspace)]

    def _new_slot(self, label):
        self.ts.append(0.0)
        self.labels.append(label)
        return len(self.ts) - 1

    def _earliest(self, candidates):
        return min(candidates, key=lambda s: (self.ts[s], s))

    def process(self, rec):
        if rec.kind == "alloc":
            q = rec.qubits[0]
            if q in self.mapping:
                raise SessionError(f"qubit {q.label} allocated twice")
            if self.free:
                slot = self._earliest(self.free)
                self.free.discard(slot)
            else:
                slot = self._new_slot(q.label)
            self.mapping[q] = slot
        elif rec.kind == "dealloc":
            q = rec.qubits[0]
            if q not in self.mapping:
                raise SessionError(f"qubit {q.label} deallocated before allocation")
            self.free.add(self.mapping.pop(q))
        else:
            try:
                slots = tuple(self.mapping[q] for q in rec.qubits)
            except KeyError as exc:
                raise SessionError(f"gate {rec.op.name} on deallocated qubit {exc.args[0]}") from None
            self.gate(rec.op, slots, rec.clbits)

    def _append(self, op, slots, clbits=()):
        self.data.append((op, slots, clbits))
        if op.is_barrier:
            return
        t = max(self.ts[s] for s in slots) + self.speed.get(op.name, 1.0)
        for s in slots:
            self.ts[s] = t

    def gate(self, op, slots, clbits):
        k = op.mcx_ctrls if op.mcx_ctrls is not None else (
            op.num_ctrls if op.name == "mcz" else 0)
        if self.recompile and k >= 2 and op.name in ("mcx", "mcz", "pt_mcx", "pt_mcx_dg"):
            self.mcx(op, slots, k)
            return
        if op.definition is not None and self.expand:
            for ins in op.definition.data:
                self.gate(ins.op, tuple(slots[q] for q in ins.qubits), ins.clbits)
            return
        self._append(op, slots, clbits)

    def mcx(self, op, slots, k):
        pt = op.phase_tolerant and k == 2
        pool = self.free | self.workspace
        budget = min(k - 2, len(pool))
        m = min(range(budget + 1), key=lambda j: (mcx_depth(k, j, pt), j))
        anc = sorted(pool, key=lambda s: (self.ts[s], s))[:m]
        tmpl = mcx_template(k, m, 0, pt)
        if op.dagger:
            tmpl = tmpl.inverse()
        target = slots[k]
        is_z = op.name == "mcz"
        if is_z:
            self._append(_H, (target,))
        full = list(slots) + anc
        for ins in tmpl.data:
            self._append(ins.op, tuple(full[q] for q in ins.qubits))
        if is_z:
            self._append(_H, (target,))

    def finish(self):
        qc = QuantumCircuit(len(self.ts), labels=list(self.labels))
        for op, slots, clbits in self.data:
            qc.data.append(_instruction(op, slots, clbits))
        return qc, dict(self.mapping)


def _instruction(op, slots, clbits):
    from qforge.circuit.quantum_circuit import Instruction
    return Instruction(op, tuple(slots), tuple(clbits))


from qforge.circuit.operations import gate as _gate  # noqa: E402

_H = _gate("h")
