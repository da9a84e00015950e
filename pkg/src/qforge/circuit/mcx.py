"""Multi-controlled gate synthesis.

Decompositions are built as small template circuits over local indices
(controls, target, clean ancillae, dirty ancillae) and cached; callers compose a
template onto their own qubits. Templates only contain CX and single-qubit
gates.

Phase-tolerant variants implement ``D * MCX`` for a diagonal ``D``. Only the
two-control case actually differs from the exact gate (3 CX instead of 6); for
three or more controls every variant here is exact, so compute/uncompute pairs
stay consistent even when the two halves are synthesized with different
ancilla budgets.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from qforge.circuit.operations import (
    _FIXED,
    Operation,
    OperationError,
    controlled_perm,
    defined,
    mcx_op,
    mcz_op,
    open_mcx_op,
    open_mcz_op,
)
from qforge.circuit.quantum_circuit import QuantumCircuit

_ATOL = 1e-12


# two-control building blocks


def toffoli(qc, c0, c1, t):
    """Textbook Toffoli: 6 CX, 7 T-type gates."""
    qc.h(t)
    qc.cx(c1, t)
    qc.tdg(t)
    qc.cx(c0, t)
    qc.t(t)
    qc.cx(c1, t)
    qc.tdg(t)
    qc.cx(c0, t)
    qc.t(c1)
    qc.t(t)
    qc.h(t)
    qc.cx(c0, c1)
    qc.t(c0)
    qc.tdg(c1)
    qc.cx(c0, c1)


def toffoli_pt(qc, c0, c1, t):
    """Relative-phase Toffoli with 3 CX."""
    q = math.pi / 4
    qc.ry(q, t)
    qc.cx(c1, t)
    qc.ry(q, t)
    qc.cx(c0, t)
    qc.ry(-q, t)
    qc.cx(c1, t)
    qc.ry(-q, t)


# single-qubit controlled-U


def zyz(u):
    """Return (alpha, beta, gamma, delta) with u = e^{i alpha} RZ(beta) RY(gamma) RZ(delta)."""
    u = np.asarray(u, dtype=complex)
    alpha = cmath.phase(np.linalg.det(u)) / 2
    v = u * cmath.exp(-1j * alpha)
    a, b = v[0, 0], v[1, 0]
    gamma = 2 * math.atan2(abs(b), abs(a))
    if abs(b) < 1e-10:
        beta, delta = -2 * cmath.phase(a), 0.0
    elif abs(a) < 1e-10:
        beta, delta = 2 * cmath.phase(b), 0.0
    else:
        beta = cmath.phase(b) - cmath.phase(a)
        delta = -cmath.phase(a) - cmath.phase(b)
    return alpha, beta, gamma, delta


def _rz(qc, theta, q):
    if abs(theta) > _ATOL:
        qc.rz(theta, q)


def _ry(qc, theta, q):
    if abs(theta) > _ATOL:
        qc.ry(theta, q)


def single_controlled(qc, ctrl, t, u):
    """Emit controlled-``u`` using the ABC construction (at most 2 CX)."""
    alpha, beta, gamma, delta = zyz(u)
    _rz(qc, (delta - beta) / 2, t)
    qc.cx(ctrl, t)
    _rz(qc, -(delta + beta) / 2, t)
    _ry(qc, -gamma / 2, t)
    qc.cx(ctrl, t)
    _ry(qc, gamma / 2, t)
    _rz(qc, beta, t)
    if abs(alpha) > _ATOL:
        qc.p(alpha, ctrl)


def sqrt_unitary(u):
    w, v = np.linalg.eig(np.asarray(u, dtype=complex))
    return v @ np.diag(np.sqrt(w)) @ np.linalg.inv(v)


def multi_controlled(qc, ctrls, t, u, dirty=()):
    """Emit ``u`` on ``t`` controlled on all of ``ctrls``, without clean ancillae.

    Recursion: C^k U = CV(c_last) . MCX(rest -> c_last) . CV^dg(c_last) .
    MCX(rest -> c_last) . C^{k-1}V(rest), with V the principal square root of U.
    """
    ctrls = list(ctrls)
    if len(ctrls) == 1:
        single_controlled(qc, ctrls[0], t, u)
        return
    v = sqrt_unitary(u)
    last, rest = ctrls[-1], ctrls[:-1]
    m_circ = QuantumCircuit(qc.num_qubits)
    emit_mcx(m_circ, rest, last, dirty=[t] + list(dirty), pt=True)
    single_controlled(qc, last, t, v)
    qc.compose(m_circ)
    single_controlled(qc, last, t, v.conj().T)
    qc.compose(m_circ.inverse())
    multi_controlled(qc, rest, t, v, dirty=[last] + list(dirty))


# MCX templates


def _local_layout(k, nc, nd):
    ctrls = list(range(k))
    t = k
    clean = list(range(k + 1, k + 1 + nc))
    dirty = list(range(k + 1 + nc, k + 1 + nc + nd))
    return ctrls, t, clean, dirty


def _clean_vchain(qc, ctrls, t, clean):
    k = len(ctrls)
    a = clean[: k - 2]
    chain = QuantumCircuit(qc.num_qubits)
    toffoli_pt(chain, ctrls[0], ctrls[1], a[0])
    for i in range(2, k - 1):
        toffoli_pt(chain, ctrls[i], a[i - 2], a[i - 1])
    qc.compose(chain)
    toffoli(qc, ctrls[k - 1], a[k - 3], t)
    qc.compose(chain.inverse())


def _dirty_vchain(qc, ctrls, t, dirty):
    k = len(ctrls)
    a = dirty[: k - 2]
    for _ in range(2):
        toffoli(qc, ctrls[k - 1], a[k - 3], t)
        for i in range(k - 2, 1, -1):
            toffoli(qc, ctrls[i], a[i - 2], a[i - 1])
        toffoli(qc, ctrls[0], ctrls[1], a[0])
        for i in range(2, k - 1):
            toffoli(qc, ctrls[i], a[i - 2], a[i - 1])


def _clean_split(qc, ctrls, t, clean, dirty, k1):
    a, rest = clean[0], clean[1:]
    c1, c2 = ctrls[:k1], ctrls[k1:]
    half = QuantumCircuit(qc.num_qubits)
    emit_mcx(half, c1, a, clean=rest, dirty=c2 + [t] + dirty, pt=True)
    qc.compose(half)
    emit_mcx(qc, c2 + [a], t, clean=rest, dirty=c1 + dirty)
    qc.compose(half.inverse())


def _dirty_split(qc, ctrls, t, dirty, k1):
    d, rest = dirty[0], dirty[1:]
    c1, c2 = ctrls[:k1], ctrls[k1:]
    for _ in range(2):
        emit_mcx(qc, c2 + [d], t, dirty=c1 + rest)
        emit_mcx(qc, c1, d, dirty=c2 + [t] + rest)


def _cost(qc):
    return (qc.count_ops().get("cx", 0), qc.depth(), len(qc))


@lru_cache(maxsize=None)
def mcx_template(k, nc=0, nd=0, pt=False):
    """Best decomposition of MCX(k) given ``nc`` clean and ``nd`` dirty ancillae.

    Returns a circuit over ``k + 1 + nc + nd`` local qubits laid out as
    controls, target, clean ancillae, dirty ancillae.
    """
    if k < 1:
        raise OperationError("MCX needs at least one control")
    n = k + 1 + nc + nd
    ctrls, t, clean, dirty = _local_layout(k, nc, nd)

    def fresh():
        return QuantumCircuit(n)

    if k == 1:
        qc = fresh()
        qc.cx(0, 1)
        return qc
    if k == 2:
        qc = fresh()
        (toffoli_pt if pt else toffoli)(qc, 0, 1, 2)
        return qc
    if nc >= k - 2:
        qc = fresh()
        _clean_vchain(qc, ctrls, t, clean)
        return qc

    candidates = []
    if nc >= 1:
        for k1 in range(2, k):
            qc = fresh()
            _clean_split(qc, ctrls, t, clean, dirty, k1)
            candidates.append(qc)
    if nd >= k - 2:
        qc = fresh()
        _dirty_vchain(qc, ctrls, t, dirty)
        candidates.append(qc)
    elif nd >= 1:
        for k1 in range(2, k):
            qc = fresh()
            _dirty_split(qc, ctrls, t, dirty, k1)
            candidates.append(qc)
    if nc == 0:
        qc = fresh()
        multi_controlled(qc, ctrls, t, _FIXED["x"])
        candidates.append(qc)
    return min(candidates, key=_cost)


def emit_mcx(qc, ctrls, target, clean=(), dirty=(), pt=False):
    """Append a decomposed MCX to ``qc`` using the given ancilla qubits."""
    ctrls = list(ctrls)
    k = len(ctrls)
    clean = list(clean)[: max(k - 2, 0)]
    dirty = list(dirty)[: max(k - 2, 0)] if k >= 3 else []
    tmpl = mcx_template(k, len(clean), len(dirty), pt and k == 2)
    qc.compose(tmpl, ctrls + [target] + clean + dirty)


def mcx_decompose(k, clean=0):
    """MCX(k) on ``k + 1 + clean`` qubits; ancillae start and end in |0>."""
    used = min(clean, max(k - 2, 0))
    return _padded(mcx_template(k, used, 0, False), k + 1 + clean)


def _padded(qc, n):
    out = QuantumCircuit(n)
    out.compose(qc)
    return out


def mcx_phase_tolerant(k):
    """Circuit equal to D * MCX(k) for a diagonal D (D = I for k >= 3)."""
    if k < 2:
        raise OperationError("phase-tolerant MCX needs at least two controls")
    return mcx_template(k, 0, 0, True).copy()


@lru_cache(maxsize=None)
def mcx_depth(k, m, pt=False):
    return mcx_template(k, m, 0, pt and k == 2).depth()


# gate kinds


_PT_CACHE = {}


def pt_mcx_op(k, dagger=False):
    """Phase-tolerant MCX gate kind; uncompute it with its inverse.

    ``dagger`` only changes the unitary for two controls, but the flag is kept
    for one control as well so that controlling the gate later yields the
    matching two-control variant.
    """
    if k < 1:
        raise OperationError("MCX needs at least one control")
    key = (k, bool(dagger) if k <= 2 else False)
    if key not in _PT_CACHE:
        if k == 2:
            circ = mcx_phase_tolerant(2)
            if dagger:
                circ = circ.inverse()
            op = Operation("pt_mcx_dg" if dagger else "pt_mcx", 3, definition=circ, qfree=True,
                           permeability={0: True, 1: True, 2: False},
                           phase_tolerant=True, mcx_ctrls=2, dagger=bool(dagger))
        else:
            op = Operation("cx" if k == 1 else "pt_mcx", k + 1, base=_FIXED["x"], num_ctrls=k,
                           phase_tolerant=True, mcx_ctrls=k, dagger=key[1])
        _PT_CACHE[key] = op
    return _PT_CACHE[key]


_CTRL_CACHE = {}


def control_gate(op, k=1):
    """Gate kind for ``op`` controlled on ``k`` extra leading qubits.

    The result acts on ``k + op.num_qubits`` qubits, controls first, and its
    unitary is exactly the controlled unitary (no residual phase).
    """
    if k < 1:
        raise OperationError("need at least one control")
    if op.is_measurement:
        raise OperationError("cannot control a measurement")
    if op.is_barrier:
        raise OperationError("cannot control a barrier")
    key = (id(op), k)
    hit = _CTRL_CACHE.get(key)
    if hit is not None and hit[0] is op:
        return hit[1]
    res = _control_gate(op, k)
    _CTRL_CACHE[key] = (op, res)
    return res


def _control_gate(op, k):
    if op.phase_tolerant:
        return pt_mcx_op(op.mcx_ctrls + k, op.dagger)
    if op.ctrl_state is not None:
        if op.permeability[op.num_qubits - 1]:
            return open_mcz_op((1,) * k + op.ctrl_state)
        return open_mcx_op((1,) * k + op.ctrl_state)
    if op.base is not None and op.definition is None:
        nc = op.num_ctrls
        base = op.base
        if np.allclose(base, _FIXED["x"]):
            return mcx_op(nc + k)
        if np.allclose(base, _FIXED["z"]):
            return mcz_op(nc + k)
        if op.name == "p" and k == 1:
            from qforge.circuit.operations import make_parametrized
            return make_parametrized("cp", op.params[0])
        total = nc + k
        qc = QuantumCircuit(total + 1)
        if total == 1:
            single_controlled(qc, 0, 1, base)
        else:
            multi_controlled(qc, list(range(total)), total, base)
        return defined(_ctrl_name(op, k), qc, qfree=op.qfree,
                       permeability=_ctrl_perm(op, k))
    qc = QuantumCircuit(k + op.num_qubits)
    ctrls = list(range(k))
    if op.name == "swap":
        a, b = k, k + 1
        qc.cx(b, a)
        qc.append(mcx_op(k + 1), ctrls + [a, b])
        qc.cx(b, a)
    else:
        for ins in op.definition.data:
            if ins.op.is_barrier:
                continue
            sub = control_gate(ins.op, k)
            qc.append(sub, ctrls + [k + q for q in ins.qubits])
    perm = None if op.perm is None else controlled_perm(op.perm, k)
    return defined(_ctrl_name(op, k), qc, qfree=op.qfree, permeability=_ctrl_perm(op, k),
                   perm=perm)


def _ctrl_name(op, k):
    prefix = "c" if k == 1 else f"c{k}"
    return f"{prefix}{op.name}"


def _ctrl_perm(op, k):
    perm = {i: True for i in range(k)}
    for q, flag in op.permeability.items():
        perm[k + q] = flag
    return perm
