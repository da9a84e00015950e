from __future__ import annotations

import itertools

import numpy as np
import pytest

from _util import controlled_unitary, restricted_unitary, session_vector

from qforge import (
    QuantumBool,
    QuantumEnvironment,
    QuantumEnvironmentError,
    QuantumFloat,
    QuantumVariable,
    conjugate,
    control,
    custom_control,
    cx,
    gate_wrap,
    h,
    invert,
    multi_measurement,
    p,
    qft,
    rx,
    s,
    swap,
    t,
    x,
)


def gate_recs(var):
    return [r for r in var.qs.resolve().log if r.is_gate]


def names(var):
    return [r.op.name for r in gate_recs(var)]


X = np.array([[0, 1], [1, 0]], dtype=complex)


# control


@pytest.mark.parametrize("as_cx, cost", [(False, 8), (True, 18)])
def test_controlled_swap(as_cx, cost):
    a, b, c = QuantumBool(), QuantumBool(), QuantumBool()
    with control(c):
        if as_cx:
            regular_swap(a, b)
        else:
            swap(a, b)
    qc = a.qs.compile()
    assert qc.cnot_count() == cost
    u = restricted_unitary(a.qs, c.qubits + a.qubits + b.qubits)
    ref = np.eye(8, dtype=complex)
    # c is bit 0, a bit 1, b bit 2: swap a and b when c = 1
    for i in range(8):
        j = i
        if i & 1 and ((i >> 1) & 1) != ((i >> 2) & 1):
            j = i ^ 0b110
        ref[:, i] = 0
        ref[j, i] = 1
    assert np.allclose(u, ref, atol=1e-9)


def test_empty_control_emits_nothing():
    a, b = QuantumBool(), QuantumBool()
    cx(a[0], b[0])
    before = len(a.qs.log)
    with control([a, b]):
        pass
    assert len(a.qs.log) == before


def test_control_needs_qubits():
    with pytest.raises(QuantumEnvironmentError):
        with control([]):
            pass


def test_triple_nesting_log_shape_and_unitary():
    c = [QuantumBool() for _ in range(3)]
    tgt = QuantumBool()
    with control(c[0]):
        with control(c[1]):
            with control(c[2]):
                x(tgt)
    ops = names(tgt)
    assert ops.count("pt_mcx") == 2 and ops.count("pt_mcx_dg") == 2
    body = [r for r in gate_recs(tgt) if tgt.qubits[0] in r.qubits]
    assert len(body) == 1 and body[0].op.name == "cx"
    qubits = [q for v in c for q in v.qubits] + tgt.qubits
    u = restricted_unitary(tgt.qs, qubits)
    assert np.allclose(u, controlled_unitary(X, 3), atol=1e-9)
    assert all(not q.live for q in tgt.qs.qubits if q.label.startswith("ctrl_acc"))


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_nesting_always_single_controlled_body(depth):
    ctrls = [QuantumBool() for _ in range(depth)]
    tgt = QuantumBool()
    envs = [control(cq) for cq in ctrls]
    for e in envs:
        e.__enter__()
    x(tgt)
    for e in reversed(envs):
        e.__exit__(None, None, None)
    body = [r for r in gate_recs(tgt) if tgt.qubits[0] in r.qubits]
    assert [r.op.name for r in body] == ["cx"]
    qubits = [q for v in ctrls for q in v.qubits] + tgt.qubits
    assert np.allclose(restricted_unitary(tgt.qs, qubits), controlled_unitary(X, depth), atol=1e-9)


def test_gate_on_own_control_rejected():
    c = QuantumBool()
    with pytest.raises(QuantumEnvironmentError, match="own control"):
        with control(c):
            x(c)


@pytest.mark.parametrize("state", ["01", "10", "00", 2])
def test_ctrl_state_anti_controls(state):
    a, b = QuantumBool(), QuantumBool()
    h(a)
    h(b)
    tgt = QuantumBool()
    with control([a, b], ctrl_state=state):
        x(tgt)
    bits = [int(ch) for ch in state] if isinstance(state, str) else [(state >> j) & 1 for j in range(2)]
    want = {}
    for va, vb in itertools.product([False, True], repeat=2):
        flip = [int(va), int(vb)] == bits
        want[(va, vb, flip)] = 0.25
    assert multi_measurement([a, b, tgt]) == pytest.approx(want)


def test_ctrl_state_length_mismatch():
    a, b = QuantumBool(), QuantumBool()
    with pytest.raises(QuantumEnvironmentError, match="length"):
        control([a, b], ctrl_state="1")


# condition


def test_condition_branch():
    q = QuantumFloat(2)
    h(q)
    tgt = QuantumFloat(2)
    with q == 0:
        tgt += 1
    probs = multi_measurement([q, tgt])
    assert probs == pytest.approx({(0, 1): 0.25, (1, 0): 0.25, (2, 0): 0.25, (3, 0): 0.25})
    # the comparison result is released when the block ends
    assert {v.name for v in q.qs.live_variables()} == {q.name, tgt.name}


def test_constant_false_condition():
    q = QuantumFloat(2)
    q[:] = 3
    tgt = QuantumFloat(2)
    with q == 1:
        tgt += 2
    assert tgt.get_measurement() == {0: 1.0}


def test_condition_inside_control():
    c = QuantumBool()
    h(c)
    q = QuantumFloat(2)
    h(q[0])
    tgt = QuantumBool()
    with control(c):
        with q == 1:
            x(tgt)
    ops = [r for r in gate_recs(tgt) if tgt.qubits[0] in r.qubits]
    assert [r.op.name for r in ops] == ["cx"]
    compare_ops = [r for r in gate_recs(tgt) if r.op.name == "omcx"]
    assert compare_ops and all(c.qubits[0] in r.qubits for r in compare_ops)
    probs = multi_measurement([c, q, tgt])
    assert probs == pytest.approx({(False, 0, False): 0.25, (False, 1, False): 0.25,
                                   (True, 0, False): 0.25, (True, 1, True): 0.25})


# invert


def _body(v):
    rx(0.3, v[0])
    cx(v[0], v[1])
    t(v[1])
    h(v[0])


def test_invert_of_invert_is_body():
    a = QuantumVariable(2)
    _body(a)
    b = QuantumVariable(2)
    with invert():
        with invert():
            _body(b)
    assert np.allclose(restricted_unitary(a.qs, a.qubits), restricted_unitary(b.qs, b.qubits))


def test_body_then_inverse_is_identity():
    a = QuantumVariable(2)
    _body(a)
    with invert():
        _body(a)
    assert np.allclose(restricted_unitary(a.qs, a.qubits), np.eye(4), atol=1e-9)


def test_invert_s_gives_sdg():
    a = QuantumBool()
    with invert():
        s(a)
    assert names(a) == ["sdg"]


def test_invert_rejects_unbalanced_allocation():
    with pytest.raises(QuantumEnvironmentError):
        with invert():
            QuantumBool()


# conjugate


def _phase_body(v):
    p(0.7, v[0])
    p(1.1, v[2])


def test_conjugate_matches_fully_controlled():
    c, v = QuantumBool(), QuantumVariable(3)
    h(c)
    with control(c):
        with conjugate(qft)(v):
            _phase_body(v)

    c2, v2 = QuantumBool(), QuantumVariable(3)
    h(c2)
    with control(c2):
        qft(v2)
        _phase_body(v2)
        qft(v2, inv=True)

    conj = c.qs.compile()
    full = c2.qs.compile()
    assert conj.compare_unitary(full, precision=9)
    assert conj.cnot_count() < full.cnot_count()


def test_conjugate_controls_only_the_body():
    c, v = QuantumBool(), QuantumVariable(3)
    before = len(gate_recs(c))
    with control(c):
        with conjugate(qft)(v):
            _phase_body(v)
    added = gate_recs(c)[before:]
    # conjugator + body + inverse conjugator, with the control on the body alone
    assert [r.op.name for r in added] == ["QFT", "cp", "cp", "QFT_dg"]
    assert [c.qubits[0] in r.qubits for r in added] == [False, True, True, False]


def test_conjugate_empty_body_cancels():
    v = QuantumVariable(3)
    h(v[0])
    with conjugate(qft)(v):
        pass
    assert np.allclose(session_vector(v.qs, v.qubits)[[0, 1]], [2 ** -0.5, 2 ** -0.5])


def test_conjugate_returns_value():
    def make(v):
        x(v[0])
        return "ok"

    v = QuantumVariable(2)
    with conjugate(make)(v) as res:
        assert res == "ok"
    assert v.get_measurement() == {"00": 1.0}


def test_conjugator_must_free_its_allocations():
    def leaky(v):
        QuantumBool(qs=v.qs)

    v = QuantumVariable(1)
    with pytest.raises(QuantumEnvironmentError, match="must deallocate"):
        with conjugate(leaky)(v):
            pass


# gate wrap


def _bell(a, b):
    h(a)
    cx(a, b)


def test_gate_wrap_single_instruction():
    a, b = QuantumBool(), QuantumBool()
    with gate_wrap("bell"):
        _bell(a, b)
    assert names(a) == ["bell"]
    r, qb = QuantumBool(), QuantumBool()
    _bell(r, qb)
    assert np.allclose(restricted_unitary(a.qs, a.qubits + b.qubits),
                       restricted_unitary(r.qs, r.qubits + qb.qubits))


def test_gate_wrap_nesting():
    a, b = QuantumBool(), QuantumBool()
    with gate_wrap("outer"):
        with gate_wrap("inner"):
            _bell(a, b)
        x(a)
    assert names(a) == ["outer"]
    assert multi_measurement([a, b]) == pytest.approx({(True, False): 0.5, (False, True): 0.5})


def test_gate_wrap_empty():
    a = QuantumBool()
    with gate_wrap("nothing"):
        pass
    assert names(a) == []


# custom control


def regular_swap(a, b):
    cx(a, b)
    cx(b, a)
    cx(a, b)


@custom_control
def custom_swap(a, b, ctrl=None):
    env = QuantumEnvironment() if ctrl is None else control(ctrl)
    cx(a, b)
    with env:
        cx(b, a)
    cx(a, b)


def _controlled(fn):
    a, b, c = QuantumBool(), QuantumBool(), QuantumBool()
    with control(c):
        fn(a, b)
    return a.qs.compile()


def test_custom_control_cost_and_unitary():
    generic, custom = _controlled(regular_swap), _controlled(custom_swap)
    assert custom.cnot_count() == 8
    assert generic.compare_unitary(custom, precision=10)


def test_custom_control_plain_call():
    a, b = QuantumBool(), QuantumBool()
    x(a)
    custom_swap(a, b)
    assert names(a) == ["x", "cx", "cx", "cx"]
    assert multi_measurement([a, b]) == {(False, True): 1.0}


def test_custom_control_under_two_controls():
    c1, c2 = QuantumBool(), QuantumBool()
    a, b = QuantumBool(), QuantumBool()
    x(a)
    h(c1)
    h(c2)
    with control([c1, c2]):
        custom_swap(a, b)
    probs = multi_measurement([c1, c2, a, b])
    for (v1, v2, va, vb), pr in probs.items():
        assert pr == pytest.approx(0.25)
        assert (va, vb) == ((False, True) if v1 and v2 else (True, False))
