from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings

from _strategies import circuits

from qforge import QuantumCircuit, QuantumVariable, SimulatorCapError, h
from qforge.simulator import (
    SparseState,
    format_amplitude,
    marginal,
    measure_probs,
    run,
    run_dense,
    sample,
)


def test_bell_state():
    qc = QuantumCircuit(2)
    qc.h(0)
    qc.cx(0, 1)
    state = run(qc)
    assert state.as_dict() == pytest.approx({0: 2 ** -0.5, 3: 2 ** -0.5})
    assert measure_probs(state, [0, 1]) == pytest.approx({"00": 0.5, "11": 0.5})


def test_ghz_20_stays_sparse():
    qc = QuantumCircuit(20)
    qc.h(0)
    for j in range(19):
        qc.cx(j, j + 1)
    state = run(qc)
    assert len(state) == 2
    assert marginal(state, range(20)) == pytest.approx({0: 0.5, 2 ** 20 - 1: 0.5})


def test_all_hadamards_fill_the_space():
    qc = QuantumCircuit(10)
    for j in range(10):
        qc.h(j)
    state = run(qc)
    assert len(state) == 1024
    assert np.allclose(state.to_dense(), np.full(1024, 2 ** -5))


@given(circuits(1, 5, 25))
@settings(max_examples=80)
def test_sparse_matches_dense(qc):
    sparse = run(qc).to_dense()
    dense = run_dense(qc)
    assert np.max(np.abs(sparse - dense)) <= 1e-10


@given(circuits(1, 6, 30))
@settings(max_examples=60)
def test_norm_preserved(qc):
    assert run(qc).norm() == pytest.approx(1.0, abs=1e-10)


def test_initial_state():
    qc = QuantumCircuit(2)
    qc.x(1)
    start = SparseState(2, [1], [1.0])
    assert run(qc, initial=start).as_dict() == pytest.approx({3: 1.0})


def test_measure_probs_decoder_and_cutoff():
    state = SparseState(2, [0, 1, 2], [np.sqrt(0.5), np.sqrt(0.5 - 1e-8), 1e-4])
    probs = measure_probs(state, [0, 1], decoder=lambda i: i * 10)
    assert set(probs) == {0, 10}
    assert list(probs) == [0, 10]  # sorted by probability


def test_marginal_bit_order():
    state = SparseState(3, [0b100], [1.0])
    assert marginal(state, [2, 0]) == {1: 1.0}


def test_sample_seeded():
    probs = {"a": 0.25, "b": 0.75}
    first, second = sample(probs, 400, seed=3), sample(probs, 400, seed=3)
    assert first == second
    assert sum(first.values()) == 400
    assert 0.6 < first["b"] / 400 < 0.9


@pytest.mark.parametrize("amp, text", [
    (1, "1"),
    (-1, "-1"),
    (2 ** -0.5, "sqrt(2)/2"),
    (0.5, "1/2"),
    (1j, "I"),
    (-0.5j, "-1/2*I"),
    (np.exp(1j * np.pi / 4), "exp(1*I*pi/4)"),
    (3 ** -0.5, "sqrt(3)/3"),
])
def test_format_amplitude(amp, text):
    assert format_amplitude(complex(amp)) == text


def test_cap_error():
    qc = QuantumCircuit(5)
    with pytest.raises(SimulatorCapError, match="cap is 4"):
        run(qc, cap=4)


def test_cap_from_environment(monkeypatch):
    monkeypatch.setenv("QFORGE_SIM_CAP", "3")
    qv = QuantumVariable(4)
    h(qv)
    with pytest.raises(SimulatorCapError, match="QFORGE_SIM_CAP"):
        qv.get_measurement()
    monkeypatch.setenv("QFORGE_SIM_CAP", "4")
    assert len(qv.get_measurement()) == 16


def test_mid_circuit_measurement_rejected():
    qc = QuantumCircuit(1, 1)
    qc.measure(0, 0)
    qc.x(0)
    with pytest.raises(ValueError, match="mid-circuit"):
        run(qc)
