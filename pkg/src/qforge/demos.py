"""Built-in example programs used by the command line and the test suite.

Each builder runs its program in a fresh session and returns a
:class:`DemoResult` holding the session, the measured outcome table and any
classical post-processing results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qforge.algorithms import db_oracle, grovers_alg, order_finding_register, qpe, qRange
from qforge.algorithms.shor import shor_details
from qforge.gates import h, p, z
from qforge.uncompute import auto_uncompute
from qforge.variables import QuantumFloat, QuantumVariable

WORDS = ("Lorem ipsum dolor sit amet, consectetur adipiscing elit, sed do eiusmod "
         "tempor incididunt ut labore et").split(" ")


@dataclass
class DemoResult:
    name: str
    session: object
    table: dict
    extra: dict = field(default_factory=dict)
    target_vars: list = field(default_factory=list)


@auto_uncompute
def sqrt_oracle(qf):
    """Phase-flip the branches where qf * qf == 0.25."""
    z(qf * qf == 0.25)


def grover_quadratic(**_):
    qf = QuantumFloat(3, -1, signed=True, name="qf")
    grovers_alg(qf, sqrt_oracle, num_solutions=2)
    return DemoResult("grover-quadratic", qf.qs, qf.get_measurement(), target_vars=[qf])


def _phase_pair(psi):
    p(0.5 * 2 * np.pi, psi[0])
    p(0.125 * 2 * np.pi, psi[1])


def qpe_demo(**_):
    psi = QuantumVariable(2, name="psi")
    h(psi)
    res = qpe(psi, _phase_pair, 3)
    return DemoResult("qpe", res.qs, res.get_measurement(),
                      extra={"statevector": res.qs.statevector()}, target_vars=[psi, res])


def qrange_demo(**_):
    n = QuantumFloat(3, name="n")
    n.encode(6)
    h(n[0])
    qf = QuantumFloat(5, name="qf")
    for i in qRange(n):
        qf += i
    return DemoResult("qrange", qf.qs, qf.get_measurement(), target_vars=[qf])


def db_oracle_demo(query="dolor", **_):
    n = 4
    oracle = db_oracle(WORDS[: 2 ** n])
    index = QuantumFloat(n, name="index")
    grovers_alg(index, oracle, kwargs={"query_object": query})
    return DemoResult("db-oracle", index.qs, index.get_measurement(),
                      extra={"query": query, "index": WORDS.index(query)}, target_vars=[index])


def shor_demo(n=15, **_):
    n = 15 if n is None else int(n)
    info = shor_details(n)
    a = info["a"]
    res = order_finding_register(a, n)
    return DemoResult("shor", res.qs, res.get_measurement(),
                      extra={"N": n, "factors": list(info["factors"]), "a": a,
                             "order": info["order"]},
                      target_vars=[res])


def empty_demo(**_):
    from qforge.session import QuantumSession

    return DemoResult("empty", QuantumSession(), {})


DEMOS = {
    "grover-quadratic": grover_quadratic,
    "qpe": qpe_demo,
    "qrange": qrange_demo,
    "db-oracle": db_oracle_demo,
    "shor": shor_demo,
}

# only used to exercise the exporter on a circuit without qubits
EXTRA_DEMOS = {"empty": empty_demo}


def run_demo(name, **params):
    builder = DEMOS.get(name) or EXTRA_DEMOS.get(name)
    if builder is None:
        raise KeyError(name)
    return builder(**params)
