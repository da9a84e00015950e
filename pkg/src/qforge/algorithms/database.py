"""Grover oracles for unstructured databases."""

from __future__ import annotations

from qforge.algorithms.grover import tag_state
from qforge.dictionary import QuantumDictionary
from qforge.simulator import bitstring
from qforge.uncompute import auto_uncompute
from qforge.variables import QuantumVariable

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a_64(data):
    """64-bit FNV-1a hash of ``data`` (bytes or str, UTF-8)."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def hash_label(entry, k):
    """k-bit label of an entry: FNV-1a of ``str(entry)`` truncated to its low bits."""
    return bitstring(fnv1a_64(str(entry)) & ((1 << k) - 1), k)


def db_oracle(db, labeling=None, k=5):
    """Build a query oracle for the list ``db``.

    The labels of all entries are loaded into a dictionary once. The returned
    ``oracle(index_var, query_object=...)`` loads the label register for the
    superposed indices, phase-tags the query's label and uncomputes the
    register. A query whose label matches no entry leaves data states unchanged.
    """
    if labeling is None:
        def labeling(entry):
            return hash_label(entry, k)

    qd = QuantumDictionary(return_type=QuantumVariable(k, name="label"))
    for i, entry in enumerate(db):
        qd[i] = labeling(entry)

    @auto_uncompute
    def query_oracle(index_var, query_object=None):
        label_qv = qd[index_var]
        tag_state({label_qv: labeling(query_object)})

    return query_oracle
