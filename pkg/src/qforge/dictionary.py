"""Classical key/value storage that can be queried with quantum keys."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from qforge.gates import mcx
from qforge.variables import EncodingError, QuantumFloat, QuantumVariable


@dataclass
class TruthTable:
    """Boolean function from ``n`` input bits to ``k`` output bits.

    ``rows`` maps an input index to its output index; missing rows output 0.
    """

    n: int
    k: int
    rows: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, v in self.rows.items():
            if not 0 <= i < 2 ** self.n:
                raise ValueError(f"row {i} outside a {self.n}-bit table")
            if not 0 <= v < 2 ** self.k:
                raise ValueError(f"output {v} does not fit in {self.k} bits")

    def __call__(self, i):
        return self.rows.get(i, 0)

    def minterms(self, bit):
        """Input indices whose output has ``bit`` set, in increasing order."""
        return sorted(i for i, v in self.rows.items() if (v >> bit) & 1)


def synthesize(table, inputs, outputs):
    """XOR the table's value onto ``outputs``: one X-conjugated MCX per minterm."""
    inputs = list(inputs)
    for bit in range(table.k):
        for i in table.minterms(bit):
            state = "".join(str((i >> j) & 1) for j in range(table.n))
            mcx(inputs, outputs[bit], ctrl_state=state)


def fresh_like(proto, qs=None):
    """New, zero-initialized variable of the same quantum type as ``proto``."""
    if isinstance(proto, QuantumFloat):
        return proto.duplicate(qs=qs)
    if isinstance(proto, type):
        return proto(qs=qs)
    new = copy.copy(proto)
    if hasattr(new, "_frames"):
        new._frames = []
    QuantumVariable.__init__(new, proto.size, name=proto.name.split(".")[0], qs=qs)
    return new


def _raw_bits(value, k):
    if isinstance(value, str) and len(value) == k and set(value) <= {"0", "1"}:
        return sum(1 << j for j, ch in enumerate(value) if ch == "1")
    return None


class QuantumDictionary(dict):
    """A ``dict`` whose lookup with a quantum key entangles a fresh value register.

    ``qd[key_var]`` returns a new variable of type ``return_type`` in the state
    sum_x a_x |x>|qd[x]>, where x runs over the decoded labels of ``key_var``.
    Basis states whose label is not a key map to the zero state.

    Parameters
    ----------
    return_type : QuantumVariable or None
        Prototype of the value register (its size and decoder are reused).
        Defaults to a plain 1-qubit variable.
    """

    def __init__(self, *args, return_type=None, **kwargs):
        super().__init__(*args, **kwargs)
        self.return_type = return_type

    def __getitem__(self, key):
        if isinstance(key, QuantumVariable):
            return self.load(key)
        return super().__getitem__(key)

    def __hash__(self):
        return id(self)

    def _encode_value(self, proto, value):
        raw = _raw_bits(value, proto.size)
        try:
            return proto.encoder(value)
        except EncodingError:
            if raw is not None:
                return raw
            raise EncodingError(f"value {value!r} is not encodable by the return type") from None

    def truth_table(self, key_var, proto):
        """Truth table from key-register basis indices to value encodings."""
        rows = {}
        for i in range(2 ** key_var.size):
            label = key_var.decoder(i)
            try:
                present = label in self.keys()
            except TypeError:
                continue
            if present:
                v = self._encode_value(proto, super().__getitem__(label))
                if v:
                    rows[i] = v
        return TruthTable(key_var.size, proto.size, rows)

    def load(self, key_var, qs=None):
        """Return a fresh value variable entangled with ``key_var``."""
        proto = self.return_type if self.return_type is not None else QuantumVariable(1)
        table = self.truth_table(key_var, proto)
        out = fresh_like(proto, qs=qs if qs is not None else key_var.qs)
        synthesize(table, key_var.qubits, out.qubits)
        return out
