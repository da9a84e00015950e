"""Typed quantum variables."""

from __future__ import annotations

import itertools
import math

import numpy as np

from qforge import simulator
from qforge.session import QuantumSession, SessionError

_creation = itertools.count()


class EncodingError(ValueError):
    pass


class QuantumVariable:
    """A named register of logical qubits with a decoder for outcomes.

    Subclasses customize how outcomes are labelled by overriding
    :meth:`decoder` (basis index -> label).
    """

    default_name = "qv"

    def __init__(self, size, name=None, qs=None):
        from qforge.environments import effective_controls
        from qforge.uncompute import note_creation

        if size < 1:
            raise SessionError("a quantum variable needs at least one qubit")
        session = qs.resolve() if qs is not None else QuantumSession()
        self.size = size
        self._deleted = False
        self.name = session.register(self, name or self.default_name)
        self.qubits = session.alloc(size, self.name, var=self)
        self._session = session
        self._creation_index = next(_creation)
        self._env_context = frozenset(f.id for f in effective_controls())
        note_creation(self)

    __hash__ = object.__hash__

    @property
    def qs(self):
        return self.qubits[0].session

    session = qs

    @property
    def is_deleted(self):
        return self._deleted

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(self.qubits)

    def __getitem__(self, key):
        return self.qubits[key]

    def __repr__(self):
        return f"<{type(self).__name__} '{self.name}'>"

    def __str__(self):
        return str(simulator.round_probs(self.get_measurement()))

    # labels

    def decoder(self, i):
        return simulator.bitstring(i, self.size)

    def encoder(self, label):
        """Basis index with decoder(index) == label."""
        if self.size > 16:
            raise EncodingError("generic encoder is limited to 16 qubits; override encoder()")
        hits = [i for i in range(2 ** self.size) if _same_label(self.decoder(i), label)]
        if not hits:
            raise EncodingError(f"{label!r} is not representable by {self.name}")
        if len(hits) > 1:
            raise EncodingError(f"{label!r} is ambiguous for {self.name}")
        return hits[0]

    def labels(self):
        return [self.decoder(i) for i in range(2 ** self.size)]

    # state setting

    def _check_live(self):
        if self._deleted:
            raise SessionError(f"variable {self.name} has been deleted")

    def encode(self, label):
        """Flip qubits so the (fresh) register holds ``label``."""
        from qforge.gates import x

        self._check_live()
        idx = self.encoder(label)
        for j in range(self.size):
            if (idx >> j) & 1:
                x(self.qubits[j])

    def init_state(self, amplitudes):
        """Prepare sum_l a_l |l> on the fresh register (amplitudes get normalized)."""
        self._check_live()
        vec = {}
        for label, amp in amplitudes.items():
            idx = self.encoder(label)
            if idx in vec:
                raise EncodingError(f"label {label!r} given twice")
            vec[idx] = complex(amp)
        norm = math.sqrt(sum(abs(a) ** 2 for a in vec.values()))
        if norm < 1e-12:
            raise EncodingError("all amplitudes are zero")
        vec = {i: a / norm for i, a in vec.items() if abs(a) > 1e-14}
        prepare_state(self.qubits, vec)

    def __setitem__(self, key, value):
        if key != slice(None):
            raise TypeError("use var[:] = value to initialize a variable")
        if isinstance(value, dict):
            self.init_state(value)
        else:
            self.encode(value)

    # measurement and lifecycle

    def get_measurement(self):
        self._check_live()
        state, mapping = self.qs.simulate()
        return simulator.measure_probs(state, [mapping[q] for q in self.qubits], self.decoder)

    def delete(self, verify=False):
        if self._deleted:
            raise SessionError(f"variable {self.name} is already deleted")
        self.qs.dealloc(self.qubits, verify=verify)
        self._deleted = True

    def uncompute(self):
        from qforge.uncompute import uncompute
        uncompute(self)


def _same_label(a, b):
    if isinstance(a, float) or isinstance(b, float):
        try:
            return abs(float(a) - float(b)) < 1e-12
        except (TypeError, ValueError):
            return False
    try:
        return bool(a == b)
    except Exception:
        return False


def prepare_state(qubits, vec):
    """Emit a preparation of {index: amplitude} (normalized) on ``qubits``.

    Magnitudes are set one qubit at a time with RY rotations controlled on the
    already prepared qubits; phases are fixed afterwards per basis state.
    """
    from qforge.environments import control
    from qforge.gates import ry, x

    n = len(qubits)
    if len(vec) == 1:
        (idx, amp), = vec.items()
        for j in range(n):
            if (idx >> j) & 1:
                x(qubits[j])
        if abs(cmath_phase(amp)) > 1e-12:
            _phase_on(qubits, idx, cmath_phase(amp))
        return
    probs = {i: abs(a) ** 2 for i, a in vec.items()}
    for j in range(n):
        mask = (1 << j) - 1
        branch = {}
        for i, pr in probs.items():
            pre = i & mask
            b0, b1 = branch.get(pre, (0.0, 0.0))
            if (i >> j) & 1:
                b1 += pr
            else:
                b0 += pr
            branch[pre] = (b0, b1)
        for pre, (b0, b1) in sorted(branch.items()):
            tot = b0 + b1
            if tot < 1e-15 or b1 < 1e-15:
                continue
            theta = 2 * math.asin(min(1.0, math.sqrt(b1 / tot)))
            if j == 0:
                ry(theta, qubits[0])
            else:
                state = "".join(str((pre >> k) & 1) for k in range(j))
                with control(qubits[:j], ctrl_state=state):
                    ry(theta, qubits[j])
    for i, a in sorted(vec.items()):
        phi = cmath_phase(a)
        if abs(phi) > 1e-12:
            _phase_on(qubits, i, phi)


def cmath_phase(a):
    return math.atan2(a.imag, a.real)


def _phase_on(qubits, idx, phi):
    """Multiply the amplitude of basis state ``idx`` by e^{i phi}."""
    from qforge.environments import control
    from qforge.gates import p, x

    n = len(qubits)
    last = qubits[-1]
    flip_last = not (idx >> (n - 1)) & 1

    def body():
        if flip_last:
            x(last)
        p(phi, last)
        if flip_last:
            x(last)

    if n == 1:
        body()
        return
    state = "".join(str((idx >> k) & 1) for k in range(n - 1))
    with control(qubits[:-1], ctrl_state=state):
        body()


class QuantumBool(QuantumVariable):
    """One-qubit variable decoding to False/True; usable as ``with qbool:``."""

    default_name = "qbl"

    def __init__(self, name=None, qs=None):
        super().__init__(1, name=name, qs=qs)
        self._frames = []
        self._auto_condition = False

    def decoder(self, i):
        return bool(i)

    def encoder(self, label):
        if label in (True, 1):
            return 1
        if label in (False, 0):
            return 0
        raise EncodingError(f"{label!r} is not a boolean")

    def flip(self):
        from qforge.gates import x
        x(self)
        return self

    def __enter__(self):
        from qforge.environments import ConditionFrame

        frame = ConditionFrame(self)
        self._frames.append(frame)
        frame.__enter__()
        return self

    def __exit__(self, exc_type, exc, tb):
        frame = self._frames.pop()
        return frame.__exit__(exc_type, exc, tb)


class QuantumFloat(QuantumVariable):
    """Fixed-point number: ``msize`` mantissa qubits (LSB first) scaled by 2^exponent.

    Signed floats add one most-significant sign qubit (two's complement).
    """

    default_name = "qf"

    def __init__(self, msize, exponent=0, signed=False, name=None, qs=None):
        if msize < 1:
            raise SessionError("QuantumFloat needs at least one mantissa qubit")
        self.msize = msize
        self.exponent = exponent
        self.signed = bool(signed)
        super().__init__(msize + int(self.signed), name=name, qs=qs)

    def _scale(self, s):
        if self.exponent >= 0:
            return s * 2 ** self.exponent
        return s * 2.0 ** self.exponent

    def decoder(self, i):
        if self.signed and i >= 2 ** self.msize:
            i -= 2 ** (self.msize + 1)
        return self._scale(i)

    def encoder(self, label):
        try:
            s = float(label) / 2.0 ** self.exponent
        except (TypeError, ValueError):
            raise EncodingError(f"{label!r} is not a number") from None
        r = round(s)
        if abs(s - r) > 1e-9:
            raise EncodingError(f"{label!r} is not representable with exponent {self.exponent}")
        lo = -(2 ** self.msize) if self.signed else 0
        hi = 2 ** self.msize - 1
        if not lo <= r <= hi:
            raise EncodingError(f"{label!r} is out of range for {self.name}")
        return r % (2 ** self.size)

    @property
    def mantissa(self):
        return self.qubits[: self.msize]

    def duplicate(self, name=None, qs=None):
        return QuantumFloat(self.msize, self.exponent, self.signed, name=name, qs=qs)

    # arithmetic; implementations live in qforge.arithmetic

    def __iadd__(self, other):
        from qforge.arithmetic import add_in_place
        add_in_place(self, other)
        return self

    def __isub__(self, other):
        from qforge.arithmetic import add_in_place
        add_in_place(self, other, subtract=True)
        return self

    def __add__(self, other):
        from qforge.arithmetic import add
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        from qforge.arithmetic import multiply
        return multiply(self, other)

    __rmul__ = __mul__

    def _compare(self, other, kind):
        from qforge.arithmetic import compare
        return compare(self, other, kind)

    # comparisons build circuits, so hashing stays identity based (dict keys, tag_state)
    __hash__ = QuantumVariable.__hash__

    def __eq__(self, other):
        return self._compare(other, "eq")

    def __ne__(self, other):
        return self._compare(other, "ne")

    def __lt__(self, other):
        return self._compare(other, "lt")

    def __le__(self, other):
        return self._compare(other, "le")

    def __gt__(self, other):
        return self._compare(other, "gt")

    def __ge__(self, other):
        return self._compare(other, "ge")


class QuantumModulus(QuantumVariable):
    """Element of Z/NZ; indices >= N decode to the sentinel ``"invalid"``."""

    default_name = "qm"

    def __init__(self, modulus, name=None, qs=None):
        if modulus < 2:
            raise SessionError("modulus must be at least 2")
        self.modulus = int(modulus)
        super().__init__(max(1, math.ceil(math.log2(modulus))), name=name, qs=qs)

    def decoder(self, i):
        return i if i < self.modulus else "invalid"

    def encoder(self, label):
        if isinstance(label, (int, np.integer)) and 0 <= int(label) < self.modulus:
            return int(label)
        raise EncodingError(f"{label!r} is not an element of Z/{self.modulus}Z")

    def __iadd__(self, c):
        from qforge.arithmetic import mod_add_constant
        mod_add_constant(self, c)
        return self

    def __imul__(self, a):
        from qforge.arithmetic import mod_mul_constant_inplace
        mod_mul_constant_inplace(self, a)
        return self


def multi_measurement(variables):
    """Joint outcome distribution of several variables, keyed by label tuples."""
    variables = list(variables)
    sessions = []
    for v in variables:
        s = v.qs
        if not any(s is t for t in sessions):
            sessions.append(s)
    for other in sessions[1:]:
        sessions[0] = sessions[0].merge(other)
    state, mapping = variables[0].qs.simulate()
    slots, bounds = [], []
    for v in variables:
        bounds.append((len(slots), v.size))
        slots.extend(mapping[q] for q in v.qubits)

    def decode(i):
        return tuple(v.decoder((i >> start) & ((1 << size) - 1))
                     for v, (start, size) in zip(variables, bounds))

    return simulator.measure_probs(state, slots, decode)
