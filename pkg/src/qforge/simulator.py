"""Sparse statevector simulation.

The state is a pair of numpy arrays (basis indices, amplitudes). Framework
workloads are mostly arithmetic on basis states with a few superposed branches,
so the number of nonzero amplitudes stays far below 2^n.
"""

from __future__ import annotations

import cmath
import math
import os
from fractions import Fraction

import numpy as np

from qforge.circuit.quantum_circuit import apply_matrix, gather_bits, scatter_bits

DEFAULT_CAP = 26
PRUNE = 1e-12
DISPLAY_CUTOFF = 1e-6


class SimulatorCapError(RuntimeError):
    pass


def sim_cap():
    return int(os.environ.get("QFORGE_SIM_CAP", DEFAULT_CAP))


class SparseState:
    """Map from basis index to amplitude over ``num_qubits`` qubits."""

    def __init__(self, num_qubits, indices=None, amps=None):
        self.num_qubits = num_qubits
        if indices is None:
            indices = np.zeros(1, dtype=np.int64)
            amps = np.ones(1, dtype=complex)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.amps = np.asarray(amps, dtype=complex)

    def __len__(self):
        return len(self.indices)

    def as_dict(self):
        return {int(i): complex(a) for i, a in zip(self.indices, self.amps)}

    def norm(self):
        return float(np.sum(np.abs(self.amps) ** 2))

    def to_dense(self):
        vec = np.zeros(2 ** self.num_qubits, dtype=complex)
        vec[self.indices] = self.amps
        return vec

    def copy(self):
        return SparseState(self.num_qubits, self.indices.copy(), self.amps.copy())

    # gate application

    def _merge(self, idx, amps):
        uniq, inv = np.unique(idx, return_inverse=True)
        summed = np.zeros(len(uniq), dtype=complex)
        np.add.at(summed, inv, amps)
        keep = np.abs(summed) > PRUNE
        self.indices, self.amps = uniq[keep], summed[keep]

    def apply_swap(self, a, b):
        idx = self.indices
        ba, bb = (idx >> a) & 1, (idx >> b) & 1
        diff = ba != bb
        flip = (np.int64(1) << a) | (np.int64(1) << b)
        idx = np.where(diff, idx ^ flip, idx)
        order = np.argsort(idx, kind="stable")
        self.indices, self.amps = idx[order], self.amps[order]

    def apply_controlled(self, base, ctrls, target):
        idx, amps = self.indices, self.amps
        cmask = 0
        for c in ctrls:
            cmask |= 1 << c
        tbit = np.int64(1) << target
        sel = (idx & cmask) == cmask
        if not np.any(sel):
            return
        bits = ((idx >> target) & 1).astype(bool)
        off = abs(base[0, 1]) > PRUNE or abs(base[1, 0]) > PRUNE
        diag = abs(base[0, 0]) > PRUNE or abs(base[1, 1]) > PRUNE
        if not off:
            factor = np.where(bits, base[1, 1], base[0, 0])
            self.amps = np.where(sel, amps * factor, amps)
            return
        if not diag:
            factor = np.where(bits, base[0, 1], base[1, 0])
            new_amps = np.where(sel, amps * factor, amps)
            new_idx = np.where(sel, idx ^ tbit, idx)
            order = np.argsort(new_idx, kind="stable")
            self.indices, self.amps = new_idx[order], new_amps[order]
            return
        s_idx, s_amp, s_bit = idx[sel], amps[sel], bits[sel]
        # amplitude kept on the same index and moved to the partner index
        same = s_amp * np.where(s_bit, base[1, 1], base[0, 0])
        moved = s_amp * np.where(s_bit, base[0, 1], base[1, 0])
        all_idx = np.concatenate([idx[~sel], s_idx, s_idx ^ tbit])
        all_amp = np.concatenate([amps[~sel], same, moved])
        self._merge(all_idx, all_amp)

    def apply_perm(self, fn, qubits):
        idx = self.indices
        new_local = np.asarray(fn(gather_bits(idx, qubits)), dtype=np.int64)
        new_idx = scatter_bits(idx, qubits, new_local)
        order = np.argsort(new_idx, kind="stable")
        self.indices, self.amps = new_idx[order], self.amps[order]

    def apply(self, op, qubits):
        if op.is_barrier:
            return
        if op.perm is not None:
            self.apply_perm(op.perm[0], qubits)
            return
        if op.name == "swap":
            self.apply_swap(*qubits)
            return
        if op.base is not None:
            k = op.num_ctrls
            self.apply_controlled(op.base, qubits[:k], qubits[k])
            return
        raise ValueError(f"simulator cannot apply {op.name}")


def run(circuit, cap=None, initial=None):
    """Simulate ``circuit`` from |0...0> (or ``initial``) and return a SparseState.

    Terminal measurements are ignored; gates after a measurement on the same
    qubit are rejected.
    """
    cap = sim_cap() if cap is None else cap
    if circuit.num_qubits > cap:
        raise SimulatorCapError(
            f"circuit has {circuit.num_qubits} qubits, simulator cap is {cap} (QFORGE_SIM_CAP)")
    state = initial.copy() if initial is not None else SparseState(circuit.num_qubits)
    measured = set()
    for op, qubits, _ in circuit.flatten(keep_perm=True):
        if op.is_measurement:
            measured.add(qubits[0])
            continue
        if measured and not op.is_barrier and measured.intersection(qubits):
            raise ValueError("mid-circuit measurement is not supported")
        state.apply(op, qubits)
    return state


def run_dense(circuit):
    """Reference simulator on a dense vector; used as a test oracle."""
    n = circuit.num_qubits
    vec = np.zeros((2,) * n + (1,), dtype=complex)
    vec[(0,) * n] = 1
    for op, qubits, _ in circuit.flatten():
        if op.is_measurement or op.is_barrier:
            continue
        vec = apply_matrix(vec, op.matrix(), qubits, n)
    return vec.reshape(-1)


def bitstring(i, width):
    """Bitstring of ``i`` with bit 0 printed first."""
    return "".join("1" if (i >> j) & 1 else "0" for j in range(width))


def marginal(state, qubits):
    """Probabilities of the sub-register indices over ``qubits`` (bit j = qubits[j])."""
    sub = np.zeros(len(state.indices), dtype=np.int64)
    for j, q in enumerate(qubits):
        sub |= ((state.indices >> q) & 1) << j
    probs = np.abs(state.amps) ** 2
    uniq, inv = np.unique(sub, return_inverse=True)
    tot = np.zeros(len(uniq))
    np.add.at(tot, inv, probs)
    return {int(u): float(p) for u, p in zip(uniq, tot)}


def measure_probs(state, qubits, decoder=None, cutoff=DISPLAY_CUTOFF):
    """Decoded outcome distribution of the given qubits, sorted by probability."""
    qubits = list(qubits)
    if decoder is None:
        width = len(qubits)
        decoder = lambda i: bitstring(i, width)  # noqa: E731
    out = {}
    for i, p in marginal(state, qubits).items():
        if p < cutoff:
            continue
        try:
            label = decoder(i)
        except Exception as exc:
            raise type(exc)(f"decoder failed on outcome {i}: {exc}") from exc
        out[label] = out.get(label, 0.0) + p
    return dict(sorted(out.items(), key=lambda kv: -kv[1]))


def sample(probs, shots, seed=None):
    """Draw ``shots`` outcomes from a label -> probability map."""
    rng = np.random.default_rng(seed)
    labels = list(probs)
    p = np.array([probs[k] for k in labels], dtype=float)
    draws = rng.choice(len(labels), size=shots, p=p / p.sum())
    counts = {}
    for d in draws:
        counts[labels[d]] = counts.get(labels[d], 0) + 1
    return counts


def round_probs(probs, digits=4):
    return {k: round(v, digits) for k, v in probs.items()}


# statevector pretty printing


def _real_form(x):
    """Short closed form for a positive real like sqrt(2)/2, else a decimal."""
    for den in range(1, 65):
        sq = (x * den) ** 2
        num = round(sq)
        if num and abs(sq - num) < 1e-9:
            frac = Fraction(num, 1)
            root = math.isqrt(num)
            if root * root == num:
                return str(Fraction(root, den)) if den > 1 else str(root)
            inner = f"sqrt({frac.numerator})"
            return inner if den == 1 else f"{inner}/{den}"
    return f"{x:.6g}"


def format_amplitude(a):
    r, phi = abs(a), cmath.phase(a)
    mag = _real_form(r)
    eighths = phi / (math.pi / 4)
    if abs(eighths - round(eighths)) < 1e-9:
        e = int(round(eighths)) % 8
        if e == 0:
            return mag
        if e == 4:
            return f"-{mag}"
        if e == 2:
            return f"{mag}*I" if mag != "1" else "I"
        if e == 6:
            return f"-{mag}*I" if mag != "1" else "-I"
        return f"{mag}*exp({e}*I*pi/4)" if mag != "1" else f"exp({e}*I*pi/4)"
    return f"({a.real:.6g}{a.imag:+.6g}*I)"


def _ket_product(labels):
    parts = []
    i = 0
    while i < len(labels):
        j = i
        while j + 1 < len(labels) and labels[j + 1] == labels[i]:
            j += 1
        ket = f"|{labels[i]}>"
        parts.append(ket if j == i else f"{ket}**{j - i + 1}")
        i = j + 1
    return "*".join(parts)


def format_statevector(terms):
    """Render [(label tuple, amplitude), ...] as a readable sum of kets."""
    if not terms:
        return "0"
    amps = [a for _, a in terms]
    kets = [_ket_product(lbl) for lbl, _ in terms]
    if len(terms) > 1 and all(abs(a - amps[0]) < 1e-9 for a in amps):
        return f"{format_amplitude(amps[0])}*({' + '.join(kets)})"
    pieces = []
    for (_, a), ket in zip(terms, kets):
        amp = format_amplitude(a)
        pieces.append(ket if amp == "1" else f"{amp}*{ket}")
    return " + ".join(pieces)
