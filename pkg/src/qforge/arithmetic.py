"""Arithmetic on quantum floats and moduli.

Everything is built from one primitive: a *sum block* that adds a list of
terms into a destination register modulo 2^width. A term is a classical
constant or a quantum register, scaled by an integer weight and optionally
controlled on qubits. Two interchangeable backends implement sum blocks:

* ``AdderKind.FOURIER``: Draper-style phase additions between a swap-free QFT
  and its inverse; no ancilla except for controlled register terms.
* ``AdderKind.RIPPLE_CARRY``: Cuccaro ripple-carry additions with one carry
  ancilla (plus a constant register for constant terms).

Blocks are emitted as composite gates that are qfree, declare which qubits
they leave unchanged (permeability) and carry their exact classical action,
so uncomputation can invert them and the simulator can apply them as index
permutations.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from enum import Enum

import numpy as np

from qforge.circuit.mcx import pt_mcx_op
from qforge.circuit.operations import defined, mcx_op
from qforge.circuit.quantum_circuit import QuantumCircuit, classical_action, gather_bits, scatter_bits
from qforge.environments import custom_control, current_stack
from qforge.gates import apply, mcx, x
from qforge.session import SessionError
from qforge.variables import EncodingError, QuantumBool, QuantumFloat, QuantumModulus, QuantumVariable

TWO_PI = 2 * math.pi
_ANGLE_EPS = 1e-12


class QuantumArithmeticError(SessionError):
    pass


class AdderKind(str, Enum):
    RIPPLE_CARRY = "ripple_carry"
    FOURIER = "fourier"


_default_adder = AdderKind.FOURIER


def default_adder():
    return _default_adder


def set_default_adder(kind):
    global _default_adder
    _default_adder = AdderKind(kind)


@contextmanager
def adder_kind(kind):
    """Temporarily switch the adder used by arithmetic operators."""
    global _default_adder
    old = _default_adder
    _default_adder = AdderKind(kind)
    try:
        yield
    finally:
        _default_adder = old


def _resolve_adder(adder):
    return _default_adder if adder is None else AdderKind(adder)


# local circuit construction


class _Builder:
    """Circuit over ``nports`` caller qubits plus named, reusable ancilla pools."""

    def __init__(self, nports):
        self.qc = QuantumCircuit(nports)
        self.nports = nports
        self.pools = {}

    def anc(self, name, size):
        pool = self.pools.setdefault(name, [])
        while len(pool) < size:
            pool.append(self.qc.add_qubit(name))
        return pool[:size]


def _block_op(name, sb, modified, perm=None):
    """Composite gate from a finished builder; ``modified`` lists changed ports."""
    if perm is None:
        perm = classical_action(sb.qc)
    permeability = {i: i not in modified for i in range(sb.qc.num_qubits)}
    for i in range(sb.nports, sb.qc.num_qubits):
        permeability[i] = False
    return defined(name, sb.qc, permeability=permeability, qfree=True, perm=perm)


def _sub_block(parent, ports, name, build):
    """Build a nested block over parent locals ``ports`` and append it.

    ``build(sb, locals)`` fills the sub-builder and returns (modified port
    positions, perm or None). Sub-ancillas share the parent's pools by name.
    """
    sb = _Builder(len(ports))
    modified, perm = build(sb, list(range(len(ports))))
    op = _block_op(name, sb, set(modified), perm)
    mapping = list(ports) + [None] * (sb.qc.num_qubits - len(ports))
    for pname, plist in sb.pools.items():
        for sub_q, par_q in zip(plist, parent.anc(pname, len(plist))):
            mapping[sub_q] = par_q
    parent.qc.append(op, mapping)


def _emit_block(name, modified, others, build):
    """Emit a block acting on session qubits.

    ``modified`` are the qubits the block changes, ``others`` the qubits it
    only reads. ``build(b, mod_locals, other_locals)`` fills the builder and
    may return an explicit perm. Ancillae are allocated around the gate.
    """
    ports, seen = [], set()
    for q in list(modified) + list(others):
        if q in seen:
            if q in modified:
                raise QuantumArithmeticError(f"qubit {q.label} is both read and written")
            continue
        seen.add(q)
        ports.append(q)
    index = {q: i for i, q in enumerate(ports)}
    b = _Builder(len(ports))
    perm = build(b, [index[q] for q in modified], [index[q] for q in others])
    op = _block_op(name, b, {index[q] for q in modified}, perm)
    n_anc = b.qc.num_qubits - len(ports)
    session = ports[0].session
    ancs = session.alloc(n_anc, f"{name}_anc") if n_anc else []
    apply(op, ports + ancs)
    if ancs:
        session.dealloc(ancs)
    return op


# QFT


def _qft_core(qc, qs):
    """Swap-free QFT: afterwards qubit qs[j] carries phase weight 2^(n-1-j)."""
    n = len(qs)
    for j in range(n - 1, -1, -1):
        qc.h(qs[j])
        for k in range(j - 1, -1, -1):
            qc.cp(math.pi / 2 ** (j - k), qs[k], qs[j])


def _iqft_core(qc, qs):
    n = len(qs)
    for j in range(n):
        for k in range(j):
            qc.cp(-math.pi / 2 ** (j - k), qs[k], qs[j])
        qc.h(qs[j])


def qft_circuit(n, inverse=False, swaps=True):
    """Standard QFT |x> -> sum_y e^{2 pi i x y / 2^n} |y> / sqrt(2^n) (qubit 0 = LSB)."""
    qc = QuantumCircuit(n)
    qs = list(range(n))
    _qft_core(qc, qs)
    if swaps:
        for i in range(n // 2):
            qc.swap(i, n - 1 - i)
    return qc.inverse() if inverse else qc


def qft(var, inv=False, swaps=True):
    """Apply the QFT (or its inverse) to a variable or qubit list."""
    from qforge.gates import qubits_of

    qs = qubits_of(var)
    name = "QFT_dg" if inv else "QFT"
    apply(defined(name, qft_circuit(len(qs), inv, swaps), qfree=False), qs)


QFT = qft


# sum blocks


def _angles(v, n):
    """Phase on destination bit j (after the swap-free QFT) that adds ``v``."""
    out = []
    for j in range(n):
        mod = 2 ** (j + 1)
        th = TWO_PI * ((v % mod) / mod)
        out.append(th if abs(th) > _ANGLE_EPS and abs(th - TWO_PI) > _ANGLE_EPS else 0.0)
    return out


def _and_into(qc, ctrls, target, pt, dagger=False):
    """target ^= AND(ctrls); duplicate controls collapse."""
    cs = list(dict.fromkeys(ctrls))
    if len(cs) == 1:
        qc.cx(cs[0], target)
    elif pt:
        qc.append(pt_mcx_op(len(cs), dagger), cs + [target])
    else:
        qc.append(mcx_op(len(cs)), cs + [target])


def _fourier_sum(b, dst, terms):
    """Fourier-basis sum block; returns its explicit (forward, inverse) action."""
    qc = b.qc
    n = len(dst)
    contribs = []
    _qft_core(qc, dst)
    for ctrls, src, w in terms:
        ctrls = tuple(dict.fromkeys(ctrls))
        cq, cexpr = None, None
        if len(ctrls) == 1:
            cq = ctrls[0]
            cexpr = ("bit", cq)
        elif len(ctrls) >= 2:
            cq = b.anc("and", 1)[0]
            _and_into(qc, ctrls, cq, pt=True)
            cexpr = ("and", cq, ctrls)
        if src is None:
            for j, th in enumerate(_angles(w, n)):
                if th:
                    if cq is None:
                        qc.p(th, dst[j])
                    else:
                        qc.cp(th, cq, dst[j])
            contribs.append(("const", cexpr, w))
        else:
            src = list(src)
            if cq is None:
                phase_qs = src
            else:
                phase_qs = b.anc("z", len(src))
                for s, zq in zip(src, phase_qs):
                    _and_into(qc, (cq, s), zq, pt=True)
            for k, pq in enumerate(phase_qs):
                for j, th in enumerate(_angles(w * 2 ** k, n)):
                    if th:
                        qc.cp(th, pq, dst[j])
            if cq is not None:
                for s, zq in reversed(list(zip(src, phase_qs))):
                    _and_into(qc, (cq, s), zq, pt=True, dagger=True)
                contribs.append(("csrc", cexpr, w, src, list(phase_qs)))
            else:
                contribs.append(("src", None, w, src))
        if len(ctrls) >= 2:
            _and_into(qc, ctrls, cq, pt=True, dagger=True)
    _iqft_core(qc, dst)
    return _sum_action(dst, contribs)


def _ctrl_value(idx, cexpr):
    if cexpr is None:
        return np.ones(len(idx), dtype=np.int64)
    if cexpr[0] == "bit":
        return (idx >> cexpr[1]) & 1
    _, w, ctrls = cexpr
    val = np.ones(len(idx), dtype=np.int64)
    for c in ctrls:
        val &= (idx >> c) & 1
    return ((idx >> w) & 1) ^ val


def _sum_action(dst, contribs):
    n = len(dst)
    mod = 2 ** n

    def total(idx):
        acc = np.zeros(len(idx), dtype=np.int64)
        for item in contribs:
            kind, cexpr, w = item[0], item[1], item[2]
            cv = _ctrl_value(idx, cexpr)
            if kind == "const":
                acc += (w % mod) * cv
            elif kind == "src":
                acc += (w % mod) * (gather_bits(idx, item[3]) % mod)
            else:
                src, zs = item[3], item[4]
                val = np.zeros(len(idx), dtype=np.int64)
                for k, (s, zq) in enumerate(zip(src, zs)):
                    val |= (((idx >> zq) & 1) ^ (cv & ((idx >> s) & 1))) << k
                acc += (w % mod) * (val % mod)
            acc %= mod
        return acc

    def fwd(idx):
        return scatter_bits(idx, dst, (gather_bits(idx, dst) + total(idx)) % mod)

    def inv(idx):
        return scatter_bits(idx, dst, (gather_bits(idx, dst) - total(idx)) % mod)

    return fwd, inv


def _cuccaro(qc, a, bq, carry):
    """In place bq += a + carry (mod 2^len); a and carry restored."""
    def maj(p, q, r):
        qc.cx(r, q)
        qc.cx(r, p)
        qc.mcx([p, q], r)

    def uma(p, q, r):
        qc.mcx([p, q], r)
        qc.cx(r, p)
        qc.cx(p, q)

    L = len(a)
    maj(carry, bq[0], a[0])
    for i in range(1, L):
        maj(a[i - 1], bq[i], a[i])
    for i in range(L - 1, 0, -1):
        uma(a[i - 1], bq[i], a[i])
    uma(carry, bq[0], a[0])


def _power_of_two(w):
    """(sign, k) with w = sign * 2^k; raises for other weights."""
    sign = 1 if w > 0 else -1
    m = abs(w)
    if m == 0 or m & (m - 1):
        raise QuantumArithmeticError(f"ripple-carry register terms need power-of-two weights, got {w}")
    return sign, m.bit_length() - 1


def _ripple_sum(b, dst, terms):
    qc = b.qc
    n = len(dst)
    carry = b.anc("carry", 1)[0]
    for ctrls, src, w in terms:
        ctrls = tuple(dict.fromkeys(ctrls))
        if src is None:
            v = w % 2 ** n
            if not v:
                continue
            reg = b.anc("const", n)
            scratch = QuantumCircuit(qc.num_qubits)
            load = [j for j in range(n) if (v >> j) & 1]
            for j in load:
                _load_bit(qc, ctrls, reg[j])
            _cuccaro(scratch, reg, dst, carry)
            qc.compose(scratch)
            for j in load:
                _load_bit(qc, ctrls, reg[j])
            continue
        sign, shift = _power_of_two(w)
        if shift >= n:
            continue
        length = n - shift
        srcs = list(src)[:length]
        zs = []
        if ctrls:
            zs = b.anc("z", len(srcs))
            for s, zq in zip(srcs, zs):
                _and_into(qc, ctrls + (s,), zq, pt=False)
            srcs = list(zs)
        pad = b.anc("pad", length - len(srcs)) if length > len(srcs) else []
        scratch = QuantumCircuit(qc.num_qubits)
        _cuccaro(scratch, srcs + list(pad), dst[shift:], carry)
        qc.compose(scratch if sign > 0 else scratch.inverse())
        if ctrls:
            for s, zq in reversed(list(zip(list(src)[:length], zs))):
                _and_into(qc, ctrls + (s,), zq, pt=False)
    return None


def _load_bit(qc, ctrls, target):
    if not ctrls:
        qc.x(target)
    else:
        _and_into(qc, ctrls, target, pt=False)


def _sum_into(b, dst, terms, adder):
    """Append a sum block ``dst += sum(terms) mod 2^len(dst)`` to builder ``b``."""
    adder = _resolve_adder(adder)
    ports = list(dict.fromkeys(list(dst) + [q for t in terms for q in _term_qubits(t)]))
    pos = {q: i for i, q in enumerate(ports)}

    def build(sb, loc):
        ldst = [pos[q] for q in dst]
        lterms = [(tuple(pos[c] for c in ctrls), None if src is None else [pos[s] for s in src], w)
                  for ctrls, src, w in terms]
        if adder is AdderKind.FOURIER:
            perm = _fourier_sum(sb, ldst, lterms)
        else:
            perm = _ripple_sum(sb, ldst, lterms)
        return set(ldst), perm

    name = "fourier_sum" if adder is AdderKind.FOURIER else "ripple_sum"
    _sub_block(b, ports, name, build)


def _term_qubits(term):
    ctrls, src, _ = term
    return list(ctrls) + ([] if src is None else list(src))


def emit_sum(dst, terms, adder=None, name="add"):
    """Emit ``dst += sum(terms)`` on session qubits.

    Each term is ``(ctrls, src, w)``: ``ctrls`` a tuple of control qubits,
    ``src`` a qubit list (value read little-endian) or None for a constant,
    and ``w`` the integer weight (the constant itself when ``src`` is None).
    """
    dst = list(dst)
    others = [q for t in terms for q in _term_qubits(t)]
    overlap = set(dst) & set(others)
    if overlap:
        raise QuantumArithmeticError("the destination register cannot appear in its own summands")

    def build(b, mod_loc, oth_loc):
        pos = dict(zip(dst, mod_loc))
        pos.update(zip(others, oth_loc))
        lterms = [(tuple(pos[c] for c in ctrls), None if src is None else [pos[s] for s in src], w)
                  for ctrls, src, w in terms]
        _sum_into(b, mod_loc, lterms, adder)
        return None

    return _emit_block(name, dst, others, build)


# QuantumFloat helpers


def _bounds(qf):
    scale = 2.0 ** qf.exponent
    hi = (2 ** qf.msize - 1) * scale
    lo = -(2 ** qf.msize) * scale if qf.signed else 0.0
    return lo, hi


def _float_for_range(lo, hi, exponent, name, qs):
    li = math.floor(lo / 2.0 ** exponent + 1e-9)
    hi_i = math.ceil(hi / 2.0 ** exponent - 1e-9)
    signed = li < 0
    m = 1
    while hi_i >= 2 ** m or (signed and li < -(2 ** m)):
        m += 1
    return QuantumFloat(m, exponent, signed, name=name, qs=qs)


def _constant_units(c, exponent):
    """``c / 2^exponent`` as an exact integer, else a precision-loss error."""
    try:
        s = float(c) / 2.0 ** exponent
    except (TypeError, ValueError):
        raise QuantumArithmeticError(f"{c!r} is not a number") from None
    r = round(s)
    if abs(s - r) > 1e-9:
        raise QuantumArithmeticError(
            f"precision loss: {c!r} is not a multiple of 2^{exponent}")
    return int(r)


def _untouched(qubits):
    """True if no recorded gate has acted non-diagonally on any of ``qubits``."""
    from qforge.uncompute import _split

    qs = set(qubits)
    session = next(iter(qs)).session
    lists = [session.log] + [f.buffer for f in current_stack() if getattr(f, "collects", False)]
    for lst in lists:
        for r in lst:
            if r.kind != "gate" or r.op.is_barrier or not qs.intersection(r.qubits):
                continue
            tg, _ = _split(r)
            if qs.intersection(tg):
                return False
    return True


def _float_terms(dst_exponent, b, sign, ctrls):
    """Terms adding sign * b into a register with exponent ``dst_exponent``."""
    shift = b.exponent - dst_exponent
    bq = list(b.qubits)
    drop = max(0, -shift)
    if drop:
        if not _untouched(bq[:drop]):
            raise QuantumArithmeticError(
                f"precision loss: {b.name} has bits below exponent {dst_exponent}")
        bq = bq[drop:]
    terms = []
    if bq:
        terms.append((tuple(ctrls), bq, sign * 2 ** (shift + drop)))
    if b.signed and drop <= b.msize:
        # two's complement: value = unsigned reading - sign_bit * 2^(msize+1)
        sq = b.qubits[b.msize]
        terms.append((tuple(ctrls) + (sq,), None, -sign * 2 ** (b.msize + 1 + shift)))
    return terms


def _const_terms(dst_exponent, c, sign, ctrls):
    v = _constant_units(c, dst_exponent)
    return [(tuple(ctrls), None, sign * v)] if v else []


@custom_control
def add_in_place(a, b, subtract=False, adder=None, ctrl=None):
    """``a += b`` (or ``a -= b``) modulo the register width of ``a``."""
    if not isinstance(a, QuantumFloat):
        raise TypeError("in-place addition needs a QuantumFloat target")
    sign = -1 if subtract else 1
    ctrls = (ctrl,) if ctrl is not None else ()
    if isinstance(b, QuantumFloat):
        if b is a or set(b.qubits) & set(a.qubits):
            raise QuantumArithmeticError("cannot add a variable to itself in place")
        terms = _float_terms(a.exponent, b, sign, ctrls)
    elif isinstance(b, QuantumVariable):
        raise TypeError(f"cannot add {type(b).__name__} to a QuantumFloat")
    else:
        terms = _const_terms(a.exponent, b, sign, ctrls)
    if terms:
        emit_sum(a.qubits, terms, adder, name="add")


def add(a, b, sign=1, adder=None):
    """Out-of-place ``a + sign*b`` into a fresh QuantumFloat sized to the exact range."""
    lo_a, hi_a = _bounds(a)
    if isinstance(b, QuantumFloat):
        lo_b, hi_b = _bounds(b)
        if sign < 0:
            lo_b, hi_b = -hi_b, -lo_b
        exponent = min(a.exponent, b.exponent)
    elif isinstance(b, QuantumVariable):
        raise TypeError(f"cannot add {type(b).__name__} to a QuantumFloat")
    else:
        c = sign * float(b)
        lo_b = hi_b = c
        exponent = a.exponent
        while abs(c / 2.0 ** exponent - round(c / 2.0 ** exponent)) > 1e-9:
            exponent -= 1
            if exponent < a.exponent - 60:
                raise QuantumArithmeticError(f"{b!r} has no finite binary expansion")
    res = _float_for_range(lo_a + lo_b, hi_a + hi_b, exponent, "add_res", a.qs)
    _add_out_of_place(res, a, b, sign, adder)
    return res


@custom_control
def _add_out_of_place(res, a, b, sign, adder, ctrl=None):
    ctrls = (ctrl,) if ctrl is not None else ()
    terms = _float_terms(res.exponent, a, 1, ctrls)
    if isinstance(b, QuantumFloat):
        terms += _float_terms(res.exponent, b, sign, ctrls)
    else:
        terms += _const_terms(res.exponent, b, sign, ctrls)
    emit_sum(res.qubits, terms, adder, name="add")


def multiply(a, b, adder=None):
    """Schoolbook product into a fresh QuantumFloat.

    The result has ``a.msize + b.msize`` mantissa qubits, exponent
    ``a.exponent + b.exponent`` and a sign qubit if either factor is signed;
    out-of-range products wrap modulo the register width.
    """
    if not isinstance(b, QuantumFloat):
        if isinstance(b, QuantumVariable):
            raise TypeError(f"cannot multiply a QuantumFloat by {type(b).__name__}")
        return _multiply_constant(a, b, adder)
    res = QuantumFloat(a.msize + b.msize, a.exponent + b.exponent,
                       a.signed or b.signed, name="mul_res", qs=a.qs)
    _multiply_into(res, a, b, adder)
    return res


@custom_control
def _multiply_into(res, a, b, adder, ctrl=None):
    ctrls = (ctrl,) if ctrl is not None else ()
    aq, bq = list(a.qubits), list(b.qubits)
    terms = [(ctrls + (q,), bq, 2 ** i) for i, q in enumerate(aq)]
    if a.signed:
        terms.append((ctrls + (aq[a.msize],), bq, -(2 ** (a.msize + 1))))
    if b.signed:
        terms.append((ctrls + (bq[b.msize],), aq, -(2 ** (b.msize + 1))))
    emit_sum(res.qubits, terms, adder, name="mul")


def _multiply_constant(a, c, adder=None):
    c = float(c)
    lo, hi = _bounds(a)
    lo, hi = sorted((lo * c, hi * c))
    exponent = a.exponent
    k = c
    while abs(k - round(k)) > 1e-9:
        k *= 2
        exponent -= 1
        if exponent < a.exponent - 60:
            raise QuantumArithmeticError(f"{c!r} has no finite binary expansion")
    res = _float_for_range(lo, hi, exponent, "mul_res", a.qs)
    _multiply_constant_into(res, a, int(round(k)), adder)
    return res


@custom_control
def _multiply_constant_into(res, a, k, adder, ctrl=None):
    # res = k * a with a read as unsigned, corrected for its sign bit
    ctrls = (ctrl,) if ctrl is not None else ()
    # res.exponent was lowered until k became an integer, so weights are exact
    terms = [(ctrls + (q,), None, k * 2 ** i) for i, q in enumerate(a.qubits)]
    if a.signed:
        terms.append((ctrls + (a.qubits[a.msize],), None, -k * 2 ** (a.msize + 1)))
    emit_sum(res.qubits, terms, adder, name="mul_const")


# comparisons


def eq_constant(var, c):
    """Fresh QuantumBool that is true exactly on the branches where ``var == c``."""
    res = QuantumBool(name="eq_qbl", qs=var.qs)
    res._auto_condition = True
    try:
        idx = var.encoder(c)
    except EncodingError:
        return res
    state = "".join(str((idx >> j) & 1) for j in range(var.size))
    mcx(var.qubits, res, ctrl_state=state)
    return res


def _int_threshold(qf, c, kind):
    """Integer t with (value < c) <=> (units < t) for kind lt, similarly le."""
    units = float(c) / 2.0 ** qf.exponent
    if kind == "lt":
        return math.ceil(units - 1e-9)
    return math.floor(units + 1e-9) + 1


def compare(var, c, kind):
    """QuantumBool for ``var <kind> c`` with a classical constant ``c``."""
    if isinstance(c, QuantumVariable):
        raise TypeError("comparisons are supported against classical constants only")
    if kind == "eq":
        return eq_constant(var, c)
    if kind == "ne":
        res = eq_constant(var, c)
        x(res)
        return res
    if kind not in ("lt", "le", "gt", "ge"):
        raise ValueError(f"unknown comparison {kind}")
    base = {"lt": "lt", "ge": "lt", "le": "le", "gt": "le"}[kind]
    negate = kind in ("gt", "ge")
    res = QuantumBool(name=f"{kind}_qbl", qs=var.qs)
    res._auto_condition = True
    if isinstance(var, QuantumFloat):
        t = _int_threshold(var, c, base)
        offset = 2 ** var.msize if var.signed else 0
    else:
        t = int(math.ceil(float(c))) if base == "lt" else int(math.floor(float(c))) + 1
        offset = 0
    t += offset
    if t >= 2 ** var.size:
        x(res)
    elif t > 0:
        sign_q = var.qubits[var.msize] if isinstance(var, QuantumFloat) and var.signed else None
        less_than(var.qubits, t, res.qubits[0], sign_q)
    if negate:
        x(res)
    return res


@custom_control
def less_than(qubits, t, target, flip=None, adder=None, ctrl=None):
    """target ^= (unsigned value of ``qubits`` < t), for 0 <= t <= 2^len.

    ``flip`` names a qubit to X-conjugate (the sign bit of a signed float,
    turning two's complement into offset binary).
    """
    qubits = list(qubits)
    ctrls = (ctrl,) if ctrl is not None else ()

    def build(b, mod_loc, oth_loc):
        tgt = mod_loc[0]
        reg = oth_loc[: len(qubits)]
        cl = tuple(oth_loc[len(qubits):])
        fl = reg[qubits.index(flip)] if flip is not None else None
        if fl is not None:
            b.qc.x(fl)
        # (reg, target) -= t over n+1 bits leaves the borrow in target
        _sum_into(b, reg + [tgt], [(cl, None, -t)], adder)
        _sum_into(b, reg, [(cl, None, t)], adder)
        if fl is not None:
            b.qc.x(fl)
        return None

    _emit_block("less_than", [target], qubits + list(ctrls), build)


# modular arithmetic


def _mod_add_build(b, x_loc, ctrl_loc, c, modulus, adder):
    """x += c mod N on builder locals, controlled on all of ``ctrl_loc``."""
    top = b.anc("top", 1)[0]
    ctrls = tuple(ctrl_loc)

    def sub(sb, loc):
        xs, tp, cl = loc[: len(x_loc)], loc[len(x_loc)], tuple(loc[len(x_loc) + 1:])
        _sum_into(sb, xs + [tp], [(cl, None, c), ((), None, -modulus)], adder)
        _sum_into(sb, xs, [((tp,), None, modulus)], adder)
        # top is set iff the result is >= c; clear it with a comparison
        _sum_into(sb, xs + [tp], [(cl, None, -c)], adder)
        _sum_into(sb, xs, [(cl, None, c)], adder)
        sb.qc.x(tp)
        return set(xs) | {tp}, None

    _sub_block(b, list(x_loc) + [top] + list(ctrls), "mod_add", sub)


@custom_control
def mod_add_constant(qm, c, adder=None, ctrl=None):
    """``qm <- (qm + c) mod N`` for a QuantumModulus holding a valid residue."""
    if not isinstance(qm, QuantumModulus):
        raise TypeError("modular addition needs a QuantumModulus")
    c = int(c)
    n_mod = qm.modulus
    if not 0 <= c < n_mod:
        raise QuantumArithmeticError(f"constant {c} out of range for modulus {n_mod}")
    if c == 0:
        return
    ctrls = [ctrl] if ctrl is not None else []

    def build(b, mod_loc, oth_loc):
        _mod_add_build(b, mod_loc, oth_loc, c, n_mod, adder)
        return None

    _emit_block("mod_add", qm.qubits, ctrls, build)


@custom_control
def mod_mul_constant_inplace(qm, a, adder=None, ctrl=None):
    """``qm <- a * qm mod N`` by double-and-add into a scratch register and a swap."""
    if not isinstance(qm, QuantumModulus):
        raise TypeError("modular multiplication needs a QuantumModulus")
    n_mod = qm.modulus
    a = int(a) % n_mod
    if math.gcd(a, n_mod) != 1:
        raise QuantumArithmeticError(f"{a} is not invertible modulo {n_mod}")
    if a == 1:
        return
    a_inv = pow(a, -1, n_mod)
    n = qm.size
    ctrls = [ctrl] if ctrl is not None else []

    def build(b, mod_loc, oth_loc):
        xs = mod_loc
        cl = list(oth_loc)
        t = b.anc("t", n)
        for j in range(n):
            cj = (2 ** j * a) % n_mod
            if cj:
                _mod_add_build(b, t, cl + [xs[j]], cj, n_mod, adder)
        for k in range(n):
            if cl:
                b.qc.cx(t[k], xs[k])
                b.qc.mcx(cl + [xs[k]], t[k])
                b.qc.cx(t[k], xs[k])
            else:
                b.qc.swap(xs[k], t[k])
        for j in range(n):
            cj = (2 ** j * a_inv) % n_mod
            if cj:
                _mod_add_build(b, t, cl + [xs[j]], (n_mod - cj) % n_mod, n_mod, adder)
        return None

    _emit_block("mod_mul", qm.qubits, ctrls, build)


__all__ = [
    "AdderKind",
    "QFT",
    "QuantumArithmeticError",
    "add",
    "add_in_place",
    "adder_kind",
    "compare",
    "default_adder",
    "emit_sum",
    "eq_constant",
    "less_than",
    "mod_add_constant",
    "mod_mul_constant_inplace",
    "multiply",
    "qft",
    "qft_circuit",
    "set_default_adder",
]
