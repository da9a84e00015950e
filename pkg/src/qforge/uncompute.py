"""Automatic uncomputation.

``uncompute(var)`` finds every recorded gate that acts non-diagonally on the
variable (its *contributors*) and appends their inverses in reverse order.
Gates that use the variable only diagonally, such as a phase flip on an
oracle bit, are skipped so their phase kickback survives.

Contributors may be controlled on helper qubits that have since been
released (control accumulators, ancillae of deleted variables). Such
*temporaries* are re-allocated and recomputed around the inverse sequence,
which is found as a fixed point over the dependency structure.

The pass is deliberately conservative: it refuses any case where its inverse
sequence could differ from the true uncomputation.
"""

from __future__ import annotations

import functools

from qforge.session import Rec, SessionError


class UncomputeError(SessionError):
    pass


def is_qfree(op):
    """True if ``op`` maps basis states to basis states up to phase."""
    return op.qfree


def _split(rec):
    """(target qubits, control qubits) of a gate record."""
    if rec.op.is_measurement:
        return list(rec.qubits), []
    perm = rec.op.permeability
    tg, ct = [], []
    for j, q in enumerate(rec.qubits):
        (ct if perm[j] else tg).append(q)
    return tg, ct


def uncompute(var):
    """Return ``var`` to |0> by inverting its computation, then deallocate it."""
    from qforge.environments import InversionFrame, current_stack, emit

    if var.is_deleted:
        raise UncomputeError(f"variable {var.name} is already deleted")
    session = var.qs
    stack = current_stack()
    lists = [session.log] + [f.buffer for f in stack if getattr(f, "collects", False)]
    recs = [r for lst in lists for r in lst]
    vq = set(var.qubits)

    alloc_pos = [i for i, r in enumerate(recs) if r.kind == "alloc" and r.qubits[0] in vq]
    if not alloc_pos:
        raise UncomputeError(f"allocation of {var.name} not found")
    inversions = [f for f in stack if isinstance(f, InversionFrame)]
    if inversions:
        inner_start = len(recs) - len(inversions[-1].buffer)
        if min(alloc_pos) < inner_start:
            raise UncomputeError(
                f"cannot uncompute {var.name} inside an inversion it was not created in")
    start = min(alloc_pos)

    # per-qubit alloc/dealloc positions, to locate temporaries' live segments
    allocs, deallocs = {}, {}
    for i, r in enumerate(recs):
        if r.kind == "alloc":
            allocs.setdefault(r.qubits[0], []).append(i)
        elif r.kind == "dealloc":
            deallocs.setdefault(r.qubits[0], []).append(i)

    def segment(q, i):
        a = max((p for p in allocs.get(q, ()) if p <= i), default=None)
        if a is None:
            raise UncomputeError(f"qubit {q.label} used before allocation")
        d = min((p for p in deallocs.get(q, ()) if p > a), default=len(recs))
        return a, d

    splits = {}

    def split_at(i):
        if i not in splits:
            splits[i] = _split(recs[i])
        return splits[i]

    selected = set()
    seg_of = {}  # (qubit, seg start) -> seg end, for temporaries
    work = [(q, start, len(recs)) for q in vq]
    seen = set()
    while work:
        q, a, d = work.pop()
        if (q, a) in seen:
            continue
        seen.add((q, a))
        for i in range(a + 1, d):
            r = recs[i]
            if r.kind != "gate" or r.op.is_barrier or q not in r.qubits:
                continue
            tg, ct = split_at(i)
            if q not in tg:
                continue
            if i in selected:
                continue
            selected.add(i)
            if not r.op.qfree:
                raise UncomputeError(
                    f"not uncomputable: gate {r.op.name} creates superposition")
            for other in tg + ct:
                if other in vq:
                    continue
                if other.live:
                    if other in tg:
                        raise UncomputeError(
                            f"not uncomputable: gate {r.op.name} also modifies {other.label}")
                    continue
                sa, sd = segment(other, i)
                seg_of[(other, sa)] = sd
                work.append((other, sa, sd))

    order = sorted(selected)
    tracked = set(vq) | {q for q, _ in seg_of}

    # stale controls: a later unselected gate must not modify a recorded control
    last_mod = {}
    for i in range(len(recs)):
        r = recs[i]
        if r.kind != "gate" or r.op.is_barrier or i in selected:
            continue
        tg, _ = split_at(i)
        for q in tg:
            last_mod[q] = i
    for i in order:
        _, ct = split_at(i)
        for c in ct:
            if c in tracked:
                continue
            if last_mod.get(c, -1) > i:
                raise UncomputeError(
                    f"control value changed after computation: {c.label} in {recs[i].op.name}")

    # emit: temporaries are re-allocated around their recomputed segment
    bypass = frozenset(f.id for f in stack)
    first_in_seg = {}
    for i in order:
        for q in recs[i].qubits:
            if q in vq or q.live:
                continue
            key = (q, segment(q, i)[0])
            first_in_seg[key] = min(first_in_seg.get(key, i), i)
    out, open_temps = [], set()
    for i in reversed(order):
        r = recs[i]
        temps = [(q, segment(q, i)[0]) for q in r.qubits if q not in vq and not q.live]
        for key in temps:
            if key not in open_temps:
                open_temps.add(key)
                out.append(Rec("alloc", qubits=(key[0],)))
        out.append(Rec("gate", r.op.inverse(), r.qubits, covered=bypass))
        for key in temps:
            if first_in_seg[key] == i:
                open_temps.discard(key)
                out.append(Rec("dealloc", qubits=(key[0],)))
    for rec in out:
        emit(rec)
    session.dealloc(var.qubits)
    var._deleted = True


# scoped auto-uncomputation

_SCOPES = []


def note_creation(var):
    for scope in _SCOPES:
        scope.append(var)


def _returned(result):
    out = set()
    stack = [result]
    while stack:
        item = stack.pop()
        if isinstance(item, (list, tuple)):
            stack.extend(item)
        elif isinstance(item, dict):
            stack.extend(item.values())
        elif hasattr(item, "qubits") and hasattr(item, "is_deleted"):
            out.add(id(item))
    return out


def auto_uncompute(func):
    """Uncompute every variable created inside ``func`` and not returned by it."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        created = []
        _SCOPES.append(created)
        try:
            result = func(*args, **kwargs)
        finally:
            _SCOPES.pop()
        keep = _returned(result)
        for var in sorted(created, key=lambda v: -v._creation_index):
            if id(var) in keep or var.is_deleted:
                continue
            uncompute(var)
        return result

    return wrapper
