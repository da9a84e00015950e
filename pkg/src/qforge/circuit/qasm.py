"""OpenQASM 2.0 export."""

from __future__ import annotations

import re

import numpy as np

from qforge.circuit.operations import _FIXED, OperationError

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

_DIRECT = {"x", "y", "z", "h", "s", "sdg", "t", "tdg", "cx", "cz", "swap"}
_RENAMED = {"rx": "rx", "ry": "ry", "rz": "rz", "p": "u1", "cp": "cu1"}
_RESERVED = {
    "u3", "u2", "u1", "cx", "id", "u0", "u", "p", "x", "y", "z", "h", "s", "sdg", "t", "tdg",
    "rx", "ry", "rz", "sx", "sxdg", "cz", "cy", "swap", "ch", "ccx", "cswap", "crx", "cry",
    "crz", "cu1", "cp", "cu3", "csx", "cu", "rxx", "rzz", "rccx", "rc3x", "c3x", "c3sqrtx",
    "c4x", "measure", "barrier", "reset", "gate", "opaque", "qreg", "creg", "if", "pi",
    "include", "OPENQASM", "U", "CX", "sin", "cos", "tan", "exp", "ln", "sqrt",
}


def _fmt(theta):
    return format(float(theta), ".17g")


class _Exporter:
    def __init__(self):
        self.decls = []
        self.names = {}
        self.taken = set()
        self._keep = []

    def gate_name(self, op):
        key = id(op.definition)
        if key in self.names:
            return self.names[key]
        base = re.sub(r"[^A-Za-z0-9_]", "_", op.name) or "g"
        if not base[0].isalpha() or not base[0].islower():
            base = "g_" + base
        if base in _RESERVED:
            base = base + "_g"
        name, i = base, 1
        while name in self.taken:
            name = f"{base}_{i}"
            i += 1
        self.taken.add(name)
        self._keep.append(op.definition)
        args = [f"a{j}" for j in range(op.num_qubits)]
        body = []
        for ins in op.definition.data:
            if ins.op.is_measurement:
                raise OperationError("measurement inside a gate definition")
            body.extend(self.statements(ins.op, [args[q] for q in ins.qubits], ()))
        self.names[key] = name
        inner = "".join(f"  {line}\n" for line in body)
        self.decls.append(f"gate {name} {','.join(args)}\n{{\n{inner}}}\n")
        return name

    def statements(self, op, args, cargs):
        from qforge.circuit.mcx import mcx_template

        if op.definition is not None:
            return [f"{self.gate_name(op)} {','.join(args)};"]
        if op.is_measurement:
            return [f"measure {args[0]} -> {cargs[0]};"]
        if op.is_barrier:
            return [f"barrier {','.join(args)};"]
        if op.name in _DIRECT:
            return [f"{op.name} {','.join(args)};"]
        if op.name in _RENAMED:
            return [f"{_RENAMED[op.name]}({_fmt(op.params[0])}) {','.join(args)};"]
        if op.base is not None and np.allclose(op.base, _FIXED["x"]):
            k = op.num_ctrls
            if k == 2 and not op.phase_tolerant:
                return [f"ccx {','.join(args)};"]
            return self._compose(mcx_template(k, 0, 0, op.phase_tolerant and k == 2), args)
        if op.base is not None and np.allclose(op.base, _FIXED["z"]):
            k, t = op.num_ctrls, args[-1]
            return ([f"h {t};"] + self._compose(mcx_template(k, 0, 0), args) + [f"h {t};"])
        raise OperationError(f"gate {op.name} has no OpenQASM 2 form")

    def _compose(self, qc, args):
        lines = []
        for ins in qc.data:
            lines.extend(self.statements(ins.op, [args[q] for q in ins.qubits], ()))
        return lines


def to_qasm(qc):
    """Serialize ``qc`` as OpenQASM 2.0 text (deterministic)."""
    ex = _Exporter()
    body = []
    for ins in qc.data:
        qargs = [f"q[{q}]" for q in ins.qubits]
        cargs = [f"c[{c}]" for c in ins.clbits]
        body.extend(ex.statements(ins.op, qargs, cargs))
    has_measure = any(ins.op.is_measurement for ins in qc.data)
    out = [HEADER]
    out.extend(ex.decls)
    if qc.num_qubits:
        out.append(f"qreg q[{qc.num_qubits}];\n")
    if has_measure:
        out.append(f"creg c[{max(qc.num_clbits, 1)}];\n")
    out.extend(line + "\n" for line in body)
    return "".join(out)


# import

_BUILTIN_PARAM = {"rx": "rx", "ry": "ry", "rz": "rz", "u1": "p", "p": "p", "cu1": "cp", "cp": "cp"}
_STMT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(([^)]*)\))?\s*(.*)$")


class QasmError(ValueError):
    pass


def _eval_param(text):
    """Evaluate an angle expression built from numbers, ``pi`` and + - * /."""
    import ast
    import math

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            a, b = ev(node.left), ev(node.right)
            return {ast.Add: a + b, ast.Sub: a - b, ast.Mult: a * b, ast.Div: a / b if b else math.inf}[
                type(node.op)]
        raise QasmError(f"unsupported angle expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError:
        raise QasmError(f"bad angle expression {text!r}") from None


def from_qasm(text):
    """Parse OpenQASM 2.0 text (the subset written by :func:`to_qasm`)."""
    from qforge.circuit.operations import defined, gate, mcx_op
    from qforge.circuit.quantum_circuit import QuantumCircuit

    text = re.sub(r"//[^\n]*", "", text)
    gates = {}
    qc = None
    regs = {}
    pos = 0

    def resolve(name, params):
        if name in gates:
            return gates[name]
        if name in _BUILTIN_PARAM:
            if len(params) != 1:
                raise QasmError(f"{name} needs one parameter")
            return gate(_BUILTIN_PARAM[name], params[0])
        if name == "ccx":
            return mcx_op(2)
        if name in _DIRECT:
            return gate(name)
        raise QasmError(f"unknown gate {name}")

    def apply_stmt(circ, stmt, arg_index):
        m = _STMT.match(stmt)
        if not m:
            raise QasmError(f"cannot parse {stmt!r}")
        name, ptxt, rest = m.groups()
        if name == "measure":
            q, c = [s.strip() for s in rest.split("->")]
            circ.measure(arg_index(q), arg_index(c, creg=True))
            return
        args = [arg_index(a.strip()) for a in rest.split(",") if a.strip()]
        if name == "barrier":
            circ.barrier(args)
            return
        params = [_eval_param(p) for p in ptxt.split(",")] if ptxt else []
        circ.append(resolve(name, params), args)

    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        if text.startswith("gate", pos) and text[pos + 4].isspace():
            lb = text.index("{", pos)
            rb = text.index("}", lb)
            head = text[pos + 4:lb].split()
            name = head[0]
            formal = [a.strip() for a in "".join(head[1:]).split(",") if a.strip()]
            body = QuantumCircuit(len(formal))

            def formal_index(a, creg=False, formal=formal):
                if a not in formal:
                    raise QasmError(f"unknown gate argument {a}")
                return formal.index(a)

            for stmt in text[lb + 1:rb].split(";"):
                if stmt.strip():
                    apply_stmt(body, stmt.strip(), formal_index)
            gates[name] = defined(name, body)
            pos = rb + 1
            continue
        end = text.index(";", pos)
        stmt = text[pos:end].strip()
        pos = end + 1
        if stmt.startswith("OPENQASM") or stmt.startswith("include"):
            continue
        m = re.match(r"^(qreg|creg)\s+([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$", stmt)
        if m:
            kind, name, size = m.group(1), m.group(2), int(m.group(3))
            regs[name] = (kind, size)
            continue
        if qc is None:
            nq = sum(s for k, s in regs.values() if k == "qreg")
            nc = sum(s for k, s in regs.values() if k == "creg")
            qc = QuantumCircuit(nq, nc)
            offsets, off_q, off_c = {}, 0, 0
            for rname, (kind, size) in regs.items():
                if kind == "qreg":
                    offsets[rname] = off_q
                    off_q += size
                else:
                    offsets[rname] = off_c
                    off_c += size

        def reg_index(a, creg=False):
            m2 = re.match(r"^([A-Za-z_][A-Za-z0-9_]*)\[(\d+)\]$", a)
            if not m2 or m2.group(1) not in regs:
                raise QasmError(f"bad register reference {a}")
            return offsets[m2.group(1)] + int(m2.group(2))

        apply_stmt(qc, stmt, reg_index)
    if qc is None:
        nq = sum(s for k, s in regs.values() if k == "qreg")
        nc = sum(s for k, s in regs.values() if k == "creg")
        qc = QuantumCircuit(nq, nc)
    return qc
