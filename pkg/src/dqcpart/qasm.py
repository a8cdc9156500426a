"""Reader for the OpenQASM 2.0 subset used by the benchmark circuits."""
from __future__ import annotations

import ast
import math
import operator
import re

from .circuit import Gate
from .errors import MalformedProgram, MultipleQuantumRegisters, UnsupportedGate

# name -> (number of params, number of qubits)
SUPPORTED = {
    "h": (0, 1), "x": (0, 1), "y": (0, 1), "z": (0, 1),
    "s": (0, 1), "sdg": (0, 1), "t": (0, 1), "tdg": (0, 1),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1),
    "u1": (1, 1), "p": (1, 1), "u2": (2, 1), "u3": (3, 1), "u": (3, 1),
    "cx": (0, 2), "cz": (0, 2), "cp": (1, 2), "cu1": (1, 2), "swap": (0, 2),
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}

_STMT = re.compile(r"^([a-zA-Z_][\w]*)\s*(?:\((.*)\))?\s*(.*)$", re.DOTALL)
_ARG = re.compile(r"^([a-zA-Z_]\w*)\s*(?:\[\s*(\d+)\s*\])?$")


def _eval(expr: str, line: int) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError
    try:
        return ev(ast.parse(expr.strip().replace("^", "**"), mode="eval"))
    except (ValueError, SyntaxError, ZeroDivisionError):
        raise MalformedProgram(line, f"bad parameter expression {expr!r}") from None


def _split_args(text: str) -> list[str]:
    return [a.strip() for a in text.split(",") if a.strip()]


def _statements(text: str):
    """Yield (line_number, statement) pairs, stripping comments."""
    buf, start = [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0]
        for ch in line:
            if start is None and not ch.isspace():
                start = lineno
            if ch == ";":
                yield start, "".join(buf).strip()
                buf, start = [], None
            else:
                buf.append(ch)
        buf.append(" ")
    if "".join(buf).strip():
        raise MalformedProgram(start or 0, "missing ';'")


def parse_qasm(text: str) -> tuple[list[Gate], int]:
    """Parse OpenQASM 2.0 text into a flat gate list and the qubit count.

    Gate names are kept as written (``h``, ``cx``, ...); :func:`transpile_to_ucp`
    maps them into the U/CP basis. ``measure`` and ``barrier`` survive as markers.
    """
    qreg: tuple[str, int] | None = None
    cregs: dict[str, int] = {}
    gates: list[Gate] = []

    def resolve(arg: str, line: int) -> list[int]:
        m = _ARG.match(arg)
        if not m or qreg is None or m.group(1) != qreg[0]:
            raise MalformedProgram(line, f"unknown quantum argument {arg!r}")
        if m.group(2) is None:
            return list(range(qreg[1]))
        idx = int(m.group(2))
        if idx >= qreg[1]:
            raise MalformedProgram(line, f"index out of range in {arg!r}")
        return [idx]

    for line, stmt in _statements(text):
        if not stmt:
            continue
        low = stmt.split(None, 1)[0]
        if low in ("OPENQASM", "include"):
            continue
        if low == "qreg":
            m = re.match(r"qreg\s+(\w+)\s*\[\s*(\d+)\s*\]$", stmt)
            if not m:
                raise MalformedProgram(line)
            if qreg is not None:
                raise MultipleQuantumRegisters(f"second qreg {m.group(1)!r} at line {line}")
            qreg = (m.group(1), int(m.group(2)))
            continue
        if low == "creg":
            m = re.match(r"creg\s+(\w+)\s*\[\s*(\d+)\s*\]$", stmt)
            if not m:
                raise MalformedProgram(line)
            cregs[m.group(1)] = int(m.group(2))
            continue
        if low == "measure":
            m = re.match(r"measure\s+(.+?)\s*->\s*(.+)$", stmt)
            if not m:
                raise MalformedProgram(line)
            for q in resolve(m.group(1), line):
                gates.append(Gate("measure", (q,)))
            continue
        if low == "barrier":
            qs: list[int] = []
            for a in _split_args(stmt[len("barrier"):]):
                qs.extend(resolve(a, line))
            gates.append(Gate("barrier", tuple(dict.fromkeys(qs))))
            continue

        m = _STMT.match(stmt)
        if not m:
            raise MalformedProgram(line)
        name, ptext, atext = m.group(1), m.group(2), m.group(3)
        if name not in SUPPORTED:
            raise UnsupportedGate(name, line)
        nparams, nqubits = SUPPORTED[name]
        params = tuple(_eval(p, line) for p in _split_args(ptext)) if ptext else ()
        if len(params) != nparams:
            raise MalformedProgram(line, f"{name} expects {nparams} parameters")
        args = [resolve(a, line) for a in _split_args(atext)]
        if len(args) != nqubits:
            raise MalformedProgram(line, f"{name} expects {nqubits} qubit arguments")
        if qreg is None:
            raise MalformedProgram(line, "gate before qreg")
        if nqubits == 1:
            for q in args[0]:
                gates.append(Gate(name, (q,), params))
        else:
            a, b = args
            if len(a) != 1 or len(b) != 1 or a[0] == b[0]:
                raise MalformedProgram(line, f"bad operands for {name}")
            gates.append(Gate(name, (a[0], b[0]), params))
    if qreg is None:
        raise MalformedProgram(0, "no qreg declared")
    return gates, qreg[1]
