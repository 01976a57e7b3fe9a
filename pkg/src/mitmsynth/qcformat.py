"""Line-oriented circuit text format.

    # comment
    qubits 3
    ancillas 1        (optional; ancillas are the last wires)
    H 0
    CNOT 0 2
    T 1

Gate lines are scheduled ASAP on parse, so layering in the input is
implied by wire dependencies.  Emitted text groups layers with
`-- layer d` comment lines; both `#` and `--` start comments.
"""

from __future__ import annotations

from .gates import Circuit, NAME_CODES, layer_gates, schedule


class CircuitFormatError(ValueError):
    pass


def parse_circuit(text: str) -> Circuit:
    n_qubits = None
    n_ancillas = 0
    gate_list: list[tuple[str, tuple[int, ...]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if line.lstrip().startswith("--"):
            line = ""
        tokens = line.split()
        if not tokens:
            continue
        head = tokens[0].upper()
        try:
            if head == "QUBITS":
                if n_qubits is not None:
                    raise CircuitFormatError(f"line {lineno}: duplicate qubits header")
                n_qubits = int(tokens[1])
                if n_qubits < 1:
                    raise CircuitFormatError(f"line {lineno}: need at least one qubit")
            elif head == "ANCILLAS":
                n_ancillas = int(tokens[1])
            elif head == "CNOT":
                gate_list.append(("CNOT", (int(tokens[1]), int(tokens[2]))))
            elif head in NAME_CODES:
                gate_list.append((head, (int(tokens[1]),)))
            else:
                raise CircuitFormatError(f"line {lineno}: unknown gate {tokens[0]!r}")
        except (IndexError, ValueError) as e:
            if isinstance(e, CircuitFormatError):
                raise
            raise CircuitFormatError(f"line {lineno}: malformed line {raw!r}") from None
    if n_qubits is None:
        raise CircuitFormatError("missing 'qubits N' header")
    if not 0 <= n_ancillas <= n_qubits:
        raise CircuitFormatError("ancilla count out of range")
    try:
        return schedule(n_qubits, gate_list, n_ancillas=n_ancillas)
    except ValueError as e:
        raise CircuitFormatError(str(e)) from None


def emit_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    if c.n_ancillas:
        lines.append(f"ancillas {c.n_ancillas}")
    for d, layer in enumerate(c.layers, start=1):
        lines.append(f"-- layer {d}")
        for name, wires in layer_gates(layer):
            lines.append(f"{name} {' '.join(str(w) for w in wires)}")
    return "\n".join(lines) + "\n"
