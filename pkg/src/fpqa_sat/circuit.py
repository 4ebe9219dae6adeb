"""Logical gates, circuits and a small dense simulator.

``U3`` here is the Raman rotation triple: rotate about x, then y, then z, so
its matrix is ``Rz(tz) @ Ry(ty) @ Rx(tx)``. Qubit ``i`` is bit ``i`` of a basis
state index (little-endian).
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

U3 = "u3"
RZ = "rz"
RX = "rx"
H = "h"
X = "x"
CZ = "cz"
CCZ = "ccz"
CNOT = "cx"
CCNOT = "ccx"

ARITY = {U3: 1, RZ: 1, RX: 1, H: 1, X: 1, CZ: 2, CNOT: 2, CCZ: 3, CCNOT: 3}
NUM_PARAMS = {U3: 3, RZ: 1, RX: 1}
NATIVE_KINDS = frozenset({U3, CZ, CCZ})
SYMMETRIC_KINDS = frozenset({CZ, CCZ})

# Raman triples equal to the named gates up to global phase.
H_ANGLES = (0.0, -math.pi / 2, math.pi)
X_ANGLES = (math.pi, 0.0, 0.0)


@dataclass(frozen=True)
class LogicalGate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        if len(qubits) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {ARITY[self.kind]} qubit(s), got {len(qubits)}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{self.kind} qubits must be distinct: {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError(f"negative qubit index in {qubits}")
        params = tuple(float(p) for p in self.params)
        if len(params) != NUM_PARAMS.get(self.kind, 0):
            raise ValueError(f"{self.kind} takes {NUM_PARAMS.get(self.kind, 0)} parameter(s), got {len(params)}")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "params", params)

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def canonical(self) -> LogicalGate:
        """Same gate with symmetric-gate qubits sorted."""
        if self.kind in SYMMETRIC_KINDS:
            return LogicalGate(self.kind, tuple(sorted(self.qubits)), self.params)
        return self

    def __str__(self) -> str:
        args = f"({', '.join(f'{p:.6f}' for p in self.params)})" if self.params else ""
        return f"{self.kind}{args} {' '.join(f'q{q}' for q in self.qubits)}"


def u3(q: int, tx: float, ty: float, tz: float) -> LogicalGate:
    return LogicalGate(U3, (q,), (tx, ty, tz))


def rz(q: int, angle: float) -> LogicalGate:
    return LogicalGate(RZ, (q,), (angle,))


def rx(q: int, angle: float) -> LogicalGate:
    return LogicalGate(RX, (q,), (angle,))


def h(q: int) -> LogicalGate:
    return LogicalGate(H, (q,))


def x(q: int) -> LogicalGate:
    return LogicalGate(X, (q,))


def cz(a: int, b: int) -> LogicalGate:
    return LogicalGate(CZ, (a, b))


def ccz(a: int, b: int, c: int) -> LogicalGate:
    return LogicalGate(CCZ, (a, b, c))


def cnot(control: int, target: int) -> LogicalGate:
    return LogicalGate(CNOT, (control, target))


def ccnot(c0: int, c1: int, target: int) -> LogicalGate:
    return LogicalGate(CCNOT, (c0, c1, target))


@dataclass(frozen=True)
class LogicalCircuit:
    num_qubits: int
    gates: tuple[LogicalGate, ...] = field(default=())

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if any(q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {g} exceeds num_qubits={self.num_qubits}")
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def extended(self, gates: Iterable[LogicalGate]) -> LogicalCircuit:
        return LogicalCircuit(self.num_qubits, self.gates + tuple(gates))


# --- matrices -------------------------------------------------------------


def rx_matrix(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(a: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def u3_matrix(tx: float, ty: float, tz: float) -> np.ndarray:
    return rz_matrix(tz) @ ry_matrix(ty) @ rx_matrix(tx)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def gate_matrix(gate: LogicalGate) -> np.ndarray:
    """Matrix of ``gate`` on its own qubits; row index bit ``k`` is ``gate.qubits[k]``."""
    k = gate.kind
    if k == U3:
        return u3_matrix(*gate.params)
    if k == RZ:
        return rz_matrix(gate.params[0])
    if k == RX:
        return rx_matrix(gate.params[0])
    if k == H:
        return _H.copy()
    if k == X:
        return _X.copy()
    if k == CZ:
        return np.diag([1, 1, 1, -1]).astype(complex)
    if k == CCZ:
        d = np.ones(8, dtype=complex)
        d[7] = -1
        return np.diag(d)
    if k in (CNOT, CCNOT):
        n = ARITY[k]
        dim = 1 << n
        m = np.zeros((dim, dim), dtype=complex)
        ctrl_mask = (1 << (n - 1)) - 1  # controls are the low bits
        for i in range(dim):
            j = i ^ (1 << (n - 1)) if (i & ctrl_mask) == ctrl_mask else i
            m[j, i] = 1
        return m
    raise ValueError(k)


def _apply(tensor: np.ndarray, gate: LogicalGate, n: int) -> np.ndarray:
    # tensor axes: axis (n - 1 - q) is qubit q so that a C-order flatten is little-endian.
    k = gate.num_qubits
    m = gate_matrix(gate).reshape((2,) * (2 * k))
    # matrix axes are big-endian in its own qubit list: axis 0 is the highest bit.
    out_axes = [n - 1 - q for q in reversed(gate.qubits)]
    moved = np.tensordot(m, tensor, axes=(list(range(k, 2 * k)), out_axes))
    return np.moveaxis(moved, list(range(k)), out_axes)


def _axis_index(n: int, extra: int, fixed: dict[int, int]) -> tuple:
    idx = [slice(None)] * (n + extra)
    for q, bit in fixed.items():
        idx[n - 1 - q] = bit
    return tuple(idx)


def _evolve(tensor: np.ndarray, gates: Sequence[LogicalGate], n: int, extra: int) -> np.ndarray:
    """Apply ``gates`` to a tensor whose leading ``n`` axes are qubits.

    Runs of single-qubit gates on one qubit are multiplied into one 2x2
    matrix first, and CZ/CCZ become sign flips on a tensor slice.
    """
    pending: dict[int, np.ndarray] = {}
    shape = tensor.shape

    def flush(q: int) -> None:
        nonlocal tensor
        m = pending.pop(q, None)
        if m is None:
            return
        lead = 1 << (n - 1 - q)
        tensor = np.matmul(m, tensor.reshape(lead, 2, -1)).reshape(shape)

    for g in gates:
        if g.num_qubits == 1:
            q = g.qubits[0]
            m = gate_matrix(g)
            pending[q] = m @ pending[q] if q in pending else m
            continue
        for q in g.qubits:
            flush(q)
        if g.kind in (CZ, CCZ):
            tensor[_axis_index(n, extra, {q: 1 for q in g.qubits})] *= -1
        else:
            tensor = np.ascontiguousarray(_apply(tensor, g, n))
    for q in list(pending):
        flush(q)
    return tensor


def circuit_unitary(circuit: LogicalCircuit | Sequence[LogicalGate], num_qubits: int | None = None) -> np.ndarray:
    if isinstance(circuit, LogicalCircuit):
        n, gates = circuit.num_qubits, circuit.gates
    else:
        gates = tuple(circuit)
        n = num_qubits if num_qubits is not None else max((max(g.qubits) for g in gates), default=-1) + 1
    dim = 1 << n
    tensor = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    return _evolve(tensor, gates, n, 1).reshape(dim, dim)


def apply_to_state(circuit: LogicalCircuit, state: np.ndarray) -> np.ndarray:
    n = circuit.num_qubits
    tensor = np.array(state, dtype=complex).reshape((2,) * n)
    return _evolve(tensor, circuit.gates, n, 0).reshape(-1)


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max-abs entry difference between ``a`` and ``b`` after removing global phase.

    The phase is fixed by the largest-magnitude entry of ``a`` (the first
    nonzero one for permutation-like unitaries).
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    flat_a, flat_b = a.reshape(-1), b.reshape(-1)
    idx = int(np.argmax(np.abs(flat_a) > 1e-12 * max(1.0, np.abs(flat_a).max()))) if flat_a.size else 0
    if flat_a.size == 0 or abs(flat_a[idx]) < 1e-12 or abs(flat_b[idx]) < 1e-12:
        return float(np.abs(flat_a - flat_b).max(initial=0.0))
    phase = (flat_b[idx] / abs(flat_b[idx])) / (flat_a[idx] / abs(flat_a[idx]))
    return float(np.abs(flat_a * phase - flat_b).max())


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    return phase_aligned_distance(a, b) <= atol
