"""Independent reference implementations used only by the tests.

Nothing here imports the simulator or device code under test; matrices are
built entry by entry and atom geometry is tracked with plain dicts.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import math

import numpy as np

# --- naive gate matrices -----------------------------------------------------------------


def _single(kind: str, params) -> np.ndarray:
    if kind == "u3":
        tx, ty, tz = params
        rxm = np.array([[math.cos(tx / 2), -1j * math.sin(tx / 2)], [-1j * math.sin(tx / 2), math.cos(tx / 2)]])
        rym = np.array([[math.cos(ty / 2), -math.sin(ty / 2)], [math.sin(ty / 2), math.cos(ty / 2)]])
        rzm = np.array([[cmath.exp(-1j * tz / 2), 0], [0, cmath.exp(1j * tz / 2)]])
        return rzm @ rym @ rxm
    if kind == "rz":
        a = params[0]
        return np.array([[cmath.exp(-1j * a / 2), 0], [0, cmath.exp(1j * a / 2)]])
    if kind == "rx":
        a = params[0]
        return np.array([[math.cos(a / 2), -1j * math.sin(a / 2)], [-1j * math.sin(a / 2), math.cos(a / 2)]])
    if kind == "h":
        return np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    if kind == "x":
        return np.array([[0, 1], [1, 0]])
    raise ValueError(kind)


@functools.lru_cache(maxsize=65536)
def naive_gate_unitary(kind: str, qubits, params, n: int) -> np.ndarray:
    """Full 2^n matrix, basis index bit q = qubit q, filled one column at a time."""
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> q) & 1 for q in range(n)]
        if len(qubits) == 1:
            q = qubits[0]
            m = _single(kind, params)
            for out_bit in (0, 1):
                nb = list(bits)
                nb[q] = out_bit
                row = sum(b << i for i, b in enumerate(nb))
                u[row, col] += m[out_bit, bits[q]]
            continue
        on = all(bits[q] for q in qubits)
        if kind in ("cz", "ccz"):
            u[col, col] = -1 if on else 1
        elif kind in ("cx", "ccx"):
            ctrl = all(bits[q] for q in qubits[:-1])
            nb = list(bits)
            if ctrl:
                nb[qubits[-1]] ^= 1
            u[sum(b << i for i, b in enumerate(nb)), col] = 1
        else:
            raise ValueError(kind)
    return u


def naive_unitary(gates, n: int) -> np.ndarray:
    u = np.eye(1 << n, dtype=complex)
    for kind, qubits, params in gates:
        u = naive_gate_unitary(kind, tuple(qubits), tuple(params), n) @ u
    return u


def same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    k = int(np.argmax(np.abs(a)))
    if abs(b.flat[k]) < 1e-12:
        return False
    phase = b.flat[k] / a.flat[k]
    return bool(np.abs(a * phase - b).max() < tol)


def gate_tuples(circuit) -> list[tuple]:
    return [(g.kind, g.qubits, g.params) for g in circuit.gates]


# --- naive shuttle batching -----------------------------------------------------------------


def minimal_batches_bruteforce(current, target) -> int:
    """Fewest groups such that each group keeps its relative order (exhaustive search)."""
    rank = {a: i for i, a in enumerate(current)}
    atoms = list(target)
    n = len(atoms)

    best = n

    # place atoms in target order; each joins an existing group whose last atom is left of it, or opens one
    def search(i, groups):
        nonlocal best
        if len(groups) >= best:
            return
        if i == n:
            best = len(groups)
            return
        a = atoms[i]
        for g in groups:
            if rank[g[-1]] < rank[a]:
                g.append(a)
                search(i + 1, groups)
                g.pop()
        groups.append([a])
        search(i + 1, groups)
        groups.pop()

    search(0, [])
    return best


def batches_valid(current, target, batches) -> bool:
    rank = {a: i for i, a in enumerate(current)}
    tpos = {a: i for i, a in enumerate(target)}
    flat = [a for b in batches for a in b]
    if sorted(flat, key=str) != sorted(target, key=str):
        return False
    for b in batches:
        for x, y in itertools.combinations(b, 2):
            if (rank[x] < rank[y]) != (tpos[x] < tpos[y]):
                return False
    return True


# --- naive chromatic number -------------------------------------------------------------------


def chromatic_number(adjacency) -> int:
    n = len(adjacency)
    if n == 0:
        return 0
    for k in range(1, n + 1):
        for colors in itertools.product(range(k), repeat=n):
            if all(colors[i] != colors[j] for i in range(n) for j in adjacency[i]):
                return k
    return n


# --- naive device replay for the mutation oracle ----------------------------------------------


class NaiveDeviceError(Exception):
    pass


def naive_pulse_gates(annotations, rydberg_distance=10.0, dmin=5.0, transfer_max=2.0, eq_tol=0.01):
    """Replay annotations with dict bookkeeping; return pulse gates as (kind, qubits, params).

    Raises NaiveDeviceError on any constraint violation or invalid interaction.
    """
    slm: list[tuple[float, float]] = []
    cols: list[float] = []
    rows: list[float] = []
    where: dict[int, tuple] = {}  # qubit -> ("slm", i) | ("aod", row, col)
    gates = []

    def pos(q):
        w = where[q]
        return slm[w[1]] if w[0] == "slm" else (cols[w[2]], rows[w[1]])

    def check_atoms():
        qs = list(where)
        for a, b in itertools.combinations(qs, 2):
            if math.dist(pos(a), pos(b)) < dmin - 1e-9:
                raise NaiveDeviceError("atoms too close")

    def occupant(key):
        for q, w in where.items():
            if w == key:
                return q
        return None

    for a in annotations:
        name = type(a).__name__
        if name == "SlmInit":
            slm = list(a.positions)
        elif name == "AodInit":
            cols, rows = list(a.xs), list(a.ys)
        elif name == "Bind":
            key = ("slm", a.trap.index) if type(a.trap).__name__ == "SlmTrap" else ("aod", a.trap.row, a.trap.col)
            if a.qubit in where or occupant(key) is not None:
                raise NaiveDeviceError("bind conflict")
            if key[0] == "slm" and key[1] >= len(slm):
                raise NaiveDeviceError("no such trap")
            if key[0] == "aod" and (key[1] >= len(rows) or key[2] >= len(cols)):
                raise NaiveDeviceError("no such trap")
            where[a.qubit] = key
            check_atoms()
        elif name == "Transfer":
            if a.slm_index >= len(slm) or a.row >= len(rows) or a.col >= len(cols):
                raise NaiveDeviceError("no such trap")
            s_key, a_key = ("slm", a.slm_index), ("aod", a.row, a.col)
            if math.dist(slm[a.slm_index], (cols[a.col], rows[a.row])) > transfer_max + 1e-9:
                raise NaiveDeviceError("transfer too far")
            qs, qa = occupant(s_key), occupant(a_key)
            if (qs is None) == (qa is None):
                raise NaiveDeviceError("transfer needs exactly one atom")
            if qs is not None:
                where[qs] = a_key
            else:
                where[qa] = s_key
            check_atoms()
        elif name == "Shuttle":
            line = rows if a.axis == "row" else cols
            if a.index >= len(line):
                raise NaiveDeviceError("no such line")
            line[a.index] += a.offset
            for u, v in zip(line, line[1:]):
                if v - u < dmin - 1e-9:
                    raise NaiveDeviceError("lines cross or too close")
            check_atoms()
        elif name == "RamanLocal":
            if a.qubit not in where:
                raise NaiveDeviceError("unbound qubit")
            gates.append(("u3", (a.qubit,), (a.tx, a.ty, a.tz)))
        elif name == "RamanGlobal":
            for q in sorted(where):
                gates.append(("u3", (q,), (a.tx, a.ty, a.tz)))
        elif name == "Rydberg":
            qs = sorted(where)
            near = {q: {p for p in qs if p != q and math.dist(pos(p), pos(q)) <= rydberg_distance + 1e-9} for q in qs}
            seen = set()
            for q in qs:
                if q in seen or not near[q]:
                    continue
                comp, stack = set(), [q]
                while stack:
                    x = stack.pop()
                    if x not in comp:
                        comp.add(x)
                        stack.extend(near[x])
                seen |= comp
                members = tuple(sorted(comp))
                if len(members) > 3:
                    raise NaiveDeviceError("too many atoms")
                if len(members) == 3:
                    d = [math.dist(pos(x), pos(y)) for x, y in itertools.combinations(members, 2)]
                    if max(d) > rydberg_distance + 1e-9 or (max(d) - min(d)) / max(d) > eq_tol:
                        raise NaiveDeviceError("bad triple")
                    gates.append(("ccz", members, ()))
                else:
                    gates.append(("cz", members, ()))
    return gates
