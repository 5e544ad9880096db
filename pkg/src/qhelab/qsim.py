"""Dense simulation core: states, gates, measurements, and information measures.

Conventions used throughout the package:

- Qubit 0 is the least significant bit of the computational-basis index
  (little-endian).  The basis label |q_{n-1} ... q_1 q_0> therefore reads
  right to left.
- R_y(theta) = exp(-i theta sigma_y / 2), so R_y(pi) = -i sigma_y.
- Global phase is never compared; state equality means fidelity >= 1 - tol.
- Bell measurement outcome (m_x, m_z) means the teleported qubit needs the
  correction X^{m_x} Z^{m_z}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

ATOL = 1e-10


class ZeroProbabilityBranch(Exception):
    """A measurement outcome was forced onto a zero-probability branch."""


@dataclass
class Gate:
    name: str
    matrix: np.ndarray
    arity: int

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** self.arity
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"gate {self.name}: matrix shape {self.matrix.shape} "
                             f"does not match arity {self.arity}")
        if not np.allclose(self.matrix @ self.matrix.conj().T, np.eye(dim), atol=ATOL):
            raise ValueError(f"gate {self.name} is not unitary")


# single-qubit constants
_I = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

I = Gate("I", _I, 1)
X = Gate("X", _X, 1)
Y = Gate("Y", _Y, 1)
Z = Gate("Z", _Z, 1)
H = Gate("H", _H, 1)
P = Gate("P", np.diag([1, 1j]), 1)           # phase gate, P|1> = i|1>
P_DAG = Gate("Pdg", np.diag([1, -1j]), 1)
T = Gate("T", np.diag([1, cmath.exp(1j * math.pi / 4)]), 1)
T_DAG = Gate("Tdg", np.diag([1, cmath.exp(-1j * math.pi / 4)]), 1)


def ry(theta: float) -> Gate:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return Gate(f"Ry({theta:g})", np.array([[c, -s], [s, c]]), 1)


def rz(theta: float) -> Gate:
    return Gate(f"Rz({theta:g})",
                np.diag([cmath.exp(-1j * theta / 2), cmath.exp(1j * theta / 2)]), 1)


def rx(theta: float) -> Gate:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return Gate(f"Rx({theta:g})", np.array([[c, -1j * s], [-1j * s, c]]), 1)


def controlled(u: np.ndarray, name: str) -> Gate:
    """Two-qubit controlled-U; gate slot 0 is the control, slot 1 the target.

    With little-endian slot indexing the joint index is (target, control),
    so the block acting when control=1 sits at odd rows/columns.
    """
    m = np.eye(4, dtype=complex)
    m[1, 1], m[1, 3] = u[0, 0], u[0, 1]
    m[3, 1], m[3, 3] = u[1, 0], u[1, 1]
    return Gate(name, m, 2)


CNOT = controlled(_X, "CNOT")
CZ = controlled(_Z, "CZ")
C_IY = controlled(1j * _Y, "C-iY")            # controlled i*sigma_y
F_HALF = controlled(ry(math.pi).matrix, "F")  # controlled R_y(pi)
T_Y = ry(math.pi / 4)

PAULI = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}


class QuantumState:
    """Statevector or density matrix over an ordered register.

    Each qubit carries an owner label ("Alice" or "Bob") plus a free-form
    role tag; ownership is plumbing for the protocol harness and has no
    effect on the linear algebra.
    """

    def __init__(self, data, owners=None, tags=None):
        data = np.asarray(data, dtype=complex)
        if data.ndim == 1:
            n = int(round(math.log2(data.size)))
            if 2 ** n != data.size:
                raise ValueError("statevector length is not a power of 2")
            if abs(np.linalg.norm(data) - 1) > 1e-8:
                raise ValueError("statevector is not normalized")
            self.vec, self.rho = data, None
        elif data.ndim == 2:
            n = int(round(math.log2(data.shape[0])))
            if data.shape != (2 ** n, 2 ** n):
                raise ValueError("density matrix has bad shape")
            self.vec, self.rho = None, data
        else:
            raise ValueError("expected a vector or matrix")
        self.num_qubits = n
        self.owners = list(owners) if owners else ["Alice"] * n
        self.tags = list(tags) if tags else [""] * n
        if len(self.owners) != n:
            raise ValueError("owner list length mismatch")

    @property
    def is_statevector(self) -> bool:
        return self.vec is not None

    def copy(self) -> "QuantumState":
        data = self.vec if self.is_statevector else self.rho
        return QuantumState(data.copy(), self.owners, self.tags)

    def density(self) -> np.ndarray:
        if self.is_statevector:
            return np.outer(self.vec, self.vec.conj())
        return self.rho


def basis_state(n: int, index: int = 0, owners=None) -> QuantumState:
    v = np.zeros(2 ** n, dtype=complex)
    v[index] = 1.0
    return QuantumState(v, owners=owners)


def product_state(*single_qubit_vecs, owners=None) -> QuantumState:
    """Build |v_{n-1}> x ... x |v_0> from per-qubit vectors listed for
    qubits 0, 1, ... in order (little-endian composition)."""
    out = np.array([1.0], dtype=complex)
    for v in single_qubit_vecs:
        out = np.kron(np.asarray(v, dtype=complex), out)
    out = out / np.linalg.norm(out)
    return QuantumState(out, owners=owners)


def random_state(n: int, rng, real: bool = False) -> QuantumState:
    v = rng.normal(size=2 ** n)
    if not real:
        v = v + 1j * rng.normal(size=2 ** n)
    return QuantumState(v / np.linalg.norm(v))


def _tensor_apply(arr: np.ndarray, n: int, u: np.ndarray, targets) -> np.ndarray:
    """Apply u on the given qubit axes of a rank-n tensor over axis set
    where axis (n-1-i) is qubit i."""
    k = len(targets)
    ut = u.reshape((2,) * (2 * k))
    in_axes = [2 * k - 1 - j for j in range(k)]
    arr_axes = [n - 1 - targets[j] for j in range(k)]
    res = np.tensordot(ut, arr, axes=(in_axes, arr_axes))
    # res: slot k-1..0 first, then the untouched axes in ascending order
    return np.moveaxis(res, range(k), [n - 1 - targets[k - 1 - j] for j in range(k)])


def apply_gate(state: QuantumState, gate: Gate, targets) -> QuantumState:
    if isinstance(targets, int):
        targets = [targets]
    targets = list(targets)
    n = state.num_qubits
    if len(set(targets)) != len(targets):
        raise ValueError("duplicate target qubits")
    if any(t < 0 or t >= n for t in targets):
        raise IndexError("target qubit out of range")
    if gate.arity != len(targets):
        raise ValueError(f"gate {gate.name} arity {gate.arity} != {len(targets)} targets")
    if state.is_statevector:
        arr = _tensor_apply(state.vec.reshape((2,) * n), n, gate.matrix, targets)
        return QuantumState(arr.reshape(-1), state.owners, state.tags)
    # density: U rho U^dagger via two row-side applications
    m = _apply_rows(state.rho, n, gate.matrix, targets)
    m = _apply_rows(m.conj().T, n, gate.matrix, targets).conj().T
    return QuantumState(m, state.owners, state.tags)


def _apply_rows(m: np.ndarray, n: int, u: np.ndarray, targets) -> np.ndarray:
    d = m.shape[0]
    arr = m.reshape((2,) * n + (d,))
    k = len(targets)
    ut = u.reshape((2,) * (2 * k))
    in_axes = [2 * k - 1 - j for j in range(k)]
    arr_axes = [n - 1 - targets[j] for j in range(k)]
    res = np.tensordot(ut, arr, axes=(in_axes, arr_axes))
    res = np.moveaxis(res, range(k), [n - 1 - targets[k - 1 - j] for j in range(k)])
    return res.reshape(d, d)


_BASIS_ROT = {"Z": None, "X": H, "Y": Gate("Wy", _H @ np.diag([1, -1j]), 1)}
# Wy maps the sigma_y eigenbasis to the computational basis: Wy|y+> = |0>.


def outcome_probability(state: QuantumState, qubit: int, basis: str = "Z"):
    """Return (p0, rotated_state) for a measurement of `qubit` in `basis`."""
    rot = _BASIS_ROT[basis]
    st = apply_gate(state, rot, [qubit]) if rot is not None else state
    n = st.num_qubits
    if st.is_statevector:
        arr = st.vec.reshape((2,) * n)
        p0 = float(np.sum(np.abs(np.take(arr, 0, axis=n - 1 - qubit)) ** 2))
    else:
        idx = [i for i in range(2 ** n) if not (i >> qubit) & 1]
        p0 = float(np.real(np.sum(np.diag(st.rho)[idx])))
    return min(max(p0, 0.0), 1.0), st


def measure(state: QuantumState, basis: str, qubit: int, rng=None, force=None):
    """Projective measurement; returns (outcome_bit, post_state).

    `force` pins the outcome (used when enumerating hidden randomness); it
    raises ZeroProbabilityBranch if that branch cannot occur.
    """
    p0, st = outcome_probability(state, qubit, basis)
    if force is not None:
        outcome = int(force)
        p = p0 if outcome == 0 else 1 - p0
        if p < 1e-12:
            raise ZeroProbabilityBranch(f"qubit {qubit} basis {basis} outcome {outcome}")
    else:
        outcome = 0 if rng.random() < p0 else 1
        p = p0 if outcome == 0 else 1 - p0
    n = st.num_qubits
    axis = n - 1 - qubit
    if st.is_statevector:
        arr = st.vec.reshape((2,) * n).copy()
        sel = [slice(None)] * n
        sel[axis] = 1 - outcome
        arr[tuple(sel)] = 0
        post = QuantumState(arr.reshape(-1) / math.sqrt(p), st.owners, st.tags)
    else:
        proj = np.zeros((2, 2))
        proj[outcome, outcome] = 1
        m = _apply_rows(st.rho, n, proj, [qubit])
        m = _apply_rows(m.conj().T, n, proj, [qubit]).conj().T
        post = QuantumState(m / p, st.owners, st.tags)
    rot = _BASIS_ROT[basis]
    if rot is not None:  # rotate back so the register stays in its own frame
        post = apply_gate(post, Gate("rot_inv", rot.matrix.conj().T, 1), [qubit])
    return outcome, post


def bell_measure(state: QuantumState, q1: int, q2: int, rng=None, force=None):
    """Bell measurement on (q1, q2); returns ((m_x, m_z), post_state).

    The measured pair is left in |m_z>|m_x> (computational basis) inside the
    register.  Outcome convention: a qubit teleported through the pair needs
    the correction X^{m_x} Z^{m_z}.
    """
    if q1 == q2:
        raise ValueError("Bell measurement needs two distinct qubits")
    st = apply_gate(state, CNOT, [q1, q2])
    st = apply_gate(st, H, [q1])
    if force is not None:
        fx, fz = force
    else:
        fx = fz = None
    mz, st = measure(st, "Z", q1, rng, force=fz)
    mx, st = measure(st, "Z", q2, rng, force=fx)
    return (mx, mz), st


def epr_extend(state: QuantumState, owner_a="Alice", owner_b="Bob"):
    """Append an EPR pair (|00>+|11>)/sqrt2 as the two highest qubits.

    Returns (state, index_first_half, index_second_half); the first half is
    labeled owner_a, the second owner_b.
    """
    n = state.num_qubits
    epr = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    if state.is_statevector:
        vec = np.kron(epr, state.vec)
        out = QuantumState(vec, state.owners + [owner_a, owner_b],
                           state.tags + ["epr", "epr"])
    else:
        rho = np.kron(np.outer(epr, epr.conj()), state.rho)
        out = QuantumState(rho, state.owners + [owner_a, owner_b],
                           state.tags + ["epr", "epr"])
    return out, n, n + 1


def remove_qubit(state: QuantumState, qubit: int, bit: int) -> QuantumState:
    """Drop a qubit known to be in the computational state |bit>."""
    n = state.num_qubits
    axis = n - 1 - qubit
    owners = [o for i, o in enumerate(state.owners) if i != qubit]
    tags = [t for i, t in enumerate(state.tags) if i != qubit]
    if state.is_statevector:
        arr = np.take(state.vec.reshape((2,) * n), bit, axis=axis).reshape(-1)
        norm = np.linalg.norm(arr)
        if abs(norm - 1) > 1e-8:
            raise ValueError("qubit is not definitely in that basis state")
        return QuantumState(arr / norm, owners, tags)
    keep = [q for q in range(n) if q != qubit]
    rho = partial_trace_matrix(state.rho, n, keep)
    return QuantumState(rho, owners, tags)


def partial_trace_matrix(rho: np.ndarray, n: int, keep) -> np.ndarray:
    keep = sorted(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    # iteratively trace out discarded qubits, highest index first
    cur = rho
    cur_n = n
    cur_map = list(range(n))  # current qubit index -> original index
    for q in sorted(set(range(n)) - set(keep), reverse=True):
        pos = cur_map.index(q)
        cur = _trace_out_one(cur, cur_n, pos)
        cur_n -= 1
        cur_map.pop(pos)
    return cur


def _trace_out_one(rho: np.ndarray, n: int, qubit: int) -> np.ndarray:
    arr = rho.reshape((2,) * n + (2,) * n)
    r_ax = n - 1 - qubit
    c_ax = 2 * n - 1 - qubit
    out = np.trace(arr, axis1=r_ax, axis2=c_ax)
    return out.reshape(2 ** (n - 1), 2 ** (n - 1))


def partial_trace(state: QuantumState, keep) -> QuantumState:
    keep = sorted(keep)
    rho = partial_trace_matrix(state.density(), state.num_qubits, keep)
    owners = [state.owners[q] for q in keep]
    tags = [state.tags[q] for q in keep]
    return QuantumState(rho, owners, tags)


def trace_distance(rho, sigma) -> float:
    rho = rho.density() if isinstance(rho, QuantumState) else np.asarray(rho)
    sigma = sigma.density() if isinstance(sigma, QuantumState) else np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("dimension mismatch")
    eig = np.linalg.eigvalsh(rho - sigma)
    return 0.5 * float(np.sum(np.abs(eig)))


def fidelity(a, b) -> float:
    """|<a|b>|^2 for pure states; <a|rho|a> if one side is a density matrix."""
    av = a.vec if isinstance(a, QuantumState) else np.asarray(a)
    if isinstance(b, QuantumState) and not b.is_statevector:
        return float(np.real(av.conj() @ b.rho @ av))
    bv = b.vec if isinstance(b, QuantumState) else np.asarray(b)
    if av is None or bv is None:
        raise ValueError("fidelity expects at least one pure state")
    return float(abs(np.vdot(av, bv)) ** 2)


def _entropy_bits(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 1e-12]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    rho = rho.density() if isinstance(rho, QuantumState) else np.asarray(rho)
    return _entropy_bits(np.linalg.eigvalsh(rho))


def mutual_information(joint) -> float:
    """I(X;Y) in bits from a joint probability table (rows X, columns Y)."""
    joint = np.asarray(joint, dtype=float)
    if np.any(joint < -1e-12):
        raise ValueError("negative probability")
    if abs(joint.sum() - 1) > 1e-9:
        raise ValueError("joint table does not sum to 1")
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    return _entropy_bits(px) + _entropy_bits(py) - _entropy_bits(joint.reshape(-1))


def holevo(ensemble) -> float:
    """S(sum p_i rho_i) - sum p_i S(rho_i), in bits."""
    probs = [p for p, _ in ensemble]
    if abs(sum(probs) - 1) > 1e-9:
        raise ValueError("ensemble probabilities do not sum to 1")
    mats = [r.density() if isinstance(r, QuantumState) else np.asarray(r)
            for _, r in ensemble]
    avg = sum(p * m for p, m in zip(probs, mats))
    return von_neumann_entropy(avg) - sum(p * von_neumann_entropy(m)
                                          for p, m in zip(probs, mats))
