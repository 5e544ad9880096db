"""Remote evaluation of Y-diagonal circuits (schemes 1 and 2).

Alice holds the n data qubits plus the phase qubit.  Each Y-diagonal layer
is applied remotely: per involved data qubit Alice burns one EPR pair
(controlled-i*sigma_y from her half onto the data qubit, R_y(pi/2), Z
measurement, outcome sent to Bob); Bob applies P or P-dagger per outcome,
Z gates where his Pauli list anticommutes with sigma_y, the joint
group-circulant C, and Z measurements whose outcomes extend his list by
R_y(pi) factors.  Fixed controlled-R_y(j*pi) gates (the encoded R_z layers)
are applied by Alice directly and pushed through Bob's list by Clifford
conjugation.  At the end Bob discloses the data-qubit corrections: 2 bits
per data qubit, 2n total.  The residual phase-qubit correction is always
I or sigma_y, and sigma_y on the phase qubit is a global phase on the
decoded state, so it is never sent.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim, rebit
from .harness import (ALICE, BOB, FixedBits, Transcript, measure_with)

ATOL = 1e-9


@dataclass
class Layer:
    kind: str                 # "ydiag" or "rz"
    qubits: tuple             # data qubits the layer touches
    u: np.ndarray | None = None   # ydiag: 2^K x 2^K unitary
    j: int | None = None          # rz: R_z(j*pi/2) with j in {1, 3}


@dataclass
class AlmostCommutingCircuit:
    n: int
    layers: list
    require_real: bool = True

    def __post_init__(self):
        for layer in self.layers:
            if layer.kind == "ydiag":
                if not rebit.is_y_diagonal(layer.u):
                    raise ValueError("layer unitary is not Y-diagonal")
                if self.require_real and np.max(np.abs(np.imag(layer.u))) > ATOL:
                    raise ValueError("layer unitary is not real")
                if len(layer.qubits) != int(round(math.log2(layer.u.shape[0]))):
                    raise ValueError("layer qubit count does not match matrix")
            elif layer.kind == "rz":
                if layer.j not in (1, 3):
                    raise ValueError("rz layers allow j in {1, 3} only")
            else:
                raise ValueError(f"unknown layer kind {layer.kind!r}")
            if any(q < 0 or q >= self.n for q in layer.qubits):
                raise ValueError("layer touches a qubit out of range")

    def validate_for(self, scheme: int):
        for layer in self.layers:
            if scheme == 1 and layer.kind == "rz" and layer.qubits != (0,):
                raise ValueError("scheme 1 allows rz layers on the first data "
                                 "qubit only")
            if scheme == 2 and layer.kind == "ydiag" and \
                    tuple(sorted(layer.qubits)) != tuple(range(self.n)):
                raise ValueError("scheme 2 requires ydiag layers on all qubits")


def named_generator(name: str, k: int, theta: float) -> np.ndarray:
    """Stock Y-diagonal layer generators for circuit files and tests."""
    if name == "ry_product":
        out = np.array([[1.0 + 0j]])
        for _ in range(k):
            out = np.kron(out, qsim.ry(theta).matrix)
        return out
    if name == "cos_sin":
        # cos(theta) I + sin(theta) R_y(pi)^{ox k}; real and unitary for odd k
        ryp = np.array([[1.0 + 0j]])
        for _ in range(k):
            ryp = np.kron(ryp, qsim.ry(math.pi).matrix)
        return math.cos(theta) * np.eye(2 ** k) + math.sin(theta) * ryp
    if name == "exp_yy":
        yy = np.array([[1.0 + 0j]])
        for _ in range(k):
            yy = np.kron(yy, qsim._Y)
        return math.cos(theta) * np.eye(2 ** k) - 1j * math.sin(theta) * yy
    raise ValueError(f"unknown generator {name!r}")


def circuit_from_json(text: str) -> AlmostCommutingCircuit:
    spec = json.loads(text)
    layers = []
    for item in spec["layers"]:
        if item["type"] == "ydiag":
            qubits = tuple(item["qubits"])
            if "matrix" in item:
                u = np.array([[complex(c[0], c[1]) for c in row]
                              for row in item["matrix"]])
            else:
                u = named_generator(item["generator"], len(qubits),
                                    item.get("theta", 0.0))
            layers.append(Layer("ydiag", qubits, u=u))
        else:
            layers.append(Layer("rz", (item["qubit"],), j=item["j"]))
    return AlmostCommutingCircuit(spec["n"], layers,
                                  require_real=spec.get("require_real", True))


# --- Pauli frame bookkeeping ---------------------------------------------

def _pauli_from_bits(x: int, z: int) -> np.ndarray:
    """X^x Z^z as a matrix."""
    m = np.eye(2, dtype=complex)
    if z:
        m = qsim._Z @ m
    if x:
        m = qsim._X @ m
    return m


def conjugate_frame_2q(gate_matrix: np.ndarray, frame_c, frame_t):
    """Push the Pauli frame X^x Z^z (x,z) pairs on (control, target) through
    a two-qubit Clifford: find (x', z') pairs with G Q G^dag ~ Q'."""
    q = np.kron(_pauli_from_bits(*frame_t), _pauli_from_bits(*frame_c))
    qq = gate_matrix @ q @ gate_matrix.conj().T
    for xc, zc, xt, zt in itertools.product((0, 1), repeat=4):
        cand = np.kron(_pauli_from_bits(xt, zt), _pauli_from_bits(xc, zc))
        coef = np.trace(cand.conj().T @ qq) / 4
        if abs(abs(coef) - 1) < 1e-8 and np.allclose(qq, coef * cand, atol=1e-8):
            return (xc, zc), (xt, zt)
    raise ValueError("gate does not normalize the Pauli group")


def physical_oracle(circuit: AlmostCommutingCircuit, encoded_input: qsim.QuantumState):
    """Direct application of the physical layer unitaries (the correctness
    reference): each ydiag layer acts on its data qubits, each rz layer as
    controlled-R_y(j*pi) onto the phase qubit."""
    n = circuit.n
    st = encoded_input.copy()
    for layer in circuit.layers:
        if layer.kind == "ydiag":
            g = qsim.Gate("U", layer.u, len(layer.qubits))
            st = qsim.apply_gate(st, g, list(layer.qubits))
        else:
            st = qsim.apply_gate(st, rebit.controlled_ry(layer.j * math.pi),
                                 [layer.qubits[0], n])
    return st


def logical_oracle(circuit: AlmostCommutingCircuit, psi: np.ndarray) -> np.ndarray:
    """Logical-level reference for real circuits: ydiag layers act directly,
    rz layers as R_z(j*pi/2) = diag(1, i^j) on the target."""
    st = qsim.QuantumState(psi)
    for layer in circuit.layers:
        if layer.kind == "ydiag":
            st = qsim.apply_gate(st, qsim.Gate("U", layer.u, len(layer.qubits)),
                                 list(layer.qubits))
        else:
            g = qsim.Gate("Rz", np.diag([1, 1j ** layer.j]), 1)
            st = qsim.apply_gate(st, g, [layer.qubits[0]])
    return st.vec


@dataclass
class SchemeRun:
    state: qsim.QuantumState          # corrected physical output (n+1 qubits)
    transcript: Transcript
    phase_frame: int                  # residual sigma_y power on the phase qubit
    report: dict = field(default_factory=dict)


def _gadget_layer(state, layer, frames, source, transcript, bob_local=()):
    """One Y-diagonal layer: Alice's gadget halves, Bob's P/Pdg + Z + C +
    measurements.  `bob_local` marks data qubits Bob holds himself (mask
    variant); their Alice-side outcomes stay off the transcript."""
    qubits = list(layer.qubits)
    k = len(qubits)
    exp = rebit.ydiag_expand(layer.u)
    c_mat = rebit.build_c_matrix(exp)
    st = state
    a_idx, b_idx = [], []
    for q in qubits:
        st, a, b = qsim.epr_extend(st)
        a_idx.append(a)
        b_idx.append(b)
        st = qsim.apply_gate(st, qsim.C_IY, [a, q])
        st = qsim.apply_gate(st, qsim.ry(math.pi / 2), [a])
    m_bits = []
    for a in a_idx:
        m, st = measure_with(source, st, "Z", a)
        m_bits.append(m)
    sent = [m for q, m in zip(qubits, m_bits) if q not in bob_local]
    if transcript is not None and sent:
        transcript.record(ALICE, sent, tag="gadget-outcomes")
    # Bob's side
    for q, b, m in zip(qubits, b_idx, m_bits):
        st = qsim.apply_gate(st, qsim.P if m == 0 else qsim.P_DAG, [b])
        x, z = frames[q]
        if x ^ z:  # X or Z in the list anticommutes with sigma_y
            st = qsim.apply_gate(st, qsim.Z, [b])
    st = qsim.apply_gate(st, qsim.Gate("C", c_mat, k), b_idx)
    g_bits = []
    for b in b_idx:
        g, st = measure_with(source, st, "Z", b)
        g_bits.append(g)
    for q, g in zip(qubits, g_bits):
        if g:  # correction V(g)^dag ~ sigma_y on qubit q
            x, z = frames[q]
            frames[q] = (x ^ 1, z ^ 1)
    # drop measured ancillas, highest index first
    for idx, bit in sorted(zip(a_idx + b_idx, m_bits + g_bits), reverse=True):
        st = qsim.remove_qubit(st, idx, bit)
    return st


def _run(circuit, input_state, source, scheme, mask_bits=None):
    circuit.validate_for(scheme)
    n = circuit.n
    st = input_state.copy()
    if st.num_qubits != n + 1:
        raise ValueError("input must be the encoded state on n+1 qubits")
    transcript = Transcript()
    frames = {q: (0, 0) for q in range(n + 1)}  # (x, z) per qubit, n = phase
    bob_local = set()
    if mask_bits is not None:
        # mask variant: last n-1 data qubits get R_y(pi)^mask and move to Bob
        for q, mb in zip(range(1, n), mask_bits):
            if mb:
                st = qsim.apply_gate(st, qsim.ry(math.pi), [q])
            st.owners[q] = BOB
            bob_local.add(q)
    for layer in circuit.layers:
        if layer.kind == "ydiag":
            st = _gadget_layer(st, layer, frames, source, transcript, bob_local)
        else:
            d = layer.qubits[0]
            gate = rebit.controlled_ry(layer.j * math.pi)
            st = qsim.apply_gate(st, gate, [d, n])
            frames[d], frames[n] = conjugate_frame_2q(gate.matrix,
                                                      frames[d], frames[n])
    # Bob sends the data-qubit corrections: 2 bits per data qubit
    correction_bits = []
    for q in range(n):
        correction_bits.extend(frames[q])
    transcript.record(BOB, correction_bits, tag="corrections")
    for q in range(n):
        x, z = frames[q]
        if x:
            st = qsim.apply_gate(st, qsim.X, [q])
        if z:
            st = qsim.apply_gate(st, qsim.Z, [q])
        st.owners[q] = ALICE
    if mask_bits is not None:
        for q, mb in zip(range(1, n), mask_bits):
            if mb:
                st = qsim.apply_gate(st, qsim.ry(-math.pi), [q])
            st.owners[q] = ALICE
    px, pz = frames[n]
    if px != pz:
        raise AssertionError("phase-qubit frame left {I, Y}; bookkeeping bug")
    return SchemeRun(state=st, transcript=transcript, phase_frame=px,
                     report={"scheme": scheme, "n": n,
                             "layers": len(circuit.layers)})


def run_scheme1(circuit, input_state, source):
    return _run(circuit, input_state, source, scheme=1)


def run_scheme2(circuit, input_state, source):
    return _run(circuit, input_state, source, scheme=2)


def simplified_mask_variant(circuit, input_state, source):
    """Scheme 1 with the last n-1 data qubits R_y(pi)-masked and physically
    held by Bob; their gadget ancillas are Bob-local and their outcomes never
    enter the transcript."""
    if circuit.n < 2:
        raise ValueError("mask variant needs n >= 2")
    mask_bits = [source.bit("mask") for _ in range(circuit.n - 1)]
    return _run(circuit, input_state, source, scheme=1, mask_bits=mask_bits)


# --- Bob-view privacy computation ----------------------------------------

def bob_view(circuit, input_state, scheme=2):
    """Bob's exact view: the classical gadget-outcome message plus his gadget
    halves, before his own processing (which is a fixed channel given the
    message and so cannot increase distinguishability).

    Alice's operations never depend on Bob's messages until the final
    correction step, so her side is simulated coherently and her measured
    ancillas are projected branch by branch.  Returns {m: (prob, rho_bob)}.
    """
    circuit.validate_for(scheme)
    n = circuit.n
    st = input_state.copy()
    a_idx, b_idx = [], []
    for layer in circuit.layers:
        if layer.kind == "ydiag":
            for q in layer.qubits:
                st, a, b = qsim.epr_extend(st)
                a_idx.append(a)
                b_idx.append(b)
                st = qsim.apply_gate(st, qsim.C_IY, [a, q])
                st = qsim.apply_gate(st, qsim.ry(math.pi / 2), [a])
        else:
            st = qsim.apply_gate(st, rebit.controlled_ry(layer.j * math.pi),
                                 [layer.qubits[0], n])
    total = st.num_qubits
    vec = st.vec.reshape((2,) * total)
    view = {}
    for m in itertools.product((0, 1), repeat=len(a_idx)):
        sel = [slice(None)] * total
        for a, bit in zip(a_idx, m):
            sel[total - 1 - a] = bit
        branch = vec[tuple(sel)].reshape(-1)  # qubits minus the a ancillas
        p = float(np.linalg.norm(branch) ** 2)
        if p < 1e-15:
            view[m] = (0.0, None)
            continue
        sub = qsim.QuantumState(branch / math.sqrt(p))
        # surviving register: data+phase then b qubits in allocation order
        remaining = [q for q in range(total) if q not in a_idx]
        keep = [remaining.index(b) for b in b_idx]
        rho = qsim.partial_trace_matrix(sub.density(), sub.num_qubits, keep)
        view[m] = (p, rho)
    return view


def view_distance(view_a, view_b) -> float:
    """Trace distance between two Bob views (classical message register
    tensored with the quantum part)."""
    keys = set(view_a) | set(view_b)
    total = 0.0
    for key in keys:
        pa, ra = view_a.get(key, (0.0, None))
        pb, rb = view_b.get(key, (0.0, None))
        if ra is None and rb is None:
            continue
        if ra is None:
            total += pb
        elif rb is None:
            total += pa
        else:
            eig = np.linalg.eigvalsh(pa * ra - pb * rb)
            total += 0.5 * float(np.sum(np.abs(eig)))
    return total
