"""Interactive evaluation of Clifford+T circuits on Pauli-masked data.

Alice teleports her data qubits to Bob withholding all correction bits, so
Bob holds the state under an unknown Pauli mask X^a Z^b per qubit.  Bob
tracks the mask as a pair of F2 linear polynomials (f_a_i, f_b_i) per qubit
over a fixed variable registry: Alice's 2n initial key bits followed by 4
Bell-outcome bits per T gate.  Clifford gates update only Bob's
coefficients; a T gate leaves an unwanted P^{f_a} which is removed by a
distributed linear-polynomial evaluation (scheme 4, distributed mode)
feeding a two-party garden-hose gadget that applies P-dagger exactly when
the shares XOR to 1.  At the end Bob teleports the state back and one more
distributed evaluation per key bit hands Alice her Pauli corrections.

run_scheme6 wraps a run with Bob-side trap qubits whose checkpoint
measurements catch a cheating Alice with constant probability per trap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .harness import (ALICE, BOB, Transcript, bell_measure_with,
                      measure_with, teleport_symbolic)
from .linpoly import LinearPolynomial, run_scheme4
from . import linpoly as _linpoly


# --- F2 linear forms and Pauli key polynomials ----------------------------

@dataclass
class LinearForm:
    """const + sum coeffs[v] * var_v over F2."""

    const: int
    coeffs: np.ndarray  # uint8, one slot per registry variable

    @classmethod
    def zero(cls, nvars: int) -> "LinearForm":
        return cls(0, np.zeros(nvars, dtype=np.uint8))

    @classmethod
    def variable(cls, v: int, nvars: int) -> "LinearForm":
        f = cls.zero(nvars)
        f.coeffs[v] = 1
        return f

    def copy(self) -> "LinearForm":
        return LinearForm(self.const, self.coeffs.copy())

    def __xor__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm(self.const ^ other.const,
                          (self.coeffs ^ other.coeffs).astype(np.uint8))

    def flip(self) -> None:
        self.const ^= 1

    def evaluate(self, bits) -> int:
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size != self.coeffs.size:
            raise ValueError("variable vector size mismatch")
        return int(self.const ^ (int(self.coeffs @ bits) & 1))


@dataclass
class PauliKeyPolynomial:
    """Bob's symbolic Pauli mask: X^{f_a_i} Z^{f_b_i} per qubit i."""

    n: int
    nvars: int
    f_a: list
    f_b: list

    @classmethod
    def initial(cls, n: int, r_cap: int, extra_qubits: int = 0):
        """Registry layout: variables 2i, 2i+1 are qubit i's initial key
        bits; then 4 fresh variables per T gate, r_cap of them budgeted.
        Qubits beyond n (Bob's own ancillas) start with zero keys."""
        nvars = 2 * n + 4 * r_cap
        f_a = [LinearForm.variable(2 * i, nvars) for i in range(n)]
        f_b = [LinearForm.variable(2 * i + 1, nvars) for i in range(n)]
        for _ in range(extra_qubits):
            f_a.append(LinearForm.zero(nvars))
            f_b.append(LinearForm.zero(nvars))
        return cls(n + extra_qubits, nvars, f_a, f_b)

    def mask_gate(self, qubit: int, bits) -> list:
        """Pauli factors (as (gate, qubit)) for this qubit at given bits."""
        out = []
        if self.f_b[qubit].evaluate(bits):
            out.append((qsim.Z, qubit))
        if self.f_a[qubit].evaluate(bits):
            out.append((qsim.X, qubit))
        return out


def effective_key_update(keys: PauliKeyPolynomial, gate: str, targets):
    """Push the Pauli mask through a Clifford gate by rewriting Bob's
    coefficients; Alice's bits never change.

    H: swap (f_a, f_b).  P: f_b ^= f_a.  CNOT (control first):
    f_b_ctrl ^= f_b_tgt and f_a_tgt ^= f_a_ctrl.  Paulis flip constants.
    """
    targets = [targets] if isinstance(targets, int) else list(targets)
    if gate == "H":
        (i,) = targets
        keys.f_a[i], keys.f_b[i] = keys.f_b[i], keys.f_a[i]
    elif gate == "P":
        (i,) = targets
        keys.f_b[i] = keys.f_b[i] ^ keys.f_a[i]
    elif gate == "CNOT":
        i, j = targets
        keys.f_b[i] = keys.f_b[i] ^ keys.f_b[j]
        keys.f_a[j] = keys.f_a[j] ^ keys.f_a[i]
    elif gate == "X":
        keys.f_a[targets[0]].flip()
    elif gate == "Z":
        keys.f_b[targets[0]].flip()
    elif gate == "Y":
        keys.f_a[targets[0]].flip()
        keys.f_b[targets[0]].flip()
    else:
        raise ValueError(f"not a supported Clifford gate: {gate!r}")
    return keys


# --- circuits -------------------------------------------------------------

_GATES = {"H": qsim.H, "P": qsim.P, "CNOT": qsim.CNOT, "T": qsim.T,
          "X": qsim.X, "Z": qsim.Z, "Y": qsim.Y}


@dataclass(frozen=True)
class CliffordTCircuit:
    n: int
    gates: tuple  # of (name, targets tuple)

    def __post_init__(self):
        norm = []
        for name, targets in self.gates:
            targets = (targets,) if isinstance(targets, int) else tuple(targets)
            if name not in _GATES:
                raise ValueError(f"unknown gate {name!r}")
            if len(targets) != _GATES[name].arity:
                raise ValueError(f"{name} expects {_GATES[name].arity} targets")
            if any(t < 0 or t >= self.n for t in targets):
                raise ValueError("gate target out of range")
            norm.append((name, targets))
        object.__setattr__(self, "gates", tuple(norm))

    @property
    def r_count(self) -> int:
        return sum(1 for name, _ in self.gates if name == "T")

    def apply(self, state: qsim.QuantumState) -> qsim.QuantumState:
        for name, targets in self.gates:
            state = qsim.apply_gate(state, _GATES[name], list(targets))
        return state

    @classmethod
    def from_json(cls, obj) -> "CliffordTCircuit":
        gates = tuple((g["gate"], tuple(g["targets"])) for g in obj["gates"])
        return cls(int(obj["n"]), gates)


def random_clifford_t(n: int, r: int, rng, clifford_per_stage: int = 3):
    """Random circuit with exactly r T gates separated by Clifford bursts."""
    names = ["H", "P", "X", "Z", "Y"] + (["CNOT"] if n > 1 else [])
    gates = []
    for stage in range(r + 1):
        for _ in range(int(rng.integers(1, clifford_per_stage + 1))):
            name = names[int(rng.integers(len(names)))]
            if name == "CNOT":
                i, j = rng.choice(n, size=2, replace=False)
                gates.append((name, (int(i), int(j))))
            else:
                gates.append((name, (int(rng.integers(n)),)))
        if stage < r:
            gates.append(("T", (int(rng.integers(n)),)))
    return CliffordTCircuit(n, tuple(gates))


# --- the garden-hose gadget -----------------------------------------------

def garden_hose(state, qubit, p, q, source):
    """Two-party P-dagger-if-(p XOR q) gadget over 4 EPR pairs.

    Bob Bell-measures (data, pair A's half) if p=0 else (data, pair B's
    half).  Alice always Bell-measures the pairs {A, C} and {B, D} on her
    side; q only selects which of the two measurements gets a P-dagger on
    its potential carrier (pair B's half when q=0, pair A's half when q=1).
    The data ends on Bob's half of pair C (p=0) or D (p=1) and is swapped
    back into the original slot.

    Returns (state, alice_bits, bob_bits, out_label) with alice_bits =
    (m1x, m1z, m2x, m2z) for her {A,C} then {B,D} measurements and
    bob_bits = his single measurement's (mx, mz).
    """
    st = state
    n0 = st.num_qubits
    half = {}
    for name in "ABCD":
        st, left, right = qsim.epr_extend(st, owner_a=BOB, owner_b=ALICE)
        half[name] = (left, right)   # (Bob's half, Alice's half)

    route = "A" if p == 0 else "B"
    (bx, bz), st = bell_measure_with(source, st, qubit, half[route][0])

    if q == 1:
        st = qsim.apply_gate(st, qsim.P_DAG, [half["A"][1]])
    (m1x, m1z), st = bell_measure_with(source, st, half["A"][1], half["C"][1])
    if q == 0:
        st = qsim.apply_gate(st, qsim.P_DAG, [half["B"][1]])
    (m2x, m2z), st = bell_measure_with(source, st, half["B"][1], half["D"][1])

    out_label = "out1" if p == 0 else "out2"
    out_idx = half["C"][0] if p == 0 else half["D"][0]
    # the off-route chain leaves Bob's two spare halves in a Bell state;
    # Bob measures them out so the register shrinks back to n0 qubits
    spare = [half["B"][0], half["D"][0]] if p == 0 else [half["A"][0], half["C"][0]]
    sp0, st = measure_with(source, st, "Z", spare[0])
    sp1, st = measure_with(source, st, "Z", spare[1])

    st = qsim.apply_gate(st, qsim.Gate("SWAP", np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]), 2),
        [qubit, out_idx])
    known = {
        half[route][0]: bx,
        half["A"][1]: m1z, half["C"][1]: m1x,
        half["B"][1]: m2z, half["D"][1]: m2x,
        spare[0]: sp0, spare[1]: sp1,
        out_idx: bz,  # post-swap: the slot holds the measured data qubit
    }
    for idx in sorted(known, reverse=True):
        st = qsim.remove_qubit(st, idx, known[idx])
    assert st.num_qubits == n0
    st.owners[qubit] = BOB
    return st, (m1x, m1z, m2x, m2z), (bx, bz), out_label


# --- scheme 5 -------------------------------------------------------------

@dataclass
class Scheme5Report:
    n: int
    r_cap: int
    nvars: int
    instance_transcripts: list = field(default_factory=list)
    t_audit: list = field(default_factory=list)  # per-T dicts
    soundness: list = field(default_factory=list)  # fidelities if checked

    @property
    def instance_count(self) -> int:
        return len(self.instance_transcripts)


@dataclass
class Scheme5Run:
    state: qsim.QuantumState
    transcript: Transcript
    report: Scheme5Report
    aborted: str | None = None


def _distributed_eval(form, alice_bits, k, source, report, alice_strategy=None):
    """Lower-level scheme: distributed evaluation of one key polynomial.

    Alice's inputs are her current variable-value vector (unperformed
    measurements count as zero); Bob's polynomial is the linear form."""
    poly = LinearPolynomial(tuple(int(b) for b in form.coeffs), form.const)
    dist, tr = run_scheme4(list(alice_bits), poly, k, source,
                           distributed=True, alice_strategy=alice_strategy)
    report.instance_transcripts.append(tr)
    return dist.alice_bit, dist.bob_bit


def t_gate_step(state, qubit, keys, alice_bits, t_index, k, source, report,
                alice_strategy=None):
    """Apply T and remove the induced P^{f_a} via the distributed
    evaluation plus the garden-hose gadget; registers 4 fresh variables."""
    st = qsim.apply_gate(state, qsim.T, [qubit])
    f_a_old = keys.f_a[qubit].copy()  # TX = (phase) P X T: keys unchanged, P^{f_a} appears

    q_share, p_share = _distributed_eval(f_a_old, alice_bits, k, source,
                                         report, alice_strategy)
    st, a4, b2, out_label = garden_hose(st, qubit, p_share, q_share, source)

    base = 2 * report.n + 4 * t_index
    alice_bits[base:base + 4] = a4
    # net mask from the two teleports, with the P-dagger pushed through
    # Bob's correction bits: X^{bx} Z^{bz + bx*f_a} then Alice's X^{ax} Z^{az}
    ax = base + (0 if p_share == 0 else 2)
    az = ax + 1
    bx, bz = b2
    keys.f_a[qubit] = keys.f_a[qubit] ^ LinearForm.variable(ax, keys.nvars)
    keys.f_b[qubit] = keys.f_b[qubit] ^ LinearForm.variable(az, keys.nvars)
    if bx:
        keys.f_a[qubit].flip()
        keys.f_b[qubit] = keys.f_b[qubit] ^ f_a_old
    if bz:
        keys.f_b[qubit].flip()
    report.t_audit.append({
        "t_index": t_index, "qubit": qubit, "shares": (q_share, p_share),
        "correction": p_share ^ q_share, "out": out_label,
        "alice_bell_bits": a4, "bob_bell_bits": b2,
    })
    return st


def _masked_fidelity(state, keys, alice_bits, ideal):
    """Undo the mask at the true bits and compare with the ideal state."""
    st = state.copy()
    for i in range(keys.n):
        for gate, qb in keys.mask_gate(i, alice_bits):
            st = qsim.apply_gate(st, gate, [qb])
    return qsim.fidelity(st, ideal)


def run_scheme5(circuit, input_state, k, rng, check_soundness=False):
    """Full interactive evaluation; returns Scheme5Run with the output on
    Alice's side.  With check_soundness=True an omniscient observer
    verifies the key polynomials against the ideal state after every gate.
    """
    source = _linpoly._as_source(rng)
    n, r_cap = circuit.n, circuit.r_count
    transcript = Transcript()
    report = Scheme5Report(n=n, r_cap=r_cap, nvars=2 * n + 4 * r_cap)
    keys = PauliKeyPolynomial.initial(n, r_cap)
    alice_bits = [0] * keys.nvars

    # step 1: Alice teleports her data to Bob, withholding every correction
    st = input_state.copy()
    for i in range(n):
        st, rec = teleport_symbolic(st, i, {"x", "z"}, source, transcript,
                                    sender=ALICE, tag="input")
        alice_bits[2 * i] = rec.mask_x.reveal()
        alice_bits[2 * i + 1] = rec.mask_z.reveal()

    ideal = circuit.apply(input_state.copy()) if not check_soundness else None
    running_ideal = input_state.copy()

    # step 2: Bob evaluates, correcting each T via the distributed gadget.
    # Pauli gates are absorbed into the mask (constant flips), never applied.
    t_index = 0
    for name, targets in circuit.gates:
        if name == "T":
            st = t_gate_step(st, targets[0], keys, alice_bits, t_index, k,
                             source, report)
            t_index += 1
        else:
            if name not in ("X", "Y", "Z"):
                st = qsim.apply_gate(st, _GATES[name], list(targets))
            effective_key_update(keys, name, targets)
        if check_soundness:
            running_ideal = qsim.apply_gate(running_ideal, _GATES[name],
                                            list(targets))
            report.soundness.append(
                _masked_fidelity(st, keys, alice_bits, running_ideal))
    if check_soundness:
        ideal = running_ideal

    # step 3: Bob teleports the data back, withholding his outcomes
    bob_return = []
    for i in range(n):
        st, rec = teleport_symbolic(st, i, {"x", "z"}, source, transcript,
                                    sender=BOB, new_owner=ALICE, tag="return")
        bob_return.append((rec.mask_x.reveal(), rec.mask_z.reveal()))

    # step 4: 2n distributed evaluations; Bob folds his return-teleport bit
    # into his share before sending it, so Alice's combined bit is directly
    # the physical correction for the qubit she now holds
    for i in range(n):
        for which, form, fold in (("a", keys.f_a[i], bob_return[i][0]),
                                  ("b", keys.f_b[i], bob_return[i][1])):
            a_share, b_share = _distributed_eval(form, alice_bits, k, source,
                                                 report)
            b_share ^= fold
            transcript.record(BOB, [b_share], tag=f"key-{i}")
            # step 5: Alice applies the Pauli correction
            if a_share ^ b_share:
                st = qsim.apply_gate(st, qsim.X if which == "a" else qsim.Z,
                                     [i])

    run = Scheme5Run(state=st, transcript=transcript, report=report)
    if check_soundness:
        report.soundness.append(qsim.fidelity(st, ideal))
    return run


# --- scheme 6 -------------------------------------------------------------

@dataclass
class TrapRecord:
    trap_qubit: int
    expected: int
    observed: int
    passed: bool


@dataclass
class Scheme6Run:
    state: qsim.QuantumState | None
    transcript: Transcript
    report: Scheme5Report
    traps: list
    aborted: str | None


def trap_plan(n, traps, rng):
    """Bob's trap layout: per trap, a decorative conjugate CNOT pair onto a
    random data qubit (net identity, so the trap's checkpoint state stays
    data independent) followed by H, T, T which drives |0> to the +1 Y
    eigenstate; the checkpoint measures the trap in the Y basis."""
    plan = []
    for t in range(traps):
        d = int(rng.integers(n))
        plan.append({"data_qubit": d})
    return plan


def run_scheme6(circuit, input_state, k, traps, rng,
                alice_strategy=None, rng_bob=None):
    """Verification wrapper: Bob appends `traps` ancilla qubits in |0>,
    runs the evaluation with each trap routed through [CNOT(d,t)]^2, H, T,
    T, then checks each trap's Y-basis checkpoint against the mask share
    Alice must send; any mismatch aborts.  traps=0 reduces to run_scheme5.
    """
    source = _linpoly._as_source(rng)
    plan_rng = rng_bob if rng_bob is not None else np.random.default_rng(0)
    n, r_data = circuit.n, circuit.r_count
    r_cap = r_data + 2 * traps
    transcript = Transcript()
    report = Scheme5Report(n=n, r_cap=r_cap, nvars=2 * n + 4 * r_cap)
    keys = PauliKeyPolynomial.initial(n, r_cap, extra_qubits=traps)
    alice_bits = [0] * keys.nvars

    st = input_state.copy()
    for i in range(n):
        st, rec = teleport_symbolic(st, i, {"x", "z"}, source, transcript,
                                    sender=ALICE, tag="input")
        alice_bits[2 * i] = rec.mask_x.reveal()
        alice_bits[2 * i + 1] = rec.mask_z.reveal()
    # Bob's trap ancillas join the register unmasked
    for t in range(traps):
        extra = qsim.basis_state(1, 0, owners=[BOB])
        joined = np.kron(extra.vec, st.vec)
        owners = list(st.owners) + [BOB]
        st = qsim.QuantumState(joined, owners=owners)

    plan = trap_plan(n, traps, plan_rng)
    t_index = 0
    for name, targets in circuit.gates:
        if name == "T":
            st = t_gate_step(st, targets[0], keys, alice_bits, t_index, k,
                             source, report, alice_strategy)
            t_index += 1
        else:
            if name not in ("X", "Y", "Z"):
                st = qsim.apply_gate(st, _GATES[name], list(targets))
            effective_key_update(keys, name, targets)

    trap_records = []
    for t in range(traps):
        tq = n + t
        d = plan[t]["data_qubit"]
        for _ in range(2):  # conjugate pair: joint but net-identity on data
            st = qsim.apply_gate(st, qsim.CNOT, [d, tq])
            effective_key_update(keys, "CNOT", [d, tq])
        st = qsim.apply_gate(st, qsim.H, [tq])
        effective_key_update(keys, "H", [tq])
        for _ in range(2):
            st = t_gate_step(st, tq, keys, alice_bits, t_index, k, source,
                             report, alice_strategy)
            t_index += 1
        # checkpoint: trap should be the +1 Y eigenstate up to the mask;
        # X and Z each flip the Y outcome, so the relevant mask bit is
        # f_a ^ f_b.  Alice sends her share of it (the "reduced" lower
        # -level instance: no mask bit back from Bob, no correction).
        form = keys.f_a[tq] ^ keys.f_b[tq]
        if np.any(form.coeffs[:2 * n]):
            raise AssertionError("trap polynomial touches data key variables")
        a_share, b_share = _distributed_eval(form, alice_bits, k, source,
                                             report, alice_strategy)
        transcript.record(ALICE, [a_share], tag=f"trap-{t}")
        expected = a_share ^ b_share
        observed, st = measure_with(source, st, "Y", tq)
        rec = TrapRecord(tq, expected, observed, observed == expected)
        trap_records.append(rec)
        if not rec.passed:
            transcript.record_abort(BOB, f"trap {t} mismatch")
            return Scheme6Run(None, transcript, report, trap_records, BOB)

    # no abort: finish as in the plain interactive scheme, but first strip
    # the measured trap qubits (their post-measurement state is known to
    # Bob and independent of the data)
    for t in range(traps - 1, -1, -1):
        tq = n + t
        # the measured trap sits in a Y eigenstate; Wy maps it to |observed>
        st = qsim.apply_gate(st, qsim._BASIS_ROT["Y"], [tq])
        st = qsim.remove_qubit(st, tq, trap_records[t].observed)

    bob_return = []
    for i in range(n):
        st, rec = teleport_symbolic(st, i, {"x", "z"}, source, transcript,
                                    sender=BOB, new_owner=ALICE, tag="return")
        bob_return.append((rec.mask_x.reveal(), rec.mask_z.reveal()))
    for i in range(n):
        for which, fold in (("a", bob_return[i][0]), ("b", bob_return[i][1])):
            form = keys.f_a[i] if which == "a" else keys.f_b[i]
            a_share, b_share = _distributed_eval(form, alice_bits, k, source,
                                                 report)
            b_share ^= fold
            transcript.record(BOB, [b_share], tag=f"key-{i}")
            if a_share ^ b_share:
                st = qsim.apply_gate(st, qsim.X if which == "a" else qsim.Z,
                                     [i])
    return Scheme6Run(st, transcript, report, trap_records, None)
