"""Two-party protocol engine: transcripts, hidden-bit hygiene, and the
teleportation channel with withheld corrections.

Every classical bit that crosses between the parties passes through a
Transcript, so communication accounting is exact.  Bits that a party keeps
secret (teleportation mask bits, basis choices) are wrapped in SecretBit;
the Transcript refuses to record them, which turns "a hidden bit leaked
into a message" into a loud test failure instead of a silent privacy bug.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qsim

ALICE = "Alice"
BOB = "Bob"


class SecretBit:
    """Taint wrapper around a party-private bit.

    Arithmetic helpers return SecretBit so taint propagates; reveal() is the
    single deliberate exit point (e.g. when a protocol step discloses the bit).
    """

    __slots__ = ("_value", "tag")

    def __init__(self, value: int, tag: str = ""):
        self._value = int(value) & 1
        self.tag = tag

    def reveal(self) -> int:
        return self._value

    def __xor__(self, other):
        o = other.reveal() if isinstance(other, SecretBit) else int(other)
        return SecretBit(self._value ^ o, self.tag)

    __rxor__ = __xor__

    def __repr__(self):
        return f"SecretBit(<hidden>, tag={self.tag!r})"


@dataclass
class Message:
    sender: str
    bits: list
    round: int
    tag: str


class ProtocolError(Exception):
    pass


class Abort(Exception):
    """Raised by a party to abort the protocol; recorded in the transcript."""

    def __init__(self, party: str, reason: str = ""):
        self.party = party
        self.reason = reason
        super().__init__(f"{party} aborted: {reason}")


class Transcript:
    """Ordered record of every inter-party classical message."""

    def __init__(self):
        self.messages: list[Message] = []
        self.aborted_by: str | None = None

    def record(self, sender: str, bits, tag: str = "", round: int | None = None):
        if sender not in (ALICE, BOB):
            raise ProtocolError(f"unknown sender {sender!r}")
        clean = []
        for b in bits:
            if isinstance(b, SecretBit):
                raise ProtocolError(
                    f"secret bit {b.tag!r} almost written to the transcript")
            if b not in (0, 1):
                raise ProtocolError(f"non-bit payload {b!r}")
            clean.append(int(b))
        if round is None:
            round = self.messages[-1].round + 1 if self.messages else 0
        elif self.messages and round < self.messages[-1].round:
            raise ProtocolError("rounds must be nondecreasing")
        self.messages.append(Message(sender, clean, round, tag))

    def record_abort(self, party: str, reason: str = ""):
        self.aborted_by = party
        self.messages.append(Message(party, [], self.next_round(), f"abort:{reason}"))

    def next_round(self) -> int:
        return self.messages[-1].round + 1 if self.messages else 0

    def bits_from(self, sender: str) -> list:
        return [b for m in self.messages if m.sender == sender for b in m.bits]

    def serialize(self) -> str:
        """One line per message: `round sender tag hexbits`.

        Bits are packed MSB-first behind a sentinel 1 so leading zeros
        survive the integer round-trip; an empty payload serializes as "1".
        """
        lines = []
        for m in self.messages:
            packed = int("1" + "".join(str(b) for b in m.bits), 2)
            lines.append(f"{m.round} {m.sender} {m.tag or '-'} {packed:x}")
        return "\n".join(lines)


def comm_audit(transcript: Transcript, direction: str) -> int:
    """Exact bit count sent in `direction`, e.g. "Bob->Alice"."""
    sender = direction.split("->")[0].strip()
    return len(transcript.bits_from(sender))


class RandomBits:
    """Hidden-randomness source backed by a seeded generator."""

    def __init__(self, rng):
        self.rng = rng

    def bit(self, tag: str = "") -> int:
        return int(self.rng.integers(2))

    def outcome(self, p0: float) -> int:
        return 0 if self.rng.random() < p0 else 1


class NeedMoreBits(Exception):
    """A FixedBits source ran out of replay bits."""


class FixedBits:
    """Hidden-randomness source replaying a fixed bit string.

    Used to enumerate every hidden-randomness branch of a protocol.  Coin
    flips consume bits directly; measurement outcomes are forced, and a
    branch whose forced outcome has probability ~0 raises
    qsim.ZeroProbabilityBranch (the enumerator skips it with weight 0).
    """

    def __init__(self, bits):
        self.bits = list(bits)
        self.pos = 0

    def bit(self, tag: str = "") -> int:
        if self.pos >= len(self.bits):
            raise NeedMoreBits(f"FixedBits exhausted at {self.pos}")
        b = self.bits[self.pos]
        self.pos += 1
        return int(b)

    def outcome(self, p0: float) -> int:
        b = self.bit()
        p = p0 if b == 0 else 1 - p0
        if p < 1e-9:
            raise qsim.ZeroProbabilityBranch(f"forced outcome {b} has p={p:.2e}")
        return b


class CountingBits(RandomBits):
    """RandomBits that counts how many hidden bits a run consumes."""

    def __init__(self, rng):
        super().__init__(rng)
        self.count = 0

    def bit(self, tag: str = "") -> int:
        self.count += 1
        return super().bit(tag)

    def outcome(self, p0: float) -> int:
        self.count += 1
        return super().outcome(p0)


def hidden_bit_count(run_fn, rng=None) -> int:
    """Probe how many hidden random bits one run of a protocol consumes."""
    import numpy as np
    src = CountingBits(rng or np.random.default_rng(0))
    run_fn(src)
    return src.count


def enumerate_hidden(run_fn, num_bits: int):
    """Run `run_fn(source)` for every hidden-bit assignment of width
    `num_bits`, yielding (bits, result) per realizable branch.  Branches
    forced onto zero-probability measurement outcomes are skipped (their
    weight is zero)."""
    import itertools as _it
    for bits in _it.product((0, 1), repeat=num_bits):
        src = FixedBits(bits)
        try:
            result = run_fn(src)
        except qsim.ZeroProbabilityBranch:
            continue
        if src.pos != num_bits:
            raise ProtocolError(
                f"branch consumed {src.pos} bits, expected {num_bits}; "
                "hidden-bit consumption is path dependent")
        yield bits, result


def enumerate_hidden_adaptive(run_fn, max_bits=32):
    """Like enumerate_hidden, but the number of hidden bits may depend on the
    branch (e.g. when earlier random bits select later protocol structure).
    Explores the binary prefix tree: a branch that exhausts its FixedBits is
    split into the two one-bit extensions.  Yields (bits, result) per
    realizable leaf; the leaf's probability weight is 2**-len(bits)."""
    stack = [()]
    while stack:
        bits = stack.pop()
        if len(bits) > max_bits:
            raise ProtocolError(f"enumeration exceeded {max_bits} hidden bits")
        src = FixedBits(bits)
        try:
            result = run_fn(src)
        except NeedMoreBits:
            stack.append(bits + (1,))
            stack.append(bits + (0,))
            continue
        except qsim.ZeroProbabilityBranch:
            continue
        if src.pos != len(bits):
            raise ProtocolError(
                f"branch consumed {src.pos} of {len(bits)} provided bits")
        yield bits, result


def measure_with(source, state, basis, qubit):
    """Measure using a bit source (so runs are replayable/enumerable).

    Deterministic outcomes (probability within 1e-12 of 0 or 1) consume no
    hidden bit; this keeps exhaustive branch enumeration tight.
    """
    p0, _ = qsim.outcome_probability(state, qubit, basis)
    if p0 > 1 - 1e-12:
        out = 0
    elif p0 < 1e-12:
        out = 1
    else:
        out = source.outcome(p0)
    return qsim.measure(state, basis, qubit, force=out)


def bell_measure_with(source, state, q1, q2):
    st = qsim.apply_gate(state, qsim.CNOT, [q1, q2])
    st = qsim.apply_gate(st, qsim.H, [q1])
    mz, st = measure_with(source, st, "Z", q1)
    mx, st = measure_with(source, st, "Z", q2)
    return (mx, mz), st


@dataclass
class TeleportRecord:
    qubit: int
    withheld_x: bool
    withheld_z: bool
    mask_x: SecretBit | int  # SecretBit when withheld, plain bit when disclosed
    mask_z: SecretBit | int
    disclosed: list = field(default_factory=list)


def teleport_symbolic(state, qubit, withhold, source, transcript=None,
                      sender=ALICE, new_owner=BOB, tag="teleport"):
    """Equivalent-channel teleportation without explicit EPR qubits.

    Applies X^a Z^b with fresh uniform (a, b), relabels the qubit's owner,
    and discloses exactly the non-withheld correction bits (the receiver
    applies those immediately, so the residual mask is only the withheld
    part).  `withhold` is a set drawn from {"x", "z"}.
    """
    withhold = set(withhold)
    if not withhold <= {"x", "z"}:
        raise ValueError(f"bad withhold spec {withhold}")
    # Only the withheld mask components consume hidden randomness: a
    # disclosed bit is applied and immediately corrected by the receiver,
    # which is the identity channel, so it is emitted as a constant 0.
    a = source.bit("teleport-x") if "x" in withhold else 0
    b = source.bit("teleport-z") if "z" in withhold else 0
    # receiver's uncorrected state is X^a Z^b |psi>, matching the literal
    # EPR channel under our Bell-outcome convention
    st = state
    if b:
        st = qsim.apply_gate(st, qsim.Z, [qubit])
    if a:
        st = qsim.apply_gate(st, qsim.X, [qubit])
    st.owners[qubit] = new_owner
    disclosed = []
    if "x" not in withhold:
        disclosed.append(0)
    if "z" not in withhold:
        disclosed.append(0)
    if transcript is not None and disclosed:
        transcript.record(sender, disclosed, tag=tag)
    rec = TeleportRecord(
        qubit=qubit,
        withheld_x="x" in withhold,
        withheld_z="z" in withhold,
        mask_x=SecretBit(a, "teleport-x") if "x" in withhold else 0,
        mask_z=SecretBit(b, "teleport-z") if "z" in withhold else 0,
        disclosed=disclosed,
    )
    return st, rec


def teleport_literal(state, qubit, withhold, source, new_owner=BOB):
    """Reference implementation through an explicit EPR pair; used to check
    that teleport_symbolic induces the same channel.  Returns
    (state, (residual_x, residual_z)) with the teleported content moved
    back to `qubit`'s position via the EPR second half then relabeled."""
    withhold = set(withhold)
    st, a_q, b_q = qsim.epr_extend(state, owner_a="sender", owner_b=new_owner)
    (mx, mz), st = bell_measure_with(source, st, qubit, a_q)
    # receiver corrects the disclosed components
    if "x" not in withhold and mx:
        st = qsim.apply_gate(st, qsim.X, [b_q])
    if "z" not in withhold and mz:
        st = qsim.apply_gate(st, qsim.Z, [b_q])
    # move the payload back down to `qubit` so register layout is stable
    st = qsim.apply_gate(st, qsim.Gate("SWAP", np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]), 2),
        [qubit, b_q])
    st = qsim.remove_qubit(st, b_q, mz)
    st = qsim.remove_qubit(st, a_q, mx)
    st.owners[qubit] = new_owner
    residual = (mx if "x" in withhold else 0, mz if "z" in withhold else 0)
    return st, residual


def run_protocol(alice_program, bob_program, shared=None, rng=None):
    """Alternating-step engine.

    Programs are lists of callables step(ctx, incoming_bits) -> bits to send
    (possibly []); a step may raise Abort.  ctx is a per-party dict holding
    "shared", "rng", and whatever state the program stores (an "output" key
    becomes that party's output).  Steps alternate Alice, Bob, Alice, ...
    """
    transcript = Transcript()
    ctxs = {ALICE: {"shared": shared, "rng": rng},
            BOB: {"shared": shared, "rng": rng}}
    programs = {ALICE: list(alice_program), BOB: list(bob_program)}
    pending = {ALICE: [], BOB: []}
    order = []
    for i in range(max(len(programs[ALICE]), len(programs[BOB]))):
        for party in (ALICE, BOB):
            if i < len(programs[party]):
                order.append((party, programs[party][i]))
    try:
        for party, step in order:
            incoming, pending[party] = pending[party], []
            out = step(ctxs[party], incoming)
            out = list(out) if out else []
            if out:
                transcript.record(party, out, tag=f"step")
                other = BOB if party == ALICE else ALICE
                pending[other].extend(out)
    except Abort as ab:
        transcript.record_abort(ab.party, ab.reason)
    outputs = {p: ctxs[p].get("output") for p in (ALICE, BOB)}
    return outputs, transcript
