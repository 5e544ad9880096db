"""Protocol-harness tests: transcripts, bit sources, symbolic teleports."""

import numpy as np
import pytest

from qhelab import qsim
from qhelab.harness import (ALICE, BOB, CountingBits, FixedBits, NeedMoreBits,
                            ProtocolError, RandomBits, SecretBit, Transcript,
                            comm_audit, enumerate_hidden,
                            enumerate_hidden_adaptive, hidden_bit_count,
                            measure_with, teleport_literal, teleport_symbolic)


def test_transcript_records_and_counts():
    tr = Transcript()
    tr.record(ALICE, [0, 1, 1], tag="m1")
    tr.record(BOB, [1], tag="m2")
    assert tr.bits_from(ALICE) == [0, 1, 1]
    assert comm_audit(tr, "Bob->Alice") == 1
    assert comm_audit(tr, "Alice->Bob") == 3
    lines = tr.serialize().splitlines()
    assert len(lines) == 2 and "m1" in lines[0]


def test_transcript_rejects_secrets_and_nonbits():
    tr = Transcript()
    with pytest.raises(ProtocolError):
        tr.record(ALICE, [SecretBit(1, "mask")])
    with pytest.raises(ProtocolError):
        tr.record(ALICE, [2])
    with pytest.raises(ProtocolError):
        tr.record("Eve", [0])


def test_transcript_serialize_keeps_leading_zeros():
    tr = Transcript()
    tr.record(ALICE, [0, 0, 1], tag="bits")
    tr2 = Transcript()
    tr2.record(ALICE, [0, 1], tag="bits")
    assert tr.serialize() != tr2.serialize()


def test_fixed_bits_replay_and_exhaustion():
    src = FixedBits([1, 0])
    assert src.bit() == 1 and src.bit() == 0
    with pytest.raises(NeedMoreBits):
        src.bit()


def test_fixed_bits_zero_probability_branch():
    src = FixedBits([1])
    with pytest.raises(qsim.ZeroProbabilityBranch):
        src.outcome(1.0)


def test_counting_bits_and_probe():
    def run(src):
        src.bit()
        src.outcome(0.5)
        return None
    assert hidden_bit_count(run) == 2


def test_enumerate_hidden_fixed_width():
    def run(src):
        return (src.bit(), src.bit())
    leaves = dict(enumerate_hidden(run, 2))
    assert len(leaves) == 4
    def uneven(src):
        if src.bit():
            src.bit()
        return None
    with pytest.raises(ProtocolError):
        list(enumerate_hidden(uneven, 2))


def test_enumerate_hidden_adaptive_weights():
    def run(src):
        first = src.bit()
        return (first, src.bit()) if first else (first,)
    leaves = list(enumerate_hidden_adaptive(run))
    weights = sum(2.0 ** -len(bits) for bits, _ in leaves)
    assert abs(weights - 1.0) < 1e-12
    assert sorted(len(b) for b, _ in leaves) == [1, 2, 2]


def test_measure_with_deterministic_outcomes_free():
    src = CountingBits(np.random.default_rng(0))
    out, _ = measure_with(src, qsim.basis_state(1, 1), "Z", 0)
    assert out == 1 and src.count == 0
    out, _ = measure_with(src, qsim.product_state([1, 1]), "Z", 0)
    assert src.count == 1


@pytest.mark.parametrize("withhold", [set(), {"x"}, {"z"}, {"x", "z"}])
def test_symbolic_teleport_matches_literal_channel(withhold):
    """Averaged over the hidden bits, the symbolic teleport's masked output
    equals the literal EPR teleport channel."""
    rng = np.random.default_rng(11)
    psi = qsim.random_state(2, rng)

    def symbolic(src):
        st, rec = teleport_symbolic(psi.copy(), 0, withhold, src, Transcript(),
                                    sender=ALICE)
        return st
    def literal(src):
        st, _ = teleport_literal(psi.copy(), 0, withhold, src)
        return st

    for run in (symbolic, literal):
        n_bits = hidden_bit_count(run)
        rho = np.zeros((4, 4), dtype=complex)
        for bits, out in enumerate_hidden(run, n_bits):
            rho += out.density()
        rho /= 2 ** n_bits
        if run is symbolic:
            rho_sym = rho
        else:
            assert np.max(np.abs(rho - rho_sym)) < 1e-10


def test_symbolic_teleport_disclosed_is_identity():
    rng = np.random.default_rng(5)
    psi = qsim.random_state(1, rng)
    st, rec = teleport_symbolic(psi.copy(), 0, set(), RandomBits(rng),
                                Transcript(), sender=ALICE)
    assert qsim.fidelity(st, psi) > 1 - 1e-10
    assert rec.mask_x == 0 and rec.mask_z == 0


def test_symbolic_teleport_withheld_masks_reveal():
    rng = np.random.default_rng(6)
    psi = qsim.random_state(1, rng)
    st, rec = teleport_symbolic(psi.copy(), 0, {"x", "z"}, RandomBits(rng),
                                Transcript(), sender=ALICE)
    mx, mz = rec.mask_x.reveal(), rec.mask_z.reveal()
    if mx:
        st = qsim.apply_gate(st, qsim.X, [0])
    if mz:
        st = qsim.apply_gate(st, qsim.Z, [0])
    assert qsim.fidelity(st, psi) > 1 - 1e-10


def test_teleport_transfers_ownership():
    rng = np.random.default_rng(8)
    psi = qsim.random_state(1, rng)
    st, _ = teleport_symbolic(psi, 0, set(), RandomBits(rng), Transcript(),
                              sender=ALICE, new_owner=BOB)
    assert st.owners[0] == BOB
