"""Remote Y-diagonal circuit evaluation: correctness, privacy, and audits."""

import json
import math

import numpy as np
import pytest

from qhelab import qsim, rebit, rebit_schemes as rs
from qhelab.harness import RandomBits, comm_audit


def _circuit_n2():
    return rs.AlmostCommutingCircuit(2, [
        rs.Layer("ydiag", (0, 1), u=rs.named_generator("ry_product", 2, 0.7)),
        rs.Layer("rz", (0,), j=1),
        rs.Layer("ydiag", (0, 1), u=rs.named_generator("ry_product", 2, 1.3)),
    ])


def _run_and_compare(runner, circuit, psi, seed):
    enc = qsim.QuantumState(rebit.rebit_encode(psi))
    run = runner(circuit, enc, RandomBits(np.random.default_rng(seed)))
    got = rebit.rebit_decode_logical(run.state)
    want = rs.logical_oracle(circuit, psi.vec)
    assert abs(abs(np.vdot(got, want)) - 1) < 1e-9
    return run


@pytest.mark.parametrize("seed", range(5))
def test_scheme1_matches_logical_oracle(seed):
    rng = np.random.default_rng(seed)
    circuit = rs.AlmostCommutingCircuit(2, [
        rs.Layer("ydiag", (1,), u=rs.named_generator("cos_sin", 1, 0.5)),
        rs.Layer("rz", (0,), j=3),
        rs.Layer("ydiag", (0, 1), u=rs.named_generator("ry_product", 2, 0.9)),
    ])
    _run_and_compare(rs.run_scheme1, circuit, qsim.random_state(2, rng), seed)


@pytest.mark.parametrize("seed", range(5))
def test_scheme2_matches_logical_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    _run_and_compare(rs.run_scheme2, _circuit_n2(),
                     qsim.random_state(2, rng), seed)


def test_scheme2_reply_is_two_bits_per_data_qubit():
    rng = np.random.default_rng(42)
    run = _run_and_compare(rs.run_scheme2, _circuit_n2(),
                           qsim.random_state(2, rng), 42)
    assert comm_audit(run.transcript, "Bob->Alice") == 2 * 2
    # one Alice bit per involved data qubit per ydiag layer
    assert comm_audit(run.transcript, "Alice->Bob") == 4


@pytest.mark.parametrize("seed", range(4))
def test_mask_variant_matches_logical_oracle(seed):
    rng = np.random.default_rng(200 + seed)
    circuit = rs.AlmostCommutingCircuit(2, [
        rs.Layer("ydiag", (0, 1), u=rs.named_generator("ry_product", 2, 0.6)),
        rs.Layer("rz", (0,), j=1),
    ])
    psi = qsim.random_state(2, rng)
    enc = qsim.QuantumState(rebit.rebit_encode(psi))
    run = rs.simplified_mask_variant(circuit, enc,
                                     RandomBits(np.random.default_rng(seed)))
    got = rebit.rebit_decode_logical(run.state)
    want = rs.logical_oracle(circuit, psi.vec)
    assert abs(abs(np.vdot(got, want)) - 1) < 1e-9
    # Bob-local qubit outcomes stay off the transcript: 1 Alice bit per layer
    assert comm_audit(run.transcript, "Alice->Bob") == 1


def test_mask_variant_needs_two_qubits():
    circuit = rs.AlmostCommutingCircuit(1, [
        rs.Layer("ydiag", (0,), u=rs.named_generator("ry_product", 1, 0.4))])
    with pytest.raises(ValueError):
        rs.simplified_mask_variant(circuit, qsim.basis_state(2, 0),
                                   RandomBits(np.random.default_rng(0)))


def test_layer_validation():
    with pytest.raises(ValueError):
        rs.AlmostCommutingCircuit(1, [rs.Layer("ydiag", (0,), u=qsim.H.matrix)])
    with pytest.raises(ValueError):
        rs.AlmostCommutingCircuit(1, [rs.Layer("rz", (0,), j=2)])
    with pytest.raises(ValueError):
        rs.AlmostCommutingCircuit(1, [rs.Layer("what", (0,))])
    with pytest.raises(ValueError):
        rs.AlmostCommutingCircuit(1, [
            rs.Layer("ydiag", (1,), u=rs.named_generator("ry_product", 1, 0.1))])
    with pytest.raises(ValueError):
        rs.AlmostCommutingCircuit(2, [
            rs.Layer("ydiag", (0, 1), u=rs.named_generator("exp_yy", 2, 0.3))])
    # complex Y-diagonal layers are allowed when require_real is off
    rs.AlmostCommutingCircuit(
        2, [rs.Layer("ydiag", (0, 1), u=rs.named_generator("exp_yy", 2, 0.3))],
        require_real=False)


def test_validate_for_scheme_restrictions():
    c1 = rs.AlmostCommutingCircuit(2, [rs.Layer("rz", (1,), j=1)])
    with pytest.raises(ValueError):
        c1.validate_for(1)
    c2 = rs.AlmostCommutingCircuit(2, [
        rs.Layer("ydiag", (0,), u=rs.named_generator("ry_product", 1, 0.2))])
    with pytest.raises(ValueError):
        c2.validate_for(2)


def test_circuit_from_json_roundtrip():
    spec = {"n": 2, "layers": [
        {"type": "ydiag", "qubits": [0, 1], "generator": "ry_product",
         "theta": 0.7},
        {"type": "rz", "qubit": 0, "j": 3},
        {"type": "ydiag", "qubits": [0, 1],
         "matrix": [[[c.real, c.imag] for c in row]
                    for row in rs.named_generator("ry_product", 2, 1.3)]},
    ]}
    circuit = rs.circuit_from_json(json.dumps(spec))
    assert len(circuit.layers) == 3
    assert np.allclose(circuit.layers[2].u,
                       rs.named_generator("ry_product", 2, 1.3), atol=1e-12)
    rng = np.random.default_rng(7)
    _run_and_compare(rs.run_scheme1, circuit, qsim.random_state(2, rng), 7)


def test_bob_view_is_input_independent():
    """Scheme 2 privacy: Bob's full view (message plus gadget halves) is the
    same density matrix for any two inputs."""
    circuit = rs.AlmostCommutingCircuit(1, [
        rs.Layer("ydiag", (0,), u=rs.named_generator("ry_product", 1, 0.8)),
        rs.Layer("rz", (0,), j=1),
    ])
    rng = np.random.default_rng(3)
    views = []
    for psi in (qsim.random_state(1, rng), qsim.random_state(1, rng),
                qsim.basis_state(1, 0)):
        enc = qsim.QuantumState(rebit.rebit_encode(psi))
        views.append(rs.bob_view(circuit, enc, scheme=2))
    assert rs.view_distance(views[0], views[1]) < 1e-9
    assert rs.view_distance(views[0], views[2]) < 1e-9


def test_physical_oracle_agrees_with_logical():
    circuit = _circuit_n2()
    rng = np.random.default_rng(11)
    psi = qsim.random_state(2, rng)
    enc = qsim.QuantumState(rebit.rebit_encode(psi))
    phys = rs.physical_oracle(circuit, enc)
    got = rebit.rebit_decode_logical(phys)
    want = rs.logical_oracle(circuit, psi.vec)
    assert abs(abs(np.vdot(got, want)) - 1) < 1e-10
