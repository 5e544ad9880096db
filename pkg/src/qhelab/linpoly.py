"""Two-party evaluation of classical linear polynomials over F2.

Alice holds input bits x, Bob holds a polynomial y = (c + sum a_i x_i) mod 2.
Five protocols compute y on Alice's side while partially hiding x from Bob
and (a, c) from Alice:

- scheme 4: each input bit is split into k pads; each pad is encoded into a
  two-qubit state whose basis is chosen by a fresh secret bit, round-tripped
  through Bob, and decoded from measurement parities.
- scheme 7: same, but the basis bit is shared across all pads with the same
  pad index, compressing Bob's return messages from n*k to k bits.
- scheme 8: single-qubit encodings with an extra pad qubit t_j per index;
  Bob evaluates by pairing up his a_i=1 qubits with CNOTs and measuring,
  so no quantum state travels back to Alice.
- scheme 9: scheme 8 at k = ceil(gamma*n), with Alice's final local
  evaluation replaced by a role-reversed inner scheme 8 so that Bob's
  summary bits R_j, w never reach Alice in the clear.
- scheme 10: a fully classical analogue of scheme 8's bit algebra.

All schemes have a distributed mode that omits Bob's final mask bit and
leaves the result as the XOR of one bit per party; higher-level protocols
compose through that mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .harness import (ALICE, BOB, ProtocolError, RandomBits, SecretBit,
                      Transcript, measure_with, teleport_symbolic)

_SQ = 1.0 / math.sqrt(2.0)
# single-qubit encoding vectors indexed by (bit, basis)
_ENC = {
    (0, 0): np.array([1.0, 0.0]),
    (1, 0): np.array([0.0, 1.0]),
    (0, 1): np.array([_SQ, _SQ]),
    (1, 1): np.array([_SQ, -_SQ]),
}


@dataclass(frozen=True)
class LinearPolynomial:
    """y = (c + sum a_i x_i) mod 2 with coefficients known to Bob."""

    a: tuple
    c: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(b) & 1 for b in self.a))
        object.__setattr__(self, "c", int(self.c) & 1)

    @property
    def n(self) -> int:
        return len(self.a)

    def evaluate(self, x) -> int:
        if len(x) != self.n:
            raise ValueError(f"expected {self.n} input bits, got {len(x)}")
        y = self.c
        for ai, xi in zip(self.a, x):
            y ^= ai & (int(xi) & 1)
        return y

    @classmethod
    def from_json(cls, obj) -> "LinearPolynomial":
        if int(obj["n"]) != len(obj["a"]):
            raise ValueError("polynomial n does not match coefficient count")
        return cls(tuple(obj["a"]), obj.get("c", 0))


@dataclass(frozen=True)
class DistributedBit:
    """A bit shared as the XOR of one local bit per party."""

    alice_bit: int
    bob_bit: int

    @property
    def value(self) -> int:
        return self.alice_bit ^ self.bob_bit


@dataclass
class PadShares:
    """Alice's secret pad material for one protocol run."""

    x_split: list  # x_split[i][j], XORing over j to x_i
    s: list        # basis bits; layout depends on the scheme
    t: list = field(default_factory=list)  # withheld teleport bits / pad bits


def _as_source(rng):
    if hasattr(rng, "bit") and hasattr(rng, "outcome"):
        return rng
    if hasattr(rng, "integers"):
        return RandomBits(rng)
    return RandomBits(np.random.default_rng(rng))


def _split_bit(x, k, source):
    """k random pads XORing to x."""
    pads = [source.bit("pad") for _ in range(k - 1)]
    last = int(x) & 1
    for p in pads:
        last ^= p
    pads.append(last)
    return pads


def _check_params(x, poly, k):
    if k < 1:
        raise ValueError("k must be a positive integer")
    if len(x) != poly.n:
        raise ValueError(f"input length {len(x)} != polynomial arity {poly.n}")


def encode_pair(x: int, s: int) -> qsim.QuantumState:
    """Two-qubit pad encoding: x=0 -> |00> or |++>, x=1 -> |10> or |+->.

    In the Z-basis variant (s=0) the first qubit carries x; in the X-basis
    variant (s=1) the second qubit carries x as a relative sign.
    """
    if s == 0:
        first, second = _ENC[(int(x) & 1, 0)], _ENC[(0, 0)]
    else:
        first, second = _ENC[(0, 1)], _ENC[(int(x) & 1, 1)]
    return qsim.product_state(first, second, owners=[ALICE, ALICE])


# --- schemes 4 and 7 ------------------------------------------------------

def _check_party(strategy, party):
    if strategy is not None and getattr(strategy, "party", party) != party:
        raise ProtocolError(f"strategy for {strategy.party} plugged into "
                            f"{party}'s interface")


def run_scheme4(x, poly, k, rng, distributed=False, m=1, alice_strategy=None,
                bob_strategy=None):
    """Round-trip pad protocol; `m` is the basis-sharing block size.

    m=1 gives fully independent basis bits s_ij (one return bit per pad,
    n*k of them); m=n shares s_j across all i (scheme 7, k return bits).
    Intermediate m trades Bob->Alice communication against data privacy.
    Returns (bit, transcript) or (DistributedBit, transcript).

    `alice_strategy` is an optional cheating-Alice plugin (m=1 only).  It
    may substitute the encoding of one pad pair (probe_target/probe_state)
    and then supplies that pair's decoded contribution itself
    (measure_pair), seeing exactly what a real Alice would see: the
    returned qubits, her own withheld forward bits, and Bob's v bit.

    `bob_strategy` is an optional cheating-Bob plugin; its intercept hook
    sees each received pair before Bob's honest processing and may measure
    it (the post-measurement state continues through the protocol).
    """
    _check_params(x, poly, k)
    _check_party(alice_strategy, ALICE)
    _check_party(bob_strategy, BOB)
    n = poly.n
    if m < 1 or n % m:
        raise ValueError("block size m must divide n")
    if alice_strategy is not None and m != 1:
        raise ValueError("adversary strategies support only m=1")
    probe = alice_strategy.probe_target(n, k) if alice_strategy else None
    source = _as_source(rng)
    transcript = Transcript()
    blocks = n // m

    # Alice: pads, basis bits, encodings, forward teleports.  She withholds
    # the Z correction on the first qubit and the X correction on the second;
    # t_ij is whichever of the two stays relevant under her measurement basis.
    s = [[source.bit("s") for _ in range(k)] for _ in range(blocks)]
    x_split = [_split_bit(x[i], k, source) for i in range(n)]
    shares = PadShares(x_split, s, [[None] * k for _ in range(n)])
    states, returns, fwd = {}, {}, {}
    for i in range(n):
        for j in range(k):
            s_ij = s[i // m][j]
            if probe == (i, j):
                st = alice_strategy.probe_state()
            else:
                st = encode_pair(x_split[i][j], s_ij)
            st, rec1 = teleport_symbolic(st, 0, {"z"}, source, transcript,
                                         sender=ALICE, tag=f"fwd-{i}-{j}")
            st, rec2 = teleport_symbolic(st, 1, {"x"}, source, transcript,
                                         sender=ALICE, tag=f"fwd-{i}-{j}")
            shares.t[i][j] = rec2.mask_x if s_ij == 0 else rec1.mask_z
            fwd[i, j] = (rec1, rec2)
            states[i, j] = st

    # Bob: CNOT exactly when a_i=0, then return teleports withholding all
    # correction bits; the withheld bits are his sigma_y/sigma_z mask record.
    for i in range(n):
        for j in range(k):
            st = states[i, j]
            if bob_strategy is not None:
                st = bob_strategy.intercept(st, i, j, source)
            if poly.a[i] == 0:
                st = qsim.apply_gate(st, qsim.CNOT, [0, 1])
            st, ret1 = teleport_symbolic(st, 0, {"x", "z"}, source,
                                         sender=BOB, new_owner=ALICE)
            st, ret2 = teleport_symbolic(st, 1, {"x", "z"}, source,
                                         sender=BOB, new_owner=ALICE)
            states[i, j] = st
            returns[i, j] = (ret1, ret2)

    # Bob's mask bookkeeping: X^mx Z^mz = (phase) Y^mx Z^(mx^mz), so the
    # sigma_y mask bit per qubit is mx and the sigma_z mask bit is mx^mz.
    # He discloses only the per-block parity of the sigma_z bits.
    y_total = 0
    v = [[0] * k for _ in range(blocks)]
    for b in range(blocks):
        for j in range(k):
            par = 0
            for i in range(b * m, (b + 1) * m):
                for rec in returns[i, j]:
                    mx = rec.mask_x.reveal()
                    mz = rec.mask_z.reveal()
                    y_total ^= mx
                    par ^= mx ^ mz
            v[b][j] = par
            transcript.record(BOB, [par], tag=f"v-{b}-{j}")

    # Alice: basis-matched measurements, pad removal, block assembly.
    y0 = 0
    for b in range(blocks):
        for j in range(k):
            g = s[b][j] & v[b][j]
            for i in range(b * m, (b + 1) * m):
                if probe == (i, j):
                    g = alice_strategy.measure_pair(
                        states[i, j], x_split[i][j], s[b][j], v[b][j],
                        fwd[i, j][0].mask_z.reveal(),
                        fwd[i, j][1].mask_x.reveal(), source)
                    continue
                basis = "Z" if s[b][j] == 0 else "X"
                o1, st = measure_with(source, states[i, j], basis, 0)
                o2, st = measure_with(source, st, basis, 1)
                g ^= o1 ^ o2 ^ shares.t[i][j].reveal()
            y0 ^= g
    bob_bit = poly.c ^ y_total
    if distributed:
        return DistributedBit(y0, bob_bit), transcript
    transcript.record(BOB, [bob_bit], tag="final")
    return y0 ^ bob_bit, transcript


def run_scheme7(x, poly, k, rng, distributed=False):
    """Shared-basis variant: one basis bit s_j across all i (m = n)."""
    return run_scheme4(x, poly, k, rng, distributed=distributed, m=poly.n)


# --- scheme 8 -------------------------------------------------------------

class Scheme8Instance:
    """One data-locking evaluation, split into role-parameterized phases so
    a higher-level scheme can run it in either direction and stop before the
    final mask bit.

    data party: holds x, prepares and teleports k*(n+1) single qubits.
    circuit party: holds the polynomial, pairs its a_i=1 qubits with CNOTs,
    measures, and reports R_j = u_j ^ v_j plus the parity w of the a_i.
    """

    def __init__(self, x, poly, k, source, transcript=None,
                 data_party=ALICE, circuit_party=BOB):
        _check_params(x, poly, k)
        self.x = [int(b) & 1 for b in x]
        self.poly = poly
        self.k = k
        self.source = source
        self.transcript = transcript if transcript is not None else Transcript()
        self.data_party = data_party
        self.circuit_party = circuit_party
        self.shares = None
        self.states = None     # one (n+1)-qubit state per j; qubit n is t_j
        self.u = self.v = self.R = self.w = None

    def data_phase(self):
        n, k, src = self.poly.n, self.k, self.source
        s = [src.bit("s") for _ in range(k)]
        t = [src.bit("t") for _ in range(k)]
        x_split = [_split_bit(self.x[i], k, src) for i in range(n)]
        self.shares = PadShares(x_split, s, t)
        self.states = []
        for j in range(k):
            vecs = [_ENC[(x_split[i][j], s[j])] for i in range(n)]
            vecs.append(_ENC[(t[j], s[j])])
            st = qsim.product_state(*vecs, owners=[self.data_party] * (n + 1))
            for q in range(n + 1):
                st, _ = teleport_symbolic(st, q, set(), src, self.transcript,
                                          sender=self.data_party,
                                          new_owner=self.circuit_party,
                                          tag=f"send-{j}")
            self.states.append(st)
        return self

    def circuit_phase(self, send=True):
        """CNOT pairing and measurements; optionally transmit (R_j..., w)."""
        a = self.poly.a
        ones = [i for i, ai in enumerate(a) if ai == 1]
        self.w = len(ones) & 1
        pairs = [(ones[p], ones[p + 1]) for p in range(0, len(ones) - 1, 2)]
        if self.w:
            pairs.append((ones[-1], self.poly.n))  # unpaired qubit -> t_j
        self.u, self.v, self.R = [], [], []
        for j in range(self.k):
            st, uj, vj = self.states[j], 0, 0
            for ctrl, tgt in pairs:
                st = qsim.apply_gate(st, qsim.CNOT, [ctrl, tgt])
                ox, st = measure_with(self.source, st, "X", ctrl)
                oz, st = measure_with(self.source, st, "Z", tgt)
                # the Z-parity of the target qubits carries the data sum in
                # the s_j=0 branch and the X-parity of the controls carries
                # it in the s_j=1 branch; u_j must be the Z-parity so that
                # the mask bit c ^ sum(u_j) cancels the random half
                uj ^= oz
                vj ^= ox
            self.u.append(uj)
            self.v.append(vj)
            self.R.append(uj ^ vj)
        if send:
            self.transcript.record(self.circuit_party, self.R, tag="R")
            self.transcript.record(self.circuit_party, [self.w], tag="w")
        return list(self.R), self.w

    def data_value(self, R, w) -> int:
        """Data party's share y0 = sum(s_j R_j + t_j w) mod 2."""
        y0 = 0
        for j in range(self.k):
            y0 ^= (self.shares.s[j] & R[j]) ^ (self.shares.t[j] & w)
        return y0

    def circuit_value(self) -> int:
        """Circuit party's mask share (c + sum u_j) mod 2."""
        out = self.poly.c
        for uj in self.u:
            out ^= uj
        return out


def run_scheme8(x, poly, k, rng, distributed=False):
    """Data-locking protocol; returns (bit, transcript) or (DistributedBit,
    transcript)."""
    source = _as_source(rng)
    inst = Scheme8Instance(x, poly, k, source)
    inst.data_phase()
    R, w = inst.circuit_phase(send=True)
    y0 = inst.data_value(R, w)
    bob_bit = inst.circuit_value()
    if distributed:
        return DistributedBit(y0, bob_bit), inst.transcript
    inst.transcript.record(BOB, [bob_bit], tag="final")
    return y0 ^ bob_bit, inst.transcript


# --- scheme 9 -------------------------------------------------------------

def run_scheme9(x, poly, gamma, k_prime, rng):
    """Two-level composition: an outer scheme 8 at k = ceil(gamma*n) stops
    before Bob sends anything; the local evaluation sum(s_j R_j + t_j w) is
    replaced by an inner role-reversed scheme 8 (Bob's data: R_1..R_k, w;
    Alice's coefficients: s_1..s_k and sum(t_j)) with the inner mask bit
    omitted, so R_j and w never reach Alice in the clear.  Bob folds his
    inner share into the outer mask bit and sends that single bit.
    """
    if not 1 < gamma < 2:
        raise ValueError("gamma must lie strictly between 1 and 2")
    if k_prime < 1:
        raise ValueError("k_prime must be a positive integer")
    source = _as_source(rng)
    transcript = Transcript()
    k = math.ceil(gamma * poly.n)

    outer = Scheme8Instance(x, poly, k, source, transcript)
    outer.data_phase()
    R, w = outer.circuit_phase(send=False)

    t_sum = 0
    for tj in outer.shares.t:
        t_sum ^= tj
    inner_poly = LinearPolynomial(tuple(outer.shares.s) + (t_sum,), 0)
    inner = Scheme8Instance(list(R) + [w], inner_poly, k_prime, source,
                            transcript, data_party=BOB, circuit_party=ALICE)
    inner.data_phase()
    R2, w2 = inner.circuit_phase(send=True)
    beta = inner.data_value(R2, w2)      # Bob's share of y0
    alpha = inner.circuit_value()        # Alice's share of y0

    final = beta ^ outer.circuit_value()
    transcript.record(BOB, [final], tag="final")
    return alpha ^ final, transcript


# --- scheme 10 ------------------------------------------------------------

def run_scheme10(x, poly, k, rng, distributed=False):
    """Classical analogue of scheme 8's parity algebra: each pad becomes a
    bit pair with x_ij in the slot selected by s_j and a random filler in
    the other; Bob returns the cross-slot parity over his a_i=1 pairs."""
    _check_params(x, poly, k)
    source = _as_source(rng)
    transcript = Transcript()
    n = poly.n

    s = [source.bit("s") for _ in range(k)]
    x_split = [_split_bit(x[i], k, source) for i in range(n)]
    pairs = {}
    payload = []
    for i in range(n):
        for j in range(k):
            filler = source.bit("filler")
            pair = ((x_split[i][j], filler) if s[j] == 0
                    else (filler, x_split[i][j]))
            pairs[i, j] = pair
            payload.extend(pair)
    transcript.record(ALICE, payload, tag="data")

    u, v, R = [], [], []
    for j in range(k):
        uj = vj = 0
        for i in range(n):
            if poly.a[i]:
                uj ^= pairs[i, j][0]
                vj ^= pairs[i, j][1]
        u.append(uj)
        v.append(vj)
        R.append(uj ^ vj)
    transcript.record(BOB, R, tag="R")

    y0 = 0
    for j in range(k):
        y0 ^= s[j] & R[j]
    bob_bit = poly.c
    for uj in u:
        bob_bit ^= uj
    if distributed:
        return DistributedBit(y0, bob_bit), transcript
    transcript.record(BOB, [bob_bit], tag="final")
    return y0 ^ bob_bit, transcript


def inner_product_demo(x, a, rng=None) -> int:
    """Bipartite inner product sum(a_i x_i) mod 2 via one scheme 8 call."""
    if len(x) != len(a):
        raise ValueError("input vectors must have equal length")
    out, _ = run_scheme8(x, LinearPolynomial(tuple(a), 0), 1,
                         rng if rng is not None else np.random.default_rng())
    return out
