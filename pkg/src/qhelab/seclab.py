"""Privacy analyzer and adversary bench for the linear-polynomial schemes.

Everything quantitative here comes from exact enumeration of the hidden
randomness (pad splits, basis bits, withheld teleport bits), never from
sampling; the mixtures are small enough that the average density operator
of the qubits a party receives can be built outright.  Only adversary
*dynamics* (how much a cheating measurement disturbs a live protocol run)
are Monte Carlo, and those report Wilson 95% intervals.

Layout conventions for views and outcome tables (shared so that the
density computations and the measurement enumerations can be compared):

- Pad pairs are ordered with variable index i outermost, pad index j
  inner; within each two-qubit pair the first (Z-carrier) qubit is the
  higher-order tensor factor.  Outcome integers use the same digit order.
- The round-trip schemes' views are averaged over the withheld teleport
  bits, which turn the non-carrier qubit of each pair into I/2.
- The one-way scheme's qubits carry no residual masks; its extra pad
  qubits (one per j) sit below the data qubits and average to I/2.

Bob's reference measurements: Z on the first qubit of each pair and X on
the second for the round-trip schemes (the views are diagonal in that
product basis, so this measurement is optimal and its classical mutual
information equals the Holevo quantity); the Hadamard eigenbasis per qubit
for the one-way scheme (the optimal axis for distinguishing the per-bit
views, which are not co-diagonalizable).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .harness import ALICE, BOB, bell_measure_with, measure_with
from .linpoly import LinearPolynomial, run_scheme4

DIM_CAP = 2 ** 12

_MIX = np.eye(2) / 2
_PZ = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
_PX = [np.full((2, 2), 0.5), np.array([[0.5, -0.5], [-0.5, 0.5]])]
# P(Hadamard-basis outcome 0 | computational bit 0) = cos^2(pi/8); the same
# number appears for |+> versus |->, so the outcome law is basis-blind.
_C8 = math.cos(math.pi / 8) ** 2


def _splits(x, k):
    """All pad tuples of length k XORing to x."""
    out = []
    for head in itertools.product((0, 1), repeat=k - 1):
        last = int(x) & 1
        for b in head:
            last ^= b
        out.append(head + (last,))
    return out


def _bits(value, n):
    return [(value >> i) & 1 for i in range(n)]


# --- Bob-view densities ---------------------------------------------------

def _pair_density(b, s):
    """Mask-averaged two-qubit pad pair: the non-carrier qubit is I/2."""
    if s == 0:
        return np.kron(_PZ[b], _MIX)
    return np.kron(_MIX, _PX[b])


def _variable_view(xi, k, s_vec):
    """2k-qubit view of one variable given its basis bits, pads averaged."""
    acc = np.zeros((4 ** k, 4 ** k))
    for pads in _splits(xi, k):
        term = np.array([[1.0]])
        for j in range(k):
            term = np.kron(term, _pair_density(pads[j], s_vec[j]))
        acc += term
    return acc / 2 ** (k - 1)


def _joint_pair_view(xbits, k, shared_s):
    """View of all 2kn pair qubits; shared_s picks one s_j per pad index
    versus independent s_ij per variable."""
    n = len(xbits)
    s_space = (itertools.product((0, 1), repeat=k) if shared_s
               else itertools.product((0, 1), repeat=n * k))
    acc = np.zeros((4 ** (n * k),) * 2)
    count = 0
    for s in s_space:
        term = np.array([[1.0]])
        for i in range(n):
            s_vec = s if shared_s else s[i * k:(i + 1) * k]
            term = np.kron(term, _variable_view(xbits[i], k, s_vec))
        acc += term
        count += 1
    return acc / count


def _bit_view_oneway(xi, k, s_vec):
    """k-qubit view of one variable in the one-way scheme, pads averaged."""
    acc = np.zeros((2 ** k, 2 ** k))
    for pads in _splits(xi, k):
        term = np.array([[1.0]])
        for j in range(k):
            term = np.kron(term, _PZ[pads[j]] if s_vec[j] == 0
                           else _PX[pads[j]])
        acc += term
    return acc / 2 ** (k - 1)


def _joint_oneway_view(xbits, k):
    n = len(xbits)
    acc = np.zeros((2 ** (k * (n + 1)),) * 2)
    pad_block = np.eye(2 ** k) / 2 ** k  # the t_j qubits average to I/2
    for s in itertools.product((0, 1), repeat=k):
        term = np.array([[1.0]])
        for i in range(n):
            term = np.kron(term, _bit_view_oneway(xbits[i], k, s))
        acc += np.kron(term, pad_block)
    return acc / 2 ** k


@dataclass(frozen=True)
class BobView:
    """Average density operator of the qubits Bob receives, conditioned on
    an input value (or uniform over inputs)."""

    scheme: str
    n: int
    k: int
    conditioning: object  # int bit value, tuple of bits, or "uniform"
    density: np.ndarray

    def __post_init__(self):
        rho = self.density
        dim = 2 ** self.num_qubits
        if rho.shape != (dim, dim):
            raise ValueError(f"scheme {self.scheme} view should cover "
                             f"{self.num_qubits} qubits")
        if not np.allclose(rho, rho.conj().T, atol=1e-9):
            raise ValueError("view density is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-9:
            raise ValueError("view density has trace != 1")
        if np.linalg.eigvalsh(rho).min() < -1e-9:
            raise ValueError("view density is not positive semidefinite")

    @property
    def num_qubits(self) -> int:
        per_var = {"4": 2 * self.k, "7": 2 * self.k, "8": self.k}[self.scheme]
        if isinstance(self.conditioning, (int, np.integer)):
            return per_var
        if self.scheme == "8":
            return self.k * (self.n + 1)
        return 2 * self.k * self.n


def bob_view(scheme, params, x) -> BobView:
    """Exact average of Bob's received state over Alice's hidden randomness.

    `x` is a single bit (per-variable view), a bit tuple (joint view over
    the whole input), or "uniform" (mixture over all inputs of the joint
    view).  params carries n (joint views only) and k.
    """
    scheme = str(scheme)
    k = int(params["k"])
    n = int(params.get("n", 1))
    if scheme not in ("4", "7", "8"):
        raise ValueError(f"no view construction for scheme {scheme!r}")

    if x == "uniform":
        views = [bob_view(scheme, params, tuple(_bits(v, n)))
                 for v in range(2 ** n)]
        rho = sum(v.density for v in views) / 2 ** n
        return BobView(scheme, n, k, "uniform", rho)

    if isinstance(x, (int, np.integer)):
        per_var = 2 * k if scheme in ("4", "7") else k
        _check_dim(per_var)
        build = _variable_view if scheme in ("4", "7") else _bit_view_oneway
        acc = sum(build(x, k, s) for s in itertools.product((0, 1), repeat=k))
        return BobView(scheme, 1, k, int(x), acc / 2 ** k)

    xbits = [int(b) & 1 for b in x]
    if len(xbits) != n:
        raise ValueError(f"input length {len(xbits)} != n={n}")
    if scheme == "8":
        _check_dim(k * (n + 1))
        rho = _joint_oneway_view(xbits, k)
    else:
        _check_dim(2 * k * n)
        rho = _joint_pair_view(xbits, k, shared_s=(scheme == "7"))
    return BobView(scheme, n, k, tuple(xbits), rho)


def _check_dim(qubits):
    if 2 ** qubits > DIM_CAP:
        raise ValueError(f"view on {qubits} qubits exceeds the dimension "
                         f"cap {DIM_CAP}")


def privacy_distance(scheme, params, input_a, input_b) -> float:
    """Trace distance between Bob's views for two inputs."""
    va = bob_view(scheme, params, input_a)
    vb = bob_view(scheme, params, input_b)
    return qsim.trace_distance(va.density, vb.density)


def theorem6_constants(n, k, inputs=None):
    """Pairwise view distances of the shared-basis scheme from the all-zero
    string to other inputs; they should all agree.  `inputs` limits which
    nonzero strings are checked (the large k*n cases are eigensolver-bound)."""
    params = {"n": n, "k": k}
    zero = tuple([0] * n)
    if inputs is None:
        inputs = [tuple(_bits(v, n)) for v in range(1, 2 ** n)]
    vals = [privacy_distance("7", params, zero, tuple(other))
            for other in inputs]
    return {"values": vals, "spread": max(vals) - min(vals), "c0": vals[0]}


def factorization_gap(scheme, n, k, x) -> float:
    """Trace distance between the joint view and the tensor product of the
    per-variable marginals (zero iff the per-variable views are
    independent in Bob's eyes)."""
    params = {"n": n, "k": k}
    joint = bob_view(scheme, params, tuple(x)).density
    q = 2 * k  # qubits per variable
    prod = np.array([[1.0]])
    for i in range(n):
        keep = range((n - 1 - i) * q, (n - i) * q)  # variable i sits high
        prod = np.kron(prod, qsim.partial_trace_matrix(joint, n * q, keep))
    return qsim.trace_distance(joint, prod)


# --- fixed-measurement outcome tables ------------------------------------

def _pair_outcome_vec(b, s):
    """Distribution of (Z on first qubit, X on second) over one pad pair;
    outcome index = 2*o_first + o_second."""
    v = np.zeros(4)
    if s == 0:
        v[(b << 1) | 0] = 0.5
        v[(b << 1) | 1] = 0.5
    else:
        v[(0 << 1) | b] = 0.5
        v[(1 << 1) | b] = 0.5
    return v


def _pair_table(n, k, shared_s, with_s=False):
    """p[x, m] for the round-trip schemes under the pair measurement; with
    with_s=True the column index becomes (s, m) so that conditioning on the
    basis bits is a plain mutual-information computation."""
    s_space = list(itertools.product((0, 1),
                                     repeat=k if shared_s else n * k))
    cols = 4 ** (n * k)
    table = np.zeros((2 ** n, len(s_space) * cols if with_s else cols))
    for xv in range(2 ** n):
        xbits = _bits(xv, n)
        for si, s in enumerate(s_space):
            for pads in itertools.product(*[_splits(xi, k) for xi in xbits]):
                vec = np.array([1.0])
                for i in range(n):
                    s_vec = s if shared_s else s[i * k:(i + 1) * k]
                    for j in range(k):
                        vec = np.kron(vec,
                                      _pair_outcome_vec(pads[i][j], s_vec[j]))
                if with_s:
                    table[xv, si * cols:(si + 1) * cols] += vec
                else:
                    table[xv] += vec
        table[xv] /= len(s_space) * 2 ** (n * (k - 1))
    return table


def _oneway_table(n, k):
    """p[x, m] for the one-way scheme under the per-qubit Hadamard-basis
    measurement; each qubit is a binary symmetric channel with crossover
    sin^2(pi/8) regardless of its encoding basis, and the t_j qubits are
    uniform noise."""
    qubits = k * (n + 1)
    table = np.zeros((2 ** n, 2 ** qubits))
    flat = np.full(2 ** k, 1.0 / 2 ** k)  # t_j outcome block
    for xv in range(2 ** n):
        xbits = _bits(xv, n)
        for pads in itertools.product(*[_splits(xi, k) for xi in xbits]):
            vec = np.array([1.0])
            for i in range(n):
                for j in range(k):
                    b = pads[i][j]
                    vec = np.kron(vec, np.array([_C8, 1 - _C8]) if b == 0
                                  else np.array([1 - _C8, _C8]))
            table[xv] += np.kron(vec, flat)
        table[xv] /= 2 ** (n * (k - 1))
    return table


def cmi_uniform(scheme, n, k) -> float:
    """Classical mutual information, in bits, between a uniform input and
    Bob's outcomes under his reference measurement."""
    scheme = str(scheme)
    if scheme == "7":
        _check_dim(2 * k * n)
        table = _pair_table(n, k, shared_s=True)
    elif scheme == "8":
        _check_dim(k * (n + 1))
        table = _oneway_table(n, k)
    else:
        raise ValueError(f"cmi_uniform supports schemes 7 and 8, not {scheme!r}")
    return qsim.mutual_information(table / 2 ** n)


def cmi_formula(kind, n, k) -> float:
    """Closed forms for the shared-basis scheme's mutual information.

    k1_exact: exact value at k=1 for any n.  n2_exact: exact value at n=2
    for any k.  two_bit_lower: the part induced by single- and two-bit
    correlations only, a lower-bound reference rather than an exact CMI.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if kind == "k1_exact":
        return n - 1 + 0.5 ** n
    if kind == "n2_exact":
        return 3.0 / 2 ** k - 1.0 / 2 ** (2 * k)
    if kind == "two_bit_lower":
        return n - (2 ** k - 1) * (1 - (1 - 0.5 ** k) ** n)
    raise ValueError(f"unknown formula kind {kind!r}")


def per_bit_information(scheme, n, k, i=0) -> float:
    """Mutual information between one input bit and the outcomes on its own
    qubits, marginalized out of the joint table."""
    scheme = str(scheme)
    if scheme in ("4", "7"):
        table = _pair_table(n, k, shared_s=(scheme == "7"))
        shaped = table.reshape((2 ** n,) + (4,) * (n * k))
        # keep variable i's pad digits (i outermost in the digit order)
        drop = tuple(1 + p for p in range(n * k)
                     if not i * k <= p < (i + 1) * k)
    elif scheme == "8":
        table = _oneway_table(n, k)
        shaped = table.reshape((2 ** n,) + (2,) * (k * (n + 1)))
        drop = tuple(1 + p for p in range(k * (n + 1))
                     if not i * k <= p < (i + 1) * k)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    marg = shaped.sum(axis=drop).reshape(2 ** n, -1)
    # collapse the input axis to the single bit x_i
    out = np.zeros((2, marg.shape[1]))
    for xv in range(2 ** n):
        out[(xv >> i) & 1] += marg[xv]
    return qsim.mutual_information(out / 2 ** n)


def conditioned_information(scheme, n, k) -> float:
    """Information about the input available to Bob when the basis bits are
    conditioned on after his fixed measurement.

    Round-trip scheme: Z/X pair outcomes joined with the s_j values (each
    pair's carrier slot then reveals its pad, so the result is n bits).
    One-way scheme: Bob CNOTs same-index qubits of consecutive variables,
    measures control in X and target in Z, and conditions on (s, sum t);
    each pair group then reveals x_i + x_{i+1}.
    """
    scheme = str(scheme)
    if scheme == "7":
        table = _pair_table(n, k, shared_s=True, with_s=True)
        return qsim.mutual_information(table / 2 ** n)
    if scheme == "8":
        return _oneway_pairing_information(n, k)
    raise ValueError(f"unknown scheme {scheme!r}")


def _oneway_pairing_information(n, k):
    """I(X; outcomes, s, sum t) for the CNOT-pairing strategy against the
    one-way scheme.  Per pair and pad index the X outcome on the control
    carries the pad sum when s_j=1 and the Z outcome on the target carries
    it when s_j=0; the other slot is uniform."""
    pairs = [(i, i + 1) for i in range(0, n - 1, 2)]
    odd = n % 2
    groups = len(pairs) + odd
    cols_m = 4 ** (groups * k)
    table = np.zeros((2 ** n, 2 ** k * 2 * cols_m))
    for xv in range(2 ** n):
        xbits = _bits(xv, n)
        for s in itertools.product((0, 1), repeat=k):
            si = sum(b << j for j, b in enumerate(s))
            for pads in itertools.product(*[_splits(xi, k) for xi in xbits]):
                for t in itertools.product((0, 1), repeat=k * odd):
                    tsum = 0
                    for tb in t:
                        tsum ^= tb
                    vec = np.array([1.0])
                    for j in range(k):
                        for a, b in pairs:
                            vec = np.kron(vec, _pair_outcome_vec(
                                pads[a][j] ^ pads[b][j], 1 - s[j]))
                        if odd:
                            vec = np.kron(vec, _pair_outcome_vec(
                                pads[n - 1][j] ^ t[j], 1 - s[j]))
                    col = (si * 2 + tsum) * cols_m
                    table[xv, col:col + cols_m] += vec
        table[xv] /= 2 ** (k + n * (k - 1) + k * odd)
    return qsim.mutual_information(table / 2 ** n)


def holevo_crosscheck(n, k):
    """Holevo quantity of the uniform view ensemble versus the enumerated
    CMI for the shared-basis scheme; the views commute (they are diagonal
    in the fixed Z/X product basis), so the two must agree."""
    params = {"n": n, "k": k}
    views = [bob_view("7", params, tuple(_bits(v, n))).density
             for v in range(2 ** n)]
    comm = max(np.abs(a @ b - b @ a).max()
               for a, b in itertools.combinations(views, 2))
    chi = qsim.holevo([(2.0 ** -n, rho) for rho in views])
    return {"holevo": chi, "cmi": cmi_uniform("7", n, k),
            "max_commutator": float(comm)}


# --- adversary strategies -------------------------------------------------

@dataclass
class AdversaryStrategy:
    """A scripted deviation; the protocol runners verify that a strategy is
    only ever plugged into its own party's interface."""

    party: str
    strategy_id: str
    description: str
    parameters: dict = field(default_factory=dict)


_PROBE_VEC = np.array([1.0, 1.0, 1.0, -1.0]) / 2
# (|0>|+> + |1>|->)/sqrt2 on (first, second); Bob's conditional CNOT sends
# it to (|0>|+> -+ |1>|->)/sqrt2, two orthogonal states indexed by a_i.


class ProbeAlice(AdversaryStrategy):
    """Substitute one pad pair with an entangled probe, identify Bob's
    coefficient a_i from the returned pair, and fake that pair's decoded
    contribution.

    Decode: undo the known forward masks (they commute with Bob's possible
    CNOT), rotate the second qubit by H, and Bell-measure.  The Bell bits
    (Xobs, Zobs) then satisfy Zobs ^ Xobs ^ v = 1 ^ a_i, identifying a_i
    with certainty.  The contribution Alice owes is a_i*x_ij ^ mx1 ^ mx2,
    but her observations fix mx1 ^ mx2 only up to Bob's withheld mx2 ^ mz2,
    so her reported share is wrong with probability 1/2.
    """

    def __init__(self, target=(0, 0)):
        super().__init__(ALICE, "probe",
                         "entangled pad probe identifying one coefficient",
                         {"target": target})
        self.identified = []

    def probe_target(self, n, k):
        return self.parameters["target"]

    def probe_state(self):
        return qsim.QuantumState(_PROBE_VEC.copy(), owners=[ALICE, ALICE])

    def measure_pair(self, state, x_ij, s, v, fwd_z1, fwd_x2, source):
        st = state
        if fwd_z1:
            st = qsim.apply_gate(st, qsim.Z, [0])
        if fwd_x2:
            st = qsim.apply_gate(st, qsim.X, [1])
        st = qsim.apply_gate(st, qsim.H, [1])
        (xobs, zobs), _ = bell_measure_with(source, st, 0, 1)
        a_hat = xobs ^ zobs ^ v ^ 1
        self.identified.append(a_hat)
        return (a_hat & x_ij) ^ xobs  # guesses Bob's mx2 ^ mz2 as 0


class HonestAlice(AdversaryStrategy):
    """Baseline: no deviation; coefficient guesses are coin flips."""

    def __init__(self):
        super().__init__(ALICE, "honest", "no deviation", {})
        self.identified = []


class MeasuringBob(AdversaryStrategy):
    """Measure every received pair in the fixed Z-first/X-second basis and
    guess the pad bit, then continue the protocol on the collapsed state."""

    def __init__(self):
        super().__init__(BOB, "measure",
                         "pair measurement in the fixed optimal basis", {})
        self.guesses = {}

    def intercept(self, state, i, j, source):
        o1, st = measure_with(source, state, "Z", 0)
        o2, st = measure_with(source, st, "X", 1)
        # outcomes 00/11 scream x=0, 10/01 scream x=1; ties broken toward
        # the Z outcome, which is optimal for the actual view
        self.guesses[i, j] = o1 if o1 == o2 else o1
        return st


ALICE_STRATEGIES = {"probe": ProbeAlice, "honest": HonestAlice}


def wilson_interval(successes, trials, z=1.959963984540054):
    """95% score interval for a binomial rate."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials
                                   + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def bob_guess_rate(k) -> float:
    """Exact success probability of the fixed pair measurement guessing a
    uniformly random variable encoded in k pad pairs."""
    joint = _pair_table(1, k, shared_s=False) / 2
    return float(np.max(joint, axis=0).sum())


def cheating_bob(scheme, params, rng, trials=10_000):
    """Analytic guess rates plus the Monte Carlo evaluation-error rate a
    measuring Bob induces by continuing the protocol after measuring."""
    if str(scheme) != "4":
        raise ValueError("the measuring-Bob bench targets scheme 4")
    k = int(params["k"])
    n = int(params.get("n", 1))
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    errors = 0
    for _ in range(trials):
        x = [int(b) for b in rng.integers(0, 2, size=n)]
        poly = LinearPolynomial(tuple(rng.integers(0, 2, size=n)),
                                int(rng.integers(0, 2)))
        out, _ = run_scheme4(x, poly, k, rng, bob_strategy=MeasuringBob())
        errors += int(out != poly.evaluate(x))
    lo, hi = wilson_interval(errors, trials)
    return {
        "scheme": "4", "n": n, "k": k,
        "per_pair_guess_rate": bob_guess_rate(1),
        "per_variable_guess_rate": bob_guess_rate(k),
        "induced_error_rate": errors / trials,
        "induced_error_interval": (lo, hi),
        "trials": trials,
    }


def cheating_alice(scheme, strategy, params, rng, trials=10_000):
    """Monte Carlo bench of a cheating Alice against scheme 4: coefficient
    identification rate and the error rate of the output she still
    produces."""
    if str(scheme) != "4":
        raise ValueError("the cheating-Alice bench targets scheme 4")
    if strategy not in ALICE_STRATEGIES:
        raise ValueError(f"unknown Alice strategy {strategy!r}")
    k = int(params["k"])
    n = int(params.get("n", 1))
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    identified = errors = 0
    for _ in range(trials):
        strat = ALICE_STRATEGIES[strategy]()
        x = [int(b) for b in rng.integers(0, 2, size=n)]
        poly = LinearPolynomial(tuple(rng.integers(0, 2, size=n)),
                                int(rng.integers(0, 2)))
        if strategy == "honest":
            out, _ = run_scheme4(x, poly, k, rng)
            a_hat, i0 = int(rng.integers(0, 2)), 0
        else:
            out, _ = run_scheme4(x, poly, k, rng, alice_strategy=strat)
            a_hat = strat.identified[-1]
            i0 = strat.probe_target(n, k)[0]
        identified += int(a_hat == poly.a[i0])
        errors += int(out != poly.evaluate(x))
    id_lo, id_hi = wilson_interval(identified, trials)
    err_lo, err_hi = wilson_interval(errors, trials)
    return {
        "scheme": "4", "n": n, "k": k, "strategy": strategy,
        "identification_rate": identified / trials,
        "identification_interval": (id_lo, id_hi),
        "outcome_error_rate": errors / trials,
        "outcome_error_interval": (err_lo, err_hi),
        "trials": trials,
    }


def scheme6_detection(circuit, input_state, k, traps, rng, trials,
                      strategy_factory=ProbeAlice):
    """Fraction of trap-augmented runs that abort when every distributed
    evaluation is probed by the given Alice strategy (None = honest)."""
    from .qhe_core import run_scheme6  # local import to avoid a cycle
    rng = np.random.default_rng(rng) if isinstance(rng, int) else rng
    aborts = 0
    for _ in range(trials):
        strat = strategy_factory() if strategy_factory is not None else None
        run = run_scheme6(circuit, input_state, k, traps, rng,
                          alice_strategy=strat)
        aborts += int(run.aborted is not None)
    lo, hi = wilson_interval(aborts, trials)
    return {"traps": traps, "trials": trials,
            "detection_rate": aborts / trials,
            "detection_interval": (lo, hi)}
