"""Batch experiment runner and report emitter.

Commands:

- run: correctness experiments over a parameter grid (exhaustive hidden-bit
  enumeration or seeded trials for the classical-output schemes, fidelity
  trials for the circuit-evaluation schemes).
- audit: privacy metrics and communication accounting against registered
  expected values.
- adversary: scripted cheating strategies with Monte Carlo rates.
- list-schemes: inventory of runnable protocols.

Reports are JSON lines, one row per (scheme, params, metric), each carrying
expected/observed/tolerance/pass/seed/provenance so a report is
self-describing.  Rows contain no timestamps and all sampling is seeded, so
identical configurations produce byte-identical reports.  Grid points can
be dispatched to a process pool via the QHELAB_WORKERS environment
variable; rows are emitted in grid order either way.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import qsim, rebit, rebit_schemes, seclab
from .harness import RandomBits, comm_audit, enumerate_hidden_adaptive
from .linpoly import (LinearPolynomial, run_scheme4, run_scheme7, run_scheme8,
                      run_scheme9, run_scheme10, _as_source)
from .qhe_core import CliffordTCircuit, random_clifford_t, run_scheme5

SCHEMES = {
    "1": "remote Y-diagonal circuit evaluation (single-qubit phase layers)",
    "2": "remote Y-diagonal circuit evaluation (global layers, 2n-bit reply)",
    "4": "linear polynomial via independent-basis pad pairs",
    "5": "interactive Clifford+T evaluation over pad-pair subprotocols",
    "6": "scheme 5 with trap-qubit verification",
    "7": "linear polynomial via shared-basis pad pairs",
    "8": "linear polynomial via one-way single-qubit encodings",
    "9": "scheme 8 composed with a role-reversed inner instance",
    "10": "classical bit-pair analogue of scheme 8",
}

TOL_EXACT = 1e-9
TOL_FIDELITY = 1e-8


@dataclass
class SchemeReport:
    """One report row; `comparison` is \"==\" for tolerance checks and an
    inequality for Monte Carlo threshold checks."""

    scheme: str
    params: dict
    metric: str
    expected: object
    observed: object
    tolerance: object
    comparison: str
    passed: bool
    seed: object
    provenance: str

    def to_json(self) -> str:
        row = asdict(self)
        row["pass"] = row.pop("passed")
        return json.dumps(row, sort_keys=True)


def _row(scheme, params, metric, expected, observed, tolerance, seed,
         provenance, comparison="=="):
    if comparison == "==":
        ok = (expected is None
              or abs(observed - expected) <= (tolerance or 0.0))
    elif comparison == ">=":
        ok = observed >= expected
    elif comparison == "<=":
        ok = observed <= expected
    else:
        raise ValueError(f"unknown comparison {comparison!r}")
    return SchemeReport(str(scheme), dict(params), metric, expected,
                        observed, tolerance, comparison, bool(ok), seed,
                        provenance)


def _parse_range(text):
    """Grid axis syntax: "2", "1..3", or "1,2,4"."""
    text = str(text)
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


# --- correctness runners --------------------------------------------------

def _classical_run(scheme, x, poly, k, source, gamma, k_prime):
    if scheme == "4":
        return run_scheme4(x, poly, k, source)[0]
    if scheme == "7":
        return run_scheme7(x, poly, k, source)[0]
    if scheme == "8":
        return run_scheme8(x, poly, k, source)[0]
    if scheme == "9":
        return run_scheme9(x, poly, gamma, k_prime, source)[0]
    if scheme == "10":
        return run_scheme10(x, poly, k, source)[0]
    raise ValueError(f"scheme {scheme} has no classical runner")


def _classical_point(scheme, n, k, seed, trials, exhaustive, gamma, k_prime,
                     max_bits):
    """One grid point of the classical-output schemes: count failing cases
    over all (x, a, c), either exhausting the hidden randomness per case or
    running seeded trials."""
    failures = cases = 0
    rng = np.random.default_rng(seed)
    for xv in range(2 ** n):
        x = [(xv >> i) & 1 for i in range(n)]
        for av in range(2 ** n):
            for c in (0, 1):
                poly = LinearPolynomial(
                    tuple((av >> i) & 1 for i in range(n)), c)
                want = poly.evaluate(x)
                if exhaustive:
                    for _, got in enumerate_hidden_adaptive(
                            lambda src: _classical_run(scheme, x, poly, k,
                                                       src, gamma, k_prime),
                            max_bits=max_bits):
                        cases += 1
                        failures += int(got != want)
                else:
                    for _ in range(trials):
                        got = _classical_run(scheme, x, poly, k,
                                             _as_source(rng), gamma, k_prime)
                        cases += 1
                        failures += int(got != want)
    return failures, cases


def _scheme5_point(n, r_cap, k, seed, trials):
    rng = np.random.default_rng(seed)
    fids = []
    for _ in range(trials):
        circuit = random_clifford_t(n, r_cap, rng)
        psi = qsim.random_state(n, rng)
        run = run_scheme5(circuit, psi, k, rng)
        fids.append(qsim.fidelity(run.state, circuit.apply(psi)))
    return fids


def random_accircuit(scheme, n, depth, rng):
    """Random circuit accepted by the Y-diagonal evaluation schemes: global
    product-of-R_y layers alternating with R_z(j*pi/2) layers (on the first
    data qubit for scheme 1)."""
    layers = []
    for _ in range(depth):
        if rng.random() < 0.5:
            u = rebit_schemes.named_generator("ry_product", n,
                                              float(rng.uniform(0, math.pi)))
            layers.append(rebit_schemes.Layer("ydiag", tuple(range(n)), u=u))
        else:
            q = 0 if scheme == "1" else int(rng.integers(n))
            layers.append(rebit_schemes.Layer("rz", (q,),
                                              j=int(rng.choice([1, 3]))))
    return rebit_schemes.AlmostCommutingCircuit(n, layers)


def _rebit_point(scheme, n, depth, seed, trials):
    rng = np.random.default_rng(seed)
    runner = (rebit_schemes.run_scheme1 if scheme == "1"
              else rebit_schemes.run_scheme2)
    fids = []
    for _ in range(trials):
        circuit = random_accircuit(scheme, n, depth, rng)
        psi = qsim.random_state(n, rng)
        enc = qsim.QuantumState(rebit.rebit_encode(psi))
        run = runner(circuit, enc, RandomBits(rng))
        got = rebit.rebit_decode_logical(run.state)
        want = rebit_schemes.logical_oracle(circuit, psi.vec)
        fids.append(qsim.fidelity(got, want))
    return fids


# --- command implementations ----------------------------------------------

def _execute_point(spec):
    """Dispatchable unit of work: one grid point -> list of report rows."""
    cmd = spec["cmd"]
    scheme = spec["scheme"]
    seed = spec["seed"]
    if cmd == "run-classical":
        failures, cases = _classical_point(
            scheme, spec["n"], spec["k"], seed, spec["trials"],
            spec["exhaustive"], spec["gamma"], spec["k_prime"],
            spec["max_bits"])
        params = {"n": spec["n"], "k": spec["k"], "cases": cases,
                  "mode": "exhaustive" if spec["exhaustive"] else "sampled"}
        if scheme == "9":
            params.update(gamma=spec["gamma"], k_prime=spec["k_prime"])
        prov = ("exhaustive-enumeration" if spec["exhaustive"]
                else "seeded-trials")
        return [_row(scheme, params, "correctness-failures", 0, failures,
                     0, seed, prov)]
    if cmd == "run-scheme5":
        fids = _scheme5_point(spec["n"], spec["R"], spec["k"], seed,
                              spec["trials"])
        return [_row("5", {"n": spec["n"], "R": spec["R"], "k": spec["k"],
                           "trial": t},
                     "fidelity", 1.0, f, TOL_FIDELITY, seed,
                     "direct-simulation")
                for t, f in enumerate(fids)]
    if cmd == "run-rebit":
        fids = _rebit_point(scheme, spec["n"], spec["depth"], seed,
                            spec["trials"])
        return [_row(scheme, {"n": spec["n"], "depth": spec["depth"],
                              "trial": t},
                     "fidelity", 1.0, f, TOL_FIDELITY, seed,
                     "logical-oracle")
                for t, f in enumerate(fids)]
    if cmd == "audit":
        return _audit_point(spec)
    if cmd == "adversary":
        return _adversary_point(spec)
    raise ValueError(f"unknown work item {cmd!r}")


def _audit_point(spec):
    scheme, metric, seed = spec["scheme"], spec["metric"], spec["seed"]
    n, k = spec["n"], spec["k"]
    rows = []
    if metric == "trace-distance":
        if scheme == "4":
            obs = seclab.privacy_distance("4", {"k": k}, 0, 1)
            rows.append(_row("4", {"k": k}, metric, 0.5 ** k, obs, TOL_EXACT,
                             seed, "exact-enumeration"))
        elif scheme == "8":
            obs = seclab.privacy_distance("8", {"k": k}, 0, 1)
            rows.append(_row("8", {"k": k}, metric, 2.0 ** (-k / 2), obs,
                             TOL_EXACT, seed, "exact-enumeration"))
        elif scheme == "7":
            res = seclab.theorem6_constants(n, k)
            rows.append(_row("7", {"n": n, "k": k}, "trace-distance-c0",
                             None, res["c0"], None, seed,
                             "exact-enumeration"))
            rows.append(_row("7", {"n": n, "k": k}, "trace-distance-spread",
                             0.0, res["spread"], TOL_EXACT, seed,
                             "exact-enumeration"))
        else:
            raise ValueError(f"no trace-distance audit for scheme {scheme}")
    elif metric == "cmi":
        obs = seclab.cmi_uniform(scheme, n, k)
        if scheme == "7" and k == 1:
            expected = seclab.cmi_formula("k1_exact", n, k)
        elif scheme == "7" and n == 2:
            expected = seclab.cmi_formula("n2_exact", n, k)
        else:
            expected = None
        rows.append(_row(scheme, {"n": n, "k": k}, metric, expected, obs,
                         TOL_EXACT if expected is not None else None, seed,
                         "exact-enumeration"))
    elif metric == "comm":
        rows.extend(_comm_audit(scheme, n, k, seed, spec))
    else:
        raise ValueError(f"unknown audit metric {metric!r}")
    return rows


def _comm_audit(scheme, n, k, seed, spec):
    """Bob->Alice bit counts of one live run versus the closed forms."""
    rng = np.random.default_rng(seed)
    rows = []
    if scheme == "2":
        circuit = random_accircuit("2", n, spec.get("depth", 2), rng)
        psi = qsim.random_state(n, rng)
        enc = qsim.QuantumState(rebit.rebit_encode(psi))
        run = rebit_schemes.run_scheme2(circuit, enc, RandomBits(rng))
        obs = comm_audit(run.transcript, "Bob->Alice")
        rows.append(_row("2", {"n": n}, "comm-bob-to-alice", 2 * n, obs, 0,
                         seed, "protocol-audit"))
        return rows
    if scheme == "5":
        circuit = random_clifford_t(n, spec.get("R", 1), rng)
        run = run_scheme5(circuit, qsim.random_state(n, rng), k, rng)
        rows.append(_row("5", {"n": n, "R": spec.get("R", 1), "k": k},
                         "subprotocol-instances",
                         2 * n + spec.get("R", 1),
                         run.report.instance_count, 0, seed,
                         "protocol-audit"))
        rows.append(_row("5", {"n": n, "R": spec.get("R", 1), "k": k},
                         "key-variables", 2 * n + 4 * spec.get("R", 1),
                         run.report.nvars, 0, seed, "protocol-audit"))
        return rows
    x = [int(b) for b in rng.integers(0, 2, size=n)]
    poly = LinearPolynomial(tuple(rng.integers(0, 2, size=n)),
                            int(rng.integers(0, 2)))
    if scheme == "4":
        _, tr = run_scheme4(x, poly, k, rng)
        expected = n * k + 1
    elif scheme == "7":
        _, tr = run_scheme7(x, poly, k, rng)
        expected = k + 1
    elif scheme == "8":
        _, tr = run_scheme8(x, poly, k, rng)
        expected = k + 2
    elif scheme == "10":
        _, tr = run_scheme10(x, poly, k, rng)
        expected = k + 1
    else:
        raise ValueError(f"no communication audit for scheme {scheme}")
    obs = comm_audit(tr, "Bob->Alice")
    rows.append(_row(scheme, {"n": n, "k": k}, "comm-bob-to-alice", expected,
                     obs, 0, seed, "protocol-audit"))
    return rows


def _adversary_point(spec):
    scheme, seed = spec["scheme"], spec["seed"]
    n, k, trials = spec["n"], spec["k"], spec["trials"]
    rows = []
    if scheme == "6":
        circuit = CliffordTCircuit(1, (("H", (0,)), ("P", (0,))))
        psi = qsim.random_state(1, np.random.default_rng(seed))
        honest = spec["strategy"] == "honest"
        res = seclab.scheme6_detection(
            circuit, psi, k, spec["traps"], seed, trials,
            strategy_factory=None if honest else seclab.ProbeAlice)
        params = {"k": k, "traps": spec["traps"], "trials": trials,
                  "strategy": spec["strategy"]}
        if honest:
            rows.append(_row("6", params, "abort-rate", 0.0,
                             res["detection_rate"], 0.0, seed,
                             "monte-carlo"))
        else:
            rows.append(_row("6", params, "detection-rate", 0.5,
                             res["detection_rate"], None, seed,
                             "monte-carlo", comparison=">="))
        return rows
    if spec["party"] == "bob":
        res = seclab.cheating_bob("4", {"n": n, "k": k}, seed, trials=trials)
        params = {"n": n, "k": k, "trials": trials}
        rows.append(_row("4", params, "per-pair-guess-rate", 0.75,
                         res["per_pair_guess_rate"], 1e-12, seed,
                         "exact-enumeration"))
        rows.append(_row("4", params, "per-variable-guess-rate",
                         0.5 + 0.5 ** (k + 1),
                         res["per_variable_guess_rate"], 1e-12, seed,
                         "exact-enumeration"))
        lo, _ = res["induced_error_interval"]
        rows.append(_row("4", params, "induced-error-wilson-low", 0.1, lo,
                         None, seed, "monte-carlo", comparison=">="))
        return rows
    res = seclab.cheating_alice("4", spec["strategy"], {"n": n, "k": k},
                                seed, trials=trials)
    params = {"n": n, "k": k, "trials": trials,
              "strategy": spec["strategy"]}
    if spec["strategy"] == "probe":
        rows.append(_row("4", params, "identification-rate", 1.0,
                         res["identification_rate"], 0.0, seed,
                         "monte-carlo"))
        lo, _ = res["outcome_error_interval"]
        rows.append(_row("4", params, "outcome-error-wilson-low", 0.2, lo,
                         None, seed, "monte-carlo", comparison=">="))
    else:
        rows.append(_row("4", params, "identification-rate", None,
                         res["identification_rate"], None, seed,
                         "monte-carlo"))
        rows.append(_row("4", params, "outcome-error-rate", 0.0,
                         res["outcome_error_rate"], 0.0, seed,
                         "monte-carlo"))
    return rows


# --- argument plumbing ----------------------------------------------------

def _build_parser():
    p = argparse.ArgumentParser(prog="qhelab",
                                description="scheme laboratory batch runner")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeded=True):
        sp.add_argument("--seed", type=int, required=seeded,
                        help="base seed; mandatory for sampled experiments")
        sp.add_argument("--output", default=None,
                        help="report path (default stdout)")
        sp.add_argument("--config", default=None,
                        help="JSON file whose keys override flags")

    run = sub.add_parser("run", help="correctness experiments")
    run.add_argument("--scheme", required=True, choices=sorted(SCHEMES))
    run.add_argument("--n", default="1")
    run.add_argument("--k", default="1")
    run.add_argument("--R", type=int, default=1)
    run.add_argument("--depth", type=int, default=2)
    run.add_argument("--gamma", type=float, default=1.5)
    run.add_argument("--k-prime", type=int, default=1)
    run.add_argument("--trials", type=int, default=20)
    run.add_argument("--exhaustive", action="store_true")
    run.add_argument("--max-bits", type=int, default=24)
    common(run)

    audit = sub.add_parser("audit", help="privacy and communication audits")
    audit.add_argument("--metric", required=True,
                       choices=["trace-distance", "cmi", "comm"])
    audit.add_argument("--scheme", required=True, choices=sorted(SCHEMES))
    audit.add_argument("--n", default="1")
    audit.add_argument("--k", default="1")
    audit.add_argument("--R", type=int, default=1)
    audit.add_argument("--depth", type=int, default=2)
    common(audit)

    adv = sub.add_parser("adversary", help="cheating-strategy benches")
    adv.add_argument("--party", choices=["alice", "bob"], default="alice")
    adv.add_argument("--scheme", required=True, choices=["4", "6"])
    adv.add_argument("--strategy", default="probe",
                     choices=["probe", "honest", "measure"])
    adv.add_argument("--n", default="1")
    adv.add_argument("--k", default="1")
    adv.add_argument("--traps", type=int, default=4)
    adv.add_argument("--trials", type=int, default=1000)
    common(adv)

    sub.add_parser("list-schemes", help="inventory of runnable protocols")
    return p


def _grid_specs(args):
    """Expand the parsed arguments into per-grid-point work items."""
    ns, ks = _parse_range(args.n), _parse_range(args.k)
    if any(n < 1 for n in ns) or any(k < 1 for k in ks):
        raise ValueError("n and k must be positive")
    specs = []
    for idx, (n, k) in enumerate((n, k) for n in ns for k in ks):
        seed = args.seed + 1000 * idx
        if args.command == "run":
            if args.scheme in ("4", "7", "8", "9", "10"):
                specs.append({"cmd": "run-classical", "scheme": args.scheme,
                              "n": n, "k": k, "seed": seed,
                              "trials": args.trials,
                              "exhaustive": args.exhaustive,
                              "gamma": args.gamma,
                              "k_prime": args.k_prime,
                              "max_bits": args.max_bits})
            elif args.scheme == "5":
                specs.append({"cmd": "run-scheme5", "scheme": "5", "n": n,
                              "k": k, "R": args.R, "seed": seed,
                              "trials": args.trials})
            elif args.scheme in ("1", "2"):
                specs.append({"cmd": "run-rebit", "scheme": args.scheme,
                              "n": n, "depth": args.depth, "seed": seed,
                              "trials": args.trials})
            else:
                raise ValueError(f"scheme {args.scheme} has no run mode; "
                                 "use the adversary command for scheme 6")
        elif args.command == "audit":
            specs.append({"cmd": "audit", "scheme": args.scheme,
                          "metric": args.metric, "n": n, "k": k,
                          "R": args.R, "depth": args.depth, "seed": seed})
        elif args.command == "adversary":
            specs.append({"cmd": "adversary", "scheme": args.scheme,
                          "party": args.party, "strategy": args.strategy,
                          "n": n, "k": k, "traps": args.traps,
                          "trials": args.trials, "seed": seed})
    return specs


def _emit(rows, output):
    text = "".join(r.to_json() + "\n" for r in rows)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-schemes":
        for sid in sorted(SCHEMES, key=int):
            print(f"{sid}\t{SCHEMES[sid]}")
        return 0
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            for key, value in json.load(fh).items():
                setattr(args, key.replace("-", "_"), value)
    try:
        specs = _grid_specs(args)
        workers = int(os.environ.get("QHELAB_WORKERS", "1"))
        if workers > 1 and len(specs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                per_point = list(pool.map(_execute_point, specs))
        else:
            per_point = [_execute_point(s) for s in specs]
        rows = [row for point in per_point for row in point]
    except (ValueError, KeyError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc)}) + "\n")
        return 2
    _emit(rows, args.output)
    return 0 if all(r.passed for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
