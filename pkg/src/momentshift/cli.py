"""Command-line surface: synthesis, overhead sweeps, estimation, invariant
verification, and the Fermi-Hubbard demonstration.

Exit codes: 0 success, 1 usage error or failed verification, 2 infeasible /
moment unrecoverable, 3 solver non-convergence.  All floats are printed with
12 significant digits; every randomized command takes a --seed and is
bit-reproducible.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .channels import amplitude_damping, depolarizing, is_invertible, tensor_power
from .estimator import (
    plan_shots,
    renyi_entropy,
    run_protocol,
    run_to_csv,
    run_to_json,
    save_run,
)
from .hubbard import fig4_experiment, ground_state, build_hamiltonian, demo_model, reduced_state
from .moments import moment_observable
from .operators import Operator, random_density_matrix, tensor_product
from .protocols import (
    ad_second_moment,
    de_kth_moment,
    exact_expectation,
    from_sdp_solution,
    load_protocol,
    protocol_to_json,
    save_protocol,
)
from .sdp.programs import build_fmin, build_gmin, build_info_recover, gmin_power
from .sdp.solver import DEFAULT_TOL, solve
from .verify import run_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NO_CONVERGENCE = 3

INFEASIBLE_MSG = "noise channel not invertible or moment unrecoverable"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _noise_channel(model: str, eps: float, n: int):
    if model == "depolarizing":
        return depolarizing(eps, 2 ** n)
    if model == "amplitude-damping":
        if n != 1:
            raise SystemExit(_fail("amplitude damping is a single-qubit model (n=1)",
                                   EXIT_USAGE))
        return amplitude_damping(eps)
    raise SystemExit(_fail(f"unknown noise model {model!r}", EXIT_USAGE))


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _analytic_protocol(model: str, eps: float, k: int, n: int):
    """Closed-form retriever when the (model, k, n) triple has one."""
    if eps >= 1.0:
        return None
    if model == "depolarizing":
        return de_kth_moment(eps, k, 2 ** n)
    if model == "amplitude-damping" and k == 2 and n == 1:
        return ad_second_moment(eps)
    return None


def cmd_synthesize(args) -> int:
    protocol = None if args.force_sdp else _analytic_protocol(
        args.noise, args.eps, args.k, args.n)
    if protocol is not None:
        status, residual, iterations = "analytic", 0.0, 0
    else:
        noise = _noise_channel(args.noise, args.eps, args.n)
        if not is_invertible(noise):
            print(f"status: infeasible\n{INFEASIBLE_MSG}")
            return EXIT_INFEASIBLE
        h = moment_observable(args.k, noise.in_dim)
        sol = solve(build_fmin(noise, args.k, h), tol=args.tol)
        if sol.status == "infeasible":
            print(f"status: infeasible\n{INFEASIBLE_MSG}")
            return EXIT_INFEASIBLE
        if sol.status != "optimal":
            print(f"status: {sol.status} after {sol.iterations} iterations "
                  f"(residuals {_fmt(sol.primal_residual)}, {_fmt(sol.dual_residual)})")
            return EXIT_NO_CONVERGENCE
        protocol = from_sdp_solution(sol, args.k, h)
        status, residual, iterations = sol.status, max(
            sol.primal_residual, sol.dual_residual), sol.iterations
    print(f"f: {_fmt(protocol.f)}")
    print(f"t: {_fmt(protocol.t)}")
    print(f"status: {status}")
    print(f"residual: {_fmt(residual)}")
    print(f"iterations: {iterations}")
    if args.out:
        save_protocol(protocol, args.out)
        print(f"protocol written to {args.out}")
    elif args.format == "json":
        print(json.dumps(protocol_to_json(protocol)))
    return EXIT_OK


def _parse_grid(spec: str) -> list[float]:
    if ":" in spec:
        start, stop, num = spec.split(":")
        return [float(x) for x in np.linspace(float(start), float(stop), int(num))]
    return [float(x) for x in spec.split(",")]


def cmd_overhead_sweep(args) -> int:
    methods = args.methods.split(",")
    for m in methods:
        if m not in ("shift", "inverse", "recover"):
            return _fail(f"unknown method {m!r}", EXIT_USAGE)
    grid = _parse_grid(args.eps_grid)
    rows = []
    for eps in grid:
        for method in methods:
            value, status = _overhead_value(args.noise, eps, args.k, method, args.tol)
            rows.append((eps, method, value, status))
    header = ["eps", "method", "overhead", "status"]
    if args.format == "json":
        doc = [{"eps": eps, "method": method,
                "overhead": value if np.isfinite(value) else None, "status": status}
               for eps, method, value, status in rows]
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(doc, fh, indent=1)
            print(f"sweep written to {args.out}")
        else:
            print(json.dumps(doc))
        return EXIT_OK
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for eps, method, value, status in rows:
                w.writerow([_fmt(eps), method,
                            _fmt(value) if np.isfinite(value) else "NaN", status])
        print(f"sweep written to {args.out}")
    else:
        print(",".join(header))
        for eps, method, value, status in rows:
            print(f"{_fmt(eps)},{method},"
                  f"{_fmt(value) if np.isfinite(value) else 'NaN'},{status}")
    return EXIT_OK


def _overhead_value(model: str, eps: float, k: int, method: str,
                    tol: float) -> tuple[float, str]:
    if eps >= 1.0:
        return float("nan"), "infeasible"
    noise = _noise_channel(model, eps, 1)
    if method == "shift":
        # k = 2 optima are known in closed form; beyond that the program is
        # the authority (the recursive construction is achievable but can be
        # loose, e.g. depolarizing at k = 3)
        if k == 2:
            return 1.0 / (1.0 - eps) ** 2, "analytic"
        sol = solve(build_fmin(noise, k, moment_observable(k, 2)), tol=tol)
        return (sol.objective_value, sol.status) if sol.status == "optimal" \
            else (float("nan"), sol.status)
    if method == "inverse":
        sol = solve(build_gmin(noise), tol=tol)
        if sol.status != "optimal":
            return float("nan"), sol.status
        return gmin_power(sol.objective_value, k), sol.status
    sol = solve(build_info_recover(tensor_power(noise, k),
                                   moment_observable(k, 2).matrix), tol=tol)
    return (sol.objective_value, sol.status) if sol.status == "optimal" \
        else (float("nan"), sol.status)


def _load_state(args, protocol) -> Operator:
    d = protocol.copy_dim
    if args.state == "random":
        return random_density_matrix(d, args.state_seed)
    if args.state == "maxmixed":
        return Operator(np.eye(d) / d)
    if args.state == "hubbard":
        g = ground_state(build_hamiltonian(demo_model()))
        rho = reduced_state(g, [0, 1])
        if rho.dim != d:
            raise SystemExit(_fail(
                f"hubbard subsystem dim {rho.dim} != protocol copy dim {d}", EXIT_USAGE))
        return rho
    with open(args.state) as fh:
        rows = json.load(fh)
    m = np.array([[complex(re, im) for re, im in row] for row in rows])
    return Operator(m)


def cmd_estimate(args) -> int:
    protocol = load_protocol(args.protocol)
    noise = _noise_channel(args.noise, args.eps, args.n)
    if noise.in_dim != protocol.copy_dim:
        return _fail(f"noise dim {noise.in_dim} != protocol copy dim "
                     f"{protocol.copy_dim}", EXIT_USAGE)
    rho = _load_state(args, protocol)
    if args.exact:
        joint = rho
        for _ in range(protocol.k - 1):
            joint = tensor_product(joint, rho)
        zeta = exact_expectation(protocol, tensor_power(noise, protocol.k).apply(joint))
        est = protocol.f * zeta - protocol.t
        print(f"zeta: {_fmt(zeta)}")
        print(f"estimate: {_fmt(est)}")
        if args.renyi:
            print(f"renyi_{args.renyi}: {_fmt(renyi_entropy(est, args.renyi))}")
        return EXIT_OK
    if args.shots:
        shots = args.shots
    else:
        plan = plan_shots(args.delta, args.fail_prob, protocol.f)
        shots = plan.shots
        print(f"planned shots: {shots} (delta={_fmt(args.delta)}, "
              f"fail_prob={_fmt(args.fail_prob)}, f={_fmt(protocol.f)})")
    try:
        run = run_protocol(protocol, rho, noise, shots, args.seed)
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)
    print(f"shots: {run.shots}")
    print(f"zeta_bar: {_fmt(run.zeta_bar)}")
    print(f"estimate: {_fmt(run.estimate)}")
    if args.renyi:
        print(f"renyi_{args.renyi}: {_fmt(renyi_entropy(run.estimate, args.renyi))}")
    if args.out:
        if args.format == "csv":
            run_to_csv(run, args.out)
        else:
            save_run(run, args.out)
        print(f"run written to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suite(args.suite)
    failed = 0
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        failed += 0 if passed else 1
    report = {"suite": args.suite,
              "checks": [{"name": n, "passed": bool(p), "detail": d}
                         for n, p, d in results],
              "failed": failed}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=1)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_USAGE


def cmd_hubbard_demo(args) -> int:
    subsystem = [int(x) for x in args.subsystem.split(",")]
    res = fig4_experiment(args.eps, subsystem=subsystem, shots=args.shots,
                          trials=args.trials, seed=args.seed)
    summary = res.summary()
    se_raw, se_mit = res.std_errors()
    print(f"exact tr[rho_A^2]: {_fmt(res.exact_purity)}")
    print(f"analytic biased value: {_fmt(res.biased_value())}")
    print(f"raw mean: {_fmt(res.raw_mean)} (se {_fmt(se_raw)})")
    print(f"mitigated mean: {_fmt(res.mitigated_mean)} (se {_fmt(se_mit)})")
    if args.out:
        with open(args.out + ".csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial_index", "method", "estimate"])
            for trial, method, est in res.records():
                w.writerow([trial, method, _fmt(est)])
        with open(args.out + ".json", "w") as fh:
            json.dump(summary, fh, indent=1)
        print(f"written to {args.out}.csv and {args.out}.json")
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="momentshift",
                description="Retrieve density-matrix moments from noisy states")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, fmt="json"):
        sp.add_argument("--out", default=None, help="output file path")
        sp.add_argument("--format", choices=("json", "csv"), default=fmt)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="solver tolerance")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("synthesize", help="build a retrieval protocol")
    sp.add_argument("--noise", required=True,
                    choices=("depolarizing", "amplitude-damping"))
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--k", type=int, default=2, help="moment order")
    sp.add_argument("--n", type=int, default=1, help="qubits per copy")
    sp.add_argument("--force-sdp", action="store_true",
                    help="skip closed forms and always solve the program")
    common(sp)
    sp.set_defaults(fn=cmd_synthesize)

    sp = sub.add_parser("overhead-sweep", help="overhead vs noise level table")
    sp.add_argument("--noise", required=True,
                    choices=("depolarizing", "amplitude-damping"))
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--eps-grid", default="0:0.3:7",
                    help="start:stop:num or comma-separated values")
    sp.add_argument("--methods", default="shift,inverse,recover")
    common(sp, fmt="csv")
    sp.set_defaults(fn=cmd_overhead_sweep)

    sp = sub.add_parser("estimate", help="finite-shot or exact estimation")
    sp.add_argument("--protocol", required=True, help="protocol JSON file")
    sp.add_argument("--noise", required=True,
                    choices=("depolarizing", "amplitude-damping"))
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--state", default="random",
                    help="random | maxmixed | hubbard | path to density-matrix JSON")
    sp.add_argument("--state-seed", type=int, default=0)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--fail-prob", type=float, default=0.05)
    sp.add_argument("--shots", type=int, default=None)
    sp.add_argument("--exact", action="store_true",
                    help="dense evaluation, no sampling")
    sp.add_argument("--renyi", type=int, default=None,
                    help="also print the Renyi entropy of this order")
    common(sp)
    sp.set_defaults(fn=cmd_estimate)

    sp = sub.add_parser("verify", help="run module invariant suites")
    sp.add_argument("--suite", default="all",
                    choices=("all", "sdp", "protocols", "moments", "hubbard"))
    common(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("hubbard-demo", help="mitigated vs raw purity estimation")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--shots", type=int, default=4096)
    sp.add_argument("--trials", type=int, default=60)
    sp.add_argument("--subsystem", default="0,1",
                    help="comma-separated qubit indices of subsystem A")
    common(sp)
    sp.set_defaults(fn=cmd_hubbard_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
