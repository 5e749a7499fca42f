"""Named invariant suites behind the ``verify`` CLI command.

Each check returns (name, passed, detail).  Suites are deliberately cheaper
than the full acceptance tests: they cover the module invariants at k = 2
(plus structural identities up to k = 5 and the Q-matrix condition up to
k = 100) and are meant as a quick health gate.
"""

from __future__ import annotations

import numpy as np

from .channels import (
    amplitude_damping,
    choi_of,
    compose,
    depolarizing,
    identity_channel,
    is_invertible,
    link_product,
    tensor_power,
)
from .moments import cyclic_permutation, moment_observable, permutation_eigenprojectors
from .operators import (
    Operator,
    partial_trace,
    random_density_matrix,
    tensor_product,
)
from .protocols import (
    ad_second_moment,
    de_second_moment,
    de_second_moment_nqubit,
    exact_expectation,
    q_matrices,
    recovery_map,
    transfer_maps,
)
from .sdp.programs import build_dual_fmin, build_fmin, build_gmin, gmin_power
from .sdp.solver import solve
from .hubbard import annihilation_operator, build_hamiltonian, ground_state, demo_model

EPS_GRID = (0.05, 0.1, 0.2, 0.3)


def _noisy_copies(rho, noise, k):
    joint = rho
    for _ in range(k - 1):
        joint = tensor_product(joint, rho)
    return tensor_power(noise, k).apply(joint)


def _true_moment(rho, k):
    return float(np.trace(np.linalg.matrix_power(rho.entries, k)).real)


def checks_moments() -> list[tuple[str, bool, str]]:
    out = []
    worst = 0.0
    for k in range(2, 6):
        s = cyclic_permutation(k, 2)
        h = moment_observable(k, 2).matrix
        for seed in range(100 if k == 2 else 20):
            rho = random_density_matrix(2, seed)
            joint = rho
            for _ in range(k - 1):
                joint = tensor_product(joint, rho)
            truth = _true_moment(rho, k)
            for mat in (s.entries, s.entries.conj().T, h.entries):
                worst = max(worst, abs(np.trace(mat @ joint.entries).real - truth))
    out.append(("cyclic_trace_identity_k2_5", worst < 1e-10, f"max err {worst:.2e}"))

    worst = 0.0
    for k in range(2, 6):
        spec = permutation_eigenprojectors(k, 2)
        om = np.exp(2j * np.pi / k)
        s_rec = sum(om ** (-m) * spec.projectors[m].entries for m in range(k))
        worst = max(worst, float(np.max(np.abs(s_rec - cyclic_permutation(k, 2).entries))))
        for m in range(k):
            for mp in range(k):
                prod = spec.projectors[m].entries @ spec.projectors[mp].entries
                ref = spec.projectors[m].entries if m == mp else 0.0
                worst = max(worst, float(np.max(np.abs(prod - ref))))
    out.append(("spectral_reconstruction_k2_5", worst < 1e-10, f"max err {worst:.2e}"))

    bound_ok = True
    for k in range(2, 6):
        w = np.linalg.eigvalsh(moment_observable(k, 2).matrix.entries)
        bound_ok &= bool(w.min() >= -1 - 1e-12 and w.max() <= 1 + 1e-12)
    out.append(("observable_eigenvalue_bound", bound_ok, "H spectrum within [-1, 1]"))
    return out


def checks_sdp(tol: float = 1e-7) -> list[tuple[str, bool, str]]:
    out = []
    h2 = moment_observable(2, 2)
    gap_worst = 0.0
    ordering_ok = True
    detail = []
    for name, mk in (("DE", lambda e: depolarizing(e, 2)), ("AD", amplitude_damping)):
        for eps in EPS_GRID:
            noise = mk(eps)
            primal = solve(build_fmin(noise, 2, h2), tol=tol)
            dual = solve(build_dual_fmin(noise, 2, h2), tol=tol)
            gap = abs(primal.objective_value - dual.objective_value)
            gap_worst = max(gap_worst, gap)
            g1 = solve(build_gmin(noise), tol=tol).objective_value
            if primal.objective_value > gmin_power(g1, 2) + 1e-6:
                ordering_ok = False
            detail.append(f"{name}{eps}: f={primal.objective_value:.6f}")
    out.append(("strong_duality_gap_k2", gap_worst < 1e-4, f"max gap {gap_worst:.2e}"))
    out.append(("shift_below_inverse_k2", ordering_ok, "; ".join(detail[:4])))

    sol = solve(build_fmin(depolarizing(1.0, 2), 2, h2), tol=tol)
    out.append(("noninvertible_infeasible", sol.status == "infeasible",
                f"status {sol.status}"))
    out.append(("invertibility_rank_test",
                (not is_invertible(depolarizing(1.0, 2))) and is_invertible(depolarizing(0.5, 2)),
                "rank(M_N) signature"))
    return out


def checks_protocols() -> list[tuple[str, bool, str]]:
    out = []
    worst = 0.0
    for k in range(3, 101):
        q, qt = q_matrices(k)
        om = np.exp(2j * np.pi / k)
        pows = om ** np.arange(k)
        for mat, sign in ((q, 1.0), (qt, -1.0)):
            if mat.min() < -1e-12:
                worst = np.inf
            res = np.abs(mat @ pows - sign * np.exp(2j * np.pi * np.arange(k - 1) / (k - 1)))
            worst = max(worst, float(res.max()))
    out.append(("q_condition_k3_100", worst < 1e-9, f"max residual {worst:.2e}"))

    worst = 0.0
    for k in range(3, 6):
        tm = transfer_maps(k, 2)
        hk = moment_observable(k, 2).matrix.entries
        tgt = np.kron(moment_observable(k - 1, 2).matrix.entries, np.eye(2) / 2)
        worst = max(worst, float(np.max(np.abs(tm.forward.apply(hk) - tgt))))
        worst = max(worst, float(np.max(np.abs(tm.forward_neg.apply(hk) + tgt))))
    out.append(("transfer_identity_k3_5", worst < 1e-9, f"max err {worst:.2e}"))

    worst = 0.0
    min_eig = 0.0
    for (k, l) in ((3, 2), (4, 2), (4, 3)):
        r = recovery_map(k, l, 2)
        hk = moment_observable(k, 2).matrix.entries
        tgt = -np.kron(moment_observable(l, 2).matrix.entries,
                       np.eye(2 ** (k - l)) / 2 ** (k - l))
        worst = max(worst, float(np.max(np.abs(r.apply(hk) - tgt))))
        min_eig = min(min_eig, r.choi().min_eigenvalue())
    out.append(("recovery_map_identity", worst < 1e-9 and min_eig > -1e-8,
                f"max err {worst:.2e}, choi min eig {min_eig:.2e}"))

    worst = 0.0
    for eps in (0.1, 0.3):
        for proto, noise in ((de_second_moment(eps), depolarizing(eps, 2)),
                             (ad_second_moment(eps), amplitude_damping(eps)),
                             (de_second_moment_nqubit(eps, 2), depolarizing(eps, 4))):
            for seed in range(25):
                rho = random_density_matrix(proto.copy_dim, seed)
                z = exact_expectation(proto, _noisy_copies(rho, noise, 2))
                worst = max(worst, abs(proto.f * z - proto.t - _true_moment(rho, 2)))
    out.append(("defining_contract_k2", worst < 1e-9, f"max err {worst:.2e}"))

    j_link = link_product(amplitude_damping(0.3).choi, depolarizing(0.2, 2).choi, (2, 2, 2))
    j_kraus = choi_of(compose(depolarizing(0.2, 2), amplitude_damping(0.3)))
    err = float(np.max(np.abs(j_link.entries - j_kraus.entries)))
    out.append(("choi_link_product_convention", err < 1e-10, f"err {err:.2e}"))
    return out


def checks_hubbard() -> list[tuple[str, bool, str]]:
    out = []
    n = 6
    ops = [annihilation_operator(p, n).entries for p in range(n)]
    worst = 0.0
    for p in range(n):
        for q in range(n):
            anti = ops[p] @ ops[q].conj().T + ops[q].conj().T @ ops[p]
            ref = np.eye(2 ** n) if p == q else 0.0
            worst = max(worst, float(np.max(np.abs(anti - ref))))
    out.append(("canonical_anticommutation", worst < 1e-12, f"max err {worst:.2e}"))

    h = build_hamiltonian(demo_model())
    g = ground_state(h)
    variational = True
    for seed in range(20):
        psi = random_density_matrix(64, seed, rank=1)
        e = float(np.trace(h.entries @ psi.entries).real)
        if e < g.energy - 1e-9:
            variational = False
    out.append(("ground_energy_variational", variational, f"E0 = {g.energy:.6f}"))

    rho_a = partial_trace(g.state, [0, 1])
    purity = float(np.trace(rho_a.entries @ rho_a.entries).real)
    out.append(("reduced_purity_in_range", 0.0 < purity <= 1.0, f"tr[rho_A^2] = {purity:.6f}"))
    return out


SUITES = {
    "moments": checks_moments,
    "sdp": checks_sdp,
    "protocols": checks_protocols,
    "hubbard": checks_hubbard,
}


def run_suite(suite: str) -> list[tuple[str, bool, str]]:
    if suite == "all":
        results = []
        for fn in SUITES.values():
            results.extend(fn())
        return results
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    return SUITES[suite]()
