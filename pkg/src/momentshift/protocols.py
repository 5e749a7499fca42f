"""Executable retrieval protocols.

A protocol bundles a channel realization with the two post-processing
scalars: the sampling overhead ``f`` and the shift distance ``t``.  Its
defining contract, holding for every constructor in this module, is

    f * tr[H_k C(noise^(x k)(rho^(x k)))] - t  ==  tr[rho^k]

for all states rho, where H_k is the moment observable on k copies.

Four realizations are used: mixed-unitary ensembles (the twelve-unitary
depolarizing twirl), measurement-based protocols (amplitude damping),
explicit Choi matrices (SDP extractions and the n-qubit depolarizing
retriever), and the recursive construction for arbitrary moment order under
depolarizing noise, stored as a composition tree of transfer maps and
applied factor-by-factor instead of materializing one giant Choi matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .channels import Channel, choi_of
from .moments import moment_observable, permutation_eigenprojectors
from .operators import Operator, identity, partial_trace
from .sdp.problem import SdpSolution

PROTOCOL_SCHEMA_VERSION = 1
DENSE_CHOI_CAP = 1024  # largest Choi side materialized densely


# ---------------------------------------------------------------------------
# realizations


@dataclass(frozen=True)
class MixedUnitary:
    probabilities: np.ndarray
    unitaries: tuple[np.ndarray, ...]

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x, dtype=complex)
        for p, u in zip(self.probabilities, self.unitaries):
            out += p * (u @ x @ u.conj().T)
        return out

    def as_channel(self) -> Channel:
        d = self.unitaries[0].shape[0]
        kraus = [np.sqrt(p) * u for p, u in zip(self.probabilities, self.unitaries)]
        return Channel(d, d, kraus=kraus, label="mixed_unitary")

    def choi(self) -> Operator:
        return choi_of(self.as_channel())


@dataclass(frozen=True)
class MeasurementBased:
    """Projective measurement in ``basis_states`` followed by state preparation.

    ``outcome_values[i]`` caches tr[H sigma_i] so estimation needs only the
    outcome index.
    """

    basis_states: tuple[np.ndarray, ...]
    output_states: tuple[np.ndarray, ...]
    outcome_values: tuple[float, ...]

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x, dtype=complex)
        for b, sigma in zip(self.basis_states, self.output_states):
            out += (b.conj() @ x @ b) * sigma
        return out

    def outcome_probabilities(self, x: np.ndarray) -> np.ndarray:
        return np.array([np.real(b.conj() @ x @ b) for b in self.basis_states])

    def choi(self) -> Operator:
        d_in = self.basis_states[0].size
        d_out = self.output_states[0].shape[0]
        j = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
        for b, sigma in zip(self.basis_states, self.output_states):
            j += np.kron(np.outer(b, b.conj()).T, sigma)
        return Operator(j, (d_in, d_out))


@dataclass(frozen=True)
class ChoiMap:
    choi_matrix: Operator
    in_dim: int
    out_dim: int
    trace_preserving: bool = True

    def apply(self, x: np.ndarray) -> np.ndarray:
        j = self.choi_matrix.entries.reshape(
            self.in_dim, self.out_dim, self.in_dim, self.out_dim)
        return np.einsum("ij,iajb->ab", x, j)

    def choi(self) -> Operator:
        return self.choi_matrix


class MeasurePrepare:
    """Linear map rho -> sum_m tr[effects_m rho] outputs_m.

    Completely positive whenever every effect and output is PSD; the
    extension to a leading tensor factor is
    ``(T (x) id)(X) = sum_m outputs_m (x) tr_1[(effects_m (x) I) X]``.
    """

    def __init__(self, effects: Sequence[np.ndarray], outputs: Sequence[np.ndarray]):
        self.effects = tuple(np.asarray(e, dtype=complex) for e in effects)
        self.outputs = tuple(np.asarray(o, dtype=complex) for o in outputs)
        self.in_dim = self.effects[0].shape[0]
        self.out_dim = self.outputs[0].shape[0]

    def apply(self, x: np.ndarray, rest: int = 1) -> np.ndarray:
        if rest == 1:
            return sum(np.trace(e @ x) * f
                       for e, f in zip(self.effects, self.outputs))
        x4 = x.reshape(self.in_dim, rest, self.in_dim, rest)
        out = np.zeros((self.out_dim * rest, self.out_dim * rest), dtype=complex)
        for e, f in zip(self.effects, self.outputs):
            y = np.einsum("ab,bcad->cd", e, x4)
            out += np.kron(f, y)
        return out

    def adjoint_apply(self, y: np.ndarray, rest: int = 1) -> np.ndarray:
        if rest == 1:
            return sum(np.trace(f @ y) * e
                       for e, f in zip(self.effects, self.outputs))
        y4 = y.reshape(self.out_dim, rest, self.out_dim, rest)
        out = np.zeros((self.in_dim * rest, self.in_dim * rest), dtype=complex)
        for e, f in zip(self.effects, self.outputs):
            w = np.einsum("ab,bcad->cd", f, y4)
            out += np.kron(e, w)
        return out

    def choi(self) -> Operator:
        j = sum(np.kron(e.T, f) for e, f in zip(self.effects, self.outputs))
        return Operator(j, (self.in_dim, self.out_dim))


class ComposedMap:
    """Composition of leading-factor maps; stages applied first to last."""

    def __init__(self, stages: Sequence[tuple[MeasurePrepare, int]], dim: int):
        self.stages = tuple(stages)  # (map, identity rest dimension)
        self.dim = dim  # total input dimension

    def apply(self, x: np.ndarray, rest: int = 1) -> np.ndarray:
        for m, stage_rest in self.stages:
            x = m.apply(x, stage_rest * rest)
        return x

    def adjoint_apply(self, y: np.ndarray, rest: int = 1) -> np.ndarray:
        for m, stage_rest in reversed(self.stages):
            y = m.adjoint_apply(y, stage_rest * rest)
        return y

    def choi(self) -> Operator:
        d = self.dim
        if d * d > DENSE_CHOI_CAP:
            raise ValueError("composed map too large to materialize densely")
        j = np.zeros((d * d, d * d), dtype=complex)
        e = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for jdx in range(d):
                e[i, jdx] = 1.0
                out = self.apply(e)
                j += np.kron(_unit(d, i, jdx), out)
                e[i, jdx] = 0.0
        return Operator(j, (d, d))


def _unit(d: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


@dataclass(frozen=True)
class Recursive:
    """Recursive depolarizing retriever C_k as a lazy composition tree."""

    eps: float
    k: int
    d: int
    f_table: tuple[float, ...]  # f_2 .. f_k

    def apply(self, x: np.ndarray, rest: int = 1) -> np.ndarray:
        return _apply_ck(self.eps, self.k, self.d, x, rest, self.f_table)

    def choi(self) -> Operator:
        d = self.d ** self.k
        if d > 16:
            raise ValueError("dense Choi of the recursive retriever is capped at k*log2(d) <= 4")
        j = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for jdx in range(d):
                out = self.apply(_unit(d, i, jdx))
                j += np.kron(_unit(d, i, jdx), out)
        return Operator(j, (d, d))


# ---------------------------------------------------------------------------
# protocol wrapper


@dataclass(frozen=True)
class RetrievalProtocol:
    k: int
    copy_dim: int
    f: float
    t: float
    realization: object
    label: str = ""

    @property
    def kind(self) -> str:
        return {MixedUnitary: "mixed_unitary", MeasurementBased: "measurement_based",
                ChoiMap: "choi", Recursive: "recursive"}[type(self.realization)]

    def channel_apply(self, noisy_state: Operator) -> Operator:
        out = self.realization.apply(noisy_state.entries)
        dims = noisy_state.subsystem_dims if out.shape[0] == noisy_state.dim else ()
        return Operator(out, dims)

    def estimate_from_expectation(self, zeta: float) -> float:
        return self.f * zeta - self.t


def exact_expectation(p: RetrievalProtocol, noisy_state: Operator,
                      H=None) -> float:
    """Dense evaluation of zeta = tr[H C(noisy_state)], no sampling."""
    if H is None:
        H = moment_observable(p.k, p.copy_dim)
    if noisy_state.dim != p.copy_dim ** p.k:
        raise ValueError("noisy state dimension does not match protocol")
    out = p.realization.apply(noisy_state.entries)
    return float(np.real(np.trace(H.matrix.entries @ out)))


# ---------------------------------------------------------------------------
# analytic single-qubit depolarizing protocol (twelve-unitary twirl)

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _twirl_unitaries() -> tuple[np.ndarray, ...]:
    i = 1j
    u5 = np.array([[-i, 1, 1, i], [i, 1, -1, i], [i, -1, 1, i], [-i, -1, -1, i]]) / 2
    u6 = np.array([[i, -1, -1, -i], [i, 1, -1, i], [i, -1, 1, i], [i, 1, 1, -i]]) / 2
    u7 = np.array([[i, i, i, i], [-1, 1, -1, 1], [-1, -1, 1, 1], [-i, i, i, -i]]) / 2
    u8 = np.array([[-i, i, i, -i], [1, 1, -1, -1], [1, -1, 1, -1], [i, i, i, i]]) / 2
    u9 = np.array([[i, 1, 1, -i], [-i, 1, -1, -i], [-i, -1, 1, -i], [i, -1, -1, -i]]) / 2
    u10 = np.array([[-i, -1, -1, i], [-i, 1, -1, -i], [-i, -1, 1, -i], [-i, 1, 1, i]]) / 2
    u11 = np.array([[i, -i, -i, i], [1, 1, -1, -1], [1, -1, 1, -1], [-i, -i, -i, -i]]) / 2
    u12 = np.array([[-i, -i, -i, -i], [-1, 1, -1, 1], [-1, -1, 1, 1], [i, -i, -i, i]]) / 2
    return (np.kron(_I, _I), np.kron(_X, _X), np.kron(_Y, _Y), np.kron(_Z, _Z),
            u5, u6, u7, u8, u9, u10, u11, u12)


def _twirl_choi_closed_form() -> np.ndarray:
    paulis = np.kron(_X, _X) + np.kron(_Y, _Y) + np.kron(_Z, _Z)
    return np.kron(np.eye(4), np.eye(4)) / 4 + np.kron(paulis, paulis) / 12


@lru_cache(maxsize=1)
def _checked_twirl() -> MixedUnitary:
    """Build the twelve-unitary ensemble, verifying the constants on first use."""
    us = _twirl_unitaries()
    for idx, u in enumerate(us):
        if np.max(np.abs(u @ u.conj().T - np.eye(4))) > 1e-12:
            raise AssertionError(f"twirl unitary {idx + 1} failed unitarity check")
    mu = MixedUnitary(np.full(12, 1.0 / 12.0), us)
    if np.max(np.abs(mu.choi().entries - _twirl_choi_closed_form())) > 1e-12:
        raise AssertionError("twirl Choi does not match its closed form")
    return mu


def de_second_moment(eps: float) -> RetrievalProtocol:
    """Purity retriever for single-qubit depolarizing noise (twelve unitaries)."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("depolarizing retrieval requires 0 <= eps < 1")
    s = (1.0 - eps) ** 2
    return RetrievalProtocol(k=2, copy_dim=2, f=1.0 / s, t=(1.0 - s) / (2.0 * s),
                             realization=_checked_twirl(),
                             label=f"de_second_moment(eps={eps:g})")


# ---------------------------------------------------------------------------
# analytic amplitude-damping protocol (measurement based)


def ad_second_moment(eps: float) -> RetrievalProtocol:
    """Purity retriever for amplitude damping: measure in
    {|00>, |Psi+>, |Psi->, |11>} and average the per-outcome values
    (1-2eps, 1-2eps, -1, 1)."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("amplitude-damping retrieval requires 0 <= eps < 1")
    b00 = np.array([1, 0, 0, 0], dtype=complex)
    b11 = np.array([0, 0, 0, 1], dtype=complex)
    psi_p = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    psi_m = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    h = moment_observable(2, 2).matrix.entries
    eye4 = np.eye(4)
    sigma_a = ((1 + 2 * eps) * eye4 + (1 - 4 * eps) * h) / 6
    sigma_3 = (eye4 - h) / 2
    sigma_4 = (eye4 + h) / 6
    mb = MeasurementBased(
        basis_states=(b00, psi_p, psi_m, b11),
        output_states=(sigma_a, sigma_a, sigma_3, sigma_4),
        outcome_values=(1 - 2 * eps, 1 - 2 * eps, -1.0, 1.0),
    )
    s = (1.0 - eps) ** 2
    return RetrievalProtocol(k=2, copy_dim=2, f=1.0 / s, t=-eps ** 2 / s,
                             realization=mb,
                             label=f"ad_second_moment(eps={eps:g})")


# ---------------------------------------------------------------------------
# qudit/n-qubit depolarizing second moment


def _swap_matrix(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            s[b * d + a, a * d + b] = 1.0
    return s


@lru_cache(maxsize=None)
def _de2_qudit_map(d: int) -> MeasurePrepare:
    """Second-moment depolarizing retriever on a pair of d-dim systems.

    Choi form (1/d^2) I (x) I + (1/(d^2 (d^2-1))) G (x) G with
    G = d SWAP - I, the traceless part of d SWAP; for d = 2^n, G equals the
    sum of P_i (x) P_i over all non-identity Pauli strings.
    """
    g = d * _swap_matrix(d) - np.eye(d * d)
    return MeasurePrepare(
        effects=(np.eye(d * d), g),
        outputs=(np.eye(d * d) / d ** 2, g / (d ** 2 * (d ** 2 - 1))),
    )


def _de2_qudit_protocol(eps: float, d: int, label: str) -> RetrievalProtocol:
    if not 0.0 <= eps < 1.0:
        raise ValueError("depolarizing retrieval requires 0 <= eps < 1")
    s = (1.0 - eps) ** 2
    cm = ChoiMap(_de2_qudit_map(d).choi(), in_dim=d * d, out_dim=d * d,
                 trace_preserving=True)
    return RetrievalProtocol(k=2, copy_dim=d, f=1.0 / s, t=(1.0 - s) / (d * s),
                             realization=cm, label=label)


def de_second_moment_nqubit(eps: float, n: int) -> RetrievalProtocol:
    """Purity retriever for global depolarizing noise on n-qubit states."""
    if n < 1 or n > 3:
        raise ValueError("dense construction capped at 1 <= n <= 3 qubits")
    return _de2_qudit_protocol(eps, 2 ** n,
                               label=f"de_second_moment_nqubit(eps={eps:g},n={n})")


# ---------------------------------------------------------------------------
# transfer maps and the recursive construction


def q_matrices(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Nonnegative (k-1) x k matrices with sum_m Q[l,m] w_k^m = +/- w_{k-1}^l.

    Row l mixes the two k-th roots of unity adjacent to the (k-1)-th root
    w_{k-1}^l; the companion matrix picks up the opposite sign through a
    half-turn permutation of rows (odd k) or columns (even k).
    """
    if k < 3 or k > 100:
        raise ValueError("Q construction requires 3 <= k <= 100")
    q = np.zeros((k - 1, k))
    csc = 1.0 / np.sin(2 * np.pi / k)
    for l in range(k - 1):
        q[l, l] = csc * np.sin(2 * np.pi * (k - 1 - l) / (k * (k - 1)))
        q[l, (l + 1) % k] = csc * np.sin(2 * np.pi * l / (k * (k - 1)))
    if k % 2 == 1:
        half = (k - 1) // 2
        q_tilde = np.roll(q, half, axis=0)
    else:
        q_tilde = np.roll(q, k // 2, axis=1)
    return q, q_tilde


@dataclass(frozen=True)
class TransferMapPair:
    k: int
    d: int
    Q: np.ndarray
    Q_tilde: np.ndarray
    forward: MeasurePrepare        # T_k:  H_k -> H_{k-1} (x) I/d
    forward_neg: MeasurePrepare    # T~_k: H_k -> -H_{k-1} (x) I/d


@lru_cache(maxsize=None)
def _eigenvalue_projectors(k: int, d: int) -> tuple[np.ndarray, ...]:
    """Projector onto the eigenspace of S_k with eigenvalue w_k^m, m = 0..k-1."""
    spec = permutation_eigenprojectors(k, d)
    return tuple(spec.projectors[(-m) % k].entries for m in range(k))


def _build_transfer(q: np.ndarray, k: int, d: int) -> MeasurePrepare:
    pk = _eigenvalue_projectors(k, d)
    pk1 = _eigenvalue_projectors(k - 1, d)
    eye_d = np.eye(d) / d
    effects = []
    outputs = []
    for m in range(k):
        rank = np.trace(pk[m]).real
        effects.append(pk[m] / rank)
        out = sum(q[l, m] * pk1[l] for l in range(k - 1))
        outputs.append(np.kron(out, eye_d))
    return MeasurePrepare(effects, outputs)


@lru_cache(maxsize=None)
def transfer_maps(k: int, d: int = 2) -> TransferMapPair:
    if d ** k > DENSE_CHOI_CAP:
        raise ValueError(f"dense transfer maps capped at d^k <= {DENSE_CHOI_CAP}")
    q, q_tilde = q_matrices(k)
    return TransferMapPair(
        k=k, d=d, Q=q, Q_tilde=q_tilde,
        forward=_build_transfer(q, k, d),
        forward_neg=_build_transfer(q_tilde, k, d),
    )


@lru_cache(maxsize=None)
def recovery_map(k: int, l: int, d: int = 2) -> ComposedMap:
    """CP map R_l with R_l(H_k) = -H_l (x) I/d^{k-l}.

    Composition (T_{l+1} (x) id) o ... o (T_{k-1} (x) id) o T~_k; the first
    stage carries the sign flip so that the later stages accumulate only
    positive transfers.
    """
    if not 2 <= l < k:
        raise ValueError(f"recovery map needs 2 <= l < k, got l={l}, k={k}")
    stages = [(transfer_maps(k, d).forward_neg, 1)]
    for j in range(k - 1, l, -1):
        stages.append((transfer_maps(j, d).forward, d ** (k - j)))
    return ComposedMap(stages, dim=d ** k)


def _shift_table(eps: float, k: int, d: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Tables (f_2..f_k, t_2..t_k) of the recursive construction.

    t_k folds the l = 0 and l = 1 binomial terms of tr[(noisy rho)^k] with
    tr[I] = d, so both carry 1/d^{k-1}, and subtracts the shifts already
    accounted for by the lower-order retrievers.
    """
    f = [1.0 / (1.0 - eps) ** l for l in range(2, k + 1)]
    t = [(1.0 - (1.0 - eps) ** 2) / (d * (1.0 - eps) ** 2)]
    for kk in range(3, k + 1):
        acc = eps ** kk / d ** (kk - 1) + kk * (1 - eps) * eps ** (kk - 1) / d ** (kk - 1)
        for l in range(2, kk):
            acc -= comb(kk, l) * (1 - eps) ** l * eps ** (kk - l) / d ** (kk - l) * t[l - 2]
        t.append(f[kk - 2] * acc)
    return tuple(f), tuple(t)


def _apply_ck(eps: float, k: int, d: int, x: np.ndarray, rest: int,
              f_table: tuple[float, ...]) -> np.ndarray:
    if k == 2:
        return _de2_qudit_map(d).apply(x, rest)
    out = np.array(x, dtype=complex, copy=True)
    for l in range(2, k):
        coeff = comb(k, l) * (1 - eps) ** l * eps ** (k - l) * f_table[l - 2]
        y = _apply_ck(eps, l, d, x, rest * d ** (k - l), f_table)
        z = recovery_map(k, l, d).adjoint_apply(y, rest)
        out += coeff * z
    return out


def de_kth_moment(eps: float, k: int, d: int = 2) -> RetrievalProtocol:
    """k-th moment retriever for depolarizing noise on d-dim states.

    The realization is completely positive but not trace preserving for
    k >= 3; it is evaluated exactly (densely) and is not part of the
    finite-shot sampling surface.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("depolarizing retrieval requires 0 <= eps < 1")
    if k < 2:
        raise ValueError("moment order must be >= 2")
    f_table, t_table = _shift_table(eps, k, d)
    if k == 2:
        return _de2_qudit_protocol(eps, d, label=f"de_kth_moment(eps={eps:g},k=2,d={d})")
    if d ** k > DENSE_CHOI_CAP:
        raise ValueError(f"dense verification capped at d^k <= {DENSE_CHOI_CAP}")
    return RetrievalProtocol(
        k=k, copy_dim=d, f=f_table[-1], t=t_table[-1],
        realization=Recursive(eps=eps, k=k, d=d, f_table=f_table),
        label=f"de_kth_moment(eps={eps:g},k={k},d={d})",
    )


# ---------------------------------------------------------------------------
# SDP extraction


def from_sdp_solution(sol: SdpSolution, k: int, H) -> RetrievalProtocol:
    """Turn an optimal observable-shift solution into an executable protocol."""
    if sol.status != "optimal":
        raise ValueError(f"cannot extract a protocol from a {sol.status} solution")
    f = sol.scalar("f")
    t = sol.scalar("t")
    j_scaled = sol.block("J")
    d = int(round(np.sqrt(j_scaled.dim)))
    j = Operator(j_scaled.entries / f, (d, d))
    marg = partial_trace(j, [0])
    tp = bool(np.max(np.abs(marg.entries - np.eye(d))) <= 1e-6)
    copy_dim = int(round(d ** (1.0 / k)))
    return RetrievalProtocol(
        k=k, copy_dim=copy_dim, f=f, t=t,
        realization=ChoiMap(j, in_dim=d, out_dim=d, trace_preserving=tp),
        label=sol.name or "sdp_protocol",
    )


def identity_protocol(k: int, d: int) -> RetrievalProtocol:
    """Measure the moment observable directly; f = 1, t = 0 (no mitigation)."""
    dk = d ** k
    return RetrievalProtocol(
        k=k, copy_dim=d, f=1.0, t=0.0,
        realization=ChoiMap(choi_of(Channel(dk, dk, kraus=[np.eye(dk)])),
                            in_dim=dk, out_dim=dk, trace_preserving=True),
        label="identity",
    )


# ---------------------------------------------------------------------------
# serialization


def _mat_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _mat_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def protocol_to_json(p: RetrievalProtocol) -> dict:
    r = p.realization
    if isinstance(r, MixedUnitary):
        data = {"probabilities": [float(x) for x in r.probabilities],
                "unitaries": [_mat_json(u) for u in r.unitaries]}
    elif isinstance(r, MeasurementBased):
        data = {"basis_states": [_mat_json(b.reshape(1, -1)) for b in r.basis_states],
                "output_states": [_mat_json(s) for s in r.output_states],
                "outcome_values": [float(v) for v in r.outcome_values]}
    elif isinstance(r, ChoiMap):
        data = {"choi": _mat_json(r.choi_matrix.entries), "in_dim": r.in_dim,
                "out_dim": r.out_dim, "trace_preserving": r.trace_preserving}
    elif isinstance(r, Recursive):
        data = {"eps": r.eps, "order": r.k, "copy_dim": r.d}
    else:
        raise TypeError(f"unknown realization {type(r)}")
    return {"schema_version": PROTOCOL_SCHEMA_VERSION, "kind": p.kind, "k": p.k,
            "copy_dim": p.copy_dim, "f": p.f, "t": p.t, "label": p.label,
            "data": data}


def protocol_from_json(doc: dict) -> RetrievalProtocol:
    if doc.get("schema_version") != PROTOCOL_SCHEMA_VERSION:
        raise ValueError(f"unsupported protocol schema {doc.get('schema_version')}")
    kind = doc["kind"]
    data = doc["data"]
    if kind == "mixed_unitary":
        r = MixedUnitary(np.array(data["probabilities"]),
                         tuple(_mat_from_json(u) for u in data["unitaries"]))
    elif kind == "measurement_based":
        r = MeasurementBased(
            tuple(_mat_from_json(b).reshape(-1) for b in data["basis_states"]),
            tuple(_mat_from_json(s) for s in data["output_states"]),
            tuple(float(v) for v in data["outcome_values"]))
    elif kind == "choi":
        r = ChoiMap(Operator(_mat_from_json(data["choi"]),
                             (data["in_dim"], data["out_dim"])),
                    in_dim=data["in_dim"], out_dim=data["out_dim"],
                    trace_preserving=data["trace_preserving"])
    elif kind == "recursive":
        return de_kth_moment(data["eps"], data["order"], data["copy_dim"])
    else:
        raise ValueError(f"unknown protocol kind {kind!r}")
    return RetrievalProtocol(k=doc["k"], copy_dim=doc["copy_dim"], f=doc["f"],
                             t=doc["t"], realization=r, label=doc.get("label", ""))


def save_protocol(p: RetrievalProtocol, path) -> None:
    with open(path, "w") as fh:
        json.dump(protocol_to_json(p), fh)


def load_protocol(path) -> RetrievalProtocol:
    with open(path) as fh:
        return protocol_from_json(json.load(fh))
