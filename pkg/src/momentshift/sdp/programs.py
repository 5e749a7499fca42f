"""Builders for the four conic programs behind the retrieval machinery.

All programs are phrased over Choi matrices with the package's input-first
convention.  Labels follow the roles in the composition
``retriever . noise^(x k)``: A is the joint input, B the noisy output fed to
the retriever, C the retriever output measured with the moment observable.

* ``build_fmin``: minimal trace-scaling factor f of a completely positive
  trace-scaling retriever whose adjoint pulls the observable back to
  ``(H + t I)`` through the noise (the observable-shift program).
* ``build_dual_fmin``: its Lagrangian dual over (M, K) with objective
  ``-tr[K H]``; any feasible point certifies a lower bound on f.
* ``build_gmin``: quasi-probability overhead of simulating the exact inverse
  of a channel as a difference of two scaled channels.
* ``build_info_recover``: overhead of a Hermitian-preserving trace-scaling
  map recovering the expectation of one fixed observable.
"""

from __future__ import annotations

import numpy as np

from ..channels import Channel, choi_of, tensor_power
from ..moments import MomentObservable
from ..operators import Operator, identity, partial_trace, partial_transpose, tensor_product
from .problem import (
    BlockVar,
    Constraint,
    ConstraintTerm,
    DualCertificate,
    ScalarVar,
    SdpProblem,
)

F_LOWER_BOUND = 1e-9
SDP_BLOCK_CAP = 256


def _check_block(dim: int) -> None:
    if dim > SDP_BLOCK_CAP:
        raise ValueError(f"PSD block dimension {dim} exceeds cap {SDP_BLOCK_CAP}")


def _trace_out_second(d1: int, d2: int):
    """Map on Herm(d1*d2): partial trace over the second factor, batched."""
    def mapper(batch: np.ndarray) -> np.ndarray:
        n = batch.shape[0]
        t = batch.reshape(n, d1, d2, d1, d2)
        return np.einsum("nbcac->nba", t)
    return mapper


def _batch_trace(batch: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("naa->n", batch))


def _retriever_pullback(kraus: tuple[np.ndarray, ...], h: np.ndarray, d: int,
                        sign: float = 1.0):
    """Batched J -> sign * NK^dag( tr_C[(I (x) H^T) J^T] ) for J on B (x) C.

    ``tr_C[(I (x) H^T) J^T]`` is the adjoint of the map with Choi J applied
    to H; composing with the Kraus adjoint of the noise gives the
    Heisenberg-picture pullback of the observable through retriever and
    noise.  The observable contraction is done in one einsum (never forming
    the d^2 x d^2 product) and the noise adjoint through its precomputed
    vectorized matrix, which keeps 256-dim Choi blocks tractable.
    """
    madj = sum(np.kron(e.conj().T, e.T) for e in kraus)

    def mapper(batch: np.ndarray) -> np.ndarray:
        n = batch.shape[0]
        t = batch.reshape(n, d, d, d, d)
        y = np.einsum("cd,npdqc->nqp", h, t, optimize=True)
        z = (madj @ y.reshape(n, d * d).T).T.reshape(n, d, d)
        return sign * z
    return mapper


def _link_with(j_noise: Operator, dims: tuple[int, int, int], sign: float = 1.0):
    """Batched X -> sign * tr_B[(J_N^{T_B} (x) I_C)(I_A (x) X)] for X on B (x) C."""
    da, db, dc = dims
    jt = partial_transpose(j_noise.with_dims((da, db)), [1]).entries
    jt4 = jt.reshape(da, db, da, db)

    def mapper(batch: np.ndarray) -> np.ndarray:
        n = batch.shape[0]
        x4 = batch.reshape(n, db, dc, db, dc)
        out = np.einsum("abpq,nqcbe->nacpe", jt4, x4)
        return sign * out.reshape(n, da * dc, da * dc)
    return mapper


def build_fmin(noise: Channel, k: int, H: MomentObservable) -> SdpProblem:
    """Primal observable-shift program; optimum is f_min(noise, k)."""
    if noise.in_dim != noise.out_dim:
        raise ValueError("observable-shift synthesis needs a square channel")
    nk = tensor_power(noise, k) if k > 1 else noise
    d = nk.in_dim
    if H.matrix.dim != d:
        raise ValueError(f"moment observable dim {H.matrix.dim} != {d}")
    _check_block(d * d)
    h = H.matrix.entries
    eye_d = np.eye(d)

    ts = Constraint(
        terms=(
            ConstraintTerm(var="J", block_map=_trace_out_second(d, d)),
            ConstraintTerm(var="f", scalar_coeff_op=-eye_d),
        ),
        target=np.zeros((d, d)),
        name="trace_scaling",
    )
    shift = Constraint(
        terms=(
            ConstraintTerm(var="J", block_map=_retriever_pullback(nk.kraus, h, d)),
            ConstraintTerm(var="t", scalar_coeff_op=-eye_d),
        ),
        target=h,
        name="observable_shift",
    )
    return SdpProblem(
        blocks=[BlockVar("J", d * d, psd=True)],
        scalars=[ScalarVar("f", lower=F_LOWER_BOUND), ScalarVar("t")],
        objective={"f": 1.0},
        constraints=[ts, shift],
        name=f"fmin[{noise.label},k={k}]",
    )


def _noise_pushforward(kraus: tuple[np.ndarray, ...], h: np.ndarray, d: int):
    """Batched K -> (NK(K))^T (x) H, the contracted dual coupling term."""
    estack = np.stack(kraus)
    eye_h = h

    def mapper(batch: np.ndarray) -> np.ndarray:
        nk_k = np.einsum("kab,nbc,kdc->nad", estack, batch, estack.conj())
        nk_k_t = np.transpose(nk_k, (0, 2, 1))
        return np.einsum("nab,cd->nacbd", nk_k_t, eye_h).reshape(
            batch.shape[0], d * d, d * d)
    return mapper


def _kron_identity_right(d: int):
    eye_d = np.eye(d)

    def mapper(batch: np.ndarray) -> np.ndarray:
        return np.einsum("nab,cd->nacbd", batch, eye_d).reshape(
            batch.shape[0], d * d, d * d)
    return mapper


def _identity_map(batch: np.ndarray) -> np.ndarray:
    return batch


def build_dual_fmin(noise: Channel, k: int, H: MomentObservable) -> SdpProblem:
    """Dual of the observable-shift program: max -tr[KH] over feasible (M, K)."""
    nk = tensor_power(noise, k) if k > 1 else noise
    d = nk.in_dim
    _check_block(d * d)
    h = H.matrix.entries

    psd = Constraint(
        terms=(
            ConstraintTerm(var="T", block_map=_identity_map),
            ConstraintTerm(var="M", block_map=_kron_identity_right_neg(d)),
            ConstraintTerm(var="K", block_map=_noise_pushforward_neg(nk.kraus, h, d)),
        ),
        target=np.zeros((d * d, d * d)),
        name="dual_psd",
    )
    trm = Constraint(
        terms=(
            ConstraintTerm(var="M", block_map=_batch_trace),
            ConstraintTerm(var="s", scalar_coeff=1.0),
        ),
        target=1.0,
        name="trace_M_bound",
    )
    trk = Constraint(
        terms=(ConstraintTerm(var="K", block_map=_batch_trace),),
        target=0.0,
        name="trace_K_zero",
    )
    return SdpProblem(
        blocks=[BlockVar("M", d, psd=False), BlockVar("K", d, psd=False),
                BlockVar("T", d * d, psd=True)],
        scalars=[ScalarVar("s", lower=0.0)],
        objective={"K": -h},
        constraints=[psd, trm, trk],
        maximize=True,
        name=f"dual_fmin[{noise.label},k={k}]",
    )


def _kron_identity_right_neg(d: int):
    base = _kron_identity_right(d)
    return lambda batch: -base(batch)


def _noise_pushforward_neg(kraus, h, d):
    base = _noise_pushforward(kraus, h, d)
    return lambda batch: -base(batch)


def dual_constraint_operator(cert: DualCertificate, noise: Channel, k: int,
                             H: MomentObservable) -> Operator:
    """Literal dual operator M (x) I + tr_A[(K^T (x) I (x) H)(J^{T_B} (x) I)]."""
    nk = tensor_power(noise, k) if k > 1 else noise
    d = nk.in_dim
    j = choi_of(nk).with_dims((d, d))
    jtb = partial_transpose(j, [1])
    kt = Operator(cert.K.entries.T)
    big = tensor_product(tensor_product(kt, identity(d)),
                         Operator(H.matrix.entries)) \
        @ tensor_product(jtb, identity(d)).with_dims((d, d, d))
    coupling = partial_trace(big.with_dims((d, d, d)), [1, 2])
    dual_op = tensor_product(Operator(cert.M.entries), identity(d)) + coupling
    return Operator(dual_op.entries, (d, d))


def check_certificate(cert: DualCertificate, noise: Channel, k: int,
                      H: MomentObservable) -> tuple[bool, float]:
    """Evaluate dual feasibility analytically and return (feasible, -tr[KH])."""
    tr_m = cert.M.trace().real
    tr_k = cert.K.trace()
    dual_op = dual_constraint_operator(cert, noise, k, H)
    feasible = (tr_m <= 1.0 + 1e-9 and abs(tr_k) <= 1e-9
                and dual_op.min_eigenvalue() >= -1e-9)
    objective = -np.trace(cert.K.entries @ H.matrix.entries).real
    return feasible, float(objective)


def build_gmin(noise: Channel) -> SdpProblem:
    """Quasi-probability overhead of the exact channel inverse of ``noise``.

    The decomposed map runs from the noise output back to its input; the
    composition with the noise is pinned to the identity Choi matrix.
    """
    da, db = noise.in_dim, noise.out_dim
    dc = da
    _check_block(db * dc)
    j_noise = choi_of(noise)
    omega = np.zeros((da * dc, da * dc), dtype=complex)
    for i in range(da):
        for jdx in range(da):
            omega[i * da + i, jdx * da + jdx] = 1.0

    cons = [
        Constraint(
            terms=(
                ConstraintTerm(var="J1", block_map=_trace_out_second(db, dc)),
                ConstraintTerm(var="p1", scalar_coeff_op=-np.eye(db)),
            ),
            target=np.zeros((db, db)),
            name="ts_J1",
        ),
        Constraint(
            terms=(
                ConstraintTerm(var="J2", block_map=_trace_out_second(db, dc)),
                ConstraintTerm(var="p2", scalar_coeff_op=-np.eye(db)),
            ),
            target=np.zeros((db, db)),
            name="ts_J2",
        ),
        Constraint(
            terms=(
                ConstraintTerm(var="J1", block_map=_link_with(j_noise, (da, db, dc))),
                ConstraintTerm(var="J2", block_map=_link_with(j_noise, (da, db, dc), sign=-1.0)),
            ),
            target=omega,
            name="inverse_composition",
        ),
    ]
    return SdpProblem(
        blocks=[BlockVar("J1", db * dc, psd=True), BlockVar("J2", db * dc, psd=True)],
        scalars=[ScalarVar("p1", lower=0.0), ScalarVar("p2", lower=0.0)],
        objective={"p1": 1.0, "p2": 1.0},
        constraints=cons,
        name=f"gmin[{noise.label}]",
    )


def gmin_power(g1: float, k: int) -> float:
    """k-copy inverse overhead via multiplicativity of the diamond norm."""
    return float(g1) ** k


def build_info_recover(noise: Channel, obs: Operator) -> SdpProblem:
    """Overhead of recovering one observable's expectation through ``noise``."""
    d = noise.in_dim
    if noise.out_dim != d:
        raise ValueError("information recovery assumes a square channel")
    if obs.dim != d:
        raise ValueError(f"observable dim {obs.dim} != channel dim {d}")
    _check_block(d * d)
    h = obs.entries

    cons = [
        Constraint(
            terms=(
                ConstraintTerm(var="J1", block_map=_trace_out_second(d, d)),
                ConstraintTerm(var="c1", scalar_coeff_op=-np.eye(d)),
            ),
            target=np.zeros((d, d)),
            name="ts_J1",
        ),
        Constraint(
            terms=(
                ConstraintTerm(var="J2", block_map=_trace_out_second(d, d)),
                ConstraintTerm(var="c2", scalar_coeff_op=-np.eye(d)),
            ),
            target=np.zeros((d, d)),
            name="ts_J2",
        ),
        Constraint(
            terms=(
                ConstraintTerm(var="J1", block_map=_retriever_pullback(noise.kraus, h, d)),
                ConstraintTerm(var="J2", block_map=_retriever_pullback(noise.kraus, h, d, sign=-1.0)),
            ),
            target=h,
            name="observable_recovery",
        ),
    ]
    return SdpProblem(
        blocks=[BlockVar("J1", d * d, psd=True), BlockVar("J2", d * d, psd=True)],
        scalars=[ScalarVar("c1", lower=0.0), ScalarVar("c2", lower=0.0)],
        objective={"c1": 1.0, "c2": 1.0},
        constraints=cons,
        name=f"info_recover[{noise.label}]",
    )
