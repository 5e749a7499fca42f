"""Quantum channels in Kraus/Choi form plus the built-in noise models.

Conventions, pinned once and verified by round-trip tests:

* Choi matrices are input-system-first, ``J = sum_ij |i><j| (x) N(|i><j|)``.
* The link product ``tr_B[(J_N^{T_B} (x) I_C)(I_A (x) J_C)]`` with the partial
  transpose on the *output* factor of ``J_N`` reproduces Kraus composition.
* The channel matrix is ``M_N = sum_k conj(E_k) (x) E_k`` and satisfies
  ``M_N |X> = |N(X)>`` in the column-index-first vectorization.

Channels are immutable; the Kraus -> Choi conversion is computed once on
first request and cached (compute-then-publish, idempotent under concurrent
access).
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .operators import (
    Operator,
    identity,
    matrix_rank,
    partial_trace,
    partial_transpose,
    tensor_product,
)

CPTP_TOL = 1e-9


class Channel:
    """Linear map between density operators, stored as Kraus and/or Choi data.

    At least one of ``kraus`` / ``choi`` must be given.  Kraus operators are
    ``out_dim x in_dim`` matrices.
    """

    def __init__(self, in_dim: int, out_dim: int,
                 kraus: Sequence[np.ndarray] | None = None,
                 choi: Operator | None = None,
                 label: str = ""):
        if kraus is None and choi is None:
            raise ValueError("channel needs Kraus operators or a Choi matrix")
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.label = label
        self.kraus: tuple[np.ndarray, ...] | None = None
        if kraus is not None:
            ops = tuple(np.asarray(e, dtype=complex) for e in kraus)
            for e in ops:
                if e.shape != (self.out_dim, self.in_dim):
                    raise ValueError(
                        f"Kraus operator shape {e.shape} != ({self.out_dim}, {self.in_dim})"
                    )
            self.kraus = ops
        self._choi = choi
        if choi is not None and choi.dim != self.in_dim * self.out_dim:
            raise ValueError("Choi dimension does not match in_dim * out_dim")

    def __repr__(self):
        form = "kraus" if self.kraus is not None else "choi"
        return f"Channel({self.label or form}, {self.in_dim}->{self.out_dim})"

    @property
    def choi(self) -> Operator:
        if self._choi is None:
            self._choi = choi_of(self)
        return self._choi

    def apply(self, rho: Operator) -> Operator:
        return apply(self, rho)

    def adjoint_apply(self, obs: Operator) -> Operator:
        return adjoint_apply(self, obs)

    def is_cptp(self, tol: float = CPTP_TOL) -> bool:
        j = self.choi
        if j.min_eigenvalue() < -tol:
            return False
        marg = partial_trace(j.with_dims((self.in_dim, self.out_dim)), [0])
        return bool(np.max(np.abs(marg.entries - np.eye(self.in_dim))) <= tol)


def choi_of(c: Channel) -> Operator:
    """Choi matrix J = sum_ij |i><j| (x) N(|i><j|), input factor first."""
    if c.kraus is None:
        return c._choi
    d = c.in_dim * c.out_dim
    j = np.zeros((d, d), dtype=complex)
    for e in c.kraus:
        v = e.T.reshape(-1)  # (I (x) E)|Omega>
        j += np.outer(v, v.conj())
    return Operator(j, (c.in_dim, c.out_dim))


def apply(c: Channel, rho: Operator) -> Operator:
    """Schroedinger-picture action N(rho)."""
    if rho.dim != c.in_dim:
        raise ValueError(f"state dimension {rho.dim} != channel input {c.in_dim}")
    if c.kraus is not None:
        out = np.zeros((c.out_dim, c.out_dim), dtype=complex)
        for e in c.kraus:
            out += e @ rho.entries @ e.conj().T
    else:
        j = c.choi.entries.reshape(c.in_dim, c.out_dim, c.in_dim, c.out_dim)
        # N(rho) = tr_A[(rho^T (x) I) J]
        out = np.einsum("ij,iajb->ab", rho.entries, j)
    return Operator(out, (c.out_dim,))


def adjoint_apply(c: Channel, obs: Operator) -> Operator:
    """Heisenberg-picture action N^dag(O); unital when N is trace preserving."""
    if obs.dim != c.out_dim:
        raise ValueError(f"observable dimension {obs.dim} != channel output {c.out_dim}")
    if c.kraus is not None:
        out = np.zeros((c.in_dim, c.in_dim), dtype=complex)
        for e in c.kraus:
            out += e.conj().T @ obs.entries @ e
    else:
        j = c.choi.entries.reshape(c.in_dim, c.out_dim, c.in_dim, c.out_dim)
        # N^dag(O) = tr_B[(I (x) O^T) J^T]
        out = np.einsum("ab,qbpa->pq", obs.entries, j)
    return Operator(out, (c.in_dim,))


def compose(after: Channel, before: Channel, label: str = "") -> Channel:
    """Channel ``after . before`` by multiplying Kraus sets."""
    if before.out_dim != after.in_dim:
        raise ValueError("cannot compose: dimension mismatch")
    if before.kraus is None or after.kraus is None:
        raise ValueError("compose requires Kraus form on both channels")
    kraus = [a @ b for a in after.kraus for b in before.kraus]
    return Channel(before.in_dim, after.out_dim, kraus=kraus,
                   label=label or f"{after.label}.{before.label}")


def link_product(j_first: Operator, j_second: Operator,
                 dims: tuple[int, int, int]) -> Operator:
    """Choi of the composition from the Chois of the parts.

    ``j_first`` is J of the map A -> B, ``j_second`` of B -> C, and the result
    is J of the composed map A -> C via
    ``tr_B[(J_first^{T_B} (x) I_C)(I_A (x) J_second)]``.
    """
    da, db, dc = dims
    jn = partial_transpose(j_first.with_dims((da, db)), [1])
    lhs = tensor_product(jn, identity(dc))
    rhs = tensor_product(identity(da), j_second.with_dims((db, dc)))
    prod = Operator(lhs.entries @ rhs.entries, (da, db, dc))
    return partial_trace(prod, [0, 2])


def tensor_power(c: Channel, k: int) -> Channel:
    """k-fold tensor product channel, Kraus set = all k-fold products."""
    if k < 1:
        raise ValueError("tensor power requires k >= 1")
    if c.kraus is None:
        raise ValueError("tensor_power requires Kraus form")
    if k == 1:
        return c
    kraus: list[np.ndarray] = [np.array([[1.0 + 0j]])]
    for _ in range(k):
        kraus = [np.kron(a, e) for a in kraus for e in c.kraus]
    return Channel(c.in_dim ** k, c.out_dim ** k, kraus=kraus,
                   label=f"{c.label}^(x{k})")


class ChannelMatrix:
    """Matrix M_N = sum_k conj(E_k) (x) E_k acting on vectorized operators."""

    def __init__(self, entries: np.ndarray):
        self.entries = np.asarray(entries, dtype=complex)


def channel_matrix(c: Channel) -> ChannelMatrix:
    if c.kraus is None:
        raise ValueError("channel matrix requires Kraus form")
    d2 = c.in_dim * c.out_dim
    m = np.zeros((d2, d2), dtype=complex)
    for e in c.kraus:
        m += np.kron(e.conj(), e)
    return ChannelMatrix(m)


def is_invertible(c: Channel, tol: float = 1e-9) -> bool:
    """Rank test on M_N: invertible iff the channel matrix has full rank."""
    return matrix_rank(channel_matrix(c).entries, tol) == c.in_dim ** 2


def identity_channel(d: int) -> Channel:
    return Channel(d, d, kraus=[np.eye(d, dtype=complex)], label=f"id_{d}")


def _weyl_operators(d: int) -> list[np.ndarray]:
    """Shift/clock unitary basis; reduces to Paulis (up to phase) at d = 2."""
    omega = np.exp(2j * np.pi / d)
    shift = np.zeros((d, d), dtype=complex)
    for x in range(d):
        shift[(x + 1) % d, x] = 1.0
    clock = np.diag([omega ** x for x in range(d)])
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(d) for b in range(d)]


def depolarizing(eps: float, d: int = 2) -> Channel:
    """Depolarizing channel rho -> (1 - eps) rho + eps I/d."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"depolarizing noise level must be in [0, 1], got {eps}")
    kraus = []
    w0 = np.sqrt(1.0 - eps + eps / d ** 2)
    kraus.append(w0 * np.eye(d, dtype=complex))
    scale = np.sqrt(eps) / d
    for w in _weyl_operators(d)[1:]:
        kraus.append(scale * w)
    return Channel(d, d, kraus=kraus, label=f"DE(eps={eps:g},d={d})")


def amplitude_damping(eps: float) -> Channel:
    """Single-qubit amplitude damping with damping rate eps."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"damping rate must be in [0, 1], got {eps}")
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - eps)]], dtype=complex)
    a1 = np.array([[0.0, np.sqrt(eps)], [0.0, 0.0]], dtype=complex)
    return Channel(2, 2, kraus=[a0, a1], label=f"AD(eps={eps:g})")


def _complex_matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _complex_matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def channel_to_json(c: Channel) -> dict:
    if c.kraus is None:
        raise ValueError("JSON schema stores Kraus form only")
    return {
        "label": c.label,
        "in_dim": c.in_dim,
        "out_dim": c.out_dim,
        "kraus": [_complex_matrix_to_json(e) for e in c.kraus],
    }


def channel_from_json(data: dict) -> Channel:
    return Channel(data["in_dim"], data["out_dim"],
                   kraus=[_complex_matrix_from_json(e) for e in data["kraus"]],
                   label=data.get("label", ""))


def save_channel(c: Channel, path) -> None:
    with open(path, "w") as fh:
        json.dump(channel_to_json(c), fh, indent=1)


def load_channel(path) -> Channel:
    with open(path) as fh:
        return channel_from_json(json.load(fh))
