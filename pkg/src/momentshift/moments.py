"""Cyclic permutation operators and the moment observables built from them.

The k-th moment of a state is read off k copies through the Hermitian
observable ``H_k = (S_k + S_k^dag)/2`` where ``S_k`` cyclically shifts the
copies: ``S_k |x1 x2 ... xk> = |x2 ... xk x1>``.  The spectral structure of
``S_k`` is organized by necklaces (equivalence classes of index strings under
rotation); each string of minimal period p contributes eigenstates only for
the p phase labels m with m*p = 0 mod k.  For prime k every non-constant
string has full period, which recovers the cardinality
``|C(k,d)| = (d^k - d)/k + d``; the construction below handles arbitrary k.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .operators import Operator

DIMENSION_CAP = 4096


def _check_cap(k: int, d: int) -> int:
    if k < 1 or d < 2:
        raise ValueError("need k >= 1 and d >= 2")
    dim = d ** k
    if dim > DIMENSION_CAP:
        raise ValueError(f"dense dimension {d}^{k} exceeds cap {DIMENSION_CAP}")
    return dim


def cyclic_permutation(k: int, d: int = 2) -> Operator:
    """Unitary S_k with S_k |x1 x2 ... xk> = |x2 ... xk x1>."""
    dim = _check_cap(k, d)
    s = np.zeros((dim, dim), dtype=complex)
    radix = [d ** (k - 1 - j) for j in range(k)]
    for x in product(range(d), repeat=k):
        col = sum(xi * r for xi, r in zip(x, radix))
        shifted = x[1:] + x[:1]
        row = sum(xi * r for xi, r in zip(shifted, radix))
        s[row, col] = 1.0
    return Operator(s, (d,) * k)


@dataclass(frozen=True)
class MomentObservable:
    """Observable on k copies with tr[H rho^(x k)] = tr[rho^k]."""

    k: int
    d: int
    matrix: Operator
    kind: str = "symmetrized"  # "symmetrized" (H) or "raw" (S_k)


def moment_observable(k: int, d: int = 2, kind: str = "symmetrized") -> MomentObservable:
    """Observable reading off tr[rho^k]: (S_k + S_k^dag)/2 or the raw S_k."""
    s = cyclic_permutation(k, d)
    if kind == "raw":
        return MomentObservable(k=k, d=d, matrix=s, kind="raw")
    if kind != "symmetrized":
        raise ValueError(f"unknown observable kind {kind!r}")
    h = Operator((s.entries + s.entries.conj().T) / 2, s.subsystem_dims)
    return MomentObservable(k=k, d=d, matrix=h, kind="symmetrized")


def _min_rotation(x: tuple[int, ...]) -> tuple[int, ...]:
    return min(x[i:] + x[:i] for i in range(len(x)))


def _period(x: tuple[int, ...]) -> int:
    k = len(x)
    for p in range(1, k + 1):
        if k % p == 0 and x == x[p:] + x[:p]:
            return p
    return k


def necklace_set(k: int, d: int = 2) -> list[tuple[int, ...]]:
    """Canonical rotation-class representatives of length-k strings over [d].

    Representatives are the lexicographically smallest rotations.  Cyclic
    shifts of the returned set cover all d^k strings; for prime k the count
    equals (d^k - d)/k + d.
    """
    _check_cap(k, d)
    reps = []
    for x in product(range(d), repeat=k):
        if x == _min_rotation(x):
            reps.append(x)
    return reps


@dataclass(frozen=True)
class PermutationSpectrum:
    """Eigenstructure of S_k indexed as in the spectral decomposition.

    ``projectors[m]`` projects onto the eigenspace with eigenvalue
    ``omega_k^{-m}``, so ``sum_m omega_k^{-m} projectors[m] == S_k``.
    ``eigenstates[(m, x)]`` is the normalized vector for necklace x (only
    present when the minimal period p of x divides into m, i.e. m*p = 0
    mod k; constant strings appear only at m = 0).
    """

    k: int
    d: int
    necklaces: tuple[tuple[int, ...], ...]
    eigenstates: dict
    projectors: tuple[Operator, ...]

    def projector_ranks(self) -> tuple[int, ...]:
        return tuple(sum(1 for (m, _x) in self.eigenstates if m == mm)
                     for mm in range(self.k))


def permutation_eigenprojectors(k: int, d: int = 2) -> PermutationSpectrum:
    dim = _check_cap(k, d)
    reps = necklace_set(k, d)
    radix = [d ** (k - 1 - j) for j in range(k)]
    omega = np.exp(2j * np.pi / k)
    eigenstates: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}
    proj = [np.zeros((dim, dim), dtype=complex) for _ in range(k)]
    for x in reps:
        p = _period(x)
        orbit_idx = []
        for l in range(p):
            shifted = x[l:] + x[:l]
            orbit_idx.append(sum(xi * r for xi, r in zip(shifted, radix)))
        step = k // p
        for m in range(0, k, step):
            psi = np.zeros(dim, dtype=complex)
            for l, idx in enumerate(orbit_idx):
                psi[idx] += omega ** (m * l)
            psi /= np.sqrt(p)
            eigenstates[(m, x)] = psi
            proj[m] += np.outer(psi, psi.conj())
    projectors = tuple(Operator(pm, (d,) * k) for pm in proj)
    return PermutationSpectrum(k=k, d=d, necklaces=tuple(reps),
                               eigenstates=eigenstates, projectors=projectors)
