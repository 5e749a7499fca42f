"""Finite-shot Monte Carlo simulation of protocol execution.

Shot randomness comes from SplitMix64 (Steele, Lea & Flood's 64-bit
mix/increment generator) used in counter mode: the stream for shot ``i`` of a
run seeded ``s`` starts from state ``scramble(s) + i`` and emits uniforms by
stepping the golden-ratio increment.  Streams are therefore a pure function
of ``(seed, shot_index)``: shots can be generated vectorized, in any order,
or in parallel with bitwise-identical results.

Per-shot outcomes are eigenvalues of the moment observable (all in [-1, 1],
which fixes the range constant in the Hoeffding plan) or the precomputed
per-outcome values of a measurement-based protocol.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .channels import Channel, tensor_power
from .moments import moment_observable
from .operators import Operator, tensor_product
from .protocols import (
    ChoiMap,
    MeasurementBased,
    MixedUnitary,
    Recursive,
    RetrievalProtocol,
)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _sm64_output(state: np.ndarray) -> np.ndarray:
    z = state.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _scramble(x: int) -> np.uint64:
    state = (int(x) + int(_GOLDEN)) % 2 ** 64
    return _sm64_output(np.array([state], dtype=np.uint64))[0]


def shot_uniforms(seed: int, shots: int, draws: int) -> np.ndarray:
    """(shots, draws) array of uniforms; row i depends only on (seed, i)."""
    base = _scramble(seed) + np.arange(shots, dtype=np.uint64)
    cols = []
    for n in range(1, draws + 1):
        step = np.uint64((n * int(_GOLDEN)) % 2 ** 64)
        z = _sm64_output(base + step)
        cols.append((z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53))
    return np.stack(cols, axis=1)


def derive_seed(seed: int, *indices: int) -> int:
    """Deterministic sub-seed for independent trials/streams."""
    s = int(_scramble(seed))
    for ix in indices:
        mixed = (s ^ (int(_scramble(ix)) + int(_GOLDEN))) % 2 ** 64
        s = int(_sm64_output(np.array([mixed], dtype=np.uint64))[0])
    return s


@dataclass(frozen=True)
class SamplingPlan:
    delta: float
    fail_prob: float
    f: float
    shots: int


def plan_shots(delta: float, fail_prob: float, f: float) -> SamplingPlan:
    """Minimal shot count with |estimate - truth| <= delta at confidence 1 - fail_prob.

    Hoeffding bound for outcomes in [-1, 1], scaled by the overhead f:
    shots >= f^2 * (2/delta^2) * ln(2/fail_prob), natural logarithm.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not 0.0 < fail_prob < 1.0:
        raise ValueError("failure probability must be in (0, 1)")
    if f <= 0:
        raise ValueError("overhead must be positive")
    shots = math.ceil(f * f * (2.0 / delta ** 2) * math.log(2.0 / fail_prob))
    return SamplingPlan(delta=delta, fail_prob=fail_prob, f=f, shots=shots)


@dataclass(frozen=True)
class EstimationRun:
    seed: int
    shots: int
    per_shot: np.ndarray         # outcome values, each in [-1, 1]
    outcome_indices: np.ndarray  # sampled unitary / basis-outcome index per shot
    zeta_bar: float
    estimate: float              # f * zeta_bar - t
    protocol_ref: str


def _finish_run(p: RetrievalProtocol, seed: int, values: np.ndarray,
                indices: np.ndarray) -> EstimationRun:
    zeta_bar = float(values.mean())
    return EstimationRun(seed=seed, shots=values.size, per_shot=values,
                         outcome_indices=indices, zeta_bar=zeta_bar,
                         estimate=p.f * zeta_bar - p.t,
                         protocol_ref=p.label or p.kind)


def _noisy_joint_state(p: RetrievalProtocol, rho: Operator, noise: Channel) -> Operator:
    if rho.dim != p.copy_dim:
        raise ValueError(f"state dim {rho.dim} != protocol copy dim {p.copy_dim}")
    joint = rho
    for _ in range(p.k - 1):
        joint = tensor_product(joint, rho)
    nk = tensor_power(noise, p.k)
    return nk.apply(joint)


def _merged_eigenbasis(k: int, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues of H_k merged within 1e-12, with per-column group labels."""
    h = moment_observable(k, d).matrix
    w, v = np.linalg.eigh(h.entries)
    groups = np.zeros(w.size, dtype=int)
    uniq = [w[0]]
    for i in range(1, w.size):
        if w[i] - uniq[-1] > 1e-12:
            uniq.append(w[i])
        groups[i] = len(uniq) - 1
    return np.array(uniq), v, groups


def _born_distribution(state: np.ndarray, v: np.ndarray, groups: np.ndarray,
                       n_groups: int) -> np.ndarray:
    diag = np.real(np.einsum("ij,jk,ki->i", v.conj().T, state, v))
    probs = np.zeros(n_groups)
    np.add.at(probs, groups, diag)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _sample_categorical(cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.searchsorted(cumulative, u, side="right").clip(0, cumulative.size - 1)


def run_mixed_unitary(p: RetrievalProtocol, rho: Operator, noise: Channel,
                      shots: int, seed: int) -> EstimationRun:
    """Sample a unitary per shot, then an H-eigenvalue by Born probabilities."""
    r = p.realization
    if not isinstance(r, MixedUnitary):
        raise TypeError("protocol realization is not mixed-unitary")
    sigma = _noisy_joint_state(p, rho, noise).entries
    values, v, groups = _merged_eigenbasis(p.k, p.copy_dim)
    dists = np.stack([
        np.cumsum(_born_distribution(u @ sigma @ u.conj().T, v, groups, values.size))
        for u in r.unitaries])
    cum_pj = np.cumsum(r.probabilities)
    u12 = shot_uniforms(seed, shots, 2)
    j = _sample_categorical(cum_pj, u12[:, 0])
    outcome = (u12[:, 1][:, None] >= dists[j]).sum(axis=1).clip(0, values.size - 1)
    return _finish_run(p, seed, values[outcome], j)


def run_measurement_based(p: RetrievalProtocol, rho: Operator, noise: Channel,
                          shots: int, seed: int) -> EstimationRun:
    """Sample a basis outcome per shot; record its precomputed value tr[H sigma_i]."""
    r = p.realization
    if not isinstance(r, MeasurementBased):
        raise TypeError("protocol realization is not measurement-based")
    sigma = _noisy_joint_state(p, rho, noise).entries
    probs = r.outcome_probabilities(sigma)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    cum = np.cumsum(probs)
    u = shot_uniforms(seed, shots, 1)[:, 0]
    outcome = _sample_categorical(cum, u)
    values = np.asarray(r.outcome_values, dtype=float)
    return _finish_run(p, seed, values[outcome], outcome)


def run_choi_map(p: RetrievalProtocol, rho: Operator, noise: Channel,
                 shots: int, seed: int) -> EstimationRun:
    """Apply the (trace-preserving) retriever channel, then measure H."""
    r = p.realization
    if not isinstance(r, ChoiMap):
        raise TypeError("protocol realization is not a Choi map")
    if not r.trace_preserving:
        raise ValueError("finite-shot simulation needs a trace-preserving retriever")
    sigma = _noisy_joint_state(p, rho, noise).entries
    out = r.apply(sigma)
    values, v, groups = _merged_eigenbasis(p.k, p.copy_dim)
    cum = np.cumsum(_born_distribution(out, v, groups, values.size))
    u = shot_uniforms(seed, shots, 1)[:, 0]
    outcome = _sample_categorical(cum, u)
    return _finish_run(p, seed, values[outcome], outcome)


def run_protocol(p: RetrievalProtocol, rho: Operator, noise: Channel,
                 shots: int, seed: int) -> EstimationRun:
    """Dispatch on the realization; recursive retrievers are exact-only."""
    r = p.realization
    if isinstance(r, MixedUnitary):
        return run_mixed_unitary(p, rho, noise, shots, seed)
    if isinstance(r, MeasurementBased):
        return run_measurement_based(p, rho, noise, shots, seed)
    if isinstance(r, ChoiMap):
        return run_choi_map(p, rho, noise, shots, seed)
    if isinstance(r, Recursive):
        raise ValueError(
            "the recursive retriever is not trace preserving; finite-shot "
            "simulation is unsupported - use exact evaluation (--exact)")
    raise TypeError(f"unknown realization {type(r)}")


def renyi_entropy(moment_value: float, alpha: int, base2: bool = False) -> float:
    """Renyi entropy (1/(1-alpha)) log tr[rho^alpha] from a moment value."""
    if alpha < 2:
        raise ValueError("integer-order Renyi entropy needs alpha >= 2")
    if moment_value <= 0:
        raise ValueError("moment value must be positive")
    h = math.log(moment_value) / (1.0 - alpha)
    return h / math.log(2.0) if base2 else h


def run_to_json(run: EstimationRun) -> dict:
    return {
        "schema_version": 1,
        "seed": run.seed,
        "shots": run.shots,
        "zeta_bar": run.zeta_bar,
        "estimate": run.estimate,
        "protocol_ref": run.protocol_ref,
        "per_shot": [float(x) for x in run.per_shot],
        "outcome_indices": [int(i) for i in run.outcome_indices],
    }


def run_to_csv(run: EstimationRun, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shot_index", "outcome_index", "value"])
        for i, (idx, val) in enumerate(zip(run.outcome_indices, run.per_shot)):
            w.writerow([i, int(idx), f"{val:.12g}"])


def save_run(run: EstimationRun, path) -> None:
    with open(path, "w") as fh:
        json.dump(run_to_json(run), fh)
