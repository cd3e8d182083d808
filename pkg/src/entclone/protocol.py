"""One-bit LOCC protocol realizing the optimal local cloner.

Alice measures a four-outcome POVM on her half of the pair, announces
one classical bit (whether her outcome lies in {1, 3} or {2, 4}), and
Bob applies the matching two-outcome operation.  The module builds the
four local matrices M1..M4, the eight product Kraus operators K1..K8,
runs the protocol exactly or by Monte Carlo sampling, exports the Choi
operator of the summed channel, and constructs the ancilla dilations
that implement both measurements unitarily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from entclone.analytic import CloneFamily, params_for, schmidt_state
from entclone.covariant import reorder_from_choi
from entclone.channel import clone_reductions
from entclone.linalg import kron

KRAUS_TOL = 1e-10
PROBABILITY_FLOOR = 1e-14

# (alice outcome, bob outcome) pairs in the fixed K1..K8 order; Bob hears
# bit 0 for alice in {1, 3} and applies sqrt(2)*M1 or sqrt(2)*M3, bit 1
# for alice in {2, 4} and applies sqrt(2)*M2 or sqrt(2)*M4.
_BRANCHES = ((1, 1), (1, 3), (3, 1), (3, 3), (2, 2), (2, 4), (4, 2), (4, 4))


@dataclass(frozen=True)
class LocalKrausSet:
    """Protocol matrices: scalars w, v, the four M_i, and the eight K_i."""

    w: float
    v: float
    m: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    k: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class ProtocolTranscript:
    """One measurement branch: outcomes, the communicated bit, and the result."""

    alice_outcome: int
    classical_bit: int
    bob_outcome: int
    joint_probability: float
    post_state: np.ndarray


def _pair_kraus(ma: np.ndarray, mb: np.ndarray) -> np.ndarray:
    """sqrt(2) * Ma (x) Mb with output rows regrouped to (1A, 1B, 2A, 2B)."""
    block = math.sqrt(2.0) * kron(ma, mb)
    return block.reshape(2, 2, 2, 2, 4).transpose(0, 2, 1, 3, 4).reshape(16, 4)


def build_kraus(alpha: float) -> LocalKrausSet:
    """Kraus data of the optimal one-bit protocol at Schmidt weight alpha.

    Below the activation threshold the optimal family degenerates to a
    product of two symmetric single-qubit cloners; that limit is reached
    here with v = 0 and w = 1/sqrt(3) in the same matrix layout, so the
    protocol stays total in alpha (the classical bit is then vacuous).
    """
    a = params_for(CloneFamily.LOCC_OPTIMAL, alpha)
    w = float(a[1, 1]) ** 0.25 / math.sqrt(3.0)
    v = float(a[0, 0]) ** 0.25 / 2.0
    hi = w / 2.0 + v
    lo = w / 2.0 - v
    m1 = np.array([[w, 0], [0, lo], [0, hi], [0, 0]], dtype=complex)
    m2 = np.array([[w, 0], [0, hi], [0, lo], [0, 0]], dtype=complex)
    m3 = np.array([[0, 0], [hi, 0], [lo, 0], [0, w]], dtype=complex)
    m4 = np.array([[0, 0], [lo, 0], [hi, 0], [0, w]], dtype=complex)
    m = (m1, m2, m3, m4)
    k = tuple(_pair_kraus(m[ai - 1], m[bi - 1]) for ai, bi in _BRANCHES)
    return LocalKrausSet(w=w, v=v, m=m, k=k)


def _check_kraus(ks: LocalKrausSet) -> None:
    povm = sum(mi.conj().T @ mi for mi in ks.m)
    if np.max(np.abs(povm - np.eye(2))) > KRAUS_TOL:
        raise ValueError("POVM completeness violated: sum Mi^dag Mi != I")
    total = sum(ki.conj().T @ ki for ki in ks.k)
    if np.max(np.abs(total - np.eye(4))) > KRAUS_TOL:
        raise ValueError("Kraus completeness violated: sum Ki^dag Ki != I")


def kraus_to_choi(ks: LocalKrausSet) -> np.ndarray:
    """Choi operator of rho -> sum_i Ki rho Ki^dag in the grouped party layout.

    The operator is assembled in the (output, input) convention and then
    reordered to (1A, 2A, A, 1B, 2B, B) so it compares directly with the
    covariant parametrization.
    """
    p = np.zeros((64, 64), dtype=complex)
    for kmat in ks.k:
        vec = kmat.reshape(-1)
        p += np.outer(vec, vec.conj())
    return reorder_from_choi(p)


def _check_state(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"input state must be 4x4, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("input state must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError("input state must have unit trace")
    if float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()) < -1e-10:
        raise ValueError("input state must be positive semidefinite")
    return rho


def run_protocol_exact(alpha: float, state: np.ndarray | None = None) -> list[ProtocolTranscript]:
    """Enumerate all eight (alice, bob) branches on the given input state.

    state defaults to the representative pure state at this alpha.  Each
    transcript carries the normalized post-measurement state; branches of
    negligible probability get a zero matrix instead.
    """
    if state is None:
        phi = schmidt_state(alpha)
        state = np.outer(phi, phi.conj())
    rho = _check_state(state)
    ks = build_kraus(alpha)
    out: list[ProtocolTranscript] = []
    for (ai, bi), kmat in zip(_BRANCHES, ks.k):
        raw = kmat @ rho @ kmat.conj().T
        prob = float(np.trace(raw).real)
        if prob > PROBABILITY_FLOOR:
            post = raw / prob
        else:
            prob = max(prob, 0.0)
            post = np.zeros((16, 16), dtype=complex)
        out.append(
            ProtocolTranscript(
                alice_outcome=ai,
                classical_bit=0 if ai in (1, 3) else 1,
                bob_outcome=bi,
                joint_probability=prob,
                post_state=post,
            )
        )
    return out


def branch_fidelity(transcript: ProtocolTranscript, reference: np.ndarray) -> float:
    """Mean overlap of the two clones of one branch with a pure reference."""
    ref = np.asarray(reference, dtype=complex).reshape(-1)
    if ref.shape != (4,):
        raise ValueError("reference must be a two-qubit state vector")
    if transcript.joint_probability <= 0.0:
        return 0.0
    r1, r2 = clone_reductions(transcript.post_state)
    f1 = float(np.real(ref.conj() @ r1 @ ref))
    f2 = float(np.real(ref.conj() @ r2 @ ref))
    return (f1 + f2) / 2.0


def average_clone_fidelity(transcripts: list[ProtocolTranscript], reference: np.ndarray) -> float:
    """Probability-weighted mean branch fidelity against a pure reference."""
    return sum(tr.joint_probability * branch_fidelity(tr, reference) for tr in transcripts)


def run_protocol_sampled(
    alpha: float,
    state: np.ndarray | None = None,
    trials: int = 100_000,
    seed: int = 7,
) -> tuple[float, float]:
    """Monte Carlo companion to the exact enumeration.

    Branches are drawn with their exact probabilities from a seeded
    generator; each draw scores the fidelity of its branch against the
    representative state at this alpha.  Returns the sample mean and its
    standard error (zero when trials < 2).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    transcripts = run_protocol_exact(alpha, state)
    reference = schmidt_state(alpha)
    scores = np.array([branch_fidelity(tr, reference) for tr in transcripts])
    probs = np.array([tr.joint_probability for tr in transcripts])
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(scores), size=trials, p=probs)
    counts = np.bincount(draws, minlength=len(scores))
    estimate = float(counts @ scores / trials)
    if trials < 2:
        return estimate, 0.0
    variance = float(counts @ (scores - estimate) ** 2 / (trials - 1))
    return estimate, math.sqrt(variance / trials)


def build_dilations(ks: LocalKrausSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Isometries realizing both POVMs with local ancillas.

    Alice's map sends her qubit (with a blank clone and a four-level
    ancilla attached) to its two clones and the ancilla; reading out the
    ancilla in the computational basis recovers the four M_i exactly.
    Bob's two maps use a two-level ancilla and recover sqrt(2)*M1,
    sqrt(2)*M3 (bit 0) or sqrt(2)*M2, sqrt(2)*M4 (bit 1).  Each map is
    returned as its action on the two-dimensional working domain, with
    output rows ordered (clone pair) x (ancilla).
    """
    _check_kraus(ks)
    m1, m2, m3, m4 = ks.m
    ua = np.stack(ks.m, axis=1).reshape(16, 2)
    ub_plus = math.sqrt(2.0) * np.stack((m1, m3), axis=1).reshape(8, 2)
    ub_minus = math.sqrt(2.0) * np.stack((m2, m4), axis=1).reshape(8, 2)
    return ua, ub_plus, ub_minus
