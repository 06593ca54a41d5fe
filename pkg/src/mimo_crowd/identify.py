"""User identification: steering-vector projection matching and the threshold baseline.

The proposed scheme projects every despread vector onto each candidate
steering vector, reads off the per-subframe argmax pilot index as that
candidate's pattern, and declares a user active when its hopping pattern
equals a candidate pattern exactly.  No threshold is involved anywhere.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .aoa import AoaEstimate
from .channel import normalized_steering


@dataclass
class ProjectionTable:
    """beta[k, t, l] = alpha(phi_k)^H r_{t,l} for candidate k, subframe t, pilot l."""

    beta: np.ndarray
    angles: np.ndarray


@dataclass(frozen=True)
class SteeringPattern:
    """Per-subframe winning pilot indices of one candidate steering vector."""

    k: int
    eta: tuple
    aoa: float
    strength: float  # mean winning |beta| over subframes; used to break duplicates


@dataclass(frozen=True)
class Match:
    """One identified user; baseline matches carry no AOA binding."""

    user_id: int
    candidate: Optional[int]
    aoa: Optional[float]
    pattern: tuple
    strength: Optional[float] = None


@dataclass
class IdentificationReport:
    method: str
    matches: list
    unmatched_candidates: list
    duplicate_users: dict = field(default_factory=dict)
    # (candidate, nearest user, Hamming distance) for unmatched candidates
    hamming_diagnostics: list = field(default_factory=list)

    def matched_user_ids(self):
        return [m.user_id for m in self.matches]


def project(despread_set, candidates, geometry):
    """Project every despread vector onto the unit-norm candidate steering vectors."""
    if isinstance(candidates, AoaEstimate):
        angles = np.asarray(candidates.angles, dtype=float)
    else:
        angles = np.atleast_1d(np.asarray(candidates, dtype=float))
    if angles.size == 0:
        raise ValueError("need at least one AOA candidate")
    alpha = np.stack([normalized_steering(geometry, th) for th in angles])  # (K_c, M)
    beta = np.einsum("km,tlm->ktl", alpha.conj(), despread_set.r)
    return ProjectionTable(beta=beta, angles=angles)


def extract_pattern(table, k):
    """Per-subframe argmax pilot of candidate k; ties go to the smallest pilot index."""
    mags = np.abs(table.beta[k])
    eta = np.argmax(mags, axis=1)  # argmax returns the first (smallest) index on ties
    strength = float(np.mean(mags[np.arange(mags.shape[0]), eta]))
    return SteeringPattern(
        k=int(k),
        eta=tuple(int(e) for e in eta),
        aoa=float(table.angles[k]),
        strength=strength,
    )


def extract_patterns(table):
    return [extract_pattern(table, k) for k in range(table.beta.shape[0])]


def _nearest_pattern(codebook, eta):
    dists = np.sum(codebook.assignment != np.asarray(eta), axis=1)
    user = int(np.argmin(dists))
    return user, int(dists[user])


def match_patterns(patterns, codebook):
    """Bind candidates to users by exact full-pattern equality.

    When two candidates extract the same pattern (duplicate AOA candidates of
    one user) the stronger projection wins and the event is flagged.
    """
    lookup = codebook.pattern_lookup()
    matches = {}
    unmatched = []
    duplicates = {}
    order = sorted(range(len(patterns)), key=lambda i: (-patterns[i].strength, patterns[i].k))
    for i in order:
        pat = patterns[i]
        user = lookup.get(pat.eta)
        if user is None:
            unmatched.append(pat.k)
        elif user in matches:
            duplicates.setdefault(user, []).append(pat.k)
            unmatched.append(pat.k)
        else:
            matches[user] = Match(
                user_id=user,
                candidate=pat.k,
                aoa=pat.aoa,
                pattern=pat.eta,
                strength=pat.strength,
            )
    unmatched.sort()
    diagnostics = []
    if codebook.num_users:
        for k in unmatched:
            pat = next(p for p in patterns if p.k == k)
            user, dist = _nearest_pattern(codebook, pat.eta)
            diagnostics.append((k, user, dist))
    return IdentificationReport(
        method="proposed",
        matches=sorted(matches.values(), key=lambda m: m.user_id),
        unmatched_candidates=unmatched,
        duplicate_users={u: sorted(ks) for u, ks in sorted(duplicates.items())},
        hamming_diagnostics=diagnostics,
    )


def default_threshold(num_antennas, noise_var, num_pilots, p_t, c=3.0):
    """c sigma rule on the despread-noise RMS sqrt(M noise_var / (L p_t))."""
    return float(c) * np.sqrt(num_antennas * noise_var / (num_pilots * p_t))


def threshold_identify(despread_set, codebook, threshold):
    """Baseline: pilot l is present in subframe t iff ||r_{t,l}|| exceeds the
    threshold; a user is active iff its whole pattern is present."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    norms = np.linalg.norm(despread_set.r, axis=2)  # (U, L)
    present = norms > threshold
    u = present.shape[0]
    hits = present[np.arange(u)[:, None], codebook.assignment.T]  # (U, K)
    active = np.flatnonzero(hits.all(axis=0))
    matches = [
        Match(user_id=int(uid), candidate=None, aoa=None, pattern=codebook.pattern(uid))
        for uid in active
    ]
    return IdentificationReport(
        method="threshold-baseline", matches=matches, unmatched_candidates=[]
    )
