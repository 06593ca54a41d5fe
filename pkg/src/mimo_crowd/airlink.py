"""Pilot book, hopping codebook, uplink frame synthesis and despreading.

One superframe spans U subframes. In subframe t every active user j sends
the pilot selected by its hopping pattern followed by unit-power 4-QAM data,
so the base station receives

    Y_pilot[t] = sum_j h_{t,j} sqrt(p_t) mu_{a(t,j)}^T + W_pilot
    Y_data[t]  = sum_j h_{t,j} sqrt(p_t) x_{t,j}      + W_data

with i.i.d. CN(0, noise_var) noise entries.  Despreading correlates the
pilot block with each pilot: r_{t,l} = Y_pilot[t] mu_l^* / (L sqrt(p_t)).
"""

import math
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng as rngmod
from .channel import ArrayGeometry, UserProfile, draw_channel


class CapacityExceededError(ValueError):
    """More users requested than the pattern space can hold."""


@dataclass(frozen=True)
class PilotBook:
    """L mutually orthogonal length-L pilot sequences (rows of ``pilots``)."""

    L: int
    pilots: np.ndarray


def build_pilot_book(num_pilots):
    """DFT pilot book: pilot k has entries e^{-j 2pi k n / L}.

    The Gram matrix is exactly L * identity, and every entry has unit modulus.
    """
    if num_pilots < 1:
        raise ValueError("pilot count must be >= 1")
    n = np.arange(num_pilots)
    pilots = np.exp(-2.0j * np.pi * np.outer(n, n) / num_pilots)
    return PilotBook(L=int(num_pilots), pilots=pilots)


@dataclass
class HoppingCodebook:
    """Injective map user -> length-U tuple of pilot indices in [0, L)."""

    U: int
    L: int
    assignment: np.ndarray  # (K, U) integer pilot indices
    _lookup: Optional[dict] = field(default=None, init=False, repr=False, compare=False)

    @property
    def num_users(self):
        return int(self.assignment.shape[0])

    def pattern(self, user_id):
        return tuple(int(x) for x in self.assignment[user_id])

    def pattern_lookup(self):
        if self._lookup is None:
            self._lookup = {self.pattern(u): u for u in range(self.num_users)}
        return self._lookup

    def validate(self):
        if self.assignment.shape[1] != self.U:
            raise ValueError("assignment width does not match U")
        if self.assignment.min(initial=0) < 0 or self.assignment.max(initial=0) >= self.L:
            raise ValueError("pilot indices must lie in [0, L)")
        if len({self.pattern(u) for u in range(self.num_users)}) != self.num_users:
            raise ValueError("hopping patterns are not unique")


def build_hopping_codebook(num_users, num_pilots, subframes, seed):
    """Assign each user a distinct pseudorandom hopping pattern.

    User ids are mapped through a seeded affine bijection of the pattern
    space [0, L^U) and then written in base L, which guarantees injectivity
    without materializing the full space.
    """
    space = num_pilots ** subframes
    if num_users > space:
        raise CapacityExceededError(
            f"{num_users} users exceed the {space} available hopping patterns"
        )
    gen = rngmod.stream(seed, rngmod.CODEBOOK)
    if space == 1:
        mult, offset = 1, 0
    else:
        mult = int(gen.integers(1, space))
        while math.gcd(mult, space) != 1:
            mult = int(gen.integers(1, space))
        offset = int(gen.integers(0, space))
    assignment = np.empty((num_users, subframes), dtype=np.int64)
    for user in range(num_users):
        idx = (mult * user + offset) % space
        for t in range(subframes):
            assignment[user, t] = idx % num_pilots
            idx //= num_pilots
    book = HoppingCodebook(U=int(subframes), L=int(num_pilots), assignment=assignment)
    book.validate()
    return book


@dataclass
class UserPopulation:
    """Static per-user ground truth plus the shared hopping codebook."""

    profiles: list
    codebook: HoppingCodebook

    def __post_init__(self):
        for i, prof in enumerate(self.profiles):
            if prof.user_id != i:
                raise ValueError("profiles must be ordered by user_id")

    @property
    def num_users(self):
        return len(self.profiles)


@dataclass(frozen=True)
class FrameParams:
    """Physical-layer constants of one synthesized superframe."""

    geometry: ArrayGeometry
    pilot_book: PilotBook
    U: int
    tau_data: int
    p_t: float
    noise_var: float


@dataclass
class SuperframeRealization:
    """Everything the base station received plus the generating ground truth."""

    active_set: np.ndarray      # (G,) user ids
    pilot_indices: np.ndarray   # (U, G) pilot index per subframe and active user
    h_los: np.ndarray           # (G, M), constant over the superframe
    h_nlos: np.ndarray          # (U, G, M)
    Y_pilot: np.ndarray         # (U, M, L)
    Y_data: np.ndarray          # (U, M, tau_data)
    X_true: np.ndarray          # (U, G, tau_data)
    noise_var: float
    p_t: float

    @property
    def h(self):
        """Total channel, shape (U, G, M)."""
        return self.h_los[None, :, :] + self.h_nlos


@dataclass
class DespreadSet:
    """Per-(subframe, pilot) despread vectors, shape (U, L, M)."""

    r: np.ndarray


def _complex_noise(gen, shape, variance):
    w = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    return w * np.sqrt(variance / 2.0)


def _qam4_symbols(gen, count):
    bits = gen.integers(0, 2, size=(2, count))
    return ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / np.sqrt(2.0)


def synthesize_superframe(population, active_set, frame, seed, trial_index):
    """Generate channels, pilots, data and noise for one superframe.

    Per-(trial, user, subframe) streams make every draw reproducible in
    isolation; an empty active set yields noise-only frames.
    """
    active = np.asarray(list(active_set), dtype=int)
    if len(set(active.tolist())) != len(active):
        raise ValueError("active user ids must be distinct")
    geometry = frame.geometry
    m = geometry.num_antennas
    num_active = len(active)
    pilot_book = frame.pilot_book

    h_los = np.zeros((num_active, m), dtype=complex)
    h_nlos = np.zeros((frame.U, num_active, m), dtype=complex)
    x_true = np.zeros((frame.U, num_active, frame.tau_data), dtype=complex)
    for j, uid in enumerate(active):
        profile = population.profiles[uid]
        for t in range(frame.U):
            real = draw_channel(
                profile, geometry, rngmod.stream(seed, rngmod.NLOS, trial_index, uid, t)
            )
            if t == 0:
                h_los[j] = real.h_los
            h_nlos[t, j] = real.h_nlos
            x_true[t, j] = _qam4_symbols(
                rngmod.stream(seed, rngmod.DATA_SYMBOLS, trial_index, uid, t),
                frame.tau_data,
            )

    if num_active:
        pilot_indices = population.codebook.assignment[active].T.copy()
    else:
        pilot_indices = np.zeros((frame.U, 0), dtype=np.int64)

    sqrt_p = np.sqrt(frame.p_t)
    y_pilot = np.zeros((frame.U, m, pilot_book.L), dtype=complex)
    y_data = np.zeros((frame.U, m, frame.tau_data), dtype=complex)
    for t in range(frame.U):
        if num_active:
            h_t = (h_los + h_nlos[t]).T  # (M, G)
            y_pilot[t] = sqrt_p * (h_t @ pilot_book.pilots[pilot_indices[t]])
            y_data[t] = sqrt_p * (h_t @ x_true[t])
        if frame.noise_var > 0.0:
            y_pilot[t] += _complex_noise(
                rngmod.stream(seed, rngmod.NOISE_PILOT, trial_index, t),
                (m, pilot_book.L),
                frame.noise_var,
            )
            y_data[t] += _complex_noise(
                rngmod.stream(seed, rngmod.NOISE_DATA, trial_index, t),
                (m, frame.tau_data),
                frame.noise_var,
            )

    return SuperframeRealization(
        active_set=active,
        pilot_indices=pilot_indices,
        h_los=h_los,
        h_nlos=h_nlos,
        Y_pilot=y_pilot,
        Y_data=y_data,
        X_true=x_true,
        noise_var=float(frame.noise_var),
        p_t=float(frame.p_t),
    )


def despread(y_pilot, pilot_book, p_t):
    """Correlate each subframe's pilot block with every pilot sequence.

    Returns r[t, l] = Y_pilot[t] @ conj(mu_l) / (L sqrt(p_t)); by pilot
    orthogonality this equals the sum of the channels of the users that sent
    pilot l in subframe t, plus filtered noise.
    """
    if not p_t > 0:
        raise ValueError("p_t must be positive")
    y_pilot = np.asarray(y_pilot)
    if y_pilot.ndim != 3:
        raise ValueError("y_pilot must have shape (U, M, L)")
    proj = y_pilot @ pilot_book.pilots.conj().T  # column l = Y mu_l^*
    r = proj.transpose(0, 2, 1) / (pilot_book.L * np.sqrt(p_t))
    return DespreadSet(r=np.ascontiguousarray(r))


_DUMP_HEADER = struct.Struct("<IIIIdd")


def write_frame_dump(path, sf):
    """Write a superframe's receive matrices to a binary replay file.

    Layout (little endian): header u32 M, u32 L, u32 U, u32 tau_data,
    f64 noise_var, f64 p_t; then for each subframe t the matrices
    Y_pilot[t] (M x L) and Y_data[t] (M x tau_data), each row-major with
    every complex entry stored as two f64 (real part then imaginary part).
    """
    u, m, num_pilots = sf.Y_pilot.shape
    tau_data = sf.Y_data.shape[2]
    with open(path, "wb") as fh:
        fh.write(_DUMP_HEADER.pack(m, num_pilots, u, tau_data, sf.noise_var, sf.p_t))
        for t in range(u):
            np.ascontiguousarray(sf.Y_pilot[t], dtype=np.complex128).tofile(fh)
            np.ascontiguousarray(sf.Y_data[t], dtype=np.complex128).tofile(fh)


def read_frame_dump(path):
    """Read a replay file written by :func:`write_frame_dump`.

    Returns (Y_pilot, Y_data, noise_var, p_t).
    """
    with open(path, "rb") as fh:
        m, num_pilots, u, tau_data, noise_var, p_t = _DUMP_HEADER.unpack(
            fh.read(_DUMP_HEADER.size)
        )
        y_pilot = np.empty((u, m, num_pilots), dtype=np.complex128)
        y_data = np.empty((u, m, tau_data), dtype=np.complex128)
        for t in range(u):
            y_pilot[t] = np.fromfile(fh, dtype=np.complex128, count=m * num_pilots).reshape(
                m, num_pilots
            )
            y_data[t] = np.fromfile(fh, dtype=np.complex128, count=m * tau_data).reshape(
                m, tau_data
            )
    return y_pilot, y_data, noise_var, p_t
