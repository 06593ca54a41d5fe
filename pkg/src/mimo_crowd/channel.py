"""Array steering vectors and Rician channel realizations.

The channel of a user splits into a line-of-sight part, fixed for the whole
superframe, and a non-line-of-sight part redrawn independently per subframe:

    h = g * sqrt(kappa/(kappa+1)) * c_bar(theta)  +  g * sqrt(1/(kappa+1)) * w

with ``c_bar`` the unnormalized array steering vector and ``w`` i.i.d.
circular complex Gaussian with unit variance per element.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna layout at the base station.

    ``kind`` is ``"ula"`` or ``"upa"``; ``shape`` is ``(M,)`` for a uniform
    linear array and ``(M1, N1)`` for a uniform planar array (y- and z-axis
    element counts); ``spacing_ratio`` is the element spacing in carrier
    wavelengths (d / lambda).
    """

    kind: str
    shape: tuple
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if self.kind not in ("ula", "upa"):
            raise ValueError(f"unknown array kind {self.kind!r}")
        expected = 1 if self.kind == "ula" else 2
        if len(self.shape) != expected:
            raise ValueError(f"{self.kind} shape must have {expected} entries")
        if any(int(n) < 1 for n in self.shape):
            raise ValueError("antenna counts must be >= 1")
        if not self.spacing_ratio > 0:
            raise ValueError("spacing_ratio must be positive")

    @classmethod
    def ula(cls, num_antennas, spacing_ratio=0.5):
        return cls("ula", (int(num_antennas),), float(spacing_ratio))

    @classmethod
    def upa(cls, m1, n1, spacing_ratio=0.5):
        return cls("upa", (int(m1), int(n1)), float(spacing_ratio))

    @property
    def num_antennas(self):
        return int(np.prod(self.shape))


@dataclass(frozen=True)
class UserProfile:
    """Static ground truth for one user.

    ``g`` is the large-scale fading amplitude, ``kappa`` the Rician factor
    (``np.inf`` selects a pure-LOS channel), ``theta`` the LOS angle of
    arrival in radians, ``phi`` the azimuth angle (planar arrays only).
    """

    user_id: int
    g: float
    kappa: float
    theta: float
    phi: Optional[float] = None

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("g must be positive")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError("theta must lie in [0, pi]")


@dataclass
class ChannelRealization:
    """One subframe channel split into its LOS and NLOS parts."""

    h_los: np.ndarray
    h_nlos: np.ndarray

    @property
    def h(self):
        return self.h_los + self.h_nlos


def steering_ula(geometry, theta):
    """Unnormalized ULA steering vector [1, e^{-j2pi d/lambda cos(theta)}, ...]."""
    if geometry.kind != "ula":
        raise ValueError("geometry is not a ULA")
    m = geometry.num_antennas
    phase = -2.0j * np.pi * geometry.spacing_ratio * np.cos(theta)
    return np.exp(phase * np.arange(m))


def steering_upa(geometry, theta, phi):
    """Unnormalized UPA steering vector, y-axis index varying fastest.

    Entry (m, n) has phase +2pi d/lambda (m sin(phi) sin(theta) + n cos(theta)).
    """
    if geometry.kind != "upa":
        raise ValueError("geometry is not a UPA")
    m1, n1 = geometry.shape
    m_idx = np.tile(np.arange(m1), n1)
    n_idx = np.repeat(np.arange(n1), m1)
    phase = (
        2.0j
        * np.pi
        * geometry.spacing_ratio
        * (m_idx * np.sin(phi) * np.sin(theta) + n_idx * np.cos(theta))
    )
    return np.exp(phase)


def steering(geometry, theta, phi=None):
    if geometry.kind == "ula":
        return steering_ula(geometry, theta)
    if phi is None:
        raise ValueError("UPA steering requires an azimuth angle")
    return steering_upa(geometry, theta, phi)


def normalized_steering(geometry, theta, phi=None):
    """Unit-norm steering vector, as used by projections and spectrum search."""
    v = steering(geometry, theta, phi)
    return v / np.sqrt(v.size)


def draw_channel(profile, geometry, rng):
    """Draw one subframe channel realization for a user.

    The LOS part is a deterministic function of the profile (bit-identical
    across subframes); only the NLOS part consumes randomness from ``rng``.
    """
    c_bar = steering(geometry, profile.theta, profile.phi)
    m = geometry.num_antennas
    if np.isinf(profile.kappa):
        h_los = profile.g * c_bar
        h_nlos = np.zeros(m, dtype=complex)
    else:
        h_los = profile.g * np.sqrt(profile.kappa / (profile.kappa + 1.0)) * c_bar
        # two real normals scaled by 1/sqrt(2) give unit complex variance
        w = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2.0)
        h_nlos = profile.g * np.sqrt(1.0 / (profile.kappa + 1.0)) * w
    return ChannelRealization(h_los=h_los, h_nlos=h_nlos)
