"""Subspace angle-of-arrival estimation (MUSIC) for uniform linear arrays."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass
class CovarianceEstimate:
    """Hermitian sample covariance and the snapshot count behind it."""

    R: np.ndarray
    snapshots: int


@dataclass
class AoaEstimate:
    """Sorted candidate angles plus the pseudo-spectrum they came from."""

    angles: np.ndarray
    spectrum: np.ndarray
    grid_resolution: int

    @property
    def grid(self):
        return np.linspace(0.0, np.pi, self.grid_resolution)


def sample_covariance(snapshots):
    """(1/N) sum of y y^H over snapshot rows, symmetrized to be Hermitian."""
    arr = np.asarray(snapshots, dtype=complex)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("need at least one snapshot vector")
    r = arr.T @ arr.conj() / arr.shape[0]
    r = (r + r.conj().T) / 2.0
    return CovarianceEstimate(R=r, snapshots=int(arr.shape[0]))


def hermitian_eig(matrix):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    r = np.asarray(matrix, dtype=complex)
    scale = np.linalg.norm(r)
    if np.linalg.norm(r - r.conj().T) > 1e-8 * max(scale, 1.0):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh((r + r.conj().T) / 2.0)
    return w[::-1].copy(), v[:, ::-1].copy()


def estimate_source_count(eigenvalues):
    """Largest-gap heuristic: position of the biggest consecutive eigenvalue ratio."""
    w = np.asarray(eigenvalues, dtype=float)
    if w.size < 2:
        return int(w.size)
    floor = max(w[0], 0.0) * 1e-15 + 1e-300
    w = np.maximum(w, floor)
    return int(np.argmax(w[:-1] / w[1:])) + 1


@lru_cache(maxsize=8)
def _steering_grid(num_antennas, spacing_ratio, resolution):
    grid = np.linspace(0.0, np.pi, resolution)
    phases = -2.0j * np.pi * spacing_ratio * np.outer(np.arange(num_antennas), np.cos(grid))
    return grid, np.exp(phases) / np.sqrt(num_antennas)


def _select_peaks(spectrum, count):
    """Indices of the strongest peaks, >= 2 grid steps apart, smallest angle on ties.

    Returns (index, is_local_max) pairs; falls back to the globally strongest
    grid points when fewer strict local maxima exist.
    """
    out = []
    if count <= 0:
        return out
    s = spectrum
    chosen = []

    if len(s) >= 3:
        strict = (s[1:-1] > s[:-2]) & (s[1:-1] > s[2:])
        peak_idx = np.flatnonzero(strict) + 1
        for i in peak_idx[np.lexsort((peak_idx, -s[peak_idx]))]:
            i = int(i)
            if all(abs(i - j) >= 2 for j in chosen):
                chosen.append(i)
                out.append((i, True))
                if len(out) == count:
                    return out

    ranked = np.lexsort((np.arange(len(s)), -s))
    for i in ranked:
        i = int(i)
        if any(abs(i - j) < 2 for j in chosen):
            continue
        chosen.append(i)
        out.append((i, False))
        if len(out) == count:
            return out
    for i in ranked:  # degenerate tiny grids: fill with remaining distinct points
        i = int(i)
        if i not in chosen:
            chosen.append(i)
            out.append((i, False))
            if len(out) == count:
                break
    return out


def music_spectrum(cov, geometry, source_count=None, grid_resolution=16384):
    """MUSIC pseudo-spectrum search over [0, pi].

    ``source_count=None`` estimates the source count from the eigenvalue
    gaps.  The spectrum 1 / ||E_n^H alpha(theta)||^2 is evaluated on a
    uniform grid; the strongest strict local maxima (two or more grid steps
    apart) are kept and refined by one parabolic interpolation step.
    """
    r = cov.R if isinstance(cov, CovarianceEstimate) else np.asarray(cov)
    if geometry.kind != "ula":
        raise ValueError("spectrum search is implemented for ULA geometries")
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be >= 2")
    m = geometry.num_antennas
    eigenvalues, vectors = hermitian_eig(r)
    count = int(source_count) if source_count is not None else estimate_source_count(eigenvalues)
    if count >= m:
        raise ValueError("source count must be below the antenna count")

    grid, a_grid = _steering_grid(m, geometry.spacing_ratio, int(grid_resolution))
    # ||E_n^H a||^2 = 1 - ||E_s^H a||^2 for unit-norm a; the signal-subspace
    # form costs G x M products per grid point instead of (M - G) x M.
    signal = vectors[:, :count]
    leak = 1.0 - np.sum(np.abs(signal.conj().T @ a_grid) ** 2, axis=0)
    leak = np.maximum(leak, 1e-300)
    spectrum = 1.0 / leak

    step = grid[1] - grid[0]
    angles = []
    for idx, is_peak in _select_peaks(spectrum, count):
        theta = grid[idx]
        if is_peak:
            # parabola through the leakage minimum; |offset| < 0.5 at a strict max
            num = leak[idx - 1] - leak[idx + 1]
            den = leak[idx - 1] - 2.0 * leak[idx] + leak[idx + 1]
            if den != 0.0 and np.isfinite(num) and np.isfinite(den):
                theta = theta + 0.5 * (num / den) * step
        angles.append(min(max(float(theta), 0.0), float(np.pi)))
    return AoaEstimate(
        angles=np.sort(np.asarray(angles)),
        spectrum=spectrum,
        grid_resolution=int(grid_resolution),
    )
