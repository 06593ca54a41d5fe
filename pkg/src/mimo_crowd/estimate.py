"""Channel estimators built on the identified users' LOS components.

The LOS-only estimator reconstructs the rank-1 component from the averaged
projection; the updated estimator additionally detects the data coherently,
cancels the reconstructed LOS part, and estimates the NLOS residual with a
regularized linear-MMSE solve.
"""

from dataclasses import dataclass

import numpy as np

from .channel import normalized_steering


class NotIdentifiedError(LookupError):
    """A channel estimate was requested for a user absent from the report."""


class DegenerateEstimateError(ValueError):
    """LOS estimate has zero magnitude and cannot normalize detection."""


class IllConditionedError(ArithmeticError):
    """Regularized Gram matrix is numerically singular."""


@dataclass
class LosEstimate:
    user_id: int
    candidate: int
    aoa: float
    beta_bar: complex
    h_bar_hat: np.ndarray  # beta_bar * alpha(aoa), rank-1 by construction


@dataclass
class DetectedData:
    x_soft: np.ndarray  # (G, tau)
    x_hard: np.ndarray  # (G, tau), entries in {(+-1 +-1j)/sqrt(2)}


@dataclass
class ChannelEstimateSet:
    """Per-user estimates for one superframe; updated = LOS-only + NLOS exactly."""

    user_id: int
    h_los_only: np.ndarray   # (M,)
    h_nlos_hat: np.ndarray   # (U, M)
    h_updated: np.ndarray    # (U, M)
    nmse_los_only: float
    nmse_updated: float


def los_estimate(table, report, geometry, users=None):
    """Averaged-projection LOS estimates for identified users.

    beta_bar averages the candidate's projection at the user's winning pilot
    over the subframes; the estimate is beta_bar times the unit-norm steering
    vector of the bound AOA.
    """
    by_user = {m.user_id: m for m in report.matches}
    if users is None:
        users = [m.user_id for m in report.matches]
    num_subframes = table.beta.shape[1]
    out = []
    for uid in users:
        match = by_user.get(uid)
        if match is None:
            raise NotIdentifiedError(f"user {uid} was not identified")
        if match.candidate is None or match.aoa is None:
            raise NotIdentifiedError(f"user {uid} has no AOA binding")
        vals = table.beta[match.candidate, np.arange(num_subframes), list(match.pattern)]
        beta_bar = complex(vals.mean())
        alpha = normalized_steering(geometry, match.aoa)
        out.append(
            LosEstimate(
                user_id=uid,
                candidate=match.candidate,
                aoa=match.aoa,
                beta_bar=beta_bar,
                h_bar_hat=beta_bar * alpha,
            )
        )
    return out


def slice_qam4(x):
    """Nearest 4-QAM point per entry; boundary ties go to the positive side."""
    re = np.where(np.real(x) >= 0.0, 1.0, -1.0)
    im = np.where(np.imag(x) >= 0.0, 1.0, -1.0)
    return (re + 1j * im) / np.sqrt(2.0)


def coherent_detect(y_data, los_list, p_t):
    """Matched-filter detection x_hat_j = h_bar_hat_j^H Y / (|beta_bar_j|^2 sqrt(p_t))."""
    weights = np.stack([e.h_bar_hat for e in los_list], axis=1)  # (M, G)
    gains = np.array([np.abs(e.beta_bar) ** 2 for e in los_list])
    if np.any(gains <= 0.0):
        raise DegenerateEstimateError("zero-magnitude LOS estimate")
    soft = (weights.conj().T @ y_data) / (gains[:, None] * np.sqrt(p_t))
    return DetectedData(x_soft=soft, x_hard=slice_qam4(soft))


def residual(y_data, h_bar_stack, detected, p_t):
    """Cancel the reconstructed LOS signal: Y - H_bar_hat sqrt(p_t) X_hat."""
    x_hat = detected.x_hard if isinstance(detected, DetectedData) else np.asarray(detected)
    num_users, tau = x_hat.shape
    if tau <= num_users:
        raise ValueError("need more data symbols than users (tau > G)")
    return y_data - h_bar_stack @ (np.sqrt(p_t) * x_hat)


def _inverse_pd(r_v):
    d = np.diagonal(r_v)
    if np.any(np.real(d) <= 0.0):
        raise ValueError("R_v must be positive definite")
    if np.count_nonzero(r_v - np.diag(d)) == 0:
        return np.diag(1.0 / d)
    return np.linalg.solve(r_v, np.eye(r_v.shape[0], dtype=complex))


def mmse_nlos(residual_mat, x_hat, p_t, noise_var, r_v):
    """Regularized MMSE estimate of the per-user NLOS components.

    Solves residual (sqrt(p_t) X_hat)^H (p_t X_hat X_hat^H + noise_var R_v^-1)^-1
    through a linear system on the G x G Gram matrix rather than an explicit
    inverse; columns of the result are the per-user estimates.
    """
    x_hat = np.asarray(x_hat)
    num_users, tau = x_hat.shape
    if tau <= num_users:
        raise ValueError("need more data symbols than users (tau > G)")
    a = np.sqrt(p_t) * x_hat  # (G, tau)
    gram = a @ a.conj().T
    if noise_var > 0.0:
        gram = gram + noise_var * _inverse_pd(np.asarray(r_v, dtype=complex))
    if np.linalg.cond(gram) > 1e12:
        raise IllConditionedError("regularized Gram matrix is near singular")
    rhs = np.asarray(residual_mat) @ a.conj().T  # (M, G)
    return np.linalg.solve(gram.T, rhs.T).T


def nmse(h_hat, h_true):
    """||h_hat - h_true||^2 / ||h_true||^2."""
    denom = float(np.linalg.norm(h_true) ** 2)
    if denom == 0.0:
        raise ValueError("true channel has zero norm")
    return float(np.linalg.norm(np.asarray(h_hat) - np.asarray(h_true)) ** 2 / denom)
