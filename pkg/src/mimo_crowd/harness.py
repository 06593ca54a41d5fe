"""Deterministic Monte Carlo experiment engine.

A trial draws an active user set, synthesizes one superframe, runs the
requested identification methods on the identical realization, estimates the
channels of correctly identified users, and reports per-trial metrics.
Trials are pure functions of (config, seed, trial index), so sweeps are
reproducible bit-for-bit regardless of worker parallelism.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rng as rngmod
from .airlink import (
    FrameParams,
    UserPopulation,
    build_hopping_codebook,
    build_pilot_book,
    despread,
    synthesize_superframe,
)
from .aoa import music_spectrum, sample_covariance
from .channel import ArrayGeometry, UserProfile
from .estimate import (
    DegenerateEstimateError,
    IllConditionedError,
    coherent_detect,
    los_estimate,
    mmse_nlos,
    nmse,
    residual,
)
from .identify import (
    default_threshold,
    extract_patterns,
    match_patterns,
    project,
    threshold_identify,
)

METHOD_CHOICES = ("proposed", "baseline")
AOA_CHOICES = ("genie", "estimated")


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep's worth of settings; snr_db_list is the swept axis."""

    K: int = 250
    G: int = 10
    M: int = 100
    L: int = 32
    U: int = 4
    T_c: int = 200
    tau: int = 60
    kappa: float = 10.0
    snr_db_list: tuple = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int = 1000
    seed: int = 1
    p_t: float = 1.0
    array: str = "ula"
    spacing_ratio: float = 0.5
    methods: tuple = ("proposed",)
    aoa_modes: tuple = ("estimated",)
    r_v: str = "genie"
    detect: str = "hard"
    grid_resolution: int = 16384
    threshold_c: tuple = (3.0,)

    @property
    def tau_data(self):
        """Data symbols per subframe (coherence block minus the pilot)."""
        return self.T_c - self.L

    def geometry(self):
        return ArrayGeometry.ula(self.M, self.spacing_ratio)

    def noise_var(self, snr_db):
        """Noise variance for a sweep point; SNR is p_t over noise variance."""
        if math.isinf(snr_db) and snr_db > 0:
            return 0.0
        return self.p_t / (10.0 ** (snr_db / 10.0))

    def validate(self):
        def fail(name, message):
            raise ValueError(f"{name}: {message}")

        for name in ("K", "G", "M", "L", "U", "T_c", "tau", "trials"):
            if getattr(self, name) < 1:
                fail(name, "must be >= 1")
        if self.G > self.K:
            fail("G", f"cannot exceed K ({self.G} > {self.K})")
        if self.K > self.L ** self.U:
            fail("K", f"exceeds pattern capacity L^U = {self.L ** self.U}")
        if self.tau <= self.G:
            fail("tau", f"must exceed G (got tau={self.tau}, G={self.G})")
        if self.L > self.T_c:
            fail("L", f"pilot cannot be longer than the coherence block T_c={self.T_c}")
        if self.tau > self.tau_data:
            fail("tau", f"only {self.tau_data} data symbols available per subframe")
        if not self.kappa >= 0:
            fail("kappa", "must be >= 0 (inf allowed)")
        if not self.p_t > 0:
            fail("p_t", "must be positive")
        if not self.spacing_ratio > 0:
            fail("spacing_ratio", "must be positive")
        if self.array != "ula":
            fail("array", "only 'ula' is supported for end-to-end runs")
        if not self.snr_db_list:
            fail("snr_db", "need at least one SNR point")
        if not self.methods or any(m not in METHOD_CHOICES for m in self.methods):
            fail("method", f"must be a nonempty subset of {METHOD_CHOICES}")
        if not self.aoa_modes or any(m not in AOA_CHOICES for m in self.aoa_modes):
            fail("aoa", f"must be a nonempty subset of {AOA_CHOICES}")
        if self.r_v not in ("genie", "estimated"):
            fail("r_v", "must be 'genie' or 'estimated'")
        if self.detect not in ("hard", "soft"):
            fail("detect", "must be 'hard' or 'soft'")
        if self.grid_resolution < 2:
            fail("grid_resolution", "must be >= 2")
        if not self.threshold_c or any(c < 0 for c in self.threshold_c):
            fail("threshold_c", "must be a nonempty list of values >= 0")
        if "proposed" in self.methods and "estimated" in self.aoa_modes and self.G >= self.M:
            fail("G", "spectrum search needs G < M")


@dataclass
class MethodTrialResult:
    method: str
    aoa_mode: str
    n_correct: int
    exact_set: bool
    false_accepts: int
    duplicate_flag: bool
    nmse_los_sum: float   # summed over correctly identified users and subframes
    nmse_upd_sum: float
    n_est: int            # number of (user, subframe) terms in the sums
    ops_aoa: int
    ops_match: int
    ops_mmse: int
    error: Optional[str] = None


@dataclass
class TrialOutcome:
    trial_index: int
    results: dict  # (method label, aoa label) -> MethodTrialResult


@dataclass
class MetricRecord:
    """Aggregated metrics for one sweep point and method."""

    snr_db: float
    kappa: float
    M: int
    L: int
    G: int
    U: int
    tau: int
    method: str
    aoa_mode: str
    trials: int
    id_acc_mean: float
    id_acc_se: float
    exact_set_rate: float
    nmse_los_mean: float       # unconditional: missed users scored 1.0
    nmse_upd_mean: float
    nmse_los_cond_mean: float  # conditioned on correct identification
    nmse_upd_cond_mean: float
    ops_aoa: int
    ops_match: int
    ops_mmse: int
    failed_trials: int = 0

    @staticmethod
    def _to_db(value):
        if math.isnan(value):
            return float("nan")
        if value <= 0.0:
            return float("-inf")
        return 10.0 * math.log10(value)

    @property
    def nmse_los_db(self):
        return self._to_db(self.nmse_los_mean)

    @property
    def nmse_upd_db(self):
        return self._to_db(self.nmse_upd_mean)


def result_keys(config):
    """(method label, aoa label) pairs a trial produces, in output order."""
    keys = []
    for method in config.methods:
        if method == "proposed":
            keys.extend(("proposed", mode) for mode in config.aoa_modes)
        else:
            for c in config.threshold_c:
                label = "baseline" if len(config.threshold_c) == 1 else f"baseline[c={c:g}]"
                keys.append((label, "none"))
    return keys


def nlos_variance(profile):
    """Per-element NLOS power g^2 / (kappa + 1); zero for pure-LOS users."""
    if np.isinf(profile.kappa):
        return 0.0
    return profile.g ** 2 / (profile.kappa + 1.0)


def generate_population(config, seed=None):
    """K user profiles with g ~ U[0.1, 1], theta ~ U[0, pi] and unique patterns.

    The draw depends only on (seed, K, L, U), so populations are paired
    across kappa and SNR sweep points.
    """
    seed = config.seed if seed is None else seed
    gen = rngmod.stream(seed, rngmod.POPULATION)
    g = gen.uniform(0.1, 1.0, size=config.K)
    theta = gen.uniform(0.0, np.pi, size=config.K)
    profiles = [
        UserProfile(user_id=i, g=float(g[i]), kappa=float(config.kappa), theta=float(theta[i]))
        for i in range(config.K)
    ]
    codebook = build_hopping_codebook(config.K, config.L, config.U, seed)
    return UserPopulation(profiles=profiles, codebook=codebook)


def find_collisions(pilot_indices, active_set):
    """(subframe, pilot, [user ids]) for every pilot reused within a subframe."""
    collisions = []
    for t in range(pilot_indices.shape[0]):
        by_pilot = {}
        for j, uid in enumerate(active_set):
            by_pilot.setdefault(int(pilot_indices[t, j]), []).append(int(uid))
        for pilot in sorted(by_pilot):
            if len(by_pilot[pilot]) > 1:
                collisions.append((t, pilot, by_pilot[pilot]))
    return collisions


def _binding_correct(match, theta_by_user, num_antennas):
    if match.aoa is None:
        return True  # baseline matches carry no AOA binding to check
    # inside the first null of the user's steering response
    tol = 2.0 / num_antennas
    return abs(math.cos(match.aoa) - math.cos(theta_by_user[match.user_id])) < tol


def _evaluate_report(report, active, theta_by_user, num_antennas):
    active_ids = {int(u) for u in active}
    correct = []
    false_accepts = 0
    for match in report.matches:
        if match.user_id not in active_ids:
            false_accepts += 1
        elif _binding_correct(match, theta_by_user, num_antennas):
            correct.append(match)
    exact_set = {m.user_id for m in report.matches} == active_ids
    return correct, false_accepts, exact_set


def _estimated_rv_diag(resid, x_hat, p_t, noise_var, tau):
    q = resid @ (np.sqrt(p_t) * x_hat).conj().T / (p_t * tau)
    raw = np.mean(np.abs(q) ** 2, axis=0) - noise_var / (p_t * tau)
    return np.maximum(raw, 1e-12)


def _estimation_block(config, frame, sf, table, report, correct, population):
    """Channel estimation for the correctly identified users of one trial.

    Returns (nmse_los_sum, nmse_upd_sum, n_est, ops_mmse, error, per_user)
    where per_user maps user id -> (mean LOS-only NMSE, mean updated NMSE).
    Estimation failures score the updated estimator at the worst case 1.0.
    """
    if not correct:
        return 0.0, 0.0, 0, 0, None, {}
    users = [m.user_id for m in correct]
    geometry = frame.geometry
    los_list = los_estimate(table, report, geometry, users=users)
    h_bar_stack = np.stack([e.h_bar_hat for e in los_list], axis=1)
    pos = {int(uid): int(np.flatnonzero(sf.active_set == uid)[0]) for uid in users}
    m = geometry.num_antennas
    variances = np.array([nlos_variance(population.profiles[uid]) for uid in users])
    est_idx = np.flatnonzero(variances > 0.0)

    los_sum = 0.0
    upd_sum = 0.0
    ops = 0
    error = None
    per_user = {uid: [0.0, 0.0] for uid in users}
    for t in range(config.U):
        y_t = sf.Y_data[t][:, : config.tau]
        nlos_hat = np.zeros((m, len(users)), dtype=complex)
        try:
            detected = coherent_detect(y_t, los_list, frame.p_t)
            x_hat = detected.x_hard if config.detect == "hard" else detected.x_soft
            resid = residual(y_t, h_bar_stack, x_hat, frame.p_t)
            if est_idx.size:
                if config.r_v == "genie":
                    r_v = np.diag(variances[est_idx])
                else:
                    r_v = np.diag(
                        _estimated_rv_diag(
                            resid, x_hat[est_idx], frame.p_t, frame.noise_var, config.tau
                        )
                    )
                nlos_hat[:, est_idx] = mmse_nlos(
                    resid, x_hat[est_idx], frame.p_t, frame.noise_var, r_v
                )
                ge = int(est_idx.size)
                ops += m * config.tau * ge + ge * ge * config.tau + ge ** 3 + m * ge * ge
        except (DegenerateEstimateError, IllConditionedError, np.linalg.LinAlgError) as exc:
            error = type(exc).__name__
            nlos_hat = None
        for j, uid in enumerate(users):
            h_true = sf.h_los[pos[uid]] + sf.h_nlos[t, pos[uid]]
            v_los = nmse(los_list[j].h_bar_hat, h_true)
            if nlos_hat is None:
                v_upd = 1.0
            else:
                v_upd = nmse(los_list[j].h_bar_hat + nlos_hat[:, j], h_true)
            los_sum += v_los
            upd_sum += v_upd
            per_user[uid][0] += v_los / config.U
            per_user[uid][1] += v_upd / config.U
    return los_sum, upd_sum, len(users) * config.U, ops, error, per_user


def _execute_trial(config, snr_db, trial_index, population, collect=False):
    geometry = config.geometry()
    pilot_book = build_pilot_book(config.L)
    noise_var = config.noise_var(snr_db)
    frame = FrameParams(
        geometry=geometry,
        pilot_book=pilot_book,
        U=config.U,
        tau_data=config.tau_data,
        p_t=config.p_t,
        noise_var=noise_var,
    )
    active_gen = rngmod.stream(config.seed, rngmod.ACTIVE_SET, trial_index)
    active = np.sort(active_gen.choice(config.K, size=config.G, replace=False))
    sf = synthesize_superframe(population, active, frame, config.seed, trial_index)
    despread_set = despread(sf.Y_pilot, pilot_book, config.p_t)
    theta_by_user = {int(u): population.profiles[u].theta for u in active}

    results = {}
    details = None
    if collect:
        details = {
            "trial_index": trial_index,
            "snr_db": snr_db,
            "noise_var": noise_var,
            "active": [int(u) for u in active],
            "g": {int(u): population.profiles[u].g for u in active},
            "theta": dict(theta_by_user),
            "pilot_indices": sf.pilot_indices.tolist(),
            "collisions": find_collisions(sf.pilot_indices, active),
            "runs": [],
        }

    m = config.M
    if "proposed" in config.methods:
        for mode in config.aoa_modes:
            if mode == "genie":
                candidates = np.sort(np.array([theta_by_user[int(u)] for u in active]))
                ops_aoa = 0
            else:
                snaps = (
                    np.concatenate([sf.Y_pilot, sf.Y_data], axis=2)
                    .transpose(0, 2, 1)
                    .reshape(-1, m)
                )
                est = music_spectrum(
                    sample_covariance(snaps),
                    geometry,
                    source_count=config.G,
                    grid_resolution=config.grid_resolution,
                )
                candidates = est.angles
                ops_aoa = m ** 3 + (m + 1) * (m - config.G) * config.grid_resolution
            table = project(despread_set, candidates, geometry)
            patterns = extract_patterns(table)
            report = match_patterns(patterns, population.codebook)
            ops_match = config.U * len(candidates) * config.L * m
            correct, false_accepts, exact = _evaluate_report(report, active, theta_by_user, m)
            los_sum, upd_sum, n_est, ops_mmse, err, per_user = _estimation_block(
                config, frame, sf, table, report, correct, population
            )
            results[("proposed", mode)] = MethodTrialResult(
                method="proposed",
                aoa_mode=mode,
                n_correct=len(correct),
                exact_set=exact,
                false_accepts=false_accepts,
                duplicate_flag=bool(report.duplicate_users),
                nmse_los_sum=los_sum,
                nmse_upd_sum=upd_sum,
                n_est=n_est,
                ops_aoa=ops_aoa,
                ops_match=ops_match,
                ops_mmse=ops_mmse,
                error=err,
            )
            if collect:
                details["runs"].append(
                    {
                        "key": ("proposed", mode),
                        "candidates": [float(c) for c in candidates],
                        "patterns": [
                            (p.k, p.aoa, p.eta, p.strength) for p in patterns
                        ],
                        "report": report,
                        "correct": [mm.user_id for mm in correct],
                        "false_accepts": false_accepts,
                        "accuracy": len(correct) / config.G,
                        "exact": exact,
                        "nmse": {u: tuple(v) for u, v in per_user.items()},
                        "error": err,
                    }
                )
    if "baseline" in config.methods:
        for c in config.threshold_c:
            label = "baseline" if len(config.threshold_c) == 1 else f"baseline[c={c:g}]"
            thr = default_threshold(m, noise_var, config.L, config.p_t, c)
            report = threshold_identify(despread_set, population.codebook, thr)
            correct, false_accepts, exact = _evaluate_report(report, active, theta_by_user, m)
            results[(label, "none")] = MethodTrialResult(
                method=label,
                aoa_mode="none",
                n_correct=len(correct),
                exact_set=exact,
                false_accepts=false_accepts,
                duplicate_flag=False,
                nmse_los_sum=0.0,
                nmse_upd_sum=0.0,
                n_est=0,
                ops_aoa=0,
                ops_match=config.U * config.L * m,
                ops_mmse=0,
            )
            if collect:
                details["runs"].append(
                    {
                        "key": (label, "none"),
                        "candidates": None,
                        "patterns": None,
                        "report": report,
                        "threshold": thr,
                        "correct": [mm.user_id for mm in correct],
                        "false_accepts": false_accepts,
                        "accuracy": len(correct) / config.G,
                        "exact": exact,
                        "nmse": {},
                        "error": None,
                    }
                )
    return TrialOutcome(trial_index=trial_index, results=results), details


def run_trial(config, snr_db, trial_index, population=None):
    """Run one trial at one SNR point; pure in (config, seed, trial_index)."""
    if population is None:
        population = generate_population(config)
    outcome, _ = _execute_trial(config, snr_db, trial_index, population)
    return outcome


def inspect_trial(config, snr_db, trial_index, population=None):
    """Like run_trial but also returns a detail dictionary for dumps."""
    if population is None:
        population = generate_population(config)
    return _execute_trial(config, snr_db, trial_index, population, collect=True)


def _worst_case_outcome(config, trial_index, message):
    results = {}
    for key in result_keys(config):
        results[key] = MethodTrialResult(
            method=key[0],
            aoa_mode=key[1],
            n_correct=0,
            exact_set=False,
            false_accepts=0,
            duplicate_flag=False,
            nmse_los_sum=0.0,
            nmse_upd_sum=0.0,
            n_est=0,
            ops_aoa=0,
            ops_match=0,
            ops_mmse=0,
            error=message,
        )
    return TrialOutcome(trial_index=trial_index, results=results)


def _safe_trial(config, snr_db, trial_index, population):
    # failures are recorded as worst-case metrics, never abort the sweep
    try:
        outcome, _ = _execute_trial(config, snr_db, trial_index, population)
        return outcome
    except Exception as exc:  # noqa: BLE001
        return _worst_case_outcome(config, trial_index, f"{type(exc).__name__}: {exc}")


def _trial_chunk(config, snr_db, indices):
    population = generate_population(config)
    return [_safe_trial(config, snr_db, i, population) for i in indices]


def run_point(config, snr_db, threads=1):
    """All trials of one sweep point, merged in trial order."""
    indices = list(range(config.trials))
    if threads and threads > 1 and len(indices) > 1:
        chunk_count = min(threads * 4, len(indices))
        chunks = [c.tolist() for c in np.array_split(np.asarray(indices), chunk_count)]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_trial_chunk, config, snr_db, chunk) for chunk in chunks]
            outcomes = [o for fut in futures for o in fut.result()]
    else:
        population = generate_population(config)
        outcomes = [_safe_trial(config, snr_db, i, population) for i in indices]
    outcomes.sort(key=lambda o: o.trial_index)
    return outcomes


def aggregate(config, snr_db, outcomes):
    """Collapse trial outcomes of one sweep point into MetricRecords."""
    if not outcomes:
        raise ValueError("need at least one trial outcome")
    outcomes = sorted(outcomes, key=lambda o: o.trial_index)
    n = len(outcomes)
    records = []
    for key in result_keys(config):
        rows = [o.results[key] for o in outcomes]
        acc = np.array([r.n_correct / config.G for r in rows], dtype=float)
        acc_se = float(acc.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        exact_rate = float(np.mean([1.0 if r.exact_set else 0.0 for r in rows]))
        if key[0].startswith("baseline"):
            unc_los = unc_upd = cond_los = cond_upd = float("nan")
        else:
            los_sum = float(sum(r.nmse_los_sum for r in rows))
            upd_sum = float(sum(r.nmse_upd_sum for r in rows))
            n_est = int(sum(r.n_est for r in rows))
            total = n * config.G * config.U
            cond_los = los_sum / n_est if n_est else float("nan")
            cond_upd = upd_sum / n_est if n_est else float("nan")
            # users not correctly identified are scored at the worst case 1.0
            unc_los = (los_sum + (total - n_est)) / total
            unc_upd = (upd_sum + (total - n_est)) / total
        records.append(
            MetricRecord(
                snr_db=float(snr_db),
                kappa=float(config.kappa),
                M=config.M,
                L=config.L,
                G=config.G,
                U=config.U,
                tau=config.tau,
                method=key[0],
                aoa_mode=key[1],
                trials=n,
                id_acc_mean=float(acc.mean()),
                id_acc_se=acc_se,
                exact_set_rate=exact_rate,
                nmse_los_mean=unc_los,
                nmse_upd_mean=unc_upd,
                nmse_los_cond_mean=cond_los,
                nmse_upd_cond_mean=cond_upd,
                ops_aoa=int(sum(r.ops_aoa for r in rows)),
                ops_match=int(sum(r.ops_match for r in rows)),
                ops_mmse=int(sum(r.ops_mmse for r in rows)),
                failed_trials=sum(1 for r in rows if r.error is not None),
            )
        )
    return records


def run_sweep(config, threads=1, progress=None):
    """Run every SNR point of a config; returns records in sweep order."""
    config.validate()
    records = []
    for snr_db in config.snr_db_list:
        outcomes = run_point(config, snr_db, threads=threads)
        records.extend(aggregate(config, snr_db, outcomes))
        if progress is not None:
            progress(config, snr_db)
    return records


# ---------------------------------------------------------------------------
# Flat key=value configuration handling (shared by the CLI and manifests)

_CONFIG_DEFAULTS = {
    "K": "250",
    "G": "10",
    "M": "100",
    "L": "32",
    "U": "4",
    "T_c": "200",
    "tau": "60",
    "kappa": "10",
    "snr_db": "-20,-15,-10,-5,0,5,10,15,20",
    "trials": "1000",
    "seed": "1",
    "p_t": "1",
    "array": "ula",
    "spacing_ratio": "0.5",
    "method": "proposed",
    "aoa": "estimated",
    "r_v": "genie",
    "detect": "hard",
    "grid_resolution": "16384",
    "threshold_c": "3",
}


def _as_items(value):
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [part.strip() for part in str(value).split(",") if part.strip() != ""]


def _one(key, value, conv):
    items = _as_items(value)
    if len(items) != 1:
        raise ValueError(f"{key}: expected a single value, got {value!r}")
    try:
        return conv(items[0])
    except (TypeError, ValueError):
        raise ValueError(f"{key}: cannot parse {items[0]!r}") from None


def _many(key, value, conv):
    items = _as_items(value)
    if not items:
        raise ValueError(f"{key}: expected at least one value")
    try:
        return [conv(item) for item in items]
    except (TypeError, ValueError):
        raise ValueError(f"{key}: cannot parse {value!r}") from None


def parse_config(raw):
    """Expand a flat key=value mapping into experiment configs.

    ``M`` and ``kappa`` accept comma lists; one config is produced per
    (kappa, M) pair, kappa-major.  Returns (configs, normalized) where
    ``normalized`` is a JSON-friendly mapping that parses back to the same
    configs (the manifest embeds it).
    """
    unknown = sorted(set(raw) - set(_CONFIG_DEFAULTS))
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
    merged = dict(_CONFIG_DEFAULTS)
    merged.update(raw)

    ints = {k: _one(k, merged[k], int) for k in
            ("K", "G", "L", "U", "T_c", "tau", "trials", "seed", "grid_resolution")}
    m_list = _many("M", merged["M"], int)
    kappa_list = _many("kappa", merged["kappa"], float)
    snr_list = _many("snr_db", merged["snr_db"], float)
    threshold_c = _many("threshold_c", merged["threshold_c"], float)
    p_t = _one("p_t", merged["p_t"], float)
    spacing = _one("spacing_ratio", merged["spacing_ratio"], float)
    array = _one("array", merged["array"], str)
    r_v = _one("r_v", merged["r_v"], str)
    detect = _one("detect", merged["detect"], str)

    method = _one("method", merged["method"], str)
    if method == "both":
        methods = METHOD_CHOICES
    elif method in METHOD_CHOICES:
        methods = (method,)
    else:
        raise ValueError(f"method: must be 'proposed', 'baseline' or 'both', got {method!r}")
    aoa = _one("aoa", merged["aoa"], str)
    if aoa == "both":
        aoa_modes = AOA_CHOICES
    elif aoa in AOA_CHOICES:
        aoa_modes = (aoa,)
    else:
        raise ValueError(f"aoa: must be 'genie', 'estimated' or 'both', got {aoa!r}")

    base = ExperimentConfig(
        K=ints["K"],
        G=ints["G"],
        M=m_list[0],
        L=ints["L"],
        U=ints["U"],
        T_c=ints["T_c"],
        tau=ints["tau"],
        kappa=kappa_list[0],
        snr_db_list=tuple(snr_list),
        trials=ints["trials"],
        seed=ints["seed"],
        p_t=p_t,
        array=array,
        spacing_ratio=spacing,
        methods=methods,
        aoa_modes=aoa_modes,
        r_v=r_v,
        detect=detect,
        grid_resolution=ints["grid_resolution"],
        threshold_c=tuple(threshold_c),
    )
    configs = [
        replace(base, kappa=kappa, M=m) for kappa in kappa_list for m in m_list
    ]
    for cfg in configs:
        cfg.validate()
    normalized = {
        "K": ints["K"],
        "G": ints["G"],
        "M": m_list,
        "L": ints["L"],
        "U": ints["U"],
        "T_c": ints["T_c"],
        "tau": ints["tau"],
        "kappa": kappa_list,
        "snr_db": snr_list,
        "trials": ints["trials"],
        "seed": ints["seed"],
        "p_t": p_t,
        "array": array,
        "spacing_ratio": spacing,
        "method": method,
        "aoa": aoa,
        "r_v": r_v,
        "detect": detect,
        "grid_resolution": ints["grid_resolution"],
        "threshold_c": threshold_c,
    }
    return configs, normalized
