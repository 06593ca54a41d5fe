"""Acceptance suite: one test per quantitative exit criterion.

Each test prints a single ``ACCEPTANCE nn name: PASS/FAIL`` line with the
measured numbers (run pytest with ``-s`` to see the lines for passing
criteria as well).
"""

import itertools
import time

import numpy as np

from mimo_crowd import (
    ArrayGeometry,
    ExperimentConfig,
    FrameParams,
    HoppingCodebook,
    UserPopulation,
    UserProfile,
    aggregate,
    build_hopping_codebook,
    build_pilot_book,
    despread,
    extract_patterns,
    match_patterns,
    mmse_nlos,
    project,
    run_trial,
    synthesize_superframe,
)
from mimo_crowd import cli
from mimo_crowd.harness import run_point

SEED = 1


def criterion(num, name, passed, detail=""):
    line = f"ACCEPTANCE {num:02d} {name}: {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert passed, line


def test_criterion_01_pilot_orthogonality():
    t0 = time.perf_counter()
    worst = 0.0
    for length in (1, 4, 16, 32):
        book = build_pilot_book(length)
        gram = book.pilots.conj() @ book.pilots.T
        worst = max(worst, float(np.abs(gram - length * np.eye(length)).max()))
    elapsed = time.perf_counter() - t0
    criterion(
        1,
        "pilot-orthogonality",
        worst < 1e-9 and elapsed < 1.0,
        f"max |Gram - L*I| = {worst:.3e}, {elapsed:.3f}s",
    )


def test_criterion_02_theorem_limit_identification():
    # pure LOS, no noise, known AOAs, per-trial angle draws with all pairwise
    # cos gaps >= 4/M, gains from the U[0.1, 1] population model
    m, num_pilots, subframes, g_active, trials = 64, 8, 4, 4, 500
    cfg = ExperimentConfig(
        K=g_active, G=g_active, M=m, L=num_pilots, U=subframes, T_c=24, tau=8,
        kappa=float("inf"), snr_db_list=(float("inf"),), trials=trials, seed=SEED,
        methods=("proposed",), aoa_modes=("genie",),
    )
    gen = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    correct = 0
    failing = []
    for i in range(trials):
        while True:
            cosines = np.sort(gen.uniform(-1.0, 1.0, g_active))
            if np.all(np.diff(cosines) >= 4.0 / m):
                break
        gains = gen.uniform(0.1, 1.0, g_active)
        profiles = [
            UserProfile(user_id=j, g=float(gains[j]), kappa=float("inf"),
                        theta=float(np.arccos(cosines[j])))
            for j in range(g_active)
        ]
        pop = UserPopulation(
            profiles=profiles,
            codebook=build_hopping_codebook(g_active, num_pilots, subframes, SEED + i),
        )
        result = run_trial(cfg, float("inf"), i, pop).results[("proposed", "genie")]
        correct += result.n_correct
        if result.n_correct != g_active:
            failing.append(i)
    accuracy = correct / (trials * g_active)
    elapsed = time.perf_counter() - t0
    # Known tail event this construction does not exclude: a user whose gain
    # is below ~0.13x a neighbor's, with their cos gap inside the neighbor's
    # third sidelobe (|kernel| up to 0.129 for gaps just above 4/M), loses its
    # per-subframe argmax to that neighbor's pilot. Measured rate is about
    # 1e-3 per trial, so 500-trial runs fail roughly half the time.
    criterion(
        2,
        "theorem-limit-identification",
        accuracy == 1.0 and elapsed < 60.0,
        f"per-user accuracy {accuracy:.6f}, failing trials {failing}, {elapsed:.1f}s",
    )


def _pattern_from_index(index, num_pilots, subframes):
    digits = []
    for _ in range(subframes):
        digits.append(index % num_pilots)
        index //= num_pilots
    return tuple(digits)


def test_criterion_03_small_instance_oracle_equivalence():
    # exhaustive enumeration: every active set of size <= 2 and every ordered
    # assignment of distinct patterns to the active users
    m, num_pilots, subframes = 8, 4, 3
    num_users = 4
    space = num_pilots ** subframes
    geometry = ArrayGeometry.ula(m)
    book = build_pilot_book(num_pilots)
    # orthogonally spaced users: cos gaps are steering-vector nulls
    cosines = (-0.75, -0.25, 0.25, 0.75)
    gains = (1.0, 0.25, 0.6, 0.1)
    thetas = [float(np.arccos(c)) for c in cosines]
    profiles = [
        UserProfile(user_id=j, g=gains[j], kappa=float("inf"), theta=thetas[j])
        for j in range(num_users)
    ]
    frame = FrameParams(
        geometry=geometry, pilot_book=book, U=subframes, tau_data=4, p_t=1.0, noise_var=0.0
    )
    all_patterns = [_pattern_from_index(i, num_pilots, subframes) for i in range(space)]

    def run_instance(active, active_patterns, instance_index):
        used = set(active_patterns)
        spare = (p for p in all_patterns if p not in used)
        assignment = np.zeros((num_users, subframes), dtype=np.int64)
        by_user = dict(zip(active, active_patterns))
        for uid in range(num_users):
            assignment[uid] = by_user.get(uid) or next(spare)
        codebook = HoppingCodebook(U=subframes, L=num_pilots, assignment=assignment)
        pop = UserPopulation(profiles=profiles, codebook=codebook)
        sf = synthesize_superframe(pop, active, frame, SEED, instance_index)
        table = project(
            despread(sf.Y_pilot, book, 1.0), sorted(thetas[u] for u in active), geometry
        )
        report = match_patterns(extract_patterns(table), codebook)
        if set(report.matched_user_ids()) != set(active):
            return False
        if report.unmatched_candidates:
            return False
        return all(match.aoa == thetas[match.user_id] for match in report.matches)

    t0 = time.perf_counter()
    total = 0
    wrong = 0
    for uid in range(num_users):
        for pattern in all_patterns:
            total += 1
            if not run_instance((uid,), (pattern,), total):
                wrong += 1
    for pair in itertools.combinations(range(num_users), 2):
        for pats in itertools.permutations(all_patterns, 2):
            total += 1
            if not run_instance(pair, pats, total):
                wrong += 1
    elapsed = time.perf_counter() - t0
    criterion(
        3,
        "small-instance-oracle-equivalence",
        wrong == 0 and elapsed < 300.0,
        f"{total} instances, {wrong} mismatches, {elapsed:.1f}s",
    )


def test_criterion_04_mmse_formula_oracle():
    gen = np.random.default_rng(SEED)
    qam = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        g_users = int(gen.integers(1, 9))
        tau = int(gen.integers(g_users + 1, 65))
        m = int(gen.integers(2, 33))
        x = qam[gen.integers(0, 4, size=(g_users, tau))]
        resid = gen.normal(size=(m, tau)) + 1j * gen.normal(size=(m, tau))
        r_v = np.diag(gen.uniform(0.2, 3.0, g_users))
        noise_var = float(gen.uniform(0.01, 1.0))
        p_t = float(gen.uniform(0.5, 2.0))
        ours = mmse_nlos(resid, x, p_t, noise_var, r_v)
        a = np.sqrt(p_t) * x
        direct = resid @ a.conj().T @ np.linalg.inv(
            p_t * (x @ x.conj().T) + noise_var * np.linalg.inv(r_v)
        )
        err = np.linalg.norm(ours - direct) / max(np.linalg.norm(direct), 1e-300)
        worst = max(worst, float(err))
    elapsed = time.perf_counter() - t0
    criterion(
        4,
        "mmse-formula-oracle",
        worst <= 1e-10 and elapsed < 60.0,
        f"worst relative gap {worst:.2e} over 100 instances, {elapsed:.1f}s",
    )


def _fig2_point(kappa, snr_db, trials, methods=("proposed",), aoa=("estimated",)):
    cfg = ExperimentConfig(
        K=250, G=10, M=100, L=32, U=4, T_c=200, tau=60, kappa=kappa,
        snr_db_list=(snr_db,), trials=trials, seed=SEED,
        methods=methods, aoa_modes=aoa,
    )
    outcomes = run_point(cfg, snr_db, threads=1)
    return cfg, outcomes


def test_criterion_05_rician_factor_ordering():
    trials = 500
    t0 = time.perf_counter()
    stats = {}
    for kappa in (100.0, 10.0, 1.0):
        cfg, outcomes = _fig2_point(kappa, 0.0, trials)
        (rec,) = aggregate(cfg, 0.0, outcomes)
        stats[kappa] = (rec.id_acc_mean, rec.id_acc_se)
    elapsed = time.perf_counter() - t0

    def ordered(hi, lo):
        gap = stats[hi][0] - stats[lo][0]
        se = float(np.hypot(stats[hi][1], stats[lo][1]))
        return gap > 3 * se or abs(gap) <= se

    detail = " ".join(
        f"acc(k={k:g})={stats[k][0]:.4f}+-{stats[k][1]:.4f}" for k in (100.0, 10.0, 1.0)
    )
    criterion(
        5,
        "rician-factor-ordering",
        ordered(100.0, 10.0) and ordered(10.0, 1.0) and elapsed < 1800.0,
        f"{detail}, {elapsed:.0f}s",
    )


def test_criterion_06_proposed_vs_threshold_baseline():
    trials = 500
    t0 = time.perf_counter()
    results = {}
    for snr_db in (-10.0, 0.0, 10.0):
        cfg, outcomes = _fig2_point(
            10.0, snr_db, trials, methods=("proposed", "baseline"), aoa=("estimated",)
        )
        diffs = np.array([
            (o.results[("proposed", "estimated")].n_correct
             - o.results[("baseline", "none")].n_correct) / cfg.G
            for o in outcomes
        ])
        se = float(diffs.std(ddof=1) / np.sqrt(len(diffs)))
        results[snr_db] = (float(diffs.mean()), se)
    elapsed = time.perf_counter() - t0
    # paired comparison; the 3-SE slack tolerates sampling noise in the gap
    ok = all(mean > -3 * se for mean, se in results.values())
    detail = " ".join(
        f"snr={s:+.0f}: diff={m:+.4f}+-{e:.4f}" for s, (m, e) in results.items()
    )
    # Known failure mode at +10 dB: the noise-scaled default threshold detects
    # every user with gain above ~0.17 while the projection method keeps its
    # angle-proximity ceiling near 0.9, and the per-user metric does not
    # penalize the baseline's false accepts (exact-set rate still favors the
    # projection method at every point).
    criterion(
        6,
        "proposed-vs-threshold-baseline",
        ok and elapsed < 1800.0,
        f"{detail}, {elapsed:.0f}s",
    )


def test_criterion_07_estimated_vs_genie_aoa():
    trials = 300
    snrs = (-10.0, -5.0, 0.0, 5.0, 10.0)
    t0 = time.perf_counter()
    gaps = {}
    ok = True
    for snr_db in snrs:
        cfg = ExperimentConfig(
            K=250, G=20, M=100, L=16, U=4, T_c=200, tau=60, kappa=10.0,
            snr_db_list=(snr_db,), trials=trials, seed=SEED,
            methods=("proposed",), aoa_modes=("genie", "estimated"),
        )
        outcomes = run_point(cfg, snr_db, threads=1)
        recs = {r.aoa_mode: r for r in aggregate(cfg, snr_db, outcomes)}
        genie = recs["genie"].id_acc_mean
        est = recs["estimated"].id_acc_mean
        gaps[snr_db] = genie - est
        if not (genie - 0.15 <= est <= genie):
            ok = False
    elapsed = time.perf_counter() - t0
    detail = " ".join(f"snr={s:+.0f}: genie-est={g:+.4f}" for s, g in gaps.items())
    criterion(7, "estimated-vs-genie-aoa", ok and elapsed < 1800.0, f"{detail}, {elapsed:.0f}s")


def test_criterion_08_estimator_crossover_and_flat_floor():
    trials = 400
    t0 = time.perf_counter()
    los = {}
    upd = {}
    for snr_db in (-20.0, -10.0, 0.0, 10.0, 20.0):
        cfg, outcomes = _fig2_point(10.0, snr_db, trials)
        (rec,) = aggregate(cfg, snr_db, outcomes)
        los[snr_db] = rec.nmse_los_mean
        upd[snr_db] = rec.nmse_upd_mean
    elapsed = time.perf_counter() - t0
    crossover = all(upd[s] < los[s] for s in (-10.0, 0.0, 10.0, 20.0))
    flat_points = [10 * np.log10(los[s]) for s in (0.0, 10.0, 20.0)]
    flat = max(flat_points) - min(flat_points) <= 3.0
    detail = (
        " ".join(f"snr={s:+.0f}: los={los[s]:.4f} upd={upd[s]:.4f}" for s in sorted(los))
        + f", LOS-floor spread {max(flat_points) - min(flat_points):.2f} dB"
    )
    criterion(
        8,
        "estimator-crossover-and-flat-floor",
        crossover and flat and elapsed < 1800.0,
        f"{detail}, {elapsed:.0f}s",
    )


def test_criterion_09_los_only_nmse_floor():
    trials = 1000
    kappa = 10.0
    cfg = ExperimentConfig(
        K=250, G=1, M=100, L=32, U=4, T_c=200, tau=60, kappa=kappa,
        snr_db_list=(30.0,), trials=trials, seed=SEED,
        methods=("proposed",), aoa_modes=("genie",),
    )
    t0 = time.perf_counter()
    outcomes = run_point(cfg, 30.0, threads=1)
    (rec,) = aggregate(cfg, 30.0, outcomes)
    elapsed = time.perf_counter() - t0
    target = 1.0 / (kappa + 1.0)
    ratio = rec.nmse_los_mean / target
    criterion(
        9,
        "los-only-nmse-floor",
        0.8 <= ratio <= 1.2,
        f"measured {rec.nmse_los_mean:.5f} vs 1/(kappa+1)={target:.5f} "
        f"(ratio {ratio:.3f}), {elapsed:.0f}s",
    )


def test_criterion_10_sweep_determinism(tmp_path):
    # full fig2 preset grid; trial count reduced to keep the check fast, which
    # does not affect the determinism property being tested
    t0 = time.perf_counter()
    payloads = {}
    for label, threads in (("t1_a", 1), ("t1_b", 1), ("t8_a", 8), ("t8_b", 8)):
        out = tmp_path / label
        rc = cli.main([
            "sweep", "--preset", "fig2", "--trials", "8", "--seed", str(SEED),
            "--threads", str(threads), "--out", str(out),
        ])
        assert rc == 0
        payloads[label] = (out / "sweep.csv").read_bytes()
    elapsed = time.perf_counter() - t0
    same = (
        payloads["t1_a"] == payloads["t1_b"] == payloads["t8_a"] == payloads["t8_b"]
    )
    criterion(
        10,
        "sweep-determinism",
        same,
        f"4 runs x {len(payloads['t1_a'])} bytes, threads 1 and 8, {elapsed:.0f}s",
    )
