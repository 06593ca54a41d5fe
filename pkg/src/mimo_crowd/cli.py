"""Command-line front end: sweeps, single-trial inspection and plot data.

Exit codes: 0 on success, 1 on errors (invalid config, malformed CSV),
2 when plotdata is given a CSV with no data rows.
"""

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .harness import inspect_trial, parse_config, run_sweep
from .report import (
    load_csv,
    render_figures,
    summarize,
    utc_now,
    write_csv,
    write_curves,
    write_manifest,
)

PRESETS = ("fig2", "fig3", "fig4")


def parse_config_file(path):
    """Flat KEY=VALUE config (``#`` comments) or a JSON manifest with a
    ``config`` object; both return the raw mapping."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        mapping = payload.get("config", payload)
        if not isinstance(mapping, dict):
            raise ValueError(f"{path}: JSON config must be an object")
        return {str(k): v for k, v in mapping.items()}
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected KEY=VALUE")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def preset_path(name):
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("mimo_crowd") / "presets" / f"{name}.cfg"


def _gather_raw_config(args):
    raw = {}
    if getattr(args, "preset", None):
        raw.update(parse_config_file(preset_path(args.preset)))
    if getattr(args, "config", None):
        raw.update(parse_config_file(args.config))
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        raw["trials"] = args.trials
    return raw


def _resolve_threads(args):
    if getattr(args, "threads", None) is not None:
        return max(1, args.threads)
    env = os.environ.get("MIMO_CROWD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValueError(f"MIMO_CROWD_THREADS: cannot parse {env!r}") from exc
    return 1


def _add_config_args(parser):
    parser.add_argument("--config", metavar="PATH", help="flat key=value config file or manifest")
    parser.add_argument("--preset", choices=PRESETS, help="built-in experiment preset")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--trials", type=int, help="override the trial count")


def cmd_sweep(args):
    raw = _gather_raw_config(args)
    configs, _ = parse_config(raw)
    threads = _resolve_threads(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    manifest_path = out_dir / "manifest.json"

    def progress(cfg, snr_db):
        print(
            f"[sweep] kappa={cfg.kappa:g} M={cfg.M} snr_db={snr_db:g} done",
            file=sys.stderr,
        )

    records = []
    started = utc_now()
    failure = None
    try:
        for cfg in configs:
            records.extend(run_sweep(cfg, threads=threads, progress=progress))
    except Exception as exc:  # noqa: BLE001 - partial results still get written
        failure = exc
    finished = utc_now()
    if records:
        write_csv(csv_path, records)
        write_manifest(
            manifest_path,
            raw,
            seed=configs[0].seed,
            outputs=[csv_path],
            started=started,
            finished=finished,
            threads=threads,
        )
        print(summarize(records))
        print(f"wrote {csv_path} and {manifest_path}")
    if failure is not None:
        print(f"sweep failed: {failure}", file=sys.stderr)
        return 1
    return 0


def _format_inspect(config, details, population):
    lines = []
    lines.append("# trial inspection")
    lines.append(
        "config: "
        + " ".join(
            [
                f"K={config.K}",
                f"G={config.G}",
                f"M={config.M}",
                f"L={config.L}",
                f"U={config.U}",
                f"T_c={config.T_c}",
                f"tau={config.tau}",
                f"kappa={config.kappa:g}",
                f"snr_db={details['snr_db']:g}",
                f"seed={config.seed}",
            ]
        )
    )
    lines.append(f"trial: {details['trial_index']}")
    lines.append("active users: " + " ".join(str(u) for u in details["active"]))
    lines.append("subframe pilots (columns follow active-user order):")
    for t, row in enumerate(details["pilot_indices"]):
        lines.append(f"  t={t}: " + " ".join(str(p) for p in row))
    if details["collisions"]:
        lines.append("collisions:")
        for t, pilot, users in details["collisions"]:
            lines.append(
                f"  subframe {t}: pilot {pilot} shared by users "
                + ", ".join(str(u) for u in users)
            )
    else:
        lines.append("collisions: none")
    lines.append("ground truth:")
    for uid in details["active"]:
        lines.append(
            f"  user {uid}: theta={details['theta'][uid]:.6f} g={details['g'][uid]:.6f}"
        )
    for run in details["runs"]:
        method, aoa_mode = run["key"]
        lines.append(f"--- method={method} aoa={aoa_mode} ---")
        if run.get("threshold") is not None:
            lines.append(f"threshold: {run['threshold']:.6g}")
        if run["candidates"] is not None:
            lines.append(
                "candidates (rad): " + " ".join(f"{c:.6f}" for c in run["candidates"])
            )
        if run["patterns"] is not None:
            report = run["report"]
            bound = {m.candidate: m.user_id for m in report.matches}
            nearest = {k: (u, d) for k, u, d in report.hamming_diagnostics}
            lines.append("candidate patterns:")
            for k, aoa_val, eta, strength in run["patterns"]:
                eta_text = ",".join(str(e) for e in eta)
                if k in bound:
                    tail = f"-> user {bound[k]}"
                elif k in nearest:
                    u, d = nearest[k]
                    tail = f"-> no match (nearest user {u} at Hamming distance {d})"
                else:
                    tail = "-> no match"
                lines.append(
                    f"  k={k} aoa={aoa_val:.6f} eta=({eta_text}) strength={strength:.6g} {tail}"
                )
        report = run["report"]
        active_set = set(details["active"])
        correct = set(run["correct"])
        lines.append("matches:")
        if not report.matches:
            lines.append("  none")
        for m in report.matches:
            if m.user_id in correct:
                tag = "[correct]"
            elif m.user_id not in active_set:
                tag = "[false accept]"
            else:
                tag = "[wrong AOA]"
            if m.candidate is None:
                lines.append(f"  user {m.user_id} {tag}")
            else:
                lines.append(
                    f"  user {m.user_id} <- candidate {m.candidate} (aoa={m.aoa:.6f}) {tag}"
                )
        missed = [u for u in details["active"] if u not in {m.user_id for m in report.matches}]
        lines.append(
            "missed active users: " + (" ".join(str(u) for u in missed) if missed else "none")
        )
        if run["nmse"]:
            lines.append("per-user NMSE (mean over subframes):")
            for uid in sorted(run["nmse"]):
                v_los, v_upd = run["nmse"][uid]
                lines.append(f"  user {uid}: los={v_los:.6g} updated={v_upd:.6g}")
        exact = "yes" if run["exact"] else "no"
        lines.append(f"accuracy: {run['accuracy']:.4f} exact_set: {exact}")
        if run["error"]:
            lines.append(f"estimation error: {run['error']}")
    return "\n".join(lines)


def cmd_inspect(args):
    raw = _gather_raw_config(args)
    configs, _ = parse_config(raw)
    config = configs[0]
    snr_db = config.snr_db_list[0]
    if len(configs) > 1 or len(config.snr_db_list) > 1:
        print(
            "[inspect] config spans several sweep points; using "
            f"kappa={config.kappa:g} M={config.M} snr_db={snr_db:g}",
            file=sys.stderr,
        )
    outcome, details = inspect_trial(config, snr_db, args.inspect)
    del outcome
    print(_format_inspect(config, details, None))
    return 0


def cmd_plotdata(args):
    rows = load_csv(args.csv)
    out_dir = Path(args.out)
    if not rows:
        print("warning: CSV has a header but no data rows; nothing to plot", file=sys.stderr)
        return 2
    written = write_curves(rows, out_dir)
    if not args.no_figures:
        written += render_figures(rows, out_dir)
    for path in written:
        print(path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mimo-crowd",
        description="Monte Carlo experiments for crowded multi-antenna uplink access",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a sweep and write CSV + manifest")
    _add_config_args(p_sweep)
    p_sweep.add_argument("--out", default="out", metavar="DIR", help="output directory")
    p_sweep.add_argument("--threads", type=int, help="worker processes (or MIMO_CROWD_THREADS)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_inspect = sub.add_parser("inspect", help="dump one trial in detail")
    _add_config_args(p_inspect)
    p_inspect.add_argument(
        "--inspect", type=int, default=0, metavar="TRIAL", help="trial index to dump"
    )
    p_inspect.set_defaults(func=cmd_inspect)

    p_plot = sub.add_parser("plotdata", help="emit per-curve files and figures from a sweep CSV")
    p_plot.add_argument("csv", help="sweep CSV produced by the sweep command")
    p_plot.add_argument("--out", default="out", metavar="DIR", help="output directory")
    p_plot.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p_plot.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
