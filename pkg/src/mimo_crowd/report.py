"""Result serialization: sweep CSV, run manifest, per-curve files and figures.

The CSV schema is fixed (one row per sweep point and method); curve files
are two-column text files suitable for external plotting, and the same
grouping is rendered to PNG figures.
"""

import json
import math
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .harness import parse_config

CSV_COLUMNS = (
    "snr_db",
    "kappa",
    "M",
    "L",
    "G",
    "U",
    "tau",
    "method",
    "aoa_mode",
    "trials",
    "id_acc_mean",
    "id_acc_se",
    "exact_set_rate",
    "nmse_los_mean",
    "nmse_upd_mean",
    "nmse_los_db",
    "nmse_upd_db",
    "ops_aoa",
    "ops_match",
    "ops_mmse",
)

# metric column -> curve/figure label
CURVE_METRICS = (
    ("id_acc_mean", "id_acc"),
    ("exact_set_rate", "exact_rate"),
    ("nmse_los_mean", "nmse_los"),
    ("nmse_upd_mean", "nmse_upd"),
    ("nmse_los_db", "nmse_los_db"),
    ("nmse_upd_db", "nmse_upd_db"),
)


def _fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return format(value, ".10g")
    return str(value)


def record_row(record):
    values = {
        "snr_db": record.snr_db,
        "kappa": record.kappa,
        "M": record.M,
        "L": record.L,
        "G": record.G,
        "U": record.U,
        "tau": record.tau,
        "method": record.method,
        "aoa_mode": record.aoa_mode,
        "trials": record.trials,
        "id_acc_mean": record.id_acc_mean,
        "id_acc_se": record.id_acc_se,
        "exact_set_rate": record.exact_set_rate,
        "nmse_los_mean": record.nmse_los_mean,
        "nmse_upd_mean": record.nmse_upd_mean,
        "nmse_los_db": record.nmse_los_db,
        "nmse_upd_db": record.nmse_upd_db,
        "ops_aoa": record.ops_aoa,
        "ops_match": record.ops_match,
        "ops_mmse": record.ops_mmse,
    }
    return [_fmt(values[c]) for c in CSV_COLUMNS]


def write_csv(path, records):
    """Write sweep records in the documented column order (UTF-8, '.' decimal)."""
    path = Path(path)
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(record_row(r)) for r in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _parse_cell(text):
    try:
        value = float(text)
    except ValueError:
        return text
    return value


def load_csv(path):
    """Parse a sweep CSV back into a list of row dictionaries."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("CSV file is empty (missing header)")
    header = lines[0].split(",")
    if list(header) != list(CSV_COLUMNS):
        raise ValueError(
            f"unexpected CSV header; expected {','.join(CSV_COLUMNS)}"
        )
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"malformed CSV row: {ln!r}")
        rows.append({k: _parse_cell(v) for k, v in zip(header, cells)})
    return rows


def write_manifest(path, raw_config, seed, outputs, started, finished, threads):
    """Atomic JSON manifest; re-running from it reproduces results byte-exactly."""
    _, normalized = parse_config(raw_config)
    payload = {
        "format": "mimo-crowd-manifest-v1",
        "package_version": __version__,
        "seed": seed,
        "threads": threads,
        "started": started,
        "finished": finished,
        "outputs": [str(p) for p in outputs],
        "config": normalized,
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    tmp.replace(path)
    return path


def load_manifest(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def utc_now():
    return datetime.now(timezone.utc).isoformat()


def _curve_key(row):
    return (row["method"], row["kappa"], row["M"], row["aoa_mode"])


def _curve_name(metric_label, key):
    method, kappa, m, aoa = key
    safe_method = str(method).replace("[", "").replace("]", "").replace("=", "")
    return f"{metric_label}__method-{safe_method}__kappa-{_fmt(kappa)}__M-{_fmt(m)}__aoa-{aoa}.dat"


def group_curves(rows, metric_column):
    """Sorted {(method, kappa, M, aoa_mode): [(snr, value), ...]} for one metric."""
    groups = {}
    for row in rows:
        value = row[metric_column]
        groups.setdefault(_curve_key(row), []).append((row["snr_db"], value))
    out = {}
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        points = sorted(groups[key], key=lambda p: p[0])
        if all(isinstance(v, float) and math.isnan(v) for _, v in points):
            continue  # e.g. baseline rows carry no NMSE
        out[key] = points
    return out


def write_curves(rows, out_dir):
    """One two-column (snr_db, value) file per (method, kappa, M, aoa) curve."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric_column, label in CURVE_METRICS:
        for key, points in group_curves(rows, metric_column).items():
            path = out_dir / _curve_name(label, key)
            lines = [f"{_fmt(x)} {_fmt(y)}" for x, y in points]
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            written.append(path)
    return written


def _curve_label(key):
    method, kappa, m, aoa = key
    parts = [str(method), f"kappa={_fmt(kappa)}", f"M={_fmt(m)}"]
    if aoa not in ("", "none"):
        parts.append(f"aoa={aoa}")
    return ", ".join(parts)


def render_figures(rows, out_dir):
    """Render accuracy / exact-rate / NMSE figures next to the curve files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    figures = (
        ("identification_accuracy.png", "Per-user identification accuracy",
         (("id_acc_mean", ""),)),
        ("exact_set_rate.png", "Exact active-set recovery rate",
         (("exact_set_rate", ""),)),
        ("nmse_db.png", "Channel estimation NMSE (dB)",
         (("nmse_los_db", "LOS-only"), ("nmse_upd_db", "updated"))),
    )
    for filename, title, metrics in figures:
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        plotted = False
        for metric_column, suffix in metrics:
            for key, points in group_curves(rows, metric_column).items():
                xs = [p[0] for p in points]
                ys = [p[1] for p in points]
                if all(isinstance(y, float) and (math.isnan(y) or math.isinf(y)) for y in ys):
                    continue
                label = _curve_label(key) + (f" [{suffix}]" if suffix else "")
                ax.plot(xs, ys, marker="o", markersize=3.5, linewidth=1.2, label=label)
                plotted = True
        if not plotted:
            plt.close(fig)
            continue
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel(title)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7, loc="best")
        fig.tight_layout()
        path = out_dir / filename
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written


def summarize(records):
    """Human-readable sweep summary; reports NMSE both unconditionally and
    conditioned on correct identification."""
    lines = []
    for r in records:
        head = (
            f"snr={_fmt(r.snr_db)}dB kappa={_fmt(r.kappa)} M={r.M} "
            f"method={r.method} aoa={r.aoa_mode}"
        )
        line = f"{head}: acc={r.id_acc_mean:.4f}+-{r.id_acc_se:.4f} exact={r.exact_set_rate:.4f}"
        if not math.isnan(r.nmse_los_mean):
            line += (
                f" nmse_los={r.nmse_los_mean:.4g} (cond {r.nmse_los_cond_mean:.4g})"
                f" nmse_upd={r.nmse_upd_mean:.4g} (cond {r.nmse_upd_cond_mean:.4g})"
            )
        if r.failed_trials:
            line += f" failed_trials={r.failed_trials}"
        lines.append(line)
    return "\n".join(lines)
