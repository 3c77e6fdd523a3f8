"""Command-line front end.

    fadingbc analyze --config chan.json [--out report.json] [--nats]
    fadingbc sweep   --config chan.json --q-min 0.5 --q-max 50 --points 20 [--log]
    fadingbc verify  [--config chan.json | --random 200 --seed 7]

Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 channel outside
the one-sided non-degraded regime, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .achievable import gap_analysis, maximize_r_ach
from .bounds import upper_bound
from .channel import ChannelSpec, validate_and_normalize
from .errors import BoundsError
from .verify import random_channel, run_suites

RATE_FIELDS = ("d_value", "c_value", "sr_upper", "sr_ach", "gap", "gap_bound")
CSV_COLUMNS = (
    "q",
    "x_star",
    "case",
    "d_value",
    "d_is_exact",
    "c_value",
    "sr_upper",
    "beta_star",
    "sr_ach",
    "gap",
    "gap_bound",
    "error",
)
TOLERANCE_KEYS = {"merge_rtol", "pmf_tol"}


class ConfigError(BoundsError):
    code = "invalid_config"
    exit_code = 2


# --------------------------------------------------------------------------
# canonical serialization


def format_float(x: float) -> str:
    """17 significant digits; always carries a decimal point or exponent."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def canonical_json(obj) -> str:
    """Sorted keys, no whitespace, floats at 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ",".join(json.dumps(str(k)) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, np.generic):
        return canonical_json(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --------------------------------------------------------------------------
# config and records


def load_config(path: str | Path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    missing = {"h", "p", "g", "q"} - raw.keys()
    if missing:
        raise ConfigError(f"config is missing keys {sorted(missing)}")
    extra = raw.keys() - {"h", "p", "g", "q", "tolerances"}
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    tol = raw.get("tolerances", {}) or {}
    if not isinstance(tol, dict) or tol.keys() - TOLERANCE_KEYS:
        raise ConfigError(f"tolerances may only set {sorted(TOLERANCE_KEYS)}")
    if not isinstance(raw["h"], list) or not isinstance(raw["p"], list):
        raise ConfigError("h and p must be JSON arrays")
    try:
        for key in ("g", "q"):
            raw[key] = float(raw[key])
        raw["h"] = [float(x) for x in raw["h"]]
        raw["p"] = [float(x) for x in raw["p"]]
        raw["tolerances"] = {k: float(v) for k, v in tol.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"non-numeric config value: {exc}") from exc
    return raw


def spec_from_config(cfg: dict, q: float | None = None) -> ChannelSpec:
    return validate_and_normalize(
        cfg["h"], cfg["p"], cfg["g"], cfg["q"] if q is None else q, **cfg.get("tolerances", {})
    )


def analysis_record(spec: ChannelSpec) -> dict:
    """Flat record of the full outer/inner bound pipeline (rates in bits)."""
    ub = upper_bound(spec)
    ach = maximize_r_ach(spec)
    gap = gap_analysis(ub, ach, spec)
    return {
        "h": list(spec.h),
        "p": list(spec.p),
        "g": spec.g,
        "q": spec.q,
        "x_star": ub.x_star,
        "inside_roots": list(ub.roots.inside_roots) if ub.roots else [],
        "case": str(ub.case),
        "alpha": list(ub.alpha.alpha),
        "d_value": ub.d_value,
        "d_is_exact": ub.d_is_exact,
        "c_value": ub.c_value,
        "sr_upper": ub.sr_upper,
        "beta_star": ach.beta_star,
        "sr_ach": ach.sr_ach,
        "gap": gap.gap,
        "gap_bound": gap.gap_bound,
        "setting": str(gap.setting),
        "beta_preference": gap.beta_preference,
        "near_degenerate": spec.near_degenerate,
        "units": "bits",
    }


def to_nats(record: dict) -> dict:
    out = dict(record)
    for key in RATE_FIELDS + ("beta_preference",):
        if out.get(key) is not None:
            out[key] = out[key] * math.log(2.0)
    out["units"] = "nats"
    return out


def q_grid(q_min: float, q_max: float, points: int, log: bool) -> list[float]:
    grid = np.geomspace(q_min, q_max, points) if log else np.linspace(q_min, q_max, points)
    grid[0], grid[-1] = q_min, q_max
    return [float(x) for x in grid]


def sweep_rows(cfg: dict, qs: list[float]) -> list[dict]:
    rows = []
    for q in qs:
        row = {c: "" for c in CSV_COLUMNS}
        row["q"] = format_float(q)
        try:
            rec = analysis_record(spec_from_config(cfg, q))
        except BoundsError as exc:
            row["error"] = exc.code
            row["_exit"] = exc.exit_code
        else:
            for c in CSV_COLUMNS[1:-1]:
                v = rec[c]
                if isinstance(v, bool):
                    row[c] = "true" if v else "false"
                elif isinstance(v, float):
                    row[c] = format_float(v)
                else:
                    row[c] = v
        rows.append(row)
    return rows


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([row[c] for c in CSV_COLUMNS])
    return buf.getvalue()


# --------------------------------------------------------------------------
# commands


def _fail(exc: BoundsError) -> int:
    sys.stderr.write(canonical_json({"error": exc.code, "message": str(exc)}) + "\n")
    return exc.exit_code


def cmd_analyze(args) -> int:
    try:
        rec = analysis_record(spec_from_config(load_config(args.config)))
    except BoundsError as exc:
        return _fail(exc)
    if args.nats:
        rec = to_nats(rec)
    text = canonical_json(rec) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    if not 0 < args.q_min < args.q_max:
        return _fail(ConfigError("need 0 < q-min < q-max"))
    if args.points < 2:
        return _fail(ConfigError("need at least 2 points"))
    try:
        cfg = load_config(args.config)
    except BoundsError as exc:
        return _fail(exc)
    rows = sweep_rows(cfg, q_grid(args.q_min, args.q_max, args.points, args.log))
    sys.stdout.write(render_csv(rows))
    codes = [r["_exit"] for r in rows if "_exit" in r]
    return codes[0] if codes else 0


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.config:
        try:
            channels = [spec_from_config(load_config(args.config))]
        except BoundsError as exc:
            return _fail(exc)
    else:
        channels = [random_channel(rng) for _ in range(args.random)]
    summary = run_suites(channels, rng)
    summary["seed"] = args.seed
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0 if summary["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fadingbc", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="bounds, gap and case for one channel (JSON)")
    a.add_argument("--config", required=True)
    a.add_argument("--out", default=None)
    a.add_argument("--nats", action="store_true", help="report rates in nats")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="CSV of the analysis over a grid of power budgets")
    s.add_argument("--config", required=True)
    s.add_argument("--q-min", type=float, required=True)
    s.add_argument("--q-max", type=float, required=True)
    s.add_argument("--points", type=int, required=True)
    s.add_argument("--log", action="store_true", help="log-spaced grid")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the numerical oracle suites")
    grp = v.add_mutually_exclusive_group()
    grp.add_argument("--config", default=None)
    grp.add_argument("--random", type=int, default=200, metavar="N")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
