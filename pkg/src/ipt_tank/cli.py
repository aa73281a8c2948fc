"""``ipt-tank`` command line: solve, verify, sweep and equiv workflows.

Configuration is one JSON document in SI units (H, F, Hz, ohm)::

    {
      "coils": {"l1": 240e-6, "l2": 240e-6, "k": 0.16666666666666666},
      "f_cc": 85000.0,
      "loads": [5, 10, 20, 50, 100],
      "capacitors": {"c_p": ..., "c_ss": ..., "c_sp": ...},   (optional)
      "f_cv": ...,                                              (optional)
      "solver": {"c_bounds": [lo, hi], "f_cv_bounds": [lo, hi], "starts_per_axis": 8},
      "tolerances": {"spread": 1e-6, "angle_deg": 0.01, "residual": 1e-9},
      "output": {"dir": "out"}
    }

The coil block is either ``{l1, l2, k}`` or ``{l_lp, l_ls, l_m}``.

Exit codes: 0 success, 1 the design did not pass, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .circuit import CoupledCoils, build_ssp, t_model
from .conditions import equivalence_check, eval_ssp_reactances, unified_consistent_draws
from .errors import IptError
from .harness import Tolerances, sweep, sweep_csv_text, verify_cc, verify_cv
from .solver import DesignSpec, solve_design
from .tanks import Mode

log = logging.getLogger("ipt_tank")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
EQUIV_THRESHOLD = 1e-9


class ConfigError(Exception):
    """Invalid configuration or design file; carries a field/line diagnostic."""


@dataclass(frozen=True)
class ProjectConfig:
    coils: CoupledCoils
    f_cc: float
    loads: tuple[float, ...]
    capacitors: dict[str, float] | None = None
    f_cv: float | None = None
    c_bounds: tuple[float, float] | None = None
    f_cv_bounds: tuple[float, float] | None = None
    starts_per_axis: int = 8
    tolerances: Tolerances = Tolerances()
    output_dir: str | None = None

    @property
    def omega_cc(self) -> float:
        return 2 * math.pi * self.f_cc

    def design_spec(self) -> DesignSpec:
        w_bounds = None
        if self.f_cv_bounds is not None:
            w_bounds = tuple(2 * math.pi * f for f in self.f_cv_bounds)
        return DesignSpec(self.coils, self.omega_cc, self.loads, self.c_bounds, w_bounds,
                          self.starts_per_axis, self.tolerances)


_TOP_KEYS = {"coils", "f_cc", "loads", "capacitors", "f_cv", "solver", "tolerances", "output"}
_COIL_FORMS = ({"l1", "l2", "k"}, {"l_lp", "l_ls", "l_m"})


def _where(text: str, key: str) -> str:
    needle = f'"{key}"'
    pos = text.find(needle)
    if pos < 0:
        return ""
    return f" (line {text.count(chr(10), 0, pos) + 1})"


def _positive(value: Any, path: str, text: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}{_where(text, path.split('.')[-1])}")
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f"{path}: must be positive and finite, got {value!r}{_where(text, path.split('.')[-1])}")
    return value


def _pair(value: Any, path: str, text: str) -> tuple[float, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"{path}: expected [lower, upper]{_where(text, path.split('.')[-1])}")
    lo, hi = (_positive(v, path, text) for v in value)
    if not lo < hi:
        raise ConfigError(f"{path}: lower bound must be below upper bound{_where(text, path.split('.')[-1])}")
    return lo, hi


def _object(value: Any, path: str, text: str, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object{_where(text, path)}")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(unknown)}{_where(text, unknown[0])}")
    return value


def parse_config(text: str) -> ProjectConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    raw = _object(raw, "config", text, _TOP_KEYS)
    for key in ("coils", "f_cc", "loads"):
        if key not in raw:
            raise ConfigError(f"{key}: required field is missing")

    coil_raw = _object(raw["coils"], "coils", text, _COIL_FORMS[0] | _COIL_FORMS[1])
    keys = set(coil_raw)
    if keys not in _COIL_FORMS:
        raise ConfigError(
            "coils: give exactly one of {l1, l2, k} or {l_lp, l_ls, l_m}, "
            f"got {sorted(keys)}{_where(text, 'coils')}"
        )
    try:
        if keys == _COIL_FORMS[0]:
            coils = t_model(_positive(coil_raw["l1"], "coils.l1", text),
                            _positive(coil_raw["l2"], "coils.l2", text),
                            _positive(coil_raw["k"], "coils.k", text))
        else:
            coils = CoupledCoils(*(_positive(coil_raw[k], f"coils.{k}", text) for k in ("l_lp", "l_ls", "l_m")))
    except IptError as exc:
        raise ConfigError(f"coils: {exc}{_where(text, 'k' if 'k' in keys else 'coils')}") from None

    f_cc = _positive(raw["f_cc"], "f_cc", text)
    loads_raw = raw["loads"]
    if not isinstance(loads_raw, list) or not loads_raw:
        raise ConfigError(f"loads: expected a non-empty list of resistances{_where(text, 'loads')}")
    loads = tuple(_positive(r, f"loads[{i}]", text) for i, r in enumerate(loads_raw))

    capacitors = None
    if "capacitors" in raw:
        cap_raw = _object(raw["capacitors"], "capacitors", text, {"c_p", "c_ss", "c_sp"})
        missing = {"c_p", "c_ss", "c_sp"} - set(cap_raw)
        if missing:
            raise ConfigError(f"capacitors: missing {', '.join(sorted(missing))}{_where(text, 'capacitors')}")
        capacitors = {k: _positive(v, f"capacitors.{k}", text) for k, v in cap_raw.items()}
    f_cv = _positive(raw["f_cv"], "f_cv", text) if "f_cv" in raw else None

    solver = _object(raw.get("solver", {}), "solver", text, {"c_bounds", "f_cv_bounds", "starts_per_axis"})
    c_bounds = _pair(solver["c_bounds"], "solver.c_bounds", text) if "c_bounds" in solver else None
    f_cv_bounds = _pair(solver["f_cv_bounds"], "solver.f_cv_bounds", text) if "f_cv_bounds" in solver else None
    starts = solver.get("starts_per_axis", 8)
    if isinstance(starts, bool) or not isinstance(starts, int) or starts < 1:
        raise ConfigError(f"solver.starts_per_axis: expected a positive integer{_where(text, 'starts_per_axis')}")

    tol_raw = _object(raw.get("tolerances", {}), "tolerances", text, {"spread", "angle_deg", "residual"})
    tolerances = Tolerances(**{k: _positive(v, f"tolerances.{k}", text) for k, v in tol_raw.items()})

    out_raw = _object(raw.get("output", {}), "output", text, {"dir"})
    out_dir = out_raw.get("dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError(f"output.dir: expected a path string{_where(text, 'dir')}")

    return ProjectConfig(coils, f_cc, loads, capacitors, f_cv, c_bounds, f_cv_bounds, starts,
                         tolerances, out_dir)


def load_config(path: str | os.PathLike) -> ProjectConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


@dataclass(frozen=True)
class DesignValues:
    c_p: float
    c_ss: float
    c_sp: float
    omega_cv: float


def parse_design(text: str, index: int = 0) -> DesignValues:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"design: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if isinstance(raw, dict) and "solutions" in raw:
        sols = raw["solutions"]
        if not isinstance(sols, list) or not (0 <= index < len(sols)):
            raise ConfigError(f"design: no solution at index {index}")
        raw = sols[index]
    if not isinstance(raw, dict):
        raise ConfigError("design: expected a JSON object")
    missing = [k for k in ("c_p", "c_ss", "c_sp") if k not in raw]
    if "omega_cv" not in raw and "f_cv" not in raw:
        missing.append("omega_cv or f_cv")
    if missing:
        raise ConfigError(f"design: missing value(s) {', '.join(missing)}")
    vals = {k: _positive(raw[k], f"design.{k}", text) for k in ("c_p", "c_ss", "c_sp")}
    if "omega_cv" in raw:
        w_cv = _positive(raw["omega_cv"], "design.omega_cv", text)
    else:
        w_cv = 2 * math.pi * _positive(raw["f_cv"], "design.f_cv", text)
    return DesignValues(omega_cv=w_cv, **vals)


def load_design(path: str | os.PathLike, index: int = 0) -> DesignValues:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read design {path}: {exc.strerror}") from None
    return parse_design(text, index)


# -- output helpers -----------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(_jsonable(payload), indent=2) + "\n")


def _out_dir(args, cfg: ProjectConfig | None) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.output_dir:
        return Path(cfg.output_dir)
    return Path(".")


# -- commands -------------------------------------------------------------------


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    outcome = solve_design(cfg.design_spec(), seed=args.seed)
    passing = [s for s in outcome.solutions if s.verified]
    payload = {
        "f_cc": cfg.f_cc,
        "loads": list(cfg.loads),
        "solver": {"starts": outcome.starts, "converged": outcome.converged,
                   "restarts": outcome.restarts, "best_residual": outcome.best_residual,
                   "notes": outcome.notes, "seed": args.seed},
        "solutions": [s.to_dict() for s in outcome.solutions],
    }
    path = _out_dir(args, cfg) / "design.json"
    _write_json(path, payload)
    print(f"{len(outcome.solutions)} solution(s), {len(passing)} verified -> {path}")
    for s in outcome.solutions:
        print(f"  C_p={s.c_p:.6e} F  C_ss={s.c_ss:.6e} F  C_sp={s.c_sp:.6e} F  "
              f"f_cv={s.f_cv:.3f} Hz  verified={s.verified}")
    if not outcome.solutions:
        for note in outcome.notes:
            print(f"  {note}")
    return EXIT_OK if passing else EXIT_FAIL


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    design = load_design(args.design, args.index)
    network = build_ssp(cfg.coils, design.c_p, design.c_ss, design.c_sp, cfg.loads[0])
    cc = verify_cc(network, cfg.omega_cc, cfg.loads, cfg.tolerances)
    cv = verify_cv(network, design.omega_cv, cfg.loads, cfg.tolerances)
    out = _out_dir(args, cfg)
    _write_json(out / "cc_report.json", cc.to_dict())
    _write_json(out / "cv_report.json", cv.to_dict())
    for rep in (cc, cv):
        status = "PASS" if rep.verdict else "FAIL"
        detail = "" if rep.verdict else f" (failing: {', '.join(rep.failing_checks())})"
        print(f"{rep.mode.value} at {rep.omega / (2 * math.pi):.3f} Hz: {status}{detail}")
    return EXIT_OK if cc.verdict and cv.verdict else EXIT_FAIL


def _sweep_design(args, cfg: ProjectConfig) -> tuple[float, float, float]:
    if args.design:
        d = load_design(args.design, args.index)
        return d.c_p, d.c_ss, d.c_sp
    if cfg.capacitors:
        return cfg.capacitors["c_p"], cfg.capacitors["c_ss"], cfg.capacitors["c_sp"]
    raise ConfigError("sweep needs capacitor values: add 'capacitors' to the config or pass --design")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    c_p, c_ss, c_sp = _sweep_design(args, cfg)
    fmin = args.fmin if args.fmin is not None else 0.3 * cfg.f_cc
    fmax = args.fmax if args.fmax is not None else 3.0 * cfg.f_cc
    if not (0 < fmin < fmax) or args.points < 1:
        raise ConfigError("sweep range needs 0 < fmin < fmax and points >= 1")
    omegas = 2 * math.pi * np.geomspace(fmin, fmax, args.points) if args.points > 1 \
        else np.array([2 * math.pi * fmin])
    network = build_ssp(cfg.coils, c_p, c_ss, c_sp, cfg.loads[0])
    records = sweep(network, omegas, cfg.loads)
    path = _out_dir(args, cfg) / "sweep.csv"
    _atomic_write(path, sweep_csv_text(records))
    n_bad = sum(r.singular for r in records)
    print(f"{len(records)} rows ({n_bad} singular) -> {path}")
    return EXIT_OK


def _equiv_summary(reports) -> dict:
    usable = [r for r in reports if not r.degenerate]
    return {
        "points": len(reports),
        "degenerate": len(reports) - len(usable),
        "max_discrepancy": max((r.max_discrepancy for r in usable), default=math.nan),
        "max_premise_error": max((r.premise_error for r in usable), default=math.nan),
        "premise_failures": sum(not r.premise_holds for r in usable),
    }


def cmd_equiv(args) -> int:
    if args.random is not None:
        if args.random < 1:
            raise ConfigError("--random needs N >= 1")
        cfg = load_config(args.config) if args.config else None
        per_mode = {}
        for mode in (Mode.CC, Mode.CV):
            draws = unified_consistent_draws(args.random, args.seed, mode)
            per_mode[mode.value] = _equiv_summary([equivalence_check(d.reactances) for d in draws])
        payload = {"source": "random", "n": args.random, "seed": args.seed, "modes": per_mode}
    else:
        if not args.config:
            raise ConfigError("equiv needs --config or --random N")
        cfg = load_config(args.config)
        if cfg.capacitors and cfg.f_cv:
            c_p, c_ss, c_sp = (cfg.capacitors[k] for k in ("c_p", "c_ss", "c_sp"))
            w_cv = 2 * math.pi * cfg.f_cv
        else:
            outcome = solve_design(cfg.design_spec(), seed=args.seed)
            if not outcome.solutions:
                print("no design to check: solver found no solution")
                return EXIT_FAIL
            s = outcome.solutions[0]
            c_p, c_ss, c_sp, w_cv = s.c_p, s.c_ss, s.c_sp, s.omega_cv
        per_mode = {}
        for mode, w in ((Mode.CC, cfg.omega_cc), (Mode.CV, w_cv)):
            x = eval_ssp_reactances(cfg.coils, c_p, c_ss, c_sp, w, mode)
            per_mode[mode.value] = _equiv_summary([equivalence_check(x)])
        payload = {"source": "config", "modes": per_mode}

    worst = max(m["max_discrepancy"] for m in per_mode.values())
    premise_ok = all(m["premise_failures"] == 0 and m["degenerate"] < m["points"] for m in per_mode.values())
    ok = premise_ok and math.isfinite(worst) and worst < EQUIV_THRESHOLD
    payload["max_discrepancy"] = worst
    payload["pass"] = ok
    _write_json(_out_dir(args, cfg) / "equivalence.json", payload)
    for name, m in per_mode.items():
        print(f"{name}: {m['points']} point(s), {m['degenerate']} degenerate, "
              f"{m['premise_failures']} premise failure(s), max discrepancy {m['max_discrepancy']:.3e}")
    print(f"max discrepancy {worst:.3e} ({'PASS' if ok else 'FAIL'}, threshold {EQUIV_THRESHOLD:g})")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipt-tank", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve C_p, C_ss, C_sp and f_cv for an S-SP design")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="write CC and CV verification reports for a design")
    p.add_argument("--config", required=True)
    p.add_argument("--design", required=True)
    p.add_argument("--index", type=int, default=0, help="solution index in a solve output")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="frequency x load sweep to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--design")
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--fmin", type=float)
    p.add_argument("--fmax", type=float)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("equiv", help="compare tank conditions with the unified-model conditions")
    p.add_argument("--config")
    p.add_argument("--random", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_equiv)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
