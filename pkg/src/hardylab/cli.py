"""Command-line front end: ``hardylab {analyze,sweep,verify}``.

Reports go to stdout (JSON or CSV), diagnostics to stderr.  Exit codes:
0 ok, 2 config error, 3 numeric tolerance, 4 verification failure,
5 window too small.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .calculus import MonotoneEnvelope
from .corpus import log_uniform, random_piecewise_power, random_step, supremum_cases, theta_cases
from .errors import ConfigError, HardyLabError, ToleranceNotReached, WindowTooSmall
from .extremals import (
    hardy_lemma_check,
    rayleigh_ratio,
    saturating_step,
    sigma_chain,
    sigma_sensitivity,
    theta_B,
    theta_test_function,
)
from .functionals import (
    HardyInstance,
    check_change_of_variables,
    check_pointwise_bound,
    compute_A,
    mazya_rozin_A,
)
from .oracle import SearchConfig, best_constant_search, supremum_identity_check
from .weights import Exponential, Exponents, Power, Regime, indicator, weight_from_spec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY, EXIT_WINDOW = 0, 2, 3, 4, 5

DEFAULTS = {
    "mode": "analyze",
    "v": {"kind": "power", "a": 0.0},
    "w": {"kind": "power", "a": -2.0},
    "p": 2.0,
    "q": 2.0,
    "window": [1e-4, 1e4],
    "n_samples": 512,
    "rel_tol": 1e-8,
    "theta": None,
    "sigma": math.e,
    "epsilon": 0.5,
    "format": "json",
    "oracle": {"n_cells": 2000, "restarts": 8, "max_iters": 3000, "seed": 42},
    "sweep": {"a": [], "b": [], "p": [], "q": [], "workers": 1},
    "verify": {"pointwise_constant_factor": 1.0, "cases_per_cell": 3, "t_per_case": 5},
}


# ---------------------------------------------------------------------------
# configuration


def _merge(base: dict, extra: dict, path="") -> dict:
    out = dict(base)
    for k, val in extra.items():
        if k not in base:
            raise ConfigError(f"unknown config field {path + k!r}")
        if isinstance(base[k], dict) and k not in ("v", "w"):
            if not isinstance(val, dict):
                raise ConfigError(f"config field {path + k!r} must be an object")
            out[k] = _merge(base[k], val, path + k + ".")
        else:
            out[k] = val
    return out


def load_config(args: argparse.Namespace) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _merge(cfg, raw)
    mode = args.command or args.mode
    if mode:
        cfg["mode"] = mode
    for flag, key in (("p", "p"), ("q", "q"), ("theta", "theta"), ("sigma", "sigma"),
                      ("epsilon", "epsilon"), ("tol", "rel_tol"), ("format", "format")):
        val = getattr(args, flag)
        if val is not None:
            cfg[key] = val
    if args.window_lo is not None:
        cfg["window"] = [args.window_lo, cfg["window"][1]]
    if args.window_hi is not None:
        cfg["window"] = [cfg["window"][0], args.window_hi]
    if args.cells is not None:
        cfg["oracle"]["n_cells"] = args.cells
    if args.seed is not None:
        cfg["oracle"]["seed"] = args.seed
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg["mode"] not in ("analyze", "sweep", "verify"):
        raise ConfigError(f"mode must be analyze, sweep or verify, got {cfg['mode']!r}")
    if cfg["format"] not in ("json", "csv"):
        raise ConfigError("format must be json or csv")
    w = cfg["window"]
    if not (isinstance(w, list) and len(w) == 2 and all(isinstance(x, (int, float)) for x in w)
            and 0 < w[0] < w[1] < math.inf):
        raise ConfigError("window must be [lo, hi] with 0 < lo < hi < inf")
    if not 0 < cfg["epsilon"] < 1:
        raise ConfigError("epsilon must lie in (0, 1)")
    if not cfg["sigma"] > 1:
        raise ConfigError("sigma must exceed 1")
    if not cfg["rel_tol"] > 0:
        raise ConfigError("tol must be positive")
    for k in ("a", "b", "p", "q"):
        if not isinstance(cfg["sweep"][k], list):
            raise ConfigError(f"sweep.{k} must be a list")
    _search_config(cfg)
    if cfg["mode"] != "sweep":
        _instance(cfg)


def _instance(cfg) -> HardyInstance:
    return HardyInstance(weight_from_spec(cfg["v"]), weight_from_spec(cfg["w"]), Exponents(cfg["p"], cfg["q"]))


def _search_config(cfg) -> SearchConfig:
    o = cfg["oracle"]
    return SearchConfig(n_cells=o["n_cells"], window=tuple(cfg["window"]), restarts=o["restarts"],
                        max_iters=o["max_iters"], seed=o["seed"])


# ---------------------------------------------------------------------------
# JSON helpers


def _clean(x):
    """Plain JSON types; infinities become the string "inf"."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def _ratio_json(f, inst, rel_tol):
    r = rayleigh_ratio(f, inst, rel_tol)
    return r.to_json()


class _Timer:
    def __init__(self):
        self.t = {}

    def __call__(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *a):
                timer.t[name] = round(time.perf_counter() - self.t0, 6)

        return _Ctx()


def _skip(exc):
    return {"skipped": f"{type(exc).__name__}: {exc}"}


# ---------------------------------------------------------------------------
# analyze


def run_analyze(cfg: dict) -> tuple[dict, int]:
    inst = _instance(cfg)
    timer = _Timer()
    window = tuple(cfg["window"])
    tol = cfg["rel_tol"]
    report = {"tool": {"name": "hardylab", "version": __version__}, "mode": "analyze", "config": cfg,
              "regime": inst.regime.value}
    with timer("A"):
        res = compute_A(inst, window=window, n_samples=cfg["n_samples"], rel_tol=tol)
    report["A"] = res.A.to_json()
    report["A_witness"] = res.witness
    report["finiteness"] = "finite" if res.A.is_finite else "infinite"
    e = inst.e
    if 1 <= e.q < e.p:
        with timer("mazya_rozin"):
            report["mazya_rozin_A"] = mazya_rozin_A(inst, rel_tol=tol).to_json()

    lowers = {}
    witness = res.witness
    with timer("constructions"):
        if witness is not None and math.isfinite(witness) and witness > 0:
            try:
                f = saturating_step(inst.v, e, witness)
                lowers["saturating"] = {"t": witness, "ratio": _ratio_json(f, inst, tol)}
            except HardyLabError as exc:
                lowers["saturating"] = _skip(exc)
        if inst.regime is Regime.NONCONVEX:
            try:
                f = theta_test_function(inst.v, inst.w, e, cfg["theta"], window)
                lowers["theta"] = {"theta": cfg["theta"], "window": list(window), "ratio": _ratio_json(f, inst, tol)}
            except HardyLabError as exc:
                lowers["theta"] = _skip(exc)
    report["C_lower"] = lowers

    scfg = _search_config(cfg)
    with timer("oracle"):
        search = best_constant_search(inst, scfg)
    report["oracle"] = {"config": scfg.to_json(), **search.to_json()}

    finite_lowers = [x["ratio"]["value"] for x in lowers.values() if "ratio" in x]
    numeric = [math.inf if v == "inf" else v for v in finite_lowers]
    C_lower = max(numeric + [0.0])
    A_val = res.A.value
    cons = {"C_lower": C_lower, "C_est": search.C_est}
    if A_val is not None and math.isfinite(A_val) and A_val > 0:
        cons["C_over_A"] = search.C_est / A_val if math.isfinite(search.C_est) else math.inf
        cons["C_lower_over_A"] = C_lower / A_val
    cons["finiteness_disagreement"] = bool(res.A.is_finite != math.isfinite(search.C_est))
    report["consistency"] = cons

    checks = {}
    with timer("checks"):
        t_chk = witness if witness is not None and math.isfinite(witness) and witness > 0 else 1.0
        eps = cfg["epsilon"]
        try:
            f = saturating_step(inst.v, e, t_chk)
            checks["pointwise_bound"] = {"t": t_chk, "epsilon": eps,
                                         **check_pointwise_bound(f, inst.v, e, eps, t_chk).to_json()}
        except HardyLabError as exc:
            checks["pointwise_bound"] = _skip(exc)
        try:
            lhs, rhs, gap = check_change_of_variables(inst.v, e, eps, t_chk)
            checks["change_of_variables"] = {"t": t_chk, "lhs": lhs, "rhs": rhs, "rel_gap": gap,
                                             "passed": gap < 1e-6}
        except HardyLabError as exc:
            checks["change_of_variables"] = _skip(exc)
        try:
            sup, Vt, gap = supremum_identity_check(inst.v, e, t_chk, scfg)
            checks["supremum_identity"] = {"t": t_chk, "oracle_sup": sup, "V_t": Vt, "rel_gap": gap,
                                           "passed": gap < 1e-2}
        except HardyLabError as exc:
            checks["supremum_identity"] = _skip(exc)
        if inst.regime is Regime.NONCONVEX_P1:
            try:
                chain = sigma_chain(inst, cfg["sigma"], C=search.C_est if math.isfinite(search.C_est) else None)
                sig = cfg["sigma"]
                chain["sigma_sensitivity"] = sigma_sensitivity(inst, (sig**0.5, sig, sig**2), C=chain["C_used"])
                checks["hardy_lemma_chain"] = chain
            except HardyLabError as exc:
                checks["hardy_lemma_chain"] = _skip(exc)
    report["checks"] = checks
    report["timings"] = timer.t
    return report, EXIT_OK


# ---------------------------------------------------------------------------
# sweep

SWEEP_COLUMNS = ["a", "b", "p", "q", "regime", "A", "finite", "C_lower", "C_est", "C_over_A", "error"]


def _sweep_row(args):
    a, b, p, q, window, n_samples, rel_tol, ocfg = args
    row = {"a": a, "b": b, "p": p, "q": q, "regime": "", "A": "", "finite": "", "C_lower": "",
           "C_est": "", "C_over_A": "", "error": ""}
    try:
        inst = HardyInstance(Power(a), Power(b), Exponents(p, q))
        row["regime"] = inst.regime.value
        res = compute_A(inst, window=window, n_samples=n_samples, rel_tol=rel_tol)
        fin = res.A.is_finite
        row["finite"] = "true" if fin else "false"
        if fin:
            row["A"] = res.A.value
        lows = []
        if res.witness is not None and math.isfinite(res.witness) and res.witness > 0:
            try:
                lows.append(rayleigh_ratio(saturating_step(inst.v, inst.e, res.witness), inst, rel_tol).value)
            except HardyLabError:
                pass
        if inst.regime is Regime.NONCONVEX:
            try:
                lows.append(rayleigh_ratio(theta_test_function(inst.v, inst.w, inst.e, None, window), inst,
                                           rel_tol).value)
            except HardyLabError:
                pass
        C_lower = max(lows) if lows else 0.0
        row["C_lower"] = _csv_num(C_lower)
        C_est = max(best_constant_search(inst, SearchConfig(**ocfg)).C_est, C_lower)
        row["C_est"] = _csv_num(C_est)
        if fin and res.A.value > 0 and math.isfinite(C_est):
            row["C_over_A"] = C_est / res.A.value
    except (HardyLabError, ValueError, ArithmeticError) as exc:
        if not row["finite"]:
            row["finite"] = "undetermined"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _csv_num(x):
    return "inf" if math.isinf(x) else x


def run_sweep(cfg: dict) -> tuple[list, int]:
    sw = cfg["sweep"]
    o = cfg["oracle"]
    ocfg = {"n_cells": o["n_cells"], "window": tuple(cfg["window"]), "restarts": o["restarts"],
            "max_iters": o["max_iters"], "seed": o["seed"]}
    grid = [(float(a), float(b), float(p), float(q), tuple(cfg["window"]), cfg["n_samples"], cfg["rel_tol"], ocfg)
            for a, b, p, q in itertools.product(sw["a"], sw["b"], sw["p"], sw["q"])]
    workers = int(sw.get("workers", 1) or 1)
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_row, grid))  # map keeps grid order
    else:
        rows = [_sweep_row(g) for g in grid]
    return rows, EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _check(name, n_cases, passed, **extra):
    return {"name": name, "passed": bool(passed), "n_cases": n_cases, **extra}


def run_verify(cfg: dict) -> tuple[dict, int]:
    timer = _Timer()
    seed = cfg["oracle"]["seed"]
    vcfg = cfg["verify"]
    factor = float(vcfg["pointwise_constant_factor"])
    results = []

    with timer("pointwise_bound"):
        rng = np.random.default_rng([seed, 1])
        n, worst, fails = 0, math.inf, 0
        for p in (1.0, 1.5, 2.0, 3.0):
            e = Exponents(p, 1.0)
            for eps in (0.1, 0.5, 0.9):
                for _ in range(vcfg["cases_per_cell"]):
                    v = random_piecewise_power(rng, p)
                    f = random_step(rng)
                    for t in log_uniform(rng, 1e-2, 1e2, vcfg["t_per_case"]):
                        chk = check_pointwise_bound(f, v, e, eps, float(t), constant_factor=factor)
                        n += 1
                        fails += not chk.holds
                        if chk.rhs > 0 and math.isfinite(chk.rhs):
                            worst = min(worst, chk.slack / chk.rhs)
        results.append(_check("pointwise_bound", n, fails == 0, violations=fails,
                              min_relative_slack=worst, constant_factor=factor))

    with timer("change_of_variables"):
        n, worst = 0, 0.0
        for p in (1.5, 2.0, 3.0):
            e = Exponents(p, 1.0)
            for a in (-1.0, -0.5, 0.0, 0.25):
                if not a < p - 1:
                    continue
                for eps in (0.1, 0.5, 0.9):
                    for t in (0.5, 2.0):
                        _, _, gap = check_change_of_variables(Power(a), e, eps, t)
                        n += 1
                        worst = max(worst, gap)
        results.append(_check("change_of_variables", n, worst < 1e-6, max_rel_gap=worst))

    with timer("supremum_identity"):
        scfg = SearchConfig(n_cells=2000, restarts=2, seed=seed)
        worst, rows = 0.0, []
        for name, v, p, t in supremum_cases():
            sup, Vt, gap = supremum_identity_check(v, Exponents(p, 1.0), t, scfg)
            worst = max(worst, gap)
            rows.append({"v": name, "p": p, "t": t, "oracle_sup": sup, "V_t": Vt, "rel_gap": gap})
        results.append(_check("supremum_identity", len(rows), worst < 1e-2, max_rel_gap=worst, cases=rows))

    with timer("theta_energy"):
        worst, rows = 0.0, []
        for label, v, w, p, q, theta, window in theta_cases():
            inst = HardyInstance(v, w, Exponents(p, q))
            f = theta_test_function(v, w, inst.e, theta, window, n_cells=1024)
            energy = f.lp_weighted(p, v)
            B = theta_B(inst, window).value
            gap = abs(energy - B / theta) / (B / theta)
            worst = max(worst, gap)
            rows.append({"case": label, "theta": theta, "energy": energy, "B_over_theta": B / theta, "rel_gap": gap})
        results.append(_check("theta_energy_identity", len(rows), worst < 1e-4, max_rel_gap=worst, cases=rows))

    with timer("hardy_lemma"):
        t = np.geomspace(1e-2, 1e2, 64)
        F = MonotoneEnvelope(t, np.log1p(t), True, np.log1p, lambda s: 1 / (1 + s))
        res = hardy_lemma_check(F, F, lambda s: np.exp(-np.asarray(s, float)), 1e-2, 1e2)
        results.append(_check("hardy_lemma_identical_measures", 1, res.holds and abs(res.lhs - res.rhs) <= 1e-9 * res.rhs,
                              lhs=res.lhs, rhs=res.rhs))

    with timer("sigma_chain"):
        inst = HardyInstance(Exponential(-1.0), indicator(1.0, 2.0), Exponents(1.0, 0.5))
        chain = sigma_chain(inst, cfg["sigma"])
        results.append(_check("sigma_chain", len(chain["steps"]), chain["all_hold"], report=chain))

    all_ok = all(r["passed"] for r in results)
    report = {"tool": {"name": "hardylab", "version": __version__}, "mode": "verify", "config": cfg,
              "checks": results, "all_passed": all_ok, "timings": timer.t}
    return report, EXIT_OK if all_ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# output


def _emit_json(report, out):
    out.write(json.dumps(_clean(report), indent=2, allow_nan=False))
    out.write("\n")


def _emit_csv(rows, columns, out):
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: _clean(v) for k, v in r.items()})
    out.write(buf.getvalue())


def _flatten(report):
    """One CSV row for analyze/verify reports."""
    if report["mode"] == "verify":
        return [{"check": r["name"], "passed": r["passed"], "n_cases": r["n_cases"]} for r in report["checks"]], \
            ["check", "passed", "n_cases"]
    A = report.get("A", {})
    row = {"regime": report["regime"], "A": A.get("value", ""), "A_abs_error": A.get("abs_error", ""),
           "divergence_site": A.get("divergence_site", ""), "finiteness": report["finiteness"],
           "C_lower": report["consistency"]["C_lower"], "C_est": report["consistency"]["C_est"],
           "C_over_A": report["consistency"].get("C_over_A", "")}
    return [row], list(row)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardylab", description="Numerical laboratory for two-weight Hardy inequalities.")
    ap.add_argument("command", nargs="?", choices=["analyze", "sweep", "verify"])
    ap.add_argument("--config")
    ap.add_argument("--mode", choices=["analyze", "sweep", "verify"])
    ap.add_argument("--p", type=float)
    ap.add_argument("--q", type=float)
    ap.add_argument("--window-lo", type=float)
    ap.add_argument("--window-hi", type=float)
    ap.add_argument("--cells", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--theta", type=float)
    ap.add_argument("--sigma", type=float)
    ap.add_argument("--epsilon", type=float)
    ap.add_argument("--format", choices=["json", "csv"])
    return ap


def _origin(exc) -> str:
    tb = exc.__traceback__
    name = "hardylab"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("hardylab"):
            name = mod
        tb = tb.tb_next
    return name


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        mode = cfg["mode"]
        if mode == "sweep":
            rows, code = run_sweep(cfg)
            if cfg["format"] == "csv":
                _emit_csv(rows, SWEEP_COLUMNS, out)
            else:
                _emit_json({"tool": {"name": "hardylab", "version": __version__}, "mode": "sweep",
                            "config": cfg, "rows": rows}, out)
            return code
        report, code = (run_analyze if mode == "analyze" else run_verify)(cfg)
        if cfg["format"] == "csv":
            rows, cols = _flatten(report)
            _emit_csv(rows, cols, out)
        else:
            _emit_json(report, out)
        return code
    except ConfigError as exc:
        print(f"hardylab: {_origin(exc)}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WindowTooSmall as exc:
        print(f"hardylab: {_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_WINDOW
    except (ToleranceNotReached, HardyLabError, ArithmeticError) as exc:
        print(f"hardylab: {_origin(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
