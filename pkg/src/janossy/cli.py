"""janossy command line: computes tables, writes CSV/JSON, caches expensive results.

Every subcommand accepts ``--config FILE`` (flat ``key = value`` lines), ``--out``
(table CSV), ``--json`` (summary JSON), ``--cache-dir`` and ``--no-cache``.
Precedence: flags > config file > defaults.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .errors import JanossyError

CACHE_ENV = "JANOSSY_CACHE"
CACHE_FORMAT = 1


class UsageError(Exception):
    pass


# ------------------------------------------------------------ parameter types

def _to_float(v, key):
    if isinstance(v, bool):
        raise UsageError(f"{key}: expected a number, got {v!r}")
    try:
        out = float(v)
    except (TypeError, ValueError):
        raise UsageError(f"{key}: expected a number, got {v!r}") from None
    if not math.isfinite(out):
        raise UsageError(f"{key}: expected a finite number, got {v!r}")
    return out


def _to_int(v, key):
    if isinstance(v, bool):
        raise UsageError(f"{key}: expected an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    try:
        return int(str(v), 10)
    except ValueError:
        raise UsageError(f"{key}: expected an integer, got {v!r}") from None


def _to_list(conv):
    def f(v, key):
        if isinstance(v, str):
            v = _parse_value(v) if v.strip().startswith("[") else [s for s in v.split(",") if s.strip()]
        if not isinstance(v, list):
            v = [v]
        return [conv(x, key) for x in v]
    return f


def _to_str(v, key):
    return str(v)


def _to_bool(v, key):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"{key}: expected true/false, got {v!r}")


def _seed(v, key):
    s = _to_int(v, key)
    if not 0 <= s < 2 ** 64:
        raise UsageError(f"{key}: seed must be a 64-bit unsigned integer")
    return s


def _optional(conv):
    def f(v, key):
        if v is None or (isinstance(v, str) and v.strip().lower() in ("", "none")):
            return None
        return conv(v, key)
    return f


@dataclass(frozen=True)
class Param:
    conv: Callable
    default: Any
    help: str
    metavar: Optional[str] = None


FLOAT, INT, STR = _to_float, _to_int, _to_str
FLOATS, INTS = _to_list(_to_float), _to_list(_to_int)

# output/plumbing keys: not part of the cache key
PLUMBING = {
    "out": Param(_optional(STR), None, "write the table CSV here (default: stdout)"),
    "json": Param(_optional(STR), None, "write the JSON summary here ('-' for stdout)"),
    "cache_dir": Param(_optional(STR), None, f"cache root (default: ${CACHE_ENV} or ~/.cache/janossy)"),
    "no_cache": Param(_to_bool, False, "neither read nor write the cache"),
}

V_PARAM = Param(STR, "2*x^2", "potential, polynomial in x, e.g. '2*x^2' or 'x^4 + 1/2 x^2'", "EXPR")
RES_PARAM = Param(INT, 160, "Gauss-Legendre nodes for the Airy window")

COMMANDS: Dict[str, Dict[str, Param]] = {
    "equilibrium": {
        "V": V_PARAM,
        "c": Param(_optional(FLOAT), None, "pinned right endpoint (constrained measure)"),
        "grid": Param(INT, 101, "number of x points for the density table"),
    },
    "orthopoly": {
        "V": V_PARAM,
        "n": Param(INT, 16, "weight exponent n in e^{-n V}"),
        "K": Param(_optional(INT), None, "highest degree (default n + 1)"),
        "c": Param(_optional(FLOAT), None, "restrict the weight to (-inf, c]"),
    },
    "kernel": {
        "kind": Param(STR, "M", "K (finite-n CD kernel), L (scaled finite-n Janossy kernel) or M (limit)"),
        "V": V_PARAM,
        "n": Param(INT, 32, "matrix size for K and L"),
        "alpha": Param(FLOAT, 0.0, "window edge for L and M"),
        "points": Param(_optional(FLOATS), None, "point grid, e.g. '[0.5, 1, 2]'"),
        "resolution": RES_PARAM,
    },
    "tw": {
        "alpha_min": Param(FLOAT, -6.0, "first alpha"),
        "alpha_max": Param(FLOAT, 3.0, "last alpha"),
        "steps": Param(INT, 19, "number of alpha values"),
        "resolution": RES_PARAM,
        "hm_grid": Param(INT, 160, "Chebyshev points for the Painleve II solve"),
    },
    "order-law": {
        "m": Param(INT, 1, "order: m-th largest eigenvalue (1..6)"),
        "alpha": Param(_optional(FLOAT), None, "single alpha (overrides the range)"),
        "alpha_min": Param(FLOAT, -6.0, "first alpha"),
        "alpha_max": Param(FLOAT, 3.0, "last alpha"),
        "steps": Param(INT, 19, "number of alpha values"),
        "resolution": RES_PARAM,
    },
    "converge": {
        "V": V_PARAM,
        "alpha": Param(FLOAT, 0.0, "window edge"),
        "ns": Param(INTS, [16, 32, 64, 128], "matrix sizes"),
        "x": Param(FLOAT, 2.0, "first kernel argument"),
        "y": Param(FLOAT, 3.0, "second kernel argument"),
        "resolution": RES_PARAM,
    },
    "parametrix-check": {
        "points": Param(INT, 20, "contour points per model"),
    },
    "sample": {
        "n": Param(INT, 200, "matrix size"),
        "draws": Param(INT, 10_000, "number of samples"),
        "seed": Param(_seed, 0, "64-bit unsigned seed"),
        "m": Param(INT, 2, "number of top eigenvalues to record"),
        "ks": Param(_to_bool, True, "compare with the limit laws (KS distance)"),
    },
    "selftest": {
        "only": Param(INTS, [], "criterion numbers to run (default all)"),
    },
}

HELP = {
    "equilibrium": "equilibrium measure: band, density table, c_V, l",
    "orthopoly": "recurrence coefficients of the orthonormal polynomials",
    "kernel": "K_n, scaled L_{n,alpha} or the limit kernel M_alpha on a point grid",
    "tw": "Tracy-Widom table by the Fredholm and Painleve routes",
    "order-law": "limit law of the m-th largest eigenvalue",
    "converge": "finite-n -> limit kernel convergence experiment and fitted slope",
    "parametrix-check": "jump residuals of the Q, P_A, P_B model matrices",
    "sample": "Monte Carlo edge statistics with KS report",
    "selftest": "run the acceptance checks",
}


# ------------------------------------------------------------------ config file

def _parse_scalar(s: str):
    s = s.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        return s[1:-1]
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def _parse_value(s: str):
    s = s.strip()
    if s.startswith("["):
        if not s.endswith("]"):
            raise UsageError(f"unterminated list {s!r}")
        inner = s[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(x) for x in next(csv.reader([inner], skipinitialspace=True))]
    return _parse_scalar(s)


def read_config(path: str) -> Dict[str, Any]:
    """Flat ``key = value`` file; '#' starts a comment; values are strings, numbers or [lists]."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"--config: cannot read {path}: {e.strerror}") from None
    out: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise UsageError(f"{path}:{lineno}: empty key")
        # strip trailing comments outside quotes
        if "#" in value and value.strip()[:1] not in "\"'":
            value = value.split("#", 1)[0]
        out[key] = _parse_value(value)
    return out


# ----------------------------------------------------------------- run config

def resolve_config(command: str, flags: Dict[str, Any], config: Dict[str, Any]) -> Dict[str, Any]:
    spec = {**COMMANDS[command], **PLUMBING}
    unknown = sorted(set(config) - set(spec))
    if unknown:
        raise UsageError(f"config: unknown key(s) for '{command}': {', '.join(unknown)}")
    out = {}
    for key, p in spec.items():
        if flags.get(key) is not None:
            raw, src = flags[key], "--" + key.replace("_", "-")
        elif key in config:
            raw, src = config[key], f"config key '{key}'"
        else:
            out[key] = p.default
            continue
        out[key] = p.conv(raw, src)
    return out


def cache_key(command: str, params: Dict[str, Any]) -> str:
    comp = {k: v for k, v in params.items() if k not in PLUMBING}
    blob = json.dumps({"command": command, "params": comp, "format": CACHE_FORMAT, "version": __version__},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -------------------------------------------------------------- serialization

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue().encode("utf-8")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def to_json(obj) -> bytes:
    return (json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")


def atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ----------------------------------------------------------------------- cache

def cache_root(params: Dict[str, Any]) -> Path:
    if params.get("cache_dir"):
        return Path(params["cache_dir"])
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "janossy"


def cache_lookup(root: Path, key: str) -> Optional[Tuple[bytes, bytes]]:
    """(csv bytes, summary bytes) on a hit; None on a miss. Corrupt entries warn and miss."""
    table, side = root / f"{key}.csv", root / f"{key}.json"
    if not table.exists() and not side.exists():
        return None
    try:
        meta = json.loads(side.read_text(encoding="utf-8"))
        data = table.read_bytes()
        summary = meta["summary"].encode("utf-8")
        if meta.get("key") != key or hashlib.sha256(data).hexdigest() != meta["csv_sha256"] \
                or hashlib.sha256(summary).hexdigest() != meta["summary_sha256"]:
            raise ValueError("checksum mismatch")
    except (OSError, ValueError, KeyError, TypeError, AttributeError) as e:
        warnings.warn(f"corrupt cache entry {key[:12]} ({e}); recomputing", RuntimeWarning, stacklevel=2)
        return None
    return data, summary


def cache_store(root: Path, key: str, command: str, params: Dict[str, Any], data: bytes, summary: bytes) -> None:
    meta = {
        "key": key,
        "command": command,
        "config": {k: v for k, v in params.items() if k not in PLUMBING},
        "csv_sha256": hashlib.sha256(data).hexdigest(),
        "summary_sha256": hashlib.sha256(summary).hexdigest(),
        "summary": summary.decode("utf-8"),
    }
    atomic_write(root / f"{key}.csv", data)
    atomic_write(root / f"{key}.json", to_json(meta))


# ------------------------------------------------------------------- commands

@dataclass
class Result:
    header: List[str]
    rows: List[Sequence]
    summary: Dict[str, Any]
    refs: Dict[str, str]


def _potential(text: str):
    from .polyparse import PotentialSyntaxError, parse_potential
    try:
        return parse_potential(text)
    except PotentialSyntaxError as e:
        raise UsageError(f"--V: cannot parse {text!r}: {e}") from None


def _need(cond: bool, msg: str):
    if not cond:
        raise UsageError(msg)


def cmd_equilibrium(p) -> Result:
    from .equilibrium import density_at, solve_constrained, solve_full_line
    _need(p["grid"] >= 2, "--grid: need at least 2 points")
    V = _potential(p["V"])
    free = solve_full_line(V)
    meas = free if p["c"] is None else solve_constrained(free.potential, p["c"])
    x = np.linspace(meas.left, meas.right, p["grid"])
    psi = density_at(meas, x)
    summary = {
        "band": [meas.left, meas.right],
        "scale": free.scale,
        "band_unscaled": [free.scale * free.left, free.scale * free.right],
        "c_V": free.c_V,
        "beta_V1": free.beta_edge,
        "ell": meas.ell,
        "mass": meas.mass(),
        "constrained": p["c"] is not None,
    }
    if p["c"] is not None:
        summary.update({"c": p["c"], "C": meas.C, "eps": meas.eps})
    refs = {
        "band": "one-cut support [b, a] from the moment conditions, normalized to a = 1",
        "psi": "equilibrium density psi_V = (1/2pi) sqrt((a-x)(x-b)) h_V(x)"
               if p["c"] is None else "constrained density sqrt(x-b)/sqrt(c-x) q(x)/(2pi)",
        "c_V": "edge constant (pi beta_V(1))^{2/3}",
        "ell": "Euler-Lagrange constant: g+ + g- - V - l = 0 on the band",
    }
    return Result(["x", "psi"], list(zip(x, psi)), summary, refs)


def cmd_orthopoly(p) -> Result:
    from .equilibrium import solve_full_line
    from .orthopoly import WeightSpec, build_recurrence
    _need(p["n"] >= 1, "--n: must be >= 1")
    K = p["K"] if p["K"] is not None else p["n"] + 1
    _need(K >= 1, "--K: must be >= 1")
    meas = solve_full_line(_potential(p["V"]))
    T = build_recurrence(WeightSpec(meas.potential, p["n"], p["c"]), K)
    rows = [(k, T.alpha[k], T.beta[k], T.log_h[k]) for k in range(T.alpha.size)]
    summary = {"n": p["n"], "K": T.K, "mu0": T.beta[0], "scale": meas.scale}
    refs = {"alpha,beta": "three-term recurrence x p_k = b_{k+1} p_{k+1} + alpha_k p_k + b_k p_{k-1}, beta_k = b_k^2",
            "log_h": "log squared norm of the monic polynomial; beta_0 is the total mass"}
    return Result(["k", "alpha", "beta", "log_h"], rows, summary, refs)


def cmd_kernel(p) -> Result:
    from . import edge_laws as el
    kind = p["kind"].upper()
    _need(kind in ("K", "L", "M"), "--kind: expected K, L or M")
    a = p["alpha"]
    pts = p["points"]
    if kind == "K":
        from .equilibrium import solve_full_line
        from .orthopoly import WeightSpec, build_recurrence, cd_kernel
        pts = pts if pts is not None else list(np.linspace(-1.0, 1.0, 5))
        meas = solve_full_line(_potential(p["V"]))
        T = build_recurrence(WeightSpec(meas.potential, p["n"]), p["n"] + 1)

        def f(x, y):
            return cd_kernel(T, p["n"], x, y)
        ref = "Christoffel-Darboux kernel K_n(x, y) of the normalized weight e^{-n V}"
    else:
        pts = pts if pts is not None else [a + d for d in (0.25, 0.5, 1.0, 2.0, 3.0)]
        _need(min(pts) >= a, "--points: all points must be >= alpha")
        if kind == "L":
            V = _potential(p["V"])

            def f(x, y):
                return el.finite_n_scaled_kernel(V, p["n"], a, x, y)
            ref = "Janossy kernel L = K(1-K)^{-1} on [c, inf), c = 1 + alpha/(c_V n^{2/3}), in edge units"
        else:
            M = el.limit_kernel(a, p["resolution"])

            def f(x, y):
                return M(x, y)
            ref = "limit Janossy kernel M_alpha: resolvent of the Airy operator on [alpha, inf)"
    rows = [(x, y, float(f(x, y))) for x in pts for y in pts]
    return Result(["x", "y", "value"], rows, {"kind": kind, "alpha": a, "points": len(pts)}, {"value": ref})


def _alphas(p):
    if p.get("alpha") is not None:
        return [p["alpha"]]
    _need(p["steps"] >= 1, "--steps: must be >= 1")
    _need(p["alpha_max"] >= p["alpha_min"], "--alpha-max: must be >= --alpha-min")
    return list(np.linspace(p["alpha_min"], p["alpha_max"], p["steps"]))


def cmd_tw(p) -> Result:
    from . import edge_laws as el
    alphas = _alphas(p)
    hm = el.hastings_mcleod(grid_size=p["hm_grid"])
    rows = []
    for a in alphas:
        F1 = el.tw_fredholm(a, p["resolution"])
        F2 = el.tw_painleve(a, hm)
        rows.append((a, F1, F2, abs(F1 - F2)))
    summary = {"max_abs_diff": max(r[3] for r in rows), "rows": len(rows), "hm_residual": hm.residual()}
    refs = {"F_fredholm": "det(1 - K_Airy) on [alpha, inf), Nystrom discretization",
            "F_painleve": "exp(-int_alpha^inf (s - alpha) u(s)^2 ds), u the Hastings-McLeod solution"}
    return Result(["alpha", "F_fredholm", "F_painleve", "abs_diff"], rows, summary, refs)


def cmd_order_law(p) -> Result:
    from . import edge_laws as el
    _need(1 <= p["m"] <= 6, "--m: must be in 1..6")
    rows = []
    for a in _alphas(p):
        ra, rb = el.mth_law_limit(p["m"], a, p["resolution"], both=True)
        rows.append((a, p["m"], ra, rb, abs(ra - rb)))
    summary = {"m": p["m"], "max_route_diff": max(r[4] for r in rows), "rows": len(rows)}
    refs = {"F_route_a": "F_TW(alpha) * sum_{j<m} (1/j!) int det[M_alpha] (Janossy sum)",
            "F_route_b": "sum_{j<m} P(exactly j points in [alpha, inf)) of the Airy process"}
    return Result(["alpha", "m", "F_route_a", "F_route_b", "abs_diff"], rows, summary, refs)


def cmd_converge(p) -> Result:
    from . import edge_laws as el
    _need(len(p["ns"]) >= 2 and min(p["ns"]) >= 2, "--ns: need at least two sizes >= 2")
    _need(min(p["x"], p["y"]) >= p["alpha"], "--x/--y: must be >= alpha")
    V = _potential(p["V"])
    fit = el.convergence_rate(V, p["alpha"], p["ns"], point=(p["x"], p["y"]), m=p["resolution"])
    lim = float(el.limit_kernel(p["alpha"], p["resolution"])(p["x"], p["y"]))
    rows = [(int(n), float(el.finite_n_scaled_kernel(V, int(n), p["alpha"], p["x"], p["y"])), lim, e)
            for n, e in zip(fit.ns, fit.errors)]
    summary = {"slope": fit.slope, "noise_floor": fit.noise_floor, "limit": lim, "expected_slope": -2.0 / 3.0}
    refs = {"finite_n": "scaled finite-n Janossy kernel at (x, y)", "limit": "M_alpha(x, y)",
            "slope": "least-squares slope of log|error| vs log n (rate n^{-2/3})"}
    return Result(["n", "finite_n", "limit", "abs_err"], rows, summary, refs)


def cmd_parametrix(p) -> Result:
    from .selftest import contour_points, parametrix_report
    from .specfun import contour_of
    _need(p["points"] >= 1, "--points: must be >= 1")
    rows_raw, det_spread, asym = parametrix_report(p["points"])
    rows = [(m, contour_of(z), z.real, z.imag, r) for m, z, r in rows_raw]
    worst = {m: max(r for mm, _, _, _, r in rows if mm == m) for m in ("Q", "PA", "PB")}
    summary = {"max_residual": worst, "det_Q_spread": det_spread, "PB_asymptotic_deviation": asym}
    refs = {"Q": "Bessel model matrix (I0, K0 / Hankel H0 sectors), det Q = 2",
            "PA": "Airy model matrix P_A", "PB": "P_B = N sqrt(2pi) Q e^{-zeta^{1/2} sigma3}",
            "PB_asymptotic_deviation": "max |A(zeta)^{-1} P_B(zeta) - I| at zeta = 100"}
    return Result(["model", "contour", "zeta_re", "zeta_im", "residual"], rows, summary, refs)


def cmd_sample(p) -> Result:
    from .equilibrium import gue_potential, solve_full_line
    from .sampler import EmpiricalLaw, edge_statistics, ks_distance
    _need(p["n"] >= 1, "--n: must be >= 1")
    _need(p["draws"] >= 1, "--draws: must be >= 1")
    _need(1 <= p["m"] <= min(6, p["n"]), "--m: must be in 1..min(6, n)")
    c_V = solve_full_line(gue_potential()).c_V
    stats = edge_statistics(p["n"], p["draws"], p["seed"], p["m"], c_V)
    rows = [(i, *s) for i, s in enumerate(stats)]
    summary: Dict[str, Any] = {"c_V": c_V, "mean": stats.mean(axis=0), "var": stats.var(axis=0)}
    if p["ks"]:
        from .edge_laws import order_law_cdf
        summary["ks"] = [ks_distance(EmpiricalLaw(stats[:, j]), order_law_cdf(j + 1)) for j in range(p["m"])]
    refs = {"lambda_j": "c_V n^{2/3} (lambda_j - 1), j-th largest eigenvalue, weight e^{-2n x^2}",
            "ks": "Kolmogorov-Smirnov distance to the limit law of the j-th largest eigenvalue"}
    return Result(["draw"] + [f"lambda_{j + 1}" for j in range(p["m"])], rows, summary, refs)


RUNNERS = {
    "equilibrium": cmd_equilibrium, "orthopoly": cmd_orthopoly, "kernel": cmd_kernel, "tw": cmd_tw,
    "order-law": cmd_order_law, "converge": cmd_converge, "parametrix-check": cmd_parametrix,
    "sample": cmd_sample,
}
STDOUT_JSON = {"equilibrium"}


def run_selftest(p, out) -> int:
    from .selftest import CHECKS
    wanted = p["only"] or sorted(CHECKS)
    bad = [k for k in wanted if k not in CHECKS]
    if bad:
        raise UsageError(f"--only: unknown criterion {bad[0]}")
    results = []
    for k in wanted:
        r = CHECKS[k]()
        results.append(r)
        print(r.line(), file=out, flush=True)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed", file=out)
    if p["out"]:
        atomic_write(Path(p["out"]), to_csv(["criterion", "passed", "seconds", "detail"],
                                            [(r.number, r.passed, r.seconds, r.detail) for r in results]))
    return 0 if not failed else 1


# ---------------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="janossy", description="Janossy kernels and edge eigenvalue laws.")
    ap.add_argument("--version", action="version", version=f"janossy {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, params in COMMANDS.items():
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name])
        sp.add_argument("--config", metavar="FILE", help="key = value config file")
        for key, prm in {**params, **PLUMBING}.items():
            flag = "--" + key.replace("_", "-")
            if prm.conv is _to_bool:
                sp.add_argument(flag, dest=key, nargs="?", const="true", default=None, metavar="BOOL",
                                help=f"{prm.help} (default {prm.default})")
            else:
                sp.add_argument(flag, dest=key, default=None, metavar=prm.metavar or key.upper().replace("-", "_"),
                                help=f"{prm.help} (default {prm.default})")
        if name not in ("selftest",):
            sp.add_argument("--format", choices=("csv", "json"), default=None,
                            help="what to print on stdout when --out is absent")
    return ap


def execute(command: str, p: Dict[str, Any], fmt_choice: Optional[str], out) -> int:
    if command == "selftest":
        return run_selftest(p, out)
    use_cache = not p["no_cache"]
    key = cache_key(command, p)
    hit = None
    if use_cache:
        root = cache_root(p)
        hit = cache_lookup(root, key)
    if hit is not None:
        data, summary = hit
    else:
        res = RUNNERS[command](p)
        data = to_csv(res.header, res.rows)
        comp = {k: v for k, v in p.items() if k not in PLUMBING}
        summary = to_json({"command": command, "config": comp, "summary": res.summary,
                           "formula_ref": res.refs, "columns": res.header})
        if use_cache:
            try:
                cache_store(root, key, command, p, data, summary)
            except OSError as e:
                warnings.warn(f"cache not written: {e}", RuntimeWarning, stacklevel=2)
    if p["out"]:
        atomic_write(Path(p["out"]), data)
    if p["json"] and p["json"] != "-":
        atomic_write(Path(p["json"]), summary)
    stdout_json = (fmt_choice or ("json" if command in STDOUT_JSON else "csv")) == "json"
    if p["json"] == "-" or (not p["out"] and stdout_json):
        out.write(summary.decode("utf-8"))
    elif not p["out"]:
        out.write(data.decode("utf-8"))
    out.flush()
    return 0


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
        if not ns.command:
            raise UsageError("a subcommand is required (try --help)")
        params = COMMANDS[ns.command]
        flags = {k: getattr(ns, k) for k in {**params, **PLUMBING}}
        config = read_config(ns.config) if ns.config else {}
        p = resolve_config(ns.command, flags, config)
        with warnings.catch_warnings():
            warnings.simplefilter("always", RuntimeWarning)
            warnings.showwarning = _show_warning
            return execute(ns.command, p, getattr(ns, "format", None), out)
    except UsageError as e:
        print(f"janossy: usage error: {e}", file=sys.stderr)
        return 2
    except JanossyError as e:
        print(f"janossy: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"janossy: warning: {message}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
