"""Command-line driver: ``relaxwave <subcommand> [options]``.

Exit codes: 0 success, 2 validation error, 1 internal error. Results are
computed in memory and written only after every check has passed, so a failed
run leaves no partial files. Wall-clock timing goes to stderr to keep the
output files byte-identical across runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, classify, hirota, medium, sampler, simulator, soliton
from .errors import ValidationError

THREADS_ENV = "RELAXWAVE_THREADS"
EXACT, HOLDS_AT_ZERO, DISCREPANT = "exact", "holds-at-α̃=0", "discrepant"


# -- parsing helpers ----------------------------------------------------------

def parse_number(text):
    """Float parser that also accepts a comma as the decimal mark ("1,5")."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip()
    if s.count(",") == 1 and "." not in s:
        s = s.replace(",", ".")
    try:
        val = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return val


def parse_seed(text):
    try:
        seed = int(str(text), 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def worker_count():
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_output(text, path):
    """Write ``text`` to ``path`` atomically, or to stdout when ``path`` is None."""
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".relaxwave-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- shared parameter handling ------------------------------------------------

def _velocities(args):
    if args.v1 is not None or args.v2 is not None:
        if args.v1 is None or args.v2 is None:
            raise ValidationError("give both --v1 and --v2")
        if args.v is not None and abs(args.v - (args.v1 + args.v2)) > 1e-15 * max(1.0, abs(args.v)):
            raise ValidationError("--v conflicts with --v1 + --v2")
        return args.v1, args.v2
    if args.v is None:
        raise ValidationError("need --v or (--v1, --v2)")
    return 0.5 * args.v, 0.5 * args.v


def _medium_given(args):
    return any(getattr(args, k, None) is not None for k in ("tau", "ve", "vf"))


def _medium(args):
    return medium.MediumParams(tau=args.tau, v_e=args.ve, v_f=args.vf,
                               alpha_f=args.alpha_f or 0.0, a_f=args.a_f or 0.0)


def _alpha(args, required=True):
    """``alpha~`` from ``--alpha`` or from medium parameters, never both."""
    if _medium_given(args):
        if args.alpha is not None:
            raise ValidationError("--alpha and medium parameters are mutually exclusive")
        if None in (args.tau, args.ve, args.vf):
            raise ValidationError("medium parameters need --tau, --ve and --vf")
        case = getattr(args, "case", None) or medium.QUAD_FREE
        if case not in medium.CASES:
            case = medium.QUAD_FREE
        return medium.build_scaling(_medium(args), case).alpha_tilde
    if args.alpha is None:
        if required:
            raise ValidationError("need --alpha (or medium parameters --tau --ve --vf)")
        return 0.0
    if not math.isfinite(args.alpha) or args.alpha < 0:
        raise ValidationError(f"need finite alpha~ >= 0, got {args.alpha!r}")
    return args.alpha


def _config_echo(args):
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _envelope(args, result):
    return {"metadata": {"version": __version__, "config": _config_echo(args)}, "result": result}


# -- subcommands --------------------------------------------------------------

def cmd_coeffs(args):
    m = _medium(args)
    rep = medium.coefficients_report(m)
    rep["echo"] = {"tau": args.tau, "v_e": args.ve, "v_f": args.vf}
    return dumps(_envelope(args, rep))


def cmd_dispersion(args):
    alpha = _alpha(args)
    v1, v2 = _velocities(args)
    v = v1 + v2
    if args.rotating or args.zeta is not None:
        if args.zeta is None:
            raise ValidationError("rotating dispersion needs --zeta")
        rp = soliton.rotating_parameters(alpha, args.zeta, v)
        res = soliton.solve_complex_dispersion(alpha, args.zeta, v1, v2)
        out = {
            "closed_form": {"K_r": rp.K_r, "Omega": rp.Omega if rp.omega_is_real else None,
                            "omega_is_real": rp.omega_is_real, "omega_imag": rp.omega_imag},
            "roots": [{"K": b.K, "omega1": b.omega1, "omega2": b.omega2, "Omega": b.Omega,
                       "residual": b.residual} for b in res.branches],
            "found": res.found,
            "comparison": soliton.rotating_comparison(alpha, args.zeta, v1, v2),
        }
    else:
        s = soliton.SolitonReal.from_velocities(alpha, v1, v2, branch=args.branch)
        out = {"K": s.K, "omega1": s.omega1, "omega2": s.omega2, "omega": s.omega,
               "alpha_tilde": alpha, "v": v, "min_slope": 1.0 + 2.0 * s.K**2 * v}
    return dumps(_envelope(args, out))


def cmd_classify(args):
    alpha = _alpha(args)
    if args.v is None:
        raise ValidationError("need --v")
    rep = classify.classification_report(alpha, args.v, zeta=args.zeta, rotating=args.rotating)
    if args.format == "csv":
        th = rep.pop("thresholds")
        rep.update({f"threshold_{k}": v for k, v in th.items()})
        return _csv_rows([rep])
    return dumps(_envelope(args, rep))


def _soliton_from_args(args):
    if getattr(args, "case", None) == medium.MIXED:
        raise ValidationError("no one-soliton is available for the mixed case: the exponential ansatz "
                              "does not close its bilinear form")
    alpha = _alpha(args)
    v1, v2 = _velocities(args)
    if args.zeta is not None:
        return soliton.SolitonComplex.from_rotating(alpha, args.zeta, v1, v2)
    return soliton.SolitonReal.from_velocities(alpha, v1, v2)


def cmd_render(args):
    s = _soliton_from_args(args)
    if args.n < 16:
        raise ValidationError("render needs --n >= 16")
    c = sampler.sample_section(s, t_tilde=args.t_tilde, window=(args.theta_min, args.theta_max), n=args.n)
    if not c.is_complex:
        feats = sampler.detect_features(c)
        sys.stderr.write(f"features: kind={feats['kind']} vertical_tangents={len(feats['vertical_tangents'])} "
                         f"self_intersections={len(feats['self_intersections'])}\n")
    if args.format == "json":
        doc = json.loads(sampler.curve_to_json(c))
        return dumps(_envelope(args, doc))
    return sampler.curve_to_csv(c)


def cmd_invert(args):
    s = _soliton_from_args(args)
    if isinstance(s, soliton.SolitonComplex):
        raise ValidationError("inversion is defined for real solitons only")
    y = args.x if args.y is None else args.y
    branches = sampler.invert_section(s, args.x, y, args.t_tilde)
    if args.format == "csv":
        return _csv_rows(branches, ("theta", "T", "u", "residual"))
    return dumps(_envelope(args, {"branches": branches, "u": [b["u"] for b in branches]}))


def _csv_rows(rows, names=None):
    if names is None:
        names = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        w.writerow([("%.17g" % r[k]) if isinstance(r[k], float) else r[k] for k in names])
    return buf.getvalue()


def _bilinear_case(args_tuple):
    alpha, v1, v2, theta0 = args_tuple
    K = soliton.solve_dispersion(alpha, v1 + v2)
    w1, w2 = K * v1, K * v2
    G, F = hirota.one_soliton_pair(K, w1, w2, theta0)
    first, second = hirota.bilinear_residual_quadratic(G, F, alpha)
    lv = hirota.numeric_levels(first, K, w1, w2) if not first.is_zero() else {}
    predicted = 2 * alpha * (w1 + w2) * 4 * K * math.exp(3 * theta0)
    got = complex(lv.get(3, 0.0))
    others = max((abs(c) for k, c in lv.items() if k != 3), default=0.0)
    scale = max(abs(predicted), 4 * K * math.exp(3 * theta0), 1e-300)
    return {
        "second_terms": len(second.terms),
        "first_terms": len(first.terms),
        "first_level3_rel_err": abs(got - predicted) / scale,
        "first_other_levels": others / scale,
    }


def cmd_verify(args):
    alpha = _alpha(args, required=False)
    v = args.v if args.v is not None else -0.24
    if v >= 0:
        raise ValidationError(f"need v < 0, got {v!r}")
    if args.samples < 1:
        raise ValidationError("need --samples >= 1")
    workers = worker_count()
    rng = np.random.default_rng(args.seed)
    draws = []
    for _ in range(args.samples):
        frac = rng.uniform(0.1, 0.9)
        draws.append((alpha, frac * v, (1 - frac) * v, float(rng.uniform(-1.0, 1.0))))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(_bilinear_case, draws))

    claims = []
    sec = max(r["second_terms"] for r in results)
    claims.append({"claim": "bilinear second member vanishes for the one-soliton pair",
                   "measured": sec, "verdict": EXACT if sec == 0 else DISCREPANT})
    first_terms = max(r["first_terms"] for r in results)
    lvl3 = max(r["first_level3_rel_err"] for r in results)
    other = max(r["first_other_levels"] for r in results)
    if alpha == 0:
        verdict = EXACT if first_terms == 0 else DISCREPANT
        measured = first_terms
    else:
        ok = lvl3 <= 1e-12 and other <= 1e-12
        verdict = HOLDS_AT_ZERO if ok else DISCREPANT
        measured = {"terms": first_terms, "level3_rel_err_vs_2a(w1+w2)4K": lvl3, "other_levels": other}
    claims.append({"claim": "bilinear first member vanishes under the dispersion relation",
                   "measured": measured, "verdict": verdict})

    disp = 0.0
    for a, v1, v2, _ in draws:
        K = soliton.solve_dispersion(a, v1 + v2)
        disp = max(disp, abs(K**2 + a * K + 1.0 / (v1 + v2)) / max(1.0, K**2))
    claims.append({"claim": "K^2 + alpha~ K = 1/|v| on the positive branch", "measured": disp,
                   "verdict": EXACT if disp < 1e-12 else DISCREPANT})

    s = soliton.SolitonReal.from_velocities(alpha, 0.5 * v, 0.5 * v)
    thetas = np.linspace(-8.0, 8.0, 161)
    rows = soliton.residual_scan(s, thetas)
    res = float(np.max(np.abs(rows[:, 2])))
    match = float(np.max(np.abs(rows[:, 2] - rows[:, 3])))
    if alpha == 0:
        verdict = EXACT if res < 1e-12 else DISCREPANT
    else:
        verdict = HOLDS_AT_ZERO if match < 1e-10 else DISCREPANT
    claims.append({"claim": "transformed equation satisfied by 2K sech(theta)",
                   "measured": {"max_residual": res, "max_closed_form_mismatch": match},
                   "verdict": verdict})

    out = {"alpha_tilde": alpha, "v": v, "samples": args.samples, "seed": args.seed, "claims": claims}
    if args.zeta is not None:
        table = soliton.rotating_comparison(alpha, args.zeta, 0.5 * v, 0.5 * v)
        best = min((abs(r["delta_K_r"]) for r in table), default=None)
        close = [r for r in table if abs(r["delta_K_r"]) < 1e-9]
        ok = bool(close) and all(r["delta_Omega"] is not None and abs(r["delta_Omega"]) < 1e-9 for r in close)
        claims.append({"claim": "closed-form rotating K^r and Omega solve the complex dispersion relation",
                       "measured": {"min_abs_delta_K_r": best},
                       "verdict": EXACT if ok else DISCREPANT})
        out["rotating_table"] = table
    return dumps(_envelope(args, out))


def _read_init_file(path, transformed):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    want = ("T", "W", "Phi") if transformed else ("s", "u")
    if tuple(header[: len(want)]) != want:
        raise ValidationError(f"init file must start with columns {','.join(want)}")
    data = np.array([[parse_number(x) for x in r[: len(want)]] for r in body])
    coords = data[:, 0]
    n = len(coords)
    if n < 2:
        raise ValidationError("init file needs at least two rows")
    L = float(coords[1] - coords[0]) * n
    return n, L, data[:, 1], (data[:, 2] if transformed else None)


def _physical_soliton_profile(args, n, L, alpha):
    v = args.v if args.v is not None else -0.24
    pc = classify.classify_static(alpha, v)
    if pc.kind == classify.LOOP:
        raise ValidationError(
            f"alpha~={alpha!r}, v={v!r} is in the loop regime: the physical-frame field is multivalued. "
            "Use --case transformed to march it in the transformed frame.")
    s = soliton.SolitonReal.from_velocities(alpha, 0.5 * v, 0.5 * v)
    grid = simulator.grid_coords(n, L)
    u = np.array([sampler.invert_map(s, x, x, 0.0)[0] for x in grid])
    return u - u.mean(), {"v": v, "K": s.K, "removed_mean": float(u.mean())}


def _snapshot_csv(snaps, transformed):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time", "T", "W", "Phi"] if transformed else ["time", "s", "u"])
    for g in snaps:
        x = g.coords
        if transformed:
            for a, b, c in zip(x, g.values, g.aux):
                w.writerow(["%.17g" % g.time, "%.17g" % a, "%.17g" % b, "%.17g" % c])
        else:
            for a, b in zip(x, g.values):
                w.writerow(["%.17g" % g.time, "%.17g" % a, "%.17g" % b])
    return buf.getvalue()


def cmd_simulate(args):
    case = args.case
    transformed = case == simulator.TRANSFORMED
    if case not in (medium.QUAD_FREE, medium.MIXED, simulator.TRANSFORMED):
        raise ValidationError(f"unknown case {case!r}")
    alpha = args.alpha_tilde if args.alpha_tilde is not None else 0.0
    if not math.isfinite(alpha) or alpha < 0:
        raise ValidationError(f"need alpha~ >= 0, got {alpha!r}")
    if args.steps < 0 or args.dt <= 0:
        raise ValidationError("need --steps >= 0 and --dt > 0")
    extra = {}
    if args.init == "file":
        if not args.init_file:
            raise ValidationError("--init file needs --init-file PATH")
        n, L, vals, aux = _read_init_file(args.init_file, transformed)
    else:
        n, L = args.n, args.L
        if not (L > 0 and math.isfinite(L)):
            raise ValidationError("need --L > 0")
        aux = None
        if args.init == "zero":
            vals = np.zeros(n)
            aux = np.zeros(n) if transformed else None
        elif transformed:
            v = args.v if args.v is not None else -2.0
            K = soliton.solve_dispersion(alpha, v)
            g0 = simulator.soliton_grid(K, K * v, n=n, L=L, theta0=args.theta0, alpha_tilde=alpha)
            vals, aux = g0.values, g0.aux
            extra = {"v": v, "K": K, "omega": K * v}
        else:
            vals, extra = _physical_soliton_profile(args, n, L, alpha)
    g = simulator.WaveGrid(n=n, L=L, values=vals, aux=aux, case_tag=case, alpha_tilde=alpha)
    if transformed and g.aux is None:
        raise ValidationError("transformed case needs Phi")

    snaps = [g.copy()]
    every = args.snap_every or 0
    if transformed:
        final = simulator.evolve_transformed(g, args.dt, args.steps, on_snapshot=lambda i, s: snaps.append(s),
                                             snap_every=every)
    else:
        final = simulator.evolve_physical(g, args.dt, args.steps, case_tag=case,
                                          on_snapshot=lambda i, s: snaps.append(s), snap_every=every)
        # the integrator starts from the band-limited projection
        snaps[0] = simulator.WaveGrid(n=n, L=L, values=simulator.project(g.values), case_tag=case,
                                      alpha_tilde=alpha)
    if not snaps or snaps[-1].time != final.time:
        snaps.append(final)

    inv = {"mean_initial": float(snaps[0].values.mean()), "mean_final": float(final.values.mean())}
    if transformed:
        if args.init == "soliton":
            exact = 2 * extra["K"] / np.cosh(extra["K"] * final.time - 0.5 * extra["omega"] * final.coords
                                             + args.theta0)
            inv["transport_linf_error"] = float(np.max(np.abs(final.values - exact)))
    else:
        e0, e1 = simulator.energy(snaps[0]), simulator.energy(final)
        expected = e0 * math.exp(-2 * alpha * final.time)
        inv.update({"energy_initial": e0, "energy_final": e1, "energy_expected": expected,
                    "energy_rel_dev": abs(e1 - expected) / expected if expected > 0 else abs(e1)})
    meta = {"version": __version__, "config": _config_echo(args), "n": n, "L": L, "init": extra,
            "invariants": inv, "final_time": final.time}
    if args.format == "json":
        doc = {"metadata": meta, "snapshots": [
            {"time": s.time, "values": s.values, **({"aux": s.aux} if transformed else {})} for s in snaps]}
        return dumps(doc)
    text = _snapshot_csv(snaps, transformed)
    if args.out is not None:
        meta_path = args.meta or args.out + ".meta.json"
        return text, (meta_path, dumps(meta))
    if args.meta:
        return text, (args.meta, dumps(meta))
    sys.stderr.write(dumps({"invariants": inv}))
    return text


# -- parser -------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values (flags override)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=parse_seed)

    ap = argparse.ArgumentParser(prog="relaxwave", parents=[common],
                                 description="Soliton analysis and simulation for relaxing-medium waves.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    ap.subparsers = sub
    num = parse_number

    def medium_flags(p):
        p.add_argument("--tau", type=num)
        p.add_argument("--ve", type=num)
        p.add_argument("--vf", type=num)
        p.add_argument("--alpha-f", dest="alpha_f", type=num)
        p.add_argument("--a-f", dest="a_f", type=num)

    def soliton_flags(p):
        p.add_argument("--alpha", "--alpha-tilde", dest="alpha", type=num)
        p.add_argument("--v", type=num)
        p.add_argument("--v1", type=num)
        p.add_argument("--v2", type=num)
        p.add_argument("--zeta", type=num)
        medium_flags(p)

    p = sub.add_parser("coeffs", parents=[common], help="medium coefficients and scaling maps")
    medium_flags(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("dispersion", parents=[common], help="solve the dispersion relation")
    soliton_flags(p)
    p.add_argument("--rotating", action="store_true")
    p.add_argument("--branch", choices=(soliton.POSITIVE, soliton.NEGATIVE), default=soliton.POSITIVE)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("classify", parents=[common], help="loop / cusp / hump classification")
    soliton_flags(p)
    p.add_argument("--rotating", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("render", parents=[common], help="sample a physical-frame section as CSV")
    soliton_flags(p)
    p.add_argument("--case", choices=medium.CASES, default=medium.QUAD_FREE)
    p.add_argument("--t-tilde", dest="t_tilde", type=num, default=0.0)
    p.add_argument("--n", type=int, default=2001)
    p.add_argument("--theta-min", dest="theta_min", type=num, default=sampler.DEFAULT_WINDOW[0])
    p.add_argument("--theta-max", dest="theta_max", type=num, default=sampler.DEFAULT_WINDOW[1])
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("invert", parents=[common], help="all u values through a physical point")
    soliton_flags(p)
    p.add_argument("--case", choices=medium.CASES, default=medium.QUAD_FREE)
    p.add_argument("--x", type=num, required=False)
    p.add_argument("--y", type=num)
    p.add_argument("--t-tilde", dest="t_tilde", type=num, default=0.0)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("verify", parents=[common], help="bilinear and residual claims report")
    soliton_flags(p)
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="run a pseudo-spectral simulator")
    p.add_argument("--case", choices=(medium.QUAD_FREE, medium.MIXED, simulator.TRANSFORMED),
                   default=medium.QUAD_FREE)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--L", type=num, default=80.0)
    p.add_argument("--dt", type=num, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--alpha-tilde", "--alpha", dest="alpha_tilde", type=num)
    p.add_argument("--v", type=num)
    p.add_argument("--theta0", type=num, default=0.0)
    p.add_argument("--init", choices=("soliton", "file", "zero"), default="soliton")
    p.add_argument("--init-file", dest="init_file")
    p.add_argument("--snap-every", dest="snap_every", type=int, default=0)
    p.add_argument("--meta", help="metadata JSON path (default <out>.meta.json)")
    p.set_defaults(func=cmd_simulate)
    return ap


_DEFAULT_FORMAT = {"render": "csv", "simulate": "csv"}


_STRING_KEYS = {"format", "out", "init", "init_file", "case", "meta", "branch"}


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    return cfg


def _config_defaults(cfg, sub, command):
    """Map config keys onto parser destinations; explicit flags still win."""
    dests = {a.dest for a in sub._actions}
    out = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("command", "func", "config"):
            continue
        if dest not in dests:
            raise ValidationError(f"unknown config key {key!r} for {command}")
        if isinstance(val, str) and dest not in _STRING_KEYS:
            try:
                val = parse_number(val) if dest != "seed" else parse_seed(val)
            except argparse.ArgumentTypeError as exc:
                raise ValidationError(str(exc)) from None
        out[dest] = val
    return out


_JSON_ONLY = {"coeffs", "dispersion", "verify"}


def main(argv=None):
    parser = build_parser()
    t0 = time.perf_counter()
    try:
        try:
            args = parser.parse_args(argv)
            if args.config:
                cfg = _load_config(args.config)
                sub = parser.subparsers.choices[args.command]
                sub.set_defaults(**_config_defaults(cfg, sub, args.command))
                args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if args.format is None:
            args.format = _DEFAULT_FORMAT.get(args.command, "json")
        if args.command in _JSON_ONLY and args.format != "json":
            raise ValidationError(f"{args.command} emits JSON only")
        produced = args.func(args)
        side = None
        if isinstance(produced, tuple):
            produced, side = produced
        write_output(produced, args.out)
        if side is not None:
            write_output(side[1], side[0])
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 1
    sys.stderr.write(f"elapsed: {time.perf_counter() - t0:.3f} s\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
