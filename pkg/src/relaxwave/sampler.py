"""Physical-frame sections of the one-soliton, with geometric feature detection.

A section fixes ``t~ = X`` and walks ``(T1, T2) = (d1, d2) T`` for a scalar
parameter ``T``. The default direction ``(1, 1)`` is the symmetric section,
where the slope of ``T -> x~`` is ``1 + 2K^2 v sech^2(theta)``; a negative
minimum means the curve ``(x~, u)`` folds over itself (loop), a zero minimum
gives a single vertical tangent (cusp).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import classify
from .errors import ConvergenceError, UnderResolvedError, ValidationError
from .soliton import FramePoint, SolitonComplex, SolitonReal, eval_Q, eval_U

REAL_COLUMNS = ("param", "theta", "x_tilde", "y_tilde", "u", "slope")
COMPLEX_COLUMNS = ("param", "theta", "x_tilde", "y_tilde", "u", "q_re", "q_im", "slope")
DEFAULT_WINDOW = (-10.0, 10.0)


@dataclass
class ParametricCurve:
    t_tilde: float
    direction: tuple
    param: np.ndarray
    theta: np.ndarray
    x_tilde: np.ndarray
    y_tilde: np.ndarray
    u: np.ndarray
    slope: np.ndarray
    q_re: np.ndarray | None = None
    q_im: np.ndarray | None = None
    features: dict | None = None
    # closed-form evaluators of the section, absent on re-imported curves
    point_fn: object = field(default=None, repr=False, compare=False)
    slope_fn: object = field(default=None, repr=False, compare=False)

    @property
    def is_complex(self):
        return self.q_re is not None

    @property
    def n(self):
        return len(self.param)

    def columns(self):
        names = COMPLEX_COLUMNS if self.is_complex else REAL_COLUMNS
        return names, [getattr(self, n) for n in names]


def _section_terms(s, direction):
    d1, d2 = direction
    if isinstance(s, SolitonComplex):
        Kr = s.K.real
        wd = s.omega1.real * d1 + s.omega2.real * d2
        X_coef, th0 = Kr, s.theta0.real
    else:
        Kr = s.K
        wd = s.omega1 * d1 + s.omega2 * d2
        X_coef, th0 = s.K, s.theta0
    if wd == 0:
        raise ValidationError("section direction is parallel to the phase fronts")
    return Kr, wd, X_coef, th0


def sample_section(s, t_tilde=0.0, window=DEFAULT_WINDOW, n=2001, direction=(1.0, 1.0)) -> ParametricCurve:
    """Sample the section at ``X = t~`` over the phase window ``window``.

    ``window`` bounds ``theta`` (or ``theta^r``); samples are uniform in the
    section parameter and ordered increasingly.
    """
    if n < 16:
        raise ValidationError(f"need at least 16 samples, got {n}")
    lo, hi = window
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ValidationError(f"degenerate window {window!r}")
    d1, d2 = direction
    Kr, wd, X_coef, th0 = _section_terms(s, direction)
    base = X_coef * t_tilde + th0
    ends = sorted(((base - lo) / wd, (base - hi) / wd))
    T = np.linspace(ends[0], ends[1], n)

    def point(T):
        p = FramePoint(d1 * np.asarray(T), d2 * np.asarray(T), t_tilde)
        if isinstance(s, SolitonComplex):
            qr, qi, z1, z2 = eval_Q(s, p)
            th = base - wd * np.asarray(T)
            return th, z1 + s.x0_tilde, z2 + s.y0_tilde, np.hypot(qr, qi), qr, qi
        u, z1, z2 = eval_U(s, p)
        th = base - wd * np.asarray(T)
        return th, z1 + s.x0_tilde, z2 + s.y0_tilde, u, None, None

    def slope(T):
        th = base - wd * np.asarray(T)
        return d1 + 2.0 * Kr * wd / np.cosh(th) ** 2

    th, x, y, u, qr, qi = point(T)
    return ParametricCurve(t_tilde=float(t_tilde), direction=(float(d1), float(d2)), param=T, theta=th,
                           x_tilde=x, y_tilde=y, u=u, slope=slope(T), q_re=qr, q_im=qi,
                           point_fn=point, slope_fn=slope)


# -- feature detection --------------------------------------------------------

def _slope_callable(c):
    if c.slope_fn is not None:
        return lambda p: float(c.slope_fn(p))
    return lambda p: float(np.interp(p, c.param, c.slope))


def _xu_callable(c):
    if c.point_fn is not None:
        def f(p):
            th, x, y, u, *_ = c.point_fn(p)
            return float(x), float(u)
        return f
    return lambda p: (float(np.interp(p, c.param, c.x_tilde)), float(np.interp(p, c.param, c.u)))


def _vertical_tangents(c, tol):
    P, m = c.param, c.slope
    slope = _slope_callable(c)
    found = []
    interior = np.nonzero((m[1:-1] <= m[:-2]) & (m[1:-1] <= m[2:]))[0] + 1
    for i in interior:
        res = optimize.minimize_scalar(slope, bounds=(P[i - 1], P[i + 1]), method="bounded",
                                       options={"xatol": 1e-13})
        p_star, m_star = float(res.x), float(res.fun)
        if m_star > tol:
            continue
        if m_star >= -tol:
            found.append(p_star)
            continue
        j = i
        while j > 0 and m[j] < 0:
            j -= 1
        k = i
        while k < len(P) - 1 and m[k] < 0:
            k += 1
        if m[j] < 0 or m[k] < 0:
            raise UnderResolvedError("negative-slope region reaches the window edge; widen the window")
        left = optimize.bisect(slope, P[j], p_star, xtol=1e-12, maxiter=200)
        right = optimize.bisect(slope, p_star, P[k], xtol=1e-12, maxiter=200)
        found += [left, right]
    found = sorted(found)
    uniq = []
    for p in found:
        if not uniq or abs(p - uniq[-1]) > 1e-9:
            uniq.append(p)
    return uniq


def _segment_crossings(x, u):
    """Index pairs ``(i, j)`` of non-adjacent polyline segments that cross."""
    ax, ay, bx, by = x[:-1], u[:-1], x[1:], u[1:]
    xmin, xmax = np.minimum(ax, bx), np.maximum(ax, bx)
    ymin, ymax = np.minimum(ay, by), np.maximum(ay, by)
    pairs = []
    nseg = len(ax)
    for i in range(nseg - 2):
        j = np.arange(i + 2, nseg)
        ok = (xmax[j] >= xmin[i]) & (xmin[j] <= xmax[i]) & (ymax[j] >= ymin[i]) & (ymin[j] <= ymax[i])
        j = j[ok]
        if j.size == 0:
            continue

        def orient(px, py, qx, qy, rx, ry):
            return (qx - px) * (ry - py) - (qy - py) * (rx - px)

        o1 = orient(ax[i], ay[i], bx[i], by[i], ax[j], ay[j])
        o2 = orient(ax[i], ay[i], bx[i], by[i], bx[j], by[j])
        o3 = orient(ax[j], ay[j], bx[j], by[j], ax[i], ay[i])
        o4 = orient(ax[j], ay[j], bx[j], by[j], bx[i], by[i])
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        pairs += [(i, int(jj)) for jj in j[hit]]
    return pairs


def _self_intersections(c):
    x, u, P = c.x_tilde, c.u, c.param
    xu = _xu_callable(c)
    out = []
    for i, j in _segment_crossings(x, u):
        # linear estimate inside each segment
        dxi, dui = x[i + 1] - x[i], u[i + 1] - u[i]
        dxj, duj = x[j + 1] - x[j], u[j + 1] - u[j]
        det = dxi * (-duj) - dui * (-dxj)
        ri, rj = x[j] - x[i], u[j] - u[i]
        s = (ri * (-duj) - rj * (-dxj)) / det
        t = (dxi * rj - dui * ri) / det
        pa = P[i] + s * (P[i + 1] - P[i])
        pb = P[j] + t * (P[j + 1] - P[j])

        def g(z):
            # divided differences: removes the trivial root z[0] == z[1]
            xa, ua = xu(z[0])
            xb, ub = xu(z[1])
            d = z[1] - z[0]
            if d == 0:
                return [1e300, 1e300]
            return [(xa - xb) / d, (ua - ub) / d]

        sol, info, ier, _ = optimize.fsolve(g, [pa, pb], xtol=1e-14, full_output=True)
        # ier may report stalled progress at machine precision; judge by the residual
        xa, ua = xu(sol[0])
        xb, ub = xu(sol[1])
        if abs(sol[0] - sol[1]) > 1e-8 and max(abs(xa - xb), abs(ua - ub)) < 1e-9:
            pa, pb = sorted(map(float, sol))
        xa, ua = xu(pa)
        xb, ub = xu(pb)
        if any(abs(pa - q[0]) < 1e-8 and abs(pb - q[1]) < 1e-8 for q in out):
            continue
        out.append((pa, pb, 0.5 * (xa + xb), 0.5 * (ua + ub), abs(xa - xb)))
    return out


def detect_features(c: ParametricCurve, tol=classify.TOL):
    """Vertical tangents, self-intersections and peak of a sampled curve.

    The returned dict is also stored on ``c.features``. ``kind`` is derived
    from the counts: (2, >=1) loop, (1, 0) cusp, (0, 0) hump.
    """
    vt = _vertical_tangents(c, tol)
    spacing = float(np.min(np.diff(c.param)))
    for a, b in zip(vt[:-1], vt[1:]):
        if b - a < spacing:
            raise UnderResolvedError(
                f"vertical tangents at {a:.6g} and {b:.6g} lie within one sample spacing {spacing:.3g}; resample"
            )
    si = _self_intersections(c)
    k = int(np.argmax(c.u))
    counts = (len(vt), len(si))
    if counts[0] == 2 and counts[1] >= 1:
        kind = classify.LOOP
    elif counts == (1, 0):
        kind = classify.CUSP
    elif counts == (0, 0):
        kind = classify.HUMP
    else:
        kind = "Irregular"
    feats = {
        "vertical_tangents": vt,
        "self_intersections": [
            {"param_a": a, "param_b": b, "x_tilde": x, "u": u, "x_gap": gap} for a, b, x, u, gap in si
        ],
        "peak": {"param": float(c.param[k]), "theta": float(c.theta[k]), "u": float(c.u[k])},
        "kind": kind,
    }
    c.features = feats
    return feats


# -- inversion ----------------------------------------------------------------

def _sech(th):
    return 0.0 if abs(th) > 700.0 else 1.0 / math.cosh(th)


def _safeguarded_newton(f, df, a, b, fa, fb, tol, maxit=100):
    if fa == 0:
        return a
    if fb == 0:
        return b
    x = 0.5 * (a + b)
    for it in range(maxit):
        fx = f(x)
        if abs(fx) <= tol:
            return x
        if (fx < 0) == (fa < 0):
            a, fa = x, fx
        else:
            b, fb = x, fx
        d = df(x)
        step = x - fx / d if d != 0 else None
        if step is None or not (min(a, b) < step < max(a, b)):
            step = 0.5 * (a + b)
        if abs(b - a) < 1e-15 * (1 + abs(x)):
            return step
        x = step
    raise ConvergenceError("Newton did not converge in 100 iterations",
                           state={"a": a, "b": b, "fa": fa, "fb": fb, "x": x})


def invert_section(s: SolitonReal, x_tilde, y_tilde, t_tilde):
    """All phases on the symmetric section mapping to ``(x~, y~)`` at ``t~``.

    Returns dicts ``{theta, T, u, residual}`` ordered by ascending ``theta``.
    """
    if abs((x_tilde - s.x0_tilde) - (y_tilde - s.y0_tilde)) > 1e-9 * (1 + abs(x_tilde)):
        raise ValidationError("target point is off the symmetric section plane x~ - x~0 = y~ - y~0")
    w = s.omega
    # x~(theta) = (K t~ + theta0 - theta)/w - 2K(tanh(theta) + 1) + x~0
    def f(th):
        return (s.K * t_tilde + s.theta0 - th) / w - 2.0 * s.K * (math.tanh(th) + 1.0) + s.x0_tilde - x_tilde

    def df(th):
        return -1.0 / w - 2.0 * s.K * _sech(th) ** 2

    # pieces delimited by zeros of df: sech^2 = -1/(2 K w)
    c = -1.0 / (2.0 * s.K * w)
    cuts = []
    if 0 < c < 1 - 1e-12:
        tv = math.acosh(1.0 / math.sqrt(c))
        cuts = [-tv, tv]
    edges = [-np.inf] + cuts + [np.inf]
    tol = 1e-12 * (1 + abs(x_tilde))
    roots = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        a = lo if np.isfinite(lo) else (hi if np.isfinite(hi) else 0.0) - 1.0
        b = hi if np.isfinite(hi) else (lo if np.isfinite(lo) else 0.0) + 1.0
        step = 1.0
        while not np.isfinite(lo) and f(a) * f(b) > 0 and step < 1e12:
            a -= step
            step *= 2
        step = 1.0
        while not np.isfinite(hi) and f(a) * f(b) > 0 and step < 1e12:
            b += step
            step *= 2
        fa, fb = f(a), f(b)
        if fa * fb > 0:
            continue
        th = _safeguarded_newton(f, df, a, b, fa, fb, tol)
        if not any(abs(th - r) < 1e-9 for r in roots):
            roots.append(th)
    roots.sort()
    out = []
    for th in roots:
        out.append({
            "theta": th,
            "T": (s.K * t_tilde + s.theta0 - th) / w,
            "u": 2.0 * s.K * _sech(th),
            "residual": abs(f(th)),
        })
    return out


def invert_map(s: SolitonReal, x_tilde, y_tilde, t_tilde):
    """``u`` values on every branch through ``(x~, y~, t~)``, by ascending phase."""
    return [b["u"] for b in invert_section(s, x_tilde, y_tilde, t_tilde)]


# -- export -------------------------------------------------------------------

def _fmt(x):
    return "%.17g" % x


def curve_to_csv(c: ParametricCurve):
    names, cols = c.columns()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in zip(*cols):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def curve_to_json(c: ParametricCurve):
    names, cols = c.columns()
    doc = {
        "t_tilde": c.t_tilde,
        "direction": list(c.direction),
        "columns": {n: [float(v) for v in col] for n, col in zip(names, cols)},
        "features": c.features,
    }
    return json.dumps(doc)


def export_curve(c: ParametricCurve, path=None, format="csv"):
    """Serialize ``c`` as CSV or JSON; write to ``path`` when given."""
    if format == "csv":
        text = curve_to_csv(c)
    elif format == "json":
        text = curve_to_json(c)
    else:
        raise ValidationError(f"unknown format {format!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def import_curve_csv(text, t_tilde=0.0, direction=(1.0, 1.0)) -> ParametricCurve:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    data = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    return ParametricCurve(t_tilde=t_tilde, direction=tuple(direction), param=data["param"], theta=data["theta"],
                           x_tilde=data["x_tilde"], y_tilde=data["y_tilde"], u=data["u"], slope=data["slope"],
                           q_re=data.get("q_re"), q_im=data.get("q_im"))


def rotation_period(s: SolitonComplex):
    """Period ``2 pi / Omega`` of the phase factor along the symmetric section."""
    if s.Omega == 0:
        raise ValidationError("non-rotating pattern (Omega = 0)")
    return 2.0 * math.pi / s.Omega
