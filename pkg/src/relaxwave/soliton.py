"""Analytic one-soliton families and residual evaluation.

Transformed frame (quad-free case). With ``theta = K X - w1 T1 - w2 T2 + theta0``
the one-soliton is

    U  = 2K sech(theta)
    Zj = Tj - 2K (tanh(theta) + 1)

and the dispersion relation ``(K + alpha~)(w1 + w2) + 1 = 0``. Writing
``wj = K vj`` and ``v = v1 + v2 < 0`` gives ``K^2 + alpha~ K = 1/|v|``.

The physical coordinates follow from the hodograph-type map

    x~ = T1 - 1/2 int_{-inf}^X U^2 dX' + x~0,   y~ likewise,   t~ = X,

whose tail integral is ``2K (tanh(theta) + 1)`` in closed form.

The soliton solves the transformed equation only at ``alpha~ = 0``; otherwise
its residual is ``2K alpha~ (w1 + w2) sech(theta)(1 + tanh(theta))``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize

from . import medium
from .errors import TailDivergenceError, ValidationError
from .fields import directional

POSITIVE = "positive"
NEGATIVE = "negative"


def _sech(x):
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


@dataclass(frozen=True)
class FramePoint:
    """Point (or broadcastable arrays) in the transformed frame ``(T1, T2, X)``."""

    T1: float
    T2: float
    X: float


def solve_dispersion(alpha_tilde, v, branch=POSITIVE):
    """Root ``K`` of ``K^2 + alpha~ K = 1/|v|``.

    >>> round(solve_dispersion(0.0, -0.24), 12)
    2.041241452319
    """
    if v >= 0:
        raise ValidationError(f"the soliton family needs v = v1 + v2 < 0, got v={v!r}")
    disc = math.sqrt(alpha_tilde**2 + 4.0 / abs(v))
    if branch == POSITIVE:
        return (-alpha_tilde + disc) / 2.0
    if branch == NEGATIVE:
        return (-alpha_tilde - disc) / 2.0
    raise ValidationError(f"unknown branch {branch!r}")


@dataclass(frozen=True)
class SolitonReal:
    K: float
    omega1: float
    omega2: float
    v1: float
    v2: float
    alpha_tilde: float
    theta0: float = 0.0
    x0_tilde: float = 0.0
    y0_tilde: float = 0.0
    branch: str = POSITIVE

    def __post_init__(self):
        v = self.v1 + self.v2
        if v >= 0:
            raise ValidationError(f"v = v1 + v2 must be negative, got {v!r}")
        if self.branch == POSITIVE and self.K <= 0:
            raise ValidationError(f"positive branch needs K > 0, got {self.K!r}")
        w = self.omega1 + self.omega2
        scale = max(1.0, abs(self.K * w), abs(self.alpha_tilde * w))
        if abs((self.K + self.alpha_tilde) * w + 1.0) > 1e-12 * scale:
            raise ValidationError("parameters violate (K + alpha~)(w1 + w2) + 1 = 0")

    @classmethod
    def from_velocities(cls, alpha_tilde, v1, v2, theta0=0.0, x0_tilde=0.0, y0_tilde=0.0,
                        branch=POSITIVE):
        K = solve_dispersion(alpha_tilde, v1 + v2, branch)
        return cls(K=K, omega1=K * v1, omega2=K * v2, v1=v1, v2=v2, alpha_tilde=alpha_tilde,
                   theta0=theta0, x0_tilde=x0_tilde, y0_tilde=y0_tilde, branch=branch)

    @property
    def v(self):
        return self.v1 + self.v2

    @property
    def omega(self):
        return self.omega1 + self.omega2

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def theta(s: SolitonReal, p: FramePoint):
    return s.K * np.asarray(p.X) - s.omega1 * np.asarray(p.T1) - s.omega2 * np.asarray(p.T2) + s.theta0


def eval_U(s: SolitonReal, p: FramePoint):
    """``(U, Z1, Z2)`` at ``p``."""
    th = theta(s, p)
    shift = 2.0 * s.K * (np.tanh(th) + 1.0)
    return 2.0 * s.K * _sech(th), np.asarray(p.T1) - shift, np.asarray(p.T2) - shift


def to_physical(s: SolitonReal, p: FramePoint):
    """``(x~, y~, t~)`` via the closed-form tail integral."""
    _, z1, z2 = eval_U(s, p)
    return z1 + s.x0_tilde, z2 + s.y0_tilde, np.asarray(p.X, dtype=float)


def tail_integral_quadrature(s: SolitonReal, p: FramePoint):
    """``1/2 int_{-inf}^X U^2 dX'`` by adaptive quadrature (scalar point)."""
    def half_u2(xp):
        return 0.5 * (2.0 * s.K * _sech(theta(s, FramePoint(p.T1, p.T2, xp)))) ** 2

    # centre of the pulse in X for this (T1, T2)
    xc = (s.omega1 * p.T1 + s.omega2 * p.T2 - s.theta0) / s.K
    X = float(p.X)
    if X <= xc:
        val, _ = integrate.quad(half_u2, -np.inf, X, epsabs=1e-14, epsrel=1e-13, limit=200)
    else:
        a, _ = integrate.quad(half_u2, -np.inf, xc, epsabs=1e-14, epsrel=1e-13, limit=200)
        b, _ = integrate.quad(half_u2, xc, X, epsabs=1e-14, epsrel=1e-13, limit=200)
        val = a + b
    return val


# -- residuals in the transformed frame ---------------------------------------

def residual_transformed(s: SolitonReal, p: FramePoint):
    """Residual of ``U_XT1 + U_XT2 + alpha~(U_T1 + U_T2) - (1 + phi + psi) U``.

    Uses analytic derivatives and the closed-form accumulators
    ``phi = 2K w1 sech^2``, ``psi = 2K w2 sech^2``.
    """
    th = theta(s, p)
    sech, tanh = _sech(th), np.tanh(th)
    K, w = s.K, s.omega
    U = 2 * K * sech
    U_th = -2 * K * sech * tanh
    U_thth = 2 * K * sech * (1 - 2 * sech**2)
    return -K * w * U_thth - s.alpha_tilde * w * U_th - (1 + 2 * K * w * sech**2) * U


def closed_form_residual(s: SolitonReal, p: FramePoint):
    th = theta(s, p)
    return 2 * s.K * s.alpha_tilde * s.omega * _sech(th) * (1 + np.tanh(th))


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_OFF = np.arange(-2, 3)


def residual_transformed_fd(s: SolitonReal, p: FramePoint, h=2e-3):
    """Finite-difference cross-check of :func:`residual_transformed`.

    All derivatives of ``U`` come from 4th-order central stencils applied to
    :func:`eval_U`; the accumulators are integrated by quadrature from
    ``-inf``. Scalar points only.
    """
    T1, T2, X = float(p.T1), float(p.T2), float(p.X)

    def U(t1, t2, x):
        return eval_U(s, FramePoint(t1, t2, x))[0]

    def d_T(t1, t2, x, axis):
        vals = [U(t1 + o * h, t2, x) if axis == 1 else U(t1, t2 + o * h, x) for o in _OFF]
        return float(np.dot(_D1, vals)) / h

    def d_XT(axis):
        rows = [d_T(T1, T2, X + o * h, axis) for o in _OFF]
        return float(np.dot(_D1, rows)) / h

    u = U(T1, T2, X)
    u_t1, u_t2 = d_T(T1, T2, X, 1), d_T(T1, T2, X, 2)
    xc = (s.omega1 * T1 + s.omega2 * T2 - s.theta0) / s.K

    def accumulator(axis):
        def f(xp):
            return -U(T1, T2, xp) * d_T(T1, T2, xp, axis)
        lo = min(xc, X) - 60.0 / s.K
        if X <= xc:
            v, _ = integrate.quad(f, lo, X, epsabs=1e-13, epsrel=1e-12, limit=400)
        else:
            a, _ = integrate.quad(f, lo, xc, epsabs=1e-13, epsrel=1e-12, limit=400)
            b, _ = integrate.quad(f, xc, X, epsabs=1e-13, epsrel=1e-12, limit=400)
            v = a + b
        return v

    phi, psi = accumulator(1), accumulator(2)
    return d_XT(1) + d_XT(2) + s.alpha_tilde * (u_t1 + u_t2) - (1 + phi + psi) * u


def residual_scan(s: SolitonReal, thetas):
    """Rows ``(theta, U, residual, closed_form_residual)`` along T1 = T2 = 0."""
    thetas = np.asarray(thetas, dtype=float)
    p = FramePoint(0.0, 0.0, (thetas - s.theta0) / s.K)
    U = eval_U(s, p)[0]
    return np.column_stack([thetas, U, residual_transformed(s, p), closed_form_residual(s, p)])


def residual_scan_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "U", "residual", "closed_form_residual"])
    for r in rows:
        w.writerow(["%.17g" % x for x in r])
    return buf.getvalue()


# -- complex (rotating) family ------------------------------------------------

@dataclass(frozen=True)
class RotatingParameters:
    K_r: float
    Omega: float  # nan when the radicand is negative
    omega_is_real: bool
    omega_imag: float  # magnitude of the imaginary part when not real


def zeta_range(v):
    return 1.0 / abs(v), 2.0 / abs(v)


def _rational(x, max_den=10**6):
    """Simplest fraction with a small denominator that rounds to ``x``.

    Inputs such as ``13/3`` or ``0.24`` arrive already rounded; recovering the
    intended rational avoids the cancellation in ``zeta|v| - 1``.
    """
    q = Fraction(x).limit_denominator(max_den)
    return q if float(q) == x else Fraction(x)


def _dec(q):
    return Decimal(q.numerator) / Decimal(q.denominator)


def _threshold(num, den_sq, den_lin=1):
    """``num / (den_lin sqrt(den_sq))`` evaluated in 40-digit decimal."""
    with localcontext() as ctx:
        ctx.prec = 40
        return float(_dec(num) / (_dec(den_lin) * _dec(den_sq).sqrt()))


def _check_zeta(zeta, v):
    if v >= 0:
        raise ValidationError(f"need v < 0, got {v!r}")
    lo, hi = zeta_range(v)
    if not lo < zeta < hi:
        raise ValidationError(f"zeta must lie in the open interval ({lo!r}, {hi!r}), got {zeta!r}")


def rotating_parameters(alpha_tilde, zeta, v) -> RotatingParameters:
    """``K^r = alpha~/(zeta|v| - 1)`` and
    ``Omega = zeta^-1/2 sqrt(1 - zeta alpha~^2 v^2 / (zeta|v| - 1)^2)``.
    """
    _check_zeta(zeta, v)
    z, a = _rational(zeta), abs(_rational(v))
    K_r = alpha_tilde / float(z * a - 1)
    # zeta alpha~^2 v^2 / d^2 = (alpha~/alpha~_s)^2; this form makes Omega(alpha~_s) exactly 0
    r = alpha_tilde / _threshold(z * a - 1, z, a)
    rad = (1.0 - r) * (1.0 + r)
    if rad >= 0:
        return RotatingParameters(K_r, math.sqrt(rad) / math.sqrt(zeta), True, 0.0)
    return RotatingParameters(K_r, float("nan"), False, math.sqrt(-rad) / math.sqrt(zeta))


def _cdict(z):
    return {"re": z.real, "im": z.imag}


@dataclass(frozen=True)
class SolitonComplex:
    """Rotating one-soliton ``Q = A e^{i theta^im} sech(theta^r)``, ``A = 2K^r``.

    ``theta = K X - w1 T1 - w2 T2 + theta0`` with complex ``K``, ``wj`` and
    ``theta0``. The literal form ``A exp(theta^im) sech(theta^r)`` grows without
    bound in ``T``; the oscillatory reading is used here and both readings are
    listed in :attr:`readings`.
    """

    K: complex
    omega1: complex
    omega2: complex
    zeta: float
    v1: float
    v2: float
    alpha_tilde: float
    theta0: complex = 0j
    x0_tilde: float = 0.0
    y0_tilde: float = 0.0

    readings = {
        "adopted": "Q = A exp(i theta_im) sech(theta_r)",
        "literal": "Q = A exp(theta_im) sech(theta_r)",
    }

    def __post_init__(self):
        _check_zeta(self.zeta, self.v1 + self.v2)

    @classmethod
    def from_rotating(cls, alpha_tilde, zeta, v1, v2, theta0=0j, x0_tilde=0.0, y0_tilde=0.0):
        """Build from the closed-form ``K^r`` and ``Omega``.

        ``K^im = zeta w1^im = zeta w2^im`` and ``Omega = w1^im + w2^im`` give
        ``wj^im = Omega/2`` and ``K^im = zeta Omega/2``.
        """
        rp = rotating_parameters(alpha_tilde, zeta, v1 + v2)
        if not rp.omega_is_real:
            raise ValidationError("no rotating pattern: Omega is not real for this alpha~")
        wi = rp.Omega / 2.0
        K = complex(rp.K_r, zeta * wi)
        return cls(K=K, omega1=complex(v1 * rp.K_r, wi), omega2=complex(v2 * rp.K_r, wi), zeta=zeta,
                   v1=v1, v2=v2, alpha_tilde=alpha_tilde, theta0=complex(theta0),
                   x0_tilde=x0_tilde, y0_tilde=y0_tilde)

    @property
    def A(self):
        return 2.0 * self.K.real

    @property
    def Omega(self):
        return self.omega1.imag + self.omega2.imag

    @property
    def v(self):
        return self.v1 + self.v2

    def to_dict(self):
        d = asdict(self)
        for k in ("K", "omega1", "omega2", "theta0"):
            d[k] = _cdict(complex(d[k]))
        d["readings"] = dict(self.readings)
        return d

    @classmethod
    def from_dict(cls, d):
        d = {k: v for k, v in d.items() if k != "readings"}
        for k in ("K", "omega1", "omega2", "theta0"):
            if isinstance(d.get(k), dict):
                d[k] = complex(d[k]["re"], d[k]["im"])
        return cls(**d)


def theta_complex(s: SolitonComplex, p: FramePoint):
    return s.K * np.asarray(p.X) - s.omega1 * np.asarray(p.T1) - s.omega2 * np.asarray(p.T2) + s.theta0


def eval_Q(s: SolitonComplex, p: FramePoint):
    """``(Q^r, Q^im, Z1, Z2)`` at ``p``."""
    th = theta_complex(s, p)
    tr, ti = np.real(th), np.imag(th)
    q = s.A * np.exp(1j * ti) * _sech(tr)
    shift = 2.0 * s.K.real * (np.tanh(tr) + 1.0)
    return np.real(q), np.imag(q), np.asarray(p.T1) - shift, np.asarray(p.T2) - shift


def to_physical_complex(s: SolitonComplex, p: FramePoint):
    _, _, z1, z2 = eval_Q(s, p)
    return z1 + s.x0_tilde, z2 + s.y0_tilde, np.asarray(p.X, dtype=float)


LITERAL = "literal"
CONSISTENT = "consistent"


def residual_complex(s: SolitonComplex, p: FramePoint, reading=LITERAL):
    """Residuals of the coupled complex set on :func:`eval_Q` output.

    Returns ``(r_re, r_im, r_z1, r_z2)``. The potential multiplying ``Q`` is
    ``1 + Z1_T1 + Z2_T2`` literally, or ``Z1_T1 + Z2_T2 - 1`` under
    ``reading="consistent"``, which matches ``1 + phi + psi`` of the real case.
    The second accumulator relation is taken for ``Z2`` (``Z2_XT2``).
    """
    th = theta_complex(s, p)
    tr, ti = np.real(th), np.imag(th)
    sech, tanh = _sech(tr), np.tanh(tr)
    g = s.A * np.exp(1j * ti) * sech
    g_r = -g * tanh
    g_i = 1j * g
    g_rr = g * (1 - 2 * sech**2)
    g_ri = 1j * g_r
    g_ii = -g
    # (d theta_r, d theta_i) for X, T1, T2
    dX = (s.K.real, s.K.imag)
    dT = [(-s.omega1.real, -s.omega1.imag), (-s.omega2.real, -s.omega2.imag)]

    def first(d):
        return g_r * d[0] + g_i * d[1]

    def second(a, b):
        return g_rr * a[0] * b[0] + g_ri * (a[0] * b[1] + a[1] * b[0]) + g_ii * a[1] * b[1]

    Kr = s.K.real
    z1_t1 = 1 + 2 * Kr * s.omega1.real * sech**2
    z2_t2 = 1 + 2 * Kr * s.omega2.real * sech**2
    if reading == LITERAL:
        pot = 1 + z1_t1 + z2_t2
    elif reading == CONSISTENT:
        pot = z1_t1 + z2_t2 - 1
    else:
        raise ValidationError(f"unknown reading {reading!r}")
    R = second(dX, dT[0]) + second(dX, dT[1]) + s.alpha_tilde * (first(dT[0]) + first(dT[1])) - pot * g
    rz = []
    for j, w in enumerate((s.omega1, s.omega2)):
        z_xt = -4 * Kr**2 * w.real * sech**2 * tanh
        rz.append(z_xt + np.real(np.conj(g) * first(dT[j])))
    return np.real(R), np.imag(R), rz[0], rz[1]


@dataclass(frozen=True)
class ComplexBranch:
    K: complex
    omega1: complex
    omega2: complex
    residual: float

    @property
    def Omega(self):
        return self.omega1.imag + self.omega2.imag


@dataclass(frozen=True)
class ComplexDispersionResult:
    branches: list
    found: bool
    final_residual: float


def _complex_system(alpha_tilde, zeta, v):
    def f(z):
        kr, ki = z
        val = (kr + alpha_tilde + 1j * ki) * (v * kr + 2j * ki / zeta) + 1.0
        return np.array([val.real, val.imag])

    def jac(z):
        kr, ki = z
        # d/dkr and d/dki of (kr + a + i ki)(v kr + 2i ki/zeta)
        d_kr = (v * kr + 2j * ki / zeta) + (kr + alpha_tilde + 1j * ki) * v
        d_ki = 1j * (v * kr + 2j * ki / zeta) + (kr + alpha_tilde + 1j * ki) * (2j / zeta)
        return np.array([[d_kr.real, d_ki.real], [d_kr.imag, d_ki.imag]])

    return f, jac


def solve_complex_dispersion(alpha_tilde, zeta, v1, v2, box=None, seeds=9):
    """All roots of the complex dispersion relation under the rotating constraints.

    Unknowns are ``(K^r, K^im)``; ``wj^r = vj K^r`` and ``wj^im = K^im/zeta``.
    A grid of seeds over ``[-box, box]^2`` is refined with a Newton-type
    solver; roots with residual below 1e-12 are kept, deduplicated and sorted.
    """
    v = v1 + v2
    if v >= 0:
        raise ValidationError(f"need v = v1 + v2 < 0, got {v!r}")
    f, jac = _complex_system(alpha_tilde, zeta, v)
    if box is None:
        box = 4.0 * (1.0 + abs(alpha_tilde) + math.sqrt(1.0 / abs(v)) + math.sqrt(zeta))
    grid = np.linspace(-box, box, seeds)
    roots, best = [], float("inf")
    for kr0 in grid:
        for ki0 in grid:
            sol = optimize.root(f, [kr0, ki0], jac=jac, method="hybr", options={"xtol": 1e-14})
            z = sol.x
            for _ in range(5):  # Newton polish
                try:
                    z = z - np.linalg.solve(jac(z), f(z))
                except np.linalg.LinAlgError:
                    break
            res = float(np.linalg.norm(f(z)))
            best = min(best, res)
            if res < 1e-12 and np.all(np.abs(z) <= 10 * box):
                if not any(np.allclose(z, r, rtol=1e-9, atol=1e-9) for r in roots):
                    roots.append(z)
    roots.sort(key=lambda z: (round(z[0], 9), round(z[1], 9)))
    branches = []
    for kr, ki in roots:
        wi = ki / zeta
        branches.append(ComplexBranch(K=complex(kr, ki), omega1=complex(v1 * kr, wi),
                                      omega2=complex(v2 * kr, wi), residual=float(np.linalg.norm(f((kr, ki))))))
    return ComplexDispersionResult(branches=branches, found=bool(branches), final_residual=best)


def rotating_comparison(alpha_tilde, zeta, v1, v2):
    """Rows comparing the closed-form ``K^r``, ``Omega`` with each numerical root."""
    rp = rotating_parameters(alpha_tilde, zeta, v1 + v2)
    res = solve_complex_dispersion(alpha_tilde, zeta, v1, v2)
    rows = []
    for b in res.branches:
        rows.append({
            "K_r_closed_form": rp.K_r,
            "Omega_closed_form": rp.Omega if rp.omega_is_real else None,
            "K_r_root": b.K.real,
            "K_im_root": b.K.imag,
            "Omega_root": b.Omega,
            "dispersion_residual": b.residual,
            "delta_K_r": b.K.real - rp.K_r,
            "delta_Omega": (b.Omega - rp.Omega) if rp.omega_is_real else None,
        })
    return rows


# -- physical-frame residuals -------------------------------------------------

PRESSURE, REDUCED_QUAD_FREE, REDUCED_COMPLEX, REDUCED_MIXED = "pressure", "quad-free", "complex", "mixed"


def residual_physical(field, params, point, case_tag):
    """Pointwise residual of a physical-frame equation.

    ``case_tag`` selects:

    ``"pressure"``   the two-dimensional pressure equation; ``params`` is a
                     :class:`~relaxwave.medium.MediumParams`.
    ``"quad-free"``  ``D[d_t - u^2 D/2] u + alpha~ D u - u``
    ``"complex"``    the complex extension with ``u^2`` replaced by ``q q*``
    ``"mixed"``      ``D[d_t + u D + u^2 D/2] u + alpha~ D u + u``

    For the last three ``params`` is ``alpha~``. ``D = d/dx + d/dy``.
    """
    x, y, t = point
    d = directional(field, x, y, t)
    u, Du, DDu, Dut = d["u"], d["Du"], d["DDu"], d["Dut"]
    if case_tag == PRESSURE:
        m = params
        c = medium.derive_coefficients(m)
        vf2 = m.v_f**2
        DD_u2 = 2 * Du**2 + 2 * u * DDu
        DD_u3 = 6 * u * Du**2 + 3 * u**2 * DDu
        return (DDu - d["utt"] / vf2 + m.alpha_f * vf2 * DD_u2 + m.a_f * vf2 * DD_u3
                + c.beta_f * Du + c.gamma_f * u)
    a = float(params)
    if case_tag == REDUCED_QUAD_FREE:
        return Dut - u * Du**2 - 0.5 * u**2 * DDu + a * Du - u
    if case_tag == REDUCED_COMPLEX:
        mod2 = u * np.conj(u)
        D_mod2 = 2 * np.real(np.conj(u) * Du)
        return Dut - 0.5 * D_mod2 * Du - 0.5 * mod2 * DDu + a * Du - u
    if case_tag == REDUCED_MIXED:
        return Dut + Du**2 + u * DDu + u * Du**2 + 0.5 * u**2 * DDu + a * Du + u
    raise ValidationError(f"unknown case tag {case_tag!r}")


# -- mixed-case coordinate map ------------------------------------------------

def to_physical_cubic(U, p: FramePoint, x0_tilde=0.0, y0_tilde=0.0, lower=-np.inf, tail_tol=1e-12):
    """``x~ = T1' + 1/2 int_lower^{X'} (U^2 + 2U) dS + x~0'`` by quadrature.

    ``U`` is a callable ``U(T1, T2, S)``. With an infinite lower limit the
    integrand must decay; the tail is probed at ``X' - 10^j`` for
    ``j = 1..6`` and :class:`TailDivergenceError` names the first bound where
    it does not.
    """
    T1, T2, X = float(p.T1), float(p.T2), float(p.X)

    def f(S):
        u = U(T1, T2, S)
        return 0.5 * (u * u + 2.0 * u)

    if np.isinf(lower):
        probes = [X - 10.0**j for j in range(1, 7)]
        vals = [abs(f(S)) for S in probes]
        if vals[-1] > tail_tol:
            raise TailDivergenceError(
                f"integrand does not decay: |f({probes[-1]:g})| = {vals[-1]:.3e} > {tail_tol:g}"
            )
        # locate the support on a dense grid near X and a geometric grid further out
        near = X - np.linspace(0.0, 200.0, 4001)
        far = X - np.geomspace(200.0, 1e6, 400)[1:]
        grid = np.concatenate([near, far])[::-1]
        fv = np.abs([f(S) for S in grid])
        live = np.nonzero(fv > 1e-17 * max(fv.max(), 1e-300))[0]
        start = grid[max(live[0] - 1, 0)] if live.size else X
        pieces = grid[grid >= start]
        if pieces[-1] != X:
            pieces = np.append(pieces, X)
        total = math.fsum(
            integrate.quad(f, a, b, epsabs=1e-16, epsrel=1e-13, limit=100)[0]
            for a, b in zip(pieces[:-1], pieces[1:])
        )
        total += integrate.quad(f, -np.inf, start, epsabs=1e-16, limit=200)[0]
    else:
        total, _ = integrate.quad(f, lower, X, epsabs=1e-15, epsrel=1e-13, limit=400)
    return T1 + total + x0_tilde, T2 + total + y0_tilde, X
