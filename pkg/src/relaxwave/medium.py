"""Relaxing-medium parameters, derived coefficients and frame scalings.

The high-frequency evolution equation for the pressure perturbation ``p`` in
the two-dimensional case reads::

    D^2 p - p_tt / v_f^2 + alpha_f v_f^2 D^2 p^2 + a_f v_f^2 D^2 p^3
        + beta_f D p + gamma_f p = 0,          D = d/dx + d/dy

with dissipation and dispersion coefficients::

    beta_f  = (v_f^2 - v_e^2) / (tau v_e^2 v_f)
    gamma_f = (v_f^4 - v_e^4) / (2 tau^2 v_e^4 v_f^2)

Two dimensionless frames are supported. ``"quad-free"`` drops the quadratic
nonlinearity (``alpha_f = 0``); ``"mixed"`` keeps both nonlinearities.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AmplitudeMatchError, ValidationError
from .fields import directional

QUAD_FREE = "quad-free"
MIXED = "mixed"
CASES = (QUAD_FREE, MIXED)


@dataclass(frozen=True)
class MediumParams:
    """Physical constants of the relaxing medium.

    ``tau`` relaxation time [s], ``v_e``/``v_f`` equilibrium and frozen sound
    speeds [m/s], ``alpha_f``/``a_f`` second and third order expansion
    coefficients. ``extras`` keeps any additional config keys verbatim; they
    are never used.
    """

    tau: float
    v_e: float
    v_f: float
    alpha_f: float = 0.0
    a_f: float = 0.0
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("tau", "v_e", "v_f", "alpha_f", "a_f"):
            val = getattr(self, name)
            if not isinstance(val, (int, float)) or not math.isfinite(val):
                raise ValidationError(f"{name} must be a finite real number, got {val!r}")
        if self.tau <= 0:
            raise ValidationError(f"tau must be positive, got {self.tau!r}")
        if self.v_e <= 0 or self.v_f <= 0:
            raise ValidationError("sound speeds must be positive")
        if self.v_e >= self.v_f:
            raise ValidationError(
                f"need v_e < v_f for positive dissipation/dispersion, got v_e={self.v_e!r}, v_f={self.v_f!r}"
            )
        if self.alpha_f < 0 or self.a_f < 0:
            raise ValidationError("expansion coefficients alpha_f, a_f must be non-negative")

    @classmethod
    def from_dict(cls, data):
        known = {"tau", "v_e", "v_f", "alpha_f", "a_f"}
        missing = {"tau", "v_e", "v_f"} - set(data)
        if missing:
            raise ValidationError(f"medium description lacks {sorted(missing)}")
        kwargs = {k: float(data[k]) for k in known if k in data}
        extras = {k: v for k, v in data.items() if k not in known}
        return cls(extras=extras, **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        d = {k: getattr(self, k) for k in ("tau", "v_e", "v_f", "alpha_f", "a_f")}
        d.update(self.extras)
        return d


@dataclass(frozen=True)
class DerivedCoefficients:
    beta_f: float
    gamma_f: float

    def to_json(self):
        return json.dumps(asdict(self))


def derive_coefficients(m: MediumParams) -> DerivedCoefficients:
    """Dissipation ``beta_f`` and dispersion ``gamma_f`` of the medium.

    >>> derive_coefficients(MediumParams(tau=1.0, v_e=1.0, v_f=2.0))
    DerivedCoefficients(beta_f=1.5, gamma_f=1.875)
    """
    tau, ve, vf = m.tau, m.v_e, m.v_f
    beta = (vf**2 - ve**2) / (tau * ve**2 * vf)
    gamma = (vf**4 - ve**4) / (2.0 * tau**2 * ve**4 * vf**2)
    return DerivedCoefficients(beta_f=beta, gamma_f=gamma)


def linear_dispersion(m: MediumParams, k1, k2):
    """Squared frequency of the linearized two-dimensional equation.

    Plane waves ``exp(i(omega t - k1 x - k2 y))`` solve the linear part when
    ``omega**2 = v_f**2 * ((k1+k2)**2 + 1j*beta_f*(k1+k2) - gamma_f)``.
    """
    c = derive_coefficients(m)
    k = np.asarray(k1) + np.asarray(k2)
    return m.v_f**2 * (k**2 + 1j * c.beta_f * k - c.gamma_f)


def factorization_defect(u_field, m: MediumParams, point):
    """Signed ``LHS - RHS`` of the one-way factorization applied to a field.

    ``LHS = D^2 u - u_tt / v_f^2`` and ``RHS = 2 D (D + v_f^-1 d_t) u``. The
    difference is ``-(D + v_f^-1 d_t)^2 u``, which vanishes on any function of
    ``(x - v_f t, y - v_f t)``.
    """
    x, y, t = point
    d = directional(u_field, x, y, t)
    vf = m.v_f
    lhs = d["DDu"] - d["utt"] / vf**2
    rhs = 2.0 * (d["DDu"] + d["Dut"] / vf)
    return lhs - rhs


def factorization_gap(u_field, m: MediumParams, point):
    return abs(factorization_defect(u_field, m, point))


@dataclass(frozen=True)
class ScalingMap:
    """Affine map between physical ``(x, y, t, p)`` and a dimensionless frame.

    ``x~ = space_scale * (x - frame_velocity * t)`` (likewise for ``y``),
    ``t~ = time_scale * t`` and ``u~ = amplitude_scale * p``.

    ``space_scale`` keeps its literal sign (negative in the quad-free case).
    ``amplitude_scale`` is None when no consistent value exists.
    ``nominal_amplitude_scale`` records the nominal closed form for comparison.
    """

    case_tag: str
    space_scale: float
    time_scale: float
    amplitude_scale: float | None
    alpha_tilde: float
    frame_velocity: float
    nominal_amplitude_scale: float | None = None

    def to_dict(self):
        return asdict(self)


def _nominal_scales(m: MediumParams, case_tag):
    c = derive_coefficients(m)
    beta, gamma, vf = c.beta_f, c.gamma_f, m.v_f
    if case_tag == QUAD_FREE:
        space = -math.sqrt(gamma / 6.0)
        time = vf * math.sqrt(1.5 * gamma)
        alpha_tilde = beta / math.sqrt(6.0 * gamma)
        amplitude = m.alpha_f * vf**2
    elif case_tag == MIXED:
        if m.alpha_f <= 0:
            raise ValidationError("the mixed case requires alpha_f > 0")
        if m.a_f <= 0:
            raise ValidationError("the mixed case requires a_f > 0")
        af, alf = m.a_f, m.alpha_f
        space = math.sqrt(3.0 * af * gamma / (2.0 * alf**2 * vf**2))
        time = math.sqrt(gamma / (6.0 * af)) * alf * vf**2
        alpha_tilde = beta / (alf * vf) * math.sqrt(3.0 * af / (2.0 * gamma))
        amplitude = 3.0 * af / alf
    else:
        raise ValidationError(f"unknown case tag {case_tag!r}; expected one of {CASES}")
    return space, time, alpha_tilde, amplitude


@dataclass(frozen=True)
class AmplitudeMatch:
    """Result of matching the scaled equation against its target form."""

    case_tag: str
    amplitude_scale: float
    alpha_tilde: float
    nominal_amplitude_scale: float
    system: dict
    residual: float


# target coefficients of (D u_t, D^2 u^2, D^2 u^3, u); D u carries alpha~
_TARGETS = {
    QUAD_FREE: {"Dut": 1.0, "DDu2": 0.0, "DDu3": -1.0 / 6.0, "u": -1.0},
    MIXED: {"Dut": 1.0, "DDu2": 0.5, "DDu3": 1.0 / 6.0, "u": 1.0},
}


def derive_amplitude_scale(m: MediumParams, case_tag=QUAD_FREE) -> AmplitudeMatch:
    """Find ``c`` in ``u~ = c p`` by matching monomial coefficients.

    The factorized physical equation is pulled back through the nominal
    coordinate scalings. With ``w = 1/c`` its terms carry::

        D u~_t  : 2 s r / v_f * w          D^2 u~^2 : alpha_f v_f^2 s^2 * w^2
        D^2 u~^3: a_f v_f^2 s^2 * w^3       D u~     : beta_f s * w
        u~      : gamma_f * w

    Dividing by the ``u~`` coefficient fixes the overall factor; the two
    nonlinear terms then constrain ``w`` and the linear ones fix ``alpha~``
    independently of ``c``. In the quad-free case the quadratic term is
    absent by definition, so ``alpha_f`` is ignored there.

    Raises
    ------
    AmplitudeMatchError
        When no ``c`` satisfies the system; the exception carries the system,
        the least-squares best ``c`` and its residual.
    """
    space, time, _, nominal = _nominal_scales(m, case_tag)
    c = derive_coefficients(m)
    vf, s, r = m.v_f, space, time
    tgt = _TARGETS[case_tag]
    alpha_f = 0.0 if case_tag == QUAD_FREE else m.alpha_f
    lam = tgt["u"] / c.gamma_f  # rescales so the u~ coefficient matches
    dut = 2.0 * s * r / vf * lam
    quad = alpha_f * vf**2 * s**2 * lam  # times w
    cubic = m.a_f * vf**2 * s**2 * lam  # times w^2
    alpha_tilde = c.beta_f * s * lam

    def residuals(w):
        return np.array([dut - tgt["Dut"], quad * w - tgt["DDu2"], cubic * w**2 - tgt["DDu3"]])

    candidates = []
    if quad != 0.0:
        candidates.append(tgt["DDu2"] / quad)
    if cubic != 0.0 and tgt["DDu3"] / cubic > 0:
        root = math.sqrt(tgt["DDu3"] / cubic)
        candidates += [root, -root]
    system = {
        "Dut_coefficient": dut,
        "Dut_target": tgt["Dut"],
        "quadratic_per_w": quad,
        "quadratic_target": tgt["DDu2"],
        "cubic_per_w2": cubic,
        "cubic_target": tgt["DDu3"],
        "alpha_tilde": alpha_tilde,
        "space_scale": s,
        "time_scale": r,
    }
    if not candidates:
        raise AmplitudeMatchError(
            f"{case_tag}: no nonlinear term constrains the amplitude (a_f={m.a_f!r})",
            system=system,
            best_c=None,
            residual=float(np.linalg.norm(residuals(0.0))),
        )
    scored = sorted(candidates, key=lambda w: (float(np.linalg.norm(residuals(w))), -w))
    w = scored[0]
    res = float(np.linalg.norm(residuals(w)))
    if res > 1e-12:
        raise AmplitudeMatchError(
            f"{case_tag}: coefficient system inconsistent (residual {res:.3e})",
            system=system,
            best_c=1.0 / w,
            residual=res,
        )
    return AmplitudeMatch(
        case_tag=case_tag,
        amplitude_scale=1.0 / w,
        alpha_tilde=alpha_tilde,
        nominal_amplitude_scale=nominal,
        system=system,
        residual=res,
    )


def build_scaling(m: MediumParams, case_tag=QUAD_FREE) -> ScalingMap:
    space, time, alpha_tilde, nominal = _nominal_scales(m, case_tag)
    try:
        amplitude = derive_amplitude_scale(m, case_tag).amplitude_scale
    except AmplitudeMatchError:
        amplitude = None
    return ScalingMap(
        case_tag=case_tag,
        space_scale=space,
        time_scale=time,
        amplitude_scale=amplitude,
        alpha_tilde=alpha_tilde,
        frame_velocity=m.v_f,
        nominal_amplitude_scale=nominal,
    )


def map_from_physical(sm: ScalingMap, x, y, t):
    """Physical ``(x, y, t)`` to dimensionless ``(x~, y~, t~)``."""
    x, y, t = np.asarray(x, float), np.asarray(y, float), np.asarray(t, float)
    v = sm.frame_velocity
    return sm.space_scale * (x - v * t), sm.space_scale * (y - v * t), sm.time_scale * t


def map_to_physical(sm: ScalingMap, xt, yt, tt):
    xt, yt, tt = np.asarray(xt, float), np.asarray(yt, float), np.asarray(tt, float)
    t = tt / sm.time_scale
    v = sm.frame_velocity
    return xt / sm.space_scale + v * t, yt / sm.space_scale + v * t, t


def _need_amplitude(sm):
    if sm.amplitude_scale is None:
        raise ValidationError(f"no consistent amplitude scale for case {sm.case_tag!r}")
    return sm.amplitude_scale


def field_from_physical(sm: ScalingMap, p):
    return _need_amplitude(sm) * np.asarray(p)


def field_to_physical(sm: ScalingMap, u):
    return np.asarray(u) / _need_amplitude(sm)


def coefficients_report(m: MediumParams):
    """Dict with inputs, derived coefficients and both scaling maps."""
    out = {"medium": m.to_dict(), "derived": asdict(derive_coefficients(m)), "scaling": {}}
    for case in CASES:
        try:
            out["scaling"][case] = build_scaling(m, case).to_dict()
        except ValidationError as exc:
            out["scaling"][case] = {"error": str(exc)}
    return out
