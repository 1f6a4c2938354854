"""Loop / cusp / hump classification of the one-soliton patterns.

Static family: along the symmetric section the map ``T -> x~`` has slope
``1 + 2K^2 v sech^2(theta)``. Its minimum ``1 + 2K^2 v`` is negative (loop),
zero (cusp) or positive (hump); with ``K^2 + alpha~ K = 1/|v|`` the sign flips
exactly at ``alpha~_c = sqrt(1/(2|v|))``.

Rotating family (``1/|v| < zeta < 2/|v|``) uses two thresholds::

    alpha_c  = (zeta|v| - 1) / sqrt(2|v|)        cusp
    alpha_s  = (zeta|v| - 1) / (|v| sqrt(zeta))  no pattern at or above

Rotating thresholds are sometimes written with the cusp constant as both ``alpha_c`` and
``alpha~_c``; both denote ``alpha_c`` above.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .soliton import _check_zeta, _rational, _threshold, rotating_parameters, solve_dispersion

LOOP, CUSP, HUMP, NO_PATTERN = "Loop", "Cusp", "Hump", "NoPattern"
TOL = 1e-9


@dataclass(frozen=True)
class PatternClass:
    kind: str
    rotating: bool = False
    Omega: float | None = None
    margin: float = 0.0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Thresholds:
    alpha_c_static: float | None
    alpha_c_rot: float | None = None
    alpha_s: float | None = None

    def to_dict(self):
        return asdict(self)


def _check_v(v):
    if not v < 0:
        raise ValidationError(f"need v < 0, got {v!r}")


def critical_alpha_static(v):
    """``sqrt(1/(2|v|))``.

    >>> critical_alpha_static(-0.5)
    1.0
    """
    _check_v(v)
    return _threshold(Fraction(1), 2 * abs(_rational(v)))


def _band(alpha, threshold, below, above, tol):
    if abs(alpha - threshold) <= tol:
        return CUSP
    return below if alpha < threshold else above


def classify_static(alpha_tilde, v, tol=TOL) -> PatternClass:
    _check_v(v)
    if alpha_tilde < 0:
        raise ValidationError(f"need alpha~ >= 0, got {alpha_tilde!r}")
    ac = critical_alpha_static(v)
    return PatternClass(kind=_band(alpha_tilde, ac, LOOP, HUMP, tol), margin=abs(alpha_tilde - ac))


def rotating_thresholds(zeta, v) -> Thresholds:
    _check_zeta(zeta, v)
    z, a = _rational(zeta), abs(_rational(v))
    d = z * a - 1
    ac = _threshold(d, 2 * a)
    as_ = _threshold(d, z, a)
    if not 0 < ac < as_:
        raise ValidationError(f"threshold ordering violated: alpha_c={ac!r}, alpha_s={as_!r}")
    return Thresholds(alpha_c_static=critical_alpha_static(v), alpha_c_rot=ac, alpha_s=as_)


def classify_rotating(alpha_tilde, zeta, v, tol=TOL) -> PatternClass:
    if alpha_tilde < 0:
        raise ValidationError(f"need alpha~ >= 0, got {alpha_tilde!r}")
    th = rotating_thresholds(zeta, v)
    margin = min(abs(alpha_tilde - th.alpha_c_rot), abs(alpha_tilde - th.alpha_s))
    if alpha_tilde >= th.alpha_s:
        return PatternClass(kind=NO_PATTERN, rotating=True, Omega=None, margin=margin)
    # at the rotating cusp the ordering inverts: below alpha_c is hump-like
    kind = _band(alpha_tilde, th.alpha_c_rot, HUMP, LOOP, tol)
    rp = rotating_parameters(alpha_tilde, zeta, v)
    return PatternClass(kind=kind, rotating=True, Omega=rp.Omega, margin=margin)


def slope_profile(K, v, thetas):
    """``d x~ / dT`` along ``T1 = T2 = T`` as a function of the phase."""
    return 1.0 + 2.0 * K**2 * v / np.cosh(thetas) ** 2


def classify_by_slope_oracle(s, tol=TOL, thetas=None) -> PatternClass:
    """Classify from the sign of the section slope.

    ``s`` is a :class:`~relaxwave.soliton.SolitonReal`; ``K`` is recomputed
    from ``(alpha~, v)`` so the check exercises the dispersion algebra.
    """
    K = solve_dispersion(s.alpha_tilde, s.v)
    if thetas is None:
        thetas = np.linspace(-10.0, 10.0, 2001)  # contains theta = 0
    m_min = float(np.min(slope_profile(K, s.v, thetas)))
    if abs(m_min) <= tol:
        kind = CUSP
    elif m_min < 0:
        kind = LOOP
    else:
        kind = HUMP
    return PatternClass(kind=kind, margin=abs(m_min))


def classification_report(alpha_tilde, v, zeta=None, rotating=False):
    """JSON-ready dict for the CLI."""
    if rotating:
        if zeta is None:
            raise ValidationError("rotating classification needs zeta")
        pc = classify_rotating(alpha_tilde, zeta, v)
        th = rotating_thresholds(zeta, v)
    else:
        pc = classify_static(alpha_tilde, v)
        th = Thresholds(alpha_c_static=critical_alpha_static(v))
    out = pc.to_dict()
    out["thresholds"] = th.to_dict()
    return out
