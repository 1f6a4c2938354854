"""Exponential polynomials and Hirota bilinear operators.

An :class:`ExpPoly` is a finite sum ``sum_j c_j exp(k_j . xi)`` over the
variables ``xi = (X, T1, T2)``. Term structure is exact; coefficients are
complex floats. Hirota derivatives act on monomials by

    D^m (c e^{k.xi}) . (d e^{l.xi}) = c d prod_v (k_v - l_v)^{m_v} e^{(k+l).xi}

so bilinear equations reduce to bookkeeping over exponent vectors.

Sums are formed with :func:`math.fsum` per exponent, and a merged coefficient
is pruned when its magnitude falls below ``PRUNE_RTOL`` times the largest
contribution that went into it.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from itertools import product

import numpy as np
import sympy as sp

from .errors import ValidationError

PRUNE_RTOL = 1e-15
KEY_RTOL = 1e-12
VARIABLES = ("X", "T1", "T2")


def _close(a, b):
    scale = 1.0 + max(abs(v) for v in (*a, *b))
    return all(abs(x - y) <= KEY_RTOL * scale for x, y in zip(a, b))


def _canonical(raw):
    """Merge ``(coef, exponent)`` pairs into unique-exponent terms."""
    groups = []  # [exponent, [contributions]]
    for coef, k in raw:
        k = tuple(complex(v) for v in k)
        for g in groups:
            if _close(g[0], k):
                g[1].append(complex(coef))
                break
        else:
            groups.append([k, [complex(coef)]])
    terms = {}
    for k, coefs in groups:
        total = complex(math.fsum(c.real for c in coefs), math.fsum(c.imag for c in coefs))
        biggest = max(abs(c) for c in coefs)
        if abs(total) <= PRUNE_RTOL * biggest or total == 0:
            continue
        terms[k] = total
    return terms


def _sort_key(k):
    return tuple(x for v in k for x in (v.real, v.imag))


class ExpPoly:
    """Immutable exponential polynomial in ``(X, T1, T2)``."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        if isinstance(terms, dict):
            terms = [(c, k) for k, c in terms.items()]
        object.__setattr__(self, "_terms", _canonical(terms))

    def __setattr__(self, name, value):
        raise AttributeError("ExpPoly is immutable")

    @classmethod
    def monomial(cls, coef, exponent):
        return cls([(coef, exponent)])

    @classmethod
    def constant(cls, c):
        return cls([(c, (0, 0, 0))])

    @property
    def terms(self):
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))

    def coefficient(self, exponent):
        exponent = tuple(complex(v) for v in exponent)
        for k, c in self._terms.items():
            if _close(k, exponent):
                return c
        return 0j

    def __repr__(self):
        body = " + ".join(f"({c:.6g})e^{k}" for k, c in self.items())
        return f"ExpPoly({body or '0'})"

    def __add__(self, other):
        other = _promote(other)
        return ExpPoly([(c, k) for k, c in self._terms.items()] + [(c, k) for k, c in other._terms.items()])

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly([(-c, k) for k, c in self._terms.items()])

    def __sub__(self, other):
        return self + (-_promote(other))

    def __rsub__(self, other):
        return _promote(other) - self

    def __mul__(self, other):
        if isinstance(other, ExpPoly):
            raw = [
                (c * d, tuple(a + b for a, b in zip(k, l)))
                for (k, c), (l, d) in product(self._terms.items(), other._terms.items())
            ]
            return ExpPoly(raw)
        return ExpPoly([(c * other, k) for k, c in self._terms.items()])

    __rmul__ = __mul__

    def diff(self, orders):
        """Ordinary partial derivative of the given orders in (X, T1, T2)."""
        raw = []
        for k, c in self._terms.items():
            f = c
            for kv, m in zip(k, orders):
                f *= kv**m
            raw.append((f, k))
        return ExpPoly(raw)

    def __call__(self, X, T1, T2):
        xi = (X, T1, T2)
        return sum(c * cmath.exp(sum(kv * v for kv, v in zip(k, xi))) for k, c in self._terms.items())

    def to_json_list(self):
        out = []
        for k, c in self.items():
            entry = {"re": c.real, "im": c.imag}
            for name, kv in zip(("kX", "kT1", "kT2"), k):
                entry[name] = {"re": kv.real, "im": kv.imag}
            out.append(entry)
        return out

    def to_json(self):
        return json.dumps(self.to_json_list())

    @classmethod
    def from_json(cls, text):
        data = json.loads(text) if isinstance(text, str) else text
        raw = []
        for t in data:
            k = tuple(complex(t[n]["re"], t[n]["im"]) for n in ("kX", "kT1", "kT2"))
            raw.append((complex(t["re"], t["im"]), k))
        return cls(raw)


def _promote(x):
    return x if isinstance(x, ExpPoly) else ExpPoly.constant(x)


def _contributions(a, b, operator):
    """Raw terms of ``operator(a, b)``; ``operator`` maps orders -> coefficient."""
    raw = []
    for (k, c), (l, d) in product(a._terms.items(), b._terms.items()):
        diff = [kv - lv for kv, lv in zip(k, l)]
        expo = tuple(kv + lv for kv, lv in zip(k, l))
        for orders, w in operator:
            f = complex(w) * c * d
            for dv, m in zip(diff, orders):
                f *= dv**m
            raw.append((f, expo))
    return raw


def hirota_D(a: ExpPoly, b: ExpPoly, orders) -> ExpPoly:
    """Hirota derivative ``D_X^mX D_T1^m1 D_T2^m2 a.b``."""
    orders = tuple(int(o) for o in orders)
    if len(orders) != 3 or any(o < 0 for o in orders):
        raise ValidationError(f"orders must be three non-negative integers, got {orders}")
    return ExpPoly(_contributions(a, b, [(orders, 1.0)]))


@dataclass(frozen=True)
class BilinearForm:
    """Polynomial in Hirota operators, ``sum_o c_o D^o`` with ``o`` in N^3.

    Coefficients may be numbers or sympy expressions; numeric application
    requires them to be numeric.
    """

    terms: tuple  # ((orders, coefficient), ...)

    def __post_init__(self):
        for orders, _ in self.terms:
            if len(orders) != 3 or any(o < 0 or o > 2 for o in orders):
                raise ValidationError(f"each order must be in 0..2, got {orders}")

    def apply(self, G: ExpPoly, F: ExpPoly) -> ExpPoly:
        return ExpPoly(_contributions(G, F, [(o, complex(c)) for o, c in self.terms]))

    def symbol(self, diff):
        """The form's polynomial evaluated at a (possibly symbolic) difference vector."""
        total = 0
        for orders, c in self.terms:
            f = c
            for dv, m in zip(diff, orders):
                f = f * dv**m
            total = total + f
        return total

    def with_constant(self, c0):
        kept = tuple((o, c) for o, c in self.terms if tuple(o) != (0, 0, 0))
        return BilinearForm(kept + (((0, 0, 0), c0),))


def quadratic_form(alpha_tilde, constant=-1):
    """``D_X D_T1 + D_X D_T2 + alpha~ (D_T1 + D_T2) + constant``."""
    return BilinearForm(
        (
            ((1, 1, 0), 1),
            ((1, 0, 1), 1),
            ((0, 1, 0), alpha_tilde),
            ((0, 0, 1), alpha_tilde),
            ((0, 0, 0), constant),
        )
    )


def cubic_form(alpha_tilde, constant=1):
    return quadratic_form(alpha_tilde, constant)


DXX = BilinearForm((((2, 0, 0), 1),))


def bilinear_residual_quadratic(G: ExpPoly, F: ExpPoly, alpha_tilde):
    """Residuals of the quad-free bilinear pair.

    Returns ``(form(G, F), D_X^2 F.F - G^2/2)`` where ``form`` is
    ``D_X D_T1 + D_X D_T2 + alpha~ (D_T1 + D_T2) - 1``.
    """
    first = quadratic_form(alpha_tilde, -1).apply(G, F)
    second = DXX.apply(F, F) - 0.5 * (G * G)
    return first, second


def bilinear_residual_cubic(G: ExpPoly, F: ExpPoly, alpha_tilde):
    """Residuals of the mixed-case pair; constant ``+1`` and ``(G^2 + 2GF)/2``."""
    first = cubic_form(alpha_tilde, 1).apply(G, F)
    second = DXX.apply(F, F) - 0.5 * (G * G + 2 * (G * F))
    return first, second


def one_soliton_pair(K, omega1, omega2, theta0=0.0):
    """``G = 4K e^theta``, ``F = 1 + e^{2 theta}`` with
    ``theta = K X - omega1 T1 - omega2 T2 + theta0``; then ``G/F = 2K sech(theta)``.
    """
    k = (K, -omega1, -omega2)
    e0 = cmath.exp(theta0)
    G = ExpPoly.monomial(4 * K * e0, k)
    F = ExpPoly([(1.0, (0, 0, 0)), (e0 * e0, tuple(2 * v for v in k))])
    return G, F


# -- symbolic collection of dispersion conditions -----------------------------

K_SYM, W1_SYM, W2_SYM = sp.symbols("K omega1 omega2")


@dataclass(frozen=True)
class Template:
    """Exponential ansatz ``sum_j c_j e^{n_j theta}`` with integer multiples ``n_j``."""

    terms: tuple  # ((coefficient, multiple), ...)


def dispersion_from_ansatz(form: BilinearForm, G_template: Template, F_template: Template,
                           second_member=None, nonzero=None):
    """Collect the bilinear residual of an ansatz by exponent level.

    The shared phase is ``theta = K X - omega1 T1 - omega2 T2`` with symbols
    :data:`K_SYM`, :data:`W1_SYM`, :data:`W2_SYM`. ``second_member`` is an
    optional callable ``(G_terms, F_terms) -> {level: expr}`` adding
    non-bilinear pieces (e.g. ``-G^2/2``).

    Returns ``{level: condition}`` where each condition is the residual at
    ``e^{level theta}`` with factors in ``nonzero`` (template coefficients and
    ``K`` by default) and numeric constants stripped.
    """
    if not G_template.terms or not F_template.terms:
        raise ValidationError("ansatz templates must be non-empty")
    kvec = (K_SYM, -W1_SYM, -W2_SYM)
    levels = {}
    for (c, n), (d, m) in product(G_template.terms, F_template.terms):
        diff = [(n - m) * kv for kv in kvec]
        levels[n + m] = levels.get(n + m, 0) + c * d * form.symbol(diff)
    if second_member is not None:
        for lvl, expr in second_member(G_template.terms, F_template.terms).items():
            levels[lvl] = levels.get(lvl, 0) + expr
    if nonzero is None:
        nonzero = {K_SYM}
        for c, _ in (*G_template.terms, *F_template.terms):
            nonzero |= set(sp.sympify(c).free_symbols)
    out = {}
    for lvl in sorted(levels):
        expr = sp.expand(levels[lvl])
        if expr == 0:
            out[lvl] = sp.Integer(0)
            continue
        _, factors = sp.factor_list(expr)
        kept = [f**e for f, e in factors if not (f.is_Symbol and f in nonzero)]
        out[lvl] = sp.expand(sp.Mul(*kept)) if kept else sp.Integer(1)
    return out


def quadratic_second_member(G_terms, F_terms):
    """``D_X^2 F.F - G^2/2`` collected by level, for the ansatz phase."""
    out = {}
    for (c, n), (d, m) in product(F_terms, F_terms):
        out[n + m] = out.get(n + m, 0) + c * d * ((n - m) * K_SYM) ** 2
    for (c, n), (d, m) in product(G_terms, G_terms):
        out[n + m] = out.get(n + m, 0) - sp.Rational(1, 2) * c * d
    return out


def cubic_second_member(G_terms, F_terms):
    """``D_X^2 F.F - (G^2 + 2 G F)/2`` collected by level."""
    out = quadratic_second_member(G_terms, F_terms)
    for (c, n), (d, m) in product(G_terms, F_terms):
        out[n + m] = out.get(n + m, 0) - c * d
    return out


def numeric_levels(poly: ExpPoly, K, omega1, omega2):
    """Split an ExpPoly built on ``theta`` into ``{level: coefficient}``.

    Every exponent must be an integer multiple of ``(K, -omega1, -omega2)``.
    """
    base = np.array([K, -omega1, -omega2], dtype=complex)
    j = int(np.argmax(np.abs(base)))
    out = {}
    for k, c in poly.items():
        n = k[j] / base[j]
        lvl = int(round(n.real))
        if not np.allclose(np.array(k), lvl * base, rtol=1e-12, atol=1e-12 * (1 + np.abs(base).max())):
            raise ValidationError(f"exponent {k} is not a multiple of the phase vector")
        out[lvl] = out.get(lvl, 0) + c
    return out
