"""Scalar test fields u(x, y, t) with partial derivatives.

Two flavours are provided. :class:`SymbolicField` differentiates a sympy
expression exactly and is the preferred route. :class:`SampledField` wraps a
plain callable and falls back to 4th-order central finite differences.
"""

from __future__ import annotations

import itertools

import numpy as np
import sympy as sp

from .errors import ValidationError

_EPS = np.finfo(float).eps

# 4th-order central stencils on offsets -2..2
_STENCILS = {
    0: np.array([0.0, 0.0, 1.0, 0.0, 0.0]),
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}
_OFFSETS = np.arange(-2, 3)


class Field:
    """Base class; subclasses implement :meth:`partial`."""

    def partial(self, orders, x, y, t):
        raise NotImplementedError

    def __call__(self, x, y, t):
        return self.partial((0, 0, 0), x, y, t)


class SymbolicField(Field):
    """Field given by a sympy expression in the symbols ``x, y, t``.

    Examples
    --------
    >>> f = SymbolicField.from_string("sin(x - 2*t)")
    >>> round(float(f.partial((1, 0, 0), 0.0, 0.0, 0.0)), 12)
    1.0
    """

    x, y, t = sp.symbols("x y t", real=True)

    def __init__(self, expr):
        self.expr = sp.sympify(expr)
        self._cache = {}

    @classmethod
    def from_string(cls, text):
        return cls(sp.sympify(text, locals={"x": cls.x, "y": cls.y, "t": cls.t}))

    def _compiled(self, orders):
        fn = self._cache.get(orders)
        if fn is None:
            nx, ny, nt = orders
            d = self.expr
            for sym, n in ((self.x, nx), (self.y, ny), (self.t, nt)):
                if n:
                    d = sp.diff(d, sym, n)
            fn = sp.lambdify((self.x, self.y, self.t), d, modules=["numpy"])
            self._cache[orders] = fn
        return fn

    def partial(self, orders, x, y, t):
        return self._compiled(tuple(int(o) for o in orders))(x, y, t)


def fd_step(coord, order):
    """Step size for a 4th-order stencil of the given derivative order.

    The round-off/truncation balance for an order-``m`` derivative with a
    4th-order stencil sits at ``eps**(1/(4+m))``.
    """
    if order == 0:
        return 0.0
    return _EPS ** (1.0 / (4 + order)) * max(1.0, abs(coord))


class SampledField(Field):
    """Field backed by a plain callable ``f(x, y, t)``.

    Derivatives use tensor products of 4th-order central stencils; each axis
    supports orders 0, 1 and 2.
    """

    def __init__(self, func):
        self.func = func

    def partial(self, orders, x, y, t):
        orders = tuple(int(o) for o in orders)
        if any(o not in _STENCILS for o in orders):
            raise ValidationError(f"finite-difference orders must be 0..2 per axis, got {orders}")
        point = (float(x), float(y), float(t))
        steps = [fd_step(c, o) for c, o in zip(point, orders)]
        total = 0.0
        for idx in itertools.product(range(5), repeat=3):
            w = 1.0
            for axis, i in enumerate(idx):
                w *= _STENCILS[orders[axis]][i]
            if w == 0.0:
                continue
            shifted = [c + _OFFSETS[i] * h for c, i, h in zip(point, idx, steps)]
            val = self.func(*shifted)
            if not np.isfinite(val):
                raise ValidationError(
                    f"non-finite sample {val!r} in stencil for orders {orders} at {tuple(shifted)}"
                )
            total = total + w * val
        scale = 1.0
        for h, o in zip(steps, orders):
            if o:
                scale *= h**o
        return total / scale


def directional(field, x, y, t):
    """Derivatives needed by the physical-frame residuals.

    Returns a dict with ``u``, ``Du``, ``DDu``, ``Dut``, ``utt`` where
    ``D = d/dx + d/dy``.
    """
    p = field.partial
    u = p((0, 0, 0), x, y, t)
    ux = p((1, 0, 0), x, y, t)
    uy = p((0, 1, 0), x, y, t)
    uxx = p((2, 0, 0), x, y, t)
    uxy = p((1, 1, 0), x, y, t)
    uyy = p((0, 2, 0), x, y, t)
    uxt = p((1, 0, 1), x, y, t)
    uyt = p((0, 1, 1), x, y, t)
    utt = p((0, 0, 2), x, y, t)
    return {
        "u": u,
        "Du": ux + uy,
        "DDu": uxx + 2 * uxy + uyy,
        "Dut": uxt + uyt,
        "utt": utt,
    }
