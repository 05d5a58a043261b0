"""Scalar time functions used as rate schedules and coherence factors.

A :class:`ScalarFn` is a named preset with parameters, evaluable for
``t >= 0`` together with its derivative and its integral from 0.  Presets
have closed forms for all three; :meth:`ScalarFn.from_callable` wraps an
arbitrary function and falls back to adaptive quadrature and central
differences.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import NumericalError, ValidationError

KINDS = ("constant", "polynomial", "exp_decay", "piecewise_constant", "callable")

_FD_STEP = 1e-6


def _as_number(x):
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(x[0], x[1])
    if isinstance(x, complex):
        return x
    return float(x)


@dataclass(frozen=True)
class ScalarFn:
    """Preset scalar function of elapsed time.

    Kinds and parameters:

    * ``constant``: ``value``
    * ``polynomial``: ``coeffs`` (ascending powers, ``c0 + c1 t + ...``)
    * ``exp_decay``: ``c``, ``lam``, ``omega`` giving ``c exp(-lam t) exp(-i omega t)``
    * ``piecewise_constant``: ``breakpoints`` (strictly increasing, > 0) and
      ``values`` (one more than breakpoints); right-continuous
    """

    kind: str
    params: Tuple = ()
    func: Optional[Callable] = field(default=None, compare=False, repr=False)

    # constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value):
        return cls("constant", (_as_number(value),))

    @classmethod
    def polynomial(cls, coeffs):
        coeffs = tuple(_as_number(c) for c in coeffs)
        if not coeffs:
            raise ValidationError("polynomial needs at least one coefficient")
        return cls("polynomial", coeffs)

    @classmethod
    def exp_decay(cls, c=1.0, lam=0.0, omega=0.0):
        return cls("exp_decay", (_as_number(c), float(lam), float(omega)))

    @classmethod
    def piecewise_constant(cls, breakpoints, values):
        bps = tuple(float(b) for b in breakpoints)
        vals = tuple(_as_number(v) for v in values)
        if len(vals) != len(bps) + 1:
            raise ValidationError("piecewise_constant needs len(values) == len(breakpoints) + 1")
        if any(b <= 0 for b in bps) or any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValidationError("piecewise_constant breakpoints must be positive and strictly increasing")
        return cls("piecewise_constant", (bps, vals))

    @classmethod
    def from_callable(cls, func, name="callable"):
        return cls("callable", (name,), func)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown ScalarFn kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "callable" and self.func is None:
            raise ValidationError("callable ScalarFn requires func")
        if self.kind != "callable":
            for v in self._flat_params():
                if not np.isfinite(v):
                    raise ValidationError(f"{self.kind} parameter {v!r} is not finite")

    def _flat_params(self):
        if self.kind == "piecewise_constant":
            return self.params[0] + self.params[1]
        return self.params

    @property
    def is_complex(self):
        if self.kind == "exp_decay":
            return isinstance(self.params[0], complex) or self.params[2] != 0.0
        if self.kind == "callable":
            return True
        return any(isinstance(v, complex) for v in self._flat_params())

    @property
    def breakpoints(self):
        return self.params[0] if self.kind == "piecewise_constant" else ()

    # evaluation -------------------------------------------------------
    def __call__(self, t):
        t = float(t)
        k = self.kind
        if k == "constant":
            return self.params[0]
        if k == "polynomial":
            return _horner(self.params, t)
        if k == "exp_decay":
            c, lam, om = self.params
            return _exp_decay_value(c, lam, om, t)
        if k == "piecewise_constant":
            bps, vals = self.params
            return vals[int(np.searchsorted(bps, t, side="right"))]
        return self.func(t)

    def derivative(self, t):
        t = float(t)
        k = self.kind
        if k == "constant" or k == "piecewise_constant":
            return 0.0
        if k == "polynomial":
            deriv = tuple(i * c for i, c in enumerate(self.params))[1:] or (0.0,)
            return _horner(deriv, t)
        if k == "exp_decay":
            c, lam, om = self.params
            return -(lam + 1j * om) * _exp_decay_value(c, lam, om, t)
        h = _FD_STEP * max(1.0, abs(t))
        if t - h < 0:
            # one-sided second-order difference at the domain edge
            return (-3 * self(t) + 4 * self(t + h) - self(t + 2 * h)) / (2 * h)
        return (self(t + h) - self(t - h)) / (2 * h)

    def integral(self, t, atol=1e-12):
        """``int_0^t self(u) du``."""
        t = float(t)
        k = self.kind
        if k == "constant":
            return self.params[0] * t
        if k == "polynomial":
            anti = (0.0,) + tuple(c / (i + 1) for i, c in enumerate(self.params))
            return _horner(anti, t)
        if k == "exp_decay":
            c, lam, om = self.params
            z = lam + 1j * om
            if z == 0:
                return c * t
            # c (1 - exp(-z t)) / z, stable for small |z t|
            val = -c * np.expm1(-z * t) / z
            return val if self.is_complex else float(np.real(val))
        if k == "piecewise_constant":
            bps, vals = self.params
            total, left = 0.0, 0.0
            for b, v in zip(bps, vals):
                if t <= b:
                    return total + v * (t - left)
                total += v * (b - left)
                left = b
            return total + vals[-1] * (t - left)
        return _adaptive_integral(self.func, 0.0, t, atol)

    def integral_between(self, lo, hi, atol=1e-12):
        if self.kind == "callable":
            return _adaptive_integral(self.func, lo, hi, atol)
        return self.integral(hi, atol) - self.integral(lo, atol)

    def conj(self):
        """Complex conjugate function."""
        k = self.kind
        if k == "constant" or k == "polynomial":
            return ScalarFn(k, tuple(_conj(v) for v in self.params))
        if k == "exp_decay":
            c, lam, om = self.params
            return ScalarFn(k, (_conj(c), lam, -om))
        if k == "piecewise_constant":
            return ScalarFn(k, (self.params[0], tuple(_conj(v) for v in self.params[1])))
        func = self.func
        return ScalarFn.from_callable(lambda t: np.conj(func(t)), f"conj({self.params[0]})")

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": _num_out(self.params[0])}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coeffs": [_num_out(c) for c in self.params]}
        if self.kind == "exp_decay":
            c, lam, om = self.params
            return {"kind": "exp_decay", "c": _num_out(c), "lam": lam, "omega": om}
        if self.kind == "piecewise_constant":
            return {
                "kind": "piecewise_constant",
                "breakpoints": list(self.params[0]),
                "values": [_num_out(v) for v in self.params[1]],
            }
        raise ValidationError("callable ScalarFn cannot be serialized")

    @classmethod
    def from_dict(cls, desc):
        desc = dict(desc)
        kind = desc.pop("kind", None)
        allowed = {
            "constant": {"value"},
            "polynomial": {"coeffs"},
            "exp_decay": {"c", "lam", "omega"},
            "piecewise_constant": {"breakpoints", "values"},
        }
        if kind not in allowed:
            raise ValidationError(f"unknown scalar function kind {kind!r}")
        extra = set(desc) - allowed[kind]
        if extra:
            raise ValidationError(f"unknown key(s) for {kind}: {sorted(extra)}")
        try:
            if kind == "constant":
                return cls.constant(desc["value"])
            if kind == "polynomial":
                return cls.polynomial(desc["coeffs"])
            if kind == "exp_decay":
                return cls.exp_decay(desc.get("c", 1.0), desc.get("lam", 0.0), desc.get("omega", 0.0))
            return cls.piecewise_constant(desc["breakpoints"], desc["values"])
        except KeyError as exc:
            raise ValidationError(f"{kind}: missing key {exc.args[0]!r}") from None


def _horner(coeffs, t):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _exp_decay_value(c, lam, om, t):
    if om == 0.0 and not isinstance(c, complex):
        return c * math.exp(-lam * t)
    return c * np.exp(-(lam + 1j * om) * t)


def _conj(x):
    return x.conjugate() if isinstance(x, complex) else x


def _num_out(x):
    return [x.real, x.imag] if isinstance(x, complex) else x


def _adaptive_integral(func, lo, hi, atol):
    if hi == lo:
        return 0.0
    re, err_re = quad(lambda u: np.real(func(u)), lo, hi, epsabs=atol, epsrel=0, limit=200)
    im, err_im = quad(lambda u: np.imag(func(u)), lo, hi, epsabs=atol, epsrel=0, limit=200)
    if max(err_re, err_im) > 100 * atol:
        raise NumericalError(f"adaptive quadrature did not converge on [{lo}, {hi}]")
    return re if im == 0.0 else complex(re, im)
