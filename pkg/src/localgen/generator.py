"""Exponent families Z(t, t0) and the local generators they induce.

A dynamical map written as ``Lambda(t, t0) = expm(Z(t, t0))`` with
``Z(t, t0) = int_{t0}^t X(u, t0) du`` solves ``dLambda/dt = L(t, t0) Lambda``
with

    L(t, t0) = int_0^1 expm(s Z) X expm(-s Z) ds.

:func:`local_generator` evaluates this integral two ways: Gauss-Legendre
quadrature of the integrand, and the Frechet derivative of ``expm`` at ``Z``
along ``X`` followed by multiplication with ``expm(-Z)``.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.integrate import quad_vec

from .errors import ConsistencyError, DimensionError, DomainError, NumericalError, ValidationError
from .lindblad import Verdict, Witness, is_lindblad_generator
from .scalar import ScalarFn
from .superop import as_cmatrix, commutator, expm, expm_frechet, max_abs, superop_dim

__all__ = [
    "LinearZ",
    "CallableZ",
    "GeneratorFamily",
    "z_at",
    "x_at",
    "local_generator",
    "is_commutative",
    "integrated_generator",
    "gauss_legendre_01",
]

_FD_REL_STEP = 1e-6


def _check_time(t, t0):
    if t < t0:
        raise DomainError(f"t={t} precedes the initial time t0={t0}")


def gauss_legendre_01(n):
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True, eq=False)
class LinearZ:
    """``Z(t, t0) = sum_k A_k(t, t0) L_k`` with fixed Lindblad generators ``L_k``.

    Parameters
    ----------
    generators : sequence of (d**2, d**2) arrays
        Time-independent generators; each must pass :func:`is_lindblad_generator`.
    coefficients : sequence of ScalarFn
        Rate schedules ``a_k``.
    t0 : float
        Initial time.
    homogeneous : bool
        If True the schedules are functions of elapsed time, ``a_k(u - t0)``,
        so the family depends on ``t - t0`` only.  Otherwise ``a_k(u)`` is
        read on the absolute clock.
    """

    generators: Tuple[np.ndarray, ...]
    coefficients: Tuple[ScalarFn, ...]
    t0: float = 0.0
    homogeneous: bool = True
    check_generators: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        gens = tuple(as_cmatrix(g, "generator") for g in self.generators)
        coefs = tuple(self.coefficients)
        if not gens or len(gens) != len(coefs):
            raise ValidationError("LinearZ needs one coefficient per generator (and at least one)")
        dim = superop_dim(gens[0])
        for k, g in enumerate(gens):
            if g.shape != gens[0].shape:
                raise DimensionError(f"generator {k} has shape {g.shape}, expected {gens[0].shape}")
            if self.check_generators:
                verdict = is_lindblad_generator(g)
                if not verdict:
                    raise ValidationError(f"generator {k} is not a Lindblad generator: {verdict.witness}")
        for k, c in enumerate(coefs):
            if not isinstance(c, ScalarFn):
                raise ValidationError(f"coefficient {k} must be a ScalarFn")
        if not self.homogeneous and self.t0 < 0:
            raise DomainError("absolute-clock schedules are defined for t >= 0 only")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "_dim", dim)

    @property
    def dim(self):
        return self._dim

    def with_t0(self, t0):
        return replace(self, t0=float(t0), check_generators=False)

    def rates(self, t):
        """Schedules ``a_k(t, t0)``."""
        _check_time(t, self.t0)
        u = t - self.t0 if self.homogeneous else t
        return np.array([c(u) for c in self.coefficients])

    def integrated_rates(self, t):
        """``A_k(t, t0) = int_{t0}^t a_k(u, t0) du``."""
        _check_time(t, self.t0)
        if self.homogeneous:
            return np.array([c.integral(t - self.t0) for c in self.coefficients])
        return np.array([c.integral_between(self.t0, t) for c in self.coefficients])

    def combine(self, weights):
        return sum(w * g for w, g in zip(weights, self.generators))

    def z(self, t):
        return self.combine(self.integrated_rates(t))

    def x(self, t):
        return self.combine(self.rates(t))


@dataclass(frozen=True, eq=False)
class CallableZ:
    """Exponent family given by a function ``func(t, t0) -> (d**2, d**2) array``.

    ``X`` is obtained by central differences of ``func`` in ``t``.
    """

    func: Callable[[float, float], np.ndarray]
    dim: int
    t0: float = 0.0
    zero_tol: float = 1e-12

    def __post_init__(self):
        z0 = np.asarray(self.func(self.t0, self.t0))
        if z0.shape != (self.dim ** 2, self.dim ** 2):
            raise DimensionError(f"Z has shape {z0.shape}, expected {(self.dim ** 2,) * 2}")
        if max_abs(z0) > self.zero_tol:
            raise ValidationError(f"Z(t0, t0) must vanish, got norm {max_abs(z0):.3e}")

    def with_t0(self, t0):
        return replace(self, t0=float(t0))

    def z(self, t):
        _check_time(t, self.t0)
        return np.asarray(self.func(t, self.t0), dtype=complex)

    def x(self, t):
        _check_time(t, self.t0)
        h = _FD_REL_STEP * max(1.0, abs(t))
        f = lambda u: np.asarray(self.func(u, self.t0), dtype=complex)
        if t - h < self.t0:
            return (-3 * f(t) + 4 * f(t + h) - f(t + 2 * h)) / (2 * h)
        return (f(t + h) - f(t - h)) / (2 * h)


def z_at(zf, t):
    """``Z(t, t0)`` of an exponent family."""
    return zf.z(t)


def x_at(zf, t):
    """``X(t, t0) = dZ/dt``."""
    return zf.x(t)


def _main_formula_quadrature(z, x, n_nodes):
    nodes, weights = gauss_legendre_01(n_nodes)
    out = np.zeros_like(z)
    for s, w in zip(nodes, weights):
        out += w * (expm(s * z) @ x @ expm(-s * z))
    return out


def _main_formula_frechet(z, x):
    _, deriv = expm_frechet(z, x)
    return deriv @ expm(-z)


def local_generator(zf, t, method="frechet", n_nodes=32, tol=1e-6):
    """Local generator ``L(t, t0) = int_0^1 e^{sZ} X e^{-sZ} ds``.

    Parameters
    ----------
    method : {"frechet", "quadrature", "both"}
        ``"both"`` evaluates the two routes and raises
        :class:`ConsistencyError` if they differ by more than ``tol``
        (max absolute entry); the Frechet value is returned.
    n_nodes : int
        Gauss-Legendre nodes for the quadrature route (at least 4).
    """
    if method not in ("frechet", "quadrature", "both"):
        raise ValidationError(f"unknown method {method!r}")
    if method != "frechet" and n_nodes < 4:
        raise ValidationError("quadrature needs at least 4 nodes")
    z = zf.z(t)
    x = zf.x(t)
    if method == "quadrature":
        return _main_formula_quadrature(z, x, n_nodes)
    fre = _main_formula_frechet(z, x)
    if method == "both":
        quad = _main_formula_quadrature(z, x, n_nodes)
        dev = max_abs(fre - quad)
        if dev > tol:
            raise ConsistencyError(f"main formula routes disagree at t={t}", fre, quad, dev)
    return fre


def is_commutative(zf, sample_times: Sequence[float], tol: float = 1e-12) -> Verdict:
    """Sample ``max |[X(t), X(u)]|`` over pairs of times.

    A pass is evidence, not proof.  A single-generator ``LinearZ`` passes by
    structure.
    """
    times = list(sample_times)
    if len(times) < 3:
        raise ValidationError("is_commutative needs at least 3 sample times")
    if isinstance(zf, LinearZ) and len(zf.generators) == 1:
        return Verdict(True, None, tol, {"max_commutator": 0.0, "by_structure": True})
    xs = [zf.x(t) for t in times]
    worst, pair = 0.0, None
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            n = max_abs(commutator(xs[i], xs[j]))
            if n > worst:
                worst, pair = n, (times[i], times[j])
    details = {"max_commutator": worst, "pair": pair}
    if worst > tol:
        return Verdict(False, Witness(worst, f"[X(t), X(u)] != 0 at (t, u) = {pair}"), tol, details)
    return Verdict(True, None, tol, details)


@dataclass(frozen=True, eq=False)
class GeneratorFamily:
    """Local generator ``L(t, t0)`` as a function of both times.

    ``eval(t, t0)`` returns a superoperator matrix; calling the family with a
    single time uses the stored ``t0``.
    """

    dim: int
    eval: Callable[[float, float], np.ndarray]
    provenance: str = "user_supplied"
    t0: float = 0.0
    breakpoints: Tuple[float, ...] = ()  # elapsed times of kinks in t -> L(t, t0)

    def __call__(self, t):
        return self.eval(t, self.t0)

    def with_t0(self, t0):
        return replace(self, t0=float(t0))

    @classmethod
    def from_z_family(cls, zf, method="frechet", n_nodes=32):
        def ev(t, t0):
            return local_generator(zf.with_t0(t0), t, method=method, n_nodes=n_nodes)

        bps = ()
        if isinstance(zf, LinearZ) and zf.homogeneous:
            bps = tuple(sorted({b for c in zf.coefficients for b in c.breakpoints}))
        return cls(zf.dim, ev, "from_main_formula", zf.t0, bps)

    @classmethod
    def constant(cls, generator, t0=0.0, provenance="user_supplied"):
        g = as_cmatrix(generator, "generator")
        d = superop_dim(g)
        return cls(d, lambda t, t0_: g, provenance, t0)


def integrated_generator(gf: GeneratorFamily, t, atol=1e-10):
    """``int_{t0}^t L(u, t0) du`` by adaptive quadrature."""
    _check_time(t, gf.t0)
    if t == gf.t0:
        return np.zeros((gf.dim ** 2,) * 2, dtype=complex)
    points = [gf.t0 + b for b in gf.breakpoints if gf.t0 < gf.t0 + b < t] or None
    val, err = quad_vec(gf, gf.t0, t, epsabs=atol, epsrel=0.0, points=points, limit=2000)
    if not np.all(np.isfinite(val)) or err > 10 * atol:
        raise NumericalError(f"generator integration failed on [{gf.t0}, {t}] (error estimate {err:.3e})")
    return val
