"""Exactly solvable qubit models used as oracles for the generic machinery.

* Pure decoherence: ``Lambda(t) rho = sum_mn c_mn(t) P_m rho P_n`` with
  ``c_nn = 1``; its generator is ``sum_mn (c_mn'/c_mn) P_m . P_n``.
* Two-rate model: ``X(t) = a1(t) L1 + a2(t) L2`` over the raising and lowering
  generators, whose commutator is ``[L1, L2] = L1 - L2``.  The local
  generator stays in their span, ``L(t) = (a1 + f) L1 + (a2 - f) L2``.
* The dephasing family ``Z(t) = -log(cos t) L0`` on ``[0, pi/2)``.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericalError, SingularityError, ValidationError
from .generator import CallableZ, GeneratorFamily, LinearZ
from .lindblad import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    LindbladSpec,
    build_generator,
    is_cpt_map,
    is_lindblad_generator,
)
from .scalar import ScalarFn
from .superop import expm, hermitian_eigvals, max_abs, sandwich_superop

__all__ = [
    "dephasing_generator",
    "raising_generator",
    "lowering_generator",
    "PureDecoherenceModel",
    "pure_decoherence_map",
    "pure_decoherence_generator",
    "qubit_dephasing_rates",
    "pure_decoherence_family",
    "TwoRateModel",
    "two_rate_f",
    "two_rate_generator",
    "two_rate_disentangle",
    "two_rate_B",
    "scan_B_negativity",
    "random_piecewise_schedules",
    "sigma_z_family",
    "sigma_z_limit_study",
]


def _zero2():
    return np.zeros((2, 2), dtype=complex)


def dephasing_generator():
    """``L0 rho = sz rho sz - rho``."""
    return build_generator(LindbladSpec(_zero2(), ((1.0, SIGMA_Z),)))


def raising_generator():
    """``L1 rho = s+ rho s- - {s- s+, rho}/2`` with ``s+ = |1><2|``."""
    return build_generator(LindbladSpec(_zero2(), ((1.0, SIGMA_PLUS),)))


def lowering_generator():
    """``L2 rho = s- rho s+ - {s+ s-, rho}/2``."""
    return build_generator(LindbladSpec(_zero2(), ((1.0, SIGMA_MINUS),)))


def _projectors(n):
    eye = np.eye(n, dtype=complex)
    return [np.outer(eye[k], eye[k]) for k in range(n)]


# -- pure decoherence ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PureDecoherenceModel:
    """Dephasing map with coherence factors ``c_mn`` of elapsed time.

    ``coeffs[m][n]`` is a :class:`ScalarFn`; the diagonal must be the
    constant 1.  Use :meth:`qubit` for the two-level case with ``c_12 = gamma``.
    """

    coeffs: Tuple[Tuple[ScalarFn, ...], ...]
    t0: float = 0.0
    psd_tol: float = 1e-10

    def __post_init__(self):
        n = len(self.coeffs)
        if n < 2 or any(len(row) != n for row in self.coeffs):
            raise ValidationError("coefficient table must be square with n >= 2")
        for k in range(n):
            c = self.coeffs[k][k]
            if not (c.kind == "constant" and c.params[0] == 1):
                raise ValidationError(f"diagonal coefficient c[{k}][{k}] must be the constant 1")
        object.__setattr__(self, "coeffs", tuple(tuple(r) for r in self.coeffs))

    @classmethod
    def qubit(cls, gamma: ScalarFn, t0=0.0):
        one = ScalarFn.constant(1.0)
        return cls(((one, gamma), (gamma.conj(), one)), t0)

    @property
    def dim(self):
        return len(self.coeffs)

    def _elapsed(self, t):
        if t < self.t0:
            raise DomainError(f"t={t} precedes t0={self.t0}")
        return t - self.t0

    def coefficient_matrix(self, t):
        u = self._elapsed(t)
        return np.array([[c(u) for c in row] for row in self.coeffs], dtype=complex)

    def coefficient_derivatives(self, t):
        u = self._elapsed(t)
        return np.array([[c.derivative(u) for c in row] for row in self.coeffs], dtype=complex)

    def check_psd(self, t):
        c = self.coefficient_matrix(t)
        lo = hermitian_eigvals(c, tol=1e-10)[0]
        if lo < -self.psd_tol:
            raise ValidationError(f"coefficient matrix not PSD at t={t}: eigenvalue {lo:.3e}")
        return lo


def pure_decoherence_map(m: PureDecoherenceModel, t):
    """``sum_mn c_mn(t) P_m . P_n`` after checking ``[c_mn]`` is PSD."""
    m.check_psd(t)
    c = m.coefficient_matrix(t)
    proj = _projectors(m.dim)
    return sum(c[i, j] * sandwich_superop(proj[i], proj[j]) for i in range(m.dim) for j in range(m.dim))


def pure_decoherence_generator(m: PureDecoherenceModel, t, zero_tol=1e-14):
    """``sum_mn alpha_mn P_m . P_n`` with ``alpha_mn = c_mn' / c_mn``."""
    c = m.coefficient_matrix(t)
    dc = m.coefficient_derivatives(t)
    bad = np.argwhere(np.abs(c) <= zero_tol)
    if bad.size:
        i, j = bad[0]
        raise SingularityError(f"coherence factor c[{i}][{j}] vanishes at t={t}")
    alpha = dc / c
    proj = _projectors(m.dim)
    return sum(alpha[i, j] * sandwich_superop(proj[i], proj[j]) for i in range(m.dim) for j in range(m.dim))


def qubit_dephasing_rates(m: PureDecoherenceModel, t):
    """``(b1, b2)`` with ``L rho = i b1 [sz, rho] - b2 (sz rho sz - rho)``.

    ``b1 = Im(gamma'/(2 gamma))`` and ``b2 = Re(gamma'/(2 gamma))``.
    """
    if m.dim != 2:
        raise ValidationError("qubit rates need a two-level model")
    u = m._elapsed(t)
    gamma = m.coeffs[0][1]
    g = gamma(u)
    if abs(g) <= 1e-14:
        raise SingularityError(f"gamma vanishes at t={t}")
    half = gamma.derivative(u) / (2 * g)
    return float(np.imag(half)), float(np.real(half))


def pure_decoherence_family(m: PureDecoherenceModel):
    """Analytic generator family; ``t0`` of the family shifts the model clock."""

    def ev(t, t0):
        return pure_decoherence_generator(_shift(m, t0), t)

    return GeneratorFamily(m.dim, ev, "analytic_model", m.t0)


def _shift(m, t0):
    return m if t0 == m.t0 else PureDecoherenceModel(m.coeffs, t0, m.psd_tol)


# -- two-rate model -------------------------------------------------------------


class TwoRateQuantities(NamedTuple):
    a1: float
    a2: float
    A1: float
    A2: float
    A: float
    W: float
    f: float


def _expm1_over(x):
    """``(exp(x) - 1) / x`` with the removable singularity at 0."""
    return 1.0 if x == 0 else math.expm1(x) / x


def _bracket_over_A(A):
    """``(1 + (exp(-A) - 1) / A) / A``, series below ``|A| < 1e-4``."""
    if abs(A) < 1e-4:
        return 0.5 - A / 6 + A * A / 24
    return (1.0 + math.expm1(-A) / A) / A


@dataclass(frozen=True, eq=False)
class TwoRateModel:
    """``X(t) = a1(t) L1 + a2(t) L2`` with real schedules, ``t0 = 0``."""

    a1: ScalarFn
    a2: ScalarFn
    quad_tol: float = 1e-10

    def __post_init__(self):
        if self.a1.is_complex or self.a2.is_complex:
            raise ValidationError("two-rate schedules must be real")

    def quantities(self, t) -> TwoRateQuantities:
        if t < 0:
            raise DomainError(f"t={t} must be >= 0")
        a1, a2 = float(self.a1(t)), float(self.a2(t))
        A1, A2 = float(self.a1.integral(t)), float(self.a2.integral(t))
        A = A1 + A2
        W = A1 * a2 - A2 * a1
        return TwoRateQuantities(a1, a2, A1, A2, A, W, W * _bracket_over_A(A))

    def F(self, t):
        """``int_0^t f(u) du`` by adaptive quadrature."""
        if t < 0:
            raise DomainError(f"t={t} must be >= 0")
        if t == 0:
            return 0.0
        pts = sorted({b for b in self.a1.breakpoints + self.a2.breakpoints if 0 < b < t}) or None
        val, err = quad(lambda u: self.quantities(u).f, 0.0, t, epsabs=self.quad_tol, epsrel=0.0,
                        points=pts, limit=200)
        if not np.isfinite(val) or err > 10 * self.quad_tol:
            raise NumericalError(f"quadrature of f failed on [0, {t}] (error estimate {err:.3e})")
        return val

    def nu(self, t):
        """Disentangling exponents ``(nu1, nu2)``; both are 1 when ``A = 0``."""
        q = self.quantities(t)
        nu1 = 1.0 / (1.0 + q.A1 * -_expm1_over(-q.A))
        nu2 = 1.0 + q.A2 * _expm1_over(q.A)
        return nu1, nu2

    def z_family(self):
        return LinearZ((raising_generator(), lowering_generator()), (self.a1, self.a2))

    def generator_family(self):
        """Analytic ``L(t, t0)``; the model is homogeneous, so it depends on ``t - t0``."""
        l1, l2 = raising_generator(), lowering_generator()

        def ev(t, t0):
            b1, b2 = _b(self, t - t0)
            return b1 * l1 + b2 * l2

        bps = tuple(sorted(set(self.a1.breakpoints + self.a2.breakpoints)))
        return GeneratorFamily(2, ev, "analytic_model", 0.0, bps)


def _b(m, t):
    q = m.quantities(t)
    return q.a1 + q.f, q.a2 - q.f


def two_rate_f(m: TwoRateModel, t):
    """``f = (W / A) (1 + (exp(-A) - 1) / A)`` with ``W = A1 a2 - A2 a1``."""
    return m.quantities(t).f


def two_rate_generator(m: TwoRateModel, t):
    """Return ``(b1, b2, b1 L1 + b2 L2)``."""
    b1, b2 = _b(m, t)
    return b1, b2, b1 * raising_generator() + b2 * lowering_generator()


class Disentangling(NamedTuple):
    nu1: float
    nu2: float
    lhs: np.ndarray
    rhs: np.ndarray
    defect: float


def two_rate_disentangle(m: TwoRateModel, t) -> Disentangling:
    """Compare ``expm(Z(t))`` with ``expm(ln nu1 L1) expm(ln nu2 L2)``."""
    q = m.quantities(t)
    l1, l2 = raising_generator(), lowering_generator()
    nu1, nu2 = m.nu(t)
    lhs = expm(q.A1 * l1 + q.A2 * l2)
    rhs = expm(math.log(nu1) * l1) @ expm(math.log(nu2) * l2)
    return Disentangling(nu1, nu2, lhs, rhs, max_abs(lhs - rhs))


def two_rate_B(m: TwoRateModel, t, tol=1e-10):
    """``(B1, B2, verdict)`` for ``int_0^t L = B1 L1 + B2 L2``.

    The verdict says whether that integral is itself a Lindblad generator.
    """
    q = m.quantities(t)
    F = m.F(t)
    B1, B2 = q.A1 + F, q.A2 - F
    verdict = is_lindblad_generator(B1 * raising_generator() + B2 * lowering_generator(), tol)
    return B1, B2, verdict


class ScanRow(NamedTuple):
    index: int
    min_B: float
    t_at_min: float
    min_A: float
    lindblad_everywhere: bool


def scan_B_negativity(models: Sequence[TwoRateModel], times: Sequence[float], tol=1e-10) -> List[ScanRow]:
    """For each model, the minimum over ``times`` of ``min(B1, B2)``.

    ``min_A`` reports ``min(A1, A2)`` over the same times, so rows where the
    exponent family itself leaves the Lindblad cone can be told apart.
    """
    rows = []
    for idx, m in enumerate(models):
        worst, t_worst, min_a, ok = math.inf, None, math.inf, True
        for t in times:
            B1, B2, verdict = two_rate_B(m, t, tol)
            q = m.quantities(t)
            min_a = min(min_a, q.A1, q.A2)
            ok = ok and verdict.passed
            if min(B1, B2) < worst:
                worst, t_worst = min(B1, B2), t
        rows.append(ScanRow(idx, worst, t_worst, min_a, ok))
    return rows


def random_piecewise_schedules(n_models, n_pieces, t_end, low=-1.0, high=2.0, seed=0):
    """Deterministic random piecewise-constant two-rate models.

    Values are drawn uniformly from ``[low, high]`` on equal pieces of
    ``[0, t_end]``; draws whose integrals ``A1`` or ``A2`` turn negative at a
    breakpoint or at ``t_end`` are discarded, so every model is CPT.
    """
    rng = np.random.default_rng(seed)
    bps = tuple(np.linspace(0.0, t_end, n_pieces + 1)[1:-1])
    models = []
    attempts = 0
    while len(models) < n_models:
        attempts += 1
        if attempts > 1000 * n_models:
            raise NumericalError("could not draw enough schedules with nonnegative integrals")
        fns = [ScalarFn.piecewise_constant(bps, rng.uniform(low, high, n_pieces)) for _ in range(2)]
        checkpoints = bps + (t_end,)
        # integrals are piecewise linear, so checking the knots suffices
        if all(fn.integral(t) >= 0 for fn in fns for t in checkpoints):
            models.append(TwoRateModel(*fns))
    return models


# -- dephasing limit ---------------------------------------------------------------


def sigma_z_family():
    """``Z(t, t0) = -log(cos(t - t0)) L0`` for ``t - t0 < pi/2``."""
    l0 = dephasing_generator()

    def z(t, t0):
        u = t - t0
        if not 0 <= u < math.pi / 2:
            raise DomainError(f"elapsed time {u} outside [0, pi/2)")
        return -math.log(math.cos(u)) * l0

    return CallableZ(z, 2, 0.0)


class SigmaZRow(NamedTuple):
    t: float
    offdiag_factor: float
    cos2: float
    min_choi_eig: float
    cpt: bool
    dist_sigma_z_map: float
    dist_diag_projection: float


@dataclass(frozen=True)
class SigmaZStudy:
    rows: Tuple[SigmaZRow, ...]
    all_cpt: bool
    projection_distance_monotone: bool
    limit_matches_sigma_z_map: bool
    note: str


def sigma_z_limit_study(t_values: Sequence[float], tol=1e-10) -> SigmaZStudy:
    """Evaluate ``expm(-log(cos t) L0)`` as ``t`` approaches ``pi/2``.

    Distances (max absolute entry) are reported to the map ``rho -> sz rho sz``
    and to the diagonal projection ``rho -> (rho + sz rho sz) / 2``.
    """
    ts = [float(t) for t in t_values]
    if not ts:
        raise ValidationError("t_values must not be empty")
    for t in ts:
        if not 0 <= t < math.pi / 2:
            raise DomainError(f"t={t} outside [0, pi/2)")
    l0 = dephasing_generator()
    conj_z = sandwich_superop(SIGMA_Z, SIGMA_Z)
    proj = 0.5 * (np.eye(4) + conj_z)
    rows = []
    for t in ts:
        lam = expm(-math.log(math.cos(t)) * l0)
        v = is_cpt_map(lam, tol)
        rows.append(
            SigmaZRow(
                t,
                float(lam[2, 2].real),  # E12 -> factor * E12; vec index of E12 is 2
                math.cos(t) ** 2,
                v.details["min_choi_eig"],
                v.passed,
                max_abs(lam - conj_z),
                max_abs(lam - proj),
            )
        )
    dists = [r.dist_diag_projection for r in rows]
    monotone = all(b <= a for a, b in zip(dists, dists[1:])) if ts == sorted(ts) else False
    last = rows[-1]
    matches = last.dist_sigma_z_map < last.dist_diag_projection
    note = (
        f"at t={last.t:.6g}: distance to rho->sz rho sz is {last.dist_sigma_z_map:.3g}, "
        f"distance to the diagonal projection is {last.dist_diag_projection:.3g}"
    )
    if not matches:
        note += "; the observed limit is the diagonal projection, not rho->sz rho sz"
    return SigmaZStudy(tuple(rows), all(r.cpt for r in rows), monotone, matches, note)
