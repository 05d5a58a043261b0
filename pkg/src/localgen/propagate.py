"""Time-ordered propagation, closed-form maps and Markovianity diagnostics."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from ._dopri import IntegratorStats, integrate
from .errors import DomainError, ValidationError
from .generator import GeneratorFamily, local_generator
from .lindblad import Verdict, is_cpt_map
from .superop import expm, identity_superop, max_abs

__all__ = [
    "TimeGrid",
    "PropagationResult",
    "solve_ordered",
    "exp_map",
    "composition_defect",
    "MarkovReport",
    "markovianity_probe",
    "TrajectoryCertificate",
    "certify_trajectory",
]


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t_end: float
    samples: Tuple[float, ...]

    def __post_init__(self):
        s = tuple(float(x) for x in self.samples)
        if not np.all(np.isfinite(s)) or not (np.isfinite(self.t0) and np.isfinite(self.t_end)):
            raise ValidationError("time grid must be finite")
        if self.t_end <= self.t0:
            raise ValidationError(f"t_end={self.t_end} must exceed t0={self.t0}")
        if len(s) < 2 or s[0] != self.t0 or s[-1] != self.t_end:
            raise ValidationError("samples must include both endpoints")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValidationError("samples must be strictly increasing")
        object.__setattr__(self, "samples", s)

    @classmethod
    def linspace(cls, t0, t_end, n_samples):
        if n_samples < 2:
            raise ValidationError("n_samples must be at least 2")
        pts = np.linspace(float(t0), float(t_end), int(n_samples))
        return cls(float(t0), float(t_end), tuple(pts))


@dataclass(frozen=True, eq=False)
class PropagationResult:
    grid: TimeGrid
    maps: Tuple[np.ndarray, ...]
    integrator_stats: IntegratorStats
    cpt_report: Tuple[Verdict, ...] = field(default=())

    @property
    def dim(self):
        return int(round(np.sqrt(self.maps[0].shape[0])))


def solve_ordered(gf: GeneratorFamily, grid: TimeGrid, rtol=1e-10, atol=1e-12, cpt_tol=1e-10):
    """Integrate ``dLambda/dt = L(t, t0) Lambda`` with ``Lambda(t0) = I``.

    The generator is evaluated as ``gf.eval(t, grid.t0)``.  Integration uses
    an embedded Runge-Kutta 5(4) pair on the full superoperator matrix.
    """
    if rtol <= 0 or atol <= 0:
        raise ValidationError("rtol and atol must be positive")
    t0 = grid.t0
    n = gf.dim ** 2

    def rhs(t, lam):
        return gf.eval(t, t0) @ lam

    maps, stats = integrate(rhs, t0, identity_superop(gf.dim), grid.samples, rtol, atol)
    if maps[0].shape != (n, n):
        raise ValidationError(f"generator family dimension {gf.dim} inconsistent with output")
    maps = tuple(maps)
    report = tuple(is_cpt_map(m, cpt_tol) for m in maps)
    return PropagationResult(grid, maps, stats, report)


def exp_map(zf, t):
    """``expm(Z(t, t0))`` -- the dynamical map without time ordering."""
    return expm(zf.z(t))


def composition_defect(zf, t, s):
    """``max|Lambda(t, s) Lambda(s, t0) - Lambda(t, t0)|`` for ``t >= s >= t0``."""
    t0 = zf.t0
    if not t0 <= s <= t:
        raise DomainError(f"composition needs t0 <= s <= t, got t0={t0}, s={s}, t={t}")
    later = exp_map(zf.with_t0(s), t)
    earlier = exp_map(zf, s)
    return max_abs(later @ earlier - exp_map(zf, t))


@dataclass(frozen=True)
class MarkovReport:
    classification: str  # "markovian" or "non_markovian"
    max_generator_shift: float
    max_composition_defect: float
    threshold: float
    worst_generator_pair: Optional[Tuple[float, float]] = None
    worst_composition_pair: Optional[Tuple[float, float]] = None


def markovianity_probe(zf, probe_pairs: Sequence[Tuple[float, float]], threshold=1e-8, method="frechet"):
    """Compare ``L(t, s)`` with ``L(t, t0)`` and test the composition law.

    Each pair is ``(t, s)`` with ``t0 <= s <= t``.  The family is Markovian
    on the probes when both maxima stay within ``threshold``.
    """
    gen_max, comp_max = 0.0, 0.0
    gen_pair = comp_pair = None
    for t, s in probe_pairs:
        shift = max_abs(
            local_generator(zf.with_t0(s), t, method=method) - local_generator(zf, t, method=method)
        )
        defect = composition_defect(zf, t, s)
        if gen_pair is None or shift > gen_max:
            gen_max, gen_pair = shift, (t, s)
        if comp_pair is None or defect > comp_max:
            comp_max, comp_pair = defect, (t, s)
    markovian = gen_max <= threshold and comp_max <= threshold
    return MarkovReport(
        "markovian" if markovian else "non_markovian",
        gen_max,
        comp_max,
        threshold,
        gen_pair,
        comp_pair,
    )


@dataclass(frozen=True)
class TrajectoryCertificate:
    verdicts: Tuple[Verdict, ...]
    n_passed: int
    n_failed: int
    first_failure: Optional[float] = None  # sample time of the first failed verdict

    @property
    def passed(self):
        return self.n_failed == 0


def certify_trajectory(pr: PropagationResult, tol=1e-10) -> TrajectoryCertificate:
    """CPT verdict at each sample of a propagation, with summary counts."""
    verdicts = tuple(is_cpt_map(m, tol) for m in pr.maps)
    failed = [t for t, v in zip(pr.grid.samples, verdicts) if not v]
    return TrajectoryCertificate(
        verdicts, len(verdicts) - len(failed), len(failed), failed[0] if failed else None
    )
