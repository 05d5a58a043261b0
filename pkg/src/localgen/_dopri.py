"""Embedded Dormand-Prince 5(4) integrator for linear matrix ODEs.

Steps are shortened to land exactly on every requested output time, so the
solution at those times carries the full fifth-order accuracy.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StiffnessError

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
MAX_STEPS = 1_000_000


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected_steps: int
    est_error: float  # sum of local error estimates (max abs entry) over accepted steps
    evaluations: int


def _error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, rtol, atol, span):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(f, t0, y0, t_out, rtol=1e-10, atol=1e-12):
    """Integrate ``y' = f(t, y)`` from ``t0`` and return ``y`` at ``t_out``.

    ``t_out`` must be increasing and start at or after ``t0``.

    Returns
    -------
    (list of arrays, IntegratorStats)
    """
    y = np.array(y0, dtype=complex)
    t = float(t0)
    targets = [float(s) for s in t_out]
    out = []
    nfev = 0

    def rhs(tt, yy):
        nonlocal nfev
        nfev += 1
        return f(tt, yy)

    idx = 0
    while idx < len(targets) and targets[idx] <= t:
        out.append(y.copy())
        idx += 1
    if idx == len(targets):
        return out, IntegratorStats(0, 0, 0.0, nfev)

    k1 = rhs(t, y)
    h = _initial_step(rhs, t, y, k1, rtol, atol, targets[-1] - t)
    steps = rejected = 0
    est_error = 0.0
    k = [None] * 7
    while idx < len(targets):
        target = targets[idx]
        if h < 10 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StiffnessError(t)
        if steps + rejected >= MAX_STEPS:
            # an exhausted step budget is treated like underflow: the problem is too stiff
            raise StiffnessError(t)
        landing = t + h >= target - 1e-14 * max(1.0, abs(target))
        h_step = target - t if landing else h

        k[0] = k1
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(1, 7):
                yi = y + h_step * sum(a * kj for a, kj in zip(A[i], k[:i]) if a != 0.0)
                k[i] = rhs(t + C[i] * h_step, yi)
            y_new = y + h_step * sum(b * kj for b, kj in zip(B5, k) if b != 0.0)
            err = h_step * sum(e * kj for e, kj in zip(E, k))
            err_norm = _error_norm(err, y, y_new, rtol, atol)
        if not np.isfinite(err_norm):
            # overflowing trial stage: retry with a much shorter step
            rejected += 1
            h = h_step * FAC_MIN
            continue

        if err_norm <= 1.0:
            t = target if landing else t + h_step
            y = y_new
            k1 = k[6]
            steps += 1
            est_error += float(np.max(np.abs(err)))
            fac = FAC_MAX if err_norm == 0 else min(FAC_MAX, max(FAC_MIN, SAFETY * err_norm ** -0.2))
            # a step shortened to hit an output time does not shrink the next one
            h = max(h_step * fac, h) if landing and h_step < h else h_step * fac
            if landing:
                out.append(y.copy())
                idx += 1
        else:
            rejected += 1
            h = h_step * max(FAC_MIN, SAFETY * err_norm ** -0.2)
    return out, IntegratorStats(steps, rejected, est_error, nfev)
