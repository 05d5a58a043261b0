"""Independent closed-form evaluations of the two-rate model, at high precision."""

import mpmath as mp

mp.mp.dps = 40


def two_rate_closed_form(A1, A2, a1, a2):
    """f, b1, b2, nu1, nu2 straight from the defining formulas."""
    A1, A2, a1, a2 = (mp.mpf(x) for x in (A1, A2, a1, a2))
    A = A1 + A2
    W = A1 * a2 - A2 * a1
    f = W / A * (1 + (mp.e ** (-A) - 1) / A)
    nu1 = A / (A1 * mp.e ** (-A) + A2)
    nu2 = (A1 + A2 * mp.e ** A) / A
    return {
        "f": float(f),
        "b1": float(a1 + f),
        "b2": float(a2 - f),
        "nu1": float(nu1),
        "nu2": float(nu2),
        "exp_A": float(mp.e ** A),
    }
