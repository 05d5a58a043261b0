"""Dense operator and superoperator algebra.

Conventions
-----------
Operators are complex ``(d, d)`` numpy arrays.  Superoperators are complex
``(d**2, d**2)`` arrays acting on column-stacked operators: ``vec`` stacks the
columns of an operator top to bottom, so the map ``X -> A @ X @ B`` is the
matrix ``kron(B.T, A)``.  Every module in the package relies on this.

The Choi matrix is unnormalized, ``C = sum_ij E_ij (x) Phi(E_ij)``, so the
identity channel has a single nonzero eigenvalue equal to ``d``.
"""

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalRangeError, ValidationError

__all__ = [
    "as_cmatrix",
    "as_density_matrix",
    "superop_dim",
    "vec",
    "unvec",
    "sandwich_superop",
    "left_superop",
    "right_superop",
    "apply_superop",
    "identity_superop",
    "transpose_superop",
    "adjoint_on_identity",
    "choi",
    "expm",
    "expm_frechet",
    "hermitian_eigvals",
    "commutator",
    "max_abs",
]


def as_cmatrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D complex array (a copy)."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def _square(a, name="matrix"):
    m = as_cmatrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def as_density_matrix(rho, tol_herm=1e-12, tol_trace=1e-12, tol_psd=1e-10):
    """Validate a density matrix: Hermitian, unit trace, positive semidefinite."""
    rho = _square(rho, "density matrix")
    herm_defect = max_abs(rho - rho.conj().T)
    if herm_defect > tol_herm:
        raise ValidationError(f"density matrix not Hermitian (defect {herm_defect:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > tol_trace:
        raise ValidationError(f"density matrix trace {tr} != 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lo < -tol_psd:
        raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def superop_dim(s):
    """Hilbert-space dimension ``d`` of a ``(d**2, d**2)`` superoperator."""
    s = np.asarray(s)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionError(f"superoperator must be square, got shape {s.shape}")
    d = int(round(np.sqrt(s.shape[0])))
    if d * d != s.shape[0]:
        raise DimensionError(f"superoperator size {s.shape[0]} is not a perfect square")
    return d


def vec(op):
    """Column-stack a square operator into a vector of length ``d**2``."""
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"vec expects a square operator, got shape {op.shape}")
    return op.reshape(-1, order="F")


def unvec(v):
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    if v.ndim != 1 or d * d != v.size:
        raise DimensionError(f"unvec expects a vector of square length, got shape {v.shape}")
    return v.reshape(d, d, order="F")


def sandwich_superop(a, b):
    """Superoperator of ``X -> a @ X @ b``, i.e. ``kron(b.T, a)``."""
    a = _square(a, "a")
    b = _square(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return np.kron(b.T, a)


def left_superop(a):
    """``X -> a @ X``."""
    a = _square(a)
    return np.kron(np.eye(a.shape[0]), a)


def right_superop(b):
    """``X -> X @ b``."""
    b = _square(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def apply_superop(s, op):
    return unvec(np.asarray(s) @ vec(op))


def identity_superop(d):
    return np.eye(d * d, dtype=complex)


def transpose_superop(d):
    """Superoperator of the transpose map ``X -> X.T``."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            # vec index of E_ij is i + d*j
            s[j + d * i, i + d * j] = 1.0
    return s


def adjoint_on_identity(s):
    """Heisenberg-picture image of the identity, ``Phi^dagger(I)``.

    For a trace-preserving map this is ``I``; for a generator of a
    trace-preserving flow it is ``0``.
    """
    s = np.asarray(s)
    d = superop_dim(s)
    return unvec(s.conj().T @ vec(np.eye(d, dtype=complex)))


def choi(s):
    """Unnormalized Choi matrix ``sum_ij E_ij (x) Phi(E_ij)``."""
    s = np.asarray(s, dtype=complex)
    d = superop_dim(s)
    # row-major reshape of the column-stacked index r + d*c gives axes (c, r)
    s4 = s.reshape(d, d, d, d)  # [c_out, r_out, c_in, r_in]
    return s4.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def expm(a):
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    a = _square(a)
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(a)
        except FloatingPointError as exc:
            raise NumericalRangeError(f"expm overflow: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericalRangeError("expm produced non-finite entries")
    return out


def expm_frechet(a, e):
    """Exponential and its directional derivative.

    Computes ``D = int_0^1 expm(s a) @ e @ expm((1-s) a) ds`` as the top-right
    block of ``expm([[a, e], [0, a]])``.

    Returns
    -------
    (expm(a), D)
    """
    a = _square(a, "a")
    e = _square(e, "e")
    if a.shape != e.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {e.shape}")
    n = a.shape[0]
    block = np.zeros((2 * n, 2 * n), dtype=complex)
    block[:n, :n] = a
    block[:n, n:] = e
    block[n:, n:] = a
    big = expm(block)
    return big[:n, :n], big[:n, n:]


def hermitian_eigvals(a, tol=1e-10):
    """Ascending real eigenvalues of a Hermitian matrix.

    ``tol`` bounds ``max|a - a^dagger|`` relative to ``max(1, max|a|)``.
    """
    a = _square(a)
    defect = max_abs(a - a.conj().T)
    if defect > tol * max(1.0, max_abs(a)):
        raise ValidationError(f"matrix is not Hermitian (defect {defect:.3e})")
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def commutator(a, b):
    return a @ b - b @ a


def max_abs(a):
    """Largest absolute entry; the default matrix distance in this package."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0
