"""Lindblad generators: construction, certification and GKS extraction."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .superop import (
    adjoint_on_identity,
    as_cmatrix,
    choi,
    left_superop,
    max_abs,
    right_superop,
    sandwich_superop,
    superop_dim,
)

__all__ = [
    "LindbladSpec",
    "Witness",
    "Verdict",
    "build_generator",
    "is_lindblad_generator",
    "is_cpt_map",
    "GKSDecomposition",
    "gks_matrix",
    "pauli_basis",
    "gellmann_basis",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |1><2| and |2><1| in the basis {|1>, |2>}
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class LindbladSpec:
    """Hamiltonian plus ``(rate, operator)`` noise terms.

    The generator is ``-i[H, rho] + sum_a rate_a (V_a rho V_a^dag - {V_a^dag V_a, rho}/2)``
    with ``hbar = 1``.
    """

    hamiltonian: np.ndarray
    noise_terms: Tuple[Tuple[float, np.ndarray], ...] = ()
    tol_herm: float = 1e-12

    def __post_init__(self):
        h = as_cmatrix(self.hamiltonian, "hamiltonian")
        if h.shape[0] != h.shape[1]:
            raise ValidationError(f"hamiltonian must be square, got {h.shape}")
        defect = max_abs(h - h.conj().T)
        if defect > self.tol_herm:
            raise ValidationError(f"hamiltonian is not Hermitian (defect {defect:.3e})")
        terms = []
        for k, (rate, op) in enumerate(self.noise_terms):
            rate = float(rate)
            if not np.isfinite(rate) or rate < 0:
                raise ValidationError(f"noise term {k}: rate {rate} must be >= 0")
            op = as_cmatrix(op, f"noise operator {k}")
            if op.shape != h.shape:
                raise ValidationError(
                    f"noise term {k}: operator shape {op.shape} != hamiltonian shape {h.shape}"
                )
            terms.append((rate, op))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "noise_terms", tuple(terms))

    @property
    def dim(self):
        return self.hamiltonian.shape[0]


def _generator_matrix(hamiltonian, terms):
    # no sign checks on rates: also used to rebuild non-CCP extractions
    s = -1j * (left_superop(hamiltonian) - right_superop(hamiltonian))
    for rate, v in terms:
        vdv = v.conj().T @ v
        s = s + rate * (
            sandwich_superop(v, v.conj().T)
            - 0.5 * (left_superop(vdv) + right_superop(vdv))
        )
    return s


def build_generator(spec: LindbladSpec) -> np.ndarray:
    """Superoperator matrix of the Lindblad generator described by ``spec``."""
    return _generator_matrix(spec.hamiltonian, spec.noise_terms)


@dataclass(frozen=True)
class Witness:
    eigenvalue: float
    description: str


@dataclass(frozen=True)
class Verdict:
    """Outcome of a certification; failed verdicts always carry a witness."""

    passed: bool
    witness: Optional[Witness] = None
    tolerance_used: float = 0.0
    details: dict = field(default_factory=dict, compare=False)

    def __bool__(self):
        return self.passed


def _fail(value, description, tol, **details):
    return Verdict(False, Witness(float(value), description), tol, details)


def is_lindblad_generator(s, tol: float = 1e-10) -> Verdict:
    """Decide whether ``s`` generates a CPT semigroup.

    Checks Hermiticity preservation, trace annihilation (``s^dag(I) = 0``) and
    conditional complete positivity: the Choi matrix compressed by
    ``P = I - |w><w|/d`` (``|w> = sum_i |ii>``) must be positive semidefinite.
    """
    s = as_cmatrix(s, "superoperator")
    d = superop_dim(s)
    c = choi(s)
    herm = max_abs(c - c.conj().T)
    trace_defect = max_abs(adjoint_on_identity(s))
    details = {"hermiticity_defect": herm, "trace_defect": trace_defect}
    if herm > tol:
        return _fail(herm, "Choi matrix not Hermitian: map does not preserve Hermiticity", tol, **details)
    if trace_defect > tol:
        return _fail(trace_defect, "adjoint does not annihilate the identity", tol, **details)
    w = np.eye(d, dtype=complex).reshape(-1)
    p = np.eye(d * d) - np.outer(w, w.conj()) / d
    compressed = p @ (0.5 * (c + c.conj().T)) @ p
    lo = float(np.linalg.eigvalsh(compressed)[0])
    details["min_ccp_eig"] = lo
    if lo < -tol:
        return _fail(lo, "compressed Choi matrix has a negative eigenvalue (not CCP)", tol, **details)
    return Verdict(True, None, tol, details)


def is_cpt_map(s, tol: float = 1e-10) -> Verdict:
    """Decide whether ``s`` is completely positive and trace preserving."""
    s = as_cmatrix(s, "superoperator")
    d = superop_dim(s)
    c = choi(s)
    herm = max_abs(c - c.conj().T)
    trace_defect = max_abs(adjoint_on_identity(s) - np.eye(d))
    lo = float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])
    details = {"hermiticity_defect": herm, "trace_defect": trace_defect, "min_choi_eig": lo}
    if herm > tol:
        return _fail(herm, "Choi matrix not Hermitian", tol, **details)
    if lo < -tol:
        return _fail(lo, "Choi matrix has a negative eigenvalue (not CP)", tol, **details)
    if trace_defect > tol:
        return _fail(trace_defect, "adjoint does not map I to I (trace defect)", tol, **details)
    return Verdict(True, None, tol, details)


def pauli_basis():
    """Traceless, trace-orthonormal qubit basis ``(sx, sy, sz) / sqrt(2)``."""
    return [m / np.sqrt(2) for m in (SIGMA_X, SIGMA_Y, SIGMA_Z)]


def gellmann_basis(d):
    """Generalized Gell-Mann matrices normalized to ``tr(F_i^dag F_j) = delta_ij``."""
    if d == 2:
        return pauli_basis()
    basis = []
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1
            basis.append(m / np.sqrt(2))
            m = np.zeros((d, d), dtype=complex)
            m[j, k], m[k, j] = -1j, 1j
            basis.append(m / np.sqrt(2))
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        basis.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1)))
    return basis


@dataclass(frozen=True, eq=False)
class GKSDecomposition:
    """Hamiltonian and Kossakowski matrix extracted from a generator.

    ``rates``/``operators`` diagonalize the Kossakowski matrix.  ``ccp`` is
    False when the Kossakowski matrix has an eigenvalue below ``-tol``.
    """

    hamiltonian: np.ndarray
    kossakowski: np.ndarray
    rates: np.ndarray
    operators: Tuple[np.ndarray, ...]
    ccp: bool

    def reconstruct(self):
        return _generator_matrix(self.hamiltonian, zip(self.rates, self.operators))

    def to_spec(self, tol=1e-10):
        if not self.ccp:
            raise ValidationError("Kossakowski matrix is not positive semidefinite")
        rates = np.clip(self.rates, 0.0, None)
        return LindbladSpec(
            0.5 * (self.hamiltonian + self.hamiltonian.conj().T),
            tuple((r, v) for r, v in zip(rates, self.operators) if r > tol),
            tol_herm=1e-10,
        )


def gks_matrix(s, basis: Optional[Sequence[np.ndarray]] = None, tol: float = 1e-10) -> GKSDecomposition:
    """Extract ``(H, Kossakowski matrix)`` from a generator.

    ``basis`` must be ``d**2 - 1`` traceless, trace-orthonormal operators
    (default: normalized generalized Gell-Mann matrices).  Expanding
    ``s = sum_ij c_ij F_i . F_j^dag`` over ``{I/sqrt(d)} + basis``, the
    Kossakowski matrix is the traceless block ``c_kl`` and ``H`` is fixed by
    requiring it traceless.
    """
    s = as_cmatrix(s, "superoperator")
    d = superop_dim(s)
    if basis is None:
        basis = gellmann_basis(d)
    basis = [as_cmatrix(f, "basis element") for f in basis]
    if len(basis) != d * d - 1:
        raise ValidationError(f"basis must have {d * d - 1} elements, got {len(basis)}")
    full = [np.eye(d, dtype=complex) / np.sqrt(d)] + basis
    gram = np.array([[np.trace(a.conj().T @ b) for b in full] for a in full])
    if max_abs(gram - np.eye(d * d)) > 1e-10:
        raise ValidationError("basis is not traceless and trace-orthonormal")

    # sandwich superops kron(conj(F_j), F_i) are orthonormal in the HS product
    n = d * d
    c = np.empty((n, n), dtype=complex)
    for i, fi in enumerate(full):
        for j, fj in enumerate(full):
            c[i, j] = np.vdot(np.kron(fj.conj(), fi), s)

    koss = c[1:, 1:]
    koss = 0.5 * (koss + koss.conj().T)
    g = c[0, 0] / (2 * d) * np.eye(d) + sum(c[k, 0] / np.sqrt(d) * full[k] for k in range(1, n))
    h = 0.5j * (g - g.conj().T)
    h = h - np.trace(h) / d * np.eye(d)

    rates, u = np.linalg.eigh(koss)
    ops = tuple(sum(u[k, m] * basis[k] for k in range(n - 1)) for m in range(n - 1))
    return GKSDecomposition(h, koss, rates, ops, bool(rates[0] >= -tol))
