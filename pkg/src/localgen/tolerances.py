"""Default numerical tolerances, overridable per call or through the CLI."""

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-12  # Hermiticity of states and Hamiltonians
    trace: float = 1e-12  # unit trace of states
    psd: float = 1e-10  # eigenvalue floor for states, Choi and c_mn matrices
    cpt: float = 1e-10  # Choi eigenvalue floor and trace defect of maps
    lindblad: float = 1e-10  # CCP compression floor and trace annihilation
    commute: float = 1e-12
    markov: float = 1e-8
    consistency: float = 1e-6  # quadrature vs Frechet route of the main formula
    compare: float = 1e-6  # ordered solve vs closed-form exponential
    rtol: float = 1e-10
    atol: float = 1e-12
    quad_atol: float = 1e-10  # adaptive quadrature of generator families
    n_nodes: int = 32

    def override(self, **changes):
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise KeyError(f"unknown tolerance key(s): {sorted(unknown)}")
        cast = {k: type(getattr(self, k))(v) for k, v in changes.items()}
        return replace(self, **cast)


DEFAULT = Tolerances()
