"""Canonical-ensemble thermodynamics over finite discrete energy spectra.

Partition function, Boltzmann distribution, Helmholtz free energy, entropy,
and the ensemble (log-sum-exp) free energy. All exponential sums are
max-shifted; no raw exponentials of unshifted energies.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp


@dataclass(frozen=True)
class EnsembleSpec:
    """Finite set of energy levels with degeneracies at inverse temperature beta.

    ``degeneracies`` are positive level multiplicities (same length as
    ``energies``); ``k_b`` is the Boltzmann constant in the chosen unit
    system (default 1, natural units).
    """

    energies: np.ndarray
    degeneracies: np.ndarray
    beta: float
    k_b: float = 1.0

    def __post_init__(self):
        energies = np.atleast_1d(np.asarray(self.energies, dtype=float))
        degeneracies = np.atleast_1d(np.asarray(self.degeneracies, dtype=float))
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "degeneracies", degeneracies)
        if energies.size == 0:
            raise ValueError("empty spectrum: at least one energy level required")
        if not np.all(np.isfinite(energies)):
            raise ValueError("energies must be finite")
        if degeneracies.shape != energies.shape:
            raise ValueError(
                f"degeneracies length {degeneracies.size} != energies length {energies.size}"
            )
        if not np.all(np.isfinite(degeneracies)) or np.any(degeneracies <= 0):
            raise ValueError("degeneracies must be finite and strictly positive")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not (np.isfinite(self.k_b) and self.k_b > 0):
            raise ValueError(f"k_b must be > 0, got {self.k_b}")

    @property
    def temperature(self) -> float:
        return 1.0 / (self.k_b * self.beta)


@dataclass(frozen=True)
class ThermoReport:
    """Canonical-ensemble state functions for one EnsembleSpec.

    Satisfies S = (<E> - F) / T and sum(probabilities) = 1.
    """

    partition_z: float
    free_energy: float
    mean_energy: float
    entropy: float
    probabilities: np.ndarray


def compute_thermodynamics(spec: EnsembleSpec) -> ThermoReport:
    """Evaluate Z, F, <E>, S, and the Boltzmann distribution for ``spec``.

    Z = sum_i Omega(E_i) exp(-beta E_i) accumulated in shifted log space;
    p_i = Omega(E_i) exp(-beta E_i) / Z; F = -k_B T ln Z (the sign that keeps
    S = (<E> - F)/T >= 0); <E> = sum_i p_i E_i.
    """
    log_weights = np.log(spec.degeneracies) - spec.beta * spec.energies
    log_z = float(logsumexp(log_weights))
    probabilities = np.exp(log_weights - log_z)
    free_energy = -log_z / spec.beta
    mean_energy = float(probabilities @ spec.energies)
    entropy = (mean_energy - free_energy) * spec.k_b * spec.beta
    # Z itself may leave double range even though F stays finite; inf is the
    # honest report, not an error.
    with np.errstate(over="ignore"):
        partition_z = float(np.exp(log_z))
    return ThermoReport(
        partition_z=partition_z,
        free_energy=free_energy,
        mean_energy=mean_energy,
        entropy=entropy,
        probabilities=probabilities,
    )


def ensemble_free_energy(energies, beta: float) -> float:
    """Soft-minimum free energy -(1/beta) ln sum_i exp(-beta E_i).

    Bracketed by [min(E) - ln(M)/beta, min(E)]; approaches min(E) as
    beta -> inf and adding a constant to every energy shifts the result
    by exactly that constant.
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    if energies.size == 0:
        raise ValueError("empty energy list")
    if not np.all(np.isfinite(energies)):
        raise ValueError("energies must be finite")
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be > 0, got {beta}")
    return float(-logsumexp(-beta * energies) / beta)
