"""Physical realizations of trapped-atom ensembles.

Samples atom positions and velocities for one optical-dipole-trap ensemble,
evaluates the per-atom light coupling ``alpha_m`` from the beam profile, the
pairwise Rydberg interaction shifts ``V_jk`` from a scaled van der Waals
model, and the per-atom Doppler detunings.

Units: lengths in micrometers, velocities in m/s, angular frequencies in
rad/s, temperatures in microkelvin, wavevectors in rad/m.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import CollectiveWeights

#: Boltzmann constant over the 87Rb mass, in (m/s)^2 per microkelvin.
KB_OVER_M_RB87 = 1.380649e-23 / 1.44316e-25 * 1e-6

#: Counter-propagating two-photon effective wavevector 2*pi*(1/480nm - 1/780nm),
#: rad/m.  Governs Doppler detunings while driving ground-Rydberg transitions.
K_EFF_TWO_PHOTON = 2.0 * np.pi * (1.0 / 480e-9 - 1.0 / 780e-9)

#: Residual wavevector of the stored g0-g1 coherence: the Rydberg-beam
#: imprints cancel between the mapping pulses up to the 6.8 GHz hyperfine
#: beat, rad/m.  Governs motional dephasing during gaps.
K_CLOCK_BEAT = 2.0 * np.pi * 6.834682e9 / 2.99792458e8


@dataclass(frozen=True)
class TrapParams:
    """Optical dipole trap geometry and loading statistics."""

    mean_atoms: float = 7.6
    sigma_perp: float = 0.7      # um, paper default
    sigma_z: float = 7.0         # um, paper default
    temperature: float = 150.0   # uK, paper default
    center: tuple = (0.0, 0.0, 0.0)
    loading: str = "poisson"     # "poisson" or "fixed"

    def __post_init__(self):
        if min(self.mean_atoms, self.sigma_perp, self.sigma_z, self.temperature) <= 0:
            raise ValueError("trap parameters must be positive")
        if self.loading not in ("poisson", "fixed"):
            raise ValueError("loading must be 'poisson' or 'fixed'")

    def sigma_v(self) -> float:
        """1-d thermal velocity spread sqrt(kB T / m), m/s."""
        return float(np.sqrt(KB_OVER_M_RB87 * self.temperature))


@dataclass(frozen=True)
class BeamModel:
    """Excitation beam intensity profile and peak coupling.

    ``uniform`` gives every atom the peak single-atom Rabi frequency
    ``omega_peak``.  ``gaussian`` attenuates transversely to the beam axis
    (taken along z, the long trap axis) with 1/e^2 intensity radius
    ``w_perp`` and optionally along z with ``w_z``:

        alpha(r) = omega_peak * exp(-(x^2+y^2)/w_perp^2) * exp(-z^2/w_z^2)

    The default w_perp is a free parameter chosen so that Monte Carlo
    sampling with the default trap reproduces the predicted collective
    coupling scaling of 0.972*sqrt(Nbar)*omega_peak.
    """

    profile: str = "gaussian"
    omega_peak: float = np.pi / 0.68e-6  # rad/s; single-atom pi time 0.68 us
    w_perp: float = 9.0                  # um, free (fit to 0.972 scaling)
    w_z: float | None = None             # um; None = no z dependence
    k_eff: float = K_EFF_TWO_PHOTON      # rad/m, Doppler wavevector for drives

    def __post_init__(self):
        if self.profile not in ("uniform", "gaussian"):
            raise ValueError("profile must be 'uniform' or 'gaussian'")
        if self.w_perp <= 0 or (self.w_z is not None and self.w_z <= 0):
            raise ValueError("beam waists must be positive")

    def coupling(self, positions: np.ndarray) -> np.ndarray:
        """Per-atom coupling alpha_m at the given (N, 3) positions, rad/s."""
        positions = np.atleast_2d(positions)
        if self.profile == "uniform":
            return np.full(positions.shape[0], self.omega_peak)
        rho2 = positions[:, 0] ** 2 + positions[:, 1] ** 2
        a = self.omega_peak * np.exp(-rho2 / self.w_perp**2)
        if self.w_z is not None:
            a = a * np.exp(-(positions[:, 2] / self.w_z) ** 2)
        return a


@dataclass(frozen=True)
class AntiBlockadeModel:
    """Phenomenological short-range Rydberg dephasing.

    Atoms with a partner closer than ``r_char`` receive an extra static
    random detuning with standard deviation ``sigma`` (rad/s), standing in
    for the near-resonant molecular structure at short range that the
    underlying potentials cannot predict reliably.  Off (sigma=0) by default.
    """

    sigma: float = 0.0
    r_char: float = 5.0  # um, characteristic separation for 97d

    def __post_init__(self):
        if self.sigma < 0 or self.r_char <= 0:
            raise ValueError("anti-blockade parameters out of range")


@dataclass(frozen=True)
class RydbergModel:
    """Scaled van der Waals pair interaction.

    V(R) = v_ref * (n/n_ref)^power_n / (R/r_ref)^power_r * f(theta), with
    theta the angle of the pair axis to z.  ``z_enhanced(a)`` uses
    f = (1 + a cos^2 theta)/(1 + a/3), normalized to average 1 over the
    sphere; ``a = 0`` is isotropic.

    The reference strength ``v_ref`` at (n_ref, r_ref) is a calibration
    input: the model only ever enters through ratios.  The default makes the
    two-ensemble blockade shift at R = 8.7 um strongly exceed the single-atom
    Rabi frequency.
    """

    n_principal: int = 97
    n_ref: int = 97
    r_ref: float = 8.7                   # um
    v_ref: float = 2 * np.pi * 2.5e6     # rad/s, free calibration
    power_n: float = 12.0
    power_r: float = 6.0
    angular: str = "isotropic"           # or "z_enhanced"
    anisotropy: float = 0.0              # a in f = (1 + a cos^2), z_enhanced only
    r_min: float = 1.0                   # um, short-range clamp
    antiblockade: AntiBlockadeModel = field(default_factory=AntiBlockadeModel)

    def __post_init__(self):
        if self.r_ref <= 0 or self.v_ref <= 0 or self.r_min <= 0:
            raise ValueError("reference distance/strength must be positive")
        if self.angular not in ("isotropic", "z_enhanced"):
            raise ValueError("angular must be 'isotropic' or 'z_enhanced'")


def pair_shift(r_j, r_k, ryd: RydbergModel) -> float:
    """Interaction shift (rad/s) between atoms at positions r_j, r_k (um).

    Separations below ``ryd.r_min`` are clamped to r_min (the short-range
    regime is not trusted) and a warning is issued.
    """
    r_j = np.asarray(r_j, dtype=float)
    r_k = np.asarray(r_k, dtype=float)
    d = r_k - r_j
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise ValueError("pair_shift requires distinct positions")
    if r < ryd.r_min:
        warnings.warn(
            f"pair separation {r:.3g} um below r_min={ryd.r_min} um; clamped",
            stacklevel=2,
        )
        r = ryd.r_min
    v = ryd.v_ref * (ryd.n_principal / ryd.n_ref) ** ryd.power_n
    v /= (r / ryd.r_ref) ** ryd.power_r
    if ryd.angular == "z_enhanced" and ryd.anisotropy != 0.0:
        cos2 = (d[2] ** 2) / (d @ d)
        v *= (1.0 + ryd.anisotropy * cos2) / (1.0 + ryd.anisotropy / 3.0)
    return float(v)


def pair_shift_matrix(positions: np.ndarray, ryd: RydbergModel):
    """Symmetric V_jk matrix (rad/s) for all atom pairs; zero diagonal.

    Returns ``(V, n_clamped)`` with the number of pairs clamped at r_min.
    """
    positions = np.atleast_2d(positions)
    n = positions.shape[0]
    v = np.zeros((n, n))
    if n < 2:
        return v, 0
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=-1))
    iu = np.triu_indices(n, 1)
    r = dist[iu]
    clamped = int(np.count_nonzero(r < ryd.r_min))
    r = np.maximum(r, ryd.r_min)
    vals = (
        ryd.v_ref
        * (ryd.n_principal / ryd.n_ref) ** ryd.power_n
        / (r / ryd.r_ref) ** ryd.power_r
    )
    if ryd.angular == "z_enhanced" and ryd.anisotropy != 0.0:
        cos2 = diff[..., 2][iu] ** 2 / np.maximum(dist[iu] ** 2, 1e-300)
        vals *= (1.0 + ryd.anisotropy * cos2) / (1.0 + ryd.anisotropy / 3.0)
    v[iu] = vals
    v += v.T
    return v, clamped


@dataclass
class EnsembleSample:
    """One concrete realization of a trapped ensemble.

    positions (um), velocities (m/s), couplings alphas (rad/s), pairwise
    shifts pair_shifts (rad/s, symmetric, zero diagonal) and per-atom
    detunings (rad/s; Doppler plus any anti-blockade contribution).
    """

    positions: np.ndarray
    velocities: np.ndarray
    alphas: np.ndarray
    pair_shifts: np.ndarray
    detunings: np.ndarray
    n_clamped_pairs: int = 0

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]

    def weights(self) -> CollectiveWeights:
        return CollectiveWeights(self.alphas)

    @property
    def alpha_bar(self) -> float:
        return self.weights().alpha_bar

    def to_csv_rows(self):
        """Rows (x, y, z, vx, vy, vz, alpha, delta), one per atom."""
        return np.column_stack(
            [self.positions, self.velocities, self.alphas, self.detunings]
        )


def sample_ensemble(
    trap: TrapParams,
    beam: BeamModel,
    ryd: RydbergModel,
    rng: np.random.Generator,
) -> EnsembleSample:
    """Draw one ensemble realization.

    The atom number is Poisson(mean_atoms) (or fixed at round(mean_atoms));
    positions are Gaussian with (sigma_perp, sigma_perp, sigma_z) about the
    trap center; velocities are Maxwell-Boltzmann at the trap temperature.
    Doppler detunings are k_eff times the z velocity component.  A draw of
    N = 0 returns an empty sample; the caller decides whether to reject it.
    """
    if trap.loading == "poisson":
        n = int(rng.poisson(trap.mean_atoms))
    else:
        n = int(round(trap.mean_atoms))
    if n == 0:
        empty3 = np.zeros((0, 3))
        empty = np.zeros(0)
        return EnsembleSample(empty3, empty3, empty, np.zeros((0, 0)), empty)

    scales = np.array([trap.sigma_perp, trap.sigma_perp, trap.sigma_z])
    positions = rng.normal(0.0, 1.0, size=(n, 3)) * scales + np.asarray(trap.center)
    velocities = rng.normal(0.0, trap.sigma_v(), size=(n, 3))
    # Addressing beams are aligned with their own trap.
    alphas = beam.coupling(positions - np.asarray(trap.center))
    shifts, n_clamped = pair_shift_matrix(positions, ryd)
    detunings = beam.k_eff * velocities[:, 2]

    ab = ryd.antiblockade
    if ab.sigma > 0.0 and n >= 2:
        diff = positions[:, None, :] - positions[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=-1))
        np.fill_diagonal(dist, np.inf)
        close = np.min(dist, axis=1) < ab.r_char
        detunings = detunings + close * rng.normal(0.0, ab.sigma, size=n)

    return EnsembleSample(positions, velocities, alphas, shifts, detunings, n_clamped)


def mean_blockade_shift(sample: EnsembleSample) -> float:
    """Ensemble mean blockade shift B (rad/s).

    Convention: 1/B^2 = (2 / N(N-1)) * sum_{j<k} 1/V_jk^2, i.e. B is the
    harmonic mean of the squared pair shifts.  Dominated by the weakest
    pairs, which control the double-excitation probability.  Any zero pair
    shift gives B = 0 with a warning.
    """
    n = sample.n_atoms
    if n < 2:
        raise ValueError("mean blockade shift needs at least two atoms")
    iu = np.triu_indices(n, 1)
    v = sample.pair_shifts[iu]
    if np.any(v == 0.0):
        warnings.warn("zero pair shift present; blockade shift set to 0")
        return 0.0
    inv2 = np.mean(1.0 / v**2)
    return float(1.0 / np.sqrt(inv2))
