"""Schroedinger propagation of pulse programs with Monte Carlo noise.

Evolution is piecewise constant: each pulse Hamiltonian is diagonalized once
per trajectory and applied through its eigendecomposition, so norm is
preserved to numerical precision.  Noise enters at the trajectory level
(Monte Carlo wavefunction for pure dephasing): per-trajectory random
frequency shifts and per-gap random phases, plus optional jump-to-loss
channels tied to Rydberg population.  Ensemble averages over trajectories
reproduce the dephasing-channel density-matrix predictions without ever
storing a density matrix.

Gap noise channels and the fringe envelopes they generate:

* laser: a global random phase per gap, Gaussian with variance
  2*pi*linewidth*t (beat-note phase diffusion), giving exp(-pi*linewidth*t).
* collisions: a per-atom quasi-static frequency shift, Gaussian with standard
  deviation rate*partners, giving the Gaussian form exp(-(t/T2)^2) with
  T2 = sqrt(2)/(rate*partners).  ``partners`` defaults to the sampled N-1 and
  can be pinned to the trap mean, which makes T2 scale exactly as 1/Nbar.
* trap: a per-atom static shift eta*E with E ~ Gamma(shape=3) (the thermal
  energy distribution in a 3-d harmonic trap), whose characteristic function
  is exactly the empirical decay v0/[1 + (e^{2/3}-1)(t/T2)^2]^{3/2}.  This is
  a phenomenological generator of that shape, not a physical model.
* doppler: deterministic per-atom phase k_gap * v_z * t.  During gaps the
  two-photon momentum imprints cancel between the mapping pulses, so the
  default wavevector is the residual hyperfine-beat value, not the Rydberg
  two-photon k_eff (which does govern detunings while driving).

Determinism: trajectory ``i`` of a run with seed ``s`` uses the RNG stream
``SeedSequence(s, spawn_key=(i,))``, so results are bit-identical for any
worker count and accumulation order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import G1, RYD, THREE_LEVEL, StateVector, build_basis, collective_state
from .ensemble import (
    BeamModel,
    EnsembleSample,
    K_CLOCK_BEAT,
    RydbergModel,
    TrapParams,
    pair_shift_matrix,
    sample_ensemble,
)
from .hamiltonian import HermitianOperator, rydberg_diagonal
from .programs import Gap, Measure, Pulse, PulseProgram, site_index
from .sequences import MeasurementModel, retained_from_levels

NORM_TOL = 1e-10


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic channels applied per trajectory.

    All rates non-negative.  ``collision_partners=None`` uses the sampled
    N-1 partner count; a float pins the mean-field partner number (e.g. the
    trap Nbar).  ``rr_loss_rate`` converts doubly-Rydberg population into
    trajectory loss (the conjectured short-range interaction channel);
    ``rydberg_lifetime`` does the same for any Rydberg population.
    ``drive_detuning_sigma`` adds one Gaussian two-photon detuning per
    trajectory and site to the Rydberg level during every pulse
    (shot-to-shot Stark and field drift of the collective line; sites drift
    independently through their separate beam paths).
    """

    laser_linewidth_fwhm: float = 100.0      # Hz
    collision_rate_per_pair: float = 0.0     # 1/s per partner
    collision_partners: float | None = None
    doppler: bool = False
    gap_wavevector: float = K_CLOCK_BEAT     # rad/m
    trap_dephasing_t2p: float | None = None  # s
    rydberg_lifetime: float | None = None    # s
    rr_loss_rate: float = 0.0                # 1/s per unit P_multi-ryd
    drive_detuning_sigma: float = 0.0        # rad/s, per-site shot-to-shot Stark drift

    def __post_init__(self):
        if (
            self.laser_linewidth_fwhm < 0
            or self.collision_rate_per_pair < 0
            or self.rr_loss_rate < 0
            or self.drive_detuning_sigma < 0
            or (self.collision_partners is not None and self.collision_partners < 0)
            or (self.trap_dephasing_t2p is not None and self.trap_dephasing_t2p <= 0)
            or (self.rydberg_lifetime is not None and self.rydberg_lifetime <= 0)
        ):
            raise ValueError("noise parameters must be non-negative")


QUIET = NoiseModel(laser_linewidth_fwhm=0.0)

#: Measured pi-pulse timing of the reference experiment: (|0bar>->|rbar>,
#: inter-pulse gap, |rbar>->|1bar>), seconds.
PI_TIME_ZERO_RYD = 0.24e-6
PI_TIME_ONE_RYD = 0.68e-6
INTERPULSE_GAP = 0.06e-6


@dataclass
class TrajectoryRecord:
    """Outcome of one simulated trajectory.

    ``populations`` holds the per-site collective populations
    (P0bar, P1bar, Prbar, Pperp) recorded just before the measurement (or at
    program end).  ``retained``/``postselected`` are None when the program
    has no Measure step.  ``collided``/``decayed`` flag jump-to-loss events,
    after which the program aborts to measurement.
    """

    populations: tuple
    retained: tuple
    postselected: tuple
    collided: bool = False
    decayed: bool = False
    norm_error: float = 0.0
    durations: tuple = ()


def propagate(state: StateVector, h: HermitianOperator, t: float) -> StateVector:
    """Evolve ``state`` by exp(-i H t) via the cached eigendecomposition."""
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    if h.basis is not None and h.basis is not state.basis:
        if h.basis.states.shape != state.basis.states.shape or not np.array_equal(
            h.basis.states, state.basis.states
        ):
            raise ValueError("operator and state are defined on different bases")
    if h.dimension != state.amplitudes.size:
        raise ValueError("operator and state dimensions differ")
    amp = h.eigensystem().propagator_apply(t, state.amplitudes)
    return StateVector(state.basis, amp)


def apply_gap(
    state: StateVector,
    t: float,
    noise: NoiseModel,
    sample: EnsembleSample,
    rng: np.random.Generator,
    detuning: float = 0.0,
) -> StateVector:
    """Free evolution of a single-site state for time ``t`` with gap noise.

    Per-atom phases act on g1 amplitudes; the static Rydberg energies (pair
    shifts and drive Doppler detunings) evolve deterministically.  See the
    module docstring for the channel definitions.
    """
    engine = _Engine(
        (sample,), noise, rng, e_max=(state.basis.e_max,), bases=(state.basis,)
    )
    psi = state.amplitudes.copy()
    psi = engine.apply_gap(psi, Gap(t, detuning))
    return StateVector(state.basis, psi)


class _Site:
    """Per-site cached structure: basis occupancies and static energies."""

    def __init__(self, sample: EnsembleSample, e_max: int, basis=None):
        self.sample = sample
        n = sample.n_atoms
        if n == 0:
            self.basis = None
            self.dim = 1
            self.n_g1 = np.zeros(1)
            self.n_ryd = np.zeros(1)
            self.g1_occ = np.zeros((1, 0))
            self.ryd_occ = np.zeros((1, 0))
            self.static_diag = np.zeros(1)
            return
        self.basis = basis if basis is not None else build_basis(
            n, THREE_LEVEL, min(e_max, n)
        )
        self.dim = self.basis.dimension
        self.g1_occ = self.basis.level_occupancy(G1).astype(float)
        self.ryd_occ = self.basis.level_occupancy(RYD).astype(float)
        self.n_g1 = self.g1_occ.sum(axis=1)
        self.n_ryd = self.ryd_occ.sum(axis=1)
        self.static_diag = rydberg_diagonal(self.basis, sample)

    def zero_state(self) -> np.ndarray:
        amp = np.zeros(self.dim, dtype=np.complex128)
        amp[0] = 1.0  # states are ordered by excitation number; 0 is |0bar>
        return amp

    def initial(self, kind: str) -> np.ndarray:
        if self.basis is None or kind == "zero_bar":
            return self.zero_state()
        return collective_state(self.basis, kind, self.sample.weights()).amplitudes


class _Engine:
    """Joint-space propagation of one trajectory over one or two sites."""

    def __init__(
        self,
        samples: tuple,
        noise: NoiseModel | None,
        rng: np.random.Generator | None,
        e_max: tuple,
        calibration: dict | None = None,
        bases: tuple | None = None,
        ryd: RydbergModel | None = None,
    ):
        self.noise = noise or QUIET
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.calibration = calibration
        self.sites = tuple(
            _Site(s, e, None if bases is None else bases[i])
            for i, (s, e) in enumerate(zip(samples, e_max))
        )
        self.dims = tuple(site.dim for site in self.sites)
        self.dimension = int(np.prod(self.dims))

        # Static diagonal over the joint space, including cross-site shifts.
        if len(self.sites) == 1:
            self.static_flat = self.sites[0].static_diag
            self.n_ryd_flat = self.sites[0].n_ryd
        else:
            a, b = self.sites
            static = a.static_diag[:, None] + b.static_diag[None, :]
            if a.sample.n_atoms and b.sample.n_atoms and ryd is not None:
                vct = cross_pair_shifts(a.sample.positions, b.sample.positions, ryd)
                static = static + a.ryd_occ @ vct @ b.ryd_occ.T
            self.static_flat = static.ravel()
            self.n_ryd_flat = (a.n_ryd[:, None] + b.n_ryd[None, :]).ravel()
        self.multi_ryd = self.n_ryd_flat >= 2
        self.any_ryd = self.n_ryd_flat >= 1

        # Quasi-static per-atom frequency shifts, drawn once per trajectory.
        self.atom_shifts = []
        for site in self.sites:
            n = site.sample.n_atoms
            shift = np.zeros(n)
            if self.noise.collision_rate_per_pair > 0 and n > 0:
                partners = self.noise.collision_partners
                if partners is None:
                    partners = max(n - 1, 0)
                sigma = self.noise.collision_rate_per_pair * partners
                shift = shift + self.rng.normal(0.0, sigma, size=n) if sigma > 0 else shift
            if self.noise.trap_dephasing_t2p is not None and n > 0:
                eta = np.sqrt(np.exp(2.0 / 3.0) - 1.0) / self.noise.trap_dephasing_t2p
                shift = shift + eta * self.rng.gamma(3.0, 1.0, size=n)
            if self.noise.doppler and n > 0:
                shift = shift + self.noise.gap_wavevector * site.sample.velocities[:, 2]
            self.atom_shifts.append(shift)

        self.drive_detuning = np.zeros(len(self.sites))
        if self.noise.drive_detuning_sigma > 0:
            self.drive_detuning = self.rng.normal(
                0.0, self.noise.drive_detuning_sigma, size=len(self.sites)
            )

        self._eig_cache: dict = {}
        self.norm_error = 0.0
        self.collided = False
        self.decayed = False

    # -- pulses -------------------------------------------------------------

    def nominal_frequency(self, pulse: Pulse) -> float:
        """Rabi frequency a pulse area is referenced to.

        Exact mode (no calibration table): the sampled collective frequency
        alpha_bar for zero_ryd, and the effective weighted-W coupling
        sqrt(sum alpha^4)/alpha_bar for one_ryd.  With a calibration table
        the fixed nominal value is used, mirroring experimental calibration
        to the mean atom number (pulse areas then vary with the shot's N).
        """
        if self.calibration is not None:
            return self.calibration[(pulse.site, pulse.transition)]
        site = self.sites[site_index(pulse.site) if len(self.sites) > 1 else 0]
        a = site.sample.alphas
        if a.size == 0 or not np.any(a):
            return 0.0
        if pulse.transition == "zero_ryd":
            return float(np.sqrt(np.sum(a**2)))
        return float(np.sqrt(np.sum(a**4) / np.sum(a**2)))

    def resolve_duration(self, pulse: Pulse) -> float:
        if pulse.duration is not None:
            return pulse.duration
        omega = self.nominal_frequency(pulse)
        return pulse.area / omega if omega > 0 else 0.0

    def pulse_eigensystem(self, pulse: Pulse):
        """Batched eigensystem of the pulse Hamiltonian.

        A pulse drives a single site, so in the joint space the Hamiltonian
        is block diagonal over the undriven site's index: one
        (dim_s x dim_s) block per undriven state, diagonalized as a stack.
        """
        key = (pulse.site, pulse.transition, pulse.phase, pulse.detuning)
        eig = self._eig_cache.get(key)
        if eig is None:
            s = site_index(pulse.site) if len(self.sites) > 1 else 0
            site = self.sites[s]
            local = np.zeros((site.dim, site.dim), dtype=np.complex128)
            if site.basis is not None:
                lower = 0 if pulse.transition == "zero_ryd" else G1
                src, dst, atom = site.basis.transitions(lower, RYD)
                amp = 0.5 * site.sample.alphas[atom] * np.exp(1j * pulse.phase)
                local[dst, src] = amp
                local[src, dst] = np.conj(amp)
            delta = pulse.detuning + self.drive_detuning[s]
            if len(self.sites) == 1:
                diag_cols = (self.static_flat + delta * site.n_ryd)[None, :]
            else:
                static = self.static_flat.reshape(self.dims)
                # blocks indexed by the undriven site's state
                static = static.T if s == 0 else static
                diag_cols = static + delta * site.n_ryd[None, :]
            blocks = np.broadcast_to(
                local, (diag_cols.shape[0], site.dim, site.dim)
            ).copy()
            idx = np.arange(site.dim)
            blocks[:, idx, idx] += diag_cols
            evals, evecs = np.linalg.eigh(blocks)
            eig = (s, evals, evecs)
            self._eig_cache[key] = eig
        return eig

    def _propagate_blocks(self, psi: np.ndarray, eig, t: float) -> np.ndarray:
        s, evals, evecs = eig
        if len(self.sites) == 1:
            u = evecs[0]
            return u @ (np.exp(-1j * evals[0] * t) * (u.conj().T @ psi))
        mat = psi.reshape(self.dims)
        cols = mat.T if s == 0 else mat  # (n_blocks, dim_s)
        coef = np.einsum("bji,bj->bi", evecs.conj(), cols)
        coef *= np.exp(-1j * evals * t)
        cols = np.einsum("bij,bj->bi", evecs, coef)
        mat = cols.T if s == 0 else cols
        return np.ascontiguousarray(mat).ravel()

    def apply_pulse(self, psi: np.ndarray, pulse: Pulse, duration: float) -> np.ndarray:
        eig = self.pulse_eigensystem(pulse)
        rate = self.noise.rr_loss_rate
        decay = self.noise.rydberg_lifetime
        if rate == 0.0 and decay is None:
            return self._propagate_blocks(psi, eig, duration)
        n_sub = 32
        dt = duration / n_sub
        for _ in range(n_sub):
            psi = self._propagate_blocks(psi, eig, dt)
            if self._jump(psi, dt):
                break
        return psi

    def _jump(self, psi: np.ndarray, dt: float) -> bool:
        """Trajectory jump-to-loss channels; True aborts the program."""
        prob2 = np.abs(psi) ** 2
        if self.noise.rr_loss_rate > 0.0:
            p = self.noise.rr_loss_rate * float(prob2[self.multi_ryd].sum()) * dt
            if self.rng.random() < p:
                psi *= self.multi_ryd
                psi /= np.linalg.norm(psi)
                self.collided = True
                return True
        if self.noise.rydberg_lifetime is not None:
            p = float(prob2[self.any_ryd].sum()) * dt / self.noise.rydberg_lifetime
            if self.rng.random() < p:
                psi *= self.any_ryd
                psi /= np.linalg.norm(psi)
                self.decayed = True
                return True
        return False

    # -- gaps ---------------------------------------------------------------

    def apply_gap(self, psi: np.ndarray, gap: Gap) -> np.ndarray:
        t = gap.duration
        if t == 0.0:
            return psi
        phase_site = []
        laser_xi = 0.0
        if self.noise.laser_linewidth_fwhm > 0:
            laser_xi = self.rng.normal(
                0.0, np.sqrt(2.0 * np.pi * self.noise.laser_linewidth_fwhm * t)
            )
        for site, shifts in zip(self.sites, self.atom_shifts):
            xi = site.g1_occ @ (shifts * t) if shifts.size else np.zeros(site.dim)
            xi = xi + site.n_g1 * (laser_xi - gap.detuning * t)
            phase_site.append(xi)
        if len(self.sites) == 1:
            total = phase_site[0]
        else:
            total = (phase_site[0][:, None] + phase_site[1][None, :]).ravel()
        psi = psi * np.exp(1j * total - 1j * self.static_flat * t)
        if self.noise.rr_loss_rate > 0 or self.noise.rydberg_lifetime is not None:
            self._jump(psi, t)
        return psi

    # -- readout ------------------------------------------------------------

    def populations(self, psi: np.ndarray) -> tuple:
        mat = psi.reshape(self.dims) if len(self.sites) > 1 else psi[:, None]
        out = []
        for axis, site in enumerate(self.sites):
            if site.basis is None:
                out.append((1.0, 0.0, 0.0, 0.0))
                continue
            m = mat if axis == 0 else mat.T
            p0 = float(np.sum(np.abs(m[0, :]) ** 2))
            alphas = site.sample.alphas
            if np.any(alphas):
                w = site.sample.weights().normalized()
            else:  # undriven site: fall back to uniform symmetric weights
                w = np.full(alphas.size, 1.0 / np.sqrt(alphas.size))
            p1 = pr = perp = 0.0
            for level in (G1, RYD):
                idx = site.basis.single_excitation_indices(level)
                sub = m[idx, :]
                total = float(np.sum(np.abs(sub) ** 2))
                sym = float(np.sum(np.abs(np.conj(w) @ sub) ** 2))
                if level == G1:
                    p1 = sym
                else:
                    pr = sym
                perp += total - sym
            out.append((p0, p1, pr, max(perp, 0.0)))
        return tuple(out)

    def measure(self, psi: np.ndarray, model: MeasurementModel) -> tuple:
        probs = np.abs(psi) ** 2
        probs = probs / probs.sum()
        flat = int(self.rng.choice(probs.size, p=probs))
        idx = np.unravel_index(flat, self.dims) if len(self.sites) > 1 else (flat,)
        retained = []
        for site, i in zip(self.sites, idx):
            if site.basis is None:
                retained.append(0)
            else:
                retained.append(
                    retained_from_levels(site.basis.states[i], model, self.rng)
                )
        return tuple(retained)

    def initial_state(self, kinds) -> np.ndarray:
        vecs = [
            site.initial(kind) for site, kind in zip(self.sites, kinds)
        ]
        psi = vecs[0]
        for v in vecs[1:]:
            psi = np.kron(psi, v)
        return psi


def cross_pair_shifts(pos_a: np.ndarray, pos_b: np.ndarray, ryd: RydbergModel):
    """Pair shifts (rad/s) between atoms of two different ensembles."""
    both = np.vstack([pos_a, pos_b])
    v, _ = pair_shift_matrix(both, ryd)
    return v[: len(pos_a), len(pos_a):]


def run_program(
    program: PulseProgram,
    samples,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    *,
    e_max=None,
    initial=None,
    calibration: dict | None = None,
    measurement: MeasurementModel | None = None,
    ryd: RydbergModel | None = None,
) -> TrajectoryRecord:
    """Run one trajectory of ``program`` on bound ensemble samples.

    Parameters
    ----------
    samples : EnsembleSample or tuple of them
        One per program site.
    e_max : int or tuple, optional
        Per-site excitation truncation.  Defaults to 2 for a single site and
        1 per site for two-site programs (intra-site blockade assumed; the
        jointly doubly-excited states |r>_c|r>_t are still present).
    initial : tuple of str, optional
        Per-site collective state kinds; default all |0bar>.
    calibration : dict, optional
        {(site, transition): nominal Rabi frequency} table fixing pulse
        durations; omitted = exact per-sample frequencies.
    ryd : RydbergModel, optional
        Needed for two-site programs to evaluate cross-site pair shifts.
    """
    if isinstance(samples, EnsembleSample):
        samples = (samples,)
    samples = tuple(samples)
    if len(samples) != program.n_sites:
        raise ValueError(
            f"program has {program.n_sites} site(s), got {len(samples)} sample(s)"
        )
    if e_max is None:
        e_max = 2 if program.n_sites == 1 else 1
    if isinstance(e_max, int):
        e_max = (e_max,) * program.n_sites
    if rng is None:
        rng = np.random.default_rng()

    engine = _Engine(samples, noise, rng, e_max, calibration, ryd=ryd)
    kinds = initial if initial is not None else ("zero_bar",) * program.n_sites
    psi = engine.initial_state(kinds)

    default_model = measurement or MeasurementModel()
    populations = None
    retained = (None,) * program.n_sites
    durations = []

    for step in program:
        if isinstance(step, Pulse):
            duration = engine.resolve_duration(step)
            durations.append(duration)
            psi = engine.apply_pulse(psi, step, duration)
        elif isinstance(step, Gap):
            psi = engine.apply_gap(psi, step)
        elif isinstance(step, Measure):
            populations = engine.populations(psi)
            model = step.model if step.model is not None else default_model
            retained = engine.measure(psi, model)
            break
        else:
            raise TypeError(f"unknown program step {step!r}")
        engine.norm_error = max(
            engine.norm_error, abs(1.0 - float(np.linalg.norm(psi)))
        )
        if engine.collided or engine.decayed:
            populations = engine.populations(psi)
            model = default_model
            retained = engine.measure(psi, model)
            break

    if populations is None:
        populations = engine.populations(psi)
    postselected = tuple(None if r is None else r >= 1 for r in retained)
    return TrajectoryRecord(
        populations=populations,
        retained=retained,
        postselected=postselected,
        collided=engine.collided,
        decayed=engine.decayed,
        norm_error=engine.norm_error,
        durations=tuple(durations),
    )


@dataclass
class MonteCarloResult:
    """Ensemble averages with standard errors, keyed by observable name."""

    observables: dict
    trials: int
    per_trial: dict | None = None

    def mean(self, name: str) -> float:
        return self.observables[name][0]

    def stderr(self, name: str) -> float:
        return self.observables[name][1]


def default_reduce(record: TrajectoryRecord, samples) -> dict:
    """Per-site collective populations plus retained-atom indicators."""
    out = {}
    for i, pops in enumerate(record.populations):
        suffix = "" if len(record.populations) == 1 else f"_{('c', 't')[i]}"
        for name, val in zip(("p0bar", "p1bar", "prbar", "pperp"), pops):
            out[name + suffix] = val
        if record.retained[i] is not None:
            out["retained" + suffix] = float(record.retained[i] >= 1)
    return out


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-derived per-trajectory RNG stream (order-independent)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def monte_carlo(
    program_factory,
    trap,
    beam,
    ryd,
    noise: NoiseModel | None,
    trials: int,
    seed: int,
    *,
    reduce=default_reduce,
    e_max=None,
    initial=None,
    calibration: dict | None = None,
    measurement: MeasurementModel | None = None,
    workers: int = 1,
    keep_trials: bool = False,
) -> MonteCarloResult:
    """Average observables over freshly sampled trajectories.

    Each trial draws a fresh ensemble per site (``trap``/``beam``/``ryd``
    may be single values or per-site tuples) and fresh noise, using the
    counter-derived stream ``SeedSequence(seed, spawn_key=(trial,))``.
    Results are deterministic for fixed (configuration, seed) at any
    ``workers`` count.  ``reduce(record, samples)`` maps one trajectory to
    named observables; means and standard errors are reported per name.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    program = program_factory()
    n_sites = program.n_sites
    traps = trap if isinstance(trap, tuple) else (trap,) * n_sites
    beams = beam if isinstance(beam, tuple) else (beam,) * n_sites
    ryds = ryd if isinstance(ryd, tuple) else (ryd,) * n_sites

    def one(trial: int) -> dict:
        rng = trial_rng(seed, trial)
        samples = tuple(
            sample_ensemble(traps[i], beams[i], ryds[i], rng) for i in range(n_sites)
        )
        record = run_program(
            program,
            samples,
            noise,
            rng,
            e_max=e_max,
            initial=initial,
            calibration=calibration,
            measurement=measurement,
            ryd=ryds[0],
        )
        return reduce(record, samples)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(i) for i in range(trials)]

    names = sorted({k for r in results for k in r})
    table = {
        name: np.array([r[name] for r in results if name in r]) for name in names
    }
    observables = {}
    for name, vals in table.items():
        n = vals.size
        stderr = float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        observables[name] = (float(vals.mean()), stderr)
    return MonteCarloResult(
        observables, trials, per_trial=table if keep_trials else None
    )
