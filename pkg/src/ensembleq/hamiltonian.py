"""Collective Hamiltonians of driven, interacting ensembles.

Coupling convention, used everywhere: the light-atom interaction is
A = sum_m alpha_m * Sx_m with Sx = sigma_x / 2, so every off-diagonal matrix
element is ``alpha_m / 2`` and a resonant pulse of duration ``pi/alpha_bar``
transfers |0bar> -> |rbar> completely.  Under perfect blockade and zero
detuning the two symmetric dressed states (|0bar> +- |1bar>)/sqrt(2) have
eigenvalues -+ alpha_bar/2, i.e. a splitting of alpha_bar, and the population
P_0bar(t) oscillates at angular frequency alpha_bar = sqrt(N)*Omega for
uniform coupling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import G0, G1, GROUND_RYDBERG, RYD, THREE_LEVEL, TruncatedBasis
from .ensemble import EnsembleSample

HERMITICITY_TOL = 1e-12


class NonHermitianError(ValueError):
    """Matrix handed to the eigensolver is not Hermitian."""


@dataclass(eq=False)
class HermitianOperator:
    """Dense Hermitian matrix, optionally tied to a TruncatedBasis."""

    matrix: np.ndarray
    basis: TruncatedBasis | None = None

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrix must be square")
        self.matrix = m
        self._eig = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def check_hermitian(self):
        scale = max(float(np.abs(self.matrix).max()), 1.0)
        if not np.allclose(self.matrix, self.matrix.conj().T,
                           atol=HERMITICITY_TOL * scale, rtol=0.0):
            raise NonHermitianError("matrix is not Hermitian")

    def eigensystem(self) -> "Eigensystem":
        """Cached dense eigendecomposition (see :func:`eigensystem`)."""
        if self._eig is None:
            self._eig = eigensystem(self)
        return self._eig


@dataclass(frozen=True)
class Eigensystem:
    """Ascending real eigenvalues and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def propagator_apply(self, t: float, vec: np.ndarray) -> np.ndarray:
        """exp(-i H t) |vec> via the eigendecomposition."""
        u = self.eigenvectors
        return u @ (np.exp(-1j * self.eigenvalues * t) * (u.conj().T @ vec))


def eigensystem(op: HermitianOperator | np.ndarray) -> Eigensystem:
    """Diagonalize a Hermitian operator; validation error if non-Hermitian."""
    if not isinstance(op, HermitianOperator):
        op = HermitianOperator(np.asarray(op))
    op.check_hermitian()
    vals, vecs = np.linalg.eigh(op.matrix)
    return Eigensystem(vals, vecs)


def block_tridiagonal(
    sample: EnsembleSample, basis: TruncatedBasis
) -> HermitianOperator:
    """Interaction Hamiltonian on a ground_rydberg basis.

    Block tridiagonal in excitation number: diagonal entries carry the sum of
    per-atom detunings of the excited atoms plus the pair shifts of excited
    pairs; entries between states differing by exactly one atom's excitation
    carry that atom's ``alpha_m / 2``.
    """
    if basis.mode != GROUND_RYDBERG:
        raise ValueError("block_tridiagonal requires a ground_rydberg basis")
    if basis.n_atoms != sample.n_atoms:
        raise ValueError("basis and sample atom counts differ")

    dim = basis.dimension
    h = np.zeros((dim, dim), dtype=np.complex128)

    excited = basis.level_occupancy(RYD).astype(float)
    diag = excited @ sample.detunings
    si, aj, ak = basis.rydberg_pairs()
    if si.size:
        np.add.at(diag, si, sample.pair_shifts[aj, ak])
    h[np.arange(dim), np.arange(dim)] = diag

    src, dst, atom = basis.transitions(G0, RYD)
    h[dst, src] = 0.5 * sample.alphas[atom]
    h[src, dst] = 0.5 * sample.alphas[atom]
    return HermitianOperator(h, basis)


def blockaded_hamiltonian(alphas, deltas=None) -> HermitianOperator:
    """(N+1)-dimensional Hamiltonian of a perfectly blockaded ensemble.

    Basis ordering (|0bar>, |e_1>, ..., |e_N>) with |e_k> the state with only
    atom k excited.  First row/column couples |0bar> to |e_k> with
    ``alpha_k / 2`` (the package-wide Sx convention; the symmetric dressed
    splitting is alpha_bar).  Diagonal is (0, delta_1, ..., delta_N).
    """
    alphas = np.asarray(alphas, dtype=float)
    n = alphas.size
    if deltas is None:
        deltas = np.zeros(n)
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size != n:
        raise ValueError("alphas and deltas must have the same length")
    h = np.zeros((n + 1, n + 1), dtype=np.complex128)
    h[0, 1:] = 0.5 * alphas
    h[1:, 0] = 0.5 * alphas
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = deltas
    return HermitianOperator(h)


def drive_hamiltonian(
    basis: TruncatedBasis,
    sample: EnsembleSample,
    transition: str,
    phase: float = 0.0,
    detuning: float = 0.0,
) -> HermitianOperator:
    """Laser drive Hamiltonian on a three_level basis.

    Couples g0<->ryd (``transition="zero_ryd"``) or g1<->ryd (``"one_ryd"``)
    on every atom with amplitude ``(alpha_m/2) e^{i phase}`` (upper-level
    element).  The diagonal carries ``detuning`` plus the atom's Doppler
    detuning for every ryd-excited atom, and the sampled pair shifts for
    multiply-ryd states.
    """
    if basis.mode != THREE_LEVEL:
        raise ValueError("drive_hamiltonian requires a three_level basis")
    if basis.n_atoms != sample.n_atoms:
        raise ValueError("basis and sample atom counts differ")
    if transition == "zero_ryd":
        lower = G0
    elif transition == "one_ryd":
        lower = G1
    else:
        raise ValueError(f"unknown transition {transition!r}")

    dim = basis.dimension
    h = np.zeros((dim, dim), dtype=np.complex128)
    h[np.arange(dim), np.arange(dim)] = rydberg_diagonal(basis, sample, detuning)

    src, dst, atom = basis.transitions(lower, RYD)
    amp = 0.5 * sample.alphas[atom] * np.exp(1j * phase)
    h[dst, src] = amp
    h[src, dst] = np.conj(amp)
    return HermitianOperator(h, basis)


def rydberg_diagonal(
    basis: TruncatedBasis, sample: EnsembleSample, detuning: float = 0.0
) -> np.ndarray:
    """Diagonal Rydberg energies: (detuning + delta_k) per ryd atom + pair shifts."""
    ryd_occ = basis.level_occupancy(RYD).astype(float)
    diag = ryd_occ @ (sample.detunings + detuning)
    si, aj, ak = basis.rydberg_pairs()
    if si.size:
        np.add.at(diag, si, sample.pair_shifts[aj, ak])
    return diag


@dataclass(frozen=True)
class DressedProjection:
    """Overlap of the ideal antisymmetric dressed state with the real spectrum.

    p_minus: squared overlap of |-(0)> = (|0bar> - |1bar>)/sqrt(2) with the
    nearest eigenvector of the inhomogeneous blockaded Hamiltonian.
    p_perp: its squared projection onto the perturbed orthogonal
    singly-excited eigenstates.  ``degenerate`` flags a tie for the nearest
    eigenvector; both candidate overlaps are then listed.
    """

    p_minus: float
    p_perp: float
    degenerate: bool = False
    candidates: tuple = ()


def dressed_projection(
    sample: EnsembleSample, tie_tol: float = 1e-12
) -> DressedProjection:
    """Project the ideal dressed state onto the eigenstates of the sampled H.

    Builds the (N+1)-dimensional blockaded Hamiltonian from the sample's
    couplings and detunings.  The nearest eigenvector is the one of maximal
    squared overlap with |-(0)>; the orthogonal-subspace weight excludes the
    two eigenvectors identified with the symmetric dressed pair.
    """
    n = sample.n_atoms
    if n < 2:
        raise ValueError("dressed projection needs at least two atoms")
    w = sample.weights().normalized()

    minus0 = np.zeros(n + 1, dtype=np.complex128)
    minus0[0] = 1.0 / np.sqrt(2.0)
    minus0[1:] = -w / np.sqrt(2.0)
    plus0 = minus0.copy()
    plus0[1:] = -plus0[1:]

    eig = blockaded_hamiltonian(sample.alphas, sample.detunings).eigensystem()
    ov_minus = np.abs(eig.eigenvectors.conj().T @ minus0) ** 2
    ov_plus = np.abs(eig.eigenvectors.conj().T @ plus0) ** 2

    order = np.argsort(ov_minus)[::-1]
    i_minus = int(order[0])
    degenerate = ov_minus[order[1]] > ov_minus[i_minus] - tie_tol
    candidates = (
        (float(ov_minus[order[0]]), float(ov_minus[order[1]])) if degenerate else ()
    )

    # The symmetric pair: nearest to |-(0)> and, among the rest, nearest to |+(0)>.
    ov_plus_rest = ov_plus.copy()
    ov_plus_rest[i_minus] = -1.0
    i_plus = int(np.argmax(ov_plus_rest))

    mask = np.ones(n + 1, dtype=bool)
    mask[[i_minus, i_plus]] = False
    p_perp = float(np.sum(ov_minus[mask]))
    return DressedProjection(float(ov_minus[i_minus]), p_perp, degenerate, candidates)
