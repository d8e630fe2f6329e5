"""Truncated many-atom bases and collective states of ensemble qubits.

An ensemble qubit stores one logical qubit in ``N`` atoms with three relevant
per-atom levels: the two hyperfine ground states ``g0``, ``g1`` and a Rydberg
level ``ryd``.  The logical states are

    |0bar> = |g0 ... g0>
    |1bar> = sum_k (alpha_k / alpha_bar) |g0 ... g1_k ... g0>

i.e. the logical one is a coupling-weighted W state, with
``alpha_bar**2 = sum_k alpha_k**2``.  The collective singly excited Rydberg
state ``|rbar>`` is the same superposition with ``ryd`` in place of ``g1``.

Because strong Rydberg blockade suppresses multiple excitations, the Hilbert
space is truncated at a maximum total excitation number ``e_max`` (any atom
not in ``g0`` counts as one excitation, whether it sits in ``g1`` or ``ryd``).
States are ordered by ascending excitation number, within each block
lexicographically by excited-atom index set and then by level pattern, so
dumped amplitude vectors are reproducible and documented.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from math import comb

import numpy as np

# Per-atom level codes. G0 is the unexcited reference level.
G0, G1, RYD = 0, 1, 2

LEVEL_NAMES = {G0: "g0", G1: "g1", RYD: "ryd"}

GROUND_RYDBERG = "ground_rydberg"
THREE_LEVEL = "three_level"

#: Hard cap on atom number (dimension guard).
MAX_ATOMS = 24

#: Default cap on basis dimension; amplitudes are stored dense.
MAX_DIMENSION = 200_000


class BasisSizeError(ValueError):
    """Requested basis exceeds the configured size limits."""


class DegenerateWeightsError(ValueError):
    """Collective weights are all zero; the W state is undefined."""


def basis_dimension(n_atoms: int, mode: str, e_max: int) -> int:
    """Dimension of the truncated space without enumerating it.

    ground_rydberg: sum_n C(N, n); three_level: sum_n C(N, n) * 2**n.
    """
    if mode == GROUND_RYDBERG:
        return sum(comb(n_atoms, n) for n in range(e_max + 1))
    if mode == THREE_LEVEL:
        return sum(comb(n_atoms, n) * 2**n for n in range(e_max + 1))
    raise ValueError(f"unknown basis mode {mode!r}")


@dataclass(frozen=True, eq=False)
class TruncatedBasis:
    """Indexed enumeration of product states with bounded excitation number.

    Attributes
    ----------
    n_atoms : int
        Number of atoms N.
    mode : str
        ``"ground_rydberg"`` (two levels per atom, g0 and ryd) or
        ``"three_level"`` (g0, g1, ryd).
    e_max : int
        Maximum total number of atoms not in g0.
    states : ndarray, shape (dim, N), uint8
        Level code of each atom in each basis state, in canonical order.
    """

    n_atoms: int
    mode: str
    e_max: int
    states: np.ndarray
    _index: dict = field(repr=False)
    _block_slices: tuple = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return self.states.shape[0]

    def index_of(self, levels) -> int:
        """Position of a product state (sequence of level codes)."""
        return self._index[tuple(int(x) for x in levels)]

    def excitations(self) -> np.ndarray:
        """Excitation number (atoms not in g0) of every basis state."""
        return np.count_nonzero(self.states != G0, axis=1)

    def block(self, n: int) -> slice:
        """Slice of the states with excitation number ``n``."""
        return self._block_slices[n]

    def level_occupancy(self, level: int) -> np.ndarray:
        """Boolean (dim, N) array: atom m is in ``level`` in state i."""
        return self.states == level

    def single_excitation_indices(self, level: int) -> np.ndarray:
        """Indices of the N states with exactly atom k in ``level``, rest g0.

        Entry k of the result is the basis index of ``|level_k>``; used to
        address the collective singly-excited manifolds.
        """
        out = np.empty(self.n_atoms, dtype=np.intp)
        for k in range(self.n_atoms):
            levels = [G0] * self.n_atoms
            levels[k] = level
            out[k] = self._index[tuple(levels)]
        return out

    # Single-atom transition connectivity, cached per (level_from, level_to).
    def transitions(self, level_from: int, level_to: int):
        """All pairs of states related by one atom hopping level_from -> level_to.

        Returns ``(src, dst, atom)`` index arrays: state ``dst[i]`` equals
        state ``src[i]`` with atom ``atom[i]`` moved from ``level_from`` to
        ``level_to``.  Pairs whose target falls outside the truncation are
        dropped.
        """
        key = ("transitions", level_from, level_to)
        cache = self._cache
        if key not in cache:
            src, dst, atom = [], [], []
            for i, levels in enumerate(self.states):
                for m in np.flatnonzero(levels == level_from):
                    target = levels.copy()
                    target[m] = level_to
                    j = self._index.get(tuple(int(x) for x in target))
                    if j is not None:
                        src.append(i)
                        dst.append(j)
                        atom.append(m)
            cache[key] = (
                np.asarray(src, dtype=np.intp),
                np.asarray(dst, dtype=np.intp),
                np.asarray(atom, dtype=np.intp),
            )
        return cache[key]

    def rydberg_pairs(self):
        """States containing >= 2 ryd atoms, with their ryd pair indices.

        Returns ``(state, j, k)`` arrays, one entry per unordered ryd pair
        (j < k) per state; used to place pairwise interaction energies on
        the diagonal.
        """
        cache = self._cache
        if "rydberg_pairs" not in cache:
            si, aj, ak = [], [], []
            for i, levels in enumerate(self.states):
                ryd_atoms = np.flatnonzero(levels == RYD)
                for j, k in combinations(ryd_atoms, 2):
                    si.append(i)
                    aj.append(j)
                    ak.append(k)
            cache["rydberg_pairs"] = (
                np.asarray(si, dtype=np.intp),
                np.asarray(aj, dtype=np.intp),
                np.asarray(ak, dtype=np.intp),
            )
        return cache["rydberg_pairs"]


def _excited_code(mode: str) -> int:
    # In ground_rydberg mode the single excited level is the Rydberg state.
    return RYD if mode == GROUND_RYDBERG else G1


@lru_cache(maxsize=256)
def build_basis(
    n_atoms: int,
    mode: str = THREE_LEVEL,
    e_max: int = 2,
    max_dimension: int = MAX_DIMENSION,
) -> TruncatedBasis:
    """Enumerate the truncated product basis for ``n_atoms`` atoms.

    Parameters
    ----------
    n_atoms : int
        Atom count, 1 <= N <= MAX_ATOMS.
    mode : str
        ``"ground_rydberg"`` or ``"three_level"``.
    e_max : int
        Total-excitation truncation, 0 <= e_max <= N.  The default 2 keeps the
        leading double-excitation (blockade-violating) states.  In
        three_level mode the bound applies jointly to g1 and ryd excitations;
        this is an approximation knob justified by protocols that start in
        |0bar> under blockade.
    """
    if n_atoms < 1 or n_atoms > MAX_ATOMS:
        raise BasisSizeError(f"n_atoms must be in [1, {MAX_ATOMS}], got {n_atoms}")
    if e_max < 0 or e_max > n_atoms:
        raise ValueError(f"e_max must be in [0, {n_atoms}], got {e_max}")
    dim = basis_dimension(n_atoms, mode, e_max)
    if dim > max_dimension:
        raise BasisSizeError(
            f"basis dimension {dim} exceeds cap {max_dimension} "
            f"(N={n_atoms}, mode={mode}, e_max={e_max})"
        )

    excited_levels = (RYD,) if mode == GROUND_RYDBERG else (G1, RYD)
    states = np.zeros((dim, n_atoms), dtype=np.uint8)
    block_slices = []
    row = 0
    for n in range(e_max + 1):
        start = row
        for atoms in combinations(range(n_atoms), n):
            for pattern in product(excited_levels, repeat=n):
                for a, lvl in zip(atoms, pattern):
                    states[row, a] = lvl
                row += 1
        block_slices.append(slice(start, row))
    assert row == dim
    index = {tuple(int(x) for x in s): i for i, s in enumerate(states)}
    states.setflags(write=False)
    return TruncatedBasis(n_atoms, mode, e_max, states, index, tuple(block_slices))


@dataclass(frozen=True)
class CollectiveWeights:
    """Per-atom coupling strengths alpha_m (rad/s) defining |1bar> and |rbar>."""

    alphas: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        if a.ndim != 1:
            raise ValueError("alphas must be a 1-d sequence")
        if np.any(a < 0):
            raise ValueError("coupling strengths must be non-negative")
        object.__setattr__(self, "alphas", a)

    @property
    def n_atoms(self) -> int:
        return self.alphas.size

    @property
    def alpha_bar(self) -> float:
        """Collective coupling: alpha_bar = sqrt(sum alpha_k**2)."""
        return float(np.sqrt(np.sum(self.alphas**2)))

    def normalized(self) -> np.ndarray:
        """Weights alpha_k / alpha_bar of the collective states."""
        bar = self.alpha_bar
        if bar == 0.0:
            raise DegenerateWeightsError("all coupling strengths are zero")
        return self.alphas / bar

    @classmethod
    def uniform(cls, n_atoms: int, alpha: float = 1.0) -> "CollectiveWeights":
        return cls(np.full(n_atoms, alpha, dtype=float))


@dataclass
class StateVector:
    """Normalized complex amplitudes over a TruncatedBasis."""

    basis: TruncatedBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.basis.dimension,):
            raise ValueError(
                f"amplitude vector has shape {amp.shape}, basis dimension "
                f"is {self.basis.dimension}"
            )
        self.amplitudes = amp

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes / self.norm())

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def collective_state(
    basis: TruncatedBasis,
    kind: str,
    weights: CollectiveWeights | None = None,
    phases=None,
    rng: np.random.Generator | None = None,
) -> StateVector:
    """Construct one of the named collective states on ``basis``.

    kind : {"zero_bar", "one_bar", "r_bar", "thermal_one"}
        ``zero_bar`` is the all-g0 product state; ``one_bar``/``r_bar`` are
        the weight alpha_k/alpha_bar superpositions of single g1/ryd
        excitations; ``thermal_one`` is (1/sqrt(N)) sum_k e^{i phi_k} |1_k>
        with the given (or drawn uniform) per-atom phases.
    """
    n = basis.n_atoms
    if weights is None:
        weights = CollectiveWeights.uniform(n)
    if weights.n_atoms != n:
        raise ValueError("weights length does not match basis atom count")

    amp = np.zeros(basis.dimension, dtype=np.complex128)
    if kind == "zero_bar":
        amp[basis.index_of([G0] * n)] = 1.0
        return StateVector(basis, amp)

    if kind in ("one_bar", "r_bar"):
        level = G1 if kind == "one_bar" else RYD
        if basis.mode == GROUND_RYDBERG and level == G1:
            raise ValueError("one_bar requires a three_level basis")
        amp[basis.single_excitation_indices(level)] = weights.normalized()
        return StateVector(basis, amp)

    if kind == "thermal_one":
        if phases is None:
            if rng is None:
                raise ValueError("thermal_one needs explicit phases or an rng")
            phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
        phases = np.asarray(phases, dtype=float)
        if phases.shape != (n,):
            raise ValueError(f"thermal_one needs {n} phases")
        level = G1 if basis.mode == THREE_LEVEL else _excited_code(basis.mode)
        amp[basis.single_excitation_indices(level)] = np.exp(1j * phases) / np.sqrt(n)
        return StateVector(basis, amp)

    raise ValueError(f"unknown collective state kind {kind!r}")


def populations(
    state: StateVector, weights: CollectiveWeights | None = None
) -> tuple[float, float, float, float]:
    """Collective populations (P0bar, P1bar, Prbar, Pperp) of ``state``.

    Pperp is the singly-excited population orthogonal to the weighted
    symmetric states; together with the multi-excitation remainder the four
    values and P_multi sum to 1.
    """
    basis = state.basis
    if weights is None:
        weights = CollectiveWeights.uniform(basis.n_atoms)
    w = weights.normalized()

    amp = state.amplitudes
    p0 = float(np.abs(amp[basis.index_of([G0] * basis.n_atoms)]) ** 2)

    p1 = pr = 0.0
    perp = 0.0
    levels = (G1, RYD) if basis.mode == THREE_LEVEL else (_excited_code(basis.mode),)
    for level in levels:
        idx = basis.single_excitation_indices(level)
        sub = amp[idx]
        total = float(np.sum(np.abs(sub) ** 2))
        sym = float(np.abs(np.dot(np.conj(w), sub)) ** 2)
        if level == G1:
            p1 = sym
        else:
            pr = sym
        perp += total - sym
    return p0, p1, pr, max(perp, 0.0)
