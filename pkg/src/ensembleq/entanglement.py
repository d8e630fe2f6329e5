"""W-state entanglement thresholds and certified entangled fraction.

A state with at most k entangled atoms factorizes into blocks of size <= k,

    |psi> = |psi_1> x ... x |psi_m>,     |psi_i> = a_i |0bar_i> + b_i |1bar_i>,

with m = ceil(N/k) blocks (the last of size N - (m-1)k) and each block a
superposition of its local vacuum and local W state.  The collective
overlaps follow in factorized form, with no 2^N expansion:

    <0bar|psi> = prod_i a_i
    <1bar|psi> = sum_i sqrt(k_i/N) b_i prod_{j != i} a_j

Sampled over random block states, the per-bin maximum of P1 = |<1bar|psi>|^2
against P0 = |<0bar|psi>|^2 is an upper envelope: a measured point above the
(N, k) curve certifies more than k-partite entanglement.  No blockade is
assumed (superpositions of blocks carry multiply-excited kets).  Enforcing
the blockade constraint (a single excited block, all others in vacuum)
collapses the envelope onto the analytic line P1 = (k/N)(1 - P0), and the
measured point then certifies the entangled fraction k/N = P1/(1 - P0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KPartiteDescriptor:
    """Random k-partite product state: per-block angles and phases.

    Block i is sin(theta_i/2)|0bar> + cos(theta_i/2) e^{i phi_i}|1bar> on
    ``sizes[i]`` atoms.
    """

    n_atoms: int
    k: int
    sizes: tuple
    thetas: np.ndarray
    phis: np.ndarray

    @property
    def a(self) -> np.ndarray:
        return np.sin(self.thetas / 2.0)

    @property
    def b(self) -> np.ndarray:
        return np.cos(self.thetas / 2.0) * np.exp(1j * self.phis)


def block_sizes(n_atoms: int, k: int) -> tuple:
    """Block partition (k, k, ..., k_m) with k_m = N - (m-1)k."""
    if not 1 <= k <= n_atoms:
        raise ValueError("need 1 <= k <= N")
    m = -(-n_atoms // k)  # ceil
    sizes = [k] * (m - 1)
    sizes.append(n_atoms - (m - 1) * k)
    return tuple(sizes)


def random_kpartite_state(
    n_atoms: int, k: int, rng: np.random.Generator
) -> KPartiteDescriptor:
    """Draw one random k-partite product state.

    theta is drawn uniform in cos(theta) (Haar-like on each block Bloch
    sphere, making |a|^2 uniform on [0, 1]); phi uniform on [0, 2pi).  The
    measure affects bin occupancy only, not the per-bin supremum.
    """
    sizes = block_sizes(n_atoms, k)
    m = len(sizes)
    thetas = np.arccos(rng.uniform(-1.0, 1.0, size=m))
    phis = rng.uniform(0.0, 2.0 * np.pi, size=m)
    return KPartiteDescriptor(n_atoms, k, sizes, thetas, phis)


def block_overlaps(desc: KPartiteDescriptor) -> tuple[float, float]:
    """(P0bar, P1bar) of a descriptor, computed in factorized form."""
    a = desc.a
    b = desc.b
    amp0 = np.prod(a)
    weights = np.sqrt(np.asarray(desc.sizes) / desc.n_atoms)
    amp1 = 0.0 + 0.0j
    for i in range(len(desc.sizes)):
        rest = np.prod(a[:i]) * np.prod(a[i + 1:])
        amp1 += weights[i] * b[i] * rest
    return float(np.abs(amp0) ** 2), float(np.abs(amp1) ** 2)


def _batch_overlaps(sizes, thetas, phis, n_atoms):
    """Vectorized (P0, P1) for a (batch, m) array of block angles."""
    a = np.sin(thetas / 2.0)
    b = np.cos(thetas / 2.0) * np.exp(1j * phis)
    prod_all = np.prod(a, axis=1)
    # prod over j != i, safe at zeros: prefix * suffix products
    m = a.shape[1]
    prefix = np.ones_like(a)
    suffix = np.ones_like(a)
    for i in range(1, m):
        prefix[:, i] = prefix[:, i - 1] * a[:, i - 1]
        suffix[:, m - 1 - i] = suffix[:, m - i] * a[:, m - i]
    weights = np.sqrt(np.asarray(sizes) / n_atoms)
    amp1 = np.sum(weights[None, :] * b * prefix * suffix, axis=1)
    return prod_all**2, np.abs(amp1) ** 2


@dataclass
class ThresholdCurve:
    """Per-bin running maxima of P1 over random k-partite states."""

    n_atoms: int
    k: int
    bin_edges: np.ndarray
    max_p1: np.ndarray
    counts: np.ndarray
    samples: int
    blockaded: bool = False

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def empty_bins(self) -> np.ndarray:
        return np.flatnonzero(self.counts == 0)

    def to_rows(self):
        return np.column_stack([self.bin_centers, self.max_p1, self.counts])


def numerical_threshold(
    n_atoms: int,
    k: int,
    samples: int = 100_000,
    bins: int = 50,
    rng: np.random.Generator | None = None,
    blockade: bool = False,
    batch: int = 50_000,
) -> ThresholdCurve:
    """Upper envelope of (P0, P1) over random k-partite states.

    With ``blockade=False`` (the default) multi-excitation kets are included:
    no blockade assumption enters.  ``blockade=True`` restricts to a single
    excited block with the rest in vacuum, which samples the analytic line
    P1 = (k/N)(1 - P0) directly (constrained-maximization cross-check).
    """
    if rng is None:
        rng = np.random.default_rng()
    sizes = block_sizes(n_atoms, k)
    m = len(sizes)
    edges = np.linspace(0.0, 1.0, bins + 1)
    max_p1 = np.zeros(bins)
    counts = np.zeros(bins, dtype=np.int64)

    done = 0
    while done < samples:
        nb = min(batch, samples - done)
        thetas = np.arccos(rng.uniform(-1.0, 1.0, size=(nb, m)))
        phis = rng.uniform(0.0, 2.0 * np.pi, size=(nb, m))
        if blockade:
            # Single excited block of size k; the rest pinned to vacuum
            # (theta = pi gives a = 1, b = 0).
            thetas[:, 1:] = np.pi
        p0, p1 = _batch_overlaps(sizes, thetas, phis, n_atoms)
        idx = np.minimum((p0 * bins).astype(np.intp), bins - 1)
        np.maximum.at(max_p1, idx, p1)
        np.add.at(counts, idx, 1)
        done += nb

    return ThresholdCurve(
        n_atoms, k, edges, max_p1, counts, samples, blockaded=blockade
    )


def blockaded_threshold(n_atoms: int, k: int, p0) -> np.ndarray | float:
    """Analytic k-partite bound under perfect blockade: P1 = (k/N)(1 - P0)."""
    if not 1 <= k <= n_atoms:
        raise ValueError("need 1 <= k <= N")
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 < 0) or np.any(p0 > 1):
        raise ValueError("P0 must lie in [0, 1]")
    out = (k / n_atoms) * (1.0 - p0)
    return float(out) if out.ndim == 0 else out


@dataclass
class CertificationResult:
    """Certified entangled fraction k/N with first-order error propagation."""

    fraction: float
    stderr: float
    n_atoms: int | None = None
    thresholds_met: dict | None = None  # k -> bool (analytic line exceeded)


def certify_fraction(
    p0: float,
    sigma0: float,
    p1: float,
    sigma1: float,
    n_atoms: int | None = None,
    numerical_curves: dict | None = None,
) -> CertificationResult:
    """Entangled fraction k/N = P1/(1-P0) from a measured (P0, P1) point.

    Error by first-order propagation.  With ``n_atoms`` the analytic
    blockaded thresholds are evaluated for every k (True when the point lies
    strictly above the (N, k) line); ``numerical_curves`` may supply
    unconstrained ThresholdCurve objects per k for the same check against
    the sampled envelopes.
    """
    if p0 >= 1.0:
        raise ValueError("P0 >= 1 leaves the certified fraction undefined")
    frac = p1 / (1.0 - p0)
    var = (sigma1 / (1.0 - p0)) ** 2 + (p1 * sigma0 / (1.0 - p0) ** 2) ** 2
    thresholds = None
    if n_atoms is not None:
        thresholds = {
            k: bool(p1 > blockaded_threshold(n_atoms, k, p0))
            for k in range(1, n_atoms + 1)
        }
        if numerical_curves:
            for k, curve in numerical_curves.items():
                j = min(int(p0 * (curve.bin_edges.size - 1)),
                        curve.max_p1.size - 1)
                thresholds[k] = thresholds.get(k, False) and bool(
                    p1 > curve.max_p1[j]
                )
    return CertificationResult(float(frac), float(np.sqrt(var)), n_atoms, thresholds)
