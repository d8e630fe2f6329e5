"""Fits and reductions of scan data to summary quantities.

Fitting contract: damped least squares with analytic Jacobians, convergence
at relative parameter step 1e-8 or 200 iterations, deterministic initial
guesses derived from the data (amplitude from the extreme datum, time
constants from the interpolated 1/e crossing, frequencies from the discrete
spectral peak).  Reported parameter errors come from the Gauss-Newton
covariance at the solution; when the data carry error bars the residuals are
weighted and the covariance is used as-is, otherwise it is scaled by the
reduced chi-square.

Decay shapes (both equal v0 at t=0 and v0/e at t=T2):

    gaussian:  v(t) = v0 * exp(-(t/T2)^2)
    kuhr:      v(t) = v0 / [1 + (e^{2/3}-1) (t/T2)^2]^{3/2}

Damped Rabi oscillations use y = A exp(-t/tau) sin^2(Omega t / 2) + offset;
the published form it stands in for is not printed in the reference, so this
documented shape is the package's interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

_E23 = np.exp(2.0 / 3.0) - 1.0


class FitError(RuntimeError):
    """Fit preconditions violated (too few points, undersampled scan, ...)."""


@dataclass
class ScanData:
    """One scan: x values, measured y, optional 1-sigma errors."""

    x: np.ndarray
    y: np.ndarray
    yerr: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ValueError("x and y must be equal-length 1-d arrays")
        if self.yerr is not None:
            self.yerr = np.asarray(self.yerr, dtype=float)
            if self.yerr.shape != self.x.shape:
                raise ValueError("yerr length mismatch")
            if np.any(self.yerr <= 0):
                raise ValueError("yerr must be positive where given")

    @property
    def n(self) -> int:
        return self.x.size


@dataclass
class FitResult:
    """Named best-fit parameters with standard errors."""

    params: dict
    stderrs: dict
    chi2_reduced: float
    converged: bool
    model: str = ""

    def __getitem__(self, name: str) -> float:
        return self.params[name]


def _solve(data: ScanData, names, model, jac, p0) -> FitResult:
    sigma = data.yerr if data.yerr is not None else np.ones_like(data.y)

    def residuals(p):
        return (model(p, data.x) - data.y) / sigma

    def jacobian(p):
        return jac(p, data.x) / sigma[:, None]

    # Parameter scales differ by many orders of magnitude in SI units
    # (amplitudes ~1, times ~1e-3 s, frequencies ~1e7 rad/s): scale steps.
    x_scale = np.maximum(np.abs(np.asarray(p0, dtype=float)), 1e-30)
    res = least_squares(
        residuals, p0, jac=jacobian, xtol=1e-8, ftol=1e-14, gtol=1e-14,
        x_scale=x_scale, max_nfev=200 * (len(p0) + 1),
    )
    m, k = data.n, len(p0)
    chi2 = float(np.sum(res.fun**2))
    chi2_red = chi2 / max(m - k, 1)
    jtj = res.jac.T @ res.jac
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.full((k, k), np.nan)
    if data.yerr is None:
        cov = cov * chi2_red
    stderr = np.sqrt(np.maximum(np.diag(cov), 0.0))
    converged = bool(res.success)
    return FitResult(
        params=dict(zip(names, map(float, res.x))),
        stderrs=dict(zip(names, map(float, stderr))),
        chi2_reduced=chi2_red,
        converged=converged,
    )


def _crossing_time(x, y, level) -> float:
    """First linear-interpolated crossing of y below ``level``."""
    below = np.flatnonzero(y <= level)
    if below.size == 0 or below[0] == 0:
        return float(x[-1]) if below.size == 0 else float(x[0])
    i = below[0]
    x0, x1, y0, y1 = x[i - 1], x[i], y[i - 1], y[i]
    if y1 == y0:
        return float(x1)
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def gaussian_decay(v0: float, t2: float, t) -> np.ndarray:
    return v0 * np.exp(-((np.asarray(t) / t2) ** 2))


def kuhr_decay(v0: float, t2: float, t) -> np.ndarray:
    return v0 / (1.0 + _E23 * (np.asarray(t) / t2) ** 2) ** 1.5


def fit_gaussian_decay(data: ScanData) -> FitResult:
    """Fit v(t) = v0 exp(-(t/T2)^2); returns (v0, T2)."""
    if data.n < 3:
        raise FitError("gaussian decay fit needs at least 3 points")
    v0 = float(np.max(data.y))
    t2 = _crossing_time(data.x, data.y, v0 / np.e)

    def model(p, t):
        return p[0] * np.exp(-((t / p[1]) ** 2))

    def jac(p, t):
        e = np.exp(-((t / p[1]) ** 2))
        return np.column_stack([e, p[0] * e * 2 * t**2 / p[1] ** 3])

    out = _solve(data, ("v0", "t2"), model, jac, [v0, max(t2, data.x[-1] * 1e-3)])
    out.model = "gaussian_decay"
    return out


def fit_kuhr_decay(data: ScanData) -> FitResult:
    """Fit v(t) = v0/[1+(e^{2/3}-1)(t/T2)^2]^{3/2}; returns (v0, T2)."""
    if data.n < 3:
        raise FitError("kuhr decay fit needs at least 3 points")
    v0 = float(np.max(data.y))
    t2 = _crossing_time(data.x, data.y, v0 / np.e)

    def model(p, t):
        return p[0] / (1.0 + _E23 * (t / p[1]) ** 2) ** 1.5

    def jac(p, t):
        base = 1.0 + _E23 * (t / p[1]) ** 2
        return np.column_stack(
            [
                base**-1.5,
                p[0] * 3.0 * _E23 * t**2 / p[1] ** 3 * base**-2.5,
            ]
        )

    out = _solve(data, ("v0", "t2"), model, jac, [v0, max(t2, data.x[-1] * 1e-3)])
    out.model = "kuhr_decay"
    return out


def fit_damped_rabi(data: ScanData) -> FitResult:
    """Fit y = A exp(-t/tau) sin^2(Omega t/2) + offset; returns Omega (rad/x-unit).

    Requires at least 6 points spanning at least one oscillation period.
    Raises FitError when the scan undersamples the frequency (the spectral
    peak sits in the top tenth of the resolvable band).
    """
    if data.n < 6:
        raise FitError("damped Rabi fit needs at least 6 points")
    x, y = data.x, data.y
    span = x[-1] - x[0]
    dt = np.median(np.diff(x))

    # Discrete spectral peak of the mean-subtracted scan as frequency seed.
    yc = y - y.mean()
    freqs = np.fft.rfftfreq(4 * x.size, d=dt)
    power = np.abs(np.fft.rfft(yc, n=4 * x.size)) ** 2
    k = int(np.argmax(power[1:]) + 1)
    omega0 = 2.0 * np.pi * freqs[k]
    nyquist = np.pi / dt
    if omega0 > 0.9 * nyquist:
        raise FitError("scan undersamples the oscillation (aliasing guard)")
    if omega0 * span < 2.0 * np.pi:
        raise FitError("scan spans less than one oscillation period")

    offset0 = float(np.min(y))
    a0 = float(np.max(y) - offset0)
    p0 = [a0, 10.0 * span, omega0, offset0]

    def model(p, t):
        return p[0] * np.exp(-t / p[1]) * np.sin(p[2] * t / 2.0) ** 2 + p[3]

    def jac(p, t):
        e = np.exp(-t / p[1])
        s = np.sin(p[2] * t / 2.0)
        c = np.cos(p[2] * t / 2.0)
        return np.column_stack(
            [
                e * s**2,
                p[0] * e * s**2 * t / p[1] ** 2,
                p[0] * e * s * c * t,
                np.ones_like(t),
            ]
        )

    out = _solve(data, ("amplitude", "tau", "omega", "offset"), model, jac, p0)
    out.params["omega"] = abs(out.params["omega"])
    out.model = "damped_rabi"
    return out


def scaling_parameter_f(
    omega_nt: float, n: int, r: float, n_ref: int = 97, r_ref: float = 8.7
) -> float:
    """Double-excitation scaling parameter F = Omega^2 [(n/n0)^12/(R/R0)^6]^-2."""
    if min(omega_nt, n, r, n_ref, r_ref) <= 0:
        raise ValueError("scaling parameter needs positive inputs")
    return float(omega_nt**2 * ((n / n_ref) ** 12 / (r / r_ref) ** 6) ** -2)


def small_angle_slope(data: ScanData, theta_max: float = np.pi / 2):
    """Weighted linear-fit slope dP/dtheta over the small-angle window.

    Returns (slope, stderr).  Needs at least 3 points with theta <= theta_max.
    """
    mask = data.x <= theta_max
    if np.count_nonzero(mask) < 3:
        raise FitError("need at least 3 points in the small-angle window")
    x, y = data.x[mask], data.y[mask]
    w = np.ones_like(x) if data.yerr is None else 1.0 / data.yerr[mask] ** 2
    xm = np.average(x, weights=w)
    ym = np.average(y, weights=w)
    sxx = float(np.sum(w * (x - xm) ** 2))
    slope = float(np.sum(w * (x - xm) * (y - ym)) / sxx)
    if data.yerr is None:
        resid = y - ym - slope * (x - xm)
        s2 = float(np.sum(resid**2) / max(x.size - 2, 1))
        stderr = np.sqrt(s2 / sxx)
    else:
        stderr = np.sqrt(1.0 / sxx)
    return slope, float(stderr)


def power_law_exponent(data: ScanData):
    """Log-log linear-fit exponent of y ~ x^p.  Returns (exponent, stderr)."""
    if data.n < 3:
        raise FitError("power-law fit needs at least 3 points")
    if np.any(data.x <= 0) or np.any(data.y <= 0):
        raise ValueError("power-law fit needs positive x and y")
    yerr = None if data.yerr is None else data.yerr / data.y
    logdata = ScanData(np.log(data.x), np.log(data.y), yerr)
    return small_angle_slope(logdata, theta_max=np.inf)


@dataclass
class LeakageCorrection:
    """Leakage-corrected probabilities; ``clipped`` marks floor-limited points."""

    corrected: np.ndarray
    background: float
    clipped: np.ndarray


def leakage_correct(
    probabilities, model, n_atoms: float, leak: float | None = None
) -> LeakageCorrection:
    """Remove the blow-away leakage background from retained-atom probabilities.

    The probability of retaining at least one atom from a pure-|0bar> site is
    the binomial background ``bg = 1 - (1-leak)^N``; observed probabilities
    are inverted at first order via p -> (p - bg)/(retain_1 - bg).  Values
    driven below zero are clipped and flagged.
    """
    p = np.atleast_1d(np.asarray(probabilities, dtype=float))
    leak = model.leak_0_to_1 if leak is None else leak
    bg = 1.0 - (1.0 - leak) ** n_atoms
    denom = model.retain_1 - bg
    if denom <= 0:
        raise ValueError("leakage background exceeds the retention signal")
    corrected = (p - bg) / denom
    clipped = corrected < 0.0
    return LeakageCorrection(np.maximum(corrected, 0.0), float(bg), clipped)
