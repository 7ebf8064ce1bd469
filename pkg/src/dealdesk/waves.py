"""Merger-wave time series: generation, smoothing and cycle diagnostics.

Synthetic transaction-count series follow a chosen trend regime (ideal,
linear, quadratic, exponential) plus noise. The diagnostics quantify how
much smoothing a random series manufactures apparent cycles: a k-window
trailing average of iid noise acquires lag-j autocorrelation close to
(k-j)/k, the Slutsky-Yule mechanism, so an averaged M&A count series can
look quasi-periodic with no cycle in the raw data.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import IllConditionedError, TooShortError, WindowTooLargeError, ZeroVarianceError

_MAX_POLY_DEGREE = 12


@dataclass(frozen=True)
class CountSeries:
    """Ordered period labels with one value per period."""

    timestamps: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.timestamps) != len(self.values):
            raise ValueError("timestamps and values must align")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TrendModel:
    """A trend regime, its coefficients, and the noise attached to it.

    Parameter layout by kind: ideal (c,), linear (a, b) for a*t + b,
    quadratic (a, b, c) for a*t^2 + b*t + c, exponential (a, b) for
    a*exp(b*t). Noise is Gaussian with ``noise_sigma`` by default;
    poisson draws counts with the trend as the mean and ignores sigma.
    """

    kind: Literal["ideal", "linear", "quadratic", "exponential"]
    parameters: tuple[float, ...]
    noise_sigma: float = 0.0
    seed: int = 0
    noise: Literal["gaussian", "poisson"] = "gaussian"

    _ARITY = {"ideal": 1, "linear": 2, "quadratic": 3, "exponential": 2}

    def __post_init__(self):
        if self.kind not in self._ARITY:
            raise ValueError(f"unknown trend kind {self.kind!r}")
        want = self._ARITY[self.kind]
        if len(self.parameters) != want:
            raise ValueError(f"{self.kind} trend takes {want} parameters, got {len(self.parameters)}")
        if not all(np.isfinite(self.parameters)):
            raise ValueError("trend parameters must be finite")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.noise not in ("gaussian", "poisson"):
            raise ValueError(f"unknown noise kind {self.noise!r}")

    def trend(self, t: np.ndarray) -> np.ndarray:
        p = self.parameters
        if self.kind == "ideal":
            return np.full_like(t, p[0], dtype=float)
        if self.kind == "linear":
            return p[0] * t + p[1]
        if self.kind == "quadratic":
            return p[0] * t**2 + p[1] * t + p[2]
        return p[0] * np.exp(p[1] * t)


def generate_series(model: TrendModel, length: int, clamp_at_zero: bool = True) -> CountSeries:
    """Draw one series of the given length, reproducible for a fixed seed.

    Periods run t = 1..length. Gaussian noise adds to the trend; poisson
    replaces each point with a count drawn at the trend mean (clamped to
    zero when negative). ``clamp_at_zero`` floors the result so it can
    stand in for transaction counts.
    """
    if length < 2:
        raise TooShortError(f"series length must be >= 2, got {length}")
    t = np.arange(1, length + 1, dtype=float)
    trend = model.trend(t)
    rng = np.random.default_rng(model.seed)
    if model.noise == "poisson":
        values = rng.poisson(np.maximum(trend, 0.0)).astype(float)
    else:
        values = trend + (rng.normal(0.0, model.noise_sigma, length) if model.noise_sigma > 0 else 0.0)
    if clamp_at_zero:
        values = np.maximum(values, 0.0)
    return CountSeries(
        timestamps=tuple(str(int(x)) for x in t),
        values=tuple(float(v) for v in values),
    )


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """Independent child seeds derived deterministically from one master."""
    children = np.random.SeedSequence(master_seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def moving_average(s: CountSeries, window: int) -> CountSeries:
    """Trailing equal-weight average; each output keeps its window-end label."""
    if not 1 <= window <= len(s):
        raise WindowTooLargeError(f"window {window} outside 1..{len(s)}")
    values = np.asarray(s.values, dtype=float)
    # sum before dividing so constant series come back bit-identical
    smoothed = np.convolve(values, np.ones(window), mode="valid") / window
    return CountSeries(
        timestamps=s.timestamps[window - 1:],
        values=tuple(float(v) for v in smoothed),
    )


def autocorrelation(s: CountSeries, max_lag: int) -> tuple[float, ...]:
    """Sample autocorrelation at lags 1..max_lag.

    Mean-removed, normalized by the lag-0 variance, so every value lies
    in [-1, 1]. Constant series have no variance to normalize by.
    """
    n = len(s)
    if not 1 <= max_lag < n:
        raise ValueError(f"max_lag must satisfy 1 <= L < {n}, got {max_lag}")
    x = np.asarray(s.values, dtype=float)
    x = x - x.mean()
    c0 = float(x @ x)
    if c0 == 0.0:
        raise ZeroVarianceError("series is constant; autocorrelation undefined")
    return tuple(float(x[:-lag] @ x[lag:]) / c0 for lag in range(1, max_lag + 1))


def dominant_period(s: CountSeries) -> tuple[float, float]:
    """Strongest cycle in the series after removing a straight-line trend.

    Returns (period, power_fraction): the periodogram's peak bin mapped to
    periods per cycle, and that bin's share of total non-DC power.
    """
    n = len(s)
    if n < 8:
        raise TooShortError(f"need >= 8 points for a periodogram, got {n}")
    x = np.asarray(s.values, dtype=float)
    if np.ptp(x) == 0.0:
        raise ZeroVarianceError("series is constant; no spectrum")
    t = np.arange(1, n + 1, dtype=float)
    line = np.polynomial.Polynomial.fit(t, x, 1)
    detrended = x - line(t)
    power = np.abs(np.fft.rfft(detrended)) ** 2
    nondc = power[1:]
    total = float(nondc.sum())
    if total == 0.0:
        raise ZeroVarianceError("detrended series carries no power")
    peak = int(np.argmax(nondc)) + 1
    return n / peak, float(power[peak]) / total


@dataclass(frozen=True)
class PolynomialFit:
    """Least-squares polynomial, coefficients in ascending powers of t."""

    degree: int
    coefficients: tuple[float, ...]
    rms_error: float

    def __call__(self, t) -> np.ndarray:
        return np.polynomial.Polynomial(self.coefficients)(np.asarray(t, dtype=float))


def fit_polynomial(s: CountSeries, degree: int) -> PolynomialFit:
    """Best degree-d polynomial over t = 1..n in the least-squares sense.

    Fitting happens in a normalized domain for conditioning and the
    coefficients are converted back to raw t. Degrees above 12 are
    refused; conversion back to the raw basis is no longer trustworthy.
    """
    n = len(s)
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    if degree > _MAX_POLY_DEGREE:
        raise IllConditionedError(f"degree {degree} exceeds the supported maximum {_MAX_POLY_DEGREE}")
    if n <= degree:
        raise TooShortError(f"need more than {degree} points, got {n}")
    t = np.arange(1, n + 1, dtype=float)
    x = np.asarray(s.values, dtype=float)
    fitted = np.polynomial.Polynomial.fit(t, x, degree)
    residuals = x - fitted(t)
    coefficients = fitted.convert().coef
    return PolynomialFit(
        degree=degree,
        coefficients=tuple(float(c) for c in coefficients),
        rms_error=float(np.sqrt(np.mean(residuals**2))),
    )


def rms_by_degree(s: CountSeries, degrees: Sequence[int] = tuple(range(1, 9))) -> dict[int, float]:
    """RMS error of the best fit at each degree, for inspection rather than a verdict."""
    return {d: fit_polynomial(s, d).rms_error for d in degrees}


@dataclass(frozen=True)
class WaveDiagnostics:
    """Smoothing window, cycle measures and the polynomial approximation."""

    window: int
    autocorrelation: tuple[float, ...]
    dominant_period: float
    power_fraction: float
    polynomial_fit: PolynomialFit


def analyze(s: CountSeries, window: int, max_lag: int, degree: int) -> WaveDiagnostics:
    """Smooth, then measure: autocorrelation, dominant period, polynomial fit."""
    smoothed = moving_average(s, window)
    acf = autocorrelation(smoothed, max_lag)
    period, fraction = dominant_period(smoothed)
    poly = fit_polynomial(smoothed, degree)
    return WaveDiagnostics(
        window=window,
        autocorrelation=acf,
        dominant_period=period,
        power_fraction=fraction,
        polynomial_fit=poly,
    )


# ---------------------------------------------------------------------------
# CSV round-trip
# ---------------------------------------------------------------------------

def load_count_series(source) -> CountSeries:
    """Read (period,value) rows."""
    close = False
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        stream = open(source, newline="", encoding="utf-8")
        close = True
    else:
        stream = source
    try:
        reader = csv.DictReader(stream)
        periods, values = [], []
        for row in reader:
            periods.append(row["period"].strip())
            values.append(float(row["value"]))
        return CountSeries(timestamps=tuple(periods), values=tuple(values))
    finally:
        if close:
            stream.close()


def save_count_series(s: CountSeries, dest) -> None:
    """Write (period,value) rows; inverse of load_count_series."""
    close = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        stream = open(dest, "w", newline="", encoding="utf-8")
        close = True
    else:
        stream = dest
    try:
        writer = csv.writer(stream)
        writer.writerow(["period", "value"])
        for period, value in zip(s.timestamps, s.values):
            writer.writerow([period, repr(value)])
    finally:
        if close:
            stream.close()


def plot_data_rows(raw: CountSeries, smoothed: CountSeries, poly: PolynomialFit) -> list[list[str]]:
    """Rows (period, raw, smoothed, poly_fit) for external plotting.

    Smoothed and fitted columns are blank before the first full window.
    """
    offset = len(raw) - len(smoothed)
    t = np.arange(1, len(smoothed) + 1, dtype=float)
    fitted = poly(t)
    rows = [["period", "raw", "smoothed", "poly_fit"]]
    for i, (period, value) in enumerate(zip(raw.timestamps, raw.values)):
        j = i - offset
        smoothed_cell = repr(smoothed.values[j]) if j >= 0 else ""
        fitted_cell = repr(float(fitted[j])) if j >= 0 else ""
        rows.append([period, repr(value), smoothed_cell, fitted_cell])
    return rows
