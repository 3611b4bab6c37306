"""Current-fluctuation autocorrelation, power spectral density and Fano factor."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.fft import rfft
from scipy.integrate import trapezoid
from scipy.signal import correlate

from bohmex.errors import RecordTooShort, UndefinedFano
from bohmex.transport.records import CurrentRecord
from bohmex.units import ELEMENTARY_CHARGE_C

logger = logging.getLogger(__name__)

MIN_LENGTH_FACTOR = 10
LOW_FREQUENCY_BINS = 3
FLOOR_SIGMAS = 3.0
FS_PER_S = 1e15
# (e²/fs) -> A²·s
PSD_TO_SI = ELEMENTARY_CHARGE_C**2 * FS_PER_S


@dataclass
class Autocorrelation:
    """R(τ) of current fluctuations at lags 0..L·dt (fs), in (e/fs)².

    ``values`` is the unbiased estimator, ``biased`` divides every lag by the full record
    length and is the one transformed into a spectrum.
    """

    lags: np.ndarray
    values: np.ndarray
    biased: np.ndarray
    dt: float
    mean_current: float
    n_samples: int

    @property
    def record_length(self) -> float:
        return self.n_samples * self.dt


@dataclass
class NoiseSpectrum:
    frequencies: np.ndarray
    psd: np.ndarray
    s_zero: float
    fano: float
    mean_current: float
    df: float
    nyquist: float
    parseval_error: float
    window: str = "bartlett"

    @property
    def frequencies_thz(self) -> np.ndarray:
        return self.frequencies * 1000.0

    @property
    def psd_si(self) -> np.ndarray:
        return self.psd * PSD_TO_SI

    def rows(self) -> list[dict[str, float]]:
        return [
            {"f_THz": float(f), "S_e2_per_fs": float(s), "S_A2s": float(s_si)}
            for f, s, s_si in zip(self.frequencies_thz, self.psd, self.psd_si, strict=True)
        ]

    def summary(self) -> dict[str, float]:
        return {
            "mean_current_e_per_fs": self.mean_current,
            "s_zero_e2_per_fs": self.s_zero,
            "fano": self.fano,
            "df_THz": self.df * 1000.0,
            "nyquist_THz": self.nyquist * 1000.0,
            "parseval_error": self.parseval_error,
        }


def autocorrelation(
    record: CurrentRecord | np.ndarray,
    max_lag: float,
    transient: float = 0.0,
    dt: float | None = None,
) -> Autocorrelation:
    """Time-averaged ⟨ΔI(t)ΔI(t+τ)⟩ over the record after ``transient`` fs.

    A plain current series (e/fs) needs its sampling interval ``dt``.
    """
    if isinstance(record, CurrentRecord):
        if transient > 0:
            record = record.trimmed(transient)
        current, dt = record.current, record.bin_width
    else:
        if dt is None:
            raise ValueError("a bare current series needs its sampling interval dt")
        current = np.asarray(record, dtype=float)[round(transient / dt) :]
    n_lag = round(max_lag / dt)
    if n_lag < 1:
        raise ValueError(f"max_lag {max_lag} fs is shorter than one bin of {dt} fs")
    if current.size < MIN_LENGTH_FACTOR * n_lag:
        raise RecordTooShort(
            f"record of {current.size} bins is shorter than {MIN_LENGTH_FACTOR} x {n_lag} lags"
        )
    mean = float(current.mean())
    fluct = current - mean
    n = fluct.size
    full = correlate(fluct, fluct, mode="full", method="fft")
    sums = full[n - 1 : n + n_lag]
    lag_index = np.arange(n_lag + 1)
    return Autocorrelation(
        lags=lag_index * dt,
        values=sums / (n - lag_index),
        biased=sums / n,
        dt=dt,
        mean_current=mean,
        n_samples=n,
    )


def bartlett_weights(n_lag: int) -> np.ndarray:
    return 1.0 - np.arange(n_lag + 1) / (n_lag + 1)


def power_spectrum(acf: Autocorrelation, strict: bool = False) -> NoiseSpectrum:
    """One-sided S(f) = 2Δt Σ_k w_k R(k) e^(-i2πfkΔt) of the Bartlett-windowed biased R.

    Frequencies run from 0 to the Nyquist frequency in steps of 1/(record length).
    The Fano factor compares S at f→0 with the Schottky value 2e⟨I⟩; when ⟨I⟩ is not
    resolved above its own noise floor it is undefined.
    """
    n_lag = acf.lags.size - 1
    weighted = bartlett_weights(n_lag) * acf.biased
    n = acf.n_samples
    sequence = np.zeros(n)
    sequence[: n_lag + 1] = weighted
    sequence[n - n_lag :] = weighted[1:][::-1]
    psd = np.maximum(2.0 * acf.dt * rfft(sequence).real, 0.0)

    df = 1.0 / (n * acf.dt)
    frequencies = np.arange(psd.size) * df
    s_zero = float(psd[1 : 1 + LOW_FREQUENCY_BINS].mean())

    r0 = float(acf.biased[0])
    integral = float(trapezoid(psd, frequencies))
    parseval_error = abs(integral - r0) / r0 if r0 > 0 else 0.0

    floor = FLOOR_SIGMAS * math.sqrt(s_zero / (2.0 * acf.record_length))
    if abs(acf.mean_current) <= floor:
        message = (
            f"mean current {acf.mean_current:.3e} e/fs is within the noise floor {floor:.3e}"
        )
        if strict:
            raise UndefinedFano(message)
        logger.warning("Fano factor undefined: %s", message)
        fano = math.nan
    else:
        fano = s_zero / (2.0 * acf.mean_current)

    return NoiseSpectrum(
        frequencies=frequencies,
        psd=psd,
        s_zero=s_zero,
        fano=fano,
        mean_current=acf.mean_current,
        df=df,
        nyquist=1.0 / (2.0 * acf.dt),
        parseval_error=parseval_error,
    )


def spectral_peak(spectrum: NoiseSpectrum, f_min: float = 0.0) -> tuple[float, float]:
    """Frequency (1/fs) and height of the largest PSD bin at or above ``f_min``."""
    mask = spectrum.frequencies >= f_min
    if not np.any(mask):
        raise ValueError(f"no spectral bins above {f_min}")
    idx = np.flatnonzero(mask)[np.argmax(spectrum.psd[mask])]
    return float(spectrum.frequencies[idx]), float(spectrum.psd[idx])
