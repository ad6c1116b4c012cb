"""dq ripple spectra of switched winding voltages.

Amplitudes are single-sided peak values. The DC and Nyquist bins carry
``sqrt(2)`` times their RMS content so that ``sum(a**2) / 2`` is the mean
square of the series for every bin alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import BandEmpty
from .machine import DqVoltages, HarmonicParameterTables
from .modulation import TWO_PI_3, PhaseVoltageWaveform

AMPLITUDE_CONVENTION = "single-sided peak"


@dataclass(frozen=True, eq=False)
class DqSeries:
    d: np.ndarray
    q: np.ndarray
    sample_rate: float


@dataclass(frozen=True, eq=False)
class HarmonicSpectrum:
    f_h: np.ndarray
    u_d_h: np.ndarray
    u_q_h: np.ndarray
    band: tuple
    resolution: float

    def __post_init__(self):
        for name in ("f_h", "u_d_h", "u_q_h"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def bins(self) -> list[tuple[float, float, float]]:
        return list(zip(self.f_h.tolist(), self.u_d_h.tolist(), self.u_q_h.tolist()))

    def scaled(self, factor: float) -> "HarmonicSpectrum":
        return HarmonicSpectrum(self.f_h, self.u_d_h * factor, self.u_q_h * factor,
                                self.band, self.resolution)

    def select(self, f_lo: float, f_hi: float) -> "HarmonicSpectrum":
        keep = (self.f_h >= f_lo) & (self.f_h <= f_hi)
        return HarmonicSpectrum(self.f_h[keep], self.u_d_h[keep], self.u_q_h[keep],
                                (max(f_lo, self.band[0]), min(f_hi, self.band[1])),
                                self.resolution)

    def metadata(self) -> dict:
        return {
            "amplitude_convention": AMPLITUDE_CONVENTION,
            "band_Hz": list(self.band),
            "resolution_Hz": self.resolution,
            "n_bins": int(self.f_h.size),
        }


def park(a, b, c, theta) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude-invariant Park transform; the zero-sequence part is dropped."""
    d = (2.0 / 3.0) * (a * np.cos(theta) + b * np.cos(theta - TWO_PI_3)
                       + c * np.cos(theta + TWO_PI_3))
    q = -(2.0 / 3.0) * (a * np.sin(theta) + b * np.sin(theta - TWO_PI_3)
                        + c * np.sin(theta + TWO_PI_3))
    return d, q


def park_transform(waveform: PhaseVoltageWaveform) -> DqSeries:
    a, b, c = waveform.windings
    d, q = park(a, b, c, waveform.theta_e)
    return DqSeries(d=d, q=q, sample_rate=waveform.sample_rate)


def single_sided_amplitudes(x: np.ndarray) -> np.ndarray:
    n = x.size
    amp = np.abs(np.fft.rfft(x)) * (2.0 / n)
    amp[0] *= math.sqrt(0.5)
    if n % 2 == 0:
        amp[-1] *= math.sqrt(0.5)
    return amp


def ripple_spectrum(
    series: DqSeries,
    u_ref: DqVoltages,
    band: Union[HarmonicParameterTables, tuple],
    f_sw: float | None = None,
) -> HarmonicSpectrum:
    """FFT of the dq ripple (series minus ``u_ref``) restricted to a band.

    ``band`` is either an explicit ``(f_min, f_max)`` or a table set, whose
    default upper edge needs ``f_sw``.
    """
    n = series.d.size
    fs = series.sample_rate
    if isinstance(band, HarmonicParameterTables):
        if band.f_max is None and f_sw is None:
            raise ValueError("f_sw is required to resolve the default band edge")
        f_lo, f_hi = band.band(fs, f_sw if f_sw is not None else 0.0)
    else:
        f_lo, f_hi = band
    res = fs / n
    freqs = np.arange(n // 2 + 1) * res
    # select by bin index so band edges that coincide with a bin (such as
    # the Nyquist frequency) are not lost to rounding
    k = np.arange(freqs.size)
    keep = (k >= math.ceil(f_lo / res - 1e-9)) & (k <= math.floor(f_hi / res + 1e-9))
    if not keep.any():
        raise BandEmpty(f"no FFT bin in [{f_lo:g}, {f_hi:g}] Hz (resolution {fs / n:g} Hz)")
    amp_d = single_sided_amplitudes(series.d - u_ref.d)
    amp_q = single_sided_amplitudes(series.q - u_ref.q)
    return HarmonicSpectrum(freqs[keep], amp_d[keep], amp_q[keep], (f_lo, f_hi), res)


def spectrum_csv(spec: HarmonicSpectrum) -> str:
    lines = ["f_hz,ud_V,uq_V"]
    for f, ud, uq in zip(spec.f_h.tolist(), spec.u_d_h.tolist(), spec.u_q_h.tolist()):
        lines.append(f"{f!r},{ud!r},{uq!r}")
    return "\n".join(lines) + "\n"
