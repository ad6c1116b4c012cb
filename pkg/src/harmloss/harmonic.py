"""Harmonic copper, iron and magnet losses from a dq ripple spectrum.

Table values are interpolated linearly in frequency; bins outside the
table grid are an error rather than an extrapolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BandOutsideTables
from .machine import HarmonicParameterTables
from .spectrum import HarmonicSpectrum


@dataclass(frozen=True)
class HarmonicLossBreakdown:
    copper: float
    iron: float
    magnet: float

    @property
    def total(self) -> float:
        return self.copper + self.iron + self.magnet


def _table(t: HarmonicParameterTables, name: str, f: np.ndarray) -> np.ndarray:
    grid = np.asarray(t.grid)
    if f.size and (f[0] < grid[0] or f[-1] > grid[-1]):
        raise BandOutsideTables(
            f"spectrum spans [{f[0]:g}, {f[-1]:g}] Hz, tables cover "
            f"[{grid[0]:g}, {grid[-1]:g}] Hz"
        )
    return np.interp(f, grid, np.asarray(getattr(t, name)))


def copper_harmonic(spec: HarmonicSpectrum, t: HarmonicParameterTables) -> float:
    """``k_cu * sum R_cu/f^2 * (U_d^2/L_d^2 + U_q^2/L_q^2)``.

    The (2*pi)^2 of the physical current amplitude is absorbed by the
    fitted ``k_cu * R_cu`` product.
    """
    f = spec.f_h
    if f.size and f[0] <= 0:
        raise BandOutsideTables("copper losses are undefined at 0 Hz")
    r = _table(t, "rcu_h", f)
    ld = _table(t, "ld_h", f)
    lq = _table(t, "lq_h", f)
    terms = r / f**2 * ((spec.u_d_h / ld) ** 2 + (spec.u_q_h / lq) ** 2)
    return float(t.k_cu * terms.sum())


def iron_harmonic(spec: HarmonicSpectrum, t: HarmonicParameterTables) -> float:
    r = _table(t, "riron_h", spec.f_h)
    return float(t.k_iron * ((spec.u_d_h**2 + spec.u_q_h**2) / r).sum())


def magnet_harmonic(spec: HarmonicSpectrum, t: HarmonicParameterTables) -> float:
    # d-axis ripple only
    r = _table(t, "rmag_h", spec.f_h)
    return float(t.k_mag * (spec.u_d_h**2 / r).sum())


def total_harmonic(spec: HarmonicSpectrum, t: HarmonicParameterTables) -> HarmonicLossBreakdown:
    return HarmonicLossBreakdown(
        copper=copper_harmonic(spec, t),
        iron=iron_harmonic(spec, t),
        magnet=magnet_harmonic(spec, t),
    )
