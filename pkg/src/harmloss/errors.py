"""Exception types shared across the package."""


class HarmlossError(Exception):
    """Base class for all package errors."""


class ConfigError(HarmlossError, ValueError):
    """A configuration value violates a component invariant."""


class InvalidConfig(ConfigError):
    """PWM sampling configuration cannot produce a coherent waveform."""


class Infeasible(HarmlossError):
    """No current vector meets the torque under the current/voltage limits."""


class Overmodulation(HarmlossError):
    """Commanded voltage exceeds the linear modulation range."""


class BandEmpty(HarmlossError):
    """No FFT bin falls inside the evaluation band."""


class BandOutsideTables(HarmlossError):
    """Spectrum bins lie outside the harmonic parameter table grid."""


class InvalidRatio(HarmlossError, ValueError):
    """Buck output voltage above its input voltage."""


class NoFeasibleMode(Infeasible):
    """No configured topology mode can supply the operating point."""


class CycleError(HarmlossError, ValueError):
    """Base class for drive-cycle ingestion errors."""


class NonMonotonicTime(CycleError):
    pass


class NegativeSpeed(CycleError):
    pass


class MalformedRow(CycleError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InfeasiblePoint(Infeasible):
    """A drive-cycle sample cannot be served by any configured mode."""

    def __init__(self, t: float, torque: float, speed: float):
        super().__init__(
            f"infeasible operating point at t={t:g} s: "
            f"torque={torque:.3f} N*m, speed={speed:.3f} rad/s"
        )
        self.t = t
        self.torque = torque
        self.speed = speed
