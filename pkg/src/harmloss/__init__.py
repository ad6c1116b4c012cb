"""Harmonic motor loss evaluation for battery-electric traction drives.

The pipeline runs from operating point to dq currents (MTPA / field
weakening), PWM winding voltages per inverter topology, the dq ripple
spectrum, and harmonic copper, iron and magnet losses. On top of that sit
mode selection, DC-link optimization, loss maps and drive-cycle energy
accounting.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BandEmpty,
    BandOutsideTables,
    ConfigError,
    HarmlossError,
    Infeasible,
    InfeasiblePoint,
    InvalidConfig,
    InvalidRatio,
    NoFeasibleMode,
    Overmodulation,
)
from .machine import (  # noqa: E402
    DqCurrents,
    DqVoltages,
    HarmonicParameterTables,
    MotorParameters,
    OperatingPoint,
    field_weakening_currents,
    fundamental_losses,
    mtpa_currents,
    steady_state_voltages,
)
from .modulation import Mode, PwmConfig, TopologyMode, synthesize_waveform  # noqa: E402
from .spectrum import HarmonicSpectrum, park_transform, ripple_spectrum  # noqa: E402
from .harmonic import (  # noqa: E402
    HarmonicLossBreakdown,
    copper_harmonic,
    iron_harmonic,
    magnet_harmonic,
    total_harmonic,
)
from .inverter import BuckParameters, SwitchParameters, buck_losses, inverter_losses  # noqa: E402
from .strategy import (  # noqa: E402
    DriveSystem,
    LossBreakdown,
    ModeConstraint,
    ModeDecision,
    build_loss_map,
    feasible_modes,
    optimize_dc_link,
    select_mode,
    voltage_capability,
)
from .cycle import DriveCycle, VehicleParameters, ingest_cycle, simulate_cycle  # noqa: E402
from .config import RunConfig, default_config, load_config  # noqa: E402
