"""Coaxtail: dynamics, control and power analysis for a coaxial dual-rotor
tailsitter with retractable tandem wings and a swashplateless fore rotor.

Submodules group by subject: aero (tandem-wing statics), rotor (the
swashplateless head), control (allocation and the cascade loops),
propulsion (propeller tables and the configuration power study), vehicle
(6-DOF simulation and scenarios), analysis (spectra, configs, CLI).
The names most programs need are re-exported here.
"""

from .aero import TandemConfig, WingMode, WingPanel, static_stability_check
from .analysis import (
    PsdResult,
    TimeSeries,
    avg_psd_db,
    cli_main,
    load_scenario,
    mean_subtract,
    peak_to_peak_reduction,
    psd,
)
from .control import (
    ActuatorCommand,
    AllocationGains,
    CascadeController,
    Wrench,
    forward_model,
    mix,
    saturate,
)
from .errors import (
    CoaxtailError,
    ConfigError,
    InfeasibleError,
    LinearRangeError,
    NumericalDomainError,
    SimulationFault,
    TableRangeError,
)
from .propulsion import (
    ConfigPower,
    PropellerTable,
    fixture_config_powers,
    mode_power,
    solve_rpm_for_thrust,
)
from .rotor import SplmParams, bench_torque_series
from .vehicle import (
    ScenarioSpec,
    SimLog,
    VehicleParams,
    VehicleState,
    WindProfile,
    WingSchedule,
    run_scenario,
    step_6dof,
    transition_profile,
)

__version__ = "0.1.0"

__all__ = [
    "ActuatorCommand",
    "AllocationGains",
    "CascadeController",
    "CoaxtailError",
    "ConfigError",
    "ConfigPower",
    "InfeasibleError",
    "LinearRangeError",
    "NumericalDomainError",
    "PropellerTable",
    "PsdResult",
    "ScenarioSpec",
    "SimLog",
    "SimulationFault",
    "SplmParams",
    "TableRangeError",
    "TandemConfig",
    "TimeSeries",
    "VehicleParams",
    "VehicleState",
    "WindProfile",
    "WingMode",
    "WingPanel",
    "WingSchedule",
    "Wrench",
    "avg_psd_db",
    "bench_torque_series",
    "cli_main",
    "fixture_config_powers",
    "forward_model",
    "load_scenario",
    "mean_subtract",
    "mix",
    "mode_power",
    "peak_to_peak_reduction",
    "psd",
    "run_scenario",
    "saturate",
    "solve_rpm_for_thrust",
    "static_stability_check",
    "step_6dof",
    "transition_profile",
    "__version__",
]
