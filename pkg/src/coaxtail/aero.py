"""Tandem-wing lift, pitch moment, and longitudinal static stability.

Both wings are modeled with the same linear airfoil: Cl = k*alpha + Cl0,
valid for alpha in [-5, +10] degrees. The vehicle pitch moment uses the
nose-up-positive convention M = F_front*L_front - F_rear*L_rear, so a
statically stable layout (rear wing doing relatively more work) gives
dM/d(alpha) < 0: pitching up loads the rear wing harder and the moment
pushes the nose back down.

The retracted wing mode models the wings folded along the fuselage: they
stop producing lift and the lateral exposure area drops to a configured
fraction of the extended area.
"""

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError, InfeasibleError, LinearRangeError

ALPHA_MIN = math.radians(-5.0)
ALPHA_MAX = math.radians(10.0)

_MOMENT_TOL = 1e-9
_MAX_BISECT = 200


@dataclass(frozen=True)
class WingPanel:
    """One lifting surface: geometry, linear airfoil, and moment arm."""

    area: float             # S, m^2
    lift_slope: float       # k, 1/rad
    cl0: float              # lift coefficient at zero airfoil AoA
    incidence: float        # mounting angle relative to vehicle axis, rad
    arm: float              # distance from CG to panel aero center, m

    def __post_init__(self):
        if self.area <= 0.0:
            raise ConfigError("panel area must be positive")
        if self.lift_slope <= 0.0:
            raise ConfigError("lift slope must be positive")
        if self.arm <= 0.0:
            raise ConfigError("moment arm must be positive")


@dataclass(frozen=True)
class TandemConfig:
    front: WingPanel
    rear: WingPanel
    rho: float = 1.225
    frontal_area_extended: float = 0.134
    retracted_fraction: float = 0.338

    def __post_init__(self):
        if self.rho <= 0.0:
            raise ConfigError("air density must be positive")
        if self.frontal_area_extended <= 0.0:
            raise ConfigError("extended frontal area must be positive")
        if not 0.0 < self.retracted_fraction <= 1.0:
            raise ConfigError("retracted fraction must lie in (0, 1]")


class WingMode(enum.Enum):
    EXTENDED = "extended"
    RETRACTED = "retracted"


@dataclass(frozen=True)
class StabilityReport:
    trim_exists: bool
    stable: bool
    margin: float  # dM/d(delta_alpha) at the reference speed, N*m/rad


def lift_coefficient(alpha_airfoil, panel):
    """Linear-range lift coefficient; rejects angles outside validity."""
    if not ALPHA_MIN <= alpha_airfoil <= ALPHA_MAX:
        raise LinearRangeError(
            f"airfoil angle {math.degrees(alpha_airfoil):.2f} deg outside "
            "the linear range [-5, +10] deg"
        )
    return panel.lift_slope * alpha_airfoil + panel.cl0


def wing_force(v, alpha_airfoil, panel, rho):
    """Panel lift 0.5*rho*S*v^2*Cl, N."""
    if v < 0.0:
        raise ConfigError("airspeed must be non-negative")
    cl = lift_coefficient(alpha_airfoil, panel)
    return 0.5 * rho * panel.area * v * v * cl


def _require_identical_airfoils(config):
    f, r = config.front, config.rear
    if f.lift_slope != r.lift_slope or f.cl0 != r.cl0:
        raise ConfigError(
            "front and rear panels must share one airfoil "
            "(equal lift slope and Cl0)"
        )


def pitch_moment(config, v, delta_alpha):
    """Vehicle pitch moment about the CG, nose-up positive, N*m.

    delta_alpha is the common AoA deviation added to both incidences.
    """
    f, r = config.front, config.rear
    force_f = wing_force(v, f.incidence + delta_alpha, f, config.rho)
    force_r = wing_force(v, r.incidence + delta_alpha, r, config.rho)
    return force_f * f.arm - force_r * r.arm


def _delta_alpha_interval(config):
    # both panels must stay inside the airfoil linear range; shrink by a
    # nanoradian so float rounding cannot push an endpoint out of range
    f, r = config.front, config.rear
    lo = max(ALPHA_MIN - f.incidence, ALPHA_MIN - r.incidence) + 1e-9
    hi = min(ALPHA_MAX - f.incidence, ALPHA_MAX - r.incidence) - 1e-9
    if lo > hi:
        raise ConfigError("incidence angles leave no common linear AoA range")
    return lo, hi


def stability_margin(config, v):
    """Analytic dM/d(delta_alpha) at speed v, N*m/rad."""
    _require_identical_airfoils(config)
    f, r = config.front, config.rear
    q = 0.5 * config.rho * v * v
    return q * f.lift_slope * (f.area * f.arm - r.area * r.arm)


def static_stability_check(config, v=1.0):
    """Longitudinal static stability of the extended configuration.

    stable requires rear incidence strictly below front incidence and
    front area-arm product strictly below the rear one; margin is the
    analytic moment slope at the reference speed v.
    """
    _require_identical_airfoils(config)
    f, r = config.front, config.rear
    stable = (r.incidence < f.incidence) and (f.area * f.arm < r.area * r.arm)
    margin = stability_margin(config, v)
    lo, hi = _delta_alpha_interval(config)
    m_lo = pitch_moment(config, v, lo)
    m_hi = pitch_moment(config, v, hi)
    trim_exists = m_lo == 0.0 or m_hi == 0.0 or (m_lo < 0.0) != (m_hi < 0.0)
    return StabilityReport(trim_exists=trim_exists, stable=stable, margin=margin)


def total_lift(config, v, delta_alpha):
    """Combined wing lift at the given AoA deviation, N."""
    f, r = config.front, config.rear
    return (wing_force(v, f.incidence + delta_alpha, f, config.rho)
            + wing_force(v, r.incidence + delta_alpha, r, config.rho))


def trim_solve(config, v, required_lift):
    """AoA deviation zeroing the pitch moment at speed v.

    Bisects M(delta_alpha) to below 1e-9 N*m inside the linear-range
    interval. required_lift must be reachable inside that interval
    (lift is monotone in AoA); it anchors feasibility, the returned
    trim angle itself comes from the moment equation.
    """
    _require_identical_airfoils(config)
    if v <= 0.0:
        raise InfeasibleError("trim requires forward speed")
    lo, hi = _delta_alpha_interval(config)
    m_lo = pitch_moment(config, v, lo)
    m_hi = pitch_moment(config, v, hi)
    if m_lo == 0.0:
        root = lo
    elif m_hi == 0.0:
        root = hi
    elif (m_lo < 0.0) == (m_hi < 0.0):
        raise InfeasibleError(
            "pitch moment does not change sign inside the linear AoA range"
        )
    else:
        a, b, m_a = lo, hi, m_lo
        root = 0.5 * (a + b)
        for _ in range(_MAX_BISECT):
            root = 0.5 * (a + b)
            m_mid = pitch_moment(config, v, root)
            if abs(m_mid) < _MOMENT_TOL:
                break
            if (m_mid < 0.0) == (m_a < 0.0):
                a, m_a = root, m_mid
            else:
                b = root
        else:
            raise InfeasibleError("trim bisection did not converge")
    lift_min = total_lift(config, v, lo)
    lift_max = total_lift(config, v, hi)
    if not lift_min - 1e-9 <= required_lift <= lift_max + 1e-9:
        raise InfeasibleError(
            f"required lift {required_lift:.3f} N outside the achievable "
            f"[{lift_min:.3f}, {lift_max:.3f}] N at {v:.1f} m/s"
        )
    return root


def frontal_area(config, mode):
    """Lateral wind exposure area for the given wing mode, m^2."""
    if mode is WingMode.RETRACTED:
        return config.frontal_area_extended * config.retracted_fraction
    return config.frontal_area_extended
