"""Propeller thrust/power model and mission-average power studies.

Thrust and shaft power come from nondimensional coefficient tables:

    J = V / (n D),   T = C_T(J) rho n^2 D^4,   P = C_P(J) rho n^3 D^5,

with C_T, C_P linearly interpolated in J inside the tabulated range and
never extrapolated (coefficient curves bend sharply toward windmilling,
so out-of-range queries are an error, not a guess). Tables may carry
several constant-RPM sheets; coefficients then interpolate linearly in
RPM as well, clamped to the outermost sheets.

The configuration study compares propeller pairings by average electrical
power P(r) = r*P_hover + (1-r)*P_cruise over the hover-time ratio r. A
bundled wattage fixture ("paper-2025") carries the reference per-propeller
powers for the stock 16-inch/7-inch pairing so the headline comparison
numbers are reproducible without third-party coefficient data.
"""

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, InfeasibleError, NumericalDomainError, TableRangeError

_THRUST_TOL = 1e-6
_DEFAULT_N_MAX = 350.0  # rev/s search ceiling for rpm solving


@dataclass(frozen=True)
class RpmSheet:
    """Coefficient rows measured at one shaft speed."""

    rpm: float
    j: np.ndarray
    ct: np.ndarray
    cp: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.j, dtype=float)
        ct = np.asarray(self.ct, dtype=float)
        cp = np.asarray(self.cp, dtype=float)
        if not (j.shape == ct.shape == cp.shape) or j.ndim != 1 or j.size == 0:
            raise ConfigError("sheet columns must be equal-length 1-D arrays")
        if j.size > 1 and np.any(np.diff(j) <= 0.0):
            raise ConfigError("advance ratios must be strictly increasing")
        if np.any(cp <= 0.0):
            raise ConfigError("power coefficients must be positive")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "ct", ct)
        object.__setattr__(self, "cp", cp)

    def coefficients(self, j):
        """(C_T, C_P) at advance ratio j; single-row sheets are constant."""
        if self.j.size == 1:
            return float(self.ct[0]), float(self.cp[0])
        if not self.j[0] <= j <= self.j[-1]:
            raise TableRangeError(
                f"advance ratio {j:.4f} outside table range "
                f"[{self.j[0]:.4f}, {self.j[-1]:.4f}]"
            )
        return (float(np.interp(j, self.j, self.ct)),
                float(np.interp(j, self.j, self.cp)))


@dataclass(frozen=True)
class PropellerTable:
    """One propeller: diameter plus one or more constant-RPM sheets."""

    diameter: float
    sheets: tuple

    def __post_init__(self):
        if self.diameter <= 0.0:
            raise ConfigError("diameter must be positive")
        sheets = tuple(self.sheets)
        if not sheets:
            raise ConfigError("at least one coefficient sheet required")
        rpms = [s.rpm for s in sheets]
        if len(sheets) > 1 and any(b <= a for a, b in zip(rpms, rpms[1:])):
            raise ConfigError("sheets must be sorted by strictly increasing rpm")
        object.__setattr__(self, "sheets", sheets)

    @classmethod
    def single(cls, diameter, j, ct, cp, rpm=0.0):
        return cls(diameter, (RpmSheet(rpm, j, ct, cp),))

    @property
    def j_min(self):
        return max(s.j[0] for s in self.sheets)

    @property
    def j_max(self):
        return min(s.j[-1] for s in self.sheets)

    def coefficients(self, j, n):
        """(C_T, C_P) interpolated in J, then in rpm (clamped) across sheets."""
        if len(self.sheets) == 1:
            return self.sheets[0].coefficients(j)
        rpm = 60.0 * n
        rpms = np.array([s.rpm for s in self.sheets])
        if rpm <= rpms[0]:
            return self.sheets[0].coefficients(j)
        if rpm >= rpms[-1]:
            return self.sheets[-1].coefficients(j)
        hi = int(np.searchsorted(rpms, rpm))
        lo = hi - 1
        w = (rpm - rpms[lo]) / (rpms[hi] - rpms[lo])
        ct_lo, cp_lo = self.sheets[lo].coefficients(j)
        ct_hi, cp_hi = self.sheets[hi].coefficients(j)
        return ((1.0 - w) * ct_lo + w * ct_hi, (1.0 - w) * cp_lo + w * cp_hi)


def advance_ratio(v, n, d):
    """J = V/(n D)."""
    if n <= 0.0:
        raise NumericalDomainError("shaft speed must be positive")
    if d <= 0.0:
        raise ConfigError("diameter must be positive")
    if v < 0.0:
        raise ConfigError("airspeed must be non-negative")
    return v / (n * d)


def thrust_power(table, rho, v, n):
    """(thrust N, shaft power W) at airspeed v and shaft speed n rev/s."""
    if rho <= 0.0:
        raise ConfigError("air density must be positive")
    j = advance_ratio(v, n, table.diameter)
    ct, cp = table.coefficients(j, n)
    d = table.diameter
    thrust = ct * rho * n * n * d ** 4
    power = cp * rho * n ** 3 * d ** 5
    return thrust, power


def _feasible_speed_range(table, v, n_max):
    constant = len(table.sheets) == 1 and table.sheets[0].j.size == 1
    if v == 0.0 or constant:
        return 1e-3, n_max
    # one ulp of margin so J(lo) cannot round past the table edge
    lo = v / (table.j_max * table.diameter) * (1.0 + 1e-12)
    hi = n_max if table.j_min <= 0.0 else min(
        n_max, v / (table.j_min * table.diameter) * (1.0 - 1e-12))
    return lo, hi


def solve_rpm_for_thrust(table, rho, v, t_req, n_max=_DEFAULT_N_MAX):
    """Lowest shaft speed (rev/s) whose thrust matches t_req within 1e-6 N.

    Scans the J-feasible speed interval for the first sign change, then
    bisects. Thrust demands outside what the table can deliver raise
    InfeasibleError.
    """
    if t_req < 0.0:
        raise ConfigError("thrust demand must be non-negative")
    lo, hi = _feasible_speed_range(table, v, n_max)
    if lo >= hi:
        raise InfeasibleError("no shaft speed keeps the advance ratio in range")

    def miss(n):
        return thrust_power(table, rho, v, n)[0] - t_req

    grid = np.linspace(lo, hi, 256)
    prev_n, prev_m = grid[0], miss(grid[0])
    if abs(prev_m) < _THRUST_TOL:
        return float(prev_n)
    bracket = None
    for n in grid[1:]:
        m = miss(n)
        if abs(m) < _THRUST_TOL:
            return float(n)
        if (m < 0.0) != (prev_m < 0.0):
            bracket = (prev_n, n, prev_m)
            break
        prev_n, prev_m = n, m
    if bracket is None:
        raise InfeasibleError(
            f"thrust {t_req:.3f} N not reachable at {v:.1f} m/s within the table"
        )
    a, b, m_a = bracket
    for _ in range(200):
        mid = 0.5 * (a + b)
        m_mid = miss(mid)
        if abs(m_mid) < _THRUST_TOL:
            return float(mid)
        if (m_mid < 0.0) == (m_a < 0.0):
            a, m_a = mid, m_mid
        else:
            b = mid
    raise InfeasibleError("rpm bisection did not converge")


@dataclass(frozen=True)
class PropulsionConfig:
    """A propeller pairing plus which props run in each flight mode."""

    name: str
    fore: PropellerTable
    aft: PropellerTable
    fixedwing_active: tuple = ("aft",)
    multirotor_active: tuple = ("fore", "aft")

    def __post_init__(self):
        for rule in (self.fixedwing_active, self.multirotor_active):
            if not rule:
                raise ConfigError("each mode needs at least one active propeller")
            if any(p not in ("fore", "aft") for p in rule):
                raise ConfigError("active propellers must be 'fore' or 'aft'")

    def table(self, which):
        return self.fore if which == "fore" else self.aft


def mode_power(config, mode, rho, v, t_total_req):
    """Total electrical power (W) to produce t_total_req in the given mode.

    Multi-rotor mode splits thrust equally across both propellers (torque
    balance); fixed-wing mode splits equally across the active subset.
    """
    if mode == "multirotor":
        active = config.multirotor_active
    elif mode == "fixedwing":
        active = config.fixedwing_active
    else:
        raise ConfigError(f"unknown mode {mode!r}")
    share = t_total_req / len(active)
    total = 0.0
    for which in active:
        table = config.table(which)
        n = solve_rpm_for_thrust(table, rho, v, share)
        total += thrust_power(table, rho, v, n)[1]
    return total


@dataclass(frozen=True)
class ConfigPower:
    """Named hover/cruise electrical power pair, W."""

    name: str
    hover_w: float
    cruise_w: float


@dataclass(frozen=True)
class MissionPowerCurve:
    r: np.ndarray
    watts: dict  # name -> array over r

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if np.any(r < 0.0) or np.any(r > 1.0):
            raise ConfigError("hover-time ratios must lie in [0, 1]")
        object.__setattr__(self, "r", r)


def average_power(power, r):
    """Mission-average power at hover-time ratio r (affine in r)."""
    return r * power.hover_w + (1.0 - r) * power.cruise_w


def average_power_curve(powers, r_grid):
    r = np.asarray(r_grid, dtype=float)
    watts = {p.name: np.array([average_power(p, ri) for ri in r])
             for p in powers}
    return MissionPowerCurve(r=r, watts=watts)


def crossover_ratio(power_a, power_b):
    """Hover-time ratio where two average-power curves intersect.

    Returns None when the curves do not cross inside [0, 1]; identical
    curves are rejected as degenerate.
    """
    d_cruise = power_a.cruise_w - power_b.cruise_w
    d_hover = power_a.hover_w - power_b.hover_w
    if d_cruise == 0.0 and d_hover == 0.0:
        raise ConfigError("power curves are identical; crossover undefined")
    denom = d_cruise - d_hover
    if denom == 0.0:
        return None  # parallel curves
    r = d_cruise / denom
    if not 0.0 <= r <= 1.0:
        return None
    return r


# Reference per-propeller electrical wattages for the stock pairing:
# 16-inch and 7-inch props, each measured in multi-rotor and fixed-wing
# operation. Keyed by the fixture name the CLI accepts.
WATTAGE_FIXTURES = {
    "paper-2025": {
        "16in": {"multirotor": 33.0, "fixedwing": 61.0},
        "7in": {"multirotor": 105.3, "fixedwing": 63.5},
    },
}


def fixture_config_powers(fixture="paper-2025"):
    """The three study configurations built from a wattage fixture.

    HPC pairs the 16-inch (lift) with the 7-inch (cruise); HLC runs two
    16-inch props; HSC runs two 7-inch props with only one active in
    cruise. Hover always uses both.
    """
    try:
        w = WATTAGE_FIXTURES[fixture]
    except KeyError:
        raise ConfigError(f"unknown wattage fixture {fixture!r}") from None
    big, small = w["16in"], w["7in"]
    return (
        ConfigPower("HPC", hover_w=big["multirotor"] + small["multirotor"],
                    cruise_w=small["fixedwing"]),
        ConfigPower("HLC", hover_w=2.0 * big["multirotor"],
                    cruise_w=2.0 * big["fixedwing"]),
        ConfigPower("HSC", hover_w=2.0 * small["multirotor"],
                    cruise_w=small["fixedwing"]),
    )


def study_summary(powers, r_probe=0.2):
    """key=value summary lines for a configuration study."""
    by_name = {p.name: p for p in powers}
    lines = []
    for p in powers:
        lines.append(f"{p.name}_hover_W={p.hover_w:.9g}")
        lines.append(f"{p.name}_cruise_W={p.cruise_w:.9g}")
    if "HPC" in by_name and "HLC" in by_name:
        r_star = crossover_ratio(by_name["HPC"], by_name["HLC"])
        if r_star is not None:
            lines.append(f"crossover_HPC_HLC={r_star:.3f}")
        hpc = average_power(by_name["HPC"], r_probe)
        hlc = average_power(by_name["HLC"], r_probe)
        lines.append(
            f"reduction_at_r{r_probe:g}_vs_HLC={100.0 * (1.0 - hpc / hlc):.1f}%")
    if "HPC" in by_name and "HSC" in by_name:
        hpc = average_power(by_name["HPC"], r_probe)
        hsc = average_power(by_name["HSC"], r_probe)
        lines.append(
            f"reduction_at_r{r_probe:g}_vs_HSC={100.0 * (1.0 - hpc / hsc):.1f}%")
        gap = 100.0 * (by_name["HSC"].hover_w - by_name["HPC"].hover_w) \
            / by_name["HSC"].hover_w
        lines.append(f"multirotor_gap_vs_HSC={gap:.1f}%")
    if "HPC" in by_name and "HLC" in by_name:
        gap = 100.0 * (by_name["HLC"].cruise_w - by_name["HPC"].cruise_w) \
            / by_name["HLC"].cruise_w
        lines.append(f"fixedwing_gap_vs_HLC={gap:.1f}%")
    return lines


def write_power_curve_csv(path, curve):
    """power_curve.csv: column r plus one <name>_W column per config."""
    names = sorted(curve.watts)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r"] + [f"{n}_W" for n in names])
        for i, r in enumerate(curve.r):
            writer.writerow([f"{r:.9g}"]
                            + [f"{curve.watts[n][i]:.9g}" for n in names])


_SHEET_NAME = re.compile(r"^(?P<name>.+)_(?P<rpm>\d+(?:\.\d+)?)\.csv$")


def load_propeller_table(directory, name, diameter):
    """Load `<name>_<rpm>.csv` sheets (header J,CT,CP) from a directory."""
    directory = Path(directory)
    found = []
    for path in sorted(directory.glob(f"{name}_*.csv")):
        m = _SHEET_NAME.match(path.name)
        if m is None or m.group("name") != name:
            continue
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["J", "CT", "CP"]:
                raise ConfigError(f"{path.name}: expected header J,CT,CP")
            for row in reader:
                if not row or not "".join(row).strip():
                    continue
                if len(row) != 3:
                    raise ConfigError(f"{path.name}: malformed row {row!r}")
                rows.append([float(x) for x in row])
        if not rows:
            raise ConfigError(f"{path.name}: no data rows")
        data = np.array(rows)
        found.append(RpmSheet(float(m.group("rpm")), data[:, 0], data[:, 1],
                              data[:, 2]))
    if not found:
        raise ConfigError(f"no sheets matching {name}_<rpm>.csv in {directory}")
    found.sort(key=lambda s: s.rpm)
    return PropellerTable(diameter, tuple(found))
