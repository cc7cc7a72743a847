"""Control allocation and the cascaded flight controller.

The mixer maps a desired wrench (collective thrust plus three body
torques) to the six actuator channels: two rotor throttles, the fore
rotor's two-axis speed modulation, and two elevon servos. Yaw and pitch
authority is shared between rotors and elevons through the allocation
ratio lam (1 = rotors only, 0 = surfaces only); the split cancels in the
forward model, so mix followed by forward_model is the identity for any
lam.

The cascade runs position P -> velocity PID -> attitude P -> rate PID.
Loop rates subsample a common base clock; outputs are held between
ticks. Attitude control is tilt-prioritized: thrust-axis alignment and
yaw are handled separately so a tailsitter can pitch through large
angles without the yaw error polluting the tilt command.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from . import quat


@dataclass(frozen=True)
class AllocationGains:
    """Static actuator effectiveness constants plus the moment split."""

    c_t1: float = 0.008    # fore rotor thrust per throttle unit, N
    c_t2: float = 0.0065   # aft rotor thrust per throttle unit, N
    k_t1: float = 6.0e-5   # fore rotor yaw torque per throttle unit, N*m
    k_t2: float = 4.0e-5   # aft rotor yaw torque per throttle unit, N*m
    c_m: float = 0.002     # fore rotor moment per modulation unit, N*m
    k_ey: float = 0.6      # elevon pitch torque per servo unit at q_ref, N*m
    k_ez: float = 0.4      # elevon yaw torque per servo unit at q_ref, N*m
    lam: float = 1.0       # rotor share of pitch/yaw moment

    def __post_init__(self):
        for name in ("c_t1", "c_t2", "k_t1", "k_t2", "c_m"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        if self.k_ey == 0.0 or self.k_ez == 0.0:
            raise ConfigError("elevon effectiveness must be nonzero")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError("lam must lie in [0, 1]")
        if not self.c_t1 * self.k_t2 + self.c_t2 * self.k_t1 > 0.0:
            raise ConfigError("allocation denominator must be positive")


@dataclass(frozen=True)
class Wrench:
    f_t: float = 0.0
    tau_x: float = 0.0
    tau_y: float = 0.0
    tau_z: float = 0.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.f_t, self.tau_x, self.tau_y, self.tau_z))):
            raise ConfigError("wrench entries must be finite")


@dataclass(frozen=True)
class ActuatorCommand:
    t_d1: float = 0.0   # fore throttle
    t_d2: float = 0.0   # aft throttle
    m_dx: float = 0.0   # modulation, x component
    m_dy: float = 0.0   # modulation, y component
    d_1: float = 0.0    # elevon 1
    d_2: float = 0.0    # elevon 2


@dataclass(frozen=True)
class ActuatorLimits:
    throttle_min: float = 0.0
    throttle_max: float = 2000.0
    servo_max: float = 0.6

    def __post_init__(self):
        if self.throttle_max <= self.throttle_min:
            raise ConfigError("throttle_max must exceed throttle_min")
        if self.servo_max <= 0.0:
            raise ConfigError("servo_max must be positive")


def derived_params(gains):
    """Closed-form mixer coefficients (eta, kappa, gamma, delta)."""
    den = gains.c_t1 * gains.k_t2 + gains.c_t2 * gains.k_t1
    eta = gains.k_t2 / den
    kappa = gains.k_t1 / den
    gamma = -gains.lam * gains.c_t2 / den
    delta = gains.lam * gains.c_t1 / den
    return eta, kappa, gamma, delta


def mix(wrench, gains):
    """Allocate a wrench to actuator commands (no saturation here)."""
    eta, kappa, gamma, delta = derived_params(gains)
    one_m = 1.0 - gains.lam
    return ActuatorCommand(
        t_d1=eta * wrench.f_t + gamma * wrench.tau_z,
        t_d2=kappa * wrench.f_t + delta * wrench.tau_z,
        m_dx=wrench.tau_x / gains.c_m,
        m_dy=gains.lam * wrench.tau_y / gains.c_m,
        d_1=one_m * wrench.tau_y / (2.0 * gains.k_ey)
        + one_m * wrench.tau_z / (2.0 * gains.k_ez),
        d_2=one_m * wrench.tau_y / (2.0 * gains.k_ey)
        - one_m * wrench.tau_z / (2.0 * gains.k_ez),
    )


def forward_model(cmd, gains):
    """Wrench produced by a set of actuator commands."""
    f_t = gains.c_t1 * cmd.t_d1 + gains.c_t2 * cmd.t_d2
    tau_x = gains.c_m * cmd.m_dx
    tau_y = gains.c_m * cmd.m_dy + gains.k_ey * (cmd.d_1 + cmd.d_2)
    tau_z = (
        -gains.k_t1 * cmd.t_d1
        + gains.k_t2 * cmd.t_d2
        + gains.k_ez * (cmd.d_1 - cmd.d_2)
    )
    return Wrench(f_t=f_t, tau_x=tau_x, tau_y=tau_y, tau_z=tau_z)


def modulation_signal(t_d1, m_d, theta, beta_delay=0.0):
    """Instantaneous fore-rotor command with once-per-rev modulation.

    The modulation phase is taken from the direction of m_d in the motor
    frame: phi = atan2(m_x, m_y), zero when the moment demand points
    along +y. Accepts scalar or array theta.
    """
    m_d = np.asarray(m_d, dtype=float)
    amp = math.hypot(float(m_d[0]), float(m_d[1]))
    phi = math.atan2(float(m_d[0]), float(m_d[1]))
    return t_d1 + amp * np.sin(np.asarray(theta, dtype=float) + phi - beta_delay)


def saturate(wrench, gains, limits):
    """Allocate with thrust priority: torques scale down, thrust doesn't.

    Finds the largest s in [0, 1] such that mix(f, s*torque) respects the
    throttle box, the servo box, and the modulation headroom
    (t_d1 +/- |m_d| inside the throttle box). All constraints are affine
    in s, so the bound is exact, not iterated. Returns (command, s).
    """
    base = mix(Wrench(f_t=wrench.f_t), gains)
    tq = mix(Wrench(0.0, wrench.tau_x, wrench.tau_y, wrench.tau_z), gains)

    lo, hi = limits.throttle_min, limits.throttle_max
    m_amp = math.hypot(tq.m_dx, tq.m_dy)
    # each row: s * coef <= rhs
    rows = [
        (tq.t_d1, hi - base.t_d1),
        (-tq.t_d1, base.t_d1 - lo),
        (tq.t_d2, hi - base.t_d2),
        (-tq.t_d2, base.t_d2 - lo),
        (tq.d_1, limits.servo_max),
        (-tq.d_1, limits.servo_max),
        (tq.d_2, limits.servo_max),
        (-tq.d_2, limits.servo_max),
        (m_amp + tq.t_d1, hi - base.t_d1),
        (m_amp - tq.t_d1, base.t_d1 - lo),
    ]
    s = 1.0
    feasible = True
    for coef, rhs in rows:
        if rhs < 0.0:
            feasible = False
        elif coef > 0.0:
            s = min(s, rhs / coef)
    if not feasible:
        # thrust alone exceeds the box; clamp it and drop the torques
        t1 = min(max(base.t_d1, lo), hi)
        t2 = min(max(base.t_d2, lo), hi)
        return ActuatorCommand(t_d1=t1, t_d2=t2), 0.0
    s = max(s, 0.0)
    full = mix(Wrench(wrench.f_t, s * wrench.tau_x, s * wrench.tau_y,
                      s * wrench.tau_z), gains)
    return full, s


class VectorPid:
    """Per-axis PID with clamped integrator. State is owned, not shared."""

    def __init__(self, kp, ki, kd, i_limit):
        self.kp = np.asarray(kp, dtype=float)
        self.ki = np.asarray(ki, dtype=float)
        self.kd = np.asarray(kd, dtype=float)
        self.i_limit = np.asarray(i_limit, dtype=float)
        if np.any(self.i_limit < 0.0):
            raise ConfigError("integrator limit must be non-negative")
        self.reset()

    def reset(self):
        self.integral = np.zeros_like(self.kp)
        self._prev_err = None

    def step(self, err, dt):
        err = np.asarray(err, dtype=float)
        self.integral = np.clip(self.integral + self.ki * err * dt,
                                -self.i_limit, self.i_limit)
        if self._prev_err is None or dt <= 0.0:
            derr = np.zeros_like(err)
        else:
            derr = (err - self._prev_err) / dt
        self._prev_err = err.copy()
        return self.kp * err + self.integral + self.kd * derr


def _rate_divisor(base, rate, name):
    if rate <= 0 or base % rate != 0:
        raise ConfigError(f"{name} rate {rate} must divide base rate {base}")
    return base // rate


@dataclass(frozen=True)
class CascadeGains:
    pos_p: tuple = (1.0, 1.0, 1.5)
    vel_kp: tuple = (2.5, 2.5, 3.5)
    vel_ki: tuple = (0.8, 0.8, 1.5)
    vel_kd: tuple = (0.0, 0.0, 0.0)
    vel_i_limit: tuple = (4.0, 4.0, 12.0)
    att_p_tilt: float = 6.0
    att_p_yaw: float = 3.0
    rate_kp: tuple = (0.55, 0.65, 0.25)
    rate_ki: tuple = (1.6, 1.9, 0.75)
    rate_kd: tuple = (0.001, 0.001, 0.0)
    rate_i_limit: tuple = (0.5, 0.8, 0.25)
    base_rate: int = 1000
    pos_rate: int = 50
    vel_rate: int = 250
    att_rate: int = 250
    yaw_rate_rate: int = 200

    def __post_init__(self):
        for name in ("pos_rate", "vel_rate", "att_rate", "yaw_rate_rate"):
            _rate_divisor(self.base_rate, getattr(self, name), name)
        flat = (tuple(self.pos_p) + tuple(self.vel_kp) + tuple(self.vel_ki)
                + tuple(self.vel_kd) + tuple(self.vel_i_limit)
                + tuple(self.rate_kp) + tuple(self.rate_ki)
                + tuple(self.rate_kd) + tuple(self.rate_i_limit)
                + (self.att_p_tilt, self.att_p_yaw))
        if not all(math.isfinite(v) for v in flat):
            raise ConfigError("cascade gains must be finite")


@dataclass
class ControlSetpoint:
    """Position/yaw target; pitch_override switches to transition mode.

    With pitch_override set (radians), the attitude setpoint is the given
    pitch about world y composed with the yaw target, the position loop
    controls altitude only, and no lateral force is commanded.
    """

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    pitch_override: float | None = None


class CascadeController:
    """Cascaded position/velocity/attitude/rate controller.

    Owns its integrator and hold state; one instance per vehicle, stepped
    at the base rate. Not safe for concurrent stepping.
    """

    TILT_MIN_PROJECTION = 0.15

    def __init__(self, gains, mass, gravity=9.81):
        if mass <= 0.0:
            raise ConfigError("mass must be positive")
        self.gains = gains
        self.mass = float(mass)
        self.gravity = float(gravity)
        self._vel_pid = VectorPid(gains.vel_kp, gains.vel_ki, gains.vel_kd,
                                  gains.vel_i_limit)
        self._rate_pid = VectorPid(gains.rate_kp, gains.rate_ki, gains.rate_kd,
                                   gains.rate_i_limit)
        self.reset()

    def reset(self):
        self._vel_pid.reset()
        self._rate_pid.reset()
        self._tick = 0
        self._vel_sp = np.zeros(3)
        self._f_des = np.array([0.0, 0.0, self.mass * self.gravity])
        self._rate_sp = np.zeros(3)
        self._tau_z = 0.0

    def step(self, setpoint, position, velocity, orientation, body_rate, dt):
        """One base-rate tick; returns the demanded Wrench (body frame)."""
        g = self.gains
        transition = setpoint.pitch_override is not None

        if self._tick % (g.base_rate // g.pos_rate) == 0:
            err = np.asarray(setpoint.position, dtype=float) - position
            sp = np.asarray(g.pos_p, dtype=float) * err
            if transition:
                sp[0] = 0.0
                sp[1] = 0.0
            self._vel_sp = sp

        if self._tick % (g.base_rate // g.vel_rate) == 0:
            vdt = dt * (g.base_rate // g.vel_rate)
            err = self._vel_sp - velocity
            if transition:
                err = err.copy()
                err[0] = 0.0
                err[1] = 0.0
            acc = self._vel_pid.step(err, vdt)
            if transition:
                acc[0] = 0.0
                acc[1] = 0.0
            self._f_des = self.mass * (acc + np.array([0.0, 0.0, self.gravity]))

        z_body = quat.rotate(orientation, np.array([0.0, 0.0, 1.0]))

        if self._tick % (g.base_rate // g.att_rate) == 0:
            if transition:
                q_sp = quat.multiply(
                    quat.from_axis_angle(np.array([0.0, 0.0, 1.0]), setpoint.yaw),
                    quat.from_axis_angle(np.array([0.0, 1.0, 0.0]),
                                         setpoint.pitch_override),
                )
                z_des = quat.rotate(q_sp, np.array([0.0, 0.0, 1.0]))
            else:
                f_norm = np.linalg.norm(self._f_des)
                z_des = (self._f_des / f_norm if f_norm > 1e-9
                         else np.array([0.0, 0.0, 1.0]))
                q_sp = quat.multiply(
                    quat.from_axis_angle(np.array([0.0, 0.0, 1.0]), setpoint.yaw),
                    _tilt_quaternion(z_des),
                )
            axis = np.cross(z_body, z_des)
            s_n = np.linalg.norm(axis)
            c_n = float(np.dot(z_body, z_des))
            tilt_w = (axis / s_n * math.atan2(s_n, c_n)) if s_n > 1e-12 else np.zeros(3)
            tilt_b = quat.rotate(quat.conjugate(orientation), tilt_w)
            full_b = quat.error_rotation_vector(orientation, q_sp)
            self._rate_sp = np.array([
                g.att_p_tilt * tilt_b[0],
                g.att_p_tilt * tilt_b[1],
                g.att_p_yaw * full_b[2],
            ])

        rate_err = self._rate_sp - body_rate
        tau = self._rate_pid.step(rate_err, dt)
        if self._tick % (g.base_rate // g.yaw_rate_rate) == 0:
            self._tau_z = float(tau[2])

        if transition:
            proj = max(float(z_body[2]), self.TILT_MIN_PROJECTION)
            thrust = float(self._f_des[2]) / proj
        else:
            thrust = float(np.dot(self._f_des, z_body))
        thrust = max(thrust, 0.0)

        self._tick += 1
        return Wrench(f_t=thrust, tau_x=float(tau[0]), tau_y=float(tau[1]),
                      tau_z=self._tau_z)


def _tilt_quaternion(z_des):
    # shortest rotation taking world +z to z_des
    z0 = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z0, z_des))
    axis = np.cross(z0, z_des)
    s = np.linalg.norm(axis)
    if s < 1e-12:
        if c > 0.0:
            return np.array([1.0, 0.0, 0.0, 0.0])
        return np.array([0.0, 1.0, 0.0, 0.0])
    return quat.from_axis_angle(axis / s, math.atan2(s, c))
