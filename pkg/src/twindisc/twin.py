"""Lumped thermal twin of a Peltier plant under discrete PID control.

Two thermal states are tracked: the controlled surface temperature ``T_A``
and the heatsink-side temperature ``T_B``.  The module heat flows follow
the classic thermoelectric lumped model

    q_a = alpha * T_A[K] * I - I^2 R / 2 + K (T_A - T_B)
    q_b = alpha * T_B[K] * I - I^2 R / 2 + K (T_B - T_A)

read as the heat each face loses through the module, with Seebeck terms on
absolute temperature.  Each face additionally leaks to ambient through its
own conductance (bare surface for A, heatsink for B).  The drive is wired
so that increasing duty heats the controlled face: counts map linearly to
a negative module current of magnitude duty * V_supply / R.

Everything is deterministic given (params, config, seed); a simulation
owns all of its state, so independent runs can proceed concurrently.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

KELVIN_OFFSET = 273.15


class SimulationDivergedError(RuntimeError):
    """The integrator produced a non-finite state."""

    def __init__(self, step: int):
        self.step = int(step)
        super().__init__(f"simulation state became non-finite at step {self.step}")


@dataclass(frozen=True)
class PeltierParams:
    """Physical unknowns of the module (heat capacity absorbs the mass)."""

    alpha: float  # Seebeck coefficient, V/K
    r_ohm: float  # electrical resistance, ohm
    k_cond: float  # thermal conductance between faces, W/K
    c_heat: float  # lumped heat capacity per face, J/K

    def __post_init__(self):
        for name in ("alpha", "r_ohm", "k_cond", "c_heat"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class PidConfig:
    """Discrete PID acting in actuator counts with anti-windup."""

    kp: float = 2.0
    ki: float = 0.06
    kd: float = 0.0
    out_min: float = 0.0
    out_max: float = 255.0
    anti_windup: str = "conditional"  # or "none"

    def __post_init__(self):
        if not (self.out_min < self.out_max):
            raise ValueError("output range must be ordered (out_min < out_max)")
        if self.anti_windup not in ("conditional", "none"):
            raise ValueError("anti_windup must be 'conditional' or 'none'")


@dataclass(frozen=True)
class SensorConfig:
    """Measurement corruption applied to the recorded temperature."""

    quantization: float = 0.0  # degC per step, 0 disables
    noise_std: float = 0.0  # degC, 0 disables
    seed: int = 0

    def __post_init__(self):
        if self.quantization < 0.0 or self.noise_std < 0.0:
            raise ValueError("quantization and noise_std must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    """Everything a closed-loop run needs besides the physical parameters."""

    setpoint: float
    ambient: float = 25.0
    duration: float = 600.0
    sample_time: float = 1.0
    ode_substeps: int = 10
    pid: PidConfig = field(default_factory=PidConfig)
    supply_voltage: float = 12.0
    heatsink_conductance: float = 1.5  # W/K, face B to ambient
    surface_conductance: float = 0.05  # W/K, face A to ambient
    sensor: SensorConfig = field(default_factory=SensorConfig)
    label: str = ""

    def __post_init__(self):
        if self.sample_time <= 0.0:
            raise ValueError("sample_time must be > 0")
        if self.duration / self.sample_time < 50:
            raise ValueError("need at least 50 samples (duration/sample_time)")
        if self.ode_substeps < 1:
            raise ValueError("ode_substeps must be >= 1")
        if self.supply_voltage <= 0.0:
            raise ValueError("supply_voltage must be > 0")
        if self.heatsink_conductance < 0.0 or self.surface_conductance < 0.0:
            raise ValueError("conductances must be >= 0")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration / self.sample_time))


@dataclass(frozen=True, eq=False)
class TimeSeriesDataset:
    """Sampled (t, r, u, y) records of one operating-point experiment."""

    t: np.ndarray
    r: np.ndarray
    u: np.ndarray
    y: np.ndarray
    label: str = ""

    def __init__(self, t, r, u, y, label: str = ""):
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        u = np.asarray(u, dtype=float)
        y = np.asarray(y, dtype=float)
        if not (t.shape == r.shape == u.shape == y.shape) or t.ndim != 1:
            raise ValueError("t, r, u, y must be equal-length 1-D columns")
        if t.size < 2:
            raise ValueError("dataset needs at least 2 samples")
        steps = np.diff(t)
        if np.any(steps <= 0.0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("t must be strictly increasing with uniform spacing")
        for arr in (t, r, u, y):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "label", str(label))

    @property
    def sample_time(self) -> float:
        return float(self.t[1] - self.t[0])

    def __len__(self) -> int:
        return int(self.t.size)


def peltier_heat_flows(state, current: float, p: PeltierParams) -> tuple[float, float]:
    """Module heat flows (q_a, q_b) leaving each face, in watts.

    Temperatures enter the Seebeck terms in kelvin; the conduction terms
    only see the face difference.  Summing the pair cancels conduction
    exactly: q_a + q_b = alpha*I*(T_A + T_B)[K] - I^2 R.
    """
    t_a, t_b = float(state[0]), float(state[1])
    joule_half = 0.5 * current * current * p.r_ohm
    q_a = p.alpha * (t_a + KELVIN_OFFSET) * current - joule_half + p.k_cond * (t_a - t_b)
    q_b = p.alpha * (t_b + KELVIN_OFFSET) * current - joule_half + p.k_cond * (t_b - t_a)
    return q_a, q_b


def terminal_voltage(state, current: float, p: PeltierParams) -> float:
    """Module terminal voltage alpha*(T_B - T_A) + I*R."""
    return p.alpha * (float(state[1]) - float(state[0])) + current * p.r_ohm


def peltier_derivatives(
    state, current: float, p: PeltierParams, cfg: SimConfig
) -> tuple[float, float]:
    """Time derivatives (dT_A/dt, dT_B/dt) in degC/s for one module state."""
    t_a, t_b = float(state[0]), float(state[1])
    q_a, q_b = peltier_heat_flows(state, current, p)
    d_a = (-q_a - cfg.surface_conductance * (t_a - cfg.ambient)) / p.c_heat
    d_b = (-q_b - cfg.heatsink_conductance * (t_b - cfg.ambient)) / p.c_heat
    return d_a, d_b


def _quantize(value: float, step: float) -> float:
    if step <= 0.0:
        return value
    return round(value / step) * step


def simulate_closed_loop(
    p: PeltierParams, cfg: SimConfig, reference=None
) -> TimeSeriesDataset:
    """Run the twin under PID control and record (t, r, u, y).

    The reference defaults to a constant setpoint step applied from rest at
    ambient; passing an explicit reference array overrides it (its length
    then sets the horizon).  Integration is fixed-step explicit Euler with
    ``ode_substeps`` substeps per control period.  The recorded temperature
    carries the configured sensor noise and quantization; the controller
    acts on the same corrupted measurement.
    """
    if reference is None:
        n = cfg.n_samples
        ref = np.full(n, float(cfg.setpoint))
    else:
        ref = np.asarray(reference, dtype=float)
        n = ref.size
        if n < 2:
            raise ValueError("reference must have at least 2 samples")

    pid = cfg.pid
    dt = cfg.sample_time
    dt_sub = dt / cfg.ode_substeps
    rng = np.random.default_rng(cfg.sensor.seed)
    noise = (
        rng.normal(0.0, cfg.sensor.noise_std, size=n)
        if cfg.sensor.noise_std > 0.0
        else None
    )

    # hoisted locals keep the inner loop cheap
    alpha, r_ohm, k_cond, c_heat = p.alpha, p.r_ohm, p.k_cond, p.c_heat
    g_surf, g_sink, ambient = cfg.surface_conductance, cfg.heatsink_conductance, cfg.ambient
    kp, ki, kd = pid.kp, pid.ki, pid.kd
    out_min, out_max = pid.out_min, pid.out_max
    conditional = pid.anti_windup == "conditional"
    drive_gain = -cfg.supply_voltage / r_ohm / (out_max - out_min)

    t_a = t_b = float(cfg.ambient)
    integ = 0.0
    prev_err = None
    u_trace = np.empty(n)
    y_trace = np.empty(n)

    for k in range(n):
        y_meas = t_a
        if noise is not None:
            y_meas += noise[k]
        y_meas = _quantize(y_meas, cfg.sensor.quantization)

        err = ref[k] - y_meas
        d_term = 0.0 if (prev_err is None or kd == 0.0) else kd * (err - prev_err) / dt
        prev_err = err

        new_integ = integ + ki * dt * err
        u_raw = kp * err + new_integ + d_term
        if conditional and (
            (u_raw > out_max and err > 0.0) or (u_raw < out_min and err < 0.0)
        ):
            # saturated and the error would push further out: hold the integrator
            new_integ = integ
            u_raw = kp * err + new_integ + d_term
        # the stored integrator never exceeds what maps to the saturation edge
        integ = min(max(new_integ, min(out_min, 0.0)), out_max) if conditional else new_integ
        u = min(max(u_raw, out_min), out_max)

        u_trace[k] = u
        y_trace[k] = y_meas

        current = (u - out_min) * drive_gain
        joule_half = 0.5 * current * current * r_ohm
        seebeck = alpha * current
        for _ in range(cfg.ode_substeps):
            q_a = seebeck * (t_a + KELVIN_OFFSET) - joule_half + k_cond * (t_a - t_b)
            q_b = seebeck * (t_b + KELVIN_OFFSET) - joule_half + k_cond * (t_b - t_a)
            t_a += dt_sub * (-q_a - g_surf * (t_a - ambient)) / c_heat
            t_b += dt_sub * (-q_b - g_sink * (t_b - ambient)) / c_heat
        if not (math.isfinite(t_a) and math.isfinite(t_b)):
            raise SimulationDivergedError(k)

    t = np.arange(n) * dt
    return TimeSeriesDataset(t, ref, u_trace, y_trace, label=cfg.label)


def generate_campaign(
    params_by_setpoint: dict, base_cfg: SimConfig, seed: int = 0
) -> list[TimeSeriesDataset]:
    """One dataset per operating point, seeded deterministically per label.

    ``params_by_setpoint`` maps a setpoint in degC to its PeltierParams; the
    base config supplies everything else.  The sensor seed of run ``i`` (in
    ascending setpoint order) is ``seed + i``.
    """
    datasets = []
    for i, sp in enumerate(sorted(params_by_setpoint)):
        cfg = replace(
            base_cfg,
            setpoint=float(sp),
            label=f"{sp:g}",
            sensor=replace(base_cfg.sensor, seed=seed + i),
        )
        datasets.append(simulate_closed_loop(params_by_setpoint[sp], cfg))
    return datasets


def write_csv(dataset: TimeSeriesDataset, path) -> None:
    """Write a dataset as UTF-8 CSV: header t,r,u,y, LF endings, '.' decimals.

    Values are rendered with shortest round-trip formatting, so a write/read
    cycle reproduces them exactly.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,r,u,y\n")
        for row in zip(dataset.t, dataset.r, dataset.u, dataset.y):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_csv(path, label: str | None = None) -> TimeSeriesDataset:
    """Read a dataset CSV produced by :func:`write_csv` (or equivalent)."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    required = ("t", "r", "u", "y")
    names = data.dtype.names or ()
    if any(col not in names for col in required):
        raise ValueError(f"{path}: CSV must have columns t,r,u,y (got {names})")
    if label is None:
        label = os.path.splitext(os.path.basename(str(path)))[0]
    return TimeSeriesDataset(
        data["t"], data["r"], data["u"], data["y"], label=label
    )
