"""Benchmark data generators: a 3-variable nonlinear system and a CSTR loop.

Numerical system: x1 = t + e1, x2 = cos(t) + e2, x3 = t^2 + t + e3, with t
uniform on [-1, 1] and independent uniform noise on +-noise_halfwidth. Step
faults add a constant to one variable from an onset sample onward.

CSTR: a two-state exothermic reactor (outlet concentration C_A and
temperature T) under PI control of the feed flow q (concentration loop) and
the coolant temperature T_c (temperature loop). Recorded channels are
[C_A, T, T_c, q] at a 1 s sampling interval; fixed-step RK4 integrates the
continuous dynamics between samples. Process noise is piecewise constant over
each sampling interval, so trajectories converge as the integration step
shrinks and reruns with a fixed seed are byte-identical.

The physical parameter set below was tuned once to a stable closed-loop
steady state (C_A = 0.5 kmol/m^3, T = 350 K with q = 100 m^3/min and
T_c = 300 K) and is frozen; all values can be overridden through CstrConfig.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .linalg import as_matrix

# numerical-system step faults: variable index and additive magnitude
NUMERICAL_FAULTS = {1: (0, 0.6), 2: (1, 0.8), 3: (2, 1.0)}
DEFAULT_NUMERICAL_ONSET = 500

CSTR_FAULT_ONSET_S = 6000        # fault activates at the 101st minute
CSTR_F4_TF_FACTOR = 1.01         # feed temperature step, +1 %
CSTR_F5_DVDT = -4.0 / 500.0      # vessel volume ramp, m^3 per minute


@dataclass(frozen=True)
class NumericalConfig:
    n_samples: int = 1000
    seed: int = 0
    noise_halfwidth: float = 0.05

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.noise_halfwidth < 0:
            raise ValueError("noise_halfwidth must be non-negative")


@dataclass(frozen=True)
class FaultSpec:
    """Fault id 1-3: numerical step faults; 4: T_f step; 5: volume ramp."""

    id: int
    onset_index: int
    magnitude: float

    def __post_init__(self):
        if self.id not in (1, 2, 3, 4, 5):
            raise ValueError(f"unknown fault id {self.id}")
        if self.onset_index < 0:
            raise ValueError("onset_index must be non-negative")


def numerical_fault(fault_id: int, onset_index: int = DEFAULT_NUMERICAL_ONSET) -> FaultSpec:
    if fault_id not in NUMERICAL_FAULTS:
        raise ValueError(f"numerical faults are 1-3, got {fault_id}")
    return FaultSpec(id=fault_id, onset_index=onset_index,
                     magnitude=NUMERICAL_FAULTS[fault_id][1])


def cstr_fault(fault_id: int, onset_index: int = CSTR_FAULT_ONSET_S) -> FaultSpec:
    if fault_id not in (4, 5):
        raise ValueError(f"CSTR faults are 4-5, got {fault_id}")
    magnitude = CSTR_F4_TF_FACTOR if fault_id == 4 else CSTR_F5_DVDT
    return FaultSpec(id=fault_id, onset_index=onset_index, magnitude=magnitude)


def gen_numerical(config: NumericalConfig) -> tuple[np.ndarray, np.ndarray]:
    """Generate the 3 x N numerical data matrix; also returns the latent t values."""
    rng = np.random.default_rng(config.seed)
    n = config.n_samples
    t = rng.uniform(-1.0, 1.0, n)
    eps = rng.uniform(-config.noise_halfwidth, config.noise_halfwidth, (3, n))
    x = np.vstack([t + eps[0], np.cos(t) + eps[1], t**2 + t + eps[2]])
    return x, t


def inject_fault_numerical(data, fault_id: int,
                           onset_index: int = DEFAULT_NUMERICAL_ONSET,
                           magnitude: float | None = None) -> np.ndarray:
    """Additive step on one variable from the onset sample to the end."""
    x = as_matrix(data, "data").copy()
    if fault_id not in NUMERICAL_FAULTS:
        raise ValueError(f"numerical faults are 1-3, got {fault_id}")
    if not 0 <= onset_index < x.shape[1]:
        raise ValueError(f"onset {onset_index} outside series of length {x.shape[1]}")
    var, default_mag = NUMERICAL_FAULTS[fault_id]
    x[var, onset_index:] += default_mag if magnitude is None else magnitude
    return x


def fault_labels(n: int, fault_id: int, onset_index: int) -> np.ndarray:
    """0 before the onset, the fault id from the onset onward."""
    labels = np.zeros(n, dtype=int)
    labels[onset_index:] = fault_id
    return labels


@dataclass(frozen=True)
class CstrConfig:
    """Frozen CSTR defaults; rates are per minute, temperatures in K,
    concentrations in kmol/m^3, volumes in m^3."""

    q_flow: float = 100.0            # nominal feed flow, m^3/min
    volume: float = 100.0            # vessel volume, m^3
    c_af: float = 1.0                # feed concentration, kmol/m^3
    t_f: float = 350.0               # feed temperature, K
    k0: float = 7.2e10               # Arrhenius prefactor, 1/min
    e_over_r: float = 8750.0         # activation energy / gas constant, K
    delta_h: float = -5.0e4          # reaction enthalpy, kJ/kmol (exothermic)
    rho: float = 1000.0              # density, kg/m^3
    cp: float = 0.239                # heat capacity, kJ/(kg K)
    ua: float = 5.0e4                # heat transfer coefficient, kJ/(min K)
    t_c0: float = 300.0              # nominal coolant temperature, K
    ca_setpoint: float = 0.5         # concentration setpoint, kmol/m^3
    t_setpoint: float = 350.0        # temperature setpoint, K
    # PI gains: q loop acts on C_A error, T_c loop on T error
    kp_q: float = 100.0
    ki_q: float = 10.0
    kp_tc: float = 5.0
    ki_tc: float = 1.0
    td: float = 0.0                  # derivative time, off by default (PI control)
    dt: float = 0.1                  # integration step, s (must divide 1 s)
    v1_std: float = 1e-4             # concentration process noise, kmol/(m^3 min)
    v2_std: float = 0.05             # temperature process noise, K/min
    meas_std: tuple = (5e-4, 0.05, 0.05, 0.05)  # measurement noise on [C_A, T, T_c, q]
    lowpass_retention: float = 0.8   # preprocessing filter coefficient

    def __post_init__(self):
        if self.volume <= 0 or self.dt <= 0:
            raise ValueError("volume and dt must be positive")
        if self.k0 <= 0 or self.e_over_r <= 0 or self.ua <= 0:
            raise ValueError("rate constants must be positive")
        steps = 1.0 / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("dt must divide the 1 s sampling interval")


def simulate_cstr(config: CstrConfig, duration_s: int, seed: int = 0,
                  fault: FaultSpec | None = None, return_internals: bool = False):
    """Closed-loop CSTR run of duration_s seconds sampled at 1 Hz.

    Returns (4 x N measurements of [C_A, T, T_c, q], labels). Fault 4 scales
    the feed temperature by its magnitude factor; fault 5 ramps the vessel
    volume at its magnitude rate (m^3/min). Measurement noise perturbs the
    recorded channels only, never the dynamics. With return_internals the
    noise-free state trajectories (c_a, t, t_c, q, volume, t_f) come back as
    a third element.
    """
    if duration_s < 1:
        raise ValueError("duration must be at least one sample")
    if fault is not None and fault.id not in (4, 5):
        raise ValueError(f"CSTR supports faults 4-5, got {fault.id}")
    p = config
    rng = np.random.default_rng(seed)
    n = int(duration_s)
    steps = int(round(1.0 / p.dt))
    dt_min = p.dt / 60.0             # dynamics are written per minute
    heat_coeff = -p.delta_h / (p.rho * p.cp)
    ua_rho_cp = p.ua / (p.rho * p.cp)

    v_noise = rng.standard_normal((2, n))
    m_noise = rng.standard_normal((4, n))

    ca, temp = p.ca_setpoint, p.t_setpoint
    int_q = int_tc = 0.0
    prev_e1 = prev_e2 = 0.0
    volume = p.volume
    t_f = p.t_f
    out = np.empty((4, n))
    internals = np.empty((6, n))     # c_a, t, t_c, q, volume, t_f
    exp = math.exp
    t_blowup = 10.0 * p.t_setpoint

    for i in range(n):
        t_f_i = t_f
        if fault is not None and i >= fault.onset_index:
            if fault.id == 4:
                t_f_i = t_f * fault.magnitude
            else:
                elapsed_min = (i - fault.onset_index + 1) / 60.0
                volume = max(p.volume + fault.magnitude * elapsed_min, 1e-3)

        # digital PI(D) update once per sampling interval
        e1 = ca - p.ca_setpoint
        e2 = temp - p.t_setpoint
        int_q += e1 / 60.0
        int_tc += e2 / 60.0
        d1 = (e1 - prev_e1) * 60.0
        d2 = (e2 - prev_e2) * 60.0
        prev_e1, prev_e2 = e1, e2
        q = p.q_flow - (p.kp_q * e1 + p.ki_q * int_q + p.td * d1)
        t_c = p.t_c0 - (p.kp_tc * e2 + p.ki_tc * int_tc + p.td * d2)

        v1 = p.v1_std * v_noise[0, i]
        v2 = p.v2_std * v_noise[1, i]
        q_over_v = q / volume
        ua_term = ua_rho_cp / volume

        def deriv(c, t):
            rate = p.k0 * exp(-p.e_over_r / t) * c
            dc = q_over_v * (p.c_af - c) - rate + v1
            dt_ = q_over_v * (t_f_i - t) + heat_coeff * rate + ua_term * (t_c - t) + v2
            return dc, dt_

        try:
            for _ in range(steps):
                k1c, k1t = deriv(ca, temp)
                k2c, k2t = deriv(ca + 0.5 * dt_min * k1c, temp + 0.5 * dt_min * k1t)
                k3c, k3t = deriv(ca + 0.5 * dt_min * k2c, temp + 0.5 * dt_min * k2t)
                k4c, k4t = deriv(ca + dt_min * k3c, temp + dt_min * k3t)
                ca += dt_min / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c)
                temp += dt_min / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)
        except (OverflowError, ZeroDivisionError):
            raise RuntimeError("unstable configuration") from None

        if not (0.0 < temp < t_blowup) or not math.isfinite(ca):
            raise RuntimeError("unstable configuration")

        out[0, i] = ca + p.meas_std[0] * m_noise[0, i]
        out[1, i] = temp + p.meas_std[1] * m_noise[1, i]
        out[2, i] = t_c + p.meas_std[2] * m_noise[2, i]
        out[3, i] = q + p.meas_std[3] * m_noise[3, i]
        internals[:, i] = (ca, temp, t_c, q, volume, t_f_i)

    labels = np.zeros(n, dtype=int)
    if fault is not None:
        labels[fault.onset_index:] = fault.id
    if return_internals:
        keys = ("c_a", "t", "t_c", "q", "volume", "t_f")
        return out, labels, dict(zip(keys, internals))
    return out, labels


def lowpass_filter(x, retention: float = 0.8) -> np.ndarray:
    """First-order exponential smoother y_t = a*y_{t-1} + (1-a)*x_t per variable."""
    x = as_matrix(x, "data")
    if not 0 <= retention < 1:
        raise ValueError("retention must be in [0, 1)")
    y = np.empty_like(x)
    y[:, 0] = x[:, 0]
    a, b = retention, 1.0 - retention
    for i in range(1, x.shape[1]):
        y[:, i] = a * y[:, i - 1] + b * x[:, i]
    return y


def with_half_step(config: CstrConfig) -> CstrConfig:
    """Config copy with the integration step halved (convergence checks)."""
    return replace(config, dt=config.dt / 2.0)
