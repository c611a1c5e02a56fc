"""Independent time-domain reference: fixed-step RK4 integration of the
nonlinear model, steady-state period extraction, waveform comparison, and
perturbation growth fitting.

This module never touches the frequency-domain solver — it exists to check
it.  Integration is classical 4th-order Runge–Kutta on the model dynamics
with the model's own input function, deterministic fixed step (the averaged
converter models are non-stiff at 50 µs).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .model import SystemModel

DIVERGENCE_LIMIT = 1e9
FLOOR_RATE = -1e6


@dataclass
class Trajectory:
    """Uniformly sampled state trajectory.

    ``diverged`` marks an integration cut short by non-finite or exploding
    states; the samples up to the failure are retained (for unstable systems
    this is the expected, useful outcome).
    """

    times: np.ndarray
    states: np.ndarray
    step: float
    period: float | None = None
    model_name: str = "model"
    state_labels: tuple = ()
    diverged: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape[:1] != self.times.shape:
            raise UsageError("times and states disagree on sample count")


def integrate(model: SystemModel, x0, t_span, step: float) -> Trajectory:
    """Fixed-step RK4 integration of ``model`` from ``x0`` over ``t_span``.

    Parameters
    ----------
    model : SystemModel
        Model providing ``dynamics`` and ``input_fn``.
    x0 : array_like
        Initial state, shape ``(n_states,)``.
    t_span : float or (float, float)
        End time (start 0) or explicit ``(t0, t1)``; must be an integer
        number of steps.
    step : float
        Step size in seconds.

    Returns
    -------
    Trajectory
        Full trajectory, or a flagged partial one if the state left the
        finite range (``diverged=True``).
    """
    if np.ndim(t_span) == 0:
        t0, t1 = 0.0, float(t_span)
    else:
        t0, t1 = (float(v) for v in t_span)
    if step <= 0 or t1 <= t0:
        raise UsageError("need step > 0 and t1 > t0")
    n_steps = int(round((t1 - t0) / step))
    if n_steps < 1 or abs(n_steps * step - (t1 - t0)) > 1e-9 * max(1.0, t1 - t0):
        raise UsageError("time span must be a positive integer number of steps")
    x = np.asarray(x0, dtype=complex)
    if x.shape != (model.n_states,):
        raise UsageError(f"x0 must have shape ({model.n_states},), got {x.shape}")

    times = t0 + step * np.arange(n_steps + 1)
    u_half = np.asarray(model.input_fn(t0 + 0.5 * step * np.arange(2 * n_steps + 1)),
                        dtype=complex)
    states = np.empty((n_steps + 1, model.n_states), dtype=complex)
    states[0] = x
    f = model.dynamics
    half = 0.5 * step
    diverged = False
    for k in range(n_steps):
        t = times[k]
        u0, um, u1 = u_half[2 * k], u_half[2 * k + 1], u_half[2 * k + 2]
        k1 = f(t, x, u0)
        k2 = f(t + half, x + half * k1, um)
        k3 = f(t + half, x + half * k2, um)
        k4 = f(t + step, x + step * k3, u1)
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT:
            return Trajectory(times=times[:k + 1], states=states[:k + 1], step=step,
                              period=model.period, model_name=model.name,
                              state_labels=model.state_labels, diverged=True)
        states[k + 1] = x
    return Trajectory(times=times, states=states, step=step, period=model.period,
                      model_name=model.name, state_labels=model.state_labels,
                      diverged=diverged)


def last_period(traj: Trajectory, period: float):
    """Final complete period of a trajectory, phase-aligned to ``t mod T = 0``.

    Returns
    -------
    (times, states)
        ``times`` has ``P = T/step`` samples covering ``[t_k, t_k + T)`` with
        ``t_k`` a multiple of the period.
    """
    if period <= 0:
        raise UsageError("period must be positive")
    p = int(round(period / traj.step))
    if p < 2 or abs(p * traj.step - period) > 1e-9 * period:
        raise UsageError("period must be an integer multiple of the trajectory step")
    n_samples = traj.states.shape[0]
    if n_samples < p:
        raise UsageError("trajectory shorter than one period")
    phase0 = (-int(round((traj.times[0] % period) / traj.step))) % p
    start_max = n_samples - p
    start = start_max - ((start_max - phase0) % p)
    if start < 0:
        raise UsageError("no phase-aligned complete period in trajectory")
    return traj.times[start:start + p], traj.states[start:start + p]


def _fourier_resample(values: np.ndarray, m: int) -> np.ndarray:
    """Resample a periodic complex waveform to ``m`` samples by truncated DFT."""
    mb = values.shape[0]
    if mb == m:
        return values
    spec = np.fft.fft(values, axis=0)
    keep = (min(m, mb) - 1) // 2
    out = np.zeros((m,) + values.shape[1:], dtype=complex)
    out[:keep + 1] = spec[:keep + 1]
    if keep > 0:
        out[-keep:] = spec[-keep:]
    return np.fft.ifft(out, axis=0) * (m / mb)


def compare_waveforms(a, b) -> dict:
    """Per-state deviation between two one-period waveforms.

    Parameters
    ----------
    a, b : (times, states) tuples
        Same period; if sample counts differ, ``b`` is resampled onto ``a``'s
        grid by truncated Fourier interpolation.

    Returns
    -------
    dict
        ``rms_error`` and ``max_error``: per-state absolute deviation arrays.
    """
    t_a, x_a = (np.asarray(v) for v in a)
    t_b, x_b = (np.asarray(v) for v in b)
    span_a = t_a[-1] - t_a[0] + (t_a[1] - t_a[0])
    span_b = t_b[-1] - t_b[0] + (t_b[1] - t_b[0])
    if abs(span_a - span_b) > 1e-9 * span_a:
        raise UsageError("waveforms cover different period lengths")
    if x_a.shape[1:] != x_b.shape[1:]:
        raise UsageError("waveforms have different state counts")
    x_b = _fourier_resample(x_b, x_a.shape[0])
    diff = np.abs(x_a - x_b)
    return {
        "rms_error": np.sqrt(np.mean(diff**2, axis=0)),
        "max_error": np.max(diff, axis=0),
    }


@dataclass
class GrowthFit:
    """Least-squares exponential growth/decay rate of a perturbation envelope."""

    rate: float
    floored: bool = False
    envelope: np.ndarray = field(default_factory=lambda: np.zeros(0))
    envelope_times: np.ndarray = field(default_factory=lambda: np.zeros(0))


def growth_rate_fit(traj: Trajectory, state_index: int, probe: dict) -> GrowthFit:
    """Fit Re[λ] from the post-perturbation envelope of one state.

    The period immediately preceding the perturbation onset serves as the
    steady-state reference; it is tiled over the post-onset window, and the
    per-period RMS of the residual gives the envelope whose log-slope is the
    growth rate.

    Parameters
    ----------
    traj : Trajectory
        Must carry ``period``; should include several settled periods before
        onset and at least three after.
    state_index : int
        State whose envelope is fitted.
    probe : dict
        ``onset``: perturbation time (s); ``magnitude`` (optional, for
        bookkeeping only).

    Returns
    -------
    GrowthFit
        ``rate`` in 1/s; ``floored=True`` when the whole envelope sits under
        the numeric floor (fast decay — rate pinned to a large negative value).
    """
    if traj.period is None:
        raise UsageError("trajectory carries no period metadata")
    period, h = traj.period, traj.step
    p = int(round(period / h))
    onset = float(probe["onset"])
    k_on = int(round((onset - traj.times[0]) / h))
    if k_on < p:
        raise UsageError("need at least one settled period before onset")
    if k_on >= traj.states.shape[0]:
        raise UsageError("onset beyond trajectory end")
    ref = traj.states[k_on - p:k_on, state_index]
    post = traj.states[k_on:, state_index]
    n_periods = post.shape[0] // p
    if n_periods < 3:
        raise UsageError("need at least three post-onset periods")
    resid = post[:n_periods * p].reshape(n_periods, p) - ref[None, :]
    env = np.sqrt(np.mean(np.abs(resid)**2, axis=1))
    t_env = traj.times[k_on] + (np.arange(n_periods) + 0.5) * period
    floor = max(1e-12, 1e-7 * float(np.max(np.abs(ref))))
    usable = env > floor
    if np.count_nonzero(usable) < 2:
        return GrowthFit(rate=FLOOR_RATE, floored=True, envelope=env,
                         envelope_times=t_env)
    slope = np.polyfit(t_env[usable], np.log(env[usable]), 1)[0]
    return GrowthFit(rate=float(slope), floored=False, envelope=env,
                     envelope_times=t_env)


def kicked_response(model: SystemModel, x0, probe: dict, t_end: float,
                    step: float, state_index: int = 0) -> Trajectory:
    """Integrate, apply an additive state kick at ``probe['onset']``, continue.

    The kick adds ``magnitude`` to ``state_index`` and the conjugate of the
    magnitude to its conjugate partner (when the model declares one), keeping
    the perturbed state physically real-valued in the phase domain.
    """
    onset = float(probe["onset"])
    magnitude = complex(probe.get("magnitude", 1e-3))
    if not 0.0 < onset < t_end:
        raise UsageError("onset must fall inside (0, t_end)")
    leg1 = integrate(model, x0, (0.0, onset), step)
    if leg1.diverged:
        return leg1
    x_kick = leg1.states[-1].copy()
    x_kick[state_index] += magnitude
    for a, b in model.conjugate_pairs:
        if a == state_index:
            x_kick[b] += np.conj(magnitude)
        elif b == state_index:
            x_kick[a] += np.conj(magnitude)
    leg2 = integrate(model, x_kick, (onset, t_end), step)
    return Trajectory(
        times=np.concatenate([leg1.times[:-1], leg2.times]),
        states=np.concatenate([leg1.states[:-1], leg2.states]),
        step=step, period=model.period, model_name=model.name,
        state_labels=model.state_labels, diverged=leg2.diverged)


def write_csv(traj: Trajectory, path: str):
    """Write a trajectory as CSV: ``t`` column then ``<state>_re, <state>_im``."""
    labels = traj.state_labels or tuple(
        f"x{i}" for i in range(traj.states.shape[1]))
    header = ["t"]
    for lab in labels:
        header += [f"{lab}_re", f"{lab}_im"]
    cols = [traj.times]
    for i in range(traj.states.shape[1]):
        cols += [traj.states[:, i].real, traj.states[:, i].imag]
    data = np.column_stack(cols)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
