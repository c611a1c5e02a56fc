"""Frequency-domain Newton solver for periodic steady states.

Each iteration reconstructs the trajectory from the current truncated
spectrum, evaluates dynamics and state Jacobian pointwise on the one-period
grid, converts both to Fourier coefficients, and solves the linear update

    (N_blk - A_toeplitz) dX = F - N_blk X

where N_blk is the harmonic frequency-shift operator and A_toeplitz the
block-Toeplitz expansion of the time-periodic Jacobian.  No time stepping is
involved; the input waveform is sampled once and held fixed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .analysis import HssMatrices
from .errors import (
    DivergedTrajectory,
    MaxIterationsExceeded,
    SingularIterationMatrix,
    UsageError,
)
from .model import SystemModel
from .spectral import (
    BlockToeplitz,
    HarmonicGrid,
    SpectralVector,
    build_nblk,
    build_toeplitz,
    samples_to_spectrum,
    spectrum_to_samples,
)


@dataclass(frozen=True)
class SolverConfig:
    """Newton/PSS solver settings (defaults are the benchmark values)."""

    n_harmonics: int = 4
    period: float = 0.02
    step: float = 50e-6
    tolerance: float = 1e-3
    max_iterations: int = 50
    damping: float = 1.0
    cond_limit: float = 1e12

    def __post_init__(self):
        if self.n_harmonics < 1:
            raise UsageError("n_harmonics must be >= 1")
        if not (0.0 < self.damping <= 1.0):
            raise UsageError("damping must lie in (0, 1]")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise UsageError("tolerance must be positive, max_iterations >= 1")

    def grid(self) -> HarmonicGrid:
        return HarmonicGrid(self.period, self.step)


@dataclass
class StepSnapshot:
    """Operators assembled for one Newton step (state part only)."""

    a_op: BlockToeplitz
    f_spectrum: np.ndarray  # (2N+1, n)
    nblk_diag: np.ndarray   # stacked diagonal of N_blk
    cond_estimate: float


@dataclass
class SolverResult:
    spectrum: SpectralVector
    waveforms: np.ndarray          # (M, n) reconstructed states over one period
    times: np.ndarray
    outputs: np.ndarray            # (M, p)
    iterations: int
    residual_history: list
    converged: bool
    hss: HssMatrices
    grid: HarmonicGrid
    elapsed_s: float = 0.0


def residual_norm(delta: SpectralVector | np.ndarray, scales: np.ndarray | None = None) -> float:
    """∞-norm of a spectral update, states divided by their per-unit scales."""
    if isinstance(delta, SpectralVector):
        coeffs = delta.coeffs
    else:
        coeffs = np.asarray(delta)
        if coeffs.ndim == 1:
            if scales is not None:
                coeffs = coeffs.reshape(-1, scales.size)
            else:
                return float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if scales is not None:
        coeffs = coeffs / scales
    return float(np.max(np.abs(coeffs)))


def initial_guess(model: SystemModel, config: SolverConfig) -> SpectralVector:
    """Materialize the model's reference seeds into a starting spectrum.

    Current-type rotating-frame states carry their setpoints at harmonic +1
    (conjugate partners at -1); controller and synchronization states start
    at zero.  The seed triples are attached by the case builders.
    """
    guess = SpectralVector.zeros(config.n_harmonics, model.n_states)
    for state, harmonic, value in model.spectral_seeds:
        if abs(harmonic) > config.n_harmonics:
            raise UsageError(
                f"seed harmonic {harmonic} outside truncation N={config.n_harmonics}"
            )
        guess.coeffs[harmonic + config.n_harmonics, state] = value
    return guess


def _nblk_diag(n_harmonics: int, n_states: int, omega1: float) -> np.ndarray:
    ks = np.arange(-n_harmonics, n_harmonics + 1)
    return np.repeat(1j * ks * omega1, n_states)


def _evaluate(model, grid, x_spec, u_samples):
    t = grid.times
    x_t = spectrum_to_samples(x_spec.coeffs, grid.n_samples)
    f_t = model.dynamics(t, x_t, u_samples)
    if not np.all(np.isfinite(f_t)):
        raise DivergedTrajectory("non-finite dynamics along reconstructed trajectory")
    a_t = model.jac_state(t, x_t, u_samples)
    return x_t, f_t, a_t


def newton_step(
    model: SystemModel,
    x_spec: SpectralVector,
    grid: HarmonicGrid,
    config: SolverConfig | None = None,
    u_samples: np.ndarray | None = None,
):
    """One Newton update.

    Returns ``(delta, step_norm, snapshot)`` where ``delta`` solves
    (N_blk - A) delta = F - N_blk X at the supplied iterate.
    """
    if config is None:
        config = SolverConfig(n_harmonics=x_spec.n_harmonics, period=grid.period,
                              step=grid.step)
    if u_samples is None:
        u_samples = np.asarray(model.input_fn(grid.times), dtype=complex)
    n = model.n_states
    big_n = x_spec.n_harmonics

    _, f_t, a_t = _evaluate(model, grid, x_spec, u_samples)
    f_spec = samples_to_spectrum(f_t, big_n)
    a_op = build_toeplitz(a_t, big_n)

    nvec = _nblk_diag(big_n, n, grid.omega1)
    lhs = -a_op.full()
    idx = np.arange(lhs.shape[0])
    lhs[idx, idx] += nvec
    rhs = f_spec.reshape(-1) - nvec * x_spec.stacked()

    lu, piv = lu_factor(lhs, check_finite=False)
    anorm = float(np.max(np.abs(lhs).sum(axis=0)))
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    cond_est = np.inf if rcond == 0.0 else 1.0 / float(rcond)
    if not np.isfinite(cond_est) or cond_est > config.cond_limit:
        raise SingularIterationMatrix(cond_est)

    delta_vec = lu_solve((lu, piv), rhs, check_finite=False)
    delta = SpectralVector.from_stacked(delta_vec, big_n, n)
    norm = residual_norm(delta, model.state_scales)
    return delta, norm, StepSnapshot(a_op, f_spec, nvec, cond_est)


def _assemble_hss(model, grid, x_spec, u_samples, n_harmonics) -> HssMatrices:
    t = grid.times
    x_t = spectrum_to_samples(x_spec.coeffs, grid.n_samples)
    a_t = model.jac_state(t, x_t, u_samples)
    b_t = model.jac_input(t, x_t, u_samples)
    c_t = model.out_jac_state(t, x_t, u_samples)
    d_t = model.out_jac_input(t, x_t, u_samples)
    return HssMatrices(
        a_op=build_toeplitz(a_t, n_harmonics),
        b_op=build_toeplitz(b_t, n_harmonics),
        c_op=build_toeplitz(c_t, n_harmonics),
        d_op=build_toeplitz(d_t, n_harmonics),
        nblk=build_nblk(model.n_states, n_harmonics, grid.omega1),
        n_harmonics=n_harmonics,
        omega1=grid.omega1,
        state_labels=tuple(model.state_labels),
    )


def solve_pss(
    model: SystemModel,
    config: SolverConfig | None = None,
    initial: SpectralVector | None = None,
    u_samples: np.ndarray | None = None,
) -> SolverResult:
    """Newton iteration to the periodic steady state.

    Parameters
    ----------
    model : system to solve, with input drive attached.
    config : solver settings; defaults to the benchmark configuration.
    initial : warm-start spectrum; defaults to the model's seeded guess.
    u_samples : pre-sampled input waveform (M, m); sampled from
        ``model.input_fn`` when omitted.

    Raises
    ------
    MaxIterationsExceeded
        carrying the recorded step norms, when tolerance is not met.
    SingularIterationMatrix, DivergedTrajectory
        on numerical breakdown.

    Notes
    -----
    Convergence is declared when the ∞-norm of the per-unit-scaled update
    drops to ``config.tolerance``; the final small update is applied.  When a
    step norm increases, the step is retried at half the damping (at most
    four halvings) and the best candidate is kept — with default damping 1.0
    and monotone convergence this is plain Newton.
    """
    t0 = time.perf_counter()
    if config is None:
        config = SolverConfig()
    grid = config.grid()
    if u_samples is None:
        u_samples = np.asarray(model.input_fn(grid.times), dtype=complex)
    if u_samples.shape != (grid.n_samples, model.n_inputs):
        raise UsageError(
            f"input samples shape {u_samples.shape} does not match "
            f"({grid.n_samples}, {model.n_inputs})"
        )
    x = initial.copy() if initial is not None else initial_guess(model, config)
    if x.n_harmonics != config.n_harmonics or x.n_states != model.n_states:
        raise UsageError("initial spectrum shape does not match model/config")

    delta, norm, _ = newton_step(model, x, grid, config, u_samples)
    history = [norm]
    converged = norm <= config.tolerance

    while not converged and len(history) < config.max_iterations:
        lam = config.damping
        halvings = 0
        while True:
            trial = SpectralVector(x.coeffs + lam * delta.coeffs, x.n_harmonics)
            delta_t, norm_t, _ = newton_step(model, trial, grid, config, u_samples)
            if norm_t <= history[-1] or halvings >= 4:
                break
            lam *= 0.5
            halvings += 1
        x, delta, norm = trial, delta_t, norm_t
        history.append(norm)
        converged = norm <= config.tolerance

    if not converged:
        raise MaxIterationsExceeded(history, config.tolerance, last_spectrum=x)

    # apply the final (sub-tolerance) correction and evaluate the HSS there
    x = SpectralVector(x.coeffs + delta.coeffs, x.n_harmonics)
    hss = _assemble_hss(model, grid, x, u_samples, config.n_harmonics)
    waveforms = spectrum_to_samples(x.coeffs, grid.n_samples)
    outputs = np.asarray(model.output(grid.times, waveforms, u_samples), dtype=complex)
    return SolverResult(
        spectrum=x,
        waveforms=waveforms,
        times=grid.times,
        outputs=outputs,
        iterations=len(history),
        residual_history=history,
        converged=True,
        hss=hss,
        grid=grid,
        elapsed_s=time.perf_counter() - t0,
    )


def pss_residual(
    model: SystemModel,
    x_spec: SpectralVector,
    grid: HarmonicGrid,
    u_samples: np.ndarray | None = None,
):
    """Frequency-domain fixed-point defect at a spectrum.

    Returns ``(defect_norm, nx_norm)`` with defect = ‖N_blk·X − F(X)‖∞ and
    nx_norm = ‖N_blk·X‖∞; the solver's fixed points satisfy
    defect ≤ tol·(1 + nx_norm).
    """
    if u_samples is None:
        u_samples = np.asarray(model.input_fn(grid.times), dtype=complex)
    _, f_t, _ = _evaluate(model, grid, x_spec, u_samples)
    f_spec = samples_to_spectrum(f_t, x_spec.n_harmonics)
    nvec = _nblk_diag(x_spec.n_harmonics, model.n_states, grid.omega1)
    nx = nvec * x_spec.stacked()
    defect = float(np.max(np.abs(nx - f_spec.reshape(-1))))
    return defect, float(np.max(np.abs(nx)))
