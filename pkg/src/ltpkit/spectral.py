"""Fourier-coefficient machinery on the uniform one-period grid.

Signals live on a fixed sampling grid of M points covering one fundamental
period T.  A truncated spectrum keeps harmonics k = -N..N of each (complex)
state; time-periodic matrices are expanded to order 2N for the block-Toeplitz
operator so that products with the state band stay exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class HarmonicGrid:
    """Uniform sampling of one fundamental period.

    Parameters
    ----------
    period : fundamental period T in seconds.
    step : sample spacing h in seconds; T/h must be an integer.
    """

    period: float
    step: float
    n_samples: int = field(init=False)
    omega1: float = field(init=False)

    def __post_init__(self):
        if self.period <= 0 or self.step <= 0:
            raise UsageError("period and step must be positive")
        ratio = self.period / self.step
        m = round(ratio)
        if m < 2 or abs(ratio - m) > 1e-9 * ratio:
            raise UsageError(
                f"period/step = {ratio!r} is not an integer sample count"
            )
        object.__setattr__(self, "n_samples", m)
        object.__setattr__(self, "omega1", 2.0 * np.pi / self.period)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.step


@dataclass
class SpectralVector:
    """Stacked truncated spectrum of an n-state signal.

    ``coeffs[k + n_harmonics, i]`` is the Fourier coefficient of state i at
    harmonic k (k = -N..N).
    """

    coeffs: np.ndarray  # (2N+1, n) complex
    n_harmonics: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != 2 * self.n_harmonics + 1:
            raise UsageError(
                f"coefficient array shape {self.coeffs.shape} does not match "
                f"N={self.n_harmonics}"
            )

    @property
    def n_states(self) -> int:
        return self.coeffs.shape[1]

    def coeff(self, k: int) -> np.ndarray:
        """Coefficient vector at harmonic k."""
        if abs(k) > self.n_harmonics:
            raise UsageError(f"harmonic {k} outside truncation |k| <= {self.n_harmonics}")
        return self.coeffs[k + self.n_harmonics]

    def stacked(self) -> np.ndarray:
        """Flatten harmonic-major: entry (k+N)*n + i."""
        return self.coeffs.reshape(-1)

    @classmethod
    def from_stacked(cls, vec: np.ndarray, n_harmonics: int, n_states: int) -> "SpectralVector":
        vec = np.asarray(vec, dtype=complex)
        if vec.size != (2 * n_harmonics + 1) * n_states:
            raise UsageError("stacked vector length does not match (2N+1)*n")
        return cls(vec.reshape(2 * n_harmonics + 1, n_states), n_harmonics)

    @classmethod
    def zeros(cls, n_harmonics: int, n_states: int) -> "SpectralVector":
        return cls(np.zeros((2 * n_harmonics + 1, n_states), dtype=complex), n_harmonics)

    def copy(self) -> "SpectralVector":
        return SpectralVector(self.coeffs.copy(), self.n_harmonics)

    def conjugate_defect(self, pairs) -> float:
        """Max |X_k[j] - conj(X_{-k}[i])| over conjugate pairs (i, j)."""
        worst = 0.0
        flipped = np.conj(self.coeffs[::-1])
        for i, j in pairs:
            worst = max(worst, float(np.max(np.abs(self.coeffs[:, j] - flipped[:, i]))))
        return worst


def _phase_matrix(harmonics: np.ndarray, m_samples: int, sign: float) -> np.ndarray:
    # exp(sign * 2πi * k * m / M) laid out (len(harmonics), M)
    m = np.arange(m_samples)
    return np.exp(sign * 2j * np.pi * np.outer(harmonics, m) / m_samples)


def samples_to_spectrum(samples: np.ndarray, n_harmonics: int) -> np.ndarray:
    """Fourier coefficients k = -N..N of one-period samples.

    ``samples`` has the time axis first: (M,), (M, n) or (M, n, n).  Returns
    the matching array with the time axis replaced by 2N+1 harmonics, ordered
    -N..N.
    """
    samples = np.asarray(samples, dtype=complex)
    m = samples.shape[0]
    if m < 2 * (2 * n_harmonics + 1):
        raise UsageError(
            f"{m} samples cannot resolve harmonics to order {n_harmonics} cleanly"
        )
    ks = np.arange(-n_harmonics, n_harmonics + 1)
    ph = _phase_matrix(ks, m, -1.0)
    flat = samples.reshape(m, -1)
    coeffs = (ph @ flat) / m
    return coeffs.reshape((2 * n_harmonics + 1,) + samples.shape[1:])


def spectrum_to_samples(coeffs: np.ndarray, m_samples: int) -> np.ndarray:
    """Evaluate the truncated Fourier series on the uniform M-point grid."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n_harmonics = (coeffs.shape[0] - 1) // 2
    if coeffs.shape[0] != 2 * n_harmonics + 1:
        raise UsageError("first axis must have odd length 2N+1")
    ks = np.arange(-n_harmonics, n_harmonics + 1)
    ph = _phase_matrix(ks, m_samples, +1.0).T  # (M, 2N+1)
    flat = coeffs.reshape(coeffs.shape[0], -1)
    out = ph @ flat
    return out.reshape((m_samples,) + coeffs.shape[1:])


def spectrum_at_times(coeffs: np.ndarray, times: np.ndarray, period: float) -> np.ndarray:
    """Evaluate the truncated Fourier series at arbitrary times."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n_harmonics = (coeffs.shape[0] - 1) // 2
    ks = np.arange(-n_harmonics, n_harmonics + 1)
    ph = np.exp(2j * np.pi * np.outer(np.asarray(times) / period, ks))
    flat = coeffs.reshape(coeffs.shape[0], -1)
    return (ph @ flat).reshape((len(times),) + coeffs.shape[1:])


@dataclass
class BlockToeplitz:
    """Block-Toeplitz operator built from matrix harmonics.

    ``blocks[m + 2N]`` is the coefficient at harmonic m (m = -2N..2N) of a
    time-periodic matrix; block (row k, col l) of the assembled operator is
    the harmonic k - l.
    """

    blocks: np.ndarray  # (4N+1, r, c) complex
    n_harmonics: int

    @property
    def block_shape(self):
        return self.blocks.shape[1], self.blocks.shape[2]

    def block(self, k: int, l: int) -> np.ndarray:
        d = k - l
        if abs(d) > 2 * self.n_harmonics:
            raise UsageError("harmonic offset outside stored band")
        return self.blocks[d + 2 * self.n_harmonics]

    def full(self) -> np.ndarray:
        n = self.n_harmonics
        r, c = self.block_shape
        dim = 2 * n + 1
        out = np.empty((dim * r, dim * c), dtype=complex)
        for row in range(dim):
            for col in range(dim):
                out[row * r:(row + 1) * r, col * c:(col + 1) * c] = \
                    self.blocks[(row - col) + 2 * n]
        return out


def build_toeplitz(matrix_samples: np.ndarray, n_harmonics: int) -> BlockToeplitz:
    """Block-Toeplitz operator of a sampled time-periodic matrix.

    ``matrix_samples`` is (M, r, c); matrix harmonics are taken to order 2N.
    """
    matrix_samples = np.asarray(matrix_samples, dtype=complex)
    if matrix_samples.ndim != 3:
        raise UsageError("matrix samples must be (M, rows, cols)")
    blocks = samples_to_spectrum(matrix_samples, 2 * n_harmonics)
    return BlockToeplitz(blocks, n_harmonics)


def build_nblk(n_states: int, n_harmonics: int, omega1: float) -> np.ndarray:
    """Block-diagonal frequency-shift operator: k-th block jkω₁·I_n, k = -N..N."""
    ks = np.arange(-n_harmonics, n_harmonics + 1)
    diag = np.repeat(1j * ks * omega1, n_states)
    return np.diag(diag)
