"""
Unitary DFT on C_n, grid evaluation, convolution and trigonometric kernels.

Conventions: the z-transform is u(z) = sum_t u_t z^{-t}; the grid T_n holds
the nodes chi_{k,n} = exp(i 2 pi k / (2n+1)), k = 0..2n, and the unitary DFT
is (F_n u)_k = (2n+1)^{-1/2} sum_{|t|<=n} chi_{k,n}^{-t} u_t = u(chi_{k,n}) / sqrt(2n+1).
"""

import math
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.fft
import scipy.signal
from numpy.typing import ArrayLike, NDArray

from sisrec.config.settings import get_settings
from sisrec.core.signal import ComplexArray, TwoSidedSequence
from sisrec.exceptions import ValidationError, WindowError

KernelSeq = TwoSidedSequence


@dataclass(frozen=True, eq=False)
class SpectrumVec:
    """Unitary DFT of a sequence in C_n; entry k belongs to grid node chi_{k,n}."""

    n: int
    values: ComplexArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128).reshape(-1)
        if values.size != 2 * self.n + 1:
            raise ValidationError(
                f"Spectrum of half-width {self.n} needs {2 * self.n + 1} entries, got {values.size}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def norm(self, p: float = 2.0) -> float:
        return float(np.linalg.norm(self.values, ord=p))


def grid_nodes(n: int) -> ComplexArray:
    """The 2n+1 nodes of T_n in index order k = 0..2n."""
    k = np.arange(2 * n + 1)
    return np.exp(2j * np.pi * k / (2 * n + 1)).astype(np.complex128)


def dft(u: TwoSidedSequence, n: int) -> SpectrumVec:
    """Unitary DFT F_n of u truncated to [-n, n]."""
    a = u.window(n)
    # rotate so that t = 0 sits at position 0 of the transform input
    return SpectrumVec(n, scipy.fft.fft(scipy.fft.ifftshift(a), norm="ortho"))


def idft(a: SpectrumVec) -> TwoSidedSequence:
    """Inverse of F_n; the result lies in C_n."""
    values = scipy.fft.fftshift(scipy.fft.ifft(a.values, norm="ortho"))
    return TwoSidedSequence(-a.n, values)


def dft_onesided(u: TwoSidedSequence, n: int) -> SpectrumVec:
    """One-sided transform F+_{2n}[u] = F_n[Delta^{-n} u] for u in C+_{2n}."""
    return dft(u.delay(-n), n)


def evaluate(u: TwoSidedSequence, z: ArrayLike) -> ComplexArray:
    """Horner evaluation of u(z) = sum_t u_t z^{-t} at nonzero points z."""
    z_arr = np.asarray(z, dtype=np.complex128)
    inv = 1.0 / z_arr
    return (z_arr ** (-u.lo) * np.polyval(u.values[::-1], inv)).astype(np.complex128)


def eval_grid(u: TwoSidedSequence, N: int) -> ComplexArray:
    """
    Values of u on the grid T_N, equal to sqrt(2N+1) * dft(u, N).

    Raises:
        WindowError: If u is not supported in [-N, N]
    """
    if not u.within(N):
        raise WindowError(f"Support exceeds the grid half-width {N}", (-N, N), u.support)
    return np.sqrt(2 * N + 1) * dft(u, N).values


def convolve(
    u: TwoSidedSequence,
    v: TwoSidedSequence,
    method: Literal["auto", "direct", "fft"] = "auto",
    crossover: int | None = None,
) -> TwoSidedSequence:
    """
    Full linear convolution (u * v)_t = sum_tau u_tau v_{t - tau}.

    The FFT path is taken when both operands are longer than ``crossover``
    (``Settings.fft_crossover`` by default).
    """
    if method == "auto":
        limit = crossover if crossover is not None else get_settings().fft_crossover
        method = "fft" if min(len(u), len(v)) > limit else "direct"
    if method == "fft":
        values = scipy.signal.fftconvolve(u.values, v.values, mode="full")
    else:
        values = np.convolve(u.values, v.values)
    return TwoSidedSequence(u.lo + v.lo, values)


def fine_grid_sup(u: TwoSidedSequence, factor: int = 16, n: int | None = None) -> float:
    """
    Maximum of |u| over factor*(2n+1) equispaced points of the unit circle.

    n is raised to max(|lo|, |hi|) so the support always fits the grid.
    """
    n = max(abs(u.lo), abs(u.hi), n or 0)
    size = factor * (2 * n + 1)
    buf = np.zeros(size, dtype=np.complex128)
    idx = np.arange(u.lo, u.hi + 1) % size
    np.add.at(buf, idx, u.values)
    return float(np.max(np.abs(scipy.fft.fft(buf))))


# Trigonometric kernels


def dirichlet(m: int) -> KernelSeq:
    """Dir_m: all-ones coefficients on [-m, m]."""
    return TwoSidedSequence(-m, np.ones(2 * m + 1))


def fejer(m: int) -> KernelSeq:
    """Fej_m: coefficients 1 - |k|/(m+1) on [-m, m]."""
    k = np.arange(-m, m + 1)
    return TwoSidedSequence(-m, 1.0 - np.abs(k) / (m + 1))


def fejer_causal(m: int) -> KernelSeq:
    """Fej+_{2m}: the Fejer kernel shifted onto [0, 2m]."""
    return fejer(m).delay(m)


def _wrap(omega: NDArray[np.float64]) -> NDArray[np.float64]:
    return (omega + np.pi) % (2 * np.pi) - np.pi


def dirichlet_closed_form(m: int, omega: ArrayLike) -> NDArray[np.float64]:
    """dir_m(omega) = sin((2m+1) omega / 2) / sin(omega / 2), with value 2m+1 at omega = 0."""
    w = _wrap(np.asarray(omega, dtype=np.float64))
    den = np.sin(w / 2)
    small = np.abs(den) < 1e-12
    safe = np.where(small, 1.0, den)
    return np.where(small, 2.0 * m + 1.0, np.sin((2 * m + 1) * w / 2) / safe)


def fejer_closed_form(m: int, omega: ArrayLike) -> NDArray[np.float64]:
    """fej_m(omega) = (sin((m+1) omega / 2) / sin(omega / 2))^2 / (m+1)."""
    w = _wrap(np.asarray(omega, dtype=np.float64))
    den = np.sin(w / 2)
    small = np.abs(den) < 1e-12
    safe = np.where(small, 1.0, den)
    ratio = np.where(small, m + 1.0, np.sin((m + 1) * w / 2) / safe)
    return ratio**2 / (m + 1)


def harmonic_number(N: int) -> float:
    """H_N = sum_{k=1}^N 1/k (H_0 = 0)."""
    return float(np.sum(1.0 / np.arange(1, N + 1))) if N > 0 else 0.0


def kernel_grid_sum(kernel: KernelSeq, N: int, a: complex) -> float:
    """
    Average of |kernel(w / a)| over the grid T_N.

    Raises:
        ValidationError: If a is not on the unit circle
    """
    if abs(abs(a) - 1.0) > 1e-9:
        raise ValidationError(f"Shift point must lie on the unit circle, |a| = {abs(a)}")
    values = evaluate(kernel, grid_nodes(N) / a)
    return float(np.sum(np.abs(values)) / (2 * N + 1))


def dirichlet_grid_bound(n: int, N: int) -> float:
    """Upper bound (4n+2)/(2N+1) + H_N on the Dirichlet grid sum."""
    return (4 * n + 2) / (2 * N + 1) + harmonic_number(N)


def fejer_grid_bound(n: int, N: int) -> float:
    """Upper bound (2n+2)/(2N+1) + ((2N+1)/(2n+2)) pi^2/6 on the Fejer grid sum."""
    return (2 * n + 2) / (2 * N + 1) + ((2 * N + 1) / (2 * n + 2)) * math.pi**2 / 6


def sparse_oversampling_ratio(n: int, N: int, J: Iterable[int], k: int) -> float:
    """(1/sqrt((2N+1)(2n+1))) * sum_{j in J} |Dir_n(chi_{j,n} / chi_{k,N})|."""
    if N < n:
        raise ValidationError(f"Fine grid half-width {N} must be >= {n}")
    j = np.fromiter(J, dtype=np.int64)
    if j.size and (j.min() < 0 or j.max() > 2 * n):
        raise ValidationError(f"Indices must lie in 0..{2 * n}")
    omega = 2 * np.pi * j / (2 * n + 1) - 2 * np.pi * k / (2 * N + 1)
    total = float(np.sum(np.abs(dirichlet_closed_form(n, omega))))
    return total / math.sqrt((2 * N + 1) * (2 * n + 1))


def sparse_oversampling_bound(n: int, N: int, size: int) -> float:
    """sqrt((2n+1)/(2N+1)) * (log ceil(size/2) + 3)."""
    return math.sqrt((2 * n + 1) / (2 * N + 1)) * (math.log(max(math.ceil(size / 2), 1)) + 3)


def oversampling_linf_ratio(n: int, N: int, k: int) -> float:
    """Sparse ratio taken over the whole coarse grid."""
    return sparse_oversampling_ratio(n, N, range(2 * n + 1), k)


def oversampling_linf_bound(n: int, N: int) -> float:
    """sqrt((2n+1)/(2N+1)) * (H_n + 2)."""
    return math.sqrt((2 * n + 1) / (2 * N + 1)) * (harmonic_number(n) + 2)


def oversampling_l1_bound(n: int, N: int) -> float:
    """sqrt((2N+1)/(2n+1)) log(eN) + 2 sqrt((2n+1)/(2N+1)): bound on ||F_N u||_1 / ||F_n u||_1."""
    return math.sqrt((2 * N + 1) / (2 * n + 1)) * math.log(math.e * N) + 2 * math.sqrt(
        (2 * n + 1) / (2 * N + 1)
    )
