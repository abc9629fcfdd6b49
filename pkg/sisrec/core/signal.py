"""
Two-sided sequences and shift-invariant subspaces.

A shift-invariant subspace of order s is the solution set of a homogeneous
linear recurrence f(Delta) x = 0 with f(z) = prod_k (1 - w_k z)^{m_k}; its
elements are exponential polynomials x_t = sum_k q_k(t) w_k^t with
deg q_k < m_k.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from sisrec.exceptions import OverflowGuardError, ValidationError, WindowError

ComplexArray = NDArray[np.complex128]

# log of the largest magnitude a basis value may take
_LOG_MAX_MAGNITUDE = float(np.log(1e300))


@dataclass(frozen=True, eq=False)
class TwoSidedSequence:
    """Finitely supported complex sequence; values[j] is the value at index lo + j."""

    lo: int
    values: ComplexArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128).reshape(-1)
        if values.size == 0:
            values = np.zeros(1, dtype=np.complex128)
        values.flags.writeable = False
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, lo: int, hi: int) -> "TwoSidedSequence":
        """All-zero sequence on [lo, hi]."""
        return cls(lo, np.zeros(max(hi - lo + 1, 1), dtype=np.complex128))

    @classmethod
    def delta(cls, t: int = 0, scale: complex = 1.0) -> "TwoSidedSequence":
        """Unit pulse at index t, times scale."""
        return cls(t, np.array([scale], dtype=np.complex128))

    @classmethod
    def from_window(cls, values: ArrayLike, n: int) -> "TwoSidedSequence":
        """Sequence whose 2n+1 values are indexed t = -n..n."""
        arr = np.asarray(values, dtype=np.complex128)
        if arr.size != 2 * n + 1:
            raise ValidationError(
                f"Expected {2 * n + 1} values for window half-width {n}, got {arr.size}"
            )
        return cls(-n, arr)

    @property
    def hi(self) -> int:
        return self.lo + self.values.size - 1

    @property
    def support(self) -> tuple[int, int]:
        return self.lo, self.hi

    def __len__(self) -> int:
        return int(self.values.size)

    def within(self, n: int) -> bool:
        """True when the sequence lies in C_n: support inside [-n, n]."""
        return self.lo >= -n and self.hi <= n

    def within_causal(self, n: int) -> bool:
        """True when the sequence lies in C_n^+: support inside [0, n]."""
        return self.lo >= 0 and self.hi <= n

    def at(self, t: int) -> complex:
        """Value at index t (zero outside the stored support)."""
        if t < self.lo or t > self.hi:
            return 0j
        return complex(self.values[t - self.lo])

    def restrict(self, lo: int, hi: int) -> "TwoSidedSequence":
        """Values on exactly [lo, hi]: truncated, or zero-padded where unsupported."""
        out = np.zeros(max(hi - lo + 1, 1), dtype=np.complex128)
        a, b = max(lo, self.lo), min(hi, self.hi)
        if a <= b:
            out[a - lo : b - lo + 1] = self.values[a - self.lo : b - self.lo + 1]
        return TwoSidedSequence(lo, out)

    def window(self, n: int) -> ComplexArray:
        """Values on [-n, n] as a plain array of length 2n+1."""
        return self.restrict(-n, n).values

    def delay(self, h: int) -> "TwoSidedSequence":
        """Delta^h: (Delta^h x)_t = x_{t-h}."""
        return TwoSidedSequence(self.lo + h, self.values)

    def trim(self) -> "TwoSidedSequence":
        """Drop leading and trailing exact zeros (an all-zero sequence keeps one entry)."""
        nz = np.flatnonzero(self.values)
        if nz.size == 0:
            return TwoSidedSequence(self.lo, np.zeros(1, dtype=np.complex128))
        return TwoSidedSequence(self.lo + int(nz[0]), self.values[nz[0] : nz[-1] + 1])

    def scaled(self, alpha: complex) -> "TwoSidedSequence":
        return TwoSidedSequence(self.lo, alpha * self.values)

    def __add__(self, other: "TwoSidedSequence") -> "TwoSidedSequence":
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return TwoSidedSequence(lo, self.restrict(lo, hi).values + other.restrict(lo, hi).values)

    def __sub__(self, other: "TwoSidedSequence") -> "TwoSidedSequence":
        return self + other.scaled(-1.0)

    def allclose(self, other: "TwoSidedSequence", atol: float = 1e-12) -> bool:
        """Support-independent comparison of two sequences."""
        lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return bool(
            np.allclose(self.restrict(lo, hi).values, other.restrict(lo, hi).values, atol=atol)
        )


@dataclass(frozen=True)
class SisSpec:
    """Root multiset (w_k, m_k) of an s-dimensional shift-invariant subspace."""

    roots: tuple[tuple[complex, int], ...]

    def __post_init__(self) -> None:
        normalized = tuple((complex(w), int(m)) for w, m in self.roots)
        if not normalized:
            raise ValidationError("A subspace needs at least one root")
        for w, m in normalized:
            if m < 1:
                raise ValidationError(f"Multiplicity must be positive, got {m} for root {w}")
            if w == 0:
                raise ValidationError("Root 0 does not define a degree-s characteristic polynomial")
        distinct = {w for w, _ in normalized}
        if len(distinct) != len(normalized):
            raise ValidationError("Roots must be pairwise distinct; merge them via multiplicity")
        object.__setattr__(self, "roots", normalized)

    @classmethod
    def from_roots(cls, roots: Iterable[complex | tuple[complex, int]]) -> "SisSpec":
        """Build from bare roots (multiplicity 1) or (root, multiplicity) pairs."""
        pairs: list[tuple[complex, int]] = []
        for item in roots:
            if isinstance(item, tuple):
                pairs.append((complex(item[0]), int(item[1])))
            else:
                pairs.append((complex(item), 1))
        return cls(tuple(pairs))

    @property
    def s(self) -> int:
        return sum(m for _, m in self.roots)

    @property
    def root_values(self) -> list[complex]:
        return [w for w, _ in self.roots]

    def basis_labels(self) -> list[tuple[complex, int]]:
        """Basis order (w_1, 0), (w_1, 1), ..., (w_2, 0), ... for t^j w^t."""
        return [(w, j) for w, m in self.roots for j in range(m)]

    def is_quasi_stable(self, tol: float = 1e-12) -> bool:
        """All roots in the closed unit disk."""
        return all(abs(w) <= 1.0 + tol for w, _ in self.roots)

    def to_dict(self) -> dict[str, Any]:
        return {"roots": [{"re": w.real, "im": w.imag, "mult": m} for w, m in self.roots]}


@dataclass(frozen=True)
class ObservationWindow:
    """Observations y_t = x_t + sigma xi_t on [-N, N]."""

    y: TwoSidedSequence
    N: int
    sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValidationError(f"Window half-width must be >= 1, got {self.N}")
        if self.sigma < 0:
            raise ValidationError(f"Noise level must be nonnegative, got {self.sigma}")
        if not self.y.within(self.N):
            raise WindowError(
                "Observation support exceeds its window", (-self.N, self.N), self.y.support
            )
        object.__setattr__(self, "y", self.y.restrict(-self.N, self.N))

    def recentered(self, center: int, half_width: int) -> "ObservationWindow":
        """Sub-window [center - half_width, center + half_width] re-indexed around 0."""
        sub = self.y.restrict(center - half_width, center + half_width).delay(-center)
        return ObservationWindow(sub, half_width, self.sigma)


def _check_overflow(w: complex, exponents: NDArray[np.float64]) -> None:
    if exponents.size == 0 or abs(w) == 1.0:
        return
    logs = exponents * np.log(abs(w))
    worst = int(np.argmax(logs))
    if logs[worst] > _LOG_MAX_MAGNITUDE:
        raise OverflowGuardError(w, int(exponents[worst]))


def basis_matrix(
    spec: SisSpec,
    times: ArrayLike,
    origins: int | Sequence[int] = 0,
    scale: float = 1.0,
) -> ComplexArray:
    """
    Evaluate the subspace basis at the given times.

    Column order follows ``spec.basis_labels()``; the column for (w, j) is
    ((t - o)/scale)^j w^(t - o) where o is the origin of root w.

    Args:
        spec: Subspace description
        times: Integer time indices
        origins: One origin for all roots, or one per distinct root
        scale: Divisor applied to the polynomial factor

    Returns:
        Matrix of shape (len(times), s)

    Raises:
        OverflowGuardError: If a root power exceeds the floating point range
    """
    t = np.asarray(times, dtype=np.float64).reshape(-1)
    if isinstance(origins, int):
        origin_list = [origins] * len(spec.roots)
    else:
        origin_list = [int(o) for o in origins]
        if len(origin_list) != len(spec.roots):
            raise ValidationError("Need one origin per distinct root")

    columns: list[NDArray[np.complex128]] = []
    for (w, m), origin in zip(spec.roots, origin_list):
        k = t - origin
        _check_overflow(w, k)
        power = np.exp(k * np.log(w + 0j))
        poly = k / scale
        for j in range(m):
            columns.append(poly**j * power)
    return np.column_stack(columns).astype(np.complex128)


def synthesize(
    spec: SisSpec, coeffs: Sequence[complex] | ArrayLike, t_lo: int, t_hi: int
) -> TwoSidedSequence:
    """
    Synthesize x_t = sum_k q_k(t) w_k^t on [t_lo, t_hi].

    Args:
        spec: Subspace description
        coeffs: s coefficients in basis order (w_1^t, t w_1^t, ..., w_2^t, ...)
        t_lo: First index
        t_hi: Last index

    Returns:
        The synthesized sequence

    Raises:
        ValidationError: If the coefficient count differs from s or t_lo > t_hi
        OverflowGuardError: If |w|^|t| is not representable
    """
    c = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
    if c.size != spec.s:
        raise ValidationError(f"Expected {spec.s} coefficients, got {c.size}")
    if t_lo > t_hi:
        raise ValidationError(f"Empty window [{t_lo}, {t_hi}]")
    basis = basis_matrix(spec, np.arange(t_lo, t_hi + 1))
    return TwoSidedSequence(t_lo, basis @ c)


def random_member(
    spec: SisSpec, t_lo: int, t_hi: int, rng: np.random.Generator, scale: float = 1.0
) -> TwoSidedSequence:
    """
    Draw a random element of the subspace on [t_lo, t_hi].

    Each root is anchored at the end of the window where its powers stay
    bounded (left for |w| <= 1, right otherwise) and polynomial factors are
    measured in window lengths, so long windows never overflow.
    """
    length = max(t_hi - t_lo, 1)
    origins = [t_lo if abs(w) <= 1.0 else t_hi for w, _ in spec.roots]
    basis = basis_matrix(spec, np.arange(t_lo, t_hi + 1), origins, scale=float(length))
    coeffs = complex_normal(rng, spec.s)
    return TwoSidedSequence(t_lo, scale * (basis @ coeffs))


def characteristic_polynomial(spec: SisSpec) -> ComplexArray:
    """Coefficients f_0..f_s (increasing powers) of f(z) = prod_k (1 - w_k z)^{m_k}."""
    f = np.ones(1, dtype=np.complex128)
    for w, m in spec.roots:
        for _ in range(m):
            f = np.convolve(f, np.array([1.0, -w], dtype=np.complex128))
    return f


def apply_recurrence(spec: SisSpec, x: TwoSidedSequence) -> TwoSidedSequence:
    """
    Apply f(Delta) to x on the indices where all s+1 taps lie in x's support.

    Raises:
        WindowError: If the support of x has at most s entries
    """
    if len(x) <= spec.s:
        raise WindowError(
            f"Window of length {len(x)} is too short for an order-{spec.s} recurrence",
            (0, spec.s),
            x.support,
        )
    f = characteristic_polynomial(spec)
    out = np.convolve(x.values, f, mode="valid")
    return TwoSidedSequence(x.lo + spec.s, out)


def seminorm(x: TwoSidedSequence, n: int, p: float = 2.0) -> float:
    """Windowed p-(semi)norm over [-n, n]; p = inf gives the maximum modulus."""
    if n < 0:
        raise ValidationError(f"Window half-width must be nonnegative, got {n}")
    if p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    return float(np.linalg.norm(x.window(n), ord=p))


def complex_normal(rng: np.random.Generator, size: int) -> ComplexArray:
    """i.i.d. CN(0, 1) draws: real and imaginary parts independent with variance 1/2."""
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return ((re + 1j * im) / np.sqrt(2.0)).astype(np.complex128)


def add_noise(x: TwoSidedSequence, N: int, sigma: float, seed: int) -> ObservationWindow:
    """
    Observe x on [-N, N] in complex Gaussian noise of level sigma.

    The noise draws depend only on (N, seed), so scaling sigma scales the
    noise exactly.
    """
    if sigma < 0:
        raise ValidationError(f"Noise level must be nonnegative, got {sigma}")
    rng = np.random.default_rng(seed)
    xi = complex_normal(rng, 2 * N + 1)
    y = x.window(N) + sigma * xi
    return ObservationWindow(TwoSidedSequence(-N, y), N, sigma)
