"""Euclidean projection onto the intersection of complex l1 and l_inf balls."""

import numpy as np
import scipy.optimize
from numpy.typing import ArrayLike, NDArray


def _clamped(a: NDArray[np.float64], lam: float, rinf: float) -> NDArray[np.float64]:
    return np.clip(a - lam, 0.0, rinf)


def project_magnitudes(a: NDArray[np.float64], R1: float, Rinf: float) -> NDArray[np.float64]:
    """
    Project nonnegative magnitudes onto {u >= 0, u_i <= Rinf, sum u <= R1}.

    The solution is u_i = clamp(a_i - lam, 0, Rinf) with lam = 0 when the
    clamped vector already meets the sum constraint, and otherwise the root
    of sum u_i(lam) = R1, which is monotone in lam.
    """
    if R1 <= 0 or Rinf <= 0:
        return np.zeros_like(a)
    u = np.minimum(a, Rinf)
    if u.sum() <= R1:
        return u

    lam = scipy.optimize.brentq(
        lambda t: float(_clamped(a, t, Rinf).sum()) - R1,
        0.0,
        float(a.max()),
        xtol=1e-15 * max(float(a.max()), 1.0),
        rtol=4 * np.finfo(np.float64).eps,
    )

    # Solve the piecewise-linear equation exactly on the bracketed active set
    free = (a - lam > 0) & (a - lam < Rinf)
    capped = a - lam >= Rinf
    if free.any():
        exact = (a[free].sum() + capped.sum() * Rinf - R1) / free.sum()
        same_set = np.array_equal((a - exact > 0) & (a - exact < Rinf), free) and np.array_equal(
            a - exact >= Rinf, capped
        )
        if same_set and exact >= 0:
            lam = exact

    u = _clamped(a, lam, Rinf)
    total = u.sum()
    if total > R1:
        u *= R1 / total
    return u


def project_l1_linf(w: ArrayLike, R1: float, Rinf: float) -> NDArray[np.complex128]:
    """
    Euclidean projection of a complex vector onto {||w||_1 <= R1, ||w||_inf <= Rinf}.

    Phases are preserved; only magnitudes change.

    Args:
        w: Complex vector
        R1: l1 radius
        Rinf: l_inf radius

    Returns:
        The projected vector (zero when either radius is 0)
    """
    z = np.asarray(w, dtype=np.complex128)
    a = np.abs(z)
    u = project_magnitudes(a, R1, Rinf)
    phase = np.ones_like(z)
    nonzero = a > 0
    phase[nonzero] = z[nonzero] / a[nonzero]
    return u * phase
