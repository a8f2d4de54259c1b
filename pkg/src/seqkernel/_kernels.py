"""Compiled inner loops.

Every sum in here is a Neumaier-compensated running sum taken in index
order, so the public operations and the Monte Carlo harness produce the
same bits for the same path.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def recursion(coef, noise, y0):
    """y[0] = y0, y[k] = coef[k-1] * y[k-1] + noise[k-1]."""
    n = noise.shape[0]
    y = np.empty(n + 1)
    y[0] = y0
    for k in range(1, n + 1):
        y[k] = coef[k - 1] * y[k - 1] + noise[k - 1]
    return y


@numba.njit(cache=True)
def _add(s, c, x):
    # Neumaier step; returns the new (sum, compensation) pair
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@numba.njit(cache=True)
def window_sums(y, lo, hi):
    """Compensated sums over j in [lo, hi] of y[j-1]**2 and y[j-1]*y[j].

    An empty range (hi < lo) returns zeros.
    """
    sa = 0.0
    ca = 0.0
    sb = 0.0
    cb = 0.0
    for j in range(lo, hi + 1):
        sa, ca = _add(sa, ca, y[j - 1] * y[j - 1])
        sb, cb = _add(sb, cb, y[j - 1] * y[j])
    return sa + ca, sb + cb


@numba.njit(cache=True)
def stopping_scan(y, noise, has_noise, nu, k_upper, n, threshold):
    """Single sweep producing the stopping time and the estimator numerator.

    Scans j = nu+1, ..., k_upper (the indicator kernel is zero past
    k_upper, so the running mass cannot grow there).  Returns
    ``(tau, hit, kappa, mass_before_tau, numerator, noise_sum)`` where
    ``mass_before_tau`` is A_{nu, tau-1} on a hit and A_{nu, n} on a miss.
    """
    sa = 0.0
    ca = 0.0
    sn = 0.0
    cn = 0.0
    sx = 0.0
    cx = 0.0
    for j in range(nu + 1, k_upper + 1):
        inc = y[j - 1] * y[j - 1]
        sa2, ca2 = _add(sa, ca, inc)
        if sa2 + ca2 >= threshold:
            # sa + ca < threshold from the previous step, so kappa > 0; rounding
            # can push the quotient a few ulps past 1
            mass = sa + ca
            kappa = min((threshold - mass) / inc, 1.0)
            sn, cn = _add(sn, cn, kappa * y[j - 1] * y[j])
            if has_noise:
                sx, cx = _add(sx, cx, kappa * y[j - 1] * noise[j - 1])
            return j, True, kappa, mass, sn + cn, sx + cx
        sa, ca = sa2, ca2
        sn, cn = _add(sn, cn, y[j - 1] * y[j])
        if has_noise:
            sx, cx = _add(sx, cx, y[j - 1] * noise[j - 1])
    return n, False, 1.0, sa + ca, sn + cn, sx + cx
