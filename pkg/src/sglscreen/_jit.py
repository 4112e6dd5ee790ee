"""Compiled inner-loop kernels for the solvers.

Each kernel fuses work that the readable numpy versions in ``kernels`` and
``bounds`` spread over many small array operations. Tests check that both
routes agree.
"""

import numpy as np
from numba import njit

_EXACT_HIT_RTOL = 1e-12


@njit(cache=True)
def prox_sgl_penalty(v, tau1, tau2, assign, caps, out):
    """Blockwise SGL prox of ``v`` written into ``out``.

    Returns ``(sum_g caps[g] ||out_g||, ||out||_1)`` so the caller gets the
    penalty of the new point without another pass.
    """
    n_groups = tau1.shape[0]
    acc = np.zeros(n_groups)
    for i in range(v.shape[0]):
        a = abs(v[i]) - tau2
        if a > 0.0:
            acc[assign[i]] += a * a
    scale = np.zeros(n_groups)
    group_term = 0.0
    for g in range(n_groups):
        nrm = np.sqrt(acc[g])
        if nrm > tau1[g]:
            scale[g] = 1.0 - tau1[g] / nrm
            group_term += caps[g] * (nrm - tau1[g])
    l1 = 0.0
    for i in range(v.shape[0]):
        a = abs(v[i]) - tau2
        sc = scale[assign[i]]
        if a > 0.0 and sc > 0.0:
            m = a * sc
            out[i] = m if v[i] >= 0.0 else -m
            l1 += m
        else:
            out[i] = 0.0
    return group_term, l1


@njit(cache=True)
def _tau(z, n, k):
    # ||S_1(z / z_k)|| over the n leading (positive, descending) entries
    acc = 0.0
    zk = z[k]
    for i in range(n):
        d = z[i] / zk - 1.0
        if d > 0.0:
            acc += d * d
    return np.sqrt(acc)


@njit(cache=True)
def shrink_level(zabs, target):
    """Root ``rho`` of ``||S_1(zabs / rho)|| = target``; ``zabs`` >= 0, not all 0."""
    z = np.sort(zabs)[::-1]
    n = 0
    while n < z.shape[0] and z[n] > 0.0:
        n += 1
    # bisect for the number of breakpoints with tau_k < target
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if _tau(z, n, mid) < target:
            lo = mid + 1
        else:
            hi = mid
    k = lo
    if k < n and abs(_tau(z, n, k) - target) <= _EXACT_HIT_RTOL * target:
        return z[k]
    s1 = 0.0
    s2 = 0.0
    for i in range(k):
        s1 += z[i]
        s2 += z[i] * z[i]
    disc = s1 * s1 - s2 * (k - target * target)
    if disc < 0.0:
        disc = 0.0
    rho = s2 / (s1 + np.sqrt(disc))
    lower = z[k] if k < n else 0.0
    if rho < lower:
        rho = lower
    if rho > z[k - 1]:
        rho = z[k - 1]
    return rho


@njit(cache=True)
def sgl_dual_scale(z, order, starts, sizes, caps):
    """Largest s in (0, 1] with ``||S_1(s z_g)|| <= caps[g]`` for all g."""
    s = 1.0
    buf = np.empty(sizes.max())
    for g in range(starts.shape[0]):
        st = starts[g]
        acc = 0.0
        for j in range(sizes[g]):
            a = abs(z[order[st + j]]) - 1.0
            if a > 0.0:
                acc += a * a
        if np.sqrt(acc) > caps[g]:
            for j in range(sizes[g]):
                buf[j] = abs(z[order[st + j]])
            rho = shrink_level(buf[:sizes[g]], caps[g])
            if 1.0 / rho < s:
                s = 1.0 / rho
    return s
