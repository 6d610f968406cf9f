"""Fast exact spectra of symmetric rank-one downdates B + rho z z^T, rho < 0.

Greedy query scoring needs, for every candidate, the spectral and nuclear
norms of a matrix that differs from a shared base matrix by a rank-one
downdate. Given the base eigenvalues d (ascending) the updated eigenvalues
are the roots of the secular function

    f(mu) = 1 + rho * sum_i z_i^2 / (d_i - mu),

one in each gap (d_{j-1}, d_j) plus one below d_0, all found by a
safeguarded Newton/bisection iteration. Only the roots a score can see are
solved: the two extremal ones (for max |mu|) and the negative ones (for
sum |mu| = trace - 2 sum_{mu<0} mu). The base matrix in our use is PSD
minus a low-rank PSD term, so negative roots are few.

Poles with negligible weight and clustered poles are deflated: their
eigenvalues pass through unchanged, which keeps the iteration away from
ill-conditioned gaps.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, error_model="numpy")
def _eval_secular(dd, ww, rho, sh, t):
    f = 1.0
    fp = 0.0
    for i in range(dd.shape[0]):
        r = (dd[i] - sh) - t
        q = ww[i] / r
        f += rho * q
        fp += rho * q / r
    return f, fp


@njit(cache=True, error_model="numpy")
def _root_in_gap(dd, ww, rho, sh, t_lo, t_hi, tol, lower_is_pole):
    """Root of f(sh + t) for t in (t_lo, t_hi), where f is strictly
    decreasing from +inf to -inf across the bracket.

    Coordinates are shifted by the nearer pole so the root is resolved to
    absolute accuracy ``tol`` even when it hugs that pole: a midpoint probe
    decides the side, then a rational step (fit A + D/t through f and f'
    and take its root) converges superlinearly where plain Newton badly
    overshoots. Division by zero at a pole yields inf, which the bracket
    update absorbs.
    """
    lo, hi = t_lo, t_hi
    t = 0.5 * (lo + hi)
    f, fp = _eval_secular(dd, ww, rho, sh, t)
    if f > 0.0:
        lo = t
    else:
        hi = t
        if lower_is_pole:
            # root sits in the lower half: rebase the shift onto the lower
            # pole (exact: (d - (sh+c)) - (t-c) == (d - sh) - t)
            sh += t_lo
            t -= t_lo
            lo -= t_lo
            hi -= t_lo
    for _ in range(159):
        denom = f + fp * t
        t_new = fp * t * t / denom if denom != 0.0 else 0.5 * (lo + hi)
        if not (lo < t_new < hi) or t_new != t_new:
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= tol or (hi - lo) <= tol:
            return sh + t_new
        t = t_new
        f, fp = _eval_secular(dd, ww, rho, sh, t)
        if f > 0.0:
            lo = t
        else:
            hi = t
    return sh + t


@njit(cache=True, error_model="numpy")
def _downdate_scores_one(d, z, rho, scale):
    """(max |mu|, sum |mu|) for diag(d) + rho z z^T, d ascending, rho < 0."""
    n = d.shape[0]
    w = z * z
    trace = d.sum() + rho * w.sum()
    tiny_w = (1e-16 * scale) ** 2
    gap_tol = 1e-15 * scale
    tol = 1e-15 * scale

    # deflation pass: drop negligible weights, merge clustered poles
    dd = np.empty(n)
    ww = np.empty(n)
    m = 0
    neg_defl_sum = 0.0
    defl_min = np.inf
    defl_max = -np.inf
    i = 0
    while i < n:
        if w[i] <= tiny_w:
            if d[i] < 0.0:
                neg_defl_sum += d[i]
            if d[i] < defl_min:
                defl_min = d[i]
            if d[i] > defl_max:
                defl_max = d[i]
            i += 1
            continue
        j = i
        wsum = w[i]
        while j + 1 < n and w[j + 1] > tiny_w and d[j + 1] - d[i] <= gap_tol:
            j += 1
            wsum += w[j]
            if d[j] < 0.0:
                neg_defl_sum += d[j]
            if d[j] < defl_min:
                defl_min = d[j]
            if d[j] > defl_max:
                defl_max = d[j]
        dd[m] = d[i]
        ww[m] = wsum
        m += 1
        i = j + 1

    if m == 0:
        mx = 0.0
        if np.isfinite(defl_min):
            mx = max(abs(defl_min), abs(defl_max))
        return mx, trace - 2.0 * neg_defl_sum

    wtot = ww[:m].sum()
    neg_root_sum = 0.0

    # leftmost root lies in [dd[0] + rho * wtot, dd[0])
    mu_lo = _root_in_gap(dd[:m], ww[:m], rho, dd[0], rho * wtot - tol, 0.0, tol, False)
    if mu_lo < 0.0:
        neg_root_sum += mu_lo
    mu_hi = mu_lo
    if m >= 2:
        mu_hi = _root_in_gap(dd[:m], ww[:m], rho, dd[m - 1], -(dd[m - 1] - dd[m - 2]), 0.0, tol, True)
        if mu_hi < 0.0:
            neg_root_sum += mu_hi
    # interior roots live in (dd[j-1], dd[j]); once the lower pole is >= 0
    # every remaining root is nonnegative and cannot move the scores
    for j in range(1, m - 1):
        if dd[j - 1] >= 0.0:
            break
        mu = _root_in_gap(dd[:m], ww[:m], rho, dd[j], -(dd[j] - dd[j - 1]), 0.0, tol, True)
        if mu < 0.0:
            neg_root_sum += mu

    sum_abs = trace - 2.0 * (neg_root_sum + neg_defl_sum)
    mx = max(abs(mu_lo), abs(mu_hi))
    if np.isfinite(defl_min):
        mx = max(mx, abs(defl_min), abs(defl_max))
    return mx, sum_abs


@njit(cache=True, parallel=True, error_model="numpy")
def batch_downdate_scores(d, z_cols, rho):
    """Per column z of ``z_cols``: row 0 holds max |mu|, row 1 holds
    sum |mu| of diag(d) + rho z z^T."""
    n, c = z_cols.shape
    out = np.empty((2, c))
    scale = max(abs(d[0]), abs(d[n - 1]), 1e-300)
    zmax = 0.0
    for j in range(c):
        s = 0.0
        for i in range(n):
            s += z_cols[i, j] * z_cols[i, j]
        if s > zmax:
            zmax = s
    scale = max(scale, abs(rho) * zmax)
    for j in prange(c):
        mx, sa = _downdate_scores_one(d, z_cols[:, j].copy(), rho, scale)
        out[0, j] = mx
        out[1, j] = sa
    return out
