"""Compiled plan-cost evaluation and simplex search.

The pure-Python plan evaluator in :mod:`ghzprimate.optimizer` is the
reference; these kernels mirror it on flat arrays so that tens of thousands of
candidate plans can each get dozens of local searches on one core.

Plan tuple layout (see ``optimizer._encode``)::

    (method, operand, multiplicative, left_a, left_b, leaf_of_step,
     step_param, step_fixed, final_param, final_fixed,
     leaf_param, coef, elim, target_logit, fixed_leaves)
"""

from __future__ import annotations

import math
import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip probing for TBB, which is often present but too old
    numba.config.THREADING_LAYER = "omp"

FUSION = 0
BLEEDING = 1

T_MIN = 1e-6
C_MAX = 1.0 - 1e-6
LOGIT_LIMIT = 25.0
BAD = 1e300


@njit(cache=True)
def expit(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@njit(cache=True)
def elementary_cost(s):
    if s < 0.5:
        s = 1.0 - s
    if s > 1.0 - 1e-9:
        return 4.0
    r = math.sqrt(1.0 - s)
    return 4.0 * s - 2.0 * r * (math.sqrt(s) - r)


@njit(cache=True)
def leaf_logits(x, plan):
    out = np.zeros(plan[11].shape[0])
    _fill_leaf_logits(x, plan, out)
    return out


@njit(cache=True)
def _fill_leaf_logits(x, plan, out):
    leaf_param = plan[10]
    coef = plan[11]
    elim = plan[12]
    target_logit = plan[13]
    fixed_leaves = plan[14]
    nleaf = coef.shape[0]
    out[:nleaf] = 0.0
    if fixed_leaves:
        return
    acc = target_logit
    for i in range(nleaf):
        if leaf_param[i] >= 0:
            out[i] = x[leaf_param[i]]
            acc -= coef[i] * out[i]
    if elim >= 0:
        out[elim] = acc / coef[elim]


@njit(cache=True)
def new_work(plan):
    return np.empty((5, max(plan[11].shape[0], plan[1].shape[0] + 1)))


@njit(cache=True)
def evaluate(x, plan):
    """Return ``(nu, single_pass_prob, final_lam, final_s)``; ``nu = BAD`` if the plan is invalid."""
    return _evaluate(x, plan, new_work(plan))


@njit(cache=True)
def _evaluate(x, plan, work):
    method = plan[0]
    operand = plan[1]
    mult = plan[2]
    left_a = plan[3]
    left_b = plan[4]
    leaf_of_step = plan[5]
    step_param = plan[6]
    step_fixed = plan[7]
    final_param = plan[8]
    final_fixed = plan[9]
    m = operand.shape[0]

    logits = work[0]
    lam = work[1]
    s = work[2]
    nu = work[3]
    # single-pass probability of each term, reused copies included
    sp = work[4]
    _fill_leaf_logits(x, plan, logits)
    for i in range(plan[11].shape[0]):
        if abs(logits[i]) > LOGIT_LIMIT:
            return BAD, 0.0, 0.0, 0.0

    lam[0] = 1.0
    s[0] = expit(logits[0])
    nu[0] = elementary_cost(s[0])
    sp[0] = 0.5 / max(s[0], 1.0 - s[0])
    for k in range(m):
        j = operand[k]
        if j == 0:
            sb = expit(logits[leaf_of_step[k]])
            lb = 1.0
            nb = elementary_cost(sb)
            pb = 0.5 / max(sb, 1.0 - sb)
        else:
            sb = s[j]
            lb = lam[j]
            nb = nu[j]
            pb = sp[j]
        sa = s[k]
        la = lam[k]
        na = nu[k]
        if mult[k]:
            num = sa * sb
            kk = num + (1.0 - sa) * (1.0 - sb)
        else:
            num = sa * (1.0 - sb)
            kk = num + (1.0 - sa) * sb
        if kk <= 0.0:
            return BAD, 0.0, 0.0, 0.0
        if step_param[k] >= 0:
            v = expit(x[step_param[k]])
        else:
            v = step_fixed[k]
        if method == FUSION:
            t = min(max(v, T_MIN), 1.0 - T_MIN)
            u1 = sa if left_a[k] else 1.0 - sa
            u2 = sb if left_b[k] else 1.0 - sb
            g = 2.0 * t * (1.0 - t)
            p = g * (u1 * la + u2 * lb - 2.0 * u1 * u2 * (1.0 - t * t) * la * lb)
            if p <= 0.0:
                return BAD, 0.0, 0.0, 0.0
            inv_p = 1.0 / p
            lam_new = g * la * lb * kk * inv_p
        else:
            c = min(v, C_MAX)
            denom = la + lb - (1.0 - c) * la * lb
            p = (1.0 - c) * denom
            if p <= 0.0:
                return BAD, 0.0, 0.0, 0.0
            inv_p = 1.0 / p
            lam_new = kk * la * lb * (1.0 + c) * (1.0 - c) * inv_p
        lam[k + 1] = lam_new
        s[k + 1] = num / kk
        nu[k + 1] = (na + nb) * inv_p
        sp[k + 1] = sp[k] * pb * p

    if final_param >= 0:
        v = expit(x[final_param])
    else:
        v = final_fixed
    if method == FUSION:
        t = min(max(v, T_MIN), 1.0 - T_MIN)
        pf = 2.0 * t * (1.0 - t) * lam[m]
    else:
        # the final single-pair unit is exhaustive
        pf = lam[m]
    if pf <= 0.0:
        return BAD, 0.0, 0.0, 0.0
    return nu[m] / pf, sp[m] * pf, lam[m], s[m]


@njit(cache=True)
def cost(x, plan):
    return _evaluate(x, plan, new_work(plan))[0]


@njit(cache=True)
def _cost(x, plan, work):
    return _evaluate(x, plan, work)[0]


@njit(cache=True)
def _trial(centroid, vertex, coef, out):
    # out = centroid + coef * (centroid - vertex)
    for d in range(centroid.shape[0]):
        out[d] = centroid[d] + coef * (centroid[d] - vertex[d])


@njit(cache=True)
def nelder_mead(x0, plan, step, xatol, fatol, maxfev):
    """Plain Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).

    Converged when both the simplex diameter (max-norm, about the best vertex)
    drops below ``xatol`` and the spread of values below ``fatol`` relative to
    the best value.  Returns ``(x_best, f_best, nfev, converged)``.
    """
    n = x0.shape[0]
    work = new_work(plan)
    if n == 0:
        return x0.copy(), _cost(x0, plan, work), 1, True
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    for i in range(n + 1):
        sim[i] = x0
        if i > 0:
            sim[i, i - 1] += step
        fs[i] = _cost(sim[i], plan, work)
    nfev = n + 1
    converged = False
    centroid = np.empty(n)
    xr = np.empty(n)
    xt = np.empty(n)
    while nfev < maxfev:
        # insertion sort keeps the simplex ordered best to worst
        for i in range(1, n + 1):
            k = i
            while k > 0 and fs[k] < fs[k - 1]:
                fs[k], fs[k - 1] = fs[k - 1], fs[k]
                for d in range(n):
                    sim[k, d], sim[k - 1, d] = sim[k - 1, d], sim[k, d]
                k -= 1
        xspread = 0.0
        fspread = 0.0
        for i in range(1, n + 1):
            fspread = max(fspread, abs(fs[i] - fs[0]))
            for d in range(n):
                xspread = max(xspread, abs(sim[i, d] - sim[0, d]))
        if xspread <= xatol and fspread <= fatol * max(1.0, abs(fs[0])):
            converged = True
            break
        for d in range(n):
            acc = 0.0
            for i in range(n):
                acc += sim[i, d]
            centroid[d] = acc / n
        worst = sim[n]
        _trial(centroid, worst, 1.0, xr)
        fr = _cost(xr, plan, work)
        nfev += 1
        if fr < fs[0]:
            _trial(centroid, worst, 2.0, xt)
            fe = _cost(xt, plan, work)
            nfev += 1
            if fe < fr:
                sim[n] = xt
                fs[n] = fe
            else:
                sim[n] = xr
                fs[n] = fr
            continue
        if fr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fr
            continue
        if fr < fs[n]:
            _trial(centroid, worst, 0.5, xt)
            fc = _cost(xt, plan, work)
            nfev += 1
            if fc <= fr:
                sim[n] = xt
                fs[n] = fc
                continue
        else:
            _trial(centroid, worst, -0.5, xt)
            fc = _cost(xt, plan, work)
            nfev += 1
            if fc < fs[n]:
                sim[n] = xt
                fs[n] = fc
                continue
        for i in range(1, n + 1):
            for d in range(n):
                sim[i, d] = sim[0, d] + 0.5 * (sim[i, d] - sim[0, d])
            fs[i] = _cost(sim[i], plan, work)
        nfev += n
    best = np.argmin(fs)
    return sim[best].copy(), fs[best], nfev, converged


@njit(cache=True)
def polished_search(x0, plan, step, xatol, fatol, maxfev, rounds):
    """Nelder-Mead, re-seeded from its own optimum until a round stops improving."""
    x, f, nfev, conv = nelder_mead(x0, plan, step, xatol, fatol, maxfev)
    iters = 1
    for _ in range(rounds):
        x2, f2, nfev2, conv2 = nelder_mead(x, plan, step * 0.1, xatol, fatol, maxfev)
        nfev += nfev2
        iters += 1
        improved = f2 < f - fatol * max(1.0, abs(f))
        if f2 < f:
            x, f, conv = x2, f2, conv2
        if not improved:
            break
    return x, f, nfev, conv, iters


@njit(cache=True, parallel=True)
def multistart(starts, plan, step, xatol, fatol, maxfev, rounds):
    r, n = starts.shape
    xs = np.empty((r, n))
    fs = np.empty(r)
    nfevs = np.empty(r, dtype=np.int64)
    convs = np.empty(r, dtype=np.bool_)
    for i in prange(r):
        x, f, nfev, conv, _ = polished_search(starts[i], plan, step, xatol, fatol, maxfev, rounds)
        xs[i] = x
        fs[i] = f
        nfevs[i] = nfev
        convs[i] = conv
    return xs, fs, nfevs, convs
