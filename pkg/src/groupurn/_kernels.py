"""Compiled inner loops.  Callers own all allocation and random generation."""

import numba
import numpy as np


@numba.njit(nogil=True, cache=True)
def urn_chunk(table, balls, counts, state, draws, rec_times, out):
    """Advance the urn by ``len(draws)`` steps.

    ``balls[:t]`` holds the label of every ball currently in the urn; a step
    draws two ball positions (with replacement) from ``draws`` and appends the
    product of their labels.  ``state`` is ``[t, rec_ptr, missing, cover_time]``
    and is updated in place so consecutive chunks continue seamlessly.
    """
    t = state[0]
    rp = state[1]
    missing = state[2]
    cover = state[3]
    nrec = rec_times.shape[0]
    for k in range(draws.shape[0]):
        x = table[balls[draws[k, 0]], balls[draws[k, 1]]]
        balls[t] = x
        if counts[x] == 0:
            missing -= 1
            if missing == 0 and cover < 0:
                cover = t + 1
        counts[x] += 1
        t += 1
        if rp < nrec and rec_times[rp] == t:
            for i in range(counts.shape[0]):
                out[rp, i] = counts[i]
            rp += 1
    state[0] = t
    state[1] = rp
    state[2] = missing
    state[3] = cover


@numba.njit(nogil=True, cache=True)
def _pick_in_class(counts, in_h, want_h, m, v):
    # Ball of rank floor(v*m) within the class, ranks ordered by label.
    b = np.int64(v * m)
    if b >= m:
        b = m - 1
    acc = 0
    for g in range(counts.shape[0]):
        if in_h[g] == want_h:
            acc += counts[g]
            if b < acc:
                return g
    return -1


@numba.njit(nogil=True, cache=True)
def coupled_chunk(table, in_h, counts, state, u, nc_out, n1_out, offset):
    """Advance the G-urn and the two-colour urn together.

    ``state`` is ``[t, n_comp, n1, violations]``.  Each pick uses one shared
    uniform: the G-urn pick falls in the complement iff ``u*t < n_comp`` and
    the Z/2 pick is a 1 iff ``u*t < n1``.  While ``n_comp >= n1`` every Z/2
    1-pick is a complement pick.  If ``n_comp > n1`` strictly, one step cannot
    break the order.  If ``n_comp == n1`` the class patterns coincide, and a
    single complement pick times an H pick always lands in the complement
    (H G\\H and G\\H H avoid H), so a Z/2 increment forces a complement
    increment.  Dominance therefore persists inductively.
    """
    t = state[0]
    nc = state[1]
    n1 = state[2]
    viol = state[3]
    for k in range(u.shape[0]):
        ca = u[k, 0] * t < nc
        cb = u[k, 1] * t < nc
        za = u[k, 0] * t < n1
        zb = u[k, 1] * t < n1
        ma = nc if ca else t - nc
        mb = nc if cb else t - nc
        a = _pick_in_class(counts, in_h, not ca, ma, u[k, 2])
        b = _pick_in_class(counts, in_h, not cb, mb, u[k, 3])
        x = table[a, b]
        counts[x] += 1
        if not in_h[x]:
            nc += 1
        if za != zb:
            n1 += 1
        t += 1
        if nc < n1:
            viol += 1
        nc_out[offset + k] = nc
        n1_out[offset + k] = n1
    state[0] = t
    state[1] = nc
    state[2] = n1
    state[3] = viol
