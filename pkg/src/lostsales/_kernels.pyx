# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot-loop kernels.

Operation-for-operation twin of `_kernels_py.py` with identical
floating-point expression order (built with -ffp-contract=off), so both
backends produce bit-identical results. All randomness is pre-drawn by
the caller.
"""

BACKEND = "compiled"


def rollout_table_policy(
    int[::1] actions_table,
    long y0,
    long[::1] pipe,
    long[::1] demands,
    double c,
    double h,
    double p,
    long a_max,
    long y_max,
    double[::1] cost_out,
    long[::1] y_out,
):
    cdef long A = a_max + 1
    cdef long y = y0
    cdef long Lm1 = pipe.shape[0]
    cdef long T = demands.shape[0]
    cdef long t, i, a, d, leftover, lost, arrival
    cdef long idx
    for t in range(T):
        idx = y
        for i in range(Lm1):
            idx = idx * A + pipe[i]
        a = actions_table[idx]
        d = demands[t]
        leftover = y - d if y > d else 0
        lost = d - y if d > y else 0
        cost_out[t] = c * a + h * leftover + p * lost
        y_out[t] = y
        arrival = pipe[0] if Lm1 > 0 else a
        y = leftover + arrival
        if y > y_max:
            y = y_max
        if Lm1 > 0:
            for i in range(Lm1 - 1):
                pipe[i] = pipe[i + 1]
            pipe[Lm1 - 1] = a
    return y


def rollout_action_sequence(
    long[::1] act_seq,
    long y0,
    long[::1] pipe,
    long[::1] demands,
    double c,
    double h,
    double p,
    long a_max,
    long y_max,
    double[::1] cost_out,
    long[::1] y_out,
):
    cdef long y = y0
    cdef long Lm1 = pipe.shape[0]
    cdef long T = demands.shape[0]
    cdef long t, i, a, d, leftover, lost, arrival
    for t in range(T):
        a = act_seq[t]
        d = demands[t]
        leftover = y - d if y > d else 0
        lost = d - y if d > y else 0
        cost_out[t] = c * a + h * leftover + p * lost
        y_out[t] = y
        arrival = pipe[0] if Lm1 > 0 else a
        y = leftover + arrival
        if y > y_max:
            y = y_max
        if Lm1 > 0:
            for i in range(Lm1 - 1):
                pipe[i] = pipe[i + 1]
            pipe[Lm1 - 1] = a
    return y


def q_learning_episode(
    double[:, ::1] q,
    long y0,
    long[::1] pipe,
    long[::1] demands,
    double[::1] eps_u,
    long[::1] rand_a,
    double c,
    double h,
    double p,
    long a_max,
    long y_max,
    double alpha,
    double gamma,
    double epsilon,
    long use_fg,
):
    cdef long A = a_max + 1
    cdef long y = y0
    cdef long Lm1 = pipe.shape[0]
    cdef long T = demands.shape[0]
    cdef long radix = 1
    cdef long i
    for i in range(Lm1 - 1):
        radix *= A
    cdef double total_r = 0.0
    cdef long t, j, a, d, leftover, lost, d_obs, arrival, y_next
    cdef long s_idx, ns_idx, tail_code, bound, y_hat, a_hat
    cdef long hat_left, hat_lost, hs_idx, yh_next, hn_base
    cdef long censored
    cdef double r, maxq, best, hr, hmax
    for t in range(T):
        s_idx = y
        for i in range(Lm1):
            s_idx = s_idx * A + pipe[i]
        if eps_u[t] < epsilon:
            a = rand_a[t]
        else:
            a = 0
            best = q[s_idx, 0]
            for j in range(1, A):
                if q[s_idx, j] > best:
                    best = q[s_idx, j]
                    a = j
        d = demands[t]
        leftover = y - d if y > d else 0
        lost = d - y if d > y else 0
        r = -(c * a + h * leftover + p * lost)
        total_r += r
        d_obs = d if d < y else y
        censored = 1 if d_obs == y else 0
        arrival = pipe[0] if Lm1 > 0 else a
        y_next = leftover + arrival
        if y_next > y_max:
            y_next = y_max

        tail_code = 0
        for i in range(1, Lm1):
            tail_code = tail_code * A + pipe[i]
        if Lm1 > 0:
            ns_idx = (y_next * radix + tail_code) * A + a
        else:
            ns_idx = y_next
        maxq = q[ns_idx, 0]
        for j in range(1, A):
            if q[ns_idx, j] > maxq:
                maxq = q[ns_idx, j]
        q[s_idx, a] = q[s_idx, a] + alpha * (r + gamma * maxq - q[s_idx, a])

        if use_fg:
            bound = y if censored else y_max
            for y_hat in range(bound + 1):
                hat_left = y_hat - d_obs if y_hat > d_obs else 0
                hat_lost = d_obs - y_hat if d_obs > y_hat else 0
                hs_idx = y_hat
                for i in range(Lm1):
                    hs_idx = hs_idx * A + pipe[i]
                if Lm1 > 0:
                    yh_next = hat_left + pipe[0]
                    if yh_next > y_max:
                        yh_next = y_max
                    hn_base = (yh_next * radix + tail_code) * A
                    for a_hat in range(A):
                        hr = -(c * a_hat + h * hat_left + p * hat_lost)
                        hmax = q[hn_base + a_hat, 0]
                        for j in range(1, A):
                            if q[hn_base + a_hat, j] > hmax:
                                hmax = q[hn_base + a_hat, j]
                        q[hs_idx, a_hat] = q[hs_idx, a_hat] + alpha * (
                            hr + gamma * hmax - q[hs_idx, a_hat]
                        )
                else:
                    for a_hat in range(A):
                        hr = -(c * a_hat + h * hat_left + p * hat_lost)
                        yh_next = hat_left + a_hat
                        if yh_next > y_max:
                            yh_next = y_max
                        hmax = q[yh_next, 0]
                        for j in range(1, A):
                            if q[yh_next, j] > hmax:
                                hmax = q[yh_next, j]
                        q[hs_idx, a_hat] = q[hs_idx, a_hat] + alpha * (
                            hr + gamma * hmax - q[hs_idx, a_hat]
                        )

        y = y_next
        if Lm1 > 0:
            for i in range(Lm1 - 1):
                pipe[i] = pipe[i + 1]
            pipe[Lm1 - 1] = a
    return y, total_r
