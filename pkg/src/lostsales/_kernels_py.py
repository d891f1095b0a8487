"""Pure-Python twin of the compiled kernels.

Every function here mirrors `_kernels.pyx` operation for operation, with
identical floating-point expression order, so the two backends produce
bit-identical results. All randomness is pre-drawn by the caller; these
loops are deterministic.

State indexing is mixed-radix over (y, pipeline) with radix A = a_max + 1:
    idx = ((y * A + q1) * A + q2) * A + ...
"""

from __future__ import annotations

BACKEND = "python"


def rollout_table_policy(
    actions_table, y0, pipe, demands, c, h, p, a_max, y_max, cost_out, y_out
):
    """Roll a state-indexed policy through the dynamics.

    `pipe` (length L-1) is mutated to the final pipeline; returns final y.
    Per-period costs land in cost_out, the start-of-period inventory in y_out.
    """
    table = actions_table.tolist()
    dem = demands.tolist()
    pp = pipe.tolist()
    A = a_max + 1
    y = int(y0)
    Lm1 = len(pp)
    T = len(dem)
    for t in range(T):
        idx = y
        for q in pp:
            idx = idx * A + q
        a = table[idx]
        d = dem[t]
        leftover = y - d if y > d else 0
        lost = d - y if d > y else 0
        cost_out[t] = c * a + h * leftover + p * lost
        y_out[t] = y
        arrival = pp[0] if Lm1 > 0 else a
        y = leftover + arrival
        if y > y_max:
            y = y_max
        if Lm1 > 0:
            for i in range(Lm1 - 1):
                pp[i] = pp[i + 1]
            pp[Lm1 - 1] = a
    for i in range(Lm1):
        pipe[i] = pp[i]
    return y


def rollout_action_sequence(
    act_seq, y0, pipe, demands, c, h, p, a_max, y_max, cost_out, y_out
):
    """Roll a precomputed action sequence (state-independent policies)."""
    acts = act_seq.tolist()
    dem = demands.tolist()
    pp = pipe.tolist()
    y = int(y0)
    Lm1 = len(pp)
    T = len(dem)
    for t in range(T):
        a = acts[t]
        d = dem[t]
        leftover = y - d if y > d else 0
        lost = d - y if d > y else 0
        cost_out[t] = c * a + h * leftover + p * lost
        y_out[t] = y
        arrival = pp[0] if Lm1 > 0 else a
        y = leftover + arrival
        if y > y_max:
            y = y_max
        if Lm1 > 0:
            for i in range(Lm1 - 1):
                pp[i] = pp[i + 1]
            pp[Lm1 - 1] = a
    for i in range(Lm1):
        pipe[i] = pp[i]
    return y


def q_learning_episode(
    q,
    y0,
    pipe,
    demands,
    eps_u,
    rand_a,
    c,
    h,
    p,
    a_max,
    y_max,
    alpha,
    gamma,
    epsilon,
    use_fg,
):
    """One training episode of epsilon-greedy tabular Q-learning.

    With use_fg, every step also replays the transition for all
    (inventory, action) pairs the observed demand makes reconstructible
    (inventory and action enumerated; pipeline copied from the source):
    the full grid after an uncensored step, inventories up to the sold-out
    level after a censored one. The real pair is updated first, then the
    side pairs in enumeration order.

    q is a dense (n_states, n_actions) table updated in place. Returns
    (final y, summed extrinsic reward); `pipe` is mutated to final.
    """
    qt = q.tolist()
    dem = demands.tolist()
    uu = eps_u.tolist()
    ra = rand_a.tolist()
    pp = pipe.tolist()
    A = a_max + 1
    y = int(y0)
    Lm1 = len(pp)
    radix = A ** (Lm1 - 1) if Lm1 > 0 else 1
    T = len(dem)
    total_r = 0.0
    for t in range(T):
        s_idx = y
        for qv in pp:
            s_idx = s_idx * A + qv
        row = qt[s_idx]
        if uu[t] < epsilon:
            a = ra[t]
        else:
            a = 0
            best = row[0]
            for j in range(1, A):
                if row[j] > best:
                    best = row[j]
                    a = j
        d = dem[t]
        leftover = y - d if y > d else 0
        lost = d - y if d > y else 0
        r = -(c * a + h * leftover + p * lost)
        total_r += r
        d_obs = d if d < y else y
        censored = d_obs == y
        arrival = pp[0] if Lm1 > 0 else a
        y_next = leftover + arrival
        if y_next > y_max:
            y_next = y_max

        # Codes shared by real and side updates: next pipeline is
        # (pipe[1:], a_hat), so tail_code covers pipe[1:].
        tail_code = 0
        for i in range(1, Lm1):
            tail_code = tail_code * A + pp[i]
        if Lm1 > 0:
            ns_idx = (y_next * radix + tail_code) * A + a
        else:
            ns_idx = y_next
        nrow = qt[ns_idx]
        maxq = nrow[0]
        for j in range(1, A):
            if nrow[j] > maxq:
                maxq = nrow[j]
        row[a] = row[a] + alpha * (r + gamma * maxq - row[a])

        if use_fg:
            bound = y if censored else y_max
            for y_hat in range(bound + 1):
                hat_left = y_hat - d_obs if y_hat > d_obs else 0
                hat_lost = d_obs - y_hat if d_obs > y_hat else 0
                hs_idx = y_hat
                for qv in pp:
                    hs_idx = hs_idx * A + qv
                hrow = qt[hs_idx]
                if Lm1 > 0:
                    yh_next = hat_left + pp[0]
                    if yh_next > y_max:
                        yh_next = y_max
                    hn_base = (yh_next * radix + tail_code) * A
                    for a_hat in range(A):
                        hr = -(c * a_hat + h * hat_left + p * hat_lost)
                        hnrow = qt[hn_base + a_hat]
                        hmax = hnrow[0]
                        for j in range(1, A):
                            if hnrow[j] > hmax:
                                hmax = hnrow[j]
                        hrow[a_hat] = hrow[a_hat] + alpha * (
                            hr + gamma * hmax - hrow[a_hat]
                        )
                else:
                    for a_hat in range(A):
                        hr = -(c * a_hat + h * hat_left + p * hat_lost)
                        yh_next = hat_left + a_hat
                        if yh_next > y_max:
                            yh_next = y_max
                        hnrow = qt[yh_next]
                        hmax = hnrow[0]
                        for j in range(1, A):
                            if hnrow[j] > hmax:
                                hmax = hnrow[j]
                        hrow[a_hat] = hrow[a_hat] + alpha * (
                            hr + gamma * hmax - hrow[a_hat]
                        )

        y = y_next
        if Lm1 > 0:
            for i in range(Lm1 - 1):
                pp[i] = pp[i + 1]
            pp[Lm1 - 1] = a
    for si in range(len(qt)):
        qrow = qt[si]
        for j in range(A):
            q[si, j] = qrow[j]
    for i in range(Lm1):
        pipe[i] = pp[i]
    return y, total_r
