"""Pure-Python conversion kernel. Semantics must match ``_ckernel.pyx`` exactly."""

import numpy as np


def transition_energy(levels, code_cap, vref, a, b, v):
    """(drawn, net) reference energy for a DAC code change ``a -> b`` with
    held input ``v``, from the closed-form charge expressions."""
    dq = vref * code_cap[b & ~a] - code_cap[b] * (levels[b] - levels[a])
    drawn = vref * dq if dq > 0.0 else 0.0
    net = vref * (code_cap[b] * (vref - levels[b] + v) - code_cap[a] * (vref - levels[a] + v))
    return drawn, net


def convert_block(vin, noise, levels, code_cap, vref, offset, lsb, bits,
                  track_step, tracking, start_code, acquired):
    """Convert a block of held input samples.

    :param vin: held (already clamped) input voltages, float64[n]
    :param noise: pre-scaled comparator noise, float64[n, bits+1] or shape (n, 0)
    :param levels: DAC voltage per code, float64[2**bits]
    :param code_cap: switched capacitance per code, float64[2**bits]
    :param track_step: tracking-mode initial step
    :param tracking: tracking mode once acquired
    :param start_code: DAC code held before the first sample
    :param acquired: whether a tracking acquisition already happened
    :return: ``(codes, cycles, overload, e_drawn, e_net, last_code, acquired)``
    """
    n = len(vin)
    top = (1 << bits) - 1
    reg_step = 1 << (bits - 1)
    has_noise = noise.shape[1] > 0
    tol = lsb * 1e-9
    levels = levels.tolist()
    code_cap = code_cap.tolist()

    codes = np.empty(n, dtype=np.int64)
    cycles = np.empty(n, dtype=np.int32)
    overload = np.zeros(n, dtype=np.uint8)
    e_drawn = np.zeros(n, dtype=np.float64)
    e_net = np.zeros(n, dtype=np.float64)

    b = int(start_code)
    for i in range(n):
        v = float(vin[i])
        drawn = 0.0
        net = 0.0
        if tracking and acquired:
            s = track_step
        else:
            s = reg_step
            if b != 0:
                d, t = transition_energy(levels, code_cap, vref, b, 0, v)
                drawn += d
                net += t
                b = 0
        j = 0
        while s >= 1:
            nz = noise[i, j] if has_noise else 0.0
            nb = b + s if v + nz > levels[b] + offset else b - s
            nb = min(max(nb, 0), top)
            if nb != b:
                d, t = transition_energy(levels, code_cap, vref, b, nb, v)
                drawn += d
                net += t
                b = nb
            s >>= 1
            j += 1
        # final correction cycle
        nz = noise[i, j] if has_noise else 0.0
        if not (v + nz > levels[b] + offset) and b > 0:
            d, t = transition_energy(levels, code_cap, vref, b, b - 1, v)
            drawn += d
            net += t
            b -= 1
        j += 1

        codes[i] = b
        cycles[i] = j
        # overload: input lies beyond the neighbouring codes' levels
        hi = levels[b + 1] if b < top else vref
        lo = levels[b - 1] if b > 0 else 0.0
        overload[i] = v > hi + tol or v < lo - tol
        e_drawn[i] = drawn
        e_net[i] = net
        if tracking:
            acquired = True
    return codes, cycles, overload, e_drawn, e_net, b, acquired
