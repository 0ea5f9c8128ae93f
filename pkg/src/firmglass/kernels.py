"""Compiled fast path for the single-site dynamics.

``advance_one_step`` is the numba twin of the per-step loop in
:mod:`firmglass.core` (micro_update applied to a pre-drawn firm order, with
one pre-drawn uniform per micro-update).  It must stay bit-identical to the
reference path: same max-shift, same exponentials (libm via math.exp), same
division and comparison order, same cache-update arithmetic.  Any change
here needs the mirror change in core.conditional_spin_distribution /
core.micro_update, and vice versa; the cross-engine equality test enforces
this.
"""

from __future__ import annotations

import math

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE:

    @njit(cache=True, nogil=True)
    def advance_one_step(couplings, ratings, spins, fields, f_vec, r_max, firm_order, uniforms):
        n = couplings.shape[0]
        for k in range(firm_order.shape[0]):
            i = firm_order[k]
            a = fields[i, 0] + f_vec[0]
            b = fields[i, 1] + f_vec[1]
            c = fields[i, 2] + f_vec[2]
            shift = a
            if b > shift:
                shift = b
            if c > shift:
                shift = c
            ea = math.exp(a - shift)
            eb = math.exp(b - shift)
            ec = math.exp(c - shift)
            z = ea + eb + ec
            p_down = ea / z
            p_stay = eb / z
            u = uniforms[k]
            if u < p_down:
                new = -1
            elif u < p_down + p_stay:
                new = 0
            else:
                new = 1
            old = spins[i]
            if new != old:
                col_old = old + 1
                col_new = new + 1
                for j in range(n):
                    fields[j, col_old] -= couplings[i, j]
                    fields[j, col_new] += couplings[i, j]
                spins[i] = new
            r = ratings[i]
            if r == 0:
                pass
            elif r == r_max and new == 1:
                pass
            else:
                ratings[i] = r + new

else:  # pragma: no cover
    advance_one_step = None


def warm_up() -> None:
    """Trigger JIT compilation on a tiny problem (no-op without numba).

    Called before forking worker processes so children inherit the compiled
    kernel instead of each paying the compilation cost.
    """
    if not NUMBA_AVAILABLE:
        return
    import numpy as np

    couplings = np.zeros((2, 2))
    advance_one_step(
        couplings,
        np.array([1, 1], dtype=np.int64),
        np.array([0, 0], dtype=np.int64),
        np.zeros((2, 3)),
        np.zeros(3),
        7,
        np.array([0, 1], dtype=np.int64),
        np.array([0.5, 0.5]),
    )
