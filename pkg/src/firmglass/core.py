"""Single-realization state and stochastic dynamics of the firm-rating model.

Each of N firms carries a discrete rating in {0, ..., r_max} (0 is default
and absorbing) and a move variable s in {-1, 0, +1}.  One micro-update
resamples the move of one firm from a heat-bath conditional that rewards
agreement with the other firms' current moves through a symmetric coupling
matrix, plus a per-move drift term; the firm's rating then shifts by the
sampled move, clamped by an absorbing barrier at 0 and a reflecting barrier
at r_max.  One time step performs ``n_firms`` micro-updates on randomly
chosen firms.

Conventions the rest of the package relies on:

* couplings are Gaussian(j0, sigma_j**2), symmetric, zero diagonal;
* the field cache ``local_fields[i, v + 1]`` always equals
  ``sum_j couplings[i, j] * (spins[j] == v)`` for v in {-1, 0, +1};
* micro-updates read the *latest* moves of all other firms (asynchronous
  heat-bath dynamics), and the rating moves immediately after the spin;
* defaulted firms keep updating their move and keep influencing neighbours;
  only their rating is frozen at 0;
* all randomness flows through a single ``numpy.random.Generator`` in a
  fixed draw order, so a realization is a pure function of its seed.

``run_realization`` dispatches between a compiled fast path
(:mod:`firmglass.kernels`) and the pure-Python reference implementation in
this module.  The two are kept bit-identical: same draw order, same scalar
arithmetic, so the same seed yields the same trajectory on either engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import kernels

SPIN_VALUES = (-1, 0, 1)

#: Per-move weights exp(f) for the drift-field scenario: a lone firm keeps
#: its rating with probability 0.75, loses a notch with 0.15, gains with 0.10.
RATING_DRIFT_WEIGHTS = (0.15, 0.75, 0.10)

SELECTION_MODES = ("with_replacement", "permutation")


def f_table_from_weights(w_down: float, w_stay: float, w_up: float) -> dict[int, float]:
    """Build a drift table f(s) = log(weight) from positive per-move weights.

    An isolated firm's move distribution is the normalized weight triple, so
    weights that already sum to 1 are that distribution verbatim.
    """
    weights = (w_down, w_stay, w_up)
    if any(w <= 0 for w in weights):
        raise ValueError(f"drift weights must be positive, got {weights}")
    return {s: math.log(w) for s, w in zip(SPIN_VALUES, weights)}


def zero_f_table() -> dict[int, float]:
    """Drift table with f identically zero (pure interaction dynamics)."""
    return {s: 0.0 for s in SPIN_VALUES}


@dataclass(frozen=True)
class ModelParams:
    """All scalar inputs of one model configuration.

    Attributes
    ----------
    n_firms:
        Number of firms N.
    j0, sigma_j:
        Mean and standard deviation of the Gaussian pairwise couplings.
    r_max:
        Top rating class; ratings live in {0, ..., r_max} with r_max + 1
        levels and 0 meaning default.
    steps:
        Time horizon; each step performs ``n_firms`` micro-updates.
    f_table:
        Per-move drift term f(s), keyed by the move value -1/0/+1.
    selection:
        How firms are picked within a time step: ``with_replacement``
        (uniform i.i.d., the default) or ``permutation`` (each firm exactly
        once, random order).
    """

    n_firms: int
    j0: float = 0.0
    sigma_j: float = 0.0
    r_max: int = 7
    steps: int = 8
    f_table: Mapping[int, float] = field(default_factory=zero_f_table)
    selection: str = "with_replacement"

    def __post_init__(self) -> None:
        if self.n_firms < 1:
            raise ValueError(f"n_firms must be >= 1, got {self.n_firms}")
        if self.r_max < 1:
            raise ValueError(f"r_max must be >= 1, got {self.r_max}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.sigma_j < 0:
            raise ValueError(f"sigma_j must be >= 0, got {self.sigma_j}")
        if set(self.f_table) != set(SPIN_VALUES):
            raise ValueError(
                f"f_table must have exactly the keys {SPIN_VALUES}, "
                f"got {sorted(self.f_table)}"
            )
        if self.selection not in SELECTION_MODES:
            raise ValueError(
                f"selection must be one of {SELECTION_MODES}, got {self.selection!r}"
            )


def f_vector(f_table: Mapping[int, float]) -> np.ndarray:
    """Drift table as a length-3 array ordered (f(-1), f(0), f(+1))."""
    return np.array([f_table[s] for s in SPIN_VALUES], dtype=np.float64)


@dataclass
class EnsembleState:
    """Mutable per-realization state: ratings, moves and the field cache.

    ``local_fields[i, v + 1]`` caches the interaction field firm i feels for
    candidate move v, i.e. the coupling-weighted count of other firms whose
    current move equals v.  Every spin flip updates the cache incrementally;
    :func:`compute_local_fields` is the from-scratch reference.
    """

    ratings: np.ndarray      # (N,) int64 in [0, r_max]
    spins: np.ndarray        # (N,) int64 in {-1, 0, +1}
    local_fields: np.ndarray  # (N, 3) float64, column v + 1 for move v


@dataclass
class LocalDistribution:
    """Heat-bath conditional for one firm's move.

    ``probs`` is ordered (P(-1), P(0), P(+1)).  ``z_norm`` is the normalizer
    after the overflow guard shifted all exponents by ``shift`` (the largest
    exponent), so the unshifted normalizer is ``z_norm * exp(shift)`` and its
    logarithm ``shift + log(z_norm)`` is finite for any field magnitude.
    """

    probs: np.ndarray
    z_norm: float
    shift: float

    @property
    def log_z(self) -> float:
        return self.shift + math.log(self.z_norm)


@dataclass
class RealizationOutcome:
    """Result of one simulated realization."""

    nd: int
    final_ratings: np.ndarray
    final_spins: np.ndarray
    nd_trajectory: tuple[int, ...] | None = None


@lru_cache(maxsize=8)
def _upper_triangle(n_firms: int) -> tuple[np.ndarray, np.ndarray]:
    # cached read-only index pair; recomputing it per realization would cost
    # more than the Gaussian draws at N=1000
    return np.triu_indices(n_firms, k=1)


def sample_coupling_matrix(params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Draw a symmetric, zero-diagonal Gaussian coupling matrix.

    Each strict-upper-triangle entry is an independent N(j0, sigma_j**2)
    draw; the lower triangle mirrors it.  Exactly N(N-1)/2 normal variates
    are consumed from ``rng``, independent of sigma_j.
    """
    rows, cols = _upper_triangle(params.n_firms)
    draws = rng.normal(params.j0, params.sigma_j, size=rows.shape[0])
    couplings = np.zeros((params.n_firms, params.n_firms))
    couplings[rows, cols] = draws
    couplings[cols, rows] = draws
    return couplings


def compute_local_fields(couplings: np.ndarray, spins: np.ndarray) -> np.ndarray:
    """From-scratch field cache: column v + 1 holds sum_j J[i, j] * (s_j == v)."""
    fields = np.empty((couplings.shape[0], 3))
    for v in SPIN_VALUES:
        fields[:, v + 1] = couplings @ (spins == v).astype(np.float64)
    return fields


def initial_state(
    params: ModelParams, couplings: np.ndarray, rng: np.random.Generator
) -> EnsembleState:
    """Fresh state: ratings uniform on {1, ..., r_max}, moves uniform on {-1, 0, +1}.

    No firm starts in default; the field cache is computed exactly.
    Consumes 2N integer draws (ratings first, then moves).
    """
    ratings = rng.integers(1, params.r_max + 1, size=params.n_firms)
    spins = rng.integers(-1, 2, size=params.n_firms)
    return EnsembleState(
        ratings=ratings,
        spins=spins,
        local_fields=compute_local_fields(couplings, spins),
    )


def conditional_spin_distribution(
    state: EnsembleState, firm: int, f_table: Mapping[int, float]
) -> LocalDistribution:
    """Heat-bath conditional P(move = v) for one firm given everyone else.

    P(v) is proportional to exp(h(v) + f(v)) with h read from the field
    cache.  Exponents are shifted by their maximum before exponentiation so
    the normalizer stays finite for arbitrarily large fields.

    The scalar arithmetic here is mirrored verbatim by the compiled kernel;
    keep the two in sync (see kernels.advance_one_step).
    """
    row = state.local_fields[firm]
    a = float(row[0]) + f_table[-1]
    b = float(row[1]) + f_table[0]
    c = float(row[2]) + f_table[1]
    shift = max(a, b, c)
    ea = math.exp(a - shift)
    eb = math.exp(b - shift)
    ec = math.exp(c - shift)
    z = ea + eb + ec
    return LocalDistribution(
        probs=np.array([ea / z, eb / z, ec / z]), z_norm=z, shift=shift
    )


def apply_rating_barrier(rating: int, spin: int, r_max: int) -> int:
    """One rating move with absorbing barrier at 0 and reflecting at r_max.

    Default (rating 0) never moves; a +1 move at r_max is reflected back;
    any other move shifts the rating by the move value.  Assumes rating in
    [0, r_max] and spin in {-1, 0, +1}.
    """
    if rating == 0:
        return 0
    if rating == r_max and spin == 1:
        return r_max
    return rating + spin


def micro_update(
    state: EnsembleState,
    couplings: np.ndarray,
    firm: int,
    params: ModelParams,
    rng: np.random.Generator,
) -> None:
    """Resample one firm's move, refresh the field cache, move its rating.

    If the move changed, the cached fields of every firm are adjusted in one
    O(N) pass (column of the old move loses this firm's couplings, column of
    the new move gains them).  The rating is updated immediately, so a firm
    selected twice within a step can move twice.
    """
    dist = conditional_spin_distribution(state, firm, params.f_table)
    u = rng.random()
    if u < dist.probs[0]:
        new = -1
    elif u < dist.probs[0] + dist.probs[1]:
        new = 0
    else:
        new = 1
    old = int(state.spins[firm])
    if new != old:
        row = couplings[firm]
        state.local_fields[:, old + 1] -= row
        state.local_fields[:, new + 1] += row
        state.spins[firm] = new
    state.ratings[firm] = apply_rating_barrier(int(state.ratings[firm]), new, params.r_max)


def draw_update_order(params: ModelParams, rng: np.random.Generator) -> np.ndarray:
    """Firm indices visited in one time step, per the selection mode."""
    if params.selection == "permutation":
        return rng.permutation(params.n_firms)
    return rng.integers(0, params.n_firms, size=params.n_firms)


def time_step(
    state: EnsembleState,
    couplings: np.ndarray,
    params: ModelParams,
    rng: np.random.Generator,
) -> None:
    """One time step: exactly ``n_firms`` micro-updates on drawn firms."""
    for firm in draw_update_order(params, rng):
        micro_update(state, couplings, int(firm), params, rng)


def count_defaults(state: EnsembleState) -> int:
    return int(np.count_nonzero(state.ratings == 0))


def resolve_engine(engine: str) -> str:
    """Map 'auto' to the fastest available engine; validate explicit choices."""
    if engine == "auto":
        return "numba" if kernels.NUMBA_AVAILABLE else "python"
    if engine == "numba" and not kernels.NUMBA_AVAILABLE:
        raise RuntimeError("numba engine requested but numba is not importable")
    if engine not in ("numba", "python"):
        raise ValueError(f"engine must be 'auto', 'numba' or 'python', got {engine!r}")
    return engine


def run_realization(
    params: ModelParams,
    seed: int | np.random.SeedSequence,
    *,
    engine: str = "auto",
    record_trajectory: bool = False,
) -> RealizationOutcome:
    """Simulate one full realization from a seed.

    Draws a fresh coupling matrix and initial state, advances ``steps`` time
    steps and counts defaulted firms.  Deterministic: the same (params, seed)
    pair yields the same outcome regardless of engine, because both engines
    consume the generator in the same order (couplings, ratings, moves, then
    per step: firm order, then one uniform per micro-update) and share the
    same scalar arithmetic.
    """
    rng = np.random.default_rng(seed)
    couplings = sample_coupling_matrix(params, rng)
    state = initial_state(params, couplings, rng)
    resolved = resolve_engine(engine)
    f_vec = f_vector(params.f_table)
    trajectory: list[int] | None = [] if record_trajectory else None
    for _ in range(params.steps):
        if resolved == "numba":
            order = draw_update_order(params, rng)
            uniforms = rng.random(params.n_firms)
            kernels.advance_one_step(
                couplings,
                state.ratings,
                state.spins,
                state.local_fields,
                f_vec,
                params.r_max,
                order,
                uniforms,
            )
        else:
            time_step(state, couplings, params, rng)
        if trajectory is not None:
            trajectory.append(count_defaults(state))
    return RealizationOutcome(
        nd=count_defaults(state),
        final_ratings=state.ratings,
        final_spins=state.spins,
        nd_trajectory=tuple(trajectory) if trajectory is not None else None,
    )
