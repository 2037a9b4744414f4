"""Random-walk Metropolis-Hastings sampler for the discrete Gaussian on Z^N.

Target: pi(x) proportional to exp(-||x||^2 / (2 sigma^2)) on Z^N.
Proposal: y_i = x_i + round(g_i), g_i ~ N(0, proposal_sigma^2) independently,
rounded half-to-even. The rounded proposal is symmetric, so the plain
Metropolis ratio is exact.

Each chain owns two generators spawned from its seed: one feeds the
proposal noise, the other the acceptance uniforms. Keeping the streams
apart lets :func:`run_chain` draw noise in blocks while staying
bit-identical to repeated :func:`step` calls.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .diagnostics import NormTrace

DEFAULT_STEPS = 10_000
SMALL_POLY_STEPS = 2_000
# expected number of perturbed coordinates per proposal, in units of sigma^2
TARGET_MOVES_PER_SIGMA2 = 3.0
MAX_MOVE_FRACTION = 0.75
_BLOCK = 256
_STD_NORMAL = NormalDist()


def default_proposal_sigma(N: int, sigma: float) -> float:
    """Proposal width that perturbs about ``3 sigma^2`` coordinates per step.

    A rounded N(0, s^2) draw is nonzero with probability 2*Phi(-1/(2s)).
    Solving for the width that makes the expected count of nonzero
    coordinates ``min(3 sigma^2, 0.75 N)`` keeps the acceptance rate
    roughly independent of N and sigma. A width equal to sigma would
    move almost every coordinate and freeze the chain in high dimension.
    """
    frac = min(TARGET_MOVES_PER_SIGMA2 * sigma * sigma / N, MAX_MOVE_FRACTION)
    if frac <= 0.0:
        return 1e-12
    z = -_STD_NORMAL.inv_cdf(frac / 2.0) if frac / 2.0 > 1e-300 else 37.0
    return max(0.5 / z, 1e-12)


@dataclass(frozen=True)
class GaussianConfig:
    N: int
    sigma: float
    proposal_sigma: float | None = None
    steps: int = DEFAULT_STEPS
    burn_in: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.steps < 0:
            raise ValueError(f"steps must be non-negative, got {self.steps}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.proposal_sigma is None:
            object.__setattr__(self, "proposal_sigma", default_proposal_sigma(self.N, self.sigma))
        if not self.proposal_sigma > 0:
            raise ValueError(f"proposal_sigma must be positive, got {self.proposal_sigma}")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.steps // 5)
        if self.burn_in < 0 or (self.steps > 0 and self.burn_in >= self.steps):
            raise ValueError(f"burn_in must lie in [0, steps), got {self.burn_in}")


@dataclass
class ChainState:
    position: np.ndarray
    step_index: int = 0
    accepted_count: int = 0
    proposal_rng: np.random.Generator = field(default=None, repr=False)
    accept_rng: np.random.Generator = field(default=None, repr=False)

    @classmethod
    def initial(cls, N: int, seed: int) -> "ChainState":
        """Chain at the origin with generators derived from ``seed``."""
        prop_seq, acc_seq = np.random.SeedSequence(seed).spawn(2)
        return cls(
            position=np.zeros(N, dtype=np.int64),
            proposal_rng=np.random.default_rng(prop_seq),
            accept_rng=np.random.default_rng(acc_seq),
        )

    @property
    def norm_sq(self) -> int:
        return int(self.position @ self.position)

    def copy(self) -> "ChainState":
        return ChainState(
            position=self.position.copy(),
            step_index=self.step_index,
            accepted_count=self.accepted_count,
            proposal_rng=copy.deepcopy(self.proposal_rng),
            accept_rng=copy.deepcopy(self.accept_rng),
        )


def _log_ratio(norm_sq_x: int, norm_sq_y: int, sigma: float) -> float:
    return (norm_sq_x - norm_sq_y) / (2.0 * sigma * sigma)


def _alpha(norm_sq_x: int, norm_sq_y: int, sigma: float) -> float:
    lr = _log_ratio(norm_sq_x, norm_sq_y, sigma)
    return 1.0 if lr >= 0.0 else math.exp(lr)


def acceptance_probability(x, y, sigma: float) -> float:
    """min{1, exp((||x||^2 - ||y||^2) / (2 sigma^2))} with exact integer norms."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    nx = sum(int(v) * int(v) for v in x)
    ny = sum(int(v) * int(v) for v in y)
    return _alpha(nx, ny, sigma)


def _draw_offsets(rng: np.random.Generator, shape, proposal_sigma: float) -> np.ndarray:
    return np.rint(rng.standard_normal(shape) * proposal_sigma).astype(np.int64)


def propose(state: ChainState, proposal_sigma: float) -> np.ndarray:
    """Candidate ``x + round(g)``; advances the state's proposal generator."""
    return state.position + _draw_offsets(state.proposal_rng, state.position.shape[0], proposal_sigma)


def step(state: ChainState, config: GaussianConfig) -> ChainState:
    """One Metropolis-Hastings transition. The input state is left untouched."""
    if state.position.shape[0] != config.N:
        raise ValueError(f"state has dimension {state.position.shape[0]}, config has {config.N}")
    nxt = state.copy()
    y = propose(nxt, config.proposal_sigma)
    u = nxt.accept_rng.random()
    nxt.step_index += 1
    if u < _alpha(state.norm_sq, int(y @ y), config.sigma):
        nxt.position = y
        nxt.accepted_count += 1
    return nxt


def run_chain(config: GaussianConfig, keep_positions: bool = False) -> tuple[np.ndarray, NormTrace]:
    """Run ``config.steps`` transitions from the origin.

    Returns the final position and the per-step norm/acceptance trace.
    Bit-identical to folding :func:`step` over :meth:`ChainState.initial`.
    With ``keep_positions`` the trace also carries every visited state
    (a steps x N array), which is only sensible for small N.
    """
    state = ChainState.initial(config.N, config.seed)
    steps, sigma = config.steps, config.sigma
    norms = np.empty(steps, dtype=np.float64)
    accepted = np.zeros(steps, dtype=bool)
    positions = np.empty((steps, config.N), dtype=np.int64) if keep_positions else None
    x = state.position
    nx = 0
    two_var = 2.0 * sigma * sigma
    for start in range(0, steps, _BLOCK):
        b = min(_BLOCK, steps - start)
        offsets = _draw_offsets(state.proposal_rng, (b, config.N), config.proposal_sigma)
        uniforms = state.accept_rng.random(b)
        dd = np.einsum("ij,ij->i", offsets, offsets)
        for i in range(b):
            if dd[i] == 0:
                # y == x: ratio is 1 and u < 1 always
                accepted[start + i] = True
            else:
                d = offsets[i]
                ny = nx + 2 * int(x @ d) + int(dd[i])
                lr = (nx - ny) / two_var
                if uniforms[i] < (1.0 if lr >= 0.0 else math.exp(lr)):
                    x = x + d
                    nx = ny
                    accepted[start + i] = True
            norms[start + i] = math.sqrt(nx)
            if positions is not None:
                positions[start + i] = x
    trace = NormTrace(norms=norms, accepted=accepted, config=config, burn_in=config.burn_in,
                      positions=positions)
    return x, trace


def sample_small_polynomial(N: int, sigma: float, seed: int,
                            steps: int = SMALL_POLY_STEPS) -> tuple[int, ...]:
    """Final state of a short chain, used as a small key polynomial."""
    position, _ = run_chain(GaussianConfig(N=N, sigma=sigma, steps=steps, burn_in=0, seed=seed))
    return tuple(int(c) for c in position)
