"""Seed-reproducible simulation of the Gibbs chain for return statistics.

Every sample owns a counter-based random stream: a Philox(4x64, 10 rounds)
bit generator keyed by (seed, sample index).  A sample consumes its stream
strictly in order (one draw for the start state, one per chain step), so
results are bit-identical regardless of how samples are partitioned into
blocks, chunks, or worker threads; merging is by sample index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, NumericError
from .thermo import GibbsChain

RNG_ALGORITHM = "numpy-philox4x64-10, key=(seed, sample_index)"
BLOCK_SIZE = 32768
CHUNK_STEPS = 512
STEP_CAP = 10**9


@dataclass(frozen=True)
class SimConfig:
    """Simulation sizes plus the reproducibility seed and a worker hint."""

    seed: int
    n_returns: int = 1
    n_samples: int = 1
    horizon: int = 1
    workers: int = 1

    def __post_init__(self) -> None:
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for name in ("n_returns", "n_samples", "horizon", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class EmpiricalStats:
    """Samples of the n-th return time with summary statistics.

    ``flags`` carries soft warnings (for example a sample mean farther than
    five standard errors from the Kac mean); they never abort a run.
    """

    samples: np.ndarray
    n_returns: int
    mean: float
    variance: float
    histogram: dict[int, int]
    seed: int
    rng_algorithm: str
    flags: tuple[str, ...]


class EmpiricalScgf(NamedTuple):
    value: float
    effective_sample_size: float


class TailRate(NamedTuple):
    rate_estimate: float
    count: int


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def _start_cum(weights: np.ndarray) -> np.ndarray:
    cum = np.cumsum(weights)
    cum[-1] = 1.0
    return cum


def _step_columns(transition_probs: np.ndarray) -> list[np.ndarray]:
    """Per-column cumulative thresholds; the last column (always 1) is dropped.

    The next state from s on uniform u is the number of thresholds
    cum[s, j] <= u, so a step is one gather-and-compare per column.
    """
    cum = np.cumsum(transition_probs, axis=1)
    return [np.ascontiguousarray(cum[:, j]) for j in range(cum.shape[1] - 1)]


def _advance(state: np.ndarray, u: np.ndarray, cols: list[np.ndarray]) -> np.ndarray:
    nxt = (u >= cols[0][state]).astype(np.intp)
    for col in cols[1:]:
        nxt += u >= col[state]
    return nxt


def _run_blocks(
    n_samples: int,
    workers: int,
    block_fn: Callable[[int, int], np.ndarray],
    dtype: type,
) -> np.ndarray:
    out = np.empty(n_samples, dtype=dtype)
    blocks = [(lo, min(lo + BLOCK_SIZE, n_samples)) for lo in range(0, n_samples, BLOCK_SIZE)]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(lo, hi, pool.submit(block_fn, lo, hi)) for lo, hi in blocks]
            for lo, hi, fut in futures:
                out[lo:hi] = fut.result()
    else:
        for lo, hi in blocks:
            out[lo:hi] = block_fn(lo, hi)
    return out


def sample_return_times(
    chain: GibbsChain, target_states: Sequence[int], cfg: SimConfig
) -> EmpiricalStats:
    """Times of the cfg.n_returns-th entry into the target, one per sample.

    Starts are drawn from the stationary distribution conditioned on the
    target; each sample walks its own Philox stream until the n-th hit.
    """
    targets = np.array(sorted(int(a) for a in target_states), dtype=int)
    n_states = chain.n_states
    if targets.size == 0 or targets.size >= n_states:
        raise ConfigurationError("target must be a nonempty proper subset of the states")
    target_mask = np.zeros(n_states, dtype=bool)
    target_mask[targets] = True
    pi = chain.stationary
    mu = float(pi[targets].sum())
    start_cum = _start_cum(pi[targets] / mu)
    cols = _step_columns(chain.transition_probs)
    n = cfg.n_returns
    first_width = min(CHUNK_STEPS, max(32, int(1.25 * n / mu) + 32))

    def run_block(lo: int, hi: int) -> np.ndarray:
        size = hi - lo
        gens = [_stream(cfg.seed, i) for i in range(lo, hi)]
        u0 = np.array([g.random() for g in gens])
        state = targets[np.searchsorted(start_cum, u0, side="right")]
        result = np.zeros(size, dtype=np.int64)
        orig = np.arange(size)
        counts = np.zeros(size, dtype=np.int64)
        time = 0
        width = first_width
        while orig.size:
            active = orig.size
            draws = np.empty((active, width))
            for slot in range(active):
                gens[orig[slot]].random(out=draws[slot])
            finished = np.zeros(active, dtype=bool)
            for j in range(width):
                time += 1
                state = _advance(state, draws[:, j], cols)
                counts += target_mask[state]
                newly = (~finished) & (counts == n)
                if newly.any():
                    result[orig[newly]] = time
                    finished |= newly
                    if finished.all():
                        break
            keep = ~finished
            orig = orig[keep]
            state = state[keep]
            counts = counts[keep]
            width = CHUNK_STEPS
            if time > STEP_CAP:
                raise NumericError(f"a sample exceeded the {STEP_CAP} step cap")
        return result

    samples = _run_blocks(cfg.n_samples, cfg.workers, run_block, np.int64)
    mean = float(samples.mean())
    variance = float(samples.var(ddof=1)) if cfg.n_samples > 1 else 0.0
    values, freq = np.unique(samples, return_counts=True)
    flags: list[str] = []
    if cfg.n_samples > 1 and variance > 0.0:
        drift = abs(mean - n / mu) / math.sqrt(variance / cfg.n_samples)
        if drift > 5.0:
            flags.append(f"mean-deviates-from-kac:{drift:.2f}-sigma")
    return EmpiricalStats(
        samples=samples,
        n_returns=n,
        mean=mean,
        variance=variance,
        histogram={int(v): int(c) for v, c in zip(values, freq)},
        seed=cfg.seed,
        rng_algorithm=RNG_ALGORITHM,
        flags=tuple(flags),
    )


def empirical_scgf(stats: EmpiricalStats, alpha: float) -> EmpiricalScgf:
    """(1/n) log of the sample mean of exp(alpha * r^n), with effective sample size.

    Evaluated through a max-shifted log-sum-exp so heavy tilts cannot
    silently overflow; the effective sample size (sum w)^2 / sum w^2 exposes
    estimator degeneracy near the domain boundary.
    """
    x = alpha * stats.samples.astype(float)
    if not np.isfinite(x).all():
        raise NumericError(f"tilt alpha={alpha} overflows the exponent")
    peak = float(x.max())
    shifted = np.exp(x - peak)
    s1 = float(shifted.sum())
    s2 = float((shifted * shifted).sum())
    n_samples = stats.samples.size
    value = (peak + math.log(s1 / n_samples)) / stats.n_returns
    return EmpiricalScgf(value=value, effective_sample_size=s1 * s1 / s2)


def empirical_tail_rate(
    stats: EmpiricalStats, mu_target: float, u: float, side: str
) -> TailRate:
    """-(1/n) log of the empirical frequency of the deviation event.

    ``upper``: {r^n / n >= 1/mu + u}; ``lower``: {r^n / n <= 1/mu - u}.
    A zero frequency is reported as an infinite rate with count 0.
    """
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    if not u > 0.0:
        raise DomainError(f"deviation size must be positive, got {u}")
    mean = 1.0 / mu_target
    if side == "lower" and u >= mean:
        raise DomainError(f"lower deviation {u} >= 1/mu = {mean}; event is empty")
    n = stats.n_returns
    scaled = stats.samples / n
    if side == "upper":
        count = int((scaled >= mean + u).sum())
    else:
        count = int((scaled <= mean - u).sum())
    if count == 0:
        return TailRate(rate_estimate=float("inf"), count=0)
    freq = count / stats.samples.size
    return TailRate(rate_estimate=-math.log(freq) / n, count=count)


def normal_cdf(t: float) -> float:
    """Standard normal CDF (complementary-error-function route)."""
    return 0.5 * math.erfc(-t / math.sqrt(2.0))


def empirical_clt(stats: EmpiricalStats, sigma_pred: float, mu_target: float) -> float:
    """Kolmogorov-Smirnov distance of standardized return times to the normal law."""
    if not sigma_pred > 0.0:
        raise DomainError(f"sigma_pred must be positive, got {sigma_pred}")
    n = stats.n_returns
    z = np.sort((stats.samples - n / mu_target) / (sigma_pred * math.sqrt(n)))
    cdf = np.array([normal_cdf(t) for t in z])
    grid = np.arange(1, z.size + 1) / z.size
    return float(np.maximum(np.abs(grid - cdf), np.abs(grid - 1.0 / z.size - cdf)).max())


def visit_counts(
    chain: GibbsChain, target_states: Sequence[int], cfg: SimConfig
) -> tuple[np.ndarray, float]:
    """Target visit counts over the horizon, from stationary starts.

    Counts hits at times 0 .. horizon-1 (the start state included) and
    returns the per-sample counts together with Var(count)/horizon, the
    simulation estimate of the counting variance rate.
    """
    targets = np.array(sorted(int(a) for a in target_states), dtype=int)
    n_states = chain.n_states
    target_mask = np.zeros(n_states, dtype=bool)
    target_mask[targets] = True
    start_cum = _start_cum(chain.stationary.copy())
    cols = _step_columns(chain.transition_probs)
    horizon = cfg.horizon

    def run_block(lo: int, hi: int) -> np.ndarray:
        size = hi - lo
        gens = [_stream(cfg.seed, i) for i in range(lo, hi)]
        u0 = np.array([g.random() for g in gens])
        state = np.searchsorted(start_cum, u0, side="right")
        counts = target_mask[state].astype(np.int64)
        remaining = horizon - 1
        draws = np.empty((size, CHUNK_STEPS))
        while remaining > 0:
            width = min(CHUNK_STEPS, remaining)
            for slot in range(size):
                gens[slot].random(out=draws[slot, :width])
            for j in range(width):
                state = _advance(state, draws[:, j], cols)
                counts += target_mask[state]
            remaining -= width
        return counts

    counts = _run_blocks(cfg.n_samples, cfg.workers, run_block, np.int64)
    variance_rate = float(counts.var(ddof=1) / horizon) if cfg.n_samples > 1 else 0.0
    return counts, variance_rate
