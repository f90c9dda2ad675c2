"""
Conditional Monte Carlo for E[X T | state of the previous update].

Each oracle draws the interarrival X ahead of update i and the services
that decide its departure in the no-discard model, builds T directly from
the queue rules, and returns (mean of X*T, standard error).
"""
import numpy as np

from Framework.ServiceDistribution import DistributionKind, ServiceDistribution, sample_many


def sample_residual(dist: ServiceDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    """Residual service seen by a Poisson arrival: U times a length-biased service."""
    u = rng.random(n)
    if dist.kind is DistributionKind.DETERMINISTIC:
        return u * dist.param('c')
    if dist.kind is DistributionKind.INVERSE_GAUSSIAN:
        raise NotImplementedError('length-biased inverse Gaussian is not sampled here')
    k, mu = dist.shape_rate()
    return u * rng.gamma(k + 1, 1.0 / (k * mu), size=n)


def _estimate(x, t):
    xt = x * t
    return float(np.mean(xt)), float(np.std(xt, ddof=1) / np.sqrt(len(xt)))


def _after_wait_11(eps_i, r, x, s, s_next, y):
    held = r + s + y + eps_i + s_next - x
    return np.where(x < r, r + s - x, np.where(x < r + s, held, eps_i + s_next))


def _after_wait_2s(eps_i, eps_b, r, x, s, s_next):
    buffered = r + s + eps_b + s_next - x
    return np.where(x < r, r + s - x, np.where(x < r + s, buffered, eps_i + s_next))


def xt_after_wait_11(lam, dist, eps_i, r, n, rng):
    """Previous update is captured with residual wait r (r = eps_i: it found the server idle)."""
    x = rng.exponential(1.0 / lam, n)
    s, s_next = sample_many(dist, rng, n), sample_many(dist, rng, n)
    y = rng.exponential(1.0 / lam, n)
    return _estimate(x, _after_wait_11(eps_i, r, x, s, s_next, y))


def xt_busy_11(lam, dist, eps_i, n, rng):
    """Previous update arrived during a service and is held for the next idle arrival."""
    res = sample_residual(dist, rng, n)
    x = rng.exponential(1.0 / lam, n)
    y = rng.exponential(1.0 / lam, n)
    s_next = sample_many(dist, rng, n)
    t = np.where(x < res, res - x + y + eps_i + s_next, eps_i + s_next)
    return _estimate(x, t)


def xt_after_wait_2s(lam, dist, eps_i, eps_b, r, n, rng):
    x = rng.exponential(1.0 / lam, n)
    s, s_next = sample_many(dist, rng, n), sample_many(dist, rng, n)
    return _estimate(x, _after_wait_2s(eps_i, eps_b, r, x, s, s_next))


def xt_busy_2s(lam, dist, eps_i, eps_b, n, rng):
    """Previous update is buffered during a service and served after eps_b."""
    res = sample_residual(dist, rng, n)
    x = rng.exponential(1.0 / lam, n)
    s, s_next = sample_many(dist, rng, n), sample_many(dist, rng, n)
    # past the residual service the previous update has residual wait eps_b
    later = _after_wait_2s(eps_i, eps_b, eps_b, x - res, s, s_next)
    t = np.where(x < res, res + eps_b + s - x, later)
    return _estimate(x, t)


def arrives_after_residual(lam, dist, n, rng):
    """Fraction of updates arriving after the residual service: estimates E[exp(-lam R)]."""
    hit = rng.exponential(1.0 / lam, n) >= sample_residual(dist, rng, n)
    return float(np.mean(hit)), float(np.std(hit, ddof=1) / np.sqrt(n))
