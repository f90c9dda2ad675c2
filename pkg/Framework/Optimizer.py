"""
Choice of the waiting times (eps_i, eps_b) minimizing w1*E[D] + w2*E[PAoI].

The objective is evaluated with the analytic engines. A coarse grid scan
locates the basin, golden-section search refines it (coordinate-wise for
M/GI/1/2*), and a few restarts from random grid cells check that the
objective behaves quasi-convexly.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from Framework.AnalyticMG11 import AoiMetrics, QueueConfig11, aoi_metrics_11
from Framework.AnalyticMG12Star import QueueConfig2s, aoi_metrics_2s
from Framework.Exceptions import NumericalError, ParameterDomainError
from Framework.ServiceDistribution import ServiceDistribution
from Framework.StatusServer import Scheme
from GlobalConfig import (QUASI_CONVEX_TOLERANCE_FACTOR, SEARCH_GRID_POINTS, SEARCH_MAX_DOUBLINGS, SEARCH_RESTARTS,
                          SEARCH_RESTART_SEED, SEARCH_TOLERANCE_FACTOR, SEARCH_UPPER_FACTOR)

logger = logging.getLogger(__name__)

invphi = (math.sqrt(5) - 1) / 2  # 1 / phi
invphi2 = (3 - math.sqrt(5)) / 2  # 1 / phi^2

MAX_COORDINATE_SWEEPS = 20


@dataclass(frozen=True)
class Objective:
    w1: float = 1.0
    w2: float = 0.0

    def __post_init__(self):
        for name in ('w1', 'w2'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterDomainError(name, value, 'must be finite and >= 0')
        if self.w1 + self.w2 <= 0:
            raise ParameterDomainError('w1 + w2', self.w1 + self.w2, 'at least one weight must be > 0')

    def __call__(self, m: AoiMetrics) -> float:
        terms = []
        if self.w1:
            terms.append(self.w1 * m.avg_aoi)
        if self.w2:
            terms.append(self.w2 * m.avg_peak_aoi)
        return math.fsum(terms)


@dataclass(frozen=True)
class SearchConfig:
    upper_factor: float = SEARCH_UPPER_FACTOR
    grid_points: int = SEARCH_GRID_POINTS
    tolerance_factor: float = SEARCH_TOLERANCE_FACTOR
    max_doublings: int = SEARCH_MAX_DOUBLINGS
    restarts: int = SEARCH_RESTARTS
    restart_seed: int = SEARCH_RESTART_SEED

    def __post_init__(self):
        if self.grid_points < 3:
            raise ParameterDomainError('grid_points', self.grid_points, 'must be >= 3')
        if not self.upper_factor > 0:
            raise ParameterDomainError('upper_factor', self.upper_factor, 'must be > 0')


@dataclass(frozen=True)
class OptResult:
    eps_i_star: float
    eps_b_star: float
    value_star: float
    value_zero_wait: float
    improvement: float
    grid_resolution: float
    upper: float = math.nan
    trace: pd.DataFrame = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SweepConfig:
    eps_i: tuple = (0.0,)
    eps_b: tuple = (0.0,)


@dataclass(frozen=True)
class TradeoffCurve:
    points: pd.DataFrame
    pareto: pd.DataFrame


def metrics(scheme: Scheme, dist: ServiceDistribution, lam: float, eps_i: float, eps_b: float = 0.0) -> AoiMetrics:
    if Scheme(scheme) is Scheme.MG11:
        return aoi_metrics_11(QueueConfig11(lam, eps_i, dist))
    return aoi_metrics_2s(QueueConfig2s(lam, eps_i, eps_b, dist))


class _TracedObjective:
    """Objective on (eps_i, eps_b) that remembers every evaluation."""

    def __init__(self, scheme, dist, lam, objective: Objective):
        self.scheme = Scheme(scheme)
        self.dist = dist
        self.lam = lam
        self.objective = objective
        self.points = {}

    def __call__(self, eps_i, eps_b=0.0) -> float:
        eps_i, eps_b = float(eps_i), float(eps_b)
        key = (eps_i, eps_b)
        if key not in self.points:
            value = self.objective(metrics(self.scheme, self.dist, self.lam, eps_i, eps_b))
            if not math.isfinite(value):
                raise NumericalError('objective is not finite at eps_i={:.6g}, eps_b={:.6g} (lambda={:.6g}, {})'
                                     .format(eps_i, eps_b, self.lam, self.dist))
            self.points[key] = value
        return self.points[key]

    def best(self) -> (float, float, float):
        # ties go to the smaller total wait
        (eps_i, eps_b), value = min(self.points.items(), key=lambda kv: (kv[1], kv[0][0] + kv[0][1], kv[0][0]))
        return eps_i, eps_b, value

    def frame(self) -> pd.DataFrame:
        keys = list(self.points)
        return pd.DataFrame({'eps_i': [k[0] for k in keys], 'eps_b': [k[1] for k in keys],
                             'value': list(self.points.values())})


def gss(f, a, b, tol=1e-4):
    """Golden-section search.

    Given a function f with a single local minimum in
    the interval [a,b], gss returns a subset interval
    [c,d] that contains the minimum with d-c <= tol.
    """
    (a, b) = (min(a, b), max(a, b))
    h = b - a
    if h <= tol:
        return a, b

    # Required steps to achieve tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(invphi)))
    logger.debug('golden section on [%g, %g]: %d iterations', a, b, n)

    c = a + invphi2 * h
    d = a + invphi * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = invphi * h
            c = a + invphi2 * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = invphi * h
            d = a + invphi * h
            yd = f(d)

    if yc < yd:
        return a, d
    else:
        return c, b


def _line_search(f, x, lo, hi, tol) -> float:
    """Golden section on [lo, hi]; returns the better of x and the bracket midpoint."""
    c, d = gss(f, lo, hi, tol)
    mid = (c + d) / 2
    return mid if f(mid) < f(x) else x


def _coordinate_descent(objective: _TracedObjective, x, y, bracket_i, bracket_b, tol):
    """Alternate golden sections over eps_i and eps_b; bracket_*(center) gives each search interval."""
    for _ in range(MAX_COORDINATE_SWEEPS):
        before = objective(x, y)
        x = _line_search(lambda e: objective(e, y), x, *bracket_i(x), tol)
        y = _line_search(lambda e: objective(x, e), y, *bracket_b(y), tol)
        if before - objective(x, y) <= 1e-12 * abs(before):
            break
    return x, y


def _grid_scan(objective: _TracedObjective, grid, two_dim):
    if not two_dim:
        values = np.array([objective(e) for e in grid])
        i = int(np.argmin(values))
        return (i, 0), i == len(grid) - 1
    values = np.array([[objective(ei, eb) for eb in grid] for ei in grid])
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    return (int(i), int(j)), max(i, j) == len(grid) - 1


def optimize_waiting(scheme, dist: ServiceDistribution, lam: float, objective: Objective = Objective(),
                     search_cfg: SearchConfig = SearchConfig(), compare_schemes: bool = True) -> OptResult:
    scheme = Scheme(scheme)
    two_dim = scheme is Scheme.MG12STAR
    scale = dist.mean() if dist.mean() > 0 else 1.0 / lam
    tol = search_cfg.tolerance_factor * scale
    upper = search_cfg.upper_factor * scale
    traced = _TracedObjective(scheme, dist, lam, objective)

    for doubling in range(search_cfg.max_doublings + 1):
        grid = np.linspace(0.0, upper, search_cfg.grid_points)
        (i, j), on_boundary = _grid_scan(traced, grid, two_dim)
        if not on_boundary:
            break
        if doubling == search_cfg.max_doublings:
            logger.warning('minimizer still on the search boundary %g after %d doublings', upper, doubling)
            break
        logger.info('minimizer on the search boundary %g, doubling the bound', upper)
        upper *= 2
    step = grid[1] - grid[0]
    logger.debug('%s grid of %d points per axis up to %g, best cell (%d, %d)', scheme.value,
                 search_cfg.grid_points, upper, i, j)

    def local(center):
        return max(0.0, center - step), min(upper, center + step)

    def span(center, target):
        return max(0.0, min(center, target) - step), min(upper, max(center, target) + step)

    if two_dim:
        _coordinate_descent(traced, grid[i], grid[j], local, local, tol)
    else:
        _line_search(traced, grid[i], *local(grid[i]), tol)
    eps_i, eps_b, value = traced.best()

    # quasi-convexity health check: refine towards the incumbent from random grid cells
    rng = np.random.default_rng(search_cfg.restart_seed)
    restart_values = []
    for _ in range(search_cfg.restarts):
        ri, rj = rng.integers(0, len(grid), size=2)
        start_i, start_b = grid[ri], (grid[rj] if two_dim else 0.0)

        if two_dim:
            x, y = _coordinate_descent(traced, start_i, start_b, lambda c: span(c, eps_i), lambda c: span(c, eps_b), tol)
        else:
            x, y = _line_search(traced, start_i, *span(start_i, eps_i), tol), 0.0
        restart_values.append(traced(x, y))
    if restart_values and max(restart_values) - min(restart_values) > QUASI_CONVEX_TOLERANCE_FACTOR * scale:
        logger.warning('restarts disagree (%s) for %s, %s, lambda=%g: objective may not be quasi-convex',
                       ', '.join('{:.6g}'.format(v) for v in restart_values), scheme.value, dist, lam)

    eps_i, eps_b, value = traced.best()
    zero = traced(0.0, 0.0)
    result = OptResult(eps_i_star=eps_i, eps_b_star=eps_b, value_star=value, value_zero_wait=zero,
                       improvement=max(0.0, 1.0 - value / zero), grid_resolution=step, upper=upper,
                       trace=traced.frame())

    if compare_schemes and two_dim and objective.w2 == 0:
        single = optimize_waiting(Scheme.MG11, dist, lam, objective, search_cfg, compare_schemes=False)
        if result.value_star <= single.value_star + 1e-6:
            logger.info('M/GI/1/2* optimum %.6g <= M/GI/1/1 optimum %.6g', result.value_star, single.value_star)
        else:
            logger.warning('M/GI/1/2* optimum %.6g exceeds M/GI/1/1 optimum %.6g for %s, lambda=%g',
                           result.value_star, single.value_star, dist, lam)
    return result


def pareto_subset(points: pd.DataFrame) -> pd.DataFrame:
    """Points not beaten in both average AoI and average peak AoI by another point."""
    ordered = points.sort_values(['avg_aoi', 'avg_peak_aoi'], kind='mergesort')
    keep, best_peak = [], math.inf
    for idx, peak in ordered['avg_peak_aoi'].items():
        if peak < best_peak:
            keep.append(idx)
            best_peak = peak
    return ordered.loc[keep]


def tradeoff_curve(scheme, dist: ServiceDistribution, lam: float, sweep_cfg: SweepConfig) -> TradeoffCurve:
    scheme = Scheme(scheme)
    eps_b_values = sweep_cfg.eps_b if scheme is Scheme.MG12STAR else (0.0,)
    rows = []
    for eps_b in eps_b_values:
        for eps_i in sweep_cfg.eps_i:
            m = metrics(scheme, dist, lam, eps_i, eps_b)
            rows.append({'eps_i': float(eps_i), 'eps_b': float(eps_b),
                         'avg_aoi': m.avg_aoi, 'avg_peak_aoi': m.avg_peak_aoi})
    points = pd.DataFrame(rows, columns=['eps_i', 'eps_b', 'avg_aoi', 'avg_peak_aoi'])
    return TradeoffCurve(points=points, pareto=pareto_subset(points))


def improvement_report(scheme, dist: ServiceDistribution, lambda_list, objective: Objective = Objective(),
                       search_cfg: SearchConfig = SearchConfig()) -> pd.DataFrame:
    """Zero waiting versus optimized deterministic waiting, one row per arrival rate."""
    rows = []
    for lam in lambda_list:
        res = optimize_waiting(scheme, dist, lam, objective, search_cfg)
        zero = metrics(scheme, dist, lam, 0.0, 0.0)
        best = metrics(scheme, dist, lam, res.eps_i_star, res.eps_b_star)
        rows.append({'lambda': lam,
                     'zero_wait_aoi': zero.avg_aoi,
                     'optimal_aoi': best.avg_aoi,
                     'eps_i_star': res.eps_i_star,
                     'eps_b_star': res.eps_b_star,
                     'value_star': res.value_star,
                     'value_zero_wait': res.value_zero_wait,
                     'improvement': res.improvement,
                     'improvement_pct': 100.0 * res.improvement})
    return pd.DataFrame(rows)
