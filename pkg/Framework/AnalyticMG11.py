"""
Average AoI and average peak AoI of the M/GI/1/1 server that waits eps_i
after an idle period before serving the freshest captured update.

The AoI is obtained from the equivalent no-discard model through

    E[D] = lam * E[X T] + 1/lam,  E[X T] = sum_s p_s E[X T | s],  s in {I, W, B}

where X is the interarrival time ahead of an update and T its system time.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import pandas as pd

from Framework.Exceptions import NotApplicable, NumericalError, ParameterDomainError
from Framework.ServiceDistribution import ServiceDistribution, mgf_triple, residual_stats
from GlobalConfig import COMPENSATED_SUM_THRESHOLD

logger = logging.getLogger(__name__)

STATES_11 = ('I', 'W', 'B')


@dataclass(frozen=True)
class AoiMetrics:
    avg_aoi: float
    avg_peak_aoi: float


def check_rate_and_waits(lam, **waits):
    if not (math.isfinite(lam) and lam > 0):
        raise ParameterDomainError('lambda', lam, 'must be finite and > 0')
    for name, value in waits.items():
        if not (math.isfinite(value) and value >= 0):
            raise ParameterDomainError(name, value, 'must be finite and >= 0')


@dataclass(frozen=True)
class QueueConfig11:
    lam: float
    eps_i: float
    dist: ServiceDistribution

    def __post_init__(self):
        check_rate_and_waits(self.lam, eps_i=self.eps_i)

    @cached_property
    def triple(self):
        return mgf_triple(self.dist, self.lam)

    @cached_property
    def residual(self):
        if self.dist.mean() == 0:
            return None
        return residual_stats(self.dist, self.lam)


@dataclass(frozen=True)
class StateProbs11:
    p_i: float
    p_w: float
    p_b: float
    t_cycle: float


# --- integrals shared by both schemes -------------------------------------

def exp_weighted(lam: float, a: float, *terms) -> float:
    """e^{-lam a} * sum(terms); the sum is compensated once lam*a is large."""
    x = lam * a
    s = math.fsum(terms) if x > COMPENSATED_SUM_THRESHOLD else sum(terms)
    return math.exp(-x) * s


def first_moment_below(lam: float, a: float) -> float:
    """Integral of x lam e^{-lam x} over [0, a]."""
    x = lam * a
    return (-math.expm1(-x) - x * math.exp(-x)) / lam


def second_moment_below(lam: float, a: float) -> float:
    """Integral of x^2 lam e^{-lam x} over [0, a]."""
    x = lam * a
    return (-2.0 * math.expm1(-x) - exp_weighted(lam, a, 2.0 * x, x * x)) / lam ** 2


def captured_in_window(lam: float, es: float, r: float) -> float:
    """E[X T; X < r]: the next update lands in the same capture window of residual r."""
    return (r + es) * first_moment_below(lam, r) - second_moment_below(lam, r)


def captured_during_service(lam: float, es: float, m0: float, m1: float, a: float, k: float) -> float:
    """
    E[X T; a <= X < a + S] where T = k + S - X.

    The update arrives while the packet captured at `a` is in service; `k`
    collects everything that is added to its system time beyond the
    remaining service.
    """
    t = a + 1.0 / lam
    p = a * a + 2.0 * a / lam + 2.0 / lam ** 2
    return exp_weighted(lam, a, t * (k + es), -p, -(k * t - p) * m0, -(k - t) * m1)


def arrives_after_service(lam: float, es: float, m0: float, m1: float, a: float, wait: float) -> float:
    """E[X T; X >= a + S] where the update finds the server idle and T = wait + S'."""
    return (wait + es) * exp_weighted(lam, a, (a + 1.0 / lam) * m0, m1)


def captured_in_busy(lam: float, mean_r: float, m0_r: float, m1_r: float, c: float) -> float:
    """E[X T; X < R] where T = R - X + c, R the residual service time."""
    return math.fsum([(mean_r + c) / lam, -2.0 / lam ** 2,
                      (2.0 / lam ** 2 - c / lam) * m0_r, (1.0 / lam - c) * m1_r])


def weighted_sum(probs, values) -> float:
    """sum p*v over states whose conditional applies; zero-probability states are skipped."""
    terms = []
    for p, v in zip(probs, values):
        if v is NotApplicable:
            if p != 0:
                raise NumericalError('conditional is not applicable but its state has probability {}'.format(p))
            continue
        terms.append(p * v)
    return math.fsum(terms)


def peak_from_pieces(pieces: pd.DataFrame) -> float:
    """sum_s p_s E[(X+T)1{i=i*}|s] / sum_s p_s Pr(i=i*|s)."""
    live = pieces[pieces['probability'] > 0]
    num = math.fsum(live['probability'] * live['peak_term'])
    den = math.fsum(live['probability'] * live['peak_prob'])
    return num / den


def finite_or_raise(value: float, what: str, cfg) -> float:
    if not math.isfinite(value):
        raise NumericalError('{} is not finite at {}'.format(what, cfg))
    return value


# --- stationary probabilities ---------------------------------------------

def state_probs_11(cfg: QueueConfig11) -> StateProbs11:
    es = cfg.dist.mean()
    t_cycle = 1.0 / cfg.lam + cfg.eps_i + es
    return StateProbs11(p_i=1.0 / (cfg.lam * t_cycle),
                        p_w=cfg.eps_i / t_cycle,
                        p_b=es / t_cycle,
                        t_cycle=t_cycle)


# --- E[XT | I]: the previous update found the server idle ----------------

def idle_event_e1_11(cfg: QueueConfig11) -> float:
    # arrives during service: held, then waits for the next idle arrival
    lam, e = cfg.lam, cfg.eps_i
    es = cfg.dist.mean()
    m0, m1, _ = cfg.triple
    return captured_during_service(lam, es, m0, m1, e, 2.0 * e + 1.0 / lam + es)


def idle_event_e2_11(cfg: QueueConfig11) -> float:
    return captured_in_window(cfg.lam, cfg.dist.mean(), cfg.eps_i)


def idle_event_e3_11(cfg: QueueConfig11) -> float:
    m0, m1, _ = cfg.triple
    return arrives_after_service(cfg.lam, cfg.dist.mean(), m0, m1, cfg.eps_i, cfg.eps_i)


def exp_xt_given_idle_11(cfg: QueueConfig11) -> float:
    return math.fsum([idle_event_e1_11(cfg), idle_event_e2_11(cfg), idle_event_e3_11(cfg)])


# --- E[XT | W] -------------------------------------------------------------

def _g_coefficients_11(cfg: QueueConfig11) -> (float, float):
    m0 = cfg.triple[0]
    c1 = cfg.eps_i + 1.0 / cfg.lam + cfg.dist.mean()
    c0 = c1 / cfg.lam + m0 / cfg.lam ** 2
    return c0, c1


def g_fn_11(cfg: QueueConfig11, r: float) -> float:
    """E[X_i T_i | the previous update has residual wait r]."""
    if r < 0:
        raise ParameterDomainError('r', r, 'must be >= 0')
    lam, es = cfg.lam, cfg.dist.mean()
    c0, c1 = _g_coefficients_11(cfg)
    return (r + es) / lam - 2.0 / lam ** 2 + exp_weighted(lam, r, c0, c1 * r)


def h_fn_11(cfg: QueueConfig11, x: float) -> float:
    """Antiderivative of g_fn_11."""
    if x < 0:
        raise ParameterDomainError('x', x, 'must be >= 0')
    lam, es = cfg.lam, cfg.dist.mean()
    c0, c1 = _g_coefficients_11(cfg)
    return x * x / (2.0 * lam) + x * (es / lam - 2.0 / lam ** 2) - exp_weighted(lam, x, c0, c1 * x, c1 / lam) / lam


def exp_xt_given_wait_11(cfg: QueueConfig11):
    if cfg.eps_i == 0:
        return NotApplicable
    return (h_fn_11(cfg, cfg.eps_i) - h_fn_11(cfg, 0.0)) / cfg.eps_i


# --- E[XT | B]: the previous update arrived during a service --------------

def busy_event_e4_11(cfg: QueueConfig11) -> float:
    # next update arrives after the residual service and finds the server idle
    res = cfg.residual
    return (cfg.eps_i + cfg.dist.mean()) * (res.mgf_r / cfg.lam + res.mgf_r1)


def busy_event_e5_11(cfg: QueueConfig11) -> float:
    res = cfg.residual
    c = 1.0 / cfg.lam + cfg.eps_i + cfg.dist.mean()
    return captured_in_busy(cfg.lam, res.mean_r, res.mgf_r, res.mgf_r1, c)


def exp_xt_given_busy_11(cfg: QueueConfig11):
    if cfg.residual is None:
        return NotApplicable
    return busy_event_e4_11(cfg) + busy_event_e5_11(cfg)


def xt_by_state_11(cfg: QueueConfig11) -> pd.DataFrame:
    probs = state_probs_11(cfg)
    values = [exp_xt_given_idle_11(cfg), exp_xt_given_wait_11(cfg), exp_xt_given_busy_11(cfg)]
    return pd.DataFrame({'probability': [probs.p_i, probs.p_w, probs.p_b],
                         'exp_xt': [math.nan if v is NotApplicable else v for v in values]},
                        index=pd.Index(STATES_11, name='state'))


def avg_aoi_11(cfg: QueueConfig11) -> float:
    probs = state_probs_11(cfg)
    exp_xt = weighted_sum([probs.p_i, probs.p_w, probs.p_b],
                          [exp_xt_given_idle_11(cfg), exp_xt_given_wait_11(cfg), exp_xt_given_busy_11(cfg)])
    return finite_or_raise(cfg.lam * exp_xt + 1.0 / cfg.lam, 'average AoI', cfg)


# --- peak AoI --------------------------------------------------------------

def peak_probability_11(cfg: QueueConfig11) -> float:
    """Pr(i = i*): fraction of updates that open a service group."""
    return 1.0 / (cfg.lam * state_probs_11(cfg).t_cycle)


def peak_pieces_11(cfg: QueueConfig11) -> pd.DataFrame:
    """Per-state E[(X+T)1{i=i*} | s] and Pr(i=i*|s); an update arriving during B never opens a group."""
    lam, e = cfg.lam, cfg.eps_i
    es = cfg.dist.mean()
    probs = state_probs_11(cfg)

    idle_term = exp_weighted(lam, e, 1.0 / lam + 2.0 * es + 2.0 * e)
    idle_prob = math.exp(-lam * e)
    if e > 0:
        c = e + 1.0 / lam + 2.0 * es
        wait_term = (c * -math.expm1(-lam * e) / lam + first_moment_below(lam, e) / lam) / e
        wait_prob = -math.expm1(-lam * e) / (lam * e)
    else:
        wait_term = wait_prob = math.nan
    return pd.DataFrame({'probability': [probs.p_i, probs.p_w, probs.p_b],
                         'peak_term': [idle_term, wait_term, 0.0],
                         'peak_prob': [idle_prob, wait_prob, 0.0]},
                        index=pd.Index(STATES_11, name='state'))


def avg_peak_aoi_11(cfg: QueueConfig11) -> float:
    lam, e = cfg.lam, cfg.eps_i
    value = e - math.exp(-lam * e) / lam + 2.0 / lam + 2.0 * cfg.dist.mean()
    return finite_or_raise(value, 'average peak AoI', cfg)


def aoi_metrics_11(cfg: QueueConfig11) -> AoiMetrics:
    return AoiMetrics(avg_aoi_11(cfg), avg_peak_aoi_11(cfg))
