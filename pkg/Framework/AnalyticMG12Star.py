"""
Average AoI and average peak AoI of the M/GI/1/2* server: one buffer slot
holding the freshest waiting update, a wait of eps_i after an idle period
and a wait of eps_b after a busy period before each service.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import pandas as pd

from Framework.AnalyticMG11 import (AoiMetrics, arrives_after_service, captured_during_service, captured_in_busy,
                                    captured_in_window, check_rate_and_waits, exp_weighted, finite_or_raise,
                                    first_moment_below, weighted_sum)
from Framework.Exceptions import NotApplicable, NumericalError, ParameterDomainError
from Framework.ServiceDistribution import ServiceDistribution, mgf_triple, one_minus_mgf, residual_stats

logger = logging.getLogger(__name__)

STATES_2S = ('I', 'WaI', 'B', 'WaB')


@dataclass(frozen=True)
class QueueConfig2s:
    lam: float
    eps_i: float
    eps_b: float
    dist: ServiceDistribution

    def __post_init__(self):
        check_rate_and_waits(self.lam, eps_i=self.eps_i, eps_b=self.eps_b)

    @cached_property
    def triple(self):
        return mgf_triple(self.dist, self.lam)

    @cached_property
    def residual(self):
        if self.dist.mean() == 0:
            return None
        return residual_stats(self.dist, self.lam)


@dataclass(frozen=True)
class StateProbs2s:
    p_i: float
    p_wai: float
    p_b: float
    p_wab: float
    t_cycle: float


def state_probs_2s(cfg: QueueConfig2s) -> StateProbs2s:
    """
    A busy cycle ends when no update arrives during a service, which happens
    with probability M = E[e^{-lam S}]; the number of services per cycle is
    geometric with mean 1/M and every service but the last is preceded by a
    WaB period.
    """
    lam, es = cfg.lam, cfg.dist.mean()
    m0 = cfg.triple[0]
    if m0 == 0:
        raise NumericalError('E[exp(-lam S)] underflows at {}'.format(cfg))
    extra_services = one_minus_mgf(cfg.dist, lam) / m0
    t_cycle = 1.0 / lam + cfg.eps_i + cfg.eps_b * extra_services + es / m0
    return StateProbs2s(p_i=1.0 / (lam * t_cycle),
                        p_wai=cfg.eps_i / t_cycle,
                        p_b=es / (t_cycle * m0),
                        p_wab=cfg.eps_b * extra_services / t_cycle,
                        t_cycle=t_cycle)


# --- E[XT | I] -------------------------------------------------------------

def idle_event_e1_2s(cfg: QueueConfig2s) -> float:
    # buffered during the service, served after a WaB period
    es = cfg.dist.mean()
    m0, m1, _ = cfg.triple
    return captured_during_service(cfg.lam, es, m0, m1, cfg.eps_i, cfg.eps_i + cfg.eps_b + es)


def idle_event_e2_2s(cfg: QueueConfig2s) -> float:
    return captured_in_window(cfg.lam, cfg.dist.mean(), cfg.eps_i)


def idle_event_e3_2s(cfg: QueueConfig2s) -> float:
    m0, m1, _ = cfg.triple
    return arrives_after_service(cfg.lam, cfg.dist.mean(), m0, m1, cfg.eps_i, cfg.eps_i)


def exp_xt_given_idle_2s(cfg: QueueConfig2s) -> float:
    return math.fsum([idle_event_e1_2s(cfg), idle_event_e2_2s(cfg), idle_event_e3_2s(cfg)])


# --- E[XT | WaI], E[XT | WaB] ---------------------------------------------

def _after_wait_bracket(cfg: QueueConfig2s) -> float:
    m0 = cfg.triple[0]
    return cfg.eps_b + cfg.dist.mean() + m0 * (cfg.eps_i - cfg.eps_b + 1.0 / cfg.lam)


def _g_coefficients_2s(cfg: QueueConfig2s) -> (float, float):
    lam, es = cfg.lam, cfg.dist.mean()
    m0, m1, _ = cfg.triple
    shift = cfg.eps_i - cfg.eps_b
    c1 = _after_wait_bracket(cfg)
    c0 = (cfg.eps_b + es) / lam + m0 * (shift / lam + 2.0 / lam ** 2) + m1 * (shift + 1.0 / lam)
    return c0, c1


def g_fn_2s(cfg: QueueConfig2s, r: float) -> float:
    """E[X_i T_i | the previous update has residual wait r], in either waiting state."""
    if r < 0:
        raise ParameterDomainError('r', r, 'must be >= 0')
    lam, es = cfg.lam, cfg.dist.mean()
    c0, c1 = _g_coefficients_2s(cfg)
    return (r + es) / lam - 2.0 / lam ** 2 + exp_weighted(lam, r, c0, c1 * r)


def h_fn_2s(cfg: QueueConfig2s, x: float) -> float:
    """Antiderivative of g_fn_2s."""
    if x < 0:
        raise ParameterDomainError('x', x, 'must be >= 0')
    lam, es = cfg.lam, cfg.dist.mean()
    c0, c1 = _g_coefficients_2s(cfg)
    return x * x / (2.0 * lam) + x * (es / lam - 2.0 / lam ** 2) - exp_weighted(lam, x, c0, c1 * x, c1 / lam) / lam


def _window_average(cfg: QueueConfig2s, eps: float):
    if eps == 0:
        return NotApplicable
    return (h_fn_2s(cfg, eps) - h_fn_2s(cfg, 0.0)) / eps


def exp_xt_given_wai_2s(cfg: QueueConfig2s):
    return _window_average(cfg, cfg.eps_i)


def exp_xt_given_wab_2s(cfg: QueueConfig2s):
    return _window_average(cfg, cfg.eps_b)


# --- E[XT | B] -------------------------------------------------------------

def system_time_after_wait_2s(cfg: QueueConfig2s, r: float) -> float:
    """E[T_i | the previous update has residual wait r]."""
    lam = cfg.lam
    return r + cfg.dist.mean() - 1.0 / lam + exp_weighted(lam, r, _after_wait_bracket(cfg))


def busy_event_e4_gap_2s(cfg: QueueConfig2s) -> float:
    """E[(X - R) T; X > R]: past the residual service the previous update waits eps_b."""
    return cfg.residual.mgf_r * g_fn_2s(cfg, cfg.eps_b)


def busy_event_e4_residual_2s(cfg: QueueConfig2s) -> float:
    """E[R T; X > R]."""
    return cfg.residual.mgf_r1 * system_time_after_wait_2s(cfg, cfg.eps_b)


def busy_event_e5_2s(cfg: QueueConfig2s) -> float:
    res = cfg.residual
    return captured_in_busy(cfg.lam, res.mean_r, res.mgf_r, res.mgf_r1, cfg.eps_b + cfg.dist.mean())


def exp_xt_given_busy_2s(cfg: QueueConfig2s):
    if cfg.residual is None:
        return NotApplicable
    return math.fsum([busy_event_e4_gap_2s(cfg), busy_event_e4_residual_2s(cfg), busy_event_e5_2s(cfg)])


def _conditionals_2s(cfg: QueueConfig2s):
    probs = state_probs_2s(cfg)
    return ([probs.p_i, probs.p_wai, probs.p_b, probs.p_wab],
            [exp_xt_given_idle_2s(cfg), exp_xt_given_wai_2s(cfg), exp_xt_given_busy_2s(cfg),
             exp_xt_given_wab_2s(cfg)])


def xt_by_state_2s(cfg: QueueConfig2s) -> pd.DataFrame:
    probs, values = _conditionals_2s(cfg)
    return pd.DataFrame({'probability': probs,
                         'exp_xt': [math.nan if v is NotApplicable else v for v in values]},
                        index=pd.Index(STATES_2S, name='state'))


def avg_aoi_2s(cfg: QueueConfig2s) -> float:
    probs, values = _conditionals_2s(cfg)
    return finite_or_raise(cfg.lam * weighted_sum(probs, values) + 1.0 / cfg.lam, 'average AoI', cfg)


# --- peak AoI --------------------------------------------------------------

def peak_probability_2s(cfg: QueueConfig2s) -> float:
    return 1.0 / (cfg.lam * cfg.triple[0] * state_probs_2s(cfg).t_cycle)


def _peak_constant(cfg: QueueConfig2s) -> float:
    m0 = cfg.triple[0]
    return 2.0 * cfg.dist.mean() + cfg.eps_b + m0 * (1.0 / cfg.lam + cfg.eps_i - cfg.eps_b)


def g_peak_2s(cfg: QueueConfig2s, r: float) -> float:
    """E[(X_i + T_i) 1{i=i*} | the previous update has residual wait r]."""
    return exp_weighted(cfg.lam, r, _peak_constant(cfg), r)


def _g_peak_average(cfg: QueueConfig2s, eps: float) -> (float, float):
    if eps == 0:
        return math.nan, math.nan
    lam = cfg.lam
    opened = -math.expm1(-lam * eps)
    integral = _peak_constant(cfg) * opened / lam + first_moment_below(lam, eps) / lam
    return integral / eps, opened / (lam * eps)


def peak_pieces_2s(cfg: QueueConfig2s) -> pd.DataFrame:
    lam = cfg.lam
    probs = state_probs_2s(cfg)
    wai_term, wai_prob = _g_peak_average(cfg, cfg.eps_i)
    wab_term, wab_prob = _g_peak_average(cfg, cfg.eps_b)
    if cfg.residual is None:
        busy_term = busy_prob = math.nan
    else:
        res = cfg.residual
        busy_term = g_peak_2s(cfg, cfg.eps_b) * res.mgf_r + math.exp(-lam * cfg.eps_b) * res.mgf_r1
        busy_prob = math.exp(-lam * cfg.eps_b) * res.mgf_r
    return pd.DataFrame({'probability': [probs.p_i, probs.p_wai, probs.p_b, probs.p_wab],
                         'peak_term': [g_peak_2s(cfg, cfg.eps_i), wai_term, busy_term, wab_term],
                         'peak_prob': [math.exp(-lam * cfg.eps_i), wai_prob, busy_prob, wab_prob]},
                        index=pd.Index(STATES_2S, name='state'))


def avg_peak_aoi_2s(cfg: QueueConfig2s) -> float:
    lam, e_i, e_b = cfg.lam, cfg.eps_i, cfg.eps_b
    m0, m1, _ = cfg.triple
    value = math.fsum([e_b * one_minus_mgf(cfg.dist, lam), -m1 * math.exp(-lam * e_b), m0 * e_i,
                       -m0 / lam * math.exp(-lam * e_i), 2.0 * cfg.dist.mean(), (1.0 + m0) / lam])
    return finite_or_raise(value, 'average peak AoI', cfg)


def aoi_metrics_2s(cfg: QueueConfig2s) -> AoiMetrics:
    return AoiMetrics(avg_aoi_2s(cfg), avg_peak_aoi_2s(cfg))
