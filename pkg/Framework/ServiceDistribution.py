"""
Service-time laws of the status-update server.

Every law is parameterized so that E[S] = 1/mu (Gamma, Inverse Gaussian,
Exponential) or E[S] = c (Deterministic). The analytic engines only ever
consume the MGF triple

    (E[e^{-gS}], E[S e^{-gS}], E[S^2 e^{-gS}])

at g = lambda, plus the statistics of the residual service time seen by a
Poisson arrival during a busy period.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, stats

from Framework.Exceptions import OracleError, ParameterDomainError
from GlobalConfig import VARIATE_CHUNK

logger = logging.getLogger(__name__)


class DistributionKind(Enum):
    GAMMA = 'gamma'
    INVERSE_GAUSSIAN = 'invgauss'
    EXPONENTIAL = 'exp'
    DETERMINISTIC = 'det'


PARAMETER_NAMES = {
    DistributionKind.GAMMA: ('k', 'mu'),
    DistributionKind.INVERSE_GAUSSIAN: ('alpha', 'mu'),
    DistributionKind.EXPONENTIAL: ('mu',),
    DistributionKind.DETERMINISTIC: ('c',),
}

# quantiles used to split the quadrature range so that peaked densities are resolved
_ORACLE_QUANTILES = np.array([1e-9, 1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999, 1 - 1e-6])


@dataclass(frozen=True)
class ServiceDistribution:
    kind: DistributionKind
    params: tuple  # ((name, value), ...) in PARAMETER_NAMES order

    def param(self, name: str) -> float:
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def shape_rate(self) -> (float, float):
        """(k, mu) of the Gamma family; Exponential(mu) is Gamma(1, mu)."""
        if self.kind is DistributionKind.EXPONENTIAL:
            return 1.0, self.param('mu')
        return self.param('k'), self.param('mu')

    def mean(self) -> float:
        if self.kind is DistributionKind.DETERMINISTIC:
            return self.param('c')
        return 1.0 / self.param('mu')

    def second_moment(self) -> float:
        if self.kind is DistributionKind.DETERMINISTIC:
            return self.param('c') ** 2
        mu = self.param('mu')
        if self.kind is DistributionKind.INVERSE_GAUSSIAN:
            return 1.0 / mu ** 2 + 1.0 / (self.param('alpha') * mu ** 3)
        k, _ = self.shape_rate()
        return (k + 1) / (k * mu ** 2)

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def __str__(self):
        return spec_string(self)


@dataclass(frozen=True)
class ResidualStats:
    mgf_r: float
    mgf_r1: float
    mean_r: float


def make_distribution(kind, params=None, **kwargs) -> ServiceDistribution:
    """
    Build a validated ServiceDistribution.

    `kind` is a DistributionKind or its string value; parameters are given
    either as a mapping or as keyword arguments, e.g.
    make_distribution('gamma', k=0.1, mu=0.1).
    """
    try:
        kind = DistributionKind(kind)
    except ValueError:
        raise ParameterDomainError('kind', kind, 'one of {}'.format(
            ', '.join(k.value for k in DistributionKind)))
    values = dict(params or {})
    values.update(kwargs)

    names = PARAMETER_NAMES[kind]
    for name in values:
        if name not in names:
            raise ParameterDomainError(name, values[name], 'not a parameter of {}'.format(kind.value))
    ordered = []
    for name in names:
        if name not in values:
            raise ParameterDomainError(name, None, 'required by {}'.format(kind.value))
        try:
            value = float(values[name])
        except (TypeError, ValueError):
            raise ParameterDomainError(name, values[name], 'must be a number')
        if not math.isfinite(value):
            raise ParameterDomainError(name, value, 'must be finite')
        if name == 'c':
            if value < 0:
                raise ParameterDomainError(name, value, 'must be >= 0')
        elif value <= 0:
            raise ParameterDomainError(name, value, 'must be > 0')
        ordered.append((name, value))
    return ServiceDistribution(kind, tuple(ordered))


def parse_distribution(spec: str) -> ServiceDistribution:
    """Parse "gamma:k=<f>,mu=<f>", "invgauss:alpha=<f>,mu=<f>", "exp:mu=<f>" or "det:c=<f>"."""
    kind, sep, body = spec.strip().partition(':')
    if not sep or not body:
        raise ParameterDomainError('dist', spec, 'expected <kind>:<name>=<value>,...')
    params = {}
    for item in body.split(','):
        name, sep, value = item.partition('=')
        if not sep:
            raise ParameterDomainError('dist', spec, 'malformed parameter {!r}'.format(item))
        if name.strip() in params:
            raise ParameterDomainError(name.strip(), value, 'given twice')
        params[name.strip()] = value.strip()
    return make_distribution(kind.strip().lower(), params)


def spec_string(d: ServiceDistribution) -> str:
    return '{}:{}'.format(d.kind.value, ','.join('{}={:.12g}'.format(n, v) for n, v in d.params))


def mgf_triple(d: ServiceDistribution, gamma: float) -> (float, float, float):
    """(E[e^{-gS}], E[S e^{-gS}], E[S^2 e^{-gS}]) in closed form."""
    if not gamma >= 0:
        raise ParameterDomainError('gamma', gamma, 'must be >= 0')
    if d.kind is DistributionKind.DETERMINISTIC:
        c = d.param('c')
        m = math.exp(-gamma * c)
        return m, c * m, c * c * m

    mu = d.param('mu')
    if d.kind is DistributionKind.INVERSE_GAUSSIAN:
        alpha = d.param('alpha')
        t = 2.0 * gamma / (alpha * mu ** 2)
        q = math.sqrt(1.0 + t)
        # alpha*mu*(1 - q) without the cancellation of 1 - q
        m = math.exp(-alpha * mu * t / (1.0 + q))
        m1 = m / (mu * q)
        m2 = m / (mu * q) ** 2 + m / (alpha * mu ** 3 * q ** 3)
        return m, m1, m2

    k, mu = d.shape_rate()
    z = gamma / (k * mu)
    m = math.exp(-k * math.log1p(z))
    m1 = m / (mu * (1.0 + z))
    m2 = (k + 1) / (k * mu ** 2) * m / (1.0 + z) ** 2
    return m, m1, m2


def one_minus_mgf(d: ServiceDistribution, gamma: float) -> float:
    if d.kind is DistributionKind.DETERMINISTIC:
        return -math.expm1(-gamma * d.param('c'))
    if d.kind is DistributionKind.INVERSE_GAUSSIAN:
        alpha, mu = d.param('alpha'), d.param('mu')
        t = 2.0 * gamma / (alpha * mu ** 2)
        return -math.expm1(-alpha * mu * t / (1.0 + math.sqrt(1.0 + t)))
    k, mu = d.shape_rate()
    return -math.expm1(-k * math.log1p(gamma / (k * mu)))


def residual_stats(d: ServiceDistribution, gamma: float) -> ResidualStats:
    """
    MGF statistics of the residual service time R, whose density is P(S > r)/E[S].

    mgf_r  = (1 - M)/(g E[S])
    mgf_r1 = E[R e^{-gR}] = ((1 - M) - g M1)/(g^2 E[S])
    mean_r = E[S^2]/(2 E[S])
    """
    if not gamma > 0:
        raise ParameterDomainError('gamma', gamma, 'must be > 0; use mean_r for the limit')
    es = d.mean()
    if es <= 0:
        raise ParameterDomainError('mean', es, 'residual time needs E[S] > 0')
    _, m1, _ = mgf_triple(d, gamma)
    one_minus_m = one_minus_mgf(d, gamma)
    return ResidualStats(mgf_r=one_minus_m / (gamma * es),
                         mgf_r1=(one_minus_m - gamma * m1) / (gamma ** 2 * es),
                         mean_r=d.second_moment() / (2 * es))


def scipy_law(d: ServiceDistribution):
    """Frozen scipy.stats law with the same parameterization."""
    if d.kind is DistributionKind.DETERMINISTIC:
        raise ParameterDomainError('kind', d.kind.value, 'has no density')
    if d.kind is DistributionKind.INVERSE_GAUSSIAN:
        alpha, mu = d.param('alpha'), d.param('mu')
        return stats.invgauss(mu=1.0 / (mu * alpha), scale=alpha)
    k, mu = d.shape_rate()
    return stats.gamma(a=k, scale=1.0 / (k * mu))


def sample_many(d: ServiceDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    # numpy's wald() is the Michael-Schucany-Haas transformation and gamma() is
    # Marsaglia-Tsang with the shape-boosting step for k < 1
    if d.kind is DistributionKind.DETERMINISTIC:
        return np.full(size, d.param('c'))
    if d.kind is DistributionKind.INVERSE_GAUSSIAN:
        return rng.wald(1.0 / d.param('mu'), d.param('alpha'), size=size)
    k, mu = d.shape_rate()
    return rng.gamma(k, 1.0 / (k * mu), size=size)


def sample_service(d: ServiceDistribution, rng: np.random.Generator) -> float:
    return float(sample_many(d, rng, 1)[0])


class VariateStream:
    """Endless iterator over i.i.d. variates, drawn from numpy in chunks."""

    def __init__(self, draw, rng: np.random.Generator, chunk: int = VARIATE_CHUNK):
        self.draw = draw
        self.rng = rng
        self.chunk = chunk
        self._buffer = np.empty(0)
        self._pos = 0
        self.drawn = 0

    @classmethod
    def services(cls, d: ServiceDistribution, rng, chunk=VARIATE_CHUNK):
        return cls(lambda g, n: sample_many(d, g, n), rng, chunk)

    @classmethod
    def interarrivals(cls, lam: float, rng, chunk=VARIATE_CHUNK):
        return cls(lambda g, n: g.exponential(1.0 / lam, size=n), rng, chunk)

    def __iter__(self):
        return self

    def __next__(self) -> float:
        if self._pos == len(self._buffer):
            self._buffer = self.draw(self.rng, self.chunk)
            self._pos = 0
        value = self._buffer[self._pos]
        self._pos += 1
        self.drawn += 1
        return float(value)


def mgf_quadrature_oracle(d: ServiceDistribution, gamma: float, order: int = 2, rtol: float = 1e-8) -> tuple:
    """
    Independent check of mgf_triple: integrates s^j e^{-gs} f_S(s) ds for j = 0..order.

    Raises OracleError when scipy's quad reports non-convergence or the achieved
    error exceeds `rtol` relative.
    """
    if not gamma >= 0:
        raise ParameterDomainError('gamma', gamma, 'must be >= 0')
    law = scipy_law(d)
    cuts = law.ppf(_ORACLE_QUANTILES)
    cuts = cuts[np.isfinite(cuts) & (cuts > 0)]
    edges = [0.0] + sorted(set(float(c) for c in cuts)) + [math.inf]

    values = []
    for j in range(order + 1):
        def integrand(s, j=j):
            return s ** j * math.exp(-gamma * s) * law.pdf(s)

        pieces, errors = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            out = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-11, limit=500, full_output=1)
            if len(out) >= 4:
                raise OracleError('quadrature of order {} on [{:.6g}, {:.6g}] failed: {}'.format(
                    j, lo, hi, out[3].strip()), out[1])
            pieces.append(out[0])
            errors.append(out[1])
        total = math.fsum(pieces)
        achieved = math.fsum(errors)
        if achieved > rtol * abs(total):
            raise OracleError('order {} integral not within rtol {:g}'.format(j, rtol), achieved / abs(total))
        values.append(total)
    logger.debug('quadrature oracle for %s at gamma=%g: %s', spec_string(d), gamma, values)
    return tuple(values)
