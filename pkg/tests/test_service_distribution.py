import math

import numpy as np
import pytest
from scipy import integrate, stats

from Framework.Exceptions import ParameterDomainError
from Framework.ServiceDistribution import (DistributionKind, VariateStream, make_distribution, mgf_quadrature_oracle,
                                           mgf_triple, one_minus_mgf, parse_distribution, residual_stats,
                                           sample_many, sample_service, scipy_law, spec_string)

LAWS = [
    'exp:mu=1',
    'gamma:k=0.5,mu=0.2',
    'gamma:k=2,mu=0.1',
    'invgauss:alpha=1,mu=0.5',
    'invgauss:alpha=0.1,mu=0.1',
]


class TestParsing:
    @pytest.mark.parametrize('spec,kind,mean', [
        ('exp:mu=2', DistributionKind.EXPONENTIAL, 0.5),
        ('gamma:k=0.1,mu=0.1', DistributionKind.GAMMA, 10.0),
        ('invgauss:alpha=1,mu=0.5', DistributionKind.INVERSE_GAUSSIAN, 2.0),
        ('det:c=3', DistributionKind.DETERMINISTIC, 3.0),
        (' GAMMA : k = 2 , mu = 4 ', DistributionKind.GAMMA, 0.25),
    ])
    def test_parse(self, spec, kind, mean):
        d = parse_distribution(spec)
        assert d.kind is kind
        assert d.mean() == pytest.approx(mean)

    @pytest.mark.parametrize('spec', LAWS + ['det:c=0', 'det:c=1.5'])
    def test_spec_string_reparses(self, spec):
        d = parse_distribution(spec)
        assert parse_distribution(spec_string(d)) == d
        assert str(d) == spec_string(d)

    @pytest.mark.parametrize('spec', [
        'gamma', 'gamma:', 'gamma:k=2', 'gamma:k=0,mu=1', 'gamma:k=2,mu=-1', 'exp:mu=nan', 'exp:mu=inf',
        'weibull:k=1', 'exp:rate=1', 'exp:mu=abc', 'det:c=-1', 'gamma:k=1,k=2,mu=1', 'exp:mu',
    ])
    def test_rejects(self, spec):
        with pytest.raises(ParameterDomainError):
            parse_distribution(spec)

    def test_keyword_and_mapping_forms_agree(self):
        assert make_distribution('gamma', k=2, mu=1) == make_distribution(DistributionKind.GAMMA, {'mu': 1, 'k': 2})


class TestMoments:
    @pytest.mark.parametrize('spec', LAWS)
    def test_against_scipy(self, spec):
        d = parse_distribution(spec)
        law = scipy_law(d)
        assert d.mean() == pytest.approx(law.mean(), rel=1e-12)
        assert d.second_moment() == pytest.approx(law.moment(2), rel=1e-10)
        assert d.variance() == pytest.approx(law.var(), rel=1e-10)

    def test_deterministic(self):
        d = make_distribution('det', c=2.0)
        assert (d.mean(), d.second_moment(), d.variance()) == (2.0, 4.0, 0.0)
        with pytest.raises(ParameterDomainError):
            scipy_law(d)


class TestMgfTriple:
    def test_exponential_example(self):
        assert mgf_triple(make_distribution('gamma', k=1, mu=1), 1.0) == pytest.approx((0.5, 0.25, 0.25), rel=1e-14)

    def test_inverse_gaussian_example(self):
        m = mgf_triple(parse_distribution('invgauss:alpha=0.1,mu=0.1'), 1.0)[0]
        assert m == pytest.approx(math.exp(0.01 * (1 - math.sqrt(1 + 2000))), rel=1e-13)

    @pytest.mark.parametrize('spec', LAWS + ['det:c=2'])
    def test_at_zero_rate(self, spec):
        d = parse_distribution(spec)
        m, m1, m2 = mgf_triple(d, 0.0)
        assert m == 1.0
        assert m1 == pytest.approx(d.mean(), rel=1e-14)
        assert m2 == pytest.approx(d.second_moment(), rel=1e-14)

    @pytest.mark.parametrize('spec', LAWS)
    @pytest.mark.parametrize('gamma', [0.01, 0.1, 0.5, 1.0, 5.0])
    def test_matches_quadrature(self, spec, gamma):
        d = parse_distribution(spec)
        expected = mgf_quadrature_oracle(d, gamma)
        assert mgf_triple(d, gamma) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize('spec', LAWS + ['det:c=2'])
    @pytest.mark.parametrize('gamma', [0.1, 1.0])
    def test_derivatives(self, spec, gamma):
        d = parse_distribution(spec)
        h = 1e-5 * gamma
        lo, hi = mgf_triple(d, gamma - h), mgf_triple(d, gamma + h)
        m, m1, m2 = mgf_triple(d, gamma)
        assert -(hi[0] - lo[0]) / (2 * h) == pytest.approx(m1, rel=1e-5)
        assert -(hi[1] - lo[1]) / (2 * h) == pytest.approx(m2, rel=1e-5)

    @pytest.mark.parametrize('spec', LAWS + ['det:c=2'])
    def test_one_minus_mgf_small_rate(self, spec):
        d = parse_distribution(spec)
        gamma = 1e-12
        assert one_minus_mgf(d, gamma) == pytest.approx(gamma * d.mean(), rel=1e-6)
        assert one_minus_mgf(d, 1.0) == pytest.approx(1.0 - mgf_triple(d, 1.0)[0], rel=1e-12)

    def test_negative_rate(self, exp1):
        with pytest.raises(ParameterDomainError):
            mgf_triple(exp1, -0.1)


class TestResidual:
    def test_exponential_is_memoryless(self, exp1):
        res = residual_stats(exp1, 1.0)
        assert res.mgf_r == pytest.approx(0.5, rel=1e-14)
        assert res.mgf_r1 == pytest.approx(0.25, rel=1e-14)
        assert res.mean_r == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize('spec', LAWS)
    @pytest.mark.parametrize('gamma', [0.1, 1.0])
    def test_against_residual_density(self, spec, gamma):
        d = parse_distribution(spec)
        law = scipy_law(d)
        res = residual_stats(d, gamma)

        def moment(j):
            pieces = [integrate.quad(lambda r: r ** j * math.exp(-gamma * r) * law.sf(r) / d.mean(), lo, hi,
                                     limit=500, epsrel=1e-11)[0]
                      for lo, hi in ((0, d.mean()), (d.mean(), 20 * d.mean()), (20 * d.mean(), math.inf))]
            return math.fsum(pieces)

        assert res.mgf_r == pytest.approx(moment(0), rel=1e-7)
        assert res.mgf_r1 == pytest.approx(moment(1), rel=1e-7)

    @pytest.mark.parametrize('gamma', [0.0, -1.0])
    def test_rate_must_be_positive(self, exp1, gamma):
        with pytest.raises(ParameterDomainError):
            residual_stats(exp1, gamma)

    def test_zero_mean(self):
        with pytest.raises(ParameterDomainError):
            residual_stats(make_distribution('det', c=0), 1.0)


class TestSampling:
    @pytest.mark.parametrize('spec', LAWS)
    def test_kolmogorov_smirnov(self, spec):
        d = parse_distribution(spec)
        samples = sample_many(d, np.random.default_rng(11), 20000)
        assert stats.kstest(samples, scipy_law(d).cdf).pvalue > 1e-3

    def test_deterministic(self, rng):
        assert np.all(sample_many(make_distribution('det', c=1.5), rng, 10) == 1.5)

    def test_single_deterministic_draw(self):
        assert sample_service(make_distribution('det', c=3), np.random.default_rng(7)) == 3.0

    def test_single_draw_matches_batch(self):
        d = parse_distribution('gamma:k=2,mu=0.1')
        single = sample_service(d, np.random.default_rng(3))
        assert type(single) is float
        assert single == sample_many(d, np.random.default_rng(3), 1)[0]

    @pytest.mark.parametrize('spec', ['gamma:k=0.1,mu=0.1', 'invgauss:alpha=0.1,mu=0.1'])
    def test_mean_within_three_standard_errors(self, spec):
        d = parse_distribution(spec)
        n = 10 ** 6
        samples = sample_many(d, np.random.default_rng(2024), n)
        assert abs(samples.mean() - d.mean()) <= 3.0 * math.sqrt(d.variance() / n)

    def test_stream_is_chunk_invariant(self):
        small = VariateStream.interarrivals(2.0, np.random.default_rng(5), chunk=7)
        large = VariateStream.interarrivals(2.0, np.random.default_rng(5), chunk=1000)
        assert [next(small) for _ in range(30)] == [next(large) for _ in range(30)]
        assert small.drawn == 30

    def test_stream_yields_floats(self, exp1, rng):
        stream = VariateStream.services(exp1, rng)
        values = [next(stream) for _ in range(5)]
        assert all(type(v) is float and v > 0 for v in values)
