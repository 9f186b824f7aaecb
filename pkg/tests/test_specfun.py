import math

import numpy as np
import pytest
from scipy.special import gammaln

from wishminors import DomainError, log_multigamma, log_multigamma_ratio

LOG_PI = math.log(math.pi)


class TestLogMultigamma:
    def test_univariate_integer(self):
        assert log_multigamma(1, 2.0) == 0.0

    def test_order_two(self):
        # sqrt(pi) * Gamma(2) * Gamma(3/2) = pi/2
        assert log_multigamma(2, 2.0) == pytest.approx(math.log(math.pi / 2), abs=1e-13)

    def test_order_three(self):
        # pi^{3/2} * Gamma(3) * Gamma(5/2) * Gamma(2) = (3/2) pi^2
        want = math.log(1.5) + 2 * LOG_PI
        assert log_multigamma(3, 3.0) == pytest.approx(want, abs=1e-13)

    def test_matches_direct_product(self):
        for p in range(1, 11):
            for beta in np.linspace((p - 1) / 2 + 0.1, (p - 1) / 2 + 25, 20):
                want = p * (p - 1) / 4 * LOG_PI + sum(
                    float(gammaln(beta - j / 2)) for j in range(p)
                )
                assert log_multigamma(p, beta) == pytest.approx(want, abs=1e-11)

    def test_recursion(self):
        # Gamma_p(b) = pi^{(p-1)/2} Gamma(b) Gamma_{p-1}(b - 1/2)
        for p in range(2, 11):
            for beta in np.linspace((p - 1) / 2 + 0.05, (p - 1) / 2 + 30, 50):
                lhs = log_multigamma(p, beta)
                rhs = (
                    (p - 1) / 2 * LOG_PI
                    + float(gammaln(beta))
                    + log_multigamma(p - 1, beta - 0.5)
                )
                assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_pole_boundary_rejected(self):
        with pytest.raises(DomainError):
            log_multigamma(3, 1.0)
        with pytest.raises(DomainError):
            log_multigamma(2, 0.5)

    def test_bad_order_rejected(self):
        with pytest.raises(DomainError):
            log_multigamma(0, 1.0)


class TestLogMultigammaRatio:
    def test_trivial_shift(self):
        assert log_multigamma_ratio(1, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_zero_shift_exact(self):
        assert log_multigamma_ratio(3, 2.5, 0.0) == 0.0

    def test_univariate_half_integer(self):
        # Gamma(3.5)/Gamma(1.5) = 2.5 * 1.5
        assert log_multigamma_ratio(1, 1.5, 2.0) == pytest.approx(
            math.log(15 / 4), abs=1e-13
        )

    def test_order_two(self):
        # Gamma(2.5)Gamma(2) / (Gamma(1.5)Gamma(1)) = 1.5
        assert log_multigamma_ratio(2, 1.5, 1.0) == pytest.approx(
            math.log(1.5), abs=1e-13
        )

    def test_consistency_with_direct_difference(self):
        for p in (1, 2, 4, 7):
            base = (p - 1) / 2
            for beta in np.linspace(base + 0.2, base + 12, 15):
                for shift in (0.25, 1.0, 3.5, 10.0):
                    want = log_multigamma(p, beta + shift) - log_multigamma(p, beta)
                    got = log_multigamma_ratio(p, beta, shift)
                    assert got == pytest.approx(want, abs=1e-11)

    def test_monotone_in_shift(self):
        # the ratio grows with shift once every lgamma argument sits past
        # the digamma zero; beta - (p-1)/2 >= 1.5 is a safe bright line.
        # (near the pole the ratio genuinely dips first: psi(0.6) < 0.)
        for p in (1, 2, 5):
            for beta in ((p - 1) / 2 + 1.5, (p - 1) / 2 + 4.0):
                values = [
                    log_multigamma_ratio(p, beta, s) for s in np.linspace(0, 8, 33)
                ]
                assert all(b >= a for a, b in zip(values, values[1:]))

    def test_not_monotone_near_pole(self):
        # documents the dip: for beta just above the pole the first steps
        # of the ratio are negative
        assert log_multigamma_ratio(1, 0.6, 0.25) < 0.0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            log_multigamma_ratio(2, 0.5, 1.0)
        with pytest.raises(DomainError):
            log_multigamma_ratio(1, 1.0, -0.5)
