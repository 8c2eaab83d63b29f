import math

import pytest

from meshgrad import theory


def inputs(**kw):
    base = dict(L=1.0, mu=1.0)
    base.update(kw)
    return theory.BoundInputs(**base)


class TestInputValidation:
    def test_rejects_bad_constants(self):
        with pytest.raises(theory.TheoryError):
            inputs(mu=0.0)
        with pytest.raises(theory.TheoryError):
            inputs(L=0.5, mu=1.0)
        with pytest.raises(theory.TheoryError):
            inputs(rho=1.0)
        with pytest.raises(theory.TheoryError):
            inputs(delta=-1.0)
        with pytest.raises(theory.TheoryError):
            inputs(K=-1)
        with pytest.raises(theory.TheoryError):
            inputs(epsilon=0.0)


class TestStepSize:
    def test_k_zero_is_half_inverse_smoothness(self):
        assert theory.stepsize_thm1(inputs(L=1.0, K=0, rho=0.7, delta=3.0)) == 0.5
        assert theory.stepsize_thm1(inputs(L=4.0, mu=1.0, K=0)) == 0.125

    def test_hand_worked_denominator(self):
        # L=2, mu=1, delta=1, rho=0.5, K=2:
        # denom = 2 + 2*1/0.5 + 2*1/0.5 + 0.5*2*3/0.25 = 2+4+4+12 = 22
        b = inputs(L=2.0, mu=1.0, delta=1.0, rho=0.5, K=2)
        assert theory.stepsize_thm1(b) == pytest.approx(1.0 / 44.0)

    def test_worked_example(self):
        # L=2, mu=0.5, delta=1, rho=0.2, K=4:
        # denom = 2 + 4*0.5/0.8 + 4*1/0.8 + 0.2*4*3/0.64 = 2+2.5+5+3.75 = 13.25
        b = inputs(L=2.0, mu=0.5, delta=1.0, rho=0.2, K=4)
        assert theory.stepsize_thm1(b) == pytest.approx(1.0 / 26.5)

    def test_never_exceeds_half_inverse_smoothness(self):
        for rho in (0.0, 0.3, 0.9):
            for k in (0, 1, 10):
                b = inputs(L=3.0, mu=0.5, delta=2.0, rho=rho, K=k)
                assert theory.stepsize_thm1(b) <= 1.0 / (2.0 * 3.0) + 1e-15

    def test_decreasing_in_k_and_rho(self):
        etas_k = [theory.stepsize_thm1(inputs(L=2.0, mu=1.0, delta=1.0,
                                              rho=0.5, K=k))
                  for k in range(6)]
        assert all(a > b for a, b in zip(etas_k, etas_k[1:]))
        etas_rho = [theory.stepsize_thm1(inputs(L=2.0, mu=1.0, delta=1.0,
                                                rho=r, K=3))
                    for r in (0.0, 0.3, 0.6, 0.9)]
        assert all(a > b for a, b in zip(etas_rho, etas_rho[1:]))


class TestTrackingBounds:
    def test_fully_connected_reduction(self):
        # rho=0, delta=0: (L/(mu(K+1)) + 1) log(1/(mu eps))
        b = inputs(L=10.0, mu=2.0, K=4, epsilon=1e-3)
        expected = (10.0 / (2.0 * 5) + 1.0) * math.log(1.0 / (2.0 * 1e-3))
        assert theory.rounds_dgt_scvx(b) == pytest.approx(expected)

    def test_hand_worked_network_terms(self):
        # L=4, mu=1, delta=2, rho=0.5, K=1, eps=e^-1/mu:
        # core = 4/2 + 3/0.5 + 0.5*6/0.25 = 2 + 6 + 12 = 20; log term = 1
        b = inputs(L=4.0, mu=1.0, delta=2.0, rho=0.5, K=1,
                   epsilon=math.exp(-1.0))
        assert theory.rounds_dgt_scvx(b) == pytest.approx(20.0)

    def test_pl_reduces_to_scvx_at_beta_zero(self):
        for rho in (0.0, 0.4, 0.9):
            b = inputs(L=6.0, mu=0.5, delta=1.5, rho=rho, K=3, beta=0.0)
            assert theory.rounds_dgt_pl(b) == theory.rounds_dgt_scvx(b)

    def test_pl_beta_increases_count(self):
        lo = inputs(L=6.0, mu=0.5, delta=1.5, rho=0.5, K=3, beta=0.0)
        hi = inputs(L=6.0, mu=0.5, delta=1.5, rho=0.5, K=3, beta=2.0)
        assert theory.rounds_dgt_pl(hi) > theory.rounds_dgt_pl(lo)

    def test_monotone_in_k_rho_delta(self):
        base = dict(L=8.0, mu=1.0, delta=2.0, rho=0.6)
        by_k = [theory.rounds_dgt_scvx(inputs(**base, K=k)) for k in range(5)]
        assert all(a > b for a, b in zip(by_k, by_k[1:]))
        by_rho = [theory.rounds_dgt_scvx(inputs(L=8.0, mu=1.0, delta=2.0,
                                                rho=r, K=2))
                  for r in (0.0, 0.3, 0.6, 0.9)]
        assert all(a < b for a, b in zip(by_rho, by_rho[1:]))
        by_delta = [theory.rounds_dgt_scvx(inputs(L=8.0, mu=1.0, delta=d,
                                                  rho=0.6, K=2))
                    for d in (0.0, 1.0, 4.0)]
        assert all(a < b for a, b in zip(by_delta, by_delta[1:]))

    def test_k_saturation(self):
        # past the network floor, doubling K barely helps
        floor_terms = theory.rounds_dgt_scvx(
            inputs(L=8.0, mu=1.0, delta=2.0, rho=0.6, K=10 ** 6))
        small_k = theory.rounds_dgt_scvx(
            inputs(L=8.0, mu=1.0, delta=2.0, rho=0.6, K=0))
        assert floor_terms < small_k
        nearly = theory.rounds_dgt_scvx(
            inputs(L=8.0, mu=1.0, delta=2.0, rho=0.6, K=10 ** 7))
        assert nearly == pytest.approx(floor_terms, rel=1e-5)


class TestHeterogeneityMargin:
    def test_hand_worked(self):
        assert theory.zeta(inputs(delta=0.5)) == 0.75
        assert theory.zeta(inputs(delta=0.0)) == 1.0

    def test_regime_error_at_boundary(self):
        with pytest.raises(theory.RegimeError):
            theory.zeta(inputs(delta=1.0))
        with pytest.raises(theory.RegimeError):
            theory.rounds_dgd_pl(inputs(delta=2.0))


class TestDgdBounds:
    def test_dgd_pl_hand_worked(self):
        # L=2, mu=1, delta=0 (zeta=1), rho=0.5, K=1, beta=0, eps=e^-1:
        # core = 2/2 + 1/0.5 + 0.25*2/0.25 = 1 + 2 + 2 = 5
        b = inputs(L=2.0, mu=1.0, delta=0.0, rho=0.5, K=1,
                   epsilon=math.exp(-1.0))
        assert theory.rounds_dgd_pl(b) == pytest.approx(5.0)

    def test_dgd_ols_hand_worked(self):
        # L=4, mu=2, delta=2, rho=0.5, K=1, eps=e^-1:
        # core = 4/(2*2) + 4/(4*0.5) = 1 + 2 = 3; log(1/eps) = 1
        b = inputs(L=4.0, mu=2.0, delta=2.0, rho=0.5, K=1,
                   epsilon=math.exp(-1.0))
        assert theory.rounds_dgd_ols(b) == pytest.approx(3.0)

    def test_ols_log_differs_from_scvx_log(self):
        # the interpolation bounds carry log(1/eps), not log(1/(mu eps))
        b = inputs(L=4.0, mu=2.0, delta=0.0, rho=0.0, K=0, epsilon=1e-4)
        assert theory.rounds_dgt_ols(b) == pytest.approx(
            theory.rounds_dgt_scvx(b) * math.log(1e4) / math.log(1e4 / 2.0))

    def test_dgd_ols_allows_large_delta(self):
        # no restricted-heterogeneity requirement in the interpolation regime
        b = inputs(L=4.0, mu=1.0, delta=10.0, rho=0.5, K=0)
        assert theory.rounds_dgd_ols(b) > 0

    def test_tracking_beats_dgd_on_sparse_networks(self):
        # delta^2/mu^2 scaling makes plain DGD pay more as delta grows
        for rho in (0.5, 0.9):
            b = inputs(L=10.0, mu=0.1, delta=5.0, rho=rho, K=2)
            assert theory.rounds_dgt_ols(b) < theory.rounds_dgd_ols(b)

    def test_dgd_can_win_when_nearly_homogeneous(self):
        # tiny delta, well-connected: DGD's bound drops below tracking's
        b = inputs(L=10.0, mu=1.0, delta=0.01, rho=0.95, K=0)
        assert theory.rounds_dgd_ols(b) < theory.rounds_dgt_ols(b)


class TestOptimalK:
    def test_hand_worked(self):
        # L=10, mu=1, delta=1, rho=1/9... pick exact floors:
        # rho=0.5, L=10, mu=2, delta=2: 10*0.25/(0.5*8+2+2) = 2.5/8 = 0 K
        b = inputs(L=10.0, mu=2.0, delta=2.0, rho=0.5)
        assert theory.optimal_k(b) == 0

    def test_fully_connected_homogeneous(self):
        # rho=0, delta=0: K_star = floor(L/mu)
        assert theory.optimal_k(inputs(L=10.0, mu=2.0)) == 5
        assert theory.optimal_k(inputs(L=7.0, mu=2.0)) == 3

    def test_vanishes_for_poor_connectivity(self):
        b = inputs(L=10.0, mu=1.0, delta=1.0, rho=0.999)
        assert theory.optimal_k(b) == 0

    def test_vanishes_for_large_heterogeneity(self):
        b = inputs(L=10.0, mu=1.0, delta=1000.0, rho=0.0)
        assert theory.optimal_k(b) == 0

    def test_monotone_decreasing_in_rho(self):
        ks = [theory.optimal_k(inputs(L=100.0, mu=1.0, delta=1.0, rho=r))
              for r in (0.0, 0.2, 0.5, 0.8)]
        assert all(a >= b for a, b in zip(ks, ks[1:]))
        assert ks[0] > ks[-1]
