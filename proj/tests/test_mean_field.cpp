// tests/test_mean_field.cpp

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "potts/mean_field.hpp"

using namespace potts;

namespace {

// Default probability by enumerating all 3^steps move sequences of a single
// firm; independent of the transition-matrix propagation in nd_oracle().
double enumerate_default_probability(double p_up, double q_down, int steps, int r_max) {
  const double stay = 1.0 - p_up - q_down;
  double total = 0.0;
  long paths = 1;
  for (int s = 0; s < steps; ++s) paths *= 3;
  for (int start = 1; start <= r_max; ++start) {
    for (long code = 0; code < paths; ++code) {
      long c = code;
      int r = start;
      double w = 1.0 / r_max;
      for (int s = 0; s < steps; ++s) {
        const int move = static_cast<int>(c % 3) - 1;
        c /= 3;
        w *= move == 1 ? p_up : (move == -1 ? q_down : stay);
        if (r == 0) continue;
        if (r == r_max && move == 1) continue;
        r += move;
      }
      if (r == 0) total += w;
    }
  }
  return total;
}

}  // namespace

TEST(MfMap, ZeroCouplingGivesUniform) {
  for (double p : {0.0, 0.2, 0.7}) {
    const UpDown out = mf_map(p, 0.1, 0.0);
    EXPECT_NEAR(out.p_up, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(out.q_down, 1.0 / 3.0, 1e-15);
  }
}

TEST(MfMap, SymmetricPointIsFixedForAnyBeta) {
  for (double beta : {0.0, 1.0, 3.0, 10.0, 100.0, 1e4}) {
    EXPECT_LT(mf_residual(1.0 / 3.0, 1.0 / 3.0, beta), 1e-10) << beta;
  }
}

TEST(MfMap, OrderedFixedPointAtStrongCoupling) {
  double p = 0.5, q = 0.25;
  for (int i = 0; i < 1000; ++i) {
    const UpDown n = mf_map(p, q, 10.0);
    p = n.p_up;
    q = n.q_down;
  }
  EXPECT_GT(p, 0.9);
  EXPECT_LT(mf_residual(p, q, 10.0), 1e-10);
}

TEST(MfJacobian, SymmetricPointIsBetaOverThreeTimesIdentity) {
  // d softmax / d(p, q) at the symmetric point is (beta/3) I analytically.
  for (double beta : {0.5, 2.0, 3.0, 7.0}) {
    const auto J = mf_jacobian(1.0 / 3.0, 1.0 / 3.0, beta);
    EXPECT_NEAR(J[0], beta / 3.0, 1e-8);
    EXPECT_NEAR(J[1], 0.0, 1e-8);
    EXPECT_NEAR(J[2], 0.0, 1e-8);
    EXPECT_NEAR(J[3], beta / 3.0, 1e-8);
  }
}

TEST(SpectralRadius, ComplexPair) {
  EXPECT_NEAR(spectral_radius({0.0, -2.0, 2.0, 0.0}), 2.0, 1e-15);
  EXPECT_NEAR(spectral_radius({0.5, 0.0, 0.0, -0.9}), 0.9, 1e-15);
}

TEST(CriticalBeta, CrossesOneAtThree) { EXPECT_NEAR(critical_beta(), 3.0, 0.01); }

TEST(FixedPoints, ZeroCouplingSingleStablePoint) {
  const auto fps = mf_fixed_points(0.0);
  ASSERT_EQ(fps.points.size(), 1u);
  EXPECT_NEAR(fps.points[0].p_up, 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(fps.points[0].q_down, 1.0 / 3.0, 1e-10);
  EXPECT_TRUE(fps.points[0].stable);
  EXPECT_TRUE(fps.non_converged.empty());
}

TEST(FixedPoints, SymmetricPointLosesStabilityAboveThree) {
  auto symmetric_stable = [](double beta) {
    for (const auto& p : mf_fixed_points(beta).points)
      if (std::abs(p.p_up - 1.0 / 3.0) < 1e-6 && std::abs(p.q_down - 1.0 / 3.0) < 1e-6) return p.stable;
    ADD_FAILURE() << "symmetric point missing at beta=" << beta;
    return false;
  };
  EXPECT_TRUE(symmetric_stable(2.9));
  EXPECT_FALSE(symmetric_stable(3.1));
}

TEST(FixedPoints, StrongCouplingHasThreeOrderedStates) {
  const auto fps = mf_fixed_points(10.0);
  int ordered = 0;
  bool symmetric = false;
  for (const auto& p : fps.points) {
    EXPECT_LE(p.p_up + p.q_down, 1.0 + 1e-12);
    EXPECT_LT(mf_residual(p.p_up, p.q_down, 10.0), 1e-10);
    const double rest = 1.0 - p.p_up - p.q_down;
    if (p.stable && (p.p_up > 0.99 || p.q_down > 0.99 || rest > 0.99)) ++ordered;
    if (std::abs(p.p_up - 1.0 / 3.0) < 1e-6 && std::abs(p.q_down - 1.0 / 3.0) < 1e-6) {
      symmetric = true;
      EXPECT_FALSE(p.stable);
    }
  }
  EXPECT_EQ(ordered, 3);
  EXPECT_TRUE(symmetric);
}

TEST(FixedPoints, RejectsNegativeBeta) { EXPECT_THROW(mf_fixed_points(-1.0), std::invalid_argument); }

TEST(NdOracle, Corners) {
  EXPECT_DOUBLE_EQ(nd_oracle(0.0, 1.0, 8, 7), 1.0);
  EXPECT_DOUBLE_EQ(nd_oracle(1.0, 0.0, 8, 7), 0.0);
  EXPECT_DOUBLE_EQ(nd_oracle(0.0, 0.0, 8, 7), 0.0);
}

TEST(NdOracle, SymmetricPointFrozenValue) {
  // Frozen from an independent Python propagation of the same chain.
  EXPECT_NEAR(nd_oracle(1.0 / 3.0, 1.0 / 3.0, 8, 7), 0.20190737474688095, 1e-14);
}

TEST(NdOracle, AgreesWithPathEnumeration) {
  for (double p : {0.0, 0.1, 0.25, 1.0 / 3.0, 0.6})
    for (double q : {0.0, 0.2, 1.0 / 3.0, 0.4})
      if (p + q <= 1.0) {
        EXPECT_NEAR(nd_oracle(p, q, 8, 7), enumerate_default_probability(p, q, 8, 7), 1e-13) << p << "," << q;
        EXPECT_NEAR(nd_oracle(p, q, 5, 3), enumerate_default_probability(p, q, 5, 3), 1e-13) << p << "," << q;
      }
}

TEST(NdOracle, MonotoneInDownProbability) {
  for (int i = 0; i <= 20; ++i) {
    const double p = i * 0.05;
    double prev = -1.0;
    for (int j = 0; i + j <= 20; ++j) {
      const double v = nd_oracle(p, j * 0.05);
      EXPECT_GE(v, prev - 1e-15) << p << "," << j * 0.05;
      prev = v;
    }
  }
}

TEST(NdOracle, ConservesProbabilityMass) {
  for (double p : {0.0, 0.2, 0.5})
    for (double q : {0.0, 0.3, 0.5}) {
      const auto t = transition_matrix(p, q, 7);
      for (std::size_t r = 0; r < 8; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < 8; ++c) row += t[r * 8 + c];
        EXPECT_NEAR(row, 1.0, 1e-12);
      }
      const auto dist = rating_distribution(p, q, 8, 7);
      double survival = 0.0;
      for (std::size_t r = 1; r < dist.size(); ++r) survival += dist[r];
      EXPECT_NEAR(dist[0] + survival, 1.0, 1e-12);
    }
}

TEST(NdOracle, RejectsInvalidProbabilities) {
  EXPECT_THROW(nd_oracle(-0.1, 0.2), std::invalid_argument);
  EXPECT_THROW(nd_oracle(0.7, 0.7), std::invalid_argument);
}

TEST(NdPolynomial, Anchors) {
  for (double q : {0.0, 0.3, 0.9, 1.0}) EXPECT_EQ(nd_polynomial(0.0, q), 0.0);
  EXPECT_DOUBLE_EQ(nd_polynomial(1.0, 0.0), 1.0);
  EXPECT_NEAR(nd_polynomial(1.0 / 3.0, 1.0 / 3.0), 0.202, 0.005);
  EXPECT_NEAR(nd_polynomial(1.0 / 3.0, 1.0 / 3.0), 0.2019073747468809, 1e-14);
}

TEST(NdPolynomial, MatchesOracleAtAnchorsWithSwappedArguments) {
  const std::vector<UpDown> anchors{{0, 0}, {1, 0}, {0, 1}, {1.0 / 3.0, 1.0 / 3.0}};
  for (const auto& a : anchors) EXPECT_NEAR(nd_polynomial(a.q_down, a.p_up), nd_oracle(a.p_up, a.q_down), 5e-3);
}

TEST(NdPolynomial, DeviationGridCoversSimplex) {
  const auto cells = nd_deviation_grid(0.1);
  EXPECT_EQ(cells.size(), 66u);  // 11 * 12 / 2
  for (const auto& c : cells) EXPECT_LE(c.p_up + c.q_down, 1.0 + 1e-12);
}

TEST(FerromagneticAverage, OneThird) {
  EXPECT_DOUBLE_EQ(nd_ferromagnetic_average(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(nd_ferromagnetic_average(8, 7, NdRoute::polynomial), 1.0 / 3.0);
  EXPECT_NEAR(nd_ferromagnetic_average(3, 7), 1.0 / 7.0, 1e-15);
  EXPECT_LT(nd_ferromagnetic_average(3, 7), 1.0 / 3.0);
  EXPECT_THROW(nd_ferromagnetic_average(3, 7, NdRoute::polynomial), std::invalid_argument);
}

TEST(PredictedNd, LevelsOnEitherSideOfTransition) {
  EXPECT_NEAR(predicted_nd_fraction(mf_fixed_points(1.0)), 0.2019073747468809, 1e-9);
  EXPECT_NEAR(predicted_nd_fraction(mf_fixed_points(30.0)), 1.0 / 3.0, 1e-6);
}

TEST(EffectiveBeta, Scalings) {
  EXPECT_DOUBLE_EQ(effective_beta(0.003, 1000, BetaScaling::j0n), 3.0);
  EXPECT_DOUBLE_EQ(effective_beta(0.003, 1000, BetaScaling::bare), 0.003);
  EXPECT_EQ(parse_beta_scaling("bare"), BetaScaling::bare);
  EXPECT_THROW(parse_beta_scaling("x"), std::invalid_argument);
}

TEST(PhasePredict, Regimes) {
  ModelParams p;
  p.n_firms = 1000;
  p.sigma_j = 0.001;
  p.j0 = 0.0001;
  PhasePrediction ph = phase_predict(p);
  EXPECT_EQ(ph.regime, Regime::paramagnetic);
  EXPECT_EQ(ph.j_critical, 3.0 / 1000.0);
  EXPECT_EQ(ph.sigma_glass, 3.0 / std::sqrt(1000.0));
  p.j0 = 0.02;
  EXPECT_EQ(phase_predict(p).regime, Regime::ferromagnetic);
  p.sigma_j = 0.2;
  EXPECT_EQ(phase_predict(p).regime, Regime::spin_glass);
  p.j0 = 0.0;
  EXPECT_EQ(phase_predict(p).regime, Regime::spin_glass);
}
