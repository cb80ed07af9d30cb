#include "glra/errors.hpp"
#include "glra/rrr.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace glra;
using namespace glra::rrr;

namespace {

constexpr double kTol = 1e-10;

SampleSet data(std::uint64_t seed, Index f, Index g, Index y_rank, Index samples = 400) {
  auto rng = random::engine(seed, 20);
  return support::regression_data(rng, samples, f, g, y_rank);
}

}  // namespace

TEST(Covariance, UncenteredEmpiricalMoments) {
  SampleSet s;
  s.xs.resize(2, 1);
  s.xs << 1, 3;
  s.ys.resize(2, 2);
  s.ys << 1, 0, 1, 2;
  const CovarianceBundle c = empirical_covariances(s);
  EXPECT_DOUBLE_EQ(c.C_x(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(c.C_xy(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(c.C_xy(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(c.C_y(1, 1), 2.0);
  EXPECT_DOUBLE_EQ(c.C_y(0, 1), 1.0);
}

TEST(Covariance, RejectsMismatchedSamples) {
  SampleSet s{Matrix::Ones(3, 2), Matrix::Ones(4, 2)};
  EXPECT_THROW(empirical_covariances(s), InputError);
}

TEST(Fit, FullRankIsOrdinaryLeastSquares) {
  const SampleSet s = data(1, 3, 4, 4);
  const CovarianceBundle cov = empirical_covariances(s);
  const RrrModel m = fit(cov, 4, std::nullopt);
  const Matrix ols = cov.C_xy * cov.C_y.inverse();
  EXPECT_LT(hs_norm(m.A_hat - ols), 1e-9);
}

TEST(Fit, WhitenedInputsReduceToTruncatedCrossCovariance) {
  // With C_y = I the optimum is the rank-r truncation of C_xy.
  auto rng = random::engine(2);
  const Matrix q = random::orthonormal(400, 4, rng);
  SampleSet s;
  s.ys = q * std::sqrt(400.0);
  s.xs = s.ys * random::gaussian(3, 4, rng).transpose() + random::gaussian(400, 3, rng);
  const CovarianceBundle cov = empirical_covariances(s);
  ASSERT_LT(hs_norm(cov.C_y - Matrix::Identity(4, 4)), 1e-12);
  const RrrModel m = fit(cov, 2, std::nullopt);
  EXPECT_LT(hs_norm(m.A_hat - oracle::truncate(cov.C_xy, 2)), 1e-8);
}

TEST(Fit, IdentityWeightsMatchUnweightedClosedForm) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto rng = random::engine(seed, 21);
    const Index f = random::uniform_index(1, 8, rng);
    const Index g = random::uniform_index(2, 8, rng);
    const SampleSet s = support::regression_data(rng, 500, f, g, random::uniform_index(1, g, rng));
    const CovarianceBundle cov = empirical_covariances(s);
    const Index r = random::uniform_index(1, 3, rng);
    const RrrModel w = fit(cov, r, Weights::identity(f, g));
    const Matrix closed = unweighted_closed_form(cov, r);
    EXPECT_LE((w.A_hat - closed).cwiseAbs().maxCoeff(), 1e-12) << seed;
  }
}

TEST(Fit, MatchesDirectAlsOracle) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto rng = random::engine(seed, 22);
    const Index f = random::uniform_index(1, 6, rng);
    const Index g = random::uniform_index(2, 6, rng);
    const SampleSet s = support::regression_data(rng, 300, f, g, random::uniform_index(1, g, rng));
    const CovarianceBundle cov = empirical_covariances(s);
    const Index r = random::uniform_index(1, 2, rng);
    Weights w = Weights::identity(f, g);
    if (seed % 2 == 1) {
      w.W_x = random::gaussian(f + 1, f, rng);
      w.W_A = random::gaussian(f + 1, f, rng);
      w.W_y = random::gaussian(g, g, rng);
    }
    const RrrModel m = fit(cov, r, w);
    const double als = oracle::rrr_als(cov, w, r, 10, 300, seed);
    EXPECT_LE(m.report.objective_mse, als + 1e-6) << seed;
    EXPECT_NEAR(m.report.objective_mse, mse_trace(m.A_hat, cov, w), 1e-9) << seed;
  }
}

TEST(Mse, TraceAdjointAndLoopAgree) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto rng = random::engine(seed, 23);
    const SampleSet s = support::regression_data(rng, 500, 4, 5, 3);
    const CovarianceBundle cov = empirical_covariances(s);
    Weights w = Weights::identity(4, 5);
    w.W_x = random::gaussian(2, 4, rng);
    w.W_A = random::gaussian(2, 3, rng);
    w.W_y = random::gaussian(3, 5, rng);
    const Matrix a = random::gaussian(3, 3, rng);
    const double loop = oracle::mse_loop(a, s, w);
    EXPECT_NEAR(mse_trace(a, cov, w), loop, 1e-10 * std::max(1.0, loop));
    EXPECT_NEAR(mse_monte_carlo(a, s, w), loop, 1e-10 * std::max(1.0, loop));
    EXPECT_NEAR(mse_adjoint(a, cov, w), loop, 1e-9 * std::max(1.0, loop));
  }
}

TEST(Mse, PerfectFitAtFullRank) {
  auto rng = random::engine(5);
  SampleSet s;
  s.ys = random::gaussian(100, 3, rng);
  s.xs = s.ys;
  const RrrModel m = fit(empirical_covariances(s), 3, std::nullopt);
  EXPECT_LT(mse_trace(m, empirical_covariances(s)), 1e-12);
  EXPECT_LT(mse_monte_carlo(m, s), 1e-12);
}

TEST(MaximalKernel, HoldsForRankDeficientCy) {
  const SampleSet s = data(6, 4, 6, 3);
  const CovarianceBundle cov = empirical_covariances(s);
  const RrrModel m = fit(cov, 2, std::nullopt);
  const MaximalKernelReport rep = maximal_kernel_check(m, cov, 50, 9);
  EXPECT_TRUE(rep.applicable);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.kernel_dim, 3);
  EXPECT_LT(rep.annihilation_residual, kTol);
  EXPECT_EQ(rep.nonzero, 50);
  EXPECT_EQ(rep.shrunk, 50);
  EXPECT_LT(rep.max_mse_gap, kTol);
}

TEST(MaximalKernel, NotApplicableWithGeneralWeights) {
  const SampleSet s = data(7, 2, 3, 3);
  const CovarianceBundle cov = empirical_covariances(s);
  Weights w = Weights::identity(2, 3);
  w.W_x *= 2.0;
  const RrrModel m = fit(cov, 1, w);
  EXPECT_FALSE(maximal_kernel_check(m, cov, 5, 0).applicable);
}

TEST(Predict, AppliesCoefficientMatrix) {
  const SampleSet s = data(8, 2, 3, 3);
  const RrrModel m = fit(empirical_covariances(s), 1, std::nullopt);
  const Vector y = s.ys.row(0).transpose();
  EXPECT_LT((predict(m, y) - m.A_hat * y).norm(), 1e-15);
  EXPECT_THROW(predict(m, Vector::Ones(5)), InputError);
}

TEST(Centering, RemovesColumnMeans) {
  const SampleSet s = centered(data(9, 3, 3, 3));
  EXPECT_LT(s.xs.colwise().mean().norm(), 1e-14);
  EXPECT_LT(s.ys.colwise().mean().norm(), 1e-14);
}

TEST(Duplication, DuplicatedDatasetGivesSameModel) {
  const SampleSet s = data(10, 3, 4, 4, 200);
  SampleSet twice;
  twice.xs.resize(400, 3);
  twice.xs << s.xs, s.xs;
  twice.ys.resize(400, 4);
  twice.ys << s.ys, s.ys;
  const RrrModel a = fit(empirical_covariances(s), 2, std::nullopt);
  const RrrModel b = fit(empirical_covariances(twice), 2, std::nullopt);
  EXPECT_LT(hs_norm(a.A_hat - b.A_hat), 1e-10);
}
