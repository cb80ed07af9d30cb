#pragma once

#include "glra/glra.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace glra::rrr {

/// Paired samples; row s of xs and ys is one draw of (x, y).
struct SampleSet {
  Matrix xs;  // S x dimF
  Matrix ys;  // S x dimG

  void validate() const;
};

/// Uncentered covariances: C_x = E[x x^T], C_y = E[y y^T], C_xy = E[x y^T].
struct CovarianceBundle {
  Matrix C_x;   // dimF x dimF
  Matrix C_y;   // dimG x dimG
  Matrix C_xy;  // dimF x dimG

  Matrix C_yx() const { return C_xy.transpose(); }
  Index dim_f() const { return C_x.rows(); }
  Index dim_g() const { return C_y.rows(); }

  void validate(const Tolerances& tol = {}) const;
};

/// Weights of E|W_x x - W_A A W_y y|^2: W_x is h1 x dimF, W_A is h1 x h2, W_y is h3 x dimG.
struct Weights {
  Matrix W_x;
  Matrix W_A;
  Matrix W_y;

  static Weights identity(Index dim_f, Index dim_g);
};

struct FitReport {
  double objective_mse = 0.0;
  double minimality_defect = 0.0;
  Uniqueness uniqueness = Uniqueness::UniqueByRank;
  /// |(I - P_ran(C_y^{1/2} W_y^T)) (.)_r|_HS: the existence containment, exact at finite dimension.
  double containment_residual = 0.0;
};

struct RrrModel {
  Matrix A_hat;  // h2 x h3 (dimF x dimG with identity weights)
  Index rank = 1;
  std::optional<Weights> weights;
  FitReport report;

  Index dim_f() const;
  Index dim_g() const;
};

CovarianceBundle empirical_covariances(const SampleSet& s);

/// The GLRA problem equivalent to the regression: B = C_y^{1/2} W_y^T, C = W_A^T,
/// M = (C_y^{1/2})^+ C_yx W_x^T, and the constant offset c so that
/// E|W_x x - W_A A W_y y|^2 = c + |M - B A^T C|_HS^2.
struct AdjointForm {
  GlraProblem problem;
  Matrix cy_sqrt;
  double offset = 0.0;
};

AdjointForm adjoint_form(const CovarianceBundle& cov, Index r, const Weights& w,
                         const Tolerances& tol = {});

/// Rank-r regression of x on y. Solves the adjoint-form GLRA problem and transposes:
/// A_hat = W_A^+ ((C_y^{1/2} W_y^T)^+ (P M P_ran(W_A))_r)^T.
RrrModel fit(const CovarianceBundle& cov, Index r, const std::optional<Weights>& weights,
             const Tolerances& tol = {});

/// Identity-weight closed form ((C_y^{1/2})^+ (P_ran(C_y^{1/2}) (C_y^{1/2})^+ C_yx)_r)^T,
/// computed without going through the GLRA solver.
Matrix unweighted_closed_form(const CovarianceBundle& cov, Index r, const Tolerances& tol = {});

Vector predict(const RrrModel& m, const Vector& y);

/// E|W_x x - W_A A W_y y|^2 from the three-trace expansion over covariances.
double mse_trace(const Matrix& a, const CovarianceBundle& cov, const Weights& w);
double mse_trace(const RrrModel& m, const CovarianceBundle& cov);

/// Same quantity as c + |M - B A^T C|_HS^2.
double mse_adjoint(const Matrix& a, const CovarianceBundle& cov, const Weights& w,
                   const Tolerances& tol = {});

/// (1/S) sum_s |W_x x_s - W_A A W_y y_s|^2.
double mse_monte_carlo(const Matrix& a, const SampleSet& s, const Weights& w);
double mse_monte_carlo(const RrrModel& m, const SampleSet& s);

struct MaximalKernelReport {
  bool applicable = true;  // false for weighted models
  bool passed = false;
  Index kernel_dim = 0;                // dim ker(C_y)
  double annihilation_residual = 0.0;  // |A_hat K|_HS for an orthonormal basis K of ker(C_y)
  double max_mse_gap = 0.0;            // over perturbed models
  Index trials = 0;
  Index shrunk = 0;       // trials whose kernel no longer contains ker(C_y)
  Index nonzero = 0;      // trials with T^T P_ker(C_y) != 0
  std::vector<Index> failing_trials;
};

/// Perturbs A_hat by T^T P_ker(C_y) for seeded random T and checks that the MSE is
/// unchanged while the kernel loses ker(C_y).
MaximalKernelReport maximal_kernel_check(const RrrModel& m, const CovarianceBundle& cov,
                                         Index trials, std::uint64_t seed,
                                         const Tolerances& tol = {});

/// Column-mean subtraction, applied to samples before ingestion.
SampleSet centered(const SampleSet& s);

}  // namespace glra::rrr
