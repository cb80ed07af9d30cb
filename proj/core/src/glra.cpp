#include "glra/glra.hpp"

#include "glra/errors.hpp"
#include "glra/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace glra {

namespace {

std::string shape(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

double top_sum(Vector values, Index r) {
  std::sort(values.data(), values.data() + values.size(), std::greater<>());
  const Index k = std::min<Index>(r, values.size());
  return values.head(k).sum();
}

GlraSolution assemble(const GlraProblem& p, const Matrix& truncation, double delta,
                      Uniqueness uniqueness, const Tolerances& tol) {
  GlraSolution sol;
  sol.truncation = truncation;
  sol.X_hat = pinv(p.B, tol) * truncation * pinv(p.C, tol);
  sol.Y = p.B * sol.X_hat * p.C;
  sol.objective = hs_norm(p.M - sol.Y);
  sol.delta = delta;
  sol.uniqueness = uniqueness;
  sol.minimality_defect = minimality_defect(sol.X_hat, p.B, p.C, tol);
  return sol;
}

}  // namespace

void GlraProblem::validate() const {
  if (rank < 1) throw InputError("rank bound must be >= 1");
  require_shape(M.rows() >= 1 && M.cols() >= 1, "M must be non-empty");
  require_shape(B.rows() == M.rows(), "B must have " + std::to_string(M.rows()) +
                                          " rows (rows of M), got " + shape(B));
  require_shape(C.cols() == M.cols(), "C must have " + std::to_string(M.cols()) +
                                          " columns (columns of M), got " + shape(C));
  require_shape(B.cols() >= 1 && C.rows() >= 1, "B and C must be non-empty");
  require_finite(M, "M");
  require_finite(B, "B");
  require_finite(C, "C");
}

Matrix projected_target(const GlraProblem& p, const Tolerances& tol) {
  return proj_range(p.B, tol) * p.M * proj_kernel_perp(p.C, tol);
}

GlraSolution solve(const GlraProblem& p, const Tolerances& tol) {
  p.validate();
  tol.validate();
  const Matrix target = projected_target(p, tol);
  const TruncatedSvd trunc = truncated_svd(target, p.rank, tol);
  const double delta = trunc.factors.sigma.squaredNorm();
  return assemble(p, trunc.reconstruct(), delta, trunc.uniqueness, tol);
}

GlraSolution solve_with_truncation(const GlraProblem& p, const Matrix& truncation,
                                   const Tolerances& tol) {
  p.validate();
  tol.validate();
  const Matrix target = projected_target(p, tol);
  require_shape(truncation.rows() == target.rows() && truncation.cols() == target.cols(),
                "truncation must be " + shape(target) + ", got " + shape(truncation));
  require_finite(truncation, "truncation");
  if (numerical_rank(truncation, tol) > p.rank) {
    throw InputError("truncation has rank above the bound " + std::to_string(p.rank));
  }
  const TruncatedSvd best = truncated_svd(target, p.rank, tol);
  const double optimal_sq = target.squaredNorm() - best.factors.sigma.squaredNorm();
  const double attained_sq = (target - truncation).squaredNorm();
  if (std::abs(attained_sq - optimal_sq) > tol.check_abs * (1.0 + target.squaredNorm())) {
    std::ostringstream msg;
    msg << "truncation is not a rank-" << p.rank << " truncated SVD of the projected target"
        << " (residual^2 " << attained_sq << " vs optimal " << optimal_sq << ")";
    throw InputError(msg.str());
  }
  const double delta = target.squaredNorm() - attained_sq;
  return assemble(p, truncation, delta, best.uniqueness, tol);
}

double objective(const GlraProblem& p, const Matrix& x) {
  p.validate();
  require_shape(x.rows() == p.p() && x.cols() == p.q(),
                "X must be " + std::to_string(p.p()) + "x" + std::to_string(p.q()) + ", got " +
                    shape(x));
  return hs_norm(p.M - p.B * x * p.C);
}

Matrix canonicalize(const Matrix& x, const Matrix& b, const Matrix& c, const Tolerances& tol) {
  require_shape(x.rows() == b.cols(), "X must have " + std::to_string(b.cols()) +
                                          " rows (columns of B), got " + shape(x));
  require_shape(x.cols() == c.rows(), "X must have " + std::to_string(c.rows()) +
                                          " columns (rows of C), got " + shape(x));
  return proj_kernel_perp(b, tol) * x * proj_range(c, tol);
}

double minimality_defect(const Matrix& x, const Matrix& b, const Matrix& c,
                         const Tolerances& tol) {
  return hs_norm(x - canonicalize(x, b, c, tol));
}

Matrix solution_set_sample(const GlraSolution& sol, const GlraProblem& p, const Matrix& t,
                           const Matrix& s, const Tolerances& tol) {
  const Index pp = p.p();
  const Index qq = p.q();
  require_shape(t.rows() == pp && t.cols() == qq,
                "T must be " + std::to_string(pp) + "x" + std::to_string(qq));
  require_shape(s.rows() == pp && s.cols() == qq,
                "S must be " + std::to_string(pp) + "x" + std::to_string(qq));
  require_shape(sol.X_hat.rows() == pp && sol.X_hat.cols() == qq,
                "solution does not match the problem shape");
  const Matrix ker_b = Matrix::Identity(pp, pp) - proj_kernel_perp(p.B, tol);
  const Matrix ran_c_perp = Matrix::Identity(qq, qq) - proj_range(p.C, tol);
  return sol.X_hat + ker_b * t + s * ran_c_perp;
}

double OptimalError::max_discrepancy() const {
  const std::array<double, 4> all{delta, delta_variants[0], delta_variants[1], delta_variants[2]};
  const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
  return *hi - *lo;
}

OptimalError optimal_error(const GlraProblem& p, const Tolerances& tol) {
  p.validate();
  tol.validate();
  OptimalError out;
  const Matrix target = projected_target(p, tol);
  const Vector sigma = svd(target).sigma;
  out.delta = sigma.head(std::min<Index>(p.rank, sigma.size())).squaredNorm();

  const Matrix pb = proj_range(p.B, tol);
  const Matrix cdc = pinv(p.C, tol) * p.C;
  const Matrix& m = p.M;

  out.delta_variants[0] = top_sum(svd(pb * m * cdc * m.transpose() * pb).sigma, p.rank);
  out.delta_variants[1] = top_sum(svd(cdc * m.transpose() * pb * m * cdc).sigma, p.rank);

  const Matrix k = pinv(p.B, tol) * m * cdc * m.transpose() * p.B;
  Eigen::EigenSolver<Matrix> eig(k, /*computeEigenvectors=*/false);
  out.delta_variants[2] = top_sum(eig.eigenvalues().real(), p.rank);

  out.error = std::sqrt(std::max(0.0, m.squaredNorm() - out.delta));
  return out;
}

GlraProblem adjoint_problem(const GlraProblem& p) {
  return GlraProblem{p.M.transpose(), p.C.transpose(), p.B.transpose(), p.rank};
}

GlraSolution solve_adjoint(const GlraProblem& p, const Tolerances& tol) {
  return solve(adjoint_problem(p), tol);
}

Uniqueness classify_uniqueness(const GlraProblem& p, const Tolerances& tol) {
  p.validate();
  return truncated_svd(projected_target(p, tol), p.rank, tol).uniqueness;
}

double als_oracle(const GlraProblem& p, const AlsOptions& options, const Tolerances& tol) {
  p.validate();
  if (options.restarts < 1 || options.iters < 1) {
    throw InputError("als_oracle: restarts and iters must be >= 1");
  }
  const Matrix b_pinv = pinv(p.B, tol);
  const Matrix c_pinv = pinv(p.C, tol);
  const Index r = p.rank;

  double best = std::numeric_limits<double>::infinity();
  for (Index restart = 0; restart < options.restarts; ++restart) {
    auto rng = random::engine(options.seed, static_cast<std::uint64_t>(restart));
    Matrix v = random::gaussian(p.q(), r, rng);
    Matrix u(p.p(), r);
    for (Index it = 0; it < options.iters; ++it) {
      const Matrix k = v.transpose() * p.C;
      u = b_pinv * p.M * pinv(k, tol);
      const Matrix l = p.B * u;
      v = (pinv(l, tol) * p.M * c_pinv).transpose();
    }
    const double value = hs_norm(p.M - p.B * u * v.transpose() * p.C);
    // Strict comparison keeps the lowest restart index on ties.
    if (value < best) best = value;
  }
  return best;
}

}  // namespace glra
