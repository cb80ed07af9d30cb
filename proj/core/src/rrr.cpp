#include "glra/rrr.hpp"

#include "glra/errors.hpp"
#include "glra/random.hpp"

#include <algorithm>
#include <cmath>

namespace glra::rrr {

namespace {

void validate_weights(const Weights& w, Index dim_f, Index dim_g) {
  require_finite(w.W_x, "W_x");
  require_finite(w.W_A, "W_A");
  require_finite(w.W_y, "W_y");
  if (w.W_x.cols() != dim_f) {
    throw InputError("W_x must have " + std::to_string(dim_f) + " columns (dim of x)");
  }
  if (w.W_y.cols() != dim_g) {
    throw InputError("W_y must have " + std::to_string(dim_g) + " columns (dim of y)");
  }
  if (w.W_A.rows() != w.W_x.rows()) {
    throw InputError("W_A must have " + std::to_string(w.W_x.rows()) + " rows (rows of W_x)");
  }
}

void validate_model_shape(const Matrix& a, const Weights& w) {
  if (a.rows() != w.W_A.cols() || a.cols() != w.W_y.rows()) {
    throw InputError("A must be " + std::to_string(w.W_A.cols()) + "x" +
                     std::to_string(w.W_y.rows()));
  }
}

bool is_identity(const Matrix& m) {
  return m.rows() == m.cols() && m == Matrix::Identity(m.rows(), m.cols());
}

Weights model_weights(const RrrModel& m) {
  return m.weights ? *m.weights : Weights::identity(m.A_hat.rows(), m.A_hat.cols());
}

}  // namespace

void SampleSet::validate() const {
  if (xs.rows() < 1) throw InputError("sample set is empty");
  if (xs.rows() != ys.rows()) {
    throw InputError("x and y sample counts differ (" + std::to_string(xs.rows()) + " vs " +
                     std::to_string(ys.rows()) + ")");
  }
  if (xs.cols() < 1 || ys.cols() < 1) throw InputError("samples must have dimension >= 1");
  require_finite(xs, "x samples");
  require_finite(ys, "y samples");
}

void CovarianceBundle::validate(const Tolerances& tol) const {
  if (C_x.rows() != C_x.cols() || C_y.rows() != C_y.cols()) {
    throw InputError("covariances C_x and C_y must be square");
  }
  if (C_xy.rows() != C_x.rows() || C_xy.cols() != C_y.rows()) {
    throw InputError("C_xy must be " + std::to_string(C_x.rows()) + "x" +
                     std::to_string(C_y.rows()));
  }
  require_finite(C_x, "C_x");
  require_finite(C_y, "C_y");
  require_finite(C_xy, "C_xy");
  for (const Matrix* c : {&C_x, &C_y}) {
    if ((*c - c->transpose()).cwiseAbs().maxCoeff() > tol.check_abs) {
      throw DomainError("covariance is not symmetric");
    }
  }
}

Weights Weights::identity(Index dim_f, Index dim_g) {
  return Weights{Matrix::Identity(dim_f, dim_f), Matrix::Identity(dim_f, dim_f),
                 Matrix::Identity(dim_g, dim_g)};
}

Index RrrModel::dim_f() const { return weights ? weights->W_x.cols() : A_hat.rows(); }
Index RrrModel::dim_g() const { return weights ? weights->W_y.cols() : A_hat.cols(); }

CovarianceBundle empirical_covariances(const SampleSet& s) {
  s.validate();
  const double inv = 1.0 / static_cast<double>(s.xs.rows());
  CovarianceBundle cov;
  cov.C_x = inv * (s.xs.transpose() * s.xs);
  cov.C_y = inv * (s.ys.transpose() * s.ys);
  cov.C_xy = inv * (s.xs.transpose() * s.ys);
  cov.C_x = 0.5 * (cov.C_x + cov.C_x.transpose()).eval();
  cov.C_y = 0.5 * (cov.C_y + cov.C_y.transpose()).eval();
  return cov;
}

AdjointForm adjoint_form(const CovarianceBundle& cov, Index r, const Weights& w,
                         const Tolerances& tol) {
  cov.validate(tol);
  validate_weights(w, cov.dim_f(), cov.dim_g());
  AdjointForm out;
  out.cy_sqrt = psd_sqrt(cov.C_y, tol);
  out.problem.B = out.cy_sqrt * w.W_y.transpose();
  out.problem.C = w.W_A.transpose();
  out.problem.M = pinv(out.cy_sqrt, tol) * cov.C_yx() * w.W_x.transpose();
  out.problem.rank = r;
  out.offset = (w.W_x * cov.C_x * w.W_x.transpose()).trace() - out.problem.M.squaredNorm();
  return out;
}

RrrModel fit(const CovarianceBundle& cov, Index r, const std::optional<Weights>& weights,
             const Tolerances& tol) {
  const Weights w = weights ? *weights : Weights::identity(cov.dim_f(), cov.dim_g());
  const AdjointForm form = adjoint_form(cov, r, w, tol);
  const GlraSolution sol = solve(form.problem, tol);

  RrrModel model;
  model.A_hat = sol.X_hat.transpose();
  model.rank = r;
  model.weights = weights;
  model.report.uniqueness = sol.uniqueness;
  model.report.minimality_defect =
      hs_norm(proj_kernel_perp(w.W_A, tol) * model.A_hat * proj_kernel_perp(form.problem.B, tol) -
              model.A_hat);
  const Index m = form.problem.B.rows();
  model.report.containment_residual =
      hs_norm((Matrix::Identity(m, m) - proj_range(form.problem.B, tol)) * sol.truncation);
  model.report.objective_mse = mse_trace(model.A_hat, cov, w);
  return model;
}

Matrix unweighted_closed_form(const CovarianceBundle& cov, Index r, const Tolerances& tol) {
  cov.validate(tol);
  const Matrix s = psd_sqrt(cov.C_y, tol);
  const Matrix s_pinv = pinv(s, tol);
  const Matrix inner = proj_range(s, tol) * s_pinv * cov.C_yx();
  return (s_pinv * truncated_svd(inner, r, tol).reconstruct()).transpose();
}

Vector predict(const RrrModel& m, const Vector& y) {
  if (y.size() != m.A_hat.cols()) {
    throw InputError("predict: y must have length " + std::to_string(m.A_hat.cols()));
  }
  return m.A_hat * y;
}

double mse_trace(const Matrix& a, const CovarianceBundle& cov, const Weights& w) {
  validate_weights(w, cov.dim_f(), cov.dim_g());
  validate_model_shape(a, w);
  const Matrix lin = w.W_A * a * w.W_y;  // h1 x dimG
  const double quad = (lin * cov.C_y * lin.transpose()).trace();
  const double base = (w.W_x * cov.C_x * w.W_x.transpose()).trace();
  const double cross = (lin * cov.C_yx() * w.W_x.transpose()).trace();
  return quad + base - 2.0 * cross;
}

double mse_trace(const RrrModel& m, const CovarianceBundle& cov) {
  return mse_trace(m.A_hat, cov, model_weights(m));
}

double mse_adjoint(const Matrix& a, const CovarianceBundle& cov, const Weights& w,
                   const Tolerances& tol) {
  validate_model_shape(a, w);
  const AdjointForm form = adjoint_form(cov, 1, w, tol);
  const GlraProblem& p = form.problem;
  return form.offset + (p.M - p.B * a.transpose() * p.C).squaredNorm();
}

double mse_monte_carlo(const Matrix& a, const SampleSet& s, const Weights& w) {
  s.validate();
  validate_weights(w, s.xs.cols(), s.ys.cols());
  validate_model_shape(a, w);
  const Matrix lin = w.W_A * a * w.W_y;
  // Rows are samples: residual_s^T = x_s^T W_x^T - y_s^T lin^T.
  const Matrix residual = s.xs * w.W_x.transpose() - s.ys * lin.transpose();
  return residual.squaredNorm() / static_cast<double>(s.xs.rows());
}

double mse_monte_carlo(const RrrModel& m, const SampleSet& s) {
  return mse_monte_carlo(m.A_hat, s, model_weights(m));
}

MaximalKernelReport maximal_kernel_check(const RrrModel& m, const CovarianceBundle& cov,
                                         Index trials, std::uint64_t seed,
                                         const Tolerances& tol) {
  MaximalKernelReport rep;
  if (m.weights && !(is_identity(m.weights->W_x) && is_identity(m.weights->W_A) &&
                     is_identity(m.weights->W_y))) {
    rep.applicable = false;
    return rep;
  }
  const Weights w = Weights::identity(cov.dim_f(), cov.dim_g());
  validate_model_shape(m.A_hat, w);

  const Matrix k = kernel_basis(cov.C_y, tol);
  rep.kernel_dim = k.cols();
  rep.annihilation_residual = hs_norm(m.A_hat * k);
  const Matrix p_ker = k * k.transpose();
  const double base = mse_trace(m.A_hat, cov, w);

  bool ok = rep.annihilation_residual <= tol.check_abs;
  rep.trials = std::max<Index>(trials, 0);
  for (Index t = 0; t < rep.trials; ++t) {
    auto rng = random::engine(seed, static_cast<std::uint64_t>(t));
    const Matrix tmat = random::gaussian(cov.dim_g(), cov.dim_f(), rng);
    const Matrix pert = tmat.transpose() * p_ker;
    const Matrix perturbed = m.A_hat + pert;
    const double gap = std::abs(mse_trace(perturbed, cov, w) - base);
    rep.max_mse_gap = std::max(rep.max_mse_gap, gap);
    const bool nonzero = hs_norm(pert) > tol.check_abs;
    const bool shrunk = hs_norm(perturbed * k) > tol.check_abs;
    if (nonzero) ++rep.nonzero;
    if (shrunk) ++rep.shrunk;
    if (gap > tol.check_abs || (nonzero && !shrunk)) {
      ok = false;
      rep.failing_trials.push_back(t);
    }
  }
  rep.passed = ok;
  return rep;
}

SampleSet centered(const SampleSet& s) {
  s.validate();
  SampleSet out = s;
  out.xs.rowwise() -= s.xs.colwise().mean();
  out.ys.rowwise() -= s.ys.colwise().mean();
  return out;
}

}  // namespace glra::rrr
