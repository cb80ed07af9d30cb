#include "glra/seqlab.hpp"

#include "glra/errors.hpp"
#include "glra/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace glra::seqlab {

namespace {

// Appends the part of each column of `candidates` orthogonal to `basis`, in order,
// skipping columns whose residual norm is at or below `skip_below`.
Matrix extend_orthonormal(const Matrix& basis, const Matrix& candidates, double skip_below,
                          Index max_cols) {
  std::vector<Vector> cols;
  for (Index j = 0; j < basis.cols(); ++j) cols.emplace_back(basis.col(j));
  for (Index j = 0; j < candidates.cols() && static_cast<Index>(cols.size()) < max_cols; ++j) {
    Vector v = candidates.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& u : cols) v -= u.dot(v) * u;
    }
    const double nrm = v.norm();
    if (nrm <= skip_below) continue;
    cols.emplace_back(v / nrm);
  }
  Matrix out(candidates.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = cols[j];
  return out;
}

double closed_form_norm(const DiagonalFamily& inst, std::span<const Index> terms, Index m) {
  double sq = 0.0;
  for (const Index n : terms) {
    const double v = inst.mu(n - 1) * inst.f_basis(m - 1, n - 1) / inst.gamma(m - 1);
    sq += v * v;
  }
  return std::sqrt(sq);
}

Matrix truncation_from_terms(const DiagonalFamily& inst, std::span<const Index> terms) {
  const Index n = inst.f_basis.rows();
  Matrix y = Matrix::Zero(n, n);
  for (const Index t : terms) {
    const Vector f = inst.f_basis.col(t - 1);
    y += inst.mu(t - 1) * f * f.transpose();
  }
  return y;
}

}  // namespace

double MuLaw::operator()(Index n) const {
  if (head.empty()) throw InputError("mu law needs at least one head value");
  const auto k = static_cast<Index>(head.size());
  if (n <= k) return head[static_cast<std::size_t>(n - 1)];
  return head.back() * std::pow(static_cast<double>(k) / static_cast<double>(n), decay);
}

double SequenceSpec::gamma(Index n) const {
  return std::pow(static_cast<double>(n), -gamma_exponent);
}

double SequenceSpec::alpha(Index n) const {
  return std::pow(static_cast<double>(n), alpha_exponent);
}

void SequenceSpec::validate() const {
  if (!(gamma_exponent > 0.0)) throw InputError("gamma exponent must be positive");
  if (!(gamma_exponent - alpha_exponent > 0.5)) {
    throw InputError("alpha_n * gamma_n is not square summable: need gamma_exponent - "
                     "alpha_exponent > 1/2");
  }
  if (rank < 1) throw InputError("rank bound must be >= 1");
  if (N < std::max<Index>(3, rank + 2)) {
    throw InputError("truncation dimension N must be >= max(3, rank + 2)");
  }
  if (mu.head.empty() || !std::isfinite(mu.decay) || mu.decay < 0.0) {
    throw InputError("mu law needs a head value and a nonnegative decay");
  }
  double prev = mu(1);
  if (!(prev > 0.0) || !std::isfinite(prev)) throw InputError("mu must be positive");
  for (Index n = 2; n <= N; ++n) {
    const double cur = mu(n);
    if (!(cur > 0.0) || !std::isfinite(cur)) throw InputError("mu must be positive");
    if (cur > prev) throw InputError("mu must be nonincreasing");
    prev = cur;
  }
}

DiagonalFamily build_diagonal_family(const SequenceSpec& spec, const Tolerances& tol) {
  spec.validate();
  tol.validate();
  const Index n = spec.N;

  DiagonalFamily inst;
  inst.gamma.resize(n);
  inst.alpha.resize(n);
  inst.mu.resize(n);
  inst.w = Vector::Zero(n);
  for (Index i = 1; i <= n; ++i) {
    inst.gamma(i - 1) = spec.gamma(i);
    inst.alpha(i - 1) = spec.alpha(i);
    inst.mu(i - 1) = spec.mu(i);
    if (i >= 2) inst.w(i - 1) = inst.alpha(i - 1) * inst.gamma(i - 1);
  }

  Matrix seed(n, 2);
  seed.col(0) = inst.w / inst.w.norm();
  seed.col(1) = Vector::Unit(n, 0);
  const Matrix canonical = Matrix::Identity(n, n);
  inst.f_basis = extend_orthonormal(seed, canonical, tol.rank_rel * static_cast<double>(n), n);
  if (inst.f_basis.cols() != n) throw InputError("basis completion failed");

  Matrix m = inst.f_basis * inst.mu.asDiagonal() * inst.f_basis.transpose();
  inst.problem.M = 0.5 * (m + m.transpose());
  inst.problem.B = Matrix::Identity(n, n);
  inst.problem.C = inst.gamma.asDiagonal();
  inst.problem.rank = spec.rank;
  return inst;
}

SweepResult unboundedness_sweep(const SequenceSpec& base, std::span<const Index> dims,
                                std::span<const Index> probes, const Tolerances& tol) {
  SweepResult out;
  const Index r = base.rank;
  for (const Index n : dims) {
    SequenceSpec spec = base;
    spec.N = n;
    const DiagonalFamily inst = build_diagonal_family(spec, tol);

    const bool tie = std::abs(inst.mu(r - 1) - inst.mu(r)) <= tol.tie_rel * inst.mu(0);
    out.tie = out.tie || tie;

    std::vector<Index> terms_a(static_cast<std::size_t>(r));
    for (Index i = 0; i < r; ++i) terms_a[static_cast<std::size_t>(i)] = i + 1;

    GlraSolution sol_a;
    if (tie) {
      sol_a = solve_with_truncation(inst.problem, truncation_from_terms(inst, terms_a), tol);
    } else {
      sol_a = solve(inst.problem, tol);
    }

    std::vector<Index> terms_b;
    GlraSolution sol_b;
    if (tie) {
      terms_b.assign(terms_a.begin(), terms_a.end() - 1);
      terms_b.push_back(r + 1);
      sol_b = solve_with_truncation(inst.problem, truncation_from_terms(inst, terms_b), tol);
    }

    for (const Index m : probes) {
      if (m < 1 || m > n) continue;
      SweepRow row{n, m, sol_a.X_hat.col(m - 1).norm(), closed_form_norm(inst, terms_a, m)};
      out.max_abs_discrepancy =
          std::max(out.max_abs_discrepancy, std::abs(row.norm - row.predicted_norm));
      out.unbounded_branch.push_back(row);
      if (tie) {
        SweepRow rb{n, m, sol_b.X_hat.col(m - 1).norm(), closed_form_norm(inst, terms_b, m)};
        out.max_abs_discrepancy =
            std::max(out.max_abs_discrepancy, std::abs(rb.norm - rb.predicted_norm));
        out.bounded_branch.push_back(rb);
      }
    }

    const Matrix z = pinv(inst.problem.B, tol) * sol_a.truncation;
    out.lower_bounds.push_back({n, lower_bound_constant(inst.problem.C, z, tol).value});
  }
  return out;
}

std::vector<ApproxStep> approximate_minimizers(const GlraProblem& p, std::span<const double> eps,
                                               const std::optional<Matrix>& directions,
                                               std::uint64_t seed, const Tolerances& tol) {
  p.validate();
  tol.validate();
  const Matrix target = projected_target(p, tol);
  const TruncatedSvd trunc = truncated_svd(target, p.rank, tol);
  const Matrix& f = trunc.factors.U;
  const Matrix& e = trunc.factors.V;
  const Vector& lambda = trunc.factors.sigma;
  const Index k = lambda.size();
  const Index m = p.M.rows();

  const Matrix pb = proj_range(p.B, tol);
  Matrix d(m, k);
  if (directions) {
    if (directions->rows() != m || directions->cols() < k) {
      throw InputError("perturbation directions must be " + std::to_string(m) + "x" +
                       std::to_string(k));
    }
    require_finite(*directions, "directions");
    for (Index i = 0; i < k; ++i) {
      const Vector di = directions->col(i);
      const double nrm = di.norm();
      if (!(nrm > 0.0)) throw InputError("perturbation direction " + std::to_string(i) + " is zero");
      if ((di - pb * di).norm() > tol.check_abs * std::max(1.0, nrm)) {
        throw InputError("perturbation direction " + std::to_string(i) + " leaves ran(B)");
      }
      d.col(i) = di / nrm;
    }
  } else {
    auto rng = random::engine(seed);
    const Matrix g = pb * random::gaussian(m, k, rng);
    for (Index i = 0; i < k; ++i) {
      const double nrm = g.col(i).norm();
      d.col(i) = nrm > tol.check_abs ? Vector(g.col(i) / nrm) : Vector::Zero(m);
    }
  }

  const Matrix b_pinv = pinv(p.B, tol);
  const Matrix c_pinv = pinv(p.C, tol);
  const Matrix ker_b_perp = proj_kernel_perp(p.B, tol);
  const Matrix ran_c = proj_range(p.C, tol);
  const Matrix y = trunc.reconstruct();
  const double lambda1 = k > 0 ? lambda(0) : 0.0;
  const auto r = static_cast<double>(p.rank);

  std::vector<ApproxStep> out;
  out.reserve(eps.size());
  for (const double en : eps) {
    if (!(en >= 0.0) || !std::isfinite(en)) throw InputError("perturbation schedule must be >= 0");
    ApproxStep step;
    step.eps = en;
    step.Y_n = (f + en * d) * lambda.asDiagonal() * e.transpose();
    step.X = b_pinv * step.Y_n * c_pinv;
    step.perturbation_sq = (y - step.Y_n).squaredNorm();
    step.bound_lambda = r * lambda1 * en * en;
    step.bound_lambda_sq = r * lambda1 * lambda1 * en * en;
    step.objective = hs_norm(p.M - p.B * step.X * p.C);
    step.minimality_defect = hs_norm(step.X - ker_b_perp * step.X * ran_c);
    out.push_back(std::move(step));
  }
  return out;
}

SubspaceChain SubspaceChain::from_directions(const Matrix& directions,
                                             std::span<const Index> step_sizes) {
  require_finite(directions, "chain directions");
  Index total = 0;
  for (const Index s : step_sizes) {
    if (s < 1) throw InputError("chain step sizes must be >= 1");
    total += s;
  }
  if (total > directions.cols()) throw InputError("chain step sizes exceed direction count");

  const Matrix ortho = extend_orthonormal(Matrix(directions.rows(), 0), directions.leftCols(total),
                                          1e-12 * std::max(1.0, directions.norm()), total);
  if (ortho.cols() != total) throw InputError("chain directions are linearly dependent");

  SubspaceChain chain;
  Index used = 0;
  for (const Index s : step_sizes) {
    used += s;
    chain.bases.push_back(ortho.leftCols(used));
  }
  return chain;
}

SubspaceChain SubspaceChain::from_directions(const Matrix& directions) {
  const std::vector<Index> ones(static_cast<std::size_t>(directions.cols()), 1);
  return from_directions(directions, ones);
}

void SubspaceChain::validate(const Matrix& c, const Tolerances& tol) const {
  if (bases.empty()) throw InputError("subspace chain is empty");
  const Matrix ran_c = proj_range(c, tol);
  const Index q = c.rows();
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const Matrix& y = bases[i];
    const std::string where = "chain step " + std::to_string(i + 1);
    if (y.rows() != q) {
      throw InputError(where + ": basis must have " + std::to_string(q) + " rows (rows of C)");
    }
    if (y.cols() < 1) throw InputError(where + ": empty basis");
    require_finite(y, where);
    const Index k = y.cols();
    if ((y.transpose() * y - Matrix::Identity(k, k)).norm() > tol.check_abs) {
      throw InputError(where + ": basis is not orthonormal");
    }
    if ((y - ran_c * y).norm() > tol.check_abs) {
      throw InputError(where + ": subspace escapes ran(C)");
    }
    if (i > 0) {
      const Matrix& prev = bases[i - 1];
      if (prev.cols() > k || (prev - y * (y.transpose() * prev)).norm() > tol.check_abs) {
        throw InputError(where + ": subspace does not contain the previous one");
      }
    }
  }
}

SubspaceChain random_chain(const Matrix& c, Index steps, std::uint64_t seed,
                           const Tolerances& tol) {
  const Matrix basis = range_basis(c, tol);
  const Index t = basis.cols();
  if (steps < 1 || steps > t) {
    throw InputError("chain needs between 1 and dim ran(C) = " + std::to_string(t) + " steps");
  }
  auto rng = random::engine(seed);
  const Matrix rotated = basis * random::orthonormal(t, t, rng);
  std::vector<Index> sizes(static_cast<std::size_t>(steps), t / steps);
  for (Index i = 0; i < t % steps; ++i) ++sizes[static_cast<std::size_t>(i)];
  return SubspaceChain::from_directions(rotated, sizes);
}

SubspaceChain coordinate_chain(Index dim, Index steps) {
  if (steps < 1 || steps > dim) throw InputError("coordinate chain needs 1..dim steps");
  SubspaceChain chain;
  const Matrix id = Matrix::Identity(dim, dim);
  for (Index s = 1; s <= steps; ++s) chain.bases.push_back(id.leftCols(s));
  return chain;
}

std::vector<OuterInverseStep> outer_inverse_chain(const Matrix& c, const SubspaceChain& chain,
                                                  const Tolerances& tol) {
  require_finite(c, "C");
  tol.validate();
  chain.validate(c, tol);
  const Matrix c_pinv = pinv(c, tol);

  std::vector<OuterInverseStep> out;
  out.reserve(chain.bases.size());
  for (const Matrix& y : chain.bases) {
    const Matrix ct = c.transpose() * y;  // spans X_n
    // C^T Y (Y^T C C^T Y)^{-1} Y^T through a thin QR of C^T Y = Q R, i.e. Q R^{-T} Y^T.
    const Eigen::HouseholderQR<Matrix> qr(ct);
    const Index k = ct.cols();
    const Matrix q = qr.householderQ() * Matrix::Identity(ct.rows(), k);
    const auto r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    if ((r.toDenseMatrix().diagonal().array().abs() <=
         rank_cutoff(ct.norm(), ct.rows(), ct.cols(), tol))
            .any()) {
      throw InputError("chain subspace meets ker(C^T); C^T Y_n is rank deficient");
    }
    OuterInverseStep step;
    step.C_sharp = q * r.transpose().solve(y.transpose());
    const Matrix xb = range_basis(ct, tol);
    step.Q = xb * xb.transpose();
    step.outer_residual = hs_norm(step.C_sharp * c * step.C_sharp - step.C_sharp);
    step.projection_residual = hs_norm(step.C_sharp - step.Q * c_pinv);
    out.push_back(std::move(step));
  }
  return out;
}

BoundedApproximation bounded_approximation_sequence(const GlraProblem& p,
                                                    const SubspaceChain& chain,
                                                    const Tolerances& tol,
                                                    const std::optional<Matrix>& truncation) {
  p.validate();
  tol.validate();
  BoundedApproximation out;
  out.solution = truncation ? solve_with_truncation(p, *truncation, tol) : solve(p, tol);
  const std::vector<OuterInverseStep> inverses = outer_inverse_chain(p.C, chain, tol);

  const Matrix& yr = out.solution.truncation;
  const Matrix& target = out.solution.Y;
  const Matrix b_pinv = pinv(p.B, tol);
  const Matrix ker_b_perp = proj_kernel_perp(p.B, tol);
  const Matrix ran_c = proj_range(p.C, tol);
  const Index n = p.C.cols();

  // Adapted orthonormal basis: the first dim(X_k) vectors span X_k for every k. The
  // number of fresh directions is fixed by the dimension so rounding noise never counts.
  Matrix adapted(n, 0);
  std::vector<Index> dims;
  const auto extend = [&adapted, n](const Matrix& span, Index dim) {
    if (dim <= adapted.cols()) return;
    const Matrix residual = span - adapted * (adapted.transpose() * span);
    const Matrix fresh = svd(residual).U.leftCols(dim - adapted.cols());
    Matrix next(n, dim);
    next << adapted, fresh;
    adapted = std::move(next);
  };
  for (const OuterInverseStep& step : inverses) {
    const Matrix xb = range_basis(step.Q, tol);
    extend(xb, xb.cols());
    dims.push_back(adapted.cols());
  }
  extend(range_basis(p.C.transpose(), tol), numerical_rank(p.C, tol));
  out.adapted_basis = adapted;

  const Vector column_sq = (yr * adapted).colwise().squaredNorm().transpose();

  for (std::size_t i = 0; i < inverses.size(); ++i) {
    const OuterInverseStep& inv = inverses[i];
    BoundedStep step;
    step.dim = dims[i];
    step.X_n = b_pinv * yr * inv.C_sharp;
    const Matrix bxc = p.B * step.X_n * p.C;
    step.tail_error = (target - bxc).squaredNorm();
    step.tail_sum = column_sq.tail(column_sq.size() - step.dim).sum();
    step.identity_residual = hs_norm(bxc - yr * inv.Q);
    step.minimality_defect = hs_norm(ker_b_perp * step.X_n * ran_c - step.X_n);
    step.outer_residual = inv.outer_residual;
    out.steps.push_back(std::move(step));
  }
  return out;
}

LowerBound lower_bound_constant(const Matrix& c, const Matrix& z, const Tolerances& tol) {
  require_finite(c, "C");
  require_finite(z, "Z");
  if (z.cols() != c.cols()) {
    throw InputError("Z must have " + std::to_string(c.cols()) + " columns (columns of C)");
  }
  LowerBound out;
  const Index n = c.cols();
  const Matrix ker_z = kernel_basis(z, tol);
  if (ker_z.cols() == 0) {
    out.empty_subspace = true;
    return out;
  }
  const Matrix ker_c = Matrix::Identity(n, n) - proj_kernel_perp(c, tol);
  const Matrix coeffs = kernel_basis(ker_c * ker_z, tol);
  if (coeffs.cols() == 0) {
    out.empty_subspace = true;
    return out;
  }
  const Matrix w = ker_z * coeffs;
  out.dimension = w.cols();
  const Vector sigma = svd(c * w).sigma;
  out.value = sigma.size() < w.cols() ? 0.0 : sigma(w.cols() - 1);
  return out;
}

}  // namespace glra::seqlab
