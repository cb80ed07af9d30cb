#include "glra/linalg.hpp"

#include "glra/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace glra {

namespace {

constexpr double kSignThreshold = 1e-12;

// Flip columns so that the first entry above kSignThreshold in `lead` is nonnegative.
void canonical_signs(Matrix& lead, Matrix* follow) {
  for (Index j = 0; j < lead.cols(); ++j) {
    for (Index i = 0; i < lead.rows(); ++i) {
      const double v = lead(i, j);
      if (std::abs(v) > kSignThreshold) {
        if (v < 0) {
          lead.col(j) *= -1.0;
          if (follow != nullptr) follow->col(j) *= -1.0;
        }
        break;
      }
    }
  }
}

Matrix truncate_columns(const Matrix& m, Index k) { return m.leftCols(k); }

}  // namespace

void Tolerances::validate() const {
  if (!(rank_rel > 0) || !(tie_rel > 0) || !(check_abs > 0)) {
    throw InputError("tolerances must be strictly positive");
  }
}

std::string_view to_string(Uniqueness u) {
  switch (u) {
    case Uniqueness::UniqueByRank:
      return "UniqueByRank";
    case Uniqueness::UniqueByGap:
      return "UniqueByGap";
    case Uniqueness::NonUnique:
      return "NonUnique";
  }
  return "NonUnique";
}

Matrix SvdFactors::reconstruct() const { return U * sigma.asDiagonal() * V.transpose(); }

Matrix TruncatedSvd::reconstruct() const {
  if (factors.sigma.size() == 0) return Matrix::Zero(rows, cols);
  return factors.reconstruct();
}

void require_finite(const Matrix& a, std::string_view what) {
  if (!a.allFinite()) {
    std::ostringstream msg;
    msg << what << ": non-finite entry in " << a.rows() << "x" << a.cols() << " matrix";
    throw InputError(msg.str());
  }
}

SvdFactors svd(const Matrix& a) {
  require_finite(a, "svd");
  SvdFactors out;
  if (a.size() == 0) {
    out.U = Matrix::Zero(a.rows(), 0);
    out.V = Matrix::Zero(a.cols(), 0);
    out.sigma = Vector::Zero(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.U = dec.matrixU();
  out.V = dec.matrixV();
  out.sigma = dec.singularValues();
  canonical_signs(out.U, &out.V);
  return out;
}

double rank_cutoff(double sigma_max, Index rows, Index cols, const Tolerances& tol) {
  return tol.rank_rel * sigma_max * static_cast<double>(std::max(rows, cols));
}

Index numerical_rank(const Vector& sigma, Index rows, Index cols, const Tolerances& tol) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cut = rank_cutoff(sigma(0), rows, cols, tol);
  Index k = 0;
  while (k < sigma.size() && sigma(k) > cut) ++k;
  return k;
}

Index numerical_rank(const Matrix& a, const Tolerances& tol) {
  return numerical_rank(svd(a).sigma, a.rows(), a.cols(), tol);
}

Matrix pinv(const Matrix& a, const Tolerances& tol) {
  const SvdFactors f = svd(a);
  const Index k = numerical_rank(f.sigma, a.rows(), a.cols(), tol);
  if (k == 0) return Matrix::Zero(a.cols(), a.rows());
  const Vector inv = f.sigma.head(k).cwiseInverse();
  return f.V.leftCols(k) * inv.asDiagonal() * f.U.leftCols(k).transpose();
}

Matrix range_basis(const Matrix& a, const Tolerances& tol) {
  const SvdFactors f = svd(a);
  const Index k = numerical_rank(f.sigma, a.rows(), a.cols(), tol);
  return truncate_columns(f.U, k);
}

Matrix kernel_basis(const Matrix& a, const Tolerances& tol) {
  require_finite(a, "kernel_basis");
  if (a.rows() == 0) return Matrix::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<Matrix> dec(a, Eigen::ComputeFullV);
  const Index k = numerical_rank(dec.singularValues(), a.rows(), a.cols(), tol);
  Matrix basis = dec.matrixV().rightCols(a.cols() - k);
  canonical_signs(basis, nullptr);
  return basis;
}

Matrix proj_range(const Matrix& a, const Tolerances& tol) {
  const Matrix u = range_basis(a, tol);
  return u * u.transpose();
}

Matrix proj_kernel_perp(const Matrix& a, const Tolerances& tol) {
  const SvdFactors f = svd(a);
  const Index k = numerical_rank(f.sigma, a.rows(), a.cols(), tol);
  const Matrix v = f.V.leftCols(k);
  return v * v.transpose();
}

TruncatedSvd truncated_svd(const Matrix& a, Index r, const Tolerances& tol) {
  if (r < 1) throw InputError("truncated_svd: rank bound must be >= 1");
  const SvdFactors f = svd(a);
  TruncatedSvd out;
  out.rank_bound = r;
  out.rows = a.rows();
  out.cols = a.cols();
  out.numerical_rank = numerical_rank(f.sigma, a.rows(), a.cols(), tol);

  const Index kept = std::min<Index>(r, f.sigma.size());
  out.factors.U = f.U.leftCols(kept);
  out.factors.V = f.V.leftCols(kept);
  out.factors.sigma = f.sigma.head(kept);
  out.discarded_head = r < f.sigma.size() ? f.sigma(r) : 0.0;

  if (out.numerical_rank <= r) {
    out.uniqueness = Uniqueness::UniqueByRank;
  } else {
    const double sigma_max = f.sigma(0);
    const double gap = f.sigma(r - 1) - f.sigma(r);
    out.uniqueness = gap > tol.tie_rel * sigma_max ? Uniqueness::UniqueByGap : Uniqueness::NonUnique;
  }
  return out;
}

Matrix psd_sqrt(const Matrix& a, const Tolerances& tol) {
  require_finite(a, "psd_sqrt");
  if (a.rows() != a.cols()) {
    throw InputError("psd_sqrt: matrix must be square");
  }
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol.check_abs) {
    std::ostringstream msg;
    msg << "psd_sqrt: matrix is not symmetric (max |A - A^T| = " << asym << ")";
    throw DomainError(msg.str());
  }
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector lambda = eig.eigenvalues();
  const double lambda_max = lambda.size() > 0 ? std::max(lambda.maxCoeff(), 0.0) : 0.0;
  // Numerically zero eigenvalues stay zero; their square roots would otherwise
  // surface as spurious ~sqrt(eps) directions.
  const double cutoff = rank_cutoff(lambda_max, a.rows(), a.cols(), tol);
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -tol.check_abs) {
      std::ostringstream msg;
      msg << "psd_sqrt: matrix is indefinite (eigenvalue " << lambda(i) << ")";
      throw DomainError(msg.str());
    }
    lambda(i) = lambda(i) > cutoff ? std::sqrt(lambda(i)) : 0.0;
  }
  const Matrix& q = eig.eigenvectors();
  Matrix s = q * lambda.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

double hs_norm(const Matrix& a) { return a.norm(); }

double hs_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError("hs_inner: shape mismatch");
  }
  return (a.array() * b.array()).sum();
}

double trace(const Matrix& a) {
  if (a.rows() != a.cols()) throw InputError("trace: matrix must be square");
  return a.trace();
}

double op_norm(const Matrix& a) {
  const Vector s = svd(a).sigma;
  return s.size() == 0 ? 0.0 : s(0);
}

}  // namespace glra
