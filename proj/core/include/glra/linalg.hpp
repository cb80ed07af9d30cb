#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace glra {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical thresholds shared by every rank decision and invariant check.
struct Tolerances {
  /// Singular values below rank_rel * sigma_max * max(rows, cols) count as zero.
  double rank_rel = 1e-12;
  /// sigma_r - sigma_{r+1} must exceed tie_rel * sigma_max for a truncation to be unique.
  double tie_rel = 1e-9;
  /// Absolute tolerance for invariant assertions.
  double check_abs = 1e-10;

  void validate() const;
};

/// Thin SVD A = U diag(sigma) V^T, sigma nonincreasing. The first entry of each
/// left singular vector exceeding 1e-12 in magnitude is made nonnegative.
struct SvdFactors {
  Matrix U;
  Vector sigma;
  Matrix V;

  Matrix reconstruct() const;
};

enum class Uniqueness { UniqueByRank, UniqueByGap, NonUnique };

std::string_view to_string(Uniqueness u);

/// Rank-r truncation (A)_r keeping the leading r singular triplets.
struct TruncatedSvd {
  SvdFactors factors;  // truncated to min(r, min(rows, cols)) terms
  Index rank_bound = 0;
  double discarded_head = 0.0;  // sigma_{r+1}, 0 if absent
  Uniqueness uniqueness = Uniqueness::UniqueByRank;
  Index numerical_rank = 0;
  Index rows = 0;
  Index cols = 0;

  Matrix reconstruct() const;
};

void require_finite(const Matrix& a, std::string_view what);

SvdFactors svd(const Matrix& a);

/// Cutoff below which a singular value of an rows x cols matrix is treated as zero.
double rank_cutoff(double sigma_max, Index rows, Index cols, const Tolerances& tol);
Index numerical_rank(const Vector& sigma, Index rows, Index cols, const Tolerances& tol);
Index numerical_rank(const Matrix& a, const Tolerances& tol = {});

Matrix pinv(const Matrix& a, const Tolerances& tol = {});

/// Orthogonal projector onto ran(A) (= A A^+).
Matrix proj_range(const Matrix& a, const Tolerances& tol = {});
/// Orthogonal projector onto ker(A)^perp (= A^+ A).
Matrix proj_kernel_perp(const Matrix& a, const Tolerances& tol = {});

/// Orthonormal basis of ran(A); rows(A) x rank columns.
Matrix range_basis(const Matrix& a, const Tolerances& tol = {});
/// Orthonormal basis of ker(A); cols(A) x (cols - rank) columns.
Matrix kernel_basis(const Matrix& a, const Tolerances& tol = {});

TruncatedSvd truncated_svd(const Matrix& a, Index r, const Tolerances& tol = {});

/// Symmetric PSD square root. Eigenvalues in [-check_abs, rank cutoff] are clamped to zero.
/// Asymmetry beyond check_abs or a more negative eigenvalue throws DomainError.
Matrix psd_sqrt(const Matrix& a, const Tolerances& tol = {});

double hs_norm(const Matrix& a);
double hs_inner(const Matrix& a, const Matrix& b);
double trace(const Matrix& a);

/// Largest singular value.
double op_norm(const Matrix& a);

}  // namespace glra
