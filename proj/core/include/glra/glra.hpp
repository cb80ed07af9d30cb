#pragma once

#include "glra/linalg.hpp"

#include <array>
#include <cstdint>

namespace glra {

/// min ||M - B X C||_HS over X with rank(X) <= rank.
/// Shapes: M is m x n, B is m x p, C is q x n, so X is p x q.
struct GlraProblem {
  Matrix M;
  Matrix B;
  Matrix C;
  Index rank = 1;

  Index p() const { return B.cols(); }
  Index q() const { return C.rows(); }

  /// Throws InputError on shape mismatch, rank < 1 or non-finite entries.
  void validate() const;
};

struct GlraSolution {
  Matrix X_hat;       // p x q
  Matrix Y;           // B X_hat C
  Matrix truncation;  // the rank-r truncation of P_ran(B) M P_ker(C)^perp that was used
  double objective = 0.0;
  double delta = 0.0;
  Uniqueness uniqueness = Uniqueness::UniqueByRank;
  double minimality_defect = 0.0;
};

/// P_ran(B) M P_ker(C)^perp.
Matrix projected_target(const GlraProblem& p, const Tolerances& tol = {});

/// X_hat = B^+ (P_ran(B) M P_ker(C)^perp)_r C^+. Ties are broken by SVD order and
/// reported through GlraSolution::uniqueness.
GlraSolution solve(const GlraProblem& p, const Tolerances& tol = {});

/// Same closed form, but with a caller-chosen truncation (e.g. another member of a
/// tie set). The truncation must have rank <= r and attain the Eckart-Young residual
/// of the projected target within check_abs; otherwise InputError.
GlraSolution solve_with_truncation(const GlraProblem& p, const Matrix& truncation,
                                   const Tolerances& tol = {});

double objective(const GlraProblem& p, const Matrix& x);

/// ||X - P_ker(B)^perp X P_ran(C)||_HS; zero iff X has the minimality property.
double minimality_defect(const Matrix& x, const Matrix& b, const Matrix& c,
                         const Tolerances& tol = {});

/// P_ker(B)^perp X P_ran(C). Idempotent and leaves B X C unchanged.
Matrix canonicalize(const Matrix& x, const Matrix& b, const Matrix& c, const Tolerances& tol = {});

/// X_hat + (I - P_ker(B)^perp) T + S (I - P_ran(C)); every such matrix is a minimiser.
Matrix solution_set_sample(const GlraSolution& sol, const GlraProblem& p, const Matrix& t,
                           const Matrix& s, const Tolerances& tol = {});

struct OptimalError {
  double error = 0.0;
  double delta = 0.0;
  /// Delta via sigma(P M C^+C M^T P), sigma(C^+C M^T P M C^+C) and lambda(B^+ M C^+C M^T B).
  std::array<double, 3> delta_variants{};

  /// Largest pairwise gap among delta and the three variants.
  double max_discrepancy() const;
};

OptimalError optimal_error(const GlraProblem& p, const Tolerances& tol = {});

/// Solves min ||M^T - C^T X B^T||_HS (X is q x p). The returned solution satisfies
/// P_ran(C) X P_ker(B)^perp = X and has the same objective as solve(p).
GlraSolution solve_adjoint(const GlraProblem& p, const Tolerances& tol = {});

/// The transposed problem (M^T, C^T, B^T, r).
GlraProblem adjoint_problem(const GlraProblem& p);

Uniqueness classify_uniqueness(const GlraProblem& p, const Tolerances& tol = {});

struct AlsOptions {
  Index restarts = 20;
  Index iters = 200;
  std::uint64_t seed = 0;
};

/// Alternating least squares over X = U V^T from seeded random starts; returns the best
/// objective found. Brute-force reference for the closed-form solver.
double als_oracle(const GlraProblem& p, const AlsOptions& options = {},
                  const Tolerances& tol = {});

}  // namespace glra
