#pragma once

#include "glra/glra.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace glra::seqlab {

/// mu_n = head[n-1] for n <= head.size(), then head.back() * (k / n)^decay with k = head.size().
struct MuLaw {
  std::vector<double> head{1.0};
  double decay = 1.0;

  double operator()(Index n) const;
};

/// Diagonal-operator family on l2 truncated to dimension N:
/// gamma_n = n^-gamma_exponent, alpha_n = n^alpha_exponent, mu_n from MuLaw.
struct SequenceSpec {
  double gamma_exponent = 2.0;
  double alpha_exponent = 1.0;
  MuLaw mu;
  Index N = 10;
  Index rank = 1;

  double gamma(Index n) const;
  double alpha(Index n) const;

  /// Requires gamma_exponent - alpha_exponent > 1/2 (square-summable alpha*gamma),
  /// gamma_exponent > 0, mu positive and nonincreasing on 1..N, N >= max(3, rank + 2).
  void validate() const;
};

/// B = I, C = diag(gamma), M = F diag(mu) F^T where F has orthonormal columns with
/// f_1 = w / |w|, f_2 = e_1 and w_n = alpha_n gamma_n for n >= 2, w_1 = 0.
struct DiagonalFamily {
  GlraProblem problem;
  Vector w;
  Matrix f_basis;
  Vector mu;
  Vector gamma;
  Vector alpha;
};

DiagonalFamily build_diagonal_family(const SequenceSpec& spec, const Tolerances& tol = {});

struct SweepRow {
  Index N = 0;
  Index m = 0;
  double norm = 0.0;            // |X_hat e_m| from the assembled solution
  double predicted_norm = 0.0;  // closed form from the basis construction
};

struct LowerBoundPoint {
  Index N = 0;
  double value = 0.0;
};

struct SweepResult {
  /// The solver's canonical truncation when it is unique, otherwise the branch aligned
  /// with f_1 (unbounded family).
  std::vector<SweepRow> unbounded_branch;
  /// Filled only on a tie mu_r == mu_{r+1}: the branch built from f_2 = e_1 (bounded).
  std::vector<SweepRow> bounded_branch;
  bool tie = false;
  std::vector<LowerBoundPoint> lower_bounds;
  double max_abs_discrepancy = 0.0;
};

/// For every N in `dims` and probe m in `probes` (probes larger than N are skipped),
/// assembles X_hat = B^+ (M)_r C^+ and reports |X_hat e_m| next to the closed form
/// sqrt(sum_{n<=r} (mu_n <e_m, f_n> / gamma_m)^2), which is mu_1 |alpha_m| / |w| at r = 1.
SweepResult unboundedness_sweep(const SequenceSpec& base, std::span<const Index> dims,
                                std::span<const Index> probes, const Tolerances& tol = {});

struct ApproxStep {
  double eps = 0.0;
  Matrix X;
  Matrix Y_n;
  double perturbation_sq = 0.0;   // |Y - Y_n|_HS^2
  double bound_lambda = 0.0;      // r * lambda_1 * eps^2
  double bound_lambda_sq = 0.0;   // r * lambda_1^2 * eps^2, sharp for unit perturbations
  double objective = 0.0;
  double minimality_defect = 0.0;
};

/// Minimising sequence X^(n) = B^+ Y^(n) C^+ where Y^(n) = sum lambda_i (f_i + eps_n d_i) e_i^T
/// perturbs the left singular vectors of the canonical truncation by eps_n along unit
/// directions d_i inside ran(B). `directions` (m x r) must lie in ran(B); when absent,
/// seeded random directions projected onto ran(B) are used.
std::vector<ApproxStep> approximate_minimizers(const GlraProblem& p, std::span<const double> eps,
                                               const std::optional<Matrix>& directions,
                                               std::uint64_t seed, const Tolerances& tol = {});

/// Nested subspaces Y_1 subset Y_2 subset ... given by orthonormal bases.
struct SubspaceChain {
  std::vector<Matrix> bases;

  /// Orthonormalises the columns of `directions` in order and cuts them into nested
  /// bases; step k adds `step_sizes[k]` columns.
  static SubspaceChain from_directions(const Matrix& directions,
                                       std::span<const Index> step_sizes);
  /// One direction per step.
  static SubspaceChain from_directions(const Matrix& directions);

  /// Orthonormality, nesting and containment in ran(C); InputError otherwise.
  void validate(const Matrix& c, const Tolerances& tol = {}) const;
};

/// Random chain of `steps` nested subspaces ending at the full ran(C).
SubspaceChain random_chain(const Matrix& c, Index steps, std::uint64_t seed,
                           const Tolerances& tol = {});
/// Adds one canonical basis vector at a time; valid when ran(C) is everything.
SubspaceChain coordinate_chain(Index dim, Index steps);

struct OuterInverseStep {
  Matrix C_sharp;   // n x q
  Matrix Q;         // projector onto X_n = C^T Y_n
  double outer_residual = 0.0;     // |C# C C# - C#|_HS
  double projection_residual = 0.0;  // |C# - Q C^+|_HS
};

/// C_n^# inverts P_n C from X_n onto Y_n and vanishes on Y_n^perp.
std::vector<OuterInverseStep> outer_inverse_chain(const Matrix& c, const SubspaceChain& chain,
                                                  const Tolerances& tol = {});

struct BoundedStep {
  Index dim = 0;                  // dim X_n
  Matrix X_n;
  double tail_error = 0.0;        // |B X_hat C - B X_n C|_HS^2
  double tail_sum = 0.0;          // sum over adapted basis vectors e_i, i > dim, of |Y_r e_i|^2
  double identity_residual = 0.0; // |B X_n C - Y_r Q_n|_HS
  double minimality_defect = 0.0; // |P_ker(B)^perp X_n P_ran(C) - X_n|_HS
  double outer_residual = 0.0;
};

struct BoundedApproximation {
  GlraSolution solution;
  Matrix adapted_basis;  // orthonormal basis of ker(C)^perp adapted to the X_n
  std::vector<BoundedStep> steps;
};

/// X_n = B^+ (P_ran(B) M P_ker(C)^perp)_r C_n^#. Uses `truncation` when given
/// (validated as in solve_with_truncation), the solver's canonical truncation otherwise.
BoundedApproximation bounded_approximation_sequence(
    const GlraProblem& p, const SubspaceChain& chain, const Tolerances& tol = {},
    const std::optional<Matrix>& truncation = std::nullopt);

struct LowerBound {
  double value = 0.0;
  Index dimension = 0;  // dim(ker Z intersect ker(C)^perp)
  bool empty_subspace = false;
};

/// Smallest singular value of C restricted to ker(Z) intersect ker(C)^perp (0 and
/// empty_subspace = true when that subspace is trivial). Z.cols() must equal C.cols().
LowerBound lower_bound_constant(const Matrix& c, const Matrix& z, const Tolerances& tol = {});

}  // namespace glra::seqlab
