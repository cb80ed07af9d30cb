#include "glra/checks.hpp"

#include "glra/errors.hpp"
#include "glra/glra.hpp"
#include "glra/random.hpp"
#include "glra/rrr.hpp"
#include "glra/seqlab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>

namespace glra::checks {

namespace {

using random::Engine;

// Rank-k matrix with singular values in [0.5, 3].
Matrix conditioned_low_rank(Index rows, Index cols, Index rank, Engine& rng) {
  const Matrix u = random::orthonormal(rows, rank, rng);
  const Matrix v = random::orthonormal(cols, rank, rng);
  std::uniform_real_distribution<double> dist(0.5, 3.0);
  Vector s(rank);
  for (Index i = 0; i < rank; ++i) s(i) = dist(rng);
  return u * s.asDiagonal() * v.transpose();
}

// Mixture of full Gaussian, Gaussian low-rank products and spectrum-controlled
// rank-deficient matrices, dims in [1, max_dim].
Matrix random_matrix(Engine& rng, Index max_dim) {
  const Index rows = random::uniform_index(1, max_dim, rng);
  const Index cols = random::uniform_index(1, max_dim, rng);
  const Index kind = random::uniform_index(0, 2, rng);
  const Index full = std::min(rows, cols);
  if (kind == 0) return random::gaussian(rows, cols, rng);
  const Index rank = random::uniform_index(0, std::max<Index>(full - 1, 0), rng);
  if (kind == 1) return random::low_rank(rows, cols, rank, rng);
  if (rank == 0) return Matrix::Zero(rows, cols);
  return conditioned_low_rank(rows, cols, rank, rng);
}

GlraProblem random_problem(Engine& rng, Index max_dim, Index max_rank) {
  const Index m = random::uniform_index(1, max_dim, rng);
  const Index n = random::uniform_index(1, max_dim, rng);
  const Index p = random::uniform_index(1, max_dim, rng);
  const Index q = random::uniform_index(1, max_dim, rng);
  GlraProblem prob;
  prob.M = random::gaussian(m, n, rng);
  // Occasionally rank-deficient B or C so kernels and range complements are nontrivial.
  prob.B = random::uniform_index(0, 2, rng) == 0
               ? random::low_rank(m, p, random::uniform_index(1, std::min(m, p), rng), rng)
               : random::gaussian(m, p, rng);
  prob.C = random::uniform_index(0, 2, rng) == 0
               ? random::low_rank(q, n, random::uniform_index(1, std::min(q, n), rng), rng)
               : random::gaussian(q, n, rng);
  prob.rank = random::uniform_index(1, max_rank, rng);
  return prob;
}

rrr::SampleSet random_samples(Engine& rng, Index samples, bool deficient_y) {
  const Index dim_f = random::uniform_index(1, 6, rng);
  const Index dim_g = random::uniform_index(2, 6, rng);
  const Matrix mix = random::gaussian(dim_g, dim_f, rng);
  rrr::SampleSet s;
  s.xs = random::gaussian(samples, dim_f, rng);
  Matrix noise = 0.3 * random::gaussian(samples, dim_g, rng);
  s.ys = s.xs * mix.transpose() + noise;
  if (deficient_y) {
    const Index k = random::uniform_index(1, dim_g - 1, rng);
    const Matrix basis = random::orthonormal(dim_g, k, rng);
    s.ys = s.ys * basis * basis.transpose();
  }
  return s;
}

InvariantResult& slot(SuiteReport& rep, std::map<std::string, std::size_t>& index,
                      const std::string& name, double tolerance) {
  auto it = index.find(name);
  if (it == index.end()) {
    index.emplace(name, rep.invariants.size());
    rep.invariants.push_back(InvariantResult{name, 0, 0, 0.0, tolerance});
    return rep.invariants.back();
  }
  return rep.invariants[it->second];
}

struct Recorder {
  SuiteReport report;
  std::map<std::string, std::size_t> index;

  void operator()(const std::string& name, double residual, double tolerance) {
    slot(report, index, name, tolerance).record(residual);
  }
};

SuiteReport suite_mp(Index trials, std::uint64_t seed, const Tolerances& tol) {
  Recorder rec;
  rec.report.suite = "mp";
  const double t = tol.check_abs;
  for (Index i = 0; i < trials; ++i) {
    auto rng = random::engine(seed, static_cast<std::uint64_t>(i));
    const Matrix a = random_matrix(rng, 12);
    const Matrix ap = pinv(a, tol);
    rec("moore_penrose_1", hs_norm(a * ap * a - a), t);
    rec("moore_penrose_2", hs_norm(ap * a * ap - ap), t);
    rec("moore_penrose_3", hs_norm((a * ap).transpose() - a * ap), t);
    rec("moore_penrose_4", hs_norm((ap * a).transpose() - ap * a), t);
    const Matrix pk = proj_kernel_perp(a, tol);
    const Matrix pr = proj_range(a, tol);
    rec("projector_consistency",
        std::max(hs_norm(pk - ap * a), hs_norm(pr * a - a)), t);
    rec("projector_idempotent_symmetric",
        std::max({hs_norm(pr * pr - pr), hs_norm(pr - pr.transpose()), hs_norm(pk * pk - pk),
                  hs_norm(pk - pk.transpose())}),
        t);
    rec("ker_ran_duality", hs_norm(proj_range(a.transpose(), tol) - pk), t);
  }
  return rec.report;
}

SuiteReport suite_svd(Index trials, std::uint64_t seed, const Tolerances& tol) {
  Recorder rec;
  rec.report.suite = "svd";
  const double t = tol.check_abs;
  for (Index i = 0; i < trials; ++i) {
    auto rng = random::engine(seed, static_cast<std::uint64_t>(i));
    const Matrix a = random_matrix(rng, 8);
    const SvdFactors f = svd(a);
    const Index k = f.sigma.size();
    double sorted = 0.0;
    for (Index j = 1; j < k; ++j) sorted = std::max(sorted, f.sigma(j) - f.sigma(j - 1));
    rec("svd_reconstruction", hs_norm(f.reconstruct() - a), t);
    rec("svd_orthonormal",
        std::max(hs_norm(f.U.transpose() * f.U - Matrix::Identity(k, k)),
                 hs_norm(f.V.transpose() * f.V - Matrix::Identity(k, k))),
        t);
    rec("svd_sorted", std::max(sorted, -f.sigma.minCoeff()), 0.0);

    const Index r = random::uniform_index(1, 3, rng);
    const TruncatedSvd tr = truncated_svd(a, r, tol);
    const double tail = k > r ? f.sigma.tail(k - r).squaredNorm() : 0.0;
    rec("truncated_residual", std::abs((a - tr.reconstruct()).squaredNorm() - tail), t);
    rec("truncated_rank", std::max<double>(0.0, numerical_rank(tr.reconstruct(), tol) - r), 0.0);

    const Vector gram_sigma = svd(a.transpose() * a).sigma;
    rec("hs_norm_via_sigma", std::abs(a.squaredNorm() - gram_sigma.sum()), t);

    GlraProblem ey{a, Matrix::Identity(a.rows(), a.rows()), Matrix::Identity(a.cols(), a.cols()), r};
    const double als = als_oracle(ey, AlsOptions{5, 100, seed + static_cast<std::uint64_t>(i)}, tol);
    rec("eckart_young_vs_als", std::max(0.0, hs_norm(a - tr.reconstruct()) - als), 1e-6);

    const Matrix s = random::low_rank(a.cols(), random::uniform_index(1, 6, rng),
                                      random::uniform_index(0, 3, rng), rng);
    const Matrix tm = random::gaussian(random::uniform_index(1, 6, rng), a.rows(), rng);
    rec("rank_composition",
        std::max<double>(0.0, numerical_rank(tm * (a * s), tol) - numerical_rank(a * s, tol)),
        0.0);
  }
  return rec.report;
}

SuiteReport suite_glra(Index trials, std::uint64_t seed, const Tolerances& tol) {
  Recorder rec;
  rec.report.suite = "glra";
  const double t = tol.check_abs;
  for (Index i = 0; i < trials; ++i) {
    auto rng = random::engine(seed, static_cast<std::uint64_t>(i));
    const GlraProblem p = random_problem(rng, 6, 2);
    const GlraSolution sol = solve(p, tol);
    const Matrix target = projected_target(p, tol);

    const Matrix x = random::low_rank(p.p(), p.q(), p.rank, rng);
    const double c = p.M.squaredNorm() - target.squaredNorm();
    const double lhs = std::pow(objective(p, x), 2);
    const double rhs = (target - p.B * x * p.C).squaredNorm() + c;
    rec("projected_problem_identity", std::abs(lhs - rhs), t);

    rec("solution_characterisation", hs_norm(p.B * sol.X_hat * p.C - sol.truncation), t);
    rec("minimality", sol.minimality_defect, t);

    const OptimalError err = optimal_error(p, tol);
    rec("delta_variants_agree", err.max_discrepancy(), t);
    rec("optimal_error_identity",
        std::abs(sol.objective * sol.objective + sol.delta - p.M.squaredNorm()), t);

    const double als = als_oracle(p, AlsOptions{20, 200, seed + static_cast<std::uint64_t>(i)}, tol);
    rec("optimality_vs_als", std::max(0.0, sol.objective - als), 1e-6);

    const Matrix tm = random::gaussian(p.p(), p.q(), rng);
    const Matrix sm = random::gaussian(p.p(), p.q(), rng);
    const Matrix sample = solution_set_sample(sol, p, tm, sm, tol);
    rec("solution_set_objective", std::abs(objective(p, sample) - sol.objective), t);
    rec("canonicalize_roundtrip", hs_norm(canonicalize(sample, p.B, p.C, tol) - sol.X_hat), t);
    rec("sample_norm_dominates", std::max(0.0, hs_norm(sol.X_hat) - hs_norm(sample)), t);

    rec("adjoint_equality", std::abs(solve_adjoint(p, tol).objective - sol.objective), t);
  }
  return rec.report;
}

SuiteReport suite_seq(Index trials, std::uint64_t seed, const Tolerances& tol) {
  Recorder rec;
  rec.report.suite = "seq";
  const double t = tol.check_abs;
  for (Index i = 0; i < trials; ++i) {
    auto rng = random::engine(seed, static_cast<std::uint64_t>(i));

    seqlab::SequenceSpec spec;
    spec.N = random::uniform_index(5, 40, rng);
    spec.mu = seqlab::MuLaw{{1.0}, 1.0};
    const std::array<Index, 1> dims{spec.N};
    const std::array<Index, 4> probes{1, 2, spec.N / 2, spec.N};
    const auto sweep = seqlab::unboundedness_sweep(spec, dims, probes, tol);
    double rel = 0.0;
    for (const auto& row : sweep.unbounded_branch) {
      rel = std::max(rel, std::abs(row.norm - row.predicted_norm) / std::max(1.0, row.predicted_norm));
    }
    rec("diagonal_closed_form", rel, t);

    const Index q = random::uniform_index(2, 6, rng);
    const Index n = random::uniform_index(2, 6, rng);
    GlraProblem p;
    p.M = random::gaussian(random::uniform_index(1, 6, rng), n, rng);
    p.B = random::gaussian(p.M.rows(), random::uniform_index(1, 6, rng), rng);
    p.C = conditioned_low_rank(q, n, random::uniform_index(1, std::min(q, n), rng), rng);
    p.rank = random::uniform_index(1, 2, rng);
    const Index dim_ran = numerical_rank(p.C, tol);
    const auto chain = seqlab::random_chain(p.C, random::uniform_index(1, dim_ran, rng),
                                            seed + static_cast<std::uint64_t>(i), tol);
    const auto approx = seqlab::bounded_approximation_sequence(p, chain, tol);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& step : approx.steps) {
      rec("outer_inverse_identity", step.outer_residual, t);
      rec("bounded_identity", step.identity_residual, t);
      rec("bounded_minimality", step.minimality_defect, t);
      rec("tail_identity", std::abs(step.tail_error - step.tail_sum), t);
      rec("tail_monotone", std::max(0.0, step.tail_error - prev), t);
      prev = step.tail_error;
    }
    rec("tail_exhausted", approx.steps.back().tail_error, t);

    std::vector<double> eps;
    for (int k = 1; k <= 10; ++k) eps.push_back(1.0 / k);
    const auto steps = seqlab::approximate_minimizers(p, eps, std::nullopt,
                                                      seed + static_cast<std::uint64_t>(i), tol);
    for (const auto& s : steps) {
      rec("approx_sharp_bound", std::max(0.0, s.perturbation_sq - s.bound_lambda_sq), t);
      rec("approx_minimality", s.minimality_defect, t);
    }
  }
  return rec.report;
}

SuiteReport suite_rrr(Index trials, std::uint64_t seed, const Tolerances& tol) {
  Recorder rec;
  rec.report.suite = "rrr";
  const double t = tol.check_abs;
  for (Index i = 0; i < trials; ++i) {
    auto rng = random::engine(seed, static_cast<std::uint64_t>(i));
    const bool deficient = random::uniform_index(0, 1, rng) == 1;
    const rrr::SampleSet s = random_samples(rng, 200, deficient);
    const rrr::CovarianceBundle cov = rrr::empirical_covariances(s);
    const Index r = random::uniform_index(1, 2, rng);

    const Matrix sx = psd_sqrt(cov.C_x, tol);
    const Matrix sy = psd_sqrt(cov.C_y, tol);
    const Matrix u = pinv(sy, tol) * cov.C_yx() * pinv(sx, tol);
    rec("cross_cov_contraction", std::max(0.0, op_norm(u) - 1.0), t);
    rec("cross_cov_projection", hs_norm(proj_range(sy, tol) * u * proj_range(sx, tol) - u), t);
    rec("range_identity", hs_norm(sy * pinv(sy, tol) * cov.C_yx() - cov.C_yx()), t);
    rec("sqrt_kernel", hs_norm(proj_kernel_perp(sy, tol) - proj_kernel_perp(cov.C_y, tol)), t);

    const rrr::RrrModel model = rrr::fit(cov, r, std::nullopt, tol);
    rec("minimality", model.report.minimality_defect, t);
    rec("containment", model.report.containment_residual, t);
    rec("mse_trace_vs_monte_carlo",
        std::abs(rrr::mse_trace(model, cov) - rrr::mse_monte_carlo(model, s)), t);
    const auto w = rrr::Weights::identity(cov.dim_f(), cov.dim_g());
    rec("mse_adjoint_vs_trace",
        std::abs(rrr::mse_adjoint(model.A_hat, cov, w, tol) - rrr::mse_trace(model, cov)), t);

    const rrr::AdjointForm form = rrr::adjoint_form(cov, r, w, tol);
    const double als = als_oracle(form.problem, AlsOptions{10, 200, seed + static_cast<std::uint64_t>(i)}, tol);
    rec("optimality_vs_als", std::max(0.0, model.report.objective_mse - (form.offset + als * als)),
        1e-6);

    const auto mk = rrr::maximal_kernel_check(model, cov, 5, seed + static_cast<std::uint64_t>(i), tol);
    rec("maximal_kernel", mk.passed ? 0.0 : 1.0, 0.0);
  }
  return rec.report;
}

}  // namespace

void InvariantResult::record(double residual) {
  if (residual <= tolerance && std::isfinite(residual)) {
    ++passed;
  } else {
    ++failed;
  }
  if (std::isnan(residual)) {
    max_residual = residual;
  } else if (!std::isnan(max_residual)) {
    max_residual = std::max(max_residual, residual);
  }
}

bool SuiteReport::ok() const {
  return std::all_of(invariants.begin(), invariants.end(),
                     [](const InvariantResult& r) { return r.ok(); });
}

std::vector<std::string> suite_names() { return {"mp", "svd", "glra", "seq", "rrr"}; }

std::vector<SuiteReport> run(std::string_view suite, Index trials, std::uint64_t seed,
                             const Tolerances& tol) {
  tol.validate();
  if (trials < 1) throw InputError("trials must be >= 1");
  using Runner = SuiteReport (*)(Index, std::uint64_t, const Tolerances&);
  const std::map<std::string, Runner, std::less<>> runners{
      {"mp", suite_mp}, {"svd", suite_svd}, {"glra", suite_glra},
      {"seq", suite_seq}, {"rrr", suite_rrr}};

  std::vector<SuiteReport> out;
  if (suite == "all") {
    for (const auto& name : suite_names()) out.push_back(runners.at(name)(trials, seed, tol));
    return out;
  }
  const auto it = runners.find(suite);
  if (it == runners.end()) {
    throw InputError("unknown suite '" + std::string(suite) + "' (mp|svd|glra|seq|rrr|all)");
  }
  out.push_back(it->second(trials, seed, tol));
  return out;
}

SuiteReport fixture_check(const Matrix& m, const Matrix& b, const Matrix& c,
                          const Tolerances& tol) {
  Recorder rec;
  rec.report.suite = "fixture";
  const auto fail_all = [&rec]() {
    for (const char* name : {"objective", "non_unique", "branch_a_norm", "branch_b_norm",
                             "branch_minimality"}) {
      rec(name, 1.0, 0.0);
    }
  };
  if (m.rows() != 2 || m.cols() != 2 || b.rows() != 2 || b.cols() != 3 || c.rows() != 3 ||
      c.cols() != 2) {
    fail_all();
    return rec.report;
  }
  try {
    const GlraProblem p{m, b, c, 1};
    const GlraSolution sol = solve(p, tol);
    rec("objective", std::abs(sol.objective - 1.0), 1e-12);
    rec("non_unique", sol.uniqueness == Uniqueness::NonUnique ? 0.0 : 1.0, 0.0);

    Matrix ya = Matrix::Zero(2, 2);
    ya(0, 0) = 1.0;
    Matrix yb = Matrix::Zero(2, 2);
    yb(1, 1) = 1.0;
    const GlraSolution a = solve_with_truncation(p, ya, tol);
    const GlraSolution bb = solve_with_truncation(p, yb, tol);
    rec("branch_a_norm", std::abs(hs_norm(a.X_hat) - 1.0), 1e-12);
    rec("branch_b_norm", std::abs(hs_norm(bb.X_hat) - 4.0), 1e-12);
    rec("branch_minimality", std::max(a.minimality_defect, bb.minimality_defect), tol.check_abs);
  } catch (const std::exception&) {
    fail_all();
  }
  return rec.report;
}

}  // namespace glra::checks
