#include "cli.hpp"

#include "glra/checks.hpp"
#include "glra/csv.hpp"
#include "glra/errors.hpp"
#include "glra/glra.hpp"
#include "glra/model_io.hpp"
#include "glra/rrr.hpp"
#include "glra/seqlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace glra::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Common {
  double rank_rel = Tolerances{}.rank_rel;
  double tie_rel = Tolerances{}.tie_rel;
  double check_abs = Tolerances{}.check_abs;
  std::string report;
  bool no_timestamp = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--rank-rel", c.rank_rel, "Relative rank cutoff")->capture_default_str();
  sub->add_option("--tie-rel", c.tie_rel, "Relative singular-value tie threshold")
      ->capture_default_str();
  sub->add_option("--check-abs", c.check_abs,
                  "Absolute invariant tolerance (overrides GLRA_TOL_ABS)")
      ->capture_default_str();
  sub->add_option("--report", c.report, "Write the JSON report here instead of stdout");
  sub->add_flag("--no-timestamp", c.no_timestamp, "Omit wall-clock timing from the report");
}

Tolerances resolve(const Common& c, const CLI::App& active) {
  Tolerances tol;
  tol.rank_rel = c.rank_rel;
  tol.tie_rel = c.tie_rel;
  tol.check_abs = c.check_abs;
  if (active.get_option("--check-abs")->count() == 0) {
    if (const char* env = std::getenv("GLRA_TOL_ABS"); env != nullptr && *env != '\0') {
      const std::string_view s(env);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InputError("GLRA_TOL_ABS: not a number: '" + std::string(s) + "'");
      }
      tol.check_abs = v;
    }
  }
  tol.validate();
  return tol;
}

json tol_json(const Tolerances& tol) {
  return json{{"rank_rel", tol.rank_rel}, {"tie_rel", tol.tie_rel}, {"check_abs", tol.check_abs}};
}

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string shape(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

std::string shape(const Matrix& a) { return shape(a.rows(), a.cols()); }

// Throws InputError naming the file and the expected shape. -1 means "any".
void expect_shape(const Matrix& a, const std::string& file, Index rows, Index cols,
                  const std::string& why) {
  if ((rows >= 0 && a.rows() != rows) || (cols >= 0 && a.cols() != cols)) {
    const std::string r = rows >= 0 ? std::to_string(rows) : "*";
    const std::string c = cols >= 0 ? std::to_string(cols) : "*";
    throw InputError(file + ": expected shape " + r + "x" + c + " (" + why + "), got " +
                     shape(a));
  }
}

struct ProblemFiles {
  std::string m, b, c;
  Index rank = 0;
};

GlraProblem load_problem(const ProblemFiles& f) {
  GlraProblem p;
  p.M = csv::read(f.m);
  p.B = csv::read(f.b);
  p.C = csv::read(f.c);
  expect_shape(p.B, f.b, p.M.rows(), -1, "rows of B must equal rows of M");
  expect_shape(p.C, f.c, -1, p.M.cols(), "columns of C must equal columns of M");
  p.rank = f.rank;
  p.validate();
  return p;
}

json problem_inputs(const ProblemFiles& f) {
  return json{{"M", f.m}, {"B", f.b}, {"C", f.c}, {"rank", f.rank}};
}

void add_problem_options(CLI::App* sub, ProblemFiles& f, bool required) {
  auto* m = sub->add_option("--M", f.m, "CSV file with M (m x n)");
  auto* b = sub->add_option("--B", f.b, "CSV file with B (m x p)");
  auto* c = sub->add_option("--C", f.c, "CSV file with C (q x n)");
  auto* r = sub->add_option("--rank", f.rank, "Rank bound r >= 1");
  if (required) {
    m->required();
    b->required();
    c->required();
    r->required();
  }
}

json delta_json(const OptimalError& e) {
  return json{{"error", e.error},
              {"delta", e.delta},
              {"delta_variants", json::array({e.delta_variants[0], e.delta_variants[1],
                                              e.delta_variants[2]})},
              {"max_discrepancy", e.max_discrepancy()}};
}

// --- solve ---------------------------------------------------------------

struct SolveArgs {
  ProblemFiles files;
  bool adjoint = false;
  std::string out;
};

json cmd_solve(const SolveArgs& a, const Tolerances& tol, std::vector<std::string>& failures) {
  const GlraProblem p = load_problem(a.files);
  const GlraSolution sol = a.adjoint ? solve_adjoint(p, tol) : solve(p, tol);
  const OptimalError err = optimal_error(p, tol);

  json inputs = problem_inputs(a.files);
  inputs["adjoint"] = a.adjoint;
  inputs["tolerances"] = tol_json(tol);

  json outputs;
  outputs["objective"] = sol.objective;
  outputs["delta"] = err.delta;
  outputs["delta_variants"] =
      json::array({err.delta_variants[0], err.delta_variants[1], err.delta_variants[2]});
  outputs["X_hat_shape"] = json::array({sol.X_hat.rows(), sol.X_hat.cols()});
  if (!a.out.empty()) {
    csv::write(a.out, sol.X_hat);
    outputs["X_hat"] = a.out;
  } else {
    outputs["X_hat"] = matrix_json(sol.X_hat);
  }

  const double m2 = p.M.squaredNorm();
  const double identity = sol.objective * sol.objective + err.delta - m2;
  json diag{{"uniqueness", to_string(sol.uniqueness)},
            {"minimality_defect", sol.minimality_defect},
            {"delta_max_discrepancy", err.max_discrepancy()},
            {"error_identity_residual", identity}};

  const double scale = std::max(1.0, m2);
  if (sol.minimality_defect > tol.check_abs * std::max(1.0, hs_norm(sol.X_hat))) {
    failures.push_back("minimality_defect");
  }
  if (err.max_discrepancy() > tol.check_abs * scale) failures.push_back("delta_variants");
  if (std::abs(identity) > tol.check_abs * scale) failures.push_back("error_identity");

  return json{{"command", "solve"}, {"inputs", inputs}, {"outputs", outputs},
              {"diagnostics", diag}};
}

// --- error ---------------------------------------------------------------

json cmd_error(const ProblemFiles& f, const Tolerances& tol, std::vector<std::string>& failures) {
  const GlraProblem p = load_problem(f);
  const OptimalError err = optimal_error(p, tol);
  json inputs = problem_inputs(f);
  inputs["tolerances"] = tol_json(tol);
  const double m2 = p.M.squaredNorm();
  const double identity = err.error * err.error + err.delta - m2;
  if (err.max_discrepancy() > tol.check_abs * std::max(1.0, m2)) {
    failures.push_back("delta_variants");
  }
  return json{{"command", "error"},
              {"inputs", inputs},
              {"outputs", delta_json(err)},
              {"diagnostics",
               {{"uniqueness", to_string(classify_uniqueness(p, tol))},
                {"error_identity_residual", identity}}}};
}

// --- demo-unbounded --------------------------------------------------------

struct SeqArgs {
  double gamma_exp = 2.0;
  double alpha_exp = 1.0;
  std::vector<double> mu{1.0};
  double mu_decay = 1.0;
  Index rank = 1;
};

void add_seq_options(CLI::App* sub, SeqArgs& s) {
  sub->add_option("--gamma-exp", s.gamma_exp, "gamma_n = n^-gamma_exp")->capture_default_str();
  sub->add_option("--alpha-exp", s.alpha_exp, "alpha_n = n^alpha_exp")->capture_default_str();
  sub->add_option("--mu", s.mu, "Leading mu values; the tail decays from the last one")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--mu-decay", s.mu_decay, "Power-law decay of the mu tail")
      ->capture_default_str();
  sub->add_option("--rank", s.rank, "Rank bound r")->capture_default_str();
}

seqlab::SequenceSpec to_spec(const SeqArgs& s, Index n) {
  seqlab::SequenceSpec spec;
  spec.gamma_exponent = s.gamma_exp;
  spec.alpha_exponent = s.alpha_exp;
  spec.mu = seqlab::MuLaw{s.mu, s.mu_decay};
  spec.N = n;
  spec.rank = s.rank;
  return spec;
}

json seq_inputs(const SeqArgs& s) {
  return json{{"gamma_exp", s.gamma_exp},
              {"alpha_exp", s.alpha_exp},
              {"mu", s.mu},
              {"mu_decay", s.mu_decay},
              {"rank", s.rank}};
}

struct DemoArgs {
  SeqArgs seq;
  std::vector<Index> dims{50, 100, 200};
  std::vector<Index> probes{1, 10, 50, 100};
  std::uint64_t seed = 0;
  std::string csv;
};

Matrix sweep_table(const std::vector<seqlab::SweepRow>& rows) {
  Matrix t(static_cast<Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto k = static_cast<Index>(i);
    t(k, 0) = static_cast<double>(rows[i].N);
    t(k, 1) = static_cast<double>(rows[i].m);
    t(k, 2) = rows[i].norm;
    t(k, 3) = rows[i].predicted_norm;
  }
  return t;
}

json sweep_json(const std::vector<seqlab::SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"N", r.N}, {"m", r.m}, {"norm", r.norm}, {"predicted_norm", r.predicted_norm}});
  }
  return out;
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_extension();
  out += suffix;
  return out;
}

json cmd_demo(const DemoArgs& a, const Tolerances& tol, std::vector<std::string>& failures) {
  if (a.dims.empty()) throw InputError("--N: at least one dimension is required");
  if (a.probes.empty()) throw InputError("--probes: at least one probe is required");
  for (Index n : a.dims) to_spec(a.seq, n).validate();
  for (Index m : a.probes) {
    if (m < 1) throw InputError("--probes: indices are 1-based, got " + std::to_string(m));
  }

  const auto sweep = seqlab::unboundedness_sweep(to_spec(a.seq, a.dims.front()), a.dims,
                                                 a.probes, tol);

  json inputs = seq_inputs(a.seq);
  inputs["N"] = a.dims;
  inputs["probes"] = a.probes;
  inputs["seed"] = a.seed;
  inputs["tolerances"] = tol_json(tol);

  json outputs;
  outputs["tie"] = sweep.tie;
  outputs["csv_columns"] = json::array({"N", "m", "norm", "predicted_norm"});
  if (!a.csv.empty()) {
    csv::write(a.csv, sweep_table(sweep.unbounded_branch));
    outputs["sweep"] = a.csv;
    if (sweep.tie) {
      const fs::path bounded = sibling(a.csv, ".bounded.csv");
      csv::write(bounded, sweep_table(sweep.bounded_branch));
      outputs["bounded_sweep"] = bounded.string();
    }
  } else {
    outputs["sweep"] = sweep_json(sweep.unbounded_branch);
    if (sweep.tie) outputs["bounded_sweep"] = sweep_json(sweep.bounded_branch);
  }
  json lb = json::array();
  for (const auto& p : sweep.lower_bounds) {
    const double n = static_cast<double>(p.N);
    lb.push_back({{"N", p.N}, {"value", p.value}, {"value_times_N_squared", p.value * n * n}});
  }
  outputs["lower_bound_constant"] = lb;

  double rel = 0.0;
  for (const auto* rows : {&sweep.unbounded_branch, &sweep.bounded_branch}) {
    for (const auto& r : *rows) {
      rel = std::max(rel, std::abs(r.norm - r.predicted_norm) / std::max(1.0, r.predicted_norm));
    }
  }
  if (!(rel <= tol.check_abs)) failures.push_back("closed_form_norm");

  return json{{"command", "demo-unbounded"},
              {"inputs", inputs},
              {"outputs", outputs},
              {"diagnostics",
               {{"max_abs_discrepancy", sweep.max_abs_discrepancy},
                {"max_rel_discrepancy", rel}}}};
}

// --- outer-approx ------------------------------------------------------------

struct OuterArgs {
  ProblemFiles files;
  std::optional<Index> diagonal;
  SeqArgs seq;
  std::string chain = "auto";
  std::uint64_t seed = 0;
  std::string csv;
};

seqlab::SubspaceChain make_chain(const std::string& spec, const Matrix& c, std::uint64_t seed,
                                 const Tolerances& tol) {
  const Index q = c.rows();
  const auto parse_count = [&](std::string_view s) {
    Index k = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
    if (ec != std::errc() || ptr != s.data() + s.size() || k < 1) {
      throw InputError("--chain: bad step count in '" + spec + "'");
    }
    return k;
  };
  if (spec == "auto") return seqlab::random_chain(c, numerical_rank(c, tol), seed, tol);
  if (spec.rfind("auto:", 0) == 0) {
    return seqlab::random_chain(c, parse_count(std::string_view(spec).substr(5)), seed, tol);
  }
  if (spec == "coord") return seqlab::coordinate_chain(q, q);
  if (spec.rfind("coord:", 0) == 0) {
    return seqlab::coordinate_chain(q, parse_count(std::string_view(spec).substr(6)));
  }
  const Matrix dirs = csv::read(spec);
  expect_shape(dirs, spec, q, -1, "one direction in R^q per column");
  return seqlab::SubspaceChain::from_directions(dirs);
}

Matrix convergence_table(const std::vector<seqlab::BoundedStep>& steps) {
  Matrix t(static_cast<Index>(steps.size()), 7);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto k = static_cast<Index>(i);
    const auto& s = steps[i];
    t.row(k) << static_cast<double>(i + 1), static_cast<double>(s.dim), s.tail_error, s.tail_sum,
        s.identity_residual, s.outer_residual, s.minimality_defect;
  }
  return t;
}

json cmd_outer(const OuterArgs& a, const Tolerances& tol, std::vector<std::string>& failures) {
  GlraProblem p;
  json inputs;
  if (a.diagonal) {
    const auto spec = to_spec(a.seq, *a.diagonal);
    spec.validate();
    p = seqlab::build_diagonal_family(spec, tol).problem;
    inputs = seq_inputs(a.seq);
    inputs["diagonal_N"] = *a.diagonal;
  } else {
    if (a.files.m.empty() || a.files.b.empty() || a.files.c.empty() || a.files.rank < 1) {
      throw InputError("outer-approx: pass --M, --B, --C and --rank, or --diagonal N");
    }
    p = load_problem(a.files);
    inputs = problem_inputs(a.files);
  }
  inputs["chain"] = a.chain;
  inputs["seed"] = a.seed;
  inputs["tolerances"] = tol_json(tol);

  const auto chain = make_chain(a.chain, p.C, a.seed, tol);
  chain.validate(p.C, tol);
  const auto approx = seqlab::bounded_approximation_sequence(p, chain, tol);

  json outputs;
  outputs["csv_columns"] = json::array({"step", "dim", "tail_error", "tail_sum",
                                        "identity_residual", "outer_residual",
                                        "minimality_defect"});
  if (!a.csv.empty()) {
    csv::write(a.csv, convergence_table(approx.steps));
    outputs["convergence"] = a.csv;
  } else {
    json rows = json::array();
    for (const auto& s : approx.steps) {
      rows.push_back({{"dim", s.dim},
                      {"tail_error", s.tail_error},
                      {"tail_sum", s.tail_sum},
                      {"identity_residual", s.identity_residual},
                      {"outer_residual", s.outer_residual},
                      {"minimality_defect", s.minimality_defect}});
    }
    outputs["convergence"] = rows;
  }

  const double scale = std::max(1.0, approx.solution.Y.squaredNorm());
  double tail_gap = 0.0, outer = 0.0, ident = 0.0, defect = 0.0, rise = 0.0;
  bool strict = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& s : approx.steps) {
    tail_gap = std::max(tail_gap, std::abs(s.tail_error - s.tail_sum));
    outer = std::max(outer, s.outer_residual);
    ident = std::max(ident, s.identity_residual);
    defect = std::max(defect, s.minimality_defect);
    rise = std::max(rise, s.tail_error - prev);
    if (!(s.tail_error < prev)) strict = false;
    prev = s.tail_error;
  }
  const double final_tail = approx.steps.empty() ? 0.0 : approx.steps.back().tail_error;
  outputs["final_tail_error"] = final_tail;
  outputs["final_dim"] = approx.steps.empty() ? 0 : approx.steps.back().dim;

  if (tail_gap > tol.check_abs * scale) failures.push_back("tail_identity");
  if (outer > tol.check_abs * scale) failures.push_back("outer_inverse");
  if (ident > tol.check_abs * scale) failures.push_back("identity_residual");
  if (rise > tol.check_abs * scale) failures.push_back("tail_monotone");

  return json{{"command", "outer-approx"},
              {"inputs", inputs},
              {"outputs", outputs},
              {"diagnostics",
               {{"uniqueness", to_string(approx.solution.uniqueness)},
                {"max_tail_identity_gap", tail_gap},
                {"max_outer_residual", outer},
                {"max_identity_residual", ident},
                {"max_minimality_defect", defect},
                {"tail_nonincreasing", rise <= tol.check_abs * scale},
                {"tail_strictly_decreasing", strict}}}};
}

// --- regress -----------------------------------------------------------------

struct RegressArgs {
  std::string x, y, wx, wy, wa, model_out;
  Index rank = 0;
  bool center = false;
  Index trials = 50;
  std::uint64_t seed = 0;
};

json cmd_regress(const RegressArgs& a, const Tolerances& tol, std::vector<std::string>& failures) {
  rrr::SampleSet s{csv::read(a.x), csv::read(a.y)};
  expect_shape(s.ys, a.y, s.xs.rows(), -1, "one row per sample, matching " + a.x);
  s.validate();
  if (a.center) s = rrr::centered(s);
  const auto cov = rrr::empirical_covariances(s);

  std::optional<rrr::Weights> weights;
  if (!a.wx.empty() || !a.wy.empty() || !a.wa.empty()) {
    rrr::Weights w = rrr::Weights::identity(cov.dim_f(), cov.dim_g());
    if (!a.wx.empty()) {
      w.W_x = csv::read(a.wx);
      expect_shape(w.W_x, a.wx, -1, cov.dim_f(), "columns must equal dim x");
      if (a.wa.empty()) w.W_A = Matrix::Identity(w.W_x.rows(), w.W_x.rows());
    }
    if (!a.wy.empty()) {
      w.W_y = csv::read(a.wy);
      expect_shape(w.W_y, a.wy, -1, cov.dim_g(), "columns must equal dim y");
    }
    if (!a.wa.empty()) {
      w.W_A = csv::read(a.wa);
      expect_shape(w.W_A, a.wa, w.W_x.rows(), -1, "rows must equal rows of W_x");
    }
    weights = w;
  }

  const rrr::RrrModel model = rrr::fit(cov, a.rank, weights, tol);
  const double trace = rrr::mse_trace(model, cov);
  const double mc = rrr::mse_monte_carlo(model, s);

  json inputs{{"x", a.x}, {"y", a.y}, {"rank", a.rank}, {"center", a.center},
              {"trials", a.trials}, {"seed", a.seed}};
  inputs["W_x"] = a.wx.empty() ? json(nullptr) : json(a.wx);
  inputs["W_y"] = a.wy.empty() ? json(nullptr) : json(a.wy);
  inputs["W_A"] = a.wa.empty() ? json(nullptr) : json(a.wa);
  inputs["tolerances"] = tol_json(tol);

  json outputs{{"samples", s.xs.rows()},
               {"dims", {{"F", cov.dim_f()}, {"G", cov.dim_g()}}},
               {"mse_trace", trace},
               {"mse_monte_carlo", mc}};
  if (!a.model_out.empty()) {
    io::save_model(a.model_out, model);
    outputs["model"] = a.model_out;
  } else {
    outputs["A_hat"] = matrix_json(model.A_hat);
  }

  const auto mk = rrr::maximal_kernel_check(model, cov, a.trials, a.seed, tol);
  json mk_json{{"applicable", mk.applicable}};
  if (mk.applicable) {
    mk_json["passed"] = mk.passed;
    mk_json["kernel_dim"] = mk.kernel_dim;
    mk_json["annihilation_residual"] = mk.annihilation_residual;
    mk_json["max_mse_gap"] = mk.max_mse_gap;
    mk_json["trials"] = mk.trials;
    mk_json["shrunk"] = mk.shrunk;
    mk_json["nonzero"] = mk.nonzero;
    if (!mk.passed) failures.push_back("maximal_kernel");
  }

  const double gap = std::abs(trace - mc);
  if (gap > tol.check_abs * std::max(1.0, std::abs(mc))) failures.push_back("mse_identity");
  if (model.report.minimality_defect > tol.check_abs * std::max(1.0, hs_norm(model.A_hat))) {
    failures.push_back("minimality_defect");
  }

  return json{{"command", "regress"},
              {"inputs", inputs},
              {"outputs", outputs},
              {"diagnostics",
               {{"objective_mse", model.report.objective_mse},
                {"mse_gap", gap},
                {"minimality_defect", model.report.minimality_defect},
                {"uniqueness", to_string(model.report.uniqueness)},
                {"containment_residual", model.report.containment_residual},
                {"maximal_kernel", mk_json}}}};
}

// --- check -------------------------------------------------------------------

struct CheckArgs {
  std::string suite = "all";
  CLI::Option* suite_opt = nullptr;
  Index trials = 20;
  std::uint64_t seed = 0;
  std::string fixture;
};

json suite_json(const checks::SuiteReport& r) {
  json inv = json::array();
  for (const auto& i : r.invariants) {
    inv.push_back({{"name", i.name},
                   {"passed", i.passed},
                   {"failed", i.failed},
                   {"max_residual", i.max_residual},
                   {"tolerance", i.tolerance}});
  }
  return json{{"suite", r.suite}, {"ok", r.ok()}, {"invariants", inv}};
}

json cmd_check(const CheckArgs& a, const Tolerances& tol, std::vector<std::string>& failures) {
  std::vector<checks::SuiteReport> reports;
  const bool run_suites = a.fixture.empty() || a.suite_opt->count() > 0;
  if (run_suites) reports = checks::run(a.suite, a.trials, a.seed, tol);
  if (!a.fixture.empty()) {
    const fs::path dir(a.fixture);
    reports.push_back(checks::fixture_check(csv::read(dir / "M.csv"), csv::read(dir / "B.csv"),
                                            csv::read(dir / "C.csv"), tol));
  }

  json suites = json::array();
  for (const auto& r : reports) {
    suites.push_back(suite_json(r));
    for (const auto& i : r.invariants) {
      if (!i.ok()) failures.push_back(r.suite + "." + i.name);
    }
  }
  json inputs{{"suite", run_suites ? json(a.suite) : json(nullptr)},
              {"trials", a.trials},
              {"seed", a.seed},
              {"fixture", a.fixture.empty() ? json(nullptr) : json(a.fixture)},
              {"tolerances", tol_json(tol)}};
  return json{{"command", "check"},
              {"inputs", inputs},
              {"outputs", {{"suites", suites}}},
              {"diagnostics", {{"ok", failures.empty()}}}};
}

void emit(const json& report, const Common& c, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (c.report.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.report, std::ios::binary);
  if (!f) throw InputError(c.report + ": cannot open report for writing");
  f << text;
  if (!f) throw InputError(c.report + ": report write failed");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalised low-rank approximation tools", "glra"};
  app.require_subcommand(1);

  Common common;
  SolveArgs solve_args;
  ProblemFiles error_args;
  DemoArgs demo_args;
  OuterArgs outer_args;
  RegressArgs regress_args;
  CheckArgs check_args;
  Index diagonal_n = 0;

  auto* solve_cmd = app.add_subcommand("solve", "Closed-form rank-constrained solution of M ~ B X C");
  add_problem_options(solve_cmd, solve_args.files, true);
  solve_cmd->add_flag("--adjoint", solve_args.adjoint, "Solve the transposed problem instead");
  solve_cmd->add_option("--out", solve_args.out, "Write X_hat as CSV here");

  auto* error_cmd = app.add_subcommand("error", "Optimal error and the gap Delta");
  add_problem_options(error_cmd, error_args, true);

  auto* demo_cmd = app.add_subcommand("demo-unbounded", "Growth of |X_hat e_m| on the diagonal family");
  add_seq_options(demo_cmd, demo_args.seq);
  demo_cmd->add_option("--N", demo_args.dims, "Truncation dimensions")->delimiter(',')
      ->capture_default_str();
  demo_cmd->add_option("--probes", demo_args.probes, "Probe indices m (1-based)")
      ->delimiter(',')
      ->capture_default_str();
  demo_cmd->add_option("--seed", demo_args.seed, "Recorded for reproducibility");
  demo_cmd->add_option("--csv", demo_args.csv, "Write the sweep table here");

  auto* outer_cmd = app.add_subcommand("outer-approx", "Bounded approximations through outer inverses");
  add_problem_options(outer_cmd, outer_args.files, false);
  auto* s4 = outer_cmd->add_option("--diagonal", diagonal_n,
                                   "Use the diagonal family truncated to N instead of files");
  outer_cmd->add_option("--gamma-exp", outer_args.seq.gamma_exp)->capture_default_str();
  outer_cmd->add_option("--alpha-exp", outer_args.seq.alpha_exp)->capture_default_str();
  outer_cmd->add_option("--mu", outer_args.seq.mu)->delimiter(',')->capture_default_str();
  outer_cmd->add_option("--mu-decay", outer_args.seq.mu_decay)->capture_default_str();
  outer_cmd->add_option("--chain", outer_args.chain,
                        "auto, auto:k, coord, coord:k, or a CSV of directions (one per column)")
      ->capture_default_str();
  outer_cmd->add_option("--seed", outer_args.seed, "Seed for random chains");
  outer_cmd->add_option("--csv", outer_args.csv, "Write the convergence table here");

  auto* regress_cmd = app.add_subcommand("regress", "Weighted reduced-rank regression of x on y");
  regress_cmd->add_option("--x", regress_args.x, "CSV of x samples (S x F)")->required();
  regress_cmd->add_option("--y", regress_args.y, "CSV of y samples (S x G)")->required();
  regress_cmd->add_option("--rank", regress_args.rank, "Rank bound r >= 1")->required();
  regress_cmd->add_option("--wx", regress_args.wx, "CSV of W_x");
  regress_cmd->add_option("--wy", regress_args.wy, "CSV of W_y");
  regress_cmd->add_option("--wa", regress_args.wa, "CSV of W_A");
  regress_cmd->add_flag("--center", regress_args.center, "Subtract column means first");
  regress_cmd->add_option("--model-out", regress_args.model_out, "Write the model JSON here");
  regress_cmd->add_option("--trials", regress_args.trials, "Maximal-kernel perturbations")
      ->capture_default_str();
  regress_cmd->add_option("--seed", regress_args.seed, "Seed for perturbations");

  auto* check_cmd = app.add_subcommand("check", "Seeded invariant suites");
  check_args.suite_opt =
      check_cmd->add_option("--suite", check_args.suite, "mp|svd|glra|seq|rrr|all")
          ->capture_default_str();
  check_cmd->add_option("--trials", check_args.trials, "Random instances per suite")
      ->capture_default_str();
  check_cmd->add_option("--seed", check_args.seed, "Base seed")->capture_default_str();
  check_cmd->add_option("--fixture", check_args.fixture,
                        "Directory with M.csv, B.csv, C.csv for the two-branch fixture");

  for (auto* sub : {solve_cmd, error_cmd, demo_cmd, outer_cmd, regress_cmd, check_cmd}) {
    add_common(sub, common);
  }
  std::vector<std::string> argv_store{"glra"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    CLI::App* active = app.get_subcommands().front();
    const Tolerances tol = resolve(common, *active);
    if (s4->count() > 0) outer_args.diagonal = diagonal_n;

    std::vector<std::string> failures;
    json report;
    if (active == solve_cmd) {
      report = cmd_solve(solve_args, tol, failures);
    } else if (active == error_cmd) {
      report = cmd_error(error_args, tol, failures);
    } else if (active == demo_cmd) {
      report = cmd_demo(demo_args, tol, failures);
    } else if (active == outer_cmd) {
      outer_args.seq.rank = outer_args.files.rank > 0 ? outer_args.files.rank : 1;
      report = cmd_outer(outer_args, tol, failures);
    } else if (active == regress_cmd) {
      report = cmd_regress(regress_args, tol, failures);
    } else {
      report = cmd_check(check_args, tol, failures);
    }

    json full{{"schema", io::kSchema}};
    for (auto& [k, v] : report.items()) full[k] = v;
    full["diagnostics"]["invariant_failures"] = failures;
    if (!common.no_timestamp) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - started;
      full["timing"] = {{"wall_seconds", dt.count()}};
    }
    emit(full, common, out);
    if (!failures.empty()) {
      err << "glra: numerical invariant failure:";
      for (const auto& f : failures) err << ' ' << f;
      err << '\n';
      return kInvariantFailure;
    }
    return kOk;
  } catch (const InputError& e) {
    err << "glra: input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    err << "glra: numerical error: " << e.what() << '\n';
    return kInvariantFailure;
  } catch (const std::exception& e) {
    err << "glra: internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace glra::cli
