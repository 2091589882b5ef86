#include "rpde/report.hpp"

#include "rpde/holder_algebra.hpp"
#include "rpde/noise.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace rpde {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double d : v) a.push_back(d);
  return a;
}

}  // namespace

Json config_json(const RunConfig& c) {
  Json j;
  j["noise"] = {{"kind", c.noise.kind == NoiseKind::Fbm ? "fbm" : "sine"},
                {"hurst", c.noise.hurst},
                {"modes", c.noise.modes},
                {"decay", c.noise.decay},
                {"eigenvalues", vec_json(c.noise.eigenvalues)},
                {"seed", c.noise.seed},
                {"level", c.noise.level},
                {"horizon", c.noise.horizon},
                {"amplitude", c.noise.amplitude},
                {"lift_scale", c.noise.lift_scale}};
  j["operator"] = {{"modes", c.op.modes},
                   {"eigenvalues", c.op.eigenvalues.empty() ? Json("dirichlet_interval") : vec_json(c.op.eigenvalues)}};
  j["kernel"] = {{"profile", to_string(c.kernel.profile)},
                 {"theta", c.kernel.theta.empty() ? Json("parabola") : vec_json(c.kernel.theta)},
                 {"nodes", c.kernel.nodes}};
  j["exponents"] = {{"alpha", c.solve.alpha}, {"beta", c.solve.beta}};
  j["solve"] = {{"radius_factor", c.solve.radius_factor},
                {"lambda_star", c.solve.lambda_star},
                {"max_iterations", c.solve.max_iterations},
                {"tolerance", c.solve.tolerance},
                {"xi", vec_json(c.xi)}};
  return j;
}

Json checks_json(const RunConfig& cfg, const std::vector<CheckResult>& results) {
  Json j;
  j["config"] = config_json(cfg);
  Json list = Json::array();
  std::size_t passed = 0;
  for (const CheckResult& r : results) {
    passed += r.pass ? 1 : 0;
    list.push_back({{"name", r.name},
                    {"value", r.value},
                    {"threshold", r.threshold},
                    {"relation", r.lower_bound ? ">=" : "<="},
                    {"status", r.pass ? "pass" : "fail"}});
  }
  j["checks"] = std::move(list);
  j["summary"] = {{"total", results.size()}, {"passed", passed}, {"failed", results.size() - passed}};
  return j;
}

Json solve_json(const RunConfig& cfg, const SolveReport& rep, const LemmaDiagnostics& d) {
  Json j;
  j["config"] = config_json(cfg);
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["halvings"] = rep.halvings;
  j["horizon"] = rep.horizon;
  j["steps"] = rep.steps;
  Json attempts = Json::array();
  for (std::size_t a : rep.attempts) attempts.push_back(a);
  j["attempts"] = attempts;
  j["factor"] = rep.factor;
  j["deltas"] = vec_json(rep.deltas);
  j["ratios"] = vec_json(rep.ratios);
  j["x_norm"] = rep.x_norm;
  j["radius"] = rep.radius;
  j["constraint_residual"] = rep.constraint;
  j["diagnostics"] = {{"c_hatdelta", d.c_hatdelta}, {"c_dbeta", d.c_dbeta},   {"c_norm", d.c_norm},
                      {"c_help", d.c_help},         {"help_slope", d.help_slope}, {"c_z", d.c_z},
                      {"c_z_norm", d.c_z_norm}};
  return j;
}

std::string area_csv(const RoughLift& lift) {
  const Eigen::Index m = lift.modes();
  std::ostringstream os;
  os << "t_index,s_index";
  for (Eigen::Index p = 1; p <= m; ++p)
    for (Eigen::Index q = 1; q <= m; ++q) os << ",a_" << p << '_' << q;
  os << '\n';
  const std::size_t n = lift.grid().nodes();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < k; ++j) {
      os << k << ',' << j;
      const auto col = lift.second.at(k, j);
      for (Eigen::Index i = 0; i < col.size(); ++i) os << ',' << format_double(col(i));
      os << '\n';
    }
  return os.str();
}

Json lift_meta_json(const RunConfig& cfg, const RoughLift& lift, int level) {
  Json j;
  j["kind"] = cfg.noise.kind == NoiseKind::Fbm ? "fbm" : "sine";
  j["hurst"] = cfg.noise.hurst;
  j["modes"] = cfg.noise.modes;
  j["decay"] = cfg.noise.decay;
  j["eigenvalues"] = vec_json(cfg.noise.eigenvalues);
  j["seed"] = cfg.noise.seed;
  j["level"] = level;
  j["horizon"] = lift.grid().horizon();
  j["alpha"] = lift.alpha;
  j["lift_scale"] = cfg.noise.lift_scale;
  j["max_chen_defect"] = max_chen_defect(lift);
  return j;
}

std::vector<ConvergeRow> converge_table(const RunConfig& cfg) {
  cfg.validate();
  std::vector<int> levels = cfg.converge.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const int finest = levels.back();
  const SpectralOperator op = cfg.spectral_operator();
  const KernelCoefficient G = cfg.coefficient();
  const Eigen::VectorXd xi = cfg.initial_value();
  const bool sine = cfg.noise.kind == NoiseKind::Sine;
  const double c = cfg.noise.lift_scale;

  // the draw lives on the sampling level; coarse levels restrict it
  const int sample_level = sine ? cfg.converge.reference_level : std::max(finest, std::min(cfg.converge.reference_level, kMaxSampleLevel));
  const Path omega = cfg.noise_path(sample_level);
  auto restrict_to = [&](int L) { return coarsen(omega, std::size_t{1} << (sample_level - L)); };

  const int ld = std::clamp(std::min(sample_level, 9), finest, sample_level);
  std::vector<LiftStudyRow> dist = lift_convergence_study(restrict_to(ld), levels, cfg.solve.alpha);

  Path reference;
  std::size_t ref_steps = 0;
  if (sine) {
    const Path w1 = c * omega, w2 = c * cfg.noise_path(cfg.converge.reference_level + 1);
    const Path r1 = exponential_euler(w1, op, G, xi), r2 = exponential_euler(w2, op, G, xi);
    reference = Path(omega.grid(), op.modes());
    for (std::size_t k = 0; k < omega.nodes(); ++k) reference[k] = 2.0 * r2[2 * k] - r1[k];
    ref_steps = omega.grid().steps();
  }

  std::vector<ConvergeRow> rows;
  std::vector<SolveReport> reports;
  for (int L : levels) {
    RoughLift lift = lift_on_grid(restrict_to(L), cfg.solve.alpha);
    if (c != 1.0) lift = scale_lift(lift, c);
    reports.push_back(picard_solve(lift, op, G, xi, cfg.solve));
    ConvergeRow row;
    row.level = L;
    row.steps = reports.back().steps;
    row.horizon = reports.back().horizon;
    row.iterations = reports.back().iterations;
    if (sine) {
      const Path euler = exponential_euler(c * restrict_to(L), op, G, xi);
      const std::size_t f = ref_steps >> L;
      for (std::size_t k = 0; k <= row.steps; ++k) {
        row.solution_error = std::max(row.solution_error, (reports.back().solution.y[k] - reference[k * f]).norm());
        row.euler_error = std::max(row.euler_error, (euler[k] - reference[k * f]).norm());
      }
    }
    rows.push_back(row);
  }
  if (!sine) {
    const SolveReport& ref = reports.back();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t f = std::size_t{1} << (finest - rows[i].level);
      const std::size_t last = std::min(rows[i].steps, ref.steps / f);
      for (std::size_t k = 0; k <= last; ++k)
        rows[i].solution_error =
            std::max(rows[i].solution_error, (reports[i].solution.y[k] - ref.solution.y[k * f]).norm());
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].lift_distance = dist[i].distance;
  return rows;
}

std::string converge_csv(const std::vector<ConvergeRow>& rows) {
  std::ostringstream os;
  os << "level,steps,horizon,lift_distance,solution_error,euler_error,iterations\n";
  for (const ConvergeRow& r : rows)
    os << r.level << ',' << r.steps << ',' << format_double(r.horizon) << ',' << format_double(r.lift_distance)
       << ',' << format_double(r.solution_error) << ',' << format_double(r.euler_error) << ',' << r.iterations
       << '\n';
  return os.str();
}

}  // namespace rpde
