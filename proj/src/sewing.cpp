#include "rpde/sewing.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace rpde {

void SewingExponents::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(alpha)) throw SewingError("sewing: alpha must lie in [0, 1]");
  if (!unit(beta)) throw SewingError("sewing: beta must lie in [0, 1]");
  if (!(rho > 1.0)) throw SewingError("sewing: rho must exceed 1");
  if (alpha + beta > rho) throw SewingError("sewing: alpha + beta must not exceed rho");
  if (has_second) {
    if (!unit(beta2)) throw SewingError("sewing: beta' must lie in [0, 1]");
    if (!(rho2 > 1.0)) throw SewingError("sewing: rho' must exceed 1");
    if (rho2 - beta2 > rho - beta) throw SewingError("sewing: rho' - beta' must not exceed rho - beta");
  }
}

const Eigen::VectorXd& GermCache::operator()(std::size_t v, std::size_t u) {
  const std::size_t key = v * (v + 1) / 2 + u;
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  ++evals_;
  return memo_.emplace(key, germ_(v, u)).first->second;
}

Eigen::VectorXd SewingResult::hat_increment(std::size_t k, std::size_t j) const {
  return integral[k] - (sg.factors(k - j).array() * integral[j].array()).matrix();
}

TwoParamField SewingResult::hat_field() const {
  TwoParamField f(integral.grid(), integral.dim());
  for (std::size_t k = 0; k < integral.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j) f.set(k, j, hat_increment(k, j));
  return f;
}

namespace {

int auto_depth(std::size_t steps) {
  int d = 0;
  while (d < 10 && steps % (std::size_t{2} << d) == 0) ++d;
  return d;
}

void check_problem(const SewingProblem& p) {
  p.exponents.validate();
  if (!p.germ) throw SewingError("sewing: empty germ");
  if (p.dim != p.sg.modes()) throw SewingError("sewing: germ dimension differs from semigroup modes");
}

}  // namespace

SewingResult sew(const SewingProblem& problem, const SewingOptions& opts) {
  check_problem(problem);
  const SemigroupHandle& sg = problem.sg;
  const TimeGrid& g = sg.grid();
  const std::size_t steps = g.steps();
  GermCache xi(problem.germ);
  std::unique_ptr<GermCache> fine;
  if (problem.closure) fine = std::make_unique<GermCache>(problem.closure);
  auto finest = [&](std::size_t v, std::size_t u) -> const Eigen::VectorXd& { return fine ? (*fine)(v, u) : xi(v, u); };

  SewingResult res;
  res.sg = sg;
  res.integral = Path(g, problem.dim);

  // finest partition: every grid step
  if (!opts.reverse) {
    for (std::size_t k = 0; k < steps; ++k) {
      const Eigen::VectorXd& x = finest(k + 1, k);
      if (x.size() != problem.dim) throw SewingError("sewing: germ returned wrong dimension");
      res.integral[k + 1] = (sg.factors(1).array() * res.integral[k].array()).matrix() + x;
    }
  } else {
    for (std::size_t t = 1; t <= steps; ++t) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(problem.dim);
      for (std::size_t k = 0; k < t; ++k) {
        const std::size_t kk = t - 1 - k;
        acc += (sg.factors(t - kk - 1).array() * finest(kk + 1, kk).array()).matrix();
      }
      res.integral[t] = acc;
    }
  }

  // defect diagnostic on dyadic refinements of base cells of 2^D steps
  int depth = opts.depth < 0 ? auto_depth(steps) : opts.depth;
  if (depth > 0 && steps % (std::size_t{1} << depth) != 0)
    throw SewingError("sewing: depth exceeds the grid's dyadic structure");
  const std::size_t cell = std::size_t{1} << depth;
  const std::size_t cells = steps / cell;
  std::vector<std::vector<Eigen::VectorXd>> sums(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t s = c * cell, t = s + cell;
    res.scale = std::max(res.scale, xi(t, s).norm());
    for (int n = 0; n <= depth; ++n) {
      const std::size_t len = cell >> n;
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(problem.dim);
      for (std::size_t u = s; u < t; u += len)
        acc += (sg.factors(t - u - len).array() * xi(u + len, u).array()).matrix();
      sums[c].push_back(std::move(acc));
    }
    if (fine) {
      const Eigen::VectorXd closed = res.integral[t] - (sg.factors(cell).array() * res.integral[s].array()).matrix();
      res.closure_gap = std::max(res.closure_gap, (closed - sums[c].back()).norm());
    }
  }
  for (int n = 0; n < depth; ++n) {
    double d = 0.0;
    for (std::size_t c = 0; c < cells; ++c) d = std::max(d, (sums[c][n] - sums[c][n + 1]).norm());
    res.defects.push_back(d);
  }

  const double floor = opts.floor * std::max(res.scale, 1e-300);
  const double bound = std::pow(2.0, -(problem.exponents.rho - 1.0)) + 0.1;
  int growth = 0;
  for (std::size_t n = 3; n + 1 < res.defects.size(); ++n) {
    const double a = res.defects[n], b = res.defects[n + 1];
    if (a <= floor || b <= floor) { growth = 0; continue; }
    const double r = b / a;
    res.ratios.push_back(r);
    if (r > bound) res.decay_ok = false;
    growth = r > 1.0 ? growth + 1 : 0;
    if (growth >= 2 && opts.abort_on_growth) {
      std::ostringstream os;
      os << "sewing: defects grow at consecutive levels " << n << " and " << n + 1
         << "; the germ violates the declared defect bound";
      throw SewingError(os.str());
    }
  }
  if (!res.decay_ok) {
    std::ostringstream os;
    os << "defect ratios exceed 2^{-(rho-1)} + 0.1 = " << bound << " for the declared rho";
    res.warning = os.str();
  }
  if (!res.defects.empty()) {
    const double last = res.defects.back();
    double r = res.ratios.empty() ? 0.5 : res.ratios.back();
    r = std::min(r, 0.99);
    res.tolerance = last <= floor ? floor : last * r / (1.0 - r);
  }
  return res;
}

Eigen::VectorXd partition_sum(const SewingProblem& problem, const std::vector<std::size_t>& nodes) {
  check_problem(problem);
  if (nodes.size() < 2) throw SewingError("partition needs at least two nodes");
  if (nodes.back() > problem.sg.grid().steps()) throw SewingError("partition not contained in grid");
  const std::size_t t = nodes.back();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(problem.dim);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const std::size_t u = nodes[i], v = nodes[i + 1];
    if (v <= u) throw SewingError("partition nodes must increase");
    acc += (problem.sg.factors(t - v).array() * problem.germ(v, u).array()).matrix();
  }
  return acc;
}

Eigen::VectorXd partition_sum(const TimeGerm& germ, const SpectralOperator& op, const std::vector<double>& times) {
  if (times.size() < 2) throw SewingError("partition needs at least two nodes");
  const double t = times.back();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(op.modes());
  for (std::size_t i = 0; i + 1 < times.size(); ++i) acc += op.apply_S(t - times[i + 1], germ(times[i + 1], times[i]));
  return acc;
}

namespace {

std::vector<std::size_t> equal_partition(std::size_t j, std::size_t k, std::size_t parts) {
  if (k <= j || (k - j) % parts != 0) throw SewingError("partition not contained in grid");
  std::vector<std::size_t> nodes;
  const std::size_t len = (k - j) / parts;
  for (std::size_t i = 0; i <= parts; ++i) nodes.push_back(j + i * len);
  return nodes;
}

}  // namespace

std::vector<std::size_t> dyadic_partition(std::size_t j, std::size_t k, int n) {
  return equal_partition(j, k, std::size_t{1} << n);
}

std::vector<std::size_t> triadic_partition(std::size_t j, std::size_t k, int n) {
  std::size_t parts = 1;
  for (int i = 0; i < n; ++i) parts *= 3;
  return equal_partition(j, k, parts);
}

LimitTable integral_as_limit(const TimeGerm& germ, const SpectralOperator& op, double s, double t,
                             PartitionFamily family, int levels) {
  if (!(t > s)) throw SewingError("integral_as_limit needs s < t");
  LimitTable table;
  const double base = family == PartitionFamily::Dyadic ? 2.0 : 3.0;
  for (int n = 0; n <= levels; ++n) {
    const long parts = std::lround(std::pow(base, n));
    std::vector<double> times(static_cast<std::size_t>(parts) + 1);
    for (long i = 0; i <= parts; ++i) times[static_cast<std::size_t>(i)] = s + (t - s) * static_cast<double>(i) / static_cast<double>(parts);
    times.back() = t;
    table.mesh.push_back((t - s) / static_cast<double>(parts));
    table.values.push_back(partition_sum(germ, op, times));
  }
  return table;
}

double limit_tolerance(const LimitTable& table) {
  const std::size_t n = table.values.size();
  if (n < 2) return 0.0;
  const double last = (table.values[n - 1] - table.values[n - 2]).norm();
  if (n < 3) return last;
  const double prev = (table.values[n - 2] - table.values[n - 3]).norm();
  if (prev <= 0.0) return last;
  const double r = std::min(last / prev, 0.99);
  return last * r / (1.0 - r);
}

double shift_check(const SewingProblem& problem, std::size_t tau, const SewingOptions& opts) {
  const std::size_t steps = problem.sg.grid().steps();
  if (tau >= steps) throw SewingError("shift_check needs tau before the horizon");
  if (tau == 0) return 0.0;
  SewingOptions o = opts;
  o.depth = 0;
  const SewingResult base = sew(problem, o);

  SewingProblem shifted = problem;
  const GridGerm g = problem.germ;
  shifted.germ = [g, tau](std::size_t v, std::size_t u) { return g(v + tau, u + tau); };
  SemigroupHandle sh(problem.sg.op(), TimeGrid::with_steps(problem.sg.grid().horizon() - problem.sg.grid().node(tau),
                                                           steps - tau));
  shifted.sg = sh;
  const SewingResult moved = sew(shifted, o);

  double worst = 0.0;
  for (std::size_t k = tau; k <= steps; ++k)
    for (std::size_t j = tau; j < k; ++j)
      worst = std::max(worst, (base.hat_increment(k, j) - moved.hat_increment(k - tau, j - tau)).norm());
  return worst;
}

TwoParamField remainder_field(const SewingResult& result, const SewingProblem& problem) {
  const TimeGrid& g = result.integral.grid();
  TwoParamField f(g, problem.dim);
  for (std::size_t k = 0; k < g.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j) f.set(k, j, result.hat_increment(k, j) - problem.germ(k, j));
  return f;
}

RateFit fit_slope(const std::vector<double>& lengths, const std::vector<double>& values) {
  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(values[i] > 0.0) || !(lengths[i] > 0.0)) continue;
    const double x = std::log(lengths[i]), y = std::log(values[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  fit.pairs = n;
  if (n < 3) throw SewingError("rate fit: insufficient pairs");
  const double dn = static_cast<double>(n);
  const double den = sxx - sx * sx / dn;
  if (!(std::abs(den) > 0.0)) throw SewingError("rate fit: degenerate lengths");
  fit.slope = (sxy - sx * sy / dn) / den;
  return fit;
}

RateFit remainder_rate(const SewingResult& result, const SewingProblem& problem, double beta, std::size_t min_steps,
                       std::size_t stride) {
  const TimeGrid& g = result.integral.grid();
  const double T = g.horizon();
  std::vector<double> len, val;
  double biggest = 0.0, germ_scale = 0.0;
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t j = 0; j < g.nodes(); j += stride) {
    const double s = g.node(j);
    if (s < T / 8.0) continue;
    for (std::size_t k = j + min_steps; k < g.nodes(); k += stride) {
      const Eigen::VectorXd x = problem.germ(k, j);
      const double r = (result.hat_increment(k, j) - x).norm();
      germ_scale = std::max(germ_scale, x.norm());
      biggest = std::max(biggest, r);
      len.push_back(g.node(k) - s);
      val.push_back(std::pow(s, beta) * r);
    }
  }
  if (len.size() < 3) throw SewingError("remainder_rate: insufficient pairs");
  if (biggest <= 1e-14 * std::max(germ_scale, 1e-300)) {
    RateFit f;
    f.exact = true;
    f.pairs = len.size();
    return f;
  }
  return fit_slope(len, val);
}

double frac_estimate_check(const SewingResult& result, double eps, double alpha) {
  if (!(eps < alpha)) throw SewingError("frac_estimate_check needs eps < alpha");
  const TimeGrid& g = result.integral.grid();
  const Eigen::VectorXd pw = result.sg.op().power_diag(eps);
  double best = 0.0;
  for (std::size_t k = 1; k < g.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::VectorXd d = result.hat_increment(k, j);
      best = std::max(best, (pw.array() * d.array()).matrix().norm() / std::pow(g.node(k) - g.node(j), alpha - eps));
    }
  return best;
}

SewingProblem young_problem(const Path& y, const Path& omega, const SemigroupHandle& sg) {
  if (omega.dim() != 1) throw SewingError("young germ needs a scalar driver");
  if (!y.grid().same_as(sg.grid()) || !omega.grid().same_as(sg.grid()))
    throw SewingError("young germ paths must live on the semigroup grid");
  SewingProblem p;
  p.dim = y.dim();
  p.sg = sg;
  p.exponents = SewingExponents{1.0, 0.0, 2.0};
  p.germ = [y, omega, sg](std::size_t v, std::size_t u) -> Eigen::VectorXd {
    return (omega[v](0) - omega[u](0)) * sg.apply_steps(v - u, y[u]);
  };
  return p;
}

TimeGerm young_time_germ(std::function<Eigen::VectorXd(double)> y, std::function<double(double)> omega,
                         const SpectralOperator& op) {
  return [y = std::move(y), omega = std::move(omega), op](double v, double u) -> Eigen::VectorXd {
    return (omega(v) - omega(u)) * op.apply_S(v - u, y(u));
  };
}

double convolution_ratio(double gamma, double eps, long n) {
  if (!(gamma > 0.0 && gamma < 1.0 && eps > 0.0 && eps < 1.0))
    throw SewingError("convolution sum needs gamma, eps in (0, 1)");
  if (n < 1) throw SewingError("convolution sum needs n >= 1");
  double num = 0.0, den = 0.0;
  for (long k = 1; k < n; ++k) num += std::pow(static_cast<double>(k), -gamma) * std::pow(static_cast<double>(n - k), -eps);
  for (long k = 0; k < n; ++k)
    den += std::pow(static_cast<double>(k + 1), -gamma) * std::pow(static_cast<double>(n - k), -eps);
  return num / den;
}

double check_convolution_sum(double gamma, double eps, long n_max) {
  if (!(gamma > 0.0 && gamma < 1.0 && eps > 0.0 && eps < 1.0))
    throw SewingError("convolution sum needs gamma, eps in (0, 1)");
  if (n_max < 2) throw SewingError("convolution sum needs n_max >= 2");
  const std::size_t N = static_cast<std::size_t>(n_max) + 1;
  std::vector<double> a(N + 1), b(N + 1);
  for (std::size_t k = 1; k <= N; ++k) {
    a[k] = std::pow(static_cast<double>(k), -gamma);
    b[k] = std::pow(static_cast<double>(k), -eps);
  }
  double best = 0.0;
  for (long n = 2; n <= n_max; ++n) {
    double num = 0.0, den = 0.0;
    const std::size_t nn = static_cast<std::size_t>(n);
    for (std::size_t k = 1; k < nn; ++k) num += a[k] * b[nn - k];
    for (std::size_t k = 1; k <= nn; ++k) den += a[k] * b[nn + 1 - k];
    best = std::max(best, num / den);
  }
  return best;
}

}  // namespace rpde
