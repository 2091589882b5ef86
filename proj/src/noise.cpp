#include "rpde/noise.hpp"

#include "rpde/holder_algebra.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <tuple>

namespace rpde {

double QfBmSpec::lambda(int n) const {
  if (!eigenvalues.empty()) return eigenvalues.at(static_cast<std::size_t>(n - 1));
  return std::pow(static_cast<double>(n), -decay);
}

void QfBmSpec::validate() const {
  if (!(hurst > 1.0 / 3.0) || hurst > 0.5) throw NoiseError("Hurst index must lie in (1/3, 1/2]");
  if (modes < 1) throw NoiseError("noise needs at least one mode");
  if (!eigenvalues.empty() && static_cast<int>(eigenvalues.size()) < modes)
    throw NoiseError("explicit noise eigenvalue list shorter than mode count");
  double trace = 0.0;
  for (int n = 1; n <= modes; ++n) {
    const double l = lambda(n);
    if (!(l >= 0.0) || !std::isfinite(l)) throw NoiseError("noise eigenvalues must be finite and >= 0");
    trace += l;
  }
  if (!(trace > 0.0)) throw NoiseError("noise covariance trace must be positive");
  const int lv = grid.level();
  if (lv < 0 || lv > kMaxSampleLevel) throw NoiseError("sampling level must be a dyadic level <= 12");
}

namespace {

using FactorKey = std::tuple<double, double, std::size_t>;

std::shared_ptr<const Eigen::MatrixXd> covariance_factor(double H, const TimeGrid& grid) {
  static std::mutex mu;
  static std::map<FactorKey, std::shared_ptr<const Eigen::MatrixXd>> cache;
  const FactorKey key{H, grid.horizon(), grid.steps()};
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const Eigen::Index n = static_cast<Eigen::Index>(grid.steps());
  Eigen::MatrixXd c(n, n);
  const double two_h = 2.0 * H;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double t = grid.node(static_cast<std::size_t>(a + 1)), s = grid.node(static_cast<std::size_t>(b + 1));
      const double v = 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
      c(a, b) = v;
      c(b, a) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    // one regularization attempt before giving up
    const double jitter = 1e-12 * c.trace() / static_cast<double>(n);
    c.diagonal().array() += jitter;
    llt.compute(c);
    if (llt.info() != Eigen::Success) throw NoiseError("fBm covariance not positive definite");
  }
  auto f = std::make_shared<const Eigen::MatrixXd>(llt.matrixL());
  if (cache.size() > 16) cache.clear();
  cache.emplace(key, f);
  return f;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mode_seed(std::uint64_t seed, int n) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(n)));
}

Path sample_fbm(double hurst, const TimeGrid& grid, std::uint64_t seed) {
  if (!(hurst > 0.0) || !(hurst < 1.0)) throw NoiseError("Hurst index must lie in (0, 1)");
  const int lv = grid.level();
  if (lv < 0 || lv > kMaxSampleLevel) throw NoiseError("sampling level must be a dyadic level <= 12");
  auto factor = covariance_factor(hurst, grid);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = static_cast<Eigen::Index>(grid.steps());
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi(i) = normal(gen);
  const Eigen::VectorXd v = factor->triangularView<Eigen::Lower>() * xi;
  Path p(grid, 1);
  for (Eigen::Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i + 1)](0) = v(i);
  return p;
}

Path assemble_qfbm(const QfBmSpec& spec) {
  spec.validate();
  Path out(spec.grid, spec.modes);
  for (int n = 1; n <= spec.modes; ++n) {
    const Path b = sample_fbm(spec.hurst, spec.grid, mode_seed(spec.seed, n));
    out.values().row(n - 1) = std::sqrt(spec.lambda(n)) * b.values().row(0);
  }
  return out;
}

Path sine_noise(const TimeGrid& grid, int modes, double amplitude, double decay) {
  Path out(grid, modes);
  for (std::size_t k = 0; k < grid.nodes(); ++k)
    for (int n = 1; n <= modes; ++n) {
      const double c = amplitude * std::pow(static_cast<double>(n), -0.5 * decay);
      out[k](n - 1) = c * std::sin(2.0 * std::numbers::pi * n * grid.node(k) / grid.horizon());
    }
  return out;
}

Path refine_linear(const Path& omega, const TimeGrid& finer) {
  const TimeGrid& g = omega.grid();
  if (std::abs(finer.horizon() - g.horizon()) > 1e-14 * g.horizon() || finer.steps() % g.steps() != 0)
    throw GridError("refine_linear: target grid must refine the path grid");
  const std::size_t f = finer.steps() / g.steps();
  Path out(finer, omega.dim());
  for (std::size_t k = 0; k < g.steps(); ++k)
    for (std::size_t i = 0; i < f; ++i) {
      const double th = static_cast<double>(i) / static_cast<double>(f);
      out[k * f + i] = (1.0 - th) * omega[k] + th * omega[k + 1];
    }
  out[finer.steps()] = omega[g.steps()];
  return out;
}

RoughLift lift_on_grid(const Path& omega, double alpha) {
  const TimeGrid& g = omega.grid();
  const Eigen::Index m = omega.dim();
  RoughLift lift{omega, TwoParamField(g, m * m), alpha};
  Eigen::MatrixXd acc(m, m);
  for (std::size_t j = 0; j < g.nodes(); ++j) {
    acc.setZero();
    for (std::size_t k = j; k + 1 < g.nodes(); ++k) {
      const Eigen::VectorXd d = omega[k + 1] - omega[k];
      const Eigen::VectorXd off = omega[k] - omega[j];
      acc.noalias() += off * d.transpose() + 0.5 * d * d.transpose();
      Eigen::VectorXd col(m * m);
      for (Eigen::Index p = 0; p < m; ++p)
        for (Eigen::Index q = 0; q < m; ++q) col(p * m + q) = acc(p, q);
      lift.second.set(k + 1, j, col);
    }
  }
  return lift;
}

RoughLift lift_piecewise_linear(const Path& omega, int target_level, double alpha) {
  const TimeGrid& g = omega.grid();
  if (target_level < 0) throw NoiseError("lift level out of range");
  const std::size_t steps = std::size_t{1} << target_level;
  if (steps > g.steps() || g.steps() % steps != 0) throw NoiseError("lift level exceeds sampling level");
  return lift_on_grid(coarsen(omega, g.steps() / steps), alpha);
}

double chen_defect(const RoughLift& lift, std::size_t k, std::size_t m, std::size_t j) {
  if (!(j <= m && m <= k)) throw GridError("chen_defect needs s <= u <= t");
  const Eigen::Index d = lift.modes();
  const Eigen::VectorXd dus = lift.first[m] - lift.first[j];
  const Eigen::VectorXd dtu = lift.first[k] - lift.first[m];
  const auto ts = lift.second.at(k, j), us = lift.second.at(m, j), tu = lift.second.at(k, m);
  double s2 = 0.0;
  for (Eigen::Index p = 0; p < d; ++p)
    for (Eigen::Index q = 0; q < d; ++q) {
      const Eigen::Index i = p * d + q;
      const double r = ts(i) - us(i) - tu(i) - dus(p) * dtu(q);
      s2 += r * r;
    }
  return std::sqrt(s2);
}

double max_chen_defect(const RoughLift& lift) {
  const std::size_t n = lift.grid().nodes();
  const double scale = 1.0 + sup_norm(lift.second);
  double best = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m <= k; ++m)
      for (std::size_t j = 0; j <= m; ++j) best = std::max(best, chen_defect(lift, k, m, j));
  return best / scale;
}

RoughLift shift_lift(const RoughLift& lift, std::size_t tau) {
  const TimeGrid& g = lift.grid();
  if (tau >= g.steps()) throw NoiseError("shift must be strictly before the horizon");
  if (tau == 0) return lift;
  const std::size_t steps = g.steps() - tau;
  const TimeGrid sg = TimeGrid::with_steps(g.horizon() - g.node(tau), steps);
  RoughLift out{Path(sg, lift.modes()), TwoParamField(sg, lift.second.dim()), lift.alpha};
  for (std::size_t k = 0; k <= steps; ++k) out.first[k] = lift.first[k + tau] - lift.first[tau];
  for (std::size_t k = 0; k <= steps; ++k)
    for (std::size_t j = 0; j < k; ++j) out.second.set(k, j, lift.second.at(k + tau, j + tau));
  return out;
}

RoughLift head_lift(const RoughLift& lift, std::size_t steps) {
  const TimeGrid g = lift.grid().head(steps);
  RoughLift out{Path(g, lift.modes()), TwoParamField(g, lift.second.dim()), lift.alpha};
  for (std::size_t k = 0; k <= steps; ++k) out.first[k] = lift.first[k];
  for (std::size_t k = 0; k <= steps; ++k)
    for (std::size_t j = 0; j < k; ++j) out.second.set(k, j, lift.second.at(k, j));
  return out;
}

RoughLift scale_lift(const RoughLift& lift, double c) {
  RoughLift out = lift;
  out.first.values() *= c;
  out.second.raw() *= c * c;
  return out;
}

std::vector<LiftStudyRow> lift_convergence_study(const Path& omega, const std::vector<int>& levels, double alpha) {
  const TimeGrid& g = omega.grid();
  const int lmax = g.level();
  if (lmax < 0) throw NoiseError("convergence study needs a dyadic sampling grid");
  const RoughLift fine = lift_on_grid(omega, alpha);
  std::vector<LiftStudyRow> rows;
  for (int l : levels) {
    if (l < 0 || l > lmax) throw NoiseError("study level out of range");
    const Path coarse = coarsen(omega, std::size_t{1} << (lmax - l));
    const RoughLift approx = lift_on_grid(refine_linear(coarse, g), alpha);
    rows.push_back({l, rough_distance(approx, fine, alpha)});
  }
  return rows;
}

}  // namespace rpde
