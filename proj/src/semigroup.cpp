#include "rpde/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rpde {

namespace {

// mu^p with 0^0 = 1 and 0^p = 0 for p > 0.
double mpow(double mu, double p) {
  if (p == 0.0) return 1.0;
  if (mu == 0.0) return p > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(mu, p);
}

}  // namespace

SpectralOperator::SpectralOperator(Eigen::VectorXd eigenvalues) : mu_(std::move(eigenvalues)) {
  if (mu_.size() < 1) throw SemigroupError("operator needs at least one mode");
  for (Eigen::Index j = 0; j < mu_.size(); ++j) {
    if (!(mu_(j) >= 0.0) || !std::isfinite(mu_(j))) throw SemigroupError("eigenvalues must be finite and >= 0");
    if (j > 0 && mu_(j) < mu_(j - 1)) throw SemigroupError("eigenvalues must be nondecreasing");
  }
}

SpectralOperator SpectralOperator::dirichlet_interval(int modes) {
  if (modes < 1) throw SemigroupError("operator needs at least one mode");
  Eigen::VectorXd mu(modes);
  for (int j = 0; j < modes; ++j) {
    const double k = (j + 1) * std::numbers::pi;
    mu(j) = k * k;
  }
  return SpectralOperator(mu);
}

SpectralOperator SpectralOperator::identity(int modes) {
  if (modes < 1) throw SemigroupError("operator needs at least one mode");
  return SpectralOperator(Eigen::VectorXd::Zero(modes));
}

Eigen::VectorXd SpectralOperator::exp_factors(double t) const {
  if (t < 0.0) throw SemigroupError("semigroup time must be nonnegative");
  return (-mu_.array() * t).exp().matrix();
}

Eigen::VectorXd SpectralOperator::apply_S(double t, const Eigen::VectorXd& x) const {
  if (x.size() != mu_.size()) throw SemigroupError("dimension mismatch in apply_S");
  return (exp_factors(t).array() * x.array()).matrix();
}

Eigen::VectorXd SpectralOperator::power_diag(double gamma) const {
  Eigen::VectorXd d(mu_.size());
  for (Eigen::Index j = 0; j < mu_.size(); ++j) d(j) = mpow(mu_(j), gamma);
  return d;
}

Eigen::VectorXd SpectralOperator::frac_power(double gamma, const Eigen::VectorXd& x) const {
  if (x.size() != mu_.size()) throw SemigroupError("dimension mismatch in frac_power");
  return (power_diag(gamma).array() * x.array()).matrix();
}

SpectralOperator SpectralOperator::truncate(int modes) const {
  if (modes < 1 || modes > this->modes()) throw SemigroupError("truncate: mode count out of range");
  return SpectralOperator(mu_.head(modes));
}

SemigroupHandle::SemigroupHandle(const SpectralOperator& op, const TimeGrid& grid)
    : op_(op), grid_(grid), cache_(op.modes(), static_cast<Eigen::Index>(grid.nodes())) {
  const double h = grid.h();
  for (std::size_t k = 0; k < grid.nodes(); ++k)
    cache_.col(static_cast<Eigen::Index>(k)) = op.exp_factors(static_cast<double>(k) * h);
}

SemigroupHandle SemigroupHandle::head(std::size_t steps) const {
  SemigroupHandle s;
  s.op_ = op_;
  s.grid_ = grid_.head(steps);
  s.cache_ = cache_.leftCols(static_cast<Eigen::Index>(steps + 1));
  return s;
}

std::vector<double> probe_times(const TimeGrid& grid) {
  std::vector<double> ts;
  const double T = grid.horizon();
  for (int i = 0; i <= 40; ++i) ts.push_back(std::ldexp(T, -i));
  for (std::size_t k = 1; k < grid.nodes(); ++k) ts.push_back(grid.node(k));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

double probe_hg1(const SpectralOperator& op, const TimeGrid& grid, double eta, double kappa) {
  if (eta < kappa) throw SemigroupError("probe_hg1 needs eta >= kappa");
  const double p = eta - kappa;
  double best = 0.0;
  for (double t : probe_times(grid))
    for (int j = 0; j < op.modes(); ++j) {
      const double mu = op.eigenvalue(j);
      best = std::max(best, mpow(mu, p) * std::exp(-mu * t) * std::pow(t, p));
    }
  return best;
}

double probe_hg2(const SpectralOperator& op, const TimeGrid& grid, double sigma, double theta) {
  const double d = sigma - theta;
  if (d < 0.0 || d > 1.0) throw SemigroupError("probe_hg2 needs sigma - theta in [0, 1]");
  double best = 0.0;
  for (double t : probe_times(grid))
    for (int j = 0; j < op.modes(); ++j) {
      const double mu = op.eigenvalue(j);
      const double gap = -std::expm1(-mu * t);
      if (gap == 0.0) continue;
      best = std::max(best, gap * std::pow(mu, -d) * std::pow(t, -d));
    }
  return best;
}

std::pair<double, double> probe_difference_lemma(const SpectralOperator& op, const TimeGrid& grid,
                                                 const DifferenceLemmaExponents& ex) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(ex.nu) || !unit(ex.eta) || !unit(ex.mu) || ex.kappa < 0.0 || ex.gamma < 0.0 || ex.rho < 0.0 ||
      ex.kappa > ex.gamma + ex.mu)
    throw SemigroupError("difference lemma exponent constraints violated");

  // coarse nodes plus points clustering at 0 where the bounds are singular
  std::vector<double> ts;
  const double T = grid.horizon();
  const std::size_t coarse = std::min<std::size_t>(grid.steps(), 16);
  for (std::size_t k = 0; k <= coarse; ++k) ts.push_back(T * static_cast<double>(k) / static_cast<double>(coarse));
  for (int i = 5; i <= 20; ++i) ts.push_back(std::ldexp(T, -i));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  const double gk = ex.gamma - ex.kappa;
  const Eigen::VectorXd& mu = op.eigenvalues();
  double first = 0.0, second = 0.0;
  const std::size_t n = ts.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d) {
          const double q = ts[a], r = ts[b], s = ts[c], t = ts[d];
          double l1 = 0.0, l2 = 0.0;
          for (Eigen::Index j = 0; j < mu.size(); ++j) {
            const double m = mu(j);
            const double etr = std::exp(-m * (t - r)), etq = std::exp(-m * (t - q));
            const double esr = std::exp(-m * (s - r)), esq = std::exp(-m * (s - q));
            if (m > 0.0 || gk == 0.0) l1 = std::max(l1, mpow(m, gk) * std::abs(etr - etq));
            l2 = std::max(l2, std::abs(etr - esr - etq + esq));
          }
          const double r1 = std::pow(r - q, ex.mu) * std::pow(t - r, -ex.mu - ex.gamma + ex.kappa);
          const double r2 = std::pow(t - s, ex.eta) * std::pow(r - q, ex.nu) * std::pow(s - r, -(ex.nu + ex.eta));
          first = std::max(first, l1 / r1);
          second = std::max(second, l2 / r2);
        }
  return {first, second};
}

double probe_betabeta(const SpectralOperator& op, const TimeGrid& grid, const Eigen::VectorXd& x, double beta) {
  if (beta < 0.0 || beta > 1.0) throw SemigroupError("probe_betabeta needs beta in [0, 1]");
  const double nx = x.norm();
  if (nx == 0.0) throw SemigroupError("probe_betabeta needs x != 0");
  const std::size_t n = grid.nodes();
  std::vector<Eigen::VectorXd> flow(n);
  double sup = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    flow[k] = op.apply_S(grid.node(k), x);
    sup = std::max(sup, flow[k].norm());
  }
  double semi = 0.0;
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t j = 1; j < k; ++j) {
      const double s = grid.node(j), t = grid.node(k);
      semi = std::max(semi, std::pow(s, beta) * (flow[k] - flow[j]).norm() / std::pow(t - s, beta));
    }
  return (sup + semi) / nx;
}

}  // namespace rpde
