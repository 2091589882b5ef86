#pragma once

#include "rpde/grid.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>
#include <vector>

namespace rpde {

struct SemigroupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Diagonal generator A = -diag(mu_j) on span{e_1..e_M}.
class SpectralOperator {
 public:
  SpectralOperator() = default;
  explicit SpectralOperator(Eigen::VectorXd eigenvalues);

  /// mu_j = (j pi)^2, the Dirichlet Laplacian on (0, 1).
  static SpectralOperator dirichlet_interval(int modes);
  /// All eigenvalues zero, S(t) = Id.
  static SpectralOperator identity(int modes);

  int modes() const { return static_cast<int>(mu_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return mu_; }
  double eigenvalue(int j) const { return mu_(j); }

  /// Component j scaled by e^{-mu_j t}.
  Eigen::VectorXd exp_factors(double t) const;
  Eigen::VectorXd apply_S(double t, const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_A(const Eigen::VectorXd& x) const { return -(mu_.array() * x.array()).matrix(); }

  /// Component j scaled by mu_j^gamma.
  Eigen::VectorXd frac_power(double gamma, const Eigen::VectorXd& x) const;
  double d_gamma_norm(double gamma, const Eigen::VectorXd& x) const { return frac_power(gamma, x).norm(); }
  /// Diagonal of (-A)^gamma as a vector.
  Eigen::VectorXd power_diag(double gamma) const;

  SpectralOperator truncate(int modes) const;

 private:
  Eigen::VectorXd mu_;
};

/// A SpectralOperator together with e^{-mu_j k h} for every step count k
/// of a grid.
class SemigroupHandle {
 public:
  SemigroupHandle() = default;
  SemigroupHandle(const SpectralOperator& op, const TimeGrid& grid);

  const SpectralOperator& op() const { return op_; }
  const TimeGrid& grid() const { return grid_; }
  int modes() const { return op_.modes(); }

  /// e^{-mu_j k h} for the step count k.
  auto factors(std::size_t k) const { return cache_.col(static_cast<Eigen::Index>(k)); }
  Eigen::VectorXd apply_steps(std::size_t k, const Eigen::VectorXd& x) const {
    return (factors(k).array() * x.array()).matrix();
  }
  Eigen::VectorXd apply(double t, const Eigen::VectorXd& x) const { return op_.apply_S(t, x); }

  /// Same operator on the first `steps` steps of the grid.
  SemigroupHandle head(std::size_t steps) const;

 private:
  SpectralOperator op_;
  TimeGrid grid_;
  Eigen::MatrixXd cache_;
};

/// Log-spaced times T 2^{-i}, i = 0..40, merged with the grid nodes (t > 0).
std::vector<double> probe_times(const TimeGrid& grid);

/// sup over probe times and modes of mu^{eta-kappa} e^{-mu t} t^{eta-kappa}.
double probe_hg1(const SpectralOperator& op, const TimeGrid& grid, double eta, double kappa);

/// sup over probe times and modes of (1 - e^{-mu t}) mu^{theta-sigma} t^{theta-sigma}.
double probe_hg2(const SpectralOperator& op, const TimeGrid& grid, double sigma, double theta);

struct DifferenceLemmaExponents {
  double nu = 0.5, eta = 0.5, mu = 0.5, kappa = 0.0, gamma = 0.0, rho = 0.0;
};

/// Two measured constants: the first and the four-term difference bound,
/// each the sup of left side over right side on sampled q < r < s < t.
std::pair<double, double> probe_difference_lemma(const SpectralOperator& op, const TimeGrid& grid,
                                                 const DifferenceLemmaExponents& ex);

/// ||S(.) x||_{beta,beta} / |x| on the grid.
double probe_betabeta(const SpectralOperator& op, const TimeGrid& grid, const Eigen::VectorXd& x,
                      double beta);

}  // namespace rpde
