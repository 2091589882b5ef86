#pragma once

#include "rpde/grid.hpp"
#include "rpde/semigroup.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rpde {

struct SewingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Germ on grid pairs (v, u), v >= u, node indices.
using GridGerm = std::function<Eigen::VectorXd(std::size_t v, std::size_t u)>;
/// Germ on arbitrary times v >= u.
using TimeGerm = std::function<Eigen::VectorXd(double v, double u)>;

struct SewingExponents {
  double alpha = 0.5;
  double beta = 0.0;
  double rho = 2.0;
  bool has_second = false;
  double beta2 = 0.0;
  double rho2 = 2.0;

  /// 0 <= alpha, beta <= 1, rho > 1, alpha + beta <= rho, and for the
  /// optional pair rho2 - beta2 <= rho - beta.
  void validate() const;
};

struct SewingProblem {
  GridGerm germ;
  /// Optional limit of refined partition sums on a single grid step.  The
  /// noise is linear between nodes, so for the supporting germs this limit
  /// has a closed form; when set it replaces Xi on the finest level.
  GridGerm closure;
  Eigen::Index dim = 1;
  SewingExponents exponents;
  SemigroupHandle sg;
};

struct SewingOptions {
  /// Dyadic refinement levels used for the defect diagnostic; -1 picks the
  /// largest D with 2^D dividing the step count, capped at 10.
  int depth = -1;
  /// Accumulate the grid sum from the far end instead of by recursion.
  bool reverse = false;
  /// Abort when defects grow at two consecutive levels n >= 3.
  bool abort_on_growth = true;
  /// Defects below floor * germ scale count as converged.
  double floor = 1e-13;
};

struct SewingResult {
  Path integral;                  ///< I Xi, I Xi_0 = 0
  std::vector<double> defects;    ///< d_n = max |N^n - N^{n+1}| over base cells
  std::vector<double> ratios;     ///< d_{n+1} / d_n for n >= 3 above the floor
  double scale = 0.0;             ///< max |Xi| over base cells
  double tolerance = 0.0;         ///< geometric tail estimate of the last defect
  double closure_gap = 0.0;       ///< max |grid-level sum - closure sum| over base cells
  bool decay_ok = true;           ///< ratios <= 2^{-(rho-1)} + 0.1
  std::string warning;
  SemigroupHandle sg;

  /// (delta^ I Xi)_{kj}.
  Eigen::VectorXd hat_increment(std::size_t k, std::size_t j) const;
  TwoParamField hat_field() const;
};

/// Memoized germ evaluation for a single run.
class GermCache {
 public:
  explicit GermCache(const GridGerm& g) : germ_(g) {}
  const Eigen::VectorXd& operator()(std::size_t v, std::size_t u);
  std::size_t evaluations() const { return evals_; }

 private:
  const GridGerm& germ_;
  std::unordered_map<std::size_t, Eigen::VectorXd> memo_;
  std::size_t evals_ = 0;
};

SewingResult sew(const SewingProblem& problem, const SewingOptions& opts = {});

/// sum over consecutive nodes [u, v] of S(t - v) Xi_{vu}; nodes ascending on the grid.
Eigen::VectorXd partition_sum(const SewingProblem& problem, const std::vector<std::size_t>& nodes);

/// Same for a germ on arbitrary times.
Eigen::VectorXd partition_sum(const TimeGerm& germ, const SpectralOperator& op, const std::vector<double>& times);

/// [s, t] split into 2^n equal parts (nodes must land on the grid).
std::vector<std::size_t> dyadic_partition(std::size_t j, std::size_t k, int n);
/// [s, t] split into 3^n equal parts (nodes must land on the grid).
std::vector<std::size_t> triadic_partition(std::size_t j, std::size_t k, int n);

enum class PartitionFamily { Dyadic, Triadic };

struct LimitTable {
  std::vector<double> mesh;
  std::vector<Eigen::VectorXd> values;
};

/// Partition sums on [s, t] for refinement levels 0..levels of a family.
LimitTable integral_as_limit(const TimeGerm& germ, const SpectralOperator& op, double s, double t,
                             PartitionFamily family, int levels);

/// Geometric tail estimate of the limit error from the last two increments.
double limit_tolerance(const LimitTable& table);

/// max over pairs with s >= tau of |(delta^ I Xi)_{ts} - (delta^ I theta_tau Xi)_{t-tau, s-tau}|.
double shift_check(const SewingProblem& problem, std::size_t tau, const SewingOptions& opts = {});

/// delta^ I Xi - Xi on every pair.
TwoParamField remainder_field(const SewingResult& result, const SewingProblem& problem);

struct RateFit {
  double slope = 0.0;
  std::size_t pairs = 0;
  bool exact = false;
};

/// Least-squares slope of log(s^beta |remainder_ts|) against log(t - s) over
/// pairs with s >= T/8 and at least `min_steps` steps.
RateFit remainder_rate(const SewingResult& result, const SewingProblem& problem, double beta,
                       std::size_t min_steps = 4, std::size_t stride = 1);

/// Least-squares slope of log |r| against log (t - s) for a tabulated set.
RateFit fit_slope(const std::vector<double>& lengths, const std::vector<double>& values);

/// sup over pairs of |(delta^ I Xi)_ts|_{D_eps} / (t - s)^{alpha - eps}.
double frac_estimate_check(const SewingResult& result, double eps, double alpha);

/// Young germ Xi_vu = S(v - u) y_u (omega_v - omega_u) for a W-valued path y
/// and a scalar path omega on the semigroup's grid; declared exponents
/// alpha = 1, beta = 0, rho = 2 (both paths C^1).
SewingProblem young_problem(const Path& y, const Path& omega, const SemigroupHandle& sg);

/// The same germ on arbitrary times for time functions y and omega.
TimeGerm young_time_germ(std::function<Eigen::VectorXd(double)> y, std::function<double(double)> omega,
                         const SpectralOperator& op);

/// [sum_{k=1}^{n-1} k^-g (n-k)^-e] / [sum_{k=0}^{n-1} (k+1)^-g (n-k)^-e].
double convolution_ratio(double gamma, double eps, long n);

/// max of convolution_ratio over 2 <= n <= n_max.
double check_convolution_sum(double gamma, double eps, long n_max);

/// The closed bound max(1, gamma / (1 - eps)) + 1.
inline double convolution_bound(double gamma, double eps) {
  const double r = gamma / (1.0 - eps);
  return (r > 1.0 ? r : 1.0) + 1.0;
}

}  // namespace rpde
