#pragma once

#include "rpde/grid.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rpde {

struct NoiseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Trace-class Q-fBm omega = sum_n sqrt(lambda_n) b^H_n e_n, truncated to m modes.
struct QfBmSpec {
  double hurst = 0.5;
  int modes = 4;
  /// lambda_n = n^{-decay} unless `eigenvalues` is non-empty.
  double decay = 2.0;
  std::vector<double> eigenvalues;
  std::uint64_t seed = 1;
  TimeGrid grid{1.0, 8};

  double lambda(int n) const;  // n is 1-based
  void validate() const;
};

/// Largest sampling level accepted by the dense factorization sampler.
inline constexpr int kMaxSampleLevel = 12;

/// Scalar fBm on the grid nodes, exact in law, omega_0 = 0.
Path sample_fbm(double hurst, const TimeGrid& grid, std::uint64_t seed);

/// m-dimensional Q-fBm; mode n uses its own sub-stream of the seed.
Path assemble_qfbm(const QfBmSpec& spec);

/// Seed of the sub-stream driving mode n (1-based).
std::uint64_t mode_seed(std::uint64_t seed, int n);

/// Deterministic smooth noise omega^n_t = amplitude sqrt(lambda_n) sin(2 pi n t / T).
Path sine_noise(const TimeGrid& grid, int modes, double amplitude = 1.0, double decay = 2.0);

/// Linear interpolation of a path onto a grid of the same horizon whose
/// step count is a multiple of the path's.
Path refine_linear(const Path& omega, const TimeGrid& finer);

/// Exact lift of the piecewise-linear interpolant on the path's own grid.
RoughLift lift_on_grid(const Path& omega, double alpha = 0.45);

/// Lift of omega restricted to the level-L subgrid (L <= sampling level).
RoughLift lift_piecewise_linear(const Path& omega, int target_level, double alpha = 0.45);

/// Frobenius norm of the Chen residual at s <= u <= t (node indices k >= m >= j).
double chen_defect(const RoughLift& lift, std::size_t k, std::size_t m, std::size_t j);

/// max over all triples of chen_defect / (1 + max |second level|).
double max_chen_defect(const RoughLift& lift);

/// theta_tau lift on the remaining grid, tau given as node index.
RoughLift shift_lift(const RoughLift& lift, std::size_t tau);

/// First `steps` steps of a lift.
RoughLift head_lift(const RoughLift& lift, std::size_t steps);

/// First level scaled by c, second level by c^2.
RoughLift scale_lift(const RoughLift& lift, double c);

/// Default alpha = min(0.45, H - 0.02).
inline double default_alpha(double hurst) { return hurst - 0.02 < 0.45 ? hurst - 0.02 : 0.45; }

struct LiftStudyRow {
  int level = 0;
  double distance = 0.0;
};

/// rough_distance between the level-L lift and the finest lift of omega,
/// both evaluated as piecewise-linear rough paths on the finest grid.
std::vector<LiftStudyRow> lift_convergence_study(const Path& omega, const std::vector<int>& levels, double alpha);

}  // namespace rpde
