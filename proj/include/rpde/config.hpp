#pragma once

#include "rpde/coefficients.hpp"
#include "rpde/noise.hpp"
#include "rpde/semigroup.hpp"
#include "rpde/solver.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpde {

/// A configuration that cannot be used.  The message names the violated constraint.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NoiseKind { Fbm, Sine };

struct NoiseConfig {
  NoiseKind kind = NoiseKind::Fbm;
  double hurst = 0.5;
  int modes = 4;
  double decay = 2.0;
  std::vector<double> eigenvalues;  ///< explicit lambda_n, overrides decay
  std::uint64_t seed = 1;
  int level = 6;
  double horizon = 1.0;
  double amplitude = 1.0;  ///< sine noise only
  double lift_scale = 1.0;
};

struct OperatorConfig {
  int modes = 8;
  std::vector<double> eigenvalues;  ///< empty: dirichlet_interval
};

struct KernelConfig {
  Profile profile = Profile::Sin;
  std::vector<double> theta;  ///< empty: parabola
  int nodes = 0;
};

struct ConvergeConfig {
  std::vector<int> levels{2, 3, 4, 5, 6};
  int reference_level = 11;
};

/// Everything a run of the command-line driver reads.
struct RunConfig {
  NoiseConfig noise;
  OperatorConfig op;
  KernelConfig kernel;
  SolveConfig solve;
  /// Initial value coefficients; shorter than M means zero padding.
  std::vector<double> xi{1.0};
  ConvergeConfig converge;
  double shift_fraction = 0.25;
  std::string output_dir = "out";

  /// Cross-field checks; throws ConfigError naming the first violation.
  void validate() const;

  TimeGrid grid() const { return TimeGrid(noise.horizon, noise.level); }
  QfBmSpec qfbm_spec() const;
  SpectralOperator spectral_operator() const;
  KernelSpec kernel_spec() const;
  KernelCoefficient coefficient() const;
  Eigen::VectorXd initial_value() const;
  /// The sampled (fBm) or evaluated (sine) noise on a grid with the configured horizon.
  Path noise_path(int level) const;
  /// Exact lift of noise_path(level) scaled by lift_scale.
  RoughLift lift(int level) const;
};

/// Sections of "key = value" lines; '#' and ';' start comments.
using IniSections = std::map<std::string, std::map<std::string, std::string>>;
IniSections parse_ini(const std::string& text);

/// Parse and validate.  Unknown sections or keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// The config as INI text that parse_config reads back to the same values.
std::string to_ini(const RunConfig& cfg);

}  // namespace rpde
