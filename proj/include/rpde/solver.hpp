#pragma once

#include "rpde/coefficients.hpp"
#include "rpde/grid.hpp"
#include "rpde/semigroup.hpp"
#include "rpde/sewing.hpp"
#include "rpde/supporting.hpp"
#include "rpde/tensor.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpde {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when the adaptive horizon falls below four grid steps.
struct HorizonUnderflow : SolverError {
  using SolverError::SolverError;
};

struct SolveConfig {
  double alpha = 0.45;
  double beta = 0.34;
  /// Only reported: R = radius_factor * |xi|.
  double radius_factor = 2.0;
  double lambda_star = 0.5;
  int max_iterations = 60;
  /// Stop when |M(p) - p|_X < tolerance.
  double tolerance = 1e-10;
  /// 1/3 < beta < alpha <= 1/2, alpha + 2 beta > 1, alpha < hurst.
  void validate(double hurst) const;
};

/// The area component stored by its ingredients.  For a pair produced by the
/// fixed-point map,
///   z_ts(E) = sum_{l in [s,t)} S(t - t_{l+1}) [b_{l+1,l}(E, K_l) + a_{l+1,l}(E, ybar_l)]
///             - omega^S_ts(E ybar_s) + a_ts(E, S(s) xi) - omega^S_ts(E S(s) xi),
/// the grid sewing of the z germ with its two xi corrections.  The map is
/// linear in (K, ybar, xi), so differences of pairs are again of this form.
struct LazyZ {
  std::vector<Eigen::MatrixXd> K;  ///< G(y_u) of the input path, per node (empty means zero)
  Path ybar;                       ///< the sewn part of the output path
  Eigen::VectorXd xi;

  LazyZ scaled(double c) const;
  friend LazyZ operator-(const LazyZ& a, const LazyZ& b);
};

/// A path y together with its area component z.
struct ControlledPair {
  Path y;
  LazyZ z;

  ControlledPair scaled(double c) const;
  friend ControlledPair operator-(const ControlledPair& a, const ControlledPair& b);
};

/// Kernel of z_ts for one pair.
ProcessKernel z_kernel(const SupportingEvaluator& ev, const LazyZ& z, std::size_t k, std::size_t j);
/// Kernels of z for base node j and every k = j..N (entry k - j), in O(N M^2 m).
std::vector<ProcessKernel> z_kernels_from(const SupportingEvaluator& ev, const LazyZ& z, std::size_t j);
/// Single-step kernel z_{k+1,k}.
ProcessKernel z_step(const SupportingEvaluator& ev, const LazyZ& z, std::size_t k);

/// Every pair kernel, indexed like TwoParamField.  Refuses more than 2^26 entries
/// (counted as M^3 m 4^L).
class DenseZ {
 public:
  DenseZ(const SupportingEvaluator& ev, const LazyZ& z);
  const ProcessKernel& at(std::size_t k, std::size_t j) const { return kernels_[TwoParamField::index(k, j)]; }
  static bool fits(int M, int m, std::size_t steps);

 private:
  std::vector<ProcessKernel> kernels_;
};

/// The initial pair (S(.) xi, a(., S(.) xi) - omega^S(. S(.) xi)).
ControlledPair initial_pair(const SupportingEvaluator& ev, const Eigen::VectorXd& xi);

/// Xi^(y)_vu = omega^S_vu(G(y_u)) + z_vu(DG(y_u)).
Eigen::VectorXd xi_y(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p, std::size_t v,
                     std::size_t u);
/// Xi^(z)_vu(E) = b_vu(E, G(y_u)) + a_vu(E, ybar_u), b from the sewing engine.
Eigen::VectorXd xi_z(const SupportingEvaluator& ev, const KernelCoefficient& G, const Path& y, const Path& ybar,
                     const CoeffTensor& E, std::size_t v, std::size_t u, const BExponents& ex = {});

/// Sewing problem of Xi^(y) on the evaluator's grid.
SewingProblem y_problem(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p,
                        double alpha, double beta);

/// One application of the fixed-point map.
ControlledPair apply_M(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p,
                       const Eigen::VectorXd& xi);

struct XNormParts {
  double y_sup = 0.0, y_weighted = 0.0, z_alpha = 0.0, z_weighted = 0.0;
  double total() const { return y_sup + y_weighted + z_alpha + z_weighted; }
};
/// |y|_inf + [y]_{beta,beta} + sup |z_ts| / (t-s)^alpha + sup_{s>0} s^beta |z_ts| / (t-s)^{alpha+beta},
/// with |z_ts| the exact operator norm of E -> z_ts(E).
XNormParts x_norm_parts(const SupportingEvaluator& ev, const ControlledPair& p, double alpha, double beta);
double x_norm(const SupportingEvaluator& ev, const ControlledPair& p, double alpha, double beta);

/// max over random E (Frobenius-normalized) and random triples of
/// |(delta^_2 z)_{t tau s}(E) - omega^S_{t tau}(E (delta y)_{tau s})|.
double constraint_residual(const SupportingEvaluator& ev, const ControlledPair& p, int tensors = 16, int triples = 32,
                           std::uint64_t seed = 1);

struct LemmaDiagnostics {
  double c_hatdelta = 0.0;   ///< sup |delta^ ybar_ts| / ((1 + X^2) (t-s)^alpha)
  double c_dbeta = 0.0;      ///< sup_{s>0} |ybar_s|_{D_beta} / ((1 + X^2) s^{alpha-beta})
  double c_norm = 0.0;       ///< |ybar|_{beta,beta} / ((1 + X^2) T^alpha)
  double c_help = 0.0;       ///< sup_{s>0} s^beta |delta^ ybar_ts - omega^S_ts(G(y_s))| / ((1 + X^2) (t-s)^{alpha+beta})
  double help_slope = 0.0;   ///< fitted exponent of s^beta |delta^ ybar_ts - omega^S_ts(G(y_s))|
  double c_z = 0.0;          ///< sup |zbar_ts| / ((1 + X^2) [(t-s)^{2 alpha} + s^{alpha-beta} (t-s)^{alpha+beta}])
  double c_z_norm = 0.0;     ///< sup |zbar_ts| / (t-s)^{alpha+beta} / ((1 + X^2) T^{alpha-beta})
};
/// Measured constants of the y- and z-integral estimates for the image of p.
LemmaDiagnostics lemma_diagnostics(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p,
                                   const Eigen::VectorXd& xi, double alpha, double beta);

struct SolveReport {
  ControlledPair solution;
  std::vector<double> deltas;   ///< |p_{k+1} - p_k|_X per iteration of the final attempt
  std::vector<double> ratios;   ///< deltas[k+1] / deltas[k] above the noise floor
  double factor = 0.0;          ///< largest of `ratios` (0 when there are none)
  double horizon = 0.0;
  std::size_t steps = 0;
  int halvings = 0;
  int iterations = 0;
  bool converged = false;
  double x_norm = 0.0;
  double constraint = 0.0;      ///< constraint_residual of the solution
  double radius = 0.0;          ///< radius_factor * |xi|
  std::vector<std::size_t> attempts;  ///< step counts tried
};

/// Picard iteration of the fixed-point map with adaptive halving of T.
/// `start` overrides the initial pair (it must live on the full grid).
SolveReport picard_solve(const RoughLift& lift, const SpectralOperator& op, const KernelCoefficient& G,
                         const Eigen::VectorXd& xi, const SolveConfig& cfg, const ControlledPair* start = nullptr);

/// A pair satisfying the constraint by construction: y = S(.) xi + ybar with
/// random ybar (ybar_0 = 0) and random K.
ControlledPair random_pair(const SupportingEvaluator& ev, const Eigen::VectorXd& xi, double scale, std::uint64_t seed);

struct CocycleResult {
  double residual = 0.0;   ///< sup_k |y'_k - y_{tau + k}|
  double z_residual = 0.0; ///< sup_k |z'_{k+1,k} - z_{tau+k+1,tau+k}| (operator norm)
  SolveReport shifted;
};
/// Re-solve on [0, T - tau] with the shifted lift and initial value y_tau.
CocycleResult cocycle_check(const RoughLift& lift, const SpectralOperator& op, const KernelCoefficient& G,
                            const SolveReport& report, std::size_t tau, const SolveConfig& cfg);

struct RegularityReport {
  double y_beta = 0.0;        ///< unweighted [y]_beta
  double z_alpha_beta = 0.0;  ///< unweighted sup |z_ts| / (t-s)^{alpha+beta}
  double y_weighted = 0.0;    ///< [y]_{beta,beta}
  double z_weighted = 0.0;    ///< |z|_{alpha+beta,beta}
  double xi_dbeta = 0.0;      ///< |xi|_{D_beta}
};
RegularityReport regularity_check(const SupportingEvaluator& ev, const SolveReport& report, const Eigen::VectorXd& xi,
                                  double alpha, double beta);

/// Exponential Euler for the Galerkin system dy = A y dt + G(y) d omega on the
/// grid of a (smooth) noise path, one step per noise increment:
///   y_{k+1} = S(h) y_k + phi1(mu h) * G(y_k) (omega_{k+1} - omega_k).
Path exponential_euler(const Path& omega, const SpectralOperator& op, const KernelCoefficient& G,
                       const Eigen::VectorXd& xi);

struct SelfMapFit {
  double c_hat = 0.0;   ///< max over the sweep of |M(p)|_X / (|xi| + (1 + |p|_X^2) T^alpha)
  std::vector<double> ratios;
};
/// |M(p)|_X against |xi| + (1 + |p|_X^2) T^alpha over a |xi| x T sweep, p the initial pair.
SelfMapFit self_map_fit(const RoughLift& lift, const SpectralOperator& op, const KernelCoefficient& G,
                        const Eigen::VectorXd& xi_dir, const std::vector<double>& xi_scales,
                        const std::vector<std::size_t>& step_counts, double alpha, double beta);

/// max over random admissible pairs of |M(p1) - M(p2)|_X / (|p1 - p2|_X (1 + |p1|^2 + |p2|^2) T^alpha).
double contraction_constant(const SupportingEvaluator& ev, const KernelCoefficient& G, const Eigen::VectorXd& xi,
                            int probes, double scale, std::uint64_t seed, double alpha, double beta);

/// CSV "node,t,w_1..w_M" of a path, 17 significant digits.
std::string path_csv(const Path& y);

}  // namespace rpde
