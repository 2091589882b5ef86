#pragma once

#include "rpde/grid.hpp"
#include "rpde/semigroup.hpp"
#include "rpde/sewing.hpp"
#include "rpde/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpde {

struct SupportingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exponents fed to the sewing construction of b.
struct BExponents {
  double alpha = 0.45;
  double beta = 0.34;
  /// alpha + 2 beta > 1 and alpha > beta.
  void validate() const;
};

/// |(-A)^beta K| as an operator V -> W (largest singular value).
double dbeta_norm(const SpectralOperator& op, const Eigen::MatrixXd& K, double beta);

/// Scales the i-block of a kernel by x_i, turning a kernel in (E, x) into one in E.
ProcessKernel scale_by_input(const ProcessKernel& k, const Eigen::VectorXd& x);

/// omega^S, a, b, c on the grid of a lift.
///
/// Between nodes the noise is linear, so every r-integral is evaluated in
/// closed form segment by segment.  A pair (t, s) is given by node indices
/// k >= j.  Processes in E are represented by kernels (see ProcessKernel).
class SupportingEvaluator {
 public:
  SupportingEvaluator(RoughLift lift, const SpectralOperator& op);

  const RoughLift& lift() const { return lift_; }
  const SemigroupHandle& sg() const { return sg_; }
  const TimeGrid& grid() const { return lift_.grid(); }
  int M() const { return M_; }
  int m() const { return m_; }
  std::size_t steps() const { return grid().steps(); }

  /// Phi_jn(t, s) = int_s^t e^{-mu_j (t - q)} d omega^n_q, an M x m matrix.
  Eigen::MatrixXd phi(std::size_t k, std::size_t j) const;
  /// noise increment omega_t - omega_s.
  Eigen::VectorXd dw(std::size_t k, std::size_t j) const { return lift_.first[k] - lift_.first[j]; }
  /// omega^(2)_ts as an m x m matrix.
  Eigen::MatrixXd area(std::size_t k, std::size_t j) const;

  /// omega^S_ts(K)_j = sum_n K_jn Phi_jn(t, s).
  Eigen::VectorXd omega_S(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const;
  /// The integration-by-parts form S(t-s)K dw_ts - A int S(t-r) K dw_tr dr,
  /// summed segment by segment.  Agrees with omega_S to rounding.
  Eigen::VectorXd omega_S_ibp(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const;

  /// alpha_jin(t, s) with a_ts(E, x)_j = sum_{i,n} E(j,i,n) alpha_jin x_i.
  ProcessKernel a_kernel(std::size_t k, std::size_t j) const;
  /// a_ts(E, x) by the integration-by-parts form omega^S_ts(Ex) + int omega^S_tr(E A S(r-s) x) dr.
  Eigen::VectorXd proc_a(const CoeffTensor& E, const Eigen::VectorXd& x, std::size_t k, std::size_t j) const;
  /// a_ts(E, x) = int S(t-r) E S(r-s) x d omega_r, segment sums.
  Eigen::VectorXd proc_a_direct(const CoeffTensor& E, const Eigen::VectorXd& x, std::size_t k, std::size_t j) const;

  /// Kernel of c_ts(., K) built by the Chen recursion over segments.
  ProcessKernel c_kernel(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const;
  /// c_ts(E, K) by integration by parts:
  ///   omega^S_ts(E K dw_ts) - S(t-s) E K Z_ts + int A S(t-r) E K Z_tr dr,
  /// with Z_ts = int (delta omega)_tr (x) d omega_r = (omega^(2)_ts)^T, exact between nodes.
  Eigen::VectorXd proc_c(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const;
  /// c_ts(E, K) = int S(t-r) E K (omega_r - omega_s) d omega_r, segment sums.
  Eigen::VectorXd proc_c_direct(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const;

  /// Kernel of b_ts(., K): the grid sewing of the b germ with the closed-form
  /// limit on each step.
  ProcessKernel b_kernel(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const;
  /// b_ts(E, K) from the sewing engine.
  Eigen::VectorXd proc_b(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k, std::size_t j,
                         const BExponents& ex = {}, SewingResult* diag = nullptr) const;
  /// The germ omega^S_vu(E omega^S_us(K)) + c_vu(E, K) with base s = node j0.
  Eigen::VectorXd b_germ(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t j0, std::size_t v,
                         std::size_t u) const;
  /// Sewing problem of the b germ on [t_{j0}, T]; exposed for rate studies.
  SewingProblem b_problem(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t j0, std::size_t last,
                          const BExponents& ex = {}) const;

  /// Kernels for one base node j and every k = j..N (entry k - j).
  std::vector<ProcessKernel> a_kernels_from(std::size_t j) const;
  std::vector<ProcessKernel> c_kernels_from(const Eigen::MatrixXd& K, std::size_t j) const;
  std::vector<ProcessKernel> b_kernels_from(const Eigen::MatrixXd& K, std::size_t j) const;

  /// Single-step pieces: alpha(l+1, l), and the one-step b and c kernels.
  const ProcessKernel& step_alpha(std::size_t l) const { return step_alpha_[l]; }
  ProcessKernel step_b(const Eigen::MatrixXd& K, std::size_t l) const;
  ProcessKernel step_c(const Eigen::MatrixXd& K, std::size_t l) const;

 private:
  RoughLift lift_;
  SemigroupHandle sg_;
  int M_ = 0, m_ = 0;
  Eigen::MatrixXd delta_;               ///< m x steps, noise increments per step
  std::vector<Eigen::MatrixXd> psi_;    ///< Psi(t_k), M x m
  Eigen::MatrixXd psi_ij_;              ///< psi(mu_i h, mu_j h)
  Eigen::MatrixXd chi_ij_;              ///< chi(mu_i h, mu_j h)
  Eigen::VectorXd phi1_j_;              ///< phi1(mu_j h)
  Eigen::VectorXd cw_j_;                ///< J0 - J1 at mu_j h
  std::array<Eigen::VectorXd, 3> moments_;  ///< J_k(mu_j h), k = 0..2
  std::vector<ProcessKernel> step_alpha_;
};

struct AlgebraicDefects {
  double omega_S = 0.0;  ///< delta^_2 omega^S
  double a = 0.0;        ///< delta^_2 a - a(E, (S - Id) x)
  double c = 0.0;        ///< delta^_2 c - omega^S(E K dw)
  double b = 0.0;        ///< delta^_2 b - a(E, omega^S(K))
  double max() const;
};

/// The four residuals on a triple s <= tau <= t (node indices k >= mid >= j).
AlgebraicDefects algebraic_defects(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::MatrixXd& K,
                                   const Eigen::VectorXd& x, std::size_t k, std::size_t mid, std::size_t j,
                                   const BExponents& ex = {});

/// |a_ts(E, x) - sum S(t - v) a_vu(E, S(u - s) x)| over the partition nodes of [s, t].
double partition_identity_a(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::VectorXd& x,
                            const std::vector<std::size_t>& nodes);

struct ContinuityRow {
  int level = 0;
  double omega_S = 0.0, a = 0.0, c = 0.0, b = 0.0;
  double lift_distance = 0.0;
};

/// Hoelder-scaled sup differences of omega^S, a (scale alpha) and c, b
/// (scale 2 alpha) between lifts of one path at coarse levels and the
/// finest level, over the pairs of each coarse grid.
std::vector<ContinuityRow> noise_continuity(const Path& omega, const SpectralOperator& op,
                                            const std::vector<int>& levels, const CoeffTensor& E,
                                            const Eigen::MatrixXd& K, const Eigen::VectorXd& x, double alpha);

/// Brute-force Riemann-Stieltjes oracles on the piecewise-linear noise of a
/// lift, with `sub` midpoint sub-steps per grid step.  Used only in tests and
/// the check driver; they share no code with the closed forms.
namespace oracle {
Eigen::VectorXd omega_S(const SupportingEvaluator& ev, const Eigen::MatrixXd& K, std::size_t k, std::size_t j,
                        int sub);
Eigen::VectorXd proc_a(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::VectorXd& x, std::size_t k,
                       std::size_t j, int sub);
Eigen::VectorXd proc_c(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k,
                       std::size_t j, int sub);
/// Nested quadrature of int S(t-r) E omega^S_rs(K) d omega_r for every k >= j.
std::vector<Eigen::VectorXd> proc_b_from(const SupportingEvaluator& ev, const CoeffTensor& E,
                                         const Eigen::MatrixXd& K, std::size_t j, int sub);
}  // namespace oracle

/// CSV rows "t_index,s_index,w_1..w_M" for every pair of one process.
enum class ProcessKind { OmegaS, A, B, C };
std::string process_csv(const SupportingEvaluator& ev, ProcessKind kind, const CoeffTensor& E,
                        const Eigen::MatrixXd& K, const Eigen::VectorXd& x);

}  // namespace rpde
