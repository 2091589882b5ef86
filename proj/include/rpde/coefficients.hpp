#pragma once

#include "rpde/grid.hpp"
#include "rpde/semigroup.hpp"
#include "rpde/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpde {

struct CoefficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Composite Gauss-Legendre rule on (0, 1) with eigenfunction values
/// e_j(x_p) = sqrt(2) sin(j pi x_p).
class SpatialBridge {
 public:
  SpatialBridge() = default;
  /// P nodes in panels of 16 (P must be a positive multiple of 16).
  SpatialBridge(int modes, int nodes);

  int modes() const { return static_cast<int>(basis_.cols()); }
  int nodes() const { return static_cast<int>(x_.size()); }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& w() const { return w_; }
  /// P x K matrix, column j-1 holding e_j at the nodes.
  const Eigen::MatrixXd& basis() const { return basis_; }

  /// Point values of sum_j c_j e_j (first c.size() modes).
  Eigen::VectorXd synthesis(const Eigen::VectorXd& c) const;
  /// <f, e_j> for the first `count` modes.
  Eigen::VectorXd analysis(const Eigen::VectorXd& f, int count) const;

 private:
  Eigen::VectorXd x_, w_;
  Eigen::MatrixXd basis_;
};

enum class Profile { Sin, Atan, Rational, Zero, Constant };
Profile parse_profile(const std::string& s);
std::string to_string(Profile p);

/// sigma^(k)(u) for k = 0..3.
double profile_eval(Profile p, int k, double u);
/// sup_u |sigma^(k)| for k = 0..3.
std::array<double, 4> profile_bounds(Profile p);

struct KernelSpec {
  Profile profile = Profile::Sin;
  /// Spectral coefficients theta_hat_j of the spatial profile; empty means
  /// theta(x) = x (1 - x).
  std::vector<double> theta_table;
  /// Spatial quadrature nodes; 0 picks max(64, 8 M) rounded up to a multiple of 16.
  int nodes = 0;
};

/// General kernel g(x, u) with its u-derivatives, evaluated by dense 2-D quadrature.
using GeneralKernel = std::function<double(double x, double u, int k)>;

/// The integral operator G(phi)(psi)[x] = int g(x, phi(x~)) psi(x~) dx~ on
/// spectral coefficients: phi in W = R^M, psi in V = R^m.
class KernelCoefficient {
 public:
  KernelCoefficient() = default;
  /// Separable kernel g(x, u) = theta(x) sigma(u).
  KernelCoefficient(const KernelSpec& spec, int modes_W, int modes_V);
  /// General kernel with 2-D quadrature on `nodes` points per axis.
  static KernelCoefficient general(GeneralKernel g, int modes_W, int modes_V, int nodes);

  int M() const { return M_; }
  int m() const { return m_; }
  bool separable() const { return !general_; }
  const KernelSpec& spec() const { return spec_; }
  const SpatialBridge& bridge() const { return bridge_; }
  /// theta_hat_j, j = 1..M.
  const Eigen::VectorXd& theta_hat() const { return theta_hat_; }
  /// All profile outputs vanish (sigma = 0).
  bool vanishes() const { return !general_ && spec_.profile == Profile::Zero; }

  /// G(phi) as an M x m matrix.
  Eigen::MatrixXd eval_G(const Eigen::VectorXd& phi) const;
  /// DG(phi) as E(j, i, n) = DG(phi)(e_n, e_i)_j.
  CoeffTensor eval_DG(const Eigen::VectorXd& phi) const;
  /// D2G(phi)(., h1, h2) and D3G(phi)(., h1, h2, h3) as M x m matrices.
  Eigen::MatrixXd eval_D2G(const Eigen::VectorXd& phi, const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) const;
  Eigen::MatrixXd eval_D3G(const Eigen::VectorXd& phi, const Eigen::VectorXd& h1, const Eigen::VectorXd& h2,
                           const Eigen::VectorXd& h3) const;
  /// D^k G(phi)(., h_1..h_k) for k = hs.size() <= 3.
  Eigen::MatrixXd eval_DkG(const Eigen::VectorXd& phi, const std::vector<Eigen::VectorXd>& hs) const;

  /// Upper bound of |D^k G(phi)| as a k-linear map W^k -> L(V, W), k = 0..3:
  /// |theta_hat| sup|sigma^(k)| (2M)^{(k-1)/2} (k >= 1) and |theta_hat| sup|sigma| for k = 0.
  double derivative_bound(int k) const;
  /// max(2 |DG|, 2 |D2G|, 4/3 |D3G|) from derivative_bound; sufficient for all
  /// four coefficient-difference inequalities.
  double c_G() const;

 private:
  Eigen::MatrixXd weighted_moment(const Eigen::VectorXd& phi, const Eigen::VectorXd& pointwise, int k) const;

  KernelSpec spec_;
  int M_ = 0, m_ = 0;
  SpatialBridge bridge_;
  Eigen::VectorXd theta_hat_;
  GeneralKernel general_;
  Eigen::MatrixXd g_basis_;  ///< for the general kernel: e_j(x_p) w_p, P x M
};

/// Spectral coefficients of x (1 - x): 2 sqrt2 (1 - (-1)^j) / (j pi)^3.
Eigen::VectorXd parabola_coefficients(int modes);

/// Largest singular value.
double op_norm(const Eigen::MatrixXd& A);

/// max over seeded random pairs of |(-A)^beta (G(phi1) - G(phi2))|_op / |phi1 - phi2|.
double lipschitz_Dbeta_probe(const KernelCoefficient& G, const SpectralOperator& op, double beta, int samples,
                             std::uint64_t seed, double scale = 1.0);

struct DifferenceMargins {
  double g1_beta = 0.0;   ///< RHS - LHS of the weighted first-difference bound
  double g1_inf = 0.0;    ///< RHS - LHS of the sup first-difference bound
  double g2_beta = 0.0;   ///< RHS - LHS of the weighted Taylor-remainder bound
  double g2_inf = 0.0;    ///< RHS - LHS of the mixed Taylor-remainder bound
  double min() const;
};

/// The four margins on one pair (node indices k > j > 0), seminorms taken over the whole grid.
DifferenceMargins coefficient_difference_probe(const KernelCoefficient& G, const Path& y1, const Path& y2,
                                               std::size_t k, std::size_t j, double beta);

/// Smallest of each margin over all pairs with s > 0.
DifferenceMargins coefficient_difference_probes(const KernelCoefficient& G, const Path& y1, const Path& y2,
                                                double beta);

}  // namespace rpde
