#include "rpde/coefficients.hpp"

#include "rpde/holder_algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace rpde {

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw CoefficientError("Gauss-Legendre rule needs at least one node");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes = es.eigenvalues();
  weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

SpatialBridge::SpatialBridge(int modes, int nodes) {
  constexpr int panel = 16;
  if (modes < 1) throw CoefficientError("bridge needs at least one mode");
  if (nodes < panel || nodes % panel != 0) throw CoefficientError("quadrature nodes must be a positive multiple of 16");
  Eigen::VectorXd gx, gw;
  gauss_legendre(panel, gx, gw);
  const int panels = nodes / panel;
  x_.resize(nodes);
  w_.resize(nodes);
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < panel; ++q) {
      x_(p * panel + q) = (p + 0.5 * (gx(q) + 1.0)) / panels;
      w_(p * panel + q) = 0.5 * gw(q) / panels;
    }
  basis_.resize(nodes, modes);
  for (int j = 0; j < modes; ++j)
    basis_.col(j) = std::sqrt(2.0) * (std::numbers::pi * (j + 1) * x_.array()).sin();
}

Eigen::VectorXd SpatialBridge::synthesis(const Eigen::VectorXd& c) const {
  if (c.size() > basis_.cols()) throw CoefficientError("synthesis: more coefficients than bridge modes");
  return basis_.leftCols(c.size()) * c;
}

Eigen::VectorXd SpatialBridge::analysis(const Eigen::VectorXd& f, int count) const {
  if (count > basis_.cols()) throw CoefficientError("analysis: more modes than the bridge holds");
  return basis_.leftCols(count).transpose() * (w_.array() * f.array()).matrix();
}

Profile parse_profile(const std::string& s) {
  if (s == "sin") return Profile::Sin;
  if (s == "atan") return Profile::Atan;
  if (s == "rational") return Profile::Rational;
  if (s == "zero") return Profile::Zero;
  if (s == "constant") return Profile::Constant;
  throw CoefficientError("unknown kernel profile '" + s + "'");
}

std::string to_string(Profile p) {
  switch (p) {
    case Profile::Sin: return "sin";
    case Profile::Atan: return "atan";
    case Profile::Rational: return "rational";
    case Profile::Zero: return "zero";
    case Profile::Constant: return "constant";
  }
  return "?";
}

double profile_eval(Profile p, int k, double u) {
  switch (p) {
    case Profile::Sin:
      switch (k) {
        case 0: return std::sin(u);
        case 1: return std::cos(u);
        case 2: return -std::sin(u);
        default: return -std::cos(u);
      }
    case Profile::Atan: {
      const double q = 1.0 + u * u;
      switch (k) {
        case 0: return std::atan(u);
        case 1: return 1.0 / q;
        case 2: return -2.0 * u / (q * q);
        default: return (6.0 * u * u - 2.0) / (q * q * q);
      }
    }
    case Profile::Rational: {
      // u / (1 + u^2)
      const double q = 1.0 + u * u;
      switch (k) {
        case 0: return u / q;
        case 1: return (1.0 - u * u) / (q * q);
        case 2: return 2.0 * u * (u * u - 3.0) / (q * q * q);
        default: return -6.0 * (u * u * u * u - 6.0 * u * u + 1.0) / (q * q * q * q);
      }
    }
    case Profile::Zero: return 0.0;
    case Profile::Constant: return k == 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

std::array<double, 4> profile_bounds(Profile p) {
  switch (p) {
    case Profile::Sin: return {1.0, 1.0, 1.0, 1.0};
    // sup |2u/(1+u^2)^2| = 3 sqrt3 / 8 at u^2 = 1/3
    case Profile::Atan: return {std::numbers::pi / 2.0, 1.0, 0.6495190528383290, 2.0};
    // sup |2u(u^2-3)/(1+u^2)^3| at u^2 = 3 - 2 sqrt2, and |sigma'''| peaks at u = 0
    case Profile::Rational: return {0.5, 1.0, 1.4571067811865475, 6.0};
    case Profile::Zero: return {0.0, 0.0, 0.0, 0.0};
    case Profile::Constant: return {1.0, 0.0, 0.0, 0.0};
  }
  return {0.0, 0.0, 0.0, 0.0};
}

Eigen::VectorXd parabola_coefficients(int modes) {
  Eigen::VectorXd c(modes);
  for (int j = 1; j <= modes; ++j) {
    const double jp = j * std::numbers::pi;
    c(j - 1) = (j % 2 == 1) ? 4.0 * std::sqrt(2.0) / (jp * jp * jp) : 0.0;
  }
  return c;
}

double op_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues()(0);
}

namespace {

int default_nodes(int modes) {
  int p = std::max(64, 8 * modes);
  return (p + 15) / 16 * 16;
}

}  // namespace

KernelCoefficient::KernelCoefficient(const KernelSpec& spec, int modes_W, int modes_V)
    : spec_(spec), M_(modes_W), m_(modes_V) {
  if (M_ < 1 || m_ < 1) throw CoefficientError("kernel needs positive mode counts");
  const int K = std::max(M_, m_);
  const int P = spec.nodes > 0 ? spec.nodes : default_nodes(K);
  if (P < 4 * K) throw CoefficientError("quadrature underresolution: P < 4 M");
  spec_.nodes = P;
  bridge_ = SpatialBridge(K, P);
  if (spec.theta_table.empty()) {
    theta_hat_ = parabola_coefficients(M_);
  } else {
    if (static_cast<int>(spec.theta_table.size()) < M_)
      throw CoefficientError("theta table shorter than the mode count M");
    theta_hat_ = Eigen::Map<const Eigen::VectorXd>(spec.theta_table.data(), M_);
  }
}

KernelCoefficient KernelCoefficient::general(GeneralKernel g, int modes_W, int modes_V, int nodes) {
  KernelSpec spec;
  spec.nodes = nodes;
  KernelCoefficient c(spec, modes_W, modes_V);
  c.general_ = std::move(g);
  c.g_basis_ = c.bridge_.w().asDiagonal() * c.bridge_.basis().leftCols(modes_W);
  return c;
}

// Row vector over n of <sigma^(k)(phi) * pointwise, e_n> for the separable kernel;
// for the general kernel the full M x m matrix
//   sum_{p,q} w_p e_j(x_p) g^(k)(x_p, phi(x_q)) pointwise(x_q) w_q e_n(x_q).
Eigen::MatrixXd KernelCoefficient::weighted_moment(const Eigen::VectorXd& phi, const Eigen::VectorXd& pointwise,
                                                   int k) const {
  if (phi.size() != M_) throw CoefficientError("phi has the wrong mode count");
  const Eigen::VectorXd u = bridge_.synthesis(phi);
  const Eigen::Index P = u.size();
  const Eigen::MatrixXd Bm = bridge_.basis().leftCols(m_);
  if (!general_) {
    Eigen::VectorXd f(P);
    for (Eigen::Index p = 0; p < P; ++p) f(p) = profile_eval(spec_.profile, k, u(p)) * pointwise(p);
    const Eigen::VectorXd v = bridge_.analysis(f, m_);
    return theta_hat_ * v.transpose();
  }
  Eigen::MatrixXd g(P, P);
  for (Eigen::Index q = 0; q < P; ++q)
    for (Eigen::Index p = 0; p < P; ++p) g(p, q) = general_(bridge_.x()(p), u(q), k);
  const Eigen::VectorXd wq = bridge_.w().array() * pointwise.array();
  return g_basis_.transpose() * g * wq.asDiagonal() * Bm;
}

Eigen::MatrixXd KernelCoefficient::eval_G(const Eigen::VectorXd& phi) const {
  return weighted_moment(phi, Eigen::VectorXd::Ones(bridge_.nodes()), 0);
}

CoeffTensor KernelCoefficient::eval_DG(const Eigen::VectorXd& phi) const {
  CoeffTensor E(M_, m_);
  const Eigen::MatrixXd& B = bridge_.basis();
  for (int i = 0; i < M_; ++i) {
    const Eigen::MatrixXd slice = weighted_moment(phi, B.col(i), 1);
    for (int j = 0; j < M_; ++j)
      for (int n = 0; n < m_; ++n) E(j, i, n) = slice(j, n);
  }
  return E;
}

Eigen::MatrixXd KernelCoefficient::eval_DkG(const Eigen::VectorXd& phi, const std::vector<Eigen::VectorXd>& hs) const {
  if (hs.size() > 3) throw CoefficientError("derivatives beyond the third are not available");
  Eigen::VectorXd prod = Eigen::VectorXd::Ones(bridge_.nodes());
  for (const auto& h : hs) {
    if (h.size() != M_) throw CoefficientError("direction has the wrong mode count");
    prod.array() *= bridge_.synthesis(h).array();
  }
  return weighted_moment(phi, prod, static_cast<int>(hs.size()));
}

Eigen::MatrixXd KernelCoefficient::eval_D2G(const Eigen::VectorXd& phi, const Eigen::VectorXd& h1,
                                            const Eigen::VectorXd& h2) const {
  return eval_DkG(phi, {h1, h2});
}

Eigen::MatrixXd KernelCoefficient::eval_D3G(const Eigen::VectorXd& phi, const Eigen::VectorXd& h1,
                                            const Eigen::VectorXd& h2, const Eigen::VectorXd& h3) const {
  return eval_DkG(phi, {h1, h2, h3});
}

// |<sigma^(k)(phi) h_1..h_k, e_n>|_n <= |sigma^(k)|_inf |h_1|_L2 prod_{i>1} |h_i|_inf
// and |h|_inf <= sqrt(2 M) |h| for h in span{e_1..e_M}.
double KernelCoefficient::derivative_bound(int k) const {
  if (general_) throw CoefficientError("no closed derivative bound for a general kernel");
  if (k < 0 || k > 3) throw CoefficientError("derivative order must be 0..3");
  const double s = profile_bounds(spec_.profile)[static_cast<std::size_t>(k)];
  const double grow = k >= 1 ? std::pow(2.0 * M_, 0.5 * (k - 1)) : 1.0;
  return theta_hat_.norm() * s * grow;
}

double KernelCoefficient::c_G() const {
  return std::max({2.0 * derivative_bound(1), 2.0 * derivative_bound(2), 4.0 / 3.0 * derivative_bound(3)});
}

double lipschitz_Dbeta_probe(const KernelCoefficient& G, const SpectralOperator& op, double beta, int samples,
                             std::uint64_t seed, double scale) {
  if (beta > 1.0) throw CoefficientError("beta must not exceed 1");
  if (op.modes() != G.M()) throw CoefficientError("operator and kernel disagree on M");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::VectorXd pw = op.power_diag(beta);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd p1(G.M()), p2(G.M());
    for (int j = 0; j < G.M(); ++j) {
      p1(j) = scale * nd(gen) / (j + 1);
      p2(j) = scale * nd(gen) / (j + 1);
    }
    const double d = (p1 - p2).norm();
    if (d == 0.0) continue;
    const Eigen::MatrixXd diff = pw.asDiagonal() * (G.eval_G(p1) - G.eval_G(p2));
    best = std::max(best, op_norm(diff) / d);
  }
  return best;
}

double DifferenceMargins::min() const { return std::min({g1_beta, g1_inf, g2_beta, g2_inf}); }

namespace {

struct PathNorms {
  double d_semi, d_sup, y1_semi, y2_semi, y2_sup;
};

PathNorms path_norms(const Path& y1, const Path& y2, double beta) {
  const Path d = y1 - y2;
  return {weighted_seminorm(d, beta).value, sup_norm(d), weighted_seminorm(y1, beta).value,
          weighted_seminorm(y2, beta).value, sup_norm(y2)};
}

DifferenceMargins probe_pair(const KernelCoefficient& G, const Path& y1, const Path& y2, std::size_t k, std::size_t j,
                            double beta, const PathNorms& n) {
  const double c = G.c_G();
  const TimeGrid& g = y1.grid();
  const double s = g.node(j), t = g.node(k);
  const double w = std::pow(t - s, beta) / std::pow(s, beta);

  const Eigen::VectorXd a1 = y1[j], b1 = y1[k], a2 = y2[j], b2 = y2[k];
  const Eigen::MatrixXd first = (G.eval_G(b1) - G.eval_G(b2)) - (G.eval_G(a1) - G.eval_G(a2));
  // G(y_s) - G(y_t) + DG(y_s)(y_t - y_s)
  const Eigen::MatrixXd r1 = G.eval_G(a1) - G.eval_G(b1) + G.eval_DG(a1).apply(b1 - a1);
  const Eigen::MatrixXd r2 = G.eval_G(a2) - G.eval_G(b2) + G.eval_DG(a2).apply(b2 - a2);
  const double lhs1 = op_norm(first), lhs2 = op_norm(r1 - r2);

  DifferenceMargins out;
  out.g1_beta = c * (n.d_semi + n.y2_semi * n.d_sup) * w - lhs1;
  out.g1_inf = c * (n.d_sup + n.y2_sup * n.d_sup) - lhs1;
  out.g2_beta = c * ((n.y1_semi + n.y2_semi) * n.d_semi + n.y2_semi * n.y2_semi * n.d_sup) * w * w - lhs2;
  out.g2_inf = c * (n.y1_semi + n.y2_semi + n.y2_semi * n.y2_sup) * n.d_sup * w - lhs2;
  return out;
}

}  // namespace

DifferenceMargins coefficient_difference_probe(const KernelCoefficient& G, const Path& y1, const Path& y2,
                                               std::size_t k, std::size_t j, double beta) {
  if (!(j > 0 && k > j)) throw CoefficientError("coefficient difference probes need 0 < s < t");
  return probe_pair(G, y1, y2, k, j, beta, path_norms(y1, y2, beta));
}

DifferenceMargins coefficient_difference_probes(const KernelCoefficient& G, const Path& y1, const Path& y2,
                                                double beta) {
  const PathNorms n = path_norms(y1, y2, beta);
  const double inf = std::numeric_limits<double>::infinity();
  DifferenceMargins best{inf, inf, inf, inf};
  for (std::size_t k = 2; k < y1.nodes(); ++k)
    for (std::size_t j = 1; j < k; ++j) {
      const DifferenceMargins m = probe_pair(G, y1, y2, k, j, beta, n);
      best.g1_beta = std::min(best.g1_beta, m.g1_beta);
      best.g1_inf = std::min(best.g1_inf, m.g1_inf);
      best.g2_beta = std::min(best.g2_beta, m.g2_beta);
      best.g2_inf = std::min(best.g2_inf, m.g2_inf);
    }
  return best;
}

}  // namespace rpde
