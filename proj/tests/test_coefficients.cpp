#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rpde/coefficients.hpp"
#include "rpde/sewing.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace rpde;

namespace {

KernelCoefficient make(Profile p, int M = 6, int m = 3) {
  KernelSpec s;
  s.profile = p;
  return KernelCoefficient(s, M, m);
}

Eigen::MatrixXd dk(const KernelCoefficient& G, const Eigen::VectorXd& phi, std::vector<Eigen::VectorXd> hs) {
  return G.eval_DkG(phi, hs);
}

}  // namespace

TEST_CASE("Gauss-Legendre rule") {
  Eigen::VectorXd x, w;
  gauss_legendre(8, x, w);
  CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-15));
  for (int p = 0; p <= 15; ++p) {
    const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    CHECK(std::abs((w.array() * x.array().pow(p)).sum() - exact) <= 1e-14);
  }
}

TEST_CASE("spatial bridge") {
  const SpatialBridge b(8, 64);
  CHECK(b.nodes() == 64);
  const Eigen::MatrixXd gram = b.basis().transpose() * b.w().asDiagonal() * b.basis();
  CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).norm() <= 1e-12);
  std::mt19937_64 gen(31);
  const Eigen::VectorXd c = rpde::test::random_vector(8, gen);
  CHECK((b.analysis(b.synthesis(c), 8) - c).norm() <= 1e-12);

  Eigen::VectorXd f(64);
  for (int p = 0; p < 64; ++p) f(p) = b.x()(p) * (1.0 - b.x()(p));
  CHECK((b.analysis(f, 8) - parabola_coefficients(8)).norm() <= 1e-13);
  CHECK(parabola_coefficients(2)(1) == 0.0);
  CHECK(parabola_coefficients(1)(0) == doctest::Approx(4.0 * std::numbers::sqrt2 / std::pow(std::numbers::pi, 3)));
  CHECK_THROWS_AS(SpatialBridge(4, 20), CoefficientError);
}

TEST_CASE("separable kernels give rank-one values and vanish at zero") {
  std::mt19937_64 gen(32);
  for (Profile p : {Profile::Sin, Profile::Atan, Profile::Rational}) {
    const KernelCoefficient G = make(p);
    CHECK(G.separable());
    CHECK(G.eval_G(Eigen::VectorXd::Zero(6)).norm() <= 1e-15);
    const Eigen::VectorXd phi = rpde::test::random_vector(6, gen);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G.eval_G(phi));
    CHECK(svd.singularValues()(1) <= 1e-12 * svd.singularValues()(0));
    // the column space is spanned by theta_hat
    const Eigen::MatrixXd g = G.eval_G(phi);
    const Eigen::VectorXd t = G.theta_hat().normalized();
    CHECK((g - t * (t.transpose() * g)).norm() <= 1e-12 * g.norm());
  }
  CHECK((make(Profile::Sin).theta_hat() - parabola_coefficients(6)).norm() <= 1e-13);
}

TEST_CASE("constant and zero profiles") {
  std::mt19937_64 gen(33);
  const KernelCoefficient c = make(Profile::Constant), z = make(Profile::Zero);
  CHECK(z.vanishes());
  CHECK_FALSE(c.vanishes());
  const Eigen::VectorXd p1 = rpde::test::random_vector(6, gen), p2 = rpde::test::random_vector(6, gen);
  CHECK((c.eval_G(p1) - c.eval_G(p2)).norm() <= 1e-14);
  CHECK(c.eval_G(p1).norm() > 0.0);
  CHECK(c.eval_DG(p1).frobenius() == 0.0);
  CHECK(z.eval_G(p1).norm() == 0.0);
  CHECK(z.c_G() == 0.0);
  // sigma = 1: G(phi)_{jn} = theta_hat_j <1, e_n>
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(c.bridge().nodes());
  const Eigen::VectorXd one_hat = c.bridge().analysis(ones, 3);
  CHECK((c.eval_G(p1) - c.theta_hat() * one_hat.transpose()).norm() <= 1e-13);
}

TEST_CASE("derivatives match finite differences") {
  std::mt19937_64 gen(34);
  for (Profile p : {Profile::Sin, Profile::Atan, Profile::Rational}) {
    const KernelCoefficient G = make(p);
    const Eigen::VectorXd phi = rpde::test::random_vector(6, gen);
    const Eigen::VectorXd h = rpde::test::random_vector(6, gen).normalized();
    const Eigen::VectorXd h1 = rpde::test::random_vector(6, gen).normalized();
    const Eigen::VectorXd h2 = rpde::test::random_vector(6, gen).normalized();
    // chain D^k G -> D^{k+1} G along h, k = 0..2
    const std::vector<std::vector<Eigen::VectorXd>> dirs = {{}, {h1}, {h1, h2}};
    for (const auto& base : dirs) {
      std::vector<Eigen::VectorXd> up = base;
      up.push_back(h);
      const Eigen::MatrixXd exact = dk(G, phi, up);
      std::vector<double> eps, err;
      for (double e : {1e-2, 1e-3, 1e-4}) {
        eps.push_back(e);
        err.push_back(op_norm((dk(G, phi + e * h, base) - dk(G, phi, base)) / e - exact));
      }
      CHECK(std::abs(fit_slope(eps, err).slope - 1.0) <= 0.1);
    }
    // DG tensor against the DkG form
    const CoeffTensor d = G.eval_DG(phi);
    CHECK((d.apply(h) - dk(G, phi, {h})).norm() <= 1e-13);
  }
}

TEST_CASE("higher derivatives are symmetric") {
  std::mt19937_64 gen(35);
  const KernelCoefficient G = make(Profile::Atan);
  const Eigen::VectorXd phi = rpde::test::random_vector(6, gen);
  const Eigen::VectorXd a = rpde::test::random_vector(6, gen), b = rpde::test::random_vector(6, gen),
                        c = rpde::test::random_vector(6, gen);
  CHECK((G.eval_D2G(phi, a, b) - G.eval_D2G(phi, b, a)).norm() <= 1e-14);
  const Eigen::MatrixXd abc = G.eval_D3G(phi, a, b, c);
  CHECK((abc - G.eval_D3G(phi, c, a, b)).norm() <= 1e-14);
  CHECK((abc - G.eval_D3G(phi, b, c, a)).norm() <= 1e-14);
  CHECK((abc - G.eval_D3G(phi, a, c, b)).norm() <= 1e-14);
}

TEST_CASE("derivative bounds hold on random arguments") {
  std::mt19937_64 gen(36);
  for (Profile p : {Profile::Sin, Profile::Atan, Profile::Rational}) {
    const KernelCoefficient G = make(p, 8, 4);
    double worst[4] = {0, 0, 0, 0};
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd phi = rpde::test::random_vector(8, gen, 2.0);
      std::vector<Eigen::VectorXd> hs;
      worst[0] = std::max(worst[0], op_norm(G.eval_G(phi)));
      for (int k = 1; k <= 3; ++k) {
        hs.push_back(rpde::test::random_vector(8, gen).normalized());
        worst[k] = std::max(worst[k], op_norm(G.eval_DkG(phi, hs)));
      }
    }
    for (int k = 0; k <= 3; ++k) CHECK(worst[k] <= G.derivative_bound(k));
    const double cg = std::max({2.0 * G.derivative_bound(1), 2.0 * G.derivative_bound(2),
                                4.0 / 3.0 * G.derivative_bound(3)});
    CHECK(G.c_G() == doctest::Approx(cg).epsilon(1e-15));
  }
}

TEST_CASE("general kernel matches the separable one") {
  std::mt19937_64 gen(37);
  const KernelCoefficient sep = make(Profile::Sin, 5, 2);
  const KernelCoefficient gen_k = KernelCoefficient::general(
      [](double x, double u, int k) { return x * (1.0 - x) * profile_eval(Profile::Sin, k, u); }, 5, 2, 512);
  CHECK_FALSE(gen_k.separable());
  const Eigen::VectorXd phi = rpde::test::random_vector(5, gen);
  const Eigen::VectorXd h = rpde::test::random_vector(5, gen);
  CHECK((gen_k.eval_G(phi) - sep.eval_G(phi)).norm() <= 1e-8);
  CHECK((gen_k.eval_DG(phi).data - sep.eval_DG(phi).data).norm() <= 1e-8);
  CHECK((gen_k.eval_D2G(phi, h, h) - sep.eval_D2G(phi, h, h)).norm() <= 1e-8);
}

TEST_CASE("Lipschitz constant in the fractional norm") {
  const SpectralOperator op4 = SpectralOperator::dirichlet_interval(4), op8 = SpectralOperator::dirichlet_interval(8);
  const double l4 = lipschitz_Dbeta_probe(make(Profile::Sin, 4, 2), op4, 0.34, 200, 5);
  const double l8 = lipschitz_Dbeta_probe(make(Profile::Sin, 8, 2), op8, 0.34, 200, 5);
  CHECK(std::isfinite(l4));
  CHECK(l4 > 0.0);
  CHECK(std::abs(l8 - l4) <= 0.1 * l4);
  CHECK(lipschitz_Dbeta_probe(make(Profile::Zero, 4, 2), op4, 0.34, 20, 5) == 0.0);
}

TEST_CASE("coefficient difference margins") {
  std::mt19937_64 gen(38);
  const TimeGrid g(1.0, 4);
  for (Profile p : {Profile::Sin, Profile::Atan, Profile::Rational}) {
    const KernelCoefficient G = make(p, 6, 2);
    double worst = 1e300;
    for (int pair = 0; pair < 200; ++pair) {
      const Path y1 = rpde::test::random_path(g, 6, gen), y2 = rpde::test::random_path(g, 6, gen, 0.3);
      std::uniform_int_distribution<std::size_t> node(1, g.steps());
      std::size_t j = node(gen), k = node(gen);
      if (j == k) continue;
      if (j > k) std::swap(j, k);
      worst = std::min(worst, coefficient_difference_probe(G, y1, y1 + y2, k, j, 0.34).min());
    }
    CHECK(worst >= 0.0);
    const Path y = rpde::test::random_path(g, 6, gen);
    const DifferenceMargins same = coefficient_difference_probes(G, y, y, 0.34);
    CHECK(same.min() >= 0.0);
  }
  const Path y = rpde::test::random_path(g, 6, gen);
  CHECK_THROWS_AS(coefficient_difference_probe(make(Profile::Sin, 6, 2), y, y, 3, 0, 0.34), CoefficientError);
}

TEST_CASE("profile names") {
  for (Profile p : {Profile::Sin, Profile::Atan, Profile::Rational, Profile::Zero, Profile::Constant})
    CHECK(parse_profile(to_string(p)) == p);
  CHECK_THROWS_AS(parse_profile("cosh"), CoefficientError);
  const auto b = profile_bounds(Profile::Atan);
  CHECK(b[1] == 1.0);
  CHECK(b[2] == doctest::Approx(3.0 * std::sqrt(3.0) / 8.0));
  CHECK(b[3] == 2.0);
}
