#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rpde/noise.hpp"
#include "rpde/supporting.hpp"
#include "test_support.hpp"

#include <cmath>
#include <sstream>

using namespace rpde;

namespace {

/// omega_r = r on a grid, one noise mode.
RoughLift linear_lift(const TimeGrid& g) {
  return lift_on_grid(rpde::test::scalar_path(g, [](double t) { return t; }));
}

Eigen::MatrixXd smooth_K(int M, int m, std::mt19937_64& gen) {
  Eigen::MatrixXd K = rpde::test::random_matrix(M, m, gen);
  for (int j = 0; j < M; ++j) K.row(j) /= std::pow(j + 1.0, 2.0);
  return K;
}

CoeffTensor unit_tensor(int M, int m, std::mt19937_64& gen) {
  CoeffTensor E = CoeffTensor::random(M, m, gen);
  E.data /= E.frobenius();
  return E;
}

}  // namespace

TEST_CASE("identity semigroup on linear noise") {
  const TimeGrid g(1.0, 4);
  const SupportingEvaluator ev(linear_lift(g), SpectralOperator::identity(1));
  const Eigen::MatrixXd K = Eigen::MatrixXd::Constant(1, 1, 1.7);
  CoeffTensor E(1, 1);
  E(0, 0, 0) = -0.6;
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 2.5);
  for (auto [k, j] : {std::pair<std::size_t, std::size_t>{16, 0}, {9, 3}, {5, 4}}) {
    const double d = g.node(k) - g.node(j);
    CHECK(ev.omega_S(K, k, j)(0) == doctest::Approx(1.7 * d).epsilon(1e-14));
    CHECK(ev.proc_a(E, x, k, j)(0) == doctest::Approx(-0.6 * 2.5 * d).epsilon(1e-13));
    CHECK(ev.proc_c(E, K, k, j)(0) == doctest::Approx(-0.6 * 1.7 * d * d / 2.0).epsilon(1e-13));
    CHECK(ev.proc_b(E, K, k, j)(0) == doctest::Approx(-0.6 * 1.7 * d * d / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("scalar semigroup value on linear noise") {
  const TimeGrid g(1.0, 3);
  const SupportingEvaluator ev(linear_lift(g), SpectralOperator(Eigen::VectorXd::Ones(1)));
  const Eigen::MatrixXd K = Eigen::MatrixXd::Ones(1, 1);
  // int_0^1 e^{-(1 - q)} dq
  CHECK(ev.omega_S(K, 8, 0)(0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(ev.omega_S_ibp(K, 8, 0)(0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-13));
  CHECK(ev.phi(8, 0)(0, 0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("closed forms agree with brute-force quadrature") {
  std::mt19937_64 gen(21);
  const SpectralOperator op = SpectralOperator::dirichlet_interval(4);
  const Path w = sine_noise(TimeGrid(1.0, 4), 2, 1.0, 2.0);
  const SupportingEvaluator ev(lift_on_grid(w), op);
  const CoeffTensor E = unit_tensor(4, 2, gen);
  const Eigen::MatrixXd K = smooth_K(4, 2, gen);
  const Eigen::VectorXd x = rpde::test::random_vector(4, gen).normalized();
  const auto bq = oracle::proc_b_from(ev, E, K, 2, 64);
  for (std::size_t k : {3u, 7u, 16u}) {
    CHECK((ev.omega_S(K, k, 2) - oracle::omega_S(ev, K, k, 2, 64)).norm() <= 1e-5);
    CHECK((ev.proc_a(E, x, k, 2) - oracle::proc_a(ev, E, x, k, 2, 64)).norm() <= 1e-5);
    CHECK((ev.proc_c(E, K, k, 2) - oracle::proc_c(ev, E, K, k, 2, 64)).norm() <= 1e-5);
    CHECK((ev.proc_b(E, K, k, 2) - bq[k - 2]).norm() <= 1e-5);

    CHECK((ev.omega_S(K, k, 2) - ev.omega_S_ibp(K, k, 2)).norm() <= 1e-10);
    CHECK((ev.proc_a(E, x, k, 2) - ev.proc_a_direct(E, x, k, 2)).norm() <= 1e-10);
    CHECK((ev.proc_c(E, K, k, 2) - ev.proc_c_direct(E, K, k, 2)).norm() <= 1e-10);
  }
}

TEST_CASE("kernels reproduce the processes") {
  std::mt19937_64 gen(22);
  const SpectralOperator op = SpectralOperator::dirichlet_interval(3);
  const SupportingEvaluator ev(lift_on_grid(sample_fbm(0.5, TimeGrid(1.0, 5), 3)), op);
  // scalar fBm noise, m = 1
  const CoeffTensor E = unit_tensor(3, 1, gen);
  const Eigen::MatrixXd K = smooth_K(3, 1, gen);
  const Eigen::VectorXd x = rpde::test::random_vector(3, gen);
  const auto as = ev.a_kernels_from(4);
  const auto cs = ev.c_kernels_from(K, 4);
  const auto bs = ev.b_kernels_from(K, 4);
  for (std::size_t k : {5u, 12u, 32u}) {
    CHECK((contract(scale_by_input(ev.a_kernel(k, 4), x), E) - ev.proc_a(E, x, k, 4)).norm() <= 1e-12);
    CHECK((contract(scale_by_input(as[k - 4], x), E) - ev.proc_a(E, x, k, 4)).norm() <= 1e-12);
    CHECK((contract(ev.c_kernel(K, k, 4), E) - ev.proc_c(E, K, k, 4)).norm() <= 1e-12);
    CHECK((contract(cs[k - 4], E) - ev.proc_c(E, K, k, 4)).norm() <= 1e-12);
    CHECK((contract(ev.b_kernel(K, k, 4), E) - ev.proc_b(E, K, k, 4)).norm() <= 1e-12);
    CHECK((contract(bs[k - 4], E) - ev.proc_b(E, K, k, 4)).norm() <= 1e-12);
  }
  CHECK((contract(ev.step_alpha(7), E) - contract(ev.a_kernel(8, 7), E)).norm() <= 1e-14);
  CHECK((contract(ev.step_c(K, 7), E) - ev.proc_c(E, K, 8, 7)).norm() <= 1e-14);
  CHECK((contract(ev.step_b(K, 7), E) - ev.proc_b(E, K, 8, 7)).norm() <= 1e-13);
}

TEST_CASE("algebraic relations on fBm noise") {
  std::mt19937_64 gen(23);
  const SpectralOperator op = SpectralOperator::dirichlet_interval(5);
  QfBmSpec spec;
  spec.hurst = 0.5;
  spec.modes = 3;
  spec.grid = TimeGrid(1.0, 5);
  spec.seed = 9;
  const SupportingEvaluator ev(lift_on_grid(assemble_qfbm(spec)), op);
  const std::size_t N = ev.steps();
  std::uniform_int_distribution<std::size_t> node(0, N);
  for (int probe = 0; probe < 10; ++probe) {
    const CoeffTensor E = unit_tensor(5, 3, gen);
    const Eigen::MatrixXd K = smooth_K(5, 3, gen);
    const Eigen::VectorXd x = rpde::test::random_vector(5, gen).normalized();
    std::array<std::size_t, 3> t{node(gen), node(gen), node(gen)};
    std::sort(t.begin(), t.end());
    const AlgebraicDefects d = algebraic_defects(ev, E, K, x, t[2], t[1], t[0]);
    CHECK(d.omega_S <= 1e-8);
    CHECK(d.a <= 1e-6);
    CHECK(d.c <= 1e-6);
    CHECK(d.b <= 1e-6);
    CHECK(d.max() <= 1e-6);
    CHECK(partition_identity_a(ev, E, x, dyadic_partition(0, N, 3)) <= 1e-10);
    CHECK(partition_identity_a(ev, E, x, triadic_partition(5, 32, 1)) <= 1e-10);
  }
  CHECK_THROWS_AS(algebraic_defects(ev, CoeffTensor(5, 3), Eigen::MatrixXd::Zero(5, 3), Eigen::VectorXd::Zero(5), 3,
                                    5, 1),
                  SupportingError);
}

TEST_CASE("a lift that breaks Chen breaks the c relation") {
  std::mt19937_64 gen(24);
  const SpectralOperator op = SpectralOperator::dirichlet_interval(3);
  RoughLift lift = lift_on_grid(sine_noise(TimeGrid(1.0, 4), 2, 1.0, 2.0));
  const CoeffTensor E = unit_tensor(3, 2, gen);
  const Eigen::MatrixXd K = smooth_K(3, 2, gen);
  const Eigen::VectorXd x = rpde::test::random_vector(3, gen).normalized();
  const double clean = algebraic_defects(SupportingEvaluator(lift, op), E, K, x, 16, 8, 0).c;
  Eigen::VectorXd bump(4);
  bump << 0.0, 0.5, -0.5, 0.0;
  for (std::size_t k = 1; k < lift.grid().nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j) lift.second.set(k, j, lift.second.at(k, j) + bump);
  CHECK(max_chen_defect(lift) > 0.1);
  const double broken = algebraic_defects(SupportingEvaluator(lift, op), E, K, x, 16, 8, 0).c;
  CHECK(clean <= 1e-6);
  CHECK(broken >= 1e3 * clean);
  CHECK(broken >= 1e-4);
}

TEST_CASE("bilinearity") {
  std::mt19937_64 gen(25);
  const SpectralOperator op = SpectralOperator::dirichlet_interval(4);
  const SupportingEvaluator ev(lift_on_grid(sine_noise(TimeGrid(1.0, 4), 2, 1.0, 2.0)), op);
  const CoeffTensor E1 = unit_tensor(4, 2, gen), E2 = unit_tensor(4, 2, gen);
  const Eigen::MatrixXd K1 = smooth_K(4, 2, gen), K2 = smooth_K(4, 2, gen);
  const Eigen::VectorXd x1 = rpde::test::random_vector(4, gen), x2 = rpde::test::random_vector(4, gen);
  const double a = 1.3, b = -0.4;
  const std::size_t k = 13, j = 2;
  auto close = [](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return (u - v).norm() <= 1e-13 * (1.0 + v.norm()); };

  CHECK(close(ev.omega_S(a * K1 + b * K2, k, j), a * ev.omega_S(K1, k, j) + b * ev.omega_S(K2, k, j)));
  CHECK(close(ev.proc_a(a * E1 + b * E2, x1, k, j), a * ev.proc_a(E1, x1, k, j) + b * ev.proc_a(E2, x1, k, j)));
  CHECK(close(ev.proc_a(E1, a * x1 + b * x2, k, j), a * ev.proc_a(E1, x1, k, j) + b * ev.proc_a(E1, x2, k, j)));
  CHECK(close(ev.proc_c(a * E1 + b * E2, K1, k, j), a * ev.proc_c(E1, K1, k, j) + b * ev.proc_c(E2, K1, k, j)));
  CHECK(close(ev.proc_c(E1, a * K1 + b * K2, k, j), a * ev.proc_c(E1, K1, k, j) + b * ev.proc_c(E1, K2, k, j)));
  CHECK(close(ev.proc_b(a * E1 + b * E2, K1, k, j), a * ev.proc_b(E1, K1, k, j) + b * ev.proc_b(E2, K1, k, j)));
  CHECK(close(ev.proc_b(E1, a * K1 + b * K2, k, j), a * ev.proc_b(E1, K1, k, j) + b * ev.proc_b(E1, K2, k, j)));
}

TEST_CASE("shift covariance") {
  std::mt19937_64 gen(26);
  const SpectralOperator op = SpectralOperator::dirichlet_interval(4);
  QfBmSpec spec;
  spec.hurst = 0.4;
  spec.modes = 2;
  spec.grid = TimeGrid(1.0, 5);
  spec.seed = 3;
  const RoughLift lift = lift_on_grid(assemble_qfbm(spec));
  const std::size_t tau = 8;
  const SupportingEvaluator ev(lift, op), sh(shift_lift(lift, tau), op);
  const CoeffTensor E = unit_tensor(4, 2, gen);
  const Eigen::MatrixXd K = smooth_K(4, 2, gen);
  const Eigen::VectorXd x = rpde::test::random_vector(4, gen);
  for (auto [k, j] : {std::pair<std::size_t, std::size_t>{32, 8}, {20, 11}, {9, 8}}) {
    const double scale = 1.0 + ev.proc_b(E, K, k, j).norm();
    CHECK((ev.omega_S(K, k, j) - sh.omega_S(K, k - tau, j - tau)).norm() <= 1e-12);
    CHECK((ev.proc_a(E, x, k, j) - sh.proc_a(E, x, k - tau, j - tau)).norm() <= 1e-12);
    CHECK((ev.proc_c(E, K, k, j) - sh.proc_c(E, K, k - tau, j - tau)).norm() <= 1e-12);
    CHECK((ev.proc_b(E, K, k, j) - sh.proc_b(E, K, k - tau, j - tau)).norm() <= 1e-11 * scale);
  }
}

TEST_CASE("processes depend continuously on the lift") {
  std::mt19937_64 gen(27);
  const SpectralOperator op = SpectralOperator::dirichlet_interval(4);
  const Path w = sine_noise(TimeGrid(1.0, 8), 2, 1.0, 2.0);
  const CoeffTensor E = unit_tensor(4, 2, gen);
  const Eigen::MatrixXd K = smooth_K(4, 2, gen);
  const Eigen::VectorXd x = rpde::test::random_vector(4, gen).normalized();
  const auto rows = noise_continuity(w, op, {2, 3, 4, 5, 6, 7}, E, K, x, 0.45);
  REQUIRE(rows.size() == 6);
  // coarse grids with few long pairs can sit below the first refinements, so
  // monotone decay is asserted from level 4 on
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].level == rows[i - 1].level + 1);
    CHECK(rows[i].omega_S < rows[i - 1].omega_S);
    CHECK(rows[i].c < rows[i - 1].c);
    CHECK(rows[i].b < rows[i - 1].b);
    CHECK(rows[i].lift_distance < rows[i - 1].lift_distance);
    if (rows[i].level > 4) CHECK(rows[i].a < rows[i - 1].a);
  }
  CHECK(rows.back().a < 0.1 * rows.front().a);
  CHECK_THROWS_AS(noise_continuity(w, op, {9}, E, K, x, 0.45), SupportingError);
}

TEST_CASE("helpers and validation") {
  const SpectralOperator op(Eigen::Vector2d(4.0, 9.0));
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2, 1);
  K(1, 0) = 2.0;
  CHECK(dbeta_norm(op, K, 0.5) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(dbeta_norm(op, K, 0.0) == doctest::Approx(2.0).epsilon(1e-14));

  ProcessKernel k(2, 1);
  k.data.setOnes();
  const ProcessKernel s = scale_by_input(k, Eigen::Vector2d(3.0, -1.0));
  CHECK(s(0, 0, 0) == 3.0);
  CHECK(s(1, 1, 0) == -1.0);

  CHECK_NOTHROW(BExponents{0.45, 0.34}.validate());
  CHECK_THROWS_AS(BExponents({0.3, 0.3}).validate(), SupportingError);
  CHECK_THROWS_AS(BExponents({0.4, 0.2}).validate(), SupportingError);

  const TimeGrid g(1.0, 2);
  RoughLift bad = linear_lift(g);
  bad.second = TwoParamField(g, 4);
  CHECK_THROWS_AS(SupportingEvaluator(bad, op), SupportingError);

  const SupportingEvaluator ev(linear_lift(g), op);
  std::istringstream csv(process_csv(ev, ProcessKind::OmegaS, CoeffTensor(2, 1), K, Eigen::Vector2d::Ones()));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t_index,s_index,w_1,w_2");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 10);
}
