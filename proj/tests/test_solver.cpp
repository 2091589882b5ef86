#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rpde/noise.hpp"
#include "rpde/solver.hpp"
#include "test_support.hpp"

#include <cmath>
#include <sstream>

using namespace rpde;

namespace {

constexpr int kM = 8, km = 4;

RoughLift fbm_lift(int level, std::uint64_t seed = 7) {
  QfBmSpec spec;
  spec.modes = km;
  spec.seed = seed;
  spec.grid = TimeGrid(1.0, level);
  return lift_on_grid(assemble_qfbm(spec));
}

Eigen::VectorXd first_mode() {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(kM);
  xi(0) = 1.0;
  return xi;
}

const SpectralOperator& op() {
  static const SpectralOperator o = SpectralOperator::dirichlet_interval(kM);
  return o;
}

const KernelCoefficient& coeff() {
  static const KernelCoefficient g(KernelSpec{}, kM, km);
  return g;
}

double kernel_gap(const ProcessKernel& a, const ProcessKernel& b) { return (a.data - b.data).norm(); }

}  // namespace

TEST_CASE("zero diffusion returns the semigroup flow in one iteration") {
  KernelSpec zero;
  zero.profile = Profile::Zero;
  const KernelCoefficient G0(zero, kM, km);
  const SolveReport r = picard_solve(fbm_lift(6), op(), G0, first_mode(), SolveConfig{});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  for (std::size_t k = 0; k < r.solution.y.nodes(); ++k)
    CHECK((r.solution.y[k] - op().apply_S(r.solution.y.grid().node(k), first_mode())).norm() <= 1e-12);
  const Path e = exponential_euler(sine_noise(TimeGrid(1.0, 5), km), op(), G0, first_mode());
  for (std::size_t k = 0; k < e.nodes(); ++k)
    CHECK((e[k] - op().apply_S(e.grid().node(k), first_mode())).norm() <= 1e-14);
}

TEST_CASE("tiny noise contracts fast") {
  const SolveReport r = picard_solve(scale_lift(fbm_lift(6), 1e-3), op(), coeff(), first_mode(), SolveConfig{});
  CHECK(r.converged);
  CHECK(r.halvings == 0);
  CHECK(r.iterations <= 4);
  CHECK(r.factor <= 0.1);
}

TEST_CASE("default problem: convergence, constraint and cocycle") {
  const RoughLift lift = fbm_lift(6);
  const SolveConfig cfg;
  const SolveReport r = picard_solve(lift, op(), coeff(), first_mode(), cfg);
  REQUIRE(r.converged);
  CHECK(r.factor <= cfg.lambda_star);
  CHECK(r.constraint <= 10.0 * cfg.tolerance);
  CHECK(r.deltas.back() < cfg.tolerance);
  CHECK(r.radius == doctest::Approx(2.0));
  CHECK(r.x_norm > 0.0);
  CHECK(r.attempts.front() == lift.grid().steps());
  CHECK(r.solution.y[0] == first_mode());

  const RoughLift head = head_lift(lift, r.steps);
  const CocycleResult c0 = cocycle_check(head, op(), coeff(), r, 0, cfg);
  CHECK(c0.residual <= 1e-14);
  const CocycleResult c = cocycle_check(head, op(), coeff(), r, r.steps / 4, cfg);
  CHECK(c.residual <= 10.0 * cfg.tolerance);
  CHECK(c.z_residual <= 10.0 * cfg.tolerance);
  CHECK(c.shifted.steps == r.steps - r.steps / 4);

  const RegularityReport reg = regularity_check(SupportingEvaluator(head, op()), r, first_mode(), cfg.alpha, cfg.beta);
  CHECK(std::isfinite(reg.y_beta));
  CHECK(std::isfinite(reg.z_alpha_beta));
  CHECK(std::isfinite(reg.y_weighted));
  CHECK(std::isfinite(reg.z_weighted));
  CHECK(reg.xi_dbeta == doctest::Approx(std::pow(std::numbers::pi * std::numbers::pi, cfg.beta)));
}

TEST_CASE("restart from a different pair reaches the same solution") {
  const RoughLift lift = fbm_lift(5);
  const SolveConfig cfg;
  const SolveReport r = picard_solve(lift, op(), coeff(), first_mode(), cfg);
  REQUIRE(r.converged);
  REQUIRE(r.halvings == 0);
  const SupportingEvaluator ev(lift, op());
  const ControlledPair start = random_pair(ev, first_mode(), 0.3, 99);
  const SolveReport q = picard_solve(lift, op(), coeff(), first_mode(), cfg, &start);
  REQUIRE(q.converged);
  CHECK((q.solution.y.values() - r.solution.y.values()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(x_norm(ev, q.solution - r.solution, cfg.alpha, cfg.beta) <= 1e-8);
}

TEST_CASE("lazy z agrees with the dense table") {
  const SupportingEvaluator ev(fbm_lift(4), op());
  const ControlledPair p = random_pair(ev, first_mode(), 0.5, 3);
  const ControlledPair mp = apply_M(ev, coeff(), p, first_mode());
  REQUIRE(DenseZ::fits(kM, km, ev.steps()));
  const DenseZ dense(ev, mp.z);
  double gap = 0.0, scale = 0.0;
  for (std::size_t j = 0; j <= ev.steps(); ++j) {
    const auto from = z_kernels_from(ev, mp.z, j);
    for (std::size_t k = j; k <= ev.steps(); ++k) {
      gap = std::max(gap, kernel_gap(dense.at(k, j), z_kernel(ev, mp.z, k, j)));
      gap = std::max(gap, kernel_gap(from[k - j], z_kernel(ev, mp.z, k, j)));
      scale = std::max(scale, dense.at(k, j).data.norm());
    }
  }
  CHECK(scale > 0.0);
  CHECK(gap <= 1e-12 * scale);
  CHECK(kernel_gap(z_step(ev, mp.z, 5), z_kernel(ev, mp.z, 6, 5)) <= 1e-14 * scale);
  CHECK_FALSE(DenseZ::fits(kM, km, std::size_t{1} << 12));

  // the pair map is linear in its lazy ingredients
  const ControlledPair q = random_pair(ev, first_mode(), 0.5, 4);
  const LazyZ d = p.z - q.z;
  CHECK(kernel_gap(z_kernel(ev, d, 9, 2), z_kernel(ev, p.z, 9, 2) - z_kernel(ev, q.z, 9, 2)) <= 1e-13);
  CHECK(kernel_gap(z_kernel(ev, p.z.scaled(-2.0), 9, 2), -2.0 * z_kernel(ev, p.z, 9, 2)) <= 1e-13);
}

TEST_CASE("admissible pairs satisfy the constraint") {
  const SupportingEvaluator ev(fbm_lift(5), op());
  CHECK(constraint_residual(ev, initial_pair(ev, first_mode())) <= 1e-10);
  const ControlledPair p = random_pair(ev, first_mode(), 1.0, 8);
  CHECK(constraint_residual(ev, p) <= 1e-10);
  CHECK(constraint_residual(ev, apply_M(ev, coeff(), p, first_mode())) <= 1e-10);
  // breaking y without touching z violates it
  ControlledPair bad = p;
  bad.y[7] += Eigen::VectorXd::Constant(kM, 0.5);
  CHECK(constraint_residual(ev, bad, 16, 64) >= 1e-3);
}

TEST_CASE("norm is homogeneous") {
  const SupportingEvaluator ev(fbm_lift(4), op());
  const ControlledPair p = random_pair(ev, first_mode(), 0.7, 5);
  const double a = 0.45, b = 0.34;
  const double n = x_norm(ev, p, a, b);
  CHECK(x_norm(ev, p.scaled(3.0), a, b) == doctest::Approx(3.0 * n).epsilon(1e-13));
  CHECK(x_norm(ev, p.scaled(-0.5), a, b) == doctest::Approx(0.5 * n).epsilon(1e-13));
  CHECK(x_norm_parts(ev, p, a, b).total() == doctest::Approx(n).epsilon(1e-15));
  CHECK(x_norm(ev, p - p, a, b) == 0.0);
}

TEST_CASE("germs vanish with the coefficient") {
  KernelSpec zero;
  zero.profile = Profile::Zero;
  const KernelCoefficient G0(zero, kM, km);
  const SupportingEvaluator ev(fbm_lift(4), op());
  const ControlledPair p = random_pair(ev, first_mode(), 0.7, 6);
  CHECK(xi_y(ev, G0, p, 9, 3).norm() == 0.0);
  std::mt19937_64 gen(1);
  const CoeffTensor E = CoeffTensor::random(kM, km, gen);
  CHECK(xi_z(ev, G0, p.y, Path(ev.grid(), kM), E, 9, 3).norm() == 0.0);
  // with G != 0, xi_y on one step is omega^S(G(y_u)) + z(DG(y_u))
  const Eigen::VectorXd direct = ev.omega_S(coeff().eval_G(p.y[3]), 4, 3) +
                                 contract(z_kernel(ev, p.z, 4, 3), coeff().eval_DG(p.y[3]));
  CHECK((xi_y(ev, coeff(), p, 4, 3) - direct).norm() <= 1e-14 * (1.0 + direct.norm()));
}

TEST_CASE("estimate diagnostics") {
  const RoughLift lift = fbm_lift(6);
  const SupportingEvaluator ev(lift, op());
  const double a = 0.45, b = 0.34;
  const LemmaDiagnostics d = lemma_diagnostics(ev, coeff(), initial_pair(ev, first_mode()), first_mode(), a, b);
  for (double c : {d.c_hatdelta, d.c_dbeta, d.c_norm, d.c_help, d.c_z, d.c_z_norm}) {
    CHECK(std::isfinite(c));
    CHECK(c >= 0.0);
  }
  CHECK(d.help_slope >= a + b - 0.15);

  const SelfMapFit f = self_map_fit(lift, op(), coeff(), first_mode(), {0.5, 1.0, 2.0}, {16, 32, 64}, a, b);
  CHECK(f.ratios.size() == 9);
  CHECK(std::isfinite(f.c_hat));
  CHECK(f.c_hat > 0.0);
  const double L = contraction_constant(SupportingEvaluator(head_lift(lift, 16), op()), coeff(), first_mode(), 8, 0.3,
                                        2, a, b);
  CHECK(std::isfinite(L));
  CHECK(L > 0.0);
}

TEST_CASE("exponential Euler converges at first order on smooth noise") {
  const Eigen::VectorXd xi = first_mode();
  const Path ref = exponential_euler(sine_noise(TimeGrid(1.0, 13), km), op(), coeff(), xi);
  std::vector<double> err;
  for (int L = 6; L <= 9; ++L) {
    const Path y = exponential_euler(sine_noise(TimeGrid(1.0, L), km), op(), coeff(), xi);
    const std::size_t f = std::size_t{1} << (13 - L);
    double e = 0.0;
    for (std::size_t k = 0; k < y.nodes(); ++k) e = std::max(e, (y[k] - ref[k * f]).norm());
    err.push_back(e);
  }
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i - 1] / err[i] == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("configuration and output") {
  CHECK_NOTHROW(SolveConfig{}.validate(0.5));
  SolveConfig c;
  c.beta = 0.3;
  CHECK_THROWS_AS(c.validate(0.5), SolverError);
  c = SolveConfig{};
  c.alpha = 0.6;
  CHECK_THROWS_AS(c.validate(0.7), SolverError);
  c = SolveConfig{};
  CHECK_THROWS_AS(c.validate(0.4), SolverError);

  const Path y = rpde::test::scalar_path(TimeGrid(1.0, 1), [](double t) { return 0.1 + t; });
  std::istringstream csv(path_csv(y));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "node,t,w_1");
  std::getline(csv, line);
  CHECK(line == "0,0,0.10000000000000001");
}

TEST_CASE("violent noise shrinks the horizon") {
  const SolveReport r = picard_solve(scale_lift(fbm_lift(8), 20.0), op(), coeff(), first_mode(), SolveConfig{});
  CHECK(r.halvings >= 1);
  CHECK(r.steps < 256);
  CHECK(r.horizon == doctest::Approx(double(r.steps) / 256.0));
  CHECK(r.attempts.size() == std::size_t(r.halvings) + 1);
  CHECK(r.converged);
}
