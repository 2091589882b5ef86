#include "rpde/solver.hpp"

#include "rpde/expint.hpp"
#include "rpde/holder_algebra.hpp"
#include "rpde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>

namespace rpde {

void SolveConfig::validate(double hurst) const {
  if (!(beta > 1.0 / 3.0)) throw SolverError("solve config: beta must exceed 1/3");
  if (!(beta < alpha)) throw SolverError("solve config: beta must be below alpha");
  if (!(alpha <= 0.5)) throw SolverError("solve config: alpha must not exceed 1/2");
  if (!(alpha + 2.0 * beta > 1.0)) throw SolverError("solve config: alpha + 2 beta must exceed 1");
  if (!(alpha < hurst)) throw SolverError("solve config: alpha must be below the Hurst index");
  if (!(lambda_star > 0.0 && lambda_star < 1.0)) throw SolverError("solve config: lambda* must lie in (0, 1)");
  if (max_iterations < 1) throw SolverError("solve config: max_iterations must be positive");
  if (!(tolerance > 0.0)) throw SolverError("solve config: tolerance must be positive");
}

LazyZ LazyZ::scaled(double c) const {
  LazyZ out = *this;
  for (auto& k : out.K) k *= c;
  out.ybar.values() *= c;
  out.xi *= c;
  return out;
}

LazyZ operator-(const LazyZ& a, const LazyZ& b) {
  LazyZ out;
  const std::size_t n = std::max(a.K.size(), b.K.size());
  for (std::size_t u = 0; u < n; ++u) {
    if (u < a.K.size() && u < b.K.size()) out.K.push_back(a.K[u] - b.K[u]);
    else if (u < a.K.size()) out.K.push_back(a.K[u]);
    else out.K.push_back(-b.K[u]);
  }
  out.ybar = a.ybar - b.ybar;
  out.xi = a.xi - b.xi;
  return out;
}

ControlledPair ControlledPair::scaled(double c) const { return {c * y, z.scaled(c)}; }

ControlledPair operator-(const ControlledPair& a, const ControlledPair& b) { return {a.y - b.y, a.z - b.z}; }

namespace {

void check_lazy(const SupportingEvaluator& ev, const LazyZ& z) {
  if (z.ybar.nodes() != ev.grid().nodes() || z.ybar.dim() != ev.M())
    throw SolverError("lazy z: ybar does not live on the evaluator grid");
  if (!z.K.empty() && z.K.size() != ev.grid().nodes()) throw SolverError("lazy z: one K per node expected");
  if (z.xi.size() != ev.M()) throw SolverError("lazy z: xi has the wrong size");
}

// kernel of omega^S_kj(E w) as a process in E
ProcessKernel phi_kernel(const SupportingEvaluator& ev, std::size_t k, std::size_t j, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd ph = ev.phi(k, j);
  ProcessKernel out(ev.M(), ev.m());
  for (int i = 0; i < ev.M(); ++i) out.data.middleCols(i * ev.m(), ev.m()) = w(i) * ph;
  return out;
}

// The xi-free per-step part b_{l+1,l}(., K_l) + a_{l+1,l}(., ybar_l).
std::vector<ProcessKernel> sewn_steps(const SupportingEvaluator& ev, const LazyZ& z) {
  std::vector<ProcessKernel> out;
  out.reserve(ev.steps());
  for (std::size_t l = 0; l < ev.steps(); ++l) {
    ProcessKernel s = scale_by_input(ev.step_alpha(l), z.ybar[l]);
    if (!z.K.empty()) s += ev.step_b(z.K[l], l);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ProcessKernel> stream_from(const SupportingEvaluator& ev, const LazyZ& z,
                                       const std::vector<ProcessKernel>& steps, std::size_t j) {
  const SemigroupHandle& sg = ev.sg();
  const std::size_t N = ev.steps();
  const Eigen::VectorXd xs = sg.apply_steps(j, z.xi);
  const Eigen::VectorXd w = Eigen::VectorXd(z.ybar[j]) + xs;
  std::vector<ProcessKernel> out;
  out.reserve(N - j + 1);
  out.emplace_back(ev.M(), ev.m());
  ProcessKernel acc(ev.M(), ev.m()), al(ev.M(), ev.m());
  for (std::size_t l = j; l < N; ++l) {
    acc.data.array().colwise() *= sg.factors(1).array();
    acc += steps[l];
    al.data.array().colwise() *= sg.factors(1).array();
    al += scale_by_input(ev.step_alpha(l), (sg.factors(l - j).array() * xs.array()).matrix());
    out.push_back(acc + al - phi_kernel(ev, l + 1, j, w));
  }
  return out;
}

}  // namespace

std::vector<ProcessKernel> z_kernels_from(const SupportingEvaluator& ev, const LazyZ& z, std::size_t j) {
  check_lazy(ev, z);
  if (j > ev.steps()) throw SolverError("z kernels: base node out of range");
  return stream_from(ev, z, sewn_steps(ev, z), j);
}

ProcessKernel z_kernel(const SupportingEvaluator& ev, const LazyZ& z, std::size_t k, std::size_t j) {
  check_lazy(ev, z);
  if (j > k || k > ev.steps()) throw SolverError("z kernel: pair out of range");
  const SemigroupHandle& sg = ev.sg();
  const Eigen::VectorXd xs = sg.apply_steps(j, z.xi);
  ProcessKernel acc(ev.M(), ev.m());
  for (std::size_t l = j; l < k; ++l) {
    acc.data.array().colwise() *= sg.factors(1).array();
    acc += scale_by_input(ev.step_alpha(l), Eigen::VectorXd(z.ybar[l]) + (sg.factors(l - j).array() * xs.array()).matrix());
    if (!z.K.empty()) acc += ev.step_b(z.K[l], l);
  }
  return acc - phi_kernel(ev, k, j, Eigen::VectorXd(z.ybar[j]) + xs);
}

ProcessKernel z_step(const SupportingEvaluator& ev, const LazyZ& z, std::size_t k) {
  check_lazy(ev, z);
  if (k >= ev.steps()) throw SolverError("z step: node out of range");
  const Eigen::VectorXd w = Eigen::VectorXd(z.ybar[k]) + ev.sg().apply_steps(k, z.xi);
  ProcessKernel s = scale_by_input(ev.step_alpha(k), w);
  if (!z.K.empty()) s += ev.step_b(z.K[k], k);
  return s - phi_kernel(ev, k + 1, k, w);
}

bool DenseZ::fits(int M, int m, std::size_t steps) {
  const double entries = std::pow(static_cast<double>(M), 3) * m * static_cast<double>(steps) * static_cast<double>(steps);
  return entries <= std::ldexp(1.0, 26);
}

DenseZ::DenseZ(const SupportingEvaluator& ev, const LazyZ& z) {
  check_lazy(ev, z);
  if (!fits(ev.M(), ev.m(), ev.steps())) throw SolverError("dense z: more than 2^26 entries");
  const std::size_t nodes = ev.grid().nodes();
  kernels_.assign(TwoParamField::pair_count(nodes), ProcessKernel(ev.M(), ev.m()));
  const auto steps = sewn_steps(ev, z);
  for (std::size_t j = 0; j < nodes; ++j) {
    auto row = stream_from(ev, z, steps, j);
    for (std::size_t k = j; k < nodes; ++k) kernels_[TwoParamField::index(k, j)] = std::move(row[k - j]);
  }
}

ControlledPair initial_pair(const SupportingEvaluator& ev, const Eigen::VectorXd& xi) {
  if (xi.size() != ev.M()) throw SolverError("initial value has the wrong size");
  ControlledPair p;
  p.y = Path(ev.grid(), ev.M());
  for (std::size_t k = 0; k < ev.grid().nodes(); ++k) p.y[k] = ev.sg().apply_steps(k, xi);
  p.z.ybar = Path(ev.grid(), ev.M());
  p.z.xi = xi;
  return p;
}

Eigen::VectorXd xi_y(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p, std::size_t v,
                     std::size_t u) {
  if (u > v || v > ev.steps()) throw SolverError("xi_y: pair out of range");
  const Eigen::VectorXd yu = p.y[u];
  return ev.omega_S(G.eval_G(yu), v, u) + contract(z_kernel(ev, p.z, v, u), G.eval_DG(yu));
}

Eigen::VectorXd xi_z(const SupportingEvaluator& ev, const KernelCoefficient& G, const Path& y, const Path& ybar,
                     const CoeffTensor& E, std::size_t v, std::size_t u, const BExponents& ex) {
  if (u > v || v > ev.steps()) throw SolverError("xi_z: pair out of range");
  if (u == v) return Eigen::VectorXd::Zero(ev.M());
  const Eigen::VectorXd yu = y[u];
  return ev.proc_b(E, G.eval_G(yu), v, u, ex) + ev.proc_a(E, ybar[u], v, u);
}

SewingProblem y_problem(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p,
                        double alpha, double beta) {
  check_lazy(ev, p.z);
  const std::size_t nodes = ev.grid().nodes();
  auto Gs = std::make_shared<std::vector<Eigen::MatrixXd>>();
  auto DGs = std::make_shared<std::vector<CoeffTensor>>();
  Gs->reserve(nodes);
  DGs->reserve(nodes);
  for (std::size_t u = 0; u < nodes; ++u) {
    const Eigen::VectorXd yu = p.y[u];
    Gs->push_back(G.eval_G(yu));
    DGs->push_back(G.eval_DG(yu));
  }
  SewingProblem prob;
  prob.dim = ev.M();
  prob.exponents = SewingExponents{alpha, 2.0 * beta, alpha + 2.0 * beta};
  prob.sg = ev.sg();
  const SupportingEvaluator* e = &ev;
  const LazyZ z = p.z;
  prob.germ = [e, z, Gs, DGs](std::size_t v, std::size_t u) {
    const ProcessKernel zk = v == u + 1 ? z_step(*e, z, u) : z_kernel(*e, z, v, u);
    return Eigen::VectorXd(e->omega_S((*Gs)[u], v, u) + contract(zk, (*DGs)[u]));
  };
  return prob;
}

ControlledPair apply_M(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p,
                       const Eigen::VectorXd& xi) {
  if (p.y.nodes() != ev.grid().nodes()) throw SolverError("apply_M: pair does not live on the evaluator grid");
  SewingOptions o;
  o.depth = 0;
  const SolveConfig defaults;
  const SewingProblem prob = y_problem(ev, G, p, defaults.alpha, defaults.beta);
  const SewingResult r = sew(prob, o);

  ControlledPair out;
  out.z.ybar = r.integral;
  out.z.xi = xi;
  out.z.K.reserve(ev.grid().nodes());
  for (std::size_t u = 0; u < ev.grid().nodes(); ++u) out.z.K.push_back(G.eval_G(p.y[u]));
  out.y = Path(ev.grid(), ev.M());
  for (std::size_t k = 0; k < ev.grid().nodes(); ++k) out.y[k] = ev.sg().apply_steps(k, xi) + r.integral[k];
  return out;
}

XNormParts x_norm_parts(const SupportingEvaluator& ev, const ControlledPair& p, double alpha, double beta) {
  check_lazy(ev, p.z);
  XNormParts out;
  out.y_sup = sup_norm(p.y);
  out.y_weighted = weighted_seminorm(p.y, beta).value;
  const TimeGrid& g = ev.grid();
  const auto steps = sewn_steps(ev, p.z);
  for (std::size_t j = 0; j < g.nodes(); ++j) {
    const auto row = stream_from(ev, p.z, steps, j);
    const double s = g.node(j);
    for (std::size_t k = j + 1; k < g.nodes(); ++k) {
      const double len = g.node(k) - s;
      const double v = kernel_opnorm(row[k - j]);
      out.z_alpha = std::max(out.z_alpha, v / std::pow(len, alpha));
      if (j > 0) out.z_weighted = std::max(out.z_weighted, std::pow(s, beta) * v / std::pow(len, alpha + beta));
    }
  }
  return out;
}

double x_norm(const SupportingEvaluator& ev, const ControlledPair& p, double alpha, double beta) {
  return x_norm_parts(ev, p, alpha, beta).total();
}

double constraint_residual(const SupportingEvaluator& ev, const ControlledPair& p, int tensors, int triples,
                           std::uint64_t seed) {
  check_lazy(ev, p.z);
  std::mt19937_64 gen(seed);
  const std::size_t nodes = ev.grid().nodes();
  std::uniform_int_distribution<std::size_t> pick(0, nodes - 1);
  std::vector<CoeffTensor> Es;
  for (int e = 0; e < tensors; ++e) {
    CoeffTensor E = CoeffTensor::random(ev.M(), ev.m(), gen);
    E.data /= E.frobenius();
    Es.push_back(std::move(E));
  }
  double worst = 0.0;
  for (int q = 0; q < triples; ++q) {
    std::size_t a[3] = {pick(gen), pick(gen), pick(gen)};
    std::sort(a, a + 3);
    const std::size_t s = a[0], tau = a[1], t = a[2];
    const ProcessKernel zts = z_kernel(ev, p.z, t, s), ztt = z_kernel(ev, p.z, t, tau), zts2 = z_kernel(ev, p.z, tau, s);
    const Eigen::VectorXd dy = p.y[tau] - p.y[s];
    for (const auto& E : Es) {
      const Eigen::VectorXd lhs =
          contract(zts, E) - contract(ztt, E) - ev.sg().apply_steps(t - tau, contract(zts2, E));
      const Eigen::VectorXd rhs = ev.omega_S(E.apply(dy), t, tau);
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

LemmaDiagnostics lemma_diagnostics(const SupportingEvaluator& ev, const KernelCoefficient& G, const ControlledPair& p,
                                   const Eigen::VectorXd& xi, double alpha, double beta) {
  const ControlledPair q = apply_M(ev, G, p, xi);
  const double X = x_norm(ev, p, alpha, beta);
  const double w = 1.0 + X * X;
  const TimeGrid& g = ev.grid();
  const SemigroupHandle& sg = ev.sg();
  const Path& yb = q.z.ybar;
  const double T = g.horizon();
  LemmaDiagnostics d;

  std::vector<double> len, val;
  for (std::size_t j = 0; j < g.nodes(); ++j) {
    const double s = g.node(j);
    const Eigen::MatrixXd Gs = G.eval_G(p.y[j]);
    if (j > 0) d.c_dbeta = std::max(d.c_dbeta, sg.op().d_gamma_norm(beta, yb[j]) / std::pow(s, alpha - beta) / w);
    for (std::size_t k = j + 1; k < g.nodes(); ++k) {
      const double l = g.node(k) - s;
      const Eigen::VectorXd hd = yb[k] - sg.apply_steps(k - j, yb[j]);
      d.c_hatdelta = std::max(d.c_hatdelta, hd.norm() / std::pow(l, alpha) / w);
      if (j == 0) continue;
      const double r = (hd - ev.omega_S(Gs, k, j)).norm();
      d.c_help = std::max(d.c_help, std::pow(s, beta) * r / std::pow(l, alpha + beta) / w);
      if (s >= T / 8.0 && k >= j + 4) {
        len.push_back(l);
        val.push_back(std::pow(s, beta) * r);
      }
    }
  }
  d.c_norm = (sup_norm(yb) + weighted_seminorm(yb, beta).value) / std::pow(T, alpha) / w;
  try {
    d.help_slope = fit_slope(len, val).slope;
  } catch (const SewingError&) {
    d.help_slope = 0.0;
  }

  LazyZ zbar = q.z;
  zbar.xi.setZero();
  const auto steps = sewn_steps(ev, zbar);
  for (std::size_t j = 0; j < g.nodes(); ++j) {
    const auto row = stream_from(ev, zbar, steps, j);
    const double s = g.node(j);
    for (std::size_t k = j + 1; k < g.nodes(); ++k) {
      const double l = g.node(k) - s;
      const double v = kernel_opnorm(row[k - j]);
      const double shape = std::pow(l, 2.0 * alpha) + std::pow(s, alpha - beta) * std::pow(l, alpha + beta);
      d.c_z = std::max(d.c_z, v / shape / w);
      d.c_z_norm = std::max(d.c_z_norm, v / std::pow(l, alpha + beta) / std::pow(T, alpha - beta) / w);
    }
  }
  return d;
}

namespace {

ControlledPair restrict_pair(const ControlledPair& p, std::size_t steps) {
  const TimeGrid g = p.y.grid().head(steps);
  ControlledPair out;
  out.y = Path(g, p.y.values().leftCols(static_cast<Eigen::Index>(steps + 1)));
  out.z.ybar = Path(g, p.z.ybar.values().leftCols(static_cast<Eigen::Index>(steps + 1)));
  out.z.xi = p.z.xi;
  if (!p.z.K.empty()) out.z.K.assign(p.z.K.begin(), p.z.K.begin() + static_cast<std::ptrdiff_t>(steps + 1));
  return out;
}

}  // namespace

SolveReport picard_solve(const RoughLift& lift, const SpectralOperator& op, const KernelCoefficient& G,
                         const Eigen::VectorXd& xi, const SolveConfig& cfg, const ControlledPair* start) {
  if (G.M() != op.modes() || G.m() != lift.modes()) throw SolverError("coefficient, operator and noise disagree on dimensions");
  if (xi.size() != op.modes()) throw SolverError("initial value has the wrong size");
  SolveReport rep;
  rep.radius = cfg.radius_factor * xi.norm();
  std::size_t steps = lift.grid().steps();
  while (true) {
    if (steps < 4) throw HorizonUnderflow("no contraction down to four grid steps");
    rep.attempts.push_back(steps);
    const SupportingEvaluator ev(steps == lift.grid().steps() ? lift : head_lift(lift, steps), op);
    ControlledPair p = start ? restrict_pair(*start, steps) : initial_pair(ev, xi);
    rep.deltas.clear();
    rep.ratios.clear();
    rep.converged = false;
    int above = 0;
    bool halve = false;
    int it = 0;
    for (it = 1; it <= cfg.max_iterations; ++it) {
      ControlledPair next = apply_M(ev, G, p, xi);
      const double d = x_norm(ev, next - p, cfg.alpha, cfg.beta);
      p = std::move(next);
      if (!std::isfinite(d)) { halve = true; break; }
      rep.deltas.push_back(d);
      if (d < cfg.tolerance) { rep.converged = true; break; }
      if (rep.deltas.size() >= 2) {
        const double prev = rep.deltas[rep.deltas.size() - 2];
        const double r = d / prev;
        rep.ratios.push_back(r);
        above = r > cfg.lambda_star ? above + 1 : 0;
        if (above >= 3) { halve = true; break; }
      }
    }
    if (halve) {
      steps /= 2;
      ++rep.halvings;
      continue;
    }
    rep.iterations = std::min(it, cfg.max_iterations);
    rep.factor = rep.ratios.empty() ? 0.0 : *std::max_element(rep.ratios.begin(), rep.ratios.end());
    rep.horizon = ev.grid().horizon();
    rep.steps = steps;
    rep.x_norm = x_norm(ev, p, cfg.alpha, cfg.beta);
    rep.constraint = constraint_residual(ev, p);
    rep.solution = std::move(p);
    return rep;
  }
}

ControlledPair random_pair(const SupportingEvaluator& ev, const Eigen::VectorXd& xi, double scale, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const TimeGrid& g = ev.grid();
  const double sh = std::sqrt(g.h());
  ControlledPair p = initial_pair(ev, xi);
  for (std::size_t k = 1; k < g.nodes(); ++k)
    for (int j = 0; j < ev.M(); ++j) p.z.ybar[k](j) = p.z.ybar[k - 1](j) + scale * sh * nd(gen) / (j + 1);
  p.z.K.resize(g.nodes());
  for (auto& K : p.z.K) {
    K.resize(ev.M(), ev.m());
    for (int j = 0; j < ev.M(); ++j)
      for (int n = 0; n < ev.m(); ++n) K(j, n) = scale * nd(gen) / std::pow(j + 1.0, 3);
  }
  p.y = p.y + p.z.ybar;
  return p;
}

CocycleResult cocycle_check(const RoughLift& lift, const SpectralOperator& op, const KernelCoefficient& G,
                            const SolveReport& report, std::size_t tau, const SolveConfig& cfg) {
  if (tau >= report.steps) throw SolverError("cocycle: tau must lie before the horizon");
  const RoughLift base = report.steps == lift.grid().steps() ? lift : head_lift(lift, report.steps);
  CocycleResult out;
  if (tau == 0) {
    out.shifted = picard_solve(base, op, G, report.solution.y[0], cfg);
  } else {
    out.shifted = picard_solve(shift_lift(base, tau), op, G, report.solution.y[tau], cfg);
  }
  const SupportingEvaluator ev(base, op);
  const SupportingEvaluator evs(tau == 0 ? base : shift_lift(base, tau), op);
  const SupportingEvaluator evh(out.shifted.steps == evs.steps() ? evs.lift() : head_lift(evs.lift(), out.shifted.steps), op);
  for (std::size_t k = 0; k <= out.shifted.steps; ++k) {
    out.residual = std::max(out.residual, (out.shifted.solution.y[k] - report.solution.y[tau + k]).norm());
    if (k < out.shifted.steps)
      out.z_residual = std::max(out.z_residual, kernel_opnorm(z_step(evh, out.shifted.solution.z, k) -
                                                             z_step(ev, report.solution.z, tau + k)));
  }
  return out;
}

RegularityReport regularity_check(const SupportingEvaluator& ev, const SolveReport& report, const Eigen::VectorXd& xi,
                                  double alpha, double beta) {
  const ControlledPair& p = report.solution;
  RegularityReport r;
  r.y_beta = holder_seminorm(p.y, beta).value;
  r.y_weighted = weighted_seminorm(p.y, beta).value;
  r.xi_dbeta = ev.sg().op().d_gamma_norm(beta, xi);
  const TimeGrid& g = ev.grid();
  const auto steps = sewn_steps(ev, p.z);
  for (std::size_t j = 0; j < g.nodes(); ++j) {
    const auto row = stream_from(ev, p.z, steps, j);
    const double s = g.node(j);
    for (std::size_t k = j + 1; k < g.nodes(); ++k) {
      const double l = g.node(k) - s;
      const double v = kernel_opnorm(row[k - j]) / std::pow(l, alpha + beta);
      r.z_alpha_beta = std::max(r.z_alpha_beta, v);
      if (j > 0) r.z_weighted = std::max(r.z_weighted, std::pow(s, beta) * v);
    }
  }
  return r;
}

Path exponential_euler(const Path& omega, const SpectralOperator& op, const KernelCoefficient& G,
                       const Eigen::VectorXd& xi) {
  const TimeGrid& g = omega.grid();
  const double h = g.h();
  const Eigen::VectorXd e = op.exp_factors(h);
  Eigen::VectorXd p1(op.modes());
  for (int j = 0; j < op.modes(); ++j) p1(j) = expint::phi1(op.eigenvalue(j) * h);
  Path y(g, op.modes());
  y[0] = xi;
  for (std::size_t k = 0; k < g.steps(); ++k) {
    const Eigen::VectorXd yk = y[k];
    const Eigen::VectorXd dw = omega[k + 1] - omega[k];
    y[k + 1] = (e.array() * yk.array() + p1.array() * (G.eval_G(yk) * dw).array()).matrix();
  }
  return y;
}

SelfMapFit self_map_fit(const RoughLift& lift, const SpectralOperator& op, const KernelCoefficient& G,
                        const Eigen::VectorXd& xi_dir, const std::vector<double>& xi_scales,
                        const std::vector<std::size_t>& step_counts, double alpha, double beta) {
  SelfMapFit fit;
  for (std::size_t n : step_counts) {
    const SupportingEvaluator ev(n == lift.grid().steps() ? lift : head_lift(lift, n), op);
    const double T = ev.grid().horizon();
    for (double c : xi_scales) {
      const Eigen::VectorXd xi = c * xi_dir;
      const ControlledPair p = initial_pair(ev, xi);
      const double X = x_norm(ev, p, alpha, beta);
      const double img = x_norm(ev, apply_M(ev, G, p, xi), alpha, beta);
      const double r = img / (xi.norm() + (1.0 + X * X) * std::pow(T, alpha));
      fit.ratios.push_back(r);
      fit.c_hat = std::max(fit.c_hat, r);
    }
  }
  return fit;
}

double contraction_constant(const SupportingEvaluator& ev, const KernelCoefficient& G, const Eigen::VectorXd& xi,
                            int probes, double scale, std::uint64_t seed, double alpha, double beta) {
  const double T = ev.grid().horizon();
  double best = 0.0;
  for (int q = 0; q < probes; ++q) {
    const ControlledPair p1 = random_pair(ev, xi, scale, seed + 2 * static_cast<std::uint64_t>(q));
    const ControlledPair p2 = random_pair(ev, xi, scale, seed + 2 * static_cast<std::uint64_t>(q) + 1);
    const double n1 = x_norm(ev, p1, alpha, beta), n2 = x_norm(ev, p2, alpha, beta);
    const double d = x_norm(ev, p1 - p2, alpha, beta);
    if (d == 0.0) continue;
    const double img = x_norm(ev, apply_M(ev, G, p1, xi) - apply_M(ev, G, p2, xi), alpha, beta);
    best = std::max(best, img / (d * (1.0 + n1 * n1 + n2 * n2) * std::pow(T, alpha)));
  }
  return best;
}

std::string path_csv(const Path& y) {
  std::ostringstream os;
  os << "node,t";
  for (Eigen::Index j = 0; j < y.dim(); ++j) os << ",w_" << j + 1;
  os << "\n";
  char buf[32];
  for (std::size_t k = 0; k < y.nodes(); ++k) {
    os << k;
    std::snprintf(buf, sizeof buf, ",%.17g", y.grid().node(k));
    os << buf;
    for (Eigen::Index j = 0; j < y.dim(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", y[k](j));
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace rpde
