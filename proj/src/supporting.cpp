#include "rpde/supporting.hpp"

#include "rpde/expint.hpp"
#include "rpde/holder_algebra.hpp"
#include "rpde/noise.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rpde {

void BExponents::validate() const {
  if (!(alpha + 2.0 * beta > 1.0)) throw SupportingError("b needs alpha + 2 beta > 1");
  if (!(alpha > beta)) throw SupportingError("b needs alpha > beta");
  if (!(beta >= 0.0) || alpha > 1.0) throw SupportingError("b exponents out of range");
}

double dbeta_norm(const SpectralOperator& op, const Eigen::MatrixXd& K, double beta) {
  if (K.rows() != op.modes()) throw SupportingError("dbeta_norm: K rows differ from mode count");
  const Eigen::MatrixXd w = op.power_diag(beta).asDiagonal() * K;
  if (w.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
  return svd.singularValues()(0);
}

ProcessKernel scale_by_input(const ProcessKernel& k, const Eigen::VectorXd& x) {
  ProcessKernel out = k;
  for (int i = 0; i < k.M; ++i) out.data.middleCols(i * k.m, k.m) *= x(i);
  return out;
}

namespace {

// rows j of the kernel scaled by f_j
void scale_rows(ProcessKernel& k, const Eigen::Ref<const Eigen::VectorXd>& f) {
  k.data.array().colwise() *= f.array();
}

}  // namespace

SupportingEvaluator::SupportingEvaluator(RoughLift lift, const SpectralOperator& op)
    : lift_(std::move(lift)), sg_(op, lift_.grid()), M_(op.modes()), m_(static_cast<int>(lift_.modes())) {
  const TimeGrid& g = lift_.grid();
  const std::size_t N = g.steps();
  const double h = g.h();
  if (lift_.second.dim() != static_cast<Eigen::Index>(m_) * m_)
    throw SupportingError("lift second level has the wrong tensor size");

  delta_.resize(m_, static_cast<Eigen::Index>(N));
  for (std::size_t l = 0; l < N; ++l) delta_.col(static_cast<Eigen::Index>(l)) = lift_.first[l + 1] - lift_.first[l];

  const Eigen::VectorXd& mu = op.eigenvalues();
  psi_ij_.resize(M_, M_);
  chi_ij_.resize(M_, M_);
  phi1_j_.resize(M_);
  cw_j_.resize(M_);
  for (auto& v : moments_) v.resize(M_);
  for (int j = 0; j < M_; ++j) {
    const double z = mu(j) * h;
    phi1_j_(j) = expint::phi1(z);
    for (int q = 0; q < 3; ++q) moments_[q](j) = expint::moment(q, z);
    cw_j_(j) = moments_[0](j) - moments_[1](j);
    for (int i = 0; i < M_; ++i) {
      psi_ij_(i, j) = expint::psi(mu(i) * h, z);
      chi_ij_(i, j) = expint::chi(mu(i) * h, z);
    }
  }

  psi_.assign(N + 1, Eigen::MatrixXd::Zero(M_, m_));
  for (std::size_t l = 0; l < N; ++l) {
    const Eigen::VectorXd d = delta_.col(static_cast<Eigen::Index>(l));
    psi_[l + 1] = sg_.factors(1).asDiagonal() * psi_[l] + phi1_j_ * d.transpose();
  }

  step_alpha_.reserve(N);
  for (std::size_t l = 0; l < N; ++l) {
    ProcessKernel a(M_, m_);
    for (int j = 0; j < M_; ++j)
      for (int i = 0; i < M_; ++i)
        for (int n = 0; n < m_; ++n) a(j, i, n) = delta_(n, static_cast<Eigen::Index>(l)) * psi_ij_(i, j);
    step_alpha_.push_back(std::move(a));
  }
}

Eigen::MatrixXd SupportingEvaluator::phi(std::size_t k, std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  return psi_[k] - sg_.factors(k - j).asDiagonal() * psi_[j];
}

Eigen::MatrixXd SupportingEvaluator::area(std::size_t k, std::size_t j) const {
  const auto col = lift_.second.at(k, j);
  Eigen::MatrixXd a(m_, m_);
  for (int p = 0; p < m_; ++p)
    for (int q = 0; q < m_; ++q) a(p, q) = col(p * m_ + q);
  return a;
}

Eigen::VectorXd SupportingEvaluator::omega_S(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const {
  return (K.array() * phi(k, j).array()).rowwise().sum().matrix();
}

Eigen::VectorXd SupportingEvaluator::omega_S_ibp(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  const Eigen::VectorXd& mu = sg_.op().eigenvalues();
  const double h = grid().h();
  Eigen::VectorXd out = (sg_.factors(k - j).array() * (K * dw(k, j)).array()).matrix();
  for (std::size_t l = j; l < k; ++l) {
    const Eigen::VectorXd tail = K * dw(k, l + 1);
    const Eigen::VectorXd seg = K * delta_.col(static_cast<Eigen::Index>(l));
    out.array() += mu.array() * h * sg_.factors(k - l - 1).array() *
                   (tail.array() * moments_[0].array() + seg.array() * moments_[1].array());
  }
  return out;
}

std::vector<ProcessKernel> SupportingEvaluator::a_kernels_from(std::size_t j) const {
  std::vector<ProcessKernel> out;
  out.reserve(steps() - j + 1);
  out.emplace_back(M_, m_);
  for (std::size_t l = j; l < steps(); ++l) {
    ProcessKernel next = out.back();
    scale_rows(next, sg_.factors(1));
    next += scale_by_input(step_alpha_[l], sg_.factors(l - j));
    out.push_back(std::move(next));
  }
  return out;
}

ProcessKernel SupportingEvaluator::a_kernel(std::size_t k, std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  ProcessKernel acc(M_, m_);
  for (std::size_t l = j; l < k; ++l) {
    scale_rows(acc, sg_.factors(1));
    acc += scale_by_input(step_alpha_[l], sg_.factors(l - j));
  }
  return acc;
}

Eigen::VectorXd SupportingEvaluator::proc_a(const CoeffTensor& E, const Eigen::VectorXd& x, std::size_t k,
                                            std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  const Eigen::VectorXd& mu = sg_.op().eigenvalues();
  const double h = grid().h();
  // alpha_jin = Phi_jn(t,s) - sum_l int_seg mu_i e^{-mu_i (r - s)} Phi_jn(t, r) dr
  ProcessKernel al(M_, m_);
  const Eigen::MatrixXd ph = phi(k, j);
  for (int i = 0; i < M_; ++i) al.data.middleCols(i * m_, m_) = ph;
  for (std::size_t l = j; l < k; ++l) {
    const Eigen::MatrixXd tail = phi(k, l + 1);
    const auto fi = sg_.factors(l - j);
    const auto fj = sg_.factors(k - l - 1);
    for (int i = 0; i < M_; ++i) {
      const double wi = fi(i) * -std::expm1(-mu(i) * h);
      const double ci = mu(i) * h * fi(i);
      for (int jj = 0; jj < M_; ++jj)
        for (int n = 0; n < m_; ++n)
          al(jj, i, n) -= tail(jj, n) * wi + ci * fj(jj) * chi_ij_(i, jj) * delta_(n, static_cast<Eigen::Index>(l));
    }
  }
  return contract(scale_by_input(al, x), E);
}

Eigen::VectorXd SupportingEvaluator::proc_a_direct(const CoeffTensor& E, const Eigen::VectorXd& x, std::size_t k,
                                                   std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(M_);
  for (std::size_t l = j; l < k; ++l) {
    ProcessKernel seg = scale_by_input(step_alpha_[l], (sg_.factors(l - j).array() * x.array()).matrix());
    scale_rows(seg, sg_.factors(k - l - 1));
    out += contract(seg, E);
  }
  return out;
}

ProcessKernel SupportingEvaluator::step_c(const Eigen::MatrixXd& K, std::size_t l) const {
  const Eigen::VectorXd d = delta_.col(static_cast<Eigen::Index>(l));
  const Eigen::VectorXd kd = K * d;
  ProcessKernel c(M_, m_);
  for (int j = 0; j < M_; ++j)
    for (int i = 0; i < M_; ++i)
      for (int n = 0; n < m_; ++n) c(j, i, n) = kd(i) * d(n) * cw_j_(j);
  return c;
}

ProcessKernel SupportingEvaluator::step_b(const Eigen::MatrixXd& K, std::size_t l) const {
  const Eigen::VectorXd d = delta_.col(static_cast<Eigen::Index>(l));
  const Eigen::VectorXd kd = K * d;
  ProcessKernel b(M_, m_);
  for (int j = 0; j < M_; ++j)
    for (int i = 0; i < M_; ++i)
      for (int n = 0; n < m_; ++n) b(j, i, n) = kd(i) * d(n) * chi_ij_(i, j);
  return b;
}

std::vector<ProcessKernel> SupportingEvaluator::c_kernels_from(const Eigen::MatrixXd& K, std::size_t j) const {
  // c_{l+1,s} = c_{l+1,l} + S(h) c_{l,s} + omega^S_{l+1,l}(E K dw_{l,s})
  std::vector<ProcessKernel> out;
  out.reserve(steps() - j + 1);
  out.emplace_back(M_, m_);
  for (std::size_t l = j; l < steps(); ++l) {
    ProcessKernel next = out.back();
    scale_rows(next, sg_.factors(1));
    next += step_c(K, l);
    const Eigen::VectorXd kw = K * dw(l, j);
    const Eigen::VectorXd d = delta_.col(static_cast<Eigen::Index>(l));
    for (int i = 0; i < M_; ++i)
      next.data.middleCols(i * m_, m_).noalias() += kw(i) * phi1_j_ * d.transpose();
    out.push_back(std::move(next));
  }
  return out;
}

ProcessKernel SupportingEvaluator::c_kernel(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  ProcessKernel acc(M_, m_);
  for (std::size_t l = j; l < k; ++l) {
    scale_rows(acc, sg_.factors(1));
    acc += step_c(K, l);
    const Eigen::VectorXd kw = K * dw(l, j);
    const Eigen::VectorXd d = delta_.col(static_cast<Eigen::Index>(l));
    for (int i = 0; i < M_; ++i) acc.data.middleCols(i * m_, m_).noalias() += kw(i) * phi1_j_ * d.transpose();
  }
  return acc;
}

Eigen::VectorXd SupportingEvaluator::proc_c(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k,
                                            std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  if (k == j) return Eigen::VectorXd::Zero(M_);
  const Eigen::VectorXd& mu = sg_.op().eigenvalues();
  const double h = grid().h();
  const Eigen::VectorXd kdw = K * dw(k, j);
  const Eigen::MatrixXd ph = phi(k, j);
  // Z_ts = int (delta omega)_tr (x) d omega_r, the transpose of omega^(2)_ts for a geometric lift
  const Eigen::MatrixXd kw2 = K * area(k, j).transpose();
  const auto fts = sg_.factors(k - j);
  // per output mode: int_s^t mu_j e^{-mu_j (t - r)} K Z_tr dr, exact between nodes
  std::vector<Eigen::MatrixXd> R(static_cast<std::size_t>(M_), Eigen::MatrixXd::Zero(M_, m_));
  for (std::size_t l = j; l < k; ++l) {
    const Eigen::VectorXd d = delta_.col(static_cast<Eigen::Index>(l));
    const Eigen::VectorXd kd = K * d;
    const Eigen::MatrixXd t0 = K * area(k, l + 1).transpose();
    const Eigen::MatrixXd t1 = (K * dw(k, l + 1)) * d.transpose();
    const Eigen::MatrixXd t2 = 0.5 * kd * d.transpose();
    const auto f = sg_.factors(k - l - 1);
    for (int jj = 0; jj < M_; ++jj) {
      const double w = mu(jj) * h * f(jj);
      if (w == 0.0) continue;
      R[static_cast<std::size_t>(jj)] +=
          w * (moments_[0](jj) * t0 + moments_[1](jj) * t1 + moments_[2](jj) * t2);
    }
  }
  Eigen::VectorXd out(M_);
  for (int jj = 0; jj < M_; ++jj) {
    double s = 0.0;
    for (int i = 0; i < M_; ++i)
      for (int n = 0; n < m_; ++n) {
        const double g = kdw(i) * ph(jj, n) - fts(jj) * kw2(i, n) - R[static_cast<std::size_t>(jj)](i, n);
        s += E(jj, i, n) * g;
      }
    out(jj) = s;
  }
  return out;
}

Eigen::VectorXd SupportingEvaluator::proc_c_direct(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k,
                                                   std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  ProcessKernel acc(M_, m_);
  for (std::size_t l = j; l < k; ++l) {
    const Eigen::VectorXd d = delta_.col(static_cast<Eigen::Index>(l));
    const Eigen::VectorXd kw = K * dw(l, j);
    ProcessKernel seg = step_c(K, l);
    for (int i = 0; i < M_; ++i) seg.data.middleCols(i * m_, m_).noalias() += kw(i) * phi1_j_ * d.transpose();
    scale_rows(seg, sg_.factors(k - l - 1));
    acc += seg;
  }
  return contract(acc, E);
}

std::vector<ProcessKernel> SupportingEvaluator::b_kernels_from(const Eigen::MatrixXd& K, std::size_t j) const {
  // b_{l+1,s} = b_{l+1,l} + S(h) b_{l,s} + a_{l+1,l}(E, omega^S_{l,s}(K))
  std::vector<ProcessKernel> out;
  out.reserve(steps() - j + 1);
  out.emplace_back(M_, m_);
  for (std::size_t l = j; l < steps(); ++l) {
    ProcessKernel next = out.back();
    scale_rows(next, sg_.factors(1));
    next += step_b(K, l);
    next += scale_by_input(step_alpha_[l], omega_S(K, l, j));
    out.push_back(std::move(next));
  }
  return out;
}

ProcessKernel SupportingEvaluator::b_kernel(const Eigen::MatrixXd& K, std::size_t k, std::size_t j) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  ProcessKernel acc(M_, m_);
  for (std::size_t l = j; l < k; ++l) {
    scale_rows(acc, sg_.factors(1));
    acc += step_b(K, l);
    acc += scale_by_input(step_alpha_[l], omega_S(K, l, j));
  }
  return acc;
}

Eigen::VectorXd SupportingEvaluator::b_germ(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t j0,
                                            std::size_t v, std::size_t u) const {
  if (!(j0 <= u && u <= v && v <= steps())) throw SupportingError("b germ needs s <= u <= v on the grid");
  if (u == v) return Eigen::VectorXd::Zero(M_);
  const Eigen::MatrixXd ew = E.apply(omega_S(K, u, j0));
  return omega_S(ew, v, u) + contract(c_kernel(K, v, u), E);
}

SewingProblem SupportingEvaluator::b_problem(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t j0,
                                             std::size_t last, const BExponents& ex) const {
  ex.validate();
  if (!(j0 < last && last <= steps())) throw SupportingError("b problem needs j0 < last on the grid");
  if (E.M != M_ || E.m != m_ || K.rows() != M_ || K.cols() != m_)
    throw SupportingError("b problem: tensor shapes differ from the evaluator");
  if (!std::isfinite(dbeta_norm(sg_.op(), K, ex.beta))) throw SupportingError("b needs K with finite D_beta norm");
  const TimeGrid sub = TimeGrid::with_steps(grid().node(last) - grid().node(j0), last - j0);
  SewingProblem p;
  p.dim = M_;
  p.exponents = SewingExponents{ex.alpha, ex.beta, ex.alpha + 2.0 * ex.beta};
  p.sg = SemigroupHandle(sg_.op(), sub);
  p.germ = [this, E, K, j0](std::size_t v, std::size_t u) { return b_germ(E, K, j0, v + j0, u + j0); };
  p.closure = [this, E, K, j0](std::size_t v, std::size_t u) {
    const std::size_t l = u + j0;
    if (v != u + 1) throw SupportingError("closure is defined on single steps only");
    return Eigen::VectorXd(contract(step_b(K, l), E) + contract(scale_by_input(step_alpha_[l], omega_S(K, l, j0)), E));
  };
  return p;
}

Eigen::VectorXd SupportingEvaluator::proc_b(const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k,
                                            std::size_t j, const BExponents& ex, SewingResult* diag) const {
  if (j > k || k > steps()) throw SupportingError("pair index out of range");
  if (k == j) return Eigen::VectorXd::Zero(M_);
  const SewingProblem p = b_problem(E, K, j, k, ex);
  SewingResult r = sew(p);
  Eigen::VectorXd out = r.integral[k - j];
  if (diag) *diag = std::move(r);
  return out;
}

double AlgebraicDefects::max() const { return std::max({omega_S, a, c, b}); }

AlgebraicDefects algebraic_defects(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::MatrixXd& K,
                                   const Eigen::VectorXd& x, std::size_t k, std::size_t mid, std::size_t j,
                                   const BExponents& ex) {
  if (!(j <= mid && mid <= k)) throw SupportingError("algebraic_defects needs s <= tau <= t");
  const SemigroupHandle& sg = ev.sg();
  auto S = [&](std::size_t steps, const Eigen::VectorXd& v) { return sg.apply_steps(steps, v); };
  AlgebraicDefects d;

  d.omega_S = (ev.omega_S_ibp(K, k, j) - ev.omega_S_ibp(K, k, mid) - S(k - mid, ev.omega_S_ibp(K, mid, j))).norm();

  const Eigen::VectorXd sx = S(mid - j, x) - x;
  d.a = (ev.proc_a(E, x, k, j) - ev.proc_a(E, x, k, mid) - S(k - mid, ev.proc_a(E, x, mid, j)) -
         ev.proc_a(E, sx, k, mid))
            .norm();

  const Eigen::MatrixXd ew = E.apply(K * ev.dw(mid, j));
  d.c = (ev.proc_c(E, K, k, j) - ev.proc_c(E, K, k, mid) - S(k - mid, ev.proc_c(E, K, mid, j)) -
         ev.omega_S_ibp(ew, k, mid))
            .norm();

  d.b = (ev.proc_b(E, K, k, j, ex) - ev.proc_b(E, K, k, mid, ex) - S(k - mid, ev.proc_b(E, K, mid, j, ex)) -
         ev.proc_a(E, ev.omega_S(K, mid, j), k, mid))
            .norm();
  return d;
}

double partition_identity_a(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::VectorXd& x,
                            const std::vector<std::size_t>& nodes) {
  if (nodes.size() < 2) throw SupportingError("partition needs at least two nodes");
  const std::size_t s = nodes.front(), t = nodes.back();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(ev.M());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const std::size_t u = nodes[i], v = nodes[i + 1];
    if (v <= u) throw SupportingError("partition nodes must increase");
    acc += ev.sg().apply_steps(t - v, ev.proc_a(E, ev.sg().apply_steps(u - s, x), v, u));
  }
  return (ev.proc_a(E, x, t, s) - acc).norm();
}

std::vector<ContinuityRow> noise_continuity(const Path& omega, const SpectralOperator& op,
                                            const std::vector<int>& levels, const CoeffTensor& E,
                                            const Eigen::MatrixXd& K, const Eigen::VectorXd& x, double alpha) {
  const TimeGrid& g = omega.grid();
  const int lmax = g.level();
  if (lmax < 0) throw SupportingError("noise_continuity needs a dyadic grid");
  const RoughLift fine_lift = lift_on_grid(omega, alpha);
  const SupportingEvaluator fine(fine_lift, op);
  std::vector<ContinuityRow> rows;
  for (int L : levels) {
    if (L < 0 || L > lmax) throw SupportingError("continuity level out of range");
    const std::size_t f = std::size_t{1} << (lmax - L);
    const Path coarse = coarsen(omega, f);
    const SupportingEvaluator ev(lift_on_grid(coarse, alpha), op);
    ContinuityRow row;
    row.level = L;
    for (std::size_t j = 0; j < coarse.nodes(); ++j) {
      const auto ac = ev.a_kernels_from(j), af = fine.a_kernels_from(j * f);
      const auto cc = ev.c_kernels_from(K, j), cf = fine.c_kernels_from(K, j * f);
      const auto bc = ev.b_kernels_from(K, j), bf = fine.b_kernels_from(K, j * f);
      for (std::size_t k = j + 1; k < coarse.nodes(); ++k) {
        const double len = coarse.grid().node(k) - coarse.grid().node(j);
        const double sa = std::pow(len, alpha), s2 = sa * sa;
        const std::size_t kc = k - j, kf = (k - j) * f;
        row.omega_S = std::max(row.omega_S, (ev.omega_S(K, k, j) - fine.omega_S(K, k * f, j * f)).norm() / sa);
        row.a = std::max(row.a, (contract(scale_by_input(ac[kc], x), E) - contract(scale_by_input(af[kf], x), E)).norm() / sa);
        row.c = std::max(row.c, (contract(cc[kc], E) - contract(cf[kf], E)).norm() / s2);
        row.b = std::max(row.b, (contract(bc[kc], E) - contract(bf[kf], E)).norm() / s2);
      }
    }
    row.lift_distance = rough_distance(lift_on_grid(refine_linear(coarse, g), alpha), fine_lift, alpha);
    rows.push_back(row);
  }
  return rows;
}

namespace oracle {

namespace {

// two-point Gauss-Legendre on each of `sub` pieces of every grid step
struct Quad {
  std::vector<double> r, w;  // nodes and weights
  std::vector<std::size_t> seg;
};

Quad build(const SupportingEvaluator& ev, std::size_t k, std::size_t j, int sub) {
  if (sub < 1) throw SupportingError("oracle needs at least one sub-step");
  Quad q;
  const double h = ev.grid().h();
  const double g = 0.5 / std::sqrt(3.0);
  for (std::size_t l = j; l < k; ++l) {
    const double t0 = ev.grid().node(l);
    for (int p = 0; p < sub; ++p) {
      const double a = t0 + h * p / sub, d = h / sub;
      for (double off : {0.5 - g, 0.5 + g}) {
        q.r.push_back(a + off * d);
        q.w.push_back(0.5 * d);
        q.seg.push_back(l);
      }
    }
  }
  return q;
}

Eigen::VectorXd omega_at(const SupportingEvaluator& ev, std::size_t l, double r) {
  const double t0 = ev.grid().node(l), h = ev.grid().h();
  return ev.lift().first[l] + (r - t0) / h * (ev.lift().first[l + 1] - ev.lift().first[l]);
}

Eigen::VectorXd slope(const SupportingEvaluator& ev, std::size_t l) {
  return (ev.lift().first[l + 1] - ev.lift().first[l]) / ev.grid().h();
}

}  // namespace

Eigen::VectorXd omega_S(const SupportingEvaluator& ev, const Eigen::MatrixXd& K, std::size_t k, std::size_t j,
                        int sub) {
  const Eigen::VectorXd& mu = ev.sg().op().eigenvalues();
  const double t = ev.grid().node(k);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ev.M());
  const Quad q = build(ev, k, j, sub);
  for (std::size_t p = 0; p < q.r.size(); ++p) {
    const Eigen::VectorXd kv = K * slope(ev, q.seg[p]);
    out.array() += q.w[p] * (-mu.array() * (t - q.r[p])).exp() * kv.array();
  }
  return out;
}

Eigen::VectorXd proc_a(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::VectorXd& x, std::size_t k,
                       std::size_t j, int sub) {
  const Eigen::VectorXd& mu = ev.sg().op().eigenvalues();
  const double t = ev.grid().node(k), s = ev.grid().node(j);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ev.M());
  const Quad q = build(ev, k, j, sub);
  for (std::size_t p = 0; p < q.r.size(); ++p) {
    const Eigen::VectorXd sx = ((-mu.array() * (q.r[p] - s)).exp() * x.array()).matrix();
    const Eigen::VectorXd v = E.apply(sx) * slope(ev, q.seg[p]);
    out.array() += q.w[p] * (-mu.array() * (t - q.r[p])).exp() * v.array();
  }
  return out;
}

Eigen::VectorXd proc_c(const SupportingEvaluator& ev, const CoeffTensor& E, const Eigen::MatrixXd& K, std::size_t k,
                       std::size_t j, int sub) {
  const Eigen::VectorXd& mu = ev.sg().op().eigenvalues();
  const double t = ev.grid().node(k);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ev.M());
  const Quad q = build(ev, k, j, sub);
  for (std::size_t p = 0; p < q.r.size(); ++p) {
    const std::size_t l = q.seg[p];
    const Eigen::VectorXd w = K * (omega_at(ev, l, q.r[p]) - ev.lift().first[j]);
    const Eigen::VectorXd v = E.apply(w) * slope(ev, l);
    out.array() += q.w[p] * (-mu.array() * (t - q.r[p])).exp() * v.array();
  }
  return out;
}

std::vector<Eigen::VectorXd> proc_b_from(const SupportingEvaluator& ev, const CoeffTensor& E,
                                         const Eigen::MatrixXd& K, std::size_t j, int sub) {
  if (sub < 1) throw SupportingError("oracle needs at least one sub-step");
  const Eigen::VectorXd& mu = ev.sg().op().eigenvalues();
  const double h = ev.grid().h(), d = h / sub;
  const double g = 0.5 / std::sqrt(3.0);
  const std::size_t N = ev.steps();
  // inner W(r) = int_s^r e^{-mu (r - q)} K d omega_q, outer B(t) = int_s^t e^{-mu (t - r)} E W(r) d omega_r
  Eigen::VectorXd W = Eigen::VectorXd::Zero(ev.M()), B = Eigen::VectorXd::Zero(ev.M());
  std::vector<Eigen::VectorXd> out{B};
  auto inner = [&](const Eigen::VectorXd& w0, double len, const Eigen::VectorXd& ks) {
    // advance W by len with constant slope, two Gauss points
    Eigen::VectorXd acc = ((-mu.array() * len).exp() * w0.array()).matrix();
    for (double off : {0.5 - g, 0.5 + g})
      acc.array() += 0.5 * len * (-mu.array() * (len - off * len)).exp() * ks.array();
    return acc;
  };
  for (std::size_t l = j; l < N; ++l) {
    const Eigen::VectorXd sl = slope(ev, l);
    const Eigen::VectorXd ks = K * sl;
    for (int p = 0; p < sub; ++p) {
      Eigen::VectorXd nb = ((-mu.array() * d).exp() * B.array()).matrix();
      for (double off : {0.5 - g, 0.5 + g}) {
        const Eigen::VectorXd wg = inner(W, off * d, ks);
        const Eigen::VectorXd v = E.apply(wg) * sl;
        nb.array() += 0.5 * d * (-mu.array() * (d - off * d)).exp() * v.array();
      }
      B = nb;
      W = inner(W, d, ks);
    }
    out.push_back(B);
  }
  return out;
}

}  // namespace oracle

std::string process_csv(const SupportingEvaluator& ev, ProcessKind kind, const CoeffTensor& E,
                        const Eigen::MatrixXd& K, const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "t_index,s_index";
  for (int j = 1; j <= ev.M(); ++j) os << ",w_" << j;
  os << '\n';
  char buf[40];
  for (std::size_t j = 0; j <= ev.steps(); ++j) {
    std::vector<ProcessKernel> ks;
    if (kind == ProcessKind::A) ks = ev.a_kernels_from(j);
    if (kind == ProcessKind::B) ks = ev.b_kernels_from(K, j);
    if (kind == ProcessKind::C) ks = ev.c_kernels_from(K, j);
    for (std::size_t k = j + 1; k <= ev.steps(); ++k) {
      Eigen::VectorXd v;
      switch (kind) {
        case ProcessKind::OmegaS: v = ev.omega_S(K, k, j); break;
        case ProcessKind::A: v = contract(scale_by_input(ks[k - j], x), E); break;
        default: v = contract(ks[k - j], E); break;
      }
      os << k << ',' << j;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v(i));
        os << ',' << buf;
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace rpde
