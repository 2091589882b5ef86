#pragma once

#include "rpde/grid.hpp"
#include "rpde/semigroup.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace rpde {

/// Values on ordered node triples (k, m, j), k >= m >= j.
template <class Scalar>
class TripleFieldT {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  static constexpr std::size_t kMaxEntries = std::size_t{1} << 26;

  TripleFieldT(const TimeGrid& g, Eigen::Index dim) : grid_(g) {
    const std::size_t n = g.nodes();
    const std::size_t count = n * (n + 1) * (n + 2) / 6;
    if (count * static_cast<std::size_t>(dim) > kMaxEntries)
      throw GridError("triple field too large to materialize; evaluate per triple instead");
    values_ = Matrix::Zero(dim, static_cast<Eigen::Index>(count));
  }

  static std::size_t index(std::size_t k, std::size_t m, std::size_t j) {
    return k * (k + 1) * (k + 2) / 6 + m * (m + 1) / 2 + j;
  }
  const TimeGrid& grid() const { return grid_; }
  auto at(std::size_t k, std::size_t m, std::size_t j) const {
    return values_.col(static_cast<Eigen::Index>(index(k, m, j)));
  }
  auto at(std::size_t k, std::size_t m, std::size_t j) {
    return values_.col(static_cast<Eigen::Index>(index(k, m, j)));
  }
  Scalar max_norm() const {
    Scalar best = 0;
    for (Eigen::Index c = 0; c < values_.cols(); ++c) best = std::max<Scalar>(best, values_.col(c).norm());
    return best;
  }

 private:
  TimeGrid grid_;
  Matrix values_;
};

using TripleField = TripleFieldT<double>;

// ---------------------------------------------------------------- increments

/// (delta y)_{ts} = y_t - y_s.
template <class Scalar>
TwoParamFieldT<Scalar> delta(const PathT<Scalar>& y) {
  TwoParamFieldT<Scalar> z(y.grid(), y.dim());
  for (std::size_t k = 0; k < y.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j) z.set(k, j, y[k] - y[j]);
  return z;
}

/// (delta^ y)_{ts} = y_t - S(t - s) y_s.
template <class Scalar>
TwoParamFieldT<Scalar> delta_hat(const PathT<Scalar>& y, const SemigroupHandle& sg) {
  if (y.dim() != sg.modes()) throw SemigroupError("delta_hat: dimension mismatch");
  if (!y.grid().same_as(sg.grid()) && y.grid().steps() > sg.grid().steps())
    throw GridError("delta_hat: semigroup cache shorter than path grid");
  TwoParamFieldT<Scalar> z(y.grid(), y.dim());
  for (std::size_t k = 0; k < y.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j)
      z.set(k, j, y[k] - (sg.factors(k - j).template cast<Scalar>().array() * y[j].array()).matrix());
  return z;
}

/// (delta_2 z)_{t tau s} for one triple k >= m >= j.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> delta2_at(const TwoParamFieldT<Scalar>& z, std::size_t k, std::size_t m,
                                                    std::size_t j) {
  return z.at(k, j) - z.at(k, m) - z.at(m, j);
}

/// (delta^_2 z)_{t tau s} for one triple; z is W-valued.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> delta2_hat_at(const TwoParamFieldT<Scalar>& z, const SemigroupHandle& sg,
                                                        std::size_t k, std::size_t m, std::size_t j) {
  if (z.dim() != sg.modes()) throw SemigroupError("delta2_hat: dimension mismatch");
  return z.at(k, j) - z.at(k, m) - (sg.factors(k - m).template cast<Scalar>().array() * z.at(m, j).array()).matrix();
}

template <class Scalar>
TripleFieldT<Scalar> delta2(const TwoParamFieldT<Scalar>& z) {
  TripleFieldT<Scalar> out(z.grid(), z.dim());
  const std::size_t n = z.grid().nodes();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m <= k; ++m)
      for (std::size_t j = 0; j <= m; ++j) out.at(k, m, j) = delta2_at(z, k, m, j);
  return out;
}

template <class Scalar>
TripleFieldT<Scalar> delta2_hat(const TwoParamFieldT<Scalar>& z, const SemigroupHandle& sg) {
  TripleFieldT<Scalar> out(z.grid(), z.dim());
  const std::size_t n = z.grid().nodes();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t m = 0; m <= k; ++m)
      for (std::size_t j = 0; j <= m; ++j) out.at(k, m, j) = delta2_hat_at(z, sg, k, m, j);
  return out;
}

// --------------------------------------------------------------------- norms

enum class NormKind { Holder, BetaBeta, AlphaBetaBeta, Sup };

std::string to_string(NormKind k);

struct NormExponents {
  double alpha = 0.45;
  double beta = 0.34;
};

/// Value of a norm plus the pair attaining its supremum term.  For the
/// weighted kinds the pair is the argmax of the weighted quotient.
struct NormReport {
  NormKind kind = NormKind::Sup;
  double value = 0.0;
  std::size_t t_index = 0;
  std::size_t s_index = 0;
};

namespace detail {

struct Argmax {
  double value = 0.0;
  std::size_t k = 0, j = 0;
  void offer(double v, std::size_t kk, std::size_t jj) {
    // strict comparison keeps the lexicographically smallest tie
    if (v > value) { value = v; k = kk; j = jj; }
  }
};

inline void check_exponent(double e) {
  if (!(e > 0.0) || e > 1.0) throw GridError("norm exponents must lie in (0, 1]");
}

}  // namespace detail

/// sup_{s<t} |y_t - y_s| / (t - s)^alpha.
template <class Scalar>
detail::Argmax holder_seminorm(const PathT<Scalar>& y, double alpha) {
  detail::Argmax best;
  const TimeGrid& g = y.grid();
  for (std::size_t k = 1; k < y.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j)
      best.offer(static_cast<double>((y[k] - y[j]).norm()) / std::pow(g.node(k) - g.node(j), alpha), k, j);
  return best;
}

/// sup_{0<s<t} s^beta |y_t - y_s| / (t - s)^beta.
template <class Scalar>
detail::Argmax weighted_seminorm(const PathT<Scalar>& y, double beta) {
  detail::Argmax best;
  const TimeGrid& g = y.grid();
  for (std::size_t k = 2; k < y.nodes(); ++k)
    for (std::size_t j = 1; j < k; ++j) {
      const double s = g.node(j), t = g.node(k);
      best.offer(std::pow(s, beta) * static_cast<double>((y[k] - y[j]).norm()) / std::pow(t - s, beta), k, j);
    }
  return best;
}

template <class Scalar>
double sup_norm(const PathT<Scalar>& y) {
  double best = 0.0;
  for (std::size_t k = 0; k < y.nodes(); ++k) best = std::max(best, static_cast<double>(y[k].norm()));
  return best;
}

/// sup_{s<t} |z_ts| / (t - s)^alpha.
template <class Scalar>
detail::Argmax holder_seminorm(const TwoParamFieldT<Scalar>& z, double alpha) {
  detail::Argmax best;
  const TimeGrid& g = z.grid();
  for (std::size_t k = 1; k < g.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j)
      best.offer(static_cast<double>(z.at(k, j).norm()) / std::pow(g.node(k) - g.node(j), alpha), k, j);
  return best;
}

/// sup_{0<s<t} s^beta |z_ts| / (t - s)^{alpha + beta}.
template <class Scalar>
detail::Argmax weighted_seminorm(const TwoParamFieldT<Scalar>& z, double alpha, double beta) {
  detail::Argmax best;
  const TimeGrid& g = z.grid();
  for (std::size_t k = 2; k < g.nodes(); ++k)
    for (std::size_t j = 1; j < k; ++j) {
      const double s = g.node(j), t = g.node(k);
      best.offer(std::pow(s, beta) * static_cast<double>(z.at(k, j).norm()) / std::pow(t - s, alpha + beta), k, j);
    }
  return best;
}

template <class Scalar>
double sup_norm(const TwoParamFieldT<Scalar>& z) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < z.raw().cols(); ++c) best = std::max(best, static_cast<double>(z.raw().col(c).norm()));
  return best;
}

/// Path norms: Holder |y_0| + [y]_alpha; BetaBeta sup|y| + weighted seminorm; Sup.
template <class Scalar>
NormReport norm(const PathT<Scalar>& y, NormKind kind, const NormExponents& ex = {}) {
  if (y.nodes() == 0) throw GridError("norm of an empty path");
  NormReport r{kind, 0.0, 0, 0};
  switch (kind) {
    case NormKind::Holder: {
      detail::check_exponent(ex.alpha);
      auto a = holder_seminorm(y, ex.alpha);
      r.value = static_cast<double>(y[0].norm()) + a.value;
      r.t_index = a.k; r.s_index = a.j;
      break;
    }
    case NormKind::BetaBeta:
    case NormKind::AlphaBetaBeta: {
      detail::check_exponent(ex.beta);
      auto a = weighted_seminorm(y, ex.beta);
      r.value = sup_norm(y) + a.value;
      r.t_index = a.k; r.s_index = a.j;
      break;
    }
    case NormKind::Sup: {
      detail::Argmax best;
      for (std::size_t k = 0; k < y.nodes(); ++k) best.offer(static_cast<double>(y[k].norm()), k, k);
      r.value = best.value;
      r.t_index = best.k; r.s_index = best.j;
      break;
    }
  }
  return r;
}

/// Field norms: Holder sup|z_t0| + [z]_alpha; AlphaBetaBeta sup|z_t0| +
/// weighted seminorm; Sup over all pairs.
template <class Scalar>
NormReport norm(const TwoParamFieldT<Scalar>& z, NormKind kind, const NormExponents& ex = {}) {
  const TimeGrid& g = z.grid();
  NormReport r{kind, 0.0, 0, 0};
  double sup0 = 0.0;
  for (std::size_t k = 0; k < g.nodes(); ++k) sup0 = std::max(sup0, static_cast<double>(z.at(k, 0).norm()));
  switch (kind) {
    case NormKind::Holder: {
      detail::check_exponent(ex.alpha);
      auto a = holder_seminorm(z, ex.alpha);
      r.value = sup0 + a.value;
      r.t_index = a.k; r.s_index = a.j;
      break;
    }
    case NormKind::AlphaBetaBeta:
    case NormKind::BetaBeta: {
      detail::check_exponent(ex.alpha);
      detail::check_exponent(ex.beta);
      auto a = weighted_seminorm(z, ex.alpha, ex.beta);
      r.value = sup0 + a.value;
      r.t_index = a.k; r.s_index = a.j;
      break;
    }
    case NormKind::Sup: {
      detail::Argmax best;
      for (std::size_t k = 0; k < g.nodes(); ++k)
        for (std::size_t j = 0; j <= k; ++j) best.offer(static_cast<double>(z.at(k, j).norm()), k, j);
      r.value = best.value;
      r.t_index = best.k; r.s_index = best.j;
      break;
    }
  }
  return r;
}

/// Restriction to every `factor`-th node.
template <class Scalar>
PathT<Scalar> coarsen(const PathT<Scalar>& y, std::size_t factor) {
  TimeGrid g = y.grid().coarsen(factor);
  PathT<Scalar> out(g, y.dim());
  for (std::size_t k = 0; k < g.nodes(); ++k) out[k] = y[k * factor];
  return out;
}

template <class Scalar>
TwoParamFieldT<Scalar> coarsen(const TwoParamFieldT<Scalar>& z, std::size_t factor) {
  TimeGrid g = z.grid().coarsen(factor);
  TwoParamFieldT<Scalar> out(g, z.dim());
  for (std::size_t k = 0; k < g.nodes(); ++k)
    for (std::size_t j = 0; j < k; ++j) out.set(k, j, z.at(k * factor, j * factor));
  return out;
}

/// Inhomogeneous alpha-Holder rough path distance on a common grid.
double rough_distance(const RoughLift& a, const RoughLift& b, double alpha);

}  // namespace rpde
