#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace rpde {

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform grid t_k = k h on [0, T].
///
/// Grids built from a level have 2^L steps.  Shifted or restricted grids keep
/// the spacing and may have any number of steps; level() is then -1.
class TimeGrid {
 public:
  TimeGrid() = default;

  TimeGrid(double horizon, int level) : horizon_(horizon) {
    if (!(horizon > 0.0)) throw GridError("grid horizon must be positive");
    if (level < 0 || level > 24) throw GridError("grid level out of range");
    steps_ = std::size_t{1} << level;
  }

  static TimeGrid with_steps(double horizon, std::size_t steps) {
    if (steps == 0) throw GridError("grid needs at least one step");
    TimeGrid g;
    if (!(horizon > 0.0)) throw GridError("grid horizon must be positive");
    g.horizon_ = horizon;
    g.steps_ = steps;
    return g;
  }

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::size_t nodes() const { return steps_ + 1; }
  double h() const { return horizon_ / static_cast<double>(steps_); }
  double node(std::size_t k) const {
    return k == steps_ ? horizon_ : static_cast<double>(k) * h();
  }

  int level() const {
    if (steps_ == 0 || (steps_ & (steps_ - 1)) != 0) return -1;
    int l = 0;
    while ((std::size_t{1} << l) < steps_) ++l;
    return l;
  }

  /// First `steps` steps of this grid, same spacing.
  TimeGrid head(std::size_t steps) const {
    if (steps == 0 || steps > steps_) throw GridError("head: step count out of range");
    return with_steps(node(steps), steps);
  }

  /// Every `factor`-th node.
  TimeGrid coarsen(std::size_t factor) const {
    if (factor == 0 || steps_ % factor != 0) throw GridError("coarsen: factor must divide steps");
    return with_steps(horizon_, steps_ / factor);
  }

  bool same_as(const TimeGrid& o) const {
    return steps_ == o.steps_ && std::abs(horizon_ - o.horizon_) <= 1e-14 * horizon_;
  }

 private:
  double horizon_ = 1.0;
  std::size_t steps_ = 1;
};

/// Values in R^dim at every grid node, stored column-wise.
template <class Scalar>
class PathT {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  PathT() = default;
  PathT(const TimeGrid& g, Eigen::Index dim) : grid_(g), values_(Matrix::Zero(dim, g.nodes())) {}
  PathT(const TimeGrid& g, Matrix values) : grid_(g), values_(std::move(values)) {
    if (values_.cols() != static_cast<Eigen::Index>(g.nodes()))
      throw GridError("path needs one value per grid node");
  }

  const TimeGrid& grid() const { return grid_; }
  Eigen::Index dim() const { return values_.rows(); }
  std::size_t nodes() const { return grid_.nodes(); }

  auto operator[](std::size_t k) { return values_.col(static_cast<Eigen::Index>(k)); }
  auto operator[](std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }

  Matrix& values() { return values_; }
  const Matrix& values() const { return values_; }

  PathT& operator+=(const PathT& o) { values_ += o.values_; return *this; }
  PathT& operator-=(const PathT& o) { values_ -= o.values_; return *this; }
  friend PathT operator+(PathT a, const PathT& b) { return a += b; }
  friend PathT operator-(PathT a, const PathT& b) { return a -= b; }
  friend PathT operator*(Scalar c, PathT a) { a.values_ *= c; return a; }

 private:
  TimeGrid grid_;
  Matrix values_;
};

/// Values on ordered node pairs (k, j), k >= j, zero on the diagonal.
template <class Scalar>
class TwoParamFieldT {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  TwoParamFieldT() = default;
  TwoParamFieldT(const TimeGrid& g, Eigen::Index dim)
      : grid_(g), values_(Matrix::Zero(dim, static_cast<Eigen::Index>(pair_count(g.nodes())))) {}

  static std::size_t pair_count(std::size_t nodes) { return nodes * (nodes + 1) / 2; }
  static std::size_t index(std::size_t k, std::size_t j) { return k * (k + 1) / 2 + j; }

  const TimeGrid& grid() const { return grid_; }
  Eigen::Index dim() const { return values_.rows(); }

  auto at(std::size_t k, std::size_t j) const {
    check(k, j);
    return values_.col(static_cast<Eigen::Index>(index(k, j)));
  }

  template <class Derived>
  void set(std::size_t k, std::size_t j, const Eigen::MatrixBase<Derived>& v) {
    check(k, j);
    if (k == j) return;  // diagonal stays zero
    values_.col(static_cast<Eigen::Index>(index(k, j))) = v;
  }

  Matrix& raw() { return values_; }
  const Matrix& raw() const { return values_; }

 private:
  void check(std::size_t k, std::size_t j) const {
    if (j > k || k >= grid_.nodes()) throw GridError("pair index out of range");
  }

  TimeGrid grid_;
  Matrix values_;
};

using Path = PathT<double>;
using TwoParamField = TwoParamFieldT<double>;

/// Piecewise-linear rough path: first level in R^m, second level as m x m
/// row-major blocks, entry (p, q) = int (w^p_r - w^p_s) dw^q_r.
struct RoughLift {
  Path first;
  TwoParamField second;
  double alpha = 0.45;

  const TimeGrid& grid() const { return first.grid(); }
  Eigen::Index modes() const { return first.dim(); }

  Eigen::MatrixXd area(std::size_t k, std::size_t j) const {
    const Eigen::Index m = modes();
    Eigen::MatrixXd a(m, m);
    auto col = second.at(k, j);
    for (Eigen::Index p = 0; p < m; ++p)
      for (Eigen::Index q = 0; q < m; ++q) a(p, q) = col(p * m + q);
    return a;
  }
};

}  // namespace rpde
