#pragma once

#include "rpde/grid.hpp"
#include "rpde/semigroup.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <algorithm>
#include <random>

namespace rpde::test {

inline Path random_path(const TimeGrid& g, Eigen::Index dim, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Path y(g, dim);
  for (Eigen::Index c = 0; c < y.values().size(); ++c) y.values().data()[c] = nd(gen);
  return y;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(gen);
  return v;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd a(r, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(gen);
  return a;
}

/// Random nondecreasing eigenvalues in [0, top].
inline SpectralOperator random_operator(int M, std::mt19937_64& gen, double top = 50.0) {
  std::uniform_real_distribution<double> u(0.0, top);
  Eigen::VectorXd mu(M);
  for (int j = 0; j < M; ++j) mu(j) = u(gen);
  std::sort(mu.data(), mu.data() + M);
  return SpectralOperator(mu);
}

/// Scalar path w_t = f(t) on a grid.
template <class F>
Path scalar_path(const TimeGrid& g, F f) {
  Path w(g, 1);
  for (std::size_t k = 0; k < g.nodes(); ++k) w[k](0) = f(g.node(k));
  return w;
}

}  // namespace rpde::test
