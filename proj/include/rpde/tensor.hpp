#pragma once

#include <Eigen/Dense>

#include <random>

namespace rpde {

/// Linear map E: W (x) V -> W stored as (j, i, n) -> data(j, i * m + n), so
/// E(w (x) v)_j = sum_{i,n} E(j, i, n) w_i v_n.
struct CoeffTensor {
  int M = 0;
  int m = 0;
  Eigen::MatrixXd data;

  CoeffTensor() = default;
  CoeffTensor(int M_, int m_) : M(M_), m(m_), data(Eigen::MatrixXd::Zero(M_, M_ * m_)) {}

  double& operator()(int j, int i, int n) { return data(j, i * m + n); }
  double operator()(int j, int i, int n) const { return data(j, i * m + n); }

  /// E x as a map V -> W, (Ex)(j, n) = sum_i E(j, i, n) x_i.
  Eigen::MatrixXd apply(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd k(M, m);
    for (int j = 0; j < M; ++j)
      for (int n = 0; n < m; ++n) {
        double s = 0.0;
        for (int i = 0; i < M; ++i) s += data(j, i * m + n) * x(i);
        k(j, n) = s;
      }
    return k;
  }

  double frobenius() const { return data.norm(); }

  CoeffTensor& operator+=(const CoeffTensor& o) { data += o.data; return *this; }
  CoeffTensor& operator-=(const CoeffTensor& o) { data -= o.data; return *this; }
  friend CoeffTensor operator*(double c, CoeffTensor e) { e.data *= c; return e; }
  friend CoeffTensor operator+(CoeffTensor a, const CoeffTensor& b) { return a += b; }
  friend CoeffTensor operator-(CoeffTensor a, const CoeffTensor& b) { return a -= b; }

  static CoeffTensor basis(int M, int m, int j, int i, int n) {
    CoeffTensor e(M, m);
    e(j, i, n) = 1.0;
    return e;
  }

  template <class Gen>
  static CoeffTensor random(int M, int m, Gen& gen) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CoeffTensor e(M, m);
    for (Eigen::Index c = 0; c < e.data.size(); ++c) e.data.data()[c] = nd(gen);
    return e;
  }
};

/// Kernel representation of an E-linear process p(E): p(E)_j = sum_{i,n} E(j,i,n) k(j,i,n).
/// Every supporting process is of this form because S(t) is diagonal.
using ProcessKernel = CoeffTensor;

inline Eigen::VectorXd contract(const ProcessKernel& k, const CoeffTensor& e) {
  return (k.data.array() * e.data.array()).rowwise().sum().matrix();
}

/// Operator norm of E -> contract(k, E) with Frobenius norm on E.
inline double kernel_opnorm(const ProcessKernel& k) { return k.data.rowwise().norm().maxCoeff(); }

}  // namespace rpde
