#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bellchain/tensor.hpp"

namespace bellchain {

template <typename Scalar>
struct LanczosResult {
  double value = 0;
  std::vector<Scalar> vector;
  std::size_t iterations = 0;
  double residual = 0;       // beta * |last Ritz component|
  bool breakdown = false;    // exact invariant subspace reached
  bool converged = false;
};

namespace detail {

template <typename Scalar>
double vec_norm(const std::vector<Scalar>& v) {
  double s = 0;
  for (const auto& z : v) s += abs2(z);
  return std::sqrt(s);
}

template <typename Scalar>
Scalar vec_dot(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  Scalar s(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (is_complex<Scalar>::value)
      s += std::conj(a[i]) * b[i];
    else
      s += a[i] * b[i];
  }
  return s;
}

}  // namespace detail

/// Ground-state Lanczos with full reorthogonalization against the stored
/// Krylov basis. apply_h must act as a Hermitian map; convergence is declared
/// when the residual estimate drops below tol * |largest Ritz value|.
/// A vanishing beta means the Krylov space closed on an exact invariant
/// subspace; the current Ritz pair is returned with the breakdown flag set.
template <typename Scalar, typename ApplyH>
LanczosResult<Scalar> lanczos_ground(const ApplyH& apply_h, std::vector<Scalar> start,
                                     double tol = 1e-10, std::size_t max_iter = 200) {
  const std::size_t n = start.size();
  double n0 = detail::vec_norm(start);
  if (n0 == 0) throw std::invalid_argument("lanczos_ground: zero start vector");
  for (auto& z : start) z /= Scalar(n0);

  std::vector<std::vector<Scalar>> basis{start};
  std::vector<double> alpha, beta;
  std::vector<Scalar> w(n);
  Eigen::VectorXd ritz;
  LanczosResult<Scalar> out;

  max_iter = std::min(max_iter, n);
  for (std::size_t k = 0; k < max_iter; ++k) {
    apply_h(basis[k], w);
    double a = std::real(cplx(detail::vec_dot(basis[k], w)));
    alpha.push_back(a);

    // two-pass full reorthogonalization
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) {
        Scalar c = detail::vec_dot(v, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * v[i];
      }
    double b = detail::vec_norm(w);

    // Ritz data of the current tridiagonal block
    const Eigen::Index m = Eigen::Index(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[std::size_t(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[std::size_t(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    ritz = es.eigenvectors().col(0);
    out.value = es.eigenvalues()(0);
    out.iterations = std::size_t(m);
    double h_scale = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(m - 1)));
    out.residual = b * std::abs(ritz(m - 1));

    if (b <= 1e-14 * std::max(1.0, h_scale)) {
      out.breakdown = true;
      out.converged = true;
      break;
    }
    if (out.residual <= tol * std::max(1.0, h_scale)) {
      out.converged = true;
      break;
    }
    if (std::size_t(m) == max_iter) break;
    beta.push_back(b);
    auto& next = basis.emplace_back(w);
    for (auto& z : next) z /= Scalar(b);
  }

  out.vector.assign(n, Scalar(0));
  for (std::size_t j = 0; j < basis.size() && j < std::size_t(ritz.size()); ++j) {
    Scalar c(ritz(Eigen::Index(j)));
    for (std::size_t i = 0; i < n; ++i) out.vector[i] += c * basis[j][i];
  }
  double nv = detail::vec_norm(out.vector);
  for (auto& z : out.vector) z /= Scalar(nv);
  return out;
}

}  // namespace bellchain
