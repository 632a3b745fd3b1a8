#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "bellchain/tensor.hpp"

namespace bellchain {

/// Spin-1 matrices in the spin-z basis ordered |+1>, |0>, |-1>  <->  0,1,2.
struct Spin1Operators {
  CTensor sx, sy, sz;
};

inline Spin1Operators spin1_operators() {
  const double s = 1.0 / std::sqrt(2.0);
  Spin1Operators op{CTensor({3, 3}), CTensor({3, 3}), CTensor({3, 3})};
  op.sx(0, 1) = s;
  op.sx(1, 0) = s;
  op.sx(1, 2) = s;
  op.sx(2, 1) = s;
  op.sy(0, 1) = cplx(0, -s);
  op.sy(1, 0) = cplx(0, s);
  op.sy(1, 2) = cplx(0, -s);
  op.sy(2, 1) = cplx(0, s);
  op.sz(0, 0) = 1.0;
  op.sz(2, 2) = -1.0;
  return op;
}

/// Real ladder operators: S+ = Sx + iSy, S- = Sx - iSy have real entries in
/// this basis. Returned as double tensors so the real fast path can use them.
inline RTensor spin1_splus() {
  RTensor t({3, 3});
  t(0, 1) = std::sqrt(2.0);
  t(1, 2) = std::sqrt(2.0);
  return t;
}
inline RTensor spin1_sminus() {
  RTensor t({3, 3});
  t(1, 0) = std::sqrt(2.0);
  t(2, 1) = std::sqrt(2.0);
  return t;
}
inline RTensor spin1_sz_real() {
  RTensor t({3, 3});
  t(0, 0) = 1.0;
  t(2, 2) = -1.0;
  return t;
}
inline RTensor spin1_sx_real() {
  RTensor t({3, 3});
  const double s = 1.0 / std::sqrt(2.0);
  t(0, 1) = t(1, 0) = t(1, 2) = t(2, 1) = s;
  return t;
}
/// exp(i pi Sz) = diag(-1, 1, -1); enters the string-order interior.
inline RTensor string_phase_operator() {
  RTensor t({3, 3});
  t(0, 0) = -1.0;
  t(1, 1) = 1.0;
  t(2, 2) = -1.0;
  return t;
}

/// n-level lowering operators J^n = sum_{beta>=n} |beta><beta-n|, n = 1..d-1.
/// For d=3, J = S^-/sqrt(2).
template <typename Scalar = double>
std::vector<DenseTensor<Scalar>> lowering_operators(int d) {
  if (d < 2) throw std::invalid_argument("lowering_operators: d must be >= 2");
  std::vector<DenseTensor<Scalar>> out;
  for (int n = 1; n < d; ++n) {
    DenseTensor<Scalar> j({std::size_t(d), std::size_t(d)});
    for (int beta = n; beta < d; ++beta) j(std::size_t(beta), std::size_t(beta - n)) = Scalar(1);
    out.push_back(std::move(j));
  }
  return out;
}

inline cplx omega_pow(int d, double exponent) {
  const double arg = 2.0 * std::numbers::pi * exponent / double(d);
  return {std::cos(arg), std::sin(arg)};
}

/// Measurement operator V = sum_alpha omega^alpha |alpha><alpha| built from the
/// Fourier-transformed basis |alpha> = d^{-1/2} sum_beta omega^{-(alpha+phi)beta} |beta>.
/// The beta=0 component of every eigenvector is 1/sqrt(d), real positive, which
/// fixes the global phase.
inline CTensor fourier_observable(int d, double phase_shift) {
  if (d < 2) throw std::invalid_argument("fourier_observable: d must be >= 2");
  CTensor v({std::size_t(d), std::size_t(d)});
  for (int beta = 0; beta < d; ++beta)
    for (int betap = 0; betap < d; ++betap) {
      cplx sum = 0;
      for (int alpha = 0; alpha < d; ++alpha)
        sum += omega_pow(d, alpha) *
               omega_pow(d, -(alpha + phase_shift) * beta) *
               omega_pow(d, (alpha + phase_shift) * betap);
      v(std::size_t(beta), std::size_t(betap)) = sum / double(d);
    }
  return v;
}

/// CGLMP/SLK Bell operator data for local dimension d. The local-realistic
/// interval is known only for d=3 and is left unset otherwise.
struct BellOperatorSpec {
  int d = 3;
  double phi_a1 = 0.0, phi_b1 = 0.5, phi_a2 = -0.25, phi_b2 = 0.25;
  std::vector<cplx> weights;          // f_n = (1/2)/(d-1) omega^{n/4} sec(n pi / 2d)
  std::vector<double> coefficients;   // c_n = 2/(d-1) sec(n pi / 2d)
  std::optional<std::pair<double, double>> lr_bounds;

  static BellOperatorSpec make(int d) {
    if (d < 2) throw std::invalid_argument("BellOperatorSpec: d must be >= 2");
    BellOperatorSpec spec;
    spec.d = d;
    for (int n = 1; n < d; ++n) {
      double sec = 1.0 / std::cos(double(n) * std::numbers::pi / (2.0 * d));
      spec.weights.push_back(0.5 / double(d - 1) * omega_pow(d, n / 4.0) * sec);
      spec.coefficients.push_back(2.0 / double(d - 1) * sec);
    }
    if (d == 3) spec.lr_bounds = std::make_pair(-4.0, 2.0);
    return spec;
  }
};

namespace detail {

template <typename Scalar>
DenseTensor<Scalar> matrix_power(const DenseTensor<Scalar>& m, int n) {
  DenseTensor<Scalar> acc = DenseTensor<Scalar>::identity(m.dim(0));
  for (int k = 0; k < n; ++k) acc = contract(acc, m, {{1, 0}});
  return acc;
}

template <typename Scalar>
DenseTensor<Scalar> adjoint(const DenseTensor<Scalar>& m) {
  return m.conjugate().permute({1, 0});
}

}  // namespace detail

/// Two-site Bell operator in the lowering-operator form,
///   B = sum_n c_n (J^n x J^n+  +  J^n+ x J^n),
/// Hermitian by construction. Only d=3 carries a stated local bound, so only
/// d=3 is accepted.
inline CTensor bell_operator_dense(const BellOperatorSpec& spec) {
  if (spec.d != 3)
    throw std::invalid_argument(
        "bell_operator_dense: only d=3 is supported (local-realistic bounds are "
        "stated only for d=3)");
  auto js = lowering_operators<cplx>(spec.d);
  CTensor b({std::size_t(spec.d * spec.d), std::size_t(spec.d * spec.d)});
  for (int n = 1; n < spec.d; ++n) {
    const auto& j = js[std::size_t(n - 1)];
    auto jd = detail::adjoint(j);
    auto term = kron(j, jd);
    term += kron(jd, j);
    term *= spec.coefficients[std::size_t(n - 1)];
    b += term;
  }
  return b;
}

/// Same operator assembled from the measurement form: the weighted sum over
/// (A^n + omega^{n/2} B^n) products in the four phase-shifted Fourier bases,
/// plus the Hermitian conjugate of the whole sum.
inline CTensor bell_operator_measurement_form(const BellOperatorSpec& spec) {
  const int d = spec.d;
  auto a1 = fourier_observable(d, spec.phi_a1);
  auto b1 = fourier_observable(d, spec.phi_b1);
  auto a2 = fourier_observable(d, spec.phi_a2);
  auto b2 = fourier_observable(d, spec.phi_b2);

  CTensor m({std::size_t(d * d), std::size_t(d * d)});
  for (int n = 1; n < d; ++n) {
    auto p1 = detail::matrix_power(a1, n);
    auto q1 = detail::matrix_power(b1, n);
    q1 *= omega_pow(d, n / 2.0);
    p1 += q1;
    auto p2 = detail::matrix_power(a2, n);
    auto q2 = detail::matrix_power(b2, n);
    q2 *= omega_pow(d, n / 2.0);
    p2 += q2;
    auto term = kron(p1, detail::adjoint(p2));
    term *= spec.weights[std::size_t(n - 1)];
    m += term;
  }
  auto out = m;
  out += detail::adjoint(m);
  return out;
}

}  // namespace bellchain
