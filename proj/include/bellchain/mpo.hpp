#pragma once

#include <cmath>
#include <vector>

#include "bellchain/spin.hpp"
#include "bellchain/tensor.hpp"

namespace bellchain {

/// Matrix product operator. Site tensors carry legs
/// (left MPO bond, physical out, physical in, right MPO bond).
/// A uniform operator stores one bulk tensor plus boundary vectors selecting
/// the initial/final MPO states; a finite window stores one tensor per site
/// with unit boundary bonds.
template <typename Scalar = double>
struct MPOperator {
  std::vector<DenseTensor<Scalar>> tensors;
  std::vector<Scalar> left_bvec, right_bvec;
  bool uniform = true;

  std::size_t phys_dim() const { return tensors.front().dim(1); }
  std::size_t length() const { return tensors.size(); }
  const DenseTensor<Scalar>& site(std::size_t i) const {
    return uniform ? tensors.front() : tensors.at(i);
  }
};

/// Standard lower-triangular first-order encoding: identity chain states 0 and
/// w-1, one intermediate state per two-site channel (L_k, R_k), plus an
/// on-site term. Bond dimension 2 + #channels.
template <typename Scalar>
MPOperator<Scalar> first_order_mpo(
    const DenseTensor<Scalar>& on_site,
    const std::vector<std::pair<DenseTensor<Scalar>, DenseTensor<Scalar>>>& channels) {
  const std::size_t d = on_site.dim(0);
  const std::size_t w = 2 + channels.size();
  DenseTensor<Scalar> wt({w, d, d, w});
  auto put = [&](std::size_t a, std::size_t b, const DenseTensor<Scalar>& op) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) wt(a, i, j, b) = op(i, j);
  };
  put(0, 0, DenseTensor<Scalar>::identity(d));
  put(w - 1, w - 1, DenseTensor<Scalar>::identity(d));
  put(w - 1, 0, on_site);
  for (std::size_t k = 0; k < channels.size(); ++k) {
    put(1 + k, 0, channels[k].second);   // right factor enters first
    put(w - 1, 1 + k, channels[k].first);
  }
  MPOperator<Scalar> mpo;
  mpo.tensors.push_back(std::move(wt));
  mpo.left_bvec.assign(w, Scalar(0));
  mpo.left_bvec[w - 1] = Scalar(1);
  mpo.right_bvec.assign(w, Scalar(0));
  mpo.right_bvec[0] = Scalar(1);
  mpo.uniform = true;
  return mpo;
}

namespace detail {

inline RTensor scaled(RTensor t, double c) {
  t *= c;
  return t;
}

inline RTensor matmul(const RTensor& a, const RTensor& b) { return contract(a, b, {{1, 0}}); }

inline RTensor sz2() {
  auto z = spin1_sz_real();
  return matmul(z, z);
}

}  // namespace detail

/// H = sum_j J (Sx Sx + Sy Sy + Jz Sz Sz) + D sum_j (Sz)^2, written with the
/// real ladder channels J/2 (S+ S- + S- S+) + J Jz Sz Sz. Bond dimension 5.
inline MPOperator<double> xxz_d_hamiltonian_mpo(double J, double J_z, double D) {
  auto sp = spin1_splus();
  auto sm = spin1_sminus();
  auto sz = spin1_sz_real();
  std::vector<std::pair<RTensor, RTensor>> ch;
  ch.emplace_back(detail::scaled(sp, 0.5 * J), sm);
  ch.emplace_back(detail::scaled(sm, 0.5 * J), sp);
  ch.emplace_back(detail::scaled(sz, J * J_z), sz);
  return first_order_mpo(detail::scaled(detail::sz2(), D), ch);
}

/// H = sum_j S_j.S_{j+1} + (1/3)(S_j.S_{j+1})^2. The bilinear part uses the
/// three ladder channels; squaring that sum gives the nine biquadratic
/// channels, so the bond dimension is 14.
inline MPOperator<double> aklt_hamiltonian_mpo() {
  auto sp = spin1_splus();
  auto sm = spin1_sminus();
  auto sz = spin1_sz_real();
  struct Part {
    RTensor a, b;
    double c;
  };
  std::vector<Part> lin = {{sp, sm, 0.5}, {sm, sp, 0.5}, {sz, sz, 1.0}};
  std::vector<std::pair<RTensor, RTensor>> ch;
  for (const auto& p : lin) ch.emplace_back(detail::scaled(p.a, p.c), p.b);
  for (const auto& p : lin)
    for (const auto& q : lin)
      ch.emplace_back(detail::scaled(detail::matmul(p.a, q.a), p.c * q.c / 3.0),
                      detail::matmul(p.b, q.b));
  RTensor zero({3, 3});
  return first_order_mpo(zero, ch);
}

/// Two-point Bell operator of the correlation B_{i,i+r} = J^L_i 1^{r-1} J^R_{i+r}
/// with the 4x4 identity linking interior sites. Real entries.
inline MPOperator<double> bell_two_point_mpo(std::size_t r) {
  if (r < 1) throw std::invalid_argument("bell_two_point_mpo: r must be >= 1");
  const double ca = std::sqrt(2.0 / std::sqrt(3.0));
  const double cb = std::sqrt(2.0);
  auto js = lowering_operators<double>(3);
  const RTensor& j1 = js[0];
  const RTensor& j2 = js[1];
  auto jd1 = j1.permute({1, 0});
  auto jd2 = j2.permute({1, 0});

  const RTensor* left_ops[4] = {&j1, &jd1, &j2, &jd2};
  const RTensor* right_ops[4] = {&jd1, &j1, &jd2, &j2};
  const double coeff[4] = {ca, ca, cb, cb};

  MPOperator<double> mpo;
  mpo.uniform = false;
  RTensor first({1, 3, 3, 4});
  RTensor last({4, 3, 3, 1});
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        first(0, i, j, m) = coeff[m] * (*left_ops[m])(i, j);
        last(m, i, j, 0) = coeff[m] * (*right_ops[m])(i, j);
      }
  RTensor mid({4, 3, 3, 4});
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t i = 0; i < 3; ++i) mid(m, i, i, m) = 1.0;

  mpo.tensors.push_back(std::move(first));
  for (std::size_t k = 1; k < r; ++k) mpo.tensors.push_back(mid);
  mpo.tensors.push_back(std::move(last));
  mpo.left_bvec = {1.0};
  mpo.right_bvec = {1.0};
  return mpo;
}

/// Contracts an N-site stretch of the MPO with its boundary vectors into a
/// dense d^N x d^N matrix, site-major index order (site 0 most significant).
template <typename Scalar>
DenseTensor<Scalar> densify(const MPOperator<Scalar>& mpo, std::size_t N) {
  if (!mpo.uniform && N != mpo.length())
    throw std::invalid_argument("densify: window length mismatch");
  const std::size_t d = mpo.phys_dim();

  DenseTensor<Scalar> lvec({mpo.left_bvec.size()});
  for (std::size_t i = 0; i < mpo.left_bvec.size(); ++i) lvec(i) = mpo.left_bvec[i];
  DenseTensor<Scalar> rvec({mpo.right_bvec.size()});
  for (std::size_t i = 0; i < mpo.right_bvec.size(); ++i) rvec(i) = mpo.right_bvec[i];

  auto acc = contract(lvec, mpo.site(0), {{0, 0}});  // (out, in, w)
  std::size_t D = d;
  for (std::size_t k = 1; k < N; ++k) {
    auto t = contract(acc, mpo.site(k), {{2, 0}});      // (O, I, o, i, w)
    acc = t.permute({0, 2, 1, 3, 4}).reshape({D * d, D * d, t.dim(4)});
    D *= d;
  }
  return contract(acc, rvec, {{2, 0}});
}

}  // namespace bellchain
