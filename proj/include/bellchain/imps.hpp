#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "bellchain/tensor.hpp"

namespace bellchain {

/// Schmidt coefficients across one of the two inequivalent bonds of the
/// two-site unit cell. Bond A sits between the A and B sites, bond B between
/// unit cells.
struct SchmidtSpectrum {
  enum class Bond { A, B };
  std::vector<double> values;  // nonnegative, nonincreasing, squares sum to 1
  Bond bond = Bond::A;
};

/// Natural-log entanglement entropy S = -sum lambda^2 log lambda^2.
/// Zero coefficients contribute nothing.
inline double entanglement_entropy(const std::vector<double>& lambda) {
  double s = 0;
  for (double l : lambda) {
    double p = l * l;
    if (p > 0) s -= p * std::log(p);
  }
  return s;
}
inline double entanglement_entropy(const SchmidtSpectrum& spec) {
  return entanglement_entropy(spec.values);
}

/// Entrywise regularized inverse used to move between the Gamma-Lambda and
/// mixed-canonical forms: 1/lambda where lambda >= floor, else 0.
inline std::vector<double> regularized_inverse(const std::vector<double>& lambda,
                                               double floor = 1e-12) {
  if (floor <= 0) throw std::invalid_argument("regularized_inverse: floor must be > 0");
  std::vector<double> inv(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i)
    inv[i] = lambda[i] >= floor ? 1.0 / lambda[i] : 0.0;
  return inv;
}

/// Infinite MPS with a two-site unit cell in Gamma-Lambda form:
///   ... Lb Ga La Gb Lb Ga La Gb ...
/// gamma_a has legs (bond B, physical, bond A); gamma_b (bond A, physical, bond B).
template <typename Scalar>
struct CanonicalIMPS {
  DenseTensor<Scalar> gamma_a, gamma_b;
  std::vector<double> lambda_a, lambda_b;

  std::size_t d() const { return gamma_a.dim(1); }
  std::size_t chi_a() const { return lambda_a.size(); }
  std::size_t chi_b() const { return lambda_b.size(); }
  std::size_t chi() const { return std::max(chi_a(), chi_b()); }

  SchmidtSpectrum schmidt(SchmidtSpectrum::Bond bond) const {
    return {bond == SchmidtSpectrum::Bond::A ? lambda_a : lambda_b, bond};
  }

  /// One-site translation: relabels the two sublattices.
  CanonicalIMPS shifted() const { return {gamma_b, gamma_a, lambda_b, lambda_a}; }
};

inline CanonicalIMPS<cplx> to_complex(const CanonicalIMPS<double>& s) {
  return {to_complex(s.gamma_a), to_complex(s.gamma_b), s.lambda_a, s.lambda_b};
}
inline const CanonicalIMPS<cplx>& to_complex(const CanonicalIMPS<cplx>& s) { return s; }

namespace detail {

/// Multiplies slices along one axis by per-index factors (diagonal matrix
/// absorbed into a tensor leg).
template <typename Scalar>
DenseTensor<Scalar> scale_axis(DenseTensor<Scalar> t, std::size_t axis,
                               const std::vector<double>& f) {
  if (f.size() != t.dim(axis)) throw std::invalid_argument("scale_axis: size mismatch");
  std::size_t inner = 1, outer = 1;
  for (std::size_t k = axis + 1; k < t.rank(); ++k) inner *= t.dim(k);
  for (std::size_t k = 0; k < axis; ++k) outer *= t.dim(k);
  Scalar* p = t.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < f.size(); ++i) {
      Scalar fac(f[i]);
      for (std::size_t j = 0; j < inner; ++j) p[(o * f.size() + i) * inner + j] *= fac;
    }
  return t;
}

}  // namespace detail

/// Right-canonical site tensors B = Gamma * diag(lambda_right).
template <typename Scalar>
DenseTensor<Scalar> b_tensor_a(const CanonicalIMPS<Scalar>& s) {
  return detail::scale_axis(s.gamma_a, 2, s.lambda_a);
}
template <typename Scalar>
DenseTensor<Scalar> b_tensor_b(const CanonicalIMPS<Scalar>& s) {
  return detail::scale_axis(s.gamma_b, 2, s.lambda_b);
}
/// Left-canonical site tensors A = diag(lambda_left) * Gamma.
template <typename Scalar>
DenseTensor<Scalar> a_tensor_a(const CanonicalIMPS<Scalar>& s) {
  return detail::scale_axis(s.gamma_a, 0, s.lambda_b);
}
template <typename Scalar>
DenseTensor<Scalar> a_tensor_b(const CanonicalIMPS<Scalar>& s) {
  return detail::scale_axis(s.gamma_b, 0, s.lambda_a);
}

/// Two-site wavefunction Lb Ga La Gb Lb on the A-B bond pattern
/// (legs: bond B, physical, physical, bond B).
template <typename Scalar>
DenseTensor<Scalar> theta_ab(const CanonicalIMPS<Scalar>& s) {
  auto left = detail::scale_axis(a_tensor_a(s), 2, s.lambda_a);
  return contract(left, b_tensor_b(s), {{2, 0}});
}
/// Same across the other bond: La Gb Lb Ga La.
template <typename Scalar>
DenseTensor<Scalar> theta_ba(const CanonicalIMPS<Scalar>& s) {
  return theta_ab(s.shifted());
}

/// chi=1 product state; every observable factorizes.
template <typename Scalar = double>
CanonicalIMPS<Scalar> product_state(std::size_t d, std::vector<Scalar> local_vector) {
  if (local_vector.size() != d) throw std::invalid_argument("product_state: bad vector size");
  double n2 = 0;
  for (const auto& v : local_vector) n2 += detail::abs2(v);
  if (n2 <= 0) throw std::invalid_argument("product_state: zero local vector");
  DenseTensor<Scalar> g({1, d, 1});
  for (std::size_t s = 0; s < d; ++s) g(0, s, 0) = local_vector[s] / Scalar(std::sqrt(n2));
  return {g, g, {1.0}, {1.0}};
}

struct CanonicalReport {
  double right_a = 0, left_a = 0, right_b = 0, left_b = 0;
  double max_deviation = 0;
  bool pass = false;
};

/// Max-norm deviation of the canonical conditions
///   sum_s Gamma_s Lr^2 Gamma_s^+ = 1   and   sum_s Gamma_s^+ Ll^2 Gamma_s = 1
/// for both sublattice tensors.
template <typename Scalar>
CanonicalReport check_canonical(const CanonicalIMPS<Scalar>& s, double tol = 1e-8) {
  auto dev_right = [](const DenseTensor<Scalar>& g, const std::vector<double>& lr) {
    auto b = detail::scale_axis(g, 2, lr);
    auto m = contract(b, b.conjugate(), {{1, 1}, {2, 2}});
    auto id = DenseTensor<Scalar>::identity(g.dim(0));
    id *= Scalar(-1);
    m += id;
    double mx = 0;
    for (std::size_t i = 0; i < m.size(); ++i) mx = std::max(mx, std::abs(m[i]));
    return mx;
  };
  auto dev_left = [](const DenseTensor<Scalar>& g, const std::vector<double>& ll) {
    auto a = detail::scale_axis(g, 0, ll);
    auto m = contract(a.conjugate(), a, {{0, 0}, {1, 1}});
    auto id = DenseTensor<Scalar>::identity(g.dim(2));
    id *= Scalar(-1);
    m += id;
    double mx = 0;
    for (std::size_t i = 0; i < m.size(); ++i) mx = std::max(mx, std::abs(m[i]));
    return mx;
  };
  CanonicalReport r;
  r.right_a = dev_right(s.gamma_a, s.lambda_a);
  r.left_a = dev_left(s.gamma_a, s.lambda_b);
  r.right_b = dev_right(s.gamma_b, s.lambda_b);
  r.left_b = dev_left(s.gamma_b, s.lambda_a);
  r.max_deviation = std::max({r.right_a, r.left_a, r.right_b, r.left_b});
  r.pass = r.max_deviation <= tol;
  return r;
}

struct CanonicalizeOptions {
  double fp_tol = 1e-14;       // fixed-point residual of the transfer map
  std::size_t max_iter = 50000;
  double rank_tol = 1e-12;     // relative eigenvalue floor for the gauge factors
};

namespace detail {

template <typename Scalar>
EMatrix<Scalar> transfer_fixed_point(const DenseTensor<Scalar>& cell, bool right,
                                     const CanonicalizeOptions& opt) {
  const std::size_t chi = cell.dim(0);
  using Mat = EMatrix<Scalar>;
  Mat x = Mat::Identity(Eigen::Index(chi), Eigen::Index(chi));
  auto apply = [&](const Mat& m) {
    DenseTensor<Scalar> mt = from_matrix<Scalar>(m);
    if (right) {
      auto t1 = contract(cell, mt, {{2, 0}});
      return contract(t1, cell.conjugate(), {{1, 1}, {2, 2}});
    }
    auto t1 = contract(mt, cell.conjugate(), {{0, 0}});
    return contract(t1, cell, {{0, 0}, {1, 1}});
  };
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    auto xt = apply(x);
    Mat xn = matrix_view(xt);
    xn = ((xn + xn.adjoint()) * 0.5).eval();
    double tr = xn.real().trace();
    xn /= tr;
    double resid = (xn - x).cwiseAbs().maxCoeff();
    x = xn;
    if (resid < opt.fp_tol) break;
  }
  return x;
}

/// V = F F^+ (right) or V = F^+ F (left) with tiny eigenvalues dropped.
/// Returns the factor and its pseudo-inverse.
template <typename Scalar>
std::pair<EMatrix<Scalar>, EMatrix<Scalar>> split_psd(const EMatrix<Scalar>& v, bool right,
                                                      double rank_tol) {
  Eigen::SelfAdjointEigenSolver<EMatrix<Scalar>> es(v);
  const auto& ev = es.eigenvalues();
  double vmax = ev.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > rank_tol * vmax) keep.push_back(i);
  const Eigen::Index k = Eigen::Index(keep.size());
  EMatrix<Scalar> f, finv;
  if (right) {
    f.resize(v.rows(), k);
    finv.resize(k, v.rows());
    for (Eigen::Index j = 0; j < k; ++j) {
      double sq = std::sqrt(ev(keep[std::size_t(j)]));
      f.col(j) = es.eigenvectors().col(keep[std::size_t(j)]) * sq;
      finv.row(j) = es.eigenvectors().col(keep[std::size_t(j)]).adjoint() / sq;
    }
  } else {
    f.resize(k, v.rows());
    finv.resize(v.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      double sq = std::sqrt(ev(keep[std::size_t(j)]));
      f.row(j) = es.eigenvectors().col(keep[std::size_t(j)]).adjoint() * sq;
      finv.col(j) = es.eigenvectors().col(keep[std::size_t(j)]) / sq;
    }
  }
  return {f, finv};
}

}  // namespace detail

/// Regauges an arbitrary two-site-cell iMPS into canonical form following the
/// transfer-matrix construction: dominant left/right fixed points of the
/// coarse-grained cell fix the gauge, an SVD on the cell bond restores the
/// Schmidt basis, and a final SVD re-splits the cell into the two sites.
template <typename Scalar>
CanonicalIMPS<Scalar> canonicalize(const CanonicalIMPS<Scalar>& in,
                                   const CanonicalizeOptions& opt = {}) {
  using Mat = EMatrix<Scalar>;
  const std::size_t d = in.d();
  const std::size_t chi_b = in.chi_b();

  // coarse-grained cell Ga La Gb with fused physical legs; the right fixed
  // point sees the B-form (cell Lb), the left one the A-form (Lb cell)
  auto gcell = contract(detail::scale_axis(in.gamma_a, 2, in.lambda_a), in.gamma_b, {{2, 0}})
                   .reshape({chi_b, d * d, chi_b});
  auto bcell = detail::scale_axis(gcell, 2, in.lambda_b);
  auto acell = detail::scale_axis(gcell, 0, in.lambda_b);

  Mat vr = detail::transfer_fixed_point(bcell, true, opt);
  Mat vl = detail::transfer_fixed_point(acell, false, opt);

  auto [x, xinv] = detail::split_psd<Scalar>(vr, true, opt.rank_tol);
  auto [y, yinv] = detail::split_psd<Scalar>(vl, false, opt.rank_tol);

  Mat lb_old = Mat::Zero(Eigen::Index(chi_b), Eigen::Index(chi_b));
  for (std::size_t i = 0; i < chi_b; ++i)
    lb_old(Eigen::Index(i), Eigen::Index(i)) = Scalar(in.lambda_b[i]);
  Mat bond = y * lb_old * x;

  Eigen::BDCSVD<Mat> svd(bond, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  std::size_t m = 0;
  double smax = sv.size() ? sv(0) : 0.0;
  while (m < std::size_t(sv.size()) && sv(Eigen::Index(m)) > opt.rank_tol * smax) ++m;
  std::vector<double> lb_new(m);
  double n2 = 0;
  for (std::size_t i = 0; i < m; ++i) n2 += sv(Eigen::Index(i)) * sv(Eigen::Index(i));
  for (std::size_t i = 0; i < m; ++i) lb_new[i] = sv(Eigen::Index(i)) / std::sqrt(n2);

  Mat p_left = svd.matrixV().leftCols(Eigen::Index(m)).adjoint() * xinv;   // m x chi_b
  Mat p_right = yinv * svd.matrixU().leftCols(Eigen::Index(m));            // chi_b x m

  auto gnew = contract(from_matrix<Scalar>(p_left), gcell, {{1, 0}});
  gnew = contract(gnew, from_matrix<Scalar>(p_right), {{2, 0}});  // (m, d*d, m)

  // normalize so the right-canonical condition has unit scale
  {
    auto b = detail::scale_axis(gnew, 2, lb_new);
    auto k = contract(b, b.conjugate(), {{1, 1}, {2, 2}});
    double tr = 0;
    for (std::size_t i = 0; i < m; ++i) tr += std::real(cplx(k(i, i)));
    gnew *= Scalar(1.0 / std::sqrt(tr / double(m)));
  }

  // split the cell back into the two sites across bond A
  auto theta = detail::scale_axis(detail::scale_axis(gnew, 0, lb_new), 2, lb_new)
                   .reshape({m, d, d, m})
                   .reshape({m * d, d * m});
  auto sres = svd_truncate(theta, m * d, 1e-14);
  const std::size_t ka = sres.S.size();
  double na = 0;
  for (double v : sres.S) na += v * v;
  std::vector<double> la_new(ka);
  for (std::size_t i = 0; i < ka; ++i) la_new[i] = sres.S[i] / std::sqrt(na);

  auto lb_inv = regularized_inverse(lb_new);
  CanonicalIMPS<Scalar> out;
  out.lambda_a = la_new;
  out.lambda_b = lb_new;
  out.gamma_a = detail::scale_axis(sres.U.reshape({m, d, ka}), 0, lb_inv);
  out.gamma_b = detail::scale_axis(sres.Vh.reshape({ka, d, m}), 2, lb_inv);
  return out;
}

/// Random valid iMPS: gaussian cell tensors regauged into canonical form.
template <typename Scalar = cplx>
CanonicalIMPS<Scalar> random_imps(std::size_t d, std::size_t chi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto fill = [&](DenseTensor<Scalar>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if constexpr (detail::is_complex<Scalar>::value)
        t[i] = cplx(g(rng), g(rng));
      else
        t[i] = g(rng);
    }
  };
  CanonicalIMPS<Scalar> s;
  s.gamma_a = DenseTensor<Scalar>({chi, d, chi});
  s.gamma_b = DenseTensor<Scalar>({chi, d, chi});
  fill(s.gamma_a);
  fill(s.gamma_b);
  s.lambda_a.resize(chi);
  s.lambda_b.resize(chi);
  double n2a = 0, n2b = 0;
  for (std::size_t i = 0; i < chi; ++i) {
    s.lambda_a[i] = std::abs(g(rng)) + 0.1;
    s.lambda_b[i] = std::abs(g(rng)) + 0.1;
    n2a += s.lambda_a[i] * s.lambda_a[i];
    n2b += s.lambda_b[i] * s.lambda_b[i];
  }
  for (std::size_t i = 0; i < chi; ++i) {
    s.lambda_a[i] /= std::sqrt(n2a);
    s.lambda_b[i] /= std::sqrt(n2b);
  }
  std::sort(s.lambda_a.rbegin(), s.lambda_a.rend());
  std::sort(s.lambda_b.rbegin(), s.lambda_b.rend());
  return canonicalize(s);
}

// ---------------------------------------------------------------------------
// Checkpoint file: structured text, 17 significant digits, bit-exact on
// round trip. Entries are stored as "re im" pairs regardless of scalar type.
// ---------------------------------------------------------------------------

inline constexpr const char* kCheckpointMagic = "bellchain-imps-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline void write_value(std::ostream& os, double re, double im) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g %.17g\n", re, im);
  os << buf;
}

template <typename Scalar>
void write_tensor(std::ostream& os, const char* name, const DenseTensor<Scalar>& t) {
  os << name;
  for (std::size_t k = 0; k < t.rank(); ++k) os << ' ' << t.dim(k);
  os << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    cplx z(t[i]);
    write_value(os, z.real(), z.imag());
  }
}

}  // namespace detail

template <typename Scalar>
void save_checkpoint(const CanonicalIMPS<Scalar>& s, std::ostream& os) {
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  os << "d " << s.d() << '\n';
  detail::write_tensor(os, "gamma_a", s.gamma_a);
  detail::write_tensor(os, "gamma_b", s.gamma_b);
  os << "lambda_a " << s.lambda_a.size() << '\n';
  for (double v : s.lambda_a) detail::write_value(os, v, 0.0);
  os << "lambda_b " << s.lambda_b.size() << '\n';
  for (double v : s.lambda_b) detail::write_value(os, v, 0.0);
}

template <typename Scalar>
void save_checkpoint(const CanonicalIMPS<Scalar>& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  save_checkpoint(s, f);
}

inline CanonicalIMPS<cplx> load_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kCheckpointMagic)
    throw std::runtime_error("load_checkpoint: not a checkpoint file");
  if (version != kCheckpointVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version");
  std::string key;
  std::size_t d = 0;
  if (!(is >> key >> d) || key != "d") throw std::runtime_error("load_checkpoint: bad header");

  auto read_tensor = [&](const char* name) {
    std::string k;
    std::size_t l, p, r;
    if (!(is >> k >> l >> p >> r) || k != name)
      throw std::runtime_error(std::string("load_checkpoint: expected ") + name);
    CTensor t({l, p, r});
    for (std::size_t i = 0; i < t.size(); ++i) {
      double re, im;
      if (!(is >> re >> im)) throw std::runtime_error("load_checkpoint: truncated file");
      t[i] = cplx(re, im);
    }
    return t;
  };
  auto read_lambda = [&](const char* name) {
    std::string k;
    std::size_t n;
    if (!(is >> k >> n) || k != name)
      throw std::runtime_error(std::string("load_checkpoint: expected ") + name);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      double re, im;
      if (!(is >> re >> im)) throw std::runtime_error("load_checkpoint: truncated file");
      v[i] = re;
    }
    return v;
  };

  CanonicalIMPS<cplx> s;
  s.gamma_a = read_tensor("gamma_a");
  s.gamma_b = read_tensor("gamma_b");
  s.lambda_a = read_lambda("lambda_a");
  s.lambda_b = read_lambda("lambda_b");
  if (s.d() != d) throw std::runtime_error("load_checkpoint: inconsistent dimensions");
  return s;
}

inline CanonicalIMPS<cplx> load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  return load_checkpoint(f);
}

}  // namespace bellchain
