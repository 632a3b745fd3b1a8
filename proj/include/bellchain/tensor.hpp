#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace bellchain {

using cplx = std::complex<double>;

namespace detail {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double abs2(double x) { return x * x; }
inline double abs2(const cplx& z) { return std::norm(z); }

}  // namespace detail

/// Dense rank-n array with row-major storage. Leg labels are advisory
/// bookkeeping only; every contraction is specified by explicit index pairs.
template <typename Scalar>
class DenseTensor {
 public:
  using value_type = Scalar;

  DenseTensor() = default;

  explicit DenseTensor(std::vector<std::size_t> dims)
      : dims_(std::move(dims)), data_(count(dims_), Scalar(0)) {
    for (std::size_t d : dims_)
      if (d == 0) throw std::invalid_argument("DenseTensor: zero extent");
  }

  DenseTensor(std::vector<std::size_t> dims, std::vector<Scalar> entries)
      : dims_(std::move(dims)), data_(std::move(entries)) {
    if (count(dims_) != data_.size())
      throw std::invalid_argument("DenseTensor: dims do not match entry count");
  }

  std::size_t rank() const { return dims_.size(); }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](std::size_t flat) { return data_[flat]; }
  const Scalar& operator[](std::size_t flat) const { return data_[flat]; }

  template <typename... Ix>
  Scalar& operator()(Ix... ix) {
    return data_[flatten({static_cast<std::size_t>(ix)...})];
  }
  template <typename... Ix>
  const Scalar& operator()(Ix... ix) const {
    return data_[flatten({static_cast<std::size_t>(ix)...})];
  }

  void set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != dims_.size())
      throw std::invalid_argument("labels must match rank");
    labels_ = std::move(labels);
  }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Reshape preserves the entry sequence exactly.
  DenseTensor reshape(std::vector<std::size_t> new_dims) const {
    if (count(new_dims) != data_.size())
      throw std::invalid_argument("reshape: element count changed");
    DenseTensor out;
    out.dims_ = std::move(new_dims);
    out.data_ = data_;
    return out;
  }

  /// Axis permutation: out(i_{p0}, i_{p1}, ...) = in(i_0, i_1, ...).
  DenseTensor permute(const std::vector<std::size_t>& order) const {
    if (order.size() != rank()) throw std::invalid_argument("permute: bad order");
    DenseTensor out;
    out.dims_.resize(rank());
    for (std::size_t k = 0; k < rank(); ++k) out.dims_[k] = dims_.at(order[k]);
    out.data_.resize(data_.size());
    if (rank() == 0) {
      out.data_ = data_;
      return out;
    }
    // Keep the longest contiguous trailing block intact so the copy runs in
    // chunks instead of single elements.
    std::size_t keep = 0;
    while (keep < rank() && order[rank() - 1 - keep] == rank() - 1 - keep) ++keep;
    std::size_t block = 1;
    for (std::size_t k = rank() - keep; k < rank(); ++k) block *= dims_[k];

    const std::size_t loop_rank = rank() - keep;
    std::vector<std::size_t> in_strides(rank(), 1);
    for (std::size_t k = rank(); k-- > 1;) in_strides[k - 1] = in_strides[k] * dims_[k];
    std::vector<std::size_t> out_loop_dims(loop_rank), src_stride(loop_rank);
    for (std::size_t k = 0; k < loop_rank; ++k) {
      out_loop_dims[k] = out.dims_[k];
      src_stride[k] = in_strides[order[k]];
    }
    std::vector<std::size_t> idx(loop_rank, 0);
    Scalar* dst = out.data_.data();
    const Scalar* src = data_.data();
    std::size_t n_blocks = data_.size() / block;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      std::size_t off = 0;
      for (std::size_t k = 0; k < loop_rank; ++k) off += idx[k] * src_stride[k];
      std::copy(src + off, src + off + block, dst);
      dst += block;
      for (std::size_t k = loop_rank; k-- > 0;) {
        if (++idx[k] < out_loop_dims[k]) break;
        idx[k] = 0;
      }
    }
    return out;
  }

  DenseTensor conjugate() const {
    DenseTensor out = *this;
    if constexpr (detail::is_complex<Scalar>::value)
      for (auto& z : out.data_) z = std::conj(z);
    return out;
  }

  double norm() const {
    double s = 0;
    for (const auto& z : data_) s += detail::abs2(z);
    return std::sqrt(s);
  }

  DenseTensor& operator*=(Scalar a) {
    for (auto& z : data_) z *= a;
    return *this;
  }
  DenseTensor& operator+=(const DenseTensor& o) {
    if (o.dims_ != dims_) throw std::invalid_argument("operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  bool finite() const {
    for (const auto& z : data_) {
      if constexpr (detail::is_complex<Scalar>::value) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
      } else {
        if (!std::isfinite(z)) return false;
      }
    }
    return true;
  }

  static DenseTensor identity(std::size_t n) {
    DenseTensor out({n, n});
    for (std::size_t i = 0; i < n; ++i) out.data_[i * n + i] = Scalar(1);
    return out;
  }

  std::size_t flatten(std::initializer_list<std::size_t> ix) const {
    if (ix.size() != dims_.size()) throw std::invalid_argument("index rank mismatch");
    std::size_t flat = 0, k = 0;
    for (std::size_t i : ix) {
      if (i >= dims_[k]) throw std::out_of_range("tensor index out of range");
      flat = flat * dims_[k] + i;
      ++k;
    }
    return flat;
  }

 private:
  static std::size_t count(const std::vector<std::size_t>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t(1), std::multiplies<>());
  }

  std::vector<std::size_t> dims_;
  std::vector<Scalar> data_;
  std::vector<std::string> labels_;
};

using RTensor = DenseTensor<double>;
using CTensor = DenseTensor<cplx>;

template <typename Scalar>
using EMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline CTensor to_complex(const RTensor& t) {
  std::vector<cplx> d(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) d[i] = t[i];
  return CTensor(t.dims(), std::move(d));
}
inline const CTensor& to_complex(const CTensor& t) { return t; }

/// Matrix view of a rank-2 tensor (no copy).
template <typename Scalar>
Eigen::Map<const EMatrix<Scalar>> matrix_view(const DenseTensor<Scalar>& t) {
  if (t.rank() != 2) throw std::invalid_argument("matrix_view: rank-2 tensor required");
  return {t.data(), static_cast<Eigen::Index>(t.dim(0)),
          static_cast<Eigen::Index>(t.dim(1))};
}

template <typename Scalar>
DenseTensor<Scalar> from_matrix(const EMatrix<Scalar>& m) {
  DenseTensor<Scalar> t({static_cast<std::size_t>(m.rows()),
                         static_cast<std::size_t>(m.cols())});
  Eigen::Map<EMatrix<Scalar>>(t.data(), m.rows(), m.cols()) = m;
  return t;
}

/// Contraction over explicit leg pairs {(leg of a, leg of b), ...}.
/// Result legs are the unpaired legs of a, then of b, in their original order.
template <typename Scalar>
DenseTensor<Scalar> contract(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b,
                             const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
  std::size_t K = 1;
  for (auto [ia, ib] : pairs) {
    if (ia >= a.rank() || ib >= b.rank())
      throw std::invalid_argument("contract: leg index out of range");
    if (a_used[ia] || b_used[ib]) throw std::invalid_argument("contract: repeated leg");
    if (a.dim(ia) != b.dim(ib)) {
      std::ostringstream os;
      os << "contract: paired extents differ, leg " << ia << " of a has extent "
         << a.dim(ia) << " but leg " << ib << " of b has extent " << b.dim(ib);
      throw std::invalid_argument(os.str());
    }
    a_used[ia] = b_used[ib] = true;
    K *= a.dim(ia);
  }

  std::vector<std::size_t> a_order, b_order, out_dims;
  std::size_t M = 1, N = 1;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!a_used[i]) {
      a_order.push_back(i);
      out_dims.push_back(a.dim(i));
      M *= a.dim(i);
    }
  for (auto [ia, ib] : pairs) a_order.push_back(ia);
  for (auto [ia, ib] : pairs) b_order.push_back(ib);
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!b_used[i]) {
      b_order.push_back(i);
      out_dims.push_back(b.dim(i));
      N *= b.dim(i);
    }

  DenseTensor<Scalar> ap = a.permute(a_order);
  DenseTensor<Scalar> bp = b.permute(b_order);

  DenseTensor<Scalar> out(out_dims.empty() ? std::vector<std::size_t>{1} : out_dims);
  using Idx = Eigen::Index;
  Eigen::Map<const EMatrix<Scalar>> ma(ap.data(), Idx(M), Idx(K));
  Eigen::Map<const EMatrix<Scalar>> mb(bp.data(), Idx(K), Idx(N));
  Eigen::Map<EMatrix<Scalar>> mo(out.data(), Idx(M), Idx(N));
  mo.noalias() = ma * mb;
  if (out_dims.empty()) return out.reshape({1});
  return out;
}

/// Kronecker product in row-major (site-major) convention:
/// out[(i1 i2),(j1 j2)] = a[i1,j1] * b[i2,j2].
template <typename Scalar>
DenseTensor<Scalar> kron(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b) {
  if (a.rank() != 2 || b.rank() != 2) throw std::invalid_argument("kron: rank-2 required");
  const std::size_t ra = a.dim(0), ca = a.dim(1), rb = b.dim(0), cb = b.dim(1);
  DenseTensor<Scalar> out({ra * rb, ca * cb});
  for (std::size_t i1 = 0; i1 < ra; ++i1)
    for (std::size_t i2 = 0; i2 < rb; ++i2)
      for (std::size_t j1 = 0; j1 < ca; ++j1)
        for (std::size_t j2 = 0; j2 < cb; ++j2)
          out(i1 * rb + i2, j1 * cb + j2) = a(i1, j1) * b(i2, j2);
  return out;
}

template <typename Scalar>
struct SVDResult {
  DenseTensor<Scalar> U;       // left isometry, (m, k)
  std::vector<double> S;       // nonincreasing, >= 0
  DenseTensor<Scalar> Vh;      // right isometry rows, (k, n)
  double truncation_error = 0; // sum of squared discarded singular values
};

namespace detail {

// Sign/phase gauge: rotate each left singular vector so its largest-magnitude
// entry is real positive, compensating on the right vectors. Makes repeated
// factorization of the same matrix bit-stable.
template <typename Scalar>
void fix_svd_gauge(EMatrix<Scalar>& U, EMatrix<Scalar>& Vh) {
  for (Eigen::Index k = 0; k < U.cols(); ++k) {
    Eigen::Index imax = 0;
    double best = -1;
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      double m = std::abs(U(i, k));
      if (m > best + 1e-300 && m > best) {
        best = m;
        imax = i;
      }
    }
    if (best <= 0) continue;
    if constexpr (is_complex<Scalar>::value) {
      cplx ph = U(imax, k) / std::abs(U(imax, k));
      U.col(k) *= std::conj(ph);
      if (k < Vh.rows()) Vh.row(k) *= ph;
    } else {
      if (U(imax, k) < 0) {
        U.col(k) = -U.col(k);
        if (k < Vh.rows()) Vh.row(k) = -Vh.row(k);
      }
    }
  }
}

}  // namespace detail

/// Truncated SVD of a rank-2 tensor. Keeps min(chi_max, #{S_i >= cutoff})
/// values but never splits a degenerate multiplet: neighbours equal within
/// 1e-10 are kept or discarded together (at least one value is always kept).
template <typename Scalar>
SVDResult<Scalar> svd_truncate(const DenseTensor<Scalar>& t, std::size_t chi_max,
                               double cutoff) {
  if (t.rank() != 2) throw std::invalid_argument("svd_truncate: rank-2 tensor required");
  if (chi_max < 1) throw std::invalid_argument("svd_truncate: chi_max must be >= 1");
  if (!t.finite()) throw std::invalid_argument("svd_truncate: non-finite entries");

  Eigen::BDCSVD<EMatrix<Scalar>> svd(matrix_view(t),
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  EMatrix<Scalar> U = svd.matrixU();
  EMatrix<Scalar> Vh = svd.matrixV().adjoint();
  Eigen::VectorXd S = svd.singularValues();

  const std::size_t full = static_cast<std::size_t>(S.size());
  std::size_t keep = 0;
  while (keep < full && S(Eigen::Index(keep)) >= cutoff) ++keep;
  keep = std::min(keep, chi_max);
  constexpr double kDegTol = 1e-10;
  while (keep > 1 && keep < full &&
         S(Eigen::Index(keep - 1)) - S(Eigen::Index(keep)) <= kDegTol)
    --keep;
  keep = std::max<std::size_t>(keep, 1);

  detail::fix_svd_gauge(U, Vh);

  SVDResult<Scalar> out;
  out.S.assign(S.data(), S.data() + keep);
  out.truncation_error = 0;
  for (std::size_t i = keep; i < full; ++i) out.truncation_error += S(Eigen::Index(i)) * S(Eigen::Index(i));
  out.U = from_matrix<Scalar>(U.leftCols(Eigen::Index(keep)));
  out.Vh = from_matrix<Scalar>(Vh.topRows(Eigen::Index(keep)));
  return out;
}

/// Minimal eigenpair of a Hermitian matrix (dense fallback for Lanczos).
template <typename Scalar>
std::pair<double, DenseTensor<Scalar>> eigh_smallest(const DenseTensor<Scalar>& h) {
  if (h.rank() != 2 || h.dim(0) != h.dim(1))
    throw std::invalid_argument("eigh_smallest: square matrix required");
  auto m = matrix_view(h);
  double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-10) throw std::invalid_argument("eigh_smallest: matrix not Hermitian");

  Eigen::SelfAdjointEigenSolver<EMatrix<Scalar>> es(m);
  const auto n = m.rows();
  DenseTensor<Scalar> v({static_cast<std::size_t>(n)});
  Eigen::Index imax = 0;
  es.eigenvectors().col(0).cwiseAbs().maxCoeff(&imax);
  Scalar ph;
  if constexpr (detail::is_complex<Scalar>::value) {
    cplx z = es.eigenvectors()(imax, 0);
    ph = std::conj(z / std::abs(z));
  } else {
    ph = es.eigenvectors()(imax, 0) < 0 ? Scalar(-1) : Scalar(1);
  }
  for (Eigen::Index i = 0; i < n; ++i) v[std::size_t(i)] = es.eigenvectors()(i, 0) * ph;
  return {es.eigenvalues()(0), v};
}

}  // namespace bellchain
