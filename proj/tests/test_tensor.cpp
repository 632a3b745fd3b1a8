#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bellchain/tensor.hpp"

using namespace bellchain;

namespace {

template <typename Scalar>
DenseTensor<Scalar> random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng) {
  DenseTensor<Scalar> t(std::move(dims));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, cplx>)
      t[i] = cplx(u(rng), u(rng));
    else
      t[i] = u(rng);
  }
  return t;
}

// Independent oracle: plain index-sum contraction, no matrix algebra.
template <typename Scalar>
DenseTensor<Scalar> naive_contract(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
  for (auto [ia, ib] : pairs) a_used[ia] = b_used[ib] = true;
  std::vector<std::size_t> out_dims;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!a_used[i]) out_dims.push_back(a.dim(i));
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!b_used[i]) out_dims.push_back(b.dim(i));
  DenseTensor<Scalar> out(out_dims.empty() ? std::vector<std::size_t>{1} : out_dims);

  std::vector<std::size_t> ai(a.rank(), 0), bi(b.rank(), 0);
  std::function<void(std::size_t, std::size_t)> loop_free;
  std::vector<std::size_t> free_a, free_b;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!a_used[i]) free_a.push_back(i);
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!b_used[i]) free_b.push_back(i);

  std::size_t flat_out = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t level) {
    if (level == free_a.size() + free_b.size()) {
      // sum over all paired indices
      Scalar acc(0);
      std::function<void(std::size_t)> sum_rec = [&](std::size_t p) {
        if (p == pairs.size()) {
          std::size_t fa = 0, fb = 0;
          for (std::size_t i = 0; i < a.rank(); ++i) fa = fa * a.dim(i) + ai[i];
          for (std::size_t i = 0; i < b.rank(); ++i) fb = fb * b.dim(i) + bi[i];
          acc += a[fa] * b[fb];
          return;
        }
        for (std::size_t k = 0; k < a.dim(pairs[p].first); ++k) {
          ai[pairs[p].first] = k;
          bi[pairs[p].second] = k;
          sum_rec(p + 1);
        }
      };
      sum_rec(0);
      out[flat_out++] = acc;
      return;
    }
    bool on_a = level < free_a.size();
    std::size_t leg = on_a ? free_a[level] : free_b[level - free_a.size()];
    std::size_t ext = on_a ? a.dim(leg) : b.dim(leg);
    for (std::size_t k = 0; k < ext; ++k) {
      (on_a ? ai[leg] : bi[leg]) = k;
      rec(level + 1);
    }
  };
  rec(0);
  return out;
}

template <typename Scalar>
double max_abs_diff(const DenseTensor<Scalar>& x, const DenseTensor<Scalar>& y) {
  REQUIRE(x.dims() == y.dims());
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace

TEST_CASE("reshape preserves the entry sequence") {
  std::mt19937_64 rng(11);
  auto t = random_tensor<cplx>({2, 3, 4}, rng);
  auto r = t.reshape({6, 4});
  REQUIRE(r.rank() == 2);
  for (std::size_t i = 0; i < t.size(); ++i) REQUIRE(r[i] == t[i]);
  REQUIRE_THROWS_AS(t.reshape({5, 5}), std::invalid_argument);
}

TEST_CASE("identity contraction returns the vector unchanged") {
  CTensor id = CTensor::identity(2);
  CTensor v({2});
  v(0) = 1.0;
  v(1) = 2.0;
  auto w = contract(id, v, {{1, 0}});
  REQUIRE(w.dims() == std::vector<std::size_t>{2});
  REQUIRE(std::abs(w(0) - cplx(1.0)) < 1e-15);
  REQUIRE(std::abs(w(1) - cplx(2.0)) < 1e-15);
}

TEST_CASE("Pauli product sigma_x sigma_z") {
  CTensor A({2, 2}), B({2, 2});
  A(0, 1) = 1.0;
  A(1, 0) = 1.0;
  B(0, 0) = 1.0;
  B(1, 1) = -1.0;
  auto C = contract(A, B, {{1, 0}});
  REQUIRE(std::abs(C(0, 0) - cplx(0.0)) < 1e-15);
  REQUIRE(std::abs(C(0, 1) - cplx(-1.0)) < 1e-15);
  REQUIRE(std::abs(C(1, 0) - cplx(1.0)) < 1e-15);
  REQUIRE(std::abs(C(1, 1) - cplx(0.0)) < 1e-15);
}

TEST_CASE("contraction agrees with the naive index-sum oracle") {
  std::mt19937_64 rng(42);
  SECTION("3x4x5 against 5x4 over two legs") {
    auto a = random_tensor<cplx>({3, 4, 5}, rng);
    auto b = random_tensor<cplx>({5, 4}, rng);
    std::vector<std::pair<std::size_t, std::size_t>> pairs{{2, 0}, {1, 1}};
    REQUIRE(max_abs_diff(contract(a, b, pairs), naive_contract(a, b, pairs)) < 1e-12);
  }
  SECTION("assorted shapes up to 6 total legs, extents <= 5") {
    struct Case {
      std::vector<std::size_t> da, db;
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
    };
    std::vector<Case> cases = {
        {{2, 3}, {3, 4}, {{1, 0}}},
        {{5, 2, 3}, {3, 5, 2}, {{0, 1}, {2, 0}}},
        {{4, 4}, {4, 4}, {{0, 0}, {1, 1}}},   // full trace pairing
        {{2, 2, 2}, {2, 2, 2}, {{0, 2}}},
        {{5}, {5}, {{0, 0}}},
    };
    for (const auto& c : cases) {
      auto a = random_tensor<cplx>(c.da, rng);
      auto b = random_tensor<cplx>(c.db, rng);
      REQUIRE(max_abs_diff(contract(a, b, c.pairs), naive_contract(a, b, c.pairs)) < 1e-12);
    }
  }
  SECTION("real scalar instantiation") {
    auto a = random_tensor<double>({3, 4, 5}, rng);
    auto b = random_tensor<double>({5, 4}, rng);
    std::vector<std::pair<std::size_t, std::size_t>> pairs{{2, 0}, {1, 1}};
    REQUIRE(max_abs_diff(contract(a, b, pairs), naive_contract(a, b, pairs)) < 1e-12);
  }
}

TEST_CASE("contraction is bilinear") {
  std::mt19937_64 rng(7);
  auto a1 = random_tensor<cplx>({3, 4}, rng);
  auto a2 = random_tensor<cplx>({3, 4}, rng);
  auto b = random_tensor<cplx>({4, 2}, rng);
  cplx alpha(0.3, -1.1);
  auto lhs_a = a1;
  lhs_a *= alpha;
  lhs_a += a2;
  auto lhs = contract(lhs_a, b, {{1, 0}});
  auto r1 = contract(a1, b, {{1, 0}});
  r1 *= alpha;
  r1 += contract(a2, b, {{1, 0}});
  REQUIRE(max_abs_diff(lhs, r1) < 1e-12);
}

TEST_CASE("contraction rejects mismatched extents with both reported") {
  CTensor a({2, 3}), b({4, 2});
  try {
    contract(a, b, {{1, 0}});
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("3") != std::string::npos);
    REQUIRE(msg.find("4") != std::string::npos);
  }
}

TEST_CASE("svd_truncate basics") {
  SECTION("diag(1,0), chi_max=2") {
    CTensor t({2, 2});
    t(0, 0) = 1.0;
    auto r = svd_truncate(t, 2, 0.0);
    REQUIRE(r.S.size() == 2);
    REQUIRE(r.S[0] == Catch::Approx(1.0));
    REQUIRE(r.S[1] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(r.truncation_error == Catch::Approx(0.0).margin(1e-30));
  }
  SECTION("diag(0.8,0.6), chi_max=1") {
    CTensor t({2, 2});
    t(0, 0) = 0.8;
    t(1, 1) = 0.6;
    auto r = svd_truncate(t, 1, 0.0);
    REQUIRE(r.S.size() == 1);
    REQUIRE(r.S[0] == Catch::Approx(0.8));
    REQUIRE(r.truncation_error == Catch::Approx(0.36));
  }
  SECTION("non-finite entries rejected") {
    CTensor t({2, 2});
    t(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(svd_truncate(t, 2, 0.0), std::invalid_argument);
  }
}

TEST_CASE("svd_truncate is lossless at full rank and isometric") {
  std::mt19937_64 rng(123);
  auto t = random_tensor<cplx>({20, 20}, rng);
  auto r = svd_truncate(t, 20, 0.0);

  auto mu = matrix_view(r.U);
  auto mv = matrix_view(r.Vh);
  REQUIRE((mu.adjoint() * mu - EMatrix<cplx>::Identity(mu.cols(), mu.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  REQUIRE((mv * mv.adjoint() - EMatrix<cplx>::Identity(mv.rows(), mv.rows()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  for (std::size_t i = 0; i + 1 < r.S.size(); ++i) REQUIRE(r.S[i] >= r.S[i + 1]);
  REQUIRE(r.S.back() >= 0.0);

  EMatrix<cplx> rec = mu * Eigen::Map<const Eigen::VectorXd>(r.S.data(), 20).asDiagonal() * mv;
  REQUIRE((rec - matrix_view(t)).cwiseAbs().maxCoeff() < 1e-10);
  REQUIRE(r.truncation_error < 1e-20);
}

TEST_CASE("svd gauge fixing is bit-stable across repeated runs") {
  std::mt19937_64 rng(5);
  auto t = random_tensor<cplx>({12, 9}, rng);
  auto r1 = svd_truncate(t, 9, 0.0);
  auto r2 = svd_truncate(t, 9, 0.0);
  for (std::size_t i = 0; i < r1.U.size(); ++i) REQUIRE(r1.U[i] == r2.U[i]);
  for (std::size_t i = 0; i < r1.Vh.size(); ++i) REQUIRE(r1.Vh[i] == r2.Vh[i]);
  // gauge: largest-magnitude entry of each left vector is real positive
  for (std::size_t k = 0; k < r1.S.size(); ++k) {
    double best = 0;
    cplx top;
    for (std::size_t i = 0; i < r1.U.dim(0); ++i) {
      if (std::abs(r1.U(i, k)) > best) {
        best = std::abs(r1.U(i, k));
        top = r1.U(i, k);
      }
    }
    REQUIRE(top.real() > 0);
    REQUIRE(std::abs(top.imag()) < 1e-12 * best);
  }
}

TEST_CASE("svd_truncate keeps degenerate multiplets together") {
  // two exact doublets; chi_max=3 would split the second one
  EMatrix<cplx> m = EMatrix<cplx>::Zero(4, 4);
  m(0, 0) = 0.9;
  m(1, 1) = 0.9;
  m(2, 2) = 0.4;
  m(3, 3) = 0.4;
  auto r = svd_truncate(from_matrix(m), 3, 0.0);
  REQUIRE(r.S.size() == 2);
  REQUIRE(r.truncation_error == Catch::Approx(2 * 0.16));
}

TEST_CASE("eigh_smallest") {
  SECTION("diag(3,1,2)") {
    CTensor h({3, 3});
    h(0, 0) = 3.0;
    h(1, 1) = 1.0;
    h(2, 2) = 2.0;
    auto [val, vec] = eigh_smallest(h);
    REQUIRE(val == Catch::Approx(1.0));
    REQUIRE(std::abs(vec(1)) == Catch::Approx(1.0));
  }
  SECTION("sigma_x") {
    CTensor h({2, 2});
    h(0, 1) = 1.0;
    h(1, 0) = 1.0;
    auto [val, vec] = eigh_smallest(h);
    REQUIRE(val == Catch::Approx(-1.0));
    REQUIRE(std::abs(vec(0) + vec(1)) < 1e-12);  // (1,-1)/sqrt(2) up to phase
    REQUIRE(std::abs(std::abs(vec(0)) - 1 / std::sqrt(2.0)) < 1e-12);
  }
  SECTION("random Hermitian 8x8 matches full-spectrum solve and residual bound") {
    std::mt19937_64 rng(77);
    auto raw = random_tensor<cplx>({8, 8}, rng);
    EMatrix<cplx> hm = matrix_view(raw);
    hm = ((hm + hm.adjoint()) / 2.0).eval();
    auto h = from_matrix(hm);
    auto [val, vec] = eigh_smallest(h);

    Eigen::SelfAdjointEigenSolver<EMatrix<cplx>> es(hm);
    REQUIRE(val == Catch::Approx(es.eigenvalues()(0)).margin(1e-12));

    Eigen::VectorXcd v(8);
    for (int i = 0; i < 8; ++i) v(i) = vec(std::size_t(i));
    REQUIRE((hm * v - val * v).norm() < 1e-9);
    REQUIRE(v.norm() == Catch::Approx(1.0));
  }
  SECTION("non-Hermitian rejected") {
    CTensor h({2, 2});
    h(0, 1) = 1.0;
    REQUIRE_THROWS_AS(eigh_smallest(h), std::invalid_argument);
  }
}

TEST_CASE("kron matches explicit two-site matrix elements") {
  std::mt19937_64 rng(3);
  auto a = random_tensor<cplx>({3, 3}, rng);
  auto b = random_tensor<cplx>({3, 3}, rng);
  auto k = kron(a, b);
  for (std::size_t i1 = 0; i1 < 3; ++i1)
    for (std::size_t i2 = 0; i2 < 3; ++i2)
      for (std::size_t j1 = 0; j1 < 3; ++j1)
        for (std::size_t j2 = 0; j2 < 3; ++j2)
          REQUIRE(std::abs(k(i1 * 3 + i2, j1 * 3 + j2) - a(i1, j1) * b(i2, j2)) < 1e-15);
}
