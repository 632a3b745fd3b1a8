#include <catch2/catch_amalgamated.hpp>

#include "bellchain/ed.hpp"
#include "bellchain/observables.hpp"

using namespace bellchain;

namespace {

// Independent oracle: window wavefunction assembled with plain loops straight
// from the Gamma/lambda fields, then a dense expectation value.
template <typename Scalar>
std::vector<cplx> naive_window(const CanonicalIMPS<Scalar>& st, std::size_t k) {
  const std::size_t d = st.d();
  std::size_t dk = 1;
  for (std::size_t i = 0; i < k; ++i) dk *= d;
  const std::size_t chi0 = st.lambda_b.size();
  // w[a] holds amplitudes over (S, right bond c); starts as lambda_b delta
  std::vector<std::vector<cplx>> w(chi0);
  std::size_t chi_cur = chi0, dacc = 1;
  for (std::size_t a = 0; a < chi0; ++a) {
    w[a].assign(chi0, cplx(0));
    w[a][a] = cplx(st.lambda_b[a]);
  }
  for (std::size_t j = 0; j < k; ++j) {
    bool a_site = j % 2 == 0;
    const auto& gam = a_site ? st.gamma_a : st.gamma_b;
    const auto& lam = a_site ? st.lambda_a : st.lambda_b;
    const std::size_t cl = gam.dim(0), cr = gam.dim(2);
    for (std::size_t a = 0; a < chi0; ++a) {
      std::vector<cplx> nw(dacc * d * cr, cplx(0));
      for (std::size_t S = 0; S < dacc; ++S)
        for (std::size_t c = 0; c < cl; ++c) {
          cplx amp = w[a][S * cl + c];
          if (amp == cplx(0)) continue;
          for (std::size_t s = 0; s < d; ++s)
            for (std::size_t c2 = 0; c2 < cr; ++c2)
              nw[(S * d + s) * cr + c2] += amp * cplx(gam(c, s, c2)) * lam[c2];
        }
      w[a] = std::move(nw);
    }
    dacc *= d;
    chi_cur = cr;
  }
  // flatten to W[a, S, b]
  std::vector<cplx> out(chi0 * dk * chi_cur);
  for (std::size_t a = 0; a < chi0; ++a)
    for (std::size_t S = 0; S < dk; ++S)
      for (std::size_t b = 0; b < chi_cur; ++b)
        out[(a * dk + S) * chi_cur + b] = w[a][S * chi_cur + b];
  return out;
}

template <typename Scalar>
double naive_expect(const CanonicalIMPS<Scalar>& st, const CTensor& op, std::size_t k) {
  const std::size_t d = st.d();
  std::size_t dk = 1;
  for (std::size_t i = 0; i < k; ++i) dk *= d;
  auto w = naive_window(st, k);
  const std::size_t chi0 = st.lambda_b.size();
  const std::size_t chir = w.size() / (chi0 * dk);
  cplx num = 0, den = 0;
  for (std::size_t a = 0; a < chi0; ++a)
    for (std::size_t b = 0; b < chir; ++b) {
      for (std::size_t S = 0; S < dk; ++S) {
        cplx amp = w[(a * dk + S) * chir + b];
        den += std::conj(amp) * amp;
        for (std::size_t Sp = 0; Sp < dk; ++Sp)
          num += std::conj(w[(a * dk + Sp) * chir + b]) * op(Sp, S) * amp;
      }
    }
  return (num / den).real();
}

CTensor two_site_op_at(const CTensor& o1, const CTensor& o2, std::size_t i, std::size_t j,
                       std::size_t k) {
  CTensor acc = CTensor::identity(1);
  for (std::size_t s = 0; s < k; ++s) {
    CTensor cur = s == i ? o1 : (s == j ? o2 : CTensor::identity(3));
    acc = kron(acc, cur);
  }
  return acc;
}

CanonicalIMPS<cplx> flip_state(const CanonicalIMPS<cplx>& st) {
  CTensor f({3, 3});
  f(0, 2) = 1.0;
  f(1, 1) = 1.0;
  f(2, 0) = 1.0;
  auto apply = [&](const CTensor& g) {
    return contract(f, g, {{1, 1}}).permute({1, 0, 2});
  };
  return {apply(st.gamma_a), apply(st.gamma_b), st.lambda_a, st.lambda_b};
}

}  // namespace

TEST_CASE("two-point basics on product states") {
  auto sz = spin1_sz_real();
  SECTION("|0...0> has vanishing SzSz") {
    auto st = product_state<double>(3, {0.0, 1.0, 0.0});
    REQUIRE(std::abs(two_point(st, sz, sz, 3)) < 1e-14);
  }
  SECTION("|+...+> has SzSz = 1 at every distance") {
    auto st = product_state<double>(3, {1.0, 0.0, 0.0});
    for (std::size_t r : {1, 2, 7})
      REQUIRE(two_point(st, sz, sz, r).real() == Catch::Approx(1.0));
  }
  SECTION("r < 1 rejected") {
    auto st = product_state<double>(3, {1.0, 0.0, 0.0});
    REQUIRE_THROWS_AS(two_point(st, sz, sz, 0), std::invalid_argument);
  }
  SECTION("c1 and c2 vanish on |0...0>") {
    auto st = product_state<double>(3, {0.0, 1.0, 0.0});
    REQUIRE(std::abs(c1(st, 2)) < 1e-14);
    REQUIRE(std::abs(c2(st, 2)) < 1e-14);
  }
}

TEST_CASE("AKLT correlators against the naive window oracle") {
  auto st = to_complex(aklt_exact_imps());
  auto sp = to_complex(spin1_splus());
  auto sm = to_complex(spin1_sminus());
  for (std::size_t r : {1, 2, 3, 5}) {
    double lib = two_point(st, sp, sm, r).real();
    auto op = two_site_op_at(sp, sm, 0, r, r + 1);
    double oracle = naive_expect(st, op, r + 1);
    REQUIRE(lib == Catch::Approx(oracle).margin(1e-12));
  }
  SECTION("c1 alternates sign and decays with correlation length 1/ln 3") {
    // exact AKLT transfer matrix gives c1(r) = (8/3)(-1/3)^r
    for (std::size_t r : {1, 2, 3, 6}) {
      double expect = (8.0 / 3.0) * std::pow(-1.0 / 3.0, double(r));
      REQUIRE(c1(st, r) == Catch::Approx(expect).margin(1e-12));
    }
  }
}

TEST_CASE("AKLT string order and energy") {
  auto st = aklt_exact_imps();
  SECTION("string order approaches -4/9") {
    REQUIRE(string_order(st, 50) == Catch::Approx(-4.0 / 9.0).margin(1e-6));
    REQUIRE(string_order(st, 51) == Catch::Approx(-4.0 / 9.0).margin(1e-6));
  }
  SECTION("r < 2 rejected") { REQUIRE_THROWS_AS(string_order(st, 1), std::invalid_argument); }
  SECTION("energy per site is exactly -2/3") {
    REQUIRE(aklt_energy_per_site(st) == Catch::Approx(-2.0 / 3.0).margin(1e-12));
  }
  SECTION("zero energy variance after the projector shift") {
    // shifted bond operator h + 2/3 annihilates the state, so every
    // correlator <h~_0 h~_r> vanishes identically
    auto hb = to_complex(aklt_bond_dense());
    auto shift = CTensor::identity(9);
    shift *= cplx(2.0 / 3.0);
    hb += shift;
    auto stc = to_complex(st);
    for (std::size_t r : {0, 1, 2, 3}) {
      std::size_t k = r + 2;
      // build h~(0,1) h~(r,r+1) on the k-site window explicitly
      CTensor h0 = CTensor::identity(1);
      for (std::size_t s = 0; s < k;) {
        if (s == 0) {
          h0 = kron(h0, hb);
          s += 2;
        } else {
          h0 = kron(h0, CTensor::identity(3));
          s += 1;
        }
      }
      CTensor hr = CTensor::identity(1);
      for (std::size_t s = 0; s < k;) {
        if (s == r) {
          hr = kron(hr, hb);
          s += 2;
        } else {
          hr = kron(hr, CTensor::identity(3));
          s += 1;
        }
      }
      auto prod = contract(h0, hr, {{1, 0}});
      double v = window_dense_expectation(stc, prod, k);
      REQUIRE(std::abs(v) < 1e-9);
    }
  }
}

TEST_CASE("decomposition identity holds for arbitrary states") {
  for (std::uint64_t seed : {10ull, 20ull, 30ull}) {
    auto st = random_imps<cplx>(3, 8, seed);
    for (std::size_t r : {1, 2, 5}) {
      double via_mpo = bell_correlation(st, r, BellMethod::mpo);
      double via_dec = bell_correlation(st, r, BellMethod::decomposition);
      REQUIRE(std::abs(via_mpo - via_dec) < 1e-10);
    }
  }
}

TEST_CASE("global spin flip leaves the scoped observables unchanged") {
  auto st = random_imps<cplx>(3, 6, 77);
  auto fl = flip_state(st);
  REQUIRE(check_canonical(fl).max_deviation < 1e-9);
  for (std::size_t r : {1, 3}) {
    REQUIRE(c1(fl, r) == Catch::Approx(c1(st, r)).margin(1e-10));
    REQUIRE(c2(fl, r) == Catch::Approx(c2(st, r)).margin(1e-10));
    REQUIRE(bell_correlation(fl, r) == Catch::Approx(bell_correlation(st, r)).margin(1e-10));
  }
  REQUIRE(string_order(fl, 4) == Catch::Approx(string_order(st, 4)).margin(1e-10));
}

TEST_CASE("translation by one site relabels sublattices consistently") {
  auto st = to_complex(aklt_exact_imps());  // one-site invariant state
  auto sp = to_complex(spin1_splus());
  auto sm = to_complex(spin1_sminus());
  auto a = two_point(st, sp, sm, 3, Sublattice::A);
  auto b = two_point(st, sp, sm, 3, Sublattice::B);
  REQUIRE(std::abs(a - b) < 1e-9);
}

TEST_CASE("bound check") {
  REQUIRE_FALSE(bound_check(0.0));
  REQUIRE_FALSE(bound_check(2.0));
  REQUIRE_FALSE(bound_check(-4.0));
  REQUIRE_FALSE(bound_check(2.0 + 5e-10));
  REQUIRE(bound_check(2.0000001));
  REQUIRE(bound_check(-4.0000001));
}

TEST_CASE("ordering gap vanishes on real states") {
  auto st = aklt_exact_imps();
  REQUIRE(c1_ordering_gap(st, 2) < 1e-12);
}

TEST_CASE("series CSV round-trips") {
  CorrelationSeries s;
  s.kind = CorrelationSeries::Kind::Bell;
  s.distances = {1, 3, 5};
  s.values = {-0.123456789012, 0.5, 1e-9};
  std::ostringstream os;
  write_series_csv(os, s, 1.0, -0.25, 60);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "kind,J_z,D,chi,r,value");
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    REQUIRE(line.rfind("bell,1,-0.25,60,", 0) == 0);
    auto pos = line.rfind(',');
    double v = std::stod(line.substr(pos + 1));
    REQUIRE(v == Catch::Approx(s.values[row]).epsilon(1e-11));
    ++row;
  }
  REQUIRE(row == 3);
}
