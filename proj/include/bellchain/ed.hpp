#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "bellchain/imps.hpp"
#include "bellchain/lanczos.hpp"
#include "bellchain/mpo.hpp"
#include "bellchain/spin.hpp"

namespace bellchain {

/// Finite spin-1 chain for exact diagonalization. Basis ordering is
/// site-major with spin-z descending per site: |+>,|0>,|-> <-> 0,1,2, so the
/// basis index of |s_0 s_1 ... s_{N-1}> is sum_j s_j 3^{N-1-j}.
struct FiniteChainSpec {
  int n_sites = 4;
  enum class Boundary { open, periodic };
  Boundary boundary = Boundary::open;
  double jz = 1.0;
  double d_field = 0.0;

  void validate() const {
    if (n_sites < 2 || n_sites > 12)
      throw std::invalid_argument("FiniteChainSpec: N must be in 2..12");
  }
  std::size_t dim() const {
    std::size_t d = 1;
    for (int i = 0; i < n_sites; ++i) d *= 3;
    return d;
  }
};

namespace ed_detail {

inline std::size_t site_stride(int n_sites, int site) {
  std::size_t s = 1;
  for (int k = site + 1; k < n_sites; ++k) s *= 3;
  return s;
}

/// out += op acting on one site of |in>.
inline void apply_site(const RTensor& op, int site, int n_sites,
                       const std::vector<double>& in, std::vector<double>& out) {
  const std::ptrdiff_t stride = std::ptrdiff_t(site_stride(n_sites, site));
  const std::size_t dim = in.size();
  for (std::size_t i = 0; i < dim; ++i) {
    std::ptrdiff_t s = std::ptrdiff_t((i / std::size_t(stride)) % 3);
    for (std::ptrdiff_t sp = 0; sp < 3; ++sp) {
      double w = op(std::size_t(sp), std::size_t(s));
      if (w != 0.0) out[std::size_t(std::ptrdiff_t(i) + (sp - s) * stride)] += w * in[i];
    }
  }
}

/// out += two-site op (9x9, row = s_a' 3 + s_b') acting on sites a and b.
inline void apply_bond(const RTensor& op, int a, int b, int n_sites,
                       const std::vector<double>& in, std::vector<double>& out) {
  const std::ptrdiff_t sa = std::ptrdiff_t(site_stride(n_sites, a));
  const std::ptrdiff_t sb = std::ptrdiff_t(site_stride(n_sites, b));
  const std::size_t dim = in.size();
  for (std::size_t i = 0; i < dim; ++i) {
    std::ptrdiff_t va = std::ptrdiff_t((i / std::size_t(sa)) % 3);
    std::ptrdiff_t vb = std::ptrdiff_t((i / std::size_t(sb)) % 3);
    std::size_t col = std::size_t(va * 3 + vb);
    for (std::size_t row = 0; row < 9; ++row) {
      double w = op(row, col);
      if (w != 0.0) {
        std::ptrdiff_t wa = std::ptrdiff_t(row / 3), wb = std::ptrdiff_t(row % 3);
        out[std::size_t(std::ptrdiff_t(i) + (wa - va) * sa + (wb - vb) * sb)] += w * in[i];
      }
    }
  }
}

inline RTensor xxz_bond_operator(double jz) {
  auto sp = spin1_splus();
  auto sm = spin1_sminus();
  auto sz = spin1_sz_real();
  auto h = kron(sp, sm);
  h *= 0.5;
  auto t = kron(sm, sp);
  t *= 0.5;
  h += t;
  auto zz = kron(sz, sz);
  zz *= jz;
  h += zz;
  return h;
}

inline RTensor heisenberg_bond_operator() { return xxz_bond_operator(1.0); }

inline RTensor aklt_bond_operator() {
  auto ss = heisenberg_bond_operator();
  auto ss2 = contract(ss, ss, {{1, 0}});
  ss2 *= 1.0 / 3.0;
  ss += ss2;
  return ss;
}

}  // namespace ed_detail

/// H|in> for the XXZ+D chain, matrix-free.
inline void ed_apply_hamiltonian(const FiniteChainSpec& spec, const std::vector<double>& in,
                                 std::vector<double>& out) {
  const int n = spec.n_sites;
  std::fill(out.begin(), out.end(), 0.0);
  auto bond = ed_detail::xxz_bond_operator(spec.jz);
  for (int j = 0; j + 1 < n; ++j) ed_detail::apply_bond(bond, j, j + 1, n, in, out);
  if (spec.boundary == FiniteChainSpec::Boundary::periodic && n > 2)
    ed_detail::apply_bond(bond, n - 1, 0, n, in, out);
  if (spec.d_field != 0.0) {
    auto z2 = contract(spin1_sz_real(), spin1_sz_real(), {{1, 0}});
    z2 *= spec.d_field;
    for (int j = 0; j < n; ++j) ed_detail::apply_site(z2, j, n, in, out);
  }
}

/// Explicitly summed dense Hamiltonian (oracle for MPO densification, N <= 6).
inline RTensor ed_dense_hamiltonian(const FiniteChainSpec& spec) {
  spec.validate();
  if (spec.n_sites > 6) throw std::invalid_argument("ed_dense_hamiltonian: N too large");
  const std::size_t dim = spec.dim();
  RTensor h({dim, dim});
  std::vector<double> e(dim, 0.0), col(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    ed_apply_hamiltonian(spec, e, col);
    for (std::size_t i = 0; i < dim; ++i) h(i, j) = col[i];
    e[j] = 0.0;
  }
  return h;
}

/// Dense AKLT chain Hamiltonian on N sites (open), same basis ordering.
inline RTensor ed_dense_aklt_hamiltonian(int n_sites) {
  if (n_sites < 2 || n_sites > 6) throw std::invalid_argument("ed_dense_aklt: N in 2..6");
  std::size_t dim = 1;
  for (int i = 0; i < n_sites; ++i) dim *= 3;
  auto bond = ed_detail::aklt_bond_operator();
  RTensor h({dim, dim});
  std::vector<double> e(dim, 0.0), col(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    e[j] = 1.0;
    std::fill(col.begin(), col.end(), 0.0);
    for (int b = 0; b + 1 < n_sites; ++b) ed_detail::apply_bond(bond, b, b + 1, n_sites, e, col);
    for (std::size_t i = 0; i < dim; ++i) h(i, j) = col[i];
    e[j] = 0.0;
  }
  return h;
}

struct EdGroundState {
  double energy = 0;
  std::vector<double> vector;
  double residual = 0;
};

/// Full-space Lanczos ground state, residual < 1e-9.
inline EdGroundState ed_ground_state(const FiniteChainSpec& spec, std::uint64_t seed = 7) {
  spec.validate();
  const std::size_t dim = spec.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> start(dim);
  for (auto& x : start) x = g(rng);
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    ed_apply_hamiltonian(spec, in, out);
  };
  auto res = lanczos_ground<double>(apply, start, 1e-12, 250);
  return {res.value, std::move(res.vector), res.residual};
}

/// Expectation of a product of single-site operators applied at given sites.
inline double ed_expect(const FiniteChainSpec& spec, const std::vector<double>& state,
                        const std::vector<std::pair<int, const RTensor*>>& ops) {
  const std::size_t dim = spec.dim();
  std::vector<double> cur = state, next(dim);
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    if (it->first < 0 || it->first >= spec.n_sites)
      throw std::invalid_argument("ed_expect: site index out of chain");
    std::fill(next.begin(), next.end(), 0.0);
    ed_detail::apply_site(*it->second, it->first, spec.n_sites, cur, next);
    std::swap(cur, next);
  }
  double dot = 0;
  for (std::size_t i = 0; i < dim; ++i) dot += state[i] * cur[i];
  return dot;
}

struct EdObservables {
  double c1 = 0, c2 = 0;
  double bell = 0;              // channel sum of the Bell operator
  double bell_decomposition = 0;  // 2 (c1/sqrt(3) + c2/2)
  double string_order = 0;
  bool bell_violation = false;
};

/// Correlators between sites i and i+r evaluated by direct vector contraction.
inline EdObservables ed_observables(const FiniteChainSpec& spec, const std::vector<double>& state,
                                    int i, int r) {
  if (r < 1) throw std::invalid_argument("ed_observables: r must be >= 1");
  if (i < 0 || i + r >= spec.n_sites)
    throw std::invalid_argument("ed_observables: site indices out of chain");
  auto sp = spin1_splus();
  auto sm = spin1_sminus();
  auto sp2 = contract(sp, sp, {{1, 0}});
  auto sm2 = contract(sm, sm, {{1, 0}});
  auto sz = spin1_sz_real();
  auto js = lowering_operators<double>(3);
  auto jd1 = js[0].permute({1, 0});
  auto jd2 = js[1].permute({1, 0});

  EdObservables out;
  int j = i + r;
  out.c1 = 0.5 * (ed_expect(spec, state, {{i, &sp}, {j, &sm}}) +
                  ed_expect(spec, state, {{i, &sm}, {j, &sp}}));
  out.c2 = 0.5 * (ed_expect(spec, state, {{i, &sp2}, {j, &sm2}}) +
                  ed_expect(spec, state, {{i, &sm2}, {j, &sp2}}));
  const double c1coef = 2.0 / std::sqrt(3.0), c2coef = 2.0;
  out.bell = c1coef * (ed_expect(spec, state, {{i, &js[0]}, {j, &jd1}}) +
                       ed_expect(spec, state, {{i, &jd1}, {j, &js[0]}})) +
             c2coef * (ed_expect(spec, state, {{i, &js[1]}, {j, &jd2}}) +
                       ed_expect(spec, state, {{i, &jd2}, {j, &js[1]}}));
  out.bell_decomposition = 2.0 * (out.c1 / std::sqrt(3.0) + out.c2 / 2.0);
  if (r >= 2) {
    auto phase = string_phase_operator();
    std::vector<std::pair<int, const RTensor*>> ops;
    ops.emplace_back(i, &sz);
    for (int l = i + 1; l < j; ++l) ops.emplace_back(l, &phase);
    ops.emplace_back(j, &sz);
    out.string_order = ed_expect(spec, state, ops);
  }
  out.bell_violation = out.bell < -4.0 - 1e-9 || out.bell > 2.0 + 1e-9;
  return out;
}

/// The exact chi=2 AKLT state in canonical form: Gamma = sqrt(2) A with the
/// standard valence-bond tensors A^{+1} = sqrt(2/3) s^+, A^0 = -sqrt(1/3) s^z,
/// A^{-1} = -sqrt(2/3) s^-, and lambda = (1/sqrt(2), 1/sqrt(2)).
inline CanonicalIMPS<double> aklt_exact_imps() {
  RTensor g({2, 3, 2});
  const double a = std::sqrt(2.0) * std::sqrt(2.0 / 3.0);
  const double b = std::sqrt(2.0) * std::sqrt(1.0 / 3.0);
  // s = 0 (|+1>): sqrt(2/3) sigma^+
  g(0, 0, 1) = a;
  // s = 1 (|0>): -sqrt(1/3) sigma^z
  g(0, 1, 0) = -b;
  g(1, 1, 1) = b;
  // s = 2 (|-1>): -sqrt(2/3) sigma^-
  g(1, 2, 0) = -a;
  std::vector<double> lam = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  return {g, g, lam, lam};
}

}  // namespace bellchain
