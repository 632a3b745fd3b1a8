#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "bellchain/imps.hpp"
#include "bellchain/lanczos.hpp"
#include "bellchain/mpo.hpp"

namespace bellchain {

enum class InitialState { random, product, neel_like };

struct DmrgConfig {
  std::size_t chi_max = 100;
  double svd_cutoff = 1e-12;
  double entropy_rel_tol = 1e-7;   // relative entropy change between insertions
  double energy_abs_tol = 1e-12;   // backstop on the per-site energy change
  double trunc_tol = 1e-3;         // a converged step may not discard more weight
  double lanczos_tol = 1e-10;
  std::size_t lanczos_max_iter = 200;
  std::size_t max_sweeps = 2000;   // unit-cell insertions
  std::size_t min_sweeps = 6;
  std::size_t warmup_sweeps = 2;   // chi=1 insertions; deterministically selects a
                                   // branch when the ground manifold is degenerate
  std::uint64_t seed = 0;
  InitialState initial_state = InitialState::random;
  std::vector<double> product_vector;
  std::size_t regauge_max_iter = 400;
  std::ostream* log = nullptr;

  void validate() const {
    if (chi_max < 1) throw std::invalid_argument("DmrgConfig: chi_max must be >= 1");
    if (entropy_rel_tol <= 0 || lanczos_tol <= 0 || energy_abs_tol <= 0 || svd_cutoff < 0)
      throw std::invalid_argument("DmrgConfig: tolerances must be positive");
    if (initial_state == InitialState::product && product_vector.empty())
      throw std::invalid_argument("DmrgConfig: product initial state needs a vector");
  }
};

/// Left/right blocks of the effective two-site problem, legs (ket bond, MPO
/// bond, bra bond), plus everything needed to resume a run warm.
struct DmrgCarryover {
  RTensor left_env, right_env;
  RTensor a_cur, b_cur;  // (l, d, k) left-isometric / (k, d, r) right-isometric
  std::vector<double> lambda_cur, lambda_prev;
  bool valid = false;
};

struct DmrgResult {
  CanonicalIMPS<double> state;
  double energy_per_site = 0;
  std::vector<double> entropy_history;
  double last_entropy_rel_diff = 0;
  double truncation_error = 0;
  std::size_t sweeps_used = 0;
  bool converged = false;
  double canonical_deviation = 0;
  DmrgCarryover carry;
};

namespace detail {

inline RTensor boundary_env(const std::vector<double>& bvec) {
  RTensor t({1, bvec.size(), 1});
  for (std::size_t m = 0; m < bvec.size(); ++m) t(0, m, 0) = bvec[m];
  return t;
}

/// L' = sum L A W conj(A); A carries the ket physical leg (s_in of W).
inline RTensor grow_left(const RTensor& l, const RTensor& a, const RTensor& w) {
  auto t1 = contract(l, a, {{0, 0}});                 // (w, lb, s_in, k)
  auto t2 = contract(t1, w, {{0, 0}, {2, 2}});        // (lb, k, s_out, w')
  return contract(t2, a.conjugate(), {{0, 0}, {2, 1}});  // (k, w', k')
}

inline RTensor grow_right(const RTensor& r, const RTensor& b, const RTensor& w) {
  auto t1 = contract(b, r, {{2, 0}});                 // (k, s_in, w, rb)
  auto t2 = contract(t1, w, {{1, 2}, {2, 3}});        // (k, rb, w', s_out)
  return contract(t2, b.conjugate(), {{1, 2}, {3, 1}});  // (k, w', k')
}

/// H_eff applied to theta(l, s1, s2, r).
inline RTensor apply_heff(const RTensor& l, const RTensor& r, const RTensor& wa,
                          const RTensor& wb, const RTensor& theta) {
  auto t1 = contract(l, theta, {{0, 0}});            // (w, lb, s1, s2, r)
  auto t2 = contract(t1, wa, {{0, 0}, {2, 2}});      // (lb, s2, r, s1', w2)
  auto t3 = contract(t2, wb, {{4, 0}, {1, 2}});      // (lb, r, s1', s2', w3)
  auto t4 = contract(t3, r, {{1, 0}, {4, 1}});       // (lb, s1', s2', rb)
  return t4;
}

inline RTensor random_theta(std::size_t l, std::size_t d, std::size_t r,
                            std::mt19937_64& rng) {
  RTensor t({l, d, d, r});
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = g(rng);
  return t;
}

/// McCulloch prediction: rotate the centre through both current site tensors
/// and glue with the inverse of the previous bond spectrum.
inline RTensor predict_theta(const RTensor& a, const RTensor& b,
                             const std::vector<double>& lambda_cur,
                             const std::vector<double>& lambda_prev) {
  const std::size_t d = a.dim(1);
  const std::size_t k = lambda_cur.size();
  const std::size_t l = a.dim(0), r = b.dim(2);

  auto x = scale_axis(b, 0, lambda_cur).reshape({k * d, r});
  auto xs = svd_truncate(x, std::min(k * d, r), 0.0);
  auto a_next = xs.U.reshape({k, d, xs.S.size()});
  auto cx = scale_axis(xs.Vh, 0, xs.S);  // (m, r)

  auto y = scale_axis(a, 2, lambda_cur).reshape({l, d * k});
  auto ys = svd_truncate(y, std::min(l, d * k), 0.0);
  auto b_next = ys.Vh.reshape({ys.S.size(), d, k});
  auto cy = scale_axis(ys.U, 1, ys.S);  // (l, m')

  auto core = contract(scale_axis(cx, 1, regularized_inverse(lambda_prev)), cy, {{1, 0}});
  auto t = contract(a_next, core, {{2, 0}});
  return contract(t, b_next, {{2, 0}});  // (k, d, d, k)
}

}  // namespace detail

/// Infinite-size DMRG on a translation-invariant two-site-cell MPO: solve the
/// two-site effective problem with Lanczos, truncate by SVD, absorb the new
/// sites into the environments, repeat until the entanglement entropy settles.
/// Non-convergence within max_sweeps is reported through the flag, never as an
/// exception. Deterministic for a fixed config including seed.
inline DmrgResult idmrg_run(const MPOperator<double>& h, const DmrgConfig& cfg,
                            const DmrgCarryover* warm = nullptr) {
  cfg.validate();
  if (!h.uniform) throw std::invalid_argument("idmrg_run: uniform MPO required");
  const std::size_t d = h.phys_dim();
  const RTensor& w = h.site(0);
  std::mt19937_64 rng(cfg.seed);

  RTensor lenv, renv, a_cur, b_cur, theta;
  std::vector<double> lambda_cur, lambda_prev;
  bool have_state = false;

  if (warm && warm->valid) {
    lenv = warm->left_env;
    renv = warm->right_env;
    a_cur = warm->a_cur;
    b_cur = warm->b_cur;
    lambda_cur = warm->lambda_cur;
    lambda_prev = warm->lambda_prev;
    have_state = true;
  } else {
    lenv = detail::boundary_env(h.left_bvec);
    renv = detail::boundary_env(h.right_bvec);
    lambda_prev = {1.0};
  }

  const std::size_t warmup = have_state ? 0 : cfg.warmup_sweeps;

  DmrgResult out;
  double e_total_prev = 0, e_site_prev = 0, entropy_prev = -1;
  bool have_prev_total = false, have_prev_site = false;
  std::size_t backstop_hits = 0;  // energy stalls long before the entropy settles;
                                  // only a sustained stall may terminate the run
  if (have_state) entropy_prev = entanglement_entropy(warm->lambda_cur);

  std::size_t sweep = 0;
  for (; sweep < cfg.max_sweeps; ++sweep) {
    const std::size_t chi_l = lenv.dim(0), chi_r = renv.dim(0);

    // trial two-site wavefunction
    if (have_state) {
      theta = detail::predict_theta(a_cur, b_cur, lambda_cur, lambda_prev);
      if (!(theta.norm() > 1e-14)) theta = detail::random_theta(chi_l, d, chi_r, rng);
    } else {
      switch (cfg.initial_state) {
        case InitialState::random:
          theta = detail::random_theta(chi_l, d, chi_r, rng);
          break;
        case InitialState::product: {
          theta = RTensor({chi_l, d, d, chi_r});
          double n2 = 0;
          for (double v : cfg.product_vector) n2 += v * v;
          for (std::size_t s1 = 0; s1 < d; ++s1)
            for (std::size_t s2 = 0; s2 < d; ++s2)
              theta(0, s1, s2, 0) = cfg.product_vector[s1] * cfg.product_vector[s2] / n2;
          break;
        }
        case InitialState::neel_like:
          theta = RTensor({chi_l, d, d, chi_r});
          theta(0, 0, d - 1, 0) = 1.0;
          break;
      }
    }

    std::vector<double> start(theta.data(), theta.data() + theta.size());
    auto apply = [&](const std::vector<double>& in, std::vector<double>& outv) {
      RTensor tin({chi_l, d, d, chi_r}, in);
      auto ht = detail::apply_heff(lenv, renv, w, w, tin);
      outv.assign(ht.data(), ht.data() + ht.size());
    };
    auto lz = lanczos_ground<double>(apply, start, cfg.lanczos_tol, cfg.lanczos_max_iter);
    const double e_total = lz.value;
    theta = RTensor({chi_l, d, d, chi_r}, std::move(lz.vector));

    // truncate; during warmup the bond is clamped to chi=1 so a degenerate
    // ground manifold collapses onto one deterministic branch
    const std::size_t chi_now = sweep < warmup ? 1 : cfg.chi_max;
    auto svd = svd_truncate(theta.reshape({chi_l * d, d * chi_r}), chi_now, cfg.svd_cutoff);
    const std::size_t k = svd.S.size();
    double n2 = 0;
    for (double s : svd.S) n2 += s * s;
    std::vector<double> lambda_new(k);
    for (std::size_t i = 0; i < k; ++i) lambda_new[i] = svd.S[i] / std::sqrt(n2);
    out.truncation_error = svd.truncation_error;

    auto a_new = svd.U.reshape({chi_l, d, k});
    auto b_new = svd.Vh.reshape({k, d, chi_r});
    lenv = detail::grow_left(lenv, a_new, w);
    renv = detail::grow_right(renv, b_new, w);
    lambda_prev = have_state ? lambda_cur : std::vector<double>{1.0};
    if (!have_state && chi_l == 1) lambda_prev = {1.0};
    lambda_cur = lambda_new;
    a_cur = a_new;
    b_cur = b_new;
    have_state = true;

    const double entropy = entanglement_entropy(lambda_cur);
    out.entropy_history.push_back(entropy);

    double e_site = have_prev_total ? 0.5 * (e_total - e_total_prev) : 0.5 * e_total;
    double de_site = have_prev_site ? std::abs(e_site - e_site_prev) : 1.0;
    double rel;
    if (entropy_prev < 0) {
      rel = 1.0;
    } else {
      double ds = std::abs(entropy - entropy_prev);
      rel = ds <= 1e-14 ? 0.0 : ds / std::max(entropy, 1e-12);
    }
    out.last_entropy_rel_diff = rel;
    out.energy_per_site = e_site;

    if (cfg.log)
      (*cfg.log) << "iter=" << sweep + 1 << " chi=" << k << " E=" << e_total
                 << " e_site=" << e_site << " entropy=" << entropy << " rel=" << rel
                 << " trunc=" << out.truncation_error << "\n";

    const bool past_warmup = sweep + 1 > warmup + cfg.min_sweeps;
    const bool entropy_ok = rel <= cfg.entropy_rel_tol;
    const bool trunc_ok = out.truncation_error <= cfg.trunc_tol;
    if (past_warmup && entropy_ok && trunc_ok) {
      out.converged = true;
      ++sweep;
      break;
    }
    backstop_hits = (have_prev_site && de_site <= cfg.energy_abs_tol) ? backstop_hits + 1 : 0;
    if (past_warmup && backstop_hits >= 10) {
      out.converged = entropy_ok && trunc_ok;
      ++sweep;
      break;
    }

    entropy_prev = entropy;
    e_total_prev = e_total;
    have_prev_total = true;
    e_site_prev = e_site;
    have_prev_site = true;
  }
  out.sweeps_used = sweep;

  // Gamma-Lambda extraction and regauge
  auto linv = regularized_inverse(lambda_prev);
  CanonicalIMPS<double> state;
  state.gamma_a = detail::scale_axis(a_cur, 0, linv);
  state.gamma_b = detail::scale_axis(b_cur, 2, linv);
  state.lambda_a = lambda_cur;
  state.lambda_b = lambda_prev;

  CanonicalizeOptions copt;
  copt.max_iter = cfg.regauge_max_iter;
  out.state = canonicalize(state, copt);
  out.canonical_deviation = check_canonical(out.state).max_deviation;

  out.carry.left_env = lenv;
  out.carry.right_env = renv;
  out.carry.a_cur = a_cur;
  out.carry.b_cur = b_cur;
  out.carry.lambda_cur = lambda_cur;
  out.carry.lambda_prev = lambda_prev;
  out.carry.valid = true;
  return out;
}

}  // namespace bellchain
