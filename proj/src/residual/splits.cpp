#include "mkd5/splits.hpp"

#include <memory>
#include <vector>

#include "mkd5/flows.hpp"
#include "mkd5/tube.hpp"

namespace mkd5 {

namespace {

expr_ptr vec_of(const expr_ptr& s, const vec5& pol) {
  std::array<expr_ptr, 5> comps;
  for (int i = 0; i < 5; ++i) comps[i] = scale(pol[i], s);
  return from_components(comps);
}

expr_ptr dot_grad(const vec5& dir, const expr_ptr& g) {
  expr_ptr acc;
  for (int c = 0; c < 5; ++c) {
    expr_ptr term = scale(dir[c], g->dx(c));
    acc = acc ? acc + term : term;
  }
  return acc;
}

// minor-part accumulators of one tube family; pol picks xi1 or xi2
struct carrier_sums {
  expr_ptr e2, e3, e4_scalar;

  void add(const std::shared_ptr<const tube_source>& tube,
           const expr_ptr& amp, bool pol_xi2) {
    const anchored_frame& f = tube->frame();
    const vec5 pol = pol_xi2 ? f.xi2 : f.xi1;
    const double n = tube->n_factor();
    expr_ptr env = cached(
        multiply(amp, jet_scalar(std::make_shared<envelope_source>(tube))));
    expr_ptr sn = trig(n, f.xi, tube->anchor(), false);
    expr_ptr cs = trig(n, f.xi, tube->anchor(), true);
    expr_ptr t2 = vec_of(multiply(laplacian(env), sn), pol);
    expr_ptr t3 = vec_of(multiply(dot_grad(f.xi, env), cs), pol);
    expr_ptr t4 = multiply(dot_grad(pol, env), sn);
    e2 = e2 ? e2 + t2 : t2;
    e3 = e3 ? e3 + t3 : t3;
    e4_scalar = e4_scalar ? e4_scalar + t4 : t4;
  }

  // assemble the three carrier-level minor parts with their N_k prefactors
  std::array<expr_ptr, 3> finish(double n_k) const {
    const double n2 = n_k * n_k;
    return {scale(-1.0 / n2, e2), scale(-2.0 / n_k, e3),
            scale(1.0 / n2, grad(e4_scalar))};
  }
};

}  // namespace

principal_minor_split split_principal_minor(const cascade_level& lv) {
  principal_minor_split s;
  s.k = lv.k;
  s.n_k = lv.n_k;
  const double lam = lv.n_k * lv.n_k;

  expr_ptr raw_u = cached(lv.psi_raw + lv.theta_raw);
  expr_ptr pot_u = cached(lv.psi + lv.theta);
  s.v_p = time_decay(lam, scale(lam, raw_u));
  s.b_p = time_decay(lam, scale(lam, lv.phi_raw));
  s.v_total = time_decay(lam, curl_curl(pot_u));
  s.b_total = time_decay(lam, curl_curl(lv.phi));

  s.v_e[0] = time_decay(lam, curl_curl(pot_u - raw_u));
  s.b_e[0] = time_decay(lam, curl_curl(lv.phi - lv.phi_raw));

  carrier_sums vu, vb, bb;
  for (std::size_t i = 0; i < lv.u_tubes.size(); ++i)
    vu.add(lv.u_tubes[i], lv.a_amp[i], false);
  for (std::size_t i = 0; i < lv.b_tubes.size(); ++i) {
    vb.add(lv.b_tubes[i], lv.b_amp[i], true);   // theta carries xi2
    bb.add(lv.b_tubes[i], lv.b_amp[i], false);  // phi carries xi1
  }
  auto vu_parts = vu.finish(lv.n_k);
  auto vb_parts = vb.finish(lv.n_k);
  auto bb_parts = bb.finish(lv.n_k);
  for (int j = 0; j < 3; ++j) {
    s.v_e[j + 1] = time_decay(lam, vu_parts[j] + vb_parts[j]);
    s.b_e[j + 1] = time_decay(lam, bb_parts[j]);
  }
  return s;
}

nonlinear_split make_nonlinear_split(const principal_minor_split& s,
                                     const cascade_level& lv) {
  nonlinear_split ns;
  ns.k = lv.k;
  ns.n_k = lv.n_k;
  level_stacks stacks = make_level_stacks(lv);
  ns.n1 = stacks.n1;
  ns.m1 = stacks.m1;

  const double lam2 = 2.0 * lv.n_k * lv.n_k;
  const double n4 = lv.n_k * lv.n_k * lv.n_k * lv.n_k;

  // h = phi^2 sin^2 - mean, rebuilt from the tube scalar (N^-2 phi sin)
  auto osc = [&](const std::shared_ptr<const tube_source>& tube, double mean) {
    expr_ptr g = cached(jet_scalar(tube));
    return scale(n4, multiply(g, g)) - const_scalar(mean);
  };

  expr_ptr n2_acc, m2_acc;
  for (std::size_t i = 0; i < lv.u_tubes.size(); ++i) {
    const anchored_frame& f = lv.u_tubes[i]->frame();
    mat5 p{};
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) p[a][b] = f.xi1[a] * f.xi1[b];
    expr_ptr term =
        multiply(multiply(lv.a_amp2[i], osc(lv.u_tubes[i], lv.a_mean[i])),
                 const_tensor(rank_t::sym_tensor, p));
    n2_acc = n2_acc ? n2_acc + term : term;
  }
  for (std::size_t i = 0; i < lv.b_tubes.size(); ++i) {
    const anchored_frame& f = lv.b_tubes[i]->frame();
    mat5 sym{}, skw{};
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        sym[a][b] = f.xi2[a] * f.xi2[b] - f.xi1[a] * f.xi1[b];
        skw[a][b] = f.xi2[a] * f.xi1[b] - f.xi1[a] * f.xi2[b];
      }
    expr_ptr h =
        cached(multiply(lv.b_amp2[i], osc(lv.b_tubes[i], lv.b_mean[i])));
    expr_ptr ts = multiply(h, const_tensor(rank_t::sym_tensor, sym));
    expr_ptr tk = multiply(h, const_tensor(rank_t::skew_tensor, skw));
    n2_acc = n2_acc ? n2_acc + ts : ts;
    m2_acc = m2_acc ? m2_acc + tk : tk;
  }
  ns.n2 = time_decay(lam2, n2_acc);
  ns.m2 = time_decay(lam2, m2_acc);

  expr_ptr vp = cached(s.v_p), bp = cached(s.b_p);
  std::array<std::array<expr_ptr, 5>, 5> es, ek;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      es[i][j] = multiply(component(vp, i), component(vp, j)) -
                 multiply(component(bp, i), component(bp, j));
      ek[i][j] = multiply(component(vp, i), component(bp, j)) -
                 multiply(component(bp, i), component(vp, j));
    }
  ns.prod_sym = tensor_from_entries(rank_t::sym_tensor, es);
  ns.prod_skew = tensor_from_entries(rank_t::skew_tensor, ek);
  return ns;
}

}  // namespace mkd5
