#include "mkd5/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "mkd5/la.hpp"

namespace mkd5 {

namespace {

double ladder_n(const ladder_t& ld, int k) {
  if (!ld.has(k))
    throw std::logic_error("residual assembly: ladder misses level " +
                           std::to_string(k));
  return static_cast<double>(ld.N[k]);
}

std::vector<cplx> zero_spec(const grid& g) {
  return std::vector<cplx>(g.nspec(), cplx{0.0, 0.0});
}

std::array<std::vector<double>, 5> to_nodal(const grid& g, const spec_vec& f) {
  std::array<std::vector<double>, 5> r;
  for (int j = 0; j < 5; ++j) r[j] = g.ifft(f[j]);
  return r;
}

// acc += s * term, adopting term's storage where acc is still empty
void axpy_packed(packed_spec& acc, double s, packed_spec&& term) {
  if (acc.empty()) acc.resize(term.size());
  for (std::size_t c = 0; c < term.size(); ++c) {
    if (term[c].empty()) continue;
    if (acc[c].empty()) {
      acc[c] = std::move(term[c]);
      for (cplx& v : acc[c]) v *= s;
    } else {
      for (std::size_t i = 0; i < acc[c].size(); ++i)
        acc[c][i] += s * term[c][i];
    }
  }
}

}  // namespace

const char* part_suffix(residual_part p) {
  switch (p) {
    case residual_part::r1: return "1";
    case residual_part::r2: return "2";
    case residual_part::r3: return "3";
    case residual_part::r4: return "4";
    case residual_part::rh: return "h";
    case residual_part::rc: return "c";
  }
  return "?";
}

grid_residual::grid_residual(const grid_flow_assembler& flows, int parity)
    : flows_(flows), parity_(parity) {
  if (parity != 1 && parity != 2)
    throw std::invalid_argument("residual parity must be 1 or 2");
}

spec_vec grid_residual::principal0(int k, bool magnetic) const {
  const grid_cascade& gc = flows_.cascade();
  spec_vec p = gc.load_flow_potential(k, magnetic, false);
  const double nk = gc.level(k).n_k;
  const double nk2 = nk * nk;
  for (int j = 0; j < 5; ++j)
    for (cplx& v : p[j]) v *= nk2;
  return p;
}

mat5 grid_residual::level0_constant(bool magnetic) const {
  const grid_cascade& gc = flows_.cascade();
  const grid_level_t& lv = gc.level(0);
  const geometry_bundle& geo = gc.geometry();
  const double n02 = lv.n_k * lv.n_k;
  mat5 c{};
  if (!magnetic) {
    for (const anchored_frame& f : geo.U)
      c = c + (lv.a_mean * n02) * outer(f.xi1, f.xi1);
    for (const anchored_frame& f : geo.B)
      c = c + (lv.b_mean * n02) * (outer(f.xi2, f.xi2) - outer(f.xi1, f.xi1));
  } else {
    for (const anchored_frame& f : geo.B)
      c = c + (lv.b_mean * n02) * (outer(f.xi2, f.xi1) - outer(f.xi1, f.xi2));
  }
  return c;
}

// ------------------------------------------------------- per-level tensors

namespace {

// packed weight and index pair of one component
struct pair_ref {
  int i, j;
  double w;
};

pair_ref packed_pair(bool magnetic, int c) {
  if (magnetic) {
    auto [i, j] = skew_idx.ij[c];
    return {i, j, sqrt2};
  }
  auto [i, j] = sym_idx.ij[c];
  return {i, j, i == j ? 1.0 : sqrt2};
}

int packed_dim(bool magnetic) { return magnetic ? skew_dim : sym_dim; }

// (N_k^2 + Lap) of the level-k tensor potential: the heat mismatch of S_k/T_k
packed_spec heat_level_tensor_impl(const grid_cascade& gc, int k,
                                   bool magnetic) {
  const grid& g = gc.g();
  const int dim = packed_dim(magnetic);
  const double nk = gc.level(k).n_k;
  const double lam = nk * nk;
  spec_vec pot = gc.load_flow_potential(k, magnetic, true);
  packed_spec out(dim);
  for (int c = 0; c < dim; ++c) {
    std::vector<cplx> comp =
        magnetic ? dskew_comp(g, pot, c) : dsym_comp(g, pot, c);
    g.for_modes([&](std::size_t idx, const double*, double m2) {
      comp[idx] *= lam - m2;
    });
    out[c] = std::move(comp);
  }
  return out;
}

// Lap Sbar_k / Lap Tbar_k via the level k+1 amplitude stacks
packed_spec averaged_level_tensor_impl(const grid_cascade& gc, int k,
                                       bool magnetic) {
  const grid& g = gc.g();
  const int dim = packed_dim(magnetic);
  const grid_level_t& up = gc.level(k + 1);
  const double fac = 0.5 / (up.n_k * up.n_k);
  std::vector<std::vector<double>> stack;
  if (magnetic) {
    stack = gc.load(up.tb);
  } else {
    stack = gc.load(up.sa);
    auto sb = gc.load(up.sb_sym);
    for (int c = 0; c < dim; ++c) {
      for (std::size_t i = 0; i < stack[c].size(); ++i)
        stack[c][i] += sb[c][i];
      sb[c] = {};
    }
  }
  packed_spec out(dim);
  for (int c = 0; c < dim; ++c) {
    std::vector<double> comp = std::move(stack[c]);
    for (double& x : comp) x *= fac;
    std::vector<cplx> ch = g.fft(comp);
    g.for_modes([&](std::size_t idx, const double*, double m2) {
      ch[idx] *= -m2;
    });
    out[c] = std::move(ch);
  }
  return out;
}

}  // namespace

packed_spec grid_residual::heat_multiplier_part(bool magnetic,
                                                double t) const {
  packed_spec out(packed_dim(magnetic));
  for (int k = 0; k <= kmax(); ++k) {
    if (!heat_level(k)) continue;
    const double nk = flows_.cascade().level(k).n_k;
    axpy_packed(out, std::exp(-nk * nk * t),
                heat_level_tensor_impl(flows_.cascade(), k, magnetic));
  }
  return out;
}

packed_spec grid_residual::averaged_laplacian_part(bool magnetic,
                                                   double t) const {
  packed_spec out(packed_dim(magnetic));
  for (int k = 0; k < kmax(); ++k) {
    if (heat_level(k)) continue;
    const double nk1 = flows_.cascade().level(k + 1).n_k;
    axpy_packed(out, std::exp(-2.0 * nk1 * nk1 * t),
                averaged_level_tensor_impl(flows_.cascade(), k, magnetic));
  }
  return out;
}

// the level-0 antidivergence term, constructed as written: constant mean
// tensor -> divergence -> antidivergence.  The divergence of a constant
// vanishes, so every component comes back numerically zero; the part is kept
// and verified rather than dropped.
packed_spec grid_residual::level0_antidiv_part(bool magnetic, double t) const {
  const int dim = packed_dim(magnetic);
  if (!heat_level(0)) return packed_spec(dim);
  const grid& g = flows_.cascade().g();
  const mat5 cmat = level0_constant(magnetic);
  const double nreal = static_cast<double>(g.nreal());
  auto const_comp = [&](int c) {
    const pair_ref pr = packed_pair(magnetic, c);
    std::vector<cplx> comp = zero_spec(g);
    comp[0] = cplx{pr.w * cmat[pr.i][pr.j] * nreal, 0.0};
    return comp;
  };
  spec_vec d = magnetic ? div_skew_packed_spec(g, const_comp)
                        : div_sym_packed_spec(g, const_comp);
  const double n0 = flows_.cascade().level(0).n_k;
  const double dec = std::exp(-2.0 * n0 * n0 * t);
  packed_spec out(dim);
  for (int c = 0; c < dim; ++c) {
    std::vector<cplx> comp = magnetic ? antidiv_skew_comp(g, d, c)
                                      : antidiv_sym_comp(g, d, c);
    for (cplx& v : comp) v *= -dec;
    out[c] = std::move(comp);
  }
  return out;
}

// subtractive nonlinear remainder at time t: the full candidate products are
// removed and the principal self-interactions of the heat levels restored
packed_spec grid_residual::product_part(bool magnetic, double t) const {
  const grid& g = flows_.cascade().g();
  const int dim = packed_dim(magnetic);
  const std::size_t nn = g.nreal();
  auto v = to_nodal(g, flows_.velocity(parity_, t));
  auto b = to_nodal(g, flows_.magnetic(parity_, t));
  std::vector<std::array<std::vector<double>, 5>> vps, bps;
  for (int k = 0; k <= kmax(); ++k) {
    if (!heat_level(k)) continue;
    const double nk = flows_.cascade().level(k).n_k;
    const double dec = std::exp(-nk * nk * t);
    auto vp = to_nodal(g, principal0(k, false));
    auto bp = to_nodal(g, principal0(k, true));
    for (int j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < nn; ++i) {
        vp[j][i] *= dec;
        bp[j][i] *= dec;
      }
    vps.push_back(std::move(vp));
    bps.push_back(std::move(bp));
  }
  packed_spec out(dim);
  std::vector<double> comp(nn);
  for (int c = 0; c < dim; ++c) {
    const pair_ref pr = packed_pair(magnetic, c);
    for (std::size_t i = 0; i < nn; ++i) {
      double x;
      if (!magnetic)
        x = -v[pr.i][i] * v[pr.j][i] + b[pr.i][i] * b[pr.j][i];
      else
        x = -v[pr.i][i] * b[pr.j][i] + b[pr.i][i] * v[pr.j][i];
      for (std::size_t q = 0; q < vps.size(); ++q) {
        if (!magnetic)
          x += vps[q][pr.i][i] * vps[q][pr.j][i] -
               bps[q][pr.i][i] * bps[q][pr.j][i];
        else
          x += vps[q][pr.i][i] * bps[q][pr.j][i] -
               bps[q][pr.i][i] * vps[q][pr.j][i];
      }
      comp[i] = pr.w * x;
    }
    out[c] = g.fft(comp);
  }
  return out;
}

// div of the mean-free oscillation tensor of heat level k at t = 0
spec_vec grid_residual::oscillation_div0(int k, bool magnetic) const {
  const grid_cascade& gc = flows_.cascade();
  const grid& g = gc.g();
  const std::size_t nn = g.nreal();
  auto vp = to_nodal(g, principal0(k, false));
  auto bp = to_nodal(g, principal0(k, true));
  std::vector<std::vector<double>> stack;
  mat5 cmat{};
  if (k == 0) {
    cmat = level0_constant(magnetic);
  } else {
    const grid_level_t& lv = gc.level(k);
    if (magnetic) {
      stack = gc.load(lv.tb);
    } else {
      stack = gc.load(lv.sa);
      auto sb = gc.load(lv.sb_sym);
      for (std::size_t c = 0; c < stack.size(); ++c) {
        for (std::size_t i = 0; i < stack[c].size(); ++i)
          stack[c][i] += sb[c][i];
        sb[c] = {};
      }
    }
  }
  auto comp_at = [&](int c) {
    const pair_ref pr = packed_pair(magnetic, c);
    std::vector<double> comp(nn);
    const double cc = pr.w * cmat[pr.i][pr.j];
    const std::vector<double>* sc = stack.empty() ? nullptr : &stack[c];
    for (std::size_t i = 0; i < nn; ++i) {
      double x;
      if (!magnetic)
        x = vp[pr.i][i] * vp[pr.j][i] - bp[pr.i][i] * bp[pr.j][i];
      else
        x = vp[pr.i][i] * bp[pr.j][i] - bp[pr.i][i] * vp[pr.j][i];
      comp[i] = pr.w * x - (sc ? (*sc)[i] : cc);
    }
    return comp;
  };
  return magnetic ? div_skew_packed(g, comp_at) : div_sym_packed(g, comp_at);
}

packed_spec grid_residual::oscillation_part(bool magnetic, double t) const {
  const grid& g = flows_.cascade().g();
  const int dim = packed_dim(magnetic);
  packed_spec out(dim);
  for (int k = 0; k <= kmax(); ++k) {
    if (!heat_level(k)) continue;
    const spec_vec d = oscillation_div0(k, magnetic);
    const double nk = flows_.cascade().level(k).n_k;
    const double dec = std::exp(-2.0 * nk * nk * t);
    for (int c = 0; c < dim; ++c) {
      std::vector<cplx> comp = magnetic ? antidiv_skew_comp(g, d, c)
                                        : antidiv_sym_comp(g, d, c);
      if (out[c].empty()) out[c] = zero_spec(g);
      for (std::size_t i = 0; i < comp.size(); ++i)
        out[c][i] -= dec * comp[i];
    }
  }
  return out;
}

// closure of the top averaged level: the antidivergence of its exact
// evolution mismatch (2 N_{kmax+1}^2 + Lap) v_kmax(0)
packed_spec grid_residual::closure_part(bool magnetic, double t) const {
  const int dim = packed_dim(magnetic);
  if (!has_closure()) return packed_spec(dim);
  const grid& g = flows_.cascade().g();
  const int top = kmax();
  const double n1 = ladder_n(flows_.cascade().ladder(), top + 1);
  const double lam = 2.0 * n1 * n1;
  const double dec = std::exp(-lam * t);
  spec_vec f = magnetic ? flows_.b0_level(top) : flows_.v0_level(top);
  g.for_modes([&](std::size_t idx, const double*, double m2) {
    const double mult = lam - m2;
    for (int j = 0; j < 5; ++j) f[j][idx] *= mult;
  });
  packed_spec out(dim);
  for (int c = 0; c < dim; ++c) {
    std::vector<cplx> comp = magnetic ? antidiv_skew_comp(g, f, c)
                                      : antidiv_sym_comp(g, f, c);
    for (cplx& v : comp) v *= dec;
    out[c] = std::move(comp);
  }
  return out;
}

packed_spec grid_residual::f_part(residual_part p, double t) const {
  switch (p) {
    case residual_part::r1: return heat_multiplier_part(false, t);
    case residual_part::r2: return averaged_laplacian_part(false, t);
    case residual_part::r3: return level0_antidiv_part(false, t);
    case residual_part::r4: return product_part(false, t);
    case residual_part::rh: return oscillation_part(false, t);
    case residual_part::rc: return closure_part(false, t);
  }
  throw std::logic_error("unknown residual part");
}

packed_spec grid_residual::g_part(residual_part p, double t) const {
  switch (p) {
    case residual_part::r1: return heat_multiplier_part(true, t);
    case residual_part::r2: return averaged_laplacian_part(true, t);
    case residual_part::r3: return level0_antidiv_part(true, t);
    case residual_part::r4: return product_part(true, t);
    case residual_part::rh: return oscillation_part(true, t);
    case residual_part::rc: return closure_part(true, t);
  }
  throw std::logic_error("unknown residual part");
}

spec_vec grid_residual::pdiv_f(residual_part p, double t) const {
  const grid& g = flows_.cascade().g();
  packed_spec part = f_part(p, t);
  spec_vec d = div_sym_packed_spec(g, [&](int c) {
    if (part[c].empty()) return zero_spec(g);
    return std::move(part[c]);
  });
  leray(g, d);
  return d;
}

spec_vec grid_residual::div_g(residual_part p, double t) const {
  const grid& g = flows_.cascade().g();
  packed_spec part = g_part(p, t);
  return div_skew_packed_spec(g, [&](int c) {
    if (part[c].empty()) return zero_spec(g);
    return std::move(part[c]);
  });
}

spec_vec grid_residual::evolution_term(bool magnetic, double t) const {
  const grid& g = flows_.cascade().g();
  spec_vec acc;
  for (int j = 0; j < 5; ++j) acc[j] = zero_spec(g);
  for (int k = 0; k <= kmax(); ++k) {
    const bool heat = heat_level(k);
    double lam;
    if (heat) {
      const double nk = flows_.cascade().level(k).n_k;
      lam = nk * nk;
    } else {
      const double nk1 = ladder_n(flows_.cascade().ladder(), k + 1);
      lam = 2.0 * nk1 * nk1;
    }
    const double dec = std::exp(-lam * t);
    spec_vec lvl;
    if (heat)
      lvl = magnetic ? flows_.b0_level(k) : flows_.v0_level(k);
    else
      lvl = magnetic ? flows_.bbar0_level(k) : flows_.vbar0_level(k);
    g.for_modes([&](std::size_t idx, const double*, double m2) {
      const double mult = dec * (m2 - lam);
      for (int j = 0; j < 5; ++j) acc[j][idx] += mult * lvl[j][idx];
    });
  }
  return acc;
}

std::vector<residual_basis_term> grid_residual::basis(bool magnetic) const {
  const grid_cascade& gc = flows_.cascade();
  std::vector<residual_basis_term> out;
  auto eff_lambda = [&](int k) {
    if (heat_level(k)) {
      const double nk = gc.level(k).n_k;
      return nk * nk;
    }
    const double nk1 = ladder_n(gc.ladder(), k + 1);
    return 2.0 * nk1 * nk1;
  };
  for (int k = 0; k <= kmax(); ++k) {
    const double nk = gc.level(k).n_k;
    if (heat_level(k)) {
      out.push_back({residual_part::r1, k, -1, nk * nk, [this, k, magnetic] {
                       return heat_level_tensor_impl(flows_.cascade(), k,
                                                     magnetic);
                     }});
      out.push_back({residual_part::rh, k, -1, 2.0 * nk * nk,
                     [this, k, magnetic] {
                       return oscillation_level_tensor(k, magnetic);
                     }});
      out.push_back({residual_part::r4, k, -1, 2.0 * nk * nk,
                     [this, k, magnetic] {
                       return principal_pair_tensor(k, magnetic);
                     }});
    } else if (k < kmax()) {
      const double nk1 = gc.level(k + 1).n_k;
      out.push_back({residual_part::r2, k, -1, 2.0 * nk1 * nk1,
                     [this, k, magnetic] {
                       return averaged_level_tensor_impl(flows_.cascade(), k,
                                                         magnetic);
                     }});
    }
  }
  if (heat_level(0)) {
    const double n0 = gc.level(0).n_k;
    out.push_back({residual_part::r3, 0, -1, 2.0 * n0 * n0, [this, magnetic] {
                     return level0_antidiv_part(magnetic, 0.0);
                   }});
  }
  for (int k = 0; k <= kmax(); ++k)
    for (int k2 = k; k2 <= kmax(); ++k2)
      out.push_back({residual_part::r4, k, k2, eff_lambda(k) + eff_lambda(k2),
                     [this, k, k2, magnetic] {
                       return product_pair_tensor(k, k2, magnetic);
                     }});
  if (has_closure()) {
    const double n1 = ladder_n(gc.ladder(), kmax() + 1);
    out.push_back({residual_part::rc, kmax(), -1, 2.0 * n1 * n1,
                   [this, magnetic] { return closure_part(magnetic, 0.0); }});
  }
  return out;
}

packed_spec grid_residual::oscillation_level_tensor(int k,
                                                    bool magnetic) const {
  const grid& g = flows_.cascade().g();
  const int dim = packed_dim(magnetic);
  const spec_vec d = oscillation_div0(k, magnetic);
  packed_spec out(dim);
  for (int c = 0; c < dim; ++c) {
    std::vector<cplx> comp = magnetic ? antidiv_skew_comp(g, d, c)
                                      : antidiv_sym_comp(g, d, c);
    for (cplx& v : comp) v = -v;
    out[c] = std::move(comp);
  }
  return out;
}

packed_spec grid_residual::principal_pair_tensor(int k, bool magnetic) const {
  const grid& g = flows_.cascade().g();
  const int dim = packed_dim(magnetic);
  const std::size_t nn = g.nreal();
  auto vp = to_nodal(g, principal0(k, false));
  auto bp = to_nodal(g, principal0(k, true));
  packed_spec out(dim);
  std::vector<double> comp(nn);
  for (int c = 0; c < dim; ++c) {
    const pair_ref pr = packed_pair(magnetic, c);
    for (std::size_t i = 0; i < nn; ++i) {
      double x;
      if (!magnetic)
        x = vp[pr.i][i] * vp[pr.j][i] - bp[pr.i][i] * bp[pr.j][i];
      else
        x = vp[pr.i][i] * bp[pr.j][i] - bp[pr.i][i] * vp[pr.j][i];
      comp[i] = pr.w * x;
    }
    out[c] = g.fft(comp);
  }
  return out;
}

packed_spec grid_residual::product_pair_tensor(int k, int k2,
                                               bool magnetic) const {
  const grid& g = flows_.cascade().g();
  const int dim = packed_dim(magnetic);
  const std::size_t nn = g.nreal();
  auto level_v = [&](int kk) {
    return to_nodal(g, heat_level(kk) ? flows_.v0_level(kk)
                                      : flows_.vbar0_level(kk));
  };
  auto level_b = [&](int kk) {
    return to_nodal(g, heat_level(kk) ? flows_.b0_level(kk)
                                      : flows_.bbar0_level(kk));
  };
  auto va = level_v(k);
  auto ba = level_b(k);
  const bool same = (k2 == k);
  auto vb = same ? std::array<std::vector<double>, 5>{} : level_v(k2);
  auto bb = same ? std::array<std::vector<double>, 5>{} : level_b(k2);
  const auto& v2 = same ? va : vb;
  const auto& b2 = same ? ba : bb;
  packed_spec out(dim);
  std::vector<double> comp(nn);
  for (int c = 0; c < dim; ++c) {
    const pair_ref pr = packed_pair(magnetic, c);
    for (std::size_t i = 0; i < nn; ++i) {
      double x;
      if (!magnetic) {
        x = -va[pr.i][i] * v2[pr.j][i] + ba[pr.i][i] * b2[pr.j][i];
        if (!same)
          x += -v2[pr.i][i] * va[pr.j][i] + b2[pr.i][i] * ba[pr.j][i];
      } else {
        x = -va[pr.i][i] * b2[pr.j][i] + ba[pr.i][i] * v2[pr.j][i];
        if (!same)
          x += -v2[pr.i][i] * ba[pr.j][i] + b2[pr.i][i] * va[pr.j][i];
      }
      comp[i] = pr.w * x;
    }
    out[c] = g.fft(comp);
  }
  return out;
}

double grid_residual::sup_fro(const packed_spec& f) const {
  const grid& g = flows_.cascade().g();
  std::vector<double> acc;
  for (const auto& comp : f) {
    if (comp.empty()) continue;
    std::vector<double> nz = g.ifft(comp);
    if (acc.empty()) acc.assign(nz.size(), 0.0);
    for (std::size_t i = 0; i < nz.size(); ++i) acc[i] += nz[i] * nz[i];
  }
  double m = 0.0;
  for (double x : acc) m = std::max(m, x);
  return std::sqrt(m);
}

master_identity_report check_master_identity(const grid_flow_assembler& flows,
                                             int parity, double t) {
  const grid& g = flows.cascade().g();
  grid_residual res(flows, parity);
  master_identity_report rep;
  rep.parity = parity;
  rep.t = t;

  auto v = to_nodal(g, flows.velocity(parity, t));
  auto b = to_nodal(g, flows.magnetic(parity, t));
  const std::size_t nn = g.nreal();

  // P div(v (x) v - b (x) b): packed symmetric product, streamed
  spec_vec nl_v = div_sym_packed(g, [&](int c) {
    const pair_ref pr = packed_pair(false, c);
    std::vector<double> comp(nn);
    for (std::size_t i = 0; i < nn; ++i)
      comp[i] =
          pr.w * (v[pr.i][i] * v[pr.j][i] - b[pr.i][i] * b[pr.j][i]);
    return comp;
  });
  leray(g, nl_v);
  // div(v (x) b - b (x) v): packed skew product, no projection
  spec_vec nl_b = div_skew_packed(g, [&](int c) {
    const pair_ref pr = packed_pair(true, c);
    std::vector<double> comp(nn);
    for (std::size_t i = 0; i < nn; ++i)
      comp[i] =
          pr.w * (v[pr.i][i] * b[pr.j][i] - b[pr.i][i] * v[pr.j][i]);
    return comp;
  });
  for (int j = 0; j < 5; ++j) {
    v[j] = {};
    b[j] = {};
  }

  spec_vec evo_v = res.evolution_term(false, t);
  spec_vec evo_b = res.evolution_term(true, t);

  double scale_v = std::max(max_abs(g, evo_v), max_abs(g, nl_v));
  double scale_b = std::max(max_abs(g, evo_b), max_abs(g, nl_b));

  spec_vec acc_v = std::move(evo_v);
  spec_vec acc_b = std::move(evo_b);
  for (int j = 0; j < 5; ++j) {
    for (std::size_t i = 0; i < acc_v[j].size(); ++i) {
      acc_v[j][i] += nl_v[j][i];
      acc_b[j][i] += nl_b[j][i];
    }
    nl_v[j] = {};
    nl_b[j] = {};
  }

  int pi = 0;
  for (residual_part p : all_residual_parts) {
    spec_vec dv = res.pdiv_f(p, t);
    rep.f_div_sup[pi] = max_abs(g, dv);
    scale_v = std::max(scale_v, rep.f_div_sup[pi]);
    for (int j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < acc_v[j].size(); ++i)
        acc_v[j][i] += dv[j][i];
    spec_vec db = res.div_g(p, t);
    rep.g_div_sup[pi] = max_abs(g, db);
    scale_b = std::max(scale_b, rep.g_div_sup[pi]);
    for (int j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < acc_b[j].size(); ++i)
        acc_b[j][i] += db[j][i];
    ++pi;
  }

  rep.velocity_scale = scale_v;
  rep.magnetic_scale = scale_b;
  rep.velocity_rel = max_abs(g, acc_v) / scale_v;
  rep.magnetic_rel = max_abs(g, acc_b) / scale_b;
  return rep;
}

}  // namespace mkd5
