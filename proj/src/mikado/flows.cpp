#include "mkd5/flows.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "mkd5/la.hpp"
#include "mkd5/mkd5_io.hpp"

namespace mkd5 {

namespace {

mat5 rank_one(const vec5& a, const vec5& b) {
  mat5 m{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) m[i][j] = a[i] * b[j];
  return m;
}

mat5 sym_pair(const vec5& a, const vec5& b) {
  mat5 m = rank_one(a, a);
  const mat5 bb = rank_one(b, b);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) m[i][j] -= bb[i][j];
  return m;
}

mat5 wedge(const vec5& a, const vec5& b) {
  mat5 m = rank_one(a, b);
  const mat5 ba = rank_one(b, a);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) m[i][j] -= ba[i][j];
  return m;
}

// sum over one tube family of mean * amp^2 * (constant polarization tensor)
expr_ptr amp2_stack(
    const std::vector<std::shared_ptr<const tube_source>>& tubes,
    const std::vector<double>& means, const std::vector<expr_ptr>& amp2,
    rank_t rank, const std::function<mat5(const anchored_frame&)>& pol) {
  expr_ptr acc;
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    const mat5 m = pol(tubes[i]->frame());
    expr_ptr term =
        multiply(scale(means[i], amp2[i]), const_tensor(rank, m));
    acc = acc ? acc + term : term;
  }
  return acc;
}

double ladder_n(const ladder_t& ld, int k) {
  if (!ld.has(k))
    throw std::logic_error("flow assembly: ladder misses level " +
                           std::to_string(k));
  return static_cast<double>(ld.N[k]);
}

}  // namespace

level_flows make_level_flows(const cascade_level& lv) {
  level_flows lf;
  lf.k = lv.k;
  lf.n_k = lv.n_k;
  const double lam = lf.n_k * lf.n_k;
  expr_ptr pot_u = cached(lv.psi + lv.theta);
  lf.v0 = cached(curl_curl(pot_u));
  lf.b0 = cached(curl_curl(lv.phi));
  lf.v = time_decay(lam, lf.v0);
  lf.b = time_decay(lam, lf.b0);
  lf.s_tensor = time_decay(lam, cached(d_sym(pot_u)));
  lf.t_tensor = time_decay(lam, cached(d_skew(lv.phi)));
  return lf;
}

level_stacks make_level_stacks(const cascade_level& lv) {
  level_stacks ls;
  ls.k = lv.k;
  ls.n_k = lv.n_k;
  const double lam2 = 2.0 * ls.n_k * ls.n_k;
  ls.sa = cached(amp2_stack(
      lv.u_tubes, lv.a_mean, lv.a_amp2, rank_t::sym_tensor,
      [](const anchored_frame& f) { return rank_one(f.xi1, f.xi1); }));
  ls.sb_sym = cached(amp2_stack(
      lv.b_tubes, lv.b_mean, lv.b_amp2, rank_t::sym_tensor,
      [](const anchored_frame& f) { return sym_pair(f.xi2, f.xi1); }));
  ls.tb = cached(amp2_stack(
      lv.b_tubes, lv.b_mean, lv.b_amp2, rank_t::skew_tensor,
      [](const anchored_frame& f) { return wedge(f.xi2, f.xi1); }));
  ls.n1 = time_decay(lam2, ls.sa + ls.sb_sym);
  ls.m1 = time_decay(lam2, ls.tb);
  ls.sbar = scale(1.0 / lam2, ls.n1);
  ls.tbar = scale(1.0 / lam2, ls.m1);
  return ls;
}

candidate_flows assemble_candidate(const cascade_t& c, int parity) {
  if (parity != 1 && parity != 2)
    throw std::invalid_argument("candidate parity must be 1 or 2");
  if (c.levels().empty())
    throw std::logic_error("assemble_candidate: no levels built");
  candidate_flows cf;
  cf.parity = parity;
  for (const auto& lv : c.levels()) {
    level_flows lf = make_level_flows(lv);
    const double nk1 = ladder_n(c.ladder(), lv.k + 1);
    const bool heat = (lv.k % 2) == (parity - 1);
    const double lam = heat ? lv.n_k * lv.n_k : 2.0 * nk1 * nk1;
    expr_ptr vk = time_decay(lam, lf.v0);
    expr_ptr bk = time_decay(lam, lf.b0);
    cf.v = cf.v ? cf.v + vk : vk;
    cf.b = cf.b ? cf.b + bk : bk;
    cf.v0 = cf.v0 ? cf.v0 + lf.v0 : lf.v0;
    cf.b0 = cf.b0 ? cf.b0 + lf.b0 : lf.b0;
  }
  return cf;
}

expr_ptr zeta_velocity(const cascade_t& c) {
  expr_ptr acc;
  for (const auto& lv : c.levels()) {
    expr_ptr term = curl(lv.psi + lv.theta);
    acc = acc ? acc + term : term;
  }
  return acc;
}

expr_ptr zeta_magnetic(const cascade_t& c) {
  expr_ptr acc;
  for (const auto& lv : c.levels()) {
    expr_ptr term = curl(lv.phi);
    acc = acc ? acc + term : term;
  }
  return acc;
}

// ------------------------------------------------------------- grid model

grid_flow_assembler::grid_flow_assembler(const grid_cascade& gc) : gc_(gc) {
  dir_ = gc.options().scratch_dir + "/flows";
  std::filesystem::create_directories(dir_);
}

int grid_flow_assembler::kmax() const { return gc_.params().kmax; }

spec_vec grid_flow_assembler::cached_field(
    const std::string& stem, const std::function<spec_vec()>& make) const {
  const grid& g = gc_.g();
  const std::string path = dir_ + "/" + stem + ".mkd5";
  if (std::filesystem::exists(path)) {
    field_dump fd = read_field(path);
    if (fd.resolution != g.n() || fd.components.size() != 5)
      throw io_error("flow cache mismatch at " + path);
    spec_vec sv;
    for (int j = 0; j < 5; ++j) sv[j] = g.fft(fd.components[j]);
    return sv;
  }
  spec_vec sv = make();
  field_dump fd;
  fd.resolution = g.n();
  fd.rank = rank_t::vector;
  for (int j = 0; j < 5; ++j) fd.components.push_back(g.ifft(sv[j]));
  write_field(path, fd, std::string("{\"flow\":\"") + stem + "\"}");
  return sv;
}

spec_vec grid_flow_assembler::v0_level(int k) const {
  return cached_field("v0_level" + std::to_string(k), [&] {
    return curl_curl(gc_.g(), gc_.load_flow_potential(k, false, true));
  });
}

spec_vec grid_flow_assembler::b0_level(int k) const {
  return cached_field("b0_level" + std::to_string(k), [&] {
    return curl_curl(gc_.g(), gc_.load_flow_potential(k, true, true));
  });
}

spec_vec grid_flow_assembler::vbar0_level(int k) const {
  return cached_field("vbar0_level" + std::to_string(k), [&] {
    const grid& g = gc_.g();
    const grid_level_t& up = gc_.level(k + 1);
    const double fac = 0.5 / (up.n_k * up.n_k);
    auto sa = gc_.load(up.sa);
    auto sb = gc_.load(up.sb_sym);
    spec_vec d = div_sym_packed(g, [&](int c) {
      std::vector<double> comp = std::move(sa[c]);
      const std::vector<double>& other = sb[c];
      for (std::size_t i = 0; i < comp.size(); ++i)
        comp[i] = (comp[i] + other[i]) * fac;
      return comp;
    });
    leray(g, d);
    return d;
  });
}

spec_vec grid_flow_assembler::bbar0_level(int k) const {
  return cached_field("bbar0_level" + std::to_string(k), [&] {
    const grid& g = gc_.g();
    const grid_level_t& up = gc_.level(k + 1);
    const double fac = 0.5 / (up.n_k * up.n_k);
    auto tb = gc_.load(up.tb);
    spec_vec d = div_skew_packed(g, [&](int c) {
      std::vector<double> comp = std::move(tb[c]);
      for (double& x : comp) x *= fac;
      return comp;
    });
    leray(g, d);
    return d;
  });
}

double grid_flow_assembler::heat_decay(int k, double t) const {
  const double nk = ladder_n(gc_.ladder(), k);
  return std::exp(-nk * nk * t);
}

double grid_flow_assembler::averaged_decay(int k, double t) const {
  const double nk1 = ladder_n(gc_.ladder(), k + 1);
  return std::exp(-2.0 * nk1 * nk1 * t);
}

spec_vec grid_flow_assembler::assemble(int parity, double t,
                                       bool magnetic) const {
  if (parity != 1 && parity != 2)
    throw std::invalid_argument("candidate parity must be 1 or 2");
  const grid& g = gc_.g();
  spec_vec acc;
  for (int j = 0; j < 5; ++j) acc[j].assign(g.nspec(), {0.0, 0.0});
  for (int k = 0; k <= kmax(); ++k) {
    const bool heat = (k % 2) == (parity - 1);
    const double dec = heat ? heat_decay(k, t) : averaged_decay(k, t);
    spec_vec lvl;
    if (heat)
      lvl = magnetic ? b0_level(k) : v0_level(k);
    else
      lvl = magnetic ? bbar0_level(k) : vbar0_level(k);
    for (int j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < acc[j].size(); ++i)
        acc[j][i] += dec * lvl[j][i];
  }
  return acc;
}

spec_vec grid_flow_assembler::velocity(int parity, double t) const {
  return assemble(parity, t, false);
}

spec_vec grid_flow_assembler::magnetic(int parity, double t) const {
  return assemble(parity, t, true);
}

spec_vec grid_flow_assembler::initial_velocity() const {
  const grid& g = gc_.g();
  spec_vec acc;
  for (int j = 0; j < 5; ++j) acc[j].assign(g.nspec(), {0.0, 0.0});
  for (int k = 0; k <= kmax(); ++k) {
    spec_vec lvl = v0_level(k);
    for (int j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < acc[j].size(); ++i) acc[j][i] += lvl[j][i];
  }
  return acc;
}

spec_vec grid_flow_assembler::initial_magnetic() const {
  const grid& g = gc_.g();
  spec_vec acc;
  for (int j = 0; j < 5; ++j) acc[j].assign(g.nspec(), {0.0, 0.0});
  for (int k = 0; k <= kmax(); ++k) {
    spec_vec lvl = b0_level(k);
    for (int j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < acc[j].size(); ++i) acc[j][i] += lvl[j][i];
  }
  return acc;
}

}  // namespace mkd5
