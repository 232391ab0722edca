#include "mkd5/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "mkd5/mkd5_io.hpp"
#include "mkd5/norms.hpp"
#include "mkd5/parallel.hpp"

namespace mkd5 {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

std::string fmt_point(const vec5& x) {
  std::ostringstream os;
  os.precision(9);
  os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ", "
     << x[4] << ")";
  return os.str();
}

double value_mag(const value_t& v, rank_t rk) {
  switch (rk) {
    case rank_t::scalar:
      return std::fabs(v.s);
    case rank_t::vector:
      return norm(v.v);
    default:
      return fro_norm(v.m);
  }
}

// sampled sup over the shared deterministic point set; one sweep evaluates
// every field so jet sources common to them are computed once per point
std::vector<double> sampled_sup(const std::vector<expr_ptr>& fs, long budget) {
  std::vector<double> out(fs.size(), 0.0);
  std::mutex mu;
  parallel_for(static_cast<std::size_t>(budget),
               [&](std::size_t lo, std::size_t hi) {
                 std::vector<double> part(fs.size(), 0.0);
                 for (std::size_t i = lo; i < hi; ++i) {
                   const vec5 x = torus_sample(static_cast<long>(i));
                   for (std::size_t j = 0; j < fs.size(); ++j)
                     part[j] = std::max(
                         part[j], value_mag(fs[j]->eval(x, 0.0), fs[j]->rank()));
                 }
                 std::lock_guard<std::mutex> lk(mu);
                 for (std::size_t j = 0; j < fs.size(); ++j)
                   out[j] = std::max(out[j], part[j]);
               });
  return out;
}

mat5 sym_pair_matrix(const anchored_frame& f) {
  // xi2 (x) xi2 - xi1 (x) xi1
  mat5 m{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      m[i][j] = f.xi2[i] * f.xi2[j] - f.xi1[i] * f.xi1[j];
  return m;
}

mat5 wedge_matrix(const anchored_frame& f) {
  // xi2 (x) xi1 - xi1 (x) xi2
  mat5 m{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      m[i][j] = f.xi2[i] * f.xi1[j] - f.xi1[i] * f.xi2[j];
  return m;
}

mat5 rank_one_matrix(const vec5& v) {
  mat5 m{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) m[i][j] = v[i] * v[j];
  return m;
}

// upper-triangle weights with fro_dot(w, T) = L . pack_sym(T) for symmetric T
mat5 sym_pairing(const std::array<double, sym_dim>& L, double scl) {
  mat5 w{};
  for (int c = 0; c < sym_dim; ++c) {
    const int i = sym_idx.ij[c][0], j = sym_idx.ij[c][1];
    w[i][j] = (i == j ? 1.0 : sqrt2) * L[c] * scl;
  }
  return w;
}

// fro_dot(w, A) = K . pack_skew(A) for skew A
mat5 skew_pairing(const std::array<double, skew_dim>& K, double scl) {
  mat5 w{};
  for (int c = 0; c < skew_dim; ++c) {
    const int i = skew_idx.ij[c][0], j = skew_idx.ij[c][1];
    w[i][j] = sqrt2 * K[c] * scl;
  }
  return w;
}

void require_periodic(const anchored_frame& f, std::int64_t m_k,
                      std::int64_t n_k) {
  const long q = f.common_denominator;
  if (n_k % q != 0)
    throw periodicity_error(
        "tube carrier is not torus-periodic: carrier frequency N=" +
        std::to_string(n_k) + " must be a multiple of the frame denominator " +
        std::to_string(q) + " (M=" + std::to_string(m_k) +
        " only scales the periodized profile)");
}

}  // namespace

// ------------------------------------------------------------- cutoffs

cutoff_source::cutoff_source(
    std::vector<std::shared_ptr<const tube_source>> tubes, double offset,
    double width, ramp_t ramp)
    : tubes_(std::move(tubes)), off_(offset), width_(width), ramp_(ramp) {
  if (tubes_.empty())
    throw std::invalid_argument("cutoff union needs at least one tube");
  if (off_ <= 0.0 || width_ <= 0.0)
    throw std::invalid_argument("cutoff offset and width must be positive");
}

jet3 cutoff_source::compute(const vec5& x) const {
  // chi = 1 - prod_f (1 - H((dist_f - off)/width)); the overlap certificate
  // keeps ramp rings disjoint, so at most one factor is nonconstant at x
  const tube_source* active = nullptr;
  double s_active = 0.0;
  for (const auto& tube : tubes_) {
    const double dist = tube->lattice().distance(x, tube->anchor());
    const double s = (dist - off_) / width_;
    if (s <= 0.0) {
      jet3 one;
      one.v = 1.0;  // a saturated factor kills the product; chi == 1 nearby
      return one;
    }
    if (s < 1.0) {
      if (active)
        throw std::logic_error("two cutoff ramps are active at " +
                               fmt_point(x) +
                               "; expanded tube supports intersect");
      active = tube.get();
      s_active = s;
    }
  }
  jet3 out;
  if (!active) return out;  // beyond every ramp: chi == 0 identically

  // chain through the transversal distance d(x) = |w(x)| of the active tube:
  // grad d = T^T w / d, Hess d = (P - u u^T) / d with P = T^T T
  const auto& lat = active->lattice();
  const auto w = lat.minimal_image(lat.raw(x, active->anchor()));
  const double d = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  vec5 u{};
  for (int c = 0; c < 5; ++c)
    u[c] = (w[0] * lat.T[0][c] + w[1] * lat.T[1][c] + w[2] * lat.T[2][c]) / d;
  const double h1 = ramp_.d1(s_active) / width_;
  const double h2 = ramp_.d2(s_active) / (width_ * width_);
  out.v = ramp_.val(s_active);
  for (int c = 0; c < 5; ++c) out.d1[c] = h1 * u[c];
  for (int c = 0; c < 15; ++c) {
    const int i = sym2_pairs[c][0], j = sym2_pairs[c][1];
    const double p_ij = lat.T[0][i] * lat.T[0][j] + lat.T[1][i] * lat.T[1][j] +
                        lat.T[2][i] * lat.T[2][j];
    out.d2[c] = h2 * u[i] * u[j] + h1 * (p_ij - u[i] * u[j]) / d;
  }
  return out;
}

// ------------------------------------------------------------- cascade

cascade_t::cascade_t(geometry_bundle geo, construction_params params,
                     cascade_options opt)
    : geo_(std::move(geo)),
      params_(params),
      opt_(opt),
      ladder_(build_ladder(params)) {
  if (!ladder_.has(0))
    throw constraint_violation(
        "level-0 ladder scales unavailable" +
        (ladder_.violations.empty() ? std::string()
                                    : ": " + ladder_.violations.front()));
}

const cascade_level& cascade_t::level(int k) const {
  if (k < 0 || k >= static_cast<int>(levels_.size()))
    throw std::out_of_range("cascade level " + std::to_string(k) +
                            " is not built");
  return levels_[static_cast<std::size_t>(k)];
}

void cascade_t::check_overlap(int k) const {
  if (k < 1) return;
  if (!ladder_.has(k) || !ladder_.has(k - 1))
    throw constraint_violation("ladder level " + std::to_string(k) +
                               " is unavailable (overflow or invalid "
                               "parameters)");
  // bare supports: level-k tubes sit on the full anchor layout
  const double r_k = prof_.R() / static_cast<double>(ladder_.M[k]);
  if (geo_.d_min < 2.0 * r_k)
    throw overlap_error("level-" + std::to_string(k) +
                        " tube supports overlap: plane separation " +
                        fmt(geo_.d_min) + " < " + fmt(2.0 * r_k) +
                        "; increase the amplitude base A");
  if (!opt_.use_cutoffs) return;
  // cutoff rings: both level-k cutoffs saturate by
  // r_{k-1} + 2 ell_{k-1} + ell_k away from a previous-level tube
  const double sep =
      (k == 1) ? min_plane_separation(geo_.U[geo_.seed_u], geo_.B[geo_.seed_b])
               : geo_.d_min;
  const double reach = prof_.R() / static_cast<double>(ladder_.M[k - 1]) +
                       2.0 * ladder_.ell(k - 1) + ladder_.ell(k);
  if (sep < 2.0 * reach)
    throw overlap_error(
        "cutoff rings around the level-" + std::to_string(k - 1) +
        " tubes intersect: separation " + fmt(sep) + " < " + fmt(2.0 * reach) +
        "; increase the amplitude base A or re-place the anchors");
}

advance_report cascade_t::build_level_zero() {
  if (!levels_.empty())
    throw std::logic_error("level zero is already built");
  const double m0 = static_cast<double>(ladder_.M[0]);
  const double n0 = static_cast<double>(ladder_.N[0]);

  cascade_level lv;
  lv.k = 0;
  lv.m_k = m0;
  lv.n_k = n0;
  lv.ell = ladder_.ell(0);

  const anchored_frame& fu = geo_.U[static_cast<std::size_t>(geo_.seed_u)];
  const anchored_frame& fb = geo_.B[static_cast<std::size_t>(geo_.seed_b)];
  auto psi_pot = mikado_potential(fu, fu.anchor, ladder_.M[0], ladder_.N[0],
                                  potential_kind_t::velocity, prof_);
  auto theta_pot = mikado_potential(fb, fb.anchor, ladder_.M[0], ladder_.N[0],
                                    potential_kind_t::magnetic_stream, prof_);
  lv.u_tubes = {psi_pot.source};
  lv.b_tubes = {theta_pot.source};
  lv.a_mean = {oscillation_mean(prof_, m0, n0, psi_pot.source->lattice().covol)};
  lv.b_mean = {
      oscillation_mean(prof_, m0, n0, theta_pot.source->lattice().covol)};

  // level-0 smoothing: the kernel flattened onto the transversal 3-space
  auto marg_u = std::make_shared<const marginal_source>(psi_pot.source, lv.ell,
                                                        opt_.marginal_q);
  auto marg_b = std::make_shared<const marginal_source>(theta_pot.source,
                                                        lv.ell, opt_.marginal_q);
  lv.marginals = {marg_u, marg_b};

  lv.psi_raw = scale(n0, psi_pot.field);
  lv.theta_raw = scale(n0, theta_pot.field);
  lv.phi_raw = scale(n0, jet_vector(theta_pot.source, fb.xi1));
  lv.psi = scale(n0, jet_vector(marg_u, fu.xi1));
  lv.theta = scale(n0, jet_vector(marg_b, fb.xi2));
  lv.phi = scale(n0, jet_vector(marg_b, fb.xi1));

  lv.a_amp = {const_scalar(n0)};
  lv.b_amp = {const_scalar(n0)};
  lv.a_amp2 = {const_scalar(n0 * n0)};
  lv.b_amp2 = {const_scalar(n0 * n0)};
  lv.s_field = const_tensor(rank_t::sym_tensor, mat5{});
  lv.chi_v = const_scalar(1.0);
  lv.chi_b = const_scalar(1.0);

  advance_report rep;
  rep.k = 0;
  rep.amp_factor = n0;
  rep.gamma2_lo = rep.gamma2_hi = 1.0;
  rep.amp2_lo = rep.amp2_hi = 1.0;
  levels_.push_back(std::move(lv));
  reports_.push_back(rep);
  return rep;
}

advance_report cascade_t::advance_level() {
  if (levels_.empty())
    throw std::logic_error("advance_level before build_level_zero");
  const int k = static_cast<int>(levels_.size());
  if (!ladder_.has(k))
    throw constraint_violation("ladder level " + std::to_string(k) +
                               " is unavailable (overflow or invalid "
                               "parameters)");
  check_overlap(k);

  const cascade_level& prev = levels_.back();
  const double mk = static_cast<double>(ladder_.M[k]);
  const double nk = static_cast<double>(ladder_.N[k]);
  const double eps0 = geo_.eps0;

  cascade_level lv;
  lv.k = k;
  lv.m_k = mk;
  lv.n_k = nk;
  lv.ell = ladder_.ell(k);

  advance_report rep;
  rep.k = k;

  // shared previous-level deformations, value-cached per point
  const expr_ptr d_psi = cached(d_sym(prev.psi));
  const expr_ptr d_theta = cached(d_sym(prev.theta));
  const expr_ptr dt_phi = cached(d_skew(prev.phi));
  const auto sups = sampled_sup({d_psi, d_theta, dt_phi}, opt_.norm_budget);
  rep.dsym_psi_norm = sups[0];
  rep.dsym_theta_norm = sups[1];
  rep.dskew_phi_norm = sups[2];
  if (rep.dskew_phi_norm < opt_.denom_guard)
    throw vanishing_denominator("level-" + std::to_string(k) +
                                " skew gradient sup " +
                                fmt(rep.dskew_phi_norm) +
                                " is below the guard " + fmt(opt_.denom_guard));

  // cutoffs saturating on the expanded previous-level tubes
  if (opt_.use_cutoffs) {
    std::vector<std::shared_ptr<const tube_source>> prev_tubes = prev.u_tubes;
    prev_tubes.insert(prev_tubes.end(), prev.b_tubes.begin(),
                      prev.b_tubes.end());
    const double r_prev = prof_.R() / prev.m_k;
    lv.chi_b = jet_scalar(std::make_shared<const cutoff_source>(
        prev_tubes, r_prev + prev.ell, lv.ell));
    lv.chi_v = jet_scalar(std::make_shared<const cutoff_source>(
        prev_tubes, r_prev + 2.0 * prev.ell, lv.ell));
  } else {
    lv.chi_b = const_scalar(1.0);
    lv.chi_v = const_scalar(1.0);
  }

  // order of dependence: b -> s -> l -> a
  const auto& skw = geo_.skew;
  const std::size_t nb = skw.frames.size();
  const expr_ptr chi_b2 = multiply(lv.chi_b, lv.chi_b);
  std::vector<expr_ptr> b_gam2(nb);
  expr_ptr s_sum;
  for (std::size_t i = 0; i < nb; ++i) {
    const anchored_frame& f = skw.frames[i];
    b_gam2[i] =
        cached(const_scalar(skw.d[i]) +
               linear_functional(
                   skew_pairing(skw.K[i], eps0 / rep.dskew_phi_norm), dt_phi));
    auto pot = mikado_potential(f, f.anchor, ladder_.M[k], ladder_.N[k],
                                potential_kind_t::magnetic_stream, prof_);
    lv.b_tubes.push_back(pot.source);
    lv.b_mean.push_back(
        oscillation_mean(prof_, mk, nk, pot.source->lattice().covol));
    const double bfac2 =
        nk * nk * 2.0 * rep.dskew_phi_norm / (eps0 * lv.b_mean.back());
    const expr_ptr chain = multiply(chi_b2, b_gam2[i]);
    lv.b_amp2.push_back(scale(bfac2, chain));
    lv.b_amp.push_back(scale(std::sqrt(bfac2),
                             multiply(lv.chi_b, pow_field(b_gam2[i], 0.5))));
    // B_xi b^2 (xi2 xi2 - xi1 xi1) / (2 N^2) accumulates into s_k
    const expr_ptr term =
        multiply(scale(rep.dskew_phi_norm / eps0, chain),
                 const_tensor(rank_t::sym_tensor, sym_pair_matrix(f)));
    s_sum = s_sum ? s_sum + term : term;
    const expr_ptr tterm = multiply(lv.b_amp.back(), pot.field);
    const expr_ptr pterm =
        multiply(lv.b_amp.back(), jet_vector(pot.source, f.xi1));
    lv.theta_raw = lv.theta_raw ? lv.theta_raw + tterm : tterm;
    lv.phi_raw = lv.phi_raw ? lv.phi_raw + pterm : pterm;
  }
  lv.s_field = cached(s_sum);
  rep.s_norm = sampled_sup({lv.s_field}, opt_.norm_budget)[0];
  lv.l_norm = (rep.dsym_psi_norm + rep.dsym_theta_norm + rep.s_norm) / eps0;
  rep.l_norm = lv.l_norm;
  if (lv.l_norm < opt_.denom_guard)
    throw vanishing_denominator("l_" + std::to_string(k) + " = " +
                                fmt(lv.l_norm) + " is below the guard " +
                                fmt(opt_.denom_guard));

  // velocity amplitudes read Id + (D - s)/l through the sym decomposition
  const expr_ptr d_minus_s = cached(d_psi + d_theta - lv.s_field);
  const auto& sym = geo_.sym;
  const std::size_t nu = sym.frames.size();
  const expr_ptr chi_v2 = multiply(lv.chi_v, lv.chi_v);
  std::vector<expr_ptr> a_gam2(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    const anchored_frame& f = sym.frames[i];
    a_gam2[i] = cached(const_scalar(sym.c[i]) +
                       linear_functional(sym_pairing(sym.L[i], 1.0 / lv.l_norm),
                                         d_minus_s));
    auto pot = mikado_potential(f, f.anchor, ladder_.M[k], ladder_.N[k],
                                potential_kind_t::velocity, prof_);
    lv.u_tubes.push_back(pot.source);
    lv.a_mean.push_back(
        oscillation_mean(prof_, mk, nk, pot.source->lattice().covol));
    const double afac2 = nk * nk * 2.0 * lv.l_norm / lv.a_mean.back();
    lv.a_amp2.push_back(scale(afac2, multiply(chi_v2, a_gam2[i])));
    lv.a_amp.push_back(scale(std::sqrt(afac2),
                             multiply(lv.chi_v, pow_field(a_gam2[i], 0.5))));
    const expr_ptr term = multiply(lv.a_amp.back(), pot.field);
    lv.psi_raw = lv.psi_raw ? lv.psi_raw + term : term;
  }
  rep.amp_factor = nk * std::sqrt(2.0 * lv.l_norm / lv.a_mean.front());

  // domain sweep: ball membership with the offending point, window ranges,
  // scaled cutoff slope
  {
    const double inf = std::numeric_limits<double>::infinity();
    double ball = 0.0, g2lo = inf, g2hi = -inf, a2lo = inf, a2hi = -inf;
    double slope = 0.0;
    vec5 worst{};
    std::array<expr_ptr, 5> chi_dx{};
    if (opt_.use_cutoffs)
      for (int c = 0; c < 5; ++c) chi_dx[c] = lv.chi_v->dx(c);
    std::mutex mu;
    parallel_for(
        static_cast<std::size_t>(opt_.domain_budget),
        [&](std::size_t lo, std::size_t hi) {
          double pball = 0.0, pg2lo = inf, pg2hi = -inf, pa2lo = inf,
                 pa2hi = -inf, pslope = 0.0;
          vec5 pworst{};
          for (std::size_t i = lo; i < hi; ++i) {
            const vec5 x = torus_sample(static_cast<long>(i));
            const double r = fro_norm(eval_tensor(d_minus_s, x)) / lv.l_norm;
            if (r > pball) {
              pball = r;
              pworst = x;
            }
            for (const auto& g2 : b_gam2) {
              const double v = eval_scalar(g2, x);
              pg2lo = std::min(pg2lo, v);
              pg2hi = std::max(pg2hi, v);
            }
            for (const auto& g2 : a_gam2) {
              const double v = eval_scalar(g2, x);
              pa2lo = std::min(pa2lo, v);
              pa2hi = std::max(pa2hi, v);
            }
            if (opt_.use_cutoffs) {
              double sq = 0.0;
              for (int c = 0; c < 5; ++c) {
                const double d = eval_scalar(chi_dx[c], x);
                sq += d * d;
              }
              pslope = std::max(pslope, std::sqrt(sq) * lv.ell);
            }
          }
          std::lock_guard<std::mutex> lk(mu);
          if (pball > ball) {
            ball = pball;
            worst = pworst;
          }
          g2lo = std::min(g2lo, pg2lo);
          g2hi = std::max(g2hi, pg2hi);
          a2lo = std::min(a2lo, pa2lo);
          a2hi = std::max(a2hi, pa2hi);
          slope = std::max(slope, pslope);
        });
    rep.ball_ratio = ball;
    rep.gamma2_lo = g2lo;
    rep.gamma2_hi = g2hi;
    rep.amp2_lo = a2lo;
    rep.amp2_hi = a2hi;
    rep.chi_grad_scaled = slope;
    if (ball > eps0 * (1.0 + 1e-9))
      throw domain_violation(
          "the amplitude argument leaves the decomposition ball at level " +
          std::to_string(k) + ": |(D - s)/l| = " + fmt(ball) + " > eps0 = " +
          fmt(eps0) + " at " + fmt_point(worst));
    if (g2lo <= 0.0 || a2lo <= 0.0)
      throw domain_violation("an amplitude square is nonpositive at level " +
                             std::to_string(k) + ": gamma^2 range [" +
                             fmt(g2lo) + ", " + fmt(g2hi) + "], Gamma^2 range [" +
                             fmt(a2lo) + ", " + fmt(a2hi) + "]");
  }

  // smoothed potentials through the shared level rule
  lv.rule = std::make_shared<const mollifier5>(lv.ell, opt_.moll5_q);
  lv.psi = mollify(lv.psi_raw, lv.rule);
  lv.theta = mollify(lv.theta_raw, lv.rule);
  lv.phi = mollify(lv.phi_raw, lv.rule);

  levels_.push_back(std::move(lv));
  reports_.push_back(rep);
  return rep;
}

void cascade_t::build_all() {
  if (levels_.empty()) build_level_zero();
  while (static_cast<int>(levels_.size()) <= params_.kmax) advance_level();
}

// ------------------------------------------------------------- grid model

namespace {

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

void apply_table(const grid& g, std::vector<cplx>& fh,
                 const std::vector<double>& table) {
  g.for_modes([&](std::size_t idx, const double*, double m2) {
    fh[idx] *= table[static_cast<std::size_t>(std::lround(m2))];
  });
}

std::vector<double> scaled_copy(const std::vector<double>& v, double c) {
  std::vector<double> out(v.size());
  parallel_for(v.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = c * v[i];
  });
  return out;
}

void axpy_into(std::vector<double>& dst, double c,
               const std::vector<double>& src) {
  if (c == 0.0) return;
  if (dst.empty()) dst = zeros(src.size());
  parallel_for(src.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) dst[i] += c * src[i];
  });
}

double nodal_maxF(const std::vector<std::vector<double>>& comps) {
  return std::sqrt(reduce_max(comps[0].size(), [&](std::size_t i) {
    double s = 0.0;
    for (const auto& c : comps) s += c[i] * c[i];
    return s;
  }));
}

void nodal_minmax(const std::vector<double>& v, double& lo, double& hi) {
  const double inf = std::numeric_limits<double>::infinity();
  double mn = inf, mx = -inf;
  std::mutex mu;
  parallel_for(v.size(), [&](std::size_t a, std::size_t b) {
    double pmn = inf, pmx = -inf;
    for (std::size_t i = a; i < b; ++i) {
      pmn = std::min(pmn, v[i]);
      pmx = std::max(pmx, v[i]);
    }
    std::lock_guard<std::mutex> lk(mu);
    mn = std::min(mn, pmn);
    mx = std::max(mx, pmx);
  });
  lo = std::min(lo, mn);
  hi = std::max(hi, mx);
}

// max over nodes of the packed Frobenius square, components streamed from
// spectral space so only one nodal scratch plus the accumulator stay live
double packed_spec_maxF(const grid& g,
                        const std::function<std::vector<cplx>(int)>& comp,
                        int count) {
  std::vector<double> acc(g.nreal(), 0.0);
  for (int c = 0; c < count; ++c) {
    const auto nodal = g.ifft(comp(c));
    parallel_for(g.nreal(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) acc[i] += nodal[i] * nodal[i];
    });
  }
  return std::sqrt(
      reduce_max(acc.size(), [&](std::size_t i) { return acc[i]; }));
}

field_dump pack_dump(int n, rank_t rk, std::vector<std::vector<double>> comps) {
  field_dump d;
  d.resolution = n;
  d.rank = rk;
  d.components = std::move(comps);
  return d;
}

std::string sidecar(const grid& g, const grid_level_t& lv, const char* kind) {
  nlohmann::json j{{"kind", kind},   {"level", lv.k}, {"n", g.n()},
                   {"m_k", lv.m_k},  {"n_k", lv.n_k}, {"ell", lv.ell},
                   {"stacks_only", lv.stacks_only}};
  return j.dump();
}

nlohmann::json manifest_key(const grid& g, const geometry_bundle& geo,
                            const construction_params& p) {
  return nlohmann::json{{"format", 1},       {"n", g.n()},
                        {"A", p.A},          {"b", p.b},
                        {"gamma", p.gamma},  {"alpha", p.alpha},
                        {"kappa", p.kappa},  {"q", p.q},
                        {"kmax", p.kmax},    {"eps0", geo.eps0},
                        {"d_min", geo.d_min}, {"seed_u", geo.seed_u},
                        {"seed_b", geo.seed_b}};
}

nlohmann::json level_to_json(const grid_level_t& lv) {
  return nlohmann::json{{"k", lv.k},
                        {"m_k", lv.m_k},
                        {"n_k", lv.n_k},
                        {"ell", lv.ell},
                        {"l_norm", lv.l_norm},
                        {"dsym_psi_norm", lv.dsym_psi_norm},
                        {"dsym_theta_norm", lv.dsym_theta_norm},
                        {"dskew_phi_norm", lv.dskew_phi_norm},
                        {"s_norm", lv.s_norm},
                        {"ball_ratio", lv.ball_ratio},
                        {"gamma2_lo", lv.gamma2_lo},
                        {"gamma2_hi", lv.gamma2_hi},
                        {"amp2_lo", lv.amp2_lo},
                        {"amp2_hi", lv.amp2_hi},
                        {"amp_factor", lv.amp_factor},
                        {"a_mean", lv.a_mean},
                        {"b_mean", lv.b_mean},
                        {"carrier_tail", lv.carrier_tail},
                        {"resolved", lv.resolved},
                        {"stacks_only", lv.stacks_only},
                        {"pot", lv.pot},
                        {"upot", lv.upot},
                        {"sa", lv.sa},
                        {"sb_sym", lv.sb_sym},
                        {"tb", lv.tb}};
}

grid_level_t level_from_json(const nlohmann::json& j) {
  grid_level_t lv;
  lv.k = j.at("k").get<int>();
  lv.m_k = j.at("m_k").get<double>();
  lv.n_k = j.at("n_k").get<double>();
  lv.ell = j.at("ell").get<double>();
  lv.l_norm = j.at("l_norm").get<double>();
  lv.dsym_psi_norm = j.at("dsym_psi_norm").get<double>();
  lv.dsym_theta_norm = j.at("dsym_theta_norm").get<double>();
  lv.dskew_phi_norm = j.at("dskew_phi_norm").get<double>();
  lv.s_norm = j.at("s_norm").get<double>();
  lv.ball_ratio = j.at("ball_ratio").get<double>();
  lv.gamma2_lo = j.at("gamma2_lo").get<double>();
  lv.gamma2_hi = j.at("gamma2_hi").get<double>();
  lv.amp2_lo = j.at("amp2_lo").get<double>();
  lv.amp2_hi = j.at("amp2_hi").get<double>();
  lv.amp_factor = j.at("amp_factor").get<double>();
  lv.a_mean = j.at("a_mean").get<double>();
  lv.b_mean = j.at("b_mean").get<double>();
  lv.carrier_tail = j.at("carrier_tail").get<double>();
  lv.resolved = j.at("resolved").get<bool>();
  lv.stacks_only = j.at("stacks_only").get<bool>();
  lv.pot = j.at("pot").get<std::string>();
  lv.upot = j.at("upot").get<std::string>();
  lv.sa = j.at("sa").get<std::string>();
  lv.sb_sym = j.at("sb_sym").get<std::string>();
  lv.tb = j.at("tb").get<std::string>();
  return lv;
}

void gate_resolution(const grid_options& opt, const grid& g,
                     grid_level_t& lv) {
  lv.resolved = lv.carrier_tail <= opt.tail_tol;
  if (!lv.resolved && opt.enforce_resolution)
    throw resolution_error(
        "level-" + std::to_string(lv.k) +
        " carrier does not fit the spectral band: outer-shell mass fraction " +
        fmt(lv.carrier_tail) + " > " + fmt(opt.tail_tol) + " at n = " +
        std::to_string(g.n()) + " (N_k = " + fmt(lv.n_k) +
        "); raise the grid resolution");
}

}  // namespace

double spectral_tail_fraction(const grid& g, const std::vector<cplx>& fh) {
  const int n = g.n(), nh = n / 2 + 1;
  const int cut = n / 2 - 1;
  double tot = 0.0, tail = 0.0;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    const int f0 = std::min(i0, n - i0);
    for (int i1 = 0; i1 < n; ++i1) {
      const int f1 = std::min(i1, n - i1);
      for (int i2 = 0; i2 < n; ++i2) {
        const int f2 = std::min(i2, n - i2);
        for (int i3 = 0; i3 < n; ++i3) {
          const int f3 = std::min(i3, n - i3);
          const int fmax = std::max(std::max(f0, f1), std::max(f2, f3));
          for (int i4 = 0; i4 < nh; ++i4, ++idx) {
            // the half-complex layout stores one of each conjugate pair
            const double w = (i4 == 0 || 2 * i4 == n) ? 1.0 : 2.0;
            const double mass = w * std::norm(fh[idx]);
            tot += mass;
            if (std::max(fmax, i4) >= cut) tail += mass;
          }
        }
      }
    }
  }
  return tot > 0.0 ? tail / tot : 0.0;
}

grid_cascade::grid_cascade(std::shared_ptr<grid> g, geometry_bundle geo,
                           construction_params params, grid_options opt)
    : grid_(std::move(g)),
      geo_(std::move(geo)),
      params_(params),
      opt_(std::move(opt)),
      ladder_(build_ladder(params)) {
  if (!grid_) throw std::invalid_argument("grid model needs a grid");
  if (opt_.scratch_dir.empty())
    throw std::invalid_argument("grid model needs a scratch directory");
  std::filesystem::create_directories(opt_.scratch_dir);
  if (!ladder_.has(0))
    throw constraint_violation(
        "level-0 ladder scales unavailable" +
        (ladder_.violations.empty() ? std::string()
                                    : ": " + ladder_.violations.front()));
}

const grid_level_t& grid_cascade::level(int k) const {
  if (k < 0 || k >= static_cast<int>(levels_.size()))
    throw std::out_of_range("grid-model level " + std::to_string(k) +
                            " is not built");
  return levels_[static_cast<std::size_t>(k)];
}

std::string grid_cascade::dump_path(const std::string& stem) const {
  return opt_.scratch_dir + "/" + stem + ".mkd5";
}

std::vector<std::vector<double>> grid_cascade::load(
    const std::string& path) const {
  if (path.empty())
    throw std::invalid_argument("no dump stored (stacks-only level?)");
  auto f = read_field(path);
  if (f.resolution != grid_->n())
    throw io_error(path + ": resolution " + std::to_string(f.resolution) +
                   " does not match the grid n = " +
                   std::to_string(grid_->n()));
  return std::move(f.components);
}

spec_vec grid_cascade::load_flow_potential(int k, bool magnetic,
                                           bool smoothed) const {
  const grid_level_t& lv = level(k);
  const std::string& path = smoothed ? lv.pot : lv.upot;
  if (path.empty())
    throw std::logic_error("level " + std::to_string(k) +
                           " stores amplitude stacks only");
  auto comps = load(path);
  spec_vec out;
  for (int j = 0; j < 5; ++j) {
    if (magnetic) {
      out[j] = grid_->fft(comps[static_cast<std::size_t>(10 + j)]);
    } else {
      auto& a = comps[static_cast<std::size_t>(j)];
      const auto& b = comps[static_cast<std::size_t>(5 + j)];
      parallel_for(a.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) a[i] += b[i];
      });
      out[j] = grid_->fft(a);
    }
  }
  return out;
}

void grid_cascade::build_level_zero() {
  const grid& gr = *grid_;
  grid_level_t lv;
  lv.k = 0;
  const double m0 = static_cast<double>(ladder_.M[0]);
  const double n0 = static_cast<double>(ladder_.N[0]);
  lv.m_k = m0;
  lv.n_k = n0;
  lv.ell = ladder_.ell(0);
  lv.amp_factor = n0;
  lv.gamma2_lo = lv.gamma2_hi = lv.amp2_lo = lv.amp2_hi = 1.0;

  const anchored_frame& fu = geo_.U[static_cast<std::size_t>(geo_.seed_u)];
  const anchored_frame& fb = geo_.B[static_cast<std::size_t>(geo_.seed_b)];
  require_periodic(fu, ladder_.M[0], ladder_.N[0]);
  require_periodic(fb, ladder_.M[0], ladder_.N[0]);
  lv.a_mean = oscillation_mean(prof_, m0, n0, transversal_lattice(fu).covol);
  lv.b_mean = oscillation_mean(prof_, m0, n0, transversal_lattice(fb).covol);

  const auto gu = sample_carrier(gr, fu, fu.anchor, m0, n0, prof_);
  const auto gb = sample_carrier(gr, fb, fb.anchor, m0, n0, prof_);
  auto guh = gr.fft(gu);
  auto gbh = gr.fft(gb);
  lv.carrier_tail = std::max(spectral_tail_fraction(gr, guh),
                             spectral_tail_fraction(gr, gbh));
  gate_resolution(opt_, gr, lv);

  // raw potentials: amplitude N_0 on the seed polarizations (psi|theta|phi)
  field_dump up;
  up.resolution = gr.n();
  up.rank = rank_t::tensor;
  up.components.resize(15);
  for (int j = 0; j < 5; ++j) {
    up.components[static_cast<std::size_t>(j)] = scaled_copy(gu, n0 * fu.xi1[j]);
    up.components[static_cast<std::size_t>(5 + j)] =
        scaled_copy(gb, n0 * fb.xi2[j]);
    up.components[static_cast<std::size_t>(10 + j)] =
        scaled_copy(gb, n0 * fb.xi1[j]);
  }
  lv.upot = dump_path("level0_upot");
  write_field(lv.upot, up, sidecar(gr, lv, "upot"));
  up.components.clear();

  // smoothed potentials via the level-0 spectral kernel
  const auto moll = gr.moll_table(lv.ell);
  apply_table(gr, guh, moll);
  apply_table(gr, gbh, moll);
  const auto gum = gr.ifft(guh);
  const auto gbm = gr.ifft(gbh);
  field_dump pt;
  pt.resolution = gr.n();
  pt.rank = rank_t::tensor;
  pt.components.resize(15);
  for (int j = 0; j < 5; ++j) {
    pt.components[static_cast<std::size_t>(j)] = scaled_copy(gum, n0 * fu.xi1[j]);
    pt.components[static_cast<std::size_t>(5 + j)] =
        scaled_copy(gbm, n0 * fb.xi2[j]);
    pt.components[static_cast<std::size_t>(10 + j)] =
        scaled_copy(gbm, n0 * fb.xi1[j]);
  }
  lv.pot = dump_path("level0_pot");
  write_field(lv.pot, pt, sidecar(gr, lv, "pot"));
  levels_.push_back(std::move(lv));
}

void grid_cascade::advance(bool stacks_only) {
  const grid& gr = *grid_;
  const int k = static_cast<int>(levels_.size());
  if (!ladder_.has(k))
    throw constraint_violation("ladder level " + std::to_string(k) +
                               " is unavailable (overflow or invalid "
                               "parameters)");
  const grid_level_t& prev = levels_.back();
  if (prev.stacks_only)
    throw std::logic_error("cannot advance past a stacks-only level");
  const double mk = static_cast<double>(ladder_.M[k]);
  const double nk = static_cast<double>(ladder_.N[k]);
  const double eps0 = geo_.eps0;
  const double inf = std::numeric_limits<double>::infinity();

  grid_level_t lv;
  lv.k = k;
  lv.m_k = mk;
  lv.n_k = nk;
  // the top stacks-only level never smooths, and its ell would need the
  // ladder one level past the stored range
  lv.ell = stacks_only ? 0.0 : ladder_.ell(k);
  lv.stacks_only = stacks_only;

  // previous potentials, spectral
  spec_vec psih, thh, phih;
  {
    auto pots = load(prev.pot);
    for (int j = 0; j < 5; ++j) {
      psih[j] = gr.fft(pots[static_cast<std::size_t>(j)]);
      thh[j] = gr.fft(pots[static_cast<std::size_t>(5 + j)]);
      phih[j] = gr.fft(pots[static_cast<std::size_t>(10 + j)]);
    }
  }

  lv.dsym_psi_norm = packed_spec_maxF(
      gr, [&](int c) { return dsym_comp(gr, psih, c); }, sym_dim);
  lv.dsym_theta_norm = packed_spec_maxF(
      gr, [&](int c) { return dsym_comp(gr, thh, c); }, sym_dim);

  std::vector<std::vector<double>> dt(skew_dim);
  for (int c = 0; c < skew_dim; ++c)
    dt[static_cast<std::size_t>(c)] = gr.ifft(dskew_comp(gr, phih, c));
  for (auto& v : phih) std::vector<cplx>().swap(v);
  lv.dskew_phi_norm = nodal_maxF(dt);
  if (lv.dskew_phi_norm < opt_.denom_guard)
    throw vanishing_denominator("level-" + std::to_string(k) +
                                " skew gradient sup " +
                                fmt(lv.dskew_phi_norm) +
                                " is below the guard " + fmt(opt_.denom_guard));

  // skew family: s_k in its own units plus the wedge stack (amplitude units)
  std::vector<std::vector<double>> s1(sym_dim), tb(skew_dim);
  for (auto& v : s1) v = zeros(gr.nreal());
  for (auto& v : tb) v = zeros(gr.nreal());
  double g2lo = inf, g2hi = -inf;
  const auto& skw = geo_.skew;
  for (std::size_t bi = 0; bi < skw.frames.size(); ++bi) {
    const anchored_frame& f = skw.frames[bi];
    require_periodic(f, ladder_.M[k], ladder_.N[k]);
    if (bi == 0)
      lv.b_mean =
          oscillation_mean(prof_, mk, nk, transversal_lattice(f).covol);
    std::vector<double> g2(gr.nreal());
    const double scl = eps0 / lv.dskew_phi_norm;
    parallel_for(gr.nreal(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        double v = skw.d[bi];
        for (int c = 0; c < skew_dim; ++c)
          v += skw.K[bi][static_cast<std::size_t>(c)] * scl *
               dt[static_cast<std::size_t>(c)][i];
        g2[i] = v;
      }
    });
    nodal_minmax(g2, g2lo, g2hi);
    const auto sv = pack_sym(sym_pair_matrix(f));
    const auto wv = pack_skew(wedge_matrix(f));
    const double wscl = lv.dskew_phi_norm / eps0;  // B_xi b^2 / (2 N^2 gam^2)
    parallel_for(gr.nreal(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double w = wscl * g2[i];
        for (int c = 0; c < sym_dim; ++c)
          if (sv[static_cast<std::size_t>(c)] != 0.0)
            s1[static_cast<std::size_t>(c)][i] +=
                sv[static_cast<std::size_t>(c)] * w;
        for (int c = 0; c < skew_dim; ++c)
          if (wv[static_cast<std::size_t>(c)] != 0.0)
            tb[static_cast<std::size_t>(c)][i] +=
                wv[static_cast<std::size_t>(c)] * w;
      }
    });
  }
  lv.gamma2_lo = g2lo;
  lv.gamma2_hi = g2hi;
  lv.s_norm = nodal_maxF(s1);
  lv.l_norm = (lv.dsym_psi_norm + lv.dsym_theta_norm + lv.s_norm) / eps0;
  if (lv.l_norm < opt_.denom_guard)
    throw vanishing_denominator("l_" + std::to_string(k) + " = " +
                                fmt(lv.l_norm) + " is below the guard " +
                                fmt(opt_.denom_guard));

  // packed D - s nodal
  std::vector<std::vector<double>> dm(sym_dim);
  for (int c = 0; c < sym_dim; ++c) {
    auto fh = dsym_comp(gr, psih, c);
    const auto th = dsym_comp(gr, thh, c);
    parallel_for(fh.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) fh[i] += th[i];
    });
    auto nodal = gr.ifft(fh);
    const auto& sc = s1[static_cast<std::size_t>(c)];
    parallel_for(nodal.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) nodal[i] -= sc[i];
    });
    dm[static_cast<std::size_t>(c)] = std::move(nodal);
  }
  for (auto& v : psih) std::vector<cplx>().swap(v);
  for (auto& v : thh) std::vector<cplx>().swap(v);
  lv.ball_ratio = nodal_maxF(dm) / lv.l_norm;
  if (lv.ball_ratio > eps0 * (1.0 + 1e-9))
    throw domain_violation(
        "the amplitude argument leaves the decomposition ball at level " +
        std::to_string(k) + ": |(D - s)/l| = " + fmt(lv.ball_ratio) +
        " > eps0 = " + fmt(eps0));

  // stacks in amplitude units: SB_sym = 2 N^2 s_k, TB likewise
  const double two_n2 = 2.0 * nk * nk;
  for (auto& comp : s1)
    parallel_for(comp.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) comp[i] *= two_n2;
    });
  for (auto& comp : tb)
    parallel_for(comp.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) comp[i] *= two_n2;
    });
  lv.sb_sym = dump_path("level" + std::to_string(k) + "_sbsym");
  write_field(lv.sb_sym, pack_dump(gr.n(), rank_t::sym_tensor, std::move(s1)),
              sidecar(gr, lv, "sb_sym"));
  lv.tb = dump_path("level" + std::to_string(k) + "_tb");
  write_field(lv.tb, pack_dump(gr.n(), rank_t::skew_tensor, std::move(tb)),
              sidecar(gr, lv, "tb"));
  s1.clear();
  tb.clear();

  // sym family: Gamma^2 from (D - s)/l, SA stack, optional carriers
  std::vector<std::vector<double>> sa(sym_dim);
  for (auto& v : sa) v = zeros(gr.nreal());
  std::array<std::vector<double>, 5> up_psi{};
  double a2lo = inf, a2hi = -inf;
  double a_mean0 = 0.0;
  const auto& sym = geo_.sym;
  for (std::size_t ui = 0; ui < sym.frames.size(); ++ui) {
    const anchored_frame& f = sym.frames[ui];
    require_periodic(f, ladder_.M[k], ladder_.N[k]);
    const double a_mean =
        oscillation_mean(prof_, mk, nk, transversal_lattice(f).covol);
    if (ui == 0) {
      a_mean0 = a_mean;
      lv.a_mean = a_mean;
    }
    std::vector<double> g2(gr.nreal());
    parallel_for(gr.nreal(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        double v = sym.c[ui];
        for (int c = 0; c < sym_dim; ++c)
          v += sym.L[ui][static_cast<std::size_t>(c)] *
               dm[static_cast<std::size_t>(c)][i] / lv.l_norm;
        g2[i] = v;
      }
    });
    nodal_minmax(g2, a2lo, a2hi);
    const auto sv = pack_sym(rank_one_matrix(f.xi1));
    const double w_amp = 2.0 * lv.l_norm * nk * nk;  // A_xi a^2 = 2 l N^2 G^2
    parallel_for(gr.nreal(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double w = w_amp * g2[i];
        for (int c = 0; c < sym_dim; ++c)
          if (sv[static_cast<std::size_t>(c)] != 0.0)
            sa[static_cast<std::size_t>(c)][i] +=
                sv[static_cast<std::size_t>(c)] * w;
      }
    });
    if (!stacks_only) {
      auto carrier = sample_carrier(gr, f, f.anchor, mk, nk, prof_);
      if (ui == 0) {
        const auto ch = gr.fft(carrier);
        lv.carrier_tail = spectral_tail_fraction(gr, ch);
        gate_resolution(opt_, gr, lv);
      }
      const double afac = nk * std::sqrt(2.0 * lv.l_norm / a_mean);
      parallel_for(gr.nreal(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
          carrier[i] *= afac * std::sqrt(g2[i]);
      });
      for (int j = 0; j < 5; ++j)
        axpy_into(up_psi[static_cast<std::size_t>(j)], f.xi1[j], carrier);
    }
  }
  lv.amp2_lo = a2lo;
  lv.amp2_hi = a2hi;
  lv.amp_factor = nk * std::sqrt(2.0 * lv.l_norm / a_mean0);
  if (a2lo <= 0.0 || g2lo <= 0.0)
    throw domain_violation("an amplitude square is nonpositive at level " +
                           std::to_string(k) + ": gamma^2 range [" + fmt(g2lo) +
                           ", " + fmt(g2hi) + "], Gamma^2 range [" + fmt(a2lo) +
                           ", " + fmt(a2hi) + "]");
  lv.sa = dump_path("level" + std::to_string(k) + "_sa");
  write_field(lv.sa, pack_dump(gr.n(), rank_t::sym_tensor, std::move(sa)),
              sidecar(gr, lv, "sa"));
  sa.clear();
  dm.clear();

  if (!stacks_only) {
    // magnetic-family carriers feed theta (xi2) and phi (xi1)
    std::array<std::vector<double>, 5> up_th{}, up_phi{};
    for (std::size_t bi = 0; bi < skw.frames.size(); ++bi) {
      const anchored_frame& f = skw.frames[bi];
      const double b_mean =
          oscillation_mean(prof_, mk, nk, transversal_lattice(f).covol);
      std::vector<double> g2(gr.nreal());
      const double scl = eps0 / lv.dskew_phi_norm;
      parallel_for(gr.nreal(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          double v = skw.d[bi];
          for (int c = 0; c < skew_dim; ++c)
            v += skw.K[bi][static_cast<std::size_t>(c)] * scl *
                 dt[static_cast<std::size_t>(c)][i];
          g2[i] = v;
        }
      });
      auto carrier = sample_carrier(gr, f, f.anchor, mk, nk, prof_);
      const double bfac =
          nk * std::sqrt(2.0 * lv.dskew_phi_norm / (eps0 * b_mean));
      parallel_for(gr.nreal(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
          carrier[i] *= bfac * std::sqrt(g2[i]);
      });
      for (int j = 0; j < 5; ++j) {
        axpy_into(up_th[static_cast<std::size_t>(j)], f.xi2[j], carrier);
        axpy_into(up_phi[static_cast<std::size_t>(j)], f.xi1[j], carrier);
      }
    }
    dt.clear();

    field_dump up;
    up.resolution = gr.n();
    up.rank = rank_t::tensor;
    up.components.resize(15);
    for (int j = 0; j < 5; ++j) {
      auto fill = [&](std::array<std::vector<double>, 5>& src, int off) {
        auto& c = src[static_cast<std::size_t>(j)];
        if (c.empty()) c = zeros(gr.nreal());
        up.components[static_cast<std::size_t>(off + j)] = std::move(c);
      };
      fill(up_psi, 0);
      fill(up_th, 5);
      fill(up_phi, 10);
    }
    lv.upot = dump_path("level" + std::to_string(k) + "_upot");
    write_field(lv.upot, up, sidecar(gr, lv, "upot"));

    // smooth in place with the level kernel and store the mollified set
    const auto moll = gr.moll_table(lv.ell);
    for (auto& comp : up.components) {
      auto fh = gr.fft(comp);
      apply_table(gr, fh, moll);
      comp = gr.ifft(fh);
    }
    lv.pot = dump_path("level" + std::to_string(k) + "_pot");
    write_field(lv.pot, up, sidecar(gr, lv, "pot"));
  } else {
    dt.clear();
  }
  levels_.push_back(std::move(lv));
}

void grid_cascade::build_all() {
  if (!levels_.empty()) return;
  const std::string mpath = opt_.scratch_dir + "/manifest.json";
  if (std::filesystem::exists(mpath)) {
    try {
      std::ifstream is(mpath);
      const nlohmann::json j = nlohmann::json::parse(is);
      if (j.at("key") == manifest_key(*grid_, geo_, params_)) {
        std::vector<grid_level_t> lvs;
        bool ok = true;
        for (const auto& je : j.at("levels")) {
          grid_level_t lv = level_from_json(je);
          for (const std::string* p :
               {&lv.pot, &lv.upot, &lv.sa, &lv.sb_sym, &lv.tb})
            if (!p->empty() && !std::filesystem::exists(*p)) ok = false;
          lvs.push_back(std::move(lv));
        }
        if (ok && static_cast<int>(lvs.size()) == params_.kmax + 2) {
          // replay the resolution gate so a cached build cannot mask it
          for (auto& lv : lvs) gate_resolution(opt_, *grid_, lv);
          levels_ = std::move(lvs);
          return;
        }
      }
    } catch (const nlohmann::json::exception&) {
      // stale or foreign manifest: rebuild below
    }
  }
  build_level_zero();
  for (int k = 1; k <= params_.kmax; ++k) advance(false);
  advance(true);
  std::ofstream os(mpath);
  os << manifest_json() << "\n";
}

std::string grid_cascade::manifest_json() const {
  nlohmann::json j;
  j["key"] = manifest_key(*grid_, geo_, params_);
  j["levels"] = nlohmann::json::array();
  for (const auto& lv : levels_) j["levels"].push_back(level_to_json(lv));
  return j.dump(2);
}

}  // namespace mkd5
