#include "mkd5/trend.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mkd5 {

namespace {

struct channel_ctx {
  double alpha = 0.0;
  double kappa = 0.0;
  double beta_h = 0.0;
  int kmax = 0;
  std::vector<double> M, N, Nm1, Nup;

  bool heat(int k, int parity) const { return (k % 2) == (parity - 1); }
};

channel_ctx make_ctx(const construction_params& p) {
  if (p.kmax < 0) throw std::invalid_argument("trend: kmax must be >= 0");
  const ladder_t lad = build_ladder(p);
  channel_ctx c;
  c.alpha = p.alpha;
  c.kappa = p.kappa;
  c.beta_h = 0.5 - 0.5 * p.gamma * (4.0 * p.alpha + 1.0 / p.b);
  c.kmax = p.kmax;
  for (int k = 0; k <= p.kmax; ++k) {
    if (!lad.has(k))
      throw std::runtime_error("trend: ladder overflow at level " +
                               std::to_string(k));
    c.M.push_back(static_cast<double>(lad.M[k]));
    c.N.push_back(static_cast<double>(lad.N[k]));
  }
  // previous-level frequency, N_{-1} = 1
  c.Nm1.push_back(1.0);
  for (int k = 1; k <= p.kmax; ++k) c.Nm1.push_back(c.N[k - 1]);
  // next-level frequency; the tail above the ladder follows the growth law
  for (int k = 0; k < p.kmax; ++k) c.Nup.push_back(c.N[k + 1]);
  c.Nup.push_back(std::pow(c.N[p.kmax], p.b));
  return c;
}

// raw channel value c_m(t), levels restricted to k_only (all when -1)
double channel_at(const channel_ctx& c, int parity, const std::string& part,
                  int m, int k_only, double t) {
  const double kap = (m == 1) ? c.kappa : 0.0;
  auto want = [&](int k) { return k_only < 0 || k == k_only; };
  double acc = 0.0;
  if (part == "F1") {
    for (int k = 0; k <= c.kmax; ++k)
      if (c.heat(k, parity) && want(k))
        acc += c.M[k] * std::pow(c.N[k], 1.0 + m + kap) *
               std::exp(-c.N[k] * c.N[k] * t);
  } else if (part == "F2") {
    for (int k = 0; k <= c.kmax; ++k)
      if (!c.heat(k, parity) && want(k))
        acc += std::pow(c.N[k], 2.0 + m + kap) *
               std::exp(-c.Nup[k] * c.Nup[k] * t);
  } else if (part == "F41") {
    if (k_only >= 0)
      throw std::invalid_argument(
          "trend: F41 is a product channel, no per-level restriction");
    double low = 0.0, high = 0.0;
    for (int k = 0; k <= c.kmax; ++k) {
      const double e1 = std::exp(-c.N[k] * c.N[k] * t);
      const double e2 = std::exp(-c.Nup[k] * c.Nup[k] * t);
      low += std::pow(c.N[k], 1.0 + m) * e1;
      high += c.N[k] * c.N[k] * e2 + c.M[k] * e1;
    }
    acc = low * high;
  } else if (part == "F42") {
    for (int k = 0; k <= c.kmax; ++k)
      if (want(k))
        acc += std::pow(c.N[k], 1.0 + m) * c.Nm1[k] *
               std::exp(-c.N[k] * c.N[k] * t);
  } else if (part == "Fh") {
    for (int k = 0; k <= c.kmax; ++k)
      if (c.heat(k, parity) && want(k)) {
        const double e1sq = std::exp(-2.0 * c.N[k] * c.N[k] * t);
        acc += (m == 0) ? c.Nm1[k] * c.N[k] * c.N[k] *
                              std::pow(c.M[k], -1.0 + c.beta_h) * e1sq
                        : c.Nm1[k] * std::pow(c.N[k], 2.0 + kap) * e1sq;
      }
  } else {
    throw std::invalid_argument("trend: unknown part " + part);
  }
  return acc;
}

std::vector<double> log_grid(const trend_options& opt) {
  if (opt.time_points < 2)
    throw std::invalid_argument("trend: need at least two time points");
  std::vector<double> t(opt.time_points);
  const double step = (opt.hi_exp - opt.lo_exp) / (opt.time_points - 1);
  for (int i = 0; i < opt.time_points; ++i)
    t[i] = std::pow(10.0, opt.lo_exp + step * i);
  return t;
}

}  // namespace

channel_profile y_channel_profile(const construction_params& p, int parity,
                                  const std::string& part, int k,
                                  const trend_options& opt) {
  if (parity != 1 && parity != 2)
    throw std::invalid_argument("trend: parity must be 1 or 2");
  const channel_ctx c = make_ctx(p);
  channel_profile out;
  out.t = log_grid(opt);
  out.value.resize(out.t.size());
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const double t = out.t[i];
    const double w0 = std::pow(t, 1.0 - c.alpha);
    const double w1 = std::pow(t, 1.5 - c.alpha);
    out.value[i] = w0 * channel_at(c, parity, part, 0, k, t) +
                   w1 * channel_at(c, parity, part, 1, k, t);
    out.sup = std::max(out.sup, out.value[i]);
  }
  return out;
}

trend_run y_channel_run(const construction_params& p, int parity,
                        const trend_options& opt) {
  trend_run r;
  r.A = p.A;
  r.parity = parity;
  const ladder_t lad = build_ladder(p);
  for (int k = 0; k <= p.kmax; ++k) {
    r.M.push_back(lad.M[k]);
    r.N.push_back(lad.N[k]);
  }
  double sum = 0.0;
  for (const auto& part : trend_part_names()) {
    const channel_profile prof = y_channel_profile(p, parity, part, -1, opt);
    r.part_sups.push_back(prof.sup);
    sum += prof.sup;
  }
  // the magnetic-side channels share the scalings, so (F,G) doubles the sum
  r.total = 2.0 * sum;
  return r;
}

double fh_single_level_slope(const construction_params& p, int k,
                             double window, int points) {
  if (window <= 1.0) throw std::invalid_argument("trend: window must exceed 1");
  if (points < 3) throw std::invalid_argument("trend: need >= 3 fit points");
  const channel_ctx c = make_ctx(p);
  if (k < 0 || k > c.kmax)
    throw std::invalid_argument("trend: level outside ladder");
  const int parity = (k % 2 == 0) ? 1 : 2;  // pick the candidate heating k
  // the sup weight t^{1-alpha} saturates the single-level bound at t*
  const double t_star = (1.0 - c.alpha) / (2.0 * c.N[k] * c.N[k]);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < points; ++i) {
    const double f =
        std::pow(window, -1.0 + 2.0 * static_cast<double>(i) / (points - 1));
    const double t = t_star * f;
    const double v = channel_at(c, parity, "Fh", 0, k, t);
    const double x = std::log(t), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = points;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mkd5
