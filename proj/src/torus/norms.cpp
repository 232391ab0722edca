#include "mkd5/norms.hpp"

#include <algorithm>
#include <cmath>

#include "mkd5/mollify.hpp"
#include "mkd5/parallel.hpp"

namespace mkd5 {
namespace {

double frac(double x) { return x - std::floor(x); }

double point_abs(const value_t& v) {
  switch (v.rank) {
    case rank_t::scalar:
      return std::abs(v.s);
    case rank_t::vector: {
      double m = 0.0;
      for (double c : v.v) m = std::max(m, std::abs(c));
      return m;
    }
    default: {
      double m = 0.0;
      for (const auto& row : v.m)
        for (double c : row) m = std::max(m, std::abs(c));
      return m;
    }
  }
}

double point_diff(const value_t& a, const value_t& b) {
  switch (a.rank) {
    case rank_t::scalar:
      return std::abs(a.s - b.s);
    case rank_t::vector: {
      double m = 0.0;
      for (int i = 0; i < 5; ++i) m = std::max(m, std::abs(a.v[i] - b.v[i]));
      return m;
    }
    default: {
      double m = 0.0;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
          m = std::max(m, std::abs(a.m[i][j] - b.m[i][j]));
      return m;
    }
  }
}

// covering radius heuristic for the Kronecker set: ~ pi / budget^{1/5}
double mesh_radius(long budget) {
  return tau / 2.0 * std::pow(static_cast<double>(std::max<long>(budget, 1)),
                              -0.2);
}

double torus_dist(const vec5& a, const vec5& b) {
  double s = 0.0;
  for (int i = 0; i < 5; ++i) {
    double d = std::abs(a[i] - b[i]);
    d = std::fmod(d, tau);
    d = std::min(d, tau - d);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

vec5 torus_sample(long i) {
  // fractional parts of sqrt(prime) generate a well-distributed lattice flow
  static const double alpha[5] = {0.41421356237309515, 0.7320508075688772,
                                  0.23606797749978969, 0.6457513110645906,
                                  0.3166247903553998};
  vec5 x;
  for (int a = 0; a < 5; ++a) x[a] = tau * frac((i + 1) * alpha[a]);
  return x;
}

pair_sample holder_pair(long i, int scale_count) {
  pair_sample p;
  p.x = torus_sample(2 * i);
  vec5 d = torus_sample(2 * i + 1);
  double nrm = 0.0;
  for (int a = 0; a < 5; ++a) {
    d[a] -= tau / 2.0;
    nrm += d[a] * d[a];
  }
  nrm = std::sqrt(std::max(nrm, 1e-300));
  int j = static_cast<int>(i % scale_count);
  double len = tau / 2.0 * std::pow(2.0, -j);
  for (int a = 0; a < 5; ++a) p.y[a] = p.x[a] + d[a] / nrm * len;
  p.dist = len;
  return p;
}

norm_estimate_t linf_estimate(const expr_ptr& f, double t, long budget,
                              double lip_bound) {
  double lo = reduce_max(budget, [&](long i) {
    return point_abs(f->eval(torus_sample(i), t));
  });
  norm_estimate_t e;
  e.kind = norm_kind::linf;
  e.lower = lo;
  e.value = lo * (1.0 + lip_bound * mesh_radius(budget));
  e.method = norm_method::dense_sampling;
  e.sample_budget = budget;
  return e;
}

norm_estimate_t holder_estimate(const expr_ptr& f, double kappa, double t,
                                long budget) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("holder exponent must lie in (0,1)");
  double lo = reduce_max(budget, [&](long i) {
    pair_sample p = holder_pair(i);
    value_t a = f->eval(p.x, t);
    value_t b = f->eval(p.y, t);
    return point_diff(a, b) / std::pow(p.dist, kappa);
  });
  norm_estimate_t e;
  e.kind = norm_kind::holder;
  e.lower = lo;
  e.value = lo;
  e.method = norm_method::dense_sampling;
  e.sample_budget = budget;
  return e;
}

double grid_linf(const std::vector<std::vector<double>>& comps) {
  double m = 0.0;
  for (const auto& c : comps) m = std::max(m, max_abs(c));
  return m;
}

norm_estimate_t grid_holder(const grid& g,
                            const std::vector<std::vector<double>>& comps,
                            double kappa, long pair_budget) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("holder exponent must lie in (0,1)");
  const int n = g.n();
  const std::size_t nreal = g.nreal();
  const int scale_count = 1 + static_cast<int>(std::floor(std::log2(n / 2)));
  // deterministic pairs: base node from the Kronecker flow, axis-aligned
  // dyadic offsets down to one cell
  double lo = reduce_max(pair_budget, [&](long i) {
    vec5 s = torus_sample(i);
    long a[5];
    for (int d = 0; d < 5; ++d)
      a[d] = static_cast<long>(s[d] / tau * n) % n;
    int axis = static_cast<int>(i % 5);
    int j = static_cast<int>((i / 5) % scale_count);
    long step = 1L << j;
    long b[5];
    for (int d = 0; d < 5; ++d) b[d] = a[d];
    b[axis] = (a[axis] + step) % n;
    auto flat = [&](const long* idx) {
      std::size_t r = 0;
      for (int d = 0; d < 5; ++d) r = r * n + static_cast<std::size_t>(idx[d]);
      return r;
    };
    std::size_t ia = flat(a), ib = flat(b);
    (void)nreal;
    double diff = 0.0;
    for (const auto& c : comps)
      diff = std::max(diff, std::abs(c[ia] - c[ib]));
    double dist = tau * step / n;
    return diff / std::pow(dist, kappa);
  });
  norm_estimate_t e;
  e.kind = norm_kind::holder;
  e.lower = lo;
  e.value = lo;
  e.method = norm_method::dense_sampling;
  e.sample_budget = pair_budget;
  return e;
}

norm_estimate_t grid_lp(const grid& g,
                        const std::vector<std::vector<double>>& comps,
                        double p) {
  const double cell = std::pow(tau / g.n(), 5);
  double acc = reduce_sum(g.nreal(), [&](std::size_t i) {
    double s2 = 0.0;
    for (const auto& c : comps) s2 += c[i] * c[i];
    return std::pow(s2, p / 2.0);
  });
  norm_estimate_t e;
  e.kind = norm_kind::lp;
  e.value = std::pow(acc * cell, 1.0 / p);
  e.lower = e.value;
  e.method = norm_method::quadrature;
  e.sample_budget = static_cast<long>(g.nreal());
  return e;
}

norm_estimate_t grid_neg_sobolev(const grid& g, const spec_vec& f, double p) {
  std::vector<std::vector<double>> comps(5);
  for (int c = 0; c < 5; ++c) {
    std::vector<cplx> fh = f[c];
    apply_inv_sqrt_lap(g, fh);
    comps[c] = g.ifft(fh);
  }
  norm_estimate_t e = grid_lp(g, comps, p);
  e.kind = norm_kind::neg_sobolev;
  e.method = norm_method::spectral;
  return e;
}

carleson_report carleson_estimate(const grid& g, const spec_vec& u, int j_min,
                                  int j_max, int time_nodes) {
  const int n = g.n();
  const double h = tau / n;
  carleson_report rep;
  gauss_rule gr = gauss_legendre(time_nodes);
  for (int j = j_min; j <= j_max; ++j) {
    const double radius = tau * std::pow(2.0, -j);
    if (radius > tau / 2.0 + 1e-12) continue;  // periodic distance caps at pi
    const int stride = n >> j;
    if (stride < 1) break;
    const int anchors_per_axis = 1 << j;

    // ball stencil around the origin node (periodic distance <= radius)
    std::vector<std::array<int, 5>> stencil;
    int reach = std::min(n / 2, static_cast<int>(std::floor(radius / h)) + 1);
    for (int d0 = -reach; d0 <= reach; ++d0)
      for (int d1 = -reach; d1 <= reach; ++d1)
        for (int d2 = -reach; d2 <= reach; ++d2)
          for (int d3 = -reach; d3 <= reach; ++d3)
            for (int d4 = -reach; d4 <= reach; ++d4) {
              double r2 = static_cast<double>(d0) * d0 + static_cast<double>(d1) * d1 +
                          static_cast<double>(d2) * d2 + static_cast<double>(d3) * d3 +
                          static_cast<double>(d4) * d4;
              if (std::sqrt(r2) * h <= radius)
                stencil.push_back({d0, d1, d2, d3, d4});
            }

    const long nanchor = static_cast<long>(std::pow(anchors_per_axis, 5));
    std::vector<double> cylinder(nanchor, 0.0);

    // time integral of int_B |e^{t lap} u|^2 via Gauss nodes on [0, R^2]
    for (int q = 0; q < time_nodes; ++q) {
      double t = radius * radius * 0.5 * (gr.nodes[q] + 1.0);
      double wt = radius * radius * 0.5 * gr.weights[q];
      std::vector<std::vector<double>> ut(5);
      for (int c = 0; c < 5; ++c) {
        std::vector<cplx> fh = u[c];
        apply_heat(g, fh, t);
        ut[c] = g.ifft(fh);
      }
      std::vector<double> sq(g.nreal());
      parallel_for(g.nreal(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          double s = 0.0;
          for (int c = 0; c < 5; ++c) s += ut[c][i] * ut[c][i];
          sq[i] = s;
        }
      });
      parallel_for(static_cast<std::size_t>(nanchor), [&](std::size_t lo,
                                                          std::size_t hi) {
        for (std::size_t a = lo; a < hi; ++a) {
          std::size_t rem = a;
          int base[5];
          for (int d = 4; d >= 0; --d) {
            base[d] = static_cast<int>(rem % anchors_per_axis) * stride;
            rem /= anchors_per_axis;
          }
          double acc = 0.0;
          for (const auto& off : stencil) {
            std::size_t flat = 0;
            for (int d = 0; d < 5; ++d) {
              int idx = base[d] + off[d];
              idx %= n;
              if (idx < 0) idx += n;
              flat = flat * n + static_cast<std::size_t>(idx);
            }
            acc += sq[flat];
          }
          cylinder[a] += wt * acc * std::pow(h, 5);
        }
      });
    }
    double sup_a = 0.0;
    for (double cyl : cylinder) sup_a = std::max(sup_a, cyl);
    sup_a /= std::pow(radius, 5);
    rep.scales.push_back({j, radius, sup_a});
    rep.value = std::max(rep.value, sup_a);
    rep.sample_budget += nanchor * time_nodes;
  }
  return rep;
}

cube_report mean_oscillation(const grid& g,
                             const std::vector<std::vector<double>>& comps,
                             int j_max) {
  const int n = g.n();
  cube_report rep;
  for (int j = 0; j <= j_max; ++j) {
    const int stride = n >> j;
    if (stride < 2) break;  // need at least two nodes per side to oscillate
    const int anchors_per_axis = 1 << j;
    const long nanchor = static_cast<long>(std::pow(anchors_per_axis, 5));
    const int side = stride;  // nodes per cube side
    double sup_c = reduce_max(nanchor, [&](long a) {
      long rem = a;
      int base[5];
      for (int d = 4; d >= 0; --d) {
        base[d] = static_cast<int>(rem % anchors_per_axis) * stride;
        rem /= anchors_per_axis;
      }
      const long cube_nodes = static_cast<long>(std::pow(side, 5));
      // two passes: componentwise mean, then mean pointwise deviation
      const int ncomp = static_cast<int>(comps.size());
      std::vector<double> mean(ncomp, 0.0);
      for (long ci = 0; ci < cube_nodes; ++ci) {
        long r = ci;
        std::size_t flat = 0;
        for (int d = 0; d < 5; ++d) {
          long p5 = 1;
          for (int dd = d + 1; dd < 5; ++dd) p5 *= side;
          int idx = (base[d] + static_cast<int>(r / p5)) % n;
          r %= p5;
          flat = flat * n + static_cast<std::size_t>(idx);
        }
        for (int c = 0; c < ncomp; ++c) mean[c] += comps[c][flat];
      }
      for (int c = 0; c < ncomp; ++c) mean[c] /= static_cast<double>(cube_nodes);
      double osc = 0.0;
      for (long ci = 0; ci < cube_nodes; ++ci) {
        long r = ci;
        std::size_t flat = 0;
        for (int d = 0; d < 5; ++d) {
          long p5 = 1;
          for (int dd = d + 1; dd < 5; ++dd) p5 *= side;
          int idx = (base[d] + static_cast<int>(r / p5)) % n;
          r %= p5;
          flat = flat * n + static_cast<std::size_t>(idx);
        }
        double dev2 = 0.0;
        for (int c = 0; c < ncomp; ++c) {
          double d1 = comps[c][flat] - mean[c];
          dev2 += d1 * d1;
        }
        osc += std::sqrt(dev2);
      }
      return osc / static_cast<double>(cube_nodes);
    });
    rep.scales.push_back({j, tau * std::pow(2.0, -j), sup_c});
    rep.value = std::max(rep.value, sup_c);
  }
  return rep;
}

}  // namespace mkd5
