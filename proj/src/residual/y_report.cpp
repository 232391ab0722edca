#include "mkd5/y_report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <utility>

namespace mkd5 {

namespace {

struct sample_plan {
  std::vector<std::size_t> nodes;  // sup nodes, then pair endpoints
  int sup_count = 0;
  std::vector<double> dist;        // one actual distance per pair
};

sample_plan make_plan(const grid& g, const y_norm_options& opt) {
  std::mt19937_64 rng(opt.seed);
  const int n = g.n();
  std::uniform_int_distribution<int> uni(0, n - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double h = tau / n;

  sample_plan plan;
  plan.sup_count = opt.sup_budget;
  auto flat = [&](const std::array<int, 5>& ix) {
    std::size_t f = 0;
    for (int a = 0; a < 5; ++a) f = f * n + ix[a];
    return f;
  };
  for (int s = 0; s < opt.sup_budget; ++s) {
    std::array<int, 5> ix;
    for (int& v : ix) v = uni(rng);
    plan.nodes.push_back(flat(ix));
  }
  while (static_cast<int>(plan.dist.size()) < opt.pair_budget) {
    std::array<int, 5> ix;
    for (int& v : ix) v = uni(rng);
    const double r = std::pow(10.0, -3.0 + 3.0 * u01(rng));
    vec5 dir{};
    double nn = 0.0;
    for (int a = 0; a < 5; ++a) {
      dir[a] = gauss(rng);
      nn += dir[a] * dir[a];
    }
    nn = std::sqrt(nn);
    if (nn < 1e-300) continue;
    std::array<int, 5> jy;
    double d2 = 0.0;
    for (int a = 0; a < 5; ++a) {
      const long steps = std::lround(r * dir[a] / (nn * h));
      jy[a] = static_cast<int>(((ix[a] + steps) % n + n) % n);
      long wrapped = steps % n;
      if (wrapped > n / 2) wrapped -= n;
      if (wrapped < -n / 2) wrapped += n;
      d2 += static_cast<double>(wrapped) * wrapped * h * h;
    }
    if (d2 == 0.0) continue;  // rounded onto the base node
    plan.nodes.push_back(flat(ix));
    plan.nodes.push_back(flat(jy));
    plan.dist.push_back(std::sqrt(d2));
  }
  return plan;
}

struct term_samples {
  residual_part part = residual_part::r1;
  int k = -1;
  double lambda = 0.0;
  // [comp][sampled node]; empty component means identically zero
  std::vector<std::vector<double>> vals;
  // [comp*5 + axis][pair endpoint]; gradients at the Holder pairs only
  std::vector<std::vector<double>> gvals;
};

term_samples gather(const grid& g, const sample_plan& plan,
                    const residual_basis_term& term) {
  term_samples ts;
  ts.part = term.part;
  ts.k = term.k;
  ts.lambda = term.lambda;
  packed_spec mat = term.make();
  const int dim = static_cast<int>(mat.size());
  ts.vals.resize(dim);
  ts.gvals.resize(dim * 5);
  const std::size_t pair_nodes = plan.nodes.size() - plan.sup_count;
  for (int c = 0; c < dim; ++c) {
    if (mat[c].empty()) continue;
    std::vector<double> nodal = g.ifft(mat[c]);
    auto& v = ts.vals[c];
    v.resize(plan.nodes.size());
    for (std::size_t s = 0; s < plan.nodes.size(); ++s)
      v[s] = nodal[plan.nodes[s]];
    for (int a = 0; a < 5; ++a) {
      std::vector<cplx> dh = mat[c];
      apply_deriv(g, dh, a);
      nodal = g.ifft(dh);
      auto& gv = ts.gvals[c * 5 + a];
      gv.resize(pair_nodes);
      for (std::size_t e = 0; e < pair_nodes; ++e)
        gv[e] = nodal[plan.nodes[plan.sup_count + e]];
    }
    mat[c] = {};
  }
  return ts;
}

// evaluate one part's Y channels over the time grid from its term samples
y_part_entry measure(const std::string& name, int k_filter,
                     const std::vector<const term_samples*>& terms,
                     const sample_plan& plan, const y_norm_options& opt) {
  y_part_entry e;
  e.name = name;
  e.k = k_filter;
  if (terms.empty()) return e;
  const int dim = static_cast<int>(terms.front()->vals.size());
  const std::size_t n_nodes = plan.nodes.size();
  const std::size_t n_pairs = plan.dist.size();
  for (double t : opt.times) {
    std::vector<double> dec(terms.size());
    for (std::size_t j = 0; j < terms.size(); ++j)
      dec[j] = std::exp(-terms[j]->lambda * t);
    double sup2 = 0.0;
    for (std::size_t s = 0; s < n_nodes; ++s) {
      double fro2 = 0.0;
      for (int c = 0; c < dim; ++c) {
        double x = 0.0;
        for (std::size_t j = 0; j < terms.size(); ++j) {
          const auto& v = terms[j]->vals[c];
          if (!v.empty()) x += dec[j] * v[s];
        }
        fro2 += x * x;
      }
      sup2 = std::max(sup2, fro2);
    }
    double holder = 0.0;
    for (std::size_t q = 0; q < n_pairs; ++q) {
      double diff2 = 0.0;
      for (int c = 0; c < dim; ++c)
        for (int a = 0; a < 5; ++a) {
          double x = 0.0;
          for (std::size_t j = 0; j < terms.size(); ++j) {
            const auto& gv = terms[j]->gvals[c * 5 + a];
            if (!gv.empty()) x += dec[j] * (gv[2 * q] - gv[2 * q + 1]);
          }
          diff2 += x * x;
        }
      holder = std::max(holder,
                        std::sqrt(diff2) / std::pow(plan.dist[q], opt.kappa));
    }
    const double w0 = std::pow(t, 1.0 - opt.alpha);
    const double w1 = std::pow(t, 1.5 - opt.alpha);
    const double sup = std::sqrt(sup2);
    e.weighted_sup = std::max(e.weighted_sup, w0 * sup);
    e.weighted_holder = std::max(e.weighted_holder, w1 * holder);
    e.y_value = std::max(e.y_value, w0 * sup + w1 * holder);
  }
  return e;
}

std::vector<y_part_entry> side_entries(const grid& g, const grid_residual& res,
                                       bool magnetic, const sample_plan& plan,
                                       const y_norm_options& opt,
                                       double& side_total) {
  std::vector<term_samples> samples;
  for (const residual_basis_term& term : res.basis(magnetic)) {
    bool wanted = false;
    for (residual_part p : opt.parts) wanted = wanted || (p == term.part);
    if (!wanted) continue;
    samples.push_back(gather(g, plan, term));
  }
  std::vector<y_part_entry> entries;
  const char* side = magnetic ? "G" : "F";
  side_total = 0.0;
  for (residual_part p : opt.parts) {
    const std::string name = std::string(side) + part_suffix(p);
    std::vector<const term_samples*> of_part;
    std::vector<int> ks;
    for (const auto& ts : samples)
      if (ts.part == p) {
        of_part.push_back(&ts);
        if (std::find(ks.begin(), ks.end(), ts.k) == ks.end())
          ks.push_back(ts.k);
      }
    y_part_entry whole = measure(name, -1, of_part, plan, opt);
    side_total += whole.y_value;
    entries.push_back(std::move(whole));
    if (ks.size() > 1) {
      std::sort(ks.begin(), ks.end());
      for (int k : ks) {
        std::vector<const term_samples*> of_k;
        for (const term_samples* ts : of_part)
          if (ts->k == k) of_k.push_back(ts);
        entries.push_back(measure(name, k, of_k, plan, opt));
      }
    }
  }
  return entries;
}

}  // namespace

y_norm_result y_norm_report(const grid_flow_assembler& flows, int parity,
                            const y_norm_options& opt_in) {
  y_norm_options opt = opt_in;
  if (opt.times.empty()) {
    const int nt = 16;
    for (int i = 0; i < nt; ++i)
      opt.times.push_back(
          std::pow(10.0, -4.0 + 4.0 * i / static_cast<double>(nt - 1)));
  }
  if (opt.pair_budget < 1 || opt.sup_budget < 1)
    throw std::invalid_argument("y_norm_report: sampling budgets must be >= 1");
  const grid& g = flows.cascade().g();
  grid_residual res(flows, parity);
  const sample_plan plan = make_plan(g, opt);

  y_norm_result r;
  r.parity = parity;
  r.alpha = opt.alpha;
  r.kappa = opt.kappa;
  r.f_entries = side_entries(g, res, false, plan, opt, r.f_total);
  r.g_entries = side_entries(g, res, true, plan, opt, r.g_total);
  r.total = r.f_total + r.g_total;
  return r;
}

void write_y_csv(const y_norm_result& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "part,level,weighted_sup,weighted_holder,y_value\n";
  auto rows = [&](const std::vector<y_part_entry>& es) {
    for (const auto& e : es) {
      out << e.name << ',';
      if (e.k >= 0)
        out << e.k;
      else
        out << "all";
      out << ',' << e.weighted_sup << ',' << e.weighted_holder << ','
          << e.y_value << '\n';
    }
  };
  rows(r.f_entries);
  rows(r.g_entries);
  out << "F_total,,,," << r.f_total << '\n';
  out << "G_total,,,," << r.g_total << '\n';
  out << "total,,,," << r.total << '\n';
}

}  // namespace mkd5
