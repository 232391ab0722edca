#include "mkd5/mollify.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <unordered_map>

namespace mkd5 {

gauss_rule gauss_legendre(int q) {
  gauss_rule r;
  r.nodes.resize(q);
  r.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    // Newton from the Chebyshev-like initial guess
    double x = std::cos(tau / 2.0 * (i + 0.75) / (q + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < q; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = q * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

double bump(double s) {
  double u = 1.0 - s * s;
  if (u <= 0.0) return 0.0;
  return std::exp(-1.0 / u);
}

mollifier5::mollifier5(double ell, int q_per_axis) : ell_(ell) {
  gauss_rule g = gauss_legendre(q_per_axis);
  const int q = q_per_axis;
  double total = 0.0;
  for (int i0 = 0; i0 < q; ++i0)
    for (int i1 = 0; i1 < q; ++i1)
      for (int i2 = 0; i2 < q; ++i2)
        for (int i3 = 0; i3 < q; ++i3)
          for (int i4 = 0; i4 < q; ++i4) {
            vec5 y = {g.nodes[i0], g.nodes[i1], g.nodes[i2], g.nodes[i3],
                      g.nodes[i4]};
            double w = g.weights[i0] * g.weights[i1] * g.weights[i2] *
                       g.weights[i3] * g.weights[i4];
            double r2 = 0.0;
            for (int a = 0; a < 5; ++a) {
              y[a] *= ell;
              r2 += y[a] * y[a];
            }
            w *= bump(std::sqrt(r2) / ell);
            if (w <= 0.0) continue;
            offsets_.push_back(y);
            weights_.push_back(w);
            total += w;
          }
  for (double& w : weights_) w /= total;
}

double eta3_marginal(double r, double ell, int q) {
  // integral over a 2-plane: 2 pi * int_r^ell bump(s/ell) s ds
  if (r >= ell) return 0.0;
  gauss_rule g = gauss_legendre(q);
  double acc = 0.0;
  double mid = 0.5 * (ell + r), half = 0.5 * (ell - r);
  for (int i = 0; i < q; ++i) {
    double s = mid + half * g.nodes[i];
    acc += g.weights[i] * bump(s / ell) * s;
  }
  return tau * half * acc;
}

namespace {

struct point_key {
  vec5 x;
  double t;
  bool operator==(const point_key& o) const {
    return t == o.t && x == o.x;
  }
};

struct point_hash {
  size_t operator()(const point_key& k) const {
    // FNV-1a over the raw doubles; exact-bit keying is intended
    unsigned char buf[48];
    std::memcpy(buf, k.x.data(), 40);
    std::memcpy(buf + 40, &k.t, 8);
    size_t h = 1469598103934665603ull;
    for (unsigned char c : buf) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }
};

class mollify_node final : public field_expr {
 public:
  mollify_node(expr_ptr f, mollifier_ptr rule)
      : f_(std::move(f)), rule_(std::move(rule)) {}

  rank_t rank() const override { return f_->rank(); }

  value_t eval(const vec5& x, double t) const override {
    point_key key{x, t};
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    value_t acc;
    acc.rank = f_->rank();
    const auto& ys = rule_->offsets();
    const auto& ws = rule_->weights();
    for (size_t i = 0; i < ys.size(); ++i) {
      vec5 z;
      for (int a = 0; a < 5; ++a) z[a] = x[a] - ys[i][a];
      value_t v = f_->eval(z, t);
      switch (acc.rank) {
        case rank_t::scalar:
          acc.s += ws[i] * v.s;
          break;
        case rank_t::vector:
          for (int a = 0; a < 5; ++a) acc.v[a] += ws[i] * v.v[a];
          break;
        default:
          for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) acc.m[a][b] += ws[i] * v.m[a][b];
          break;
      }
    }
    std::lock_guard<std::mutex> lk(mu_);
    if (memo_.size() > 2000000) memo_.clear();
    memo_.emplace(key, acc);
    return acc;
  }

  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<mollify_node>(f_->dx(axis), rule_);
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<mollify_node>(f_->dt(), rule_);
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  expr_ptr f_;
  mollifier_ptr rule_;
  mutable std::mutex mu_;
  mutable std::unordered_map<point_key, value_t, point_hash> memo_;
};

}  // namespace

expr_ptr mollify(expr_ptr f, mollifier_ptr rule) {
  return std::make_shared<mollify_node>(std::move(f), std::move(rule));
}

}  // namespace mkd5
