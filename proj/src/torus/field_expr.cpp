#include "mkd5/field_expr.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <unordered_map>

namespace mkd5 {
namespace {

constexpr int order_unbounded = 1 << 20;

// derivative subtrees are built once per node; recursive because building a
// derivative asks children for theirs
std::recursive_mutex deriv_cache_mutex;

value_t value_add(const value_t& a, const value_t& b) {
  if (a.rank != b.rank) {
    // sym/skew/general tensors may mix under sums; result is general
    if (is_tensor_rank(a.rank) && is_tensor_rank(b.rank)) {
      value_t r = value_t::tensor(rank_t::tensor, a.m);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r.m[i][j] += b.m[i][j];
      return r;
    }
    throw rank_mismatch("sum of fields with different rank");
  }
  value_t r = a;
  switch (a.rank) {
    case rank_t::scalar:
      r.s += b.s;
      break;
    case rank_t::vector:
      for (int i = 0; i < 5; ++i) r.v[i] += b.v[i];
      break;
    default:
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r.m[i][j] += b.m[i][j];
      break;
  }
  return r;
}

value_t value_scale(double c, const value_t& a) {
  value_t r = a;
  switch (a.rank) {
    case rank_t::scalar:
      r.s *= c;
      break;
    case rank_t::vector:
      for (int i = 0; i < 5; ++i) r.v[i] *= c;
      break;
    default:
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r.m[i][j] *= c;
      break;
  }
  return r;
}

rank_t sum_rank(rank_t a, rank_t b) {
  if (a == b) return a;
  if (is_tensor_rank(a) && is_tensor_rank(b)) return rank_t::tensor;
  throw rank_mismatch("sum of fields with different rank");
}

class const_node final : public field_expr {
 public:
  explicit const_node(value_t v) : v_(v) {}
  rank_t rank() const override { return v_.rank; }
  value_t eval(const vec5&, double) const override { return v_; }
  expr_ptr dx_impl(int) const override {
    return std::make_shared<const_node>(value_scale(0.0, v_));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<const_node>(value_scale(0.0, v_));
  }
  int spatial_order() const override { return order_unbounded; }

 private:
  value_t v_;
};

expr_ptr zero_like(rank_t rk) {
  value_t v;
  v.rank = rk;
  return std::make_shared<const_node>(v);
}

class trig_node final : public field_expr {
 public:
  trig_node(double amp, double freq, const vec5& dir, const vec5& anchor,
            bool cosine)
      : amp_(amp), freq_(freq), dir_(dir), anchor_(anchor), cosine_(cosine) {}
  rank_t rank() const override { return rank_t::scalar; }
  value_t eval(const vec5& x, double) const override {
    double th = 0.0;
    for (int i = 0; i < 5; ++i) th += (x[i] - anchor_[i]) * dir_[i];
    th *= freq_;
    return value_t::scalar(amp_ * (cosine_ ? std::cos(th) : std::sin(th)));
  }
  expr_ptr dx_impl(int axis) const override {
    double c = amp_ * freq_ * dir_[axis];
    if (cosine_) c = -c;  // d cos = -sin, d sin = +cos
    return std::make_shared<trig_node>(c, freq_, dir_, anchor_, !cosine_);
  }
  expr_ptr dt_impl() const override { return zero_like(rank_t::scalar); }
  int spatial_order() const override { return order_unbounded; }

 private:
  double amp_, freq_;
  vec5 dir_, anchor_;
  bool cosine_;
};

class affine_node final : public field_expr {
 public:
  affine_node(const mat5& a, const vec5& base) : a_(a), base_(base) {}
  rank_t rank() const override { return rank_t::vector; }
  value_t eval(const vec5& x, double) const override {
    vec5 r{};
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < 5; ++k) r[i] += a_[i][k] * (x[k] - base_[k]);
    return value_t::vector(r);
  }
  expr_ptr dx_impl(int axis) const override {
    vec5 col{};
    for (int i = 0; i < 5; ++i) col[i] = a_[i][axis];
    return std::make_shared<const_node>(value_t::vector(col));
  }
  expr_ptr dt_impl() const override { return zero_like(rank_t::vector); }
  int spatial_order() const override { return order_unbounded; }

 private:
  mat5 a_;
  vec5 base_;
};

class sum_node final : public field_expr {
 public:
  sum_node(expr_ptr a, expr_ptr b)
      : a_(std::move(a)), b_(std::move(b)), rank_(sum_rank(a_->rank(), b_->rank())) {}
  rank_t rank() const override { return rank_; }
  value_t eval(const vec5& x, double t) const override {
    return value_add(a_->eval(x, t), b_->eval(x, t));
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<sum_node>(a_->dx(axis), b_->dx(axis));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<sum_node>(a_->dt(), b_->dt());
  }
  int spatial_order() const override {
    return std::min(a_->spatial_order(), b_->spatial_order());
  }

 private:
  expr_ptr a_, b_;
  rank_t rank_;
};

class scale_node final : public field_expr {
 public:
  scale_node(double c, expr_ptr f) : c_(c), f_(std::move(f)) {}
  rank_t rank() const override { return f_->rank(); }
  value_t eval(const vec5& x, double t) const override {
    return value_scale(c_, f_->eval(x, t));
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<scale_node>(c_, f_->dx(axis));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<scale_node>(c_, f_->dt());
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  double c_;
  expr_ptr f_;
};

// scalar * anything, Leibniz rule
class product_node final : public field_expr {
 public:
  product_node(expr_ptr s, expr_ptr f) : s_(std::move(s)), f_(std::move(f)) {
    if (s_->rank() != rank_t::scalar)
      throw rank_mismatch("product needs a scalar left factor");
  }
  rank_t rank() const override { return f_->rank(); }
  value_t eval(const vec5& x, double t) const override {
    return value_scale(s_->eval(x, t).s, f_->eval(x, t));
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<sum_node>(
        std::make_shared<product_node>(s_->dx(axis), f_),
        std::make_shared<product_node>(s_, f_->dx(axis)));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<sum_node>(
        std::make_shared<product_node>(s_->dt(), f_),
        std::make_shared<product_node>(s_, f_->dt()));
  }
  int spatial_order() const override {
    return std::min(s_->spatial_order(), f_->spatial_order());
  }

 private:
  expr_ptr s_, f_;
};

class outer_node final : public field_expr {
 public:
  outer_node(expr_ptr u, expr_ptr v) : u_(std::move(u)), v_(std::move(v)) {
    if (u_->rank() != rank_t::vector || v_->rank() != rank_t::vector)
      throw rank_mismatch("outer product needs two vector fields");
  }
  rank_t rank() const override { return rank_t::tensor; }
  value_t eval(const vec5& x, double t) const override {
    return value_t::tensor(rank_t::tensor,
                           outer(u_->eval(x, t).v, v_->eval(x, t).v));
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<sum_node>(
        std::make_shared<outer_node>(u_->dx(axis), v_),
        std::make_shared<outer_node>(u_, v_->dx(axis)));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<sum_node>(std::make_shared<outer_node>(u_->dt(), v_),
                                      std::make_shared<outer_node>(u_, v_->dt()));
  }
  int spatial_order() const override {
    return std::min(u_->spatial_order(), v_->spatial_order());
  }

 private:
  expr_ptr u_, v_;
};

class component_node final : public field_expr {
 public:
  component_node(expr_ptr f, int i) : f_(std::move(f)), i_(i) {
    if (f_->rank() != rank_t::vector)
      throw rank_mismatch("component extraction needs a vector field");
  }
  rank_t rank() const override { return rank_t::scalar; }
  value_t eval(const vec5& x, double t) const override {
    return value_t::scalar(f_->eval(x, t).v[i_]);
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<component_node>(f_->dx(axis), i_);
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<component_node>(f_->dt(), i_);
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  expr_ptr f_;
  int i_;
};

class entry_node final : public field_expr {
 public:
  entry_node(expr_ptr f, int i, int j) : f_(std::move(f)), i_(i), j_(j) {
    if (!is_tensor_rank(f_->rank()))
      throw rank_mismatch("entry extraction needs a tensor field");
  }
  rank_t rank() const override { return rank_t::scalar; }
  value_t eval(const vec5& x, double t) const override {
    return value_t::scalar(f_->eval(x, t).m[i_][j_]);
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<entry_node>(f_->dx(axis), i_, j_);
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<entry_node>(f_->dt(), i_, j_);
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  expr_ptr f_;
  int i_, j_;
};

class components_node final : public field_expr {
 public:
  explicit components_node(const std::array<expr_ptr, 5>& c) : c_(c) {
    for (const auto& f : c_)
      if (f->rank() != rank_t::scalar)
        throw rank_mismatch("vector assembly needs scalar components");
  }
  rank_t rank() const override { return rank_t::vector; }
  value_t eval(const vec5& x, double t) const override {
    vec5 r{};
    for (int i = 0; i < 5; ++i) r[i] = c_[i]->eval(x, t).s;
    return value_t::vector(r);
  }
  expr_ptr dx_impl(int axis) const override {
    std::array<expr_ptr, 5> d;
    for (int i = 0; i < 5; ++i) d[i] = c_[i]->dx(axis);
    return std::make_shared<components_node>(d);
  }
  expr_ptr dt_impl() const override {
    std::array<expr_ptr, 5> d;
    for (int i = 0; i < 5; ++i) d[i] = c_[i]->dt();
    return std::make_shared<components_node>(d);
  }
  int spatial_order() const override {
    int o = order_unbounded;
    for (const auto& f : c_) o = std::min(o, f->spatial_order());
    return o;
  }

 private:
  std::array<expr_ptr, 5> c_;
};

class entries_node final : public field_expr {
 public:
  entries_node(rank_t rk, const std::array<std::array<expr_ptr, 5>, 5>& e)
      : rk_(rk), e_(e) {
    if (!is_tensor_rank(rk)) throw rank_mismatch("tensor assembly rank");
    for (const auto& row : e_)
      for (const auto& f : row)
        if (f->rank() != rank_t::scalar)
          throw rank_mismatch("tensor assembly needs scalar entries");
  }
  rank_t rank() const override { return rk_; }
  value_t eval(const vec5& x, double t) const override {
    mat5 m{};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) m[i][j] = e_[i][j]->eval(x, t).s;
    return value_t::tensor(rk_, m);
  }
  expr_ptr dx_impl(int axis) const override {
    std::array<std::array<expr_ptr, 5>, 5> d;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) d[i][j] = e_[i][j]->dx(axis);
    return std::make_shared<entries_node>(rk_, d);
  }
  expr_ptr dt_impl() const override {
    std::array<std::array<expr_ptr, 5>, 5> d;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) d[i][j] = e_[i][j]->dt();
    return std::make_shared<entries_node>(rk_, d);
  }
  int spatial_order() const override {
    int o = order_unbounded;
    for (const auto& row : e_)
      for (const auto& f : row) o = std::min(o, f->spatial_order());
    return o;
  }

 private:
  rank_t rk_;
  std::array<std::array<expr_ptr, 5>, 5> e_;
};

class functional_node final : public field_expr {
 public:
  functional_node(const mat5& m, expr_ptr f) : m_(m), f_(std::move(f)) {
    if (!is_tensor_rank(f_->rank()))
      throw rank_mismatch("linear functional needs a tensor field");
  }
  rank_t rank() const override { return rank_t::scalar; }
  value_t eval(const vec5& x, double t) const override {
    return value_t::scalar(fro_dot(m_, f_->eval(x, t).m));
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<functional_node>(m_, f_->dx(axis));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<functional_node>(m_, f_->dt());
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  mat5 m_;
  expr_ptr f_;
};

class pow_node final : public field_expr {
 public:
  pow_node(expr_ptr f, double p) : f_(std::move(f)), p_(p) {
    if (f_->rank() != rank_t::scalar)
      throw rank_mismatch("power needs a scalar field");
  }
  rank_t rank() const override { return rank_t::scalar; }
  value_t eval(const vec5& x, double t) const override {
    return value_t::scalar(std::pow(f_->eval(x, t).s, p_));
  }
  expr_ptr dx_impl(int axis) const override {
    expr_ptr inner = std::make_shared<pow_node>(f_, p_ - 1.0);
    return std::make_shared<product_node>(
        std::make_shared<scale_node>(p_, inner), f_->dx(axis));
  }
  expr_ptr dt_impl() const override {
    expr_ptr inner = std::make_shared<pow_node>(f_, p_ - 1.0);
    return std::make_shared<product_node>(
        std::make_shared<scale_node>(p_, inner), f_->dt());
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  expr_ptr f_;
  double p_;
};

struct point_key {
  std::array<double, 6> c;
  bool operator==(const point_key& o) const { return c == o.c; }
};

struct point_key_hash {
  std::size_t operator()(const point_key& k) const {
    std::uint64_t h = 1469598103934665603ull;
    const unsigned char* p = reinterpret_cast<const unsigned char*>(k.c.data());
    for (std::size_t i = 0; i < sizeof(k.c); ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

class cached_node final : public field_expr {
 public:
  explicit cached_node(expr_ptr f) : f_(std::move(f)) {}
  rank_t rank() const override { return f_->rank(); }
  value_t eval(const vec5& x, double t) const override {
    point_key k{{x[0], x[1], x[2], x[3], x[4], t}};
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = memo_.find(k);
      if (it != memo_.end()) return it->second;
    }
    value_t v = f_->eval(x, t);
    std::lock_guard<std::mutex> lk(mu_);
    if (memo_.size() >= kCap) memo_.clear();
    memo_.emplace(k, v);
    return v;
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<cached_node>(f_->dx(axis));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<cached_node>(f_->dt());
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  static constexpr std::size_t kCap = 4096;
  expr_ptr f_;
  mutable std::mutex mu_;
  mutable std::unordered_map<point_key, value_t, point_key_hash> memo_;
};

class decay_node final : public field_expr {
 public:
  decay_node(double lambda, expr_ptr f) : lambda_(lambda), f_(std::move(f)) {}
  rank_t rank() const override { return f_->rank(); }
  value_t eval(const vec5& x, double t) const override {
    return value_scale(std::exp(-lambda_ * t), f_->eval(x, t));
  }
  expr_ptr dx_impl(int axis) const override {
    return std::make_shared<decay_node>(lambda_, f_->dx(axis));
  }
  expr_ptr dt_impl() const override {
    return std::make_shared<sum_node>(
        std::make_shared<decay_node>(
            lambda_, std::make_shared<scale_node>(-lambda_, f_)),
        std::make_shared<decay_node>(lambda_, f_->dt()));
  }
  int spatial_order() const override { return f_->spatial_order(); }

 private:
  double lambda_;
  expr_ptr f_;
};

}  // namespace

expr_ptr field_expr::dx(int axis) const {
  std::lock_guard<std::recursive_mutex> lk(deriv_cache_mutex);
  if (!dx_cache_[static_cast<std::size_t>(axis)])
    dx_cache_[static_cast<std::size_t>(axis)] = dx_impl(axis);
  return dx_cache_[static_cast<std::size_t>(axis)];
}

expr_ptr field_expr::dt() const {
  std::lock_guard<std::recursive_mutex> lk(deriv_cache_mutex);
  if (!dt_cache_) dt_cache_ = dt_impl();
  return dt_cache_;
}

expr_ptr cached(expr_ptr f) {
  return std::make_shared<cached_node>(std::move(f));
}

expr_ptr const_scalar(double c) {
  return std::make_shared<const_node>(value_t::scalar(c));
}
expr_ptr const_vector(const vec5& v) {
  return std::make_shared<const_node>(value_t::vector(v));
}
expr_ptr const_tensor(rank_t rk, const mat5& m) {
  return std::make_shared<const_node>(value_t::tensor(rk, m));
}
expr_ptr trig(double freq, const vec5& dir, const vec5& anchor, bool cosine) {
  return std::make_shared<trig_node>(1.0, freq, dir, anchor, cosine);
}
expr_ptr affine_vector(const mat5& a, const vec5& base) {
  return std::make_shared<affine_node>(a, base);
}

expr_ptr operator+(expr_ptr a, expr_ptr b) {
  return std::make_shared<sum_node>(std::move(a), std::move(b));
}
expr_ptr operator-(expr_ptr a, expr_ptr b) {
  return std::make_shared<sum_node>(
      std::move(a), std::make_shared<scale_node>(-1.0, std::move(b)));
}
expr_ptr scale(double c, expr_ptr f) {
  return std::make_shared<scale_node>(c, std::move(f));
}
expr_ptr multiply(expr_ptr a, expr_ptr b) {
  if (a->rank() != rank_t::scalar && b->rank() == rank_t::scalar)
    std::swap(a, b);
  return std::make_shared<product_node>(std::move(a), std::move(b));
}
expr_ptr outer_product(expr_ptr u, expr_ptr v) {
  return std::make_shared<outer_node>(std::move(u), std::move(v));
}
expr_ptr component(expr_ptr f, int i) {
  return std::make_shared<component_node>(std::move(f), i);
}
expr_ptr tensor_entry(expr_ptr f, int i, int j) {
  return std::make_shared<entry_node>(std::move(f), i, j);
}
expr_ptr from_components(const std::array<expr_ptr, 5>& c) {
  return std::make_shared<components_node>(c);
}
expr_ptr tensor_from_entries(rank_t rk,
                             const std::array<std::array<expr_ptr, 5>, 5>& e) {
  return std::make_shared<entries_node>(rk, e);
}
expr_ptr linear_functional(const mat5& m, expr_ptr f) {
  return std::make_shared<functional_node>(m, std::move(f));
}
expr_ptr pow_field(expr_ptr f, double p) {
  return std::make_shared<pow_node>(std::move(f), p);
}
expr_ptr time_decay(double lambda, expr_ptr f) {
  return std::make_shared<decay_node>(lambda, std::move(f));
}

expr_ptr differentiate(expr_ptr f, const std::array<int, 5>& multi_index) {
  int total = 0;
  for (int k : multi_index) total += k;
  if (total > f->spatial_order())
    throw order_exceeded("requested derivative order exceeds field budget");
  expr_ptr g = std::move(f);
  for (int axis = 0; axis < 5; ++axis)
    for (int k = 0; k < multi_index[axis]; ++k) g = g->dx(axis);
  return g;
}

expr_ptr grad(expr_ptr f) {
  std::array<expr_ptr, 5> c;
  for (int i = 0; i < 5; ++i) c[i] = f->dx(i);
  return from_components(c);
}

expr_ptr grad_vector(expr_ptr f, int i, int j) {
  return component(f->dx(i), j);
}

expr_ptr div_field(expr_ptr f) {
  if (f->rank() == rank_t::vector) {
    expr_ptr s = component(f->dx(0), 0);
    for (int i = 1; i < 5; ++i) s = s + component(f->dx(i), i);
    return s;
  }
  if (is_tensor_rank(f->rank())) {
    std::array<expr_ptr, 5> c;
    for (int b = 0; b < 5; ++b) {
      expr_ptr s = tensor_entry(f->dx(0), 0, b);
      for (int a = 1; a < 5; ++a) s = s + tensor_entry(f->dx(a), a, b);
      c[b] = s;
    }
    return from_components(c);
  }
  throw rank_mismatch("divergence needs a vector or tensor field");
}

expr_ptr curl(expr_ptr f) {
  std::array<std::array<expr_ptr, 5>, 5> e;
  std::array<expr_ptr, 5> d;
  for (int i = 0; i < 5; ++i) d[i] = f->dx(i);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      e[i][j] = component(d[i], j) - component(d[j], i);
  return tensor_from_entries(rank_t::skew_tensor, e);
}

expr_ptr laplacian(expr_ptr f) {
  expr_ptr s = f->dx(0)->dx(0);
  for (int i = 1; i < 5; ++i) s = s + f->dx(i)->dx(i);
  return s;
}

expr_ptr curl_curl(expr_ptr f) {
  return grad(div_field(f)) - laplacian(f);
}

expr_ptr d_sym(expr_ptr f) {
  std::array<expr_ptr, 5> d;
  for (int i = 0; i < 5; ++i) d[i] = f->dx(i);
  expr_ptr divf = component(d[0], 0);
  for (int i = 1; i < 5; ++i) divf = divf + component(d[i], i);
  std::array<std::array<expr_ptr, 5>, 5> e;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      expr_ptr s = scale(-1.0, component(d[a], b)) - component(d[b], a);
      if (a == b) s = s + scale(2.0, divf);
      e[a][b] = s;
    }
  return tensor_from_entries(rank_t::sym_tensor, e);
}

expr_ptr d_skew(expr_ptr f) {
  std::array<std::array<expr_ptr, 5>, 5> e;
  std::array<expr_ptr, 5> d;
  for (int i = 0; i < 5; ++i) d[i] = f->dx(i);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      e[a][b] = component(d[b], a) - component(d[a], b);
  return tensor_from_entries(rank_t::skew_tensor, e);
}

double eval_scalar(const expr_ptr& f, const vec5& x, double t) {
  value_t v = f->eval(x, t);
  if (v.rank != rank_t::scalar) throw rank_mismatch("expected scalar field");
  return v.s;
}
vec5 eval_vector(const expr_ptr& f, const vec5& x, double t) {
  value_t v = f->eval(x, t);
  if (v.rank != rank_t::vector) throw rank_mismatch("expected vector field");
  return v.v;
}
mat5 eval_tensor(const expr_ptr& f, const vec5& x, double t) {
  value_t v = f->eval(x, t);
  if (!is_tensor_rank(v.rank)) throw rank_mismatch("expected tensor field");
  return v.m;
}

}  // namespace mkd5
