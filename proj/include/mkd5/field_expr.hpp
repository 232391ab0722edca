#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mkd5/la.hpp"

namespace mkd5 {

enum class rank_t { scalar, vector, tensor, sym_tensor, skew_tensor };

inline bool is_tensor_rank(rank_t r) {
  return r == rank_t::tensor || r == rank_t::sym_tensor ||
         r == rank_t::skew_tensor;
}

// tagged value; sym/skew tensors carried as full 5x5 matrices
struct value_t {
  rank_t rank = rank_t::scalar;
  double s = 0.0;
  vec5 v{};
  mat5 m{};

  static value_t scalar(double x) {
    value_t r;
    r.rank = rank_t::scalar;
    r.s = x;
    return r;
  }
  static value_t vector(const vec5& x) {
    value_t r;
    r.rank = rank_t::vector;
    r.v = x;
    return r;
  }
  static value_t tensor(rank_t rk, const mat5& x) {
    value_t r;
    r.rank = rk;
    r.m = x;
    return r;
  }
};

class field_expr;
using expr_ptr = std::shared_ptr<const field_expr>;

// Closed-form space-time field on the 5-torus. eval is pure; dx/dt return
// the exact analytic derivative as a new expression (never finite
// differences). spatial_order() is the remaining supported derivative depth.
// dx/dt memoize per node so repeated calls share one derivative subtree.
class field_expr : public std::enable_shared_from_this<field_expr> {
 public:
  virtual ~field_expr() = default;
  virtual rank_t rank() const = 0;
  virtual value_t eval(const vec5& x, double t) const = 0;
  expr_ptr dx(int axis) const;
  expr_ptr dt() const;
  virtual int spatial_order() const = 0;

 protected:
  virtual expr_ptr dx_impl(int axis) const = 0;
  virtual expr_ptr dt_impl() const = 0;

 private:
  mutable std::array<expr_ptr, 5> dx_cache_{};
  mutable expr_ptr dt_cache_{};
};

struct order_exceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct rank_mismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------- leaves

expr_ptr const_scalar(double c);
expr_ptr const_vector(const vec5& v);
expr_ptr const_tensor(rank_t rk, const mat5& m);
// sin/cos(freq * (x - anchor) . dir + phase0); dir need not be integer, the
// caller guarantees torus periodicity (freq * dir integral)
expr_ptr trig(double freq, const vec5& dir, const vec5& anchor, bool cosine);
// test helper: x -> A (x - base), not periodic, local checks only
expr_ptr affine_vector(const mat5& a, const vec5& base);

// ---------------------------------------------------------------- algebra

expr_ptr operator+(expr_ptr a, expr_ptr b);
expr_ptr operator-(expr_ptr a, expr_ptr b);
expr_ptr scale(double c, expr_ptr f);
expr_ptr multiply(expr_ptr a, expr_ptr b);  // scalar*any, elementwise in rank
expr_ptr outer_product(expr_ptr u, expr_ptr v);
expr_ptr component(expr_ptr f, int i);              // vector -> scalar
expr_ptr tensor_entry(expr_ptr f, int i, int j);    // tensor -> scalar
expr_ptr from_components(const std::array<expr_ptr, 5>& c);
expr_ptr tensor_from_entries(rank_t rk,
                             const std::array<std::array<expr_ptr, 5>, 5>& e);
// frobenius pairing against a fixed matrix: scalar field tr(M^T f)
expr_ptr linear_functional(const mat5& m, expr_ptr tensor_field);
// f^p for scalar f (chain rule); caller guarantees positivity on the domain
expr_ptr pow_field(expr_ptr f, double p);
// multiply by e^{-lambda t}
expr_ptr time_decay(double lambda, expr_ptr f);
// memoize evaluations per (x, t); derivatives are cached wrappers too.
// wrap shared subexpressions that are queried repeatedly at one point.
expr_ptr cached(expr_ptr f);

// ---------------------------------------------------------------- calculus

expr_ptr differentiate(expr_ptr f, const std::array<int, 5>& multi_index);
expr_ptr grad(expr_ptr scalar_field);                // vector
expr_ptr grad_vector(expr_ptr f, int i, int j);      // scalar d_i f_j
expr_ptr div_field(expr_ptr f);                      // vector->scalar, tensor->vector (row-wise)
expr_ptr curl(expr_ptr vector_field);                // skew (curl u)_{ij} = d_i u_j - d_j u_i
expr_ptr curl_curl(expr_ptr vector_field);           // grad div - laplacian
expr_ptr laplacian(expr_ptr f);
expr_ptr d_sym(expr_ptr f);   // -grad f - (grad f)^T + 2 (div f) Id
expr_ptr d_skew(expr_ptr f);  // -grad f + (grad f)^T

// evaluation helpers
double eval_scalar(const expr_ptr& f, const vec5& x, double t = 0.0);
vec5 eval_vector(const expr_ptr& f, const vec5& x, double t = 0.0);
mat5 eval_tensor(const expr_ptr& f, const vec5& x, double t = 0.0);

}  // namespace mkd5
