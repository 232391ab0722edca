#pragma once

#include <memory>
#include <vector>

#include "mkd5/field_expr.hpp"

namespace mkd5 {

// Gauss-Legendre rule on [-1, 1]
struct gauss_rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
gauss_rule gauss_legendre(int q);

// C-infinity bump exp(-1/(1-s*s)) for |s| < 1, else 0 (unnormalized)
double bump(double s);

// Quadrature realization of convolution against the radial kernel
// eta_ell(y) ~ bump(|y|/ell). Offsets are tensor Gauss nodes on [-ell,ell]^5,
// weights carry the kernel factor and are normalized to sum exactly to one,
// so mollifying a constant reproduces it to machine precision. Two fields
// mollified through the same rule object see the identical discrete operator;
// differences like (eta - delta) * f then cancel structurally.
class mollifier5 {
 public:
  mollifier5(double ell, int q_per_axis);

  double ell() const { return ell_; }
  int points() const { return static_cast<int>(offsets_.size()); }
  const std::vector<vec5>& offsets() const { return offsets_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  double ell_;
  std::vector<vec5> offsets_;
  std::vector<double> weights_;
};
using mollifier_ptr = std::shared_ptr<const mollifier5>;

// 1-D marginal helpers for kernels flattened along invariant directions.
// eta3_marginal(r) integrates eta_ell over a 2-plane at transversal radius r
// (unnormalized shape; callers renormalize their discrete rule).
double eta3_marginal(double r, double ell, int q = 24);

// (eta_ell * f)(x), derivatives commute with the convolution; evaluations are
// memoized per (x, t) so several expressions sharing this node reuse work.
expr_ptr mollify(expr_ptr f, mollifier_ptr rule);

}  // namespace mkd5
