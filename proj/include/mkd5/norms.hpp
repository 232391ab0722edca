#pragma once

#include <vector>

#include "mkd5/field_expr.hpp"
#include "mkd5/grid.hpp"

namespace mkd5 {

enum class norm_kind {
  linf,
  holder,
  c1kappa,
  lp,
  neg_sobolev,
  carleson,
  ynorm,
  xnorm
};
enum class norm_method { dense_sampling, quadrature, spectral };

struct norm_estimate_t {
  norm_kind kind = norm_kind::linf;
  double value = 0.0;   // reported estimate (lower inflated when a Lipschitz bound is given)
  double lower = 0.0;   // certified sampled lower bound for sup-type kinds
  norm_method method = norm_method::dense_sampling;
  long sample_budget = 0;
};

// Deterministic Kronecker sequence on the torus; prefix property makes every
// sampled sup monotone nondecreasing in the budget.
vec5 torus_sample(long i);

// deterministic pair with dyadic separation (for Holder seminorms)
struct pair_sample {
  vec5 x, y;
  double dist;
};
pair_sample holder_pair(long i, int scale_count = 16);

// closed-form field estimators (dense sampling); vector/tensor fields use the
// max over components at a point
norm_estimate_t linf_estimate(const expr_ptr& f, double t, long budget,
                              double lip_bound = 0.0);
norm_estimate_t holder_estimate(const expr_ptr& f, double kappa, double t,
                                long budget);

// grid-side estimators; comps holds one node array per component
double grid_linf(const std::vector<std::vector<double>>& comps);
norm_estimate_t grid_holder(const grid& g,
                            const std::vector<std::vector<double>>& comps,
                            double kappa, long pair_budget);
norm_estimate_t grid_lp(const grid& g,
                        const std::vector<std::vector<double>>& comps,
                        double p);
// W^{-1,p} seminorm: |m|^{-1} multiplier modewise (zero mode dropped), then Lp
norm_estimate_t grid_neg_sobolev(const grid& g, const spec_vec& f, double p);

// sup over dyadic parabolic cylinders of
//   R^{-5} int_0^{R^2} int_{B(x0,R)} |e^{t lap} u|^2 dx dt
// with R = 2 pi 2^{-j}, j in [j_min, j_max], anchors on the 2^j subgrid and
// Gauss time quadrature. Ball integrals use node counts times cell volume.
struct carleson_scale {
  int j;
  double radius;
  double sup_over_anchors;
};
struct carleson_report {
  double value = 0.0;
  std::vector<carleson_scale> scales;
  long sample_budget = 0;
};
carleson_report carleson_estimate(const grid& g, const spec_vec& u, int j_min,
                                  int j_max, int time_nodes);

// sup over dyadic cubes of the mean oscillation avg_Q |f - f_Q|; cubes have
// side 2 pi 2^{-j}, anchors on the 2^j subgrid, j up to j_max
struct cube_scale {
  int j;
  double side;
  double sup_over_cubes;
};
struct cube_report {
  double value = 0.0;
  std::vector<cube_scale> scales;
};
cube_report mean_oscillation(const grid& g,
                             const std::vector<std::vector<double>>& comps,
                             int j_max);

}  // namespace mkd5
