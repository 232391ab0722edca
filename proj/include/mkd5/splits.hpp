#pragma once

#include <array>

#include "mkd5/cascade.hpp"
#include "mkd5/field_expr.hpp"

namespace mkd5 {

// v_k = v^p + v^{e,1..4} exactly: the principal part rides the carrier wave
// at amplitude scale N_k^2 (psi~ + theta~); the minor parts are
//   e1 = mollification difference curlcurl(smoothed - raw)
//   e2 = -N^-2 sum Delta(envelope) sin * pol
//   e3 = -2 N^-1 sum (xi . grad envelope) cos * pol
//   e4 =  N^-2 grad( sum (pol . grad envelope) sin )
// with envelope = amplitude * profile per tube.  The e4 carrier is sin as
// derived from the grad div remainder; the exactness test adjudicates
struct principal_minor_split {
  int k = 0;
  double n_k = 0.0;
  expr_ptr v_p, b_p;
  std::array<expr_ptr, 4> v_e{}, b_e{};
  expr_ptr v_total, b_total;  // independent heat-flow route for the test
};
principal_minor_split split_principal_minor(const cascade_level& lv);

// vp (x) vp - bp (x) bp = N_1 + N_2 and vp (x) bp - bp (x) vp = M_1 + M_2:
// N_1/M_1 are the constant-mean amplitude stacks, N_2/M_2 carry the
// mean-free tube oscillation h = phi^2 sin^2 - mean; the product route is
// kept separate so the sum identity stays a genuine check
struct nonlinear_split {
  int k = 0;
  double n_k = 0.0;
  expr_ptr n1, n2;               // sym tensors
  expr_ptr m1, m2;               // skew tensors
  expr_ptr prod_sym, prod_skew;  // independent product route
};
nonlinear_split make_nonlinear_split(const principal_minor_split& s,
                                     const cascade_level& lv);

}  // namespace mkd5
