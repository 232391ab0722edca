#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mkd5/params.hpp"

namespace mkd5 {

// Closed-form Y-channel bounds of the residual parts, evaluated verbatim on
// the frequency ladder.  Channel m = 0 is the sup channel (weight
// t^{1-alpha}), m = 1 the gradient-Hoelder channel (weight t^{3/2-alpha}).
// P is the heat-level set of the candidate (even levels for parity 1, odd
// for parity 2); levels run 0..kmax and the tail frequency above the ladder
// is extrapolated by the growth law N_{kmax+1} = N_kmax^b.
//
//   F1:  sum_{k in P}  M_k N_k^{1+m(+kappa)} e^{-N_k^2 t}
//   F2:  sum_{k not in P} N_k^{2+m(+kappa)} e^{-N_{k+1}^2 t}
//   F3:  0
//   F41: [sum_k N_k^{1+m} e^{-N_k^2 t}] *
//        [sum_k N_k^2 e^{-N_{k+1}^2 t} + sum_k M_k e^{-N_k^2 t}]
//   F42: sum_k N_k^{1+m} N_{k-1} e^{-N_k^2 t},  N_{-1} = 1
//   Fh:  m=0: sum_{k in P} N_{k-1} N_k^2 M_k^{-1+beta_h} e^{-2 N_k^2 t},
//             beta_h = 1/2 - (gamma/2)(4 alpha + 1/b)
//        m=1: sum_{k in P} N_{k-1} N_k^{2+kappa} e^{-2 N_k^2 t}
//
// The G channels share these scalings, so the (F,G) total is twice the F sum.
struct trend_options {
  int time_points = 2400;  // log grid on [10^lo_exp, 10^hi_exp]
  double lo_exp = -12.0;
  double hi_exp = 0.0;
};

inline const std::vector<std::string>& trend_part_names() {
  static const std::vector<std::string> names{"F1", "F2", "F41", "F42", "Fh"};
  return names;
}

// weighted channel profile w0(t) c_0(t) + w1(t) c_1(t) of one part,
// optionally restricted to a single level (k = -1: all levels; the product
// channel F41 admits no per-level restriction)
struct channel_profile {
  std::vector<double> t;
  std::vector<double> value;
  double sup = 0.0;
};

channel_profile y_channel_profile(const construction_params& p, int parity,
                                  const std::string& part, int k = -1,
                                  const trend_options& opt = {});

struct trend_run {
  double A = 0.0;
  int parity = 1;
  std::vector<std::int64_t> M, N;   // ladder levels 0..kmax
  std::vector<double> part_sups;    // aligned with trend_part_names()
  double total = 0.0;               // 2 * sum of part sups
};

trend_run y_channel_run(const construction_params& p, int parity,
                        const trend_options& opt = {});

// log-log slope of a single-level Fh channel around its Y-weight saturation
// time t* = (1-alpha)/(2 N_k^2); the bound shape C t^{-(1-alpha)} makes the
// exact slope -(1-alpha) at t*
double fh_single_level_slope(const construction_params& p, int k,
                             double window = 1.5, int points = 9);

}  // namespace mkd5
