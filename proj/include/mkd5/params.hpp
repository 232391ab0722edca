#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mkd5 {

// Construction parameters: amplitude base A and the exponents (b, gamma)
// driving the double-exponential ladders M_k = floor(A^(b^k)),
// N_k = M_k * floor(M_k^(gamma-1)); alpha quantifies subcriticality, kappa is
// the small Hoelder exponent.  q is the common frame denominator (N_k is
// rounded to a multiple of q so carrier phases stay exactly periodic).
enum class regime_t { paper, demo };

struct construction_params {
  double A = 2.0;
  double b = 1.6;
  double gamma = 1.6;
  double alpha = 0.05;
  double kappa = 0.05;
  int q = 2;
  int kmax = 2;
  regime_t regime = regime_t::demo;
};

// Admissible open windows implied by the remaining parameters.
struct constraint_windows {
  double b_lo = 0.0;       // b in (b_lo, inf)
  double gamma_lo = 0.0;   // gamma in (gamma_lo, gamma_hi)
  double gamma_hi = 0.0;
  double kappa_hi = 0.0;   // kappa in (0, kappa_hi); empty when <= 0
};

struct constraint_violation : std::runtime_error {
  explicit constraint_violation(const std::string& what)
      : std::runtime_error(what) {}
};

// Frequency/amplitude ladder, levels 0 .. kmax+1 (one extra level feeds the
// closed-form tail of the last inverse-cascade flow).  Slots whose exact
// integer value would exceed 2^62 are marked overflowed and hold -1.
struct ladder_t {
  std::vector<std::int64_t> M, N;
  std::vector<int> overflow_levels;
  std::vector<std::string> violations;

  bool has(int k) const {
    return k >= 0 && k < static_cast<int>(M.size()) && M[k] > 0 && N[k] > 0;
  }
  // ell_k = N_{k+1}^{-1/3} N_k^{-2/3}: mollification length at level k.
  double ell(int k) const;
};

struct param_report {
  bool valid = false;  // all paper-regime constraints hold
  constraint_windows windows;
  std::vector<std::string> violations;
  ladder_t ladder;
};

// Checks every parameter inequality and builds the ladder.  Paper regime
// throws constraint_violation on the first failure; demo regime records
// violations and proceeds.  The kappa window is only checked when nonempty
// (an empty window is already reported as a gamma violation).
param_report validate_params(const construction_params& p);

// Ladder recursion alone (always permitted; violations recorded).
ladder_t build_ladder(const construction_params& p);

}  // namespace mkd5
