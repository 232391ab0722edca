#pragma once

#include <string>
#include <vector>

#include "mkd5/assembly.hpp"

namespace mkd5 {

// sampled Y-norm measurement of the residual parts on the grid model:
// per part, sup over a log time grid of
//   t^{1-alpha} |part(t)|_oo  +  t^{3/2-alpha} |grad part(t)|_{C^kappa}.
// The sup and the Holder quotient are estimated on random node samples; the
// Holder pairs have distances log-uniform in [1e-3, 1], rounded to grid
// nodes, zero-distance rounds discarded.
struct y_norm_options {
  double alpha = 0.05;
  double kappa = 0.05;
  std::vector<double> times;  // empty: 16-point log grid on [1e-4, 1]
  int pair_budget = 10000;
  int sup_budget = 100000;
  unsigned seed = 20260815;
  std::vector<residual_part> parts{all_residual_parts.begin(),
                                   all_residual_parts.end()};
};

// one report row: a whole part (k = -1) or one level's contribution
struct y_part_entry {
  std::string name;
  int k = -1;
  double weighted_sup = 0.0;
  double weighted_holder = 0.0;
  double y_value = 0.0;
};

struct y_norm_result {
  int parity = 1;
  double alpha = 0.0, kappa = 0.0;
  std::vector<y_part_entry> f_entries, g_entries;
  double f_total = 0.0, g_total = 0.0, total = 0.0;
};

y_norm_result y_norm_report(const grid_flow_assembler& flows, int parity,
                            const y_norm_options& opt = {});

void write_y_csv(const y_norm_result& r, const std::string& path);

}  // namespace mkd5
