#pragma once

#include <functional>
#include <memory>
#include <string>

#include "mkd5/cascade.hpp"
#include "mkd5/field_expr.hpp"
#include "mkd5/grid.hpp"

namespace mkd5 {

// closed-form heat flows of one level: the potentials ride a scalar decay
// e^{-N_k^2 t}, so (d_t - Lap) does NOT vanish on them; the residual channels
// absorb the mismatch
struct level_flows {
  int k = 0;
  double n_k = 0.0;
  expr_ptr v0, b0;          // curlcurl snapshots at t = 0
  expr_ptr v, b;            // v_k(t), b_k(t)
  expr_ptr s_tensor;        // S_k(t) = Dsym(psi_k + theta_k) e^{-N_k^2 t}
  expr_ptr t_tensor;        // T_k(t) = Dskew(phi_k) e^{-N_k^2 t}
};
level_flows make_level_flows(const cascade_level& lv);

// amplitude stacks of level k; they average to the level k-1 flows:
// Sbar_{k-1}(t) = (SA_k + SB_k)/(2 N_k^2) e^{-2 N_k^2 t}, and
// d_t Sbar_{k-1} = -N_{k,1} exactly (the inverse-cascade heat balance)
struct level_stacks {
  int k = 0;
  double n_k = 0.0;
  expr_ptr sa;              // sum_U A_xi a^2 xi1 (x) xi1
  expr_ptr sb_sym;          // sum_B B_xi b^2 (xi2 xi2 - xi1 xi1)
  expr_ptr tb;              // sum_B B_xi b^2 (xi2 (x) xi1 - xi1 (x) xi2)
  expr_ptr sbar, tbar;      // averaged tensor flows of level k-1
  expr_ptr n1, m1;          // N_{k,1}(t), M_{k,1}(t)
};
level_stacks make_level_stacks(const cascade_level& lv);

// candidate assembly: parity 1 keeps the heat flow on even levels and the
// averaged (inverse-cascade) flow on odd levels; parity 2 swaps them.  The
// averaged flow is the closed form vbar_k(t) = v_k(0) e^{-2 N_{k+1}^2 t}
// (the Leray projection kills the cutoff gradient in div Sbar exactly)
struct candidate_flows {
  int parity = 1;
  expr_ptr v, b;            // time-dependent candidate fields
  expr_ptr v0, b0;          // shared initial data
};
candidate_flows assemble_candidate(const cascade_t& c, int parity);

// oscillation witnesses for the space-of-oscillation functionals
expr_ptr zeta_velocity(const cascade_t& c);  // sum_k curl(psi_k + theta_k)
expr_ptr zeta_magnetic(const cascade_t& c);  // sum_k curl(phi_k)

// ------------------------------------------------------------- grid model

// t = 0 snapshots of every flow on the grid, cached as nodal dumps under
// <scratch>/flows; candidates at time t are scalar-decay combinations
class grid_flow_assembler {
 public:
  explicit grid_flow_assembler(const grid_cascade& gc);

  const grid_cascade& cascade() const { return gc_; }
  int kmax() const;  // top heat level

  spec_vec v0_level(int k) const;     // curlcurl(psi_k + theta_k)
  spec_vec b0_level(int k) const;     // curlcurl(phi_k)
  spec_vec vbar0_level(int k) const;  // P div Sbar_k(0) via level k+1 stacks
  spec_vec bbar0_level(int k) const;  // P div Tbar_k(0)

  double heat_decay(int k, double t) const;      // e^{-N_k^2 t}
  double averaged_decay(int k, double t) const;  // e^{-2 N_{k+1}^2 t}

  spec_vec velocity(int parity, double t) const;
  spec_vec magnetic(int parity, double t) const;
  spec_vec initial_velocity() const;  // sum_k v0_level
  spec_vec initial_magnetic() const;

 private:
  const grid_cascade& gc_;
  std::string dir_;
  spec_vec cached_field(const std::string& stem,
                        const std::function<spec_vec()>& make) const;
  spec_vec assemble(int parity, double t, bool magnetic) const;
};

}  // namespace mkd5
