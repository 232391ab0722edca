#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "mkd5/flows.hpp"
#include "mkd5/grid.hpp"

namespace mkd5 {

// packed spectral tensor: 15 symmetric or 10 skew components; a component
// left empty stands for an identically zero field (absent parts stay cheap)
using packed_spec = std::vector<std::vector<cplx>>;

// forcing channels of one candidate: heat mismatch of the carrier levels,
// Laplacian of the averaged stacks, the level-0 antidivergence (identically
// zero), the subtractive nonlinear remainder, the oscillation antidivergence,
// and the top-level closure when the last level runs the averaged flow
enum class residual_part { r1, r2, r3, r4, rh, rc };

inline constexpr std::array<residual_part, 6> all_residual_parts{
    residual_part::r1, residual_part::r2, residual_part::r3,
    residual_part::r4, residual_part::rh, residual_part::rc};

const char* part_suffix(residual_part p);  // "1", "2", "3", "4", "h", "c"

// one time-factorized constituent: part(t) = sum of exp(-lambda t) * tensor
struct residual_basis_term {
  residual_part part = residual_part::r1;
  int k = -1;                       // source level
  int k2 = -1;                      // partner level of a product pair
  double lambda = 0.0;              // decay rate of the term
  std::function<packed_spec()> make;
};

// residual assembly on the grid model.  F-side parts are packed symmetric
// tensors whose Leray-projected divergence drives the velocity equation;
// G-side parts are packed skew tensors entering the induction equation with
// a plain divergence (a skew divergence is divergence-free by symmetry).
class grid_residual {
 public:
  grid_residual(const grid_flow_assembler& flows, int parity);

  int parity() const { return parity_; }
  int kmax() const { return flows_.kmax(); }
  bool heat_level(int k) const { return (k % 2) == (parity_ - 1); }
  bool has_closure() const { return !heat_level(kmax()); }

  // one materialized part at time t (absent parts come back all-empty)
  packed_spec f_part(residual_part p, double t) const;
  packed_spec g_part(residual_part p, double t) const;

  spec_vec pdiv_f(residual_part p, double t) const;  // Leray(div F_p)
  spec_vec div_g(residual_part p, double t) const;   // div G_p

  // (d_t - Lap) of the assembled candidate, via the exact closed-form d_t
  spec_vec evolution_term(bool magnetic, double t) const;

  // time-factorized constituents of every part, for norm reports; the same
  // algebra as f_part/g_part reached through an independent decomposition
  std::vector<residual_basis_term> basis(bool magnetic) const;

  const grid_flow_assembler& flows() const { return flows_; }

  // nodal Frobenius sup of a packed tensor (packing is a Frobenius isometry)
  double sup_fro(const packed_spec& f) const;

 private:
  const grid_flow_assembler& flows_;
  int parity_;

  spec_vec principal0(int k, bool magnetic) const;  // N_k^2 * raw potential
  mat5 level0_constant(bool magnetic) const;        // N_{0,1} / M_{0,1} mean

  packed_spec heat_multiplier_part(bool magnetic, double t) const;     // 1
  packed_spec averaged_laplacian_part(bool magnetic, double t) const;  // 2
  packed_spec level0_antidiv_part(bool magnetic, double t) const;      // 3
  packed_spec product_part(bool magnetic, double t) const;             // 4
  packed_spec oscillation_part(bool magnetic, double t) const;         // h
  packed_spec closure_part(bool magnetic, double t) const;             // c
  spec_vec oscillation_div0(int k, bool magnetic) const;
  packed_spec oscillation_level_tensor(int k, bool magnetic) const;
  packed_spec principal_pair_tensor(int k, bool magnetic) const;
  packed_spec product_pair_tensor(int k, int k2, bool magnetic) const;
};

// master identity check: (d_t - Lap)v + P div(v@v - b@b) + P div F = 0 and
// (d_t - Lap)b + div(v@b - b@v) + div G = 0, all terms spectral, residual
// sup-norm relative to the largest single term
struct master_identity_report {
  int parity = 1;
  double t = 0.0;
  double velocity_rel = 0.0;
  double magnetic_rel = 0.0;
  double velocity_scale = 0.0;  // largest term sup on the velocity side
  double magnetic_scale = 0.0;
  std::array<double, 6> f_div_sup{};  // sup |P div F_p| per part
  std::array<double, 6> g_div_sup{};
};

master_identity_report check_master_identity(const grid_flow_assembler& flows,
                                             int parity, double t);

}  // namespace mkd5
