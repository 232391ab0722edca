#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkd5/field_expr.hpp"
#include "mkd5/geometry.hpp"
#include "mkd5/grid.hpp"
#include "mkd5/mollify.hpp"
#include "mkd5/params.hpp"
#include "mkd5/potentials.hpp"
#include "mkd5/profile.hpp"
#include "mkd5/tube.hpp"

namespace mkd5 {

// expanded tube supports of consecutive levels would intersect
struct overlap_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// an amplitude argument left the decomposition ball
struct domain_violation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// a normalization denominator fell below the guard threshold
struct vanishing_denominator : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// a sampled field does not fit the spectral band of the grid
struct resolution_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct cascade_options {
  long norm_budget = 200000;     // sup-norm sampling budget
  long domain_budget = 100000;   // ball-membership sampling budget
  int marginal_q = 8;            // 3-d rule per axis for level-0 smoothing
  int moll5_q = 6;               // 5-d rule per axis for level >= 1
  double denom_guard = 1e-14;
  bool use_cutoffs = true;       // identity cutoffs reproduce the grid model
};

// measurements taken while advancing one level
struct advance_report {
  int k = 0;
  double dsym_psi_norm = 0.0;    // |D psi^0_{k-1}|_F sup
  double dsym_theta_norm = 0.0;  // |D theta^0_{k-1}|_F sup
  double dskew_phi_norm = 0.0;   // |Dtilde phi^0_{k-1}|_F sup
  double s_norm = 0.0;           // |s_k|_F sup
  double l_norm = 0.0;           // l_k
  double ball_ratio = 0.0;       // max |(D - s_k)/l_k|_F over the samples
  double gamma2_lo = 0.0, gamma2_hi = 0.0;  // skew family window
  double amp2_lo = 0.0, amp2_hi = 0.0;      // sym family window
  double amp_factor = 0.0;       // N_k sqrt(2 l_k / A_xi)
  double chi_grad_scaled = 0.0;  // max |grad chi| * ell_k over the samples
};

// transversal-distance ramp union over the previous-level tubes:
// chi = 1 - prod_f (1 - H((dist_f - off)/width)); identically one on the
// off-expanded tubes, zero beyond one extra width
class cutoff_source final : public jet_source {
 public:
  cutoff_source(std::vector<std::shared_ptr<const tube_source>> tubes,
                double offset, double width, ramp_t ramp = ramp_t{});
  int order() const override { return 2; }
  double offset() const { return off_; }
  double width() const { return width_; }

 protected:
  jet3 compute(const vec5& x) const override;

 private:
  std::vector<std::shared_ptr<const tube_source>> tubes_;
  double off_, width_;
  ramp_t ramp_;
};

// one level of the closed-form construction
struct cascade_level {
  int k = 0;
  double m_k = 0.0, n_k = 0.0;
  double ell = 0.0;              // mollification length of this level
  double l_norm = 0.0;           // l_k (zero at level 0)
  std::vector<double> a_mean, b_mean;  // oscillation means A_xi, B_xi

  std::vector<std::shared_ptr<const tube_source>> u_tubes, b_tubes;
  std::vector<expr_ptr> a_amp, b_amp;    // amplitude scalars
  std::vector<expr_ptr> a_amp2, b_amp2;  // their squares (sqrt-free)
  expr_ptr s_field;                      // s_k sym tensor (zero at level 0)
  expr_ptr chi_v, chi_b;                 // cutoffs (constant one at level 0)

  expr_ptr psi_raw, theta_raw, phi_raw;  // amplitude-weighted potentials
  expr_ptr psi, theta, phi;              // smoothed potentials
  mollifier_ptr rule;                    // 5-d rule behind psi/theta/phi (k>=1)
  std::vector<jet_source_ptr> marginals; // level-0 smoothing sources
};

// closed-form (pointwise) construction driver
class cascade_t {
 public:
  cascade_t(geometry_bundle geo, construction_params params,
            cascade_options opt = {});

  const geometry_bundle& geometry() const { return geo_; }
  const construction_params& params() const { return params_; }
  const ladder_t& ladder() const { return ladder_; }
  const cascade_options& options() const { return opt_; }
  const std::vector<cascade_level>& levels() const { return levels_; }
  const cascade_level& level(int k) const;
  const std::vector<advance_report>& reports() const { return reports_; }

  // level 0: seed tubes with constant amplitude N_0
  advance_report build_level_zero();
  // append the next level; order inside: b -> s -> l -> a
  advance_report advance_level();
  // run everything through level k_max
  void build_all();

  // certified guard: expanded supports of level k-1 must stay disjoint
  void check_overlap(int k) const;

 private:
  geometry_bundle geo_;
  construction_params params_;
  cascade_options opt_;
  ladder_t ladder_;
  profile_t prof_;
  std::vector<cascade_level> levels_;
  std::vector<advance_report> reports_;
};

// ----------------------------------------------------------- grid model

struct grid_options {
  std::string scratch_dir;       // artifact directory (required)
  bool enforce_resolution = false;  // throw when a carrier exceeds the band
  double tail_tol = 1e-2;        // outer-shell mass fraction threshold
  double denom_guard = 1e-14;
};

// per-level artifact manifest of the grid-model construction
struct grid_level_t {
  int k = 0;
  double m_k = 0.0, n_k = 0.0, ell = 0.0;
  double l_norm = 0.0;
  double dsym_psi_norm = 0.0, dsym_theta_norm = 0.0, dskew_phi_norm = 0.0;
  double s_norm = 0.0, ball_ratio = 0.0;
  double gamma2_lo = 0.0, gamma2_hi = 0.0, amp2_lo = 0.0, amp2_hi = 0.0;
  double amp_factor = 0.0;
  double a_mean = 0.0, b_mean = 0.0;  // shared across frames per level
  double carrier_tail = 0.0;          // outer-shell mass fraction
  bool resolved = true;
  bool stacks_only = false;  // top level carries amplitudes but no carrier
  std::string pot, upot;     // dump paths: smoothed / raw potentials
  std::string sa, sb_sym, tb;  // amplitude stacks (15/15/10 comps)
};

// grid-model construction with identity cutoffs; every field is spilled to
// the scratch directory and reloaded on demand so the working set stays small
class grid_cascade {
 public:
  grid_cascade(std::shared_ptr<grid> g, geometry_bundle geo,
               construction_params params, grid_options opt);

  const grid& g() const { return *grid_; }
  std::shared_ptr<grid> grid_ptr() const { return grid_; }
  const geometry_bundle& geometry() const { return geo_; }
  const construction_params& params() const { return params_; }
  const ladder_t& ladder() const { return ladder_; }
  const grid_options& options() const { return opt_; }
  const std::vector<grid_level_t>& levels() const { return levels_; }
  const grid_level_t& level(int k) const;

  // build levels 0..k_max with potentials, then the top amplitude stacks
  void build_all();

  // nodal loads; pot/upot dumps hold the three potentials side by side
  // (psi, theta, phi as 15 components); stacks hold their packed components
  std::vector<std::vector<double>> load(const std::string& path) const;
  // spectral potentials of one level: psi+theta combined or phi
  spec_vec load_flow_potential(int k, bool magnetic, bool smoothed) const;

  std::string manifest_json() const;

 private:
  std::shared_ptr<grid> grid_;
  geometry_bundle geo_;
  construction_params params_;
  grid_options opt_;
  ladder_t ladder_;
  profile_t prof_;
  std::vector<grid_level_t> levels_;

  void build_level_zero();
  void advance(bool stacks_only);
  std::string dump_path(const std::string& stem) const;
};

// outer-shell (max axis frequency >= n/2 - 1) fraction of the spectral mass
double spectral_tail_fraction(const grid& g, const std::vector<cplx>& fh);

}  // namespace mkd5
