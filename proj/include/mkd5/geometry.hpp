#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mkd5/la.hpp"

namespace mkd5 {

enum class family_t { U, B };

// Rational orthonormal frame (xi, xi1..xi4) with a torus anchor. The tube of
// the frame points along span(xi1, xi2) and its profile depends on the
// (xi, xi3, xi4) coordinates only.
struct anchored_frame {
  vec5 xi{}, xi1{}, xi2{}, xi3{}, xi4{};
  vec5 anchor{};
  family_t family = family_t::U;
  long common_denominator = 1;  // q with q*xi, q*xi_j all integral

  std::array<vec5, 5> rows() const { return {xi, xi1, xi2, xi3, xi4}; }
  // rows xi, xi3, xi4: the directions the tube profile varies along
  std::array<vec5, 3> transversal_rows() const { return {xi, xi3, xi4}; }
};

struct span_deficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct infeasible_positivity : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct out_of_domain : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct placement_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gamma_xi^2(S) = c_xi + L_xi(S - Id) reproduces S = sum Gamma^2 xi1 (x) xi1
// on the eps0-ball around Id (L packed against sym_vec coordinates)
struct sym_decomposition {
  std::vector<anchored_frame> frames;
  std::vector<double> c;
  std::vector<std::array<double, sym_dim>> L;
  double eps0 = 0.0;
};

// gamma_xi^2(A) = d_xi + K_xi(A) reproduces A = sum gamma^2 (xi2 (x) xi1 -
// xi1 (x) xi2) on the eps0-ball around 0; sign pairs are adjacent so the
// constant part cancels
struct skew_decomposition {
  std::vector<anchored_frame> frames;
  std::vector<double> d;
  std::vector<std::array<double, skew_dim>> K;
  double eps0 = 0.0;
};

struct geometry_bundle {
  std::vector<anchored_frame> U, B;
  sym_decomposition sym;
  skew_decomposition skew;
  double eps0 = 0.0;  // min of the two families, shared by the amplitudes
  double C = 0.0;     // two-sided window: Gamma, gamma in [1/C, C]
  double d_min = 0.0; // certified minimal pairwise plane separation
  int seed_u = 0;     // level-0 single-tube seeds (indices into U / B)
  int seed_b = 0;
};

// ------------------------------------------------------------- families

// Hadamard half-integer alphabet for the support missing coordinate z:
// t = (1,1,1,1)/2-type plus its three conjugate sign patterns and e_z
struct hadamard_alphabet {
  vec5 t, c1, c2, c3, ez;
};
hadamard_alphabet hadamard_patterns(int z);

// the default axis-anchored families: per support z, Lambda_U takes the four
// frames (xi1 in {t,c1,c2,c3}, xi2 = e_z) and Lambda_B two wedge pairs with
// their sign partners; |U| = |B| = 20
std::pair<std::vector<anchored_frame>, std::vector<anchored_frame>>
default_direction_families();

// generic construction from integer Pythagorean seeds (|seed|^2 a perfect
// square): xi = seed/|seed|, completion by the rational Householder
// reflection mapping e1 to xi; B-frames are emitted as sign pairs
std::pair<std::vector<anchored_frame>, std::vector<anchored_frame>>
build_direction_families(const std::vector<std::array<long, 5>>& seed_pool);

// ------------------------------------------------------------- lemmas

sym_decomposition solve_sym_decomposition(
    const std::vector<anchored_frame>& frames);
skew_decomposition solve_skew_decomposition(
    const std::vector<anchored_frame>& frames);

std::vector<double> gamma_sym(const sym_decomposition& dec, const mat5& s);
std::vector<double> gamma_skew(const skew_decomposition& dec, const mat5& a);

// window constant C with 1/C <= Gamma, gamma <= C on the eps0 balls
double window_constant(const sym_decomposition& sym,
                       const skew_decomposition& skew);

// ------------------------------------------------------------- anchors

// minimal periodic distance between the affine tube planes of two frames:
// project the anchor difference onto the mutual normal space of
// span(xi1, xi2, xi1', xi2') and minimize over projected 2 pi Z^5 offsets
double min_plane_separation(const anchored_frame& f1,
                            const anchored_frame& f2, int box = 3);

// deterministic greedy placement over a Halton candidate set, certified by
// min_plane_separation; throws placement_failure if target unreachable
std::vector<vec5> place_anchors(std::vector<anchored_frame>& frames,
                                double target, int candidates = 600);

double certify_min_separation(const std::vector<anchored_frame>& frames);

// frozen default geometry: axis families + optimized anchors (d_min ~ 0.585)
// + both decompositions + level-0 seed indices
geometry_bundle default_geometry();

std::string geometry_to_json(const geometry_bundle& g);

}  // namespace mkd5
