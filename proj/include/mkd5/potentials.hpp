#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "mkd5/field_expr.hpp"
#include "mkd5/geometry.hpp"
#include "mkd5/grid.hpp"
#include "mkd5/profile.hpp"
#include "mkd5/tube.hpp"

namespace mkd5 {

struct periodicity_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// which constant polarization rides the tube carrier
enum class potential_kind_t {
  velocity,          // Psi0: U-family, polarization xi1
  magnetic_stream,   // Theta0: velocity potential on the B-family, pol xi2
  magnetic,          // Phi0: magnetic potential on the B-family, pol xi1
};

// one tube potential: carrier source g plus its polarized vector field
struct tube_potential {
  std::shared_ptr<const tube_source> source;
  vec5 polarization{};
  expr_ptr field;  // polarization * g
};

// Psi/Phi/Theta at ladder level (M, N); throws periodicity_error unless the
// frame denominator divides N (N xi must be integral; the profile is
// lattice-periodized for any M)
tube_potential mikado_potential(const anchored_frame& f, const vec5& anchor,
                                std::int64_t m_k, std::int64_t n_k,
                                potential_kind_t kind,
                                profile_t prof = profile_t{});

// cell mean of phi_{xi,k}^2 sin^2(N (x-a).xi) by exact radial reduction:
// covol^-1 M^-3 (Phi0 - Phihat(2N/M))/2 with midpoint quadrature
double oscillation_mean(const profile_t& prof, double m_k, double n_k,
                        double covol, int nquad = 2000);

// nodal samples of the carrier g = N^-2 phi(M r) sin(N (x-a).xi)
std::vector<double> sample_carrier(const grid& g, const anchored_frame& f,
                                   const vec5& anchor, double m_k, double n_k,
                                   const profile_t& prof = profile_t{});

}  // namespace mkd5
