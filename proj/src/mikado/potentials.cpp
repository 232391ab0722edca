#include "mkd5/potentials.hpp"

#include <cmath>
#include <string>

#include "mkd5/parallel.hpp"

namespace mkd5 {

tube_potential mikado_potential(const anchored_frame& f, const vec5& anchor,
                                std::int64_t m_k, std::int64_t n_k,
                                potential_kind_t kind, profile_t prof) {
  const long q = f.common_denominator;
  if (n_k % q != 0)
    throw periodicity_error(
        "tube potential is not torus-periodic: carrier frequency N=" +
        std::to_string(n_k) + " must be a multiple of the frame denominator " +
        std::to_string(q) + " so that N xi is integral (M=" +
        std::to_string(m_k) + " only scales the periodized profile)");
  tube_potential p;
  p.source = std::make_shared<tube_source>(f, anchor, double(m_k),
                                           double(n_k), prof);
  p.polarization = kind == potential_kind_t::magnetic_stream ? f.xi2 : f.xi1;
  p.field = jet_vector(p.source, p.polarization);
  return p;
}

double oscillation_mean(const profile_t& prof, double m_k, double n_k,
                        double covol, int nquad) {
  double phi0 = 0.0, phihat = 0.0;
  const double kap = 2.0 * n_k / m_k;
  const double dr = 1.0 / nquad;
  for (int i = 0; i < nquad; ++i) {
    double r = (i + 0.5) * dr;
    double p2 = prof.val(r);
    p2 *= p2;
    phi0 += p2 * r * r;
    phihat += p2 * r * std::sin(kap * r);
  }
  phi0 *= 2.0 * tau * dr;
  phihat *= 2.0 * tau * dr / kap;
  return 0.5 * (phi0 - phihat) / (m_k * m_k * m_k * covol);
}

std::vector<double> sample_carrier(const grid& g, const anchored_frame& f,
                                   const vec5& anchor, double m_k, double n_k,
                                   const profile_t& prof) {
  transversal_lattice lat(f);
  std::vector<double> out(g.nreal());
  const int n = g.n();
  const double c0 = 1.0 / (n_k * n_k);
  parallel_for(g.nreal(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      std::size_t rem = idx;
      int iv[5];
      for (int a = 4; a >= 0; --a) {
        iv[a] = static_cast<int>(rem % n);
        rem /= n;
      }
      vec5 x;
      for (int a = 0; a < 5; ++a) x[a] = g.coord(iv[a]);
      auto w = lat.minimal_image(lat.raw(x, anchor));
      double r = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
      double phase = 0.0;
      for (int a = 0; a < 5; ++a) phase += (x[a] - anchor[a]) * f.xi[a];
      phase *= n_k;
      out[idx] = c0 * prof.val(m_k * r) * std::sin(phase);
    }
  });
  return out;
}

}  // namespace mkd5
