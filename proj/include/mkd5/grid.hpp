#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mkd5/la.hpp"

namespace mkd5 {

using cplx = std::complex<double>;

// Uniform n^5 grid on the torus with the real-to-complex spectral layout
// (last axis halved). Trigonometric-polynomial semantics: the self-paired
// Nyquist slot m = n/2 is treated as frequency zero in EVERY multiplier, so
// first-order operators stay Hermitian-safe and all composition identities
// (curl_curl = grad div - lap, div of the antidivergences, Leray) are exact
// on the nose in this calculus.
class grid {
 public:
  explicit grid(int n);
  ~grid();
  grid(const grid&) = delete;
  grid& operator=(const grid&) = delete;

  int n() const { return n_; }
  std::size_t nreal() const { return nreal_; }
  std::size_t nspec() const { return nspec_; }
  double coord(int i) const { return tau * i / n_; }
  // mode value at axis position i, Nyquist zeroed
  double kf(int i) const { return kf_[i]; }
  int max_m2() const { return max_m2_; }

  std::vector<cplx> fft(const std::vector<double>& g) const;
  std::vector<double> ifft(const std::vector<cplx>& gh) const;

  // iterate spectral layout: f(flat_index, m[5] (Nyquist-zeroed), m2)
  template <class F>
  void for_modes(F&& f) const {
    const int nh = n_ / 2 + 1;
    std::size_t idx = 0;
    double m[5];
    for (int i0 = 0; i0 < n_; ++i0) {
      m[0] = kf_[i0];
      for (int i1 = 0; i1 < n_; ++i1) {
        m[1] = kf_[i1];
        for (int i2 = 0; i2 < n_; ++i2) {
          m[2] = kf_[i2];
          for (int i3 = 0; i3 < n_; ++i3) {
            m[3] = kf_[i3];
            double base = m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3];
            for (int i4 = 0; i4 < nh; ++i4, ++idx) {
              m[4] = kf_[i4];
              f(idx, m, base + m[4] * m[4]);
            }
          }
        }
      }
    }
  }

  // iterate node layout: f(flat_index, axis indices i[5])
  template <class F>
  void for_nodes(F&& f) const {
    std::size_t idx = 0;
    int i[5];
    for (i[0] = 0; i[0] < n_; ++i[0])
      for (i[1] = 0; i[1] < n_; ++i[1])
        for (i[2] = 0; i[2] < n_; ++i[2])
          for (i[3] = 0; i[3] < n_; ++i[3])
            for (i[4] = 0; i[4] < n_; ++i[4], ++idx) f(idx, i);
  }

  // mollifier transform value per integer m2 (Nyquist-zeroed |m|^2)
  std::vector<double> moll_table(double ell) const;

 private:
  int n_;
  std::size_t nreal_, nspec_;
  std::vector<double> kf_;
  int max_m2_;
  void* plan_fwd_;
  void* plan_bwd_;
};

// unit-mass C^inf bump kernel transform, radial in |m|: the shared scalar
// routine behind grid::moll_table and the quadrature mollifier
double mollifier_hat(double ell, double mnorm, int nquad = 400);

using spec_vec = std::array<std::vector<cplx>, 5>;

// first-order multipliers (all built from the Nyquist-zeroed modes)
void apply_deriv(const grid& g, std::vector<cplx>& f, int axis);
void apply_laplacian(const grid& g, std::vector<cplx>& f);
void apply_heat(const grid& g, std::vector<cplx>& f, double dt);
void apply_mollifier(const grid& g, std::vector<cplx>& f, double ell);
void apply_inv_sqrt_lap(const grid& g, std::vector<cplx>& f);  // |m|^-1, 0-mode dropped

void leray(const grid& g, spec_vec& f);
spec_vec curl_curl(const grid& g, const spec_vec& f);
std::vector<cplx> divergence(const grid& g, const spec_vec& f);

// packed-component calculus (sym: diag then sqrt2*upper; skew: sqrt2*upper)
std::vector<cplx> dsym_comp(const grid& g, const spec_vec& f, int comp);
std::vector<cplx> dskew_comp(const grid& g, const spec_vec& f, int comp);

// divergence of a packed tensor supplied component-by-component (streaming)
spec_vec div_sym_packed(const grid& g,
                        const std::function<std::vector<double>(int)>& comp);
spec_vec div_skew_packed(const grid& g,
                         const std::function<std::vector<double>(int)>& comp);
spec_vec div_sym_packed_spec(const grid& g,
                             const std::function<std::vector<cplx>(int)>& comp);
spec_vec div_skew_packed_spec(const grid& g,
                              const std::function<std::vector<cplx>(int)>& comp);

// antidivergence right inverses: packed component of R^V f / R^B f.
// R^V inverts div on any mean-free input; R^B only on divergence-free input
// (div of a skew divergence vanishes identically, so that is the whole
// meaningful domain).
std::vector<cplx> antidiv_sym_comp(const grid& g, const spec_vec& f, int comp);
std::vector<cplx> antidiv_skew_comp(const grid& g, const spec_vec& f, int comp);

double max_abs(const std::vector<double>& v);
double max_abs(const grid& g, const spec_vec& f);  // pointwise vector norm sup

}  // namespace mkd5
