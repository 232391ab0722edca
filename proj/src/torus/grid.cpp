#include "mkd5/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "mkd5/parallel.hpp"

namespace mkd5 {

namespace {
std::mutex plan_mutex;  // FFTW plan creation is not thread-safe
}

grid::grid(int n) : n_(n) {
  if (n < 4 || n % 2) throw std::invalid_argument("grid: n must be even, >= 4");
  nreal_ = 1;
  for (int a = 0; a < 5; ++a) nreal_ *= static_cast<std::size_t>(n);
  nspec_ = nreal_ / n * (n / 2 + 1);
  kf_.resize(n);
  for (int i = 0; i < n; ++i) kf_[i] = (i <= n / 2) ? i : i - n;
  kf_[n / 2] = 0.0;  // self-paired slot acts as frequency zero
  double m2 = 0;
  for (int a = 0; a < 5; ++a) {
    double mx = 0;
    for (int i = 0; i < n; ++i) mx = std::max(mx, kf_[i] * kf_[i]);
    m2 += mx;
  }
  max_m2_ = static_cast<int>(std::lround(m2));

  std::lock_guard<std::mutex> lock(plan_mutex);
  int dims[5] = {n, n, n, n, n};
  std::vector<double> rbuf(nreal_);
  std::vector<cplx> cbuf(nspec_);
  plan_fwd_ = fftw_plan_dft_r2c(
      5, dims, rbuf.data(), reinterpret_cast<fftw_complex*>(cbuf.data()),
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_bwd_ = fftw_plan_dft_c2r(
      5, dims, reinterpret_cast<fftw_complex*>(cbuf.data()), rbuf.data(),
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("grid: fftw plan failed");
}

grid::~grid() {
  std::lock_guard<std::mutex> lock(plan_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

std::vector<cplx> grid::fft(const std::vector<double>& g) const {
  if (g.size() != nreal_) throw std::invalid_argument("fft: size mismatch");
  std::vector<double> in(g);
  std::vector<cplx> out(nspec_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> grid::ifft(const std::vector<cplx>& gh) const {
  if (gh.size() != nspec_) throw std::invalid_argument("ifft: size mismatch");
  std::vector<cplx> in(gh);  // c2r destroys its input
  std::vector<double> out(nreal_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_),
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(nreal_);
  for (double& v : out) v *= scale;
  return out;
}

double mollifier_hat(double ell, double mnorm, int nquad) {
  // 5-D radial reduction of the transform of c*exp(-1/(1-|y/ell|^2)):
  //   hat(m) = int h(r) w(|m| ell r) r^4 dr / int h(r) r^4 dr,
  //   w(z)   = int cos(z cos t) sin^3 t dt / int sin^3 t dt  (S^4 average)
  // with midpoint rules matching the frozen oracle table.
  double z = mnorm * ell;
  std::vector<double> ct(nquad), st3(nquad);
  double st3_sum = 0;
  for (int i = 0; i < nquad; ++i) {
    double t = (i + 0.5) / nquad * (tau / 2.0);
    ct[i] = std::cos(t);
    st3[i] = std::pow(std::sin(t), 3);
    st3_sum += st3[i];
  }
  double num = 0, den = 0;
  for (int i = 0; i < nquad; ++i) {
    double r = (i + 0.5) / nquad;
    double u = 1.0 - r * r;
    double h = (u > 0) ? std::exp(-1.0 / u) : 0.0;
    double hr4 = h * r * r * r * r;
    double w = 0;
    for (int j = 0; j < nquad; ++j) w += std::cos(z * r * ct[j]) * st3[j];
    num += w / st3_sum * hr4;
    den += hr4;
  }
  return num / den;
}

std::vector<double> grid::moll_table(double ell) const {
  std::vector<double> tab(max_m2_ + 1);
  parallel_for(tab.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      tab[i] = mollifier_hat(ell, std::sqrt(static_cast<double>(i)));
  });
  return tab;
}

void apply_deriv(const grid& g, std::vector<cplx>& f, int axis) {
  g.for_modes([&](std::size_t i, const double* m, double) {
    f[i] *= cplx(0.0, m[axis]);
  });
}

void apply_laplacian(const grid& g, std::vector<cplx>& f) {
  g.for_modes([&](std::size_t i, const double*, double m2) { f[i] *= -m2; });
}

void apply_heat(const grid& g, std::vector<cplx>& f, double dt) {
  if (dt < 0) throw std::invalid_argument("heat: negative time");
  g.for_modes(
      [&](std::size_t i, const double*, double m2) { f[i] *= std::exp(-m2 * dt); });
}

void apply_mollifier(const grid& g, std::vector<cplx>& f, double ell) {
  auto tab = g.moll_table(ell);
  g.for_modes([&](std::size_t i, const double*, double m2) {
    f[i] *= tab[static_cast<int>(std::lround(m2))];
  });
}

void apply_inv_sqrt_lap(const grid& g, std::vector<cplx>& f) {
  g.for_modes([&](std::size_t i, const double*, double m2) {
    f[i] = (m2 > 0) ? f[i] / std::sqrt(m2) : cplx(0.0, 0.0);
  });
}

void leray(const grid& g, spec_vec& f) {
  g.for_modes([&](std::size_t i, const double* m, double m2) {
    if (m2 == 0) return;
    cplx dot = 0;
    for (int a = 0; a < 5; ++a) dot += m[a] * f[a][i];
    dot /= m2;
    for (int a = 0; a < 5; ++a) f[a][i] -= m[a] * dot;
  });
}

spec_vec curl_curl(const grid& g, const spec_vec& f) {
  spec_vec out;
  for (auto& c : out) c.resize(g.nspec());
  g.for_modes([&](std::size_t i, const double* m, double m2) {
    cplx dot = 0;
    for (int a = 0; a < 5; ++a) dot += m[a] * f[a][i];
    for (int a = 0; a < 5; ++a) out[a][i] = m2 * f[a][i] - m[a] * dot;
  });
  return out;
}

std::vector<cplx> divergence(const grid& g, const spec_vec& f) {
  std::vector<cplx> out(g.nspec());
  g.for_modes([&](std::size_t i, const double* m, double) {
    cplx s = 0;
    for (int a = 0; a < 5; ++a) s += cplx(0.0, m[a]) * f[a][i];
    out[i] = s;
  });
  return out;
}

std::vector<cplx> dsym_comp(const grid& g, const spec_vec& f, int comp) {
  // packed D f = -grad f - (grad f)^T + 2 (div f) Id
  auto [a, b] = sym_idx.ij[comp];
  std::vector<cplx> out(g.nspec());
  if (a == b) {
    g.for_modes([&](std::size_t i, const double* m, double) {
      cplx div = 0;
      for (int k = 0; k < 5; ++k) div += cplx(0.0, m[k]) * f[k][i];
      out[i] = cplx(0.0, -2.0 * m[a]) * f[a][i] + 2.0 * div;
    });
  } else {
    g.for_modes([&](std::size_t i, const double* m, double) {
      out[i] = sqrt2 * (cplx(0.0, -m[a]) * f[b][i] + cplx(0.0, -m[b]) * f[a][i]);
    });
  }
  return out;
}

std::vector<cplx> dskew_comp(const grid& g, const spec_vec& f, int comp) {
  // packed Dtilde f = -grad f + (grad f)^T: entry (a,b) = -d_a f_b + d_b f_a
  auto [a, b] = skew_idx.ij[comp];
  std::vector<cplx> out(g.nspec());
  g.for_modes([&](std::size_t i, const double* m, double) {
    out[i] = sqrt2 * (cplx(0.0, -m[a]) * f[b][i] + cplx(0.0, m[b]) * f[a][i]);
  });
  return out;
}

namespace {

template <bool kSkew, class Provider>
spec_vec div_packed_impl(const grid& g, const Provider& provider) {
  spec_vec out;
  for (auto& c : out) c.assign(g.nspec(), cplx(0, 0));
  const int ncomp = kSkew ? skew_dim : sym_dim;
  for (int c = 0; c < ncomp; ++c) {
    std::vector<cplx> hat = provider(c);
    if constexpr (kSkew) {
      auto [a, b] = skew_idx.ij[c];
      // entry (a,b) = val/sqrt2, (b,a) = -val/sqrt2; row divergence
      g.for_modes([&](std::size_t i, const double* m, double) {
        cplx v = hat[i] / sqrt2;
        out[b][i] += cplx(0.0, m[a]) * v;
        out[a][i] -= cplx(0.0, m[b]) * v;
      });
    } else {
      auto [a, b] = sym_idx.ij[c];
      if (a == b) {
        g.for_modes([&](std::size_t i, const double* m, double) {
          out[a][i] += cplx(0.0, m[a]) * hat[i];
        });
      } else {
        g.for_modes([&](std::size_t i, const double* m, double) {
          cplx v = hat[i] / sqrt2;
          out[b][i] += cplx(0.0, m[a]) * v;
          out[a][i] += cplx(0.0, m[b]) * v;
        });
      }
    }
  }
  return out;
}

}  // namespace

spec_vec div_sym_packed(const grid& g,
                        const std::function<std::vector<double>(int)>& comp) {
  return div_packed_impl<false>(g, [&](int c) { return g.fft(comp(c)); });
}
spec_vec div_skew_packed(const grid& g,
                         const std::function<std::vector<double>(int)>& comp) {
  return div_packed_impl<true>(g, [&](int c) { return g.fft(comp(c)); });
}
spec_vec div_sym_packed_spec(const grid& g,
                             const std::function<std::vector<cplx>(int)>& comp) {
  return div_packed_impl<false>(g, comp);
}
spec_vec div_skew_packed_spec(const grid& g,
                              const std::function<std::vector<cplx>(int)>& comp) {
  return div_packed_impl<true>(g, comp);
}

std::vector<cplx> antidiv_sym_comp(const grid& g, const spec_vec& f, int comp) {
  // hat(R^V f)_ab = (-i/m2)(m_a f_b + f_a m_b) + (i/m2)(m.f) delta_ab
  auto [a, b] = sym_idx.ij[comp];
  std::vector<cplx> out(g.nspec());
  g.for_modes([&](std::size_t i, const double* m, double m2) {
    if (m2 == 0) {
      out[i] = 0;
      return;
    }
    cplx dot = 0;
    for (int k = 0; k < 5; ++k) dot += m[k] * f[k][i];
    cplx val = cplx(0.0, -1.0 / m2) * (m[a] * f[b][i] + f[a][i] * m[b]);
    if (a == b)
      out[i] = val + cplx(0.0, 1.0 / m2) * dot;
    else
      out[i] = sqrt2 * val;
  });
  return out;
}

std::vector<cplx> antidiv_skew_comp(const grid& g, const spec_vec& f, int comp) {
  // hat(R^B f)_ab = (-i/m2)(m_a f_b - f_a m_b), defined for divergence-free
  // f; row divergence i m_a hat(T)_ab then returns f_b exactly
  auto [a, b] = skew_idx.ij[comp];
  std::vector<cplx> out(g.nspec());
  g.for_modes([&](std::size_t i, const double* m, double m2) {
    if (m2 == 0) {
      out[i] = 0;
      return;
    }
    out[i] = sqrt2 * cplx(0.0, -1.0 / m2) * (m[a] * f[b][i] - f[a][i] * m[b]);
  });
  return out;
}

double max_abs(const std::vector<double>& v) {
  return reduce_max(v.size(), [&](std::size_t i) { return std::fabs(v[i]); });
}

double max_abs(const grid& g, const spec_vec& f) {
  std::array<std::vector<double>, 5> comps;
  for (int a = 0; a < 5; ++a) comps[a] = g.ifft(f[a]);
  return std::sqrt(reduce_max(g.nreal(), [&](std::size_t i) {
    double s = 0;
    for (int a = 0; a < 5; ++a) s += comps[a][i] * comps[a][i];
    return s;
  }));
}

}  // namespace mkd5
