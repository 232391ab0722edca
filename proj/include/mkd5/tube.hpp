#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "mkd5/field_expr.hpp"
#include "mkd5/geometry.hpp"
#include "mkd5/profile.hpp"

namespace mkd5 {

// packed symmetric derivative storage: 15 unordered pairs, 35 unordered
// triples of axes in {0..4}, lexicographic over sorted tuples
int sym2_index(int i, int j);
int sym3_index(int i, int j, int k);
extern const std::array<std::array<int, 2>, 15> sym2_pairs;
extern const std::array<std::array<int, 3>, 35> sym3_triples;

// value and all spatial derivatives of a scalar through order three
struct jet3 {
  double v = 0.0;
  std::array<double, 5> d1{};
  std::array<double, 15> d2{};
  std::array<double, 35> d3{};

  double deriv(const int* axes, int n) const;
  jet3& axpy(double w, const jet3& o);
};

struct xkey_hash {
  std::size_t operator()(const vec5& x) const {
    std::size_t h = 1469598103934665603ull;
    const unsigned char* p = reinterpret_cast<const unsigned char*>(x.data());
    for (std::size_t i = 0; i < sizeof(double) * 5; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
    return h;
  }
};

// rank-3 lattice obtained by pushing tau Z^5 through the transversal rows
// (xi, xi3, xi4); all entries are multiples of tau/4 so the generator matrix
// is exactly integer. B columns hold a primitive size-reduced basis.
struct transversal_lattice {
  std::array<vec5, 3> T;
  std::array<std::array<double, 3>, 3> B{}, Binv{};
  double covol = 0.0;
  double shortest = 0.0;  // shortest nonzero lattice vector

  explicit transversal_lattice(const anchored_frame& f);

  std::array<double, 3> raw(const vec5& x, const vec5& anchor) const;
  std::array<double, 3> minimal_image(const std::array<double, 3>& w) const;
  double distance(const vec5& x, const vec5& anchor) const;
};

// memoizing provider of scalar jets; every derivative component extracted at
// a point shares one computation
class jet_source {
 public:
  virtual ~jet_source() = default;
  jet3 jet(const vec5& x) const;
  // highest derivative order the jet carries valid data for
  virtual int order() const { return 3; }

 protected:
  virtual jet3 compute(const vec5& x) const = 0;

 private:
  static constexpr std::size_t kCap = 1 << 16;
  mutable std::mutex mu_;
  mutable std::unordered_map<vec5, jet3, xkey_hash> memo_;
};
using jet_source_ptr = std::shared_ptr<const jet_source>;

// scalar carrier of one tube: g(x) = N^-2 phi(M |w(x)|) sin(N (x-a).xi)
// with w the minimal-image transversal coordinate of x
class tube_source final : public jet_source {
 public:
  tube_source(const anchored_frame& f, const vec5& anchor, double m_k,
              double n_k, profile_t prof = profile_t{});

  const transversal_lattice& lattice() const { return lat_; }
  const anchored_frame& frame() const { return frame_; }
  const vec5& anchor() const { return anchor_; }
  double m_factor() const { return m_; }
  double n_factor() const { return n_; }
  double support_radius() const { return prof_.R() / m_; }

  // jet of x -> N^-2 phi(M |w(x)-z|) sin(N (w1(x)-z1)) given ws = w(x)-z;
  // the x-dependence is affine through the transversal rows
  jet3 w_jet(const std::array<double, 3>& ws) const;
  // radial factor alone: jet of x -> phi(M |w(x)|)
  jet3 envelope_jet(const std::array<double, 3>& ws) const;

 protected:
  jet3 compute(const vec5& x) const override;

 private:
  anchored_frame frame_;
  vec5 anchor_;
  double m_, n_;
  profile_t prof_;
  transversal_lattice lat_;
  mat5 proj_;  // P = T^T T, projector onto the transversal 3-space
};

// profile factor of one tube without the carrier wave: phi(M |w(x)|).
// The minor-part formulas differentiate the envelope and the trig factor
// separately, so both need standalone jet sources sharing one tube
class envelope_source final : public jet_source {
 public:
  explicit envelope_source(std::shared_ptr<const tube_source> base)
      : base_(std::move(base)) {}
  const tube_source& base() const { return *base_; }

 protected:
  jet3 compute(const vec5& x) const override;

 private:
  std::shared_ptr<const tube_source> base_;
};

// mollified level-0 tube scalar eta_ell * g realized in the transversal
// 3-space: the tube is constant along its 2-plane, so the 5-d convolution
// collapses to a 3-d rule against the 2-plane marginal of the kernel
class marginal_source final : public jet_source {
 public:
  marginal_source(std::shared_ptr<const tube_source> base, double ell,
                  int q_per_axis = 6);
  double ell() const { return ell_; }
  int points() const { return static_cast<int>(ws_.size()); }

 protected:
  jet3 compute(const vec5& x) const override;

 private:
  std::shared_ptr<const tube_source> base_;
  double ell_;
  std::vector<std::array<double, 3>> zs_;
  std::vector<double> ws_;
};

// scalar expression reading one derivative component of a jet source
expr_ptr jet_scalar(jet_source_ptr src, std::vector<int> axes = {});
// vector field pol * scalar with a shared source node
expr_ptr jet_vector(jet_source_ptr src, const vec5& pol);

}  // namespace mkd5
