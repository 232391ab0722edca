#include "mkd5/tube.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mkd5/mollify.hpp"

namespace mkd5 {
namespace {

std::array<std::array<int, 2>, 15> make_pairs() {
  std::array<std::array<int, 2>, 15> p{};
  int n = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = i; j < 5; ++j) p[n++] = {i, j};
  return p;
}

std::array<std::array<int, 3>, 35> make_triples() {
  std::array<std::array<int, 3>, 35> t{};
  int n = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = i; j < 5; ++j)
      for (int k = j; k < 5; ++k) t[n++] = {i, j, k};
  return t;
}

std::array<std::array<int, 5>, 5> make_pair_lut() {
  std::array<std::array<int, 5>, 5> lut{};
  for (int n = 0; n < 15; ++n) {
    auto [i, j] = sym2_pairs[n];
    lut[i][j] = lut[j][i] = n;
  }
  return lut;
}

double norm3(const std::array<double, 3>& w) {
  return std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
}

std::array<std::array<double, 3>, 3> invert3(
    const std::array<std::array<double, 3>, 3>& m, double det) {
  std::array<std::array<double, 3>, 3> inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

const std::array<std::array<int, 2>, 15> sym2_pairs = make_pairs();
const std::array<std::array<int, 3>, 35> sym3_triples = make_triples();
namespace {
const std::array<std::array<int, 5>, 5> pair_lut = make_pair_lut();
}

int sym2_index(int i, int j) { return pair_lut[i][j]; }

int sym3_index(int i, int j, int k) {
  int a = i, b = j, c = k;
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
  // offset of sorted triple (a, b, c) in the lexicographic enumeration
  static const auto lut = [] {
    std::array<int, 125> t{};
    for (int n = 0; n < 35; ++n) {
      auto [x, y, z] = sym3_triples[n];
      t[(x * 5 + y) * 5 + z] = n;
    }
    return t;
  }();
  return lut[(a * 5 + b) * 5 + c];
}

double jet3::deriv(const int* axes, int n) const {
  switch (n) {
    case 0:
      return v;
    case 1:
      return d1[axes[0]];
    case 2:
      return d2[sym2_index(axes[0], axes[1])];
    case 3:
      return d3[sym3_index(axes[0], axes[1], axes[2])];
    default:
      throw order_exceeded("jet3 holds derivatives through order three");
  }
}

jet3& jet3::axpy(double w, const jet3& o) {
  v += w * o.v;
  for (int i = 0; i < 5; ++i) d1[i] += w * o.d1[i];
  for (int i = 0; i < 15; ++i) d2[i] += w * o.d2[i];
  for (int i = 0; i < 35; ++i) d3[i] += w * o.d3[i];
  return *this;
}

// ------------------------------------------------------------ lattice

transversal_lattice::transversal_lattice(const anchored_frame& f) {
  auto rows = f.transversal_rows();
  for (int r = 0; r < 3; ++r) T[r] = rows[r];

  // integer generators: columns of tau T^T in units of tau/4
  const double scale = tau / 4.0;
  std::array<std::array<long, 3>, 5> gen{};
  for (int c = 0; c < 5; ++c)
    for (int r = 0; r < 3; ++r) {
      double v = tau * T[r][c] / scale;
      long iv = std::lround(v);
      if (std::abs(v - iv) > 1e-9)
        throw std::invalid_argument("frame is not tau/4-rational");
      gen[c][r] = iv;
    }

  // column-echelon elimination over Z keeps the generated lattice intact
  std::vector<std::array<long, 3>> pool;
  for (const auto& g : gen)
    if (g[0] || g[1] || g[2]) pool.push_back(g);
  std::vector<std::array<long, 3>> basis;
  for (int col = 0; col < 3; ++col) {
    for (;;) {
      std::vector<std::array<long, 3>*> nz;
      for (auto& r : pool)
        if (r[col] != 0) nz.push_back(&r);
      if (nz.size() <= 1) break;
      std::sort(nz.begin(), nz.end(),
                [col](auto* a, auto* b) {
                  return std::abs((*a)[col]) < std::abs((*b)[col]);
                });
      auto* p = nz[0];
      for (std::size_t i = 1; i < nz.size(); ++i) {
        long q = (*nz[i])[col] / (*p)[col];
        for (int t = 0; t < 3; ++t) (*nz[i])[t] -= q * (*p)[t];
      }
      pool.erase(std::remove_if(pool.begin(), pool.end(),
                                [](const auto& r) {
                                  return !r[0] && !r[1] && !r[2];
                                }),
                 pool.end());
    }
    auto it = std::find_if(pool.begin(), pool.end(),
                           [col](const auto& r) { return r[col] != 0; });
    if (it != pool.end()) {
      basis.push_back(*it);
      pool.erase(it);
    }
  }
  if (basis.size() != 3)
    throw std::invalid_argument("transversal projection not full rank");

  std::array<std::array<double, 3>, 3> b{};
  for (int i = 0; i < 3; ++i)
    for (int r = 0; r < 3; ++r) b[r][i] = basis[i][r] * scale;  // columns

  // size reduction: shortest independent vectors among small combos,
  // accepted only when the change of basis is unimodular
  struct cand {
    std::array<double, 3> v;
    double n;
  };
  std::vector<cand> cands;
  for (int c0 = -3; c0 <= 3; ++c0)
    for (int c1 = -3; c1 <= 3; ++c1)
      for (int c2 = -3; c2 <= 3; ++c2) {
        std::array<double, 3> v{};
        for (int r = 0; r < 3; ++r)
          v[r] = c0 * b[r][0] + c1 * b[r][1] + c2 * b[r][2];
        double n = norm3(v);
        if (n > 1e-9) cands.push_back({v, n});
      }
  std::sort(cands.begin(), cands.end(),
            [](const cand& a, const cand& c) { return a.n < c.n; });
  shortest = cands.front().n;

  std::vector<std::array<double, 3>> red;
  for (const auto& c : cands) {
    std::array<std::array<double, 3>, 3> probe{};
    for (std::size_t i = 0; i < red.size(); ++i)
      for (int r = 0; r < 3; ++r) probe[r][i] = red[i][r];
    for (int r = 0; r < 3; ++r) probe[r][red.size()] = c.v[r];
    // rank check via the Gram determinant of the selected columns
    bool indep = true;
    if (red.size() == 1) {
      double dot = 0, n2a = 0, n2b = 0;
      for (int r = 0; r < 3; ++r) {
        dot += red[0][r] * c.v[r];
        n2a += red[0][r] * red[0][r];
        n2b += c.v[r] * c.v[r];
      }
      indep = n2a * n2b - dot * dot > 1e-9;
    } else if (red.size() == 2) {
      indep = std::abs(det3(probe)) > 1e-9;
    }
    if (indep) red.push_back(c.v);
    if (red.size() == 3) break;
  }
  if (red.size() == 3) {
    std::array<std::array<double, 3>, 3> br{};
    for (int i = 0; i < 3; ++i)
      for (int r = 0; r < 3; ++r) br[r][i] = red[i][r];
    double dr = det3(br);
    auto ir = invert3(br, dr);
    bool unimodular = true;
    double det_c = 0.0;
    std::array<std::array<double, 3>, 3> cmat{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int r = 0; r < 3; ++r) s += ir[i][r] * b[r][j];
        cmat[i][j] = s;
        if (std::abs(s - std::round(s)) > 1e-9) unimodular = false;
      }
    det_c = det3(cmat);
    if (unimodular && std::abs(std::abs(det_c) - 1.0) < 1e-9) b = br;
  }

  B = b;
  double d = det3(B);
  covol = std::abs(d);
  Binv = invert3(B, d);
}

std::array<double, 3> transversal_lattice::raw(const vec5& x,
                                               const vec5& anchor) const {
  std::array<double, 3> w{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) w[r] += T[r][c] * (x[c] - anchor[c]);
  return w;
}

std::array<double, 3> transversal_lattice::minimal_image(
    const std::array<double, 3>& w) const {
  std::array<double, 3> c{}, out{};
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) c[r] += Binv[r][k] * w[k];
    c[r] -= std::nearbyint(c[r]);
  }
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) out[r] += B[r][k] * c[k];
  return out;
}

double transversal_lattice::distance(const vec5& x, const vec5& anchor) const {
  return norm3(minimal_image(raw(x, anchor)));
}

// ------------------------------------------------------------ jet source

jet3 jet_source::jet(const vec5& x) const {
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = memo_.find(x);
    if (it != memo_.end()) return it->second;
  }
  jet3 j = compute(x);
  std::lock_guard<std::mutex> lk(mu_);
  if (memo_.size() >= kCap) memo_.clear();
  memo_.emplace(x, j);
  return j;
}

// ------------------------------------------------------------ tube

tube_source::tube_source(const anchored_frame& f, const vec5& anchor,
                         double m_k, double n_k, profile_t prof)
    : frame_(f), anchor_(anchor), m_(m_k), n_(n_k), prof_(prof), lat_(f) {
  for (int c = 0; c < 5; ++c)
    for (int d = 0; d < 5; ++d) {
      proj_[c][d] = 0.0;
      for (int r = 0; r < 3; ++r) proj_[c][d] += lat_.T[r][c] * lat_.T[r][d];
    }
}

jet3 tube_source::w_jet(const std::array<double, 3>& ws) const {
  jet3 out;
  const double r = norm3(ws);
  const double rho = m_ * r;
  if (rho >= prof_.R()) return out;

  const auto pj = prof_.all(rho);  // phi and d/drho derivatives at rho
  const double c0 = 1.0 / (n_ * n_);
  const double theta = n_ * ws[0];
  const double sn = std::sin(theta), cs = std::cos(theta);
  const vec5& xi = frame_.xi;

  // S factor: sin(N w1), derivatives rotate through cos/-sin/-cos
  double s0 = sn;
  vec5 s1{};
  for (int c = 0; c < 5; ++c) s1[c] = n_ * xi[c] * cs;
  // s2_{cd} = -N^2 xi_c xi_d sn ; s3 = -N^3 xi xi xi cs (built inline below)

  // radial factor F = phi(M |w|): push through u = T^T what, projector P
  double f0 = pj[0];
  double f1 = m_ * pj[1];
  double f2 = m_ * m_ * pj[2];
  double f3 = m_ * m_ * m_ * pj[3];

  vec5 u{};
  double coef_a = 0.0, coef_q = 0.0, coef_b = 0.0, coef_c = 0.0;
  bool core = r < 1e-12;
  if (!core) {
    for (int c = 0; c < 5; ++c)
      for (int k = 0; k < 3; ++k) u[c] += ws[k] / r * lat_.T[k][c];
    coef_a = f2 - f1 / r;
    coef_q = f1 / r;
    coef_b = f3 - 3.0 * f2 / r + 3.0 * f1 / (r * r);
    coef_c = f2 / r - f1 / (r * r);
  } else {
    coef_q = f2;  // lim f1/r with f1(0) = 0 and slope f2
  }

  out.v = c0 * f0 * s0;
  for (int c = 0; c < 5; ++c)
    out.d1[c] = c0 * (f1 * u[c] * s0 + f0 * s1[c]);
  for (int n2 = 0; n2 < 15; ++n2) {
    auto [c, d] = sym2_pairs[n2];
    double fcd = coef_a * u[c] * u[d] + coef_q * proj_[c][d];
    double scd = -n_ * n_ * xi[c] * xi[d] * sn;
    out.d2[n2] =
        c0 * (fcd * s0 + f1 * u[c] * s1[d] + f1 * u[d] * s1[c] + f0 * scd);
  }
  for (int n3 = 0; n3 < 35; ++n3) {
    auto [c, d, e] = sym3_triples[n3];
    double fcde = coef_b * u[c] * u[d] * u[e] +
                  coef_c * (proj_[c][d] * u[e] + proj_[c][e] * u[d] +
                            proj_[d][e] * u[c]);
    double fcd = coef_a * u[c] * u[d] + coef_q * proj_[c][d];
    double fce = coef_a * u[c] * u[e] + coef_q * proj_[c][e];
    double fde = coef_a * u[d] * u[e] + coef_q * proj_[d][e];
    double scd = -n_ * n_ * xi[c] * xi[d] * sn;
    double sce = -n_ * n_ * xi[c] * xi[e] * sn;
    double sde = -n_ * n_ * xi[d] * xi[e] * sn;
    double scde = -n_ * n_ * n_ * xi[c] * xi[d] * xi[e] * cs;
    out.d3[n3] = c0 * (fcde * s0 + fcd * s1[e] + fce * s1[d] + fde * s1[c] +
                       f1 * (u[c] * sde + u[d] * sce + u[e] * scd) +
                       f0 * scde);
  }
  return out;
}

jet3 tube_source::envelope_jet(const std::array<double, 3>& ws) const {
  jet3 out;
  const double r = norm3(ws);
  const double rho = m_ * r;
  if (rho >= prof_.R()) return out;

  const auto pj = prof_.all(rho);
  const double f0 = pj[0];
  const double f1 = m_ * pj[1];
  const double f2 = m_ * m_ * pj[2];
  const double f3 = m_ * m_ * m_ * pj[3];

  vec5 u{};
  double coef_a = 0.0, coef_q = 0.0, coef_b = 0.0, coef_c = 0.0;
  if (r >= 1e-12) {
    for (int c = 0; c < 5; ++c)
      for (int k = 0; k < 3; ++k) u[c] += ws[k] / r * lat_.T[k][c];
    coef_a = f2 - f1 / r;
    coef_q = f1 / r;
    coef_b = f3 - 3.0 * f2 / r + 3.0 * f1 / (r * r);
    coef_c = f2 / r - f1 / (r * r);
  } else {
    coef_q = f2;  // lim f1/r with f1(0) = 0 and slope f2
  }

  out.v = f0;
  for (int c = 0; c < 5; ++c) out.d1[c] = f1 * u[c];
  for (int n2 = 0; n2 < 15; ++n2) {
    auto [c, d] = sym2_pairs[n2];
    out.d2[n2] = coef_a * u[c] * u[d] + coef_q * proj_[c][d];
  }
  for (int n3 = 0; n3 < 35; ++n3) {
    auto [c, d, e] = sym3_triples[n3];
    out.d3[n3] = coef_b * u[c] * u[d] * u[e] +
                 coef_c * (proj_[c][d] * u[e] + proj_[c][e] * u[d] +
                           proj_[d][e] * u[c]);
  }
  return out;
}

jet3 tube_source::compute(const vec5& x) const {
  return w_jet(lat_.minimal_image(lat_.raw(x, anchor_)));
}

jet3 envelope_source::compute(const vec5& x) const {
  const auto& lat = base_->lattice();
  return base_->envelope_jet(lat.minimal_image(lat.raw(x, base_->anchor())));
}

// ------------------------------------------------------------ marginal

marginal_source::marginal_source(std::shared_ptr<const tube_source> base,
                                 double ell, int q_per_axis)
    : base_(std::move(base)), ell_(ell) {
  // single-image correctness: the shifted queries |w - z| stay attached to
  // one lattice representative only when tube radius + kernel radius fit
  // strictly inside half the shortest lattice vector
  double reach = base_->support_radius() + ell_;
  if (2.0 * reach >= base_->lattice().shortest)
    throw std::invalid_argument(
        "mollifier reach overlaps neighbouring tube images");
  gauss_rule g = gauss_legendre(q_per_axis);
  double total = 0.0;
  for (int i0 = 0; i0 < q_per_axis; ++i0)
    for (int i1 = 0; i1 < q_per_axis; ++i1)
      for (int i2 = 0; i2 < q_per_axis; ++i2) {
        std::array<double, 3> z = {ell_ * g.nodes[i0], ell_ * g.nodes[i1],
                                   ell_ * g.nodes[i2]};
        double w = g.weights[i0] * g.weights[i1] * g.weights[i2] *
                   eta3_marginal(norm3(z), ell_);
        if (w <= 0.0) continue;
        zs_.push_back(z);
        ws_.push_back(w);
        total += w;
      }
  for (double& w : ws_) w /= total;
}

jet3 marginal_source::compute(const vec5& x) const {
  const auto& lat = base_->lattice();
  auto w = lat.minimal_image(lat.raw(x, base_->anchor()));
  jet3 acc;
  for (std::size_t j = 0; j < zs_.size(); ++j) {
    std::array<double, 3> s = {w[0] - zs_[j][0], w[1] - zs_[j][1],
                               w[2] - zs_[j][2]};
    acc.axpy(ws_[j], base_->w_jet(s));
  }
  return acc;
}

// ------------------------------------------------------------ expressions

namespace {

class jet_scalar_node final : public field_expr {
 public:
  jet_scalar_node(jet_source_ptr src, std::vector<int> axes)
      : src_(std::move(src)), axes_(std::move(axes)) {
    if (static_cast<int>(axes_.size()) > src_->order())
      throw order_exceeded("derivative exceeds the jet order of the source");
  }
  rank_t rank() const override { return rank_t::scalar; }
  value_t eval(const vec5& x, double) const override {
    return value_t::scalar(
        src_->jet(x).deriv(axes_.data(), static_cast<int>(axes_.size())));
  }
  expr_ptr dx_impl(int axis) const override {
    std::vector<int> a = axes_;
    a.push_back(axis);
    return std::make_shared<jet_scalar_node>(src_, std::move(a));
  }
  expr_ptr dt_impl() const override { return const_scalar(0.0); }
  int spatial_order() const override {
    return src_->order() - static_cast<int>(axes_.size());
  }

 private:
  jet_source_ptr src_;
  std::vector<int> axes_;
};

}  // namespace

expr_ptr jet_scalar(jet_source_ptr src, std::vector<int> axes) {
  return std::make_shared<jet_scalar_node>(std::move(src), std::move(axes));
}

expr_ptr jet_vector(jet_source_ptr src, const vec5& pol) {
  expr_ptr g = jet_scalar(std::move(src));
  std::array<expr_ptr, 5> comps;
  for (int i = 0; i < 5; ++i) comps[i] = scale(pol[i], g);
  return from_components(comps);
}

}  // namespace mkd5
