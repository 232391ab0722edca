#include <numeric>

#include "mkd5/geometry.hpp"
#include "mkd5/rational.hpp"

namespace mkd5 {
namespace {

using rvec5 = std::array<rational, 5>;

rational rdot(const rvec5& a, const rvec5& b) {
  rational s{0};
  for (int i = 0; i < 5; ++i) s = s + a[i] * b[i];
  return s;
}

vec5 to_double(const rvec5& v) {
  vec5 r;
  for (int i = 0; i < 5; ++i) r[i] = double(v[i].num) / double(v[i].den);
  return r;
}

long common_den(const std::array<rvec5, 5>& rows) {
  long q = 1;
  for (const auto& row : rows)
    for (const auto& e : row) q = std::lcm(q, static_cast<long>(e.den));
  return q;
}

anchored_frame make_frame(const vec5& xi, const vec5& x1, const vec5& x2,
                          const vec5& x3, const vec5& x4, family_t fam,
                          long q) {
  anchored_frame f;
  f.xi = xi;
  f.xi1 = x1;
  f.xi2 = x2;
  f.xi3 = x3;
  f.xi4 = x4;
  f.family = fam;
  f.common_denominator = q;
  return f;
}

}  // namespace

hadamard_alphabet hadamard_patterns(int z) {
  hadamard_alphabet a;
  a.t = a.c1 = a.c2 = a.c3 = a.ez = vec5{};
  const double s1[4] = {1, 1, -1, -1};
  const double s2[4] = {1, -1, 1, -1};
  const double s3[4] = {1, -1, -1, 1};
  int j = 0;
  for (int i = 0; i < 5; ++i) {
    if (i == z) continue;
    a.t[i] = 0.5;
    a.c1[i] = 0.5 * s1[j];
    a.c2[i] = 0.5 * s2[j];
    a.c3[i] = 0.5 * s3[j];
    ++j;
  }
  a.ez[z] = 1.0;
  return a;
}

std::pair<std::vector<anchored_frame>, std::vector<anchored_frame>>
default_direction_families() {
  std::vector<anchored_frame> U, B;
  for (int z = 0; z < 5; ++z) {
    hadamard_alphabet p = hadamard_patterns(z);
    // Lambda_U: xi1 runs over the four sign patterns, xi2 = e_z; xi is the
    // next pattern so that (xi, xi1, e_z, rest) is orthonormal
    const vec5 pat[4] = {p.t, p.c1, p.c2, p.c3};
    for (int i = 0; i < 4; ++i) {
      const vec5& x1 = pat[i];
      const vec5& xi = pat[(i + 1) % 4];
      const vec5& x3 = pat[(i + 2) % 4];
      const vec5& x4 = pat[(i + 3) % 4];
      U.push_back(make_frame(xi, x1, p.ez, x3, x4, family_t::U, 2));
    }
    // Lambda_B: two wedge pairs per support, sign partners adjacent; the
    // wedge choice per support keeps the skew family at full rank 10
    const int wedge[5][2] = {{0, 3}, {0, 2}, {0, 1}, {0, 3}, {1, 3}};
    int ia = wedge[z][0], ib = wedge[z][1];
    const vec5 &a = pat[ia], &b = pat[ib];
    vec5 rest[2];
    int r = 0;
    for (int i = 0; i < 4; ++i)
      if (i != ia && i != ib) rest[r++] = pat[i];
    for (int sw = 0; sw < 2; ++sw) {
      const vec5& x1 = sw ? b : a;
      const vec5& xi = sw ? a : b;
      B.push_back(make_frame(xi, x1, p.ez, rest[0], rest[1], family_t::B, 2));
      vec5 nxi;
      for (int i = 0; i < 5; ++i) nxi[i] = -xi[i];
      B.push_back(make_frame(nxi, p.ez, x1, rest[0], rest[1], family_t::B, 2));
    }
  }
  return {U, B};
}

std::pair<std::vector<anchored_frame>, std::vector<anchored_frame>>
build_direction_families(const std::vector<std::array<long, 5>>& seed_pool) {
  std::vector<anchored_frame> U, B;
  for (const auto& seed : seed_pool) {
    long n2 = 0;
    for (long s : seed) n2 += s * s;
    if (n2 == 0) throw std::invalid_argument("zero seed vector");
    rational len2{n2};
    rational len;
    if (!rational_sqrt(len2, len))
      throw std::invalid_argument("seed squared norm is not a perfect square");
    rvec5 xi;
    for (int i = 0; i < 5; ++i) xi[i] = rational{seed[i]} / len;

    // Householder reflection H = Id - 2 u u^T / |u|^2 with u = xi - e1 maps
    // e1 to xi; its images of e2..e5 complete xi to an exactly orthonormal
    // rational frame (|u|^2 = 2(1 - xi_1) is rational, no square roots)
    std::array<rvec5, 5> rows;
    rows[0] = xi;
    rvec5 u = xi;
    u[0] = u[0] - rational{1};
    rational u2 = rdot(u, u);
    for (int j = 1; j < 5; ++j) {
      rvec5 col{};
      col[j] = rational{1};
      if (u2.num != 0) {
        rational fac = rational{2} * u[j] / u2;
        for (int i = 0; i < 5; ++i) col[i] = col[i] - fac * u[i];
      }
      rows[j] = col;
    }
    long q = common_den(rows);
    anchored_frame f =
        make_frame(to_double(rows[0]), to_double(rows[1]), to_double(rows[2]),
                   to_double(rows[3]), to_double(rows[4]), family_t::U, q);
    U.push_back(f);

    anchored_frame g = f;
    g.family = family_t::B;
    anchored_frame gp = g;  // sign partner: opposite wedge, same plane
    for (int i = 0; i < 5; ++i) gp.xi[i] = -g.xi[i];
    gp.xi1 = g.xi2;
    gp.xi2 = g.xi1;
    B.push_back(g);
    B.push_back(gp);
  }

  // span checks via Gram matrices of the packed rank-one images
  {
    std::vector<std::array<double, sym_dim>> rows;
    for (const auto& f : U) rows.push_back(pack_sym(outer(f.xi1, f.xi1)));
    int rank = 0;  // Gram-Schmidt rank over the packed vectors
    std::vector<std::array<double, sym_dim>> basis;
    for (auto v : rows) {
      for (const auto& b : basis) {
        double p = 0;
        for (int i = 0; i < sym_dim; ++i) p += v[i] * b[i];
        for (int i = 0; i < sym_dim; ++i) v[i] -= p * b[i];
      }
      double nn = 0;
      for (double x : v) nn += x * x;
      if (nn > 1e-18) {
        double inv = 1.0 / std::sqrt(nn);
        for (double& x : v) x *= inv;
        basis.push_back(v);
        ++rank;
      }
    }
    if (rank < sym_dim)
      throw span_deficient("direction family spans only " +
                           std::to_string(rank) + "/15 symmetric dimensions");
  }
  {
    std::vector<std::array<double, skew_dim>> basis;
    int rank = 0;
    for (const auto& f : B) {
      mat5 w{};
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
          w[i][j] = f.xi2[i] * f.xi1[j] - f.xi1[i] * f.xi2[j];
      auto v = pack_skew(w);
      for (const auto& b : basis) {
        double p = 0;
        for (int i = 0; i < skew_dim; ++i) p += v[i] * b[i];
        for (int i = 0; i < skew_dim; ++i) v[i] -= p * b[i];
      }
      double nn = 0;
      for (double x : v) nn += x * x;
      if (nn > 1e-18) {
        double inv = 1.0 / std::sqrt(nn);
        for (double& x : v) x *= inv;
        basis.push_back(v);
        ++rank;
      }
    }
    if (rank < skew_dim)
      throw span_deficient("wedge family spans only " + std::to_string(rank) +
                           "/10 skew dimensions");
  }
  return {U, B};
}

}  // namespace mkd5
