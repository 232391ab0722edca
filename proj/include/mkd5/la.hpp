#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace mkd5 {

inline constexpr double tau = 6.283185307179586476925286766559;

using vec5 = std::array<double, 5>;
using mat5 = std::array<std::array<double, 5>, 5>;

// packed symmetric: 5 diagonal entries then sqrt(2) * upper triangle row-major
// (an isometry for the Frobenius inner product); packed skew: sqrt(2) * upper.
inline constexpr int sym_dim = 15;
inline constexpr int skew_dim = 10;
inline constexpr double sqrt2 = 1.4142135623730950488;

struct sym_index_table {
  // component c -> (i, j) with i <= j; first 5 are the diagonal
  std::array<std::array<int, 2>, sym_dim> ij{};
  constexpr sym_index_table() {
    for (int d = 0; d < 5; ++d) ij[d] = {d, d};
    int c = 5;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) ij[c++] = {i, j};
  }
};
struct skew_index_table {
  std::array<std::array<int, 2>, skew_dim> ij{};
  constexpr skew_index_table() {
    int c = 0;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) ij[c++] = {i, j};
  }
};
inline constexpr sym_index_table sym_idx{};
inline constexpr skew_index_table skew_idx{};

inline double dot(const vec5& a, const vec5& b) {
  double s = 0;
  for (int i = 0; i < 5; ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const vec5& a) { return std::sqrt(dot(a, a)); }

inline vec5 operator+(const vec5& a, const vec5& b) {
  vec5 r{};
  for (int i = 0; i < 5; ++i) r[i] = a[i] + b[i];
  return r;
}
inline vec5 operator-(const vec5& a, const vec5& b) {
  vec5 r{};
  for (int i = 0; i < 5; ++i) r[i] = a[i] - b[i];
  return r;
}
inline vec5 operator*(double c, const vec5& a) {
  vec5 r{};
  for (int i = 0; i < 5; ++i) r[i] = c * a[i];
  return r;
}

inline mat5 outer(const vec5& a, const vec5& b) {
  mat5 r{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) r[i][j] = a[i] * b[j];
  return r;
}
inline mat5 operator+(const mat5& a, const mat5& b) {
  mat5 r{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}
inline mat5 operator-(const mat5& a, const mat5& b) {
  mat5 r{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}
inline mat5 operator*(double c, const mat5& a) {
  mat5 r{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) r[i][j] = c * a[i][j];
  return r;
}
inline mat5 identity5() {
  mat5 r{};
  for (int i = 0; i < 5; ++i) r[i][i] = 1.0;
  return r;
}
inline double fro_norm(const mat5& a) {
  double s = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) s += a[i][j] * a[i][j];
  return std::sqrt(s);
}
inline double fro_dot(const mat5& a, const mat5& b) {
  double s = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) s += a[i][j] * b[i][j];
  return s;
}

using sym_vec = std::array<double, sym_dim>;
using skew_vec = std::array<double, skew_dim>;

inline sym_vec pack_sym(const mat5& s) {
  sym_vec r{};
  for (int c = 0; c < sym_dim; ++c) {
    auto [i, j] = sym_idx.ij[c];
    r[c] = (i == j) ? s[i][i] : sqrt2 * s[i][j];
  }
  return r;
}
inline mat5 unpack_sym(const sym_vec& v) {
  mat5 r{};
  for (int c = 0; c < sym_dim; ++c) {
    auto [i, j] = sym_idx.ij[c];
    if (i == j)
      r[i][i] = v[c];
    else
      r[i][j] = r[j][i] = v[c] / sqrt2;
  }
  return r;
}
inline skew_vec pack_skew(const mat5& a) {
  skew_vec r{};
  for (int c = 0; c < skew_dim; ++c) {
    auto [i, j] = skew_idx.ij[c];
    r[c] = sqrt2 * a[i][j];
  }
  return r;
}
inline mat5 unpack_skew(const skew_vec& v) {
  mat5 r{};
  for (int c = 0; c < skew_dim; ++c) {
    auto [i, j] = skew_idx.ij[c];
    r[i][j] = v[c] / sqrt2;
    r[j][i] = -v[c] / sqrt2;
  }
  return r;
}

// point on the 5-torus, coordinates interpreted modulo 2*pi
struct point5 {
  vec5 x{};
  static point5 canonical(const vec5& raw) {
    point5 p;
    for (int i = 0; i < 5; ++i) {
      double c = std::fmod(raw[i], tau);
      if (c < 0) c += tau;
      p.x[i] = c;
    }
    return p;
  }
};

}  // namespace mkd5
