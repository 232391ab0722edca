#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace mkd5 {

// exact rational on int64 with __int128 intermediates; enough headroom for
// frame completions whose denominators stay small (seed norms are tiny).
struct rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  rational() = default;
  rational(std::int64_t n) : num(n), den(1) {}
  rational(std::int64_t n, std::int64_t d) : num(n), den(d) { reduce(); }

  void reduce() {
    if (den == 0) throw std::domain_error("rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  static rational from128(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n, b = d;
    while (b) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim)
      throw std::overflow_error("rational: overflow");
    return rational{static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
  }

  friend rational operator+(const rational& a, const rational& b) {
    return from128(static_cast<__int128>(a.num) * b.den +
                       static_cast<__int128>(b.num) * a.den,
                   static_cast<__int128>(a.den) * b.den);
  }
  friend rational operator-(const rational& a, const rational& b) {
    return from128(static_cast<__int128>(a.num) * b.den -
                       static_cast<__int128>(b.num) * a.den,
                   static_cast<__int128>(a.den) * b.den);
  }
  friend rational operator*(const rational& a, const rational& b) {
    return from128(static_cast<__int128>(a.num) * b.num,
                   static_cast<__int128>(a.den) * b.den);
  }
  friend rational operator/(const rational& a, const rational& b) {
    if (b.num == 0) throw std::domain_error("rational: divide by zero");
    return from128(static_cast<__int128>(a.num) * b.den,
                   static_cast<__int128>(a.den) * b.num);
  }
  friend bool operator==(const rational& a, const rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  bool is_zero() const { return num == 0; }
  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

// exact square root when the rational is a perfect square; success flag out
inline bool rational_sqrt(const rational& r, rational& out) {
  if (r.num < 0) return false;
  auto isqrt = [](std::int64_t v) -> std::int64_t {
    if (v < 0) return -1;
    auto s = static_cast<std::int64_t>(std::llround(std::sqrt(double(v))));
    while (s > 0 && s * s > v) --s;
    while ((s + 1) * (s + 1) <= v) ++s;
    return s;
  };
  std::int64_t sn = isqrt(r.num), sd = isqrt(r.den);
  if (sn * sn != r.num || sd * sd != r.den) return false;
  out = rational{sn, sd};
  return true;
}

}  // namespace mkd5
