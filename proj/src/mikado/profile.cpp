#include "mkd5/profile.hpp"

#include <cmath>
#include <stdexcept>

namespace mkd5 {

std::array<double, 5> profile_t::all(double r) const {
  std::array<double, 5> out{0.0, 0.0, 0.0, 0.0, 0.0};
  double q = std::abs(r) / R_;
  if (q >= 1.0 - 1e-14) return out;
  double q2 = q * q;
  double u = 1.0 - q2;
  double phi = std::exp(-a_ * q2 / u);
  // log-derivative ladder in q: h = log phi.
  double h1 = -2.0 * a_ * q / (u * u);
  double h2 = -2.0 * a_ * (1.0 + 3.0 * q2) / (u * u * u);
  double h3 = -24.0 * a_ * q * (1.0 + q2) / (u * u * u * u);
  double h4 = -24.0 * a_ * (1.0 + 10.0 * q2 + 5.0 * q2 * q2) / (u * u * u * u * u);
  // Bell polynomials for d^n/dq^n exp(h).
  double p1 = h1;
  double p2 = h2 + h1 * h1;
  double p3 = h3 + 3.0 * h1 * h2 + h1 * h1 * h1;
  double p4 = h4 + 4.0 * h1 * h3 + 3.0 * h2 * h2 + 6.0 * h1 * h1 * h2 +
              h1 * h1 * h1 * h1;
  double ri = 1.0 / R_;
  out[0] = phi;
  out[1] = phi * p1 * ri;
  out[2] = phi * p2 * ri * ri;
  out[3] = phi * p3 * ri * ri * ri;
  out[4] = phi * p4 * ri * ri * ri * ri;
  return out;
}

double profile_t::d(double r, int order) const {
  if (order < 0 || order > 4) throw std::invalid_argument("profile order in [0,4]");
  return all(r)[static_cast<size_t>(order)];
}

double ramp_t::Q(double u) const {
  if (u <= 1e-14) return 0.0;
  return std::exp(-std::pow(u, -p_));
}

double ramp_t::Q1(double u) const {
  if (u <= 1e-14) return 0.0;
  return Q(u) * p_ * std::pow(u, -p_ - 1.0);
}

double ramp_t::Q2(double u) const {
  if (u <= 1e-14) return 0.0;
  return Q(u) * (p_ * p_ * std::pow(u, -2.0 * p_ - 2.0) -
                 p_ * (p_ + 1.0) * std::pow(u, -p_ - 2.0));
}

double ramp_t::val(double s) const {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  double qa = Q(s), qb = Q(1.0 - s);
  return qb / (qa + qb);
}

double ramp_t::d1(double s) const {
  if (s <= 1e-12 || s >= 1.0 - 1e-12) return 0.0;
  double qa = Q(s), qb = Q(1.0 - s);
  double u = qa + qb;
  // H' = -(qa Q'(1-s) + qb Q'(s)) / (qa + qb)^2.
  return -(qa * Q1(1.0 - s) + qb * Q1(s)) / (u * u);
}

double ramp_t::d2(double s) const {
  if (s <= 1e-12 || s >= 1.0 - 1e-12) return 0.0;
  double qa = Q(s), qb = Q(1.0 - s);
  double u = qa + qb;
  double n = qa * Q1(1.0 - s) + qb * Q1(s);
  double up = Q1(s) - Q1(1.0 - s);
  double np = qb * Q2(s) - qa * Q2(1.0 - s);
  // H'' = -(n' u - 2 n u') / u^3.
  return -(np * u - 2.0 * n * up) / (u * u * u);
}

}  // namespace mkd5
