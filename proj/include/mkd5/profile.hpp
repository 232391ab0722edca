#pragma once

#include <array>

namespace mkd5 {

// Radial tube profile phi(r) = exp(-a q^2 / (1 - q^2)), q = r/R: a C-infinity
// bump supported in [0, R).  Derivatives up to order 4 are closed-form via the
// log-derivative ladder and the exponential Bell polynomials; they feed the
// tube-field derivative chains (orders <= 3) plus one spare order for
// oscillation-mean quadrature checks.
class profile_t {
 public:
  explicit profile_t(double a = 2.0, double R = 0.8) : a_(a), R_(R) {}

  double a() const { return a_; }
  double R() const { return R_; }

  double val(double r) const { return d(r, 0); }
  double d(double r, int order) const;          // order in [0, 4]
  std::array<double, 5> all(double r) const;    // { phi, phi', ..., phi'''' }

 private:
  double a_, R_;
};

// C-infinity ramp H: 1 for s <= 0, 0 for s >= 1, with
// H(s) = Q(1-s) / (Q(s) + Q(1-s)) and Q(u) = exp(-u^-p).
// Exact first and second derivatives (cutoff chains need C^2).
class ramp_t {
 public:
  explicit ramp_t(double p = 0.75) : p_(p) {}

  double p() const { return p_; }

  double val(double s) const;
  double d1(double s) const;
  double d2(double s) const;

 private:
  double Q(double u) const;
  double Q1(double u) const;  // Q'
  double Q2(double u) const;  // Q''
  double p_;
};

}  // namespace mkd5
