#include "mkd5/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mkd5 {

namespace {

constexpr double kOverflowCap = 4611686018427387904.0;  // 2^62

std::string fmt(const char* name, double v) {
  std::ostringstream os;
  os << name << " = " << v;
  return os.str();
}

}  // namespace

double ladder_t::ell(int k) const {
  if (!has(k) || !has(k + 1)) throw std::out_of_range("ladder ell: level missing");
  return std::pow(static_cast<double>(N[k + 1]), -1.0 / 3.0) *
         std::pow(static_cast<double>(N[k]), -2.0 / 3.0);
}

ladder_t build_ladder(const construction_params& p) {
  ladder_t lad;
  for (int k = 0; k < p.kmax + 2; ++k) {
    double mraw = std::pow(p.A, std::pow(p.b, static_cast<double>(k)));
    if (!(mraw < kOverflowCap)) {
      lad.overflow_levels.push_back(k);
      lad.M.push_back(-1);
      lad.N.push_back(-1);
      continue;
    }
    std::int64_t Mk = static_cast<std::int64_t>(std::floor(mraw));
    double nraw_d = static_cast<double>(Mk) *
                    std::floor(std::pow(static_cast<double>(Mk), p.gamma - 1.0));
    if (!(nraw_d < kOverflowCap)) {
      lad.overflow_levels.push_back(k);
      lad.M.push_back(-1);
      lad.N.push_back(-1);
      continue;
    }
    std::int64_t raw = static_cast<std::int64_t>(nraw_d);
    // Round to the nearest multiple of q, half away from zero.
    std::int64_t Nk = p.q * static_cast<std::int64_t>(std::floor(
                                static_cast<double>(raw) / p.q + 0.5));
    if (Nk == 0) {
      Nk = p.q;
      std::ostringstream os;
      os << "N_" << k << " raw " << raw << " rounded to 0; raised to q=" << p.q;
      lad.violations.push_back(os.str());
    }
    if (!lad.M.empty() && lad.M.back() > 0 && Mk <= lad.M.back()) {
      std::ostringstream os;
      os << "M_" << k << "=" << Mk << " not > M_" << k - 1 << "=" << lad.M.back();
      lad.violations.push_back(os.str());
    }
    while (!lad.N.empty() && lad.N.back() > 0 && Nk <= lad.N.back()) {
      Nk += p.q;
      std::ostringstream os;
      os << "N_" << k << " bumped to " << Nk << " for strict increase";
      lad.violations.push_back(os.str());
    }
    lad.M.push_back(Mk);
    lad.N.push_back(Nk);
  }
  return lad;
}

param_report validate_params(const construction_params& p) {
  param_report rep;
  auto fail = [&](const std::string& msg) {
    if (p.regime == regime_t::paper) throw constraint_violation(msg);
    rep.violations.push_back(msg);
  };

  if (!(p.A > 1.0)) fail(fmt("A must exceed 1; A", p.A));
  if (p.q < 1) fail("q must be a positive integer");
  if (p.kmax < 0) fail("kmax must be nonnegative");

  bool alpha_ok = p.alpha > 0.0 && p.alpha < 0.125;
  if (!alpha_ok) fail(fmt("alpha outside (0, 1/8); alpha", p.alpha));

  rep.windows.b_lo = std::max(10.0, 1.0 / (1.0 - 8.0 * p.alpha));
  if (!(p.b > rep.windows.b_lo)) {
    std::ostringstream os;
    os << "b = " << p.b << " not > max(10, 1/(1-8 alpha)) = " << rep.windows.b_lo;
    fail(os.str());
  }

  rep.windows.gamma_lo = 1.0 / (1.0 - 4.0 * p.alpha);
  rep.windows.gamma_hi = 1.0 / (4.0 * p.alpha + 1.0 / p.b);
  bool gamma_ok =
      p.gamma > rep.windows.gamma_lo && p.gamma < rep.windows.gamma_hi;
  if (!gamma_ok) {
    std::ostringstream os;
    os << "gamma = " << p.gamma << " outside (" << rep.windows.gamma_lo << ", "
       << rep.windows.gamma_hi << ")";
    fail(os.str());
  }

  rep.windows.kappa_hi =
      std::min(0.5 - 0.5 / p.gamma - 2.0 * p.alpha, p.alpha);
  // An empty kappa window means gamma/alpha are already out of regime; that
  // violation is recorded above, so only check kappa against a real window.
  if (rep.windows.kappa_hi > 0.0 &&
      !(p.kappa > 0.0 && p.kappa < rep.windows.kappa_hi)) {
    std::ostringstream os;
    os << "kappa = " << p.kappa << " outside (0, " << rep.windows.kappa_hi << ")";
    fail(os.str());
  }

  rep.ladder = build_ladder(p);
  if (p.regime == regime_t::paper && !rep.ladder.violations.empty())
    throw constraint_violation("ladder violation: " + rep.ladder.violations[0]);

  rep.valid = rep.violations.empty();
  return rep;
}

}  // namespace mkd5
