#include <Eigen/Dense>
#include <cmath>

#include "mkd5/geometry.hpp"

namespace mkd5 {
namespace {

Eigen::MatrixXd sym_synthesis(const std::vector<anchored_frame>& frames) {
  Eigen::MatrixXd g(sym_dim, frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) {
    sym_vec col = pack_sym(outer(frames[j].xi1, frames[j].xi1));
    for (int i = 0; i < sym_dim; ++i) g(i, j) = col[i];
  }
  return g;
}

Eigen::MatrixXd skew_synthesis(const std::vector<anchored_frame>& frames) {
  Eigen::MatrixXd g(skew_dim, frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) {
    const auto& f = frames[j];
    mat5 w{};
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        w[a][b] = f.xi2[a] * f.xi1[b] - f.xi1[a] * f.xi2[b];
    skew_vec col = pack_skew(w);
    for (int i = 0; i < skew_dim; ++i) g(i, j) = col[i];
  }
  return g;
}

// rows of the minimal-norm right inverse, as functionals under the packed
// isometry; their 2-norms are the Frobenius operator norms
double max_row_norm(const Eigen::MatrixXd& m) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) r = std::max(r, m.row(i).norm());
  return r;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& g, int expected_rank,
                               const char* what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * s(0)) ++rank;
  if (rank < expected_rank)
    throw span_deficient(std::string(what) + ": rank " + std::to_string(rank) +
                         " < " + std::to_string(expected_rank));
  Eigen::VectorXd inv = s;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    inv(i) = s(i) > 1e-9 * s(0) ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

sym_decomposition solve_sym_decomposition(
    const std::vector<anchored_frame>& frames) {
  const std::size_t n = frames.size();
  if (n < sym_dim)
    throw span_deficient("need at least 15 symmetric directions");
  Eigen::MatrixXd g = sym_synthesis(frames);
  Eigen::VectorXd target(sym_dim);
  {
    sym_vec id = pack_sym(identity5());
    for (int i = 0; i < sym_dim; ++i) target(i) = id[i];
  }

  // the default family tiles orthonormal bases of coordinate subspaces, so
  // the uniform weight 5/n fits Id exactly; otherwise fall back to the
  // minimal-norm least squares weight and demand strict positivity
  Eigen::VectorXd c = Eigen::VectorXd::Constant(n, 5.0 / double(n));
  if ((g * c - target).norm() >= 1e-12) {
    c = g.completeOrthogonalDecomposition().solve(target);
    if ((g * c - target).norm() >= 1e-10)
      throw span_deficient("symmetric family cannot reproduce Id");
  }
  if (c.minCoeff() < 1e-3)
    throw infeasible_positivity("symmetric base weight below 1e-3");

  Eigen::MatrixXd l = pseudo_inverse(g, sym_dim, "symmetric family");
  sym_decomposition dec;
  dec.frames = frames;
  dec.c.assign(c.data(), c.data() + n);
  dec.L.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    for (int i = 0; i < sym_dim; ++i) dec.L[j][i] = l(j, i);
  dec.eps0 = c.minCoeff() / (2.0 * max_row_norm(l));
  return dec;
}

skew_decomposition solve_skew_decomposition(
    const std::vector<anchored_frame>& frames) {
  const std::size_t n = frames.size();
  if (n < 2 * skew_dim)
    throw span_deficient("need at least 20 skew directions (sign pairs)");
  Eigen::MatrixXd g = skew_synthesis(frames);

  // equal weights within each sign pair; the wedges of a pair are exact
  // negations so the constant part of the decomposition cancels
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, 0.25);
  if ((g * d).norm() >= 1e-12)
    throw infeasible_positivity(
        "skew base weights do not cancel: family is not in sign pairs");

  Eigen::MatrixXd k = pseudo_inverse(g, skew_dim, "skew family");
  skew_decomposition dec;
  dec.frames = frames;
  dec.d.assign(d.data(), d.data() + n);
  dec.K.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    for (int i = 0; i < skew_dim; ++i) dec.K[j][i] = k(j, i);
  dec.eps0 = d.minCoeff() / (2.0 * max_row_norm(k));
  return dec;
}

std::vector<double> gamma_sym(const sym_decomposition& dec, const mat5& s) {
  mat5 h = s;
  for (int i = 0; i < 5; ++i) h[i][i] -= 1.0;
  double dist = fro_norm(h);
  if (dist > dec.eps0 * (1.0 + 1e-9))
    throw out_of_domain("matrix is " + std::to_string(dist) +
                        " from Id, outside the eps0 ball " +
                        std::to_string(dec.eps0));
  sym_vec hv = pack_sym(h);
  std::vector<double> out(dec.frames.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double g2 = dec.c[j];
    for (int i = 0; i < sym_dim; ++i) g2 += dec.L[j][i] * hv[i];
    if (g2 <= 0.0)
      throw out_of_domain("Gamma^2 lost positivity inside the ball");
    out[j] = std::sqrt(g2);
  }
  return out;
}

std::vector<double> gamma_skew(const skew_decomposition& dec, const mat5& a) {
  double dist = fro_norm(a);
  if (dist > dec.eps0 * (1.0 + 1e-9))
    throw out_of_domain("matrix norm " + std::to_string(dist) +
                        " outside the eps0 ball " + std::to_string(dec.eps0));
  skew_vec av = pack_skew(a);
  std::vector<double> out(dec.frames.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double g2 = dec.d[j];
    for (int i = 0; i < skew_dim; ++i) g2 += dec.K[j][i] * av[i];
    if (g2 <= 0.0)
      throw out_of_domain("gamma^2 lost positivity inside the ball");
    out[j] = std::sqrt(g2);
  }
  return out;
}

double window_constant(const sym_decomposition& sym,
                       const skew_decomposition& skew) {
  double cmax = 0.0, cmin = 1e300, dmax = 0.0, dmin = 1e300;
  for (double v : sym.c) {
    cmax = std::max(cmax, v);
    cmin = std::min(cmin, v);
  }
  for (double v : skew.d) {
    dmax = std::max(dmax, v);
    dmin = std::min(dmin, v);
  }
  double op_u = 0.0, op_b = 0.0;
  for (const auto& row : sym.L) {
    double s = 0;
    for (double v : row) s += v * v;
    op_u = std::max(op_u, std::sqrt(s));
  }
  for (const auto& row : skew.K) {
    double s = 0;
    for (double v : row) s += v * v;
    op_b = std::max(op_b, std::sqrt(s));
  }
  double eps0 = std::min(sym.eps0, skew.eps0);
  return std::max(std::max(std::sqrt(cmax + op_u * eps0),
                           std::sqrt(dmax + op_b * eps0)),
                  std::max(1.0 / std::sqrt(cmin / 2.0),
                           1.0 / std::sqrt(dmin / 2.0)));
}

}  // namespace mkd5
