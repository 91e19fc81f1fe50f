#pragma once

// The operator (Kh)(q) = (1/pi) \int_0^inf h(q') / (q + q') dq' on L^2(0, inf).
// Under q = e^u, h(q) -> e^{u/2} h(e^u) it becomes convolution with
// Kbar(u) = 1 / (2 pi cosh(u/2)), whose symbol is 1 / cosh(pi k).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/quad.hpp"

namespace phaselab::kop {

using quad::cplx;

inline double kbar(double u) { return 1.0 / (2.0 * std::numbers::pi * std::cosh(0.5 * u)); }

inline double symbol(double k) { return 1.0 / std::cosh(std::numbers::pi * k); }

// (Kh)(q_i) by quadrature on h's own half-line grid.
inline quad::ComplexProfile k_apply(const quad::ComplexProfile& h) {
  const auto& g = h.grid;
  if (g.lo() < 0.0) throw InputError("k_apply: profile must live on the half-line");
  std::vector<cplx> out(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.weight(j) * h.value(j) / (g.node(i) + g.node(j));
    out[i] = s / std::numbers::pi;
  }
  return quad::ComplexProfile(g, std::move(out));
}

// <h|K|h> by double quadrature.
inline double k_form(const quad::ComplexProfile& h) {
  const auto& g = h.grid;
  if (g.lo() < 0.0) throw InputError("k_form: profile must live on the half-line");
  const std::size_t n = g.size();
  std::vector<cplx> wh(n);
  for (std::size_t i = 0; i < n; ++i) wh[i] = g.weight(i) * h.value(i);
  cplx s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cplx row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += wh[j] / (g.node(i) + g.node(j));
    s += std::conj(wh[i]) * row;
  }
  return s.real() / std::numbers::pi;
}

// Nystrom discretization of the log-variable convolution on a midpoint grid
// over [-U, U]: matrix entries Kbar(u_i - u_j) sqrt(w_i w_j).
struct LogGridOperator {
  quad::Grid1D u_grid;
  Eigen::MatrixXd matrix;
};

inline LogGridOperator log_grid_operator(double U, int n) {
  if (!(U > 0.0) || !std::isfinite(U)) throw InputError("k_spectrum: U must be positive");
  if (n < 16) throw InputError("k_spectrum: n must be >= 16");
  const double h = 2.0 * U / n;
  if (h > 1.0) throw InputError("k_spectrum: grid spacing 2U/n must be <= 1 to resolve the kernel");
  std::vector<double> nodes(n), weights(n, h);
  for (int i = 0; i < n; ++i) nodes[i] = -U + (i + 0.5) * h;
  LogGridOperator op{quad::Grid1D(nodes, weights), Eigen::MatrixXd(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = kbar(nodes[i] - nodes[j]) * h;
      op.matrix(i, j) = v;
      op.matrix(j, i) = v;
    }
  }
  return op;
}

// Ritz values of the discretized operator, descending. The true spectrum is
// the continuum [0, 1]; these approximate it from inside.
inline std::vector<double> k_spectrum(double U, int n) {
  const LogGridOperator op = log_grid_operator(U, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("k_spectrum: eigensolver did not converge");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

// \int e^{iku} Kbar(u) du by quadrature at each node of k_grid, compared with
// 1 / cosh(pi k); returns the sup defect.
inline double symbol_transform(double k) {
  static const quad::Grid1D grid = [] {
    std::vector<double> bp;
    for (int x = -90; x <= 90; ++x) bp.push_back(x);
    return quad::build_panels(bp, 16);
  }();
  // Kbar is even, so only the cosine part survives.
  return quad::integrate(grid, [k](double u) { return std::cos(k * u) * kbar(u); });
}

inline double symbol_check(const quad::Grid1D& k_grid) {
  double d = 0.0;
  for (double k : k_grid.nodes()) d = std::max(d, std::abs(symbol_transform(k) - symbol(k)));
  return d;
}

// \int_{x0}^1 arctan(x)/x dx; the integrand is analytic near [0, 1].
inline double arctan_over_x_integral(double x0) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw InputError("arctan integral: lower limit must lie in [0, 1]");
  if (x0 == 1.0) return 0.0;
  const double bp[] = {x0, x0 + 0.25 * (1.0 - x0), x0 + 0.5 * (1.0 - x0), x0 + 0.75 * (1.0 - x0), 1.0};
  const quad::Grid1D g = quad::build_panels(bp, 20);
  return quad::integrate(g, [](double x) { return x == 0.0 ? 1.0 : std::atan(x) / x; });
}

// <h_{eps,L}|K|h_{eps,L}> for h = chi_(eps,L)(q) / sqrt(q ln(L/eps)):
//   1 - (8 / (pi ln(L/eps))) \int_{sqrt(eps/L)}^1 arctan(x)/x dx.
inline double gamma_cutoff_closed_form(double eps, double L) {
  if (!(eps > 0.0) || !(L > eps) || !std::isfinite(L)) throw InputError("gamma_cutoff_closed_form: need 0 < eps < L");
  const double ell = std::log(L / eps);
  return 1.0 - 8.0 / (std::numbers::pi * ell) * arctan_over_x_integral(std::sqrt(eps / L));
}

}  // namespace phaselab::kop
