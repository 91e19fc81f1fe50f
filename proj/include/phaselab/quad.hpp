#pragma once

// One-dimensional grids, composite Gauss-Legendre quadrature, principal-value
// integration and the continuum Fourier transform
//
//   f~(p) = (2 pi)^{-1/2} \int e^{-i p q} f(q) dq        (sign = -1, forward)
//
// All other modules integrate through these grids.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/error.hpp"

namespace phaselab::quad {

using cplx = std::complex<double>;

struct Panel {
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
  bool operator==(const Panel&) const = default;
};

// Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int order) {
  if (order < 1) throw InputError("gauss_legendre: order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double pn = 0.0;
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p_prev = 1.0;
      pn = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * pn - (k - 1.0) * p_prev) / k;
        p_prev = pn;
        pn = pk;
      }
      if (order == 1) p_prev = 1.0;
      dp = order * (x * pn - p_prev) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // one more evaluation at the converged root for the weight
        p_prev = 1.0;
        pn = x;
        for (int k = 2; k <= order; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * pn - (k - 1.0) * p_prev) / k;
          p_prev = pn;
          pn = pk;
        }
        if (order == 1) p_prev = 1.0;
        dp = order * (x * pn - p_prev) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[order - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[order - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

// Legendre polynomials P_0..P_{count-1} at t.
inline void legendre_values(double t, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = t;
  for (std::size_t n = 2; n < out.size(); ++n) {
    out[n] = ((2.0 * n - 1.0) * t * out[n - 1] - (n - 1.0) * out[n - 2]) / static_cast<double>(n);
  }
}

// Spherical Bessel functions j_0(x)..j_{n-1}(x) for x >= 0.
// Upward recurrence where it is stable (x >= n), Miller's downward recurrence
// below that, and the leading series terms for tiny x.
inline void sph_bessel_sequence(double x, std::span<double> out) {
  const int n = static_cast<int>(out.size());
  if (n == 0) return;
  x = std::abs(x);
  if (x < 1e-3) {
    double term = 1.0;  // x^k / (2k+1)!!
    for (int k = 0; k < n; ++k) {
      if (k > 0) term *= x / (2.0 * k + 1.0);
      const double a = 2.0 * k + 3.0;
      out[k] = term * (1.0 - x * x / (2.0 * a) + x * x * x * x / (8.0 * a * (a + 2.0)));
    }
    return;
  }
  const double s = std::sin(x);
  const double c = std::cos(x);
  const double j0 = s / x;
  const double j1 = s / (x * x) - c / x;
  if (x >= n) {
    out[0] = j0;
    if (n > 1) out[1] = j1;
    for (int k = 1; k + 1 < n; ++k) out[k + 1] = (2.0 * k + 1.0) / x * out[k] - out[k - 1];
    return;
  }
  const int start = std::max(n, static_cast<int>(x)) + 40;
  std::vector<double> tmp(start + 2, 0.0);
  tmp[start + 1] = 0.0;
  tmp[start] = 1e-300;
  for (int k = start; k >= 1; --k) {
    tmp[k - 1] = (2.0 * k + 1.0) / x * tmp[k] - tmp[k + 1];
    if (std::abs(tmp[k - 1]) > 1e200) {
      for (int m = k - 1; m <= start + 1; ++m) tmp[m] *= 1e-200;
    }
  }
  const double scale = (std::abs(j0) >= std::abs(j1)) ? j0 / tmp[0] : j1 / tmp[1];
  for (int k = 0; k < n; ++k) out[k] = tmp[k] * scale;
}

// Quadrature grid: strictly increasing nodes with positive weights. Grids built
// from panels remember the panel layout (order nodes per panel, panels sorted,
// gaps allowed); the Fourier transform and interpolation exploit it.
class Grid1D {
 public:
  Grid1D() = default;

  Grid1D(std::vector<double> nodes, std::vector<double> weights)
      : nodes_(std::move(nodes)), weights_(std::move(weights)) {
    validate();
  }

  static Grid1D from_panels(std::vector<Panel> panels, int order) {
    if (order < 2) throw InputError("grid order must be >= 2");
    if (panels.empty()) throw InputError("grid needs at least one panel");
    const GaussRule rule = gauss_legendre(order);
    Grid1D g;
    g.order_ = order;
    for (std::size_t k = 0; k < panels.size(); ++k) {
      const Panel& p = panels[k];
      if (!(p.hi > p.lo)) throw InputError("panel endpoints must be increasing");
      if (k > 0 && p.lo < panels[k - 1].hi) throw InputError("panels overlap or are unsorted");
      for (int i = 0; i < order; ++i) {
        g.nodes_.push_back(p.mid() + p.half_width() * rule.nodes[i]);
        g.weights_.push_back(p.half_width() * rule.weights[i]);
      }
    }
    g.panels_ = std::move(panels);
    g.validate();
    return g;
  }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  bool panelled() const { return order_ > 0; }
  int order() const { return order_; }
  const std::vector<Panel>& panels() const { return panels_; }

  double lo() const { return panelled() ? panels_.front().lo : nodes_.front(); }
  double hi() const { return panelled() ? panels_.back().hi : nodes_.back(); }

  // Panel endpoints, or the node span for plain grids.
  std::vector<double> breakpoints() const {
    std::vector<double> bp;
    if (!panelled()) return {lo(), hi()};
    for (const Panel& p : panels_) {
      if (bp.empty() || bp.back() != p.lo) bp.push_back(p.lo);
      bp.push_back(p.hi);
    }
    return bp;
  }

  Grid1D shifted(double offset) const {
    if (!panelled()) {
      std::vector<double> n = nodes_;
      for (double& x : n) x += offset;
      return Grid1D(std::move(n), weights_);
    }
    std::vector<Panel> ps = panels_;
    for (Panel& p : ps) {
      p.lo += offset;
      p.hi += offset;
    }
    return from_panels(std::move(ps), order_);
  }

  bool operator==(const Grid1D& o) const {
    return nodes_ == o.nodes_ && weights_ == o.weights_;
  }

 private:
  void validate() const {
    if (nodes_.size() != weights_.size()) throw InputError("grid nodes and weights differ in length");
    if (nodes_.empty()) throw InputError("empty grid");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!std::isfinite(nodes_[i]) || !std::isfinite(weights_[i]))
        throw InputError("grid entries must be finite");
      if (!(weights_[i] > 0.0)) throw InputError("grid weights must be positive");
      if (i > 0 && !(nodes_[i] > nodes_[i - 1])) throw InputError("grid nodes must be strictly increasing");
    }
  }

  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<Panel> panels_;
  int order_ = 0;
};

enum class Grading { uniform, log };

// Geometric ratio of successive panel widths in log grading.
inline constexpr double kLogGradingRatio = 0.15;

// Composite Gauss-Legendre grid. Each interval between consecutive breakpoints
// is split into `subdivisions` panels: equal widths for uniform grading,
// widths shrinking geometrically toward the interval's left end for log grading.
inline Grid1D build_panels(std::span<const double> breakpoints, int order, Grading grading = Grading::uniform,
                           int subdivisions = 1) {
  if (breakpoints.size() < 2) throw InputError("build_panels: need at least two breakpoints");
  if (order < 2) throw InputError("build_panels: order must be >= 2");
  if (subdivisions < 1) throw InputError("build_panels: subdivisions must be >= 1");
  std::vector<Panel> panels;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double a = breakpoints[k];
    const double b = breakpoints[k + 1];
    if (!(b > a)) throw InputError("build_panels: breakpoints must be strictly increasing");
    std::vector<double> cuts{a};
    for (int m = 1; m < subdivisions; ++m) {
      if (grading == Grading::uniform) {
        cuts.push_back(a + (b - a) * m / subdivisions);
      } else {
        cuts.push_back(a + (b - a) * std::pow(kLogGradingRatio, subdivisions - m));
      }
    }
    cuts.push_back(b);
    for (std::size_t m = 0; m + 1 < cuts.size(); ++m) panels.push_back({cuts[m], cuts[m + 1]});
  }
  return Grid1D::from_panels(std::move(panels), order);
}

// lo * r^k, k = 0..count, with r chosen so the last point is hi.
inline std::vector<double> geometric_breakpoints(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 1) throw InputError("geometric_breakpoints: need 0 < lo < hi, count >= 1");
  std::vector<double> bp(count + 1);
  const double step = std::log(hi / lo) / count;
  for (int k = 0; k <= count; ++k) bp[k] = lo * std::exp(step * k);
  bp.front() = lo;
  bp.back() = hi;
  return bp;
}

// Mirror a grid on [0, inf) to a grid symmetric about `center`.
inline Grid1D symmetric_grid(const Grid1D& half, double center = 0.0) {
  if (!half.panelled() || half.lo() < 0.0) throw InputError("symmetric_grid: needs a panelled half-line grid");
  std::vector<Panel> panels;
  for (auto it = half.panels().rbegin(); it != half.panels().rend(); ++it) {
    panels.push_back({center - it->hi, center - it->lo});
  }
  for (const Panel& p : half.panels()) panels.push_back({center + p.lo, center + p.hi});
  return Grid1D::from_panels(std::move(panels), half.order());
}

// Complex samples on a grid. The represented function is
// exp(i * carrier * q) * values(q); a nonzero carrier keeps boosted states
// resolvable on coarse panels.
struct ComplexProfile {
  Grid1D grid;
  std::vector<cplx> values;
  double carrier = 0.0;

  ComplexProfile() = default;
  ComplexProfile(Grid1D g, std::vector<cplx> v, double k = 0.0)
      : grid(std::move(g)), values(std::move(v)), carrier(k) {
    if (values.size() != grid.size()) throw InputError("profile length differs from its grid");
  }

  std::size_t size() const { return values.size(); }

  cplx value(std::size_t i) const {
    if (carrier == 0.0) return values[i];
    return values[i] * std::polar(1.0, carrier * grid.node(i));
  }
};

template <class F>
ComplexProfile sample(const Grid1D& grid, F&& f) {
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
  return ComplexProfile(grid, std::move(v));
}

inline cplx integrate(const ComplexProfile& f) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.grid.weight(i) * f.value(i);
  return s;
}

template <class F>
auto integrate(const Grid1D& grid, F&& f) {
  using R = decltype(f(0.0));
  R s{};
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weight(i) * f(grid.node(i));
  return s;
}

// <a|b> with the conjugate on the first argument; grids must match.
inline cplx inner(const ComplexProfile& a, const ComplexProfile& b) {
  if (!(a.grid == b.grid)) throw InputError("inner: profiles live on different grids");
  cplx s = 0.0;
  if (a.carrier == b.carrier) {
    for (std::size_t i = 0; i < a.size(); ++i) s += a.grid.weight(i) * std::conj(a.values[i]) * b.values[i];
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) s += a.grid.weight(i) * std::conj(a.value(i)) * b.value(i);
  }
  return s;
}

inline double norm2(const ComplexProfile& a) { return inner(a, a).real(); }

// Evaluate a profile between nodes: barycentric Lagrange interpolation on the
// panel containing x (zero outside every panel), linear on plain grids.
inline cplx interpolate(const ComplexProfile& f, double x) {
  const Grid1D& g = f.grid;
  const cplx phase = f.carrier == 0.0 ? cplx(1.0) : std::polar(1.0, f.carrier * x);
  if (!g.panelled()) {
    const auto& n = g.nodes();
    if (x < n.front() || x > n.back()) return 0.0;
    auto it = std::upper_bound(n.begin(), n.end(), x);
    if (it == n.end()) return f.values.back() * phase;
    const std::size_t j = static_cast<std::size_t>(it - n.begin());
    if (j == 0) return f.values.front() * phase;
    const double t = (x - n[j - 1]) / (n[j] - n[j - 1]);
    return ((1.0 - t) * f.values[j - 1] + t * f.values[j]) * phase;
  }
  const auto& ps = g.panels();
  auto it = std::upper_bound(ps.begin(), ps.end(), x, [](double v, const Panel& p) { return v < p.hi; });
  if (it == ps.end()) {
    if (x == ps.back().hi) it = ps.end() - 1;
    else return 0.0;
  }
  if (x < it->lo) return 0.0;
  const std::size_t k = static_cast<std::size_t>(it - ps.begin());
  const int m = g.order();
  const std::size_t base = k * m;
  // barycentric weights for arbitrary nodes
  cplx num = 0.0;
  double den = 0.0;
  for (int i = 0; i < m; ++i) {
    const double xi = g.node(base + i);
    if (x == xi) return f.values[base + i] * phase;
    double wi = 1.0;
    for (int j = 0; j < m; ++j) {
      if (j != i) wi /= (xi - g.node(base + j));
    }
    const double c = wi / (x - xi);
    num += c * f.values[base + i];
    den += c;
  }
  return num / den * phase;
}

namespace detail {

inline std::vector<double> refine(std::vector<double> pts, int pieces) {
  if (pieces <= 1) return pts;
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    for (int m = 0; m < pieces; ++m) out.push_back(pts[k] + (pts[k + 1] - pts[k]) * m / pieces);
  }
  out.push_back(pts.back());
  return out;
}

template <class G>
double gauss_sum(const std::vector<double>& cuts, const GaussRule& rule, G&& g) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double c = 0.5 * (cuts[k] + cuts[k + 1]);
    const double h = 0.5 * (cuts[k + 1] - cuts[k]);
    if (!(h > 0.0)) continue;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += h * rule.weights[i] * g(c + h * rule.nodes[i]);
  }
  return s;
}

}  // namespace detail

// Cauchy principal value PV \int f(x) / (x - c) dx over the span of `grid`.
// The window |x - c| < delta (delta = distance to the nearer grid end) is
// folded into \int_0^delta [f(c+t) - f(c-t)] / t dt; the rest of the span is a
// plain integral. Panel endpoints of the grid are kept as cut points on both
// parts so discontinuities of f stay on panel boundaries.
template <class F>
double pv_integrate(F&& f, double c, const Grid1D& grid) {
  const double lo = grid.lo();
  const double hi = grid.hi();
  if (!(c > lo && c < hi)) throw InputError("pv_integrate: pole must lie strictly inside the grid span");
  const double delta = std::min(c - lo, hi - c);
  const int order = grid.panelled() ? grid.order() : 16;
  const GaussRule rule = gauss_legendre(order);
  const int pieces = grid.panelled() ? 1 : 8;
  const std::vector<double> bps = grid.breakpoints();

  std::vector<double> tcuts{0.0, delta};
  for (double b : bps) {
    const double t = std::abs(b - c);
    if (t > 0.0 && t < delta) tcuts.push_back(t);
  }
  std::sort(tcuts.begin(), tcuts.end());
  tcuts.erase(std::unique(tcuts.begin(), tcuts.end()), tcuts.end());
  tcuts = detail::refine(std::move(tcuts), pieces);
  const double sym = detail::gauss_sum(tcuts, rule, [&](double t) { return (f(c + t) - f(c - t)) / t; });

  double outer = 0.0;
  const bool right = (hi - c) > delta * (1.0 + 1e-15);
  const bool left = (c - lo) > delta * (1.0 + 1e-15);
  if (right || left) {
    const double a = right ? c + delta : lo;
    const double b = right ? hi : c - delta;
    std::vector<double> cuts{a, b};
    for (double x : bps) {
      if (x > a && x < b) cuts.push_back(x);
    }
    // geometric cuts away from the window edge, where 1/(x-c) varies fastest
    for (double d = 2.0 * delta; d < (b - a) + delta; d *= 2.0) {
      const double x = right ? c + d : c - d;
      if (x > a && x < b) cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts = detail::refine(std::move(cuts), pieces);
    outer = detail::gauss_sum(cuts, rule, [&](double x) { return f(x) / (x - c); });
  }
  return sym + outer;
}

// Direct quadrature transform (2 pi)^{-1/2} \int e^{i sign p q} psi(q) dq onto
// p_grid. On panelled grids each panel is expanded in Legendre polynomials
// and integrated against the exponential exactly,
//   \int_{-1}^{1} e^{i w t} P_n(t) dt = 2 i^n j_n(w),
// which stays accurate when a panel spans many oscillations.
inline ComplexProfile fourier(const ComplexProfile& psi, const Grid1D& p_grid, int sign) {
  if (psi.grid.empty() || p_grid.empty()) throw InputError("fourier: empty grid");
  if (sign != 1 && sign != -1) throw InputError("fourier: sign must be +1 or -1");
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const Grid1D& g = psi.grid;
  std::vector<cplx> out(p_grid.size(), 0.0);

  if (!g.panelled()) {
    for (std::size_t j = 0; j < p_grid.size(); ++j) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        s += g.weight(i) * std::polar(1.0, sign * p_grid.node(j) * g.node(i)) * psi.value(i);
      }
      out[j] = norm * s;
    }
    return ComplexProfile(p_grid, std::move(out));
  }

  const int m = g.order();
  const GaussRule rule = gauss_legendre(m);
  // coefficient map from nodal values to Legendre coefficients
  std::vector<double> cmat(static_cast<std::size_t>(m) * m);
  std::vector<double> pv(m);
  for (int i = 0; i < m; ++i) {
    legendre_values(rule.nodes[i], pv);
    for (int n = 0; n < m; ++n) cmat[n * m + i] = 0.5 * (2.0 * n + 1.0) * rule.weights[i] * pv[n];
  }
  const std::size_t npan = g.panels().size();
  std::vector<cplx> coef(npan * m, 0.0);
  for (std::size_t k = 0; k < npan; ++k) {
    for (int n = 0; n < m; ++n) {
      cplx a = 0.0;
      for (int i = 0; i < m; ++i) a += cmat[n * m + i] * psi.values[k * m + i];
      coef[k * m + n] = a;
    }
  }
  std::vector<cplx> ipow(m);
  for (int n = 0; n < m; ++n) ipow[n] = std::pow(cplx(0.0, 1.0), n);
  std::vector<double> jn(m);
  for (std::size_t j = 0; j < p_grid.size(); ++j) {
    const double p_eff = p_grid.node(j) + sign * psi.carrier;
    cplx s = 0.0;
    for (std::size_t k = 0; k < npan; ++k) {
      const Panel& pan = g.panels()[k];
      const double w = sign * p_eff * pan.half_width();
      sph_bessel_sequence(w, jn);
      cplx acc = 0.0;
      for (int n = 0; n < m; ++n) {
        const double jv = (w < 0.0 && (n % 2 == 1)) ? -jn[n] : jn[n];
        acc += coef[k * m + n] * ipow[n] * jv;
      }
      s += 2.0 * pan.half_width() * std::polar(1.0, sign * p_eff * pan.mid()) * acc;
    }
    out[j] = norm * s;
  }
  return ComplexProfile(p_grid, std::move(out));
}

}  // namespace phaselab::quad
