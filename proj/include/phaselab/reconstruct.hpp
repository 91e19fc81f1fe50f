#pragma once

// Three-marginal problem on the chain sigma0(q1,q2), sigma1(p1,q2), sigma2(p1,p2):
//
//   rho0 = sigma0 sigma1 sigma2 / (sigma01(q2) sigma12(p1))   on E, 0 elsewhere,
//   rho  = rho0 + lambda Delta(F),  lambda in [-1/m+, 1/m-].
//
// All 4-D arrays use the layout [q1][q2][p1][p2].

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "phaselab/bell.hpp"
#include "phaselab/error.hpp"
#include "phaselab/marginal.hpp"
#include "phaselab/quad.hpp"

namespace phaselab::reconstruct {

using marginal::GriddedDensity;
using marginal::Marginal2D;
using marginal::TripletProblem;
using quad::Grid1D;

inline constexpr std::size_t kMaxDenseAxis = 64;
inline constexpr double kDefaultSuppTol = 1e-12;
// Support cells dropped by the projection check may carry at most this
// fraction of the marginal's mass.
inline constexpr double kPruneMass = 1e-9;

struct Dense4D {
  std::array<Grid1D, 4> axes;  // q1, q2, p1, p2
  std::vector<double> values;

  Dense4D() = default;
  explicit Dense4D(std::array<Grid1D, 4> ax, double fill = 0.0) : axes(std::move(ax)) {
    for (const auto& g : axes) {
      if (g.size() > kMaxDenseAxis) throw InputError("dense 4-D arrays are limited to 64 nodes per axis");
    }
    values.assign(axes[0].size() * axes[1].size() * axes[2].size() * axes[3].size(), fill);
  }

  std::array<std::size_t, 4> shape() const { return {axes[0].size(), axes[1].size(), axes[2].size(), axes[3].size()}; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return ((i * axes[1].size() + j) * axes[2].size() + k) * axes[3].size() + l;
  }
  double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) { return values[index(i, j, k, l)]; }
  double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const { return values[index(i, j, k, l)]; }

  double cell_weight(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return axes[0].weight(i) * axes[1].weight(j) * axes[2].weight(k) * axes[3].weight(l);
  }

  double integral() const {
    const auto [n0, n1, n2, n3] = shape();
    double s = 0.0;
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n1; ++j)
        for (std::size_t k = 0; k < n2; ++k) {
          const double w = axes[0].weight(i) * axes[1].weight(j) * axes[2].weight(k);
          const double* row = &values[index(i, j, k, 0)];
          double r = 0.0;
          for (std::size_t l = 0; l < n3; ++l) r += axes[3].weight(l) * row[l];
          s += w * r;
        }
    return s;
  }
};

// Row-major 2-D array with its two axes.
struct Table2D {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<double> v;

  Table2D() = default;
  Table2D(std::size_t a, std::size_t b, double fill = 0.0) : n1(a), n2(b), v(a * b, fill) {}
  double& operator()(std::size_t i, std::size_t j) { return v[i * n2 + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[i * n2 + j]; }
};

// The three marginals of a 4-D density: over (p1,p2), (q1,p2), (q1,q2).
struct ChainMarginals {
  Table2D m0;  // (q1, q2)
  Table2D m1;  // (p1, q2)
  Table2D m2;  // (p1, p2)
  double mass = 0.0;
};

namespace detail {

inline const GriddedDensity& gridded(const Marginal2D& m, const char* name) {
  if (!m.gridded()) throw InputError(std::string("reconstruction needs gridded marginals; ") + name + " is atomic");
  return m.density();
}

struct Axes {
  const Grid1D* q1;
  const Grid1D* q2;
  const Grid1D* p1;
  const Grid1D* p2;
};

inline Axes triplet_axes(const TripletProblem& t) {
  const auto& s0 = gridded(t.sigma0, "sigma0");
  const auto& s1 = gridded(t.sigma1, "sigma1");
  const auto& s2 = gridded(t.sigma2, "sigma2");
  if (!(s0.axis2 == s1.axis2)) throw InputError("sigma0 and sigma1 must share their q2 grid");
  if (!(s1.axis1 == s2.axis1)) throw InputError("sigma1 and sigma2 must share their p1 grid");
  return {&s0.axis1, &s0.axis2, &s1.axis1, &s2.axis2};
}

inline double sup(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// max |a - b| / max |b|
inline double rel_defect(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  const double s = sup(b);
  return s > 0.0 ? d / s : d;
}

}  // namespace detail

struct SupportMask {
  Table2D s0;  // (q1, q2), 1 inside
  Table2D s1;  // (p1, q2)
  Table2D s2;  // (p1, p2)
  double pruned_mass = 0.0;

  bool in_e(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return s0(i, j) != 0.0 && s1(k, j) != 0.0 && s2(k, l) != 0.0;
  }
};

// Essential supports by thresholding at supp_tol * max. The shared-variable
// projections must agree; cells that break the agreement are pruned when they
// carry negligible mass, otherwise the triplet is rejected.
inline SupportMask support_sets(const TripletProblem& t, double supp_tol = kDefaultSuppTol) {
  if (!(supp_tol >= 0.0 && supp_tol < 1.0)) throw InputError("support tolerance must lie in [0, 1)");
  const detail::Axes ax = detail::triplet_axes(t);
  const auto& d0 = t.sigma0.density();
  const auto& d1 = t.sigma1.density();
  const auto& d2 = t.sigma2.density();
  const auto mask = [&](const GriddedDensity& d) {
    Table2D m(d.axis1.size(), d.axis2.size());
    const double thr = supp_tol * detail::sup(d.values);
    for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = d.values[i] > thr ? 1.0 : 0.0;
    return m;
  };
  SupportMask sm{mask(d0), mask(d1), mask(d2)};
  const std::size_t nq1 = ax.q1->size(), nq2 = ax.q2->size(), np1 = ax.p1->size(), np2 = ax.p2->size();

  double worst = 0.0;
  // Drop rows/columns of `m` whose shared index is absent from `keep`; return
  // the dropped mass fraction.
  const auto prune = [&](Table2D& m, const GriddedDensity& d, bool shared_is_second, const std::vector<char>& keep) {
    double dropped = 0.0, total = 0.0;
    for (std::size_t i = 0; i < m.n1; ++i) {
      for (std::size_t j = 0; j < m.n2; ++j) {
        const double w = d.axis1.weight(i) * d.axis2.weight(j) * d.at(i, j);
        total += w;
        const std::size_t s = shared_is_second ? j : i;
        if (m(i, j) != 0.0 && !keep[s]) {
          m(i, j) = 0.0;
          dropped += w;
        }
      }
    }
    return total > 0.0 ? dropped / total : 0.0;
  };
  // The pruning can cascade along the chain; two sweeps reach a fixed point.
  for (int sweep = 0; sweep < 3; ++sweep) {
    std::vector<char> q2_from0(nq2, 0), q2_from1(nq2, 0), p1_from1(np1, 0), p1_from2(np1, 0);
    for (std::size_t i = 0; i < nq1; ++i)
      for (std::size_t j = 0; j < nq2; ++j) q2_from0[j] |= sm.s0(i, j) != 0.0;
    for (std::size_t k = 0; k < np1; ++k)
      for (std::size_t j = 0; j < nq2; ++j) {
        q2_from1[j] |= sm.s1(k, j) != 0.0;
        p1_from1[k] |= sm.s1(k, j) != 0.0;
      }
    for (std::size_t k = 0; k < np1; ++k)
      for (std::size_t l = 0; l < np2; ++l) p1_from2[k] |= sm.s2(k, l) != 0.0;
    if (q2_from0 == q2_from1 && p1_from1 == p1_from2) break;
    worst = std::max(worst, prune(sm.s0, d0, true, q2_from1));
    worst = std::max(worst, prune(sm.s1, d1, true, q2_from0));
    worst = std::max(worst, prune(sm.s1, d1, false, p1_from2));
    worst = std::max(worst, prune(sm.s2, d2, false, p1_from1));
    if (sweep == 2) throw ConsistencyError("support projections do not settle");
  }
  if (worst > kPruneMass) throw ConsistencyError("marginal supports violate the projection equalities");
  sm.pruned_mass = worst;

  bool any = false;
  for (std::size_t k = 0; k < np1 && !any; ++k)
    for (std::size_t j = 0; j < nq2 && !any; ++j) {
      if (sm.s1(k, j) == 0.0) continue;
      bool a = false, b = false;
      for (std::size_t i = 0; i < nq1 && !a; ++i) a = sm.s0(i, j) != 0.0;
      for (std::size_t l = 0; l < np2 && !b; ++l) b = sm.s2(k, l) != 0.0;
      any = a && b;
    }
  if (!any) throw ConsistencyError("the support set E is empty");
  return sm;
}

// rho0 in product form a0(q1,q2) a1(p1,q2) a2(p1,p2), each factor already
// masked to its support.
struct LazyProduct {
  std::array<Grid1D, 4> axes;
  Table2D a0;
  Table2D a1;
  Table2D a2;

  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return a0(i, j) * a1(k, j) * a2(k, l);
  }
};

class PhaseSpaceDensity {
 public:
  explicit PhaseSpaceDensity(LazyProduct p) : rep_(std::move(p)) {}
  explicit PhaseSpaceDensity(Dense4D d) : rep_(std::move(d)) {}

  bool lazy() const { return std::holds_alternative<LazyProduct>(rep_); }
  const LazyProduct& product() const { return std::get<LazyProduct>(rep_); }
  const Dense4D& dense() const { return std::get<Dense4D>(rep_); }

  const std::array<Grid1D, 4>& axes() const { return lazy() ? product().axes : dense().axes; }

  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return lazy() ? product()(i, j, k, l) : dense().at(i, j, k, l);
  }

  Dense4D to_dense() const {
    if (!lazy()) return dense();
    const auto& p = product();
    Dense4D d(p.axes);
    const auto [n0, n1, n2, n3] = d.shape();
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n1; ++j) {
        const double a = p.a0(i, j);
        for (std::size_t k = 0; k < n2; ++k) {
          const double b = a * p.a1(k, j);
          double* row = &d.values[d.index(i, j, k, 0)];
          for (std::size_t l = 0; l < n3; ++l) row[l] = b * p.a2(k, l);
        }
      }
    return d;
  }

  ChainMarginals marginals() const {
    const auto& ax = axes();
    const std::size_t n0 = ax[0].size(), n1 = ax[1].size(), n2 = ax[2].size(), n3 = ax[3].size();
    ChainMarginals m{Table2D(n0, n1), Table2D(n2, n1), Table2D(n2, n3), 0.0};
    if (lazy()) {
      // O(N^3) through the chain structure
      const auto& p = product();
      std::vector<double> c0(n1, 0.0), c2(n2, 0.0);
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) c0[j] += ax[0].weight(i) * p.a0(i, j);
      for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t l = 0; l < n3; ++l) c2[k] += ax[3].weight(l) * p.a2(k, l);
      std::vector<double> via_p1(n1, 0.0);
      for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t j = 0; j < n1; ++j) via_p1[j] += ax[2].weight(k) * p.a1(k, j) * c2[k];
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) m.m0(i, j) = p.a0(i, j) * via_p1[j];
      for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t j = 0; j < n1; ++j) m.m1(k, j) = p.a1(k, j) * c0[j] * c2[k];
      for (std::size_t k = 0; k < n2; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n1; ++j) s += ax[1].weight(j) * c0[j] * p.a1(k, j);
        for (std::size_t l = 0; l < n3; ++l) m.m2(k, l) = p.a2(k, l) * s;
      }
    } else {
      const Dense4D& d = dense();
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j)
          for (std::size_t k = 0; k < n2; ++k)
            for (std::size_t l = 0; l < n3; ++l) {
              const double v = d.at(i, j, k, l);
              m.m0(i, j) += ax[2].weight(k) * ax[3].weight(l) * v;
              m.m1(k, j) += ax[0].weight(i) * ax[3].weight(l) * v;
              m.m2(k, l) += ax[0].weight(i) * ax[1].weight(j) * v;
            }
    }
    for (std::size_t k = 0; k < n2; ++k)
      for (std::size_t l = 0; l < n3; ++l) m.mass += ax[2].weight(k) * ax[3].weight(l) * m.m2(k, l);
    return m;
  }

 private:
  std::variant<LazyProduct, Dense4D> rep_;
};

struct ChainDiagnostics {
  double sigma01_defect = 0.0;  // relative sup defect between the two parents
  double sigma12_defect = 0.0;
};

struct Rho0 {
  PhaseSpaceDensity density;
  SupportMask support;
  ChainDiagnostics chain;
};

inline Rho0 rho0_with_support(const TripletProblem& t, double supp_tol = kDefaultSuppTol) {
  const detail::Axes ax = detail::triplet_axes(t);
  SupportMask sm = support_sets(t, supp_tol);
  const auto& d0 = t.sigma0.density();
  const auto& d1 = t.sigma1.density();
  const auto& d2 = t.sigma2.density();
  const std::size_t nq1 = ax.q1->size(), nq2 = ax.q2->size(), np1 = ax.p1->size(), np2 = ax.p2->size();

  // sigma01 from both parents, averaged
  std::vector<double> s01a(nq2, 0.0), s01b(nq2, 0.0), s12a(np1, 0.0), s12b(np1, 0.0);
  for (std::size_t i = 0; i < nq1; ++i)
    for (std::size_t j = 0; j < nq2; ++j) s01a[j] += ax.q1->weight(i) * d0.at(i, j) * sm.s0(i, j);
  for (std::size_t k = 0; k < np1; ++k)
    for (std::size_t j = 0; j < nq2; ++j) {
      s01b[j] += ax.p1->weight(k) * d1.at(k, j) * sm.s1(k, j);
      s12a[k] += ax.q2->weight(j) * d1.at(k, j) * sm.s1(k, j);
    }
  for (std::size_t k = 0; k < np1; ++k)
    for (std::size_t l = 0; l < np2; ++l) s12b[k] += ax.p2->weight(l) * d2.at(k, l) * sm.s2(k, l);
  ChainDiagnostics diag{detail::rel_defect(s01a, s01b), detail::rel_defect(s12a, s12b)};

  LazyProduct p{{*ax.q1, *ax.q2, *ax.p1, *ax.p2}, Table2D(nq1, nq2), Table2D(np1, nq2), Table2D(np1, np2)};
  for (std::size_t i = 0; i < nq1; ++i)
    for (std::size_t j = 0; j < nq2; ++j) p.a0(i, j) = d0.at(i, j) * sm.s0(i, j);
  for (std::size_t k = 0; k < np1; ++k)
    for (std::size_t j = 0; j < nq2; ++j) {
      if (sm.s1(k, j) == 0.0) continue;
      const double s01 = 0.5 * (s01a[j] + s01b[j]);
      if (!(s01 > 0.0)) throw NumericalError("rho0: sigma01 vanishes inside the support");
      p.a1(k, j) = d1.at(k, j) / s01;
    }
  for (std::size_t k = 0; k < np1; ++k) {
    const double s12 = 0.5 * (s12a[k] + s12b[k]);
    for (std::size_t l = 0; l < np2; ++l) {
      if (sm.s2(k, l) == 0.0) continue;
      if (!(s12 > 0.0)) throw NumericalError("rho0: sigma12 vanishes inside the support");
      p.a2(k, l) = d2.at(k, l) / s12;
    }
  }
  return {PhaseSpaceDensity(std::move(p)), std::move(sm), diag};
}

inline PhaseSpaceDensity rho0(const TripletProblem& t, double supp_tol = kDefaultSuppTol) {
  return rho0_with_support(t, supp_tol).density;
}

struct RoundTrip {
  std::array<double, 3> defects{};  // relative sup defects for sigma0, sigma1, sigma2
  double max_defect = 0.0;
  double mass = 0.0;
};

inline RoundTrip round_trip(const TripletProblem& t, const PhaseSpaceDensity& rho) {
  const ChainMarginals m = rho.marginals();
  RoundTrip rt;
  rt.defects[0] = detail::rel_defect(m.m0.v, t.sigma0.density().values);
  rt.defects[1] = detail::rel_defect(m.m1.v, t.sigma1.density().values);
  rt.defects[2] = detail::rel_defect(m.m2.v, t.sigma2.density().values);
  rt.max_defect = *std::max_element(rt.defects.begin(), rt.defects.end());
  rt.mass = m.mass;
  return rt;
}

namespace detail {

inline void require_axes(const Dense4D& F, const std::array<Grid1D, 4>& axes) {
  for (int a = 0; a < 4; ++a) {
    if (!(F.axes[a] == axes[a])) throw InputError("F must live on the triplet's grids");
  }
}

}  // namespace detail

// Mass of F outside E above this fraction of \int |F| is rejected.
inline constexpr double kOutsideMassTol = 1e-10;

// Delta per the five-term correction, using rho0's own discrete marginals as
// the sigma's so the marginals of Delta vanish to rounding on the grid.
inline Dense4D delta_from_F(const Rho0& base, const Dense4D& F_in) {
  const auto& ax = base.density.axes();
  detail::require_axes(F_in, ax);
  const SupportMask& sm = base.support;
  const auto [n0, n1, n2, n3] = F_in.shape();

  Dense4D F = F_in;
  double outside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t l = 0; l < n3; ++l) {
          double& v = F.at(i, j, k, l);
          const double w = F.cell_weight(i, j, k, l) * std::abs(v);
          total += w;
          if (!sm.in_e(i, j, k, l) && v != 0.0) {
            outside += w;
            v = 0.0;
          }
        }
  if (total > 0.0 && outside > kOutsideMassTol * total) throw InputError("F has mass outside the support set E");

  const ChainMarginals s = base.density.marginals();
  std::vector<double> s01(n1, 0.0), s12(n2, 0.0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) s01[j] += ax[0].weight(i) * s.m0(i, j);
  for (std::size_t k = 0; k < n2; ++k)
    for (std::size_t l = 0; l < n3; ++l) s12[k] += ax[3].weight(l) * s.m2(k, l);

  const PhaseSpaceDensity Fd(F);
  const ChainMarginals f = Fd.marginals();
  std::vector<double> f01(n1, 0.0), f12(n2, 0.0);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) f01[j] += ax[0].weight(i) * f.m0(i, j);
  for (std::size_t k = 0; k < n2; ++k)
    for (std::size_t l = 0; l < n3; ++l) f12[k] += ax[3].weight(l) * f.m2(k, l);

  const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  Dense4D D(ax);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) {
      if (sm.s0(i, j) == 0.0) continue;
      const double t0 = ratio(f.m0(i, j), s.m0(i, j));
      const double t01 = ratio(f01[j], s01[j]);
      for (std::size_t k = 0; k < n2; ++k) {
        if (sm.s1(k, j) == 0.0) continue;
        const double t1 = ratio(f.m1(k, j), s.m1(k, j));
        const double t12 = ratio(f12[k], s12[k]);
        for (std::size_t l = 0; l < n3; ++l) {
          if (sm.s2(k, l) == 0.0) continue;
          const double t2 = ratio(f.m2(k, l), s.m2(k, l));
          // grouped as [F - rho0 F0/s0] - [rho0 F1/s1 - rho0 F01/s01] - [rho0 F2/s2 - rho0 F12/s12]
          const double r = base.density(i, j, k, l);
          D.at(i, j, k, l) = (F.at(i, j, k, l) - r * t0) - r * (t1 - t01) - r * (t2 - t12);
        }
      }
    }
  return D;
}

inline Dense4D delta_from_F(const TripletProblem& t, const Dense4D& F, double supp_tol = kDefaultSuppTol) {
  return delta_from_F(rho0_with_support(t, supp_tol), F);
}

struct LambdaRange {
  double m_plus = 0.0;   // +inf when Delta/rho0 has no positive part
  double m_minus = 0.0;  // +inf when Delta/rho0 has no negative part
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool unbounded = true;
};

// Grid maxima of Delta/rho0 over E stand in for the essential sup and inf.
inline LambdaRange lambda_range(const PhaseSpaceDensity& rho0, const Dense4D& delta) {
  detail::require_axes(delta, rho0.axes());
  const auto [n0, n1, n2, n3] = delta.shape();
  double dmax = 0.0;
  for (double v : delta.values) dmax = std::max(dmax, std::abs(v));
  LambdaRange out;
  double rmax = 0.0;
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t l = 0; l < n3; ++l) rmax = std::max(rmax, rho0(i, j, k, l));
  // Delta identically zero up to rounding: every lambda is admissible
  if (dmax <= 1e-14 * rmax) {
    out.m_plus = 0.0;
    out.m_minus = 0.0;
    return out;
  }
  double hi_ratio = -std::numeric_limits<double>::infinity();
  double lo_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t l = 0; l < n3; ++l) {
          const double d = delta.at(i, j, k, l);
          const double r = rho0(i, j, k, l);
          if (r > 0.0) {
            hi_ratio = std::max(hi_ratio, d / r);
            lo_ratio = std::min(lo_ratio, d / r);
          } else if (std::abs(d) > 1e-14 * dmax) {
            throw InputError("Delta is nonzero where rho0 vanishes");
          }
        }
  out.m_plus = hi_ratio;
  out.m_minus = -lo_ratio;
  out.lo = out.m_plus > 0.0 ? -1.0 / out.m_plus : -std::numeric_limits<double>::infinity();
  out.hi = out.m_minus > 0.0 ? 1.0 / out.m_minus : std::numeric_limits<double>::infinity();
  if (!(out.m_plus > 0.0)) out.m_plus = std::numeric_limits<double>::infinity();
  if (!(out.m_minus > 0.0)) out.m_minus = std::numeric_limits<double>::infinity();
  out.unbounded = !std::isfinite(out.lo) || !std::isfinite(out.hi);
  return out;
}

struct ReconstructionResult {
  Rho0 base;
  Dense4D delta;
  LambdaRange range;
};

inline ReconstructionResult reconstruct(const TripletProblem& t, const Dense4D& F, double supp_tol = kDefaultSuppTol) {
  Rho0 base = rho0_with_support(t, supp_tol);
  Dense4D d = delta_from_F(base, F);
  LambdaRange r = lambda_range(base.density, d);
  return {std::move(base), std::move(d), r};
}

inline PhaseSpaceDensity general_solution(const ReconstructionResult& rec, double lambda) {
  const double slack = 1e-12 * std::max(1.0, std::abs(lambda));
  if (!std::isfinite(lambda) || lambda < rec.range.lo - slack || lambda > rec.range.hi + slack)
    throw InputError("lambda lies outside the admissible interval");
  Dense4D out = rec.base.density.to_dense();
  for (std::size_t c = 0; c < out.values.size(); ++c) out.values[c] += lambda * rec.delta.values[c];
  return PhaseSpaceDensity(std::move(out));
}

inline PhaseSpaceDensity general_solution(const TripletProblem& t, const Dense4D& F, double lambda,
                                          double supp_tol = kDefaultSuppTol) {
  return general_solution(reconstruct(t, F, supp_tol), lambda);
}

// --- the four 3-subsets of a quartet ---------------------------------------

namespace detail {

inline Marginal2D relabel(const Marginal2D& m, bool transpose, marginal::Plane plane) {
  const auto& d = gridded(m, marginal::to_string(m.plane()).c_str());
  if (!transpose) return Marginal2D(plane, d);
  GriddedDensity t{d.axis2, d.axis1, std::vector<double>(d.values.size())};
  for (std::size_t i = 0; i < d.axis1.size(); ++i)
    for (std::size_t j = 0; j < d.axis2.size(); ++j) t.values[j * d.axis1.size() + i] = d.at(i, j);
  return Marginal2D(plane, std::move(t));
}

}  // namespace detail

// Chain forms (sigma0, sigma1, sigma2) with shared variables in the right slots:
//   RTU: R(q1,q2), T(p1,q2), U(p1,p2)
//   RSU: R(q2,q1), S(p2,q1), U(p2,p1)
//   RST: S(p2,q1), R(q2,q1), T(q2,p1)
//   STU: S(q1,p2), U(p1,p2), T(p1,q2)
inline std::vector<std::pair<std::string, TripletProblem>> chain_triplets(const marginal::QuartetProblem& q) {
  using marginal::Plane;
  using detail::relabel;
  std::vector<std::pair<std::string, TripletProblem>> out;
  out.emplace_back("RTU", TripletProblem(relabel(q.R, false, Plane::QQ), relabel(q.T, false, Plane::PQ),
                                         relabel(q.U, false, Plane::PP)));
  out.emplace_back("RSU", TripletProblem(relabel(q.R, true, Plane::QQ), relabel(q.S, true, Plane::PQ),
                                         relabel(q.U, true, Plane::PP)));
  out.emplace_back("RST", TripletProblem(relabel(q.S, true, Plane::QQ), relabel(q.R, true, Plane::PQ),
                                         relabel(q.T, true, Plane::PP)));
  out.emplace_back("STU", TripletProblem(relabel(q.S, false, Plane::QQ), relabel(q.U, false, Plane::PQ),
                                         relabel(q.T, false, Plane::PP)));
  return out;
}

struct SubsetReport {
  std::string name;
  RoundTrip round_trip;
};

struct DemoReport {
  double consistency_defect = 0.0;
  std::vector<SubsetReport> subsets;
  double bell_sum = 0.0;
  bool infeasible = false;  // |B| > 2 rules out a joint density of all four
};

inline DemoReport three_marginal_demo(const marginal::QuartetProblem& q, const bell::BellWitness& w,
                                      double tol = 1e-6) {
  const auto cons = marginal::consistency_check(q, tol);
  if (!cons.pass) throw ConsistencyError("quartet violates the compatibility conditions");
  DemoReport rep;
  rep.consistency_defect = cons.max_defect;
  for (const auto& [name, t] : chain_triplets(q)) {
    rep.subsets.push_back({name, round_trip(t, rho0(t))});
  }
  rep.bell_sum = bell::bell_sum(q, w);
  rep.infeasible = std::abs(rep.bell_sum) > 2.0 + 1e-9;
  return rep;
}

}  // namespace phaselab::reconstruct
