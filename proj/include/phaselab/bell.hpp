#pragma once

// Interval regions, sign witnesses and the Bell functional
//
//   B = \int r R + \int s S + \int t T + \int u U,
//   r = F1 F2, s = F1 G2, t = G1 F2, u = -G1 G2,
//
// with F_i = 2 chi_{S_i} - 1 on positions and G_i = 2 chi_{S'_i} - 1 on momenta.
// Any quartet with a nonnegative joint density has |B| <= 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/marginal.hpp"

namespace phaselab::bell {

using marginal::Marginal2D;
using marginal::QuartetProblem;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo;
  double hi;
  bool operator==(const Interval&) const = default;
};

// Finite union of disjoint intervals [lo, hi) over the extended reals. Points
// on a left endpoint are inside, points on a right endpoint outside.
class Region {
 public:
  Region() = default;

  explicit Region(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    std::sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (std::size_t k = 0; k < intervals_.size(); ++k) {
      const Interval& iv = intervals_[k];
      if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.hi > iv.lo))
        throw InputError("region intervals need lo < hi");
      if (k > 0 && iv.lo < intervals_[k - 1].hi) throw InputError("region intervals overlap");
    }
  }

  static Region half_line(double from) { return Region({{from, kInf}}); }
  static Region below(double to) { return Region({{-kInf, to}}); }
  static Region whole() { return Region({{-kInf, kInf}}); }

  const std::vector<Interval>& intervals() const { return intervals_; }

  bool contains(double x) const {
    for (const Interval& iv : intervals_) {
      if (x >= iv.lo && x < iv.hi) return true;
    }
    return false;
  }

  double sign(double x) const { return contains(x) ? 1.0 : -1.0; }

  Region complement() const {
    std::vector<Interval> out;
    double cursor = -kInf;
    for (const Interval& iv : intervals_) {
      if (iv.lo > cursor) out.push_back({cursor, iv.lo});
      cursor = iv.hi;
    }
    if (cursor < kInf) out.push_back({cursor, kInf});
    return Region(std::move(out));
  }

  std::vector<double> finite_endpoints() const {
    std::vector<double> e;
    for (const Interval& iv : intervals_) {
      if (std::isfinite(iv.lo)) e.push_back(iv.lo);
      if (std::isfinite(iv.hi)) e.push_back(iv.hi);
    }
    return e;
  }

  bool operator==(const Region&) const = default;

 private:
  std::vector<Interval> intervals_;
};

// S1 on q1, S2 on q2, S1p on p1, S2p on p2.
struct BellWitness {
  Region S1;
  Region S2;
  Region S1p;
  Region S2p;

  bool operator==(const BellWitness&) const = default;
};

using PlaneFunction = std::function<double(double, double)>;

struct GeneralWitness {
  PlaneFunction r;  // (q1, q2)
  PlaneFunction s;  // (q1, p2)
  PlaneFunction t;  // (p1, q2)
  PlaneFunction u;  // (p1, p2)
  double A = -2.0;
  double B = 2.0;
};

namespace detail {

template <class W>
double expectation(const Marginal2D& m, W&& w) {
  if (m.atomic()) {
    double s = 0.0;
    for (const auto& a : m.atoms()) s += a.w * w(a.x, a.y);
    return s;
  }
  const auto& d = m.density();
  const std::size_t n1 = d.axis1.size();
  const std::size_t n2 = d.axis2.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    const double x = d.axis1.node(i);
    double row = 0.0;
    for (std::size_t j = 0; j < n2; ++j) row += d.axis2.weight(j) * w(x, d.axis2.node(j)) * d.at(i, j);
    s += d.axis1.weight(i) * row;
  }
  return s;
}

inline void check_coverage(const Marginal2D& m, const Region& reg1, const Region& reg2) {
  if (!m.gridded()) return;
  const auto& d = m.density();
  const auto inside = [](const marginal::Grid1D& g, const Region& r) {
    for (double e : r.finite_endpoints()) {
      if (e < g.lo() || e > g.hi()) return false;
    }
    return true;
  };
  if (!inside(d.axis1, reg1) || !inside(d.axis2, reg2))
    throw InputError("witness region endpoint lies outside the " + marginal::to_string(m.plane()) + " grid");
}

}  // namespace detail

inline double bell_sum(const QuartetProblem& q, const BellWitness& w) {
  detail::check_coverage(q.R, w.S1, w.S2);
  detail::check_coverage(q.S, w.S1, w.S2p);
  detail::check_coverage(q.T, w.S1p, w.S2);
  detail::check_coverage(q.U, w.S1p, w.S2p);
  const double r = detail::expectation(q.R, [&](double q1, double q2) { return w.S1.sign(q1) * w.S2.sign(q2); });
  const double s = detail::expectation(q.S, [&](double q1, double p2) { return w.S1.sign(q1) * w.S2p.sign(p2); });
  const double t = detail::expectation(q.T, [&](double p1, double q2) { return w.S1p.sign(p1) * w.S2.sign(q2); });
  const double u = detail::expectation(q.U, [&](double p1, double p2) { return -w.S1p.sign(p1) * w.S2p.sign(p2); });
  return r + s + t + u;
}

inline double p_expectation_from_bell_sum(double b) { return (2.0 - b) / 4.0; }

inline double p_expectation_from_quartet(const QuartetProblem& q, const BellWitness& w) {
  return p_expectation_from_bell_sum(bell_sum(q, w));
}

inline GeneralWitness as_general(const BellWitness& w) {
  GeneralWitness g;
  g.r = [w](double q1, double q2) { return w.S1.sign(q1) * w.S2.sign(q2); };
  g.s = [w](double q1, double p2) { return w.S1.sign(q1) * w.S2p.sign(p2); };
  g.t = [w](double p1, double q2) { return w.S1p.sign(p1) * w.S2.sign(q2); };
  g.u = [w](double p1, double p2) { return -w.S1p.sign(p1) * w.S2p.sign(p2); };
  g.A = -2.0;
  g.B = 2.0;
  return g;
}

struct BoundCheck {
  double value = 0.0;
  bool within = false;
};

inline constexpr std::size_t kLatticePoints = 64;

namespace detail {

inline std::vector<double> thin(std::vector<double> v, std::size_t count) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() <= count) return v;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = v[k * (v.size() - 1) / (count - 1)];
  return out;
}

// Sample points of one phase-space variable: nodes or atom coordinates from
// both marginals carrying it.
inline std::vector<double> axis_samples(const Marginal2D& a, int axis_a, const Marginal2D& b, int axis_b) {
  std::vector<double> pts;
  for (const auto& [m, ax] : {std::pair<const Marginal2D*, int>{&a, axis_a}, {&b, axis_b}}) {
    if (m->atomic()) {
      for (const auto& at : m->atoms()) pts.push_back(ax == 1 ? at.x : at.y);
    } else {
      const auto& g = ax == 1 ? m->density().axis1 : m->density().axis2;
      pts.insert(pts.end(), g.nodes().begin(), g.nodes().end());
    }
  }
  return thin(std::move(pts), kLatticePoints);
}

inline std::vector<double> table(const PlaneFunction& f, const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> t(x.size() * y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) t[i * y.size() + j] = f(x[i], y[j]);
  }
  return t;
}

}  // namespace detail

// Evaluates \int rR + \int sS + \int tT + \int uU after verifying
// A <= r + s + t + u <= B on the lattice of (q1, q2, p1, p2) samples.
inline BoundCheck general_bell_bound_check(const QuartetProblem& q, const GeneralWitness& gw) {
  if (!gw.r || !gw.s || !gw.t || !gw.u) throw InputError("general witness needs all four functions");
  if (!(gw.A <= gw.B)) throw InputError("general witness needs A <= B");
  const auto q1 = detail::axis_samples(q.R, 1, q.S, 1);
  const auto q2 = detail::axis_samples(q.R, 2, q.T, 2);
  const auto p1 = detail::axis_samples(q.T, 1, q.U, 1);
  const auto p2 = detail::axis_samples(q.S, 2, q.U, 2);
  const auto rt = detail::table(gw.r, q1, q2);
  const auto st = detail::table(gw.s, q1, p2);
  const auto tt = detail::table(gw.t, p1, q2);
  const auto ut = detail::table(gw.u, p1, p2);
  const double slack = 1e-12 * std::max({1.0, std::abs(gw.A), std::abs(gw.B)});
  const std::size_t n1 = q1.size(), n2 = q2.size(), m1 = p1.size(), m2 = p2.size();
  for (std::size_t a = 0; a < n1; ++a) {
    for (std::size_t b = 0; b < n2; ++b) {
      const double rv = rt[a * n2 + b];
      for (std::size_t c = 0; c < m1; ++c) {
        const double rt_sum = rv + tt[c * n2 + b];
        for (std::size_t d = 0; d < m2; ++d) {
          const double v = rt_sum + st[a * m2 + d] + ut[c * m2 + d];
          if (!(v >= gw.A - slack && v <= gw.B + slack))
            throw InputError("general witness violates its own bounds at a lattice point");
        }
      }
    }
  }
  BoundCheck out;
  out.value = detail::expectation(q.R, gw.r) + detail::expectation(q.S, gw.s) + detail::expectation(q.T, gw.t) +
              detail::expectation(q.U, gw.u);
  out.within = out.value >= gw.A - slack && out.value <= gw.B + slack;
  return out;
}

// Witness that puts every unprimed atom of the counterexample inside its set
// and every primed atom outside: each of the four integrals contributes +1.
inline BellWitness aligned_witness(const marginal::CounterexampleAtoms& c) {
  const auto split = [](double inside, double outside) {
    const double mid = 0.5 * (inside + outside);
    return inside > outside ? Region::half_line(mid) : Region::below(mid);
  };
  return BellWitness{split(c.a1, c.a1p), split(c.a2, c.a2p), split(c.b1, c.b1p), split(c.b2, c.b2p)};
}

}  // namespace phaselab::bell
