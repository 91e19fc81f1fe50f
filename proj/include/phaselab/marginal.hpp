#pragma once

// Two-variable marginals on the four phase-space planes, their compatibility
// relations, and the quantum marginals of a two-particle state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/quad.hpp"
#include "phaselab/wavefunction.hpp"

namespace phaselab::marginal {

using quad::Grid1D;

// Axes: QQ = (q1,q2), QP = (q1,p2), PQ = (p1,q2), PP = (p1,p2).
enum class Plane { QQ, QP, PQ, PP };

inline std::string to_string(Plane p) {
  switch (p) {
    case Plane::QQ: return "QQ";
    case Plane::QP: return "QP";
    case Plane::PQ: return "PQ";
    case Plane::PP: return "PP";
  }
  return "?";
}

inline Plane plane_from_string(const std::string& s) {
  if (s == "QQ") return Plane::QQ;
  if (s == "QP") return Plane::QP;
  if (s == "PQ") return Plane::PQ;
  if (s == "PP") return Plane::PP;
  throw InputError("unknown plane label '" + s + "'");
}

struct GriddedDensity {
  Grid1D axis1;
  Grid1D axis2;
  std::vector<double> values;  // row-major, axis1 index slow

  double at(std::size_t i, std::size_t j) const { return values[i * axis2.size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * axis2.size() + j]; }
};

struct Atom {
  double x;
  double y;
  double w;
};

using AtomicMixture = std::vector<Atom>;

class Marginal2D {
 public:
  Marginal2D(Plane plane, GriddedDensity density) : plane_(plane), rep_(std::move(density)) {
    const auto& d = std::get<GriddedDensity>(rep_);
    if (d.values.size() != d.axis1.size() * d.axis2.size()) throw InputError("density size does not match its axes");
    for (double v : d.values) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("density values must be finite and nonnegative");
    }
  }

  Marginal2D(Plane plane, AtomicMixture atoms) : plane_(plane), rep_(std::move(atoms)) {
    const auto& a = std::get<AtomicMixture>(rep_);
    if (a.empty()) throw InputError("atomic marginal needs at least one atom");
    double total = 0.0;
    for (const Atom& at : a) {
      if (!(at.w > 0.0)) throw InputError("atom weights must be positive");
      total += at.w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InputError("atom weights must sum to 1");
  }

  Plane plane() const { return plane_; }
  bool gridded() const { return std::holds_alternative<GriddedDensity>(rep_); }
  bool atomic() const { return std::holds_alternative<AtomicMixture>(rep_); }
  const GriddedDensity& density() const { return std::get<GriddedDensity>(rep_); }
  const AtomicMixture& atoms() const { return std::get<AtomicMixture>(rep_); }

  double mass() const {
    if (atomic()) {
      double s = 0.0;
      for (const Atom& a : atoms()) s += a.w;
      return s;
    }
    const auto& d = density();
    double s = 0.0;
    for (std::size_t i = 0; i < d.axis1.size(); ++i) {
      for (std::size_t j = 0; j < d.axis2.size(); ++j) s += d.axis1.weight(i) * d.axis2.weight(j) * d.at(i, j);
    }
    return s;
  }

 private:
  Plane plane_;
  std::variant<GriddedDensity, AtomicMixture> rep_;
};

// R(q1,q2), S(q1,p2), T(p1,q2), U(p1,p2).
struct QuartetProblem {
  Marginal2D R;
  Marginal2D S;
  Marginal2D T;
  Marginal2D U;

  QuartetProblem(Marginal2D r, Marginal2D s, Marginal2D t, Marginal2D u)
      : R(std::move(r)), S(std::move(s)), T(std::move(t)), U(std::move(u)) {
    if (R.plane() != Plane::QQ || S.plane() != Plane::QP || T.plane() != Plane::PQ || U.plane() != Plane::PP)
      throw InputError("quartet marginals must be labelled QQ, QP, PQ, PP");
  }
};

// sigma0(q1,q2), sigma1(p1,q2), sigma2(p1,p2): a chain in which consecutive
// members share one variable.
struct TripletProblem {
  Marginal2D sigma0;
  Marginal2D sigma1;
  Marginal2D sigma2;

  TripletProblem(Marginal2D s0, Marginal2D s1, Marginal2D s2)
      : sigma0(std::move(s0)), sigma1(std::move(s1)), sigma2(std::move(s2)) {
    if (sigma0.plane() != Plane::QQ || sigma1.plane() != Plane::PQ || sigma2.plane() != Plane::PP)
      throw InputError("triplet marginals must be labelled QQ, PQ, PP");
  }
};

// Integrate out one variable of a gridded marginal: axis = 1 integrates over
// the first variable and returns a density in the second, axis = 2 the reverse.
inline quad::ComplexProfile one_var_marginal(const Marginal2D& m, int axis) {
  if (!m.gridded()) throw InputError("one_var_marginal: atomic marginal (use the atomic evaluators)");
  if (axis != 1 && axis != 2) throw InputError("one_var_marginal: axis must be 1 or 2");
  const GriddedDensity& d = m.density();
  if (axis == 1) {
    std::vector<quad::cplx> v(d.axis2.size(), 0.0);
    for (std::size_t i = 0; i < d.axis1.size(); ++i) {
      for (std::size_t j = 0; j < d.axis2.size(); ++j) v[j] += d.axis1.weight(i) * d.at(i, j);
    }
    return quad::ComplexProfile(d.axis2, std::move(v));
  }
  std::vector<quad::cplx> v(d.axis1.size(), 0.0);
  for (std::size_t i = 0; i < d.axis1.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d.axis2.size(); ++j) s += d.axis2.weight(j) * d.at(i, j);
    v[i] = s;
  }
  return quad::ComplexProfile(d.axis1, std::move(v));
}

namespace detail {

// 1-D marginal of an atomic mixture as a point-mass table.
inline std::map<double, double> atomic_marginal(const AtomicMixture& atoms, int axis) {
  std::map<double, double> out;
  for (const Atom& a : atoms) out[axis == 1 ? a.y : a.x] += a.w;
  return out;
}

inline double atomic_defect(const std::map<double, double>& a, const std::map<double, double>& b) {
  double d = 0.0;
  for (const auto& [x, w] : a) {
    auto it = b.find(x);
    d = std::max(d, std::abs(w - (it == b.end() ? 0.0 : it->second)));
  }
  for (const auto& [x, w] : b) {
    if (!a.contains(x)) d = std::max(d, w);
  }
  return d;
}

// Sup-norm defect between two 1-D marginal densities, relative to the larger
// of their sup norms so the figure does not depend on the density scale.
inline double gridded_defect(const quad::ComplexProfile& a, const quad::ComplexProfile& b) {
  if (!(a.grid == b.grid)) throw InputError("consistency_check: marginals are on mismatched grids");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a.values[i].real() - b.values[i].real()));
    scale = std::max({scale, std::abs(a.values[i].real()), std::abs(b.values[i].real())});
  }
  return scale > 0.0 ? diff / scale : diff;
}

// Compare "integrate m1 over its axis1" against "integrate m2 over its axis2" etc.
inline double pair_defect(const Marginal2D& m1, int contract1, const Marginal2D& m2, int contract2) {
  if (m1.atomic() && m2.atomic()) {
    return atomic_defect(atomic_marginal(m1.atoms(), contract1), atomic_marginal(m2.atoms(), contract2));
  }
  if (m1.gridded() && m2.gridded()) {
    return gridded_defect(one_var_marginal(m1, contract1), one_var_marginal(m2, contract2));
  }
  throw InputError("consistency_check: cannot compare an atomic marginal with a gridded one");
}

}  // namespace detail

struct ConsistencyReport {
  std::array<double, 4> defects{};  // the four one-variable equalities, in order
  double max_defect = 0.0;
  bool pass = false;
};

// The four compatibility conditions
//   \int dq2 R = \int dp2 S,  \int dq1 R = \int dp1 T,
//   \int dq1 S = \int dp1 U,  \int dq2 T = \int dp2 U.
// Atomic defects are absolute point-mass differences; gridded defects are
// relative sup norms.
inline ConsistencyReport consistency_check(const QuartetProblem& q, double tol = 1e-6) {
  if (!(tol >= 0.0)) throw InputError("consistency_check: tolerance must be nonnegative");
  ConsistencyReport rep;
  rep.defects[0] = detail::pair_defect(q.R, 2, q.S, 2);
  rep.defects[1] = detail::pair_defect(q.R, 1, q.T, 1);
  rep.defects[2] = detail::pair_defect(q.S, 1, q.U, 1);
  rep.defects[3] = detail::pair_defect(q.T, 2, q.U, 2);
  rep.max_defect = *std::max_element(rep.defects.begin(), rep.defects.end());
  rep.pass = rep.max_defect <= tol;
  return rep;
}

struct CounterexampleAtoms {
  double a1 = 1.0, a2 = 1.0, a1p = -1.0, a2p = -1.0;  // position atoms (unprimed, primed)
  double b1 = 1.0, b2 = 1.0, b1p = -1.0, b2p = -1.0;  // momentum atoms
};

// Four two-atom mixtures that satisfy every compatibility condition yet admit
// no joint density: U pairs b1 with b2' and b1' with b2.
inline QuartetProblem counterexample_quartet(const CounterexampleAtoms& c) {
  if (c.a1 == c.a1p || c.a2 == c.a2p || c.b1 == c.b1p || c.b2 == c.b2p)
    throw InputError("counterexample_quartet: primed and unprimed atoms must differ on every axis");
  Marginal2D r(Plane::QQ, AtomicMixture{{c.a1, c.a2, 0.5}, {c.a1p, c.a2p, 0.5}});
  Marginal2D s(Plane::QP, AtomicMixture{{c.a1, c.b2, 0.5}, {c.a1p, c.b2p, 0.5}});
  Marginal2D t(Plane::PQ, AtomicMixture{{c.b1, c.a2, 0.5}, {c.b1p, c.a2p, 0.5}});
  Marginal2D u(Plane::PP, AtomicMixture{{c.b1, c.b2p, 0.5}, {c.b1p, c.b2, 0.5}});
  return QuartetProblem(std::move(r), std::move(s), std::move(t), std::move(u));
}

namespace detail {

inline Marginal2D modulus_squared(Plane plane, const std::vector<quantum::ProductTerm>& terms,
                                  const std::vector<quad::ComplexProfile>& first,
                                  const std::vector<quad::ComplexProfile>& second) {
  GriddedDensity d{first.front().grid, second.front().grid, {}};
  const std::size_t n1 = d.axis1.size();
  const std::size_t n2 = d.axis2.size();
  d.values.assign(n1 * n2, 0.0);
  std::vector<quad::cplx> a(terms.size());
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t k = 0; k < terms.size(); ++k) a[k] = terms[k].coeff * first[k].value(i);
    for (std::size_t j = 0; j < n2; ++j) {
      quad::cplx s = 0.0;
      for (std::size_t k = 0; k < terms.size(); ++k) s += a[k] * second[k].value(j);
      d.values[i * n2 + j] = std::norm(s);
    }
  }
  return Marginal2D(plane, std::move(d));
}

}  // namespace detail

// R = |Psi|^2, S = |F2 Psi|^2, T = |F1 Psi|^2, U = |F1 F2 Psi|^2 for a pure
// state, with F_i the partial Fourier transform on particle i.
inline QuartetProblem quantum_marginals(const quantum::WaveFunction2& psi, double norm_tol = 1e-6) {
  const double n2 = psi.norm2();
  if (std::abs(n2 - 1.0) > norm_tol) throw InputError("quantum_marginals: wave function is not normalized");
  const auto& terms = psi.terms();
  std::vector<quad::ComplexProfile> a, b, at, bt;
  for (const auto& t : terms) {
    a.push_back(t.factor1);
    b.push_back(t.factor2);
    at.push_back(quad::fourier(t.factor1, psi.momentum_grid1(), -1));
    bt.push_back(quad::fourier(t.factor2, psi.momentum_grid2(), -1));
  }
  return QuartetProblem(detail::modulus_squared(Plane::QQ, terms, a, b),
                        detail::modulus_squared(Plane::QP, terms, a, bt),
                        detail::modulus_squared(Plane::PQ, terms, at, b),
                        detail::modulus_squared(Plane::PP, terms, at, bt));
}

}  // namespace phaselab::marginal
