#pragma once

// The two-term violating family
//
//   Psi = (f (x) f_2 + lambda g (x) g_2) / sqrt(1 + |lambda|^2),
//   f(q) = h(|q|) / sqrt 2,  g(q) = sgn(q) f(q),
//
// with axis-2 factors shifted by a and boosted by P, and <Psi|P|Psi> evaluated
// both in closed form and through the marginals.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "phaselab/bell.hpp"
#include "phaselab/error.hpp"
#include "phaselab/kop.hpp"
#include "phaselab/marginal.hpp"
#include "phaselab/quad.hpp"
#include "phaselab/wavefunction.hpp"

namespace phaselab::quantum {

enum class HKind { inverse_q_plus_one, cutoff_sqrt, samples };

// Radial profile h on (0, inf) with unit L^2 norm.
class HProfile {
 public:
  static HProfile inverse_q_plus_one() { return HProfile(HKind::inverse_q_plus_one); }

  static HProfile cutoff_sqrt(double eps, double L) {
    if (!(eps > 0.0) || !(L > eps) || !std::isfinite(L)) throw InputError("cutoff profile needs 0 < eps < L");
    HProfile h(HKind::cutoff_sqrt);
    h.eps_ = eps;
    h.L_ = L;
    return h;
  }

  // Real samples on a panelled half-line grid; momentum_extent bounds the
  // momentum grids built for this profile (defaults to the position extent).
  static HProfile samples(quad::ComplexProfile profile, std::optional<double> momentum_extent = std::nullopt) {
    if (!profile.grid.panelled() || profile.grid.lo() < 0.0)
      throw InputError("sampled profile needs a panelled half-line grid");
    for (const auto& v : profile.values) {
      if (v.imag() != 0.0 || !std::isfinite(v.real())) throw InputError("sampled profile must be real and finite");
    }
    HProfile h(HKind::samples);
    h.p_extent_ = momentum_extent.value_or(profile.grid.hi());
    if (!(h.p_extent_ > 0.0)) throw InputError("sampled profile needs a positive momentum extent");
    h.samples_ = std::move(profile);
    return h;
  }

  HKind kind() const { return kind_; }
  double eps() const { return eps_; }
  double L() const { return L_; }
  const quad::ComplexProfile& sample_profile() const { return samples_; }

  double operator()(double q) const {
    q = std::abs(q);
    switch (kind_) {
      case HKind::inverse_q_plus_one: return 1.0 / (q + 1.0);
      case HKind::cutoff_sqrt: return (q > eps_ && q < L_) ? 1.0 / std::sqrt(q * std::log(L_ / eps_)) : 0.0;
      case HKind::samples: return quad::interpolate(samples_, q).real();
    }
    return 0.0;
  }

  // Half-line grid fine enough for 1e-8 level integrals of h and h K h.
  quad::Grid1D reference_grid() const {
    switch (kind_) {
      case HKind::inverse_q_plus_one: {
        std::vector<double> bp{0.0};
        const auto geo = quad::geometric_breakpoints(1e-12, 1e12, 80);
        bp.insert(bp.end(), geo.begin(), geo.end());
        return quad::build_panels(bp, 10);
      }
      case HKind::cutoff_sqrt: {
        const int panels = std::max(8, static_cast<int>(std::ceil(std::log(L_ / eps_) / std::log(2.0))));
        return quad::build_panels(quad::geometric_breakpoints(eps_, L_, panels), 10);
      }
      case HKind::samples: return samples_.grid;
    }
    return {};
  }

  quad::ComplexProfile on(const quad::Grid1D& half) const {
    if (kind_ == HKind::samples && half == samples_.grid) return samples_;
    return quad::sample(half, [this](double q) { return cplx((*this)(q)); });
  }

  double norm2() const { return quad::norm2(on(reference_grid())); }

  // Half-line position and momentum grids with `per_side` nodes each.
  std::pair<quad::Grid1D, quad::Grid1D> half_grids(int per_side) const {
    constexpr int order = 8;
    if (per_side < 2 * order || per_side % order != 0)
      throw InputError("grid size per side must be a multiple of 8 and at least 16");
    const int panels = per_side / order;
    const auto with_origin = [&](double lo, double hi) {
      std::vector<double> bp{0.0};
      const auto geo = quad::geometric_breakpoints(lo, hi, panels - 1);
      bp.insert(bp.end(), geo.begin(), geo.end());
      return quad::build_panels(bp, order);
    };
    switch (kind_) {
      case HKind::inverse_q_plus_one: return {with_origin(1e-6, 1e8), with_origin(1e-8, 1e6)};
      case HKind::cutoff_sqrt:
        return {quad::build_panels(quad::geometric_breakpoints(eps_, L_, panels), order),
                with_origin(1e-2 / L_, 1e4 / eps_)};
      case HKind::samples: {
        std::vector<double> qb(panels + 1), pb(panels + 1);
        const double lo = samples_.grid.lo();
        const double hi = samples_.grid.hi();
        for (int k = 0; k <= panels; ++k) {
          qb[k] = lo + (hi - lo) * k / panels;
          // quadratic grading: momentum profiles are concentrated near 0
          pb[k] = p_extent_ * (static_cast<double>(k) / panels) * (static_cast<double>(k) / panels);
        }
        return {quad::build_panels(qb, order), quad::build_panels(pb, order)};
      }
    }
    return {};
  }

 private:
  explicit HProfile(HKind k) : kind_(k) {}

  HKind kind_;
  double eps_ = 0.0;
  double L_ = 0.0;
  double p_extent_ = 0.0;
  quad::ComplexProfile samples_;
};

// Samples of c * raw(q) on `half`, with c fixing the L^2 norm to 1.
template <class F>
HProfile profile_from_function(F&& raw, const quad::Grid1D& half, std::optional<double> momentum_extent = std::nullopt) {
  const double n2 = quad::integrate(half, [&](double q) { return raw(q) * raw(q); });
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw InputError("profile has zero or infinite norm");
  const double c = 1.0 / std::sqrt(n2);
  return HProfile::samples(quad::sample(half, [&](double q) { return cplx(c * raw(q)); }), momentum_extent);
}

inline constexpr double kNormTolerance = 1e-8;

inline void require_normalized(const HProfile& h) {
  const double n = h.norm2();
  if (std::abs(n - 1.0) > kNormTolerance) throw InputError("h is not normalized on (0, inf)");
}

inline double gamma(const HProfile& h) {
  require_normalized(h);
  return kop::k_form(h.on(h.reference_grid()));
}

struct FG {
  quad::ComplexProfile f;
  quad::ComplexProfile g;
};

// f(q) = h(|q - center|) / sqrt 2 and g = sgn(q - center) f on a grid
// symmetric about center.
inline FG build_fg(const HProfile& h, const quad::Grid1D& grid, double center = 0.0, double carrier = 0.0) {
  require_normalized(h);
  std::vector<cplx> f(grid.size()), g(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.node(i) - center;
    f[i] = h(x) / std::numbers::sqrt2;
    g[i] = (x > 0.0 ? 1.0 : -1.0) * f[i];
  }
  return {quad::ComplexProfile(grid, std::move(f), carrier), quad::ComplexProfile(grid, std::move(g), carrier)};
}

inline FG build_fg(const HProfile& h, int per_side = 256) {
  return build_fg(h, quad::symmetric_grid(h.half_grids(per_side).first));
}

enum class Rep { position, momentum };

inline double chi_expectation(const quad::ComplexProfile& phi, const bell::Region& reg) {
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (reg.contains(phi.grid.node(i))) s += phi.grid.weight(i) * std::norm(phi.values[i]);
  }
  return s;
}

inline double chi_expectation(const quad::ComplexProfile& phi, const bell::Region& reg, Rep rep,
                              const quad::Grid1D& p_grid) {
  if (rep == Rep::position) return chi_expectation(phi, reg);
  return chi_expectation(quad::fourier(phi, p_grid, -1), reg);
}

namespace detail {

// Indices of the positive half of a grid symmetric about 0, and a check that
// values are even.
inline std::size_t half_start(const quad::ComplexProfile& f) {
  const auto& g = f.grid;
  const std::size_t n = g.size();
  double scale = 0.0;
  for (const auto& v : f.values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    if (std::abs(g.node(i) + g.node(j)) > 1e-12 * std::max(1.0, std::abs(g.node(i))) ||
        std::abs(g.weight(i) - g.weight(j)) > 1e-12 * g.weight(i))
      throw InputError("chi_prime_cross: grid is not symmetric about 0");
    if (std::abs(f.value(i) - f.value(j)) > 1e-10 * std::max(scale, 1e-300))
      throw InputError("chi_prime_cross: f is not even");
  }
  if (n % 2 != 0) throw InputError("chi_prime_cross: grid must not contain q = 0");
  return n / 2;
}

}  // namespace detail

// <f|chi'|g> for even f, g = sgn f, chi' the projector on p > 0:
//   -(i/pi) \int_0^inf \int_0^inf f*(q) f(q') [1/(q+q') - P/(q-q')] dq dq'.
// The principal-value part cancels for real f.
inline cplx chi_prime_cross(const quad::ComplexProfile& f) {
  const std::size_t h0 = detail::half_start(f);
  const auto& g = f.grid;
  const std::size_t n = g.size();
  bool real = true;
  for (std::size_t i = h0; i < n; ++i) real = real && f.value(i).imag() == 0.0;

  cplx direct = 0.0;
  for (std::size_t i = h0; i < n; ++i) {
    cplx row = 0.0;
    for (std::size_t j = h0; j < n; ++j) row += g.weight(j) * f.value(j) / (g.node(i) + g.node(j));
    direct += g.weight(i) * std::conj(f.value(i)) * row;
  }
  if (real) return cplx(0.0, -direct.real() / std::numbers::pi);

  if (!g.panelled()) throw InputError("chi_prime_cross: complex f needs a panelled grid");
  std::vector<quad::Panel> hp;
  for (const auto& p : g.panels()) {
    if (p.lo >= 0.0) hp.push_back(p);
  }
  const quad::Grid1D half = quad::Grid1D::from_panels(hp, g.order());
  std::vector<cplx> hv(f.values.begin() + static_cast<std::ptrdiff_t>(h0), f.values.end());
  const quad::ComplexProfile fh(half, std::move(hv), f.carrier);
  // P \int f(q') / (q - q') dq' = -PV \int f(q') / (q' - q) dq'
  cplx pv_sum = 0.0;
  for (std::size_t i = 0; i < half.size(); ++i) {
    const double c = half.node(i);
    const double re = quad::pv_integrate([&](double x) { return quad::interpolate(fh, x).real(); }, c, half);
    const double im = quad::pv_integrate([&](double x) { return quad::interpolate(fh, x).imag(); }, c, half);
    pv_sum += half.weight(i) * std::conj(fh.value(i)) * cplx(-re, -im);
  }
  return cplx(0.0, -1.0 / std::numbers::pi) * (direct - pv_sum);
}

struct ViolationParams {
  HProfile h = HProfile::cutoff_sqrt(1e-6, 1e6);
  double rho = 1.0;
  double theta = std::numbers::pi / 4.0;
  double a = 0.0;
  double P = 0.0;
  int sign = +1;

  cplx lambda() const { return static_cast<double>(sign) * std::polar(rho, theta); }
};

// S1 = S1' = (0, inf), S2 = (a, inf), S2' = (P, inf).
inline bell::BellWitness canonical_witness(const ViolationParams& p) {
  return {bell::Region::half_line(0.0), bell::Region::half_line(p.a), bell::Region::half_line(0.0),
          bell::Region::half_line(p.P)};
}

inline void validate(const ViolationParams& p) {
  if (!(p.rho >= 0.0) || !std::isfinite(p.rho)) throw InputError("rho must be finite and nonnegative");
  if (!std::isfinite(p.theta) || !std::isfinite(p.a) || !std::isfinite(p.P)) throw InputError("parameters must be finite");
  if (p.sign != 1 && p.sign != -1) throw InputError("sign must be +1 or -1");
}

// Grid presets: nodes per axis.
inline constexpr int kCoarse = 64;
inline constexpr int kDefault = 256;
inline constexpr int kFine = 1024;

// Explicit half-line grids; axis 2 uses them shifted to a (position) and P
// (momentum).
inline WaveFunction2 build_psi(const ViolationParams& p, const quad::Grid1D& qh, const quad::Grid1D& ph) {
  validate(p);
  const quad::Grid1D q1 = quad::symmetric_grid(qh);
  const quad::Grid1D p1 = quad::symmetric_grid(ph);
  const quad::Grid1D q2 = quad::symmetric_grid(qh, p.a);
  const quad::Grid1D p2 = quad::symmetric_grid(ph, p.P);
  FG one = build_fg(p.h, q1);
  FG two = build_fg(p.h, q2, p.a, p.P);
  const double norm = 1.0 / std::sqrt(1.0 + p.rho * p.rho);
  std::vector<ProductTerm> terms{{norm, std::move(one.f), std::move(two.f)}};
  if (p.rho != 0.0) terms.push_back({p.lambda() * norm, std::move(one.g), std::move(two.g)});
  return WaveFunction2(std::move(terms), p1, p2);
}

inline WaveFunction2 build_psi(const ViolationParams& p, int nodes_per_axis = kDefault) {
  if (nodes_per_axis % 2 != 0) throw InputError("nodes per axis must be even");
  const auto [qh, ph] = p.h.half_grids(nodes_per_axis / 2);
  return build_psi(p, qh, ph);
}

inline double p_hat_closed_form(double gamma, double rho, double theta) {
  return 0.5 - rho / (2.0 * (1.0 + rho * rho)) * ((1.0 + gamma * gamma) * std::cos(theta) + 2.0 * gamma * std::sin(theta));
}

inline double p_hat_closed_form(double gamma, const ViolationParams& p) {
  // lambda = sign * rho e^{i theta}; a negative sign is a shift of theta by pi
  const double theta = p.sign > 0 ? p.theta : p.theta + std::numbers::pi;
  return p_hat_closed_form(gamma, p.rho, theta);
}

inline double p_hat_expectation_closed(const ViolationParams& p, const bell::BellWitness& w) {
  validate(p);
  if (!(w == canonical_witness(p)))
    throw InputError("closed form needs S1 = S1' = (0, inf), S2 = (a, inf), S2' = (P, inf)");
  return p_hat_closed_form(gamma(p.h), p);
}

inline double p_hat_expectation_grid(const WaveFunction2& psi, const bell::BellWitness& w) {
  return bell::p_expectation_from_quartet(marginal::quantum_marginals(psi), w);
}

// |gamma| must exceed this for some lambda to push <P> below 0.
inline double violation_threshold() { return std::sqrt(2.0 * std::sqrt(3.0) - 3.0); }

// min over lambda of the closed form: 1/2 - (1/4) sqrt((1+g^2)^2 + 4 g^2).
inline double min_expectation(double gamma) {
  const double a = 1.0 + gamma * gamma;
  return 0.5 - 0.25 * std::sqrt(a * a + 4.0 * gamma * gamma);
}

}  // namespace phaselab::quantum
