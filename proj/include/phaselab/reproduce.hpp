#pragma once

// The acceptance table shared by `phaselab reproduce-paper` and the
// acceptance test binary, plus the sample states it runs on.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "phaselab/bell.hpp"
#include "phaselab/kop.hpp"
#include "phaselab/marginal.hpp"
#include "phaselab/parallel.hpp"
#include "phaselab/quantum.hpp"
#include "phaselab/reconstruct.hpp"
#include "phaselab/spin.hpp"

namespace phaselab::reproduce {

using quad::cplx;

// Pinned tolerances and budgets.
inline constexpr double kGammaTol = 1e-6;
inline constexpr double kGammaSeconds = 1.0;
inline constexpr double kThresholdTol = 1e-12;
inline constexpr double kExtremeTol = 1e-12;
inline constexpr double kViolationBound = -0.15;
inline constexpr double kClosedVsGridTol = 1e-2;
inline constexpr double kViolationSeconds = 60.0;
inline constexpr int kViolationNodes = 512;
inline constexpr double kCutoffClosedTol = 1e-6;
inline constexpr double kTopEigenvalue = 0.99;
inline constexpr double kSpectrumSlack = 1e-6;
inline constexpr double kRoundTripTol = 1e-4;
inline constexpr double kDeltaMassTol = 1e-8;
inline constexpr double kDeltaMarginalTol = 1e-6;
inline constexpr double kEndpointMinTol = 1e-6;
inline constexpr double kEndpointNegTol = 1e-9;
inline constexpr int kReconstructNodes = 64;
inline constexpr int kBumpTrials = 10;
inline constexpr double kSpinTol = 1e-12;
inline constexpr double kSpinSeconds = 0.1;
inline constexpr int kFactorizedTrials = 100;
inline constexpr double kFactorizedSlack = 1e-9;

// --- sample states -----------------------------------------------------------

// h proportional to q^3 exp(-q^2/2) on [0, 8]: smooth and odd-extendable, so
// small grids resolve every marginal. The odd extension has a cubic kink at 0,
// so momentum tails fall off like p^-4 and need the wider extent.
inline quantum::HProfile smooth_profile() {
  std::vector<double> bp;
  for (int k = 0; k <= 8; ++k) bp.push_back(k);
  const auto half = quad::build_panels(bp, 16);
  return quantum::profile_from_function([](double q) { return q * q * q * std::exp(-0.5 * q * q); }, half, 12.0);
}

inline quantum::ViolationParams smooth_params() {
  quantum::ViolationParams p;
  p.h = smooth_profile();
  return p;
}

// Psi_+ of the smooth profile on `nodes` points per axis.
inline marginal::QuartetProblem smooth_quartet(int nodes = kReconstructNodes) {
  return marginal::quantum_marginals(quantum::build_psi(smooth_params(), nodes));
}

inline marginal::TripletProblem rtu_triplet(const marginal::QuartetProblem& q) {
  return marginal::TripletProblem(q.R, q.T, q.U);
}

// rho0 times a Gaussian bump with random centre and width, unit mass.
inline reconstruct::Dense4D random_bump(const reconstruct::PhaseSpaceDensity& rho0, std::mt19937_64& rng) {
  reconstruct::Dense4D F = rho0.to_dense();
  std::array<double, 4> c{}, w{};
  for (int a = 0; a < 4; ++a) {
    const auto& g = F.axes[a];
    const double span = g.hi() - g.lo();
    c[a] = std::uniform_real_distribution<double>(g.lo() + 0.25 * span, g.hi() - 0.25 * span)(rng);
    w[a] = std::uniform_real_distribution<double>(0.05, 0.3)(rng) * span;
  }
  const auto [n0, n1, n2, n3] = F.shape();
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t k = 0; k < n2; ++k)
        for (std::size_t l = 0; l < n3; ++l) {
          const std::array<double, 4> x{F.axes[0].node(i), F.axes[1].node(j), F.axes[2].node(k), F.axes[3].node(l)};
          double e = 0.0;
          for (int a = 0; a < 4; ++a) e += std::pow((x[a] - c[a]) / w[a], 2);
          F.at(i, j, k, l) *= std::exp(-0.5 * e);
        }
  const double m = F.integral();
  for (double& v : F.values) v /= m;
  return F;
}

// Normalized Gaussian exp(i k q) exp(-(q-c)^2/(4 s^2)) on 64 nodes over c +- 8s,
// with the momentum grid over k +- 4/s.
struct GaussianFactor {
  quad::ComplexProfile position;
  quad::Grid1D momentum;
};

inline GaussianFactor gaussian_factor(double c, double s, double k) {
  std::vector<double> qb, pb;
  for (int i = 0; i <= 8; ++i) {
    qb.push_back(c - 8.0 * s + 2.0 * s * i);
    pb.push_back(k - 4.0 / s + 1.0 / s * i);
  }
  const auto qg = quad::build_panels(qb, 8);
  const double amp = std::pow(2.0 * std::numbers::pi * s * s, -0.25);
  auto prof = quad::sample(qg, [&](double q) { return cplx(amp * std::exp(-(q - c) * (q - c) / (4.0 * s * s))); });
  prof.carrier = k;
  return {std::move(prof), quad::build_panels(pb, 8)};
}

inline quantum::WaveFunction2 random_product_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(-3.0, 3.0), width(0.3, 2.0), boost(-2.0, 2.0);
  auto a = gaussian_factor(centre(rng), width(rng), boost(rng));
  auto b = gaussian_factor(centre(rng), width(rng), boost(rng));
  return quantum::WaveFunction2({{1.0, std::move(a.position), std::move(b.position)}}, std::move(a.momentum),
                                std::move(b.momentum));
}

// A half-line, a left half-line or a bounded interval with endpoints inside
// [lo, hi].
inline bell::Region random_region(double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double x = u(rng), y = u(rng);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return bell::Region::half_line(x);
    case 1: return bell::Region::below(x);
    default: return bell::Region({{std::min(x, y), std::max(x, y)}});
  }
}

inline bell::BellWitness random_witness(const quantum::WaveFunction2& psi, std::mt19937_64& rng) {
  const auto span = [&](const quad::Grid1D& g) { return random_region(g.lo(), g.hi(), rng); };
  return {span(psi.position_grid1()), span(psi.position_grid2()), span(psi.momentum_grid1()),
          span(psi.momentum_grid2())};
}

// --- the table ---------------------------------------------------------------

struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

}  // namespace detail

inline Criterion gamma_identity() {
  detail::Stopwatch sw;
  const double g = quantum::gamma(quantum::HProfile::inverse_q_plus_one());
  const double t = sw.seconds();
  const double err = std::abs(g - std::numbers::pi / 4.0);
  return {1, "gamma of 1/(q+1) equals pi/4", err <= kGammaTol && t < kGammaSeconds,
          detail::fmt("gamma=%.10f |err|=%.2e time=%.3fs", g, err, t), t};
}

inline Criterion threshold() {
  detail::Stopwatch sw;
  // root of min_lambda <P> = 0 by bisection on the closed form
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (quantum::min_expectation(mid) > 0.0 ? lo : hi) = mid;
  }
  const double err = std::abs(quantum::violation_threshold() - 0.5 * (lo + hi));
  // brute-force min over a (rho, theta) lattice
  const auto scan_min = [](double gamma) {
    double m = 1e300;
    for (int i = 1; i <= 400; ++i) {
      const double rho = 0.01 * i;
      for (int j = 0; j < 720; ++j) m = std::min(m, quantum::p_hat_closed_form(gamma, rho, j * std::numbers::pi / 360.0));
    }
    return m;
  };
  const double at70 = scan_min(0.70), at66 = scan_min(0.66);
  const bool ok = err <= kThresholdTol && at70 < 0.0 && at66 >= 0.0;
  return {2, "violation threshold sqrt(2 sqrt3 - 3)", ok,
          detail::fmt("threshold=%.15f |err|=%.2e min(0.70)=%.6f min(0.66)=%.6f", quantum::violation_threshold(), err,
                      at70, at66),
          sw.seconds()};
}

inline Criterion extremes() {
  detail::Stopwatch sw;
  const double lo = quantum::p_hat_closed_form(1.0, 1.0, std::numbers::pi / 4.0);
  const double hi = quantum::p_hat_closed_form(1.0, 1.0, -3.0 * std::numbers::pi / 4.0);
  const double e1 = std::abs(lo - (1.0 - std::numbers::sqrt2) / 2.0);
  const double e2 = std::abs(hi - (1.0 + std::numbers::sqrt2) / 2.0);
  const double b = 2.0 - 4.0 * lo;
  const double e3 = std::abs(b - 2.0 * std::numbers::sqrt2);
  return {3, "extreme expectations (1 -+ sqrt2)/2", std::max({e1, e2, e3}) <= kExtremeTol,
          detail::fmt("min=%.15f max=%.15f bell=%.15f max|err|=%.2e", lo, hi, b, std::max({e1, e2, e3})),
          sw.seconds()};
}

inline Criterion end_to_end_violation() {
  detail::Stopwatch sw;
  const auto run = [](double eps, double L) {
    quantum::ViolationParams p;
    p.h = quantum::HProfile::cutoff_sqrt(eps, L);
    const auto w = quantum::canonical_witness(p);
    const double grid = quantum::p_hat_expectation_grid(quantum::build_psi(p, kViolationNodes), w);
    return std::pair{grid, quantum::p_hat_expectation_closed(p, w)};
  };
  const auto [grid6, closed6] = run(1e-6, 1e6);
  const auto [grid9, closed9] = run(1e-9, 1e9);
  const double t = sw.seconds();
  const bool ok = grid6 <= kViolationBound && std::abs(closed6 - grid6) <= kClosedVsGridTol && grid9 < grid6 &&
                  t < kViolationSeconds;
  return {4, "end-to-end violation at eps=1e-6, L=1e6", ok,
          detail::fmt("grid=%.6f (bound %.2f) closed=%.6f |diff|=%.2e; eps=1e-9: grid=%.6f closed=%.6f; time=%.2fs",
                      grid6, kViolationBound, closed6, std::abs(closed6 - grid6), grid9, closed9, t),
          t};
}

inline Criterion cutoff_closed_form() {
  detail::Stopwatch sw;
  double worst = 0.0;
  for (double eps : {1e-6, 1e-4, 1e-2})
    for (double L : {1e2, 1e4, 1e6}) {
      const double direct = quantum::gamma(quantum::HProfile::cutoff_sqrt(eps, L));
      worst = std::max(worst, std::abs(direct - kop::gamma_cutoff_closed_form(eps, L)));
    }
  const auto ev = kop::k_spectrum(40.0, 512);
  const bool in_range = ev.back() >= -kSpectrumSlack && ev.front() <= 1.0 + kSpectrumSlack;
  const bool ok = worst <= kCutoffClosedTol && ev.front() >= kTopEigenvalue && in_range;
  return {5, "cutoff closed form and K spectrum", ok,
          detail::fmt("max|closed-quadrature|=%.2e top=%.6f bottom=%.2e", worst, ev.front(), ev.back()), sw.seconds()};
}

inline Criterion classical_counterexample() {
  detail::Stopwatch sw;
  const marginal::CounterexampleAtoms atoms{};
  const auto q = marginal::counterexample_quartet(atoms);
  const double b = bell::bell_sum(q, bell::aligned_witness(atoms));
  const auto cons = marginal::consistency_check(q, 0.0);
  const bool ok = b == 4.0 && cons.max_defect == 0.0;
  return {6, "classical counterexample", ok, detail::fmt("bell=%.17g consistency=%.2e", b, cons.max_defect),
          sw.seconds()};
}

inline Criterion three_marginal_round_trip() {
  detail::Stopwatch sw;
  const auto t = rtu_triplet(smooth_quartet());
  const auto base = reconstruct::rho0_with_support(t);
  const auto rt = reconstruct::round_trip(t, base.density);
  const auto m0 = base.density.marginals();
  const double marg_scale = std::max({reconstruct::detail::sup(m0.m0.v), reconstruct::detail::sup(m0.m1.v), reconstruct::detail::sup(m0.m2.v)});
  double rho_max = 0.0;
  const auto dense0 = base.density.to_dense();
  for (double v : dense0.values) rho_max = std::max(rho_max, v);

  std::mt19937_64 rng(20240611);
  double worst_mass = 0.0, worst_marg = 0.0, worst_neg = 0.0, worst_min = 0.0;
  for (int trial = 0; trial < kBumpTrials; ++trial) {
    const auto F = random_bump(base.density, rng);
    const auto D = reconstruct::delta_from_F(base, F);
    worst_mass = std::max(worst_mass, std::abs(D.integral()));
    const auto md = reconstruct::PhaseSpaceDensity(D).marginals();
    worst_marg = std::max({worst_marg, reconstruct::detail::sup(md.m0.v) / marg_scale, reconstruct::detail::sup(md.m1.v) / marg_scale,
                           reconstruct::detail::sup(md.m2.v) / marg_scale});
    const auto range = reconstruct::lambda_range(base.density, D);
    for (double lam : {range.lo, range.hi}) {
      if (!std::isfinite(lam)) continue;
      double mn = 1e300;
      const auto [n0, n1, n2, n3] = D.shape();
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j)
          for (std::size_t k = 0; k < n2; ++k)
            for (std::size_t l = 0; l < n3; ++l) {
              if (!base.support.in_e(i, j, k, l)) continue;
              mn = std::min(mn, dense0.at(i, j, k, l) + lam * D.at(i, j, k, l));
            }
      worst_neg = std::max(worst_neg, -mn / rho_max);
      worst_min = std::max(worst_min, mn / rho_max);
    }
  }
  const bool ok = rt.max_defect <= kRoundTripTol && worst_mass <= kDeltaMassTol && worst_marg <= kDeltaMarginalTol &&
                  worst_neg <= kEndpointNegTol && worst_min <= kEndpointMinTol;
  return {7, "three-marginal reconstruction", ok,
          detail::fmt("round-trip=%.2e |int Delta|=%.2e Delta marginals=%.2e endpoint min/max rho0 in [%.2e, %.2e]",
                      rt.max_defect, worst_mass, worst_marg, -worst_neg, worst_min),
          sw.seconds()};
}

inline Criterion spin_identities() {
  detail::Stopwatch sw;
  using spin::kron;
  const spin::Mat2 X = spin::sigma_x(), Y = spin::sigma_y(), Z = spin::sigma_z();
  const spin::Mat4 P = spin::p_bar(1.0);
  const spin::Mat4 expected =
      0.5 * spin::Mat4::Identity() + 0.25 * (kron(Y, Y) - kron(X, X) + kron(X, Y) + kron(Y, X));
  const double e1 = (P - expected).cwiseAbs().maxCoeff();
  const double e2 = (P * (spin::Mat4::Identity() - P) + 0.25 * kron(Z, Z)).cwiseAbs().maxCoeff();
  const auto plus = spin::psi_pm_expectations(+1), minus = spin::psi_pm_expectations(-1);
  const double e3 = std::max(std::abs(plus.p_bar_value - (1.0 - std::numbers::sqrt2) / 2.0),
                             std::abs(minus.p_bar_value - (1.0 + std::numbers::sqrt2) / 2.0));
  const double e4 = std::max(std::abs(plus.defect_value + 0.25), std::abs(minus.defect_value + 0.25));
  const double t = sw.seconds();
  const double worst = std::max({e1, e2, e3, e4});
  return {8, "two-qubit identities", worst <= kSpinTol && t < kSpinSeconds,
          detail::fmt("max defect=%.2e <P+>=%.15f <P->=%.15f time=%.4fs", worst, plus.p_bar_value, minus.p_bar_value,
                      t),
          t};
}

inline Criterion factorized_states() {
  detail::Stopwatch sw;
  std::vector<double> sums(kFactorizedTrials);
  parallel_for(kFactorizedTrials, [&](std::size_t i) {
    std::mt19937_64 rng(1000 + i);
    const auto psi = random_product_state(rng);
    const auto q = marginal::quantum_marginals(psi);
    sums[i] = bell::bell_sum(q, random_witness(psi, rng));
  });
  double worst = 0.0, pmin = 1e300, pmax = -1e300;
  for (double b : sums) {
    worst = std::max(worst, std::abs(b));
    const double p = bell::p_expectation_from_bell_sum(b);
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
  }
  const bool ok = worst <= 2.0 + kFactorizedSlack;
  return {9, "factorized states respect the bound", ok,
          detail::fmt("max|bell|=%.12f <P> in [%.6f, %.6f] over %d states", worst, pmin, pmax, kFactorizedTrials),
          sw.seconds()};
}

inline const std::vector<std::function<Criterion()>>& criteria() {
  static const std::vector<std::function<Criterion()>> all{
      gamma_identity,   threshold,       extremes,           end_to_end_violation, cutoff_closed_form,
      classical_counterexample, three_marginal_round_trip, spin_identities, factorized_states};
  return all;
}

inline std::string format_row(const Criterion& c) {
  return detail::fmt("[%s] %d. %s: %s", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), c.detail.c_str());
}

}  // namespace phaselab::reproduce
