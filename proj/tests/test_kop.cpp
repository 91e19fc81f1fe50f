#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "phaselab/kop.hpp"
#include "phaselab/quantum.hpp"
#include "phaselab/reproduce.hpp"

using namespace phaselab;

namespace {

double catalan() {
  double s = 0.0;
  for (int k = 0; k < 2000000; ++k) s += (k % 2 ? -1.0 : 1.0) / ((2.0 * k + 1.0) * (2.0 * k + 1.0));
  return s;
}

// gamma of the two-cutoff profile in the log variable: with ell = ln(L/eps),
// <h|K|h> = 2 \int_0^ell (1 - w/ell) Kbar(w) dw.
double gamma_log_form(double ell) {
  const std::vector<double> bp{0.0, ell};
  const auto g = quad::build_panels(bp, 20, quad::Grading::uniform, 200);
  return 2.0 * quad::integrate(g, [&](double w) { return (1.0 - w / ell) * kop::kbar(w); });
}

quad::Grid1D log_half_grid() {
  std::vector<double> bp{0.0};
  for (double x : quad::geometric_breakpoints(1e-8, 1e8, 64)) bp.push_back(x);
  return quad::build_panels(bp, 12);
}

}  // namespace

TEST(Kernel, SymbolIsTheFourierTransformOfKbar) {
  std::vector<double> bp;
  for (int k = -6; k <= 6; ++k) bp.push_back(0.5 * k);
  EXPECT_LT(kop::symbol_check(quad::build_panels(bp, 6)), 1e-10);
  EXPECT_DOUBLE_EQ(kop::symbol(0.0), 1.0);
}

TEST(Kernel, ApplyOnInverseProfileMatchesLogFormula) {
  // (K 1/(q+1))(q) = ln q / (pi (q - 1))
  const auto g = log_half_grid();
  const auto h = quad::sample(g, [](double q) { return quad::cplx(1.0 / (q + 1.0)); });
  const auto kh = kop::k_apply(h);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double q = g.node(i);
    if (q < 0.05 || q > 100.0 || std::abs(q - 1.0) < 1e-6) continue;
    EXPECT_NEAR(kh.values[i].real(), std::log(q) / (std::numbers::pi * (q - 1.0)), 1e-6) << q;
  }
}

TEST(CutoffGamma, PaperConstantAgainstCatalanLimit) {
  // eps = 1, L = e^40: the arctan integral is Catalan's constant to 1e-8
  const double closed = kop::gamma_cutoff_closed_form(1.0, std::exp(40.0));
  EXPECT_NEAR(closed, 1.0 - 8.0 * catalan() / (40.0 * std::numbers::pi), 1e-9);
  EXPECT_NEAR(closed, 0.941687, 1e-6);
}

TEST(CutoffGamma, ClosedFormMatchesLogVariableIntegral) {
  for (double ell : {2.0, 10.0, 27.631021115928547, 41.44653167389282, 80.0}) {
    const double eps = 1e-3;
    EXPECT_NEAR(kop::gamma_cutoff_closed_form(eps, eps * std::exp(ell)), gamma_log_form(ell), 1e-10) << ell;
  }
}

TEST(CutoffGamma, KnownValues) {
  EXPECT_NEAR(kop::gamma_cutoff_closed_form(1e-6, 1e6), 0.9155845643, 1e-9);
  EXPECT_NEAR(kop::gamma_cutoff_closed_form(1e-9, 1e9), 0.9437229815, 1e-9);
  EXPECT_THROW(kop::gamma_cutoff_closed_form(1.0, 1.0), InputError);
}

TEST(CutoffGamma, MonotoneInTheCutoffRatio) {
  double prev = 0.0;
  for (double r = 1e1; r < 1e30; r *= 100.0) {
    const double g = kop::gamma_cutoff_closed_form(1.0, r);
    EXPECT_GT(g, prev);
    EXPECT_LT(g, 1.0);
    prev = g;
  }
}

TEST(KForm, DilationInvariance) {
  // K commutes with h(q) -> sqrt(s) h(s q)
  for (double s : {1e-3, 0.5, 7.0, 1e4}) {
    EXPECT_NEAR(quantum::gamma(quantum::HProfile::cutoff_sqrt(1e-4 * s, 1e3 * s)),
                quantum::gamma(quantum::HProfile::cutoff_sqrt(1e-4, 1e3)), 1e-12);
  }
}

TEST(KForm, RandomProfilesStayInsideTheSpectrum) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), rate(0.05, 20.0), power(0.0, 3.0);
  const auto g = log_half_grid();
  for (int trial = 0; trial < 100; ++trial) {
    const double c1 = coef(rng), c2 = coef(rng), r1 = rate(rng), r2 = rate(rng), p1 = power(rng), p2 = power(rng);
    auto h = quad::sample(g, [&](double q) {
      return quad::cplx(c1 * std::pow(q, p1) * std::exp(-r1 * q) + c2 * std::pow(q, p2) * std::exp(-r2 * q));
    });
    const double n = quad::norm2(h);
    for (auto& v : h.values) v /= std::sqrt(n);
    const double k = kop::k_form(h);
    EXPECT_GE(k, -1e-12);
    EXPECT_LE(k, 1.0 + 1e-12);
  }
}

TEST(Spectrum, SortedInsideUnitIntervalAndFillsIt) {
  const auto ev = kop::k_spectrum(40.0, 512);
  ASSERT_EQ(ev.size(), 512u);
  EXPECT_TRUE(std::is_sorted(ev.rbegin(), ev.rend()));
  EXPECT_GE(ev.back(), -1e-12);
  EXPECT_LE(ev.front(), 1.0 + 1e-12);
  EXPECT_GT(ev.front(), 0.99);
  // a wider window pushes the top Ritz value towards 1
  EXPECT_GT(kop::k_spectrum(80.0, 1024).front(), ev.front());
}

TEST(Spectrum, RejectsUnresolvedGrids) {
  EXPECT_THROW(kop::k_spectrum(40.0, 64), InputError);
  EXPECT_THROW(kop::k_spectrum(-1.0, 64), InputError);
  EXPECT_THROW(kop::k_spectrum(4.0, 8), InputError);
}

TEST(Gamma, InverseProfileIsPiOverFour) {
  EXPECT_NEAR(quantum::gamma(quantum::HProfile::inverse_q_plus_one()), std::numbers::pi / 4.0, 1e-9);
}

TEST(Gamma, RejectsUnnormalizedProfiles) {
  std::vector<double> bp{0.0, 1.0, 2.0};
  const auto g = quad::build_panels(bp, 8);
  const auto h = quantum::HProfile::samples(quad::sample(g, [](double) { return quad::cplx(1.0); }));
  EXPECT_THROW(quantum::gamma(h), InputError);
}

TEST(Gamma, SmoothSampleProfileIsBelowTheThreshold) {
  const double g = quantum::gamma(reproduce::smooth_profile());
  EXPECT_GT(g, 0.0);
  EXPECT_LT(g, quantum::violation_threshold());
}
