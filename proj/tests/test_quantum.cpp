#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "phaselab/marginal.hpp"
#include "phaselab/quantum.hpp"
#include "phaselab/reproduce.hpp"

using namespace phaselab;
using namespace phaselab::quantum;
using quad::cplx;

namespace {

// <f|chi'|g> on the Fourier side: \int_{p>0} conj(F f)(p) (F g)(p) dp
cplx chi_prime_cross_fourier(const quad::ComplexProfile& f, const quad::ComplexProfile& g, const quad::Grid1D& ph) {
  const auto ft = quad::fourier(f, ph, -1), gt = quad::fourier(g, ph, -1);
  cplx s = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) s += ph.weight(i) * std::conj(ft.values[i]) * gt.values[i];
  return s;
}

quad::Grid1D uniform_half(double hi, int panels, int order) {
  std::vector<double> bp;
  for (int k = 0; k <= panels; ++k) bp.push_back(hi * k / panels);
  return quad::build_panels(bp, order);
}

double scan_min(double gamma) {
  double m = 1e300;
  for (int i = 1; i <= 300; ++i)
    for (int j = 0; j < 720; ++j) m = std::min(m, p_hat_closed_form(gamma, 0.01 * i, j * std::numbers::pi / 360.0));
  return m;
}

}  // namespace

TEST(Profiles, UnitNormOnTheHalfLine) {
  EXPECT_NEAR(HProfile::inverse_q_plus_one().norm2(), 1.0, 1e-9);
  EXPECT_NEAR(HProfile::cutoff_sqrt(1e-6, 1e6).norm2(), 1.0, 1e-9);
  EXPECT_NEAR(reproduce::smooth_profile().norm2(), 1.0, 1e-12);
  EXPECT_THROW(HProfile::cutoff_sqrt(1.0, 0.5), InputError);
}

TEST(BuildFG, NormalizedAndOrthogonal) {
  for (const auto& h : {HProfile::cutoff_sqrt(1e-6, 1e6), reproduce::smooth_profile()}) {
    const auto fg = build_fg(h, 256);
    EXPECT_NEAR(quad::norm2(fg.f), 1.0, 1e-8);
    EXPECT_NEAR(quad::norm2(fg.g), 1.0, 1e-8);
    EXPECT_LT(std::abs(quad::inner(fg.f, fg.g)), 1e-15);
    EXPECT_NEAR(chi_expectation(fg.f, bell::Region::half_line(0.0)), 0.5, 1e-8);
  }
}

TEST(ChiPrimeCross, RealProfileGivesMinusIGammaOverTwo) {
  for (const auto& h : {HProfile::cutoff_sqrt(1e-4, 1e4), reproduce::smooth_profile()}) {
    const auto fg = build_fg(h, quad::symmetric_grid(h.reference_grid()));
    const cplx c = chi_prime_cross(fg.f);
    EXPECT_LE(std::abs(c.real()), 1e-10);
    EXPECT_NEAR(c.imag(), -gamma(h) / 2.0, 1e-10);
  }
}

TEST(ChiPrimeCross, AgreesWithTheFourierSide) {
  const auto h = reproduce::smooth_profile();
  const auto q = quad::symmetric_grid(h.sample_profile().grid);
  const auto fg = build_fg(h, q);
  const auto ph = uniform_half(12.0, 24, 12);
  const cplx oracle = chi_prime_cross_fourier(fg.f, fg.g, ph);
  EXPECT_NEAR(std::abs(chi_prime_cross(fg.f) - oracle), 0.0, 1e-9);
}

TEST(ChiPrimeCross, ComplexProfileKeepsThePrincipalValueTerm) {
  // even, complex: f(q) = c |q|^2 e^{-q^2/2} e^{i |q|}
  const auto half = uniform_half(10.0, 20, 12);
  const auto q = quad::symmetric_grid(half);
  const auto raw = [](double x) { return std::abs(x) * std::abs(x) * std::exp(-0.5 * x * x) * std::polar(1.0, std::abs(x)); };
  auto f = quad::sample(q, raw);
  const double n = std::sqrt(quad::norm2(f));
  for (auto& v : f.values) v /= n;
  auto g = f;
  for (std::size_t i = 0; i < q.size(); ++i) g.values[i] *= q.node(i) > 0.0 ? 1.0 : -1.0;
  const cplx oracle = chi_prime_cross_fourier(f, g, uniform_half(40.0, 80, 12));
  const cplx got = chi_prime_cross(f);
  EXPECT_NEAR(std::abs(got - oracle), 0.0, 1e-7);
  EXPECT_GT(std::abs(got.real()), 1e-3);
}

TEST(ChiPrimeCross, RejectsOddOrAsymmetricInput) {
  const auto q = quad::symmetric_grid(uniform_half(4.0, 4, 6));
  EXPECT_THROW(chi_prime_cross(quad::sample(q, [](double x) { return cplx(x * std::exp(-x * x)); })), InputError);
  const auto lopsided = quad::build_panels(std::vector<double>{-1.0, 0.0, 2.0}, 6);
  EXPECT_THROW(chi_prime_cross(quad::sample(lopsided, [](double) { return cplx(1.0); })), InputError);
}

TEST(ClosedForm, ThresholdAndMinimum) {
  EXPECT_NEAR(violation_threshold(), std::sqrt(2.0 * std::sqrt(3.0) - 3.0), 1e-15);
  EXPECT_NEAR(min_expectation(violation_threshold()), 0.0, 1e-15);
  for (double g : {0.3, 0.66, 0.7, 0.9, 1.0}) EXPECT_NEAR(scan_min(g), min_expectation(g), 2e-4) << g;
  EXPECT_LT(scan_min(0.70), 0.0);
  EXPECT_GE(scan_min(0.66), 0.0);
}

TEST(ClosedForm, MinimumDecreasesStrictlyAboveThreshold) {
  double prev = min_expectation(violation_threshold());
  for (int k = 1; k <= 100; ++k) {
    const double g = violation_threshold() + (1.0 - violation_threshold()) * k / 100.0;
    EXPECT_LT(min_expectation(g), prev);
    prev = min_expectation(g);
  }
}

TEST(ClosedForm, ExtremesAndSignConvention) {
  EXPECT_NEAR(p_hat_closed_form(1.0, 1.0, std::numbers::pi / 4.0), (1.0 - std::numbers::sqrt2) / 2.0, 1e-15);
  EXPECT_NEAR(p_hat_closed_form(1.0, 1.0, -3.0 * std::numbers::pi / 4.0), (1.0 + std::numbers::sqrt2) / 2.0, 1e-15);
  ViolationParams p;
  p.sign = -1;
  EXPECT_NEAR(p_hat_closed_form(1.0, p), (1.0 + std::numbers::sqrt2) / 2.0, 1e-15);
  EXPECT_NEAR(p_hat_closed_form(0.3, 0.0, 1.0), 0.5, 1e-15);
}

TEST(ClosedForm, RequiresTheCanonicalWitness) {
  ViolationParams p;
  auto w = canonical_witness(p);
  w.S2 = bell::Region::half_line(1.0);
  EXPECT_THROW(p_hat_expectation_closed(p, w), InputError);
}

TEST(Params, Validation) {
  ViolationParams p;
  p.rho = -1.0;
  EXPECT_THROW(build_psi(p, 64), InputError);
  p.rho = 1.0;
  p.sign = 0;
  EXPECT_THROW(build_psi(p, 64), InputError);
  p.sign = 1;
  EXPECT_THROW(build_psi(p, 63), InputError);
}

TEST(GridPipeline, InverseProfileMatchesClosedForm) {
  ViolationParams p;
  p.h = HProfile::inverse_q_plus_one();
  for (double theta : {0.0, std::numbers::pi / 4.0, 2.0}) {
    p.theta = theta;
    const auto w = canonical_witness(p);
    EXPECT_NEAR(p_hat_expectation_grid(build_psi(p, 512), w), p_hat_expectation_closed(p, w), 1e-4) << theta;
  }
}

TEST(GridPipeline, ShiftAndBoostLeaveTheExpectationUnchanged) {
  ViolationParams p;
  p.h = HProfile::inverse_q_plus_one();
  p.a = 3.0;
  p.P = -2.0;
  p.rho = 0.7;
  p.theta = 1.1;
  const auto w = canonical_witness(p);
  EXPECT_NEAR(p_hat_expectation_grid(build_psi(p, 512), w), p_hat_expectation_closed(p, w), 1e-4);
}

TEST(GridPipeline, SmoothProfileMatchesClosedForm) {
  auto p = reproduce::smooth_params();
  for (int sign : {1, -1}) {
    p.sign = sign;
    const auto w = canonical_witness(p);
    EXPECT_NEAR(p_hat_expectation_grid(build_psi(p, 128), w), p_hat_expectation_closed(p, w), 1e-6);
  }
}

TEST(GridPipeline, CutoffProfileViolatesAndWideningDeepensIt) {
  ViolationParams p;
  const auto w = canonical_witness(p);
  const double narrow = p_hat_expectation_grid(build_psi(p, 512), w);
  EXPECT_NEAR(narrow, p_hat_expectation_closed(p, w), 1e-2);
  EXPECT_LT(narrow, 0.0);
  p.h = HProfile::cutoff_sqrt(1e-9, 1e9);
  EXPECT_LT(p_hat_expectation_grid(build_psi(p, 512), w), narrow);
}

TEST(GridPipeline, BellSumIdentity) {
  auto p = reproduce::smooth_params();
  p.theta = 0.4;
  const auto psi = build_psi(p, 128);
  const auto q = marginal::quantum_marginals(psi);
  const auto w = canonical_witness(p);
  EXPECT_NEAR(bell::bell_sum(q, w), 2.0 - 4.0 * p_hat_expectation_grid(psi, w), 1e-14);
}

TEST(WaveFunction, GramNormMatchesPointwiseQuadrature) {
  auto p = reproduce::smooth_params();
  p.rho = 0.6;
  p.theta = 2.0;
  const auto psi = build_psi(p, 64);
  double s = 0.0;
  for (std::size_t i = 0; i < psi.position_grid1().size(); ++i)
    for (std::size_t j = 0; j < psi.position_grid2().size(); ++j)
      s += psi.position_grid1().weight(i) * psi.position_grid2().weight(j) * std::norm(psi.value(i, j));
  EXPECT_NEAR(psi.norm2(), s, 1e-13);
  EXPECT_NEAR(psi.norm2(), 1.0, 1e-6);
}
