#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "phaselab/quad.hpp"

using namespace phaselab;
using namespace phaselab::quad;

namespace {

// P_n(x) by the three-term recurrence
double legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// roots of P_n by sign-change scanning and bisection
std::vector<double> legendre_roots_by_bisection(int n) {
  std::vector<double> roots;
  const int scan = 20001;  // odd, so no scan point lands on the root at 0
  for (int i = 0; i < scan; ++i) {
    double a = -1.0 + 2.0 * i / scan, b = -1.0 + 2.0 * (i + 1) / scan;
    if (legendre(n, a) * legendre(n, b) > 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      (legendre(n, a) * legendre(n, m) <= 0.0 ? b : a) = m;
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

Grid1D uniform(double lo, double hi, int panels, int order) {
  std::vector<double> bp;
  for (int k = 0; k <= panels; ++k) bp.push_back(lo + (hi - lo) * k / panels);
  return build_panels(bp, order);
}

}  // namespace

TEST(GaussLegendre, NodesMatchBisectedRoots) {
  for (int n : {2, 5, 8, 16, 20}) {
    const auto rule = gauss_legendre(n);
    const auto roots = legendre_roots_by_bisection(n);
    ASSERT_EQ(roots.size(), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) EXPECT_NEAR(rule.nodes[i], roots[i], 1e-13) << "n=" << n;
  }
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
  for (int n : {3, 8, 12}) {
    const auto rule = gauss_legendre(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], d);
      const double exact = d % 2 == 1 ? 0.0 : 2.0 / (d + 1.0);
      EXPECT_NEAR(s, exact, 1e-14) << "n=" << n << " d=" << d;
    }
  }
}

TEST(SphBessel, MatchesClosedFormsOfLowOrders) {
  std::vector<double> out(3);
  for (double x : {1e-4, 0.3, 2.0, 17.5, 300.0}) {
    sph_bessel_sequence(x, out);
    const double s = std::sin(x), c = std::cos(x);
    EXPECT_NEAR(out[0], s / x, 1e-14);
    if (x < 0.01) {
      // closed forms cancel catastrophically here; use the series
      EXPECT_NEAR(out[1], x / 3.0 - x * x * x / 30.0, 1e-16);
      EXPECT_NEAR(out[2], x * x / 15.0 - x * x * x * x / 210.0, 1e-18);
      continue;
    }
    EXPECT_NEAR(out[1], s / (x * x) - c / x, 1e-12);
    EXPECT_NEAR(out[2], (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x), 1e-11);
  }
}

TEST(SphBessel, HighOrdersAgreeWithLibstdcxxWhereItIsReliable) {
  std::vector<double> out(16);
  for (double x = 0.01; x < 60.0; x *= 1.3) {
    sph_bessel_sequence(x, out);
    for (int n = 0; n < 16; ++n) {
      const double ref = std::sph_bessel(n, x);
      EXPECT_NEAR(out[n], ref, 1e-10 * std::max(1.0, std::abs(ref))) << "x=" << x << " n=" << n;
    }
  }
}

TEST(Integrate, ExponentialOnUnevenPanels) {
  const std::vector<double> bp{0.0, 1.0, 10.0, 50.0};
  const auto g = build_panels(bp, 20, Grading::uniform, 4);
  EXPECT_NEAR(integrate(g, [](double q) { return std::exp(-q); }), 1.0 - std::exp(-50.0), 1e-12);
}

TEST(Integrate, InverseSquareOnGradedGrid) {
  std::vector<double> bp{0.0};
  for (double x : geometric_breakpoints(1e-3, 1e6, 36)) bp.push_back(x);
  const auto g = build_panels(bp, 12);
  EXPECT_NEAR(integrate(g, [](double q) { return 1.0 / ((q + 1.0) * (q + 1.0)); }), 1.0 - 1.0 / (1e6 + 1.0), 1e-6);
}

TEST(Grid, RejectsMalformedInput) {
  EXPECT_THROW(Grid1D({0.0, 1.0}, {1.0}), InputError);
  EXPECT_THROW(Grid1D({1.0, 0.0}, {1.0, 1.0}), InputError);
  EXPECT_THROW(Grid1D({0.0, 1.0}, {1.0, -1.0}), InputError);
  EXPECT_THROW(Grid1D({0.0, NAN}, {1.0, 1.0}), InputError);
  const std::vector<double> bad{0.0, 0.0};
  EXPECT_THROW(build_panels(bad, 4), InputError);
  EXPECT_THROW(geometric_breakpoints(0.0, 1.0, 3), InputError);
}

TEST(Grid, SymmetricMirrorAndShift) {
  const std::vector<double> bp{0.0, 0.5, 2.0};
  const auto half = build_panels(bp, 6);
  const auto full = symmetric_grid(half, 3.0);
  ASSERT_EQ(full.size(), 2 * half.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    EXPECT_NEAR(full.node(i) - 3.0, -(full.node(full.size() - 1 - i) - 3.0), 1e-14);
  }
  EXPECT_EQ(full.shifted(-3.0), symmetric_grid(half));
}

TEST(Interpolate, ReproducesPolynomialsInsidePanels) {
  const auto g = uniform(-2.0, 3.0, 5, 8);
  const auto f = sample(g, [](double x) { return cplx(x * x * x - 2.0 * x, x * x); });
  for (double x : {-1.93, -0.5, 0.0, 1.111, 2.999}) {
    EXPECT_NEAR(std::abs(interpolate(f, x) - cplx(x * x * x - 2.0 * x, x * x)), 0.0, 1e-12);
  }
  EXPECT_EQ(interpolate(f, 3.5), cplx(0.0));
}

TEST(PrincipalValue, ConstantAndLinearNumerators) {
  const auto g = uniform(-1.0, 1.0, 4, 16);
  for (double c : {-0.7, -0.1, 0.0, 0.33, 0.9}) {
    const double l = std::log((1.0 - c) / (1.0 + c));
    EXPECT_NEAR(pv_integrate([](double) { return 1.0; }, c, g), l, 1e-12) << c;
    EXPECT_NEAR(pv_integrate([](double x) { return x; }, c, g), 2.0 + c * l, 1e-12) << c;
  }
}

TEST(PrincipalValue, GaussianHilbertTransform) {
  // PV \int e^{-x^2} / (x - c) dx = -2 sqrt(pi) D(c), D the Dawson function
  const auto g = uniform(-12.0, 12.0, 24, 16);
  const auto dawson = [](double c) {
    const auto h = uniform(0.0, c, 8, 20);
    return std::exp(-c * c) * integrate(h, [](double t) { return std::exp(t * t); });
  };
  for (double c : {0.25, 1.0, 2.5}) {
    EXPECT_NEAR(pv_integrate([](double x) { return std::exp(-x * x); }, c, g), -2.0 * std::sqrt(std::numbers::pi) * dawson(c),
                1e-10);
  }
  EXPECT_THROW(pv_integrate([](double) { return 1.0; }, 12.0, g), InputError);
}

TEST(Fourier, GaussianIsItsOwnTransform) {
  const auto g = uniform(-12.0, 12.0, 24, 12);
  const auto psi = sample(g, [](double q) { return cplx(std::pow(std::numbers::pi, -0.25) * std::exp(-q * q / 2.0)); });
  const auto ft = fourier(psi, g, -1);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(ft.values[i] - psi.values[i]), 0.0, 1e-12);
}

TEST(Fourier, ShiftBecomesAPhase) {
  const double a = 1.7;
  const auto qg = uniform(-12.0 + a, 12.0 + a, 24, 12);
  const auto pg = uniform(-10.0, 10.0, 20, 8);
  const auto g0 = [](double q) { return std::pow(std::numbers::pi, -0.25) * std::exp(-q * q / 2.0); };
  const auto shifted = sample(qg, [&](double q) { return cplx(g0(q - a)); });
  const auto ft = fourier(shifted, pg, -1);
  for (std::size_t i = 0; i < pg.size(); ++i) {
    const double p = pg.node(i);
    EXPECT_NEAR(std::abs(ft.values[i] - std::polar(1.0, -p * a) * g0(p)), 0.0, 1e-11);
  }
}

TEST(Fourier, CarrierBoostsMomentum) {
  const double k = 25.0;
  const auto qg = uniform(-12.0, 12.0, 24, 12);
  const auto pg = uniform(k - 10.0, k + 10.0, 20, 8);
  auto psi = sample(qg, [](double q) { return cplx(std::pow(std::numbers::pi, -0.25) * std::exp(-q * q / 2.0)); });
  psi.carrier = k;
  const auto ft = fourier(psi, pg, -1);
  for (std::size_t i = 0; i < pg.size(); ++i) {
    const double p = pg.node(i) - k;
    EXPECT_NEAR(std::abs(ft.values[i] - std::pow(std::numbers::pi, -0.25) * std::exp(-p * p / 2.0)), 0.0, 1e-11);
  }
}

TEST(Fourier, ParsevalAndRoundTripForRandomSmoothProfiles) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto g = uniform(-14.0, 14.0, 28, 12);
  for (int trial = 0; trial < 10; ++trial) {
    const double c1 = 2 * u(rng), c2 = 2 * u(rng), k = 3 * u(rng);
    const cplx a(u(rng), u(rng)), b(u(rng), u(rng));
    const auto psi = sample(g, [&](double q) {
      return a * std::exp(-(q - c1) * (q - c1)) + b * std::polar(1.0, k * q) * std::exp(-0.5 * (q - c2) * (q - c2));
    });
    const auto ft = fourier(psi, g, -1);
    EXPECT_NEAR(norm2(ft), norm2(psi), 1e-10 * norm2(psi));
    const auto back = fourier(ft, g, +1);
    double dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(back.values[i] - psi.values[i]));
    EXPECT_LT(dev, 1e-7);
  }
}

TEST(Fourier, RejectsBadSign) {
  const auto g = uniform(-1.0, 1.0, 2, 4);
  EXPECT_THROW(fourier(sample(g, [](double) { return cplx(1.0); }), g, 0), InputError);
}
