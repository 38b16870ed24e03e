#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pbec/thresholds.hpp"
#include "support/generators.hpp"

namespace {

using namespace pbec;

const double inf = std::numeric_limits<double>::infinity();

TEST(Reversible, ClosedForms) {
  EXPECT_NEAR(reversible_dye_threshold(3400.0, 3500.0, 300.0), 10500.0, 1e-9);
  EXPECT_NEAR(two_level_threshold(3400.0, 3500.0, 300.0), 10500.0, 1e-9);
  EXPECT_DOUBLE_EQ(reversible_dye_threshold(0.0, 3500.0, 300.0), 300.0);
  EXPECT_DOUBLE_EQ(two_level_threshold(0.0, 3500.0, 300.0), 300.0);
  EXPECT_DOUBLE_EQ(reversible_dye_threshold(1000.0, 2000.0, 300.0), 600.0);
  EXPECT_DOUBLE_EQ(two_level_threshold(3400.0, 3500.0, 300.0), reversible_dye_threshold(3400.0, 3500.0, 300.0));
}

TEST(Reversible, Errors) {
  EXPECT_THROW(reversible_dye_threshold(3500.0, 3500.0, 300.0), std::invalid_argument);
  EXPECT_THROW(two_level_threshold(3600.0, 3500.0, 300.0), std::invalid_argument);
  EXPECT_THROW(two_level_threshold(3400.0, 3500.0, 0.0), std::invalid_argument);
}

TEST(ReversibleProperty, CarnotIdentity) {
  gen::Gen gen(81);
  for (int i = 0; i < 5000; ++i) {
    const double w0 = gen.uniform(1.0, 5000.0);
    const double wd = w0 + gen.log_uniform(1e-2, 5000.0);
    const double tc = gen.uniform(1.0, 1000.0);
    const double th = reversible_dye_threshold(w0, wd, tc);
    EXPECT_GT(th, tc);
    const double carnot = 1.0 - tc / th;
    EXPECT_NEAR(carnot, w0 / wd, 1e-12 * (w0 / wd));
  }
}

TEST(BoseIntegral, CriticalNumberInfiniteCutoff) {
  const double t = temperature_to_frequency(300.0);
  const double eps = 0.25;
  const double n = bose_integral(HarmonicDensity{eps}, 3400.0, t, 3400.0, inf);
  const double oracle = M_PI * M_PI / 6.0 * (t / eps) * (t / eps);
  EXPECT_NEAR(n, oracle, 1e-9 * oracle);
  EXPECT_NEAR(critical_number(300.0, eps), oracle, 1e-12 * oracle);
}

TEST(BoseIntegral, ZeroTemperatureIsEmpty) {
  EXPECT_EQ(bose_integral(HarmonicDensity{0.25}, 3400.0, 0.0, 3400.0, inf), 0.0);
}

TEST(BoseIntegral, Errors) {
  EXPECT_THROW(bose_integral(HarmonicDensity{0.25}, 3400.0, 10.0, 3401.0, inf), std::invalid_argument);
  EXPECT_THROW(bose_integral(HarmonicDensity{0.25}, 3400.0, 10.0, 3400.0, 3400.0), std::invalid_argument);
  EXPECT_THROW(bose_integral(HarmonicDensity{0.25}, 3400.0, -1.0, 3400.0, inf), std::invalid_argument);
}

// Composite Simpson on [a, b] with n (even) panels; test-side quadrature.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

TEST(BoseIntegral, FiniteCutoffTail) {
  const double t = 39.276, eps = 0.25, w0 = 3400.0;
  const HarmonicDensity rho{eps};
  const double full = bose_integral(rho, w0, t, w0, inf);
  const double cut = bose_integral(rho, w0, t, w0, w0 + 10.0 * t);
  // Remainder beyond 10 T, integrated directly (upper limit where the integrand is < 1e-30 of its peak).
  const double tail = simpson([&](double d) { return rho(d) / std::expm1(d / t); }, 10.0 * t, 90.0 * t, 20000);
  EXPECT_NEAR(full - cut, tail, 1e-8 * tail);
  EXPECT_LT((full - cut) / full, 11.0 * std::exp(-10.0));
}

TEST(BoseIntegral, LadderHistogramMatchesBinwiseAntiderivative) {
  const double t = 39.276, eps = 0.25, w0 = 3400.0, mu = 3399.5;
  HistogramDensity rho{eps, {}};
  for (int m = 0; m <= 200; ++m) rho.degeneracy.push_back(m + 1.0);
  QuadratureOptions opts;
  opts.breakpoints = rho.bin_edges();
  const double top = w0 + (200 + 0.5) * eps;
  const double got = bose_integral(rho, w0, t, mu, top, opts);
  // int dw / (e^{(w - mu)/T} - 1) = T ln(1 - e^{-(w - mu)/T}).
  auto anti = [&](double w) { return t * std::log(-std::expm1(-(w - mu) / t)); };
  double oracle = 0.0;
  for (int m = 0; m <= 200; ++m) {
    const double lo = std::max(w0, w0 + (m - 0.5) * eps), hi = w0 + (m + 0.5) * eps;
    oracle += (m + 1.0) / eps * (anti(hi) - anti(lo));
  }
  EXPECT_NEAR(got, oracle, 1e-9 * oracle);
}

TEST(CriticalNumber, Scaling) {
  EXPECT_NEAR(critical_number(frequency_to_temperature(0.25), 0.25), M_PI * M_PI / 6.0, 1e-12);
  EXPECT_NEAR(critical_number(600.0, 0.25) / critical_number(300.0, 0.25), 4.0, 1e-12);
  EXPECT_NEAR(critical_number(300.0, 0.25), 4.06e4, 0.01e4);
}

TEST(CriticalNumber, DiscreteLadderAtRoomTemperature) {
  const double discrete = discrete_critical_number(ModeLadder{}.spectrum(), 300.0);
  EXPECT_NEAR(discrete / critical_number(300.0, 0.25), 1.0, 0.01);
}

TEST(MeanHotEnergy, Limits) {
  EXPECT_DOUBLE_EQ(mean_hot_energy(ModeSpectrum{{3400.0}, {1.0}}, 6000.0), 3400.0);
  EXPECT_NEAR(mean_hot_energy(ModeSpectrum{{3400.0, 3500.0}, {1.0, 1e9}}, 6000.0), 3500.0, 1e-5);
  EXPECT_THROW(mean_hot_energy(ModeSpectrum{{3400.0}, {1.0}}, 0.0), std::invalid_argument);
}

TEST(MeanHotEnergy, LadderMatchesContinuum) {
  const ModeLadder l;
  const double discrete = mean_hot_energy(l.spectrum(), 6000.0);
  const double cont = mean_hot_energy_continuum(l.omega0, l.epsilon, 6000.0, l.omega_max());
  EXPECT_NEAR(discrete / cont, 1.0, 0.01);
}

TEST(Continuum, InfiniteCutoffBalancesCriticalNumber) {
  const auto r = continuum_threshold(ModeLadder{}, 300.0, inf);
  EXPECT_NEAR(r.n_th / critical_number(300.0, 0.25), 1.0, 1e-9);
  EXPECT_EQ(r.method, ThresholdMethod::Continuum);
  EXPECT_LT(r.residual, 1e-9);
  EXPECT_LE(r.bracket.second - r.bracket.first, 1e-5);
  // Hot-side number at the root equals the critical number.
  const double hot = bose_integral(HarmonicDensity{0.25}, 3400.0, temperature_to_frequency(r.t_hot_critical), 0.0, inf);
  EXPECT_NEAR(hot / r.n_th, 1.0, 1e-9);
}

TEST(Continuum, AboveReversibleBoundAndMonotone) {
  double previous = 0.0;
  for (double tc = 100.0; tc <= 500.0; tc += 50.0) {
    const auto r = continuum_threshold(ModeLadder{}, tc);
    EXPECT_GT(r.t_hot_critical, tc);
    EXPECT_GT(r.t_hot_critical, two_level_threshold(3400.0, r.omega_bar_h, tc));
    EXPECT_GT(r.t_hot_critical, two_level_threshold(3400.0, mean_hot_energy(ModeLadder{}.spectrum(), r.t_hot_critical), tc));
    EXPECT_GT(r.t_hot_critical, previous);
    previous = r.t_hot_critical;
  }
}

TEST(Continuum, CutoffTooLowToCondense) {
  ModeLadder l;
  l.omega0 = 1e6;
  l.epsilon = 1e-6;
  l.m_max = 1;
  EXPECT_THROW(continuum_threshold(l, 300.0), SolverError);
}

TEST(Numeric, TwoLevelNearAnalytic) {
  ScenarioConfig c;
  c.pump.two_level.g_s = 1e5;
  const auto r = numeric_threshold([&](double th) { return make_kinetic_model(c, ScenarioKind::ExternalTwoLevel, th); },
                                   ThresholdScan{3000.0, 30000.0, 12, true, 0.01, 1e-6});
  EXPECT_NEAR(r.t_hot_critical / 10500.0, 1.0, 0.02);
  EXPECT_LT(r.residual, 1e-6);
  EXPECT_FALSE(r.secondary);  // two modes: no distribution fit
}

TEST(Numeric, NoCrossing) {
  ScenarioConfig c;
  auto below = [&](double th) { return make_kinetic_model(c, ScenarioKind::DyePumped, th); };
  try {
    numeric_threshold(below, ThresholdScan{3000.0, 9000.0, 6, true, 0.01, 1e-6});
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("no crossing"), std::string::npos);
  }
}

TEST(Numeric, ManyLevelSecondaryEstimate) {
  ScenarioConfig c;
  const auto r = numeric_threshold([&](double th) { return make_kinetic_model(c, ScenarioKind::ExternalManyLevel, th); },
                                   ThresholdScan{6000.0, 24000.0, 16, true, 0.01, 1e-6});
  ASSERT_TRUE(r.secondary);
  EXPECT_NEAR(*r.secondary / r.t_hot_critical, 1.0, 0.05);
}

TEST(Grid, Spacing) {
  const auto lin = scan_grid(1.0, 3.0, 3, false);
  EXPECT_EQ(lin, (std::vector<double>{1.0, 2.0, 3.0}));
  const auto lg = scan_grid(1.0, 100.0, 3, true);
  EXPECT_NEAR(lg[1], 10.0, 1e-12);
  EXPECT_THROW(scan_grid(1.0, 2.0, 1, false), std::invalid_argument);
  EXPECT_THROW(scan_grid(2.0, 1.0, 4, false), std::invalid_argument);
}

} // namespace
