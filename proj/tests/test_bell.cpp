// CHSH correlations from the zero-lag central coincidence peak: the full
// numerical pipeline against closed-form limits, expansion slopes, the
// quantum bound, and error handling.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "escat/bell.hpp"
#include "support/oracles.hpp"

using namespace escat;

namespace {

EmitterParams bare(double n, double beta, double gd_frac = 0.0, double delta = 0.0) {
  EmitterParams p = preset_ideal();
  p.n_photons = n;
  p.beta = beta;
  p.gamma_d = gd_frac * p.gamma_total;
  p.delta = delta;
  return p;
}

}  // namespace

TEST(Chsh, IdealWeakDriveReachesQuantumBound) {
  const double s = chsh_S(bare(1e-9, 1.0));
  EXPECT_NEAR(s, units::two_sqrt2, 1e-6);
}

TEST(Chsh, PipelineMatchesClosedFormInDriveStrength) {
  for (double n : {1e-4, 1e-3, 0.01, 0.05, 0.1}) {
    const double s = chsh_S(bare(n, 1.0));
    EXPECT_NEAR(s, s_limit_n(n), 1e-9) << "n=" << n;
  }
}

TEST(Chsh, PipelineMatchesClosedFormInCoupling) {
  for (double beta : {1.0, 0.96, 0.92, 0.8, 0.6}) {
    const double s = chsh_S(bare(1e-9, beta));
    EXPECT_NEAR(s, s_limit_beta(beta), 1e-6) << "beta=" << beta;
  }
}

TEST(Chsh, PipelineMatchesClosedFormInDephasing) {
  const double gamma = preset_ideal().gamma_total;
  for (double frac : {0.0, 0.005, 0.01, 0.05}) {
    const double s = chsh_S(bare(1e-9, 1.0, frac));
    EXPECT_NEAR(s, s_limit_dephasing(frac * gamma, gamma), 1e-6) << "gamma_d/gamma=" << frac;
  }
}

TEST(Chsh, PipelineMatchesGeneralOracleOnCrossGrid) {
  for (double n : {1e-3, 0.01, 0.05}) {
    for (double beta : {1.0, 0.9, 0.7}) {
      const double s = chsh_S(bare(n, beta));
      const double want = oracles::chsh_exact_n_beta(n, beta);
      EXPECT_NEAR(s, want, 1e-10 * want) << "n=" << n << " beta=" << beta;
    }
  }
}

TEST(Chsh, ClosedFormsAgreeOnOverlaps) {
  const double gamma = 14.0;
  EXPECT_NEAR(s_limit_n(0.0), units::two_sqrt2, 1e-15);
  EXPECT_NEAR(s_limit_beta(1.0), units::two_sqrt2, 1e-15);
  EXPECT_NEAR(s_limit_dephasing(0.0, gamma), units::two_sqrt2, 1e-15);
  for (double n : {1e-3, 0.02, 0.2})
    EXPECT_NEAR(oracles::chsh_exact_n_beta(n, 1.0), s_limit_n(n), 1e-14);
  for (double beta : {1.0, 0.8, 0.5})
    EXPECT_NEAR(oracles::chsh_exact_n_beta(1e-13, beta), s_limit_beta(beta), 1e-10);
}

TEST(Chsh, QuarticApproachToMaximumInCoupling) {
  // 1 - S/(2*sqrt(2)) == (1-beta)^4 / [(1-2*beta)^2 + (1-beta)^4] exactly in
  // the weak-drive closed form.
  for (double beta : {0.999, 0.99, 0.9, 0.7}) {
    const double eps = 1.0 - beta;
    const double e4 = eps * eps * eps * eps;
    const double num = (1.0 - 2.0 * beta) * (1.0 - 2.0 * beta);
    const double want = e4 / (num + e4);
    const double got = 1.0 - s_limit_beta(beta) / units::two_sqrt2;
    // Absolute floor: reconstructing the deficit from the O(1) ratio cannot
    // beat a few ulps of 1.
    EXPECT_NEAR(got, want, 1e-12 * want + 1e-14) << "beta=" << beta;
  }
}

TEST(Chsh, TsirelsonBoundHoldsOverRandomParameters) {
  std::mt19937 rng(20260818);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double n = std::pow(10.0, -4.0 + 4.0 * u01(rng));  // 1e-4 .. 1
    const double beta = 0.3 + 0.7 * u01(rng);
    const double gd_frac = 0.5 * u01(rng);
    const double delta = -3.0 + 6.0 * u01(rng);
    const FransonEngine engine(bare(n, beta, gd_frac, delta));
    const CenterProducts cp = engine.center_products(0.0);
    ChshSettings s;
    s.phi_a = 2.0 * units::pi * u01(rng);
    s.phi_a_prime = 2.0 * units::pi * u01(rng);
    s.phi_b = 2.0 * units::pi * u01(rng);
    s.phi_b_prime = 2.0 * units::pi * u01(rng);
    const double e = correlation_E(cp, s.phi_a, s.phi_b);
    EXPECT_LE(std::abs(e), 1.0 + 1e-12) << "trial " << trial;
    EXPECT_LE(chsh_S(cp, s), units::two_sqrt2 + 1e-6) << "trial " << trial;
  }
}

TEST(Chsh, PipelineDriveSlopeMatchesExpansion) {
  // Central finite difference of the full pipeline around n -> 0 at unit
  // coupling recovers the first-order drive coefficient -32*sqrt(2).
  const double n0 = 1e-6, h = 5e-7;
  const double sp = chsh_S(bare(n0 + h, 1.0));
  const double sm = chsh_S(bare(n0 - h, 1.0));
  const double slope = (sp - sm) / (2.0 * h);
  EXPECT_NEAR(slope, -32.0 * units::sqrt2, 1e-3 * 32.0 * units::sqrt2);
}

TEST(Chsh, PipelineDephasingSlopeDisagreesWithPublishedExpansion) {
  // The exact weak-drive pipeline has dS/d(gamma_d) = -16*sqrt(2)/gamma at
  // beta = 1, while the published first-order expansion carries
  // -80*sqrt(2)/gamma; both are pinned.
  const double gamma = preset_ideal().gamma_total;
  const double h = 1e-5 * gamma;
  const auto s_at = [&](double gd) {
    EmitterParams p = bare(1e-9, 1.0);
    p.gamma_d = gd;
    return chsh_S(p);
  };
  const double slope = (-3.0 * s_at(0.0) + 4.0 * s_at(h) - s_at(2.0 * h)) / (2.0 * h);
  const double exact = -16.0 * units::sqrt2 / gamma;
  EXPECT_NEAR(slope, exact, 1e-3 * std::abs(exact));

  const double hm = 1e-7;
  const double maclaurin_slope = (s_maclaurin(0.0, 1.0, hm, gamma) - s_maclaurin(0.0, 1.0, 0.0, gamma)) / hm;
  EXPECT_NEAR(maclaurin_slope, -80.0 * units::sqrt2 / gamma, 1e-6 / gamma);
  EXPECT_GT(std::abs(maclaurin_slope - slope), 50.0 / gamma);
}

TEST(Chsh, PublishedExpansionAnchors) {
  const double gamma = 14.0;
  EXPECT_DOUBLE_EQ(s_maclaurin(0.0, 1.0, 0.0, gamma), units::two_sqrt2);
  const double h = 1e-7;
  const double n_slope = (s_maclaurin(h, 1.0, 0.0, gamma) - units::two_sqrt2) / h;
  EXPECT_NEAR(n_slope, -32.0 * units::sqrt2, 1e-5);
}

TEST(Chsh, ZeroDriveHasNoCorrelations) {
  EmitterParams p = preset_filtered();
  p.n_photons = 0.0;
  EXPECT_THROW(correlation_E(p, 0.0, units::pi / 4.0), numeric_error);
  EXPECT_THROW(chsh_S(p), numeric_error);
}

TEST(Chsh, ValidatesPhases) {
  const FransonEngine engine(preset_filtered());
  const CenterProducts cp = engine.center_products(0.0);
  EXPECT_THROW(correlation_E(cp, std::nan(""), 0.0), param_error);
  ChshSettings s;
  s.phi_b_prime = std::nan("");
  EXPECT_THROW(chsh_S(cp, s), param_error);
  EXPECT_THROW(s_limit_n(-1.0), param_error);
  EXPECT_THROW(s_limit_beta(1.5), param_error);
  EXPECT_THROW(s_limit_dephasing(-1.0, 14.0), param_error);
  EXPECT_THROW(s_limit_dephasing(0.0, 0.0), param_error);
  EXPECT_THROW(s_maclaurin(0.0, 2.0, 0.0, 14.0), param_error);
}

TEST(Chsh, ManualCompositionMatchesCombination) {
  const FransonEngine engine(preset_filtered());
  const CenterProducts cp = engine.center_products(0.0);
  const ChshSettings s;
  const double manual = std::abs(correlation_E(cp, s.phi_a, s.phi_b) +
                                 correlation_E(cp, s.phi_a, s.phi_b_prime) -
                                 correlation_E(cp, s.phi_a_prime, s.phi_b) +
                                 correlation_E(cp, s.phi_a_prime, s.phi_b_prime));
  EXPECT_DOUBLE_EQ(chsh_S(cp, s), manual);
  EXPECT_DOUBLE_EQ(chsh_S(engine, s), manual);
}

TEST(Chsh, RealisticParametersViolateClassicalBound) {
  const double s = chsh_S(preset_filtered());
  EXPECT_GT(s, 2.0);
  EXPECT_GE(s, 2.35);
  EXPECT_LE(s, 2.99);
}
