// Two-time correlation machinery: trace functionals, the five stationary
// building blocks, their exact equal-time values and long-delay limits, and
// the normalized intensity autocorrelation.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "escat/correlators.hpp"
#include "escat/field.hpp"
#include "support/oracles.hpp"

using namespace escat;

namespace {

Matrix2c random_matrix(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix2c m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = complexd(u(rng), u(rng));
  return m;
}

EmitterParams bare(double n, double beta, double gd_frac = 0.0, double delta = 0.0) {
  EmitterParams p = preset_ideal();
  p.n_photons = n;
  p.beta = beta;
  p.gamma_d = gd_frac * p.gamma_total;
  p.delta = delta;
  return p;
}

}  // namespace

TEST(TraceFunctional, ReproducesOperatorTraces) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix2c a = random_matrix(rng);
    const Matrix2c x = random_matrix(rng);
    const Matrix2c b = random_matrix(rng);
    const complexd want = (a * x * b).trace();
    const complexd got = trace_functional(a, b) * vectorize(x);
    EXPECT_LT(std::abs(got - want), 1e-14);
  }
}

TEST(TraceFunctional, OperatorProductHandlesEmptyList) {
  EXPECT_LT((operator_product({}) - Matrix2c::Identity()).norm(), 1e-15);
  const Matrix2c prod = operator_product({sigma_eg(), sigma_ge()});
  EXPECT_LT((prod - sigma_ee()).norm(), 1e-15);
}

TEST(Flux, SplitsIntoCoherentPlusIncoherent) {
  for (const EmitterParams& p : {bare(0.0024, 0.96, 0.004, 0.0), bare(0.1, 0.8, 0.0, 1.0)}) {
    EXPECT_NEAR(flux(p), flux_coherent(p) + flux_incoherent(p), 1e-15 * flux(p));
    EXPECT_GE(flux_incoherent(p), -1e-15 * flux(p));
  }
}

TEST(CoherentAmplitude, MatchesWeakDriveTransmission) {
  // <a>/alpha -> 1 - beta*Gamma/(Gamma + 2*gamma_d + 2i*Delta) as the drive vanishes.
  for (double beta : {1.0, 0.92, 0.6}) {
    for (double delta : {0.0, 1.3}) {
      for (double gd_frac : {0.0, 0.03}) {
        const EmitterParams p = bare(1e-9, beta, gd_frac, delta);
        const complexd alpha = field_operator(p).alpha;
        const complexd ratio = coherent_amplitude(p) / alpha;
        const complexd want =
            1.0 - beta * p.gamma_total /
                      complexd(p.gamma_total + 2.0 * p.gamma_d, 2.0 * p.delta);
        EXPECT_LT(std::abs(ratio - want), 1e-6) << "beta=" << beta;
      }
    }
  }
}

TEST(Flux, ClosedFormOnResonance) {
  // F/|alpha|^2 = ((1-beta)^2 + 4*beta*n) / (1 + 4*beta*n), exact at zero
  // dephasing and zero detuning for any drive strength.
  for (double n : {1e-6, 0.01, 0.3, 5.0}) {
    for (double beta : {1.0, 0.92, 0.5}) {
      const EmitterParams p = bare(n, beta);
      const double a2 = std::norm(field_operator(p).alpha);
      const double want = ((1.0 - beta) * (1.0 - beta) + 4.0 * beta * n) / (1.0 + 4.0 * beta * n);
      // Absolute floor: at weak drive the flux is a near-cancelling difference
      // of O(|alpha|^2) terms, which amplifies roundoff in the ratio.
      EXPECT_NEAR(flux(p) / a2, want, 1e-12 * want + 1e-14) << "n=" << n << " beta=" << beta;
    }
  }
}

TEST(NodeBlocks, EqualTimeValuesMatchOperatorAlgebra) {
  for (const EmitterParams& p : {bare(0.0024, 0.96, 0.004, 0.0), bare(0.08, 0.85, 0.02, -0.9)}) {
    const NodeBlocks nb = make_blocks(p, p.delta, 1.0);
    const DensityMatrix rho = steady_state(p);
    const FieldOperator a = field_operator(p);
    const complexd alpha = a.alpha;
    const double c = a.coupling;

    // T2(0) = <a a> = alpha^2 - 2*alpha*c*rho_eg  (sigma_ge is nilpotent).
    const complexd t2_want = alpha * alpha - 2.0 * alpha * c * rho.eg;
    EXPECT_LT(std::abs(nb.T2.eval(0.0) - t2_want), 1e-12);

    // G1(0) = <a† a> = F.
    EXPECT_LT(std::abs(nb.G1.eval(0.0) - complexd(nb.F, 0.0)), 1e-12);

    // Q(0) = |alpha|^4 - 4c Re(conj(alpha)^2 alpha rho_eg) + 4|alpha|^2 c^2 rho_ee.
    const double q_want = std::norm(alpha) * std::norm(alpha) -
                          4.0 * c * (std::conj(alpha) * std::conj(alpha) * alpha * rho.eg).real() +
                          4.0 * std::norm(alpha) * c * c * rho.ee.real();
    EXPECT_LT(std::abs(nb.Q.eval(0.0) - complexd(q_want, 0.0)), 1e-12);

    // W2(0) = W3(0) = <a† a a>.
    EXPECT_LT(std::abs(nb.W2.eval(0.0) - nb.W3.eval(0.0)), 1e-12);

    // C and F against direct traces.
    EXPECT_LT(std::abs(nb.C - (a.op * rho.to_matrix()).trace()), 1e-14);
    EXPECT_NEAR(nb.F, ((a.dagger() * a.op) * rho.to_matrix()).trace().real(), 1e-14);
  }
}

TEST(NodeBlocks, LongDelayFactorization) {
  // At delays long against the emitter correlation time the two-time averages
  // factorize into products of stationary means.
  const EmitterParams p = bare(0.01, 0.9, 0.01, 0.5);
  const NodeBlocks nb = make_blocks(p, p.delta, 1.0);
  const double t = 60.0 / p.gamma_total;
  const complexd c_mean = nb.C;
  const double f_mean = nb.F;
  const double scale = std::max(f_mean * f_mean, 1e-300);
  EXPECT_LT(std::abs(nb.Q.eval(t) - complexd(f_mean * f_mean, 0.0)), 1e-10 * scale);
  EXPECT_LT(std::abs(nb.T2.eval(t) - c_mean * c_mean), 1e-10 * scale);
  EXPECT_LT(std::abs(nb.G1.eval(t) - complexd(std::norm(c_mean), 0.0)), 1e-10 * scale);
  EXPECT_LT(std::abs(nb.W2.eval(t) - f_mean * c_mean), 1e-10 * scale);
  EXPECT_LT(std::abs(nb.W3.eval(t) - f_mean * c_mean), 1e-10 * scale);
}

TEST(NodeBlocks, ModeSumMatchesDirectPropagation) {
  const EmitterParams p = bare(0.05, 0.96, 0.004, 0.0);
  const FieldOperator a = field_operator(p);
  const DensityMatrix rho = steady_state(p);
  const NodeBlocks nb = make_blocks(p, p.delta, 1.0);
  for (double tau : {0.0, 0.02, 0.1, 0.7}) {
    const complexd direct = two_time_trace(p, a.op, a.dagger(), a.op, a.dagger(), tau);
    EXPECT_LT(std::abs(nb.Q.eval(tau) - direct), 1e-11);
  }
}

TEST(ModeSum, ValidatesArguments) {
  const NodeBlocks nb = make_blocks(bare(0.01, 1.0), 0.0, 1.0);
  EXPECT_THROW(nb.Q.eval(-0.1), param_error);
  EXPECT_THROW(nb.Q.eval(std::nan("")), param_error);
  EXPECT_THROW(ModeSum::numeric(nullptr, RowVector4c::Zero(), Vector4c::Zero()), param_error);
}

TEST(SdBlocks, CollapsesWithoutSpread) {
  const EmitterParams p = bare(0.01, 0.96);
  const std::vector<NodeBlocks> blocks = sd_blocks(p, 21);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_DOUBLE_EQ(blocks[0].weight, 1.0);
  EXPECT_DOUBLE_EQ(blocks[0].delta, p.delta);
}

TEST(SdBlocks, NodesCenterOnBareDetuning) {
  EmitterParams p = bare(0.01, 0.96, 0.0, 2.0);
  p.sigma_sd = 0.8;
  const std::vector<NodeBlocks> blocks = sd_blocks(p, 21);
  ASSERT_EQ(blocks.size(), 21u);
  double wsum = 0.0, dmean = 0.0;
  for (const NodeBlocks& nb : blocks) {
    wsum += nb.weight;
    dmean += nb.weight * nb.delta;
  }
  EXPECT_NEAR(wsum, 1.0, 1e-14);
  EXPECT_NEAR(dmean, p.delta, 1e-12);
}

TEST(Hbt, ZeroDriveThrows) {
  EmitterParams p = preset_filtered();
  p.n_photons = 0.0;
  EXPECT_THROW(HbtEngine{p}, param_error);
}

TEST(Hbt, NormalizedToOneAtLongDelay) {
  const EmitterParams p = preset_filtered();
  const HbtEngine engine(p);
  EXPECT_NEAR(engine.value(100.0 / p.gamma_total), 1.0, 1e-9);
}

TEST(Hbt, EvenInDelay) {
  const EmitterParams p = preset_filtered();
  const HbtEngine engine(p);
  for (double tau : {0.02, 0.013, 0.4}) {
    const double plus = engine.value(tau);
    const double minus = engine.value(-tau);
    EXPECT_NEAR(plus, minus, 1e-12 * std::abs(plus) + 1e-15);
  }
  EXPECT_THROW(engine.value(std::nan("")), param_error);
}

TEST(Hbt, RawZeroDelayClosedForm) {
  // g2(0) = Q(0)/F^2 = ((1-2b)^2 + 4bn)(1 + 4bn) / ((1-b)^2 + 4bn)^2 on
  // resonance without averaging or smearing.
  for (double n : {0.001, 0.01, 0.1}) {
    for (double beta : {0.92, 0.7}) {
      const EmitterParams p = bare(n, beta);
      const HbtEngine engine(p);
      const double bn4 = 4.0 * beta * n;
      const double want = (((1.0 - 2.0 * beta) * (1.0 - 2.0 * beta) + bn4) * (1.0 + bn4)) /
                          (((1.0 - beta) * (1.0 - beta) + bn4) * ((1.0 - beta) * (1.0 - beta) + bn4));
      EXPECT_NEAR(engine.value(0.0), want, 1e-9 * want) << "n=" << n << " beta=" << beta;
    }
  }
}

TEST(Hbt, PerfectCouplingAntibunches) {
  // At unit coupling the transmitted field loses its two-photon component
  // entirely at zero delay only in the weak limit of the normalized g2 where
  // Q(0) = |alpha|^4 while F ~ |alpha|^2 (1+4n)^(-1) * 4n: g2(0) grows as n
  // shrinks.
  const EmitterParams weak = bare(1e-4, 1.0);
  const EmitterParams strong = bare(1e-2, 1.0);
  EXPECT_GT(g2_hbt(weak, 0.0), g2_hbt(strong, 0.0));
  // Q(0) = |alpha|^4 exactly at beta = 1.
  const NodeBlocks nb = make_blocks(strong, 0.0, 1.0);
  const double a2 = std::norm(field_operator(strong).alpha);
  EXPECT_NEAR(nb.Q.eval(0.0).real(), a2 * a2, 1e-12 * a2 * a2);
}

TEST(Hbt, SmearedAgainstManualConvolution) {
  EmitterParams p = preset_filtered();
  const HbtEngine engine(p);
  const double tau = 0.07;
  const double manual =
      convolve_irf([&](double s) { return engine.raw(s); }, p.sigma_irf, tau, {0.0}) /
      engine.mean_flux_sq();
  const double via_engine = engine.value(tau);
  EXPECT_NEAR(via_engine, manual, 1e-13 * std::abs(manual));
}

TEST(TwoTimeTrace, RegressionSeedOverload) {
  const EmitterParams p = bare(0.02, 0.9);
  const FieldOperator a = field_operator(p);
  RegressionSeed seed;
  seed.left = {a.op};
  seed.right = {a.dagger()};
  const complexd via_seed = two_time_trace(p, seed, {a.op}, {a.dagger()}, 0.1);
  const complexd direct = two_time_trace(p, a.op, a.dagger(), a.op, a.dagger(), 0.1);
  EXPECT_LT(std::abs(via_seed - direct), 1e-15);
  EXPECT_THROW(two_time_trace(p, seed, {}, {}, -1.0), param_error);
}
