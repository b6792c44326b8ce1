// Single-photon scattering amplitudes, the bound two-photon scattering
// resonance, joint pair intensities, and saturable transmission extinction.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "escat/correlators.hpp"
#include "escat/scattering.hpp"

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

TEST(SinglePhoton, ResonantAmplitudes) {
  const EmitterParams p = bare(0.01, 0.92);
  EXPECT_LT(std::abs(reflection_coeff(p, 0.0) - complexd(-0.92, 0.0)), 1e-15);
  EXPECT_LT(std::abs(transmission_coeff(p, 0.0) - complexd(0.08, 0.0)), 1e-15);
}

TEST(SinglePhoton, UnitarityDeficitClosedForm) {
  // |r|^2 + |t|^2 - 1 = 2*beta*gamma^2*(beta-1)/|gamma - 2i*delta|^2: zero at
  // perfect coupling, negative (loss into unguided modes) otherwise.
  for (double beta : {1.0, 0.92, 0.6}) {
    const EmitterParams p = bare(0.01, beta);
    const double g = p.gamma_total;
    for (double delta : {0.0, 0.3 * g, -2.0 * g}) {
      const double lhs = std::norm(reflection_coeff(p, delta)) +
                         std::norm(transmission_coeff(p, delta)) - 1.0;
      const double want = 2.0 * beta * g * g * (beta - 1.0) / std::norm(complexd(g, -2.0 * delta));
      EXPECT_NEAR(lhs, want, 1e-12 * std::abs(want) + 1e-15) << "beta=" << beta;
    }
  }
}

TEST(SinglePhoton, WeakDriveAmplitudeMatchesScatteringCoefficient) {
  // The steady-state mean field reproduces the single-photon transmission
  // amplitude; the emitter detuning and the photon detuning have opposite
  // signs (detuning of the emitter above the drive = drive below the
  // emitter), so the frames meet at t(-delta).
  for (double beta : {1.0, 0.92, 0.7}) {
    for (double delta : {0.0, 1.1, -2.4}) {
      const EmitterParams p = bare(1e-9, beta, 0.0, delta);
      const complexd ratio = coherent_amplitude(p) / field_operator(p).alpha;
      const complexd t = transmission_coeff(p, -delta);
      EXPECT_LT(std::abs(ratio - t), 1e-6) << "beta=" << beta << " delta=" << delta;
    }
  }
}

TEST(TwoPhoton, PeakAmplitudeClosedForm) {
  for (double beta : {1.0, 0.92, 0.5}) {
    const EmitterParams p = bare(0.01, beta);
    const double want = 4.0 * beta * beta / (units::pi * p.gamma_total);
    const double t0 = two_photon_amplitude(p, 0.0);
    EXPECT_LT(t0, 0.0);
    EXPECT_NEAR(std::abs(t0), want, 1e-12 * want) << "beta=" << beta;
  }
}

TEST(TwoPhoton, IntensityWidth) {
  const EmitterParams p = bare(0.01, 0.92);
  const double g = p.gamma_total;
  const double peak = std::pow(two_photon_amplitude(p, 0.0), 2);
  // Half-intensity point of |T|^2 sits at delta = (gamma/2)*sqrt(sqrt(2)-1).
  const double d_half = 0.5 * g * std::sqrt(units::sqrt2 - 1.0);
  const double at_half = std::pow(two_photon_amplitude(p, d_half), 2);
  EXPECT_NEAR(at_half, 0.5 * peak, 1e-12 * peak);

  // Numeric FWHM from a fine scan agrees with gamma*sqrt(sqrt(2)-1).
  double crossing = 0.0;
  double prev = peak;
  for (int i = 1; i <= 20000; ++i) {
    const double d = g * i / 20000.0;
    const double v = std::pow(two_photon_amplitude(p, d), 2);
    if (v < 0.5 * peak) {
      const double d_prev = g * (i - 1) / 20000.0;
      crossing = d_prev + (0.5 * peak - prev) / (v - prev) * (d - d_prev);
      break;
    }
    prev = v;
  }
  ASSERT_GT(crossing, 0.0);
  EXPECT_NEAR(2.0 * crossing, g * std::sqrt(units::sqrt2 - 1.0), 0.01 * g);
}

TEST(TwoPhoton, SpectrumGridAndValidation) {
  const EmitterParams p = bare(0.01, 0.92);
  const std::vector<double> grid = {-1.0, 0.0, 2.0};
  const TwoPhotonSpectrum s = two_photon_spectrum(p, grid);
  ASSERT_EQ(s.amplitude.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_DOUBLE_EQ(s.intensity[i], s.amplitude[i] * s.amplitude[i]);
  EXPECT_THROW(two_photon_spectrum(p, {}), param_error);
  EXPECT_THROW(two_photon_amplitude(p, std::nan("")), param_error);
  EXPECT_THROW(reflection_coeff(p, std::nan("")), param_error);
}

TEST(TwoPhoton, FourierTransformGivesExponentialPairCorrelation) {
  // The bound-pair resonance is Lorentzian, so its normalized cosine
  // transform is exp(-gamma*|tau|/2); the total weight is -2*beta^2.
  const EmitterParams p = bare(0.01, 0.92);
  const double g = p.gamma_total;
  const double w = 26000.0 * g;
  const double step = 0.05 * g;
  const std::vector<double> taus = {0.5 / g, 1.0 / g, 2.0 / g};
  double norm_sum = 0.0;
  std::vector<double> cos_sum(taus.size(), 0.0);
  const long npts = static_cast<long>(2.0 * w / step);
  for (long i = 0; i <= npts; ++i) {
    const double d = -w + step * static_cast<double>(i);
    const double t = two_photon_amplitude(p, d);
    const double edge = (i == 0 || i == npts) ? 0.5 : 1.0;
    norm_sum += edge * t;
    for (std::size_t k = 0; k < taus.size(); ++k)
      cos_sum[k] += edge * t * std::cos(d * taus[k]);
  }
  EXPECT_NEAR(norm_sum * step, -2.0 * p.beta * p.beta, 1e-4 * 2.0 * p.beta * p.beta);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double ratio = cos_sum[k] / norm_sum;
    EXPECT_NEAR(ratio, std::exp(-0.5 * g * taus[k]), 1e-3) << "tau*gamma=" << taus[k] * g;
  }
}

TEST(JointSpectral, StructureAndAntidiagonal) {
  const EmitterParams p = bare(0.01, 0.92);
  const double g = p.gamma_total;
  const double gamma_l = 0.01 * g;
  std::vector<double> axis;
  for (int i = -10; i <= 10; ++i) axis.push_back(0.2 * g * i);
  const JointSpectralIntensity jsi = joint_spectral_intensity(p, axis, axis, gamma_l);
  const std::size_t mid = axis.size() / 2;
  EXPECT_DOUBLE_EQ(jsi.value[mid][mid], 1.0);
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < axis.size(); ++j)
      EXPECT_DOUBLE_EQ(jsi.value[i][j], jsi.value[j][i]);
  // Along delta_a = -delta_b the laser envelope is exactly 1 and the profile
  // is the normalized bound-pair intensity |T(delta)|^2 / |T(0)|^2.
  const double t0 = two_photon_amplitude(p, 0.0);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    const std::size_t j = axis.size() - 1 - i;
    const double td = two_photon_amplitude(p, axis[i]);
    const double want = (td * td) / (t0 * t0);
    EXPECT_NEAR(jsi.value[i][j], want, 1e-6 * want);
  }
  EXPECT_THROW(joint_spectral_intensity(p, axis, axis, 0.0), param_error);
  EXPECT_THROW(joint_spectral_intensity(p, {}, axis, gamma_l), param_error);
}

TEST(JointTemporal, BunchingTimeConstant) {
  const EmitterParams p = bare(0.01, 0.92);
  const double g = p.gamma_total;
  const double gamma_l = 0.01 * g;
  const double tau_e = 1.0 / g;  // ~69 ps for the tabulated decay rate
  const std::vector<double> ta = {0.5 * tau_e, 0.0, -0.5 * tau_e};
  const std::vector<double> tb = {-0.5 * tau_e, 0.0, 0.5 * tau_e};
  const JointTemporalIntensity jti = joint_temporal_intensity(p, ta, tb, gamma_l);
  EXPECT_DOUBLE_EQ(jti.value[1][1], 1.0);
  // (ta, tb) = (tau_e/2, -tau_e/2): relative time tau_e, mean time 0.
  EXPECT_NEAR(jti.value[0][0], std::exp(-1.0), 1e-12);
  EXPECT_NEAR(jti.value[2][2], std::exp(-1.0), 1e-12);
  EXPECT_NEAR(tau_e, 0.069198, 1e-6);  // ns
  EXPECT_THROW(joint_temporal_intensity(p, ta, tb, -1.0), param_error);
}

TEST(Transmission, ResonantExtinctionAtWeakDrive) {
  const EmitterParams p = bare(1e-9, 0.92);
  EXPECT_NEAR(transmission_intensity(p), 0.0064, 1e-8);
}

TEST(Transmission, FarDetunedDriveIsUnaffected) {
  EmitterParams p = bare(1e-9, 0.92);
  p.delta = 50.0 * p.gamma_total;
  EXPECT_NEAR(transmission_intensity(p), 1.0, 1e-3);
}

TEST(Transmission, MapIsSymmetricAndSaturates) {
  const EmitterParams p = bare(0.01, 0.92);
  const std::vector<double> n_values = {0.01, 0.3, 1.0, 10.0, 100.0};
  std::vector<double> det;
  for (int i = -6; i <= 6; ++i) det.push_back(0.5 * p.gamma_total * i);
  const TransmissionMap map = transmission_map(p, n_values, det);
  ASSERT_EQ(map.value.size(), n_values.size());
  const std::size_t m = det.size() - 1;
  const std::size_t mid = det.size() / 2;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    for (std::size_t j = 0; j < det.size(); ++j) {
      EXPECT_GT(map.value[i][j], 0.0);
      EXPECT_LE(map.value[i][j], 1.0 + 1e-12);
      EXPECT_NEAR(map.value[i][j], map.value[i][m - j], 1e-12);
    }
    if (i > 0) {
      // stronger drive saturates the emitter: the resonant dip fills in
      EXPECT_GT(map.value[i][mid], map.value[i - 1][mid]);
    }
  }
  EXPECT_GT(map.value[n_values.size() - 1][mid], 0.95);
}

TEST(Transmission, Validation) {
  const EmitterParams p = bare(0.01, 0.92);
  EmitterParams zero = p;
  zero.n_photons = 0.0;
  EXPECT_THROW(transmission_intensity(zero), param_error);
  EXPECT_THROW(transmission_map(p, {0.0, 1.0}, {0.0}), param_error);
  EXPECT_THROW(transmission_map(p, {1.0}, {}), param_error);
  EXPECT_THROW(transmission_map(p, {1.0}, {std::nan("")}), param_error);
}
