#pragma once

#include <cmath>
#include <vector>

#include "escat/field.hpp"
#include "escat/liouvillian.hpp"
#include "escat/quadrature.hpp"
#include "escat/types.hpp"
#include "escat/units.hpp"

namespace escat {

/// Single-photon reflection amplitude of the bare emitter-waveguide system at
/// offset delta from the emitter resonance: r = -beta*G / (G - 2i*delta) with
/// G the total decay rate.  Dephasing and saturation enter only through the
/// density-matrix route (transmission_intensity), which reduces to |t|^2 in
/// the ideal weak-drive limit.
inline complexd reflection_coeff(const EmitterParams& p, double delta) {
  if (!std::isfinite(delta)) throw param_error("reflection_coeff: delta must be finite");
  p.validate();
  return (-p.beta * p.gamma_total) / complexd(p.gamma_total, -2.0 * delta);
}

/// Single-photon transmission amplitude, t = 1 + r.
inline complexd transmission_coeff(const EmitterParams& p, double delta) {
  return 1.0 + reflection_coeff(p, delta);
}

/// Bound two-photon inelastic scattering amplitude versus the half-difference
/// frequency of the photon pair (dephasing-free form):
///   T(delta) = -(4 beta^2 / (pi G)) / (1 + 4 delta^2 / G^2).
inline double two_photon_amplitude(const EmitterParams& p, double delta) {
  if (!std::isfinite(delta)) throw param_error("two_photon_amplitude: delta must be finite");
  p.validate();
  const double g = p.gamma_total;
  const double x = 2.0 * delta / g;
  return -(4.0 * p.beta * p.beta / (units::pi * g)) / (1.0 + x * x);
}

/// |T(delta)|^2 sampled on a grid (two-photon correlation spectrum of the
/// inelastically scattered pair).
struct TwoPhotonSpectrum {
  std::vector<double> delta;
  std::vector<double> amplitude;  ///< T(delta), real and negative
  std::vector<double> intensity;  ///< |T(delta)|^2
};

inline TwoPhotonSpectrum two_photon_spectrum(const EmitterParams& p,
                                             const std::vector<double>& grid) {
  if (grid.empty()) throw param_error("two_photon_spectrum: empty grid");
  TwoPhotonSpectrum out;
  out.delta = grid;
  out.amplitude.reserve(grid.size());
  out.intensity.reserve(grid.size());
  for (double d : grid) {
    const double t = two_photon_amplitude(p, d);
    out.amplitude.push_back(t);
    out.intensity.push_back(t * t);
  }
  return out;
}

namespace detail {

inline void validate_axis(const std::vector<double>& axis, const char* what) {
  if (axis.empty()) throw param_error(std::string(what) + ": empty grid");
  for (double v : axis)
    if (!std::isfinite(v)) throw param_error(std::string(what) + ": grid contains non-finite value");
}

}  // namespace detail

/// Joint spectral intensity of the inelastically scattered photon pair,
/// peak-normalized.  The sum frequency carries the (Gaussian, FWHM gamma_l)
/// drive-laser intensity envelope; the difference frequency carries the
/// bound-pair Lorentzian-squared profile.
struct JointSpectralIntensity {
  std::vector<double> delta_a;  ///< row axis (rad/ns)
  std::vector<double> delta_b;  ///< column axis (rad/ns)
  std::vector<std::vector<double>> value;
};

inline JointSpectralIntensity joint_spectral_intensity(const EmitterParams& p,
                                                       const std::vector<double>& delta_a,
                                                       const std::vector<double>& delta_b,
                                                       double gamma_l) {
  p.validate();
  detail::validate_axis(delta_a, "joint_spectral_intensity");
  detail::validate_axis(delta_b, "joint_spectral_intensity");
  if (!std::isfinite(gamma_l) || gamma_l <= 0.0)
    throw param_error("joint_spectral_intensity: gamma_l must be finite and > 0");
  const double g = p.gamma_total;
  JointSpectralIntensity out;
  out.delta_a = delta_a;
  out.delta_b = delta_b;
  out.value.assign(delta_a.size(), std::vector<double>(delta_b.size(), 0.0));
  for (std::size_t i = 0; i < delta_a.size(); ++i) {
    for (std::size_t j = 0; j < delta_b.size(); ++j) {
      const double sum = delta_a[i] + delta_b[j];
      const double diff = 0.5 * (delta_a[i] - delta_b[j]);
      const double envelope = std::exp(-4.0 * units::ln2 * sum * sum / (gamma_l * gamma_l));
      const double x = 2.0 * diff / g;
      const double pair = 1.0 / ((1.0 + x * x) * (1.0 + x * x));
      out.value[i][j] = envelope * pair;
    }
  }
  return out;
}

/// Joint temporal intensity of the pair (Fourier dual of the joint spectral
/// intensity), peak-normalized: exponential bunching in the relative time,
/// Gaussian drive envelope in the mean time.
struct JointTemporalIntensity {
  std::vector<double> t_a;  ///< row axis (ns)
  std::vector<double> t_b;  ///< column axis (ns)
  std::vector<std::vector<double>> value;
};

inline JointTemporalIntensity joint_temporal_intensity(const EmitterParams& p,
                                                       const std::vector<double>& t_a,
                                                       const std::vector<double>& t_b,
                                                       double gamma_l) {
  p.validate();
  detail::validate_axis(t_a, "joint_temporal_intensity");
  detail::validate_axis(t_b, "joint_temporal_intensity");
  if (!std::isfinite(gamma_l) || gamma_l <= 0.0)
    throw param_error("joint_temporal_intensity: gamma_l must be finite and > 0");
  const double g = p.gamma_total;
  JointTemporalIntensity out;
  out.t_a = t_a;
  out.t_b = t_b;
  out.value.assign(t_a.size(), std::vector<double>(t_b.size(), 0.0));
  for (std::size_t i = 0; i < t_a.size(); ++i) {
    for (std::size_t j = 0; j < t_b.size(); ++j) {
      const double rel = t_a[i] - t_b[j];
      const double mean = 0.5 * (t_a[i] + t_b[j]);
      out.value[i][j] = std::exp(-g * std::abs(rel)) *
                        std::exp(-mean * mean * gamma_l * gamma_l / (4.0 * units::ln2));
    }
  }
  return out;
}

/// Transmitted-intensity fraction <a† a> / |input amplitude|^2, averaged over
/// slow spectral diffusion of the emitter detuning around p.delta.  Always in
/// (0, 1]; dips at resonance (extinction).
inline double transmission_intensity(const EmitterParams& p, int sd_nodes = 21) {
  p.validate();
  if (rabi_from_n(p) == 0.0)
    throw param_error("transmission_intensity: undefined at zero drive");
  const FieldOperator a = field_operator(p);
  const double input = std::norm(a.alpha);
  const Matrix2c number_op = a.dagger() * a.op;
  const double output = average_sd(
      [&](double dd) {
        const DensityMatrix rho = steady_state_at(p, p.delta + dd);
        return (number_op * rho.to_matrix()).trace().real();
      },
      p.sigma_sd, sd_nodes);
  return output / input;
}

/// Transmission versus drive strength (rows) and detuning (columns).
struct TransmissionMap {
  std::vector<double> n_values;  ///< photon number per lifetime, row axis
  std::vector<double> detuning;  ///< rad/ns, column axis
  std::vector<std::vector<double>> value;
};

inline TransmissionMap transmission_map(const EmitterParams& p, const std::vector<double>& n_values,
                                        const std::vector<double>& detuning, int sd_nodes = 21) {
  p.validate();
  detail::validate_axis(n_values, "transmission_map");
  detail::validate_axis(detuning, "transmission_map");
  for (double n : n_values)
    if (n <= 0.0) throw param_error("transmission_map: n values must be > 0");
  TransmissionMap out;
  out.n_values = n_values;
  out.detuning = detuning;
  out.value.assign(n_values.size(), std::vector<double>(detuning.size(), 0.0));
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    EmitterParams q = p;
    q.n_photons = n_values[i];
    for (std::size_t j = 0; j < detuning.size(); ++j) {
      q.delta = detuning[j];
      out.value[i][j] = transmission_intensity(q, sd_nodes);
    }
  }
  return out;
}

}  // namespace escat
