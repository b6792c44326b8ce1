#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "escat/units.hpp"

namespace escat {

using complexd = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;
using RowVector4c = Eigen::Matrix<complexd, 1, 4>;

/// A superoperator acting on the row-major vectorization of a 2x2 density matrix.
using Superoperator = Matrix4c;

/// Thrown for invalid or out-of-domain input values; the message names the input.
struct param_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown on numerical degeneracy or a failed internal consistency check.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major vectorization index convention for 2x2 operators on {|e>, |g>}:
// component 0 = ee, 1 = eg, 2 = ge, 3 = gg.
inline constexpr int idx_ee = 0;
inline constexpr int idx_eg = 1;
inline constexpr int idx_ge = 2;
inline constexpr int idx_gg = 3;

/// Physical parameters of the driven two-level emitter coupled to a waveguide.
/// All rates are angular [rad/ns]; sigma_irf is a time [ns].
struct EmitterParams {
  double gamma_total = units::ghz_to_angular(2.3);  ///< total decay rate Gamma
  double beta = 0.96;                               ///< waveguide coupling fraction in [0, 1]
  double gamma_d = units::ghz_to_angular(0.01);     ///< pure dephasing rate
  double delta = 0.0;                               ///< emitter-minus-drive detuning
  double n_photons = 0.0024;                        ///< mean photon number per emitter lifetime
  double sigma_sd = units::ghz_to_angular(0.16);    ///< slow spectral-diffusion RMS width
  double sigma_irf = units::ps_to_ns(100.0);        ///< detector timing-jitter RMS width [ns]

  /// Throws param_error naming the offending field.
  void validate() const {
    auto bad = [](const std::string& what) { throw param_error("EmitterParams: " + what); };
    if (!std::isfinite(gamma_total) || gamma_total <= 0.0) bad("gamma_total must be finite and > 0");
    if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0) bad("beta must lie in [0, 1]");
    if (!std::isfinite(gamma_d) || gamma_d < 0.0) bad("gamma_d must be finite and >= 0");
    if (!std::isfinite(delta)) bad("delta must be finite");
    if (!std::isfinite(n_photons) || n_photons < 0.0) bad("n_photons must be finite and >= 0");
    if (beta == 0.0 && n_photons > 0.0) bad("n_photons > 0 requires beta > 0");
    if (!std::isfinite(sigma_sd) || sigma_sd < 0.0) bad("sigma_sd must be finite and >= 0");
    if (!std::isfinite(sigma_irf) || sigma_irf < 0.0) bad("sigma_irf must be finite and >= 0");
  }
};

/// Resonant Rabi frequency for a given mean photon number: Omega = Gamma*sqrt(2*beta*n).
inline double rabi_from_n(const EmitterParams& p) {
  p.validate();
  if (p.n_photons == 0.0) return 0.0;
  return p.gamma_total * std::sqrt(2.0 * p.beta * p.n_photons);
}

/// Inverse of rabi_from_n: n = Omega^2 / (2*beta*Gamma^2).
inline double n_from_rabi(double omega, double beta, double gamma_total) {
  if (!std::isfinite(omega) || omega < 0.0) throw param_error("n_from_rabi: omega must be finite and >= 0");
  if (!std::isfinite(gamma_total) || gamma_total <= 0.0)
    throw param_error("n_from_rabi: gamma_total must be finite and > 0");
  if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0) throw param_error("n_from_rabi: beta must lie in [0, 1]");
  if (omega == 0.0) return 0.0;
  if (beta == 0.0) throw param_error("n_from_rabi: omega > 0 requires beta > 0");
  const double r = omega / gamma_total;
  return r * r / (2.0 * beta);
}

/// Two-level density matrix in the {|e>, |g>} basis.
struct DensityMatrix {
  complexd ee{0.0, 0.0};
  complexd eg{0.0, 0.0};
  complexd ge{0.0, 0.0};
  complexd gg{1.0, 0.0};

  static DensityMatrix ground() { return DensityMatrix{}; }

  static DensityMatrix from_vector(const Vector4c& v) {
    DensityMatrix r;
    r.ee = v(idx_ee);
    r.eg = v(idx_eg);
    r.ge = v(idx_ge);
    r.gg = v(idx_gg);
    return r;
  }

  static DensityMatrix from_matrix(const Matrix2c& m) {
    DensityMatrix r;
    r.ee = m(0, 0);
    r.eg = m(0, 1);
    r.ge = m(1, 0);
    r.gg = m(1, 1);
    return r;
  }

  Vector4c to_vector() const {
    Vector4c v;
    v << ee, eg, ge, gg;
    return v;
  }

  Matrix2c to_matrix() const {
    Matrix2c m;
    m << ee, eg, ge, gg;
    return m;
  }

  complexd trace() const { return ee + gg; }

  double hermiticity_defect() const {
    return std::max({std::abs(eg - std::conj(ge)), std::abs(ee.imag()), std::abs(gg.imag())});
  }

  /// Checks trace 1, Hermiticity and positive semidefiniteness within tol.
  bool is_physical(double tol = 1e-10) const {
    if (std::abs(trace() - 1.0) > tol) return false;
    if (hermiticity_defect() > tol) return false;
    const double pe = ee.real();
    const double pg = gg.real();
    const double det = pe * pg - std::norm(eg);
    return pe >= -tol && pg >= -tol && det >= -tol;
  }
};

/// Device parameter set measured with the narrowband spectral filter in place.
inline EmitterParams preset_filtered() {
  EmitterParams p;
  p.gamma_total = units::ghz_to_angular(2.3);
  p.beta = 0.96;
  p.gamma_d = units::ghz_to_angular(0.01);
  p.delta = 0.0;
  p.n_photons = 0.0024;
  p.sigma_sd = units::ghz_to_angular(0.16);
  p.sigma_irf = units::ps_to_ns(100.0);
  return p;
}

/// Device parameter set without the spectral filter (broader spectral diffusion).
inline EmitterParams preset_unfiltered() {
  EmitterParams p = preset_filtered();
  p.beta = 0.92;
  p.sigma_sd = units::ghz_to_angular(0.39);
  return p;
}

/// Idealized lossless, noise-free operating point at vanishing drive.
inline EmitterParams preset_ideal() {
  EmitterParams p;
  p.gamma_total = units::ghz_to_angular(2.3);
  p.beta = 1.0;
  p.gamma_d = 0.0;
  p.delta = 0.0;
  p.n_photons = 1e-6;
  p.sigma_sd = 0.0;
  p.sigma_irf = 0.0;
  return p;
}

}  // namespace escat
