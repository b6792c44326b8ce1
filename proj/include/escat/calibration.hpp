#pragma once

#include <cmath>

#include "escat/types.hpp"
#include "escat/units.hpp"

namespace escat {

/// Conversion constants between experiment-side knobs (optical powers) and
/// model parameters (Rabi frequency, photons per lifetime).
struct PowerCalibration {
  /// Drive-power conversion efficiency: Rabi^2 = 4 * eta * P  with P in uW
  /// and Rabi in rad/ns.
  double eta = 0.0012;
  /// Optical carrier frequency of the emitter transition, THz.
  double nu_THz = 318.6702;
  /// Emitter lifetime 1/gamma_total, ns (default matches gamma/2pi = 2.3 GHz).
  double tau_qd_ns = 1.0 / (2.0 * units::pi * 2.3);

  void validate() const {
    if (!std::isfinite(eta) || eta <= 0.0)
      throw param_error("PowerCalibration: eta must be finite and > 0");
    if (!std::isfinite(nu_THz) || nu_THz <= 0.0)
      throw param_error("PowerCalibration: nu_THz must be finite and > 0");
    if (!std::isfinite(tau_qd_ns) || tau_qd_ns <= 0.0)
      throw param_error("PowerCalibration: tau_qd must be finite and > 0");
  }
};

/// Rabi frequency (rad/ns) produced by a drive power in uW.
inline double rabi_from_power(double power_uW, const PowerCalibration& cal = {}) {
  cal.validate();
  if (!std::isfinite(power_uW) || power_uW < 0.0)
    throw param_error("rabi_from_power: power must be finite and >= 0");
  return 2.0 * std::sqrt(cal.eta * power_uW);
}

/// Drive power (uW) required for a Rabi frequency in rad/ns.
inline double power_from_rabi(double rabi, const PowerCalibration& cal = {}) {
  cal.validate();
  if (!std::isfinite(rabi) || rabi < 0.0)
    throw param_error("power_from_rabi: rabi must be finite and >= 0");
  return rabi * rabi / (4.0 * cal.eta);
}

/// Incident photons per emitter lifetime at a drive power in uW:
/// n = Rabi^2 / (2 beta gamma^2) = 2 eta P / (beta gamma^2).
inline double n_from_power(double power_uW, double beta, double gamma_total,
                           const PowerCalibration& cal = {}) {
  cal.validate();
  if (!std::isfinite(power_uW) || power_uW < 0.0)
    throw param_error("n_from_power: power must be finite and >= 0");
  if (!std::isfinite(beta) || beta <= 0.0 || beta > 1.0)
    throw param_error("n_from_power: beta must be in (0, 1]");
  if (!std::isfinite(gamma_total) || gamma_total <= 0.0)
    throw param_error("n_from_power: gamma_total must be finite and > 0");
  return 2.0 * cal.eta * power_uW / (beta * gamma_total * gamma_total);
}

/// Drive power (uW) for the requested photons per lifetime.
inline double power_from_n(double n, double beta, double gamma_total,
                           const PowerCalibration& cal = {}) {
  cal.validate();
  if (!std::isfinite(n) || n < 0.0) throw param_error("power_from_n: n must be finite and >= 0");
  if (!std::isfinite(beta) || beta <= 0.0 || beta > 1.0)
    throw param_error("power_from_n: beta must be in (0, 1]");
  if (!std::isfinite(gamma_total) || gamma_total <= 0.0)
    throw param_error("power_from_n: gamma_total must be finite and > 0");
  return n * beta * gamma_total * gamma_total / (2.0 * cal.eta);
}

/// Optical pump power in pW carried by a beam delivering n photons per
/// emitter lifetime: P = n h nu / tau_qd.
inline double pump_power_from_n_pW(double n, const PowerCalibration& cal = {}) {
  cal.validate();
  if (!std::isfinite(n) || n < 0.0)
    throw param_error("pump_power_from_n_pW: n must be finite and >= 0");
  // h [J s] * nu [THz -> 1e12/s] * n / tau [1/ns -> 1e9/s] = 1e21 h nu n / tau [W]
  // -> 1e33 in pW.
  return n * units::planck_J_s * cal.nu_THz * 1e33 / cal.tau_qd_ns;
}

}  // namespace escat
