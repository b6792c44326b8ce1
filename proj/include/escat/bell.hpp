#pragma once

#include <cmath>

#include "escat/franson.hpp"
#include "escat/types.hpp"
#include "escat/units.hpp"

namespace escat {

/// Interferometer phase settings for the CHSH combination.  The unprimed /
/// primed pairs are the two measurement choices per side.  Defaults realize
/// the maximal-violation geometry of the weakly driven emitter.
struct ChshSettings {
  double phi_a = 0.0;
  double phi_a_prime = units::pi / 2.0;
  double phi_b = units::pi / 4.0;
  double phi_b_prime = 7.0 * units::pi / 4.0;

  void validate() const {
    if (!std::isfinite(phi_a) || !std::isfinite(phi_a_prime) || !std::isfinite(phi_b) ||
        !std::isfinite(phi_b_prime))
      throw param_error("ChshSettings: phases must be finite");
  }
};

/// Normalized correlation of one phase pair, built literally from the four
/// coincidence rates with each phase ortho-flipped by pi:
///
///   E = [G(a,b) + G(a+pi, b+pi) - G(a, b+pi) - G(a+pi, b)] / [sum of the four].
inline double correlation_E(const CenterProducts& cp, double phi_a, double phi_b) {
  if (!std::isfinite(phi_a) || !std::isfinite(phi_b))
    throw param_error("correlation_E: phases must be finite");
  const double g_ab = FransonEngine::center_value(cp, phi_a, phi_b);
  const double g_tt = FransonEngine::center_value(cp, phi_a + units::pi, phi_b + units::pi);
  const double g_at = FransonEngine::center_value(cp, phi_a, phi_b + units::pi);
  const double g_tb = FransonEngine::center_value(cp, phi_a + units::pi, phi_b);
  const double den = g_ab + g_tt + g_at + g_tb;
  if (!(den > 0.0))
    throw numeric_error("correlation_E: vanishing total coincidence rate (is the drive zero?)");
  return (g_ab + g_tt - g_at - g_tb) / den;
}

inline double correlation_E(const FransonEngine& engine, double phi_a, double phi_b) {
  return correlation_E(engine.center_products(0.0), phi_a, phi_b);
}

inline double correlation_E(const EmitterParams& p, double phi_a, double phi_b, int sd_nodes = 21) {
  FransonEngine engine(p, sd_nodes);
  return correlation_E(engine, phi_a, phi_b);
}

/// CHSH combination S = |E(a,b) + E(a,b') - E(a',b) + E(a',b')| from the
/// zero-lag central-peak coincidences (spectral-diffusion averaged and
/// detector smeared).
inline double chsh_S(const CenterProducts& cp, const ChshSettings& s = {}) {
  s.validate();
  const double e_ab = correlation_E(cp, s.phi_a, s.phi_b);
  const double e_abp = correlation_E(cp, s.phi_a, s.phi_b_prime);
  const double e_apb = correlation_E(cp, s.phi_a_prime, s.phi_b);
  const double e_apbp = correlation_E(cp, s.phi_a_prime, s.phi_b_prime);
  return std::abs(e_ab + e_abp - e_apb + e_apbp);
}

inline double chsh_S(const FransonEngine& engine, const ChshSettings& s = {}) {
  return chsh_S(engine.center_products(0.0), s);
}

inline double chsh_S(const EmitterParams& p, const ChshSettings& s = {}, int sd_nodes = 21) {
  FransonEngine engine(p, sd_nodes);
  return chsh_S(engine, s);
}

/// Closed-form S versus mean photon number per emitter lifetime, in the
/// otherwise ideal limit (unit coupling, no dephasing, no detuning, no
/// detector smearing).
inline double s_limit_n(double n) {
  if (!std::isfinite(n) || n < 0.0) throw param_error("s_limit_n: n must be finite and >= 0");
  const double num = (1.0 - 4.0 * n) * (1.0 - 4.0 * n);
  const double den = 1.0 + 8.0 * n + 32.0 * n * n;
  return units::two_sqrt2 * num / den;
}

/// Closed-form S versus coupling efficiency beta in the weak-drive,
/// dephasing-free limit.
inline double s_limit_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0)
    throw param_error("s_limit_beta: beta must be in [0, 1]");
  const double num = (1.0 - 2.0 * beta) * (1.0 - 2.0 * beta);
  const double den =
      2.0 - 8.0 * beta + 10.0 * beta * beta - 4.0 * beta * beta * beta + beta * beta * beta * beta;
  return units::two_sqrt2 * num / den;
}

/// Closed-form S versus pure-dephasing rate in the weak-drive, unit-coupling
/// limit.
inline double s_limit_dephasing(double gamma_d, double gamma_total) {
  if (!std::isfinite(gamma_total) || gamma_total <= 0.0)
    throw param_error("s_limit_dephasing: gamma_total must be finite and > 0");
  if (!std::isfinite(gamma_d) || gamma_d < 0.0)
    throw param_error("s_limit_dephasing: gamma_d must be finite and >= 0");
  const double num = (gamma_total - 2.0 * gamma_d) * (gamma_total - 2.0 * gamma_d);
  const double den =
      gamma_total * gamma_total + 4.0 * gamma_total * gamma_d + 8.0 * gamma_d * gamma_d;
  return units::two_sqrt2 * num / den;
}

/// First-order expansion of S in the drive strength and dephasing rate around
/// the ideal point, as published alongside the exact curves.  Note: its
/// dephasing slope at beta = 1 (-80*sqrt(2)/gamma) disagrees with the exact
/// weak-drive curve above (-16*sqrt(2)/gamma); the coefficients are kept
/// verbatim and the discrepancy is pinned by the test suite.
inline double s_maclaurin(double n, double beta, double gamma_d, double gamma_total) {
  if (!std::isfinite(gamma_total) || gamma_total <= 0.0)
    throw param_error("s_maclaurin: gamma_total must be finite and > 0");
  if (!std::isfinite(n) || n < 0.0) throw param_error("s_maclaurin: n must be finite and >= 0");
  if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0)
    throw param_error("s_maclaurin: beta must be in [0, 1]");
  if (!std::isfinite(gamma_d) || gamma_d < 0.0)
    throw param_error("s_maclaurin: gamma_d must be finite and >= 0");
  const double sqrt2 = units::sqrt2;
  return units::two_sqrt2 + 32.0 * sqrt2 * (beta - 2.0) * n +
         gamma_d * (224.0 * sqrt2 * (4.0 - 3.0 * beta) * n / gamma_total -
                    16.0 * sqrt2 * (2.0 * beta + 3.0) / gamma_total);
}

}  // namespace escat
