#pragma once

// Unit conventions used throughout the library:
//   * rates, linewidths and detunings are angular frequencies [rad/ns] internally,
//   * configuration files and CLI columns quote ordinary frequencies [GHz]
//     (ordinary value = angular value / 2*pi),
//   * times are [ns] internally; detector jitter widths are quoted in [ps],
//   * optical powers are [uW] on the input path and [pW] for emitted pump power.

namespace escat::units {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double sqrt2 = 1.41421356237309504880;
inline constexpr double two_sqrt2 = 2.0 * sqrt2;  // maximal CHSH value
inline constexpr double ln2 = 0.69314718055994530942;

// Planck constant, exact SI value [J*s].
inline constexpr double planck_J_s = 6.62607015e-34;

constexpr double ghz_to_angular(double f_ghz) { return two_pi * f_ghz; }  // -> rad/ns
constexpr double angular_to_ghz(double w) { return w / two_pi; }          // -> GHz
constexpr double ps_to_ns(double t_ps) { return 1e-3 * t_ps; }
constexpr double ns_to_ps(double t_ns) { return 1e3 * t_ns; }

}  // namespace escat::units
