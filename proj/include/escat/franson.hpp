#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "escat/correlators.hpp"
#include "escat/quadrature.hpp"
#include "escat/types.hpp"

namespace escat {

/// Signed-lag channel products entering the central coincidence peak.
/// Assembled into a rate by center_value(); the products are kept separate so
/// that spectral-diffusion averaging and detector-response smearing act on
/// phase-independent quantities.
struct CenterProducts {
  double q = 0.0;   ///< <Q(|tau|)>
  double f2 = 0.0;  ///< <F^2>
  double t2 = 0.0;  ///< <|T2(|tau|)|^2>  (couples to cos(phi_a + phi_b))
  double g1 = 0.0;  ///< <|G1(|tau|)|^2>  (couples to cos(phi_a - phi_b))
  double wa = 0.0;  ///< channel coupling to cos(phi_a)
  double wb = 0.0;  ///< channel coupling to cos(phi_b)
};

/// Signed-offset channel products entering a side coincidence peak.
struct SideProducts {
  double q = 0.0;   ///< <Q(|eps|)>
  double f2 = 0.0;  ///< <F^2>
  complexd u1{};    ///< couples to e^{i(phi_a - phi_b)}
  complexd u2{};    ///< couples to e^{i(phi_a + phi_b)}
  complexd u3{};    ///< couples to e^{i phi_a}
  complexd u4{};    ///< couples to e^{i phi_b}
};

/// Phase-resolved photon-coincidence rates behind a pair of unbalanced
/// interferometers with arm-delay phases phi_a, phi_b (one per detector arm),
/// for the transmitted field of the driven emitter.  The coincidence
/// histogram develops three peaks: a central peak at zero detector-time
/// difference (indistinguishable short-short / long-long path pairs,
/// phase-sensitive through two-photon and single-photon coherences) and two
/// side peaks at +/- the arm delay (short-long path pairs).
///
/// Evaluation order: per-detuning two-time blocks -> spectral-diffusion
/// average of phase-independent products -> detector-response smearing in the
/// time difference -> phase assembly.  This matches the physical averaging
/// (slow detuning drift and finite detector jitter never see the phases).
class FransonEngine {
 public:
  explicit FransonEngine(const EmitterParams& p, int sd_nodes = 21) : p_(p) {
    p_.validate();
    blocks_ = sd_blocks(p_, sd_nodes);
    nodes_.reserve(blocks_.size());
    for (const NodeBlocks& nb : blocks_) {
      NodeEval ne;
      ne.weight = nb.weight;
      ne.C = nb.C;
      ne.F = nb.F;
      ne.exact = nb.Q.is_exact() && nb.T2.is_exact() && nb.G1.is_exact() &&
                 nb.W2.is_exact() && nb.W3.is_exact();
      if (ne.exact) {
        ne.rates = nb.Q.rates();
        ne.c_q = nb.Q.coefficients();
        ne.c_t2 = nb.T2.coefficients();
        ne.c_g1 = nb.G1.coefficients();
        ne.c_w2 = nb.W2.coefficients();
        ne.c_w3 = nb.W3.coefficients();
      }
      ne.nb = &nb;
      nodes_.push_back(ne);
      mean_f_ += nb.weight * nb.F;
      mean_f2_ += nb.weight * nb.F * nb.F;
    }
  }

  FransonEngine(const FransonEngine&) = delete;
  FransonEngine& operator=(const FransonEngine&) = delete;

  /// Spectral-diffusion-averaged center-peak products at signed lag tau
  /// (detector a clicks later for tau > 0), without detector smearing.
  CenterProducts center_products_raw(double tau) const {
    if (!std::isfinite(tau)) throw param_error("franson: tau must be finite");
    const double t = std::abs(tau);
    CenterProducts out;
    for (const NodeEval& ne : nodes_) {
      const Vals v = eval_node(ne, t);
      const double w = ne.weight;
      out.q += w * v.q.real();
      out.f2 += w * ne.F * ne.F;
      out.t2 += w * std::norm(v.t2);
      out.g1 += w * std::norm(v.g1);
      const double w2c = (v.w2 * std::conj(ne.C)).real();
      const double w3c = (v.w3 * std::conj(ne.C)).real();
      // At negative lag the roles of the two detectors exchange, which swaps
      // the single-phase channels.
      if (tau >= 0.0) {
        out.wa += w * w2c;
        out.wb += w * w3c;
      } else {
        out.wa += w * w3c;
        out.wb += w * w2c;
      }
    }
    return out;
  }

  /// Spectral-diffusion-averaged side-peak products at signed offset eps from
  /// the +delay peak center, without detector smearing.
  SideProducts side_products_raw(double eps) const {
    if (!std::isfinite(eps)) throw param_error("franson: eps must be finite");
    const double t = std::abs(eps);
    SideProducts out;
    for (const NodeEval& ne : nodes_) {
      const Vals v = eval_node(ne, t);
      const double w = ne.weight;
      const complexd c = ne.C;
      const double fcc = ne.F * std::norm(c);
      out.q += w * v.q.real();
      out.f2 += w * ne.F * ne.F;
      const complexd u1 = c * c * std::conj(v.t2);
      if (eps >= 0.0) {
        out.u1 += w * u1;
        out.u2 += w * std::norm(c) * std::conj(v.g1);
        out.u3 += w * (c * std::conj(v.w2) + fcc);
        out.u4 += w * (v.w3 * std::conj(c) + fcc);
      } else {
        // Detector-exchange continuation across the peak center.
        out.u1 += w * u1;
        out.u2 += w * std::norm(c) * v.g1;
        out.u3 += w * (std::conj(v.w3) * c + fcc);
        out.u4 += w * (std::conj(c) * v.w2 + fcc);
      }
    }
    return out;
  }

  /// Detector-smeared center-peak products at signed lag tau.
  CenterProducts center_products(double tau) const {
    if (p_.sigma_irf == 0.0) return center_products_raw(tau);
    CenterProducts acc;
    for (const IrfNode& nd : irf_nodes(p_.sigma_irf, tau, {0.0})) {
      const CenterProducts r = center_products_raw(nd.s);
      acc.q += nd.w * r.q;
      acc.f2 += nd.w * r.f2;
      acc.t2 += nd.w * r.t2;
      acc.g1 += nd.w * r.g1;
      acc.wa += nd.w * r.wa;
      acc.wb += nd.w * r.wb;
    }
    return acc;
  }

  /// Detector-smeared side-peak products at signed offset eps.
  SideProducts side_products(double eps) const {
    if (p_.sigma_irf == 0.0) return side_products_raw(eps);
    SideProducts acc;
    for (const IrfNode& nd : irf_nodes(p_.sigma_irf, eps, {0.0})) {
      const SideProducts r = side_products_raw(nd.s);
      acc.q += nd.w * r.q;
      acc.f2 += nd.w * r.f2;
      acc.u1 += nd.w * r.u1;
      acc.u2 += nd.w * r.u2;
      acc.u3 += nd.w * r.u3;
      acc.u4 += nd.w * r.u4;
    }
    return acc;
  }

  /// Phase assembly of the central peak.
  static double center_value(const CenterProducts& cp, double phi_a, double phi_b) {
    return 2.0 * cp.q + 2.0 * cp.f2 + 2.0 * std::cos(phi_a + phi_b) * cp.t2 +
           2.0 * std::cos(phi_a - phi_b) * cp.g1 + 4.0 * std::cos(phi_a) * cp.wa +
           4.0 * std::cos(phi_b) * cp.wb;
  }

  /// Phase assembly of a side peak.
  static double side_value(const SideProducts& sp, double phi_a, double phi_b) {
    const complexd ea(std::cos(phi_a), std::sin(phi_a));
    const complexd eb(std::cos(phi_b), std::sin(phi_b));
    return sp.q + 3.0 * sp.f2 + 2.0 * (ea * std::conj(eb) * sp.u1).real() +
           2.0 * (ea * eb * sp.u2).real() + 2.0 * (ea * sp.u3).real() +
           2.0 * (eb * sp.u4).real();
  }

  /// Smeared central-peak coincidence rate at signed lag tau.
  double center(double tau, double phi_a, double phi_b) const {
    return center_value(center_products(tau), phi_a, phi_b);
  }

  /// Smeared side-peak rate at signed offset eps from the +delay peak.
  double side_plus(double eps, double phi_a, double phi_b) const {
    return side_value(side_products(eps), phi_a, phi_b);
  }

  /// Smeared side-peak rate at signed offset eps from the -delay peak
  /// (detector exchange maps it onto the +delay peak with swapped phases).
  double side_minus(double eps, double phi_a, double phi_b) const {
    return side_value(side_products(-eps), phi_b, phi_a);
  }

  /// Common large-lag asymptote of the central and side peaks (accidental
  /// coincidences of uncorrelated fields).
  double baseline(double phi_a, double phi_b) const {
    double f2 = 0.0, c4 = 0.0, fc2 = 0.0;
    for (const NodeEval& ne : nodes_) {
      const double nc = std::norm(ne.C);
      f2 += ne.weight * ne.F * ne.F;
      c4 += ne.weight * nc * nc;
      fc2 += ne.weight * ne.F * nc;
    }
    return 4.0 * f2 + 2.0 * (std::cos(phi_a + phi_b) + std::cos(phi_a - phi_b)) * c4 +
           4.0 * (std::cos(phi_a) + std::cos(phi_b)) * fc2;
  }

  double mean_flux() const { return mean_f_; }
  double mean_flux_sq() const { return mean_f2_; }
  const std::vector<NodeBlocks>& blocks() const { return blocks_; }
  const EmitterParams& params() const { return p_; }

 private:
  struct Vals {
    complexd q, t2, g1, w2, w3;
  };
  struct NodeEval {
    double weight = 1.0;
    complexd C{};
    double F = 0.0;
    bool exact = false;
    std::array<complexd, 4> rates{};
    std::array<complexd, 4> c_q{}, c_t2{}, c_g1{}, c_w2{}, c_w3{};
    const NodeBlocks* nb = nullptr;
  };

  Vals eval_node(const NodeEval& ne, double t) const {
    Vals v{};
    if (ne.exact) {
      // All five correlators share the generator's modes: one set of
      // exponentials per evaluation point.
      for (std::size_t k = 0; k < 4; ++k) {
        const complexd e = std::exp(ne.rates[k] * t);
        v.q += ne.c_q[k] * e;
        v.t2 += ne.c_t2[k] * e;
        v.g1 += ne.c_g1[k] * e;
        v.w2 += ne.c_w2[k] * e;
        v.w3 += ne.c_w3[k] * e;
      }
    } else {
      v.q = ne.nb->Q.eval(t);
      v.t2 = ne.nb->T2.eval(t);
      v.g1 = ne.nb->G1.eval(t);
      v.w2 = ne.nb->W2.eval(t);
      v.w3 = ne.nb->W3.eval(t);
    }
    return v;
  }

  EmitterParams p_;
  std::vector<NodeBlocks> blocks_;
  std::vector<NodeEval> nodes_;
  double mean_f_ = 0.0;
  double mean_f2_ = 0.0;
};

/// Full three-peak coincidence histogram on a grid of detector-time
/// differences, for arm delay `delay` (well separated from the emitter
/// correlation time).  total = center + side peaks with the common baseline
/// counted once.
struct FransonHistogram {
  std::vector<double> tau;
  std::vector<double> total;
  std::vector<double> center;
  std::vector<double> side_plus;
  std::vector<double> side_minus;
  double baseline = 0.0;
  double delay = 0.0;
};

inline FransonHistogram franson_histogram(const FransonEngine& engine, double phi_a, double phi_b,
                                          const std::vector<double>& tau_grid, double delay) {
  if (!std::isfinite(delay) || delay <= 0.0)
    throw param_error("franson_histogram: delay must be finite and > 0");
  if (tau_grid.empty()) throw param_error("franson_histogram: empty grid");
  for (double t : tau_grid)
    if (!std::isfinite(t)) throw param_error("franson_histogram: grid contains non-finite value");
  const double reach = delay + 10.0 / engine.params().gamma_total;
  if (tau_grid.front() > -reach || tau_grid.back() < reach)
    throw param_error(
        "franson_histogram: grid too narrow to contain the three peaks "
        "(must span at least +/-(delay + 10/gamma))");
  FransonHistogram h;
  h.tau = tau_grid;
  h.delay = delay;
  h.baseline = engine.baseline(phi_a, phi_b);
  const std::size_t n = tau_grid.size();
  h.total.resize(n);
  h.center.resize(n);
  h.side_plus.resize(n);
  h.side_minus.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = tau_grid[i];
    h.center[i] = engine.center(tau, phi_a, phi_b);
    h.side_plus[i] = engine.side_plus(tau - delay, phi_a, phi_b);
    h.side_minus[i] = engine.side_minus(tau + delay, phi_a, phi_b);
    h.total[i] = h.center[i] + h.side_plus[i] + h.side_minus[i] - 2.0 * h.baseline;
  }
  return h;
}

inline FransonHistogram franson_histogram(const EmitterParams& p, double phi_a, double phi_b,
                                          const std::vector<double>& tau_grid, double delay = 3.6,
                                          int sd_nodes = 21) {
  FransonEngine engine(p, sd_nodes);
  return franson_histogram(engine, phi_a, phi_b, tau_grid, delay);
}

/// Phase scan of the zero-lag central-peak rate at fixed phi_a, with the
/// fringe visibility (max - min) / (max + min).
struct VisibilityScan {
  std::vector<double> phi_b;
  std::vector<double> rate;
  double visibility = 0.0;
};

inline VisibilityScan interference_visibility(const FransonEngine& engine, double phi_a = 0.0,
                                              int points = 64) {
  if (points < 4) throw param_error("interference_visibility: need at least 4 phase points");
  const CenterProducts cp = engine.center_products(0.0);
  VisibilityScan scan;
  scan.phi_b.resize(static_cast<std::size_t>(points));
  scan.rate.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double phi = 2.0 * units::pi * i / points;
    scan.phi_b[static_cast<std::size_t>(i)] = phi;
    scan.rate[static_cast<std::size_t>(i)] = FransonEngine::center_value(cp, phi_a, phi);
  }
  const auto [mn, mx] = std::minmax_element(scan.rate.begin(), scan.rate.end());
  const double lo = *mn, hi = *mx;
  if (!(hi + lo > 0.0))
    throw param_error("interference_visibility: vanishing coincidence rate (is the drive zero?)");
  scan.visibility = (hi - lo) / (hi + lo);
  return scan;
}

inline VisibilityScan interference_visibility(const EmitterParams& p, double phi_a = 0.0,
                                              int points = 64, int sd_nodes = 21) {
  FransonEngine engine(p, sd_nodes);
  return interference_visibility(engine, phi_a, points);
}

}  // namespace escat
