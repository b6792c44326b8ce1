#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "escat/field.hpp"
#include "escat/liouvillian.hpp"
#include "escat/quadrature.hpp"
#include "escat/types.hpp"

namespace escat {

/// Column-stacks a 2x2 operator in the (ee, eg, ge, gg) ordering used by the
/// vectorized master equation.
inline Vector4c vectorize(const Matrix2c& m) {
  Vector4c v;
  v(idx_ee) = m(0, 0);
  v(idx_eg) = m(0, 1);
  v(idx_ge) = m(1, 0);
  v(idx_gg) = m(1, 1);
  return v;
}

/// Row functional f such that Tr(A X B) = f . vec(X) for any 2x2 X.
/// Derivation: Tr(A X B) = sum_{ij} (B A)(j, i) X(i, j).
inline RowVector4c trace_functional(const Matrix2c& final_left, const Matrix2c& final_right) {
  const Matrix2c ba = final_right * final_left;
  RowVector4c f;
  f(idx_ee) = ba(0, 0);
  f(idx_eg) = ba(1, 0);
  f(idx_ge) = ba(0, 1);
  f(idx_gg) = ba(1, 1);
  return f;
}

/// Ordered product of a list of 2x2 operators; the empty list is the
/// identity.
inline Matrix2c operator_product(const std::vector<Matrix2c>& ops) {
  Matrix2c m = Matrix2c::Identity();
  for (const Matrix2c& o : ops) m = m * o;
  return m;
}

/// Operator lists applied on the left/right of the steady state at the early
/// time of a two-time average; empty lists mean identity on that side.
struct RegressionSeed {
  std::vector<Matrix2c> left;
  std::vector<Matrix2c> right;

  Matrix2c left_product() const { return operator_product(left); }
  Matrix2c right_product() const { return operator_product(right); }
};

/// Stationary two-time average via the quantum regression theorem:
/// Tr(final_left . exp(M tau)[seed_left . rho_ss . seed_right] . final_right).
inline complexd two_time_trace(const EmitterParams& p, const Matrix2c& seed_left,
                               const Matrix2c& seed_right, const Matrix2c& final_left,
                               const Matrix2c& final_right, double tau) {
  if (!std::isfinite(tau) || tau < 0.0) throw param_error("two_time_trace: tau must be finite and >= 0");
  const Superoperator m = build_liouvillian(p);
  const DensityMatrix rho = steady_state_of(m);
  const Vector4c seed = vectorize(seed_left * rho.to_matrix() * seed_right);
  const Vector4c evolved = propagate(m, seed, tau);
  return trace_functional(final_left, final_right) * evolved;
}

inline complexd two_time_trace(const EmitterParams& p, const RegressionSeed& seed,
                               const std::vector<Matrix2c>& final_left,
                               const std::vector<Matrix2c>& final_right, double tau) {
  return two_time_trace(p, seed.left_product(), seed.right_product(),
                        operator_product(final_left), operator_product(final_right), tau);
}

/// Mean transmitted-field amplitude <a> in the steady state at the bare
/// emitter detuning.
inline complexd coherent_amplitude(const EmitterParams& p) {
  const DensityMatrix rho = steady_state(p);
  const FieldOperator a = field_operator(p);
  return (a.op * rho.to_matrix()).trace();
}

/// Stationary photon flux <a† a> (per unit time, in units of the decay rate
/// already absorbed in the operator normalization).
inline double flux(const EmitterParams& p) {
  const DensityMatrix rho = steady_state(p);
  const FieldOperator a = field_operator(p);
  return ((a.dagger() * a.op) * rho.to_matrix()).trace().real();
}

/// Coherently scattered part of the flux, |<a>|^2.
inline double flux_coherent(const EmitterParams& p) {
  return std::norm(coherent_amplitude(p));
}

/// Incoherently scattered part of the flux, <a† a> - |<a>|^2.
inline double flux_incoherent(const EmitterParams& p) {
  return flux(p) - flux_coherent(p);
}

/// A two-time correlation function of the delay tau >= 0, stored either as an
/// explicit four-mode exponential sum (when the generator is diagonalizable
/// with a well-conditioned eigenbasis) or as a functional applied to the
/// numerically propagated seed (fallback near exceptional points).
class ModeSum {
 public:
  ModeSum() = default;

  static ModeSum exact(const std::array<complexd, 4>& coeff, const std::array<complexd, 4>& rates) {
    ModeSum s;
    s.exact_ = true;
    s.coeff_ = coeff;
    s.rates_ = rates;
    return s;
  }

  static ModeSum numeric(std::shared_ptr<const Propagator> prop, const RowVector4c& functional,
                         const Vector4c& seed) {
    if (!prop) throw param_error("ModeSum: null propagator");
    ModeSum s;
    s.exact_ = false;
    s.prop_ = std::move(prop);
    s.functional_ = functional;
    s.seed_ = seed;
    return s;
  }

  bool is_exact() const { return exact_; }

  /// Per-mode coefficients (exact representation only).
  const std::array<complexd, 4>& coefficients() const {
    if (!exact_) throw numeric_error("ModeSum: no exact mode decomposition available");
    return coeff_;
  }

  /// Per-mode complex rates (exact representation only).
  const std::array<complexd, 4>& rates() const {
    if (!exact_) throw numeric_error("ModeSum: no exact mode decomposition available");
    return rates_;
  }

  complexd eval(double tau) const {
    if (!std::isfinite(tau) || tau < 0.0) throw param_error("ModeSum: tau must be finite and >= 0");
    if (exact_) {
      complexd acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += coeff_[static_cast<std::size_t>(k)] * std::exp(rates_[static_cast<std::size_t>(k)] * tau);
      return acc;
    }
    return functional_ * prop_->apply(tau, seed_);
  }

 private:
  bool exact_ = true;
  std::array<complexd, 4> coeff_{};
  std::array<complexd, 4> rates_{};
  std::shared_ptr<const Propagator> prop_;
  RowVector4c functional_ = RowVector4c::Zero();
  Vector4c seed_ = Vector4c::Zero();
};

/// All stationary one- and two-time building blocks at one emitter detuning,
/// tagged with the quadrature weight of that detuning node.
///
/// With a(t) the transmitted-field operator and averages in the steady state:
///   C     = <a>
///   F     = <a†(t) a(t)>
///   Q(τ)  = <a†(t) a†(t+τ) a(t+τ) a(t)>   (intensity autocorrelation)
///   T2(τ) = <a(t+τ) a(t)>                  (two-photon amplitude)
///   G1(τ) = <a†(t) a(t+τ)>                 (field autocorrelation)
///   W2(τ) = <a†(t) a(t+τ) a(t)>
///   W3(τ) = <a†(t+τ) a(t+τ) a(t)>
struct NodeBlocks {
  double weight = 1.0;
  double delta = 0.0;
  complexd C{};
  double F = 0.0;
  ModeSum Q, T2, G1, W2, W3;
};

/// Builds NodeBlocks for the emitter at an explicit detuning (the drive and
/// decay parameters are taken from p; p.delta is ignored in favor of delta).
inline NodeBlocks make_blocks(const EmitterParams& p, double delta, double weight) {
  const Superoperator m = build_liouvillian(p, delta);
  const DensityMatrix rho = steady_state_of(m);
  const FieldOperator a = field_operator(p);
  const Matrix2c rho_m = rho.to_matrix();
  const Matrix2c a_op = a.op;
  const Matrix2c a_dag = a.dagger();
  const Matrix2c eye = Matrix2c::Identity();

  NodeBlocks nb;
  nb.weight = weight;
  nb.delta = delta;
  nb.C = (a_op * rho_m).trace();
  nb.F = ((a_dag * a_op) * rho_m).trace().real();

  const Vector4c seed_a_rho = vectorize(a_op * rho_m);
  const Vector4c seed_rho_adag = vectorize(rho_m * a_dag);
  const Vector4c seed_a_rho_adag = vectorize(a_op * rho_m * a_dag);

  const RowVector4c f_a = trace_functional(a_op, eye);
  const RowVector4c f_a_adag = trace_functional(a_op, a_dag);

  auto prop = std::make_shared<const Propagator>(m);
  auto build = [&](const RowVector4c& f, const Vector4c& seed) -> ModeSum {
    if (prop->eigenbasis_ok()) {
      const Vector4c c = prop->mode_coefficients(f, seed);
      const Vector4c lam = prop->eigenvalues();
      std::array<complexd, 4> coeff{}, rates{};
      for (int k = 0; k < 4; ++k) {
        coeff[static_cast<std::size_t>(k)] = c(k);
        rates[static_cast<std::size_t>(k)] = lam(k);
      }
      return ModeSum::exact(coeff, rates);
    }
    return ModeSum::numeric(prop, f, seed);
  };

  nb.Q = build(f_a_adag, seed_a_rho_adag);
  nb.T2 = build(f_a, seed_a_rho);
  nb.G1 = build(f_a, seed_rho_adag);
  nb.W2 = build(f_a, seed_a_rho_adag);
  nb.W3 = build(f_a_adag, seed_a_rho);
  return nb;
}

/// NodeBlocks at every spectral-diffusion quadrature node.  With
/// sigma_sd == 0 the list collapses to a single unit-weight node at the bare
/// detuning.
inline std::vector<NodeBlocks> sd_blocks(const EmitterParams& p, int sd_nodes = 21) {
  p.validate();
  if (p.sigma_sd == 0.0) {
    std::vector<NodeBlocks> out;
    out.push_back(make_blocks(p, p.delta, 1.0));
    return out;
  }
  const QuadratureRule rule = gauss_hermite(sd_nodes);
  std::vector<NodeBlocks> out;
  out.reserve(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    out.push_back(make_blocks(p, p.delta + p.sigma_sd * rule.nodes[i], rule.weights[i]));
  return out;
}

/// Hanbury Brown-Twiss intensity autocorrelation of the transmitted field,
/// averaged over slow spectral diffusion and smeared by the Gaussian detector
/// response.  Normalized so g2 -> 1 at large |tau|.
class HbtEngine {
 public:
  explicit HbtEngine(const EmitterParams& p, int sd_nodes = 21) : p_(p) {
    p_.validate();
    if (rabi_from_n(p_) == 0.0)
      throw param_error("g2: undefined at zero drive (photon flux vanishes)");
    blocks_ = sd_blocks(p_, sd_nodes);
    mean_f2_ = 0.0;
    mean_f_ = 0.0;
    for (const NodeBlocks& nb : blocks_) {
      mean_f2_ += nb.weight * nb.F * nb.F;
      mean_f_ += nb.weight * nb.F;
    }
    if (!(mean_f2_ > 0.0)) throw numeric_error("g2: flux normalization vanished");
  }

  /// Unnormalized, unsmeared G2(tau) averaged over spectral diffusion.
  /// Even in tau by stationarity and detector exchange.
  double raw(double tau) const {
    const double t = std::abs(tau);
    double acc = 0.0;
    for (const NodeBlocks& nb : blocks_) acc += nb.weight * nb.Q.eval(t).real();
    return acc;
  }

  /// Normalized g2(tau) including detector-response smearing.
  double value(double tau) const {
    if (!std::isfinite(tau)) throw param_error("g2: tau must be finite");
    if (p_.sigma_irf == 0.0) return raw(tau) / mean_f2_;
    const double smeared =
        convolve_irf([this](double s) { return raw(s); }, p_.sigma_irf, tau, {0.0});
    return smeared / mean_f2_;
  }

  double mean_flux() const { return mean_f_; }
  double mean_flux_sq() const { return mean_f2_; }
  const std::vector<NodeBlocks>& blocks() const { return blocks_; }

 private:
  EmitterParams p_;
  std::vector<NodeBlocks> blocks_;
  double mean_f2_ = 0.0;
  double mean_f_ = 0.0;
};

/// One-shot convenience wrapper around HbtEngine.
inline double g2_hbt(const EmitterParams& p, double tau, int sd_nodes = 21) {
  return HbtEngine(p, sd_nodes).value(tau);
}

}  // namespace escat
