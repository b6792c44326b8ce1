#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "escat/types.hpp"

namespace escat {

/// Generator M of the master equation d/dt vec(rho) = M vec(rho) for the
/// coherently driven two-level emitter, in the row-major (ee, eg, ge, gg)
/// vectorization.  Includes radiative decay at gamma_total, pure dephasing at
/// gamma_d and the classical drive at the Rabi frequency set by n_photons.
/// `delta_override`, when given, replaces p.delta (used for spectral-diffusion
/// averaging and detuning scans).
inline Superoperator build_liouvillian(const EmitterParams& p,
                                       std::optional<double> delta_override = std::nullopt) {
  p.validate();
  const double gamma = p.gamma_total;
  const double gd = p.gamma_d;
  const double delta = delta_override.value_or(p.delta);
  if (!std::isfinite(delta)) throw param_error("build_liouvillian: delta must be finite");
  const double omega = rabi_from_n(p);

  const complexd i(0.0, 1.0);
  const complexd hw = i * (0.5 * omega);  // i*Omega/2

  Superoperator m = Superoperator::Zero();
  // d(ee) = -Gamma*ee + i*Omega/2*(eg - ge)
  m(idx_ee, idx_ee) = -gamma;
  m(idx_ee, idx_eg) = hw;
  m(idx_ee, idx_ge) = -hw;
  // d(eg) = i*Omega/2*(ee - gg) - (Gamma/2 + gamma_d + i*delta)*eg
  m(idx_eg, idx_ee) = hw;
  m(idx_eg, idx_eg) = complexd(-0.5 * gamma - gd, -delta);
  m(idx_eg, idx_gg) = -hw;
  // d(ge) = -i*Omega/2*(ee - gg) - (Gamma/2 + gamma_d - i*delta)*ge
  m(idx_ge, idx_ee) = -hw;
  m(idx_ge, idx_ge) = complexd(-0.5 * gamma - gd, delta);
  m(idx_ge, idx_gg) = hw;
  // d(gg) = +Gamma*ee - i*Omega/2*(eg - ge)
  m(idx_gg, idx_ee) = gamma;
  m(idx_gg, idx_eg) = -hw;
  m(idx_gg, idx_ge) = hw;
  return m;
}

/// Unique trace-one steady state of the generator, via the SVD nullspace of M.
/// Throws numeric_error if the nullspace is not one-dimensional or cannot be
/// trace-normalized.
inline DensityMatrix steady_state_of(const Superoperator& m) {
  Eigen::JacobiSVD<Matrix4c> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = sv(0);
  if (!(scale > 0.0)) throw numeric_error("steady_state: generator is identically zero");
  if (sv(2) <= 1e-10 * scale)
    throw numeric_error("steady_state: degenerate generator (nullspace dimension > 1)");
  Vector4c v = svd.matrixV().col(3);
  const complexd tr = v(idx_ee) + v(idx_gg);
  if (std::abs(tr) < 1e-12 * v.norm())
    throw numeric_error("steady_state: null vector is traceless; cannot normalize");
  v /= tr;
  DensityMatrix rho = DensityMatrix::from_vector(v);
  // The exact steady state is Hermitian; remove rounding-level asymmetry.
  rho.ee = complexd(rho.ee.real(), 0.0);
  rho.gg = complexd(rho.gg.real(), 0.0);
  const complexd coh = 0.5 * (rho.eg + std::conj(rho.ge));
  rho.eg = coh;
  rho.ge = std::conj(coh);
  return rho;
}

inline DensityMatrix steady_state(const EmitterParams& p) {
  return steady_state_of(build_liouvillian(p));
}

/// Steady state with the detuning replaced by `delta`.
inline DensityMatrix steady_state_at(const EmitterParams& p, double delta) {
  return steady_state_of(build_liouvillian(p, delta));
}

/// Time-evolution operator exp(M t) evaluated through the eigendecomposition of
/// M when it is well conditioned, with a dense matrix-exponential fallback when
/// the eigenvector basis is ill conditioned (near an exceptional point).
class Propagator {
 public:
  explicit Propagator(const Superoperator& m, double cond_limit = 1e8) : m_(m) {
    Eigen::ComplexEigenSolver<Matrix4c> es(m);
    if (es.info() == Eigen::Success) {
      const Matrix4c v = es.eigenvectors();
      Eigen::JacobiSVD<Matrix4c> svd(v);
      const double smin = svd.singularValues()(3);
      const double smax = svd.singularValues()(0);
      if (smin > 0.0 && std::isfinite(smax / smin) && smax / smin <= cond_limit) {
        eigen_ok_ = true;
        v_ = v;
        vinv_ = v.inverse();
        lam_ = es.eigenvalues();
      }
    }
  }

  bool eigenbasis_ok() const { return eigen_ok_; }

  /// Eigenvalues of M (only meaningful when eigenbasis_ok()).
  const Vector4c& eigenvalues() const {
    require_eigen();
    return lam_;
  }

  /// Index of the stationary mode (smallest |eigenvalue|).
  int zero_mode_index() const {
    require_eigen();
    int k = 0;
    double best = std::abs(lam_(0));
    for (int j = 1; j < 4; ++j) {
      const double a = std::abs(lam_(j));
      if (a < best) {
        best = a;
        k = j;
      }
    }
    return k;
  }

  Vector4c apply(double t, const Vector4c& v) const {
    check_time(t);
    if (eigen_ok_) {
      Vector4c coeff = vinv_ * v;
      for (int k = 0; k < 4; ++k) coeff(k) *= std::exp(lam_(k) * t);
      return v_ * coeff;
    }
    return matrix(t) * v;
  }

  Matrix4c matrix(double t) const {
    check_time(t);
    if (eigen_ok_) {
      Vector4c e;
      for (int k = 0; k < 4; ++k) e(k) = std::exp(lam_(k) * t);
      return v_ * e.asDiagonal() * vinv_;
    }
    return (m_ * t).exp();
  }

  /// Coefficients c_k of the scalar mode expansion
  ///   f * exp(M t) * seed = sum_k c_k exp(lambda_k t)
  /// for a row functional f and column seed (eigen path only).
  Vector4c mode_coefficients(const RowVector4c& f, const Vector4c& seed) const {
    require_eigen();
    const RowVector4c fv = f * v_;
    const Vector4c sv = vinv_ * seed;
    Vector4c c;
    for (int k = 0; k < 4; ++k) c(k) = fv(k) * sv(k);
    return c;
  }

 private:
  static void check_time(double t) {
    if (!std::isfinite(t) || t < 0.0) throw param_error("Propagator: time must be finite and >= 0");
  }
  void require_eigen() const {
    if (!eigen_ok_) throw numeric_error("Propagator: eigenvector basis unavailable (ill conditioned)");
  }

  Superoperator m_;
  bool eigen_ok_ = false;
  Matrix4c v_ = Matrix4c::Zero();
  Matrix4c vinv_ = Matrix4c::Zero();
  Vector4c lam_ = Vector4c::Zero();
};

/// Propagates a vectorized 2x2 operator for a time t >= 0.
inline Vector4c propagate(const Superoperator& m, const Vector4c& rho, double t) {
  if (!rho.allFinite()) throw param_error("propagate: state vector must be finite");
  return Propagator(m).apply(t, rho);
}

}  // namespace escat
