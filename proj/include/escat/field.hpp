#pragma once

#include <cmath>

#include "escat/types.hpp"

namespace escat {

/// sigma_ge = |g><e| (lowering operator of the emitter).
inline Matrix2c sigma_ge() {
  Matrix2c m = Matrix2c::Zero();
  m(1, 0) = 1.0;
  return m;
}

/// sigma_eg = |e><g| (raising operator).
inline Matrix2c sigma_eg() {
  Matrix2c m = Matrix2c::Zero();
  m(0, 1) = 1.0;
  return m;
}

/// sigma_ee = |e><e|.
inline Matrix2c sigma_ee() {
  Matrix2c m = Matrix2c::Zero();
  m(0, 0) = 1.0;
  return m;
}

/// Transmitted-field operator within the emitter Hilbert space,
///   a = alpha*I - sqrt(beta*Gamma/2) * sigma_ge.
/// The identity coefficient alpha = -i*Omega/sqrt(2*beta*Gamma) carries the
/// coherent drive amplitude; its phase relative to the emitter term is fixed
/// so that the steady-state amplitude <a> reproduces the single-photon
/// transmission coefficient t(delta) = 1 - beta*Gamma/(Gamma + 2*gamma_d + 2*i*delta)
/// (on-resonance intensity dip (1-beta)^2 at weak drive).  |alpha|^2 = n*Gamma.
struct FieldOperator {
  Matrix2c op;       ///< 2x2 matrix representation
  complexd alpha;    ///< identity component
  double coupling;   ///< sqrt(beta*Gamma/2), coefficient of sigma_ge

  Matrix2c dagger() const { return op.adjoint(); }
};

inline FieldOperator field_operator(const EmitterParams& p) {
  p.validate();
  const double omega = rabi_from_n(p);
  const double c = std::sqrt(0.5 * p.beta * p.gamma_total);
  complexd alpha(0.0, 0.0);
  if (omega > 0.0) {
    // omega > 0 implies beta > 0 (validated), so the quotient is well defined.
    alpha = complexd(0.0, -omega / std::sqrt(2.0 * p.beta * p.gamma_total));
  }
  FieldOperator f;
  f.alpha = alpha;
  f.coupling = c;
  f.op = alpha * Matrix2c::Identity() - c * sigma_ge();
  return f;
}

}  // namespace escat
