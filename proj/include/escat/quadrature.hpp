#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "escat/types.hpp"

namespace escat {

/// Nodes and weights of a quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Nodes/weights from the symmetric tridiagonal Jacobi matrix of the
// orthonormal recurrence (Golub-Welsch).  `offdiag` has length n-1; weights
// are mu0 * (first eigenvector component)^2.
inline QuadratureRule golub_welsch(const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    j(k, k + 1) = offdiag[static_cast<std::size_t>(k)];
    j(k + 1, k) = offdiag[static_cast<std::size_t>(k)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  if (es.info() != Eigen::Success) throw numeric_error("quadrature: eigensolver failed");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[static_cast<std::size_t>(k)] = mu0 * v0 * v0;
  }
  return rule;
}

// Enforces the exact +/- symmetry of the node set (nodes come out sorted).
inline void symmetrize(QuadratureRule& rule) {
  const std::size_t n = rule.nodes.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
}

}  // namespace detail

/// Gauss-Hermite rule adapted to averaging over a unit Gaussian probability
/// density: integral of f against N(0, 1) ~= sum w_i f(x_i) with the weights
/// normalized to sum exactly to 1.  Node count must be odd so that the center
/// of the distribution is always sampled.
inline QuadratureRule gauss_hermite(int n) {
  if (n < 1 || n % 2 == 0) throw param_error("gauss_hermite: node count must be odd and >= 1");
  std::vector<double> off(static_cast<std::size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k) off[static_cast<std::size_t>(k)] = std::sqrt(0.5 * (k + 1));
  QuadratureRule rule = detail::golub_welsch(off, 1.0);
  detail::symmetrize(rule);
  // Map physicists' nodes (weight e^{-x^2}) to unit-variance Gaussian nodes.
  for (double& x : rule.nodes) x *= std::sqrt(2.0);
  double sum = 0.0;
  for (double w : rule.weights) sum += w;
  for (double& w : rule.weights) w /= sum;
  return rule;
}

/// Gauss-Legendre rule on [-1, 1]; weights sum to 2.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw param_error("gauss_legendre: node count must be >= 1");
  std::vector<double> off(static_cast<std::size_t>(n - 1));
  for (int k = 1; k < n; ++k)
    off[static_cast<std::size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
  QuadratureRule rule = detail::golub_welsch(off, 2.0);
  detail::symmetrize(rule);
  double sum = 0.0;
  for (double w : rule.weights) sum += w;
  for (double& w : rule.weights) w *= 2.0 / sum;
  return rule;
}

/// Average of f(delta) over the slow spectral-diffusion distribution
/// N(0, sigma_sd^2).  sigma_sd = 0 returns f(0) exactly.
inline double average_sd(const std::function<double(double)>& f, double sigma_sd, int nodes = 21) {
  if (!std::isfinite(sigma_sd) || sigma_sd < 0.0)
    throw param_error("average_sd: sigma_sd must be finite and >= 0");
  if (sigma_sd == 0.0) {
    const double v = f(0.0);
    if (!std::isfinite(v)) throw numeric_error("average_sd: non-finite integrand value");
    return v;
  }
  const QuadratureRule rule = gauss_hermite(nodes);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = f(sigma_sd * rule.nodes[i]);
    if (!std::isfinite(v)) throw numeric_error("average_sd: non-finite integrand value");
    acc += rule.weights[i] * v;
  }
  return acc;
}

/// One evaluation point of the discretized detector-response convolution.
struct IrfNode {
  double s;  ///< evaluation time
  double w;  ///< weight (includes the Gaussian kernel and renormalization)
};

/// Quadrature stencil for (P_sigma * g)(tau) = integral P_sigma(s - tau) g(s) ds
/// over the window |s - tau| <= window_sigmas * sigma.  Panels are split at the
/// listed kink locations of g (e.g. s = 0 for two-sided correlation functions)
/// and subdivided to at most one sigma per panel with `panel_points`-node
/// Gauss-Legendre quadrature.  The kernel is renormalized on the truncated
/// window so that constants are reproduced exactly.
inline std::vector<IrfNode> irf_nodes(double sigma, double tau, const std::vector<double>& kinks = {},
                                      double window_sigmas = 6.0, int panel_points = 20) {
  if (!std::isfinite(sigma) || sigma <= 0.0) throw param_error("irf_nodes: sigma must be finite and > 0");
  if (!std::isfinite(tau)) throw param_error("irf_nodes: tau must be finite");
  if (window_sigmas <= 0.0) throw param_error("irf_nodes: window_sigmas must be > 0");
  const double lo = tau - window_sigmas * sigma;
  const double hi = tau + window_sigmas * sigma;

  std::vector<double> edges{lo, hi};
  for (double k : kinks) {
    if (std::isfinite(k) && k > lo && k < hi) edges.push_back(k);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  static thread_local int cached_points = -1;
  static thread_local QuadratureRule cached_rule;
  if (cached_points != panel_points) {
    cached_rule = gauss_legendre(panel_points);
    cached_points = panel_points;
  }
  const QuadratureRule& gl = cached_rule;

  const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * units::pi));
  std::vector<IrfNode> out;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double a = edges[e];
    const double b = edges[e + 1];
    const int sub = std::max(1, static_cast<int>(std::ceil((b - a) / sigma)));
    const double step = (b - a) / sub;
    for (int m = 0; m < sub; ++m) {
      const double mid = a + (m + 0.5) * step;
      const double half = 0.5 * step;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double s = mid + half * gl.nodes[q];
        const double z = (s - tau) / sigma;
        out.push_back(IrfNode{s, half * gl.weights[q] * inv_norm * std::exp(-0.5 * z * z)});
      }
    }
  }
  double mass = 0.0;
  for (const IrfNode& n : out) mass += n.w;
  if (!(mass > 0.0)) throw numeric_error("irf_nodes: kernel mass vanished");
  for (IrfNode& n : out) n.w /= mass;
  return out;
}

/// Gaussian detector-response smearing of g at time tau.  sigma_irf = 0
/// returns g(tau) exactly.
inline double convolve_irf(const std::function<double(double)>& g, double sigma_irf, double tau,
                           const std::vector<double>& kinks = {}, double window_sigmas = 6.0) {
  if (!std::isfinite(sigma_irf) || sigma_irf < 0.0)
    throw param_error("convolve_irf: sigma_irf must be finite and >= 0");
  if (!std::isfinite(tau)) throw param_error("convolve_irf: tau must be finite");
  if (sigma_irf == 0.0) {
    const double v = g(tau);
    if (!std::isfinite(v)) throw numeric_error("convolve_irf: non-finite integrand value");
    return v;
  }
  double acc = 0.0;
  for (const IrfNode& n : irf_nodes(sigma_irf, tau, kinks, window_sigmas)) {
    const double v = g(n.s);
    if (!std::isfinite(v)) throw numeric_error("convolve_irf: non-finite integrand value");
    acc += n.w * v;
  }
  return acc;
}

}  // namespace escat
