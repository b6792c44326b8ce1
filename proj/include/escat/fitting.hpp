#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "escat/calibration.hpp"
#include "escat/correlators.hpp"
#include "escat/scattering.hpp"
#include "escat/types.hpp"
#include "escat/units.hpp"

namespace escat {

/// Column-labeled numeric table (the on-disk form is CSV; see the io layer).
struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }

  std::size_t column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw param_error("dataset: missing column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  void validate() const {
    if (columns.empty()) throw param_error("dataset: no columns");
    if (rows.empty()) throw param_error("dataset: no rows");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != columns.size())
        throw param_error("dataset: row " + std::to_string(r + 1) + " has " +
                          std::to_string(rows[r].size()) + " fields, expected " +
                          std::to_string(columns.size()));
      for (double v : rows[r])
        if (!std::isfinite(v))
          throw param_error("dataset: non-finite value in row " + std::to_string(r + 1));
    }
  }
};

struct NelderMeadOptions {
  int max_iter = 500;        ///< iterations per restart pass
  double f_tol = 1e-14;      ///< relative objective-spread convergence target
  double x_tol = 1e-10;      ///< simplex-extent convergence target
  double init_scale = 0.1;   ///< relative size of the initial simplex
  int restarts = 2;          ///< total passes; each restart shrinks around the best point
};

struct NelderMeadResult {
  std::vector<double> x;
  double fval = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free downhill-simplex minimizer with restart-from-best.  The
/// reported value is the best point ever evaluated (monotone in the number of
/// evaluations); a non-converged run still returns the best point found.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                                    const std::vector<double>& x0,
                                    const NelderMeadOptions& opt = {}) {
  if (x0.empty()) throw param_error("nelder_mead: empty initial point");
  if (opt.max_iter < 1 || opt.restarts < 1)
    throw param_error("nelder_mead: iteration and restart budgets must be >= 1");
  if (!(opt.init_scale > 0.0)) throw param_error("nelder_mead: init_scale must be > 0");
  const std::size_t dim = x0.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  NelderMeadResult best;
  best.x = x0;
  best.fval = fn(x0);
  if (!std::isfinite(best.fval)) throw numeric_error("nelder_mead: objective non-finite at start");

  auto track = [&best](const std::vector<double>& x, double f) {
    if (f < best.fval) {
      best.fval = f;
      best.x = x;
    }
  };

  double scale = opt.init_scale;
  for (int pass = 0; pass < opt.restarts; ++pass) {
    std::vector<std::vector<double>> xs(dim + 1, best.x);
    std::vector<double> fs(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) {
      const double h = scale * (xs[i + 1][i] != 0.0 ? std::abs(xs[i + 1][i]) : 1.0);
      xs[i + 1][i] += h;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
      fs[i] = fn(xs[i]);
      track(xs[i], fs[i]);
    }

    bool pass_converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      ++best.iterations;
      // Order: xs[order[0]] best, xs[order[dim]] worst.
      std::vector<std::size_t> order(dim + 1);
      for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&fs](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
      const std::size_t ib = order[0], iw = order[dim], is = order[dim - 1];

      double extent = 0.0;
      for (std::size_t i = 0; i <= dim; ++i)
        for (std::size_t k = 0; k < dim; ++k)
          extent = std::max(extent, std::abs(xs[i][k] - xs[ib][k]) / (1.0 + std::abs(xs[ib][k])));
      const double spread = fs[iw] - fs[ib];
      if (spread <= opt.f_tol * (std::abs(fs[ib]) + opt.f_tol) || extent <= opt.x_tol) {
        pass_converged = true;
        break;
      }

      std::vector<double> centroid(dim, 0.0);
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == iw) continue;
        for (std::size_t k = 0; k < dim; ++k) centroid[k] += xs[i][k];
      }
      for (double& c : centroid) c /= static_cast<double>(dim);

      auto along = [&](double coef) {
        std::vector<double> x(dim);
        for (std::size_t k = 0; k < dim; ++k) x[k] = centroid[k] + coef * (centroid[k] - xs[iw][k]);
        return x;
      };

      const std::vector<double> xr = along(alpha);
      const double fr = fn(xr);
      track(xr, fr);
      if (fr < fs[ib]) {
        const std::vector<double> xe = along(gamma);
        const double fe = fn(xe);
        track(xe, fe);
        if (fe < fr) {
          xs[iw] = xe;
          fs[iw] = fe;
        } else {
          xs[iw] = xr;
          fs[iw] = fr;
        }
        continue;
      }
      if (fr < fs[is]) {
        xs[iw] = xr;
        fs[iw] = fr;
        continue;
      }
      // Contraction (outside if the reflection improved on the worst).
      const std::vector<double> xc = along(fr < fs[iw] ? rho : -rho);
      const double fc = fn(xc);
      track(xc, fc);
      if (fc < std::min(fr, fs[iw])) {
        xs[iw] = xc;
        fs[iw] = fc;
        continue;
      }
      // Shrink toward the best vertex.
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == ib) continue;
        for (std::size_t k = 0; k < dim; ++k) xs[i][k] = xs[ib][k] + sigma * (xs[i][k] - xs[ib][k]);
        fs[i] = fn(xs[i]);
        track(xs[i], fs[i]);
      }
    }
    best.converged = pass_converged;
    scale *= 0.25;
  }
  return best;
}

/// Named fitted parameters with the final residual.
struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;

  double value_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values[i];
    throw param_error("FitResult: no parameter named '" + name + "'");
  }
};

namespace detail {

inline constexpr double fit_penalty = 1e100;

inline void check_free_names(const std::vector<std::string>& free_names,
                             const std::vector<std::string>& allowed) {
  if (free_names.empty()) throw param_error("fit: empty free-parameter set");
  for (std::size_t i = 0; i < free_names.size(); ++i) {
    if (std::find(allowed.begin(), allowed.end(), free_names[i]) == allowed.end())
      throw param_error("fit: unknown free parameter '" + free_names[i] + "'");
    for (std::size_t j = i + 1; j < free_names.size(); ++j)
      if (free_names[i] == free_names[j])
        throw param_error("fit: duplicate free parameter '" + free_names[i] + "'");
  }
}

// Applies a free-parameter vector onto a parameter set; returns false when
// any value leaves its physical domain (penalty wall for the optimizer).
inline bool apply_free(const std::vector<std::string>& names, const std::vector<double>& x,
                       EmitterParams& p, PowerCalibration& cal) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double v = x[i];
    if (!std::isfinite(v)) return false;
    if (names[i] == "eta") {
      if (v <= 0.0) return false;
      cal.eta = v;
    } else if (names[i] == "beta") {
      if (v <= 0.0 || v > 1.0) return false;
      p.beta = v;
    } else if (names[i] == "sigma_sd") {
      if (v < 0.0) return false;
      p.sigma_sd = v;
    } else if (names[i] == "gamma_d") {
      if (v < 0.0) return false;
      p.gamma_d = v;
    }
  }
  return true;
}

}  // namespace detail

/// Weighted least-squares fit of the transmission map.  Dataset columns:
/// detuning_GHz, one of {n, power_uW}, value, optional weight.  Free
/// parameters from {eta, beta, sigma_sd, gamma_d}; fitting eta requires the
/// power_uW drive column (eta only enters through the power-to-n conversion).
inline FitResult fit_transmission_map(const Dataset& data,
                                      const std::vector<std::string>& free_names,
                                      const EmitterParams& init, const PowerCalibration& cal = {},
                                      const NelderMeadOptions& opt = {}, int sd_nodes = 21) {
  data.validate();
  init.validate();
  cal.validate();
  detail::check_free_names(free_names, {"eta", "beta", "sigma_sd", "gamma_d"});

  const std::size_t i_det = data.column_index("detuning_GHz");
  const bool has_n = data.has_column("n");
  const bool has_p = data.has_column("power_uW");
  if (has_n == has_p)
    throw param_error("fit_transmission_map: need exactly one drive column, 'n' or 'power_uW'");
  if (!has_p &&
      std::find(free_names.begin(), free_names.end(), "eta") != free_names.end())
    throw param_error("fit_transmission_map: fitting 'eta' requires the 'power_uW' drive column");
  const std::size_t i_drive = data.column_index(has_n ? "n" : "power_uW");
  const std::size_t i_val = data.column_index("value");
  const bool has_w = data.has_column("weight");
  const std::size_t i_w = has_w ? data.column_index("weight") : 0;
  if (data.rows.size() < free_names.size())
    throw param_error("fit_transmission_map: fewer data rows than free parameters");
  for (std::size_t r = 0; r < data.rows.size(); ++r)
    if (data.rows[r][i_drive] <= 0.0)
      throw param_error("fit_transmission_map: drive must be > 0 in every row (row " +
                        std::to_string(r + 1) + ")");

  std::vector<double> x0;
  for (const std::string& name : free_names) {
    if (name == "eta")
      x0.push_back(cal.eta);
    else if (name == "beta")
      x0.push_back(init.beta);
    else if (name == "sigma_sd")
      x0.push_back(init.sigma_sd);
    else
      x0.push_back(init.gamma_d);
  }

  auto objective = [&](const std::vector<double>& x) -> double {
    EmitterParams p = init;
    PowerCalibration c = cal;
    if (!detail::apply_free(free_names, x, p, c)) return detail::fit_penalty;
    double ssr = 0.0;
    try {
      for (const std::vector<double>& row : data.rows) {
        EmitterParams q = p;
        q.delta = units::ghz_to_angular(row[i_det]);
        q.n_photons = has_n ? row[i_drive]
                            : n_from_power(row[i_drive], q.beta, q.gamma_total, c);
        const double model = transmission_intensity(q, sd_nodes);
        const double d = model - row[i_val];
        ssr += (has_w ? row[i_w] : 1.0) * d * d;
      }
    } catch (const std::exception&) {
      return detail::fit_penalty;
    }
    return ssr;
  };

  const NelderMeadResult nm = nelder_mead(objective, x0, opt);
  FitResult out;
  out.names = free_names;
  out.values = nm.x;
  out.residual = nm.fval;
  out.iterations = nm.iterations;
  out.converged = nm.converged;
  return out;
}

/// Joint least-squares fit of (beta, sigma_sd) to bunching curves versus
/// drive strength.  Dataset columns: tau_ns, n, g2, optional weight; curves
/// at >= 3 distinct n values required.
inline FitResult fit_g2_saturation(const Dataset& data, const std::vector<std::string>& free_names,
                                   const EmitterParams& init, const NelderMeadOptions& opt = {},
                                   int sd_nodes = 21) {
  data.validate();
  init.validate();
  detail::check_free_names(free_names, {"beta", "sigma_sd"});

  const std::size_t i_tau = data.column_index("tau_ns");
  const std::size_t i_n = data.column_index("n");
  const std::size_t i_g2 = data.column_index("g2");
  const bool has_w = data.has_column("weight");
  const std::size_t i_w = has_w ? data.column_index("weight") : 0;

  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    if (data.rows[r][i_n] <= 0.0)
      throw param_error("fit_g2_saturation: n must be > 0 in every row (row " +
                        std::to_string(r + 1) + ")");
    groups[data.rows[r][i_n]].push_back(r);
  }
  if (groups.size() < 3)
    throw param_error("fit_g2_saturation: need curves at >= 3 distinct n values, got " +
                      std::to_string(groups.size()));

  std::vector<double> x0;
  for (const std::string& name : free_names)
    x0.push_back(name == "beta" ? init.beta : init.sigma_sd);

  PowerCalibration unused_cal;
  auto objective = [&](const std::vector<double>& x) -> double {
    EmitterParams p = init;
    if (!detail::apply_free(free_names, x, p, unused_cal)) return detail::fit_penalty;
    double ssr = 0.0;
    try {
      for (const auto& [n_value, row_ids] : groups) {
        EmitterParams q = p;
        q.n_photons = n_value;
        const HbtEngine engine(q, sd_nodes);
        for (std::size_t r : row_ids) {
          const double d = engine.value(data.rows[r][i_tau]) - data.rows[r][i_g2];
          ssr += (has_w ? data.rows[r][i_w] : 1.0) * d * d;
        }
      }
    } catch (const std::exception&) {
      return detail::fit_penalty;
    }
    return ssr;
  };

  const NelderMeadResult nm = nelder_mead(objective, x0, opt);
  FitResult out;
  out.names = free_names;
  out.values = nm.x;
  out.residual = nm.fval;
  out.iterations = nm.iterations;
  out.converged = nm.converged;
  return out;
}

/// Two-stage calibration protocol: the decay rate and dephasing are held
/// fixed at their configured values, eta is extracted from the transmission
/// map, then (beta, sigma_sd) are fitted jointly to the bunching curves.
struct ProtocolResult {
  FitResult transmission_stage;
  FitResult g2_stage;
  EmitterParams params;        ///< init with the fitted beta and sigma_sd applied
  PowerCalibration calibration;  ///< cal with the fitted eta applied
};

inline ProtocolResult fit_protocol(const Dataset& transmission_data, const Dataset& g2_data,
                                   const EmitterParams& init, const PowerCalibration& cal = {},
                                   const NelderMeadOptions& opt = {}, int sd_nodes = 21) {
  ProtocolResult out;
  out.transmission_stage =
      fit_transmission_map(transmission_data, {"eta"}, init, cal, opt, sd_nodes);
  out.calibration = cal;
  out.calibration.eta = out.transmission_stage.value_of("eta");
  out.g2_stage = fit_g2_saturation(g2_data, {"beta", "sigma_sd"}, init, opt, sd_nodes);
  out.params = init;
  out.params.beta = out.g2_stage.value_of("beta");
  out.params.sigma_sd = out.g2_stage.value_of("sigma_sd");
  return out;
}

}  // namespace escat
