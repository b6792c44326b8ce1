// escat command line: every subcommand loads a config, computes one table
// deterministically (same command -> same bytes), and writes it as CSV or
// JSON.  CSV output embeds the resolved config so it can be re-ingested with
// --config to reproduce the run.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "escat/escat.hpp"

namespace {

using escat::OutputTable;
using escat::RunConfig;
using escat::ordered_json;

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  std::string format_override;
  int threads = 1;
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--config", c.config_path,
                  "config file: JSON, or a CSV produced by this tool (the embedded "
                  "'# config_json:' line is used)")
      ->required();
  sub->add_option("--out", c.out_override, "output file (default: config output.path, else stdout)");
  sub->add_option("--format", c.format_override, "output encoding: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--threads", c.threads, "worker threads for scans")->check(CLI::PositiveNumber);
}

// Re-throws the caught exception with the scan point prepended, preserving
// the error category (and hence the exit code).
[[noreturn]] void annotate_and_rethrow(const std::string& where) {
  try {
    throw;
  } catch (const escat::param_error& e) {
    throw escat::param_error(where + ": " + e.what());
  } catch (const escat::numeric_error& e) {
    throw escat::numeric_error(where + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
}

OutputTable run_steady_state(const RunConfig& cfg, int) {
  const escat::EmitterParams p = cfg.emitter_params();
  const escat::DensityMatrix rho = escat::steady_state(p);
  OutputTable t;
  t.add_note("n", p.n_photons);
  t.add_note("rabi_rad_ns", escat::rabi_from_n(p));
  t.add_note("flux", escat::flux(p));
  t.add_note("flux_coherent", escat::flux_coherent(p));
  t.add_note("flux_incoherent", escat::flux_incoherent(p));
  t.columns = {"entry", "real", "imag"};
  t.rows = {{"ee", rho.ee.real(), rho.ee.imag()},
            {"eg", rho.eg.real(), rho.eg.imag()},
            {"ge", rho.ge.real(), rho.ge.imag()},
            {"gg", rho.gg.real(), rho.gg.imag()}};
  return t;
}

OutputTable run_g2(const RunConfig& cfg, int threads) {
  const escat::EmitterParams p = cfg.emitter_params();
  const escat::HbtEngine engine(p, cfg.sd_nodes);
  const std::vector<double> tau = escat::linspace(cfg.g2_tau_min_ns, cfg.g2_tau_max_ns, cfg.g2_points);
  std::vector<double> val(tau.size());
  escat::parallel_for(tau.size(), threads, [&](std::size_t i) {
    try {
      val[i] = engine.value(tau[i]);
    } catch (...) {
      annotate_and_rethrow("g2 scan at tau_ns=" + escat::fmt_double(tau[i]));
    }
  });
  OutputTable t;
  t.add_note("flux", engine.mean_flux());
  t.add_note("g2_zero", engine.value(0.0));
  t.columns = {"tau_ns", "g2"};
  for (std::size_t i = 0; i < tau.size(); ++i) t.rows.push_back({tau[i], val[i]});
  return t;
}

OutputTable run_franson(const RunConfig& cfg, int) {
  const escat::EmitterParams p = cfg.emitter_params();
  const escat::FransonEngine engine(p, cfg.sd_nodes);
  const std::vector<double> tau =
      escat::symmetric_grid(cfg.franson_half_width_ns, cfg.franson_points);
  const escat::FransonHistogram h =
      escat::franson_histogram(engine, cfg.phi_a, cfg.phi_b, tau, cfg.delay_ns);
  OutputTable t;
  t.add_note("phi_a", cfg.phi_a);
  t.add_note("phi_b", cfg.phi_b);
  t.add_note("delay_ns", h.delay);
  t.add_note("baseline", h.baseline);
  t.columns = {"tau_ns", "total", "center", "side_plus", "side_minus"};
  for (std::size_t i = 0; i < h.tau.size(); ++i)
    t.rows.push_back({h.tau[i], h.total[i], h.center[i], h.side_plus[i], h.side_minus[i]});
  return t;
}

OutputTable run_visibility(const RunConfig& cfg, int) {
  const escat::EmitterParams p = cfg.emitter_params();
  const escat::FransonEngine engine(p, cfg.sd_nodes);
  const escat::VisibilityScan scan =
      escat::interference_visibility(engine, cfg.phi_a, cfg.visibility_points);
  OutputTable t;
  t.add_note("phi_a", cfg.phi_a);
  t.add_note("visibility", scan.visibility);
  t.columns = {"phi_b", "rate"};
  for (std::size_t i = 0; i < scan.phi_b.size(); ++i)
    t.rows.push_back({scan.phi_b[i], scan.rate[i]});
  return t;
}

OutputTable run_chsh(const RunConfig& cfg, int threads) {
  escat::EmitterParams p = cfg.emitter_params();
  const escat::ChshSettings settings = cfg.chsh_settings();
  const escat::PowerCalibration cal = cfg.power_calibration();
  const std::vector<double> n_grid = escat::logspace(cfg.chsh_n_min, cfg.chsh_n_max, cfg.chsh_points);
  std::vector<double> s_val(n_grid.size()), pump(n_grid.size());
  escat::parallel_for(n_grid.size(), threads, [&](std::size_t i) {
    try {
      escat::EmitterParams pi = p;
      pi.n_photons = n_grid[i];
      s_val[i] = escat::chsh_S(pi, settings, cfg.sd_nodes);
      pump[i] = escat::pump_power_from_n_pW(n_grid[i], cal);
    } catch (...) {
      annotate_and_rethrow("chsh scan at n=" + escat::fmt_double(n_grid[i]));
    }
  });
  OutputTable t;
  t.columns = {"n", "P_pump_pW", "S"};
  for (std::size_t i = 0; i < n_grid.size(); ++i) t.rows.push_back({n_grid[i], pump[i], s_val[i]});
  return t;
}

OutputTable run_transmission(const RunConfig& cfg, int threads) {
  const escat::EmitterParams p = cfg.emitter_params();
  const std::vector<double> n_grid =
      escat::logspace(cfg.trans_n_min, cfg.trans_n_max, cfg.trans_n_points);
  const std::vector<double> det_GHz = escat::linspace(
      cfg.trans_detuning_min_GHz, cfg.trans_detuning_max_GHz, cfg.trans_detuning_points);
  std::vector<double> det(det_GHz.size());
  for (std::size_t j = 0; j < det_GHz.size(); ++j) det[j] = escat::units::ghz_to_angular(det_GHz[j]);
  std::vector<std::vector<double>> value(n_grid.size());
  escat::parallel_for(n_grid.size(), threads, [&](std::size_t i) {
    try {
      const escat::TransmissionMap row = escat::transmission_map(p, {n_grid[i]}, det, cfg.sd_nodes);
      value[i] = row.value.front();
    } catch (...) {
      annotate_and_rethrow("transmission scan at n=" + escat::fmt_double(n_grid[i]));
    }
  });
  OutputTable t;
  t.columns = {"n", "detuning_GHz", "transmission"};
  for (std::size_t i = 0; i < n_grid.size(); ++i)
    for (std::size_t j = 0; j < det_GHz.size(); ++j)
      t.rows.push_back({n_grid[i], det_GHz[j], value[i][j]});
  return t;
}

OutputTable run_jsi(const RunConfig& cfg, int) {
  const escat::EmitterParams p = cfg.emitter_params();
  const std::vector<double> axis_GHz = escat::symmetric_grid(cfg.jsi_delta_max_GHz, cfg.jsi_points);
  std::vector<double> axis(axis_GHz.size());
  for (std::size_t i = 0; i < axis.size(); ++i) axis[i] = escat::units::ghz_to_angular(axis_GHz[i]);
  const double gamma_l = escat::units::ghz_to_angular(cfg.gamma_l_GHz);
  const escat::JointSpectralIntensity jsi =
      escat::joint_spectral_intensity(p, axis, axis, gamma_l);
  OutputTable t;
  t.add_note("gamma_l_GHz", cfg.gamma_l_GHz);
  t.columns = {"delta_a_GHz", "delta_b_GHz", "value"};
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < axis.size(); ++j)
      t.rows.push_back({axis_GHz[i], axis_GHz[j], jsi.value[i][j]});
  return t;
}

OutputTable run_jti(const RunConfig& cfg, int) {
  const escat::EmitterParams p = cfg.emitter_params();
  const std::vector<double> axis = escat::symmetric_grid(cfg.jti_t_max_ns, cfg.jti_points);
  const double gamma_l = escat::units::ghz_to_angular(cfg.gamma_l_GHz);
  const escat::JointTemporalIntensity jti = escat::joint_temporal_intensity(p, axis, axis, gamma_l);
  OutputTable t;
  t.add_note("gamma_l_GHz", cfg.gamma_l_GHz);
  t.columns = {"t_a_ns", "t_b_ns", "value"};
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < axis.size(); ++j)
      t.rows.push_back({axis[i], axis[j], jti.value[i][j]});
  return t;
}

OutputTable run_spectrum(const RunConfig& cfg, int) {
  const escat::EmitterParams p = cfg.emitter_params();
  const std::vector<double> grid_GHz =
      escat::symmetric_grid(cfg.spectrum_omega_max_GHz, cfg.spectrum_points);
  std::vector<double> grid(grid_GHz.size());
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = escat::units::ghz_to_angular(grid_GHz[i]);
  const escat::EmissionSpectrum s = escat::emission_spectrum(p, grid);
  OutputTable t;
  t.add_note("coherent_weight", s.coherent_weight);
  t.add_note("incoherent_weight", s.incoherent_weight);
  t.add_note("flux", s.flux_value);
  // Densities are per ordinary frequency so that integrating against the
  // GHz axis recovers the quoted weights.
  t.columns = {"omega_GHz", "total_per_GHz", "incoherent_per_GHz"};
  for (std::size_t i = 0; i < grid.size(); ++i)
    t.rows.push_back({grid_GHz[i], escat::units::two_pi * s.total[i],
                      escat::units::two_pi * s.incoherent[i]});
  return t;
}

void append_fit_rows(OutputTable& t, const escat::FitResult& fit, const std::string& stage,
                     bool with_stage) {
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    if (with_stage)
      t.rows.push_back({stage, fit.names[i], fit.values[i]});
    else
      t.rows.push_back({fit.names[i], fit.values[i]});
  }
  const std::string prefix = with_stage ? stage + "_" : std::string();
  t.add_note(prefix + "residual", fit.residual);
  t.add_note(prefix + "iterations", static_cast<std::int64_t>(fit.iterations));
  t.add_note(prefix + "converged", fit.converged);
}

OutputTable run_fit(const RunConfig& cfg, const std::string& preset, const std::string& data_path,
                    const std::string& g2_data_path) {
  const escat::EmitterParams init = cfg.emitter_params();
  const escat::PowerCalibration cal = cfg.power_calibration();
  OutputTable t;
  if (preset == "transmission") {
    const escat::Dataset data = escat::load_dataset_csv(data_path);
    const escat::FitResult fit = escat::fit_transmission_map(data, {"eta"}, init, cal, {}, cfg.sd_nodes);
    t.columns = {"parameter", "value"};
    append_fit_rows(t, fit, "transmission", false);
  } else if (preset == "g2") {
    const escat::Dataset data = escat::load_dataset_csv(data_path);
    const escat::FitResult fit =
        escat::fit_g2_saturation(data, {"beta", "sigma_sd"}, init, {}, cfg.sd_nodes);
    t.columns = {"parameter", "value"};
    append_fit_rows(t, fit, "g2", false);
  } else if (preset == "protocol") {
    if (g2_data_path.empty())
      throw escat::param_error("fit: --preset protocol needs --g2-data");
    const escat::Dataset tdata = escat::load_dataset_csv(data_path);
    const escat::Dataset gdata = escat::load_dataset_csv(g2_data_path);
    const escat::ProtocolResult res = escat::fit_protocol(tdata, gdata, init, cal, {}, cfg.sd_nodes);
    t.columns = {"stage", "parameter", "value"};
    append_fit_rows(t, res.transmission_stage, "transmission", true);
    append_fit_rows(t, res.g2_stage, "g2", true);
  } else {
    throw escat::param_error("fit: unknown preset '" + preset + "'");
  }
  return t;
}

int dispatch(const std::string& name, const CommonOpts& common, const std::string& fit_preset,
             const std::string& fit_data, const std::string& fit_g2_data) {
  RunConfig cfg = escat::load_config(common.config_path);
  if (!common.out_override.empty()) cfg.out_path = common.out_override;
  if (!common.format_override.empty()) cfg.format = common.format_override;

  OutputTable table;
  if (name == "steady-state")
    table = run_steady_state(cfg, common.threads);
  else if (name == "g2")
    table = run_g2(cfg, common.threads);
  else if (name == "franson")
    table = run_franson(cfg, common.threads);
  else if (name == "visibility")
    table = run_visibility(cfg, common.threads);
  else if (name == "chsh")
    table = run_chsh(cfg, common.threads);
  else if (name == "transmission")
    table = run_transmission(cfg, common.threads);
  else if (name == "jsi")
    table = run_jsi(cfg, common.threads);
  else if (name == "jti")
    table = run_jti(cfg, common.threads);
  else if (name == "spectrum")
    table = run_spectrum(cfg, common.threads);
  else if (name == "fit")
    table = run_fit(cfg, fit_preset, fit_data, fit_g2_data);
  else
    throw escat::param_error("unknown subcommand '" + name + "'");

  std::ostringstream buf;
  escat::write_output(buf, name, cfg, table, cfg.format);
  if (cfg.out_path.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw escat::param_error("cannot open output file '" + cfg.out_path + "'");
    out << buf.str();
    if (!out) throw std::runtime_error("failed writing output file '" + cfg.out_path + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic simulator of photon scattering on a waveguide-coupled "
               "two-level emitter: steady state, interferometric photon correlations, "
               "CHSH scans, scattering spectra, and calibration fits"};
  app.set_version_flag("--version", std::string("escat ") + escat::version_string);
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> scans = {
      {"steady-state", "steady-state density matrix and emission flux"},
      {"g2", "detector-smeared intensity autocorrelation vs delay"},
      {"franson", "three-peak coincidence histogram behind the unbalanced interferometer"},
      {"visibility", "center-peak coincidence rate vs analysis phase, with visibility"},
      {"chsh", "CHSH parameter S vs drive strength (with pump power column)"},
      {"transmission", "transmitted intensity map vs drive strength and detuning"},
      {"jsi", "two-photon joint spectral intensity"},
      {"jti", "two-photon joint temporal intensity"},
      {"spectrum", "emission spectrum split into coherent and incoherent parts"},
  };

  std::map<std::string, CommonOpts> opts;
  for (const auto& [name, desc] : scans) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common(sub, opts[name]);
  }

  CLI::App* fit = app.add_subcommand("fit", "fit model parameters to measured tables");
  add_common(fit, opts["fit"]);
  std::string fit_preset, fit_data, fit_g2_data;
  fit->add_option("--preset", fit_preset, "what to fit: transmission (eta), g2 (beta, sigma_sd), "
                                          "or protocol (both stages)")
      ->required()
      ->check(CLI::IsMember({"transmission", "g2", "protocol"}));
  fit->add_option("--data", fit_data, "measured CSV table (columns per preset)")->required();
  fit->add_option("--g2-data", fit_g2_data, "second-stage CSV table for --preset protocol");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return dispatch(name, opts[name], fit_preset, fit_data, fit_g2_data);
  } catch (const escat::param_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const escat::numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
