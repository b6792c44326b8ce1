#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "escat/bell.hpp"
#include "escat/calibration.hpp"
#include "escat/fitting.hpp"
#include "escat/types.hpp"
#include "escat/units.hpp"
#include "escat/version.hpp"

namespace escat {

using ordered_json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to exactly the same double.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    char* end = nullptr;
    const double back = std::strtod(buf, &end);
    if (end && *end == '\0' && back == v) return buf;
  }
  return buf;
}

/// Uniform grid with `points` samples spanning [lo, hi] inclusive.
inline std::vector<double> linspace(double lo, double hi, int points) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw param_error("linspace: bounds must be finite");
  if (points < 2) throw param_error("linspace: need at least 2 points");
  if (!(lo < hi)) throw param_error("linspace: need lo < hi");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Logarithmic grid with `points` samples spanning [lo, hi] inclusive.
inline std::vector<double> logspace(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw param_error("logspace: need 0 < lo < hi, finite");
  if (points < 2) throw param_error("logspace: need at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Symmetric uniform grid on [-half_width, half_width] with an odd number of
/// points so zero is sampled exactly.
inline std::vector<double> symmetric_grid(double half_width, int points) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw param_error("symmetric_grid: half width must be finite and > 0");
  if (points < 3) throw param_error("symmetric_grid: need at least 3 points");
  if (points % 2 == 0) ++points;
  std::vector<double> g = linspace(-half_width, half_width, points);
  g[static_cast<std::size_t>(points / 2)] = 0.0;
  return g;
}

/// Fully resolved run configuration.  All frequency-like inputs are ordinary
/// frequencies (GHz = rate/2pi) except phases (radians), times (ns) and the
/// detector response width (ps), matching the way the parameters are usually
/// quoted; conversion to internal angular units happens in the accessors.
struct RunConfig {
  // emitter
  double gamma_GHz = 2.3;
  double beta = 0.96;
  double gamma_d_GHz = 0.01;
  double delta_GHz = 0.0;
  double sigma_sd_GHz = 0.16;
  double sigma_irf_ps = 100.0;
  // drive (exactly one of the two is active)
  bool drive_is_power = false;
  double n = 0.0024;
  double power_uW = 0.0;
  // calibration
  double eta_ns2_uW = 0.0012;
  double nu_THz = 318.6702;
  // interferometer
  double delay_ns = 3.6;
  double phi_a = 0.0;
  double phi_b = 0.0;
  // chsh settings (radians)
  double chsh_phi_a = 0.0;
  double chsh_phi_a_prime = units::pi / 2.0;
  double chsh_phi_b = units::pi / 4.0;
  double chsh_phi_b_prime = 7.0 * units::pi / 4.0;
  // laser
  double gamma_l_GHz = 1e-4;
  // quadrature
  int sd_nodes = 21;
  // scan grids
  double g2_tau_min_ns = -5.0;
  double g2_tau_max_ns = 5.0;
  int g2_points = 201;
  double franson_half_width_ns = 4.5;
  int franson_points = 401;
  int visibility_points = 64;
  double chsh_n_min = 0.002;
  double chsh_n_max = 0.2;
  int chsh_points = 13;
  double trans_detuning_min_GHz = -6.0;
  double trans_detuning_max_GHz = 6.0;
  int trans_detuning_points = 61;
  double trans_n_min = 0.01;
  double trans_n_max = 10.0;
  int trans_n_points = 7;
  double jsi_delta_max_GHz = 6.0;
  int jsi_points = 61;
  double jti_t_max_ns = 0.3;
  int jti_points = 61;
  double spectrum_omega_max_GHz = 10.0;
  int spectrum_points = 401;
  // output
  std::string out_path;        ///< empty = stdout
  std::string format = "csv";  ///< csv | json

  PowerCalibration power_calibration() const {
    PowerCalibration cal;
    cal.eta = eta_ns2_uW;
    cal.nu_THz = nu_THz;
    cal.tau_qd_ns = 1.0 / units::ghz_to_angular(gamma_GHz);
    return cal;
  }

  EmitterParams emitter_params() const {
    EmitterParams p;
    p.gamma_total = units::ghz_to_angular(gamma_GHz);
    p.beta = beta;
    p.gamma_d = units::ghz_to_angular(gamma_d_GHz);
    p.delta = units::ghz_to_angular(delta_GHz);
    p.sigma_sd = units::ghz_to_angular(sigma_sd_GHz);
    p.sigma_irf = units::ps_to_ns(sigma_irf_ps);
    p.n_photons =
        drive_is_power ? n_from_power(power_uW, beta, p.gamma_total, power_calibration()) : n;
    p.validate();
    return p;
  }

  ChshSettings chsh_settings() const {
    ChshSettings s;
    s.phi_a = chsh_phi_a;
    s.phi_a_prime = chsh_phi_a_prime;
    s.phi_b = chsh_phi_b;
    s.phi_b_prime = chsh_phi_b_prime;
    s.validate();
    return s;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["emitter"] = {{"gamma_GHz", gamma_GHz},       {"beta", beta},
                    {"gamma_d_GHz", gamma_d_GHz},   {"delta_GHz", delta_GHz},
                    {"sigma_sd_GHz", sigma_sd_GHz}, {"sigma_irf_ps", sigma_irf_ps}};
    if (drive_is_power)
      j["drive"] = {{"power_uW", power_uW}};
    else
      j["drive"] = {{"n", n}};
    j["calibration"] = {{"eta_ns2_uW", eta_ns2_uW}, {"nu_THz", nu_THz}};
    j["interferometer"] = {{"delay_ns", delay_ns}, {"phi_a", phi_a}, {"phi_b", phi_b}};
    j["chsh"] = {{"phi_a", chsh_phi_a},
                 {"phi_a_prime", chsh_phi_a_prime},
                 {"phi_b", chsh_phi_b},
                 {"phi_b_prime", chsh_phi_b_prime}};
    j["laser"] = {{"gamma_l_GHz", gamma_l_GHz}};
    j["quadrature"] = {{"sd_nodes", sd_nodes}};
    j["scan"] = {
        {"g2", {{"tau_min_ns", g2_tau_min_ns}, {"tau_max_ns", g2_tau_max_ns}, {"points", g2_points}}},
        {"franson", {{"tau_half_width_ns", franson_half_width_ns}, {"points", franson_points}}},
        {"visibility", {{"points", visibility_points}}},
        {"chsh", {{"n_min", chsh_n_min}, {"n_max", chsh_n_max}, {"points", chsh_points}}},
        {"transmission",
         {{"detuning_min_GHz", trans_detuning_min_GHz},
          {"detuning_max_GHz", trans_detuning_max_GHz},
          {"detuning_points", trans_detuning_points},
          {"n_min", trans_n_min},
          {"n_max", trans_n_max},
          {"n_points", trans_n_points}}},
        {"jsi", {{"delta_max_GHz", jsi_delta_max_GHz}, {"points", jsi_points}}},
        {"jti", {{"t_max_ns", jti_t_max_ns}, {"points", jti_points}}},
        {"spectrum", {{"omega_max_GHz", spectrum_omega_max_GHz}, {"points", spectrum_points}}}};
    // The output block (where to write, which encoding) is deliberately not
    // re-emitted: the embedded header then stays byte-identical when the same
    // physics is rerun to a different destination.
    return j;
  }
};

namespace detail {

inline void check_keys(const ordered_json& obj, const std::string& prefix,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw param_error("config: '" + (prefix.empty() ? std::string("<root>") : prefix) +
                      "' must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw param_error("config: unknown key '" + (prefix.empty() ? "" : prefix + ".") +
                        item.key() + "'");
  }
}

inline double get_num(const ordered_json& obj, const char* key, double fallback,
                      const std::string& prefix) {
  if (!obj.contains(key)) return fallback;
  const ordered_json& v = obj.at(key);
  if (!v.is_number()) throw param_error("config: key '" + prefix + "." + key + "' must be a number");
  return v.get<double>();
}

inline int get_int(const ordered_json& obj, const char* key, int fallback,
                   const std::string& prefix) {
  if (!obj.contains(key)) return fallback;
  const ordered_json& v = obj.at(key);
  if (!v.is_number_integer())
    throw param_error("config: key '" + prefix + "." + key + "' must be an integer");
  return v.get<int>();
}

inline std::string get_str(const ordered_json& obj, const char* key, const std::string& fallback,
                           const std::string& prefix) {
  if (!obj.contains(key)) return fallback;
  const ordered_json& v = obj.at(key);
  if (!v.is_string())
    throw param_error("config: key '" + prefix + "." + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace detail

/// Builds a RunConfig from a parsed JSON tree; unknown keys anywhere are
/// rejected with their dotted path.
inline RunConfig config_from_json(const ordered_json& root) {
  RunConfig c;
  detail::check_keys(root, "", {"emitter", "drive", "calibration", "interferometer", "chsh",
                                "laser", "quadrature", "scan", "output"});
  if (root.contains("emitter")) {
    const ordered_json& e = root.at("emitter");
    detail::check_keys(e, "emitter", {"gamma_GHz", "beta", "gamma_d_GHz", "delta_GHz",
                                      "sigma_sd_GHz", "sigma_irf_ps"});
    c.gamma_GHz = detail::get_num(e, "gamma_GHz", c.gamma_GHz, "emitter");
    c.beta = detail::get_num(e, "beta", c.beta, "emitter");
    c.gamma_d_GHz = detail::get_num(e, "gamma_d_GHz", c.gamma_d_GHz, "emitter");
    c.delta_GHz = detail::get_num(e, "delta_GHz", c.delta_GHz, "emitter");
    c.sigma_sd_GHz = detail::get_num(e, "sigma_sd_GHz", c.sigma_sd_GHz, "emitter");
    c.sigma_irf_ps = detail::get_num(e, "sigma_irf_ps", c.sigma_irf_ps, "emitter");
  }
  if (root.contains("drive")) {
    const ordered_json& d = root.at("drive");
    detail::check_keys(d, "drive", {"n", "power_uW"});
    const bool has_n = d.contains("n");
    const bool has_p = d.contains("power_uW");
    if (has_n == has_p)
      throw param_error("config: drive block needs exactly one of 'n' or 'power_uW'");
    if (has_n) {
      c.drive_is_power = false;
      c.n = detail::get_num(d, "n", c.n, "drive");
    } else {
      c.drive_is_power = true;
      c.power_uW = detail::get_num(d, "power_uW", c.power_uW, "drive");
    }
  }
  if (root.contains("calibration")) {
    const ordered_json& k = root.at("calibration");
    detail::check_keys(k, "calibration", {"eta_ns2_uW", "nu_THz"});
    c.eta_ns2_uW = detail::get_num(k, "eta_ns2_uW", c.eta_ns2_uW, "calibration");
    c.nu_THz = detail::get_num(k, "nu_THz", c.nu_THz, "calibration");
  }
  if (root.contains("interferometer")) {
    const ordered_json& i = root.at("interferometer");
    detail::check_keys(i, "interferometer", {"delay_ns", "phi_a", "phi_b"});
    c.delay_ns = detail::get_num(i, "delay_ns", c.delay_ns, "interferometer");
    c.phi_a = detail::get_num(i, "phi_a", c.phi_a, "interferometer");
    c.phi_b = detail::get_num(i, "phi_b", c.phi_b, "interferometer");
  }
  if (root.contains("chsh")) {
    const ordered_json& s = root.at("chsh");
    detail::check_keys(s, "chsh", {"phi_a", "phi_a_prime", "phi_b", "phi_b_prime"});
    c.chsh_phi_a = detail::get_num(s, "phi_a", c.chsh_phi_a, "chsh");
    c.chsh_phi_a_prime = detail::get_num(s, "phi_a_prime", c.chsh_phi_a_prime, "chsh");
    c.chsh_phi_b = detail::get_num(s, "phi_b", c.chsh_phi_b, "chsh");
    c.chsh_phi_b_prime = detail::get_num(s, "phi_b_prime", c.chsh_phi_b_prime, "chsh");
  }
  if (root.contains("laser")) {
    const ordered_json& l = root.at("laser");
    detail::check_keys(l, "laser", {"gamma_l_GHz"});
    c.gamma_l_GHz = detail::get_num(l, "gamma_l_GHz", c.gamma_l_GHz, "laser");
  }
  if (root.contains("quadrature")) {
    const ordered_json& q = root.at("quadrature");
    detail::check_keys(q, "quadrature", {"sd_nodes"});
    c.sd_nodes = detail::get_int(q, "sd_nodes", c.sd_nodes, "quadrature");
  }
  if (root.contains("scan")) {
    const ordered_json& s = root.at("scan");
    detail::check_keys(s, "scan", {"g2", "franson", "visibility", "chsh", "transmission", "jsi",
                                   "jti", "spectrum"});
    if (s.contains("g2")) {
      const ordered_json& g = s.at("g2");
      detail::check_keys(g, "scan.g2", {"tau_min_ns", "tau_max_ns", "points"});
      c.g2_tau_min_ns = detail::get_num(g, "tau_min_ns", c.g2_tau_min_ns, "scan.g2");
      c.g2_tau_max_ns = detail::get_num(g, "tau_max_ns", c.g2_tau_max_ns, "scan.g2");
      c.g2_points = detail::get_int(g, "points", c.g2_points, "scan.g2");
    }
    if (s.contains("franson")) {
      const ordered_json& f = s.at("franson");
      detail::check_keys(f, "scan.franson", {"tau_half_width_ns", "points"});
      c.franson_half_width_ns =
          detail::get_num(f, "tau_half_width_ns", c.franson_half_width_ns, "scan.franson");
      c.franson_points = detail::get_int(f, "points", c.franson_points, "scan.franson");
    }
    if (s.contains("visibility")) {
      const ordered_json& v = s.at("visibility");
      detail::check_keys(v, "scan.visibility", {"points"});
      c.visibility_points = detail::get_int(v, "points", c.visibility_points, "scan.visibility");
    }
    if (s.contains("chsh")) {
      const ordered_json& h = s.at("chsh");
      detail::check_keys(h, "scan.chsh", {"n_min", "n_max", "points"});
      c.chsh_n_min = detail::get_num(h, "n_min", c.chsh_n_min, "scan.chsh");
      c.chsh_n_max = detail::get_num(h, "n_max", c.chsh_n_max, "scan.chsh");
      c.chsh_points = detail::get_int(h, "points", c.chsh_points, "scan.chsh");
    }
    if (s.contains("transmission")) {
      const ordered_json& t = s.at("transmission");
      detail::check_keys(t, "scan.transmission",
                         {"detuning_min_GHz", "detuning_max_GHz", "detuning_points", "n_min",
                          "n_max", "n_points"});
      c.trans_detuning_min_GHz =
          detail::get_num(t, "detuning_min_GHz", c.trans_detuning_min_GHz, "scan.transmission");
      c.trans_detuning_max_GHz =
          detail::get_num(t, "detuning_max_GHz", c.trans_detuning_max_GHz, "scan.transmission");
      c.trans_detuning_points =
          detail::get_int(t, "detuning_points", c.trans_detuning_points, "scan.transmission");
      c.trans_n_min = detail::get_num(t, "n_min", c.trans_n_min, "scan.transmission");
      c.trans_n_max = detail::get_num(t, "n_max", c.trans_n_max, "scan.transmission");
      c.trans_n_points = detail::get_int(t, "n_points", c.trans_n_points, "scan.transmission");
    }
    if (s.contains("jsi")) {
      const ordered_json& j2 = s.at("jsi");
      detail::check_keys(j2, "scan.jsi", {"delta_max_GHz", "points"});
      c.jsi_delta_max_GHz = detail::get_num(j2, "delta_max_GHz", c.jsi_delta_max_GHz, "scan.jsi");
      c.jsi_points = detail::get_int(j2, "points", c.jsi_points, "scan.jsi");
    }
    if (s.contains("jti")) {
      const ordered_json& j2 = s.at("jti");
      detail::check_keys(j2, "scan.jti", {"t_max_ns", "points"});
      c.jti_t_max_ns = detail::get_num(j2, "t_max_ns", c.jti_t_max_ns, "scan.jti");
      c.jti_points = detail::get_int(j2, "points", c.jti_points, "scan.jti");
    }
    if (s.contains("spectrum")) {
      const ordered_json& sp = s.at("spectrum");
      detail::check_keys(sp, "scan.spectrum", {"omega_max_GHz", "points"});
      c.spectrum_omega_max_GHz =
          detail::get_num(sp, "omega_max_GHz", c.spectrum_omega_max_GHz, "scan.spectrum");
      c.spectrum_points = detail::get_int(sp, "points", c.spectrum_points, "scan.spectrum");
    }
  }
  if (root.contains("output")) {
    const ordered_json& o = root.at("output");
    detail::check_keys(o, "output", {"path", "format"});
    c.out_path = detail::get_str(o, "path", c.out_path, "output");
    c.format = detail::get_str(o, "format", c.format, "output");
    if (c.format != "csv" && c.format != "json")
      throw param_error("config: key 'output.format' must be 'csv' or 'json'");
  }
  return c;
}

/// Loads a config from a JSON file, or recovers the embedded config from a
/// previously written CSV output (the '# config_json: ...' header line).
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw param_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw param_error("config: '" + path + "' is empty");
  std::string json_text;
  if (text[first] == '{') {
    json_text = text;
  } else {
    const std::string marker = "# config_json: ";
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind(marker, 0) == 0) {
        json_text = line.substr(marker.size());
        break;
      }
    }
    if (json_text.empty())
      throw param_error("config: '" + path + "' holds neither JSON nor a '# config_json:' line");
  }
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw param_error("config: failed to parse '" + path + "': " + e.what());
  }
  return config_from_json(root);
}

/// One output table: named columns, cells that are numbers or short strings,
/// plus key/value notes that become '#' header lines in CSV.
struct OutputTable {
  std::vector<std::string> columns;
  std::vector<std::vector<ordered_json>> rows;
  std::vector<std::pair<std::string, ordered_json>> notes;

  void add_note(const std::string& key, ordered_json value) {
    notes.emplace_back(key, std::move(value));
  }
};

namespace detail {

inline std::string cell_to_csv(const ordered_json& cell) {
  if (cell.is_number_float()) return fmt_double(cell.get<double>());
  if (cell.is_number()) return cell.dump();
  if (cell.is_string()) return cell.get<std::string>();
  return cell.dump();
}

}  // namespace detail

/// Serializes a table deterministically.  CSV starts with '#' metadata lines
/// (tool version, subcommand, the full resolved config for round-tripping,
/// then any notes); JSON wraps the same content in one object.
inline void write_output(std::ostream& os, const std::string& subcommand, const RunConfig& cfg,
                         const OutputTable& table, const std::string& format) {
  if (format == "csv") {
    os << "# escat " << version_string << "\n";
    os << "# subcommand: " << subcommand << "\n";
    os << "# config_json: " << cfg.to_json().dump() << "\n";
    for (const auto& [key, value] : table.notes)
      os << "# " << key << ": " << detail::cell_to_csv(value) << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      os << (c ? "," : "") << table.columns[c];
    os << "\n";
    for (const std::vector<ordered_json>& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        os << (c ? "," : "") << detail::cell_to_csv(row[c]);
      os << "\n";
    }
  } else if (format == "json") {
    ordered_json j;
    j["tool"] = "escat";
    j["version"] = version_string;
    j["subcommand"] = subcommand;
    j["config"] = cfg.to_json();
    for (const auto& [key, value] : table.notes) j[key] = value;
    j["columns"] = table.columns;
    j["rows"] = table.rows;
    os << j.dump(2) << "\n";
  } else {
    throw param_error("output format must be 'csv' or 'json', got '" + format + "'");
  }
}

/// Loads a numeric dataset from CSV: optional '#' comment lines, then a
/// header line of column names, then numeric rows.
inline Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw param_error("dataset: cannot open '" + path + "'");
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const std::size_t b = field.find_first_not_of(" \t");
      const std::size_t e = field.find_last_not_of(" \t");
      fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (!have_header) {
      for (const std::string& f : fields)
        if (f.empty())
          throw param_error("dataset: empty column name in header (line " +
                            std::to_string(line_no) + ")");
      ds.columns = fields;
      have_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || !end || *end != '\0')
        throw param_error("dataset: non-numeric field '" + f + "' (line " +
                          std::to_string(line_no) + ")");
      row.push_back(v);
    }
    ds.rows.push_back(std::move(row));
  }
  if (!have_header) throw param_error("dataset: '" + path + "' has no header line");
  ds.validate();
  return ds;
}

}  // namespace escat
