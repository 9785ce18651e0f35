#ifndef SZEGO_CONFIG_HPP
#define SZEGO_CONFIG_HPP

// Experiment files: one `dotted.key = value` per line, '#' starts a comment.
// Emission is canonical (sorted keys, 17 significant digits), so
// parse -> emit -> parse is the identity.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "szego/asymptotics.hpp"
#include "szego/error.hpp"
#include "szego/model.hpp"
#include "szego/testfn.hpp"
#include "szego/widom.hpp"

namespace szego {

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const char c = k[i];
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || (c == '.' && k[i - 1] != '.');
    if (!ok) return false;
  }
  return true;
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

inline long to_integer(const std::string& key, const std::string& v) {
  long out = 0;
  const auto s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    auto t = trim(cur);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

inline std::string join_doubles(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt_short(xs[i]);
  return s;
}

inline std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
  return s;
}

} // namespace detail

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = detail::trim(std::string_view(t).substr(0, eq));
    const auto value = detail::trim(std::string_view(t).substr(eq + 1));
    if (!detail::valid_key(key)) throw ConfigError("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
    if (kv.count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

inline std::string emit_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

struct ExperimentConfig {
  std::string name = "experiment";
  double energy = 4.0;
  std::string domain_shape = "interval";
  std::vector<double> domain_params{-1.0, 1.0};
  std::string potential_kind = "zero";
  std::vector<double> potential_params;
  Engine engine = Engine::ContinuumKernel;
  LatticeParams lattice;
  ContinuumParams continuum;
  std::vector<std::string> h_list{"renyi:1:nats"};
  std::vector<double> s_list{0.6, 0.8, 1.0};
  GridSpec grid;
  std::string output_dir = "out";
  std::string cache_dir;
  unsigned threads = 1;
  N0Convention convention = kDefaultN0Convention;
  double rel_tol = kStabilityRelTol;
  double prediction_tol = 0.05;
  bool coefficient_checks = true; // off for fixed-box lattice runs

  ModelConfig model() const {
    ModelConfig m;
    m.energy = energy;
    m.domain = make_domain(domain_shape, domain_params);
    m.potential = make_potential(potential_kind, m.domain.dimension(), potential_params);
    m.engine = engine;
    m.lattice = lattice;
    m.continuum = continuum;
    m.validate();
    return m;
  }

  // same experiment with V = 0
  ExperimentConfig free_reference() const {
    ExperimentConfig c = *this;
    c.potential_kind = "zero";
    c.potential_params.clear();
    return c;
  }

  std::vector<TestFunction> test_functions() const {
    std::vector<TestFunction> out;
    for (const auto& n : h_list) out.push_back(parse_test_function(n));
    return out;
  }

  std::vector<double> l_grid() const { return make_l_grid(grid, energy); }

  void validate() const {
    (void)model();
    (void)test_functions();
    (void)l_grid();
    for (double s : s_list)
      if (!(s > 0.0 && s <= 1.0)) throw ConfigError("observables.s entries must lie in ]0, 1]");
    if (threads < 1) throw ConfigError("run.threads must be >= 1");
    if (!(rel_tol > 0.0)) throw ConfigError("verify.rel_tol must be positive");
    if (!(prediction_tol > 0.0)) throw ConfigError("verify.prediction_tol must be positive");
  }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "continuum.k_oversampling", "continuum.k_panel_order", "continuum.nodes_per_wavelength",
      "continuum.panel_order", "experiment.name", "grid.kind", "grid.max", "grid.min", "grid.points",
      "grid.variable", "lattice.box_half_width", "lattice.box_scale", "lattice.max_sites", "lattice.spacing",
      "model.domain.params", "model.domain.shape", "model.energy", "model.engine", "model.potential.kind",
      "model.potential.params", "observables.h", "observables.s", "output.cache_dir", "output.dir",
      "run.threads", "verify.coefficients", "verify.prediction_tol", "verify.rel_tol", "widom.convention"};
  return keys;
}

inline KeyValues to_key_values(const ExperimentConfig& c) {
  using detail::fmt_short;
  KeyValues kv;
  kv["experiment.name"] = c.name;
  kv["model.energy"] = fmt_short(c.energy);
  kv["model.domain.shape"] = c.domain_shape;
  kv["model.domain.params"] = detail::join_doubles(c.domain_params);
  kv["model.potential.kind"] = c.potential_kind;
  kv["model.potential.params"] = detail::join_doubles(c.potential_params);
  kv["model.engine"] = c.engine == Engine::Lattice ? "lattice" : "continuum";
  kv["lattice.spacing"] = fmt_short(c.lattice.spacing);
  kv["lattice.box_half_width"] = c.lattice.box_half_width ? fmt_short(*c.lattice.box_half_width) : "auto";
  kv["lattice.box_scale"] = fmt_short(c.lattice.box_scale);
  kv["lattice.max_sites"] = std::to_string(c.lattice.max_sites);
  kv["continuum.nodes_per_wavelength"] = fmt_short(c.continuum.nodes_per_wavelength);
  kv["continuum.panel_order"] = std::to_string(c.continuum.panel_order);
  kv["continuum.k_panel_order"] = std::to_string(c.continuum.k_panel_order);
  kv["continuum.k_oversampling"] = fmt_short(c.continuum.k_oversampling);
  kv["observables.h"] = detail::join(c.h_list);
  kv["observables.s"] = detail::join_doubles(c.s_list);
  kv["grid.kind"] = to_string(c.grid.kind);
  kv["grid.variable"] = to_string(c.grid.variable);
  kv["grid.min"] = fmt_short(c.grid.min);
  kv["grid.max"] = fmt_short(c.grid.max);
  kv["grid.points"] = std::to_string(c.grid.points);
  kv["output.dir"] = c.output_dir;
  kv["output.cache_dir"] = c.cache_dir;
  kv["run.threads"] = std::to_string(c.threads);
  kv["widom.convention"] = to_string(c.convention);
  kv["verify.rel_tol"] = fmt_short(c.rel_tol);
  kv["verify.prediction_tol"] = fmt_short(c.prediction_tol);
  kv["verify.coefficients"] = c.coefficient_checks ? "true" : "false";
  return kv;
}

// Missing keys keep their defaults; grid defaults follow the domain dimension.
inline ExperimentConfig from_key_values(const KeyValues& kv) {
  const auto& known = config_keys();
  for (const auto& [k, v] : kv)
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key '" + k + "'");
  ExperimentConfig c;
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  using namespace detail;
  if (auto v = get("experiment.name")) c.name = *v;
  if (auto v = get("model.energy")) c.energy = to_double("model.energy", *v);
  if (auto v = get("model.domain.shape")) c.domain_shape = *v;
  if (auto v = get("model.domain.params")) c.domain_params = to_doubles("model.domain.params", *v);
  if (auto v = get("model.potential.kind")) c.potential_kind = *v;
  if (auto v = get("model.potential.params")) c.potential_params = to_doubles("model.potential.params", *v);
  if (auto v = get("model.engine")) {
    if (*v == "lattice") c.engine = Engine::Lattice;
    else if (*v == "continuum") c.engine = Engine::ContinuumKernel;
    else throw ConfigError("model.engine must be 'lattice' or 'continuum', got '" + *v + "'");
  }
  if (auto v = get("lattice.spacing")) c.lattice.spacing = to_double("lattice.spacing", *v);
  if (auto v = get("lattice.box_half_width"); v && *v != "auto")
    c.lattice.box_half_width = to_double("lattice.box_half_width", *v);
  if (auto v = get("lattice.box_scale")) c.lattice.box_scale = to_double("lattice.box_scale", *v);
  if (auto v = get("lattice.max_sites")) {
    const long n = to_integer("lattice.max_sites", *v);
    if (n < 1) throw ConfigError("lattice.max_sites must be positive");
    c.lattice.max_sites = std::size_t(n);
  }
  if (auto v = get("continuum.nodes_per_wavelength"))
    c.continuum.nodes_per_wavelength = to_double("continuum.nodes_per_wavelength", *v);
  if (auto v = get("continuum.panel_order")) c.continuum.panel_order = int(to_integer("continuum.panel_order", *v));
  if (auto v = get("continuum.k_panel_order"))
    c.continuum.k_panel_order = int(to_integer("continuum.k_panel_order", *v));
  if (auto v = get("continuum.k_oversampling")) c.continuum.k_oversampling = to_double("continuum.k_oversampling", *v);
  if (auto v = get("observables.h")) c.h_list = split_list(*v);
  if (auto v = get("observables.s")) c.s_list = to_doubles("observables.s", *v);

  c.grid = default_grid(make_domain(c.domain_shape, c.domain_params).dimension());
  if (auto v = get("grid.kind")) c.grid.kind = parse_grid_kind(*v);
  if (auto v = get("grid.variable")) c.grid.variable = parse_grid_variable(*v);
  if (auto v = get("grid.min")) c.grid.min = to_double("grid.min", *v);
  if (auto v = get("grid.max")) c.grid.max = to_double("grid.max", *v);
  if (auto v = get("grid.points")) c.grid.points = int(to_integer("grid.points", *v));

  if (auto v = get("output.dir")) c.output_dir = *v;
  if (auto v = get("output.cache_dir")) c.cache_dir = *v;
  if (auto v = get("run.threads")) {
    const long n = to_integer("run.threads", *v);
    if (n < 1) throw ConfigError("run.threads must be >= 1");
    c.threads = unsigned(n);
  }
  if (auto v = get("widom.convention")) c.convention = parse_n0_convention(*v);
  if (auto v = get("verify.rel_tol")) c.rel_tol = to_double("verify.rel_tol", *v);
  if (auto v = get("verify.prediction_tol")) c.prediction_tol = to_double("verify.prediction_tol", *v);
  if (auto v = get("verify.coefficients")) {
    if (*v != "true" && *v != "false") throw ConfigError("verify.coefficients must be true or false");
    c.coefficient_checks = *v == "true";
  }
  return c;
}

inline ExperimentConfig parse_experiment(std::string_view text) { return from_key_values(parse_key_values(text)); }

inline std::string emit_experiment(const ExperimentConfig& c) { return emit_key_values(to_key_values(c)); }

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str());
}

} // namespace szego

#endif // SZEGO_CONFIG_HPP
