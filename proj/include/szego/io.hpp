#ifndef SZEGO_IO_HPP
#define SZEGO_IO_HPP

// Sweep persistence: CSV rows (17 significant digits, ',' separated, LF),
// JSON sidecars, and gnuplot-ready plot data.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "szego/asymptotics.hpp"
#include "szego/config.hpp"
#include "szego/error.hpp"

namespace szego {

using json = nlohmann::json;

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  return detail::fmt17(v);
}

inline std::vector<std::string> csv_header(const std::vector<std::string>& labels, const std::vector<double>& s_list) {
  std::vector<std::string> h{"L"};
  for (const auto& l : labels) h.push_back("trace_" + l);
  h.push_back("q2");
  for (double s : s_list) h.push_back("qdiff2s_" + detail::fmt_short(s));
  h.push_back("pdiff2");
  h.push_back("trdiff");
  h.push_back("phi");
  return h;
}

// Continuum rows carry q2 through the identity ||Q_L||_2^2 = tr s_1(P_L);
// the difference columns need the lattice complement and are nan there.
inline std::string sweep_csv(const SweepTable& t) {
  std::string out;
  const auto header = csv_header(t.labels, t.s_list);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : t.rows) {
    std::vector<double> v{r.L};
    v.insert(v.end(), r.traces.begin(), r.traces.end());
    if (r.norms) {
      v.push_back(r.norms->q2);
      for (const auto& q : r.norms->qdiff2s) v.push_back(q.second);
      v.push_back(r.norms->pdiff2);
      v.push_back(r.norms->trdiff);
      v.push_back(r.norms->phi);
    } else {
      v.push_back(r.s1_trace);
      for (std::size_t k = 0; k < t.s_list.size() + 3; ++k) v.push_back(nan);
    }
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + csv_number(v[i]);
    out += "\n";
  }
  return out;
}

struct CsvSweep {
  std::vector<std::string> labels; // trace columns, without the prefix
  std::vector<double> L;
  std::vector<std::vector<double>> traces; // [label][row]
};

inline CsvSweep parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("L", 0) != 0) throw ConfigError("not a sweep CSV: missing 'L' header");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  CsvSweep s;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i].rfind("trace_", 0) == 0) {
      s.labels.push_back(header[i].substr(6));
      cols.push_back(i);
    }
  s.traces.resize(cols.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell == "nan" ? std::nan("") : detail::to_double("csv", cell));
    if (cells.size() != header.size()) throw ConfigError("sweep CSV row has " + std::to_string(cells.size()) + " cells");
    s.L.push_back(cells[0]);
    for (std::size_t j = 0; j < cols.size(); ++j) s.traces[j].push_back(cells[cols[j]]);
  }
  return s;
}

inline json config_json(const ExperimentConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : to_key_values(c)) j[k] = v;
  return j;
}

inline json sweep_json(const SweepTable& t, const ExperimentConfig& c, bool complete, const std::string& error = {}) {
  json j;
  j["status"] = complete ? "complete" : "partial";
  if (!error.empty()) j["error"] = error;
  j["config"] = config_json(c);
  j["engine"] = t.engine;
  j["n0_convention"] = to_string(c.convention);
  j["columns"] = csv_header(t.labels, t.s_list);
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"L", r.L}, {"seconds", r.seconds}, {"spectrum_size", r.spectrum_size}, {"max_clip", r.max_clip}});
  j["rows"] = rows;
  return j;
}

inline json prediction_json(const AsymptoticPrediction& p) {
  return {{"a_pred", p.a_pred}, {"b_pred", p.b_pred}, {"E", p.energy},
          {"d", p.dimension}, {"h", p.label},     {"convention", to_string(p.convention)}};
}

inline json fit_json(const FitResult& f) {
  json j;
  j["h"] = f.label;
  j["basis"] = f.basis;
  j["coefficients"] = std::vector<double>(f.coef.data(), f.coef.data() + f.coef.size());
  j["sigma"] = std::vector<double>(f.sigma.data(), f.sigma.data() + f.sigma.size());
  j["residual_norm"] = f.residual_norm;
  j["condition"] = f.condition;
  j["scaled_condition"] = f.scaled_condition;
  j["rows"] = f.rows;
  if (f.prediction) j["prediction"] = prediction_json(*f.prediction);
  j["rel_err_a"] = std::isnan(f.rel_err_a) ? json(nullptr) : json(f.rel_err_a);
  j["rel_err_b"] = std::isnan(f.rel_err_b) ? json(nullptr) : json(f.rel_err_b);
  return j;
}

inline json check_json(const CheckResult& r) {
  json m = json::object();
  for (const auto& [k, v] : r.metrics) m[k] = std::isfinite(v) ? json(v) : json(nullptr);
  return {{"name", r.name}, {"verdict", to_string(r.verdict)}, {"detail", r.detail}, {"metrics", m}};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + p.string() + "'");
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// File-name-safe version of a test function label.
inline std::string label_stem(const std::string& label) {
  std::string s;
  for (char c : label) s += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  return s;
}

struct PlotFiles {
  std::vector<std::filesystem::path> data;
  std::filesystem::path table;
};

// Per label: L, trace, fitted curve, residual; plus one coefficient table.
inline PlotFiles write_plotdata(const CsvSweep& s, const ExperimentConfig& c, const std::filesystem::path& dir,
                                const std::string& stem) {
  std::filesystem::create_directories(dir);
  PlotFiles out;
  const int d = make_domain(c.domain_shape, c.domain_params).dimension();
  std::string table = "# h a_fit a_pred b_fit b_pred sigma_b rel_err_b\n";
  for (std::size_t j = 0; j < s.labels.size(); ++j) {
    const auto h = parse_test_function(s.labels[j]);
    FitResult f = fit_series(s.L, s.traces[j], d);
    f.label = h.label;
    const auto p = predict_trace(h, c.energy, make_domain(c.domain_shape, c.domain_params), c.convention);
    std::string dat = "# L trace fit residual (" + h.label + ")\n";
    for (std::size_t i = 0; i < s.L.size(); ++i) {
      const double fit = evaluate_fit(f, s.L[i]);
      dat += csv_number(s.L[i]) + " " + csv_number(s.traces[j][i]) + " " + csv_number(fit) + " " +
             csv_number(s.traces[j][i] - fit) + "\n";
    }
    const auto path = dir / (stem + "_" + label_stem(h.label) + ".dat");
    write_text(path, dat);
    out.data.push_back(path);
    const double rel = p.b_pred != 0.0 ? (f.b() - p.b_pred) / p.b_pred : std::nan("");
    table += h.label + " " + csv_number(f.a()) + " " + csv_number(p.a_pred) + " " + csv_number(f.b()) + " " +
             csv_number(p.b_pred) + " " + csv_number(f.sigma(1)) + " " + csv_number(rel) + "\n";
  }
  out.table = dir / (stem + "_coefficients.dat");
  write_text(out.table, table);
  return out;
}

} // namespace szego

#endif // SZEGO_IO_HPP
