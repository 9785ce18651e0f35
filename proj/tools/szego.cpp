// Command-line driver. Exit codes: 0 success, 1 numerical failure or failed
// verification, 2 configuration or usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "szego/asymptotics.hpp"
#include "szego/cache.hpp"
#include "szego/config.hpp"
#include "szego/io.hpp"
#include "szego/testfn.hpp"
#include "szego/verify.hpp"
#include "szego/widom.hpp"

namespace fs = std::filesystem;
using namespace szego;

namespace {

struct RunFlags {
  std::string config;
  std::string out;
  unsigned threads = 0;
  bool quiet = false;
};

ExperimentConfig load_with_overrides(const RunFlags& f) {
  auto c = load_experiment(f.config);
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.threads > 0) c.threads = f.threads;
  c.validate();
  return c;
}

SweepOptions sweep_options(const ExperimentConfig& c, const EigenCache& cache, bool quiet) {
  SweepOptions o;
  o.s_list = c.s_list;
  o.threads = c.threads;
  o.cache = cache.enabled() ? &cache : nullptr;
  if (!quiet)
    o.progress = [](const SweepRow& r) { std::fprintf(stderr, "  L = %-10.6g %8.2f s\n", r.L, r.seconds); };
  return o;
}

// CSV and sidecar; on abort both get a .partial suffix.
void persist(const SweepTable& t, const ExperimentConfig& c, const std::string& stem, bool complete,
             const std::string& error = {}) {
  const fs::path dir(c.output_dir);
  fs::create_directories(dir);
  const std::string suffix = complete ? "" : ".partial";
  write_text(dir / (stem + ".csv" + suffix), sweep_csv(t));
  write_text(dir / (stem + ".json" + suffix), sweep_json(t, c, complete, error).dump(2) + "\n");
}

int cmd_predict(const RunFlags& f, const std::vector<std::string>& names) {
  const auto c = load_with_overrides(f);
  const auto domain = make_domain(c.domain_shape, c.domain_params);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& n : names.empty() ? c.h_list : names)
    out.push_back(prediction_json(predict_trace(parse_test_function(n), c.energy, domain, c.convention)));
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const RunFlags& f) {
  const auto c = load_with_overrides(f);
  const auto cache = EigenCache::from_env(c.cache_dir);
  const auto grid = c.l_grid();
  try {
    const auto t = run_sweep(c.model(), grid, c.test_functions(), sweep_options(c, cache, f.quiet));
    persist(t, c, c.name, true);
    nlohmann::json fits = nlohmann::json::array();
    for (const auto& h : c.test_functions()) fits.push_back(fit_json(fit_asymptotics(t, h, c.convention)));
    write_text(fs::path(c.output_dir) / (c.name + "_fit.json"), fits.dump(2) + "\n");
    std::cout << (fs::path(c.output_dir) / (c.name + ".csv")).string() << "\n";
    return 0;
  } catch (const SweepAborted& e) {
    persist(e.partial, c, c.name, false, e.what());
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  }
}

int cmd_verify(const RunFlags& f) {
  const auto c = load_with_overrides(f);
  const auto cache = EigenCache::from_env(c.cache_dir);
  const auto o = run_verify(c, sweep_options(c, cache, f.quiet));
  if (o.with_v) persist(*o.with_v, c, c.name, true);
  if (o.free && !c.model().potential.is_zero()) persist(*o.free, c.free_reference(), c.name + "_free", true);

  nlohmann::json j;
  j["experiment"] = c.name;
  j["config"] = config_json(c);
  j["overall"] = to_string(o.overall);
  if (!o.sweep_error.empty()) j["sweep_error"] = o.sweep_error;
  j["checks"] = nlohmann::json::array();
  for (const auto& r : o.checks) j["checks"].push_back(check_json(r));
  fs::create_directories(c.output_dir);
  write_text(fs::path(c.output_dir) / (c.name + "_verify.json"), j.dump(2) + "\n");

  std::printf("verification of '%s'\n", c.name.c_str());
  for (const auto& r : o.checks) std::printf("  %-13s %-28s %s\n", to_string(r.verdict), r.name.c_str(), r.detail.c_str());
  std::printf("overall: %s\n", to_string(o.overall));
  return o.overall == Verdict::Fail ? 1 : 0;
}

int cmd_plotdata(const std::vector<std::string>& csvs, const std::string& out) {
  for (const auto& p : csvs) {
    const fs::path csv(p);
    if (!fs::exists(csv)) throw ConfigError("sweep file '" + p + "' does not exist");
    fs::path sidecar = csv;
    sidecar.replace_extension(".json");
    const auto meta = nlohmann::json::parse(read_text(sidecar));
    KeyValues kv;
    for (const auto& [k, v] : meta.at("config").items()) kv[k] = v.get<std::string>();
    const auto c = from_key_values(kv);
    const auto files = write_plotdata(parse_sweep_csv(read_text(csv)), c, out.empty() ? csv.parent_path() : fs::path(out),
                                      csv.stem().string());
    for (const auto& d : files.data) std::cout << d.string() << "\n";
    std::cout << files.table.string() << "\n";
  }
  return 0;
}

int cmd_check_testfn(const std::vector<std::string>& names, const std::vector<int>& dims) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& n : names) {
    const auto h = parse_test_function(n);
    for (int d : dims) {
      const auto r = check_membership(h, d);
      nlohmann::json j{{"h", h.label},
                       {"d", d},
                       {"in_H_d", r.in_H_d},
                       {"in_H_d0", r.in_H_d0},
                       {"estimated_alpha", std::isfinite(r.estimated_alpha) ? nlohmann::json(r.estimated_alpha) : nlohmann::json("inf")},
                       {"estimated_log_power", r.estimated_log_power},
                       {"conclusive", r.conclusive},
                       {"declared_consistent", r.declared_consistent},
                       {"symmetric", r.symmetric}};
      if (r.failure) j["failure"] = *r.failure;
      out.push_back(j);
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Szego-type asymptotics of truncated Fermi projections"};
  app.require_subcommand(1);

  RunFlags flags;
  auto add_run_flags = [&](CLI::App* sub, bool run) {
    sub->add_option("-c,--config", flags.config, "experiment file")->required();
    if (run) {
      sub->add_option("-o,--out", flags.out, "output directory (overrides output.dir)");
      sub->add_option("-j,--threads", flags.threads, "worker threads (overrides run.threads)");
      sub->add_flag("-q,--quiet", flags.quiet, "no per-row progress on stderr");
    }
  };

  std::vector<std::string> predict_h;
  auto* predict = app.add_subcommand("predict", "closed-form coefficients as JSON");
  add_run_flags(predict, false);
  predict->add_option("-H,--function", predict_h, "test function names (default: observables.h)");

  auto* sweep = app.add_subcommand("sweep", "L-sweep to CSV + JSON");
  add_run_flags(sweep, true);

  auto* verify = app.add_subcommand("verify", "run both sweeps and every check");
  add_run_flags(verify, true);

  std::vector<std::string> csvs;
  std::string plot_out;
  auto* plot = app.add_subcommand("plotdata", "gnuplot-ready files from sweep CSVs");
  plot->add_option("csv", csvs, "sweep CSV files")->required();
  plot->add_option("-o,--out", plot_out, "output directory (default: next to each CSV)");

  std::vector<std::string> names;
  std::vector<int> dims{1, 2, 3};
  auto* check = app.add_subcommand("check-testfn", "membership report for test functions");
  check->add_option("names", names, "test function names")->required();
  check->add_option("-d,--dims", dims, "dimensions")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*predict) return cmd_predict(flags, predict_h);
    if (*sweep) return cmd_sweep(flags);
    if (*verify) return cmd_verify(flags);
    if (*plot) return cmd_plotdata(csvs, plot_out);
    if (*check) return cmd_check_testfn(names, dims);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed sweep sidecar: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
