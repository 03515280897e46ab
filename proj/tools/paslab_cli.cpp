#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

#include "paslab/experiment.hpp"
#include "paslab/presets.hpp"

using namespace paslab;

namespace {

ExperimentConfig load_experiment(const std::string& path, std::optional<std::uint64_t> seed,
                                 std::optional<int> workers, const std::string& cache_dir) {
  Config cfg = load_config_with_presets(path);
  if (seed) cfg.set("seed", std::to_string(*seed));
  if (workers) cfg.set("workers", std::to_string(*workers));
  if (!cache_dir.empty()) cfg.set("cache_dir", cache_dir);
  return ExperimentConfig::from_config(cfg);
}

// minimal CSV reader for the report verb
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  static Table load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    Table t;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::string cell;
      bool quoted = false;
      for (char ch : line) {
        if (ch == '"') {
          quoted = !quoted;
        } else if (ch == ',' && !quoted) {
          cells.push_back(cell);
          cell.clear();
        } else {
          cell.push_back(ch);
        }
      }
      cells.push_back(cell);
      if (header) {
        t.columns = cells;
        header = false;
      } else {
        t.rows.push_back(cells);
      }
    }
    return t;
  }

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    return -1;
  }
};

int do_report(const std::string& path) {
  const Table t = Table::load(path);
  const int c_kind = t.col("dm_kind"), c_n = t.col("n"), c_cpr = t.col("cpr"),
            c_ncpr = t.col("n_cpr"), c_power = t.col("power_dbm"), c_opt = t.col("optimal_power"),
            c_air = t.col("air"), c_snr = t.col("snr_db"), c_npn = t.col("npn"),
            c_eedi = t.col("eedi");
  if (c_kind < 0 || c_n < 0) throw ConfigError("report: not a results table");

  const bool any_best =
      c_opt >= 0 && std::any_of(t.rows.begin(), t.rows.end(),
                                [&](const auto& r) { return r[c_opt] == "1"; });
  std::cout << (any_best ? "== best launch power per (dm, N, cpr) ==\n" : "== points ==\n");
  std::cout << std::left << std::setw(8) << "dm" << std::setw(7) << "N" << std::setw(6) << "cpr"
            << std::setw(7) << "n_cpr" << std::setw(8) << "P[dBm]" << std::setw(14) << "AIR"
            << std::setw(10) << "SNR[dB]" << "\n";
  for (const auto& row : t.rows) {
    if (any_best && row[c_opt] != "1") continue;
    std::cout << std::left << std::setw(8) << row[c_kind] << std::setw(7) << row[c_n]
              << std::setw(6) << (c_cpr >= 0 ? row[c_cpr] : "-") << std::setw(7)
              << (c_ncpr >= 0 ? row[c_ncpr] : "-") << std::setw(8)
              << (c_power >= 0 ? row[c_power] : "-") << std::setw(14)
              << (c_air >= 0 ? row[c_air] : "-") << std::setw(10)
              << (c_snr >= 0 ? row[c_snr] : "-") << "\n";
  }

  // grid correlations when the table carries them
  if (c_snr >= 0 && c_npn >= 0) {
    std::vector<double> snr, neg_npn, neg_eedi;
    for (const auto& row : t.rows) {
      if (row[c_npn] == "nan" || row[c_snr] == "nan") continue;
      snr.push_back(std::stod(row[c_snr]));
      neg_npn.push_back(-std::stod(row[c_npn]));
      if (c_eedi >= 0 && row[c_eedi] != "nan") neg_eedi.push_back(-std::stod(row[c_eedi]));
    }
    if (snr.size() >= 3) {
      std::cout << "\n== correlations over " << snr.size() << " points ==\n";
      std::cout << "corr(SNR, -NPN)  = " << pearson(snr, neg_npn) << "\n";
      if (neg_eedi.size() == snr.size())
        std::cout << "corr(SNR, -EEDI) = " << pearson(snr, neg_eedi) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paslab: probabilistic amplitude shaping laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "results", cache_dir, results_path, preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "override the master seed");
    cmd->add_option("--workers", workers, "worker threads for sweeps");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--cache-dir", cache_dir, "kernel coefficient cache directory");
  };

  auto* run = app.add_subcommand("run", "run a single experiment point");
  run->add_option("config", config_path, "experiment config file")->required();
  add_common(run);

  auto* sweep = app.add_subcommand("sweep", "run the configured sweep");
  sweep->add_option("config", config_path, "experiment config file")->required();
  add_common(sweep);

  auto* kernel = app.add_subcommand("kernel", "precompute interaction coefficients");
  kernel->add_option("config", config_path, "link/grid config file")->required();
  add_common(kernel);

  auto* report = app.add_subcommand("report", "summarize a results.csv");
  report->add_option("results", results_path, "results.csv path")->required();

  auto* preset = app.add_subcommand("preset", "print a bundled preset (or 'list')");
  preset->add_option("name", preset_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) {
      const auto cfg = load_experiment(config_path, seed, workers, cache_dir);
      if (cfg.dm_kinds.size() != 1 || cfg.n_list.size() != 1 || cfg.cpr_kinds.size() != 1 ||
          cfg.power_dbm_list.size() != 1 ||
          (cfg.cpr_kinds[0] == CprKind::Bps && cfg.n_cpr_list.size() != 1))
        throw ConfigError("run: every sweep axis must have exactly one value (use sweep)");
      PointCoords c;
      c.dm_kind = cfg.dm_kinds[0];
      std::tie(c.n, c.emulated) = cfg.parse_n(cfg.n_list[0]);
      c.map = cfg.map;
      c.cpr = cfg.cpr_kinds[0];
      c.n_cpr = cfg.cpr_kinds[0] == CprKind::Bps ? cfg.n_cpr_list[0] : 0;
      c.power_dbm = cfg.power_dbm_list[0];
      const auto point = Experiment(cfg).run_point(c);
      emit_results_csv({point}, cfg, std::cout);
      if (!point.error.empty()) {
        std::cerr << "point failed: " << point.error << "\n";
        return 1;
      }
      return 0;
    }
    if (app.got_subcommand(sweep)) {
      const auto cfg = load_experiment(config_path, seed, workers, cache_dir);
      Experiment exp(cfg);
      const auto points = exp.run_sweep();
      emit_results(points, cfg, out_dir);
      std::cout << "wrote " << points.size() << " points to " << out_dir << "/results.csv\n";
      return 0;
    }
    if (app.got_subcommand(kernel)) {
      const auto cfg = load_experiment(config_path, seed, workers, cache_dir);
      if (cfg.awgn_only) throw ConfigError("kernel: needs a fiber link");
      const auto klink = KernelLink::from(cfg.link);
      const double t_sym = cfg.grid.symbol_time_s();
      const int n_c = cfg.npn_n_c > 0
                          ? cfg.npn_n_c
                          : walk_off_half_memory(klink, cfg.grid.max_center_offset_ghz() * 2e9,
                                                 t_sym);
      const auto table = kernel_table(klink, t_sym, n_c, cfg.grid.channels,
                                      cache_dir.empty() ? cfg.cache_dir : cache_dir);
      std::filesystem::create_directories(out_dir);
      const std::string path = out_dir + "/kernel.csv";
      table.export_csv(path);
      std::cout << "N_c = " << table.n_c << ", peak = " << table.peak()
                << ", max residual = " << table.max_residual() << "\n"
                << "wrote " << path << "\n";
      return 0;
    }
    if (app.got_subcommand(report)) return do_report(results_path);
    if (app.got_subcommand(preset)) {
      if (preset_name == "list") {
        for (const auto& [name, text] : preset_registry()) std::cout << name << "\n";
        return 0;
      }
      const auto it = preset_registry().find(preset_name);
      if (it == preset_registry().end()) throw ConfigError("unknown preset: " + preset_name);
      std::cout << it->second;
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
