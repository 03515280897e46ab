#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "paslab/experiment.hpp"
#include "paslab/presets.hpp"
#include "test_oracles.hpp"

using namespace paslab;

namespace {

Config small_awgn_config() {
  Config c = load_preset("linear-awgn");
  c.set("symbols_per_frame", "2048");
  c.set("frames", "1");
  c.set("guard_symbols", "64");
  c.set("dm.n_list", "64");
  return c;
}

Config small_fiber_config() {
  Config c = load_preset("ssfm-3ch-4span");
  c.set("symbols_per_frame", "4096");
  c.set("frames", "1");
  c.set("guard_symbols", "64");
  c.set("dm.kinds", "SS");
  c.set("dm.n_list", "64");
  c.set("power.dbm_list", "1");
  c.set("power.optimize", "false");
  c.set("metrics", "snr,air,npn,eedi,rate_loss");
  return c;
}

PointCoords first_coords(const ExperimentConfig& cfg) {
  PointCoords c;
  c.dm_kind = cfg.dm_kinds[0];
  std::tie(c.n, c.emulated) = cfg.parse_n(cfg.n_list[0]);
  c.map = cfg.map;
  c.cpr = cfg.cpr_kinds[0];
  c.n_cpr = cfg.cpr_kinds[0] == CprKind::Bps ? cfg.n_cpr_list[0] : 0;
  c.power_dbm = cfg.power_dbm_list[0];
  return c;
}

}  // namespace

TEST_CASE("config parser") {
  const auto c = Config::parse("a.b = 1.5\n# comment\nlist = 1, 2,3\nname = hello # tail\n");
  CHECK(c.get_double("a.b") == 1.5);
  CHECK(c.get_int_list("list") == std::vector<long long>{1, 2, 3});
  CHECK(c.get_string("name") == "hello");
  CHECK(c.get_double("missing", 7.0) == 7.0);
  CHECK_THROWS_AS(c.get_string("missing"), ConfigError);
  CHECK_THROWS_AS(Config::parse("novalue\n"), ConfigError);

  // canonical text is sorted and stable under reordering
  const auto a = Config::parse("x = 1\ny = 2\n");
  const auto b = Config::parse("y = 2\nx = 1\n");
  CHECK(a.canonical_text() == b.canonical_text());
  CHECK(a.hash() == b.hash());
}

TEST_CASE("presets parse and validate") {
  for (const auto& [name, text] : preset_registry()) {
    const auto cfg = ExperimentConfig::from_config(Config::parse(text));
    CHECK(cfg.metrics.size() > 0);
  }
  CHECK_THROWS_AS(load_preset("nope"), ConfigError);
}

TEST_CASE("preset files on disk match the registry") {
  for (const auto& [name, text] : preset_registry()) {
    const std::string path = std::string(PASLAB_SOURCE_DIR) + "/configs/" + name + ".conf";
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == text);
  }
}

TEST_CASE("AWGN point matches the quadrature oracle") {
  const auto cfg = ExperimentConfig::from_config(small_awgn_config());
  Experiment exp(cfg);
  const auto point = exp.run_point(first_coords(cfg));
  REQUIRE(point.error.empty());

  // BMD oracle at the same Es/N0, driven by the chain's empirical prior
  const auto tx = exp.build_tx(first_coords(cfg));
  const auto& c = tx.constellation;
  std::vector<double> points(16);
  std::vector<unsigned> labels(16);
  std::vector<double> dim_priors = c.dim_priors(tx.amp_prior);
  for (int i = 0; i < 16; ++i) {
    points[i] = c.dim_values()[i];
    labels[i] = QamConstellation::gray_label(i);
  }
  const double sigma2 = 0.5 / db_to_linear(cfg.awgn_es_n0_db);  // per dimension
  const double loss_dim =
      oracle::ask_bmd_loss_gh(points, labels, dim_priors, c.bits_per_dim(), sigma2);
  const double oracle_air = tx.prior_entropy - 2.0 * loss_dim;
  CHECK(point.values.at("air") == Catch::Approx(oracle_air).margin(0.03));
  CHECK(point.values.at("snr_db") == Catch::Approx(cfg.awgn_es_n0_db).margin(0.1));
}

TEST_CASE("run_point is deterministic and worker-count independent") {
  auto c = small_fiber_config();
  c.set("dm.n_list", "16,64");
  c.set("power.dbm_list", "1,2");
  c.set("metrics", "snr,air,rate_loss");
  const auto cfg = ExperimentConfig::from_config(c);

  Experiment a(cfg);
  const auto pa = a.run_sweep();

  auto cw = c;
  cw.set("workers", "4");
  Experiment b(ExperimentConfig::from_config(cw));
  const auto pb = b.run_sweep();

  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].coords.key() == pb[i].coords.key());
    for (const auto& [k, v] : pa[i].values) {
      if (std::isnan(v))
        CHECK(std::isnan(pb[i].values.at(k)));
      else
        CHECK(pb[i].values.at(k) == v);  // bit identical
    }
  }
}

TEST_CASE("fiber point produces the full metric set") {
  const auto cfg = ExperimentConfig::from_config(small_fiber_config());
  Experiment exp(cfg);
  const auto point = exp.run_point(first_coords(cfg));
  REQUIRE(point.error.empty());
  for (const char* key : {"snr_db", "air", "air_halfwidth", "npn", "eedi", "rate_loss"}) {
    REQUIRE(point.values.count(key));
    CHECK_FALSE(std::isnan(point.values.at(key)));
  }
  CHECK(point.values.at("air") > 3.0);
  CHECK(point.values.at("air") < 6.0);
  CHECK(point.values.at("snr_db") > 10.0);
  CHECK(point.values.at("npn") > 0.0);
}

TEST_CASE("serial and parallel maps agree on AWGN") {
  auto c = small_awgn_config();
  c.set("symbols_per_frame", "4096");
  const auto base = ExperimentConfig::from_config(c);
  Experiment exp(base);
  auto coords = first_coords(base);
  const auto serial = exp.run_point(coords);
  coords.map = MapKind::Parallel;
  const auto parallel = exp.run_point(coords);
  REQUIRE(serial.error.empty());
  REQUIRE(parallel.error.empty());
  const double hw = serial.values.at("air_halfwidth") + parallel.values.at("air_halfwidth");
  CHECK(std::abs(serial.values.at("air") - parallel.values.at("air")) < 2.0 * hw + 0.02);
}

TEST_CASE("npn on a dispersion-managed link is marked failed, point continues") {
  auto c = small_fiber_config();
  c.set("link.dcf", "true");
  c.set("link.step_dcf_km", "0.5");
  const auto cfg = ExperimentConfig::from_config(c);
  Experiment exp(cfg);
  const auto point = exp.run_point(first_coords(cfg));
  REQUIRE(point.error.empty());  // the point itself succeeds
  CHECK(std::isnan(point.values.at("npn")));
  CHECK_FALSE(point.warnings.empty());
  CHECK_FALSE(std::isnan(point.values.at("snr_db")));
}

TEST_CASE("results emission round trip and manifest stability") {
  auto c = small_awgn_config();
  c.set("dm.n_list", "16,64");
  const auto cfg = ExperimentConfig::from_config(c);
  Experiment exp(cfg);
  const auto points = exp.run_sweep();

  const std::string dir = "/tmp/paslab_results_test";
  std::filesystem::remove_all(dir);
  emit_results(points, cfg, dir);

  // round trip: emitted values reparse exactly
  std::ifstream in(dir + "/results.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  const auto cols = result_columns(cfg);
  std::string expect_header;
  for (std::size_t i = 0; i < cols.size(); ++i) expect_header += (i ? "," : "") + cols[i];
  CHECK(header == expect_header);
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    const auto it = std::find(cols.begin(), cols.end(), "air");
    const std::size_t air_col = it - cols.begin();
    const double air = std::stod(cells.at(air_col));
    bool matched = false;
    for (const auto& p : points)
      if (std::abs(p.values.at("air") - air) < 1e-9) matched = true;
    CHECK(matched);
  }
  CHECK(rows == points.size());

  // manifest hash changes iff the config changes
  std::ifstream m1(dir + "/manifest.json");
  std::stringstream s1;
  s1 << m1.rdbuf();
  emit_results(points, cfg, dir);  // identical write
  std::ifstream m2(dir + "/manifest.json");
  std::stringstream s2;
  s2 << m2.rdbuf();
  CHECK(s1.str() == s2.str());

  auto c2 = c;
  c2.set("seed", "999");
  const auto cfg2 = ExperimentConfig::from_config(c2);
  emit_results(points, cfg2, dir);
  std::ifstream m3(dir + "/manifest.json");
  std::stringstream s3;
  s3 << m3.rdbuf();
  CHECK(s1.str() != s3.str());
}

TEST_CASE("power optimization refines around the coarse argmax") {
  auto c = small_fiber_config();
  c.set("symbols_per_frame", "512");
  c.set("guard_symbols", "32");
  c.set("dm.n_list", "64");
  c.set("metrics", "snr,air,rate_loss");
  c.set("power.dbm_list", "-2,0,2");
  c.set("power.optimize", "true");
  const auto cfg = ExperimentConfig::from_config(c);
  Experiment exp(cfg);
  const auto points = exp.run_sweep();
  CHECK(points.size() >= 4);  // coarse grid + at least one refinement
  int optimal = 0;
  for (const auto& p : points) optimal += p.optimal_power ? 1 : 0;
  CHECK(optimal == 1);
}

TEST_CASE("kernel cache is reused by sweeps") {
  auto c = small_fiber_config();
  const std::string dir = "/tmp/paslab_cache_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  c.set("cache_dir", dir);
  const auto cfg = ExperimentConfig::from_config(c);
  {
    Experiment exp(cfg);
    const auto p = exp.run_point(first_coords(cfg));
    REQUIRE(p.error.empty());
  }
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  {
    Experiment exp(cfg);
    const auto p = exp.run_point(first_coords(cfg));
    REQUIRE(p.error.empty());
  }
  std::size_t files2 = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++files2;
  }
  CHECK(files2 == 1);
}
