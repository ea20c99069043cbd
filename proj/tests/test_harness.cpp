#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcbeam/harness.hpp"
#include "mcbeam/scenario.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mcbeam;
namespace fs = std::filesystem;

namespace {

std::string write_tmp(const std::string& name, const std::string& content) {
  fs::path p = fs::path("/tmp") / name;
  std::ofstream os(p);
  os << content;
  return p.string();
}

bool same_double(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (Method m : {Method::centralized, Method::alg1, Method::alg2, Method::iid, Method::zf,
                   Method::iczf, Method::asymptotic, Method::grouped})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK_THROWS_AS(method_from_name("does-not-exist"), std::invalid_argument);
}

TEST_CASE("empty config file yields the default experiment") {
  std::string p = write_tmp("harness_empty.cfg", "");
  ExperimentSpec spec = parse_config(p);
  CHECK(spec.config.L == 7);
  CHECK(spec.config.K_per_cell == 2);
  CHECK(spec.config.N == 8);
  CHECK(spec.config.noise_power == doctest::Approx(3.981071705534969e-14).epsilon(1e-15));
  CHECK(spec.drops == 500);
  REQUIRE(spec.methods.size() == 1);
  CHECK(spec.methods[0] == Method::centralized);
  CHECK(spec.out_dir == "out");
  CHECK(spec.emit_per_drop_csv);
  CHECK(spec.emit_summary);
  CHECK(spec.emit_cdf_points);
}

TEST_CASE("config keys parse with comments and unit conversions") {
  std::string p = write_tmp("harness_full.cfg",
                            "# experiment\n"
                            "L = 2\n"
                            "K_per_cell = 3\n"
                            "N = 12   # antennas\n"
                            "mu = 1.0,2.0\n"
                            "noise_dbm = -104\n"
                            "inter_site_distance_m = 800\n"
                            "d0_m = 1\n"
                            "pathloss_exponent = 3.5\n"
                            "spacing_ratio = 0.5\n"
                            "served_spread_rad = 1.0\n"
                            "interferer_spread_rad = 0.4\n"
                            "target_rate = 1.5\n"
                            "min_ue_distance_m = 40\n"
                            "base_seed = 77\n"
                            "bandwidth_mhz = 20\n"
                            "drops = 11\n"
                            "methods = centralized, alg1, grouped\n"
                            "out_dir = /tmp/harness_out_cfg\n"
                            "emit_per_drop_csv = true\n"
                            "emit_summary = 0\n"
                            "emit_cdf_points = false\n");
  ExperimentSpec spec = parse_config(p);
  CHECK(spec.config.L == 2);
  CHECK(spec.config.K_per_cell == 3);
  CHECK(spec.config.N == 12);
  REQUIRE(spec.config.mu.size() == 2);
  CHECK(spec.config.mu[1] == 2.0);
  CHECK(spec.config.noise_power == doctest::Approx(3.981071705534969e-14).epsilon(1e-12));
  CHECK(spec.config.inter_site_distance == 800.0);
  CHECK(spec.config.pathloss_exponent == 3.5);
  CHECK(spec.config.target_rate == 1.5);
  CHECK(spec.config.base_seed == 77);
  CHECK(spec.drops == 11);
  REQUIRE(spec.methods.size() == 3);
  CHECK(spec.methods[2] == Method::grouped);
  CHECK(spec.out_dir == "/tmp/harness_out_cfg");
  CHECK(spec.emit_per_drop_csv);
  CHECK_FALSE(spec.emit_summary);
  CHECK_FALSE(spec.emit_cdf_points);
}

TEST_CASE("config errors carry the offending line") {
  std::string p = write_tmp("harness_bad.cfg", "L = 2\nK_per_cell = 2\nfrobnicate = 9\n");
  try {
    parse_config(p);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find(":3:") != std::string::npos);
    CHECK(msg.find("frobnicate") != std::string::npos);
  }

  std::string q = write_tmp("harness_bad2.cfg", "N = twelve\n");
  try {
    parse_config(q);
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
  }

  std::string r = write_tmp("harness_bad3.cfg", "drops = 0\n");
  CHECK_THROWS_AS(parse_config(r), std::invalid_argument);
  std::string s = write_tmp("harness_bad4.cfg", "noise_dbm = -104\nnoise_power_w = 1e-13\n");
  CHECK_THROWS_AS(parse_config(s), std::invalid_argument);
  std::string t = write_tmp("harness_bad5.cfg", "L 2\n");
  CHECK_THROWS_AS(parse_config(t), std::invalid_argument);
}

TEST_CASE("csv rows survive an exact round-trip") {
  RunRecord a;
  a.method = "alg1";
  a.feasible = true;
  a.per_ue_rate = VecD(3);
  a.per_ue_rate << 1.0 / 3.0, 0.9999999999999999, 2.7182818284590452;
  a.per_bs_power = VecD(2);
  a.per_bs_power << 1.2345678901234567e-5, 9.87654320987654e-300;
  a.total_power_w = a.per_bs_power.sum();
  a.total_power_dbm = watt_to_dbm(a.total_power_w);
  a.backhaul_scalars = 1344;
  a.iterations = 97;

  RunRecord b;  // infeasible row keeps nan power fields
  b.method = "zf";
  b.feasible = false;
  b.per_bs_power = VecD::Zero(2);

  std::string path = write_tmp("harness_roundtrip.csv",
                               csv_header() + "\n" + csv_row(a, 0) + "\n" + csv_row(b, 0) + "\n");
  std::vector<CsvRow> rows = parse_csv(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "alg1");
  CHECK(rows[0].feasible);
  CHECK(same_double(rows[0].total_power_w, a.total_power_w));
  CHECK(same_double(rows[0].total_power_dbm, a.total_power_dbm));
  CHECK(same_double(rows[0].min_rate, a.per_ue_rate.minCoeff()));
  CHECK(same_double(rows[0].mean_rate, a.per_ue_rate.mean()));
  REQUIRE(rows[0].per_bs_power.size() == 2);
  CHECK(same_double(rows[0].per_bs_power[1], 9.87654320987654e-300));
  CHECK(rows[0].backhaul_scalars == 1344);
  CHECK(rows[0].iterations == 97);
  CHECK_FALSE(rows[1].feasible);
  CHECK(std::isnan(rows[1].total_power_w));
  CHECK(std::isnan(rows[1].min_rate));
}

TEST_CASE("experiment loop is deterministic and emits the declared files") {
  ExperimentSpec spec;
  spec.config.L = 2;
  spec.config.K_per_cell = 2;
  spec.config.N = 8;
  spec.config.base_seed = 400;
  spec.drops = 3;
  spec.methods = {Method::centralized, Method::zf};
  spec.out_dir = "/tmp/harness_run_a";
  fs::remove_all(spec.out_dir);

  ExperimentResult res = run_experiment(spec);
  REQUIRE(res.records.size() == 6);
  CHECK(res.records[0].method == "centralized");
  CHECK(res.records[1].method == "zf");
  CHECK(res.records[0].seed == 400);
  CHECK(res.records[2].seed == 401);
  CHECK(res.records[4].seed == 402);

  ExperimentResult rep = run_experiment(spec);
  for (size_t i = 0; i < res.records.size(); ++i) {
    CHECK(res.records[i].feasible == rep.records[i].feasible);
    CHECK(same_double(res.records[i].total_power_w, rep.records[i].total_power_w));
    REQUIRE(res.records[i].per_ue_rate.size() == rep.records[i].per_ue_rate.size());
    for (Eigen::Index k = 0; k < res.records[i].per_ue_rate.size(); ++k)
      CHECK(same_double(res.records[i].per_ue_rate(k), rep.records[i].per_ue_rate(k)));
  }

  CHECK(fs::exists(fs::path(spec.out_dir) / "records.csv"));
  CHECK(fs::exists(fs::path(spec.out_dir) / "summary.txt"));
  CHECK(fs::exists(fs::path(spec.out_dir) / "cdf_centralized.csv"));
  CHECK(fs::exists(fs::path(spec.out_dir) / "cdf_zf.csv"));
  std::vector<CsvRow> rows = parse_csv((fs::path(spec.out_dir) / "records.csv").string());
  REQUIRE(rows.size() == 6);
  CHECK(rows[5].drop == 2);
  for (size_t i = 0; i < rows.size(); ++i)
    CHECK(same_double(rows[i].total_power_w, res.records[i].total_power_w));

  // summary aggregates exactly the feasible rows
  REQUIRE(res.summary.per_method.size() == 2);
  const MethodSummary& ms = res.summary.per_method[0];
  CHECK(ms.rows == 3);
  double acc = 0;
  int n = 0;
  for (const RunRecord& r : res.records)
    if (r.method == "centralized" && r.feasible) {
      acc += r.total_power_w;
      ++n;
    }
  REQUIRE(ms.feasible_rows == n);
  REQUIRE(n > 0);
  CHECK(ms.mean_power_w == doctest::Approx(acc / n).epsilon(1e-15));
  CHECK(ms.mean_power_dbm == doctest::Approx(watt_to_dbm(acc / n)).epsilon(1e-12));

  ExperimentSpec quiet = spec;
  quiet.out_dir = "/tmp/harness_run_b";
  quiet.emit_per_drop_csv = quiet.emit_summary = quiet.emit_cdf_points = false;
  fs::remove_all(quiet.out_dir);
  run_experiment(quiet);
  CHECK_FALSE(fs::exists(fs::path(quiet.out_dir) / "records.csv"));
}

TEST_CASE("grouped runs share one realization with every other method") {
  ExperimentSpec spec;
  spec.config.L = 2;
  spec.config.K_per_cell = 3;
  spec.config.N = 12;
  spec.config.base_seed = 910;
  spec.drops = 2;
  spec.methods = {Method::centralized, Method::alg1, Method::grouped};
  spec.out_dir = "/tmp/harness_run_g";
  fs::remove_all(spec.out_dir);
  ExperimentResult res = run_experiment(spec);
  REQUIRE(res.records.size() == 6);
  for (size_t t = 0; t < 2; ++t) {
    const RunRecord& cen = res.records[3 * t];
    const RunRecord& grp = res.records[3 * t + 2];
    CHECK(cen.feasible);
    CHECK(grp.method == "grouped");
    CHECK(grp.backhaul_scalars == (2 - 1) * 6);
    if (grp.feasible && cen.feasible)
      CHECK(grp.total_power_w >= cen.total_power_w * (1.0 - 1e-9));
  }

  ExperimentSpec bad = spec;
  bad.config.L = 7;
  CHECK_THROWS_AS(run_experiment(bad), std::invalid_argument);
}

TEST_CASE("cdf output is sorted and complete") {
  VecD r(4);
  r << 0.5, 1.0, 1.5, 2.0;
  std::ostringstream os;
  write_cdf(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "rate,cdf");
  double prev_rate = -1, prev_cdf = 0, rate = 0, cdf = 0;
  int n = 0;
  char comma;
  while (is >> rate >> comma >> cdf) {
    CHECK(rate > prev_rate);
    CHECK(cdf > prev_cdf);
    prev_rate = rate;
    prev_cdf = cdf;
    ++n;
  }
  CHECK(n == 4);
  CHECK(cdf == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("validation suite passes its fixed-seed checks") {
  NetworkConfig cfg;  // defaults
  std::ostringstream out;
  bool ok = validate_suite(cfg, {}, out);
  INFO(out.str());
  CHECK(ok);
  CHECK(out.str().find("check multipliers: PASS") != std::string::npos);
  CHECK(out.str().find("check coupling: PASS") != std::string::npos);
  CHECK(out.str().find("check derivatives: PASS") != std::string::npos);
  CHECK(out.str().find("check exactness: PASS") != std::string::npos);
  CHECK(out.str().find("check grouping: PASS") != std::string::npos);
  CHECK(out.str().find("check backhaul: PASS") != std::string::npos);

  std::ostringstream two;
  bool ok2 = validate_suite(cfg, {"backhaul"}, two);
  CHECK(ok2);
  CHECK(two.str().find("multipliers") == std::string::npos);
}

TEST_CASE("backhaul report prints the accounting table") {
  NetworkConfig cfg;
  cfg.L = 2;
  cfg.K_per_cell = 2;
  cfg.N = 10;
  std::ostringstream os;
  backhaul_report(cfg, os);
  std::string s = os.str();
  CHECK(s.find("L=2 K=4 N=10") != std::string::npos);
  CHECK(s.find("alg1 400 0") != std::string::npos);
  CHECK(s.find("alg2 4 0") != std::string::npos);
  CHECK(s.find("centralized 0 80") != std::string::npos);
  CHECK(s.find("stats ratio alg1/alg2 = 100") != std::string::npos);
}
