#pragma once

#include "mcbeam/decentralized.hpp"
#include "mcbeam/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mcbeam {

struct ExperimentSpec {
  NetworkConfig config;
  std::vector<Method> methods = {Method::centralized};
  int drops = 500;
  std::string out_dir = "out";
  bool emit_per_drop_csv = true;
  bool emit_summary = true;
  bool emit_cdf_points = true;
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Flat key=value file; '#' comments; unknown keys are errors with the line
// number. An empty file yields the full default configuration.
ExperimentSpec parse_config(const std::string& path);

struct MethodSummary {
  Method method = Method::centralized;
  int rows = 0;
  int feasible_rows = 0;
  double feasibility_rate = 0.0;
  double mean_power_w = 0.0;    // over feasible rows
  double mean_power_dbm = 0.0;  // of the mean wattage
  double mean_rate = 0.0;       // over feasible rows
  long long backhaul_scalars = 0;
  VecD cdf_rates;  // all per-UE rates, sorted ascending (every row)
};

struct Summary {
  std::vector<MethodSummary> per_method;
  std::uint64_t base_seed = 0;
  int drops = 0;
  double wall_time_s = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> records;  // drop-major, then method order of the spec
  Summary summary;
};

// Runs every requested method on the identical per-drop realization
// (seed_t = base_seed + t) and emits CSV / summary / CDF files per the
// spec's flags. Bitwise deterministic for a fixed spec.
ExperimentResult run_experiment(const ExperimentSpec& spec);

Summary summarize(const std::vector<RunRecord>& records, const ExperimentSpec& spec,
                  double wall_time_s);

std::string csv_header();
std::string csv_row(const RunRecord& r, int drop);

// Parses rows written by csv_row; exact double round-trip.
struct CsvRow {
  int drop = 0;
  std::string method;
  bool feasible = false;
  double total_power_w = 0, total_power_dbm = 0, min_rate = 0, mean_rate = 0;
  std::vector<double> per_bs_power;
  long long backhaul_scalars = 0;
  int iterations = 0;
};
std::vector<CsvRow> parse_csv(const std::string& path);

void write_summary(std::ostream& os, const Summary& s, const ExperimentSpec& spec);
void write_cdf(std::ostream& os, const VecD& sorted_rates);

// Fixed-seed validation checks (a)-(f); returns true iff every hard
// tolerance holds. `only` restricts to named checks when nonempty.
bool validate_suite(const NetworkConfig& config, const std::vector<std::string>& only,
                    std::ostream& out);

void backhaul_report(const NetworkConfig& config, std::ostream& out);

}  // namespace mcbeam
