#include <CLI11.hpp>

#include "mcbeam/harness.hpp"

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string tok;
  for (char c : s) {
    if (c == ',') {
      out.push_back(tok);
      tok.clear();
    } else if (c != ' ') {
      tok += c;
    }
  }
  if (!tok.empty()) out.push_back(tok);
  return out;
}

mcbeam::ExperimentSpec load_spec(const std::string& config_path) {
  return config_path.empty() ? mcbeam::ExperimentSpec{} : mcbeam::parse_config(config_path);
}

void apply_overrides(mcbeam::ExperimentSpec& spec, const std::string& methods_csv,
                     std::int64_t seed, int drops, const std::string& out_dir) {
  if (!methods_csv.empty()) {
    spec.methods.clear();
    for (const std::string& name : split_csv(methods_csv))
      spec.methods.push_back(mcbeam::method_from_name(name));
    if (spec.methods.empty()) throw std::invalid_argument("empty methods override");
  }
  if (seed >= 0) spec.config.base_seed = static_cast<std::uint64_t>(seed);
  if (drops > 0) spec.drops = drops;
  if (!out_dir.empty()) spec.out_dir = out_dir;
}

// numeric sweep targets; anything else is a config error
void set_sweep_key(mcbeam::ExperimentSpec& spec, const std::string& key, const std::string& v) {
  auto as_int = [&] { return std::stoi(v); };
  auto as_double = [&] { return std::stod(v); };
  if (key == "N") spec.config.N = as_int();
  else if (key == "K_per_cell") spec.config.K_per_cell = as_int();
  else if (key == "L") spec.config.L = as_int();
  else if (key == "drops") spec.drops = as_int();
  else if (key == "target_rate") spec.config.target_rate = as_double();
  else if (key == "inter_site_distance_m") spec.config.inter_site_distance = as_double();
  else if (key == "pathloss_exponent") spec.config.pathloss_exponent = as_double();
  else throw std::invalid_argument("unsupported sweep key '" + key + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinated multicell downlink beamforming harness"};
  app.require_subcommand(1);

  std::string config_path, methods_csv, out_dir, only_csv, sweep_key, sweep_values;
  std::int64_t seed = -1;
  int drops = 0;

  CLI::App* cmd_run = app.add_subcommand("run", "Monte Carlo run over channel drops");
  cmd_run->add_option("--config", config_path, "key=value configuration file");
  cmd_run->add_option("--seed", seed, "override base_seed");
  cmd_run->add_option("--drops", drops, "override drop count");
  cmd_run->add_option("--methods", methods_csv, "comma-separated method list");
  cmd_run->add_option("--out", out_dir, "override output directory");

  CLI::App* cmd_validate = app.add_subcommand("validate", "fixed-seed consistency checks");
  cmd_validate->add_option("--config", config_path, "key=value configuration file");
  cmd_validate->add_option("--only", only_csv, "run only the named checks");

  CLI::App* cmd_backhaul = app.add_subcommand("backhaul", "signaling-load accounting table");
  cmd_backhaul->add_option("--config", config_path, "key=value configuration file");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "repeat a run across one varying key");
  cmd_sweep->add_option("--config", config_path, "key=value configuration file");
  cmd_sweep->add_option("--key", sweep_key, "config key to vary")->required();
  cmd_sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  cmd_sweep->add_option("--seed", seed, "override base_seed");
  cmd_sweep->add_option("--drops", drops, "override drop count");
  cmd_sweep->add_option("--methods", methods_csv, "comma-separated method list");
  cmd_sweep->add_option("--out", out_dir, "base output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_run->parsed()) {
      mcbeam::ExperimentSpec spec;
      try {
        spec = load_spec(config_path);
        apply_overrides(spec, methods_csv, seed, drops, out_dir);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      mcbeam::ExperimentResult res = mcbeam::run_experiment(spec);
      mcbeam::write_summary(std::cout, res.summary, spec);
      return 0;
    }
    if (cmd_validate->parsed()) {
      mcbeam::ExperimentSpec spec;
      try {
        spec = load_spec(config_path);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      std::vector<std::string> only = split_csv(only_csv);
      return mcbeam::validate_suite(spec.config, only, std::cout) ? 0 : 1;
    }
    if (cmd_backhaul->parsed()) {
      mcbeam::ExperimentSpec spec;
      try {
        spec = load_spec(config_path);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      mcbeam::backhaul_report(spec.config, std::cout);
      return 0;
    }
    if (cmd_sweep->parsed()) {
      mcbeam::ExperimentSpec base;
      std::vector<std::string> values;
      try {
        base = load_spec(config_path);
        apply_overrides(base, methods_csv, seed, drops, out_dir);
        values = split_csv(sweep_values);
        if (values.empty()) throw std::invalid_argument("empty sweep values");
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      for (const std::string& v : values) {
        mcbeam::ExperimentSpec spec = base;
        try {
          set_sweep_key(spec, sweep_key, v);
          spec.config.validate();
        } catch (const std::invalid_argument& e) {
          std::cerr << "config error: " << e.what() << "\n";
          return 2;
        }
        spec.out_dir = base.out_dir + "/" + sweep_key + "=" + v;
        mcbeam::ExperimentResult res = mcbeam::run_experiment(spec);
        for (const mcbeam::MethodSummary& ms : res.summary.per_method)
          std::cout << sweep_key << "=" << v << " " << mcbeam::method_name(ms.method)
                    << " feasible=" << ms.feasible_rows << "/" << ms.rows
                    << " mean_power_dbm=" << ms.mean_power_dbm << "\n";
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
