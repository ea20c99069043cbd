#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcbeam/grouping.hpp"
#include "mcbeam/harness.hpp"
#include "mcbeam/scenario.hpp"

#include <sstream>
#include <stdexcept>

namespace py = pybind11;
using namespace mcbeam;

namespace {

// mirrors the config-file keys, so python callers and files stay in sync
NetworkConfig config_from_kwargs(const py::kwargs& kw) {
  NetworkConfig c;
  for (auto item : kw) {
    std::string key = py::cast<std::string>(item.first);
    py::handle v = item.second;
    if (key == "L") c.L = py::cast<int>(v);
    else if (key == "K_per_cell") c.K_per_cell = py::cast<int>(v);
    else if (key == "N") c.N = py::cast<int>(v);
    else if (key == "mu") c.mu = py::cast<std::vector<double>>(v);
    else if (key == "noise_dbm") c.noise_power = dbm_to_watt(py::cast<double>(v));
    else if (key == "noise_power_w") c.noise_power = py::cast<double>(v);
    else if (key == "inter_site_distance_m") c.inter_site_distance = py::cast<double>(v);
    else if (key == "d0_m") c.d0 = py::cast<double>(v);
    else if (key == "pathloss_exponent") c.pathloss_exponent = py::cast<double>(v);
    else if (key == "spacing_ratio") c.spacing_ratio = py::cast<double>(v);
    else if (key == "served_spread_rad") c.served_spread = py::cast<double>(v);
    else if (key == "interferer_spread_rad") c.interferer_spread = py::cast<double>(v);
    else if (key == "target_rate") c.target_rate = py::cast<double>(v);
    else if (key == "min_ue_distance_m") c.min_ue_distance = py::cast<double>(v);
    else if (key == "base_seed") c.base_seed = py::cast<std::uint64_t>(v);
    else if (key == "bandwidth_mhz") c.bandwidth_mhz = py::cast<double>(v);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

py::dict record_to_dict(const RunRecord& r) {
  py::dict d;
  d["method"] = r.method;
  d["seed"] = r.seed;
  d["feasible"] = r.feasible;
  d["per_ue_rate"] = r.per_ue_rate;
  d["per_ue_sinr"] = r.per_ue_sinr;
  d["per_bs_power"] = r.per_bs_power;
  d["total_power_w"] = r.total_power_w;
  d["total_power_dbm"] = r.total_power_dbm;
  d["weighted_power"] = r.weighted_power;
  d["backhaul_scalars"] = r.backhaul_scalars;
  d["iterations"] = r.iterations;
  return d;
}

py::dict run_drop(std::uint64_t seed, const std::string& method, const py::kwargs& kw) {
  ExperimentSpec spec;
  spec.config = config_from_kwargs(kw);
  spec.config.base_seed = seed;
  spec.drops = 1;
  spec.methods = {method_from_name(method)};
  spec.emit_per_drop_csv = spec.emit_summary = spec.emit_cdf_points = false;
  ExperimentResult res = run_experiment(spec);
  return record_to_dict(res.records.at(0));
}

py::dict run_drops(int drops, const std::vector<std::string>& methods, const py::kwargs& kw) {
  ExperimentSpec spec;
  spec.config = config_from_kwargs(kw);
  spec.drops = drops;
  spec.methods.clear();
  for (const std::string& m : methods) spec.methods.push_back(method_from_name(m));
  spec.emit_per_drop_csv = spec.emit_summary = spec.emit_cdf_points = false;
  ExperimentResult res = run_experiment(spec);
  py::list records;
  for (const RunRecord& r : res.records) records.append(record_to_dict(r));
  py::dict summary;
  for (const MethodSummary& ms : res.summary.per_method) {
    py::dict s;
    s["rows"] = ms.rows;
    s["feasible_rows"] = ms.feasible_rows;
    s["feasibility_rate"] = ms.feasibility_rate;
    s["mean_power_w"] = ms.mean_power_w;
    s["mean_power_dbm"] = ms.mean_power_dbm;
    s["mean_rate"] = ms.mean_rate;
    s["backhaul_scalars"] = ms.backhaul_scalars;
    summary[py::str(method_name(ms.method))] = s;
  }
  py::dict out;
  out["records"] = records;
  out["summary"] = summary;
  return out;
}

py::dict centralized_from_channels(const std::vector<MatC>& channels,
                                   const std::vector<int>& serving, const VecD& gamma,
                                   const std::vector<double>& mu, double noise_power) {
  const int L = static_cast<int>(channels.size());
  if (L == 0) throw std::invalid_argument("need at least one BS channel matrix");
  const int N = static_cast<int>(channels[0].rows());
  const int K = static_cast<int>(channels[0].cols());
  for (const MatC& H : channels)
    if (H.rows() != N || H.cols() != K)
      throw std::invalid_argument("channel matrices must share one N x K shape");
  if (static_cast<int>(serving.size()) != K || gamma.size() != K)
    throw std::invalid_argument("serving and gamma must have K entries");
  if (static_cast<int>(mu.size()) != L)
    throw std::invalid_argument("mu must have L entries");

  ChannelSet ch;
  ch.L = L;
  ch.K = K;
  ch.N = N;
  ch.H = channels;

  Scenario scen;
  scen.bs_positions.assign(static_cast<size_t>(L), Vec2::Zero());
  scen.ue_positions.assign(static_cast<size_t>(K), Vec2::Zero());
  scen.serving = serving;
  scen.served.assign(static_cast<size_t>(L), {});
  for (int k = 0; k < K; ++k) {
    if (serving[static_cast<size_t>(k)] < 0 || serving[static_cast<size_t>(k)] >= L)
      throw std::invalid_argument("serving index out of range");
    scen.served[static_cast<size_t>(serving[static_cast<size_t>(k)])].push_back(k);
  }
  scen.gamma = gamma;
  scen.pathloss = MatD::Ones(L, K);
  scen.aoa = MatD::Zero(L, K);
  scen.spread = MatD::Zero(L, K);

  NetworkConfig cfg;
  cfg.L = L;
  cfg.K_per_cell = std::max(1, K / std::max(1, L));
  cfg.N = N;
  cfg.mu = mu;
  cfg.noise_power = noise_power;

  DualSolution sol = solve_centralized(scen, ch, cfg);
  py::dict d;
  d["feasible"] = sol.feasible;
  d["lambda"] = sol.state.lambda;
  d["delta"] = sol.delta;
  d["per_ue_sinr"] = sol.audit.per_ue_sinr;
  d["per_ue_rate"] = sol.audit.per_ue_rate;
  d["per_bs_power"] = sol.audit.per_bs_power;
  d["iterations"] = sol.state.iterations;
  return d;
}

py::dict det_equiv_from_config(std::uint64_t seed, const py::kwargs& kw) {
  NetworkConfig cfg = config_from_kwargs(kw);
  Scenario scen = build_geometry(cfg, seed);
  CorrelationSet corr = build_correlations(scen, cfg);
  DetEquivState de =
      det_equiv_pipeline(corr, scen.serving, scen.gamma, cfg.mu_vec(), cfg.noise_power);
  py::dict d;
  d["feasible"] = de.feasible;
  d["lambda_bar"] = de.lambda_bar;
  d["delta_bar"] = de.delta_bar;
  d["p_bar"] = de.p_bar;
  d["ici_bar"] = de.ici_bar;
  d["m_bar"] = de.m_bar;
  return d;
}

py::dict grouped_from_config(std::uint64_t seed, const std::string& mode, const py::kwargs& kw) {
  NetworkConfig cfg = config_from_kwargs(kw);
  GroupMode gm;
  if (mode == "geometric") gm = GroupMode::geometric;
  else if (mode == "block_orthogonal") gm = GroupMode::block_orthogonal;
  else throw std::invalid_argument("mode must be geometric or block_orthogonal");
  GroupScenario gs = build_group_scenario(cfg, seed, gm);
  GroupSolution sol = solve_grouped(gs, cfg.noise_power);
  py::dict d;
  d["feasible"] = sol.feasible;
  d["eta_bar"] = sol.eta_bar;
  d["P_bar"] = sol.P_bar;
  d["ici_bar"] = sol.ici_bar;
  d["lambda_bar"] = sol.lambda_bar;
  return d;
}

py::tuple validate_checks(const std::vector<std::string>& only, const py::kwargs& kw) {
  NetworkConfig cfg = config_from_kwargs(kw);
  std::ostringstream os;
  bool ok = validate_suite(cfg, only, os);
  return py::make_tuple(ok, os.str());
}

py::dict backhaul_table(int L, int K, int N) {
  py::dict d;
  for (Method m : {Method::centralized, Method::alg1, Method::alg2, Method::iid, Method::zf,
                   Method::iczf, Method::asymptotic, Method::grouped})
    d[py::str(method_name(m))] =
        py::make_tuple(backhaul_stats_scalars(m, L, K, N), backhaul_fading_scalars(m, L, K, N));
  return d;
}

std::vector<std::string> method_names() {
  std::vector<std::string> out;
  for (Method m : {Method::centralized, Method::alg1, Method::alg2, Method::iid, Method::zf,
                   Method::iczf, Method::asymptotic, Method::grouped})
    out.push_back(method_name(m));
  return out;
}

}  // namespace

PYBIND11_MODULE(_mcbeam, m) {
  m.doc() = "coordinated multicell downlink beamforming";
  m.attr("__version__") = "0.1.0";

  m.def("dbm_to_watt", &dbm_to_watt, py::arg("dbm"));
  m.def("watt_to_dbm", &watt_to_dbm, py::arg("watt"));
  m.def("method_names", &method_names, "names accepted by the run functions");
  m.def("backhaul_table", &backhaul_table, py::arg("L"), py::arg("K"), py::arg("N"),
        "per-method (stats, fading) scalar exchange counts");
  m.def("run_drop", &run_drop, py::arg("seed"), py::arg("method") = "centralized",
        "one method on one channel drop; config keys as keyword arguments");
  m.def("run_drops", &run_drops, py::arg("drops"), py::arg("methods"),
        "Monte Carlo over drops; returns records and per-method summary");
  m.def("centralized_from_channels", &centralized_from_channels, py::arg("channels"),
        py::arg("serving"), py::arg("gamma"), py::arg("mu"), py::arg("noise_power"),
        "exact joint design for explicit per-BS N x K channel matrices");
  m.def("det_equiv_from_config", &det_equiv_from_config, py::arg("seed"),
        "statistics-only deterministic equivalents for one drop geometry");
  m.def("grouped_from_config", &grouped_from_config, py::arg("seed"),
        py::arg("mode") = "geometric", "group fast path for two-cell sectored drops");
  m.def("validate_checks", &validate_checks, py::arg("only") = std::vector<std::string>{},
        "fixed-seed consistency checks; returns (ok, report)");
}
