#include "mcbeam/harness.hpp"

#include "mcbeam/det_equiv.hpp"
#include "mcbeam/duality.hpp"
#include "mcbeam/grouping.hpp"
#include "mcbeam/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mcbeam {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

[[noreturn]] void config_error(const std::string& path, int line, const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& path, int line, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    config_error(path, line, "expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& path, int line, const std::string& v) {
  try {
    size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    config_error(path, line, "expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& path, int line, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  config_error(path, line, "expected a boolean, got '" + v + "'");
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::centralized: return "centralized";
    case Method::alg1: return "alg1";
    case Method::alg2: return "alg2";
    case Method::iid: return "iid";
    case Method::zf: return "zf";
    case Method::iczf: return "iczf";
    case Method::asymptotic: return "asymptotic";
    case Method::grouped: return "grouped";
  }
  throw std::invalid_argument("unreachable method");
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::centralized, Method::alg1, Method::alg2, Method::iid, Method::zf,
                   Method::iczf, Method::asymptotic, Method::grouped})
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name + "'");
}

ExperimentSpec parse_config(const std::string& path) {
  ExperimentSpec spec;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  std::string raw;
  int lineno = 0;
  bool noise_set = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) config_error(path, lineno, "expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    NetworkConfig& c = spec.config;

    if (key == "L") c.L = static_cast<int>(parse_int(path, lineno, val));
    else if (key == "K_per_cell") c.K_per_cell = static_cast<int>(parse_int(path, lineno, val));
    else if (key == "N") c.N = static_cast<int>(parse_int(path, lineno, val));
    else if (key == "mu") {
      c.mu.clear();
      for (const std::string& tok : split(val, ','))
        c.mu.push_back(parse_double(path, lineno, trim(tok)));
    } else if (key == "noise_dbm") {
      if (noise_set) config_error(path, lineno, "noise specified twice");
      c.noise_power = dbm_to_watt(parse_double(path, lineno, val));
      noise_set = true;
    } else if (key == "noise_power_w") {
      if (noise_set) config_error(path, lineno, "noise specified twice");
      c.noise_power = parse_double(path, lineno, val);
      noise_set = true;
    } else if (key == "inter_site_distance_m")
      c.inter_site_distance = parse_double(path, lineno, val);
    else if (key == "d0_m") c.d0 = parse_double(path, lineno, val);
    else if (key == "pathloss_exponent") c.pathloss_exponent = parse_double(path, lineno, val);
    else if (key == "spacing_ratio") c.spacing_ratio = parse_double(path, lineno, val);
    else if (key == "served_spread_rad") c.served_spread = parse_double(path, lineno, val);
    else if (key == "interferer_spread_rad") c.interferer_spread = parse_double(path, lineno, val);
    else if (key == "target_rate") c.target_rate = parse_double(path, lineno, val);
    else if (key == "min_ue_distance_m") c.min_ue_distance = parse_double(path, lineno, val);
    else if (key == "base_seed")
      c.base_seed = static_cast<std::uint64_t>(parse_int(path, lineno, val));
    else if (key == "bandwidth_mhz") c.bandwidth_mhz = parse_double(path, lineno, val);
    else if (key == "drops") spec.drops = static_cast<int>(parse_int(path, lineno, val));
    else if (key == "methods") {
      spec.methods.clear();
      for (const std::string& tok : split(val, ',')) {
        try {
          spec.methods.push_back(method_from_name(trim(tok)));
        } catch (const std::invalid_argument& e) {
          config_error(path, lineno, e.what());
        }
      }
      if (spec.methods.empty()) config_error(path, lineno, "methods list is empty");
    } else if (key == "out_dir") spec.out_dir = val;
    else if (key == "emit_per_drop_csv") spec.emit_per_drop_csv = parse_bool(path, lineno, val);
    else if (key == "emit_summary") spec.emit_summary = parse_bool(path, lineno, val);
    else if (key == "emit_cdf_points") spec.emit_cdf_points = parse_bool(path, lineno, val);
    else config_error(path, lineno, "unknown key '" + key + "'");
  }
  spec.config.validate();
  if (spec.drops <= 0) throw std::invalid_argument(path + ": drops must be positive");
  return spec;
}

std::string csv_header() {
  return "drop,method,feasible,total_power_w,total_power_dbm,min_rate,mean_rate,"
         "per_bs_power,backhaul_scalars,solver_iterations";
}

std::string csv_row(const RunRecord& r, int drop) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double min_rate = r.per_ue_rate.size() ? r.per_ue_rate.minCoeff() : nan;
  double mean_rate = r.per_ue_rate.size() ? r.per_ue_rate.mean() : nan;
  std::string bs;
  for (Eigen::Index b = 0; b < r.per_bs_power.size(); ++b) {
    if (b) bs += ';';
    bs += g17(r.per_bs_power(b));
  }
  std::ostringstream os;
  os << drop << ',' << r.method << ',' << (r.feasible ? 1 : 0) << ',' << g17(r.total_power_w)
     << ',' << g17(r.total_power_dbm) << ',' << g17(min_rate) << ',' << g17(mean_rate) << ','
     << bs << ',' << r.backhaul_scalars << ',' << r.iterations;
  return os.str();
}

std::vector<CsvRow> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || trim(line) != csv_header())
    throw std::runtime_error(path + ": bad header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split(trim(line), ',');
    if (f.size() != 10) throw std::runtime_error(path + ": bad row '" + line + "'");
    CsvRow r;
    r.drop = std::stoi(f[0]);
    r.method = f[1];
    r.feasible = f[2] == "1";
    r.total_power_w = std::strtod(f[3].c_str(), nullptr);
    r.total_power_dbm = std::strtod(f[4].c_str(), nullptr);
    r.min_rate = std::strtod(f[5].c_str(), nullptr);
    r.mean_rate = std::strtod(f[6].c_str(), nullptr);
    if (!f[7].empty())
      for (const std::string& tok : split(f[7], ';'))
        r.per_bs_power.push_back(std::strtod(tok.c_str(), nullptr));
    r.backhaul_scalars = std::stoll(f[8]);
    r.iterations = std::stoi(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

Summary summarize(const std::vector<RunRecord>& records, const ExperimentSpec& spec,
                  double wall_time_s) {
  Summary s;
  s.base_seed = spec.config.base_seed;
  s.drops = spec.drops;
  s.wall_time_s = wall_time_s;
  for (Method m : spec.methods) {
    MethodSummary ms;
    ms.method = m;
    std::string name = method_name(m);
    double power_acc = 0, rate_acc = 0;
    long long rate_n = 0;
    std::vector<double> rates;
    for (const RunRecord& r : records) {
      if (r.method != name) continue;
      ++ms.rows;
      ms.backhaul_scalars = r.backhaul_scalars;
      for (Eigen::Index i = 0; i < r.per_ue_rate.size(); ++i)
        if (std::isfinite(r.per_ue_rate(i))) rates.push_back(r.per_ue_rate(i));
      if (!r.feasible) continue;
      ++ms.feasible_rows;
      power_acc += r.total_power_w;
      for (Eigen::Index i = 0; i < r.per_ue_rate.size(); ++i) {
        rate_acc += r.per_ue_rate(i);
        ++rate_n;
      }
    }
    ms.feasibility_rate = ms.rows ? static_cast<double>(ms.feasible_rows) / ms.rows : 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ms.mean_power_w = ms.feasible_rows ? power_acc / ms.feasible_rows : nan;
    ms.mean_power_dbm = ms.feasible_rows ? watt_to_dbm(ms.mean_power_w) : nan;
    ms.mean_rate = rate_n ? rate_acc / static_cast<double>(rate_n) : nan;
    std::sort(rates.begin(), rates.end());
    ms.cdf_rates = Eigen::Map<VecD>(rates.data(), static_cast<Eigen::Index>(rates.size()));
    s.per_method.push_back(std::move(ms));
  }
  return s;
}

void write_summary(std::ostream& os, const Summary& s, const ExperimentSpec& spec) {
  os << "drops=" << s.drops << " base_seed=" << s.base_seed << " L=" << spec.config.L
     << " K=" << spec.config.K() << " N=" << spec.config.N << " wall_time_s=" << g17(s.wall_time_s)
     << "\n";
  os << "method rows feasible_rows feasibility_rate mean_power_w mean_power_dbm mean_rate "
        "backhaul_scalars\n";
  for (const MethodSummary& ms : s.per_method)
    os << method_name(ms.method) << ' ' << ms.rows << ' ' << ms.feasible_rows << ' '
       << g17(ms.feasibility_rate) << ' ' << g17(ms.mean_power_w) << ' '
       << g17(ms.mean_power_dbm) << ' ' << g17(ms.mean_rate) << ' ' << ms.backhaul_scalars
       << "\n";
}

void write_cdf(std::ostream& os, const VecD& sorted_rates) {
  os << "rate,cdf\n";
  const double n = static_cast<double>(sorted_rates.size());
  for (Eigen::Index i = 0; i < sorted_rates.size(); ++i)
    os << g17(sorted_rates(i)) << ',' << g17(static_cast<double>(i + 1) / n) << "\n";
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  auto t0 = std::chrono::steady_clock::now();
  const NetworkConfig& cfg = spec.config;
  bool want_grouped = false;
  for (Method m : spec.methods) want_grouped = want_grouped || m == Method::grouped;
  if (want_grouped && (cfg.L != 2 || cfg.K_per_cell % 3 != 0))
    throw std::invalid_argument(
        "grouped runs need two cells and K_per_cell divisible by the group count");

  ExperimentResult res;
  RunOpts opts;
  for (int t = 0; t < spec.drops; ++t) {
    std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    Scenario scen;
    CorrelationSet corr;
    GroupScenario gs;
    if (want_grouped) {
      gs = build_group_scenario(cfg, seed, GroupMode::geometric);
      scen = gs.scen;
      corr = expand_correlations(gs);
    } else {
      scen = build_geometry(cfg, seed);
      corr = build_correlations(scen, cfg);
    }
    ChannelSet ch = sample_channels(corr, seed);
    for (Method m : spec.methods) {
      RunRecord r;
      switch (m) {
        case Method::centralized: r = run_centralized(scen, ch, cfg, opts); break;
        case Method::alg1: r = run_alg1(scen, corr, ch, cfg, opts); break;
        case Method::alg2: r = run_alg2(scen, corr, ch, cfg, SurrogateMode::alg2, opts); break;
        case Method::iid: r = run_alg2(scen, corr, ch, cfg, SurrogateMode::iid, opts); break;
        case Method::zf: r = run_zf(scen, ch, cfg); break;
        case Method::iczf: r = run_iczf(scen, ch, cfg, opts); break;
        case Method::asymptotic: r = run_asymptotic(scen, corr, ch, cfg, opts); break;
        case Method::grouped: r = run_grouped(scen, ch, gs, cfg, opts); break;
      }
      r.seed = seed;
      res.records.push_back(std::move(r));
    }
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.summary = summarize(res.records, spec, wall);

  namespace fs = std::filesystem;
  if (spec.emit_per_drop_csv || spec.emit_summary || spec.emit_cdf_points)
    fs::create_directories(spec.out_dir);
  if (spec.emit_per_drop_csv) {
    std::ofstream os(fs::path(spec.out_dir) / "records.csv");
    os << csv_header() << "\n";
    int t = 0, m = 0;
    for (const RunRecord& r : res.records) {
      os << csv_row(r, t) << "\n";
      if (++m == static_cast<int>(spec.methods.size())) {
        m = 0;
        ++t;
      }
    }
  }
  if (spec.emit_summary) {
    std::ofstream os(fs::path(spec.out_dir) / "summary.txt");
    write_summary(os, res.summary, spec);
  }
  if (spec.emit_cdf_points)
    for (const MethodSummary& ms : res.summary.per_method) {
      std::ofstream os(fs::path(spec.out_dir) / ("cdf_" + method_name(ms.method) + ".csv"));
      write_cdf(os, ms.cdf_rates);
    }
  return res;
}

namespace {

// Joint resolvent traces at held multipliers under a one-sided shift;
// reference for the derivative checks. shift_k < 0 shifts the ridge.
VecD held_measures(const std::vector<MatC>& thetas, const VecD& lambda_bar, double mu, int N,
                   int shift_k, double x, const VecD& m_init) {
  const int K = static_cast<int>(thetas.size());
  VecD m = m_init;
  for (int it = 0; it < 5000; ++it) {
    MatC M = MatC::Zero(N, N);
    for (int j = 0; j < K; ++j)
      if (lambda_bar(j) > 0)
        M += (lambda_bar(j) / (N * (1.0 + lambda_bar(j) * m(j)))) * thetas[static_cast<size_t>(j)];
    double ridge = mu + (shift_k < 0 ? x : 0.0);
    M += ridge * MatC::Identity(N, N);
    if (shift_k >= 0) M -= (x / N) * thetas[static_cast<size_t>(shift_k)];
    MatC T = M.inverse();
    VecD next(K);
    for (int j = 0; j < K; ++j)
      next(j) = (thetas[static_cast<size_t>(j)] * T).trace().real() / N;
    double rel = 0;
    for (int j = 0; j < K; ++j)
      rel = std::max(rel, std::abs(next(j) - m(j)) / std::max(std::abs(next(j)), 1e-30));
    m = next;
    if (rel <= 1e-13) break;
  }
  return m;
}

struct CheckResult {
  bool pass = true;
  std::string detail;
};

CheckResult check_multiplier_trend(const NetworkConfig&) {
  NetworkConfig cfg;
  cfg.L = 2;
  cfg.K_per_cell = 2;
  std::vector<double> gaps;
  for (int N : {16, 32, 64}) {
    cfg.N = N;
    std::vector<double> rels;
    for (std::uint64_t seed = 900; seed < 905; ++seed) {
      Scenario scen = build_geometry(cfg, seed);
      CorrelationSet corr = build_correlations(scen, cfg);
      ChannelSet ch = sample_channels(corr, seed);
      DualSolution sol = solve_centralized(scen, ch, cfg);
      DetEquivState de =
          det_equiv_pipeline(corr, scen.serving, scen.gamma, cfg.mu_vec(), cfg.noise_power);
      if (!sol.feasible || !de.feasible) return {false, "infeasible instance"};
      double g = 0;
      for (int k = 0; k < scen.K(); ++k)
        g += std::abs(sol.state.lambda(k) - de.lambda_bar(k)) / de.lambda_bar(k);
      rels.push_back(g / scen.K());
    }
    std::sort(rels.begin(), rels.end());
    gaps.push_back(rels[rels.size() / 2]);
  }
  bool pass = gaps[0] > gaps[1] && gaps[1] > gaps[2];
  std::ostringstream os;
  os << "median rel gap " << gaps[0] << " -> " << gaps[1] << " -> " << gaps[2];
  return {pass, os.str()};
}

CheckResult check_coupling_trend(const NetworkConfig&) {
  NetworkConfig cfg;
  cfg.L = 2;
  cfg.K_per_cell = 2;
  std::vector<double> gaps;
  for (int N : {16, 32, 64}) {
    cfg.N = N;
    std::vector<double> rels;
    for (std::uint64_t seed = 950; seed < 955; ++seed) {
      Scenario scen = build_geometry(cfg, seed);
      CorrelationSet corr = build_correlations(scen, cfg);
      ChannelSet ch = sample_channels(corr, seed);
      DualSolution sol = solve_centralized(scen, ch, cfg);
      DetEquivState de =
          det_equiv_pipeline(corr, scen.serving, scen.gamma, cfg.mu_vec(), cfg.noise_power);
      if (!sol.feasible || !de.feasible) return {false, "infeasible instance"};
      UplinkProblem up;
      std::vector<int> ues(static_cast<size_t>(scen.K()));
      for (int k = 0; k < scen.K(); ++k) ues[static_cast<size_t>(k)] = k;
      up.channels = &ch;
      up.ues = ues;
      up.serving = &scen.serving;
      up.gamma = &scen.gamma;
      up.mu = cfg.mu_vec();
      std::vector<VecC> v = mmse_receivers(sol.state, up);
      MatD G = coupling_matrix(v, up);
      // same normal-direction scaling: rows of G couple delta, rows of
      // G_bar couple delta_bar; compare through the solved vectors
      VecD rhs = VecD::Constant(scen.K(), cfg.noise_power);
      VecD delta = G.partialPivLu().solve(rhs);
      VecD delta_bar = de.delta_bar;
      double g = 0;
      for (int k = 0; k < scen.K(); ++k)
        g += std::abs(delta(k) - delta_bar(k)) / delta_bar(k);
      rels.push_back(g / scen.K());
    }
    std::sort(rels.begin(), rels.end());
    gaps.push_back(rels[rels.size() / 2]);
  }
  bool pass = gaps[0] > gaps[1] && gaps[1] > gaps[2];
  std::ostringstream os;
  os << "median rel gap " << gaps[0] << " -> " << gaps[1] << " -> " << gaps[2];
  return {pass, os.str()};
}

CheckResult check_derivatives(const NetworkConfig&) {
  NetworkConfig cfg;
  cfg.L = 2;
  cfg.K_per_cell = 2;
  cfg.N = 8;
  double worst = 0;
  for (std::uint64_t seed : {970u, 971u}) {
    Scenario scen = build_geometry(cfg, seed);
    CorrelationSet corr = build_correlations(scen, cfg);
    MeasureResult mr = solve_measures(corr, scen.serving, scen.gamma, cfg.mu_vec());
    if (!mr.converged) return {false, "measures did not converge"};
    const int K = scen.K();
    for (int b = 0; b < cfg.L; ++b) {
      std::vector<MatC> thetas;
      for (int k = 0; k < K; ++k) thetas.push_back(corr.at(b, k).to_dense(cfg.N));
      MatC T = resolvent(corr, b, mr.lambda_bar, mr.m_bar, cfg.mu_of(b));
      DerivativeResult dr = derivative_measures(corr, b, T, mr.lambda_bar, mr.m_bar);
      VecD m0 = mr.m_bar.row(b).transpose();
      const double h = 1e-4;
      for (int k = 0; k < K; ++k) {
        VecD up = held_measures(thetas, mr.lambda_bar, cfg.mu_of(b), cfg.N, k, h, m0);
        VecD dn = held_measures(thetas, mr.lambda_bar, cfg.mu_of(b), cfg.N, k, -h, m0);
        for (int i = 0; i < K; ++i) {
          double fd = (up(i) - dn(i)) / (2 * h);
          double ref = dr.m_prime(i, k) / cfg.N;
          worst = std::max(worst, std::abs(fd - ref) / std::max(std::abs(ref), 1e-12));
        }
      }
      VecD up = held_measures(thetas, mr.lambda_bar, cfg.mu_of(b), cfg.N, -1, h, m0);
      VecD dn = held_measures(thetas, mr.lambda_bar, cfg.mu_of(b), cfg.N, -1, -h, m0);
      for (int i = 0; i < K; ++i) {
        double fd = (up(i) - dn(i)) / (2 * h);
        worst = std::max(worst, std::abs(fd + dr.noise_prime(i)) /
                                    std::max(std::abs(dr.noise_prime(i)), 1e-12));
      }
    }
  }
  std::ostringstream os;
  os << "worst rel fd error " << worst;
  return {worst <= 1e-4, os.str()};
}

CheckResult check_exactness(const NetworkConfig& cfg) {
  double worst_sinr = 0, worst_gap = 0;
  int feasible = 0;
  for (int t = 0; t < 50; ++t) {
    std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(t);
    Scenario scen = build_geometry(cfg, seed);
    CorrelationSet corr = build_correlations(scen, cfg);
    ChannelSet ch = sample_channels(corr, seed);
    DualSolution sol = solve_centralized(scen, ch, cfg);
    if (!sol.feasible) continue;
    ++feasible;
    for (int k = 0; k < scen.K(); ++k)
      if (scen.gamma(k) > 0)
        worst_sinr =
            std::max(worst_sinr, std::abs(sol.audit.per_ue_sinr(k) / scen.gamma(k) - 1.0));
    double up = 0;
    for (int k = 0; k < scen.K(); ++k) up += sol.state.lambda(k) * cfg.noise_power / cfg.N;
    double down = 0;
    for (int b = 0; b < cfg.L; ++b) down += cfg.mu_of(b) * sol.audit.per_bs_power(b);
    worst_gap = std::max(worst_gap, std::abs(up - down) / down);
  }
  std::ostringstream os;
  os << feasible << "/50 feasible, worst sinr dev " << worst_sinr << ", worst duality gap "
     << worst_gap;
  return {feasible > 0 && worst_sinr <= 1e-6 && worst_gap <= 1e-6, os.str()};
}

CheckResult check_grouping(const NetworkConfig&) {
  NetworkConfig cfg;
  cfg.L = 2;
  cfg.K_per_cell = 3;
  cfg.N = 12;
  double worst = 0;
  for (std::uint64_t seed : {42u, 43u, 44u}) {
    GroupScenario gs = build_group_scenario(cfg, seed, GroupMode::block_orthogonal);
    CrossValReport rep = cross_validate_grouping(gs, cfg.noise_power);
    if (!rep.ok) return {false, "cross validation infeasible"};
    worst = std::max({worst, rep.max_rel_eta, rep.max_rel_ici, rep.max_rel_power});
  }
  std::ostringstream os;
  os << "worst rel deviation " << worst;
  return {worst <= 1e-6, os.str()};
}

CheckResult check_backhaul(const NetworkConfig& cfg) {
  const int L = cfg.L, K = cfg.K(), N = cfg.N;
  long long a1 = backhaul_stats_scalars(Method::alg1, L, K, N);
  long long a2 = backhaul_stats_scalars(Method::alg2, L, K, N);
  bool pass = a1 == static_cast<long long>(L - 1) * K * N * N &&
              a2 == static_cast<long long>(L - 1) * K &&
              backhaul_stats_scalars(Method::grouped, L, K, N) == a2 &&
              backhaul_stats_scalars(Method::centralized, L, K, N) == 0 &&
              backhaul_fading_scalars(Method::centralized, L, K, N) ==
                  static_cast<long long>(L - 1) * K * 2 * N &&
              (a2 == 0 || a1 / a2 == static_cast<long long>(N) * N);
  std::ostringstream os;
  os << "stats alg1 " << a1 << ", alg2 " << a2 << ", ratio "
     << (a2 ? a1 / a2 : 0) << " (N^2 = " << static_cast<long long>(N) * N << ")";
  return {pass, os.str()};
}

}  // namespace

bool validate_suite(const NetworkConfig& config, const std::vector<std::string>& only,
                    std::ostream& out) {
  struct Entry {
    const char* name;
    CheckResult (*fn)(const NetworkConfig&);
  };
  const Entry entries[] = {
      {"multipliers", check_multiplier_trend}, {"coupling", check_coupling_trend},
      {"derivatives", check_derivatives},      {"exactness", check_exactness},
      {"grouping", check_grouping},            {"backhaul", check_backhaul},
  };
  bool all = true;
  for (const Entry& e : entries) {
    if (!only.empty() && std::find(only.begin(), only.end(), e.name) == only.end()) continue;
    CheckResult r = e.fn(config);
    out << "check " << e.name << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.detail << ")\n";
    all = all && r.pass;
  }
  return all;
}

void backhaul_report(const NetworkConfig& cfg, std::ostream& out) {
  out << "L=" << cfg.L << " K=" << cfg.K() << " N=" << cfg.N << "\n";
  out << "method stats_scalars_per_update fading_scalars_per_drop\n";
  for (Method m : {Method::centralized, Method::alg1, Method::alg2, Method::iid, Method::zf,
                   Method::iczf, Method::asymptotic, Method::grouped})
    out << method_name(m) << ' ' << backhaul_stats_scalars(m, cfg.L, cfg.K(), cfg.N) << ' '
        << backhaul_fading_scalars(m, cfg.L, cfg.K(), cfg.N) << "\n";
  long long a1 = backhaul_stats_scalars(Method::alg1, cfg.L, cfg.K(), cfg.N);
  long long a2 = backhaul_stats_scalars(Method::alg2, cfg.L, cfg.K(), cfg.N);
  if (a2 > 0) out << "stats ratio alg1/alg2 = " << a1 / a2 << "\n";
}

}  // namespace mcbeam
