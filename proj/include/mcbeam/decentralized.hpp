#pragma once

#include "mcbeam/det_equiv.hpp"
#include "mcbeam/duality.hpp"
#include "mcbeam/types.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace mcbeam {

struct LocalProblem {
  int bs = 0;
  const ChannelSet* channels = nullptr;
  const std::vector<int>* serving = nullptr;
  const VecD* gamma = nullptr;
  double mu_b = 1.0;
  std::vector<int> served;  // U_b
  VecD effective_noise;     // per served UE (order of `served`), sigma^2 + external ICI bound
  VecD leakage_caps;        // size K; consulted only for k outside U_b
};

struct LocalOpts {
  double tol = 1e-8;
  double leak_tol = 1e-4;
  int max_outer = 500;
  double step0 = 1.0;
  FixedPointOpts fp;
};

struct LocalResult {
  std::vector<VecC> w;  // order of problem.served
  VecD beta;            // size K; leakage multipliers, zero on served entries
  bool feasible = false;
  int outer_iterations = 0;
};

// min sum mu_b ||w_k||^2 over U_b s.t. SINR_k >= gamma_k at fixed external
// interference and per-victim leakage caps. Dual fixed point inside,
// projected subgradient on the cap multipliers outside; returned precoders
// respect every cap (hard, up to 1e-9 relative).
LocalResult local_solve(const LocalProblem& problem, const LocalOpts& opts = {});

struct RunRecord {
  std::string method;
  std::uint64_t seed = 0;
  bool feasible = false;
  VecD per_ue_rate;
  VecD per_ue_sinr;
  VecD per_bs_power;
  double total_power_w = std::numeric_limits<double>::quiet_NaN();
  double total_power_dbm = std::numeric_limits<double>::quiet_NaN();
  double weighted_power = std::numeric_limits<double>::quiet_NaN();
  long long backhaul_scalars = 0;
  int iterations = 0;
};

struct RunOpts {
  DetEquivOpts de;
  FixedPointOpts fp;
  LocalOpts local;
};

RunRecord run_centralized(const Scenario&, const ChannelSet&, const NetworkConfig&,
                          const RunOpts& = {});
RunRecord run_alg1(const Scenario&, const CorrelationSet&, const ChannelSet&,
                   const NetworkConfig&, const RunOpts& = {});
RunRecord run_alg2(const Scenario&, const CorrelationSet&, const ChannelSet&,
                   const NetworkConfig&, SurrogateMode mode, const RunOpts& = {});
RunRecord run_zf(const Scenario&, const ChannelSet&, const NetworkConfig&);
RunRecord run_iczf(const Scenario&, const ChannelSet&, const NetworkConfig&,
                   const RunOpts& = {});
RunRecord run_asymptotic(const Scenario&, const CorrelationSet&, const ChannelSet&,
                         const NetworkConfig&, const RunOpts& = {});

struct GroupScenario;
// Fast-path statistics run: leakage caps come from the group power system,
// the per-fade stage is the same capped local solve as the other
// coordinated methods.
RunRecord run_grouped(const Scenario&, const ChannelSet&, const GroupScenario&,
                      const NetworkConfig&, const RunOpts& = {});

enum class Method { centralized, alg1, alg2, iid, zf, iczf, asymptotic, grouped };

// Scalars exchanged per statistics update (semi-static coordination).
long long backhaul_stats_scalars(Method m, int L, int K, int N);
// Scalars exchanged per fading block (zero for every decentralized method).
long long backhaul_fading_scalars(Method m, int L, int K, int N);

}  // namespace mcbeam
