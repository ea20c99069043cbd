#pragma once

#include "mcbeam/types.hpp"

#include <vector>

namespace mcbeam {

struct FixedPointOpts {
  double tol = 1e-10;
  int max_iter = 10000;
  double lambda_cap = 1e12;
};

struct UplinkState {
  VecD lambda;  // over participants, in problem order
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
};

// Virtual-uplink problem over a participant subset. The matrix at BS b
// collects every participant's channel to b; extra_cov, when present, adds
// one Hermitian PSD N x N term per BS (leakage multipliers of the local
// solver enter this way).
struct UplinkProblem {
  const ChannelSet* channels = nullptr;
  std::vector<int> ues;                       // participating UE ids, ascending
  const std::vector<int>* serving = nullptr;  // global map
  const VecD* gamma = nullptr;                // global
  std::vector<double> mu;                     // per BS
  const std::vector<MatC>* extra_cov = nullptr;
};

// Picard iteration from lambda = 0; iterates are componentwise nondecreasing
// and bounded iff feasible. Exceeding lambda_cap or max_iter flags
// infeasibility. The map is monotone, so a warm start converges to the same
// point from either side; monotone iterates are a property of the cold path.
UplinkState solve_uplink_fixed_point(const UplinkProblem& p, const FixedPointOpts& opts = {},
                                     const VecD* warm_start = nullptr);

// v_k = (sum_{j != k} lambda_j h_j h_j^H + extra + mu N I)^{-1} h_k at the
// serving BS.
std::vector<VecC> mmse_receivers(const UplinkState& state, const UplinkProblem& p);

// [G]_{k,k} = |h_k^H v_k|^2 / gamma_k, [G]_{k,i} = -|h_{b_i,k}^H v_i|^2;
// indices in participant order.
MatD coupling_matrix(const std::vector<VecC>& receivers, const UplinkProblem& p);

struct ScalingResult {
  VecD delta;
  bool feasible = false;
};
// delta = G^{-1} noise_vec; feasible iff the solve succeeds and delta > 0.
ScalingResult solve_scaling(const MatD& G, const VecD& noise_vec);

struct Audit {
  VecD per_ue_sinr;
  VecD per_ue_rate;
  VecD per_bs_power;
  MatD ici;  // L x K, eps_{b,k}; zero on served pairs
};
// Pure audit of any precoder set against actual channels; absent UEs carry
// empty precoders and rate 0.
Audit audit_precoders(const std::vector<VecC>& precoders, const ChannelSet& channels,
                      const std::vector<int>& serving, double noise_power);

struct DualSolution {
  UplinkState state;
  std::vector<VecC> receivers;
  MatD G;
  VecD delta;
  std::vector<VecC> precoders;
  Audit audit;
  bool feasible = false;
};

DualSolution solve_centralized(const Scenario& scenario, const ChannelSet& channels,
                               const NetworkConfig& config, const FixedPointOpts& opts = {});

}  // namespace mcbeam
