#pragma once

#include "mcbeam/det_equiv.hpp"
#include "mcbeam/types.hpp"

#include <cstdint>
#include <vector>

namespace mcbeam {

enum class GroupMode { geometric, block_orthogonal };

struct GroupScenario {
  int L = 0, K = 0, N = 0, n_groups = 0;
  std::vector<int> group_of;            // L x K (b*K + k): label of UE k as seen from BS b
  std::vector<SpatialCov> group_corr;   // L x n_groups, pathloss factored out
  std::vector<VecD> Xi;                 // eigenvalues per (b,g), descending, length r_g
  std::vector<MatC> U;                  // eigenvectors per (b,g), N x r_g
  MatD pathloss;                        // L x K
  VecD gamma;                           // K
  std::vector<double> mu;               // L
  std::vector<int> serving;             // K
  std::vector<std::vector<int>> served; // L
  Scenario scen;                        // underlying geometry (geometric mode); synthetic otherwise

  int g_of(int b, int k) const { return group_of[static_cast<size_t>(b) * K + k]; }
  int pair(int b, int g) const { return b * n_groups + g; }
};

struct GroupCoeffs {
  MatD phi;         // L x K
  MatD zeta_prime;  // L x n_groups
  MatD rho;         // L x n_groups
  MatD s;           // L x n_groups: weight of Theta_{b,g} inside T_{b,g}
  bool ok = false;
};

struct GroupSolution {
  MatD eta_bar;    // L x n_groups
  GroupCoeffs coeffs;
  MatD P_bar;      // L x n_groups, watts
  MatD ici_bar;    // L x K, zero on served pairs
  VecD lambda_bar; // K
  bool converged = false;
  bool feasible = false;
};

// geometric: two cells facing each other, three disjoint pi/6 angular
// sectors per BS, UEs dropped where same-index sectors intersect.
// block_orthogonal: synthetic spectra on disjoint coordinate blocks, exact
// orthogonality at finite N (oracle mode). K_per_cell must divide by the
// group count; block mode additionally needs N divisible by it.
GroupScenario build_group_scenario(const NetworkConfig& config, std::uint64_t seed, GroupMode mode);

// Damped Picard on the group measure system; the spectral form and the
// trace form of the update agree at convergence and both are available.
MatD solve_eta(const GroupScenario& gs, const DetEquivOpts& opts = {}, bool* converged = nullptr);

GroupCoeffs group_coefficients(const GroupScenario& gs, const MatD& eta_bar);

// Group power system (D - L) P = u over (BS, group) pairs.
MatD solve_group_powers(const GroupScenario& gs, const MatD& eta_bar, const GroupCoeffs& coeffs,
                        double noise_power, bool* feasible = nullptr);

// eps_{b,k} = phi_{b,k} a2_{b,k} P_{b, g_b(k)} for k not served by b.
MatD group_ici(const GroupScenario& gs, const GroupCoeffs& coeffs, const MatD& P_bar);

GroupSolution solve_grouped(const GroupScenario& gs, double noise_power,
                            const DetEquivOpts& opts = {});

// Per-UE correlation set a2_{b,k} * Theta_{b,g_b(k)} for the generic pipeline.
CorrelationSet expand_correlations(const GroupScenario& gs);

struct CrossValReport {
  double max_rel_eta = 0;    // a2 * eta_bar vs generic m_bar
  double max_rel_ici = 0;    // grouped vs generic deterministic ICI
  double max_rel_power = 0;  // P_bar vs aggregated generic per-UE powers
  double grouped_total_power = 0;
  double generic_total_power = 0;
  bool ok = false;
};
CrossValReport cross_validate_grouping(const GroupScenario& gs, double noise_power,
                                       const DetEquivOpts& opts = {});

}  // namespace mcbeam
