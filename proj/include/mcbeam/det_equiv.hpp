#pragma once

#include "mcbeam/types.hpp"

#include <vector>

namespace mcbeam {

struct DetEquivOpts {
  double tol = 1e-10;
  int max_iter = 10000;
  double damping = 0.5;
};

struct MeasureResult {
  MatD m_bar;       // L x K
  VecD lambda_bar;  // K
  bool converged = false;
  int iterations = 0;
};

// Damped Picard on the coupled measure system
//   m_{b,i} = tr( Theta_{b,i} ( sum_j gamma_j Theta_{b,j} /
//             (m_{b_j,j} + gamma_j m_{b,j}) + mu_b N I )^{-1} ),
// lambda_bar_k = gamma_k / m_{b_k,k}. Independent of the noise power.
MeasureResult solve_measures(const CorrelationSet& corr, const std::vector<int>& serving,
                             const VecD& gamma, const std::vector<double>& mu,
                             const DetEquivOpts& opts = {});

// T_b = ( (1/N) sum_j lambda_j Theta_{b,j} / (1 + lambda_j m_{b,j}) + mu_b I )^{-1};
// satisfies m_{b,i} = (1/N) tr(Theta_{b,i} T_b).
MatC resolvent(const CorrelationSet& corr, int b, const VecD& lambda_bar, const MatD& m_bar,
               double mu_b);

struct DerivativeResult {
  // m_prime(i, k): sensitivity of m_{b,i} along the rank-restricted
  // perturbation k; noise_prime(i): sensitivity along the noise direction,
  // i.e. the resolvent-squared trace with fixed-point feedback.
  MatD m_prime;
  VecD noise_prime;
  int N = 0;
  bool ok = false;
};
DerivativeResult derivative_measures(const CorrelationSet& corr, int b, const MatC& T_b,
                                     const VecD& lambda_bar, const MatD& m_bar);

struct CouplingResult {
  MatD G_bar;
  VecD delta_bar;
  VecD p_bar;  // per-UE transmit power equivalents, delta_bar .* noise-derivative/N
  bool feasible = false;
};
CouplingResult asymptotic_coupling(const std::vector<DerivativeResult>& deriv,
                                   const std::vector<int>& serving, const VecD& gamma,
                                   const VecD& lambda_bar, const MatD& m_bar,
                                   double noise_power);

// eps_{b,k} = sum_{j in U_b} (-delta_j [G]_{k,j}) for k not served by b.
MatD ici_approx(const MatD& G_bar, const VecD& delta_bar, const std::vector<int>& serving, int L);

enum class SurrogateMode { alg2, iid };

// alg2: true statistics at local_bs, scaled identities elsewhere.
// iid: scaled identities everywhere (pathloss knowledge only).
CorrelationSet surrogate_stats(const CorrelationSet& corr, const MatD& pathloss, int local_bs,
                               SurrogateMode mode);

struct DetEquivState {
  MatD m_bar;
  VecD lambda_bar;
  std::vector<MatC> T;
  std::vector<MatD> m_prime;
  std::vector<VecD> noise_prime;
  MatD G_bar;
  VecD delta_bar;
  VecD p_bar;
  MatD ici_bar;  // L x K, zero on served pairs
  bool converged = false;
  bool feasible = false;
  int iterations = 0;
};

DetEquivState det_equiv_pipeline(const CorrelationSet& corr, const std::vector<int>& serving,
                                 const VecD& gamma, const std::vector<double>& mu,
                                 double noise_power, const DetEquivOpts& opts = {});

}  // namespace mcbeam
