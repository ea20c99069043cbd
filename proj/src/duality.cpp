#include "mcbeam/duality.hpp"

#include "mcbeam/scenario.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace mcbeam {

namespace {

// Per-BS interference-plus-regularization matrix over the participant set,
// including every participant's own term. Individual updates divide the own
// term back out via one rank-one identity, so each sweep needs a single
// factorization per BS instead of one per UE.
struct SweepWorkspace {
  std::vector<MatC> A;                        // per BS
  std::vector<Eigen::LLT<MatC>> llt;          // per BS
  std::vector<std::vector<int>> local;        // per BS: positions into p.ues served there
};

void check_problem(const UplinkProblem& p) {
  if (!p.channels || !p.serving || !p.gamma) throw std::invalid_argument("uplink problem: null field");
  const int L = p.channels->L;
  if (static_cast<int>(p.mu.size()) != L) throw std::invalid_argument("uplink problem: mu size");
  if (p.extra_cov && static_cast<int>(p.extra_cov->size()) != L)
    throw std::invalid_argument("uplink problem: extra_cov size");
}

void factorize(const UplinkProblem& p, const VecD& lambda, SweepWorkspace& ws) {
  const ChannelSet& ch = *p.channels;
  const int L = ch.L;
  const int N = ch.N;
  const auto P = static_cast<Eigen::Index>(p.ues.size());
  for (int b = 0; b < L; ++b) {
    MatC S(N, P);
    for (Eigen::Index a = 0; a < P; ++a)
      S.col(a) = std::sqrt(lambda(a)) * ch.H[static_cast<size_t>(b)].col(p.ues[static_cast<size_t>(a)]);
    MatC& A = ws.A[static_cast<size_t>(b)];
    A.noalias() = S * S.adjoint();
    if (p.extra_cov) A += (*p.extra_cov)[static_cast<size_t>(b)];
    A += p.mu[static_cast<size_t>(b)] * static_cast<double>(N) * MatC::Identity(N, N);
    ws.llt[static_cast<size_t>(b)].compute(A);
    if (ws.llt[static_cast<size_t>(b)].info() != Eigen::Success)
      throw std::runtime_error("uplink factorization failed");
  }
}

}  // namespace

UplinkState solve_uplink_fixed_point(const UplinkProblem& p, const FixedPointOpts& opts,
                                     const VecD* warm_start) {
  check_problem(p);
  const ChannelSet& ch = *p.channels;
  const int L = ch.L;
  const auto P = static_cast<Eigen::Index>(p.ues.size());

  SweepWorkspace ws;
  ws.A.resize(static_cast<size_t>(L));
  ws.llt.resize(static_cast<size_t>(L));
  ws.local.assign(static_cast<size_t>(L), {});
  for (Eigen::Index a = 0; a < P; ++a) {
    int b = (*p.serving)[static_cast<size_t>(p.ues[static_cast<size_t>(a)])];
    ws.local[static_cast<size_t>(b)].push_back(static_cast<int>(a));
  }

  UplinkState st;
  st.lambda = (warm_start && warm_start->size() == P) ? *warm_start : VecD::Zero(P);
  if (P == 0) {
    st.converged = st.feasible = true;
    return st;
  }

  VecD next(P);
  for (int it = 1; it <= opts.max_iter; ++it) {
    factorize(p, st.lambda, ws);
    for (int b = 0; b < L; ++b) {
      const auto& loc = ws.local[static_cast<size_t>(b)];
      if (loc.empty()) continue;
      MatC Hb(ch.N, static_cast<Eigen::Index>(loc.size()));
      for (size_t c = 0; c < loc.size(); ++c)
        Hb.col(static_cast<Eigen::Index>(c)) =
            ch.H[static_cast<size_t>(b)].col(p.ues[static_cast<size_t>(loc[c])]);
      MatC X = ws.llt[static_cast<size_t>(b)].solve(Hb);
      for (size_t c = 0; c < loc.size(); ++c) {
        auto a = static_cast<Eigen::Index>(loc[c]);
        double q = Hb.col(static_cast<Eigen::Index>(c)).dot(X.col(static_cast<Eigen::Index>(c))).real();
        // q = h^H (A_{-k} + lambda_k h h^H)^{-1} h, so lambda_k q < 1 and the
        // update below equals gamma_k / (h^H A_{-k}^{-1} h) exactly.
        next(a) = p.gamma->coeff(p.ues[static_cast<size_t>(a)]) * (1.0 - st.lambda(a) * q) / q;
      }
    }
    st.iterations = it;
    double rel = 0.0;
    for (Eigen::Index a = 0; a < P; ++a)
      rel = std::max(rel, std::abs(next(a) - st.lambda(a)) / std::max(next(a), 1e-30));
    st.lambda = next;
    if (st.lambda.maxCoeff() > opts.lambda_cap) {
      st.converged = false;
      st.feasible = false;
      return st;
    }
    if (rel <= opts.tol) {
      st.converged = true;
      st.feasible = true;
      return st;
    }
  }
  st.converged = false;
  st.feasible = false;
  return st;
}

std::vector<VecC> mmse_receivers(const UplinkState& state, const UplinkProblem& p) {
  check_problem(p);
  const ChannelSet& ch = *p.channels;
  const int L = ch.L;
  const auto P = static_cast<Eigen::Index>(p.ues.size());

  SweepWorkspace ws;
  ws.A.resize(static_cast<size_t>(L));
  ws.llt.resize(static_cast<size_t>(L));
  factorize(p, state.lambda, ws);

  std::vector<VecC> v(static_cast<size_t>(P));
  for (Eigen::Index a = 0; a < P; ++a) {
    int k = p.ues[static_cast<size_t>(a)];
    int b = (*p.serving)[static_cast<size_t>(k)];
    VecC h = ch.H[static_cast<size_t>(b)].col(k);
    VecC x = ws.llt[static_cast<size_t>(b)].solve(h);
    double q = h.dot(x).real();
    v[static_cast<size_t>(a)] = x / (1.0 - state.lambda(a) * q);
  }
  return v;
}

MatD coupling_matrix(const std::vector<VecC>& receivers, const UplinkProblem& p) {
  check_problem(p);
  const ChannelSet& ch = *p.channels;
  const auto P = static_cast<Eigen::Index>(p.ues.size());
  MatD G = MatD::Zero(P, P);
  for (Eigen::Index i = 0; i < P; ++i) {
    int ue_i = p.ues[static_cast<size_t>(i)];
    int b_i = (*p.serving)[static_cast<size_t>(ue_i)];
    const VecC& v = receivers[static_cast<size_t>(i)];
    for (Eigen::Index k = 0; k < P; ++k) {
      int ue_k = p.ues[static_cast<size_t>(k)];
      double g = std::norm(ch.H[static_cast<size_t>(b_i)].col(ue_k).dot(v));
      if (k == i)
        G(k, k) = g / p.gamma->coeff(ue_k);
      else
        G(k, i) = -g;
    }
  }
  return G;
}

ScalingResult solve_scaling(const MatD& G, const VecD& noise_vec) {
  ScalingResult r;
  if (G.rows() == 0) {
    r.delta = VecD();
    r.feasible = true;
    return r;
  }
  Eigen::PartialPivLU<MatD> lu(G);
  r.delta = lu.solve(noise_vec);
  double resid = (G * r.delta - noise_vec).norm();
  r.feasible = r.delta.allFinite() && resid <= 1e-8 * std::max(1e-300, noise_vec.norm()) &&
               r.delta.minCoeff() > 0.0;
  return r;
}

Audit audit_precoders(const std::vector<VecC>& precoders, const ChannelSet& channels,
                      const std::vector<int>& serving, double noise_power) {
  const int L = channels.L;
  const int K = channels.K;
  Audit a;
  a.per_ue_sinr = VecD::Zero(K);
  a.per_ue_rate = VecD::Zero(K);
  a.per_bs_power = VecD::Zero(L);
  a.ici = MatD::Zero(L, K);

  for (int j = 0; j < K; ++j) {
    const VecC& w = precoders[static_cast<size_t>(j)];
    if (w.size() == 0) continue;
    int bj = serving[static_cast<size_t>(j)];
    a.per_bs_power(bj) += w.squaredNorm();
    for (int k = 0; k < K; ++k) {
      double g = std::norm(channels.H[static_cast<size_t>(bj)].col(k).dot(w));
      if (k != j && bj != serving[static_cast<size_t>(k)]) a.ici(bj, k) += g;
    }
  }
  for (int k = 0; k < K; ++k) {
    const VecC& wk = precoders[static_cast<size_t>(k)];
    if (wk.size() == 0) continue;
    int bk = serving[static_cast<size_t>(k)];
    double sig = std::norm(channels.H[static_cast<size_t>(bk)].col(k).dot(wk));
    double interf = 0.0;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      const VecC& wj = precoders[static_cast<size_t>(j)];
      if (wj.size() == 0) continue;
      int bj = serving[static_cast<size_t>(j)];
      interf += std::norm(channels.H[static_cast<size_t>(bj)].col(k).dot(wj));
    }
    a.per_ue_sinr(k) = sig / (noise_power + interf);
    a.per_ue_rate(k) = std::log2(1.0 + a.per_ue_sinr(k));
  }
  return a;
}

DualSolution solve_centralized(const Scenario& scenario, const ChannelSet& channels,
                               const NetworkConfig& config, const FixedPointOpts& opts) {
  DualSolution sol;
  const int K = channels.K;

  UplinkProblem p;
  p.channels = &channels;
  p.serving = &scenario.serving;
  p.gamma = &scenario.gamma;
  p.mu = config.mu_vec();
  for (int k = 0; k < K; ++k)
    if (scenario.gamma(k) > 0.0) p.ues.push_back(k);

  sol.state = solve_uplink_fixed_point(p, opts);
  sol.precoders.assign(static_cast<size_t>(K), VecC());
  if (!sol.state.feasible) {
    sol.audit = audit_precoders(sol.precoders, channels, scenario.serving, config.noise_power);
    return sol;
  }

  sol.receivers = mmse_receivers(sol.state, p);
  sol.G = coupling_matrix(sol.receivers, p);
  const auto P = static_cast<Eigen::Index>(p.ues.size());
  ScalingResult sc = solve_scaling(sol.G, VecD::Constant(P, config.noise_power));
  sol.delta = sc.delta;
  if (sc.feasible) {
    for (Eigen::Index a = 0; a < P; ++a)
      sol.precoders[static_cast<size_t>(p.ues[static_cast<size_t>(a)])] =
          std::sqrt(sc.delta(a)) * sol.receivers[static_cast<size_t>(a)];
  }
  sol.audit = audit_precoders(sol.precoders, channels, scenario.serving, config.noise_power);
  sol.feasible = sc.feasible;
  return sol;
}

}  // namespace mcbeam
