#include "mcbeam/decentralized.hpp"

#include "mcbeam/grouping.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcbeam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kViolTarget = 1e-9;  // polish target before the final rescale

struct InnerState {
  UplinkState st;
  std::vector<VecC> w;  // participant order
  VecD leak;            // over victims
  double maxviol = kInf;
  double power = kInf;
  bool ok = false;
};

// One evaluation of the capped local problem at fixed multipliers.
struct InnerSolver {
  const LocalProblem& prob;
  const LocalOpts& opts;
  ChannelSet local;            // single-BS view
  std::vector<int> serving0;   // all zero
  std::vector<int> part;       // participating UE ids (gamma > 0)
  VecD part_noise;             // effective noise per participant
  std::vector<int> victims;    // capped UE ids outside U_b
  VecD unit;                   // per victim, mu_b N / ||h||^2
  std::vector<MatC> extra{1};
  VecD warm;

  explicit InnerSolver(const LocalProblem& p, const LocalOpts& o) : prob(p), opts(o) {
    const ChannelSet& ch = *p.channels;
    local.L = 1;
    local.K = ch.K;
    local.N = ch.N;
    local.H = {ch.H[static_cast<size_t>(p.bs)]};
    serving0.assign(static_cast<size_t>(ch.K), 0);
    for (size_t i = 0; i < p.served.size(); ++i) {
      int k = p.served[i];
      if ((*p.gamma)(k) > 0.0) {
        part.push_back(k);
        part_noise.conservativeResize(part_noise.size() + 1);
        part_noise(part_noise.size() - 1) = p.effective_noise(static_cast<Eigen::Index>(i));
      }
    }
    for (int k = 0; k < ch.K; ++k) {
      bool served = std::find(p.served.begin(), p.served.end(), k) != p.served.end();
      if (!served && p.leakage_caps(k) < kInf) {
        victims.push_back(k);
        unit.conservativeResize(unit.size() + 1);
        unit(unit.size() - 1) =
            p.mu_b * ch.N / local.H[0].col(k).squaredNorm();
      }
    }
  }

  UplinkProblem uplink() {
    UplinkProblem u;
    u.channels = &local;
    u.ues = part;
    u.serving = &serving0;
    u.gamma = prob.gamma;
    u.mu = {prob.mu_b};
    u.extra_cov = &extra;
    return u;
  }

  InnerState eval(const VecD& beta) {
    InnerState out;
    const int N = local.N;
    extra[0] = MatC::Zero(N, N);
    for (size_t v = 0; v < victims.size(); ++v) {
      double b = beta(static_cast<Eigen::Index>(v));
      if (b > 0.0)
        extra[0] += b * local.H[0].col(victims[v]) * local.H[0].col(victims[v]).adjoint();
    }
    UplinkProblem u = uplink();
    out.st = solve_uplink_fixed_point(u, opts.fp, warm.size() ? &warm : nullptr);
    if (!out.st.feasible) return out;
    warm = out.st.lambda;

    auto v = mmse_receivers(out.st, u);
    MatD G = coupling_matrix(v, u);
    ScalingResult sc = solve_scaling(G, part_noise);
    if (!sc.feasible) return out;

    out.w.resize(part.size());
    out.power = 0;
    for (size_t a = 0; a < part.size(); ++a) {
      out.w[a] = std::sqrt(sc.delta(static_cast<Eigen::Index>(a))) * v[a];
      out.power += out.w[a].squaredNorm();
    }
    out.leak = VecD::Zero(static_cast<Eigen::Index>(victims.size()));
    out.maxviol = victims.empty() ? 0.0 : -kInf;
    for (size_t t = 0; t < victims.size(); ++t) {
      double leak = 0;
      for (auto& wv : out.w) leak += std::norm(local.H[0].col(victims[t]).dot(wv));
      out.leak(static_cast<Eigen::Index>(t)) = leak;
      double cap = std::max(prob.leakage_caps(victims[t]), 1e-300);
      out.maxviol = std::max(out.maxviol, leak / cap - 1.0);
    }
    out.ok = true;
    return out;
  }
};

constexpr double kPolishBand = 1e-6;  // violation absorbed by the final shrink

bool better(const InnerState& a, const InnerState& b) {
  // prefer near-compliant iterates by their power after the exact shrink,
  // otherwise smaller violation
  if (!b.ok) return a.ok;
  if (!a.ok) return false;
  bool ap = a.maxviol <= kPolishBand, bp = b.maxviol <= kPolishBand;
  if (ap != bp) return ap;
  if (!ap) return a.maxviol < b.maxviol;
  double pa = a.power / (1.0 + std::max(a.maxviol, 0.0));
  double pb = b.power / (1.0 + std::max(b.maxviol, 0.0));
  return pa < pb;
}

}  // namespace

LocalResult local_solve(const LocalProblem& problem, const LocalOpts& opts) {
  LocalResult res;
  const int K = problem.channels->K;
  const int N = problem.channels->N;
  res.beta = VecD::Zero(K);
  if (problem.served.empty()) {
    res.feasible = true;
    return res;
  }

  InnerSolver solver(problem, opts);
  const auto V = static_cast<Eigen::Index>(solver.victims.size());
  VecD beta = VecD::Zero(V);
  int evals = 0;

  InnerState cur = solver.eval(beta);
  ++evals;
  InnerState best = cur;
  VecD best_beta = beta;

  // Value of the cap dual at the inner fixed point; its gradient in beta is
  // leak - cap, so monotone ascent drives active victims onto their caps.
  auto dual_value = [&](const InnerState& st, const VecD& b) {
    double g = 0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(solver.part.size()); ++i)
      g += st.st.lambda(i) * solver.part_noise(i) / N;
    for (Eigen::Index v = 0; v < V; ++v)
      g -= b(v) * problem.leakage_caps(solver.victims[static_cast<size_t>(v)]) / N;
    return g;
  };
  // Worst of: relative cap violation anywhere, relative slack on an active
  // victim. Zero exactly at complementarity.
  auto comp_err = [&](const InnerState& st, const VecD& b) {
    double e = std::max(st.maxviol, 0.0);
    for (Eigen::Index v = 0; v < V; ++v)
      if (b(v) > 0.0) {
        double cap = std::max(problem.leakage_caps(solver.victims[static_cast<size_t>(v)]), 1e-300);
        e = std::max(e, 1.0 - st.leak(v) / cap);
      }
    return e;
  };

  if (V > 0 && cur.ok && comp_err(cur, beta) > kViolTarget) {
    auto cap_of = [&](Eigen::Index v) {
      return std::max(problem.leakage_caps(solver.victims[static_cast<size_t>(v)]), 1e-300);
    };

    // short multiplicative warm start to bring beta into the right decade
    {
      const int warm_end = std::min(40, opts.max_outer / 4);
      while (evals < warm_end && cur.ok) {
        if (comp_err(cur, beta) <= 1e-3) break;
        for (Eigen::Index v = 0; v < V; ++v) {
          double ratio = cur.leak(v) / cap_of(v);
          if (beta(v) == 0.0) {
            if (ratio > 1.0) beta(v) = solver.unit(v) * (ratio - 1.0);
            continue;
          }
          beta(v) *= std::pow(std::clamp(ratio, 0.25, 4.0), 0.7);
        }
        cur = solver.eval(beta);
        ++evals;
        if (better(cur, best)) {
          best = cur;
          best_beta = beta;
        }
      }
    }

    // damped Newton ascent on the concave cap dual. The gradient in beta_v
    // is (leak_v - cap_v) / N and the Hessian comes from forward differences;
    // affine invariance copes with caps spanning several decades. Victims at
    // zero with a nonpositive gradient stay pinned.
    const int n_end = std::max(evals, opts.max_outer - 45);
    double tau = 1e-3;
    while (evals + V + 6 <= n_end) {
      if (!cur.ok) {
        beta = 0.5 * (beta + best_beta);
        cur = solver.eval(beta);
        ++evals;
        if ((beta - best_beta).cwiseAbs().maxCoeff() == 0.0 && !cur.ok) break;
        continue;
      }
      if (comp_err(cur, beta) <= kViolTarget) break;
      VecD grad(V);
      for (Eigen::Index v = 0; v < V; ++v) grad(v) = (cur.leak(v) - cap_of(v)) / N;
      std::vector<Eigen::Index> free_v;
      for (Eigen::Index v = 0; v < V; ++v)
        if (beta(v) > 0.0 || grad(v) > 0.0) free_v.push_back(v);
      const auto A = static_cast<Eigen::Index>(free_v.size());
      if (A == 0) break;
      MatD Hs(A, A);
      bool ok_jac = true;
      for (Eigen::Index j = 0; j < A; ++j) {
        Eigen::Index vj = free_v[static_cast<size_t>(j)];
        double h = std::max(1e-3 * beta(vj), 1e-3 * solver.unit(vj));
        VecD bp = beta;
        bp(vj) += h;
        InnerState ep = solver.eval(bp);
        ++evals;
        if (!ep.ok) {
          ok_jac = false;
          break;
        }
        for (Eigen::Index i = 0; i < A; ++i) {
          Eigen::Index vi = free_v[static_cast<size_t>(i)];
          Hs(i, j) = (ep.leak(vi) - cur.leak(vi)) / h / N;
        }
        if (better(ep, best)) {
          best = ep;
          best_beta = bp;
        }
      }
      if (!ok_jac) break;
      Hs = 0.5 * (Hs + Hs.transpose()).eval();
      double dmag = Hs.diagonal().cwiseAbs().maxCoeff() + 1e-300;
      VecD gsub(A);
      for (Eigen::Index i = 0; i < A; ++i) gsub(i) = grad(free_v[static_cast<size_t>(i)]);
      double g0 = dual_value(cur, beta);
      bool stepped = false;
      for (int trial = 0; trial < 10 && !stepped; ++trial) {
        MatD M = -Hs + tau * dmag * MatD::Identity(A, A);
        VecD dx = M.ldlt().solve(gsub);
        if (dx.allFinite()) {
          double t = 1.0;
          while (t >= 1.0 / 1024 && evals < n_end) {
            VecD bt = beta;
            for (Eigen::Index i = 0; i < A; ++i) {
              Eigen::Index vi = free_v[static_cast<size_t>(i)];
              bt(vi) = std::max(0.0, beta(vi) + t * dx(i));
            }
            if ((bt - beta).cwiseAbs().maxCoeff() == 0.0) break;
            InnerState et = solver.eval(bt);
            ++evals;
            if (et.ok) {
              if (better(et, best)) {
                best = et;
                best_beta = bt;
              }
              if (dual_value(et, bt) > g0) {
                beta = bt;
                cur = et;
                stepped = true;
                break;
              }
            }
            t *= 0.5;
          }
        }
        if (!stepped) {
          tau *= 10.0;
          if (tau > 1e8) break;
        }
      }
      if (!stepped) break;
      tau = std::max(1e-8, tau / 3.0);
    }

    // escalation: uniform push along the preconditioned direction, then the
    // smallest feasible push by bisection
    if (!(best.ok && best.maxviol <= kViolTarget) && evals < opts.max_outer) {
      VecD base = best_beta;
      double lo = 0.0, hi = -1.0;
      double s = 1e-3;
      for (int d = 0; d < 52 && evals < opts.max_outer; ++d, s *= 2.0) {
        InnerState probe = solver.eval(base + s * solver.unit);
        ++evals;
        if (probe.ok && probe.maxviol <= kViolTarget) {
          hi = s;
          if (better(probe, best)) {
            best = probe;
            best_beta = base + s * solver.unit;
          }
          break;
        }
        if (!probe.ok) break;  // pushed past the feasible range
        lo = s;
      }
      if (hi > 0.0) {
        for (int it = 0; it < 40 && evals < opts.max_outer; ++it) {
          double mid = 0.5 * (lo + hi);
          InnerState probe = solver.eval(base + mid * solver.unit);
          ++evals;
          if (probe.ok && probe.maxviol <= kViolTarget) {
            hi = mid;
            if (better(probe, best)) {
              best = probe;
              best_beta = base + mid * solver.unit;
            }
          } else {
            lo = mid;
          }
        }
      }
    }
  }

  res.outer_iterations = evals;
  if (!best.ok) return res;

  // hard caps: one exact shrink absorbs any residual violation
  double shrink = best.maxviol > 0.0 ? 1.0 / (1.0 + best.maxviol) : 1.0;
  res.w.assign(problem.served.size(), VecC::Zero(N));
  for (size_t a = 0; a < solver.part.size(); ++a) {
    auto it = std::find(problem.served.begin(), problem.served.end(), solver.part[a]);
    res.w[static_cast<size_t>(it - problem.served.begin())] = std::sqrt(shrink) * best.w[a];
  }
  for (Eigen::Index v = 0; v < V; ++v)
    res.beta(solver.victims[static_cast<size_t>(v)]) = best_beta(v);
  res.feasible = best.maxviol <= opts.leak_tol;
  return res;
}

namespace {

RunRecord make_record(const char* method, const Audit& audit, const Scenario& scen,
                      const NetworkConfig& cfg, bool feasible, long long backhaul,
                      int iterations) {
  RunRecord r;
  r.method = method;
  r.feasible = feasible;
  r.per_ue_rate = audit.per_ue_rate;
  r.per_ue_sinr = audit.per_ue_sinr;
  r.per_bs_power = audit.per_bs_power;
  if (feasible) {
    r.total_power_w = audit.per_bs_power.sum();
    r.total_power_dbm = watt_to_dbm(r.total_power_w);
    r.weighted_power = 0;
    for (int b = 0; b < scen.L(); ++b)
      r.weighted_power += cfg.mu_of(b) * audit.per_bs_power(b);
  }
  r.backhaul_scalars = backhaul;
  r.iterations = iterations;
  return r;
}

bool rates_hit_target(const Audit& audit, const Scenario& scen, const NetworkConfig& cfg) {
  for (int k = 0; k < scen.K(); ++k)
    if (scen.gamma(k) > 0.0 && audit.per_ue_rate(k) < cfg.target_rate - 1e-4) return false;
  return true;
}

// Shared body of the statistics-coordinated decentralized runs. BS b caps
// its own leakage using its own deterministic-equivalent state and announces
// those scalars; a serving BS budgets external interference as the sum of
// the caps the owners will actually enforce, so the rate guarantee composes.
RunRecord run_capped_local(const char* name, const Scenario& scen, const ChannelSet& ch,
                           const NetworkConfig& cfg, const RunOpts& opts, Method m,
                           const std::vector<const DetEquivState*>& view) {
  const int K = scen.K();
  const int N = cfg.N;
  std::vector<VecC> precoders(static_cast<size_t>(K));
  bool locals_ok = true;
  int iters = 0;
  for (int b = 0; b < scen.L(); ++b) {
    iters += view[static_cast<size_t>(b)]->iterations;
    locals_ok = locals_ok && view[static_cast<size_t>(b)]->feasible;
  }

  for (int b = 0; b < scen.L() && locals_ok; ++b) {
    const DetEquivState& de = *view[static_cast<size_t>(b)];
    LocalProblem lp;
    lp.bs = b;
    lp.channels = &ch;
    lp.serving = &scen.serving;
    lp.gamma = &scen.gamma;
    lp.mu_b = cfg.mu_of(b);
    lp.served = scen.served[static_cast<size_t>(b)];
    lp.effective_noise = VecD::Zero(static_cast<Eigen::Index>(lp.served.size()));
    for (size_t i = 0; i < lp.served.size(); ++i) {
      double ext = 0;
      for (int b2 = 0; b2 < scen.L(); ++b2)
        if (b2 != b) ext += view[static_cast<size_t>(b2)]->ici_bar(b2, lp.served[i]);
      lp.effective_noise(static_cast<Eigen::Index>(i)) = cfg.noise_power + ext;
    }
    lp.leakage_caps = VecD::Constant(K, kInf);
    for (int k = 0; k < K; ++k)
      if (scen.serving[static_cast<size_t>(k)] != b) lp.leakage_caps(k) = de.ici_bar(b, k);

    LocalResult lr = local_solve(lp, opts.local);
    iters += lr.outer_iterations;
    locals_ok = locals_ok && lr.feasible;
    for (size_t i = 0; i < lp.served.size(); ++i)
      precoders[static_cast<size_t>(lp.served[i])] = lr.w[i];
  }

  Audit audit = audit_precoders(precoders, ch, scen.serving, cfg.noise_power);
  bool ok = locals_ok && rates_hit_target(audit, scen, cfg);
  RunRecord r = make_record(name, audit, scen, cfg, ok,
                            backhaul_stats_scalars(m, scen.L(), K, N), iters);
  return r;
}

}  // namespace

RunRecord run_centralized(const Scenario& scen, const ChannelSet& ch, const NetworkConfig& cfg,
                          const RunOpts& opts) {
  DualSolution sol = solve_centralized(scen, ch, cfg, opts.fp);
  RunRecord r = make_record("centralized", sol.audit, scen, cfg, sol.feasible,
                            backhaul_fading_scalars(Method::centralized, scen.L(), scen.K(), cfg.N),
                            sol.state.iterations);
  return r;
}

RunRecord run_alg1(const Scenario& scen, const CorrelationSet& corr, const ChannelSet& ch,
                   const NetworkConfig& cfg, const RunOpts& opts) {
  DetEquivState de = det_equiv_pipeline(corr, scen.serving, scen.gamma, cfg.mu_vec(),
                                        cfg.noise_power, opts.de);
  std::vector<const DetEquivState*> view(static_cast<size_t>(scen.L()), &de);
  return run_capped_local("alg1", scen, ch, cfg, opts, Method::alg1, view);
}

RunRecord run_alg2(const Scenario& scen, const CorrelationSet& corr, const ChannelSet& ch,
                   const NetworkConfig& cfg, SurrogateMode mode, const RunOpts& opts) {
  std::vector<DetEquivState> states;
  std::vector<const DetEquivState*> view;
  if (mode == SurrogateMode::iid) {
    // the surrogate is identical at every BS: one shared pipeline
    CorrelationSet sur = surrogate_stats(corr, scen.pathloss, 0, SurrogateMode::iid);
    states.push_back(det_equiv_pipeline(sur, scen.serving, scen.gamma, cfg.mu_vec(),
                                        cfg.noise_power, opts.de));
    view.assign(static_cast<size_t>(scen.L()), &states[0]);
  } else {
    states.reserve(static_cast<size_t>(scen.L()));
    for (int b = 0; b < scen.L(); ++b) {
      CorrelationSet sur = surrogate_stats(corr, scen.pathloss, b, SurrogateMode::alg2);
      states.push_back(det_equiv_pipeline(sur, scen.serving, scen.gamma, cfg.mu_vec(),
                                          cfg.noise_power, opts.de));
    }
    for (int b = 0; b < scen.L(); ++b) view.push_back(&states[static_cast<size_t>(b)]);
  }
  const char* name = mode == SurrogateMode::iid ? "iid" : "alg2";
  Method m = mode == SurrogateMode::iid ? Method::iid : Method::alg2;
  return run_capped_local(name, scen, ch, cfg, opts, m, view);
}

RunRecord run_grouped(const Scenario& scen, const ChannelSet& ch, const GroupScenario& gs,
                      const NetworkConfig& cfg, const RunOpts& opts) {
  GroupSolution sol = solve_grouped(gs, cfg.noise_power, opts.de);
  DetEquivState de;
  de.ici_bar = sol.ici_bar;
  de.feasible = sol.feasible;
  de.iterations = 0;
  std::vector<const DetEquivState*> view(static_cast<size_t>(scen.L()), &de);
  return run_capped_local("grouped", scen, ch, cfg, opts, Method::grouped, view);
}

RunRecord run_zf(const Scenario& scen, const ChannelSet& ch, const NetworkConfig& cfg) {
  const int K = scen.K();
  const int N = cfg.N;
  std::vector<VecC> precoders(static_cast<size_t>(K));
  bool ok = N >= K;

  if (ok) {
    for (int b = 0; b < scen.L() && ok; ++b) {
      // Column equilibration keeps the gram's conditioning about the array
      // geometry instead of the pathloss spread, which alone can push the
      // raw gram past 1e12.
      const MatC& Hb = ch.H[static_cast<size_t>(b)];
      VecD d = Hb.colwise().norm().transpose();
      MatC Hs = Hb;
      for (int i = 0; i < K; ++i)
        if (d(i) > 0.0) Hs.col(i) /= d(i);
      Eigen::LDLT<MatC> gram(Hs.adjoint() * Hs);
      if (gram.info() != Eigen::Success) {
        ok = false;
        break;
      }
      for (int j : scen.served[static_cast<size_t>(b)]) {
        if (scen.gamma(j) <= 0.0) {
          precoders[static_cast<size_t>(j)] = VecC::Zero(N);
          continue;
        }
        if (d(j) <= 0.0) {
          ok = false;
          break;
        }
        // h_{b,i}^H (Hs gram^{-1} e_j) = d_i delta_ij
        VecC dir = Hs * gram.solve(VecC::Unit(K, j));
        precoders[static_cast<size_t>(j)] = (std::sqrt(scen.gamma(j) * cfg.noise_power) / d(j)) * dir;
      }
    }
  }
  Audit audit = audit_precoders(ok ? precoders : std::vector<VecC>(static_cast<size_t>(K)), ch,
                                scen.serving, cfg.noise_power);
  return make_record("zf", audit, scen, cfg, ok && rates_hit_target(audit, scen, cfg),
                     backhaul_stats_scalars(Method::zf, scen.L(), K, N), 1);
}

RunRecord run_iczf(const Scenario& scen, const ChannelSet& ch, const NetworkConfig& cfg,
                   const RunOpts& opts) {
  const int K = scen.K();
  const int N = cfg.N;
  std::vector<VecC> precoders(static_cast<size_t>(K));
  bool ok = true;
  int iters = 0;

  for (int b = 0; b < scen.L() && ok; ++b) {
    const auto& mine = scen.served[static_cast<size_t>(b)];
    std::vector<int> others;
    for (int k = 0; k < K; ++k)
      if (scen.serving[static_cast<size_t>(k)] != b) others.push_back(k);
    if (N <= static_cast<int>(others.size())) {
      ok = false;
      break;
    }

    // orthonormal basis of the victims' span, then a single-cell solve on
    // projected channels; precoders stay in the orthocomplement
    ChannelSet proj;
    proj.L = 1;
    proj.K = K;
    proj.N = N;
    proj.H = {ch.H[static_cast<size_t>(b)]};
    if (!others.empty()) {
      MatC C(N, static_cast<Eigen::Index>(others.size()));
      for (size_t t = 0; t < others.size(); ++t)
        C.col(static_cast<Eigen::Index>(t)) = ch.H[static_cast<size_t>(b)].col(others[t]);
      Eigen::ColPivHouseholderQR<MatC> qr(C);
      auto rank = qr.rank();
      MatC Q = qr.householderQ() * MatC::Identity(N, rank);
      proj.H[0] -= Q * (Q.adjoint() * proj.H[0]);
    }

    std::vector<int> serving0(static_cast<size_t>(K), 0);
    UplinkProblem u;
    u.channels = &proj;
    u.serving = &serving0;
    u.gamma = &scen.gamma;
    u.mu = {cfg.mu_of(b)};
    for (int j : mine)
      if (scen.gamma(j) > 0.0) u.ues.push_back(j);

    UplinkState st = solve_uplink_fixed_point(u, opts.fp);
    iters += st.iterations;
    if (!st.feasible) {
      ok = false;
      break;
    }
    auto v = mmse_receivers(st, u);
    MatD G = coupling_matrix(v, u);
    ScalingResult sc = solve_scaling(
        G, VecD::Constant(static_cast<Eigen::Index>(u.ues.size()), cfg.noise_power));
    if (!sc.feasible) {
      ok = false;
      break;
    }
    for (size_t a = 0; a < u.ues.size(); ++a)
      precoders[static_cast<size_t>(u.ues[a])] =
          std::sqrt(sc.delta(static_cast<Eigen::Index>(a))) * v[a];
  }

  Audit audit = audit_precoders(ok ? precoders : std::vector<VecC>(static_cast<size_t>(K)), ch,
                                scen.serving, cfg.noise_power);
  return make_record("iczf", audit, scen, cfg, ok && rates_hit_target(audit, scen, cfg),
                     backhaul_stats_scalars(Method::iczf, scen.L(), K, N), iters);
}

RunRecord run_asymptotic(const Scenario& scen, const CorrelationSet& corr, const ChannelSet& ch,
                         const NetworkConfig& cfg, const RunOpts& opts) {
  const int K = scen.K();
  const int N = cfg.N;
  DetEquivState de = det_equiv_pipeline(corr, scen.serving, scen.gamma, cfg.mu_vec(),
                                        cfg.noise_power, opts.de);
  std::vector<VecC> precoders(static_cast<size_t>(K));
  bool ok = de.feasible;
  if (ok) {
    for (int b = 0; b < scen.L(); ++b) {
      MatC A = cfg.mu_of(b) * static_cast<double>(N) * MatC::Identity(N, N);
      for (int j = 0; j < K; ++j)
        if (de.lambda_bar(j) > 0.0)
          A += de.lambda_bar(j) * ch.H[static_cast<size_t>(b)].col(j) *
               ch.H[static_cast<size_t>(b)].col(j).adjoint();
      Eigen::LLT<MatC> llt(A);
      for (int k : scen.served[static_cast<size_t>(b)]) {
        if (scen.gamma(k) <= 0.0) {
          precoders[static_cast<size_t>(k)] = VecC::Zero(N);
          continue;
        }
        VecC h = ch.H[static_cast<size_t>(b)].col(k);
        VecC x = llt.solve(h);
        double q = h.dot(x).real();
        precoders[static_cast<size_t>(k)] =
            std::sqrt(de.delta_bar(k)) / (1.0 - de.lambda_bar(k) * q) * x;
      }
    }
  }
  Audit audit = audit_precoders(precoders, ch, scen.serving, cfg.noise_power);
  // the flag reports genuine target attainment; finite arrays may miss it
  return make_record("asymptotic", audit, scen, cfg, ok && rates_hit_target(audit, scen, cfg),
                     backhaul_stats_scalars(Method::asymptotic, scen.L(), K, N), de.iterations);
}

long long backhaul_stats_scalars(Method m, int L, int K, int N) {
  const long long others = static_cast<long long>(L - 1) * K;
  switch (m) {
    case Method::alg1:
    case Method::asymptotic: return others * N * N;
    case Method::alg2:
    case Method::iid:
    case Method::grouped: return others;
    default: return 0;  // centralized shares per fading block; zf/iczf share nothing
  }
}

long long backhaul_fading_scalars(Method m, int L, int K, int N) {
  if (m == Method::centralized) return static_cast<long long>(L - 1) * K * 2 * N;
  return 0;
}

}  // namespace mcbeam
