#include "mcbeam/grouping.hpp"

#include "mcbeam/rng.hpp"
#include "mcbeam/scenario.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace mcbeam {

namespace {

constexpr int kGroups = 3;
constexpr double kSectorHalf = M_PI / 12.0;  // pi/6 spans

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// Sector centers seen from BS0; BS1 uses the mirror through the x axis flip.
double sector_center0(int g) { return -M_PI / 4.0 + (2 * g + 1) * kSectorHalf; }

void eigen_of(const MatC& theta, VecD& Xi, MatC& U) {
  Eigen::SelfAdjointEigenSolver<MatC> es(theta);
  const int N = static_cast<int>(theta.rows());
  double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int i = N - 1; i >= 0; --i)
    if (es.eigenvalues()(i) > 1e-14 * top) keep.push_back(i);
  Xi.resize(static_cast<Eigen::Index>(keep.size()));
  U.resize(N, static_cast<Eigen::Index>(keep.size()));
  for (size_t t = 0; t < keep.size(); ++t) {
    Xi(static_cast<Eigen::Index>(t)) = es.eigenvalues()(keep[t]);
    U.col(static_cast<Eigen::Index>(t)) = es.eigenvectors().col(keep[t]);
  }
}

}  // namespace

GroupScenario build_group_scenario(const NetworkConfig& config, std::uint64_t seed,
                                   GroupMode mode) {
  if (config.L != 2) throw std::invalid_argument("group scenario needs exactly two cells");
  if (config.K_per_cell % kGroups != 0)
    throw std::invalid_argument("K_per_cell must divide by the group count");
  if (mode == GroupMode::block_orthogonal && config.N % kGroups != 0)
    throw std::invalid_argument("block mode needs N divisible by the group count");

  GroupScenario gs;
  gs.L = 2;
  gs.K = config.K();
  gs.N = config.N;
  gs.n_groups = kGroups;
  gs.mu = config.mu_vec();
  gs.gamma = VecD::Constant(gs.K, config.gamma_target());
  gs.serving.resize(static_cast<size_t>(gs.K));
  gs.served.assign(2, {});
  gs.group_of.assign(static_cast<size_t>(2 * gs.K), 0);
  gs.pathloss = MatD::Zero(2, gs.K);
  for (int k = 0; k < gs.K; ++k) {
    int b = k / config.K_per_cell;
    gs.serving[static_cast<size_t>(k)] = b;
    gs.served[static_cast<size_t>(b)].push_back(k);
    int g = (k % config.K_per_cell) % kGroups;
    gs.group_of[static_cast<size_t>(0) * gs.K + k] = g;
    gs.group_of[static_cast<size_t>(1) * gs.K + k] = g;
  }

  gs.group_corr.resize(static_cast<size_t>(2 * kGroups));
  gs.Xi.resize(static_cast<size_t>(2 * kGroups));
  gs.U.resize(static_cast<size_t>(2 * kGroups));

  if (mode == GroupMode::geometric) {
    const double isd = config.inter_site_distance;
    gs.scen.bs_positions = {Vec2(0.0, 0.0), Vec2(isd, 0.0)};
    gs.scen.ue_positions.resize(static_cast<size_t>(gs.K));
    gs.scen.serving = gs.serving;
    gs.scen.served = gs.served;
    gs.scen.gamma = gs.gamma;
    gs.scen.pathloss = MatD::Zero(2, gs.K);
    gs.scen.aoa = MatD::Zero(2, gs.K);
    gs.scen.spread = MatD::Constant(2, gs.K, 2.0 * kSectorHalf);

    for (int k = 0; k < gs.K; ++k) {
      int g = gs.g_of(0, k);
      double c0 = sector_center0(g);
      double c1 = wrap_angle(M_PI - c0);
      rng::Stream st(seed, rng::Purpose::Geometry,
                     static_cast<std::uint64_t>(gs.serving[static_cast<size_t>(k)]),
                     static_cast<std::uint64_t>(k));
      bool placed = false;
      for (long t = 0; t < 100000; ++t) {
        double x = st.uniform() * isd;
        double y = (st.uniform() - 0.5) * isd;
        Vec2 p(x, y);
        double d0 = p.norm();
        double d1 = (p - gs.scen.bs_positions[1]).norm();
        if (d0 < config.min_ue_distance || d1 < config.min_ue_distance) continue;
        double b0 = std::atan2(y, x);
        double b1 = std::atan2(y, x - isd);
        if (std::abs(wrap_angle(b0 - c0)) > kSectorHalf) continue;
        if (std::abs(wrap_angle(b1 - c1)) > kSectorHalf) continue;
        gs.scen.ue_positions[static_cast<size_t>(k)] = p;
        gs.pathloss(0, k) = std::pow(config.d0 / d0, config.pathloss_exponent);
        gs.pathloss(1, k) = std::pow(config.d0 / d1, config.pathloss_exponent);
        gs.scen.aoa(0, k) = b0;
        gs.scen.aoa(1, k) = b1;
        placed = true;
        break;
      }
      if (!placed) throw std::runtime_error("sector intersection sampling exhausted");
    }
    gs.scen.pathloss = gs.pathloss;

    for (int b = 0; b < 2; ++b)
      for (int g = 0; g < kGroups; ++g) {
        double lo, hi;
        if (b == 0) {
          lo = sector_center0(g) - kSectorHalf;
          hi = sector_center0(g) + kSectorHalf;
        } else {
          // mirror; the integrand is periodic so the raw interval works
          lo = M_PI - (sector_center0(g) + kSectorHalf);
          hi = M_PI - (sector_center0(g) - kSectorHalf);
        }
        VecC col = one_ring_profile(lo, hi, gs.N, config.spacing_ratio);
        SpatialCov cov = SpatialCov::toeplitz(1.0, col);
        int p = gs.pair(b, g);
        eigen_of(cov.to_dense(gs.N), gs.Xi[static_cast<size_t>(p)], gs.U[static_cast<size_t>(p)]);
        gs.group_corr[static_cast<size_t>(p)] = std::move(cov);
      }
  } else {
    const int m = gs.N / kGroups;
    for (int b = 0; b < 2; ++b)
      for (int g = 0; g < kGroups; ++g) {
        rng::Stream st(seed, rng::Purpose::Synthetic, static_cast<std::uint64_t>(b),
                       static_cast<std::uint64_t>(g));
        // random unitary on the block from a QR factorization
        MatC Z(m, m);
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < m; ++c) Z(r, c) = st.cnormal();
        Eigen::HouseholderQR<MatC> qr(Z);
        MatC Q = qr.householderQ() * MatC::Identity(m, m);
        VecD spec(m);
        for (int i = 0; i < m; ++i) spec(i) = 0.5 + st.uniform();
        spec *= static_cast<double>(gs.N) / spec.sum();  // trace N, pathloss factored out
        std::sort(spec.data(), spec.data() + m, std::greater<double>());

        MatC Ufull = MatC::Zero(gs.N, m);
        Ufull.block(g * m, 0, m, m) = Q;
        auto payload = std::make_shared<MatC>(Ufull * spec.asDiagonal() * Ufull.adjoint());
        int p = gs.pair(b, g);
        gs.group_corr[static_cast<size_t>(p)] = SpatialCov::dense(1.0, payload);
        gs.Xi[static_cast<size_t>(p)] = spec;
        gs.U[static_cast<size_t>(p)] = Ufull;
      }
    for (int k = 0; k < gs.K; ++k) {
      rng::Stream st(seed, rng::Purpose::Geometry, 7, static_cast<std::uint64_t>(k));
      int own = gs.serving[static_cast<size_t>(k)];
      double base = 1e-8 * (0.5 + st.uniform());
      double ratio = 0.05 + 0.2 * st.uniform();
      gs.pathloss(own, k) = base;
      gs.pathloss(1 - own, k) = base * ratio;
    }
  }
  return gs;
}

namespace {

// s_{b,g} summand of UE j given the current eta field.
double s_summand(const GroupScenario& gs, const MatD& eta, int b, int g, int j) {
  double gj = gs.gamma(j);
  if (gj <= 0.0) return 0.0;
  int bj = gs.serving[static_cast<size_t>(j)];
  double den = gs.pathloss(bj, j) * eta(bj, gs.g_of(bj, j)) +
               gj * gs.pathloss(b, j) * eta(b, g);
  return gj * gs.pathloss(b, j) / std::max(den, 1e-300);
}

MatD s_field(const GroupScenario& gs, const MatD& eta) {
  MatD s = MatD::Zero(gs.L, gs.n_groups);
  for (int b = 0; b < gs.L; ++b)
    for (int j = 0; j < gs.K; ++j) s(b, gs.g_of(b, j)) += s_summand(gs, eta, b, gs.g_of(b, j), j);
  return s;
}

double eta_update(const GroupScenario& gs, int b, int g, double s) {
  const VecD& Xi = gs.Xi[static_cast<size_t>(gs.pair(b, g))];
  double acc = 0;
  for (Eigen::Index i = 0; i < Xi.size(); ++i)
    acc += 1.0 / (s + gs.N * gs.mu[static_cast<size_t>(b)] / Xi(i));
  return acc;
}

}  // namespace

MatD solve_eta(const GroupScenario& gs, const DetEquivOpts& opts, bool* converged) {
  MatD eta(gs.L, gs.n_groups);
  for (int b = 0; b < gs.L; ++b)
    for (int g = 0; g < gs.n_groups; ++g)
      eta(b, g) = gs.Xi[static_cast<size_t>(gs.pair(b, g))].sum() /
                  (gs.mu[static_cast<size_t>(b)] * gs.N);

  bool done = false;
  for (int it = 0; it < opts.max_iter && !done; ++it) {
    MatD s = s_field(gs, eta);
    double rel = 0;
    MatD next(gs.L, gs.n_groups);
    for (int b = 0; b < gs.L; ++b)
      for (int g = 0; g < gs.n_groups; ++g) {
        next(b, g) = std::max(eta_update(gs, b, g, s(b, g)), 1e-30);
        rel = std::max(rel, std::abs(next(b, g) - eta(b, g)) / next(b, g));
      }
    if (rel <= opts.tol) {
      eta = next;
      done = true;
    } else {
      eta = (1.0 - opts.damping) * eta + opts.damping * next;
    }
  }
  if (converged) *converged = done;
  return eta;
}

GroupCoeffs group_coefficients(const GroupScenario& gs, const MatD& eta_bar) {
  GroupCoeffs c;
  c.s = s_field(gs, eta_bar);
  c.phi = MatD::Zero(gs.L, gs.K);
  c.zeta_prime = MatD::Zero(gs.L, gs.n_groups);
  c.rho = MatD::Zero(gs.L, gs.n_groups);

  // spectral scalars of T_{b,g} = ((s/N) Theta + mu I)^{-1}
  MatD tr_TT(gs.L, gs.n_groups);   // tr(Theta T^2)
  MatD tr_Tsq(gs.L, gs.n_groups);  // tr((Theta T)^2)
  for (int b = 0; b < gs.L; ++b)
    for (int g = 0; g < gs.n_groups; ++g) {
      const VecD& Xi = gs.Xi[static_cast<size_t>(gs.pair(b, g))];
      double a1 = 0, a2 = 0;
      for (Eigen::Index i = 0; i < Xi.size(); ++i) {
        double t = 1.0 / ((c.s(b, g) / gs.N) * Xi(i) + gs.mu[static_cast<size_t>(b)]);
        a1 += Xi(i) * t * t;
        a2 += Xi(i) * Xi(i) * t * t;
      }
      tr_TT(b, g) = a1;
      tr_Tsq(b, g) = a2;
      double rho = 0;
      for (int j = 0; j < gs.K; ++j)
        if (gs.g_of(b, j) == g) {
          double sj = s_summand(gs, eta_bar, b, g, j);
          rho += sj * sj;
        }
      rho /= static_cast<double>(gs.N) * gs.N;
      c.rho(b, g) = rho;
      double den = 1.0 - rho * a2;
      c.zeta_prime(b, g) = (a1 / gs.N) / std::max(den, 1e-300);
    }

  for (int b = 0; b < gs.L; ++b)
    for (int k = 0; k < gs.K; ++k) {
      if (gs.gamma(k) <= 0.0) continue;
      int g = gs.g_of(b, k);
      int bk = gs.serving[static_cast<size_t>(k)];
      double x = gs.gamma(k) * (gs.pathloss(b, k) * eta_bar(b, g)) /
                 (gs.pathloss(bk, k) * eta_bar(bk, gs.g_of(bk, k)));
      c.phi(b, k) = (tr_Tsq(b, g) / tr_TT(b, g)) / ((1.0 + x) * (1.0 + x));
    }
  c.ok = c.zeta_prime.allFinite() && c.phi.allFinite();
  return c;
}

MatD solve_group_powers(const GroupScenario& gs, const MatD& eta_bar, const GroupCoeffs& coeffs,
                        double noise_power, bool* feasible) {
  const int P = gs.L * gs.n_groups;
  MatD A = MatD::Zero(P, P);
  VecD u = VecD::Zero(P);

  // per-UE discount folding each UE's own contribution out of its row
  VecD f = VecD::Ones(gs.K);
  for (int j = 0; j < gs.K; ++j) {
    if (gs.gamma(j) <= 0.0) continue;
    int bj = gs.serving[static_cast<size_t>(j)];
    int gj = gs.g_of(bj, j);
    double a2 = gs.pathloss(bj, j);
    double w = gs.gamma(j) * coeffs.zeta_prime(bj, gj) /
               (gs.N * a2 * eta_bar(bj, gj) * eta_bar(bj, gj));
    double cc = coeffs.phi(bj, j) * a2;
    f(j) = 1.0 / (1.0 + w * cc);
  }

  for (int bp = 0; bp < gs.L; ++bp)
    for (int j : gs.served[static_cast<size_t>(bp)]) {
      if (gs.gamma(j) <= 0.0) continue;
      int gp = gs.g_of(bp, j);
      int row = gs.pair(bp, gp);
      u(row) += noise_power * gs.gamma(j) * f(j) / (gs.N * gs.pathloss(bp, j));
      for (int b = 0; b < gs.L; ++b) {
        int g = gs.g_of(b, j);
        A(row, gs.pair(b, g)) += coeffs.phi(b, j) * gs.gamma(j) * gs.pathloss(b, j) * f(j) /
                                 (static_cast<double>(gs.N) * gs.pathloss(bp, j));
      }
    }

  MatD D = MatD::Zero(P, P);
  for (int b = 0; b < gs.L; ++b)
    for (int g = 0; g < gs.n_groups; ++g) {
      int p = gs.pair(b, g);
      D(p, p) = eta_bar(b, g) * eta_bar(b, g) / coeffs.zeta_prime(b, g);
    }

  Eigen::PartialPivLU<MatD> lu(D - A);
  VecD sol = lu.solve(u);
  bool ok = sol.allFinite() && (D - A).cwiseAbs().maxCoeff() < 1e300;
  MatD Pbar(gs.L, gs.n_groups);
  for (int b = 0; b < gs.L; ++b)
    for (int g = 0; g < gs.n_groups; ++g) {
      Pbar(b, g) = sol(gs.pair(b, g));
      bool empty = u(gs.pair(b, g)) == 0.0;
      if (!empty && Pbar(b, g) <= 0.0) ok = false;
      if (empty && std::abs(Pbar(b, g)) > 0.0) ok = ok && std::abs(Pbar(b, g)) < 1e-30;
    }
  if (feasible) *feasible = ok;
  return Pbar;
}

MatD group_ici(const GroupScenario& gs, const GroupCoeffs& coeffs, const MatD& P_bar) {
  MatD eps = MatD::Zero(gs.L, gs.K);
  for (int b = 0; b < gs.L; ++b)
    for (int k = 0; k < gs.K; ++k) {
      if (gs.serving[static_cast<size_t>(k)] == b) continue;
      eps(b, k) = coeffs.phi(b, k) * gs.pathloss(b, k) * P_bar(b, gs.g_of(b, k));
    }
  return eps;
}

GroupSolution solve_grouped(const GroupScenario& gs, double noise_power,
                            const DetEquivOpts& opts) {
  GroupSolution sol;
  sol.eta_bar = solve_eta(gs, opts, &sol.converged);
  sol.coeffs = group_coefficients(gs, sol.eta_bar);
  bool power_ok = false;
  sol.P_bar = solve_group_powers(gs, sol.eta_bar, sol.coeffs, noise_power, &power_ok);
  sol.ici_bar = group_ici(gs, sol.coeffs, sol.P_bar);
  sol.lambda_bar = VecD::Zero(gs.K);
  for (int k = 0; k < gs.K; ++k)
    if (gs.gamma(k) > 0.0) {
      int bk = gs.serving[static_cast<size_t>(k)];
      sol.lambda_bar(k) =
          gs.gamma(k) / (gs.pathloss(bk, k) * sol.eta_bar(bk, gs.g_of(bk, k)));
    }
  sol.feasible = sol.converged && sol.coeffs.ok && power_ok;
  return sol;
}

CorrelationSet expand_correlations(const GroupScenario& gs) {
  CorrelationSet corr;
  corr.L = gs.L;
  corr.K = gs.K;
  corr.N = gs.N;
  corr.theta.resize(static_cast<size_t>(gs.L) * gs.K);
  for (int b = 0; b < gs.L; ++b)
    for (int k = 0; k < gs.K; ++k) {
      const SpatialCov& base = gs.group_corr[static_cast<size_t>(gs.pair(b, gs.g_of(b, k)))];
      SpatialCov scaled = base;  // payloads stay shared
      scaled.scale = base.scale * gs.pathloss(b, k);
      corr.at(b, k) = std::move(scaled);
    }
  return corr;
}

CrossValReport cross_validate_grouping(const GroupScenario& gs, double noise_power,
                                       const DetEquivOpts& opts) {
  CrossValReport rep;
  GroupSolution grouped = solve_grouped(gs, noise_power, opts);
  CorrelationSet corr = expand_correlations(gs);
  DetEquivState generic =
      det_equiv_pipeline(corr, gs.serving, gs.gamma, gs.mu, noise_power, opts);
  rep.ok = grouped.feasible && generic.feasible;
  if (!rep.ok) return rep;

  for (int b = 0; b < gs.L; ++b)
    for (int k = 0; k < gs.K; ++k) {
      double mine = gs.pathloss(b, k) * grouped.eta_bar(b, gs.g_of(b, k));
      rep.max_rel_eta =
          std::max(rep.max_rel_eta, std::abs(mine - generic.m_bar(b, k)) / generic.m_bar(b, k));
      if (gs.serving[static_cast<size_t>(k)] != b) {
        double ref = generic.ici_bar(b, k);
        rep.max_rel_ici = std::max(rep.max_rel_ici,
                                   std::abs(grouped.ici_bar(b, k) - ref) / std::max(ref, 1e-300));
      }
    }

  MatD agg = MatD::Zero(gs.L, gs.n_groups);
  for (int k = 0; k < gs.K; ++k) {
    int bk = gs.serving[static_cast<size_t>(k)];
    agg(bk, gs.g_of(bk, k)) += generic.p_bar(k);
  }
  for (int b = 0; b < gs.L; ++b)
    for (int g = 0; g < gs.n_groups; ++g) {
      if (agg(b, g) <= 0.0) continue;
      rep.max_rel_power = std::max(rep.max_rel_power,
                                   std::abs(grouped.P_bar(b, g) - agg(b, g)) / agg(b, g));
    }
  rep.grouped_total_power = grouped.P_bar.sum();
  rep.generic_total_power = generic.p_bar.sum();
  return rep;
}

}  // namespace mcbeam
