#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcbeam/det_equiv.hpp"
#include "mcbeam/grouping.hpp"
#include "mcbeam/scenario.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace mcbeam;

namespace {

NetworkConfig two_cell(int K_per, int N) {
  NetworkConfig cfg;
  cfg.L = 2;
  cfg.K_per_cell = K_per;
  cfg.N = N;
  return cfg;
}

// One BS, one UE, white correlation: every scalar has a closed form.
GroupScenario unit_case(int N) {
  GroupScenario gs;
  gs.L = 1;
  gs.K = 1;
  gs.N = N;
  gs.n_groups = 1;
  gs.group_of = {0};
  gs.group_corr = {SpatialCov::identity(1.0)};
  gs.Xi = {VecD::Ones(N)};
  gs.U = {MatC::Identity(N, N)};
  gs.pathloss = MatD::Ones(1, 1);
  gs.gamma = VecD::Ones(1);
  gs.mu = {1.0};
  gs.serving = {0};
  gs.served = {{0}};
  return gs;
}

double trace_form_eta(const GroupScenario& gs, int b, int g, double s) {
  MatC theta = gs.group_corr[static_cast<size_t>(gs.pair(b, g))].to_dense(gs.N);
  MatC T = ((s / gs.N) * theta + gs.mu[static_cast<size_t>(b)] * MatC::Identity(gs.N, gs.N))
               .inverse();
  return (theta * T).trace().real() / gs.N;
}

}  // namespace

TEST_CASE("single white UE reproduces every closed-form scalar") {
  GroupScenario gs = unit_case(4);
  const double noise = 1.7e-13;
  GroupSolution sol = solve_grouped(gs, noise);
  REQUIRE(sol.feasible);
  CHECK(sol.eta_bar(0, 0) == doctest::Approx(7.0 / 8.0).epsilon(1e-10));
  CHECK(sol.lambda_bar(0) == doctest::Approx(8.0 / 7.0).epsilon(1e-10));
  CHECK(sol.coeffs.s(0, 0) == doctest::Approx(4.0 / 7.0).epsilon(1e-10));
  CHECK(sol.coeffs.rho(0, 0) == doctest::Approx(1.0 / 49.0).epsilon(1e-10));
  CHECK(sol.coeffs.zeta_prime(0, 0) == doctest::Approx(49.0 / 60.0).epsilon(1e-10));
  CHECK(sol.coeffs.phi(0, 0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(sol.P_bar(0, 0) == doctest::Approx(4.0 * noise / 15.0).epsilon(1e-9));
  CHECK(sol.ici_bar.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectral and trace forms of the measure update agree") {
  GroupScenario gs = build_group_scenario(two_cell(3, 12), 42, GroupMode::block_orthogonal);
  bool conv = false;
  MatD eta = solve_eta(gs, {}, &conv);
  REQUIRE(conv);
  GroupCoeffs coeffs = group_coefficients(gs, eta);
  for (int b = 0; b < 2; ++b)
    for (int g = 0; g < 3; ++g) {
      // converged point satisfies the trace form too
      CHECK(eta(b, g) ==
            doctest::Approx(trace_form_eta(gs, b, g, coeffs.s(b, g))).epsilon(1e-9));
      // and the two forms agree away from the fixed point
      const VecD& Xi = gs.Xi[static_cast<size_t>(gs.pair(b, g))];
      double s = 0.37;
      double spectral = 0;
      for (Eigen::Index i = 0; i < Xi.size(); ++i)
        spectral += 1.0 / (s + gs.N * gs.mu[static_cast<size_t>(b)] / Xi(i));
      CHECK(spectral == doctest::Approx(trace_form_eta(gs, b, g, s)).epsilon(1e-9));
    }
}

TEST_CASE("block-orthogonal statistics collapse to the generic pipeline") {
  for (std::uint64_t seed : {42u, 43u, 44u}) {
    GroupScenario gs = build_group_scenario(two_cell(3, 12), seed, GroupMode::block_orthogonal);
    NetworkConfig cfg = two_cell(3, 12);
    CrossValReport rep = cross_validate_grouping(gs, cfg.noise_power);
    REQUIRE(rep.ok);
    CHECK(rep.max_rel_eta <= 1e-6);
    CHECK(rep.max_rel_ici <= 1e-6);
    CHECK(rep.max_rel_power <= 1e-6);
    CHECK(rep.grouped_total_power ==
          doctest::Approx(rep.generic_total_power).epsilon(1e-6));

    // multipliers agree with the generic ones as well
    GroupSolution sol = solve_grouped(gs, cfg.noise_power);
    DetEquivState de = det_equiv_pipeline(expand_correlations(gs), gs.serving, gs.gamma,
                                          gs.mu, cfg.noise_power);
    REQUIRE(de.feasible);
    for (int k = 0; k < gs.K; ++k)
      CHECK(sol.lambda_bar(k) == doctest::Approx(de.lambda_bar(k)).epsilon(1e-6));
  }
}

TEST_CASE("power system solution satisfies the assembled linear system") {
  GroupScenario gs = build_group_scenario(two_cell(6, 12), 7, GroupMode::block_orthogonal);
  GroupSolution sol = solve_grouped(gs, 1e-13);
  REQUIRE(sol.feasible);

  const int P = gs.L * gs.n_groups;
  const MatD& eta = sol.eta_bar;
  const GroupCoeffs& c = sol.coeffs;
  VecD f(gs.K);
  for (int j = 0; j < gs.K; ++j) {
    int bj = gs.serving[static_cast<size_t>(j)];
    int gj = gs.g_of(bj, j);
    double w = gs.gamma(j) * c.zeta_prime(bj, gj) /
               (gs.N * gs.pathloss(bj, j) * eta(bj, gj) * eta(bj, gj));
    f(j) = 1.0 / (1.0 + w * c.phi(bj, j) * gs.pathloss(bj, j));
  }
  MatD lhs = MatD::Zero(P, P);
  VecD u = VecD::Zero(P);
  for (int b = 0; b < gs.L; ++b)
    for (int g = 0; g < gs.n_groups; ++g)
      lhs(gs.pair(b, g), gs.pair(b, g)) = eta(b, g) * eta(b, g) / c.zeta_prime(b, g);
  for (int bp = 0; bp < gs.L; ++bp)
    for (int j : gs.served[static_cast<size_t>(bp)]) {
      int row = gs.pair(bp, gs.g_of(bp, j));
      u(row) += 1e-13 * gs.gamma(j) * f(j) / (gs.N * gs.pathloss(bp, j));
      for (int b = 0; b < gs.L; ++b)
        lhs(row, gs.pair(b, gs.g_of(b, j))) -= c.phi(b, j) * gs.gamma(j) * gs.pathloss(b, j) *
                                               f(j) / (gs.N * gs.pathloss(bp, j));
    }
  VecD pvec(P);
  for (int b = 0; b < gs.L; ++b)
    for (int g = 0; g < gs.n_groups; ++g) pvec(gs.pair(b, g)) = sol.P_bar(b, g);
  CHECK((lhs * pvec - u).cwiseAbs().maxCoeff() <= 1e-10 * u.cwiseAbs().maxCoeff());

  // the pathloss cancels inside the fold: f = ND / (ND + gamma phi)
  for (int j = 0; j < gs.K; ++j) {
    int bj = gs.serving[static_cast<size_t>(j)];
    int gj = gs.g_of(bj, j);
    double nd = gs.N * eta(bj, gj) * eta(bj, gj) / c.zeta_prime(bj, gj);
    CHECK(f(j) ==
          doctest::Approx(nd / (nd + gs.gamma(j) * c.phi(bj, j))).epsilon(1e-12));
  }
}

TEST_CASE("zero-target UE drops out of the group system") {
  GroupScenario gs = build_group_scenario(two_cell(3, 12), 9, GroupMode::block_orthogonal);
  gs.gamma(2) = 0.0;
  GroupSolution sol = solve_grouped(gs, 1e-13);
  REQUIRE(sol.feasible);
  CHECK(sol.lambda_bar(2) == 0.0);
  for (int b = 0; b < gs.L; ++b) CHECK(sol.coeffs.phi(b, 2) == 0.0);
  CHECK(sol.ici_bar.col(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.P_bar.allFinite());
  CHECK((sol.P_bar.array() >= 0.0).all());
}

TEST_CASE("geometric drop places UEs in intersecting sectors") {
  NetworkConfig cfg = two_cell(3, 24);
  GroupScenario gs = build_group_scenario(cfg, 5, GroupMode::geometric);
  REQUIRE(gs.K == 6);
  REQUIRE(gs.scen.ue_positions.size() == 6);
  const double half = M_PI / 12.0;
  for (int k = 0; k < gs.K; ++k) {
    CHECK(gs.g_of(0, k) == gs.g_of(1, k));
    int g = gs.g_of(0, k);
    double c0 = -M_PI / 4.0 + (2 * g + 1) * half;
    Vec2 p = gs.scen.ue_positions[static_cast<size_t>(k)];
    double b0 = std::atan2(p.y(), p.x());
    double b1 = std::atan2(p.y(), p.x() - cfg.inter_site_distance);
    auto wrap = [](double a) {
      while (a > M_PI) a -= 2 * M_PI;
      while (a <= -M_PI) a += 2 * M_PI;
      return a;
    };
    CHECK(std::abs(wrap(b0 - c0)) <= half);
    CHECK(std::abs(wrap(b1 - (M_PI - c0))) <= half);
    CHECK(p.norm() >= cfg.min_ue_distance);
    CHECK((p - gs.scen.bs_positions[1]).norm() >= cfg.min_ue_distance);
    double d0 = p.norm();
    CHECK(gs.pathloss(0, k) ==
          doctest::Approx(std::pow(cfg.d0 / d0, cfg.pathloss_exponent)).epsilon(1e-12));
  }
  for (size_t b = 0; b < 2; ++b) CHECK(gs.served[b].size() == 3);

  // unit-gain Toeplitz correlation per pair, trace N, descending spectrum
  for (int b = 0; b < 2; ++b)
    for (int g = 0; g < 3; ++g) {
      const VecD& Xi = gs.Xi[static_cast<size_t>(gs.pair(b, g))];
      CHECK(Xi.sum() == doctest::Approx(static_cast<double>(gs.N)).epsilon(1e-6));
      for (Eigen::Index i = 0; i + 1 < Xi.size(); ++i) CHECK(Xi(i) >= Xi(i + 1));
      MatC dense = gs.group_corr[static_cast<size_t>(gs.pair(b, g))].to_dense(gs.N);
      for (int i = 0; i < gs.N; ++i)
        CHECK(dense(i, i).real() == doctest::Approx(1.0).epsilon(1e-9));
    }

  GroupScenario again = build_group_scenario(cfg, 5, GroupMode::geometric);
  for (int k = 0; k < gs.K; ++k)
    CHECK((gs.scen.ue_positions[static_cast<size_t>(k)] -
           again.scen.ue_positions[static_cast<size_t>(k)])
              .norm() == 0.0);
}

TEST_CASE("expanded correlations share group payloads") {
  GroupScenario gs = build_group_scenario(two_cell(3, 12), 11, GroupMode::block_orthogonal);
  CorrelationSet corr = expand_correlations(gs);
  for (int b = 0; b < 2; ++b)
    for (int k = 0; k < gs.K; ++k) {
      const SpatialCov& cov = corr.at(b, k);
      const SpatialCov& base = gs.group_corr[static_cast<size_t>(gs.pair(b, gs.g_of(b, k)))];
      CHECK(cov.payload.get() == base.payload.get());
      CHECK(cov.scale == doctest::Approx(gs.pathloss(b, k)).epsilon(1e-15));
    }
}

TEST_CASE("geometric accuracy improves with array size") {
  auto gap = [](int N) {
    std::vector<double> rels;
    for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
      NetworkConfig cfg = two_cell(3, N);
      GroupScenario gs = build_group_scenario(cfg, seed, GroupMode::geometric);
      CrossValReport rep = cross_validate_grouping(gs, cfg.noise_power);
      REQUIRE(rep.ok);
      rels.push_back(std::abs(rep.grouped_total_power - rep.generic_total_power) /
                     rep.generic_total_power);
    }
    std::sort(rels.begin(), rels.end());
    return rels[rels.size() / 2];
  };
  double g24 = gap(24);
  double g96 = gap(96);
  CHECK(g96 < g24);
  CHECK(g96 < 0.1);
}
