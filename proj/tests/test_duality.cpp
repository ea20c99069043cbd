#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mcbeam/duality.hpp"
#include "mcbeam/rng.hpp"
#include "mcbeam/scenario.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace mcbeam;
using rng::Purpose;
using rng::Stream;

namespace {

struct Instance {
  ChannelSet channels;
  std::vector<int> serving;
  std::vector<std::vector<int>> served;
  VecD gamma;
  std::vector<double> mu;
};

// Synthetic flat instance: iid CN(0, own_gain) serving links, CN(0, cross_gain)
// cross links, K_per_cell UEs per BS.
Instance synth(int L, int K_per_cell, int N, std::uint64_t seed, double own_gain = 1.0,
               double cross_gain = 0.3, double gamma = 1.0) {
  Instance ins;
  int K = L * K_per_cell;
  ins.channels.L = L;
  ins.channels.K = K;
  ins.channels.N = N;
  ins.channels.H.assign(static_cast<size_t>(L), MatC(N, K));
  ins.serving.resize(static_cast<size_t>(K));
  ins.served.assign(static_cast<size_t>(L), {});
  ins.gamma = VecD::Constant(K, gamma);
  ins.mu.assign(static_cast<size_t>(L), 1.0);
  for (int k = 0; k < K; ++k) {
    ins.serving[static_cast<size_t>(k)] = k / K_per_cell;
    ins.served[static_cast<size_t>(k / K_per_cell)].push_back(k);
  }
  for (int b = 0; b < L; ++b)
    for (int k = 0; k < K; ++k) {
      Stream s(seed, Purpose::Synthetic, static_cast<std::uint64_t>(b),
               static_cast<std::uint64_t>(k));
      double g = ins.serving[static_cast<size_t>(k)] == b ? own_gain : cross_gain;
      for (int n = 0; n < N; ++n)
        ins.channels.H[static_cast<size_t>(b)](n, k) = std::sqrt(g) * s.cnormal();
    }
  return ins;
}

UplinkProblem problem_of(const Instance& ins) {
  UplinkProblem p;
  p.channels = &ins.channels;
  p.serving = &ins.serving;
  p.gamma = &ins.gamma;
  p.mu = ins.mu;
  for (int k = 0; k < ins.channels.K; ++k) p.ues.push_back(k);
  return p;
}

}  // namespace

TEST_CASE("fixed-point sweeps match the literal one-inverse-per-UE update") {
  Instance ins = synth(2, 2, 6, 42);
  UplinkProblem p = problem_of(ins);

  VecD naive = VecD::Zero(4);
  for (int m = 1; m <= 5; ++m) {
    naive = oracles::NaiveUplink::sweep(ins.channels.H, p.ues, ins.serving, ins.gamma, ins.mu,
                                        nullptr, naive);
    FixedPointOpts o;
    o.tol = 0.0;  // never early-stop
    o.max_iter = m;
    UplinkState st = solve_uplink_fixed_point(p, o);
    REQUIRE(st.iterations == m);
    for (int a = 0; a < 4; ++a)
      CHECK(st.lambda(a) == doctest::Approx(naive(a)).epsilon(1e-12));
  }
}

TEST_CASE("fixed point agrees with a coordinate-bisection oracle") {
  Instance ins = synth(2, 2, 8, 7);
  UplinkProblem p = problem_of(ins);
  UplinkState st = solve_uplink_fixed_point(p);
  REQUIRE(st.feasible);
  VecD ref = oracles::bisection_fixed_point(ins.channels.H, p.ues, ins.serving, ins.gamma, ins.mu,
                                            1e3, 200, 1e-12);
  for (int a = 0; a < 4; ++a) CHECK(st.lambda(a) == doctest::Approx(ref(a)).epsilon(1e-8));
}

TEST_CASE("iterates rise monotonically from zero") {
  Instance ins = synth(2, 3, 8, 9);
  UplinkProblem p = problem_of(ins);
  VecD prev = VecD::Zero(6);
  for (int m = 1; m <= 30; ++m) {
    FixedPointOpts o;
    o.tol = 0.0;
    o.max_iter = m;
    UplinkState st = solve_uplink_fixed_point(p, o);
    for (int a = 0; a < 6; ++a) CHECK(st.lambda(a) >= prev(a) - 1e-15);
    prev = st.lambda;
  }
}

TEST_CASE("single-UE closed forms") {
  Instance ins = synth(1, 1, 4, 3);
  UplinkProblem p = problem_of(ins);
  const VecC h = ins.channels.H[0].col(0);
  const double mu = 1.0, N = 4.0, gamma = 1.0;

  UplinkState st = solve_uplink_fixed_point(p);
  REQUIRE(st.feasible);
  CHECK(st.iterations <= 3);  // map is constant in lambda here
  CHECK(st.lambda(0) == doctest::Approx(gamma * mu * N / h.squaredNorm()).epsilon(1e-12));

  auto v = mmse_receivers(st, p);
  CHECK((v[0] - h / (mu * N)).norm() < 1e-12 * v[0].norm());

  MatD G = coupling_matrix(v, p);
  CHECK(G(0, 0) ==
        doctest::Approx(std::pow(h.squaredNorm() / (mu * N), 2) / gamma).epsilon(1e-12));

  const double sigma2 = 1e-3;
  ScalingResult sc = solve_scaling(G, VecD::Constant(1, sigma2));
  REQUIRE(sc.feasible);
  double power = sc.delta(0) * v[0].squaredNorm();
  CHECK(power == doctest::Approx(gamma * sigma2 / h.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("orthogonal channels decouple") {
  // canonical-basis channels at one BS: no cross terms anywhere
  Instance ins = synth(1, 3, 4, 1);
  for (int k = 0; k < 3; ++k) {
    ins.channels.H[0].col(k).setZero();
    ins.channels.H[0](k, k) = cd(2.0 - 0.5 * k, 0.0);
  }
  UplinkProblem p = problem_of(ins);
  UplinkState st = solve_uplink_fixed_point(p);
  REQUIRE(st.feasible);
  auto v = mmse_receivers(st, p);
  MatD G = coupling_matrix(v, p);
  for (int k = 0; k < 3; ++k) {
    double n2 = ins.channels.H[0].col(k).squaredNorm();
    CHECK(st.lambda(k) == doctest::Approx(4.0 / n2).epsilon(1e-10));
    for (int i = 0; i < 3; ++i)
      if (i != k) CHECK(std::abs(G(k, i)) < 1e-20);
  }
  ScalingResult sc = solve_scaling(G, VecD::Constant(3, 1e-2));
  REQUIRE(sc.feasible);
  for (int k = 0; k < 3; ++k) {
    double n2 = ins.channels.H[0].col(k).squaredNorm();
    CHECK(sc.delta(k) * v[static_cast<size_t>(k)].squaredNorm() ==
          doctest::Approx(1e-2 / n2).epsilon(1e-10));
  }
}

TEST_CASE("zero targets converge immediately with zero powers") {
  Instance ins = synth(2, 2, 4, 5, 1.0, 0.3, 0.0);
  UplinkProblem p = problem_of(ins);
  UplinkState st = solve_uplink_fixed_point(p);
  CHECK(st.feasible);
  CHECK(st.iterations == 1);
  CHECK(st.lambda.maxCoeff() == 0.0);
}

TEST_CASE("scaling solve matches Cramer on a 2x2 system") {
  MatD G(2, 2);
  G << 4.0, -0.5, -0.25, 3.0;
  VecD noise = VecD::Constant(2, 1e-2);
  ScalingResult sc = solve_scaling(G, noise);
  REQUIRE(sc.feasible);
  VecD ref = oracles::cramer2(G, noise);
  CHECK(sc.delta(0) == doctest::Approx(ref(0)).epsilon(1e-14));
  CHECK(sc.delta(1) == doctest::Approx(ref(1)).epsilon(1e-14));

  MatD bad(2, 2);
  bad << 1.0, -2.0, -2.0, 1.0;  // negative solution
  ScalingResult sb = solve_scaling(bad, noise);
  CHECK(!sb.feasible);
}

TEST_CASE("infeasible targets blow past the multiplier cap") {
  // two colinear UEs at one BS with enormous targets cannot both be served
  Instance ins = synth(1, 2, 4, 13, 1.0, 0.3, 1e9);
  ins.channels.H[0].col(1) = ins.channels.H[0].col(0) * cd(0.9, 0.1);
  UplinkProblem p = problem_of(ins);
  FixedPointOpts o;
  o.max_iter = 3000;
  UplinkState st = solve_uplink_fixed_point(p, o);
  CHECK(!st.feasible);
}

TEST_CASE("centralized solve on dropped geometry") {
  NetworkConfig c;
  c.L = 3;
  c.K_per_cell = 2;
  c.N = 8;
  c.validate();

  for (std::uint64_t seed : {101, 102, 103, 104, 105}) {
    CAPTURE(seed);
    Scenario s = build_geometry(c, seed);
    CorrelationSet cs = build_correlations(s, c);
    ChannelSet ch = sample_channels(cs, seed);
    DualSolution sol = solve_centralized(s, ch, c);
    REQUIRE(sol.feasible);

    const double gamma = c.gamma_target();
    // downlink SINRs equal the target
    for (int k = 0; k < s.K(); ++k)
      CHECK(sol.audit.per_ue_sinr(k) / gamma == doctest::Approx(1.0).epsilon(1e-6));

    // uplink and downlink weighted powers agree
    double up = sol.state.lambda.sum() * c.noise_power / c.N;
    double down = 0;
    for (int b = 0; b < c.L; ++b) down += c.mu_of(b) * sol.audit.per_bs_power(b);
    CHECK(up == doctest::Approx(down).epsilon(1e-6));

    // audit interference decomposition: cross-cell rows sum to the
    // interference implied by the measured SINR minus the intra-cell part
    for (int k = 0; k < s.K(); ++k) {
      int bk = s.serving[static_cast<size_t>(k)];
      double sig = std::norm(ch.H[static_cast<size_t>(bk)].col(k).dot(sol.precoders[static_cast<size_t>(k)]));
      double total = sig / sol.audit.per_ue_sinr(k) - c.noise_power;
      double intra = 0;
      for (int j : s.served[static_cast<size_t>(bk)])
        if (j != k)
          intra += std::norm(ch.H[static_cast<size_t>(bk)].col(k).dot(sol.precoders[static_cast<size_t>(j)]));
      double cross = sol.audit.ici.col(k).sum();
      CHECK(cross + intra == doctest::Approx(total).epsilon(1e-8));
      CHECK(sol.audit.ici(bk, k) == 0.0);
    }
  }
}

TEST_CASE("per-antenna phase rotations leave powers invariant") {
  NetworkConfig c;
  c.L = 2;
  c.K_per_cell = 2;
  c.N = 6;
  Scenario s = build_geometry(c, 55);
  CorrelationSet cs = build_correlations(s, c);
  ChannelSet ch = sample_channels(cs, 55);
  DualSolution ref = solve_centralized(s, ch, c);
  REQUIRE(ref.feasible);

  ChannelSet rot = ch;
  Stream ph(99, Purpose::Synthetic, 0, 0);
  for (int b = 0; b < c.L; ++b)
    for (int k = 0; k < s.K(); ++k)
      rot.H[static_cast<size_t>(b)].col(k) *=
          std::exp(cd(0.0, 2.0 * M_PI * ph.uniform()));
  DualSolution r2 = solve_centralized(s, rot, c);
  REQUIRE(r2.feasible);
  CHECK((r2.state.lambda - ref.state.lambda).cwiseAbs().maxCoeff() <
        1e-10 * ref.state.lambda.maxCoeff());
  CHECK(r2.audit.per_bs_power.sum() ==
        doctest::Approx(ref.audit.per_bs_power.sum()).epsilon(1e-10));
}

TEST_CASE("audit of hand-built precoders") {
  ChannelSet ch;
  ch.L = 1;
  ch.K = 2;
  ch.N = 2;
  ch.H = {MatC(2, 2)};
  ch.H[0] << cd(1, 0), cd(0, 0), cd(0, 0), cd(2, 0);
  std::vector<int> serving = {0, 0};
  std::vector<VecC> w(2);
  w[0] = VecC(2);
  w[0] << cd(3, 0), cd(0, 0);
  w[1] = VecC();  // absent
  Audit a = audit_precoders(w, ch, serving, 1.0);
  CHECK(a.per_bs_power(0) == 9.0);
  CHECK(a.per_ue_sinr(0) == doctest::Approx(9.0));
  CHECK(a.per_ue_rate(0) == doctest::Approx(std::log2(10.0)));
  CHECK(a.per_ue_sinr(1) == 0.0);
  CHECK(a.per_ue_rate(1) == 0.0);
  CHECK(a.ici.cwiseAbs().maxCoeff() == 0.0);
}
