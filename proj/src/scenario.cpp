#include "mcbeam/scenario.hpp"

#include "mcbeam/quadrature.hpp"
#include "mcbeam/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mcbeam {

void NetworkConfig::validate() const {
  std::ostringstream bad;
  if (L < 1) bad << "L must be >= 1; ";
  if (L > 7) bad << "L must be <= 7 (hex center plus six neighbors); ";
  if (K_per_cell < 1) bad << "K_per_cell must be >= 1; ";
  if (N < 1) bad << "N must be >= 1; ";
  if (!mu.empty() && static_cast<int>(mu.size()) != L) bad << "mu list must have L entries; ";
  for (double m : mu)
    if (!(m > 0)) bad << "mu entries must be > 0; ";
  if (!(noise_power > 0)) bad << "noise_power must be > 0; ";
  if (!(inter_site_distance > 0)) bad << "inter_site_distance must be > 0; ";
  if (!(d0 > 0)) bad << "d0 must be > 0; ";
  if (!(pathloss_exponent > 0)) bad << "pathloss_exponent must be > 0; ";
  if (!(spacing_ratio > 0)) bad << "spacing_ratio must be > 0; ";
  if (!(served_spread > 0 && served_spread <= 2 * M_PI)) bad << "served_spread out of (0, 2pi]; ";
  if (!(interferer_spread > 0 && interferer_spread <= 2 * M_PI))
    bad << "interferer_spread out of (0, 2pi]; ";
  if (!(target_rate > 0)) bad << "target_rate must be > 0; ";
  if (!(min_ue_distance >= d0)) bad << "min_ue_distance must be >= d0; ";
  std::string msg = bad.str();
  if (!msg.empty()) throw std::invalid_argument("NetworkConfig: " + msg);
}

namespace {

std::vector<Vec2> bs_layout(int L, double isd) {
  std::vector<Vec2> pos;
  pos.reserve(static_cast<size_t>(L));
  pos.emplace_back(0.0, 0.0);
  for (int i = 1; i < L; ++i) {
    double ang = (i - 1) * M_PI / 3.0;
    pos.emplace_back(isd * std::cos(ang), isd * std::sin(ang));
  }
  return pos;
}

}  // namespace

Scenario build_geometry(const NetworkConfig& config, std::uint64_t drop_seed) {
  config.validate();
  const int L = config.L, Kc = config.K_per_cell, K = config.K();
  const double R = config.inter_site_distance / std::sqrt(3.0);

  Scenario s;
  s.bs_positions = bs_layout(L, config.inter_site_distance);
  s.ue_positions.resize(static_cast<size_t>(K));
  s.serving.resize(static_cast<size_t>(K));
  s.served.assign(static_cast<size_t>(L), {});
  s.pathloss.resize(L, K);
  s.aoa.resize(L, K);
  s.spread.resize(L, K);
  s.gamma = VecD::Constant(K, config.gamma_target());

  for (int b = 0; b < L; ++b) {
    for (int i = 0; i < Kc; ++i) {
      const int k = b * Kc + i;
      rng::Stream st(drop_seed, rng::Purpose::Geometry, static_cast<std::uint64_t>(b),
                     static_cast<std::uint64_t>(i));
      Vec2 p;
      bool ok = false;
      for (long attempt = 0; attempt < 100000; ++attempt) {
        double r = R * std::sqrt(st.uniform());
        double th = 2.0 * M_PI * st.uniform();
        p = s.bs_positions[static_cast<size_t>(b)] + Vec2(r * std::cos(th), r * std::sin(th));
        double d_own = (p - s.bs_positions[static_cast<size_t>(b)]).norm();
        if (d_own < config.min_ue_distance) continue;
        bool closer_elsewhere = false;
        for (int b2 = 0; b2 < L; ++b2) {
          if (b2 != b && (p - s.bs_positions[static_cast<size_t>(b2)]).norm() < d_own) {
            closer_elsewhere = true;
            break;
          }
        }
        if (closer_elsewhere) continue;
        ok = true;
        break;
      }
      if (!ok) throw std::runtime_error("build_geometry: rejection sampling exceeded 1e5 attempts");
      s.ue_positions[static_cast<size_t>(k)] = p;
      s.serving[static_cast<size_t>(k)] = b;
      s.served[static_cast<size_t>(b)].push_back(k);
    }
  }

  for (int b = 0; b < L; ++b) {
    for (int k = 0; k < K; ++k) {
      Vec2 d = s.ue_positions[static_cast<size_t>(k)] - s.bs_positions[static_cast<size_t>(b)];
      double dist = d.norm();
      s.pathloss(b, k) = std::pow(config.d0 / dist, config.pathloss_exponent);
      s.aoa(b, k) = std::atan2(d.y(), d.x());
      s.spread(b, k) = (s.serving[static_cast<size_t>(k)] == b) ? config.served_spread
                                                                : config.interferer_spread;
    }
  }
  return s;
}

VecC one_ring_profile(double phi_min, double phi_max, int N, double spacing_ratio, double tol) {
  if (!(phi_max > phi_min)) throw std::invalid_argument("one_ring_profile: phi_max <= phi_min");
  const double c = 2.0 * M_PI * spacing_ratio;
  auto f = [&](double phi) {
    // entry d = exp(i c d cos phi); powers of the base phase factor
    VecC v(N);
    double x = c * std::cos(phi);
    cd base(std::cos(x), std::sin(x));
    cd acc(1.0, 0.0);
    for (int d = 0; d < N; ++d) {
      v(d) = acc;
      acc *= base;
    }
    return v;
  };
  VecC integral = adaptive_simpson(f, phi_min, phi_max, tol);
  return integral / (phi_max - phi_min);
}

SpatialCov one_ring_correlation(double a2, double phi_min, double phi_max, int N,
                                double spacing_ratio) {
  return SpatialCov::toeplitz(a2, one_ring_profile(phi_min, phi_max, N, spacing_ratio));
}

CorrelationSet build_correlations(const Scenario& scenario, const NetworkConfig& config) {
  CorrelationSet cs;
  cs.L = scenario.L();
  cs.K = scenario.K();
  cs.N = config.N;
  cs.theta.resize(static_cast<size_t>(cs.L) * cs.K);
  for (int b = 0; b < cs.L; ++b) {
    for (int k = 0; k < cs.K; ++k) {
      double half = 0.5 * scenario.spread(b, k);
      cs.at(b, k) = one_ring_correlation(scenario.pathloss(b, k), scenario.aoa(b, k) - half,
                                         scenario.aoa(b, k) + half, cs.N, config.spacing_ratio);
    }
  }
  return cs;
}

ChannelSet sample_channels(const CorrelationSet& correlations, std::uint64_t drop_seed) {
  ChannelSet ch;
  ch.L = correlations.L;
  ch.K = correlations.K;
  ch.N = correlations.N;
  ch.H.assign(static_cast<size_t>(ch.L), MatC(ch.N, ch.K));
  const int N = ch.N;
  for (int b = 0; b < ch.L; ++b) {
    for (int k = 0; k < ch.K; ++k) {
      rng::Stream st(drop_seed, rng::Purpose::Channel, static_cast<std::uint64_t>(b),
                     static_cast<std::uint64_t>(k));
      VecC z(N);
      for (int i = 0; i < N; ++i) z(i) = st.cnormal();
      const SpatialCov& t = correlations.at(b, k);
      if (t.kind == SpatialCov::Kind::Identity) {
        ch.H[static_cast<size_t>(b)].col(k) = std::sqrt(t.scale) * z;
        continue;
      }
      Eigen::SelfAdjointEigenSolver<MatC> es(t.to_dense(N));
      if (es.info() != Eigen::Success)
        throw std::runtime_error("sample_channels: eigendecomposition failed");
      VecD ev = es.eigenvalues();
      double max_ev = ev.maxCoeff();
      for (int i = 0; i < N; ++i) {
        if (ev(i) < -1e-10 * std::max(max_ev, 0.0))
          throw std::runtime_error("sample_channels: correlation matrix not PSD beyond tolerance");
        if (ev(i) < 0) ev(i) = 0;
      }
      // Theta^{1/2} z = U diag(sqrt(ev)) U^H z
      ch.H[static_cast<size_t>(b)].col(k) =
          es.eigenvectors() *
          (ev.cwiseSqrt().cast<cd>().asDiagonal() * (es.eigenvectors().adjoint() * z));
    }
  }
  return ch;
}

}  // namespace mcbeam
