#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

namespace mcbeam {

using cd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using MatD = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

struct NetworkConfig {
  int L = 7;
  int K_per_cell = 2;
  int N = 8;
  std::vector<double> mu;  // per-BS weight; empty means all ones
  double noise_power = 3.981071705534969e-14;  // watts, -104 dBm
  double inter_site_distance = 1000.0;         // meters
  double d0 = 1.0;                             // meters
  double pathloss_exponent = 3.0;
  double spacing_ratio = 0.5;  // antenna spacing / wavelength
  double served_spread = M_PI / 2.0;
  double interferer_spread = M_PI / 6.0;
  double target_rate = 1.0;  // bits/s/Hz
  double min_ue_distance = 35.0;
  std::uint64_t base_seed = 1;
  double bandwidth_mhz = 10.0;  // informational only; noise_power is authoritative

  int K() const { return L * K_per_cell; }
  double mu_of(int b) const { return mu.empty() ? 1.0 : mu.at(static_cast<size_t>(b)); }
  std::vector<double> mu_vec() const {
    return mu.empty() ? std::vector<double>(static_cast<size_t>(L), 1.0) : mu;
  }
  double gamma_target() const { return std::pow(2.0, target_rate) - 1.0; }

  // Throws std::invalid_argument on violated bounds.
  void validate() const;
};

struct Scenario {
  std::vector<Vec2> bs_positions;           // L
  std::vector<Vec2> ue_positions;           // K, global index k = b*K_per_cell + i
  std::vector<int> serving;                 // K, b_k
  std::vector<std::vector<int>> served;     // L, U_b ascending
  MatD pathloss;                            // L x K, a^2_{b,k}
  MatD aoa;                                 // L x K, bearing BS b -> UE k
  MatD spread;                              // L x K
  VecD gamma;                               // K

  int L() const { return static_cast<int>(bs_positions.size()); }
  int K() const { return static_cast<int>(ue_positions.size()); }
};

// Spatial correlation with a structure tag so large solves can pick fast paths.
//   Identity: theta = scale * I
//   Toeplitz: theta[r,c] = scale * col[r-c], col[-d] = conj(col[d]), col[0] = 1
//   Dense:    theta = scale * payload; payload may be shared between UEs
struct SpatialCov {
  enum class Kind { Identity, Toeplitz, Dense };

  Kind kind = Kind::Identity;
  double scale = 1.0;
  VecC col;                             // Toeplitz only, length N
  std::shared_ptr<const MatC> payload;  // Dense only, N x N Hermitian

  static SpatialCov identity(double scale) { return SpatialCov{Kind::Identity, scale, {}, nullptr}; }
  static SpatialCov toeplitz(double scale, VecC first_col) {
    return SpatialCov{Kind::Toeplitz, scale, std::move(first_col), nullptr};
  }
  static SpatialCov dense(double scale, std::shared_ptr<const MatC> p) {
    return SpatialCov{Kind::Dense, scale, {}, std::move(p)};
  }

  double trace(int N) const {
    switch (kind) {
      case Kind::Identity: return scale * N;
      case Kind::Toeplitz: return scale * N * col(0).real();
      default: return scale * payload->trace().real();
    }
  }

  MatC to_dense(int N) const {
    switch (kind) {
      case Kind::Identity: return scale * MatC::Identity(N, N);
      case Kind::Toeplitz: {
        MatC t(N, N);
        for (int c = 0; c < N; ++c) {
          t(c, c) = scale * col(0);
          for (int r = c + 1; r < N; ++r) {
            t(r, c) = scale * col(r - c);
            t(c, r) = std::conj(t(r, c));
          }
        }
        return t;
      }
      default: return scale * (*payload);
    }
  }
};

struct CorrelationSet {
  int L = 0, K = 0, N = 0;
  std::vector<SpatialCov> theta;  // L*K, index b*K + k

  const SpatialCov& at(int b, int k) const { return theta[static_cast<size_t>(b) * K + k]; }
  SpatialCov& at(int b, int k) { return theta[static_cast<size_t>(b) * K + k]; }
};

struct ChannelSet {
  int L = 0, K = 0, N = 0;
  std::vector<MatC> H;  // per BS, N x K; column k = h_{b,k}

  VecC h(int b, int k) const { return H[static_cast<size_t>(b)].col(k); }
};

}  // namespace mcbeam
