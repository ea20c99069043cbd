#pragma once

#include "mcbeam/types.hpp"

#include <cstdint>

namespace mcbeam {

// Hexagonal layout (1 BS at origin, up to six neighbors at the inter-site
// distance; L=2 places the pair ISD apart), uniform UE drops in a disc of
// radius ISD/sqrt(3) around the serving BS with min-distance and Voronoi
// rejection. Deterministic given (config, drop_seed).
Scenario build_geometry(const NetworkConfig& config, std::uint64_t drop_seed);

// First column of the unit-gain one-ring correlation:
//   col[d] = 1/(phi_max-phi_min) * integral exp(i 2 pi spacing_ratio d cos phi) dphi
VecC one_ring_profile(double phi_min, double phi_max, int N, double spacing_ratio,
                      double tol = 1e-10);

SpatialCov one_ring_correlation(double a2, double phi_min, double phi_max, int N,
                                double spacing_ratio);

CorrelationSet build_correlations(const Scenario& scenario, const NetworkConfig& config);

// h_{b,k} = Theta_{b,k}^{1/2} z, z iid CN(0,1); Hermitian square root via
// eigendecomposition, eigenvalues in [-1e-10*max, 0) clipped, anything more
// negative is an error. Stream keyed by (drop_seed, b, k).
ChannelSet sample_channels(const CorrelationSet& correlations, std::uint64_t drop_seed);

}  // namespace mcbeam
