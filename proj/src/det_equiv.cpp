#include "mcbeam/det_equiv.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mcbeam {

namespace {

constexpr double kMeasureFloor = 1e-30;

// Accumulates sum_j c_j Theta_{b,j} + ridge I without touching dense storage
// until necessary; Toeplitz terms fold into one first column.
struct MatrixAccumulator {
  int N;
  double ident = 0.0;
  VecC toep_col;
  MatC dense;
  bool any_toep = false, any_dense = false;

  explicit MatrixAccumulator(int n) : N(n) {
    toep_col = VecC::Zero(n);
    dense = MatC::Zero(n, n);
  }

  void add(const SpatialCov& t, double c) {
    if (c == 0.0) return;
    switch (t.kind) {
      case SpatialCov::Kind::Identity: ident += c * t.scale; break;
      case SpatialCov::Kind::Toeplitz:
        toep_col += (c * t.scale) * t.col;
        any_toep = true;
        break;
      default:
        dense += (c * t.scale) * (*t.payload);
        any_dense = true;
        break;
    }
  }

  MatC materialize(double ridge) const {
    MatC M = MatC::Zero(N, N);
    if (any_dense) M = dense;
    if (any_toep) {
      for (int c = 0; c < N; ++c) {
        M(c, c) += toep_col(0);
        for (int r = c + 1; r < N; ++r) {
          M(r, c) += toep_col(r - c);
          M(c, r) += std::conj(toep_col(r - c));
        }
      }
    }
    M += (ident + ridge) * MatC::Identity(N, N);
    return M;
  }
};

// Superdiagonal sums: sd(d) = sum_c X(c, c+d), d = 0..N-1.
VecC superdiag_sums(const MatC& X) {
  const int N = static_cast<int>(X.rows());
  VecC sd(N);
  for (int d = 0; d < N; ++d) {
    cd acc(0, 0);
    for (int c = 0; c + d < N; ++c) acc += X(c, c + d);
    sd(d) = acc;
  }
  return sd;
}

// tr(Theta X) for Hermitian X given its superdiagonal sums; dense payloads
// fall back to an elementwise product, cached because payloads are shared.
struct TraceHelper {
  const MatC& X;
  const VecC sd;
  std::unordered_map<const void*, double> cache;

  explicit TraceHelper(const MatC& x) : X(x), sd(superdiag_sums(x)) {}

  double trace(const SpatialCov& t) {
    switch (t.kind) {
      case SpatialCov::Kind::Identity: return t.scale * sd(0).real();
      case SpatialCov::Kind::Toeplitz: {
        double acc = t.col(0).real() * sd(0).real();
        for (int d = 1; d < static_cast<int>(X.rows()); ++d)
          acc += 2.0 * (t.col(d) * sd(d)).real();
        return t.scale * acc;
      }
      default: {
        auto it = cache.find(t.payload.get());
        if (it == cache.end()) {
          double v = t.payload->cwiseProduct(X.transpose()).sum().real();
          it = cache.emplace(t.payload.get(), v).first;
        }
        return t.scale * it->second;
      }
    }
  }
};

double coeff(const VecD& gamma, const MatD& m_bar, const std::vector<int>& serving, int b, int j) {
  double g = gamma(j);
  if (g <= 0.0) return 0.0;
  double den = m_bar(serving[static_cast<size_t>(j)], j) + g * m_bar(b, j);
  return g / std::max(den, kMeasureFloor);
}

}  // namespace

MeasureResult solve_measures(const CorrelationSet& corr, const std::vector<int>& serving,
                             const VecD& gamma, const std::vector<double>& mu,
                             const DetEquivOpts& opts) {
  const int L = corr.L, K = corr.K, N = corr.N;
  MeasureResult r;
  r.m_bar = MatD(L, K);
  for (int b = 0; b < L; ++b)
    for (int i = 0; i < K; ++i)
      r.m_bar(b, i) = std::max(corr.at(b, i).trace(N) / (mu[static_cast<size_t>(b)] * N),
                               kMeasureFloor);

  MatD next(L, K);
  for (int it = 1; it <= opts.max_iter; ++it) {
    double rel = 0.0;
    for (int b = 0; b < L; ++b) {
      MatrixAccumulator acc(N);
      for (int j = 0; j < K; ++j) acc.add(corr.at(b, j), coeff(gamma, r.m_bar, serving, b, j));
      MatC M = acc.materialize(mu[static_cast<size_t>(b)] * N);
      Eigen::LLT<MatC> llt(M);
      if (llt.info() != Eigen::Success) throw std::runtime_error("measure system not positive definite");
      MatC X = llt.solve(MatC::Identity(N, N));
      TraceHelper th(X);
      for (int i = 0; i < K; ++i) {
        double v = std::max(th.trace(corr.at(b, i)), kMeasureFloor);
        next(b, i) = v;
        rel = std::max(rel, std::abs(v - r.m_bar(b, i)) / std::max(v, kMeasureFloor));
      }
    }
    r.iterations = it;
    if (rel <= opts.tol) {
      r.m_bar = next;
      r.converged = true;
      break;
    }
    r.m_bar = (1.0 - opts.damping) * r.m_bar + opts.damping * next;
  }

  r.lambda_bar = VecD::Zero(K);
  for (int k = 0; k < K; ++k)
    if (gamma(k) > 0.0)
      r.lambda_bar(k) = gamma(k) / r.m_bar(serving[static_cast<size_t>(k)], k);
  return r;
}

MatC resolvent(const CorrelationSet& corr, int b, const VecD& lambda_bar, const MatD& m_bar,
               double mu_b) {
  const int K = corr.K, N = corr.N;
  MatrixAccumulator acc(N);
  for (int j = 0; j < K; ++j) {
    double lj = lambda_bar(j);
    if (lj <= 0.0) continue;
    acc.add(corr.at(b, j), lj / (N * (1.0 + lj * m_bar(b, j))));
  }
  MatC M = acc.materialize(mu_b);
  Eigen::LLT<MatC> llt(M);
  if (llt.info() != Eigen::Success) throw std::runtime_error("resolvent not positive definite");
  return llt.solve(MatC::Identity(N, N));
}

DerivativeResult derivative_measures(const CorrelationSet& corr, int b, const MatC& T_b,
                                     const VecD& lambda_bar, const MatD& m_bar) {
  const int K = corr.K, N = corr.N;
  DerivativeResult r;
  r.N = N;

  // A_i = Theta_{b,i} T; pairwise traces via one K x K product of flattened
  // factors: tr(A_i A_j) = vec(A_i^T)^T vec(A_j), no conjugation.
  std::vector<MatC> A(static_cast<size_t>(K));
  for (int i = 0; i < K; ++i) {
    const SpatialCov& cov = corr.at(b, i);
    if (cov.kind == SpatialCov::Kind::Identity)
      A[static_cast<size_t>(i)] = cov.scale * T_b;  // surrogate rows skip the product
    else
      A[static_cast<size_t>(i)].noalias() = cov.to_dense(N) * T_b;
  }

  MatC W(K, N * N), V(N * N, K);
  for (int i = 0; i < K; ++i) {
    MatC At = A[static_cast<size_t>(i)].transpose();
    W.row(i) = Eigen::Map<const VecC>(At.data(), N * N).transpose();
    V.col(i) = Eigen::Map<const VecC>(A[static_cast<size_t>(i)].data(), N * N);
  }
  MatC P(K, K);
  P.noalias() = W * V;
  if (P.imag().cwiseAbs().maxCoeff() > 1e-6 * (1.0 + P.real().cwiseAbs().maxCoeff()))
    throw std::runtime_error("pairwise traces not real");
  MatD Pr = P.real();

  MatD Lmat = MatD::Zero(K, K);
  for (int j = 0; j < K; ++j) {
    double lj = lambda_bar(j);
    if (lj <= 0.0) continue;
    double den = 1.0 / lj + m_bar(b, j);
    Lmat.col(j) = Pr.col(j) / (N * static_cast<double>(N) * den * den);
  }

  MatD rhs(K, K + 1);
  rhs.leftCols(K) = Pr / N;
  for (int i = 0; i < K; ++i) {
    // tr(Theta_i T^2) reuses A_i against T
    rhs(i, K) = (A[static_cast<size_t>(i)].cwiseProduct(T_b.transpose())).sum().real();
  }
  rhs.col(K) /= N;

  Eigen::PartialPivLU<MatD> lu(MatD::Identity(K, K) - Lmat);
  MatD X = lu.solve(rhs);
  r.m_prime = X.leftCols(K);
  r.noise_prime = X.col(K);
  r.ok = X.allFinite();
  return r;
}

CouplingResult asymptotic_coupling(const std::vector<DerivativeResult>& deriv,
                                   const std::vector<int>& serving, const VecD& gamma,
                                   const VecD& lambda_bar, const MatD& m_bar,
                                   double noise_power) {
  const int K = static_cast<int>(gamma.size());
  const int N = deriv.empty() ? 1 : deriv[0].N;
  CouplingResult r;
  r.G_bar = MatD::Zero(K, K);
  VecD noise = VecD::Constant(K, noise_power);

  for (int k = 0; k < K; ++k) {
    if (gamma(k) <= 0.0 || lambda_bar(k) <= 0.0) {
      r.G_bar(k, k) = 1.0;  // decoupled row: delta = 0
      noise(k) = 0.0;
      continue;
    }
    r.G_bar(k, k) = gamma(k) / (lambda_bar(k) * lambda_bar(k));
    for (int i = 0; i < K; ++i) {
      if (i == k || gamma(i) <= 0.0) continue;
      int bi = serving[static_cast<size_t>(i)];
      double den = 1.0 + lambda_bar(k) * m_bar(bi, k);
      r.G_bar(k, i) = -deriv[static_cast<size_t>(bi)].m_prime(i, k) / (N * den * den);
    }
  }

  Eigen::PartialPivLU<MatD> lu(r.G_bar);
  r.delta_bar = lu.solve(noise);
  double resid = (r.G_bar * r.delta_bar - noise).norm();
  r.feasible = r.delta_bar.allFinite() && resid <= 1e-8 * std::max(1e-300, noise.norm());
  r.p_bar = VecD::Zero(K);
  for (int k = 0; k < K; ++k) {
    if (gamma(k) <= 0.0) continue;
    if (r.delta_bar(k) <= 0.0) r.feasible = false;
    int bk = serving[static_cast<size_t>(k)];
    r.p_bar(k) = r.delta_bar(k) * deriv[static_cast<size_t>(bk)].noise_prime(k) / N;
  }
  return r;
}

MatD ici_approx(const MatD& G_bar, const VecD& delta_bar, const std::vector<int>& serving, int L) {
  const int K = static_cast<int>(delta_bar.size());
  MatD eps = MatD::Zero(L, K);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      int bj = serving[static_cast<size_t>(j)];
      if (bj == serving[static_cast<size_t>(k)]) continue;
      eps(bj, k) += -delta_bar(j) * G_bar(k, j);
    }
  return eps;
}

CorrelationSet surrogate_stats(const CorrelationSet& corr, const MatD& pathloss, int local_bs,
                               SurrogateMode mode) {
  CorrelationSet out;
  out.L = corr.L;
  out.K = corr.K;
  out.N = corr.N;
  out.theta.resize(static_cast<size_t>(corr.L) * corr.K);
  for (int b = 0; b < corr.L; ++b)
    for (int k = 0; k < corr.K; ++k) {
      bool keep = mode == SurrogateMode::alg2 && b == local_bs;
      out.at(b, k) = keep ? corr.at(b, k) : SpatialCov::identity(pathloss(b, k));
    }
  return out;
}

DetEquivState det_equiv_pipeline(const CorrelationSet& corr, const std::vector<int>& serving,
                                 const VecD& gamma, const std::vector<double>& mu,
                                 double noise_power, const DetEquivOpts& opts) {
  const int L = corr.L;
  DetEquivState st;
  MeasureResult mr = solve_measures(corr, serving, gamma, mu, opts);
  st.m_bar = mr.m_bar;
  st.lambda_bar = mr.lambda_bar;
  st.converged = mr.converged;
  st.iterations = mr.iterations;

  std::vector<DerivativeResult> deriv;
  deriv.reserve(static_cast<size_t>(L));
  bool deriv_ok = true;
  for (int b = 0; b < L; ++b) {
    st.T.push_back(resolvent(corr, b, mr.lambda_bar, mr.m_bar, mu[static_cast<size_t>(b)]));
    deriv.push_back(derivative_measures(corr, b, st.T.back(), mr.lambda_bar, mr.m_bar));
    deriv_ok = deriv_ok && deriv.back().ok;
    st.m_prime.push_back(deriv.back().m_prime);
    st.noise_prime.push_back(deriv.back().noise_prime);
  }

  CouplingResult cr = asymptotic_coupling(deriv, serving, gamma, mr.lambda_bar, mr.m_bar,
                                          noise_power);
  st.G_bar = cr.G_bar;
  st.delta_bar = cr.delta_bar;
  st.p_bar = cr.p_bar;
  st.ici_bar = ici_approx(cr.G_bar, cr.delta_bar, serving, L);
  st.feasible = mr.converged && deriv_ok && cr.feasible;
  return st;
}

}  // namespace mcbeam
