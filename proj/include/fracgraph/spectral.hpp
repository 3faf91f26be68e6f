#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fracgraph/graph.hpp"

namespace fracgraph {

/// Eigenpairs of the graph Laplacian, orthonormal in ⟨u,v⟩_μ = Σ μ u v.
///
/// Column k of `phis` is φ_k with Σ_x μ(x) φ_j(x) φ_k(x) = δ_jk, and
/// eigenvalues are ascending with λ_0 = 0. The heat kernel is
/// p(t,x,y) = Σ_k exp(−λ_k t) φ_k(x) φ_k(y).
struct SpectralData {
  Vector lambdas;
  Matrix phis;
  GraphPtr graph;

  Index size() const noexcept { return lambdas.size(); }

  /// Applies g(λ) spectrally as the kernel Σ_k g(λ_k) φ_k(x) φ_k(y).
  template <class Fn>
  Matrix kernel_of(Fn&& g) const {
    Vector d(size());
    for (Index k = 0; k < size(); ++k) d(k) = g(lambdas(k));
    return phis * d.asDiagonal() * phis.transpose();
  }

  /// Matrix of the operator g(L) acting on vertex functions: Φ g(Λ) Φᵀ diag(μ).
  template <class Fn>
  Matrix operator_of(Fn&& g) const {
    return kernel_of(std::forward<Fn>(g)) * graph->measure().asDiagonal();
  }
};

/// Dense symmetric eigensolve of diag(μ)^{1/2} L diag(μ)^{-1/2}.
inline SpectralData spectral_decompose(GraphPtr g) {
  const Index n = g->size();
  const Vector sqrt_mu = g->measure().cwiseSqrt();
  Matrix S = -g->weights();
  for (Index x = 0; x < n; ++x) S(x, x) = g->degree(x);
  // S_xy = (D - W)_xy / sqrt(mu_x mu_y)
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) S(x, y) /= sqrt_mu(x) * sqrt_mu(y);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(S);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigensolver failed on n=" << n << " Laplacian (max |entry| = " << S.cwiseAbs().maxCoeff() << ")";
    fail(ErrorCategory::numerical, msg.str());
  }

  SpectralData sd;
  sd.graph = std::move(g);
  sd.lambdas = solver.eigenvalues();
  for (Index k = 0; k < n; ++k) {
    // λ_0 comes back as ±1e-15; a positive residue would leak into λ^s
    if (std::abs(sd.lambdas(k)) < 1e-10) sd.lambdas(k) = 0.0;
  }
  if (sd.lambdas(0) < 0.0)
    fail(ErrorCategory::numerical, "Laplacian has a negative eigenvalue beyond roundoff");
  sd.phis = sqrt_mu.cwiseInverse().asDiagonal() * solver.eigenvectors();
  // φ_0 is constant for a connected graph; fix its sign positive
  if (sd.phis.col(0).sum() < 0.0) sd.phis.col(0) *= -1.0;
  return sd;
}

inline SpectralData spectral_decompose(const WeightedGraph& g) { return spectral_decompose(share(g)); }

/// p(t, ·, ·) as a symmetric n×n matrix.
inline Matrix heat_kernel(const SpectralData& sd, double t) {
  if (!(t >= 0.0)) fail(ErrorCategory::validation, "heat kernel needs t >= 0");
  Matrix P = sd.kernel_of([t](double lam) { return std::exp(-lam * t); });
  // symmetrize against roundoff in the product
  return 0.5 * (P + P.transpose());
}

/// max over (t, x) of |Σ_y p(t,x,y) μ(y) − 1|.
inline double check_stochastic_completeness(const SpectralData& sd, const std::vector<double>& times) {
  if (times.empty()) fail(ErrorCategory::validation, "completeness check needs at least one time");
  double worst = 0.0;
  for (double t : times) {
    if (!(t > 0.0)) fail(ErrorCategory::validation, "completeness check needs positive times");
    const Vector mass = heat_kernel(sd, t) * sd.graph->measure();
    worst = std::max(worst, (mass.array() - 1.0).abs().maxCoeff());
  }
  return worst;
}

/// Constant A_x with |1 − p(t,x,x)μ(x)| ≤ A_x t on [0, 1].
struct HeatBound {
  Index vertex = 0;
  double A_x = 0.0;
  /// sup of (1 − p(t,x,x)μ(x))/t over the sample grid
  double sampled_sup = 0.0;
  /// worst violation of the bound on the sample grid (≤ 0 means it holds)
  double worst_violation = 0.0;
  bool verified = false;
};

/// 100 log-spaced samples in [1e-6, 1].
inline std::vector<double> ax_sample_times(int count = 100) {
  std::vector<double> ts(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) ts[static_cast<std::size_t>(i)] = std::pow(10.0, -6.0 + 6.0 * i / (count - 1));
  return ts;
}

/// 1 − p(t,x,x)μ(x) is concave in t and vanishes at t = 0, so its difference
/// quotient is largest at 0⁺, where it equals Σ_k λ_k μ(x) φ_k(x)². That value
/// is returned as A_x; the sampled supremum is reported next to it.
inline HeatBound estimate_Ax(const SpectralData& sd, Index x) {
  const Index n = sd.size();
  if (x < 0 || x >= n) fail(ErrorCategory::validation, "unknown vertex index " + std::to_string(x));
  const double mu_x = sd.graph->mu(x);

  HeatBound hb;
  hb.vertex = x;
  double slope = 0.0;
  for (Index k = 0; k < n; ++k) slope += sd.lambdas(k) * mu_x * sd.phis(x, k) * sd.phis(x, k);
  hb.A_x = std::max(slope, 0.0);

  hb.worst_violation = -std::numeric_limits<double>::infinity();
  for (double t : ax_sample_times()) {
    // 1 − p(t,x,x)μ(x) = −Σ_k expm1(−λ_k t) μ(x) φ_k(x)², exact near t = 0
    double deficit = 0.0;
    for (Index k = 0; k < n; ++k) deficit -= std::expm1(-sd.lambdas(k) * t) * mu_x * sd.phis(x, k) * sd.phis(x, k);
    hb.sampled_sup = std::max(hb.sampled_sup, deficit / t);
    hb.worst_violation = std::max(hb.worst_violation, std::abs(deficit) - hb.A_x * t);
  }
  hb.verified = hb.worst_violation <= 1e-12;
  return hb;
}

inline std::vector<HeatBound> estimate_all_Ax(const SpectralData& sd) {
  std::vector<HeatBound> out;
  out.reserve(static_cast<std::size_t>(sd.size()));
  for (Index x = 0; x < sd.size(); ++x) out.push_back(estimate_Ax(sd, x));
  return out;
}

}  // namespace fracgraph
