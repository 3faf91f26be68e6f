#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fracgraph/spectral.hpp"

namespace fracgraph {

enum class KernelProvenance { spectral, quadrature, loaded };

inline std::string provenance_name(KernelProvenance p) {
  switch (p) {
    case KernelProvenance::spectral: return "spectral";
    case KernelProvenance::quadrature: return "quadrature";
    case KernelProvenance::loaded: return "loaded";
  }
  return "unknown";
}

/// The fractional kernel W_s(x,y) for x ≠ y, stored with a zero diagonal.
struct FracKernel {
  double s = 0.5;
  Matrix W;
  KernelProvenance provenance = KernelProvenance::spectral;
  GraphPtr graph;

  Index size() const noexcept { return W.rows(); }
};

inline void require_order(double s) {
  if (!(s > 0.0 && s < 1.0)) {
    std::ostringstream msg;
    msg << "fractional order s must lie in (0,1), got " << s;
    fail(ErrorCategory::validation, msg.str());
  }
}

namespace detail {

/// Zeroes the diagonal, flushes |W| < 1e-14 to exact zeros and clamps
/// roundoff-level negatives. Larger negatives are a numerical failure.
inline void finalize_kernel(Matrix& W) {
  const Index n = W.rows();
  const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
  for (Index x = 0; x < n; ++x) {
    W(x, x) = 0.0;
    for (Index y = x + 1; y < n; ++y) {
      double v = 0.5 * (W(x, y) + W(y, x));
      if (v < -1e-12 * scale) {
        std::ostringstream msg;
        msg << "kernel entry (" << x << "," << y << ") is negative: " << v;
        fail(ErrorCategory::numerical, msg.str());
      }
      if (std::abs(v) < 1e-14 || v < 0.0) v = 0.0;
      W(x, y) = W(y, x) = v;
    }
  }
}

}  // namespace detail

/// W_s(x,y) = −μ(x)μ(y) Σ_k λ_k^s φ_k(x)φ_k(y) for x ≠ y.
///
/// Off the diagonal Σ_k φ_k(x)φ_k(y) = 0, so the time integral of the heat
/// kernel can be taken mode by mode against (e^{−λt} − 1), and
/// ∫_0^∞ (e^{−λt} − 1) t^{−1−s} dt = −Γ(1−s) λ^s / s. In operator form this
/// is W(x,y) = −μ(x) (L^s)_{xy}.
inline FracKernel assemble_kernel_spectral(const SpectralData& sd, double s) {
  require_order(s);
  const Vector& mu = sd.graph->measure();
  Matrix W = -(mu.asDiagonal() * sd.kernel_of([s](double lam) { return lam > 0.0 ? std::pow(lam, s) : 0.0; }) *
               mu.asDiagonal());
  detail::finalize_kernel(W);
  return FracKernel{s, std::move(W), KernelProvenance::spectral, sd.graph};
}

/// Gauss–Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre_unit(int n) {
  if (n < 1) fail(ErrorCategory::validation, "Gauss-Legendre rule needs at least one node");
  // boost returns the nonnegative zeros of P_n
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  for (double z : zeros) {
    x.push_back(z);
    if (z != 0.0) x.push_back(-z);
  }
  std::sort(x.begin(), x.end());
  GaussRule rule;
  for (double z : x) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes.push_back(0.5 * (z + 1.0));
    rule.weights.push_back(0.5 * w);
  }
  return rule;
}

/// Gauss–Jacobi rule for ∫_0^1 g(t) t^{−s} dt, built by Golub–Welsch from the
/// three-term recurrence of the Jacobi polynomials with α = 0, β = −s.
inline GaussRule gauss_jacobi_unit(int n, double s) {
  if (n < 1) fail(ErrorCategory::validation, "Gauss-Jacobi rule needs at least one node");
  const double alpha = 0.0;
  const double beta = -s;
  const double ab = alpha + beta;
  Vector diag(n);
  Vector sub(std::max(n - 1, 0));
  diag(0) = (beta - alpha) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double c = 2.0 * k + ab;
    diag(k) = (beta * beta - alpha * alpha) / (c * (c + 2.0));
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    sub(k - 1) = std::sqrt(num / (c * c * (c + 1.0) * (c - 1.0)));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) fail(ErrorCategory::numerical, "Gauss-Jacobi eigensolve failed");
  // total mass of (1+x)^{−s} on [−1,1]
  const double mass = std::pow(2.0, 1.0 - s) / (1.0 - s);
  GaussRule rule;
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    // map x ∈ [−1,1] to t = (1+x)/2; the weight picks up 2^{s−1}
    rule.nodes.push_back(0.5 * (1.0 + es.eigenvalues()(i)));
    rule.weights.push_back(mass * v0 * v0 * std::pow(0.5, 1.0 - s));
  }
  return rule;
}

struct QuadConfig {
  /// nodes per panel
  int nodes = 200;
  /// boundary between the near and far time segments
  double split = 1.0;
  /// accepted per-entry relative error estimate
  double rel_tol = 1e-6;
};

namespace detail {

/// ∫_0^∞ p(t,x,y) t^{−1−s} dt for x ≠ y, as a matrix, with `panels` equal
/// panels on each of the two time segments.
///
/// Off the diagonal p(t,x,y) = Σ_k (e^{−λ_k t} − 1) φ_k(x)φ_k(y), and
/// (e^{−λt} − 1)/t is entire, so the near segment (0, a] is integrated against
/// the weight t^{−s} by Gauss–Jacobi on its first panel and by Gauss–Legendre
/// on the rest. The far segment [a, ∞) uses t = a τ^{−1/s}, which turns
/// t^{−1−s}dt into a^{−s}/s dτ with a bounded integrand on τ ∈ (0, 1].
inline Matrix heat_time_integral(const SpectralData& sd, double s, const QuadConfig& cfg, int panels) {
  const Index n = sd.size();
  const double a = cfg.split;
  const GaussRule legendre = gauss_legendre_unit(cfg.nodes);
  const GaussRule jacobi = gauss_jacobi_unit(cfg.nodes, s);
  Matrix acc = Matrix::Zero(n, n);
  Vector modal(n);
  auto accumulate = [&](auto&& weight_of_mode) {
    for (Index k = 0; k < n; ++k) modal(k) = weight_of_mode(sd.lambdas(k));
    acc.noalias() += sd.phis * modal.asDiagonal() * sd.phis.transpose();
  };
  const double h = a / panels;
  for (std::size_t i = 0; i < jacobi.nodes.size(); ++i) {
    // ∫_0^h g(t) t^{−s} dt = h^{1−s} ∫_0^1 g(hτ) τ^{−s} dτ, g(t) = (e^{−λt} − 1)/t
    const double t = h * jacobi.nodes[i];
    const double wq = std::pow(h, 1.0 - s) * jacobi.weights[i];
    accumulate([&](double lam) { return wq * std::expm1(-lam * t) / t; });
  }
  for (int panel = 1; panel < panels; ++panel) {
    for (std::size_t i = 0; i < legendre.nodes.size(); ++i) {
      const double t = h * (panel + legendre.nodes[i]);
      const double wq = h * legendre.weights[i] * std::pow(t, -1.0 - s);
      accumulate([&](double lam) { return wq * std::expm1(-lam * t); });
    }
  }
  const double far_scale = std::pow(a, -s) / s;
  for (int panel = 0; panel < panels; ++panel) {
    for (std::size_t i = 0; i < legendre.nodes.size(); ++i) {
      const double tau = (panel + legendre.nodes[i]) / panels;
      const double t = a * std::pow(tau, -1.0 / s);
      const double wq = far_scale * legendre.weights[i] / panels;
      // the −1 of the near segment continues here as ∫_a^∞ −t^{−1−s} dt
      accumulate([&](double lam) { return wq * std::expm1(-lam * t); });
    }
  }
  return acc;
}

}  // namespace detail

/// W_s(x,y) = s/Γ(1−s) μ(x)μ(y) ∫_0^∞ p(t,x,y) t^{−1−s} dt by direct
/// numerical integration of the heat kernel in time.
///
/// The integral is evaluated with one panel and with two panels per segment;
/// the finer value is kept and their difference serves as the error estimate.
inline FracKernel assemble_kernel_quadrature(const SpectralData& sd, double s, const QuadConfig& cfg = {}) {
  require_order(s);
  if (cfg.nodes < 2) fail(ErrorCategory::validation, "quadrature needs at least 2 nodes per segment");
  if (!(cfg.split > 0.0)) fail(ErrorCategory::validation, "quadrature split point must be positive");
  const Vector& mu = sd.graph->measure();
  const double pre = s / std::tgamma(1.0 - s);
  Matrix coarse = pre * (mu.asDiagonal() * detail::heat_time_integral(sd, s, cfg, 1) * mu.asDiagonal());
  Matrix fine = pre * (mu.asDiagonal() * detail::heat_time_integral(sd, s, cfg, 2) * mu.asDiagonal());

  const Index n = sd.size();
  const double floor = 1e-8 * std::max(fine.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  Index wx = 0, wy = 0;
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const double rel = std::abs(fine(x, y) - coarse(x, y)) / std::max(std::abs(fine(x, y)), floor);
      if (rel > worst) {
        worst = rel;
        wx = x;
        wy = y;
      }
    }
  }
  if (worst > cfg.rel_tol) {
    std::ostringstream msg;
    msg << "kernel quadrature error estimate " << worst << " exceeds " << cfg.rel_tol << " at entry (" << wx << ","
        << wy << ")";
    fail(ErrorCategory::numerical, msg.str());
  }
  detail::finalize_kernel(fine);
  return FracKernel{s, std::move(fine), KernelProvenance::quadrature, sd.graph};
}

struct RowSumReport {
  Index vertex = 0;
  double row_sum = 0.0;
  /// (1/Γ(1−s)) (A_x s/(1−s) + 1) μ(x)
  double bound = 0.0;
  bool pass = false;
};

/// Compares Σ_{y≠x} W_s(x,y) against the heat-kernel bound at every vertex.
inline std::vector<RowSumReport> kernel_row_sums(const FracKernel& K, const std::vector<HeatBound>& bounds) {
  const Index n = K.size();
  if (static_cast<Index>(bounds.size()) != n)
    fail(ErrorCategory::validation, "kernel_row_sums needs one heat bound per vertex");
  const double s = K.s;
  std::vector<RowSumReport> out;
  for (Index x = 0; x < n; ++x) {
    const auto& hb = bounds[static_cast<std::size_t>(x)];
    RowSumReport r;
    r.vertex = x;
    r.row_sum = K.W.row(x).sum();
    r.bound = (hb.A_x * s / (1.0 - s) + 1.0) * K.graph->mu(x) / std::tgamma(1.0 - s);
    r.pass = std::isfinite(r.row_sum) && r.row_sum <= r.bound * (1.0 + 1e-12);
    out.push_back(r);
  }
  return out;
}

}  // namespace fracgraph
