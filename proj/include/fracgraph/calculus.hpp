#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracgraph/kernel.hpp"

namespace fracgraph {

/// ∇^s u restricted to a finite graph: row x holds the components
/// sqrt(W(x,y)/(2μ(x))) (u(x) − u(y)) over y in vertex order.
struct GradientField {
  Matrix entries;

  Index size() const noexcept { return entries.rows(); }
  /// |∇^s u|(x)
  Vector length() const { return entries.rowwise().norm(); }
};

struct SobolevNormReport {
  double grad_part = 0.0;
  double zero_part = 0.0;
  double total = 0.0;
  double p = 2.0;
};

namespace detail {

inline void require_function(const FracKernel& K, const Vector& u, const char* what = "function") {
  if (u.size() != K.size()) {
    std::ostringstream msg;
    msg << what << " has " << u.size() << " entries, kernel has " << K.size() << " vertices";
    fail(ErrorCategory::validation, msg.str());
  }
  if (!u.allFinite()) fail(ErrorCategory::validation, std::string(what) + " has non-finite entries");
}

inline void require_exponent(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) {
    std::ostringstream msg;
    msg << "exponent p = " << p << " is unsupported; p must be >= 2";
    fail(ErrorCategory::unsupported, msg.str());
  }
}

/// |t|^{p−2}, taken as 1 when p = 2 and as 0 at t = 0 otherwise.
inline double weight_power(double t, double p) {
  if (p == 2.0) return 1.0;
  return t == 0.0 ? 0.0 : std::pow(std::abs(t), p - 2.0);
}

/// |t|^{p−2} t
inline double signed_power(double t, double p) { return weight_power(t, p) * t; }

/// c(x,y) = sqrt(W(x,y) / (2μ(x)))
inline Matrix gradient_coefficients(const FracKernel& K) {
  const Vector& mu = K.graph->measure();
  return ((0.5 * mu.cwiseInverse()).asDiagonal() * K.W).cwiseSqrt();
}

}  // namespace detail

inline GradientField frac_gradient(const FracKernel& K, const Vector& u) {
  detail::require_function(K, u);
  const Index n = K.size();
  Matrix G = detail::gradient_coefficients(K);
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) G(x, y) *= u(x) - u(y);
  return GradientField{std::move(G)};
}

/// Pointwise ∇^s u · ∇^s v.
inline Vector frac_inner(const FracKernel& K, const Vector& u, const Vector& v) {
  detail::require_function(K, u, "u");
  detail::require_function(K, v, "v");
  const Index n = K.size();
  const Vector& mu = K.graph->measure();
  Vector out(n);
  for (Index x = 0; x < n; ++x) {
    double acc = 0.0;
    for (Index y = 0; y < n; ++y) acc += K.W(x, y) * (u(x) - u(y)) * (v(x) - v(y));
    out(x) = acc / (2.0 * mu(x));
  }
  return out;
}

inline Vector frac_length(const FracKernel& K, const Vector& u) {
  return frac_inner(K, u, u).cwiseMax(0.0).cwiseSqrt();
}

/// div_s F, the μ-adjoint of −∇^s:
/// div_s F(x) = −Σ_y c(x,y)F(x,y) + (1/μ(x)) Σ_y μ(y) c(y,x) F(y,x).
inline Vector frac_divergence(const FracKernel& K, const GradientField& F) {
  const Index n = K.size();
  if (F.size() != n || F.entries.cols() != n) fail(ErrorCategory::validation, "field does not match kernel size");
  const Vector& mu = K.graph->measure();
  const Matrix C = detail::gradient_coefficients(K);
  const Matrix CF = C.cwiseProduct(F.entries);
  Vector out = -CF.rowwise().sum();
  const Vector inflow = CF.transpose() * mu;
  for (Index x = 0; x < n; ++x) out(x) += inflow(x) / mu(x);
  return out;
}

/// (−Δ)_p^s u(x) = (1/(2μ(x))) Σ_y W(x,y)(|∇^s u|^{p−2}(x) + |∇^s u|^{p−2}(y))(u(x) − u(y)).
inline Vector frac_p_laplacian(const FracKernel& K, const Vector& u, double p) {
  detail::require_exponent(p);
  detail::require_function(K, u);
  const Index n = K.size();
  const Vector& mu = K.graph->measure();
  Vector a(n);
  if (p == 2.0) {
    a.setOnes();
  } else {
    const Vector len = frac_length(K, u);
    for (Index x = 0; x < n; ++x) a(x) = detail::weight_power(len(x), p);
  }
  Vector out(n);
  for (Index x = 0; x < n; ++x) {
    double acc = 0.0;
    for (Index y = 0; y < n; ++y) acc += K.W(x, y) * (a(x) + a(y)) * (u(x) - u(y));
    out(x) = acc / (2.0 * mu(x));
  }
  return out;
}

/// Matrix of the linear operator (−Δ)_2^s.
inline Matrix p2_operator_matrix(const FracKernel& K) {
  const Index n = K.size();
  const Vector& mu = K.graph->measure();
  Matrix A = -K.W;
  for (Index x = 0; x < n; ++x) A(x, x) = K.W.row(x).sum();
  return mu.cwiseInverse().asDiagonal() * A;
}

struct PartsIdentity {
  /// ∫ φ (−Δ)_p^s u dμ
  double lhs = 0.0;
  /// ∫ |∇^s u|^{p−2} ∇^s u · ∇^s φ dμ
  double rhs = 0.0;
  double residual = 0.0;
  double scale = 0.0;
};

inline PartsIdentity verify_parts_identity(const FracKernel& K, const Vector& u, const Vector& phi, double p) {
  detail::require_exponent(p);
  detail::require_function(K, phi, "phi");
  const Vector& mu = K.graph->measure();
  PartsIdentity out;
  out.lhs = mu.dot(phi.cwiseProduct(frac_p_laplacian(K, u, p)));
  const GradientField gu = frac_gradient(K, u);
  const GradientField gphi = frac_gradient(K, phi);
  const Vector len = gu.length();
  for (Index x = 0; x < K.size(); ++x)
    out.rhs += mu(x) * detail::weight_power(len(x), p) * gu.entries.row(x).dot(gphi.entries.row(x));
  out.residual = std::abs(out.lhs - out.rhs);
  out.scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  return out;
}

/// Without `h` this is the W^{s,p} norm; with `h` it is the H_{s,p} norm.
inline SobolevNormReport sobolev_norm(const FracKernel& K, const Vector& u, double p,
                                      const std::optional<Vector>& h = std::nullopt) {
  detail::require_exponent(p);
  detail::require_function(K, u);
  const Vector& mu = K.graph->measure();
  if (h) {
    detail::require_function(K, *h, "potential");
    if (!(h->minCoeff() > 0.0)) fail(ErrorCategory::validation, "potential h must be positive everywhere");
  }
  SobolevNormReport r;
  r.p = p;
  const Vector len = frac_length(K, u);
  for (Index x = 0; x < K.size(); ++x) {
    r.grad_part += mu(x) * std::pow(len(x), p);
    r.zero_part += mu(x) * (h ? (*h)(x) : 1.0) * std::pow(std::abs(u(x)), p);
  }
  r.total = std::pow(r.grad_part + r.zero_part, 1.0 / p);
  return r;
}

/// (max(u,0), min(u,0))
inline std::pair<Vector, Vector> pos_neg_split(const Vector& u) {
  return {u.cwiseMax(0.0), u.cwiseMin(0.0)};
}

struct DescentOptions {
  int starts = 5;
  int max_iterations = 20000;
  /// stop when ‖grad‖_μ ≤ tol (1 + value)
  double tolerance = 1e-10;
  double initial_step = 0.1;
  std::uint64_t seed = 1;
};

struct LambdaEstimate {
  double value = 0.0;
  double p = 2.0;
  /// true when `value` is only the best quotient found (p > 2)
  bool upper_bound = false;
  /// smallest eigenvalue of the μ-symmetric operator (−Δ)_2^s + h
  double p2_reference = 0.0;
  int starts = 0;
  int converged_starts = 0;
};

namespace detail {

/// λ_min of (−Δ)_2^s + diag(h), symmetrized by diag(μ)^{1/2}.
inline double p2_rayleigh_min(const FracKernel& K, const Vector& h) {
  const Vector sqrt_mu = K.graph->measure().cwiseSqrt();
  const Matrix A = p2_operator_matrix(K);
  Matrix S = sqrt_mu.asDiagonal() * A * sqrt_mu.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose());
  S.diagonal() += h;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCategory::numerical, "eigensolve of (-Delta)_2^s + h failed");
  return es.eigenvalues()(0);
}

struct QuotientParts {
  double numerator = 0.0;
  double denominator = 0.0;
};

inline QuotientParts rayleigh_parts(const FracKernel& K, const Vector& h, const Vector& u, double p) {
  const SobolevNormReport r = sobolev_norm(K, u, p, h);
  const Vector& mu = K.graph->measure();
  double d = 0.0;
  for (Index x = 0; x < K.size(); ++x) d += mu(x) * std::pow(std::abs(u(x)), p);
  return {r.grad_part + r.zero_part, d};
}

}  // namespace detail

/// λ_p = inf ∫(|∇^s u|^p + h|u|^p)dμ / ∫|u|^p dμ.
///
/// p = 2 is an eigenvalue problem. For p > 2 the quotient is minimized by
/// normalized gradient descent from a constant start plus random positive
/// starts; the result is the best quotient found, an upper bound.
inline LambdaEstimate rayleigh_lambda(const FracKernel& K, const Vector& h, double p, const DescentOptions& opt = {}) {
  detail::require_exponent(p);
  detail::require_function(K, h, "potential");
  if (!(h.minCoeff() > 0.0)) fail(ErrorCategory::validation, "potential h must be positive everywhere");

  LambdaEstimate est;
  est.p = p;
  est.p2_reference = detail::p2_rayleigh_min(K, h);
  if (p == 2.0) {
    est.value = est.p2_reference;
    est.starts = 1;
    est.converged_starts = 1;
    return est;
  }

  const Index n = K.size();
  const Vector& mu = K.graph->measure();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto normalize = [&](Vector v) {
    double d = 0.0;
    for (Index x = 0; x < n; ++x) d += mu(x) * std::pow(std::abs(v(x)), p);
    return Vector(v / std::pow(d, 1.0 / p));
  };

  est.upper_bound = true;
  est.value = std::numeric_limits<double>::infinity();
  std::ostringstream trace;
  const int starts = std::max(opt.starts, 1);
  for (int start = 0; start < starts; ++start) {
    Vector u(n);
    if (start == 0) {
      u.setOnes();
    } else {
      for (Index x = 0; x < n; ++x) u(x) = 1.0 - unit(rng);  // (0, 1]
    }
    u = normalize(u);
    double value = detail::rayleigh_parts(K, h, u, p).numerator;
    double step = opt.initial_step;
    std::vector<double> history{value};
    bool converged = false;
    double grad_norm = 0.0;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
      // μ-gradient of the quotient on the sphere ∫|u|^p dμ = 1
      Vector g = p * frac_p_laplacian(K, u, p);
      for (Index x = 0; x < n; ++x) g(x) += p * (h(x) - value) * detail::signed_power(u(x), p);
      grad_norm = std::sqrt(mu.dot(g.cwiseAbs2()));
      if (grad_norm <= opt.tolerance * (1.0 + std::abs(value))) {
        converged = true;
        break;
      }
      bool accepted = false;
      while (step > 1e-16) {
        const Vector trial = normalize(u - step * g);
        const double trial_value = detail::rayleigh_parts(K, h, trial, p).numerator;
        if (trial_value <= value - 1e-4 * step * grad_norm * grad_norm) {
          u = trial;
          value = trial_value;
          step *= 1.5;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      history.push_back(value);
      if (!accepted) {
        converged = true;  // no descent direction left at machine precision
        break;
      }
      if (history.size() > 10) {
        const double old = history[history.size() - 11];
        if (std::abs(old - value) <= 1e-12 * std::abs(value)) {
          converged = true;
          break;
        }
      }
    }
    trace << " start " << start << ": quotient " << value << " |grad| " << grad_norm << " after " << it
          << " iterations;";
    ++est.starts;
    if (converged) {
      ++est.converged_starts;
      est.value = std::min(est.value, value);
    }
  }
  if (est.converged_starts == 0) fail(ErrorCategory::convergence, "lambda_p descent did not converge:" + trace.str());
  return est;
}

/// (|a|^{p−2}a − |b|^{p−2}b)(a − b) − |a − b|^p for ab ≥ 0.
inline double scalar_inequality_gap(double a, double b, double p) {
  detail::require_exponent(p);
  if (a * b < 0.0) fail(ErrorCategory::precondition, "scalar inequality needs ab >= 0");
  return (detail::signed_power(a, p) - detail::signed_power(b, p)) * (a - b) - std::pow(std::abs(a - b), p);
}

/// (|a|^{p−2}a − |b|^{p−2}b)·(a − b) − |a − b|^p / (2^{p−2} p).
inline double vector_inequality_gap(const Vector& a, const Vector& b, double p) {
  detail::require_exponent(p);
  if (a.size() != b.size()) fail(ErrorCategory::validation, "vector inequality needs equal lengths");
  const double wa = detail::weight_power(a.norm(), p);
  const double wb = detail::weight_power(b.norm(), p);
  const Vector diff = a - b;
  return (wa * a - wb * b).dot(diff) - std::pow(diff.norm(), p) / (std::pow(2.0, p - 2.0) * p);
}

}  // namespace fracgraph
