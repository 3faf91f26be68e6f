#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fracgraph/calculus.hpp"

namespace fracgraph {

/// h(x) as a constant, as h0 + c·d(x, x0), or as an explicit table.
struct PotentialSpec {
  enum class Kind { constant, affine, table };

  Kind kind = Kind::constant;
  double h0 = 1.0;
  double c = 0.0;
  Index x0 = 0;
  Vector values;

  static PotentialSpec constant(double h0) { return {Kind::constant, h0, 0.0, 0, {}}; }
  static PotentialSpec affine(double h0, double c, Index x0) { return {Kind::affine, h0, c, x0, {}}; }
  static PotentialSpec table(Vector values) { return {Kind::table, 0.0, 0.0, 0, std::move(values)}; }

  Vector evaluate(const WeightedGraph& g) const {
    Vector h;
    switch (kind) {
      case Kind::constant:
        h = Vector::Constant(g.size(), h0);
        break;
      case Kind::affine: {
        if (c < 0.0) fail(ErrorCategory::validation, "affine potential needs c >= 0");
        const auto d = graph_distance(g, x0);
        h.resize(g.size());
        for (Index x = 0; x < g.size(); ++x) h(x) = h0 + c * d[static_cast<std::size_t>(x)];
        break;
      }
      case Kind::table:
        if (values.size() != g.size()) fail(ErrorCategory::validation, "potential table does not match graph size");
        h = values;
        break;
    }
    if (!h.allFinite() || !(h.minCoeff() > 0.0))
      fail(ErrorCategory::validation, "potential must satisfy inf h > 0");
    return h;
  }

  /// h → ∞ along d(x, x0) → ∞ on truncation families; only the affine form with c > 0 has it.
  bool grows_with_distance() const { return kind == Kind::affine && c > 0.0; }
};

/// f(x,y) = Σ_j a_j(x) y^{q_j − 1} for y ≥ 0 and 0 for y ≤ 0, with primitive
/// F(x,y) = Σ_j a_j(x) y^{q_j}/q_j. A custom callable pair may replace the
/// power sum; it is accepted but never certified.
struct NonlinearitySpec {
  struct Term {
    double q = 4.0;
    /// per-vertex coefficient; a single entry means constant
    Vector a;
  };

  std::vector<Term> terms;
  std::function<double(Index, double)> custom_f;
  std::function<double(Index, double)> custom_F;

  static NonlinearitySpec power(double q, double a = 1.0) {
    NonlinearitySpec f;
    f.terms.push_back({q, Vector::Constant(1, a)});
    return f;
  }

  static NonlinearitySpec power_sum(std::vector<Term> terms) {
    NonlinearitySpec f;
    f.terms = std::move(terms);
    return f;
  }

  static NonlinearitySpec custom(std::function<double(Index, double)> f, std::function<double(Index, double)> F) {
    NonlinearitySpec out;
    out.custom_f = std::move(f);
    out.custom_F = std::move(F);
    return out;
  }

  bool is_power_sum() const { return !custom_f; }

  double coefficient(const Term& t, Index x) const { return t.a.size() == 1 ? t.a(0) : t.a(x); }

  double f(Index x, double y) const {
    if (y <= 0.0) return 0.0;
    if (custom_f) return custom_f(x, y);
    double v = 0.0;
    for (const auto& t : terms) v += coefficient(t, x) * std::pow(y, t.q - 1.0);
    return v;
  }

  double F(Index x, double y) const {
    if (y <= 0.0) return 0.0;
    if (custom_F) return custom_F(x, y);
    double v = 0.0;
    for (const auto& t : terms) v += coefficient(t, x) * std::pow(y, t.q) / t.q;
    return v;
  }

  /// the superlinearity constant α = min_j q_j
  double alpha() const {
    double a = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) a = std::min(a, t.q);
    return a;
  }

  /// max_x a_j(x)
  double max_coefficient(const Term& t) const { return t.a.maxCoeff(); }

  void validate(Index n, double p) const {
    if (custom_f) {
      if (!custom_F) fail(ErrorCategory::validation, "custom nonlinearity needs its primitive F");
      return;
    }
    if (terms.empty()) fail(ErrorCategory::validation, "nonlinearity has no terms");
    for (const auto& t : terms) {
      if (!(t.q > p)) {
        std::ostringstream msg;
        msg << "nonlinearity exponent q = " << t.q << " must exceed p = " << p;
        fail(ErrorCategory::validation, msg.str());
      }
      if (t.a.size() != 1 && t.a.size() != n)
        fail(ErrorCategory::validation, "nonlinearity coefficient table does not match graph size");
      if (!t.a.allFinite() || !(t.a.minCoeff() > 0.0))
        fail(ErrorCategory::validation, "nonlinearity coefficients must be positive and bounded");
    }
  }
};

/// (−Δ)_p^s u + h|u|^{p−2}u = f(x, u⁺) on a fixed graph and kernel.
struct ProblemSpec {
  FracKernel kernel;
  double p = 2.0;
  PotentialSpec potential;
  Vector h;
  NonlinearitySpec nonlinearity;

  Index size() const noexcept { return kernel.size(); }
  const Vector& mu() const { return kernel.graph->measure(); }
};

inline ProblemSpec make_problem(FracKernel kernel, double p, PotentialSpec potential, NonlinearitySpec f) {
  detail::require_exponent(p);
  if (!kernel.graph) fail(ErrorCategory::validation, "kernel carries no graph");
  Vector h = potential.evaluate(*kernel.graph);
  f.validate(kernel.size(), p);
  return ProblemSpec{std::move(kernel), p, std::move(potential), std::move(h), std::move(f)};
}

struct AssumptionReport {
  bool A1 = false;  // continuity, f(x,0) = 0
  bool A2 = false;  // local boundedness
  bool A3 = false;  // α F ≤ y f with α > p
  bool A4 = false;  // limsup f/y^{p−1} < λ_p at 0⁺
  bool A5 = false;  // f/y^{p−1} strictly increasing
  bool H1 = false;  // inf h > 0
  bool H2 = false;  // h → ∞ with distance
  bool certified = false;
  double alpha = 0.0;
  /// certified lower bound on λ_p: inf h (the gradient part is nonnegative)
  double lambda_lower = 0.0;
  std::string note;
};

/// For power sums with every q_j > p: f is continuous with f(x,0) = 0, bounded
/// on bounded sets, min_j q_j F ≤ y f, f/y^{p−1} = Σ a_j y^{q_j−p} increases
/// strictly, and f/y^{p−1} → 0 < inf h ≤ λ_p.
inline AssumptionReport check_assumptions(const ProblemSpec& spec) {
  AssumptionReport r;
  r.H1 = spec.h.minCoeff() > 0.0;
  r.H2 = spec.potential.grows_with_distance();
  r.lambda_lower = spec.h.minCoeff();
  if (!spec.nonlinearity.is_power_sum()) {
    r.note = "custom nonlinearity: (A1)-(A5) accepted without certification";
    return r;
  }
  r.alpha = spec.nonlinearity.alpha();
  r.A1 = r.A2 = true;
  r.A3 = r.alpha > spec.p;
  r.A5 = r.A3;
  r.A4 = r.A3 && r.lambda_lower > 0.0;
  r.certified = r.A1 && r.A2 && r.A3 && r.A4 && r.A5 && r.H1;
  if (!r.H2) r.note = "potential does not grow with distance; (H-2) only matters on infinite graphs";
  return r;
}

/// E(u) = (1/p)∫(|∇^s u|^p + h|u|^p)dμ − ∫F(x,u⁺)dμ.
inline double energy(const ProblemSpec& spec, const Vector& u) {
  const SobolevNormReport norm = sobolev_norm(spec.kernel, u, spec.p, spec.h);
  const Vector& mu = spec.mu();
  double nonlinear = 0.0;
  for (Index x = 0; x < spec.size(); ++x) nonlinear += mu(x) * spec.nonlinearity.F(x, u(x));
  return (norm.grad_part + norm.zero_part) / spec.p - nonlinear;
}

/// μ-representative of E'(u): (−Δ)_p^s u + h|u|^{p−2}u − f(x,u⁺). It is also
/// the pointwise residual of the equation.
inline Vector energy_gradient(const ProblemSpec& spec, const Vector& u) {
  Vector g = frac_p_laplacian(spec.kernel, u, spec.p);
  for (Index x = 0; x < spec.size(); ++x)
    g(x) += spec.h(x) * detail::signed_power(u(x), spec.p) - spec.nonlinearity.f(x, u(x));
  return g;
}

/// ‖u‖^p in H_{s,p}
inline double h_norm_p(const ProblemSpec& spec, const Vector& u) {
  const SobolevNormReport r = sobolev_norm(spec.kernel, u, spec.p, spec.h);
  return r.grad_part + r.zero_part;
}

/// ⟨E'(u), u⟩ = ‖u‖_H^p − ∫f(x,u⁺)u⁺ dμ.
inline double nehari_functional(const ProblemSpec& spec, const Vector& u) {
  const Vector& mu = spec.mu();
  double nonlinear = 0.0;
  for (Index x = 0; x < spec.size(); ++x) {
    const double up = std::max(u(x), 0.0);
    nonlinear += mu(x) * spec.nonlinearity.f(x, up) * up;
  }
  return h_norm_p(spec, u) - nonlinear;
}

namespace detail {

/// φ(t) with ‖u‖_H^p precomputed.
inline double nehari_phi_with_norm(const ProblemSpec& spec, const Vector& u, double norm_p, double t) {
  const Vector& mu = spec.mu();
  double integral = 0.0;
  for (Index x = 0; x < spec.size(); ++x) {
    const double up = std::max(u(x), 0.0);
    if (up > 0.0) integral += mu(x) * up * spec.nonlinearity.f(x, t * up);
  }
  return norm_p - integral / std::pow(t, spec.p - 1.0);
}

inline void require_positive_part(const Vector& u) {
  if (!(u.maxCoeff() > 0.0)) fail(ErrorCategory::precondition, "u+ vanishes identically; no Nehari scaling exists");
}

}  // namespace detail

/// φ(t) = ‖u‖_H^p − ∫u⁺ f(x, t u⁺)/t^{p−1} dμ, so that d/dt E(tu) = t^{p−1} φ(t).
inline double nehari_phi(const ProblemSpec& spec, const Vector& u, double t) {
  detail::require_positive_part(u);
  if (!(t > 0.0)) fail(ErrorCategory::validation, "nehari_phi needs t > 0");
  return detail::nehari_phi_with_norm(spec, u, h_norm_p(spec, u), t);
}

struct NehariProjection {
  double t0 = 1.0;
  Vector u;
  double phi = 0.0;
};

/// The unique t0 > 0 with t0·u on the Nehari manifold: bracket by doubling or
/// halving from t = 1, then 80 bisection steps.
inline NehariProjection nehari_project(const ProblemSpec& spec, const Vector& u) {
  detail::require_positive_part(u);
  const double norm_p = h_norm_p(spec, u);
  auto phi = [&](double t) { return detail::nehari_phi_with_norm(spec, u, norm_p, t); };

  double lo = 1.0;
  double hi = 1.0;
  const double at_one = phi(1.0);
  if (at_one == 0.0) return {1.0, u, 0.0};
  if (at_one > 0.0) {
    int guard = 0;
    while (phi(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 2000) fail(ErrorCategory::numerical, "Nehari bracketing failed: phi stays positive");
    }
  } else {
    int guard = 0;
    while (phi(lo) < 0.0) {
      hi = lo;
      lo *= 0.5;
      if (++guard > 2000) fail(ErrorCategory::numerical, "Nehari bracketing failed: phi stays negative");
    }
  }
  double phi_lo = phi(lo);
  double phi_hi = phi(hi);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double pm = phi(mid);
    if (pm == 0.0) {
      lo = hi = mid;
      phi_lo = phi_hi = 0.0;
      break;
    }
    if (pm > 0.0) {
      lo = mid;
      phi_lo = pm;
    } else {
      hi = mid;
      phi_hi = pm;
    }
  }
  const bool take_lo = std::abs(phi_lo) <= std::abs(phi_hi);
  const double t0 = take_lo ? lo : hi;
  return {t0, Vector(t0 * u), take_lo ? phi_lo : phi_hi};
}

struct SolverOptions {
  /// pointwise residual target
  double tolerance = 1e-8;
  int max_iterations = 20000;
  int random_starts = 8;
  bool constant_start = true;
  std::uint64_t seed = 1;
  double initial_step = 0.1;
  double energy_rel_change = 1e-12;
  int energy_window = 10;
  /// mountain-pass path nodes
  int path_nodes = 41;
  int max_sweeps = 200000;
  /// number of random test functions in the weak-form check
  int weak_tests = 20;
  /// residual below which Newton polishing is attempted
  double newton_switch = 1e-5;
};

struct StartRecord {
  std::string kind;
  double energy = 0.0;
  double pointwise_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SolutionReport {
  Vector u;
  double energy = 0.0;
  double nehari_residual = 0.0;
  double pointwise_residual = 0.0;
  double weak_residual = 0.0;
  double min_u = 0.0;
  std::string method = "verify";
  int iterations = 0;
  bool converged = false;
  bool trivial = false;
  std::uint64_t seed = 0;
  /// number of negative Hessian directions, when computed
  int morse_index = -1;
  std::vector<StartRecord> starts;
  /// energy per accepted iteration (Nehari) or path max per sweep (mountain pass)
  std::vector<double> trace;
};

/// Recomputes every residual of a candidate solution. The weak form is tested
/// against `weak_tests` random φ with entries in [−1, 1]; the reported weak
/// residual is max |lhs − rhs| / (1 + max(|lhs|, |rhs|)).
inline SolutionReport verify_solution(const ProblemSpec& spec, const Vector& u, double tol, std::uint64_t seed = 1,
                                      int weak_tests = 20) {
  detail::require_function(spec.kernel, u);
  const Index n = spec.size();
  const Vector& mu = spec.mu();
  SolutionReport r;
  r.u = u;
  r.seed = seed;
  r.energy = energy(spec, u);
  r.nehari_residual = std::abs(nehari_functional(spec, u));
  r.pointwise_residual = energy_gradient(spec, u).cwiseAbs().maxCoeff();
  r.min_u = u.minCoeff();
  r.trivial = u.cwiseAbs().maxCoeff() == 0.0;

  const GradientField gu = frac_gradient(spec.kernel, u);
  const Vector len = gu.length();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < weak_tests; ++k) {
    Vector phi(n);
    for (Index x = 0; x < n; ++x) phi(x) = unit(rng);
    const GradientField gphi = frac_gradient(spec.kernel, phi);
    double lhs = 0.0;
    double rhs = 0.0;
    for (Index x = 0; x < n; ++x) {
      lhs += mu(x) * (detail::weight_power(len(x), spec.p) * gu.entries.row(x).dot(gphi.entries.row(x)) +
                      spec.h(x) * detail::signed_power(u(x), spec.p) * phi(x));
      rhs += mu(x) * spec.nonlinearity.f(x, u(x)) * phi(x);
    }
    r.weak_residual =
        std::max(r.weak_residual, std::abs(lhs - rhs) / (1.0 + std::max(std::abs(lhs), std::abs(rhs))));
  }
  r.converged = !r.trivial && r.pointwise_residual <= tol && r.weak_residual <= tol;
  return r;
}

/// Hessian of E at u as a μ-symmetric matrix, by central differences of the
/// gradient (step 1e-5 relative to max|u|).
inline Matrix energy_hessian(const ProblemSpec& spec, const Vector& u) {
  const Index n = spec.size();
  const double eps = 1e-5 * std::max(1.0, u.cwiseAbs().maxCoeff());
  Matrix H(n, n);
  for (Index j = 0; j < n; ++j) {
    Vector up = u;
    Vector um = u;
    up(j) += eps;
    um(j) -= eps;
    H.col(j) = (energy_gradient(spec, up) - energy_gradient(spec, um)) / (2.0 * eps);
  }
  return H;
}

namespace detail {

/// Eigenpairs of diag(μ)^{1/2} H diag(μ)^{−1/2}, returned in vertex coordinates.
inline Eigen::SelfAdjointEigenSolver<Matrix> hessian_spectrum(const ProblemSpec& spec, const Vector& u) {
  const Vector sqrt_mu = spec.mu().cwiseSqrt();
  Matrix S = sqrt_mu.asDiagonal() * energy_hessian(spec, u) * sqrt_mu.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose());
  return Eigen::SelfAdjointEigenSolver<Matrix>(S);
}

inline int count_negative(const Vector& eigenvalues) {
  const double scale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  int count = 0;
  for (Index i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) < -1e-6 * scale) ++count;
  return count;
}

inline double mu_norm(const Vector& mu, const Vector& v) { return std::sqrt(mu.dot(v.cwiseAbs2())); }

inline bool energy_settled(const std::vector<double>& history, int window, double rel) {
  if (static_cast<int>(history.size()) <= window) return false;
  const double now = history.back();
  const double then = history[history.size() - 1 - static_cast<std::size_t>(window)];
  return std::abs(then - now) <= rel * std::max(std::abs(now), 1e-300);
}

}  // namespace detail

inline int morse_index(const ProblemSpec& spec, const Vector& u) {
  return detail::count_negative(detail::hessian_spectrum(spec, u).eigenvalues());
}

namespace detail {

/// Newton iteration on E'(u) = 0 with the difference Jacobian. A step is kept
/// only if it at least halves the residual. Near a nondegenerate critical point
/// this reaches the roundoff floor that descent on E cannot, because there the
/// energy decrease per step drops below double resolution.
inline bool newton_polish(const ProblemSpec& spec, Vector& u, double tol, int max_steps = 30) {
  Vector g = energy_gradient(spec, u);
  double residual = g.cwiseAbs().maxCoeff();
  for (int i = 0; i < max_steps && residual > 1e-3 * tol; ++i) {
    Eigen::FullPivLU<Matrix> lu(energy_hessian(spec, u));
    if (!lu.isInvertible()) break;
    const Vector trial = u - lu.solve(g);
    const Vector g_trial = energy_gradient(spec, trial);
    const double r_trial = g_trial.cwiseAbs().maxCoeff();
    if (!(r_trial <= 0.5 * residual)) break;
    u = trial;
    g = g_trial;
    residual = r_trial;
  }
  return residual <= tol;
}

struct DescentRun {
  Vector u;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energies;
};

/// u_{k+1} = nehari_project(u_k − η g_k) with Armijo backtracking on E.
inline DescentRun nehari_descent(const ProblemSpec& spec, const Vector& start, const SolverOptions& opt) {
  const Vector& mu = spec.mu();
  DescentRun run;
  run.u = nehari_project(spec, start).u;
  run.energy = energy(spec, run.u);
  run.energies.push_back(run.energy);
  double step = opt.initial_step;
  for (run.iterations = 0; run.iterations < opt.max_iterations; ++run.iterations) {
    Vector g = energy_gradient(spec, run.u);
    run.residual = g.cwiseAbs().maxCoeff();
    if (run.residual <= opt.tolerance &&
        (run.residual <= 1e-3 * opt.tolerance ||
         energy_settled(run.energies, opt.energy_window, opt.energy_rel_change))) {
      run.converged = true;
      break;
    }
    if (run.residual <= opt.newton_switch) {
      Vector polished = run.u;
      if (newton_polish(spec, polished, opt.tolerance)) {
        run.u = polished;
        run.energy = energy(spec, run.u);
        run.residual = energy_gradient(spec, run.u).cwiseAbs().maxCoeff();
        run.energies.push_back(run.energy);
        run.converged = true;
        break;
      }
    }
    const double g2 = mu.dot(g.cwiseAbs2());
    bool accepted = false;
    while (step > 1e-18) {
      const Vector trial = run.u - step * g;
      if (trial.maxCoeff() > 0.0) {
        const Vector projected = nehari_project(spec, trial).u;
        const double e = energy(spec, projected);
        if (e <= run.energy - 1e-4 * step * g2) {
          run.u = projected;
          run.energy = e;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      // stationary to machine precision
      run.converged = run.residual <= opt.tolerance;
      break;
    }
    run.energies.push_back(run.energy);
    step = std::min(step * 1.5, 10.0);
  }
  return run;
}

inline void fill_verification(SolutionReport& r, const ProblemSpec& spec, const SolverOptions& opt) {
  const SolutionReport v = verify_solution(spec, r.u, opt.tolerance, opt.seed, opt.weak_tests);
  r.energy = v.energy;
  r.nehari_residual = v.nehari_residual;
  r.pointwise_residual = v.pointwise_residual;
  r.weak_residual = v.weak_residual;
  r.min_u = v.min_u;
  r.trivial = v.trivial;
  r.seed = opt.seed;
}

}  // namespace detail

/// Ground state by projected descent on the Nehari manifold from a constant
/// start and `random_starts` uniform starts in (0, 1]^n. Returns the
/// lowest-energy converged run.
inline SolutionReport ground_state_solve(const ProblemSpec& spec, const SolverOptions& opt = {}) {
  const Index n = spec.size();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<std::string, Vector>> starts;
  if (opt.constant_start) starts.emplace_back("constant", Vector::Ones(n));
  for (int k = 0; k < opt.random_starts; ++k) {
    Vector v(n);
    for (Index x = 0; x < n; ++x) v(x) = 1.0 - unit(rng);
    starts.emplace_back("random", std::move(v));
  }
  if (starts.empty()) fail(ErrorCategory::validation, "ground_state_solve needs at least one start");

  SolutionReport best;
  bool have_best = false;
  std::ostringstream trace;
  std::vector<StartRecord> records;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto run = detail::nehari_descent(spec, starts[i].second, opt);
    records.push_back({starts[i].first, run.energy, run.residual, run.iterations, run.converged});
    trace << " start " << i << " (" << starts[i].first << "): energy " << run.energy << " residual " << run.residual
          << " iterations " << run.iterations << ";";
    if (!run.converged) continue;
    if (!have_best || run.energy < best.energy) {
      best = SolutionReport{};
      best.u = run.u;
      best.energy = run.energy;
      best.iterations = run.iterations;
      best.trace = run.energies;
      have_best = true;
    }
  }
  if (!have_best) fail(ErrorCategory::convergence, "no Nehari descent start converged:" + trace.str());
  best.method = "nehari";
  best.starts = std::move(records);
  detail::fill_verification(best, spec, opt);
  best.converged = !best.trivial && best.pointwise_residual <= opt.tolerance && best.min_u > 0.0 && best.energy > 0.0;
  return best;
}

namespace detail {

/// Maximizes E along base + σ·dir by a sign change of d/dσ E = ⟨g, dir⟩_μ.
/// Returns nullopt if no interior maximum is bracketed.
inline std::optional<Vector> line_maximum(const ProblemSpec& spec, const Vector& base, const Vector& dir) {
  const Vector& mu = spec.mu();
  auto slope = [&](double sigma) {
    const Vector v = base + sigma * dir;
    if (!v.allFinite()) return std::numeric_limits<double>::quiet_NaN();
    return mu.dot(energy_gradient(spec, v).cwiseProduct(dir));
  };
  const double s0 = slope(0.0);
  if (s0 == 0.0) return base;
  const double sign = s0 > 0.0 ? 1.0 : -1.0;
  double near = 0.0;
  double far = sign * 1e-3 * std::max(1.0, base.cwiseAbs().maxCoeff());
  double s_far = slope(far);
  int guard = 0;
  while (s_far * sign > 0.0) {
    near = far;
    far *= 2.0;
    s_far = slope(far);
    if (++guard > 60) return std::nullopt;
  }
  if (!std::isfinite(s_far)) return std::nullopt;
  double lo = std::min(near, far);
  double hi = std::max(near, far);
  // slope is positive at lo and negative at hi
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double sm = slope(mid);
    if (sm == 0.0) {
      lo = hi = mid;
      break;
    }
    if (sm > 0.0) lo = mid;
    else hi = mid;
  }
  return Vector(base + 0.5 * (lo + hi) * dir);
}

/// Min-mode Newton iteration toward a critical point of Morse index 1: in the
/// eigenbasis of the μ-symmetric Hessian the step ascends along the lowest mode
/// and descends along the others, each scaled by 1/|λ_i|. Steps are limited by
/// a trust radius and kept only when the μ-norm of E' drops.
inline bool saddle_refine(const ProblemSpec& spec, Vector& u, double tol, int max_iterations, int& iterations) {
  const Vector& mu = spec.mu();
  const Vector sqrt_mu = mu.cwiseSqrt();
  Vector g = energy_gradient(spec, u);
  double merit = mu_norm(mu, g);
  double radius = 0.1 * std::max(mu_norm(mu, u), 1e-3);
  const double max_radius = std::max(mu_norm(mu, u), 1e-3);
  for (int it = 0; it < max_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() <= tol) return true;
    ++iterations;
    const auto spectrum = hessian_spectrum(spec, u);
    const Vector& lam = spectrum.eigenvalues();
    const double floor = 1e-10 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    // coordinates of g in the orthonormal basis of the symmetrized Hessian
    const Vector coeff = spectrum.eigenvectors().transpose() * sqrt_mu.cwiseProduct(g);
    Vector c(coeff.size());
    for (Index i = 0; i < coeff.size(); ++i) {
      const double sign = i == 0 ? 1.0 : -1.0;
      c(i) = sign * coeff(i) / std::max(std::abs(lam(i)), floor);
    }
    const Vector full = sqrt_mu.cwiseInverse().cwiseProduct(spectrum.eigenvectors() * c);
    const double full_norm = mu_norm(mu, full);
    if (!std::isfinite(full_norm)) return false;
    bool accepted = false;
    while (radius > 1e-14 * max_radius) {
      const double scale = full_norm > radius ? radius / full_norm : 1.0;
      const Vector trial = u + scale * full;
      if (!trial.allFinite()) return false;
      const Vector g_trial = energy_gradient(spec, trial);
      const double m_trial = mu_norm(mu, g_trial);
      if (m_trial < merit) {
        u = trial;
        g = g_trial;
        merit = m_trial;
        accepted = true;
        if (scale == 1.0 || scale * full_norm >= radius) radius = std::min(2.0 * radius, max_radius);
        break;
      }
      radius = 0.5 * std::min(radius, full_norm);
    }
    if (!accepted) return g.cwiseAbs().maxCoeff() <= tol;
  }
  return g.cwiseAbs().maxCoeff() <= tol;
}

struct Path {
  std::vector<Vector> nodes;
  std::vector<double> energies;

  std::size_t argmax_interior() const {
    std::size_t k = 1;
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
      if (energies[i] > energies[k]) k = i;
    return k;
  }
  double max_energy() const { return *std::max_element(energies.begin(), energies.end()); }
};

/// Equal arc-length resampling of the polyline.
inline Path respace(const ProblemSpec& spec, const Path& path) {
  const Vector& mu = spec.mu();
  const std::size_t m = path.nodes.size();
  std::vector<double> arc(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) arc[i] = arc[i - 1] + mu_norm(mu, path.nodes[i] - path.nodes[i - 1]);
  Path out;
  out.nodes.push_back(path.nodes.front());
  std::size_t seg = 0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double target = arc.back() * static_cast<double>(i) / static_cast<double>(m - 1);
    while (seg + 1 < m - 1 && arc[seg + 1] < target) ++seg;
    const double len = arc[seg + 1] - arc[seg];
    const double w = len > 0.0 ? (target - arc[seg]) / len : 0.0;
    out.nodes.push_back((1.0 - w) * path.nodes[seg] + w * path.nodes[seg + 1]);
  }
  out.nodes.push_back(path.nodes.back());
  for (const auto& v : out.nodes) out.energies.push_back(energy(spec, v));
  return out;
}

/// Highest energy over the nodes and the segment midpoints. Checking midpoints
/// keeps a segment from stepping across the ridge between two low nodes.
inline double path_peak(const ProblemSpec& spec, const Path& path) {
  double peak = path.max_energy();
  for (std::size_t i = 0; i + 1 < path.nodes.size(); ++i)
    peak = std::max(peak, energy(spec, 0.5 * (path.nodes[i] + path.nodes[i + 1])));
  return peak;
}

}  // namespace detail

/// Min-max over a discretized path from 0 to an endpoint of negative energy.
///
/// Each sweep moves every interior node along the component of −E' across the
/// path, then restores equal arc-length spacing; a sweep is kept only if the
/// path maximum does not increase. Once the highest node is nearly critical
/// across the path, it is maximized along the local tangent and refined to a
/// critical point by min-mode Newton steps. A limit with Morse index ≥ 2 is not
/// a mountain-pass point; the path is then pushed off it along the second
/// negative-curvature direction and the sweeps resume.
inline SolutionReport mountain_pass_solve(const ProblemSpec& spec, const SolverOptions& opt = {}) {
  const Index n = spec.size();
  const Vector& mu = spec.mu();
  if (opt.path_nodes < 3) fail(ErrorCategory::validation, "mountain-pass path needs at least 3 nodes");

  // endpoint T·1 with E(T·1) < 0
  const Vector ones = Vector::Ones(n);
  double T = 1.0;
  int doublings = 0;
  while (energy(spec, T * ones) >= 0.0) {
    T *= 2.0;
    if (++doublings > 200) fail(ErrorCategory::convergence, "no negative-energy endpoint along the constant ray");
  }

  detail::Path path;
  const auto m = static_cast<std::size_t>(opt.path_nodes);
  for (std::size_t i = 0; i < m; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(m - 1);
    path.nodes.push_back(frac * T * ones);
    path.energies.push_back(energy(spec, path.nodes.back()));
  }

  SolutionReport report;
  report.method = "mountain-pass";
  double switch_tol = std::max(1e-3, opt.tolerance);
  std::vector<double> steps(m, opt.initial_step);
  double peak = detail::path_peak(spec, path);
  int rejected = 0;
  int sweeps = 0;
  int perturbations = 0;
  std::ostringstream why;

  auto record = [&] { report.trace.push_back(peak); };
  record();
  auto tangent_at = [&](std::size_t i) {
    Vector t = path.nodes[i + 1] - path.nodes[i - 1];
    return Vector(t / detail::mu_norm(mu, t));
  };

  while (sweeps < opt.max_sweeps) {
    // phase A: sweep the whole path downhill across itself
    std::size_t k = path.argmax_interior();
    Vector tangent = tangent_at(k);
    {
      const Vector g = energy_gradient(spec, path.nodes[k]);
      const Vector across = g - mu.dot(g.cwiseProduct(tangent)) * tangent;
      if (across.cwiseAbs().maxCoeff() > switch_tol) {
        ++sweeps;
        detail::Path next = path;
        for (std::size_t i = 1; i + 1 < m; ++i) {
          const Vector t = tangent_at(i);
          const Vector gi = energy_gradient(spec, next.nodes[i]);
          const Vector d = gi - mu.dot(gi.cwiseProduct(t)) * t;
          const double len = detail::mu_norm(mu, d);
          if (!(len > 0.0)) continue;
          // a node may not jump past its neighbours
          const double spacing = std::min(detail::mu_norm(mu, next.nodes[i] - next.nodes[i - 1]),
                                          detail::mu_norm(mu, next.nodes[i + 1] - next.nodes[i]));
          double& h = steps[i];
          h = std::min(h, 0.5 * spacing / len);
          while (h > 1e-18) {
            const Vector trial = next.nodes[i] - h * d;
            const double e = energy(spec, trial);
            if (e <= next.energies[i] - 1e-4 * h * len * len) {
              next.nodes[i] = trial;
              next.energies[i] = e;
              break;
            }
            h *= 0.5;
          }
          h = std::max(h, 1e-12) * 1.5;
        }
        next = detail::respace(spec, next);
        const double next_peak = detail::path_peak(spec, next);
        if (next_peak <= peak && next.energies[next.argmax_interior()] > 0.0) {
          path = std::move(next);
          peak = next_peak;
          rejected = 0;
        } else if (++rejected > 60) {
          why << "path peak cannot decrease at sweep " << sweeps << ";";
          goto refine;
        } else {
          for (double& h : steps) h *= 0.25;
        }
        record();
        continue;
      }
    }

  refine:
    // phase B: max along the path tangent, then min-mode Newton
    const auto top = detail::line_maximum(spec, path.nodes[k], tangent);
    Vector u = top ? *top : path.nodes[k];
    double e_u = energy(spec, u);
    const bool refined = detail::saddle_refine(spec, u, opt.tolerance, opt.max_iterations, report.iterations);
    e_u = energy(spec, u);
    if (!refined) {
      // not yet in the basin of the saddle; tighten the path first
      if (switch_tol <= opt.tolerance) {
        why << "refinement at the highest node stalled;";
        break;
      }
      switch_tol = std::max(0.1 * switch_tol, opt.tolerance);
      rejected = 0;
      continue;
    }
    {
      // keep the refined point on the path when that does not raise the peak
      detail::Path with_u = path;
      with_u.nodes[k] = u;
      with_u.energies[k] = e_u;
      const double with_peak = detail::path_peak(spec, with_u);
      if (with_peak <= peak) {
        path = std::move(with_u);
        peak = with_peak;
        record();
      }
    }

    const auto spectrum = detail::hessian_spectrum(spec, u);
    const int index = detail::count_negative(spectrum.eigenvalues());
    report.morse_index = index;
    if (index <= 1) {
      report.u = u;
      break;
    }
    // push the path off an index ≥ 2 critical point
    const Vector sqrt_mu = mu.cwiseSqrt();
    const Vector dir_sym = spectrum.eigenvectors().col(1);
    Vector dir = sqrt_mu.cwiseInverse().cwiseProduct(dir_sym);
    dir /= detail::mu_norm(mu, dir);
    bool pushed = false;
    for (double amplitude : {0.05, 0.02, 0.1, 0.01}) {
      for (double sign : {1.0, -1.0}) {
        detail::Path trial = path;
        const double scale = amplitude * std::max(1.0, u.cwiseAbs().maxCoeff());
        for (std::size_t i = 1; i + 1 < m; ++i) {
          const double dist = std::abs(static_cast<double>(i) - static_cast<double>(k));
          const double bump = std::max(0.0, 1.0 - dist / 6.0);
          if (bump == 0.0) continue;
          trial.nodes[i] += sign * scale * bump * dir;
          trial.energies[i] = energy(spec, trial.nodes[i]);
        }
        const double trial_peak = detail::path_peak(spec, trial);
        if (trial_peak < peak) {
          path = std::move(trial);
          peak = trial_peak;
          pushed = true;
          break;
        }
      }
      if (pushed) break;
    }
    if (!pushed || ++perturbations > 20) {
      why << "could not leave a critical point of Morse index " << index << ";";
      break;
    }
    std::fill(steps.begin(), steps.end(), opt.initial_step);
    rejected = 0;
    record();
  }

  if (report.u.size() == 0)
    fail(ErrorCategory::convergence, "mountain-pass path did not converge after " + std::to_string(sweeps) +
                                         " sweeps: " + why.str());
  report.iterations += sweeps;
  detail::fill_verification(report, spec, opt);
  report.converged =
      !report.trivial && report.pointwise_residual <= opt.tolerance && report.min_u > 0.0 && report.energy > 0.0;
  if (!report.converged) {
    std::ostringstream msg;
    msg << "mountain-pass limit fails verification: residual " << report.pointwise_residual << ", min u "
        << report.min_u << ", energy " << report.energy;
    fail(ErrorCategory::convergence, msg.str());
  }
  return report;
}

struct LinftyBound {
  double delta = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double sup_norm = 0.0;
  bool pass = false;
};

/// Largest δ with f(x,y) ≤ (λ − ε) y^{p−1} on [0, δ) for a power-sum f, using
/// max_x a_j(x). For a single term a·y^{q−1} this is ((λ − ε)/a)^{1/(q−p)}.
inline double linfty_delta(const NonlinearitySpec& f, double p, double lambda, double epsilon) {
  if (!f.is_power_sum()) fail(ErrorCategory::unsupported, "L-infinity bound needs a power-sum nonlinearity");
  const double target = lambda - epsilon;
  if (!(target > 0.0)) fail(ErrorCategory::validation, "need 0 < epsilon < lambda_p");
  if (f.terms.size() == 1) {
    const auto& t = f.terms.front();
    return std::pow(target / f.max_coefficient(t), 1.0 / (t.q - p));
  }
  auto ratio = [&](double y) {
    double v = 0.0;
    for (const auto& t : f.terms) v += f.max_coefficient(t) * std::pow(y, t.q - p);
    return v;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (ratio(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < target ? lo : hi) = mid;
  }
  return lo;
}

/// Checks ‖u‖_∞ ≥ δ for a Nehari point u. `lambda` must be a lower bound on
/// λ_p (e.g. the exact p = 2 value or inf h); ε defaults to λ/2.
inline LinftyBound check_linfty_lower_bound(const ProblemSpec& spec, const Vector& u, double lambda,
                                            std::optional<double> epsilon = std::nullopt,
                                            double nehari_tol = 1e-8) {
  detail::require_function(spec.kernel, u);
  const double norm_p = h_norm_p(spec, u);
  const double nehari = std::abs(nehari_functional(spec, u));
  if (!(u.maxCoeff() > 0.0) || nehari > nehari_tol * std::max(norm_p, 1e-300)) {
    std::ostringstream msg;
    msg << "u is not a Nehari point: |<E'(u),u>| = " << nehari << " vs ||u||^p = " << norm_p;
    fail(ErrorCategory::precondition, msg.str());
  }
  LinftyBound b;
  b.lambda = lambda;
  b.epsilon = epsilon.value_or(0.5 * lambda);
  b.delta = linfty_delta(spec.nonlinearity, spec.p, lambda, b.epsilon);
  b.sup_norm = u.cwiseAbs().maxCoeff();
  b.pass = b.sup_norm >= b.delta;
  return b;
}

}  // namespace fracgraph
