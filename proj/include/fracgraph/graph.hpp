#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "fracgraph/error.hpp"

namespace fracgraph {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Undirected weighted graph with a positive vertex measure.
///
/// Vertices are indexed 0..n-1 in input order; labels only matter for I/O.
/// The constructor enforces the invariants (positive measure, symmetric
/// nonnegative weights with zero diagonal, connectivity), so any instance in
/// hand is valid and immutable.
class WeightedGraph {
 public:
  WeightedGraph(Vector mu, Matrix w, std::vector<std::string> labels = {})
      : mu_(std::move(mu)), w_(std::move(w)), labels_(std::move(labels)) {
    validate();
  }

  Index size() const noexcept { return mu_.size(); }
  const Vector& measure() const noexcept { return mu_; }
  const Matrix& weights() const noexcept { return w_; }
  double mu(Index x) const { return mu_(x); }
  double w(Index x, Index y) const { return w_(x, y); }

  const std::string& label(Index x) const { return labels_[static_cast<std::size_t>(x)]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  std::optional<Index> find(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return static_cast<Index>(i);
    }
    return std::nullopt;
  }

  Index index_of(const std::string& label) const {
    if (auto i = find(label)) return *i;
    fail(ErrorCategory::validation, "unknown vertex '" + label + "'");
  }

  std::size_t edge_count() const {
    std::size_t m = 0;
    for (Index x = 0; x < size(); ++x)
      for (Index y = x + 1; y < size(); ++y)
        if (w_(x, y) > 0.0) ++m;
    return m;
  }

  std::vector<Index> neighbors(Index x) const {
    std::vector<Index> out;
    for (Index y = 0; y < size(); ++y)
      if (w_(x, y) > 0.0) out.push_back(y);
    return out;
  }

  /// Sum of edge weights at x (unnormalized degree).
  double degree(Index x) const { return w_.row(x).sum(); }

 private:
  void validate() {
    const Index n = mu_.size();
    if (n < 1) fail(ErrorCategory::validation, "graph must have at least one vertex");
    if (w_.rows() != n || w_.cols() != n)
      fail(ErrorCategory::validation, "weight matrix does not match vertex count");
    if (labels_.empty()) {
      labels_.reserve(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) labels_.push_back(std::to_string(i));
    }
    if (static_cast<Index>(labels_.size()) != n)
      fail(ErrorCategory::validation, "label count does not match vertex count");
    for (Index x = 0; x < n; ++x) {
      if (!(mu_(x) > 0.0) || !std::isfinite(mu_(x)))
        fail(ErrorCategory::validation, "nonpositive measure at vertex '" + label(x) + "'");
      if (w_(x, x) != 0.0)
        fail(ErrorCategory::validation, "self-loop at vertex '" + label(x) + "'");
      for (Index y = x + 1; y < n; ++y) {
        if (w_(x, y) != w_(y, x))
          fail(ErrorCategory::validation,
               "asymmetric weight between '" + label(x) + "' and '" + label(y) + "'");
        if (w_(x, y) < 0.0 || !std::isfinite(w_(x, y)))
          fail(ErrorCategory::validation,
               "negative weight between '" + label(x) + "' and '" + label(y) + "'");
      }
    }
    // connectivity from vertex 0
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::deque<Index> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
      const Index x = queue.front();
      queue.pop_front();
      for (Index y = 0; y < n; ++y) {
        if (w_(x, y) > 0.0 && !seen[static_cast<std::size_t>(y)]) {
          seen[static_cast<std::size_t>(y)] = true;
          queue.push_back(y);
        }
      }
    }
    for (Index y = 0; y < n; ++y) {
      if (!seen[static_cast<std::size_t>(y)])
        fail(ErrorCategory::validation, "graph is disconnected: '" + label(0) + "' cannot reach '" +
                                            label(y) + "'");
    }
  }

  Vector mu_;
  Matrix w_;
  std::vector<std::string> labels_;
};

using GraphPtr = std::shared_ptr<const WeightedGraph>;

inline GraphPtr share(WeightedGraph g) { return std::make_shared<const WeightedGraph>(std::move(g)); }

/// Path graph 0-1-...-(n-1). `mu` has n entries, `w` has n-1 entries.
inline WeightedGraph build_path(Index n, const Vector& mu, const Vector& w) {
  if (n < 1) fail(ErrorCategory::validation, "path needs n >= 1");
  if (mu.size() != n) fail(ErrorCategory::validation, "path measure needs n entries");
  if (w.size() != n - 1) fail(ErrorCategory::validation, "path weights need n-1 entries");
  Matrix W = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    if (!(w(i) > 0.0)) fail(ErrorCategory::validation, "nonpositive path weight");
    W(i, i + 1) = W(i + 1, i) = w(i);
  }
  return WeightedGraph(mu, W);
}

inline WeightedGraph build_path(Index n, double mu = 1.0, double w = 1.0) {
  if (n < 1) fail(ErrorCategory::validation, "path needs n >= 1");
  return build_path(n, Vector::Constant(n, mu), Vector::Constant(std::max<Index>(n - 1, 0), w));
}

inline WeightedGraph build_cycle(Index n, double mu = 1.0, double w = 1.0) {
  if (n < 3) fail(ErrorCategory::validation, "cycle needs n >= 3");
  if (!(w > 0.0)) fail(ErrorCategory::validation, "nonpositive cycle weight");
  Matrix W = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index j = (i + 1) % n;
    W(i, j) = W(j, i) = w;
  }
  return WeightedGraph(Vector::Constant(n, mu), W);
}

/// nx-by-ny lattice patch with unit measure and weights. Vertex (i,j) has
/// index i*ny + j and label "i_j".
inline WeightedGraph build_grid(Index nx, Index ny) {
  if (nx < 1 || ny < 1) fail(ErrorCategory::validation, "grid dimensions must be >= 1");
  const Index n = nx * ny;
  Matrix W = Matrix::Zero(n, n);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < nx; ++i) {
    for (Index j = 0; j < ny; ++j) {
      const Index v = i * ny + j;
      labels.push_back(std::to_string(i) + "_" + std::to_string(j));
      if (i + 1 < nx) W(v, v + ny) = W(v + ny, v) = 1.0;
      if (j + 1 < ny) W(v, v + 1) = W(v + 1, v) = 1.0;
    }
  }
  return WeightedGraph(Vector::Ones(n), W, std::move(labels));
}

/// Random connected graph: a random spanning tree plus extra edges, weights
/// and measures drawn uniformly from [0.5, 2].
inline WeightedGraph build_random_connected(Index n, std::uint64_t seed, double extra_edge_prob = 0.2,
                                            bool unit_measure = false) {
  if (n < 1) fail(ErrorCategory::validation, "random graph needs n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(0.5, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Matrix W = Matrix::Zero(n, n);
  for (Index v = 1; v < n; ++v) {
    std::uniform_int_distribution<Index> parent(0, v - 1);
    const Index u = parent(rng);
    W(u, v) = W(v, u) = value(rng);
  }
  for (Index x = 0; x < n; ++x)
    for (Index y = x + 1; y < n; ++y)
      if (W(x, y) == 0.0 && coin(rng) < extra_edge_prob) W(x, y) = W(y, x) = value(rng);
  Vector mu(n);
  for (Index x = 0; x < n; ++x) mu(x) = unit_measure ? 1.0 : value(rng);
  return WeightedGraph(mu, W);
}

namespace detail {

inline std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

inline double parse_positive(const std::string& token, const std::string& what, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size())
    fail(ErrorCategory::validation, "line " + std::to_string(line_no) + ": malformed " + what + " '" + token + "'");
  if (!(v > 0.0) || !std::isfinite(v))
    fail(ErrorCategory::validation, "line " + std::to_string(line_no) + ": nonpositive " + what + " " + token);
  return v;
}

}  // namespace detail

/// Parses an edge list ("u v weight" per line) and an optional measure list
/// ("u mu" per line). '#' starts a comment. Vertices are numbered in order of
/// first appearance; measures default to 1.
inline WeightedGraph load_graph(const std::string& edge_text, const std::string& measure_text = {}) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, Index> index;
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, static_cast<Index>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };

  std::map<std::pair<Index, Index>, double> edges;
  std::istringstream in(edge_text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(detail::strip_comment(line));
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 3)
      fail(ErrorCategory::validation, "line " + std::to_string(line_no) + ": expected 'u v weight'");
    if (tok[0] == tok[1])
      fail(ErrorCategory::validation, "line " + std::to_string(line_no) + ": self-loop at '" + tok[0] + "'");
    const double weight = detail::parse_positive(tok[2], "weight", line_no);
    const Index a = intern(tok[0]);
    const Index b = intern(tok[1]);
    const auto key = std::minmax(a, b);
    auto [it, inserted] = edges.emplace(std::pair{key.first, key.second}, weight);
    if (!inserted && it->second != weight)
      fail(ErrorCategory::validation, "line " + std::to_string(line_no) + ": conflicting duplicate edge '" +
                                          tok[0] + "' '" + tok[1] + "'");
  }

  std::map<Index, double> measures;
  std::istringstream min(measure_text);
  line_no = 0;
  while (std::getline(min, line)) {
    ++line_no;
    std::istringstream fields(detail::strip_comment(line));
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 2)
      fail(ErrorCategory::validation, "measure line " + std::to_string(line_no) + ": expected 'u mu'");
    const Index v = intern(tok[0]);
    const double m = detail::parse_positive(tok[1], "measure", line_no);
    auto [it, inserted] = measures.emplace(v, m);
    if (!inserted && it->second != m)
      fail(ErrorCategory::validation, "measure line " + std::to_string(line_no) + ": conflicting measure for '" +
                                          tok[0] + "'");
  }

  const auto n = static_cast<Index>(labels.size());
  if (n == 0) fail(ErrorCategory::validation, "graph input contains no vertices");
  Matrix W = Matrix::Zero(n, n);
  for (const auto& [key, weight] : edges) W(key.first, key.second) = W(key.second, key.first) = weight;
  Vector mu = Vector::Ones(n);
  for (const auto& [v, m] : measures) mu(v) = m;
  return WeightedGraph(mu, W, std::move(labels));
}

/// Matrix of Δu(x) = (1/μ(x)) Σ_y w(x,y)(u(x) − u(y)).
inline Matrix laplacian_matrix(const WeightedGraph& g) {
  const Index n = g.size();
  Matrix L = -g.weights();
  for (Index x = 0; x < n; ++x) L(x, x) = g.degree(x);
  for (Index x = 0; x < n; ++x) L.row(x) /= g.mu(x);
  return L;
}

/// Hop distance d(x, x0): the minimum number of edges on a path from x to x0.
inline std::vector<int> graph_distance(const WeightedGraph& g, Index x0) {
  const Index n = g.size();
  if (x0 < 0 || x0 >= n) fail(ErrorCategory::validation, "unknown vertex index " + std::to_string(x0));
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::deque<Index> queue{x0};
  dist[static_cast<std::size_t>(x0)] = 0;
  while (!queue.empty()) {
    const Index x = queue.front();
    queue.pop_front();
    for (Index y = 0; y < n; ++y) {
      if (g.w(x, y) > 0.0 && dist[static_cast<std::size_t>(y)] < 0) {
        dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

/// Induced subgraph on the ball {x : d(x, x0) <= r}; vertex order and labels
/// follow the parent graph.
inline WeightedGraph ball_subgraph(const WeightedGraph& g, Index x0, int r) {
  if (r < 0) fail(ErrorCategory::validation, "ball radius must be >= 0");
  const auto dist = graph_distance(g, x0);
  std::vector<Index> keep;
  for (Index x = 0; x < g.size(); ++x)
    if (dist[static_cast<std::size_t>(x)] <= r) keep.push_back(x);
  const auto m = static_cast<Index>(keep.size());
  Matrix W(m, m);
  Vector mu(m);
  std::vector<std::string> labels;
  for (Index i = 0; i < m; ++i) {
    mu(i) = g.mu(keep[static_cast<std::size_t>(i)]);
    labels.push_back(g.label(keep[static_cast<std::size_t>(i)]));
    for (Index j = 0; j < m; ++j) W(i, j) = g.w(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
  }
  return WeightedGraph(mu, W, std::move(labels));
}

}  // namespace fracgraph
