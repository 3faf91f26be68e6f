#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fracgraph/variational.hpp"

namespace fracgraph {

/// %.17g, which round-trips every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCategory::io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCategory::io, "write to '" + path + "' failed");
}

/// "a b w" per undirected edge, a before b in vertex order.
inline std::string write_edge_list(const WeightedGraph& g) {
  std::ostringstream out;
  for (Index x = 0; x < g.size(); ++x)
    for (Index y = x + 1; y < g.size(); ++y)
      if (g.w(x, y) > 0.0) out << g.label(x) << ' ' << g.label(y) << ' ' << format_double(g.w(x, y)) << '\n';
  return out.str();
}

/// "v mu" per vertex.
inline std::string write_measure(const WeightedGraph& g) {
  std::ostringstream out;
  for (Index x = 0; x < g.size(); ++x) out << g.label(x) << ' ' << format_double(g.mu(x)) << '\n';
  return out.str();
}

inline std::string eigenpairs_csv(const SpectralData& sd) {
  std::ostringstream out;
  out << "k,lambda";
  for (Index x = 0; x < sd.size(); ++x) out << ",phi_" << sd.graph->label(x);
  out << '\n';
  for (Index k = 0; k < sd.size(); ++k) {
    out << k << ',' << format_double(sd.lambdas(k));
    for (Index x = 0; x < sd.size(); ++x) out << ',' << format_double(sd.phis(x, k));
    out << '\n';
  }
  return out.str();
}

/// Nonzero W_s(x,y) for x < y as "x,y,W" with vertex indices.
inline std::string kernel_csv(const FracKernel& K) {
  std::ostringstream out;
  out << "# provenance=" << provenance_name(K.provenance) << " s=" << format_double(K.s) << " n=" << K.size()
      << '\n';
  out << "x,y,W\n";
  for (Index x = 0; x < K.size(); ++x)
    for (Index y = x + 1; y < K.size(); ++y)
      if (K.W(x, y) != 0.0) out << x << ',' << y << ',' << format_double(K.W(x, y)) << '\n';
  return out.str();
}

/// Inverse of kernel_csv on a known graph.
inline FracKernel load_kernel_csv(const std::string& text, GraphPtr graph) {
  std::istringstream in(text);
  std::string line;
  double s = -1.0;
  Index n = -1;
  Matrix W = Matrix::Zero(graph->size(), graph->size());
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "x,y,W") continue;
    if (line[0] == '#') {
      std::istringstream hdr(line.substr(1));
      std::string field;
      while (hdr >> field) {
        if (field.rfind("s=", 0) == 0) s = std::stod(field.substr(2));
        if (field.rfind("n=", 0) == 0) n = std::stol(field.substr(2));
      }
      continue;
    }
    std::istringstream row(line);
    std::string a, b, v;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, v))
      fail(ErrorCategory::validation, "kernel line " + std::to_string(line_no) + ": expected x,y,W");
    Index x = 0, y = 0;
    double w = 0.0;
    try {
      x = std::stol(a);
      y = std::stol(b);
      w = std::stod(v);
    } catch (const std::exception&) {
      fail(ErrorCategory::validation, "kernel line " + std::to_string(line_no) + ": not numeric");
    }
    if (x < 0 || y < 0 || x >= graph->size() || y >= graph->size() || x == y || !(w >= 0.0))
      fail(ErrorCategory::validation, "kernel line " + std::to_string(line_no) + ": bad entry");
    W(x, y) = W(y, x) = w;
  }
  if (n != graph->size()) fail(ErrorCategory::validation, "kernel file size does not match the graph");
  require_order(s);
  return FracKernel{s, std::move(W), KernelProvenance::loaded, std::move(graph)};
}

inline std::string rowsums_csv(const std::vector<RowSumReport>& rows, const std::vector<HeatBound>& bounds,
                               const WeightedGraph& g) {
  std::ostringstream out;
  out << "vertex,label,row_sum,A_x,bound,pass\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << r.vertex << ',' << g.label(r.vertex) << ',' << format_double(r.row_sum) << ','
        << format_double(bounds[i].A_x) << ',' << format_double(r.bound) << ',' << (r.pass ? "true" : "false")
        << '\n';
  }
  return out.str();
}

inline std::string solution_csv(const Vector& u, const WeightedGraph& g) {
  std::ostringstream out;
  out << "vertex,label,u\n";
  for (Index x = 0; x < g.size(); ++x) out << x << ',' << g.label(x) << ',' << format_double(u(x)) << '\n';
  return out.str();
}

/// Report as a JSON document: u keyed by vertex label, scalar diagnostics,
/// per-start records and a summary of the iteration trace.
inline nlohmann::ordered_json solution_json(const SolutionReport& r, const WeightedGraph& g) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["converged"] = r.converged;
  j["trivial"] = r.trivial;
  j["seed"] = r.seed;
  j["energy"] = r.energy;
  j["nehari_residual"] = r.nehari_residual;
  j["pointwise_residual"] = r.pointwise_residual;
  j["weak_residual"] = r.weak_residual;
  j["min_u"] = r.min_u;
  j["iterations"] = r.iterations;
  if (r.morse_index >= 0) j["morse_index"] = r.morse_index;
  nlohmann::ordered_json u = nlohmann::ordered_json::object();
  for (Index x = 0; x < g.size(); ++x) u[g.label(x)] = r.u(x);
  j["u"] = std::move(u);
  if (!r.starts.empty()) {
    auto starts = nlohmann::ordered_json::array();
    for (const auto& s : r.starts)
      starts.push_back({{"kind", s.kind},
                        {"energy", s.energy},
                        {"pointwise_residual", s.pointwise_residual},
                        {"iterations", s.iterations},
                        {"converged", s.converged}});
    j["starts"] = std::move(starts);
  }
  if (!r.trace.empty()) {
    j["trace"] = {{"length", r.trace.size()}, {"first", r.trace.front()}, {"last", r.trace.back()}};
  }
  return j;
}

/// u from a solution.json document, ordered by the graph's labels.
inline Vector load_solution_json(const std::string& text, const WeightedGraph& g) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::validation, std::string("solution file is not valid JSON: ") + e.what());
  }
  if (!j.contains("u") || !j["u"].is_object()) fail(ErrorCategory::validation, "solution file has no 'u' object");
  Vector u(g.size());
  for (Index x = 0; x < g.size(); ++x) {
    const auto it = j["u"].find(g.label(x));
    if (it == j["u"].end() || !it->is_number())
      fail(ErrorCategory::validation, "solution file has no value for vertex '" + g.label(x) + "'");
    u(x) = it->get<double>();
  }
  return u;
}

/// Vertex function from text: either "label value" (whitespace or comma
/// separated) per line, or one bare value per line in vertex order.
inline Vector load_function(const std::string& text, const WeightedGraph& g) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, double> by_label;
  std::vector<double> bare;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip_comment(line);
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream row(line);
    std::vector<std::string> tok{std::istream_iterator<std::string>(row), std::istream_iterator<std::string>()};
    if (tok.empty()) continue;
    try {
      if (tok.size() == 1) bare.push_back(std::stod(tok[0]));
      else if (tok.size() == 2) by_label[tok[0]] = std::stod(tok[1]);
      else throw std::invalid_argument("arity");
    } catch (const std::exception&) {
      fail(ErrorCategory::validation, "function line " + std::to_string(line_no) + ": expected 'label value' or 'value'");
    }
  }
  if (!bare.empty() && !by_label.empty()) fail(ErrorCategory::validation, "function file mixes bare and labelled values");
  Vector u(g.size());
  if (!bare.empty()) {
    if (static_cast<Index>(bare.size()) != g.size())
      fail(ErrorCategory::validation, "function file has " + std::to_string(bare.size()) + " values for " +
                                          std::to_string(g.size()) + " vertices");
    for (Index x = 0; x < g.size(); ++x) u(x) = bare[static_cast<std::size_t>(x)];
    return u;
  }
  for (Index x = 0; x < g.size(); ++x) {
    const auto it = by_label.find(g.label(x));
    if (it == by_label.end()) fail(ErrorCategory::validation, "function file has no value for vertex '" + g.label(x) + "'");
    u(x) = it->second;
  }
  if (static_cast<Index>(by_label.size()) != g.size()) fail(ErrorCategory::validation, "function file names unknown vertices");
  return u;
}

}  // namespace fracgraph
