#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracgraph/io.hpp"

namespace fracgraph {

struct SweepSpec {
  /// "s", "p" or "r"
  std::string variable;
  std::vector<double> values;
};

/// Everything one invocation needs. String-valued specs keep their command-line
/// form so that they can be re-resolved on each graph of a radius sweep.
struct RunConfig {
  std::string command;
  std::string graph_file;
  std::string measure_file;
  std::string builder;
  double s = 0.5;
  double p = 2.0;
  bool quadrature = false;
  std::string potential = "const:1";
  std::string nonlinearity = "power:4";
  std::string method = "nehari";
  double tol = 1e-8;
  std::uint64_t seed = 1;
  int starts = 8;
  std::string out = ".";
  std::string function_file;
  std::string solution_file;
  std::string center;
  std::optional<SweepSpec> sweep;
  std::string sweep_command = "solve";
};

namespace detail {

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

inline double parse_number(const std::string& token, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size()) fail(ErrorCategory::validation, what + ": '" + token + "' is not a number");
  return v;
}

inline Index parse_count(const std::string& token, const std::string& what) {
  const double v = parse_number(token, what);
  if (v != std::floor(v) || v < 1) fail(ErrorCategory::validation, what + ": '" + token + "' is not a positive integer");
  return static_cast<Index>(v);
}

/// "kind:args" → (kind, comma-separated args)
inline std::pair<std::string, std::vector<std::string>> split_spec(const std::string& spec, const std::string& what) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon == 0) fail(ErrorCategory::validation, what + " must look like kind:args, got '" + spec + "'");
  return {spec.substr(0, colon), split(spec.substr(colon + 1), ',')};
}

}  // namespace detail

inline WeightedGraph build_graph(const RunConfig& cfg) {
  if (!cfg.graph_file.empty() && !cfg.builder.empty())
    fail(ErrorCategory::validation, "give either --graph or --builder, not both");
  if (!cfg.graph_file.empty()) {
    const std::string measure = cfg.measure_file.empty() ? std::string{} : read_text_file(cfg.measure_file);
    return load_graph(read_text_file(cfg.graph_file), measure);
  }
  if (!cfg.measure_file.empty()) fail(ErrorCategory::validation, "--measure needs --graph");
  if (cfg.builder.empty()) fail(ErrorCategory::validation, "no graph: give --graph FILE or --builder KIND:ARGS");
  const auto [kind, args] = detail::split_spec(cfg.builder, "--builder");
  auto need = [&, &kind = kind, &args = args](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi)
      fail(ErrorCategory::validation, "--builder " + kind + ": wrong number of arguments");
  };
  if (kind == "path") {
    need(1, 1);
    return build_path(detail::parse_count(args[0], "path length"));
  }
  if (kind == "cycle") {
    need(1, 1);
    return build_cycle(detail::parse_count(args[0], "cycle length"));
  }
  if (kind == "grid") {
    need(2, 2);
    return build_grid(detail::parse_count(args[0], "grid nx"), detail::parse_count(args[1], "grid ny"));
  }
  if (kind == "random") {
    need(1, 2);
    const auto seed = args.size() == 2 ? static_cast<std::uint64_t>(detail::parse_count(args[1], "graph seed")) : cfg.seed;
    return build_random_connected(detail::parse_count(args[0], "random graph size"), seed);
  }
  fail(ErrorCategory::validation, "unknown builder '" + kind + "' (path, cycle, grid, random)");
}

inline PotentialSpec parse_potential(const std::string& spec, const WeightedGraph& g) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  if (kind == "file" && colon != std::string::npos)
    return PotentialSpec::table(load_function(read_text_file(spec.substr(colon + 1)), g));
  const auto [k, args] = detail::split_spec(spec, "--potential");
  if (k == "const" && args.size() == 1) return PotentialSpec::constant(detail::parse_number(args[0], "h0"));
  if (k == "affine" && args.size() == 3)
    return PotentialSpec::affine(detail::parse_number(args[0], "h0"), detail::parse_number(args[1], "c"),
                                 g.index_of(args[2]));
  fail(ErrorCategory::validation, "--potential must be const:h0, affine:h0,c,x0 or file:PATH, got '" + spec + "'");
}

/// "power:q[,a]" terms joined by '+'.
inline NonlinearitySpec parse_nonlinearity(const std::string& spec) {
  std::vector<NonlinearitySpec::Term> terms;
  for (const auto& part : detail::split(spec, '+')) {
    const auto [kind, args] = detail::split_spec(part, "--nonlinearity");
    if (kind != "power" || args.empty() || args.size() > 2)
      fail(ErrorCategory::validation, "--nonlinearity must be power:q[,a], got '" + part + "'");
    const double q = detail::parse_number(args[0], "exponent q");
    const double a = args.size() == 2 ? detail::parse_number(args[1], "coefficient a") : 1.0;
    terms.push_back({q, Vector::Constant(1, a)});
  }
  return NonlinearitySpec::power_sum(std::move(terms));
}

/// "s=0.1:0.9:0.1" (inclusive range) or "p=2,3,4".
inline SweepSpec parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) fail(ErrorCategory::validation, "--sweep must look like VAR=LIST, got '" + spec + "'");
  SweepSpec out;
  out.variable = spec.substr(0, eq);
  if (out.variable != "s" && out.variable != "p" && out.variable != "r")
    fail(ErrorCategory::validation, "--sweep variable must be s, p or r");
  const std::string list = spec.substr(eq + 1);
  if (list.find(':') != std::string::npos) {
    const auto parts = detail::split(list, ':');
    if (parts.size() != 3) fail(ErrorCategory::validation, "--sweep range must be start:stop:step");
    const double a = detail::parse_number(parts[0], "sweep start");
    const double b = detail::parse_number(parts[1], "sweep stop");
    const double h = detail::parse_number(parts[2], "sweep step");
    if (!(h > 0.0) || b < a) fail(ErrorCategory::validation, "--sweep range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((b - a) / h + 1e-9));
    if (count > 100000) fail(ErrorCategory::validation, "--sweep range is too long");
    for (long i = 0; i <= count; ++i) out.values.push_back(a + static_cast<double>(i) * h);
  } else {
    for (const auto& t : detail::split(list, ',')) out.values.push_back(detail::parse_number(t, "sweep value"));
  }
  if (out.values.empty()) fail(ErrorCategory::validation, "--sweep list is empty");
  if (out.variable == "r")
    for (double r : out.values)
      if (r != std::floor(r) || r < 0) fail(ErrorCategory::validation, "sweep radii must be nonnegative integers");
  return out;
}

namespace detail {

struct CaseSummary {
  Index n = 0;
  double result = 0.0;
  double residual = 0.0;
  std::string status = "ok";
};

inline std::filesystem::path prepare_out(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCategory::io, "cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

inline FracKernel make_kernel(const RunConfig& cfg, const GraphPtr& g, std::ostream& log) {
  const SpectralData sd = spectral_decompose(g);
  FracKernel K = cfg.quadrature ? assemble_kernel_quadrature(sd, cfg.s) : assemble_kernel_spectral(sd, cfg.s);
  log << "kernel: n=" << g->size() << " s=" << format_double(cfg.s) << " route=" << provenance_name(K.provenance)
      << '\n';
  return K;
}

inline ProblemSpec make_spec(const RunConfig& cfg, const GraphPtr& g, std::ostream& log) {
  FracKernel K = make_kernel(cfg, g, log);
  ProblemSpec spec = make_problem(std::move(K), cfg.p, parse_potential(cfg.potential, *g), parse_nonlinearity(cfg.nonlinearity));
  const AssumptionReport a = check_assumptions(spec);
  log << "assumptions: A1=" << a.A1 << " A2=" << a.A2 << " A3=" << a.A3 << " A4=" << a.A4 << " A5=" << a.A5
      << " H1=" << a.H1 << " H2=" << a.H2 << " alpha=" << format_double(a.alpha) << '\n';
  if (!a.note.empty()) log << "note: " << a.note << '\n';
  if (!a.certified) fail(ErrorCategory::precondition, "problem is not certified: (A1)-(A5), (H-1) do not all hold");
  return spec;
}

inline nlohmann::ordered_json problem_json(const RunConfig& cfg, const ProblemSpec& spec) {
  return {{"n", spec.size()},
          {"s", cfg.s},
          {"p", cfg.p},
          {"kernel", provenance_name(spec.kernel.provenance)},
          {"potential", cfg.potential},
          {"nonlinearity", cfg.nonlinearity},
          {"tol", cfg.tol}};
}

/// A lower bound on λ_p: exact for p = 2, inf h otherwise.
inline double certified_lambda(const ProblemSpec& spec) {
  if (spec.p == 2.0) return rayleigh_lambda(spec.kernel, spec.h, 2.0).value;
  return spec.h.minCoeff();
}

inline CaseSummary run_kernel(const RunConfig& cfg, const GraphPtr& g, const std::filesystem::path& out,
                              std::ostream& log) {
  const SpectralData sd = spectral_decompose(g);
  const FracKernel K = cfg.quadrature ? assemble_kernel_quadrature(sd, cfg.s) : assemble_kernel_spectral(sd, cfg.s);
  const auto bounds = estimate_all_Ax(sd);
  const auto rows = kernel_row_sums(K, bounds);
  write_text_file((out / "kernel.csv").string(), kernel_csv(K));
  write_text_file((out / "rowsums.csv").string(), rowsums_csv(rows, bounds, *g));
  write_text_file((out / "eigenpairs.csv").string(), eigenpairs_csv(sd));
  CaseSummary c;
  c.n = g->size();
  bool all = true;
  for (const auto& r : rows) {
    c.result = std::max(c.result, r.row_sum / r.bound);
    all = all && r.pass;
  }
  for (const auto& b : bounds) all = all && b.verified;
  c.status = all ? "ok" : "bound-violated";
  log << "kernel: route=" << provenance_name(K.provenance) << " n=" << g->size() << " s=" << format_double(cfg.s)
      << " max_rowsum_over_bound=" << format_double(c.result) << " bounds=" << (all ? "pass" : "FAIL") << '\n';
  return c;
}

inline CaseSummary run_operators(const RunConfig& cfg, const GraphPtr& g, const std::filesystem::path& out,
                                 std::ostream& log) {
  if (cfg.function_file.empty()) fail(ErrorCategory::validation, "operators needs --u FILE");
  const Vector u = load_function(read_text_file(cfg.function_file), *g);
  const FracKernel K = make_kernel(cfg, g, log);
  const Vector len = frac_length(K, u);
  const Vector lap = frac_p_laplacian(K, u, cfg.p);
  const Vector div = frac_divergence(K, frac_gradient(K, u));
  std::ostringstream csv;
  csv << "vertex,label,u,grad_length,p_laplacian,div_grad\n";
  for (Index x = 0; x < g->size(); ++x)
    csv << x << ',' << g->label(x) << ',' << format_double(u(x)) << ',' << format_double(len(x)) << ','
        << format_double(lap(x)) << ',' << format_double(div(x)) << '\n';
  write_text_file((out / "operators.csv").string(), csv.str());

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Vector phi(g->size());
    for (Index x = 0; x < g->size(); ++x) phi(x) = unit(rng);
    const PartsIdentity id = verify_parts_identity(K, u, phi, cfg.p);
    worst = std::max(worst, id.residual / std::max(1.0, id.scale));
  }
  log << "operators: p=" << format_double(cfg.p) << " parts_residual=" << format_double(worst) << '\n';
  return {g->size(), worst, worst, worst <= 1e-10 ? "ok" : "parts-residual"};
}

inline CaseSummary run_lambda(const RunConfig& cfg, const GraphPtr& g, const std::filesystem::path& out,
                              std::ostream& log) {
  const FracKernel K = make_kernel(cfg, g, log);
  const Vector h = parse_potential(cfg.potential, *g).evaluate(*g);
  DescentOptions opt;
  opt.seed = cfg.seed;
  const LambdaEstimate est = rayleigh_lambda(K, h, cfg.p, opt);
  nlohmann::ordered_json j{{"lambda", est.value},
                           {"p", est.p},
                           {"upper_bound", est.upper_bound},
                           {"p2_reference", est.p2_reference},
                           {"lower_bound", h.minCoeff()},
                           {"starts", est.starts},
                           {"converged_starts", est.converged_starts},
                           {"seed", cfg.seed}};
  write_text_file((out / "lambda.json").string(), j.dump(2) + "\n");
  log << "lambda: p=" << format_double(cfg.p) << " value=" << format_double(est.value)
      << (est.upper_bound ? " (upper bound)" : " (exact)") << '\n';
  return {g->size(), est.value, 0.0, "ok"};
}

inline CaseSummary run_solve(const RunConfig& cfg, const GraphPtr& g, const std::filesystem::path& out,
                             std::ostream& log) {
  if (cfg.method != "nehari" && cfg.method != "mountainpass" && cfg.method != "both")
    fail(ErrorCategory::validation, "--method must be nehari, mountainpass or both");
  const ProblemSpec spec = make_spec(cfg, g, log);
  SolverOptions opt;
  opt.tolerance = cfg.tol;
  opt.seed = cfg.seed;
  opt.random_starts = cfg.starts;

  std::optional<SolutionReport> nehari, pass;
  if (cfg.method != "mountainpass") {
    nehari = ground_state_solve(spec, opt);
    log << "nehari: energy=" << format_double(nehari->energy)
        << " residual=" << format_double(nehari->pointwise_residual) << " min_u=" << format_double(nehari->min_u)
        << '\n';
  }
  if (cfg.method != "nehari") {
    pass = mountain_pass_solve(spec, opt);
    log << "mountain-pass: energy=" << format_double(pass->energy)
        << " residual=" << format_double(pass->pointwise_residual) << " morse_index=" << pass->morse_index << '\n';
  }
  const SolutionReport& primary = nehari ? *nehari : *pass;
  nlohmann::ordered_json j = solution_json(primary, *g);
  j["problem"] = problem_json(cfg, spec);
  const double lambda = certified_lambda(spec);
  const LinftyBound lb = check_linfty_lower_bound(spec, primary.u, lambda, std::nullopt, 1e-6);
  j["linfty"] = {{"lambda", lb.lambda}, {"epsilon", lb.epsilon}, {"delta", lb.delta}, {"sup_norm", lb.sup_norm},
                 {"pass", lb.pass}};
  if (nehari && pass) {
    j["mountain_pass"] = solution_json(*pass, *g);
    j["level_gap"] = std::abs(pass->energy - nehari->energy) / std::max(1.0, std::abs(nehari->energy));
    log << "level_gap=" << format_double(j["level_gap"].get<double>()) << '\n';
  }
  write_text_file((out / "solution.json").string(), j.dump(2) + "\n");
  write_text_file((out / "solution.csv").string(), solution_csv(primary.u, *g));
  return {g->size(), primary.energy, primary.pointwise_residual, primary.converged ? "ok" : "not-converged"};
}

inline CaseSummary run_verify(const RunConfig& cfg, const GraphPtr& g, const std::filesystem::path& out,
                              std::ostream& log) {
  if (cfg.solution_file.empty()) fail(ErrorCategory::validation, "verify needs --solution FILE");
  const std::string text = read_text_file(cfg.solution_file);
  const bool is_json = text.find('{') != std::string::npos;
  const Vector u = is_json ? load_solution_json(text, *g) : load_function(text, *g);
  const ProblemSpec spec = make_spec(cfg, g, log);
  SolutionReport r = verify_solution(spec, u, cfg.tol, cfg.seed);
  nlohmann::ordered_json j = solution_json(r, *g);
  j["problem"] = problem_json(cfg, spec);
  write_text_file((out / "verify.json").string(), j.dump(2) + "\n");
  log << "verify: energy=" << format_double(r.energy) << " residual=" << format_double(r.pointwise_residual)
      << " weak=" << format_double(r.weak_residual) << " trivial=" << r.trivial << '\n';
  return {g->size(), r.energy, r.pointwise_residual, r.converged ? "ok" : (r.trivial ? "trivial" : "residual")};
}

inline CaseSummary run_single(const std::string& command, const RunConfig& cfg, const GraphPtr& g,
                              const std::filesystem::path& out, std::ostream& log) {
  require_order(cfg.s);
  detail::require_exponent(cfg.p);
  if (command == "kernel") return run_kernel(cfg, g, out, log);
  if (command == "operators") return run_operators(cfg, g, out, log);
  if (command == "lambda") return run_lambda(cfg, g, out, log);
  if (command == "solve") return run_solve(cfg, g, out, log);
  if (command == "verify") return run_verify(cfg, g, out, log);
  fail(ErrorCategory::validation, "unknown command '" + command + "'");
}

inline void run_sweep(const RunConfig& cfg, const GraphPtr& g, const std::filesystem::path& out, std::ostream& log) {
  if (!cfg.sweep) fail(ErrorCategory::validation, "sweep needs --sweep VAR=LIST");
  if (cfg.sweep_command == "sweep") fail(ErrorCategory::validation, "a sweep cannot sweep sweeps");
  const SweepSpec& sw = *cfg.sweep;
  Index center = 0;
  if (sw.variable == "r") center = cfg.center.empty() ? 0 : g->index_of(cfg.center);
  std::ostringstream csv;
  csv << "case," << sw.variable << ",n,command,result,residual,status\n";
  for (std::size_t i = 0; i < sw.values.size(); ++i) {
    RunConfig c = cfg;
    GraphPtr gi = g;
    const double v = sw.values[i];
    if (sw.variable == "s") c.s = v;
    if (sw.variable == "p") c.p = v;
    if (sw.variable == "r") gi = share(ball_subgraph(*g, center, static_cast<int>(v)));
    char name[32];
    std::snprintf(name, sizeof name, "case_%03zu", i);
    const auto dir = prepare_out((out / name).string());
    std::ostringstream case_log;
    CaseSummary sum;
    try {
      sum = run_single(cfg.sweep_command, c, gi, dir, case_log);
    } catch (const Error& e) {
      sum.n = gi->size();
      sum.status = std::string("error:") + std::string(category_name(e.category()));
      case_log << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
    }
    write_text_file((dir / "run.log").string(), case_log.str());
    csv << i << ',' << format_double(v) << ',' << sum.n << ',' << cfg.sweep_command << ','
        << format_double(sum.result) << ',' << format_double(sum.residual) << ',' << sum.status << '\n';
    log << name << ": " << sw.variable << "=" << format_double(v) << " n=" << sum.n
        << " result=" << format_double(sum.result) << " status=" << sum.status << '\n';
  }
  write_text_file((out / "sweep.csv").string(), csv.str());
}

}  // namespace detail

/// Runs one configured command and writes its artifacts plus run.log into
/// cfg.out. Throws fracgraph::Error on failure.
inline void run(const RunConfig& cfg) {
  const auto out = detail::prepare_out(cfg.out);
  const GraphPtr g = share(build_graph(cfg));
  std::ostringstream log;
  log << "command=" << cfg.command << " seed=" << cfg.seed << '\n';
  log << "graph: n=" << g->size() << " edges=" << g->edge_count() << '\n';
  if (cfg.command == "sweep") detail::run_sweep(cfg, g, out, log);
  else detail::run_single(cfg.command, cfg, g, out, log);
  write_text_file((out / "run.log").string(), log.str());
}

/// Builds a RunConfig from argv. A --config JSON file supplies defaults whose
/// keys match the long flag names; flags given on the command line win.
inline RunConfig parse_command_line(int argc, const char* const* argv) {
  CLI::App app{"Fractional calculus on weighted graphs"};
  app.set_help_flag("-h,--help");
  RunConfig cfg;
  std::string command, config_file, sweep;
  std::string seed_text;
  app.add_option("command", command, "kernel | operators | lambda | solve | verify | sweep");
  app.add_option("--config", config_file, "JSON file with default settings");
  app.add_option("--graph", cfg.graph_file, "edge list 'a b w'");
  app.add_option("--measure", cfg.measure_file, "vertex measure 'v mu'");
  app.add_option("--builder", cfg.builder, "path:n | cycle:n | grid:nx,ny | random:n[,seed]");
  app.add_option("--s", cfg.s, "fractional order in (0,1)");
  app.add_option("--p", cfg.p, "exponent p >= 2");
  app.add_flag("--quadrature", cfg.quadrature, "assemble W_s by time quadrature of the heat kernel");
  app.add_option("--potential", cfg.potential, "const:h0 | affine:h0,c,x0 | file:PATH");
  app.add_option("--nonlinearity", cfg.nonlinearity, "power:q[,a], terms joined by '+'");
  app.add_option("--method", cfg.method, "nehari | mountainpass | both");
  app.add_option("--tol", cfg.tol, "pointwise residual tolerance");
  app.add_option("--seed", seed_text, "seed for every random choice");
  app.add_option("--starts", cfg.starts, "random starts of the Nehari solver");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--u", cfg.function_file, "vertex function for operators");
  app.add_option("--solution", cfg.solution_file, "stored solution for verify");
  app.add_option("--center", cfg.center, "ball center label for r sweeps");
  app.add_option("--sweep", sweep, "s=a:b:h | p=v1,v2 | r=a:b:h");
  app.add_option("--sweep-command", cfg.sweep_command, "command repeated by sweep");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    throw;
  } catch (const CLI::ParseError& e) {
    fail(ErrorCategory::validation, e.what());
  }

  if (!config_file.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(config_file));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCategory::validation, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorCategory::validation, "config must be a JSON object");
    auto given = [&](const std::string& flag) { return app.count(flag) > 0; };
    try {
      for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const auto& v = it.value();
        if (key == "command") { if (command.empty()) command = v.get<std::string>(); }
        else if (key == "graph") { if (!given("--graph")) cfg.graph_file = v.get<std::string>(); }
        else if (key == "measure") { if (!given("--measure")) cfg.measure_file = v.get<std::string>(); }
        else if (key == "builder") { if (!given("--builder")) cfg.builder = v.get<std::string>(); }
        else if (key == "s") { if (!given("--s")) cfg.s = v.get<double>(); }
        else if (key == "p") { if (!given("--p")) cfg.p = v.get<double>(); }
        else if (key == "quadrature") { if (!given("--quadrature")) cfg.quadrature = v.get<bool>(); }
        else if (key == "potential") { if (!given("--potential")) cfg.potential = v.get<std::string>(); }
        else if (key == "nonlinearity") { if (!given("--nonlinearity")) cfg.nonlinearity = v.get<std::string>(); }
        else if (key == "method") { if (!given("--method")) cfg.method = v.get<std::string>(); }
        else if (key == "tol") { if (!given("--tol")) cfg.tol = v.get<double>(); }
        else if (key == "seed") { if (!given("--seed")) cfg.seed = v.get<std::uint64_t>(); }
        else if (key == "starts") { if (!given("--starts")) cfg.starts = v.get<int>(); }
        else if (key == "out") { if (!given("--out")) cfg.out = v.get<std::string>(); }
        else if (key == "u") { if (!given("--u")) cfg.function_file = v.get<std::string>(); }
        else if (key == "solution") { if (!given("--solution")) cfg.solution_file = v.get<std::string>(); }
        else if (key == "center") { if (!given("--center")) cfg.center = v.get<std::string>(); }
        else if (key == "sweep") { if (!given("--sweep")) sweep = v.get<std::string>(); }
        else if (key == "sweep_command") { if (!given("--sweep-command")) cfg.sweep_command = v.get<std::string>(); }
        else fail(ErrorCategory::validation, "unknown config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCategory::validation, std::string("config value has the wrong type: ") + e.what());
    }
  }
  if (!seed_text.empty()) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(seed_text, &used);
      if (used != seed_text.size()) throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      fail(ErrorCategory::validation, "--seed must be a nonnegative integer");
    }
  }
  if (command.empty()) fail(ErrorCategory::validation, "no command given");
  cfg.command = command;
  if (!sweep.empty()) cfg.sweep = parse_sweep(sweep);
  if (!(cfg.tol > 0.0)) fail(ErrorCategory::validation, "--tol must be positive");
  if (cfg.starts < 0) fail(ErrorCategory::validation, "--starts must be nonnegative");
  return cfg;
}

/// Exit codes: 0 success, 2 validation, 3 io, 4 numerical, 5 precondition,
/// 6 convergence, 7 unsupported.
inline int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::validation: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::numerical: return 4;
    case ErrorCategory::precondition: return 5;
    case ErrorCategory::convergence: return 6;
    case ErrorCategory::unsupported: return 7;
  }
  return 1;
}

inline int main_entry(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  try {
    run(parse_command_line(argc, argv));
    return 0;
  } catch (const CLI::CallForHelp&) {
    return 0;
  } catch (const Error& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n' || c == '\r') c = ' ';
    err << "error: " << category_name(e.category()) << ": " << msg << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fracgraph
