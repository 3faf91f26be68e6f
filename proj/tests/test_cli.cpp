#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "fracgraph/cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fracgraph;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fracgraph_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  int code = -1;
  std::string err;
};

Outcome run_cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(FRACGRAPH_CLI_PATH) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.err = fs::exists(err) ? read_text_file(err.string()) : "";
  return o;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p.string())); }

}  // namespace

TEST(Parse, FlagsOverrideConfig) {
  const auto dir = scratch("parse");
  write_text_file((dir / "cfg.json").string(), R"({"command": "solve", "s": 0.3, "seed": 4, "builder": "path:3"})");
  const std::string cfg = (dir / "cfg.json").string();
  const char* argv[] = {"fracgraph", "--config", cfg.c_str(), "--s", "0.7"};
  const auto rc = parse_command_line(5, argv);
  EXPECT_EQ(rc.command, "solve");
  EXPECT_EQ(rc.s, 0.7);
  EXPECT_EQ(rc.seed, 4u);
  EXPECT_EQ(rc.builder, "path:3");
}

TEST(Parse, SweepSpecs) {
  const auto a = parse_sweep("s=0.1:0.9:0.1");
  EXPECT_EQ(a.values.size(), 9u);
  EXPECT_EQ(parse_sweep("p=2,3,4").values, (std::vector<double>{2, 3, 4}));
  EXPECT_THROW(parse_sweep("r=1.5"), Error);
  EXPECT_THROW(parse_sweep("q=1"), Error);
}

TEST(Parse, PotentialAndNonlinearity) {
  const auto g = build_path(3);
  EXPECT_EQ(parse_potential("affine:1,2,0", g).evaluate(g), (Vector(3) << 1, 3, 5).finished());
  EXPECT_THROW(parse_potential("quadratic:1", g), Error);
  const auto f = parse_nonlinearity("power:3,2+power:5");
  ASSERT_EQ(f.terms.size(), 2u);
  EXPECT_EQ(f.f(0, 1.0), 3.0);
}

TEST(Cli, SolveK2BothMethods) {
  const auto dir = scratch("solve");
  const auto o = run_cli("solve --builder path:2 --s 0.5 --method both --out " + dir.string(), dir);
  ASSERT_EQ(o.code, 0) << o.err;
  for (const char* f : {"solution.json", "solution.csv", "run.log"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto j = read_json(dir / "solution.json");
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_LE(j["pointwise_residual"].get<double>(), 1e-8);
  EXPECT_NEAR(j["energy"].get<double>(), oracle::k2_nehari_grid_min(0.5).first, 1e-6);
  EXPECT_NEAR(j["energy"].get<double>(), j["mountain_pass"]["energy"].get<double>(), 1e-4);
  EXPECT_TRUE(j["linfty"]["pass"].get<bool>());
  EXPECT_EQ(j["u"].size(), 2u);
}

TEST(Cli, SolveIsByteDeterministic) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const std::string args = "solve --builder random:9,3 --s 0.4 --p 2.5 --nonlinearity power:4 --seed 7 --out ";
  ASSERT_EQ(run_cli(args + a.string(), a).code, 0);
  ASSERT_EQ(run_cli(args + b.string(), b).code, 0);
  EXPECT_EQ(read_text_file((a / "solution.json").string()), read_text_file((b / "solution.json").string()));
  EXPECT_EQ(read_text_file((a / "run.log").string()), read_text_file((b / "run.log").string()));
}

TEST(Cli, KernelNearOrderOne) {
  const auto dir = scratch("kernel");
  ASSERT_EQ(run_cli("kernel --builder path:2 --s 0.999 --out " + dir.string(), dir).code, 0);
  const std::string csv = read_text_file((dir / "kernel.csv").string());
  const auto line = csv.substr(csv.find("0,1,"));
  EXPECT_NEAR(std::stod(line.substr(4)), 1.0, 2e-3);
  EXPECT_TRUE(fs::exists(dir / "rowsums.csv"));
  EXPECT_EQ(read_text_file((dir / "rowsums.csv").string()).find("false"), std::string::npos);
}

TEST(Cli, QuadratureKernelRoute) {
  const auto dir = scratch("quad");
  ASSERT_EQ(run_cli("kernel --builder grid:3,3 --s 0.3 --quadrature --out " + dir.string(), dir).code, 0);
  EXPECT_NE(read_text_file((dir / "kernel.csv").string()).find("provenance=quadrature"), std::string::npos);
}

TEST(Cli, VerifyStoredSolution) {
  const auto dir = scratch("verify");
  write_text_file((dir / "u.txt").string(), "0 1\n1 1\n");
  ASSERT_EQ(run_cli("verify --builder path:2 --solution " + (dir / "u.txt").string() + " --out " + dir.string(), dir).code, 0);
  const auto j = read_json(dir / "verify.json");
  EXPECT_LE(j["pointwise_residual"].get<double>(), 1e-14);
  EXPECT_NEAR(j["energy"].get<double>(), 0.5, 1e-15);
}

TEST(Cli, OperatorsAndLambda) {
  const auto dir = scratch("ops");
  write_text_file((dir / "u.txt").string(), "1\n-2\n0.5\n3\n");
  ASSERT_EQ(run_cli("operators --builder cycle:4 --p 3 --u " + (dir / "u.txt").string() + " --out " + dir.string(), dir).code, 0);
  EXPECT_NE(read_text_file((dir / "run.log").string()).find("parts_residual="), std::string::npos);
  ASSERT_EQ(run_cli("lambda --builder cycle:4 --out " + dir.string(), dir).code, 0);
  EXPECT_NEAR(read_json(dir / "lambda.json")["lambda"].get<double>(), 1.0, 1e-10);
}

TEST(Cli, RadiusSweepOnGrid) {
  const auto dir = scratch("sweep");
  const auto o = run_cli("sweep --builder grid:7,7 --center 3_3 --potential affine:1,1,3_3 --nonlinearity power:4 "
                         "--sweep r=2:6:1 --starts 2 --out " + dir.string(), dir);
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream csv(read_text_file((dir / "sweep.csv").string()));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "case,r,n,command,result,residual,status");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_NE(line.find(",ok"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 5);
  EXPECT_TRUE(fs::exists(dir / "case_004" / "solution.json"));
}

TEST(Cli, FailuresExitNonzeroWithOneLine) {
  const auto dir = scratch("fail");
  struct Case {
    std::string args;
    int code;
    std::string category;
  };
  for (const auto& c : std::vector<Case>{
           {"solve --builder path:2 --s 1.5", 2, "validation"},
           {"solve --builder path:2 --p 1.5", 7, "unsupported"},
           {"solve --graph /nonexistent/edges.txt", 3, "io"},
           {"solve --builder path:2 --nonlinearity power:2", 2, "validation"},
           {"verify --builder path:2", 2, "validation"},
           {"frobnicate --builder path:2", 2, "validation"},
           {"solve --builder path:2 --bogus-flag", 2, "validation"},
       }) {
    const auto o = run_cli(c.args + " --out " + dir.string(), dir);
    EXPECT_EQ(o.code, c.code) << c.args;
    EXPECT_EQ(o.err.rfind("error: " + c.category + ": ", 0), 0u) << o.err;
    EXPECT_EQ(std::count(o.err.begin(), o.err.end(), '\n'), 1) << o.err;
  }
}
