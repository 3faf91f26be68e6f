#include <gtest/gtest.h>

#include "fracgraph/io.hpp"
#include "fracgraph/kernel.hpp"
#include "oracles.hpp"

using namespace fracgraph;

TEST(Kernel, K2ClosedForm) {
  const auto sd = spectral_decompose(build_path(2));
  for (double s : {0.25, 0.5, 0.75}) {
    const auto K = assemble_kernel_spectral(sd, s);
    EXPECT_NEAR(K.W(0, 1), oracle::k2_kernel(s), 1e-12);
    EXPECT_EQ(K.W(0, 0), 0.0);
  }
  EXPECT_NEAR(assemble_kernel_spectral(sd, 0.5).W(0, 1), std::sqrt(0.5), 1e-10);
}

TEST(Kernel, MatchesJacobiOracle) {
  for (const auto& [name, g] : oracle::graph_suite()) {
    const auto sd = spectral_decompose(g);
    for (double s : {0.25, 0.5, 0.75}) {
      const Matrix W = assemble_kernel_spectral(sd, s).W;
      const Matrix Wo = oracle::kernel(g, s);
      EXPECT_LE((W - Wo).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, Wo.cwiseAbs().maxCoeff())) << name;
      EXPECT_GE(W.minCoeff(), 0.0) << name;
      EXPECT_EQ(W, W.transpose()) << name;
    }
  }
}

TEST(Kernel, ScalingByEdgeWeight) {
  // w → c·w scales L by c, so W_s scales by c^s
  const double c = 3.0;
  for (double s : {0.25, 0.5, 0.75}) {
    const double base = assemble_kernel_spectral(spectral_decompose(build_path(4)), s).W(0, 2);
    const double scaled = assemble_kernel_spectral(spectral_decompose(build_path(4, 1.0, c)), s).W(0, 2);
    EXPECT_NEAR(scaled, std::pow(c, s) * base, 1e-12);
  }
}

TEST(Kernel, ApproachesWeightsAsOrderTendsToOne) {
  const auto sd = spectral_decompose(build_path(2));
  double prev = 1.0;
  for (double s : {0.9, 0.99, 0.999}) {
    const double gap = std::abs(assemble_kernel_spectral(sd, s).W(0, 1) - 1.0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LE(prev, 2e-3);
}

TEST(Kernel, RejectsOrderOutsideUnitInterval) {
  const auto sd = spectral_decompose(build_path(2));
  for (double s : {0.0, 1.0, -0.5, 1.5, std::nan("")}) {
    try {
      assemble_kernel_spectral(sd, s);
      ADD_FAILURE() << s;
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::validation);
    }
  }
}

TEST(Quadrature, GaussRulesIntegratePolynomials) {
  const auto gl = gauss_legendre_unit(10);
  double sum = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) sum += gl.weights[i] * std::pow(gl.nodes[i], 7);
  EXPECT_NEAR(sum, 1.0 / 8.0, 1e-14);
  // ∫_0^1 t^{-s} t^3 dt = 1/(4 − s)
  const double s = 0.3;
  const auto gj = gauss_jacobi_unit(10, s);
  sum = 0.0;
  for (std::size_t i = 0; i < gj.nodes.size(); ++i) sum += gj.weights[i] * std::pow(gj.nodes[i], 3);
  EXPECT_NEAR(sum, 1.0 / (4.0 - s), 1e-13);
}

TEST(Quadrature, MatchesSpectralRoute) {
  for (const auto& [name, g] : oracle::graph_suite()) {
    if (g.size() > 8) continue;  // the acceptance binary covers the full suite
    const auto sd = spectral_decompose(g);
    for (double s : {0.25, 0.5, 0.75}) {
      const Matrix Wq = assemble_kernel_quadrature(sd, s).W;
      const Matrix Ws = assemble_kernel_spectral(sd, s).W;
      for (Index x = 0; x < g.size(); ++x)
        for (Index y = 0; y < g.size(); ++y)
          if (x != y) EXPECT_LE(std::abs(Wq(x, y) - Ws(x, y)), 1e-6 * std::abs(Ws(x, y)) + 1e-14) << name;
    }
  }
}

TEST(RowSums, Grid4x4HeatBound) {
  const auto sd = spectral_decompose(build_grid(4, 4));
  const auto K = assemble_kernel_spectral(sd, 0.3);
  const auto rows = kernel_row_sums(K, estimate_all_Ax(sd));
  ASSERT_EQ(rows.size(), 16u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass) << r.vertex;
    EXPECT_GT(r.row_sum, 0.0);
  }
}

TEST(KernelCsv, RoundTrip) {
  const auto g = share(build_random_connected(9, 3));
  const auto K = assemble_kernel_spectral(spectral_decompose(g), 0.4);
  const auto back = load_kernel_csv(kernel_csv(K), g);
  EXPECT_EQ(back.W, K.W);
  EXPECT_EQ(back.s, K.s);
  EXPECT_EQ(back.provenance, KernelProvenance::loaded);
  EXPECT_THROW(load_kernel_csv("# s=0.4 n=3\nx,y,W\n0,1,1\n", g), Error);
}
