#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "microcav/bessel.hpp"
#include "microcav/circle_modes.hpp"
#include "microcav/roots.hpp"
#include "oracles.hpp"

using namespace microcav;
namespace bm = boost::math;

namespace {
double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }
}  // namespace

TEST(Bessel, RealArgumentsAgainstBoost) {
  for (double x : {1e-3, 0.1, 0.9, 2.5, 7.0, 12.0, 16.9, 17.1, 25.0, 40.0, 80.0}) {
    const auto c = special::cylinder_functions(x);
    EXPECT_NEAR(c.j0.real(), bm::cyl_bessel_j(0, x), 1e-13) << x;
    EXPECT_NEAR(c.j1.real(), bm::cyl_bessel_j(1, x), 1e-13) << x;
    EXPECT_NEAR(c.y0.real(), bm::cyl_neumann(0, x), 1e-12 * std::max(1.0, std::abs(c.y0))) << x;
    EXPECT_NEAR(c.y1.real(), bm::cyl_neumann(1, x), 1e-12 * std::max(1.0, std::abs(c.y1))) << x;
    EXPECT_NEAR(c.j0.imag(), 0.0, 1e-14);
  }
}

TEST(Bessel, ComplexArgumentsAgainstIntegrals) {
  for (cplx z : {cplx(0.5, -0.01), cplx(8.7, -0.07), cplx(24.6, -0.2), cplx(26.0, -0.0005),
                 cplx(30.0, -0.3), cplx(3.0, 1.0)}) {
    const auto c = special::cylinder_functions(z);
    EXPECT_LT(rel(c.j0, oracle::bessel_j(0, z)), 1e-11) << z;
    EXPECT_LT(rel(c.j1, oracle::bessel_j(1, z)), 1e-11) << z;
    EXPECT_LT(rel(c.h0(), oracle::hankel1(0, z)), 1e-11) << z;
    EXPECT_LT(rel(c.h1(), oracle::hankel1(1, z)), 1e-11) << z;
  }
}

TEST(Bessel, ZeroArgumentIsSingular) {
  EXPECT_THROW(special::cylinder_functions(0.0), DomainError);
}

TEST(Bessel, WronskianHolds) {
  // J1 Y0 - J0 Y1 = 2 / (pi z)
  for (cplx z : {cplx(0.3, 0.0), cplx(9.1, -0.05), cplx(18.0, -0.4), cplx(55.0, -0.01)}) {
    const auto c = special::cylinder_functions(z);
    const cplx w = c.j1 * c.y0 - c.j0 * c.y1;
    EXPECT_LT(rel(w, 2.0 / (oracle::pi * z)), 1e-12) << z;
  }
}

TEST(BesselOrders, HigherOrdersAgainstBoost) {
  for (double x : {0.7, 5.0, 9.3, 26.3}) {
    const auto j = special::bessel_j_orders(16, x);
    const auto y = special::bessel_y_orders(16, x);
    for (int m = 0; m <= 16; ++m) {
      EXPECT_NEAR(j[std::size_t(m)].real(), bm::cyl_bessel_j(m, x), 1e-12) << m << ' ' << x;
      const double yr = bm::cyl_neumann(m, x);
      EXPECT_NEAR(y[std::size_t(m)].real(), yr, 1e-11 * std::max(1.0, std::abs(yr))) << m << ' ' << x;
    }
  }
}

TEST(BesselOrders, ComplexAgainstIntegrals) {
  const cplx z(24.66, -0.197);
  const auto j = special::bessel_j_orders(15, z);
  for (int m : {7, 8, 9, 13, 14, 15}) EXPECT_LT(rel(j[std::size_t(m)], oracle::bessel_j(m, z)), 1e-10) << m;
  const cplx k(9.04, -0.0002);
  const auto y = special::bessel_y_orders(15, k);
  for (int m : {8, 14, 15}) EXPECT_LT(rel(y[std::size_t(m)], oracle::bessel_y(m, k)), 1e-10) << m;
}

TEST(CircleModes, DirichletZeros) {
  for (auto [m, l] : {std::pair{0, 1}, {1, 3}, {8, 5}, {14, 3}, {20, 2}})
    EXPECT_NEAR(bessel_j_zero(m, l), oracle::dirichlet_zero(m, l), 1e-11) << m << ' ' << l;
  EXPECT_NEAR(bessel_j_zero(8, 5), 26.266814641176641, 1e-11);
  EXPECT_NEAR(circle_closed_eigenvalue(8, 5, 2.825), oracle::dirichlet_zero(8, 5) / 2.825, 1e-11);
}

TEST(CircleModes, CharacteristicFunctionAgainstIntegrals) {
  for (cplx k : {cplx(8.7, -0.07), cplx(9.04, -0.0002), cplx(9.3, 0.0)})
    for (int m : {8, 14}) {
      const cplx a = circle_tm_characteristic(m, 2.825, k);
      const cplx b = oracle::tm_characteristic(m, 2.825, k);
      EXPECT_LT(rel(a, b), 1e-9) << m << ' ' << k;
    }
}

TEST(CircleModes, OpenResonancesAgainstIndependentRoots) {
  for (double n : {2.825, 2.82})
    for (auto [m, l] : {std::pair{8, 5}, {14, 3}}) {
      const cplx k = circle_open_resonance(m, l, n);
      const cplx ref = oracle::tm_resonance(m, n, k + cplx(0.003, 0.002));
      EXPECT_LT(std::abs(k - ref), 1e-10) << n << ' ' << m;
      EXPECT_LT(k.imag(), 0.0);
      // labelled by the Dirichlet window it sits in
      EXPECT_LE(k.real(), oracle::dirichlet_zero(m, l) / n);
      EXPECT_GT(k.real(), oracle::dirichlet_zero(m, l - 1) / n);
    }
}

TEST(CircleModes, KnownValues) {
  const cplx a = circle_open_resonance(8, 5, 2.825);
  EXPECT_NEAR(a.real(), 8.728467105897, 1e-9);
  EXPECT_NEAR(a.imag(), -0.069841527219917, 1e-9);
  const cplx b = circle_open_resonance(14, 3, 2.825);
  EXPECT_NEAR(b.real(), 9.042812001642279, 1e-9);
  EXPECT_NEAR(b.imag(), -0.000188749262144, 1e-10);
}

TEST(Roots, MullerFindsPolynomialRoot) {
  auto logp = [](cplx z) { return std::log((z - cplx(1.0, -0.5)) * (z + 2.0) * (z - 3.0)); };
  const auto r = muller_log(logp, cplx(0.8, 0.0), cplx(1.2, 0.0), cplx(1.0, 0.1), 1e-13, 100);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(std::abs(r.root - cplx(1.0, -0.5)), 1e-11);
}

TEST(Roots, DeflationExcludesKnownRoot) {
  auto logp = [](cplx z) { return std::log((z - 1.0) * (z - 1.1)); };
  const cplx known[] = {cplx(1.0, 0.0)};
  const auto r = muller_log(logp, cplx(0.95, 0.0), cplx(1.02, 0.0), cplx(0.99, 0.01), 1e-13, 100, known);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(std::abs(r.root - 1.1), 1e-10);
}

TEST(Roots, LargeDeterminantsDoNotOverflow) {
  auto logp = [](cplx z) { return 2000.0 + std::log(z - cplx(2.0, -0.1)); };
  const auto r = muller_log(logp, cplx(1.5, 0.0), cplx(2.5, 0.0), cplx(2.0, 0.3), 1e-13, 100);
  ASSERT_TRUE(r.converged);
  EXPECT_LT(std::abs(r.root - cplx(2.0, -0.1)), 1e-11);
}

TEST(Roots, GoldenSection) {
  const auto r = golden_section_minimize([](double x) { return (x - 0.3) * (x - 0.3) + 1.0; }, 0.0, 1.0, 1e-10);
  EXPECT_NEAR(r.x, 0.3, 1e-7);
  EXPECT_NEAR(r.fx, 1.0, 1e-15);
}
