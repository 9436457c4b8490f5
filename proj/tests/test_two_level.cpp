#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "microcav/two_level.hpp"
#include "oracles.hpp"

using namespace microcav;

namespace {

TwoLevelHamiltonian make(cplx w1, cplx w2, double coupling) {
  TwoLevelHamiltonian h;
  h.eta_11 = w1.real();
  h.delta_11 = {0.0, w1.imag()};
  h.eta_22 = w2.real();
  h.delta_22 = {0.0, w2.imag()};
  h.delta_prime = coupling;
  return h;
}

bool same_pair(cplx a1, cplx a2, cplx b1, cplx b2, double tol) {
  const double s = std::max({1.0, std::abs(a1), std::abs(a2)});
  auto close = [&](cplx x, cplx y) { return std::abs(x - y) <= tol * s; };
  return (close(a1, b1) && close(a2, b2)) || (close(a1, b2) && close(a2, b1));
}

}  // namespace

TEST(TwoLevel, DegenerateIdentity) {
  const auto ev = eigenvalues(make({1.0, -0.02}, {1.0, -0.02}, 0.0));
  EXPECT_EQ(ev.zeta_plus, cplx(1.0, -0.02));
  EXPECT_EQ(ev.zeta_minus, cplx(1.0, -0.02));
}

TEST(TwoLevel, RealSplitting) {
  const auto h = make({1.0, 0.1}, {1.0, -0.1}, 0.2);
  const auto ev = eigenvalues(h);
  EXPECT_NEAR(ev.d.real(), std::sqrt(0.03), 1e-12);
  EXPECT_NEAR(ev.d.imag(), 0.0, 1e-12);
  EXPECT_NEAR(ev.zeta_plus.real(), 1.173205, 1e-6);
  EXPECT_NEAR(ev.zeta_minus.real(), 0.826795, 1e-6);
  const auto [a, b] = oracle::dense_eigenvalues(h.omega_1(), h.omega_2(), h.delta_prime);
  EXPECT_TRUE(same_pair(ev.zeta_plus, ev.zeta_minus, a, b, 1e-12));
}

TEST(TwoLevel, Coalescence) {
  const auto h = make({1.0, 0.1}, {1.0, -0.1}, 0.1);
  const auto ev = eigenvalues(h);
  EXPECT_NEAR(std::abs(ev.d), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(ev.zeta_plus - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(exceptional_point_gap(h)), 0.0, 1e-15);
  // At the EP the matrix is not diagonalizable: H - zeta I is rank one.
  Eigen::Matrix2cd m;
  m << h.omega_1() - 1.0, h.delta_prime, h.delta_prime, h.omega_2() - 1.0;
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m);
  EXPECT_GT(svd.singularValues()(0), 0.1);
  EXPECT_LT(svd.singularValues()(1), 1e-12);
}

TEST(TwoLevel, DiabolicPointIsDiagonalizable) {
  const auto h = make({2.0, -0.1}, {2.0, -0.1}, 0.0);
  EXPECT_EQ(exceptional_point_gap(h), cplx(0.0));
  Eigen::Matrix2cd m;
  m << h.omega_1() - h.omega_1(), 0.0, 0.0, h.omega_2() - h.omega_1();
  EXPECT_EQ(m.norm(), 0.0);
}

TEST(TwoLevel, DiagonalGap) {
  const auto h = make({1.0, 0.0}, {1.4, -0.2}, 0.0);
  const cplx half = 0.5 * (h.omega_1() - h.omega_2());
  EXPECT_NEAR(std::abs(exceptional_point_gap(h) - half * half), 0.0, 1e-15);
}

TEST(Regime, Examples) {
  EXPECT_EQ(classify_regime(make({0, 0.1}, {0, -0.1}, 0.2), 0.0), Regime::Strong);
  EXPECT_EQ(classify_regime(make({0, 0.1}, {0, -0.1}, 0.05), 0.0), Regime::Weak);
  EXPECT_EQ(classify_regime(make({0, 0.1}, {0, -0.1}, 0.1), 1e-9), Regime::Boundary);
  EXPECT_THROW(classify_regime(make({0, 0.1}, {0, -0.1}, 0.1), -1.0), DomainError);
}

TEST(TwoLevel, RandomDrawsMatchDenseSolver) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const cplx w1(u(rng), 0.3 * u(rng)), w2(u(rng), 0.3 * u(rng));
    const double c = std::abs(u(rng));
    const auto h = make(w1, w2, c);
    const auto ev = eigenvalues(h);
    const auto [a, b] = oracle::dense_eigenvalues(w1, w2, c);
    ASSERT_TRUE(same_pair(ev.zeta_plus, ev.zeta_minus, a, b, 1e-10)) << "draw " << i;
    const double s = 2.0 * c - std::abs(w1.imag() - w2.imag());
    const double tol = 1e-9;
    const auto r = classify_regime(h, tol);
    if (s > tol) ASSERT_EQ(r, Regime::Strong);
    else if (s < -tol) ASSERT_EQ(r, Regime::Weak);
    else ASSERT_EQ(r, Regime::Boundary);
  }
}
