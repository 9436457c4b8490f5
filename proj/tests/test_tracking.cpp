#include <cmath>

#include <gtest/gtest.h>

#include "microcav/tracking.hpp"
#include "microcav/two_level.hpp"

using namespace microcav;

namespace {

struct Trajectories {
  std::vector<double> eps;
  std::vector<cplx> z1, z2;
};

/// Two-level model with Re(w1 - w2) = eps - 0.215 and fixed decay rates; the branch of
/// the square root is followed continuously so that each series is one level.
Trajectories model_sweep(double coupling, double im1, double im2, int points = 47) {
  Trajectories t;
  cplx prev_d{};
  for (int i = 0; i < points; ++i) {
    const double e = 0.19 + 0.05 * i / (points - 1);
    TwoLevelHamiltonian h;
    h.eta_11 = 9.0 + 0.5 * (e - 0.215);
    h.eta_22 = 9.0 - 0.5 * (e - 0.215);
    h.delta_11 = {0.0, im1};
    h.delta_22 = {0.0, im2};
    h.delta_prime = coupling;
    cplx d = std::sqrt(exceptional_point_gap(h));
    if (i > 0 && std::abs(d + prev_d) < std::abs(d - prev_d)) d = -d;
    prev_d = d;
    const cplx mean = 0.5 * (h.omega_1() + h.omega_2());
    t.eps.push_back(e);
    t.z1.push_back(mean + d);
    t.z2.push_back(mean - d);
  }
  return t;
}

}  // namespace

TEST(AvoidedCrossing, TwoLevelModelMinimum) {
  const double coupling = 0.02, im1 = -0.01, im2 = -0.03;
  const auto t = model_sweep(coupling, im1, im2);
  const auto ac = detect_avoided_crossing(t.eps, t.z1, t.z2);
  ASSERT_TRUE(ac.has_value());
  const double step = t.eps[1] - t.eps[0];
  EXPECT_NEAR(ac->epsilon_star, 0.215, step);
  const double gamma = 0.5 * (im1 - im2);
  EXPECT_NEAR(ac->gap, 2.0 * std::sqrt(coupling * coupling - gamma * gamma), 1e-3);
}

TEST(AvoidedCrossing, ParallelLinesHaveNoInteriorMinimum) {
  const std::vector<double> e{0.0, 0.1, 0.2, 0.3};
  const std::vector<cplx> a{1.0, 1.1, 1.2, 1.3}, b{2.0, 2.2, 2.4, 2.6};
  EXPECT_FALSE(detect_avoided_crossing(e, a, b).has_value());
}

TEST(AvoidedCrossing, IdenticalSeries) {
  const std::vector<double> e{0.0, 0.1, 0.2, 0.3, 0.4};
  const std::vector<cplx> a{1.0, 1.1, 1.2, 1.3, 1.4};
  const auto ac = detect_avoided_crossing(e, a, a);
  ASSERT_TRUE(ac.has_value());
  EXPECT_EQ(ac->gap, 0.0);
  EXPECT_EQ(ac->index, 2u);
}

TEST(AvoidedCrossing, ShortOrMismatchedSeries) {
  EXPECT_THROW(detect_avoided_crossing({0.0, 0.1}, {1.0, 2.0}, {2.0, 3.0}), DomainError);
  EXPECT_THROW(detect_avoided_crossing({0.0, 0.1, 0.2}, {1.0, 2.0, 3.0}, {2.0, 3.0}), DomainError);
}

TEST(Regime, StrongAndWeakShapes) {
  const auto strong = model_sweep(0.02, -0.01, -0.03);
  const auto weak = model_sweep(0.005, -0.01, -0.03);
  EXPECT_EQ(classify_trajectories(strong.eps, strong.z1, strong.z2, 0.215, 0.0125), Regime::Strong);
  EXPECT_EQ(classify_trajectories(weak.eps, weak.z1, weak.z2, 0.215, 0.0125), Regime::Weak);
}

TEST(Regime, NeitherPatternIsIndeterminate) {
  const std::vector<double> e{0.2, 0.21, 0.22};
  const std::vector<cplx> a{cplx(1.0, -0.1), cplx(1.1, -0.1), cplx(1.2, -0.1)};
  const std::vector<cplx> b{cplx(2.0, -0.2), cplx(2.1, -0.2), cplx(2.2, -0.2)};
  EXPECT_THROW(classify_trajectories(e, a, b, 0.21, 0.02), IndeterminateRegimeError);
  const std::vector<cplx> c{cplx(1.2, -0.3), cplx(1.1, -0.1), cplx(1.0, 0.1)};
  EXPECT_THROW(classify_trajectories(e, a, c, 0.21, 0.02), IndeterminateRegimeError);
}

TEST(Regime, ClassificationFlipsAtExceptionalPoint) {
  const double im1 = -0.01, im2 = -0.03;
  const double critical = 0.5 * std::abs(im1 - im2);
  for (double f : {0.3, 0.6, 0.9, 0.97, 1.03, 1.2, 1.6, 3.0}) {
    const double coupling = f * critical;
    const auto t = model_sweep(coupling, im1, im2, 101);
    const auto ac = detect_avoided_crossing(t.eps, t.z1, t.z2);
    ASSERT_TRUE(ac.has_value());
    TwoLevelHamiltonian h;
    h.delta_11 = {0.0, im1};
    h.delta_22 = {0.0, im2};
    h.delta_prime = coupling;
    EXPECT_EQ(classify_trajectories(t.eps, t.z1, t.z2, ac->epsilon_star, 0.0125), classify_regime(h))
        << "coupling factor " << f;
  }
}

TEST(Regime, SignChangeThroughExactZero) {
  const std::vector<double> e{0.2, 0.21, 0.22};
  const std::vector<cplx> a{cplx(1.0, -0.1), cplx(1.1, -0.1), cplx(1.2, -0.1)};
  const std::vector<cplx> b{cplx(1.05, -0.2), cplx(1.1, -0.2), cplx(1.15, -0.2)};
  EXPECT_EQ(classify_trajectories(e, a, b, 0.21, 0.02), Regime::Weak);
}

TEST(SweepConfig, Validation) {
  SweepConfig c;
  c.epsilons = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c.epsilons = {0.0, 0.1, 0.1};
  EXPECT_THROW(c.validate(), ConfigError);
  c.epsilons = {0.2, 0.1, 0.0};
  EXPECT_NO_THROW(c.validate());
  c.epsilons = {-0.1, 0.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.epsilons = {0.0};
  c.grid_per_axis = 20;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SweepConfig, DefaultGrid) {
  const auto g = default_epsilon_grid();
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 0.23, 1e-15);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  int dense = 0;
  for (double e : g) dense += e >= 0.2 - 1e-12;
  EXPECT_GE(dense, 16);
}

TEST(ModeExchange, NeedsClosedFields) {
  SweepResult s;
  s.steps.resize(1);
  EXPECT_THROW(detect_mode_exchange(s), DomainError);
}

TEST(ModeExchange, SweepEndingBeforeCrossing) {
  auto mesh = std::make_shared<EvaluationMesh>();
  mesh->centers = {{0.0, 0.0}, {0.1, 0.0}};
  const ProbabilityGrid a{mesh, {1.0, 0.0}}, b{mesh, {0.0, 1.0}};
  SweepResult s;
  for (double e : {0.18, 0.19, 0.2}) {
    SweepStep st;
    st.epsilon = e;
    st.level[0].q_closed = a;
    st.level[0].p_open = b;  // would count as exchanged
    st.level[1].q_closed = b;
    st.level[1].p_open = a;
    s.steps.push_back(st);
  }
  s.avoided_crossing = AvoidedCrossing{0.215, 0.01, 1};
  EXPECT_FALSE(detect_mode_exchange(s));
  s.avoided_crossing->epsilon_star = 0.19;
  EXPECT_TRUE(detect_mode_exchange(s));
}

// Short sweeps on a coarse discretization.

namespace {
SweepConfig coarse(std::vector<double> eps) {
  SweepConfig c;
  c.epsilons = std::move(eps);
  c.solver.element_count = 96;
  c.grid_per_axis = 40;
  c.tracking_grid = 32;
  return c;
}
}  // namespace

TEST(Sweep, SinglePoint) {
  const auto r = sweep(coarse({0.0}));
  ASSERT_EQ(r.steps.size(), 1u);
  EXPECT_FALSE(r.avoided_crossing.has_value());
  EXPECT_FALSE(r.regime.has_value());
  EXPECT_FALSE(r.exchange_detected);
  const auto& l1 = r.steps[0].level[0];
  EXPECT_NEAR(l1.lambda, circle_closed_eigenvalue(8, 5, 2.825), 1e-6);
  EXPECT_LT(std::abs(l1.zeta - circle_open_resonance(8, 5, 2.825)), 1e-6);
  EXPECT_NEAR(l1.report.lamb_shift, l1.lambda - l1.zeta.real(), 1e-15);
  EXPECT_GT(l1.report.d_kl, 0.0);
}

TEST(Sweep, ShortContinuation) {
  std::vector<SweepStep> seen;
  const auto r = sweep(coarse({0.0, 0.02, 0.04, 0.06}),
                       [&](const SweepStep& s, const StepFields& f) {
                         seen.push_back(s);
                         EXPECT_EQ(f.open[0].amplitudes.size(), s.level[0].p_open.size());
                       });
  ASSERT_EQ(r.steps.size(), 4u);
  EXPECT_EQ(seen.size(), 4u);
  for (const auto& st : r.steps)
    for (const auto& lv : st.level) {
      EXPECT_GT(lv.overlap_closed, 0.75);
      EXPECT_GT(lv.overlap_open, 0.75);
      EXPECT_LT(lv.zeta.imag(), 0.0);
    }
  // levels stay apart and keep their ordering by decay rate
  for (const auto& st : r.steps) EXPECT_LT(st.level[0].zeta.imag(), st.level[1].zeta.imag());
  EXPECT_FALSE(r.exchange_detected);
}

TEST(Sweep, DescendingGrid) {
  const auto up = sweep(coarse({0.0, 0.02, 0.04}));
  auto c = coarse({0.04, 0.02});
  c.start = std::array<std::pair<double, cplx>, 2>{
      {{up.steps[2].level[0].lambda, up.steps[2].level[0].zeta},
       {up.steps[2].level[1].lambda, up.steps[2].level[1].zeta}}};
  const auto down = sweep(c);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_LT(std::abs(down.steps[1].level[j].zeta - up.steps[1].level[j].zeta), 1e-9);
    EXPECT_NEAR(down.steps[1].level[j].lambda, up.steps[1].level[j].lambda, 1e-9);
  }
}

TEST(Sweep, LostLevelReportsLastGoodEpsilon) {
  auto c = coarse({0.0, 0.2});
  c.min_window = 1e-4;
  SweepResult partial;
  try {
    sweep(c, {}, &partial);
    FAIL() << "expected a tracking error";
  } catch (const TrackingError& e) {
    EXPECT_DOUBLE_EQ(e.failed_epsilon(), 0.2);
    EXPECT_DOUBLE_EQ(e.last_good_epsilon(), 0.0);
  }
  EXPECT_EQ(partial.steps.size(), 1u);
}
