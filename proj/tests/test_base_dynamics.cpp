#include <gtest/gtest.h>

#include "sl2lab/base_dynamics.hpp"

using namespace sl2lab;

TEST(Step, PeriodicPhaseWraps) {
  const auto b = BaseSystem::single_orbit(3);
  const auto y = step(b, OrbitPoint{0, 2});
  EXPECT_EQ(std::get<OrbitPoint>(y).phase, 0);
}

TEST(Step, RotationAddsAlpha) {
  const auto b = BaseSystem::rotation(0.25);
  EXPECT_NEAR(std::get<CirclePoint>(step(b, CirclePoint{0.9})).x, 0.15, 1e-15);
}

TEST(Step, ShiftAdvancesWindow) {
  const auto b = BaseSystem::bernoulli({0.5, 0.5});
  const ShiftPoint p{7, 0, {0, 1, 1, 0}};
  const auto q = std::get<ShiftPoint>(step(b, p));
  EXPECT_EQ(q.index, 1);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(symbol_at(b, q, k), p.prefix[static_cast<std::size_t>(k + 1)]);
  // backward then forward returns the same symbols
  BasePoint x = q;
  advance(b, x, -5);
  advance(b, x, 5);
  EXPECT_EQ(std::get<ShiftPoint>(x).index, 1);
}

TEST(BaseSystem, Validation) {
  EXPECT_THROW(BaseSystem::periodic({{2, 0.5}, {3, 0.4}}), Failure);
  EXPECT_THROW(BaseSystem::bernoulli({0.7, 0.7}), Failure);
  EXPECT_TRUE(BaseSystem::rotation(0.25).alpha_rational());
  EXPECT_TRUE(BaseSystem::rotation(0.25).periodic_on_support());
  EXPECT_FALSE(BaseSystem::golden_rotation().alpha_rational());
}

TEST(Integrate, FixedPointConstant) {
  const auto b = BaseSystem::fixed_point();
  const auto r = integrate(b, [](const BasePoint&) { return 2.5; }, ExactSum{});
  EXPECT_EQ(r.value, 2.5);
  EXPECT_EQ(r.error_estimate, 0.0);
}

TEST(Integrate, GoldenRotationCosine) {
  const auto b = BaseSystem::golden_rotation();
  const auto r = integrate(
      b, [](const BasePoint& x) { return std::cos(2.0 * pi * std::get<CirclePoint>(x).x); }, BirkhoffOrbit{100000, 3});
  EXPECT_LT(std::abs(r.value), 1e-4);
}

TEST(Integrate, BernoulliFirstSymbol) {
  const auto b = BaseSystem::bernoulli({0.5, 0.5});
  const auto r = integrate(
      b, [&](const BasePoint& x) { return double(symbol_at(b, std::get<ShiftPoint>(x))); }, MonteCarlo{1000000, 11});
  EXPECT_LT(std::abs(r.value - 0.5), 3.0 * r.error_estimate);
  EXPECT_GT(r.error_estimate, 0.0);
}

TEST(Integrate, SchemeMismatchRejected) {
  EXPECT_THROW(integrate(BaseSystem::fixed_point(), [](const BasePoint&) { return 1.0; }, MonteCarlo{}), Failure);
}

TEST(Integrate, MuInvarianceAllFamilies) {
  const auto per = BaseSystem::periodic({{2, 0.3}, {5, 0.7}});
  const Potential pv = Potential::table(std::vector<double>{1.0, -2.0, 0.5, 0.25, 3.0, -1.0, 4.0});
  auto f_per = [&](const BasePoint& x) { return pv(per, x).real(); };
  auto g_per = [&](const BasePoint& x) { return pv(per, step(per, x)).real(); };
  EXPECT_NEAR(integrate(per, f_per, ExactSum{}).value, integrate(per, g_per, ExactSum{}).value, 1e-14);

  const auto rot = BaseSystem::golden_rotation();
  TrigPolynomial tp;
  tp.cos = {1.0, 0.5};
  tp.sin = {0.0, 0.3};
  const Potential pr(tp);
  const auto a = integrate(rot, [&](const BasePoint& x) { return pr(rot, x).real(); }, BirkhoffOrbit{20000, 1});
  const auto c = integrate(rot, [&](const BasePoint& x) { return pr(rot, step(rot, x)).real(); }, BirkhoffOrbit{20000, 1});
  EXPECT_LE(std::abs(a.value - c.value), a.error_estimate + c.error_estimate + 1e-12);

  const auto sh = BaseSystem::bernoulli({0.3, 0.7});
  const Potential ps(CylinderTable{2, 2, {1.0, -1.0, 2.0, 0.5}});
  const auto m1 = integrate(sh, [&](const BasePoint& x) { return ps(sh, x).real(); }, MonteCarlo{200000, 5});
  const auto m2 = integrate(sh, [&](const BasePoint& x) { return ps(sh, step(sh, x)).real(); }, MonteCarlo{200000, 6});
  EXPECT_LE(std::abs(m1.value - m2.value), 4.0 * std::hypot(m1.error_estimate, m2.error_estimate));
}

TEST(Integrate, DeterministicAcrossThreads) {
  const auto sh = BaseSystem::bernoulli({0.5, 0.5});
  auto f = [&](const BasePoint& x) { return double(symbol_at(sh, std::get<ShiftPoint>(x), 3)); };
  set_thread_count(1);
  const auto a = integrate(sh, f, MonteCarlo{50000, 9});
  set_thread_count(4);
  const auto b = integrate(sh, f, MonteCarlo{50000, 9});
  set_thread_count(1);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.error_estimate, b.error_estimate);
}

TEST(Potential, RepresentationsAndNorms) {
  const auto rot = BaseSystem::golden_rotation();
  TrigPolynomial tp;
  tp.constant = 0.5;
  tp.cos = {1.0};
  const Potential p(tp);
  EXPECT_TRUE(p.matches(rot));
  EXPECT_FALSE(p.matches(BaseSystem::fixed_point()));
  EXPECT_NEAR(p.at(0.0).real(), 1.5, 1e-15);
  const auto n = p.sup_norm();
  EXPECT_LE(n.lower, 1.5 + 1e-12);
  EXPECT_NEAR(n.upper, 1.5, 1e-12);
  EXPECT_NEAR(p.inf_real(), -0.5, 1e-6);
  const Potential t = Potential::table(std::vector<double>{1.0, -3.0});
  EXPECT_EQ(t.sup_norm().upper, 3.0);
  EXPECT_EQ(t.sup_norm().lower, 3.0);
  EXPECT_THROW(t.require_matches(rot), Failure);
}
