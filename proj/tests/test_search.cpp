#include <gtest/gtest.h>

#include "sl2lab/search.hpp"

using namespace sl2lab;

TEST(TrigBasis, Shape) {
  const auto b = trig_basis(3, true);
  ASSERT_EQ(b.size(), 6u);
  EXPECT_NEAR(b[0].at(0.0).real(), 1.0, 1e-15);
  EXPECT_NEAR(b[3].at(0.25).real(), 1.0, 1e-15);
  EXPECT_NEAR(b[2].at(1.0 / 3.0).real(), 1.0, 1e-12);
}

TEST(Search, ZeroBudgetFails) {
  const auto g = BaseSystem::golden_rotation();
  SearchOptions o;
  o.budget = 0;
  try {
    search_positive_schrodinger(g, Potential::constant(g, 0.0), 0.0, 0.5, trig_basis(3), o);
    FAIL();
  } catch (const SearchFailure& f) {
    EXPECT_EQ(f.kind(), FailureKind::budget_exhausted);
  }
}

TEST(Search, NonPositiveDeltaFails) {
  const auto g = BaseSystem::golden_rotation();
  try {
    search_positive_schrodinger(g, Potential::constant(g, 0.0), 0.0, 0.0, trig_basis(3));
    FAIL();
  } catch (const SearchFailure& f) {
    EXPECT_EQ(f.kind(), FailureKind::domain);
  }
}

TEST(Search, AlreadyPositiveReturnsImmediately) {
  const auto g = BaseSystem::golden_rotation();
  const auto r = search_positive_schrodinger(g, Potential::constant(g, 0.0), 3.0, 0.5, trig_basis(3));
  EXPECT_TRUE(r.found);
  EXPECT_NEAR(r.lyapunov_at_result.value, 0.962423650119206895, 1e-3);
  EXPECT_EQ(r.perturbation_norm, 0.0);
}

TEST(Search, PeriodicBaseWarns) {
  const auto b = BaseSystem::rotation(0.25);
  const auto r = search_positive_schrodinger(b, Potential::constant(b, 0.0), 3.0, 0.5, trig_basis(1));
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Search, GoldenRotationZeroEnergy) {
  const auto g = BaseSystem::golden_rotation();
  const auto r = search_positive_schrodinger(g, Potential::constant(g, 0.0), 0.0, 0.5, trig_basis(17));
  ASSERT_TRUE(r.found);
  ASSERT_TRUE(r.v2.has_value());
  EXPECT_LT(r.perturbation_norm, 0.5);
  EXPECT_TRUE(r.reverification.positive());
  EXPECT_LE(r.phi_evaluations, SearchOptions{}.budget);
  const auto l = lyapunov_of_potential(g, Potential::constant(g, 0.0) - *r.v2, {16384, 8, 99});
  EXPECT_TRUE(l.positive());
}

TEST(Search, GeneralFromEllipticRotation) {
  const auto g = BaseSystem::golden_rotation();
  const Cocycle a = Cocycle::constant(g, Mat2::rotation(pi * (3.0 - std::sqrt(5.0))));
  const auto r = search_positive_general(a, 0.5);
  ASSERT_TRUE(r.found);
  ASSERT_TRUE(r.perturbed.has_value());
  EXPECT_LT(r.perturbation_norm, 0.5);
  EXPECT_TRUE(r.reverification.positive());
}

TEST(Search, GeneralNeedsRotationBase) {
  const auto fp = BaseSystem::fixed_point();
  EXPECT_THROW(search_positive_general(Cocycle::constant(fp, Mat2::rotation(1.0)), 0.5), Failure);
}

TEST(Quantita, PeriodTwoScan) {
  const auto b = BaseSystem::single_orbit(2);
  const auto scan = quantita_scan(b, Potential::table(std::vector<double>{1.0, -1.0}),
                                  Potential::table(std::vector<double>{0.2, -0.1}), 0.25, 16, 128);
  EXPECT_EQ(scan.t_grid.size(), 16u);
  EXPECT_EQ(scan.e_grid.size(), 128u);
  EXPECT_GE(scan.fraction, 0.9);
  EXPECT_GT(scan.precondition_value, 0.0);
}

TEST(Quantita, Preconditions) {
  const auto b = BaseSystem::single_orbit(2);
  const auto v = Potential::table(std::vector<double>{1.0, -1.0});
  EXPECT_THROW(quantita_scan(b, v, Potential::table(std::vector<double>{0.5, 0.0}), 0.25, 4, 4), Failure);
  EXPECT_THROW(quantita_scan(b, v, Potential::table(std::vector<double>{0.1, 0.0}), 0.0, 4, 4), Failure);
}
