#include <gtest/gtest.h>

#include "sl2lab/cocycle.hpp"
#include "sl2lab/spectral.hpp"

using namespace sl2lab;

TEST(Bands, FreeOperator) {
  const auto bs = bands(PeriodicPotential({0.0}));
  ASSERT_EQ(bs.bands.size(), 1u);
  EXPECT_NEAR(bs.bands[0].left, -2.0, 1e-12);
  EXPECT_NEAR(bs.bands[0].right, 2.0, 1e-12);
}

TEST(Bands, PeriodTwoExample) {
  const auto bs = bands(PeriodicPotential({0.0, 3.0}));
  ASSERT_EQ(bs.bands.size(), 2u);
  EXPECT_NEAR(bs.bands[0].left, -1.0, 1e-12);
  EXPECT_NEAR(bs.bands[0].right, 0.0, 1e-12);
  EXPECT_NEAR(bs.bands[1].left, 3.0, 1e-12);
  EXPECT_NEAR(bs.bands[1].right, 4.0, 1e-12);
}

TEST(Bands, ClosedGapsMerge) {
  const auto bs = bands(PeriodicPotential({0.0, 0.0}));
  EXPECT_EQ(bs.branches.size(), 2u);
  EXPECT_EQ(bs.bands.size(), 1u);
  EXPECT_FALSE(bs.all_gaps_open());
}

TEST(Bands, TotalLengthBoundAndEdgesAreDiscriminantLevels) {
  for (int n = 2; n <= 6; ++n) {
    std::vector<double> v;
    for (int k = 0; k < n; ++k) v.push_back(std::sin(1.7 * k + n));
    const auto p = gap_open_perturb(PeriodicPotential(v), 0, 5);
    const auto bs = bands(p);
    EXPECT_EQ(static_cast<int>(bs.bands.size()), n);
    double total = 0.0;
    for (const auto& b : bs.bands) {
      total += b.length();
      EXPECT_NEAR(std::abs(discriminant(p, b.left)), 2.0, 1e-8);
      EXPECT_NEAR(std::abs(discriminant(p, b.right)), 2.0, 1e-8);
    }
    EXPECT_LE(total, 4.0 + 1e-9);
    const double e = find_hyperbolic_energy(bs);
    EXPECT_LT(std::abs(e), 3.0 * pi / n);
    EXPECT_GT(std::abs(discriminant(p, e)), 2.0);
  }
}

TEST(Bands, GapOpenPerturbValidation) {
  EXPECT_THROW(gap_open_perturb(PeriodicPotential({1.0}), 0, 1), Failure);
  EXPECT_THROW(gap_open_perturb(PeriodicPotential({1.0, 2.0}), 2, 1), Failure);
  EXPECT_THROW(PeriodicPotential(std::vector<double>{}), Failure);
}

TEST(Ids, FreeOperatorValues) {
  const auto n = ids(PeriodicPotential({0.0}));
  EXPECT_NEAR(n(0.0), 0.5, 1e-12);
  EXPECT_EQ(n(-3.0), 0.0);
  EXPECT_EQ(n(3.0), 1.0);
  EXPECT_NEAR(n(1.0), std::acos(-0.5) / pi, 1e-12);
}

TEST(Ids, GapLabelsAndMonotone) {
  const PeriodicPotential v({0.0, 3.0});
  const auto n = ids(v);
  EXPECT_NEAR(n(1.5), 0.5, 1e-12);
  double prev = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double x = n(-2.0 + 7.0 * k / 200.0);
    EXPECT_GE(x, prev - 1e-15);
    prev = x;
  }
}

TEST(Thouless, MatchesExactExponent) {
  const PeriodicPotential v({0.4, -1.1, 2.0});
  const auto n = ids(v);
  const auto base = BaseSystem::single_orbit(3);
  for (double e : {-3.5, -1.0, 0.0, 0.7, 2.2, 5.0}) {
    const double exact =
        lyapunov_periodic_exact(Cocycle::schrodinger(base, Potential::table(v.values), e)).value;
    EXPECT_NEAR(thouless_lyapunov(n, e), exact, 1e-8) << "E = " << e;
  }
}

TEST(Thouless, FreeOperatorFarEnergy) {
  EXPECT_NEAR(thouless_lyapunov(ids(PeriodicPotential({0.0})), 1000.0), 6.907754278980637, 1e-10);
  EXPECT_NEAR(thouless_lyapunov(ids(PeriodicPotential({0.0})), 0.5), 0.0, 1e-10);
}
